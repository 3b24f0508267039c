//! Local rules of the universal tileset: one tile is `(south, west, north, east)`.
//!
//! A violation is reported by a short rule id so traces and faults can name it.

use super::codec::{CdInstr, Move, Msig, USymbol, CD_INSTR_LEN};
use super::colours::{NsColour, PhaseOne, PhaseTwo, PhaseZero, WeColour, EMPTY_TINSTR};
use crate::error::{Error, Result};

pub type RuleResult = std::result::Result<(), &'static str>;

fn require(cond: bool, rule: &'static str) -> RuleResult {
    if cond {
        Ok(())
    } else {
        Err(rule)
    }
}

pub fn check_tile(south: &NsColour, west: &WeColour, north: &NsColour, east: &WeColour) -> RuleResult {
    require(west.phase() == south.phase, "phase-west")?;
    require(east.phase() == south.phase, "phase-east")?;
    match (west, east) {
        (WeColour::Zero(w), WeColour::Zero(e)) => phase_zero(south, w, north, e),
        (WeColour::One(w), WeColour::One(e)) => phase_one(south, w, north, e),
        (WeColour::Two(w), WeColour::Two(e)) => phase_two(south, w, north, e),
        _ => unreachable!("phases checked above"),
    }
}

fn phase_two(south: &NsColour, west: &PhaseTwo, north: &NsColour, east: &PhaseTwo) -> RuleResult {
    if south.a {
        require(south.symbol.is_special(), "p2-a-special")?;
    }
    if south.b {
        require(west.trit == 2, "p2-b-west")?;
        require(south.symbol == USymbol::TWO, "p2-b-symbol")?;
        require(east.trit == 1, "p2-b-east")?;
    } else if west.trit == 1 {
        require(south.symbol == USymbol::ONE, "p2-accept-symbol")?;
        require(east.trit == 0, "p2-accept-east")?;
    } else {
        require(east.trit == west.trit, "p2-pass")?;
    }
    require(north == south, "p2-north")
}

/// One comparison track of phase 1.
fn compare_track(has_head: bool, symbol: USymbol, w: u8, e: (u8, bool)) -> RuleResult {
    if has_head {
        require(w == 2, "p1-head-west")?;
        let b = symbol.as_bit().ok_or("p1-head-symbol")?;
        require(e.0 == b as u8 && e.1, "p1-head-east")
    } else {
        require(e.0 == w && !e.1, "p1-pass")
    }
}

fn phase_one(south: &NsColour, west: &PhaseOne, north: &NsColour, east: &PhaseOne) -> RuleResult {
    compare_track(south.a, south.symbol, west.a_trit, (east.a_trit, east.a_birth))?;
    compare_track(south.b, south.symbol, west.b_trit, (east.b_trit, east.b_birth))?;
    require(north.a == west.a_birth, "p1-north-a")?;
    require(north.b == west.b_birth, "p1-north-b")?;
    require(
        north.symbol == south.symbol && north.c == south.c && north.d == south.d,
        "p1-north-copy",
    )
}

fn phase_zero(south: &NsColour, west: &PhaseZero, north: &NsColour, east: &PhaseZero) -> RuleResult {
    if south.a {
        require(south.symbol.is_special(), "p0-a-special")?;
    }
    if south.b {
        require(west.tinstr == EMPTY_TINSTR, "p0-b-fresh")?;
    }
    let filled = west.filled();
    let reading = south.b || (filled > 0 && filled < CD_INSTR_LEN);
    if reading {
        let bit = south.symbol.as_bit().ok_or("p0-read-symbol")?;
        let mut expect = west.tinstr;
        expect[filled] = bit as u8;
        require(east.tinstr == expect, "p0-read-east")?;
        require(east.a_birth == (filled + 1 == CD_INSTR_LEN), "p0-a-birth")?;
    } else {
        require(east.tinstr == west.tinstr, "p0-tinstr-pass")?;
        require(!east.a_birth, "p0-a-birth")?;
    }
    require(east.ginstr == west.ginstr, "p0-ginstr")?;
    if east.b_birth {
        require(south.symbol == USymbol::Hash, "p0-b-birth")?;
    }
    let g = &west.ginstr;
    if south.c {
        require(south.symbol == g.c_read, "p0-c-read")?;
    }
    if south.d {
        require(south.symbol == g.d_read, "p0-d-read")?;
    }
    let written = match (south.c, south.d) {
        (true, true) if g.c_write != g.d_write => return Err("p0-write-conflict"),
        (true, _) => g.c_write,
        (_, true) => g.d_write,
        _ => south.symbol,
    };
    require(north.symbol == written, "p0-north-symbol")?;
    require(north.a == west.a_birth, "p0-north-a")?;
    require(north.b == west.b_birth, "p0-north-b")?;
    require(north.phase == 1, "p0-north-phase")?;
    let nc = head_track(south.c, g.c_move, south.symbol, west.c_sig, east.c_sig).ok_or("p0-c-move")?;
    require(north.c == nc, "p0-north-c")?;
    let nd = head_track(south.d, g.d_move, south.symbol, west.d_sig, east.d_sig).ok_or("p0-d-move")?;
    require(north.d == nd, "p0-north-d")
}

/// Whether the head is present above this cell, or `None` if the signals are inconsistent.
fn head_track(has_head: bool, mv: Move, symbol: USymbol, w: Msig, e: Msig) -> Option<bool> {
    use Msig as S;
    if has_head {
        let expect = match mv {
            Move::Stay => (S::None, S::None),
            Move::Right => (S::None, S::Right),
            Move::JumpRight => (S::None, S::JumpRight),
            Move::Left => (S::Left, S::None),
            Move::JumpLeft => (S::JumpLeft, S::None),
        };
        return ((w, e) == expect).then_some(mv == Move::Stay);
    }
    let special = symbol.is_special();
    match (w, e) {
        (S::None, S::None) => Some(false),
        (S::Right, S::None) | (S::None, S::Left) => Some(true),
        (S::JumpRight, S::None) | (S::None, S::JumpLeft) if special => Some(true),
        (S::JumpRight, S::JumpRight) | (S::JumpLeft, S::JumpLeft) if !special => Some(false),
        _ => None,
    }
}

pub fn check_west_border(w: &WeColour) -> RuleResult {
    match w {
        WeColour::Zero(z) => require(
            z.tinstr == EMPTY_TINSTR && z.c_sig == Msig::None && z.d_sig == Msig::None && !z.a_birth && !z.b_birth,
            "west-border-0",
        ),
        WeColour::One(o) => require(
            o.a_trit == 2 && o.b_trit == 2 && !o.a_birth && !o.b_birth,
            "west-border-1",
        ),
        WeColour::Two(t) => require(t.trit == 2, "west-border-2"),
    }
}

pub fn check_east_border(e: &WeColour) -> RuleResult {
    match e {
        WeColour::Zero(z) => require(
            z.tinstr_complete() == Some(z.ginstr)
                && z.c_sig == Msig::None
                && z.d_sig == Msig::None
                && !z.a_birth
                && !z.b_birth,
            "east-border-0",
        ),
        WeColour::One(o) => require(
            o.a_trit == o.b_trit && o.a_trit < 2 && !o.a_birth && !o.b_birth,
            "east-border-1",
        ),
        WeColour::Two(t) => require(t.trit == 0, "east-border-2"),
    }
}

/// Phase 0, `A` on the first cell, `B` on the second, `C` and `D` on the first `%`.
pub fn check_south_border(row: &[NsColour]) -> std::result::Result<(), (usize, &'static str)> {
    let first_percent = row
        .iter()
        .position(|c| c.symbol == USymbol::Percent)
        .ok_or((0, "south-no-percent"))?;
    for (i, c) in row.iter().enumerate() {
        if c.phase != 0 {
            return Err((i, "south-phase"));
        }
        if c.a != (i == 0) || c.b != (i == 1) {
            return Err((i, "south-ab"));
        }
        if c.c != (i == first_percent) || c.d != (i == first_percent) {
            return Err((i, "south-cd"));
        }
    }
    Ok(())
}

pub fn check_north_border(row: &[NsColour]) -> std::result::Result<(), (usize, &'static str)> {
    match row.iter().position(|c| c.phase != 2) {
        Some(i) => Err((i, "north-phase")),
        None => Ok(()),
    }
}

/// Checks one row of tiles: `south` and `north` have `m` cells, `we` has `m + 1` boundaries.
pub fn check_row(row_index: u64, south: &[NsColour], we: &[WeColour], north: &[NsColour]) -> Result<()> {
    let m = south.len();
    if north.len() != m || we.len() != m + 1 {
        return Err(Error::usage("row lengths do not match"));
    }
    let at = |x: usize| format!("row {row_index} cell {x}");
    check_west_border(&we[0]).map_err(|r| Error::fault(at(0), r))?;
    check_east_border(&we[m]).map_err(|r| Error::fault(at(m), r))?;
    for x in 0..m {
        check_tile(&south[x], &we[x], &north[x], &we[x + 1]).map_err(|r| Error::fault(at(x), r))?;
    }
    Ok(())
}

/// The phase-zero boundary colour carrying nothing but `ginstr`.
pub fn idle_zero(ginstr: CdInstr) -> PhaseZero {
    PhaseZero {
        tinstr: EMPTY_TINSTR,
        ginstr,
        c_sig: Msig::None,
        d_sig: Msig::None,
        a_birth: false,
        b_birth: false,
    }
}
