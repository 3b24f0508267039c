//! Row-by-row simulation of the universal tileset on a `2^n` square.
//!
//! The simulator picks the intended successor of each row and then re-validates every tile
//! of the row pair with the declarative rules.

use super::codec::{CdInstr, Msig, USymbol, CD_INSTR_LEN};
use super::colours::{NsColour, PhaseOne, PhaseTwo, WeColour};
use super::machine::{compile_tm, full_tape, move_head, TwoHeadTm};
use super::rules::{check_north_border, check_row, check_south_border, idle_zero};
use crate::error::{Error, Result};

/// The south border row: `A` at 0, `B` at 1, `C` and `D` on the first `%`.
pub fn initial_row(tape: &[USymbol]) -> Result<Vec<NsColour>> {
    if tape.len() < 2 {
        return Err(Error::usage("tape shorter than two cells"));
    }
    let first = tape
        .iter()
        .position(|&s| s == USymbol::Percent)
        .ok_or_else(|| Error::usage("tape has no %"))?;
    let row: Vec<NsColour> = tape
        .iter()
        .enumerate()
        .map(|(i, &s)| NsColour {
            phase: 0,
            symbol: s,
            a: i == 0,
            b: i == 1,
            c: i == first,
            d: i == first,
        })
        .collect();
    check_south_border(&row).map_err(|(i, r)| Error::fault(format!("row 0 cell {i}"), r))?;
    Ok(row)
}

/// Length of the state ids: the bits between the boot instruction and the next special symbol.
pub fn derive_id_len(tape: &[USymbol]) -> Result<usize> {
    let start = 1 + CD_INSTR_LEN;
    let t = tape
        .get(start..)
        .unwrap_or(&[])
        .iter()
        .take_while(|s| s.as_bit().is_some())
        .count();
    if t == 0 {
        return Err(Error::usage("tape carries no state id after the boot instruction"));
    }
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Heads {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

fn unique(row: &[NsColour], row_index: u64, name: &'static str, f: impl Fn(&NsColour) -> bool) -> Result<usize> {
    let mut it = row.iter().enumerate().filter(|(_, c)| f(c)).map(|(i, _)| i);
    match (it.next(), it.next()) {
        (Some(i), None) => Ok(i),
        _ => Err(Error::fault(format!("row {row_index}"), name)),
    }
}

pub fn heads(row: &[NsColour], row_index: u64) -> Result<Heads> {
    Ok(Heads {
        a: unique(row, row_index, "head-a-count", |c| c.a)?,
        b: unique(row, row_index, "head-b-count", |c| c.b)?,
        c: unique(row, row_index, "head-c-count", |c| c.c)?,
        d: unique(row, row_index, "head-d-count", |c| c.d)?,
    })
}

/// The phase of the row above a phase-1 row, read off the heads.
fn next_phase(north: &[NsColour], row_index: u64) -> Result<u8> {
    let h = heads(north, row_index + 1)?;
    let sym = |i: usize| north.get(i).map(|c| c.symbol);
    let a = north[h.a].symbol;
    if a.as_bit().is_some() {
        return Ok(1);
    }
    let b = north[h.b].symbol;
    if a.is_special() && b.as_bit().is_some() {
        return Ok(0);
    }
    if b == USymbol::TWO && sym(h.b + 1) == Some(USymbol::ONE) {
        return Ok(2);
    }
    Err(Error::fault(
        format!("row {} cell {}", row_index + 1, h.b),
        "no-next-phase",
    ))
}

/// The successor of `south` together with the witnessing west/east colours.
pub fn successor_row(south: &[NsColour], id_len: usize, row_index: u64) -> Result<(Vec<WeColour>, Vec<NsColour>)> {
    let phase = south.first().ok_or_else(|| Error::usage("empty row"))?.phase;
    if let Some(i) = south.iter().position(|c| c.phase != phase) {
        return Err(Error::fault(format!("row {row_index} cell {i}"), "phase-mixed"));
    }
    let (we, north) = match phase {
        0 => phase_zero(south, id_len, row_index)?,
        1 => phase_one(south, row_index)?,
        _ => phase_two(south),
    };
    check_row(row_index, south, &we, &north)?;
    Ok((we, north))
}

fn phase_two(south: &[NsColour]) -> (Vec<WeColour>, Vec<NsColour>) {
    let mut w = 2u8;
    let mut we = vec![WeColour::Two(PhaseTwo { trit: w })];
    for c in south {
        w = if c.b {
            1
        } else if w == 1 {
            0
        } else {
            w
        };
        we.push(WeColour::Two(PhaseTwo { trit: w }));
    }
    (we, south.to_vec())
}

fn phase_one(south: &[NsColour], row_index: u64) -> Result<(Vec<WeColour>, Vec<NsColour>)> {
    let mut w = PhaseOne {
        a_trit: 2,
        b_trit: 2,
        a_birth: false,
        b_birth: false,
    };
    let mut we = vec![WeColour::One(w)];
    let mut north = Vec::with_capacity(south.len());
    for (x, c) in south.iter().enumerate() {
        north.push(NsColour {
            phase: 1,
            symbol: c.symbol,
            a: w.a_birth,
            b: w.b_birth,
            c: c.c,
            d: c.d,
        });
        let capture = |has: bool, trit: u8, name| -> Result<(u8, bool)> {
            if !has {
                return Ok((trit, false));
            }
            let bit = c
                .symbol
                .as_bit()
                .ok_or_else(|| Error::fault(format!("row {row_index} cell {x}"), name))?;
            Ok((bit as u8, true))
        };
        let (a_trit, a_birth) = capture(c.a, w.a_trit, "p1-head-symbol")?;
        let (b_trit, b_birth) = capture(c.b, w.b_trit, "p1-head-symbol")?;
        w = PhaseOne {
            a_trit,
            b_trit,
            a_birth,
            b_birth,
        };
        we.push(WeColour::One(w));
    }
    let phase = next_phase(&north, row_index)?;
    for c in &mut north {
        c.phase = phase;
    }
    Ok((we, north))
}

fn phase_zero(south: &[NsColour], id_len: usize, row_index: u64) -> Result<(Vec<WeColour>, Vec<NsColour>)> {
    let m = south.len();
    let h = heads(south, row_index)?;
    let fault = |x: usize, rule: &'static str| Error::fault(format!("row {row_index} cell {x}"), rule);
    let symbols: Vec<USymbol> = south.iter().map(|c| c.symbol).collect();
    let ginstr = symbols
        .get(h.b..h.b + CD_INSTR_LEN)
        .and_then(CdInstr::from_bits)
        .ok_or_else(|| fault(h.b, "p0-instr"))?;

    let new_c = move_head(&symbols, h.c, ginstr.c_move).ok_or_else(|| fault(h.c, "p0-c-move"))?;
    let new_d = move_head(&symbols, h.d, ginstr.d_move).ok_or_else(|| fault(h.d, "p0-d-move"))?;
    let c_sig = signals(m, h.c, new_c, ginstr.c_move);
    let d_sig = signals(m, h.d, new_d, ginstr.d_move);

    let mut north: Vec<NsColour> = south
        .iter()
        .enumerate()
        .map(|(x, c)| {
            let symbol = if c.c {
                ginstr.c_write
            } else if c.d {
                ginstr.d_write
            } else {
                c.symbol
            };
            NsColour {
                phase: 1,
                symbol,
                a: x == h.b + CD_INSTR_LEN,
                b: false,
                c: x == new_c,
                d: x == new_d,
            }
        })
        .collect();
    let new_a = h.b + CD_INSTR_LEN;
    let new_b =
        find_b_birth(south, &north, new_a, id_len, new_c, new_d).ok_or_else(|| fault(new_a, "p0-no-command"))?;
    north[new_b].b = true;

    let mut w = idle_zero(ginstr);
    let mut we = Vec::with_capacity(m + 1);
    we.push(WeColour::Zero(w));
    for (x, c) in south.iter().enumerate() {
        let filled = w.filled();
        let mut e = idle_zero(ginstr);
        e.tinstr = w.tinstr;
        if c.b || (filled > 0 && filled < CD_INSTR_LEN) {
            let bit = c.symbol.as_bit().ok_or_else(|| fault(x, "p0-read-symbol"))?;
            e.tinstr[filled] = bit as u8;
            e.a_birth = filled + 1 == CD_INSTR_LEN;
        }
        e.c_sig = c_sig[x + 1];
        e.d_sig = d_sig[x + 1];
        e.b_birth = x + 1 == new_b;
        we.push(WeColour::Zero(e));
        w = e;
    }
    Ok((we, north))
}

/// Signals on boundaries `0..=m`; boundary `i` is the west side of cell `i`.
fn signals(m: usize, p: usize, q: usize, mv: super::codec::Move) -> Vec<Msig> {
    use super::codec::Move;
    let mut s = vec![Msig::None; m + 1];
    match mv {
        Move::Stay => {}
        Move::Right => s[p + 1] = Msig::Right,
        Move::Left => s[p] = Msig::Left,
        Move::JumpRight => s[p + 1..=q].fill(Msig::JumpRight),
        Move::JumpLeft => s[q + 1..=p].fill(Msig::JumpLeft),
    }
    s
}

/// The cell after the first `#` whose id matches the one under `A` and whose command applies.
fn find_b_birth(south: &[NsColour], north: &[NsColour], a: usize, t: usize, c: usize, d: usize) -> Option<usize> {
    let id = north.get(a..a + t)?;
    if id.iter().any(|x| x.symbol.as_bit().is_none()) {
        return None;
    }
    let sym = |i: usize| north.get(i).map(|x| x.symbol);
    (0..south.len())
        .find(|&h| {
            if south[h].symbol != USymbol::Hash {
                return false;
            }
            let Some(cand) = north.get(h + 1..h + 1 + t) else {
                return false;
            };
            if cand.iter().zip(id).any(|(x, y)| x.symbol != y.symbol) {
                return false;
            }
            let cmd = h + 1 + t;
            if sym(cmd) == Some(USymbol::TWO) && matches!(sym(cmd + 1), Some(USymbol::ONE) | Some(USymbol::ZERO)) {
                return true;
            }
            let bits: Option<Vec<USymbol>> = (cmd..cmd + CD_INSTR_LEN).map(sym).collect();
            match bits.as_deref().and_then(CdInstr::from_bits) {
                Some(g) => g.c_read == north[c].symbol && g.d_read == north[d].symbol,
                None => false,
            }
        })
        .map(|h| h + 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRow {
    pub row: u64,
    pub phase: u8,
    pub heads: Heads,
}

impl std::fmt::Display for TraceRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let h = &self.heads;
        write!(
            f,
            "row={} phase={} A={} B={} C={} D={}",
            self.row, self.phase, h.a, h.b, h.c, h.d
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    /// Index of the first phase-2 row.
    pub accept_row: u64,
    pub id_len: usize,
    pub trace: Vec<TraceRow>,
    /// Data row when phase 2 was reached.
    pub final_row: Vec<NsColour>,
}

impl RunReport {
    pub fn phases(&self) -> Vec<u8> {
        self.trace.iter().map(|r| r.phase).collect()
    }
}

/// Runs the square of side `tape.len()` from the south border row given by `tape`.
pub fn run_square(tape: &[USymbol], keep_trace: bool) -> Result<RunReport> {
    let side = tape.len() as u64;
    if !tape.len().is_power_of_two() {
        return Err(Error::usage("tape length must be a power of two"));
    }
    let id_len = derive_id_len(tape)?;
    let mut row = initial_row(tape)?;
    let mut trace = Vec::new();
    for r in 0..side {
        if keep_trace {
            trace.push(TraceRow {
                row: r,
                phase: row[0].phase,
                heads: heads(&row, r)?,
            });
        }
        if row[0].phase == 2 {
            // Phase-2 rows copy upward, so one validated step settles the whole column.
            let (_, north) = successor_row(&row, id_len, r)?;
            check_north_border(&north).map_err(|(i, rule)| Error::fault(format!("row {r} cell {i}"), rule))?;
            return Ok(RunReport {
                accept_row: r,
                id_len,
                trace,
                final_row: row,
            });
        }
        if r + 1 == side {
            break;
        }
        row = successor_row(&row, id_len, r)?.1;
    }
    Err(Error::Timeout { rows: side })
}

/// Compiles `tm`, lays out `data` and runs the `2^n` square.
pub fn run_machine(tm: &TwoHeadTm, data: &[USymbol], log2_size: u32, keep_trace: bool) -> Result<RunReport> {
    let prog = compile_tm(tm);
    let tape = full_tape(&prog.tape, data, log2_size)?;
    run_square(&tape, keep_trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::universal::codec::parse_tape;
    use crate::universal::machine::{run_reference, RefOutcome};
    use crate::universal::rules::check_tile;

    #[test]
    fn immediate_accept_reaches_phase_two() {
        let rep = run_machine(&TwoHeadTm::immediate_accept(), &[], 8, true).unwrap();
        assert_eq!(rep.id_len, 1);
        assert_eq!(rep.accept_row, 2);
        assert_eq!(rep.phases(), vec![0, 1, 2]);
    }

    #[test]
    fn fail_command_faults() {
        let err = run_machine(&TwoHeadTm::immediate_fail(), &[], 8, false).unwrap_err();
        assert!(matches!(err, Error::Fault { .. }), "{err:?}");
    }

    #[test]
    fn initial_row_heads() {
        let prog = compile_tm(&TwoHeadTm::immediate_accept());
        let tape = full_tape(&prog.tape, &[], 6).unwrap();
        let row = initial_row(&tape).unwrap();
        let h = heads(&row, 0).unwrap();
        assert_eq!((h.a, h.b), (0, 1));
        assert_eq!(h.c, prog.tape.len() - 1);
        assert_eq!(h.c, h.d);
        assert!(initial_row(&parse_tape("@ 0 1").unwrap()).is_err());
    }

    #[test]
    fn phase_one_moves_both_heads() {
        let mut row: Vec<NsColour> = parse_tape("# 1 0 # 1 0 % 2")
            .unwrap()
            .into_iter()
            .map(|s| NsColour::plain(1, s))
            .collect();
        row[1].a = true;
        row[4].b = true;
        row[6].c = true;
        row[6].d = true;
        let (we, north) = successor_row(&row, 2, 0).unwrap();
        let h = heads(&north, 1).unwrap();
        assert_eq!((h.a, h.b), (2, 5));
        assert_eq!(north[0].phase, 1);
        for x in 0..row.len() {
            assert_eq!(check_tile(&row[x], &we[x], &north[x], &we[x + 1]), Ok(()));
        }
        let mut unequal = row.clone();
        unequal[4].symbol = USymbol::ZERO;
        assert!(successor_row(&unequal, 2, 0).is_err());
    }

    fn walker() -> TwoHeadTm {
        let v = serde_json::json!({
            "states": ["start", "walk", "back", "done"],
            "initial": "start",
            "accept": ["done"],
            "transitions": [
                {"from": "start", "readC": "%", "readD": "%", "writeC": "%", "writeD": "%", "moveC": "MR", "moveD": "JR", "to": "walk"},
                {"from": "walk", "readC": "1", "readD": "$", "writeC": "0", "writeD": "$", "moveC": "MR", "moveD": "S", "to": "walk"},
                {"from": "walk", "readC": "$", "readD": "$", "writeC": "$", "writeD": "$", "moveC": "JL", "moveD": "ML", "to": "back"},
                {"from": "back", "readC": "%", "readD": "0", "writeC": "%", "writeD": "1:2", "moveC": "S", "moveD": "S", "to": "done"}
            ]
        });
        TwoHeadTm::from_json(&v).unwrap()
    }

    #[test]
    fn agrees_with_reference() {
        let tm = walker();
        let data = parse_tape("1 1 1").unwrap();
        let rep = run_machine(&tm, &data, 8, true).unwrap();
        let prog = compile_tm(&tm);
        let tape = full_tape(&prog.tape, &data, 8).unwrap();
        let RefOutcome::Accept { steps, tape: out } = run_reference(&tm, &tape, 1000) else {
            panic!("reference did not accept");
        };
        let t = rep.id_len as u64;
        assert_eq!(t, 2);
        assert_eq!(rep.accept_row, (steps + 1) * (t + 1));
        let tiles: Vec<USymbol> = rep.final_row.iter().map(|c| c.symbol).collect();
        assert_eq!(tiles, out);
        let phases = rep.phases();
        let zeros: Vec<usize> = (0..phases.len()).filter(|&i| phases[i] == 0).collect();
        for w in zeros.windows(2) {
            assert_eq!(w[1] - w[0], t as usize + 1);
        }
    }

    #[test]
    fn timeout_on_small_square() {
        let tm = walker();
        let short: Vec<USymbol> = vec![USymbol::ONE; 12];
        assert!(run_machine(&tm, &short, 8, false).is_ok());
        // 304 machine steps need 915 rows, more than the 512-row square.
        let long: Vec<USymbol> = vec![USymbol::ONE; 300];
        assert!(matches!(
            run_machine(&tm, &long, 9, false),
            Err(Error::Timeout { rows: 512 })
        ));
    }
}
