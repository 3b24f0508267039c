//! Tape symbols, their 4-bit codes, head moves and movement signals.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An element of `{0,1,2} x {0,1,2,3}` or one of the four special symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum USymbol {
    Pair(u8, u8),
    At,
    Hash,
    Percent,
    Dollar,
}

impl USymbol {
    pub const ZERO: USymbol = USymbol::Pair(0, 0);
    pub const ONE: USymbol = USymbol::Pair(1, 0);
    pub const TWO: USymbol = USymbol::Pair(2, 0);

    pub fn trit(t: u8) -> USymbol {
        assert!(t < 3, "trit out of range");
        USymbol::Pair(t, 0)
    }

    pub fn bit(b: bool) -> USymbol {
        if b {
            USymbol::ONE
        } else {
            USymbol::ZERO
        }
    }

    pub fn is_special(self) -> bool {
        !matches!(self, USymbol::Pair(..))
    }

    pub fn as_trit(self) -> Option<u8> {
        match self {
            USymbol::Pair(a, 0) => Some(a),
            _ => None,
        }
    }

    pub fn as_bit(self) -> Option<bool> {
        match self.as_trit() {
            Some(0) => Some(false),
            Some(1) => Some(true),
            _ => None,
        }
    }

    /// `(2a1+a0, 2b1+b0) -> a1 a0 b1 b0`; specials are `11xx`.
    pub fn encode(self) -> u8 {
        match self {
            USymbol::Pair(a, b) => {
                assert!(a < 3 && b < 4, "symbol out of range");
                a << 2 | b
            }
            USymbol::At => 0b1100,
            USymbol::Hash => 0b1101,
            USymbol::Percent => 0b1110,
            USymbol::Dollar => 0b1111,
        }
    }

    pub fn decode(code: u8) -> Result<USymbol> {
        if code > 0b1111 {
            return Err(Error::usage(format!("code {code} is wider than 4 bits")));
        }
        Ok(match code {
            0b1100 => USymbol::At,
            0b1101 => USymbol::Hash,
            0b1110 => USymbol::Percent,
            0b1111 => USymbol::Dollar,
            c => USymbol::Pair(c >> 2, c & 3),
        })
    }

    /// The code as four bit symbols, most significant first.
    pub fn to_bits(self) -> [USymbol; 4] {
        let c = self.encode();
        std::array::from_fn(|i| USymbol::bit(c >> (3 - i) & 1 == 1))
    }

    /// Reads a 4-bit code from four bit symbols.
    pub fn from_bits(bits: &[USymbol]) -> Option<USymbol> {
        if bits.len() != 4 {
            return None;
        }
        let mut code = 0u8;
        for s in bits {
            code = code << 1 | s.as_bit()? as u8;
        }
        USymbol::decode(code).ok()
    }
}

impl fmt::Display for USymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            USymbol::Pair(a, 0) => write!(f, "{a}"),
            USymbol::Pair(a, b) => write!(f, "{a}:{b}"),
            USymbol::At => write!(f, "@"),
            USymbol::Hash => write!(f, "#"),
            USymbol::Percent => write!(f, "%"),
            USymbol::Dollar => write!(f, "$"),
        }
    }
}

impl FromStr for USymbol {
    type Err = Error;

    /// `0`, `1`, `2`, `a:b`, or one of `@ # % $`.
    fn from_str(s: &str) -> Result<USymbol> {
        let bad = || Error::parse(s, "expected 0, 1, 2, a:b or one of @ # % $");
        match s {
            "@" => Ok(USymbol::At),
            "#" => Ok(USymbol::Hash),
            "%" => Ok(USymbol::Percent),
            "$" => Ok(USymbol::Dollar),
            _ => {
                let (a, b) = match s.split_once(':') {
                    Some((a, b)) => (a, b),
                    None => (s, "0"),
                };
                let a: u8 = a.parse().map_err(|_| bad())?;
                let b: u8 = b.parse().map_err(|_| bad())?;
                if a < 3 && b < 4 {
                    Ok(USymbol::Pair(a, b))
                } else {
                    Err(bad())
                }
            }
        }
    }
}

/// Parses whitespace-separated symbol tokens.
pub fn parse_tape(text: &str) -> Result<Vec<USymbol>> {
    text.split_whitespace()
        .enumerate()
        .map(|(i, tok)| {
            tok.parse::<USymbol>()
                .map_err(|_| Error::parse(format!("token {i}"), format!("bad symbol '{tok}'")))
        })
        .collect()
}

pub fn format_tape(tape: &[USymbol]) -> String {
    tape.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

/// Head moves, written one-hot over five cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    JumpLeft,
    Left,
    Stay,
    Right,
    JumpRight,
}

impl Move {
    pub const ALL: [Move; 5] = [Move::JumpLeft, Move::Left, Move::Stay, Move::Right, Move::JumpRight];

    fn slot(self) -> usize {
        Move::ALL.iter().position(|&m| m == self).expect("listed")
    }

    pub fn to_bits(self) -> [USymbol; 5] {
        std::array::from_fn(|i| USymbol::bit(i == self.slot()))
    }

    pub fn from_bits(bits: &[USymbol]) -> Option<Move> {
        if bits.len() != 5 {
            return None;
        }
        let ones: Vec<usize> = (0..5).filter(|&i| bits[i] == USymbol::ONE).collect();
        if ones.len() != 1 || bits.iter().any(|s| s.as_bit().is_none()) {
            return None;
        }
        Some(Move::ALL[ones[0]])
    }

    pub fn name(self) -> &'static str {
        match self {
            Move::JumpLeft => "JL",
            Move::Left => "ML",
            Move::Stay => "S",
            Move::Right => "MR",
            Move::JumpRight => "JR",
        }
    }

    pub fn from_name(s: &str) -> Option<Move> {
        Move::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// Movement signal on a west/east colour: `1000` jump left, `0100` left, `0010` right,
/// `0001` jump right, `0000` none.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Msig {
    None,
    JumpLeft,
    Left,
    Right,
    JumpRight,
}

impl Msig {
    pub fn code(self) -> u8 {
        match self {
            Msig::None => 0b0000,
            Msig::JumpLeft => 0b1000,
            Msig::Left => 0b0100,
            Msig::Right => 0b0010,
            Msig::JumpRight => 0b0001,
        }
    }

    pub fn from_code(c: u8) -> Option<Msig> {
        [Msig::None, Msig::JumpLeft, Msig::Left, Msig::Right, Msig::JumpRight]
            .into_iter()
            .find(|m| m.code() == c)
    }

    pub fn to_bits(self) -> [USymbol; 4] {
        let c = self.code();
        std::array::from_fn(|i| USymbol::bit(c >> (3 - i) & 1 == 1))
    }

    pub fn from_bits(bits: &[USymbol]) -> Option<Msig> {
        if bits.len() != 4 {
            return None;
        }
        let mut c = 0u8;
        for s in bits {
            c = c << 1 | s.as_bit()? as u8;
        }
        Msig::from_code(c)
    }
}

/// `Cread Cwrite Cmove Dread Dwrite Dmove`, 26 bit cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CdInstr {
    pub c_read: USymbol,
    pub c_write: USymbol,
    pub c_move: Move,
    pub d_read: USymbol,
    pub d_write: USymbol,
    pub d_move: Move,
}

pub const CD_INSTR_LEN: usize = 26;

impl CdInstr {
    pub fn to_bits(&self) -> Vec<USymbol> {
        let mut v = Vec::with_capacity(CD_INSTR_LEN);
        v.extend(self.c_read.to_bits());
        v.extend(self.c_write.to_bits());
        v.extend(self.c_move.to_bits());
        v.extend(self.d_read.to_bits());
        v.extend(self.d_write.to_bits());
        v.extend(self.d_move.to_bits());
        v
    }

    pub fn from_bits(bits: &[USymbol]) -> Option<CdInstr> {
        if bits.len() != CD_INSTR_LEN {
            return None;
        }
        Some(CdInstr {
            c_read: USymbol::from_bits(&bits[0..4])?,
            c_write: USymbol::from_bits(&bits[4..8])?,
            c_move: Move::from_bits(&bits[8..13])?,
            d_read: USymbol::from_bits(&bits[13..17])?,
            d_write: USymbol::from_bits(&bits[17..21])?,
            d_move: Move::from_bits(&bits[21..26])?,
        })
    }

    /// Read `%` with both heads, write it back and stay.
    pub fn boot() -> CdInstr {
        CdInstr {
            c_read: USymbol::Percent,
            c_write: USymbol::Percent,
            c_move: Move::Stay,
            d_read: USymbol::Percent,
            d_write: USymbol::Percent,
            d_move: Move::Stay,
        }
    }
}
