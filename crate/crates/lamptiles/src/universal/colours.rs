//! South/north colours (9 symbols) and west/east colours (63 symbols) with their grammars.

use super::codec::{CdInstr, Msig, USymbol, CD_INSTR_LEN};
use crate::error::{Error, Result};

pub const NS_LEN: usize = 9;
pub const WE_LEN: usize = 63;

/// `phase symbol A B C D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NsColour {
    pub phase: u8,
    pub symbol: USymbol,
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub d: bool,
}

impl NsColour {
    pub fn plain(phase: u8, symbol: USymbol) -> Self {
        NsColour {
            phase,
            symbol,
            a: false,
            b: false,
            c: false,
            d: false,
        }
    }

    pub fn to_symbols(&self) -> Vec<USymbol> {
        let mut v = Vec::with_capacity(NS_LEN);
        v.push(USymbol::trit(self.phase));
        v.extend(self.symbol.to_bits());
        v.extend([self.a, self.b, self.c, self.d].map(USymbol::bit));
        v
    }

    pub fn parse(s: &[USymbol]) -> Result<Self> {
        if s.len() != NS_LEN {
            return Err(Error::parse(
                "length",
                format!("expected {NS_LEN} symbols, got {}", s.len()),
            ));
        }
        let phase = s[0]
            .as_trit()
            .ok_or_else(|| Error::parse("phase[0]", "phase must be a trit"))?;
        for (i, x) in s[1..].iter().enumerate() {
            if x.as_bit().is_none() {
                let field = if i < 4 { "symbol" } else { ["A", "B", "C", "D"][i - 4] };
                return Err(Error::parse(format!("{field}[{}]", i + 1), "expected a bit"));
            }
        }
        let bit = |i: usize| s[i] == USymbol::ONE;
        Ok(NsColour {
            phase,
            symbol: USymbol::from_bits(&s[1..5]).expect("bits checked"),
            a: bit(5),
            b: bit(6),
            c: bit(7),
            d: bit(8),
        })
    }
}

/// The west/east colour of one phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeColour {
    Zero(PhaseZero),
    One(PhaseOne),
    Two(PhaseTwo),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PhaseZero {
    /// Trits: bits read so far, then `2`s; or a complete instruction.
    pub tinstr: [u8; CD_INSTR_LEN],
    pub ginstr: CdInstr,
    pub c_sig: Msig,
    pub d_sig: Msig,
    pub a_birth: bool,
    pub b_birth: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PhaseOne {
    pub a_trit: u8,
    pub b_trit: u8,
    pub a_birth: bool,
    pub b_birth: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PhaseTwo {
    pub trit: u8,
}

pub const EMPTY_TINSTR: [u8; CD_INSTR_LEN] = [2; CD_INSTR_LEN];

impl PhaseZero {
    /// Number of bits already read into `tinstr`.
    pub fn filled(&self) -> usize {
        self.tinstr.iter().take_while(|&&t| t != 2).count()
    }

    pub fn tinstr_complete(&self) -> Option<CdInstr> {
        if self.filled() < CD_INSTR_LEN {
            return None;
        }
        let bits: Vec<USymbol> = self.tinstr.iter().map(|&t| USymbol::trit(t)).collect();
        CdInstr::from_bits(&bits)
    }
}

impl WeColour {
    pub fn phase(&self) -> u8 {
        match self {
            WeColour::Zero(_) => 0,
            WeColour::One(_) => 1,
            WeColour::Two(_) => 2,
        }
    }

    pub fn to_symbols(&self) -> Vec<USymbol> {
        let mut v = Vec::with_capacity(WE_LEN);
        v.push(USymbol::trit(self.phase()));
        match self {
            WeColour::Zero(z) => {
                v.extend(z.tinstr.iter().map(|&t| USymbol::trit(t)));
                v.extend(z.ginstr.to_bits());
                v.extend(z.c_sig.to_bits());
                v.extend(z.d_sig.to_bits());
                v.push(USymbol::bit(z.a_birth));
                v.push(USymbol::bit(z.b_birth));
            }
            WeColour::One(o) => {
                v.push(USymbol::trit(o.a_trit));
                v.push(USymbol::trit(o.b_trit));
                v.push(USymbol::bit(o.a_birth));
                v.push(USymbol::bit(o.b_birth));
            }
            WeColour::Two(t) => v.push(USymbol::trit(t.trit)),
        }
        v.resize(WE_LEN, USymbol::TWO);
        v
    }

    pub fn parse(s: &[USymbol]) -> Result<Self> {
        if s.len() != WE_LEN {
            return Err(Error::parse(
                "length",
                format!("expected {WE_LEN} symbols, got {}", s.len()),
            ));
        }
        let trit = |i: usize, field: &str| {
            s[i].as_trit()
                .ok_or_else(|| Error::parse(format!("{field}[{i}]"), "expected a trit"))
        };
        let bit = |i: usize, field: &str| {
            s[i].as_bit()
                .ok_or_else(|| Error::parse(format!("{field}[{i}]"), "expected a bit"))
        };
        let padding = |from: usize| -> Result<()> {
            match (from..WE_LEN).find(|&i| s[i] != USymbol::TWO) {
                Some(i) => Err(Error::parse(format!("padding[{i}]"), "padding must be 2")),
                None => Ok(()),
            }
        };
        match trit(0, "phase")? {
            0 => {
                let mut tinstr = [0u8; CD_INSTR_LEN];
                for (k, slot) in tinstr.iter_mut().enumerate() {
                    *slot = trit(1 + k, "tinstr")?;
                }
                let first_two = tinstr.iter().position(|&t| t == 2).unwrap_or(CD_INSTR_LEN);
                if let Some(k) = (first_two..CD_INSTR_LEN).find(|&k| tinstr[k] != 2) {
                    return Err(Error::parse(format!("tinstr[{}]", 1 + k), "a bit after a 2"));
                }
                let z = PhaseZero {
                    tinstr,
                    ginstr: CdInstr::from_bits(&s[27..53])
                        .ok_or_else(|| Error::parse("ginstr[27]", "not an instruction"))?,
                    c_sig: Msig::from_bits(&s[53..57]).ok_or_else(|| Error::parse("Cmsig[53]", "not a signal"))?,
                    d_sig: Msig::from_bits(&s[57..61]).ok_or_else(|| Error::parse("Dmsig[57]", "not a signal"))?,
                    a_birth: bit(61, "Abirth")?,
                    b_birth: bit(62, "Bbirth")?,
                };
                if first_two == CD_INSTR_LEN && z.tinstr_complete().is_none() {
                    return Err(Error::parse("tinstr[1]", "complete tinstr is not an instruction"));
                }
                Ok(WeColour::Zero(z))
            }
            1 => {
                let o = PhaseOne {
                    a_trit: trit(1, "trit")?,
                    b_trit: trit(2, "trit")?,
                    a_birth: bit(3, "Abirth")?,
                    b_birth: bit(4, "Bbirth")?,
                };
                padding(5)?;
                Ok(WeColour::One(o))
            }
            _ => {
                let t = PhaseTwo { trit: trit(1, "trit")? };
                padding(2)?;
                Ok(WeColour::Two(t))
            }
        }
    }
}
