//! Two-headed Turing machines: JSON form, compilation to a program tape, and a direct simulator.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::codec::{CdInstr, Move, USymbol};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub from: String,
    pub read_c: USymbol,
    pub read_d: USymbol,
    pub write_c: USymbol,
    pub write_d: USymbol,
    pub move_c: Move,
    pub move_d: Move,
    pub to: String,
}

/// A deterministic machine. Heads start together on the first `%` of the tape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoHeadTm {
    pub states: Vec<String>,
    pub initial: String,
    pub accept: Vec<String>,
    /// States compiled to a fail command; reaching one is a tiling error.
    pub reject: Vec<String>,
    pub transitions: Vec<Transition>,
}

#[derive(Serialize, Deserialize)]
struct TransitionJson {
    from: String,
    #[serde(rename = "readC")]
    read_c: String,
    #[serde(rename = "readD")]
    read_d: String,
    #[serde(rename = "writeC")]
    write_c: String,
    #[serde(rename = "writeD")]
    write_d: String,
    #[serde(rename = "moveC")]
    move_c: String,
    #[serde(rename = "moveD")]
    move_d: String,
    to: String,
}

#[derive(Serialize, Deserialize)]
struct TmJson {
    states: Vec<String>,
    initial: String,
    #[serde(default)]
    accept: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    reject: Vec<String>,
    #[serde(default)]
    transitions: Vec<TransitionJson>,
}

impl TwoHeadTm {
    pub fn new(
        states: Vec<String>,
        initial: &str,
        accept: Vec<String>,
        reject: Vec<String>,
        transitions: Vec<Transition>,
    ) -> Result<Self> {
        let tm = TwoHeadTm {
            states,
            initial: initial.to_string(),
            accept,
            reject,
            transitions,
        };
        tm.validate()?;
        Ok(tm)
    }

    fn validate(&self) -> Result<()> {
        let known: BTreeSet<&str> = self.states.iter().map(String::as_str).collect();
        if known.len() != self.states.len() {
            return Err(Error::parse("states", "duplicate state"));
        }
        if self.states.is_empty() {
            return Err(Error::parse("states", "no states"));
        }
        let check = |s: &str, at: String| {
            if known.contains(s) {
                Ok(())
            } else {
                Err(Error::parse(at, format!("unknown state '{s}'")))
            }
        };
        check(&self.initial, "initial".into())?;
        for (i, s) in self.accept.iter().enumerate() {
            check(s, format!("accept[{i}]"))?;
        }
        for (i, s) in self.reject.iter().enumerate() {
            check(s, format!("reject[{i}]"))?;
            if self.accept.contains(s) {
                return Err(Error::parse(format!("reject[{i}]"), "state both accepts and rejects"));
            }
        }
        let mut seen = BTreeSet::new();
        for (i, t) in self.transitions.iter().enumerate() {
            check(&t.from, format!("transitions[{i}].from"))?;
            check(&t.to, format!("transitions[{i}].to"))?;
            if !seen.insert((t.from.as_str(), t.read_c, t.read_d)) {
                return Err(Error::validity(format!(
                    "nondeterministic: transitions[{i}] repeats ({}, {}, {})",
                    t.from, t.read_c, t.read_d
                )));
            }
        }
        Ok(())
    }

    /// `t = ceil(log2 k)`, at least 1.
    pub fn id_len(&self) -> usize {
        let k = self.states.len();
        (usize::BITS - (k - 1).leading_zeros()).max(1) as usize
    }

    /// The initial state gets id `0^t`; the others follow in listed order.
    pub fn ids(&self) -> BTreeMap<String, Vec<bool>> {
        let t = self.id_len();
        let order = std::iter::once(&self.initial).chain(self.states.iter().filter(|s| **s != self.initial));
        order
            .enumerate()
            .map(|(n, s)| (s.clone(), (0..t).map(|i| n >> (t - 1 - i) & 1 == 1).collect()))
            .collect()
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let raw: TmJson = serde_json::from_value(v.clone()).map_err(|e| Error::parse("tm", e.to_string()))?;
        let sym = |s: &str, at: String| {
            s.parse::<USymbol>()
                .map_err(|_| Error::parse(at, format!("bad symbol '{s}'")))
        };
        let mv = |s: &str, at: String| Move::from_name(s).ok_or_else(|| Error::parse(at, format!("bad move '{s}'")));
        let transitions = raw
            .transitions
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let at = |f: &str| format!("transitions[{i}].{f}");
                Ok(Transition {
                    from: t.from.clone(),
                    read_c: sym(&t.read_c, at("readC"))?,
                    read_d: sym(&t.read_d, at("readD"))?,
                    write_c: sym(&t.write_c, at("writeC"))?,
                    write_d: sym(&t.write_d, at("writeD"))?,
                    move_c: mv(&t.move_c, at("moveC"))?,
                    move_d: mv(&t.move_d, at("moveD"))?,
                    to: t.to.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        TwoHeadTm::new(raw.states, &raw.initial, raw.accept, raw.reject, transitions)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let raw = TmJson {
            states: self.states.clone(),
            initial: self.initial.clone(),
            accept: self.accept.clone(),
            reject: self.reject.clone(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionJson {
                    from: t.from.clone(),
                    read_c: t.read_c.to_string(),
                    read_d: t.read_d.to_string(),
                    write_c: t.write_c.to_string(),
                    write_d: t.write_d.to_string(),
                    move_c: t.move_c.name().into(),
                    move_d: t.move_d.name().into(),
                    to: t.to.clone(),
                })
                .collect(),
        };
        serde_json::to_value(raw).expect("plain data")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        TwoHeadTm::from_json(&v)
    }

    /// One state, accepting at once.
    pub fn immediate_accept() -> Self {
        TwoHeadTm::new(vec!["q0".into()], "q0", vec!["q0".into()], vec![], vec![]).expect("valid")
    }

    /// One state whose only command is a fail.
    pub fn immediate_fail() -> Self {
        TwoHeadTm::new(vec!["q0".into()], "q0", vec![], vec!["q0".into()], vec![]).expect("valid")
    }
}

/// A compiled program tape, from `@` up to and including the closing `%`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledTm {
    pub tape: Vec<USymbol>,
    pub id_len: usize,
}

fn push_bits(out: &mut Vec<USymbol>, bits: &[bool]) {
    out.extend(bits.iter().map(|&b| USymbol::bit(b)));
}

pub fn compile_tm(tm: &TwoHeadTm) -> CompiledTm {
    let ids = tm.ids();
    let t = tm.id_len();
    let mut tape = vec![USymbol::At];
    tape.extend(CdInstr::boot().to_bits());
    push_bits(&mut tape, &vec![false; t]);
    for tr in &tm.transitions {
        tape.push(USymbol::Hash);
        push_bits(&mut tape, &ids[&tr.from]);
        let instr = CdInstr {
            c_read: tr.read_c,
            c_write: tr.write_c,
            c_move: tr.move_c,
            d_read: tr.read_d,
            d_write: tr.write_d,
            d_move: tr.move_d,
        };
        tape.extend(instr.to_bits());
        push_bits(&mut tape, &ids[&tr.to]);
    }
    for (halt, last) in tm
        .accept
        .iter()
        .map(|s| (s, USymbol::ONE))
        .chain(tm.reject.iter().map(|s| (s, USymbol::ZERO)))
    {
        tape.push(USymbol::Hash);
        push_bits(&mut tape, &ids[halt]);
        tape.push(USymbol::TWO);
        tape.push(last);
    }
    tape.push(USymbol::Percent);
    CompiledTm { tape, id_len: t }
}

/// `program data $` padded with `2` to `2^n` cells.
pub fn full_tape(program: &[USymbol], data: &[USymbol], log2_size: u32) -> Result<Vec<USymbol>> {
    if log2_size >= usize::BITS - 1 {
        return Err(Error::usage(format!("log2 size {log2_size} is too large")));
    }
    let size = 1usize << log2_size;
    let used = program.len() + data.len() + 1;
    if used > size {
        return Err(Error::usage(format!(
            "tape needs {used} cells but the square has {size}"
        )));
    }
    let mut tape = Vec::with_capacity(size);
    tape.extend_from_slice(program);
    tape.extend_from_slice(data);
    tape.push(USymbol::Dollar);
    tape.resize(size, USymbol::TWO);
    Ok(tape)
}

/// Position after one head move, or `None` if it leaves the tape or finds no special symbol.
pub fn move_head(tape: &[USymbol], p: usize, mv: Move) -> Option<usize> {
    match mv {
        Move::Stay => Some(p),
        Move::Right => (p + 1 < tape.len()).then_some(p + 1),
        Move::Left => p.checked_sub(1),
        Move::JumpRight => (p + 1..tape.len()).find(|&q| tape[q].is_special()),
        Move::JumpLeft => (0..p).rev().find(|&q| tape[q].is_special()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefOutcome {
    Accept {
        steps: u64,
        tape: Vec<USymbol>,
    },
    /// Halted in a reject state or without an applicable transition.
    Halt {
        steps: u64,
        state: String,
    },
    /// A head left the tape or both heads wrote different symbols to one cell.
    Crash {
        steps: u64,
    },
    OutOfSteps,
}

/// Runs the machine directly on `tape` for at most `max_steps` transitions.
pub fn run_reference(tm: &TwoHeadTm, tape: &[USymbol], max_steps: u64) -> RefOutcome {
    let mut tape = tape.to_vec();
    let Some(start) = tape.iter().position(|&s| s == USymbol::Percent) else {
        return RefOutcome::Crash { steps: 0 };
    };
    let table: BTreeMap<(&str, USymbol, USymbol), &Transition> = tm
        .transitions
        .iter()
        .map(|t| ((t.from.as_str(), t.read_c, t.read_d), t))
        .collect();
    let (mut c, mut d) = (start, start);
    let mut state = tm.initial.as_str();
    for steps in 0..=max_steps {
        if tm.accept.iter().any(|s| s == state) {
            return RefOutcome::Accept { steps, tape };
        }
        if steps == max_steps {
            break;
        }
        let Some(tr) = table.get(&(state, tape[c], tape[d])) else {
            return RefOutcome::Halt {
                steps,
                state: state.to_string(),
            };
        };
        if c == d && tr.write_c != tr.write_d {
            return RefOutcome::Crash { steps };
        }
        tape[c] = tr.write_c;
        tape[d] = tr.write_d;
        match (move_head(&tape, c, tr.move_c), move_head(&tape, d, tr.move_d)) {
            (Some(nc), Some(nd)) => (c, d) = (nc, nd),
            _ => return RefOutcome::Crash { steps: steps + 1 },
        }
        state = tr.to.as_str();
    }
    RefOutcome::OutOfSteps
}
