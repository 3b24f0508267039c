//! Macrotile row layout arithmetic. All sizes are exact big integers.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest `k + c` accepted; the row length `2^(4^(k+c))` has that many quadrupled bits.
pub const MAX_LEVEL: u32 = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    pub name: String,
    pub offset: BigUint,
    pub len: BigUint,
}

impl Field {
    pub fn end(&self) -> BigUint {
        &self.offset + &self.len
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayoutMap {
    pub k: u32,
    pub c: u32,
    /// `4^(k+c)`: log2 of the row length.
    pub n: BigUint,
    pub row_len: BigUint,
    /// Packet length `4^(k+4+c)`.
    pub packet: BigUint,
    /// Macrotile side `2^(4^(1+c) + ... + 4^(k+c))`.
    pub side: BigUint,
    /// Every cell range in order, separators included, ending with the padding.
    pub fields: Vec<Field>,
}

fn pow4(e: u32) -> BigUint {
    BigUint::one() << (2 * e as usize)
}

fn pow2(e: &BigUint) -> Result<BigUint> {
    let e = usize::try_from(e).map_err(|_| Error::usage("exponent too large"))?;
    Ok(BigUint::one() << e)
}

/// Lays out `@ prog % N % S % W % E % k % c % xpos % ypos % pxpos % pypos % word % pword % subst % psubst $`.
pub fn macrotile_layout(k: u32, c: u32, program_len: u64) -> Result<LayoutMap> {
    if k == 0 {
        return Err(Error::usage("k must be at least 1"));
    }
    if k + c > MAX_LEVEL {
        return Err(Error::usage(format!("k + c must be at most {MAX_LEVEL}")));
    }
    let n = pow4(k + c);
    let row_len = pow2(&n)?;
    let packet = pow4(k + 4 + c);
    let exponent: BigUint = (1..=k).map(|i| pow4(i + c)).sum();
    let side = pow2(&exponent)?;
    let pos = pow4(k + 1 + c);
    let ppos = pow4(k + 2 + c);
    let word = BigUint::one() << k as usize;
    let pword = BigUint::one() << (k + 1) as usize;

    let named: Vec<(&str, BigUint)> = vec![
        ("N", packet.clone()),
        ("S", packet.clone()),
        ("W", packet.clone()),
        ("E", packet.clone()),
        ("k", BigUint::from(k)),
        ("c", BigUint::from(c)),
        ("xpos", pos.clone()),
        ("ypos", pos),
        ("pxpos", ppos.clone()),
        ("pypos", ppos),
        ("word", word),
        ("pword", pword),
        ("subst", BigUint::from(4u32)),
        ("psubst", BigUint::from(4u32)),
    ];
    let mut fields: Vec<Field> = Vec::new();
    let push = |fields: &mut Vec<Field>, name: &str, len: BigUint| {
        let offset = fields.last().map(Field::end).unwrap_or_default();
        fields.push(Field {
            name: name.to_string(),
            offset,
            len,
        });
    };
    push(&mut fields, "@", BigUint::one());
    push(&mut fields, "prog", BigUint::from(program_len));
    for (name, len) in named {
        push(&mut fields, "%", BigUint::one());
        push(&mut fields, name, len);
    }
    push(&mut fields, "$", BigUint::one());
    let at = fields.last().map(Field::end).unwrap_or_default();
    if at > row_len {
        return Err(Error::validity(format!(
            "fields need {at} cells but the row has {row_len}"
        )));
    }
    let padding = &row_len - &at;
    push(&mut fields, "padding", padding);
    Ok(LayoutMap {
        k,
        c,
        n,
        row_len,
        packet,
        side,
        fields,
    })
}

impl LayoutMap {
    pub fn field(&self, name: &str) -> Option<&Field> {
        self.fields.iter().find(|f| f.name == name)
    }

    /// Fields are contiguous, in order and cover the row exactly.
    pub fn is_consistent(&self) -> bool {
        let mut at = BigUint::zero();
        for f in &self.fields {
            if f.offset != at {
                return false;
            }
            at = f.end();
        }
        at == self.row_len
    }
}

/// `m` with its lowest `k` bits cleared.
pub fn floor_k(m: &BigUint, k: u32) -> BigUint {
    (m >> k as usize) << k as usize
}

/// The half-open block `[floor_k(pos, k), floor_k(pos, k) + 2^k)`.
pub fn responsibility_zone(k: u32, pos: &BigUint) -> (BigUint, BigUint) {
    let lo = floor_k(pos, k);
    let hi = &lo + (BigUint::one() << k as usize);
    (lo, hi)
}
