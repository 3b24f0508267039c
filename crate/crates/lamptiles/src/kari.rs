//! The strongly aperiodic tileset built from the piecewise affine pair `x -> 2x`,
//! `x -> 2x/3`, the general affine builder behind it, and orbit diagnostics.

use std::fmt;

use num_bigint::BigUint;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tilesets::{delta_count, Colour, TetraTileset};

/// A point of the value or carry space, of length 1 or 2.
pub type Vector = Vec<Rational64>;

/// One colour: count symbol (1 or 2), three instructions, a value and two carries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KariColour {
    pub count: u8,
    pub instr: [u32; 3],
    pub value: Vector,
    pub carry: [Vector; 2],
}

fn fmt_vector(v: &[Rational64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    if parts.len() == 1 {
        parts[0].clone()
    } else {
        format!("({})", parts.join(","))
    }
}

impl fmt::Display for KariColour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}|{}{}{}|{}|{};{}",
            self.count,
            self.instr[0],
            self.instr[1],
            self.instr[2],
            fmt_vector(&self.value),
            fmt_vector(&self.carry[0]),
            fmt_vector(&self.carry[1])
        )
    }
}

/// `f_i(x) = M_i x + b_i`, one map per instruction.
#[derive(Clone, Debug)]
pub struct AffineFamily {
    pub dim: usize,
    pub maps: Vec<(Vec<Vec<Rational64>>, Vector)>,
}

impl AffineFamily {
    pub fn new(dim: usize, maps: Vec<(Vec<Vec<Rational64>>, Vector)>) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::usage("affine families must have dimension 1 or 2"));
        }
        if maps.is_empty() {
            return Err(Error::usage("the instruction alphabet is empty"));
        }
        for (m, b) in &maps {
            if m.len() != dim || m.iter().any(|r| r.len() != dim) || b.len() != dim {
                return Err(Error::usage(format!("every map must be {dim}-dimensional")));
            }
        }
        Ok(AffineFamily { dim, maps })
    }

    /// Scalar maps `x -> a x + b`.
    pub fn scalar(maps: &[(Rational64, Rational64)]) -> Result<Self> {
        Self::new(1, maps.iter().map(|&(a, b)| (vec![vec![a]], vec![b])).collect())
    }

    pub fn apply(&self, i: u32, x: &[Rational64]) -> Vector {
        let (m, b) = &self.maps[i as usize];
        (0..self.dim)
            .map(|r| (0..self.dim).fold(b[r], |acc, c| acc + m[r][c] * x[c]))
            .collect()
    }
}

/// The four component families, as index quadruples in the order `(v, va, vab^-1, vb)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub count: Vec<[u32; 4]>,
    /// Instruction triples, each encoded as `i_0 + |I| i_1 + |I|^2 i_2`.
    pub instruction: Vec<[u32; 4]>,
    pub value: Vec<[u32; 4]>,
    pub carry: Vec<[(u32, u32); 4]>,
}

impl Components {
    pub fn candidate_count(&self) -> u64 {
        (self.count.len() * self.instruction.len() * self.value.len() * self.carry.len()) as u64
    }
}

/// The displayed families: count, `((w,x,z),(x,y,w),(w,y,z),(x,y,z))`, `(l,m,n,m)` and
/// `((q,r),(q,s),(r,s),(s,q))`.
pub fn component_tilesets(instructions: usize, values: usize, carries: usize) -> Result<Components> {
    if instructions == 0 || values == 0 || carries == 0 {
        return Err(Error::usage("component alphabets must be nonempty"));
    }
    let ni = instructions as u32;
    let triple = |a: u32, b: u32, c: u32| a + ni * b + ni * ni * c;
    let mut instruction = Vec::new();
    for w in 0..ni {
        for x in 0..ni {
            for y in 0..ni {
                for z in 0..ni {
                    instruction.push([triple(w, x, z), triple(x, y, w), triple(w, y, z), triple(x, y, z)]);
                }
            }
        }
    }
    let nv = values as u32;
    let mut value = Vec::new();
    for l in 0..nv {
        for m in 0..nv {
            for n in 0..nv {
                value.push([l, m, n, m]);
            }
        }
    }
    let nb = carries as u32;
    let mut carry = Vec::new();
    for q in 0..nb {
        for r in 0..nb {
            for s in 0..nb {
                carry.push([(q, r), (q, s), (r, s), (s, q)]);
            }
        }
    }
    Ok(Components {
        count: delta_count().allowed().to_vec(),
        instruction,
        value,
        carry,
    })
}

/// Output of the builders: the flip-closed tileset and the pre-closure diagnostics.
#[derive(Clone, Debug)]
pub struct KariBuild {
    pub tileset: TetraTileset,
    pub candidates: u64,
    /// Accepted quadruples before flip-closure, in candidate order.
    pub accepted: Vec<[u32; 4]>,
}

/// Decoded colour space `{1,2} x I^3 x A x B^2`.
pub struct ColourSpace<'a> {
    instructions: usize,
    values: &'a [Vector],
    carries: &'a [Vector],
}

impl ColourSpace<'_> {
    pub fn len(&self) -> usize {
        2 * self.instructions.pow(3) * self.values.len() * self.carries.len().pow(2)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, count: u32, instr: u32, value: u32, lo: u32, hi: u32) -> u32 {
        let ni3 = self.instructions.pow(3) as u32;
        let nv = self.values.len() as u32;
        let nb = self.carries.len() as u32;
        (((count * ni3 + instr) * nv + value) * nb + lo) * nb + hi
    }

    pub fn decode(&self, idx: u32) -> KariColour {
        let nb = self.carries.len() as u32;
        let nv = self.values.len() as u32;
        let ni = self.instructions as u32;
        let hi = idx % nb;
        let lo = idx / nb % nb;
        let value = idx / nb / nb % nv;
        let rest = idx / nb / nb / nv;
        let instr = rest % (ni * ni * ni);
        let count = rest / (ni * ni * ni);
        KariColour {
            count: count as u8 + 1,
            instr: [instr % ni, instr / ni % ni, instr / ni / ni],
            value: self.values[value as usize].clone(),
            carry: [self.carries[lo as usize].clone(), self.carries[hi as usize].clone()],
        }
    }
}

/// Keeps candidates whose four colours pass `restriction` and satisfy
/// `f_{i(c)}(v(c_a)) + p<(c) = (v(c) + v(c_{ab^-1}))/2 + p>(c_{ab^-1})`.
pub fn build_affine_tileset(
    family: &AffineFamily,
    values: &[Vector],
    carries: &[Vector],
    restriction: &(dyn Fn(&KariColour) -> bool + Sync),
) -> Result<KariBuild> {
    if values.iter().chain(carries).any(|v| v.len() != family.dim) {
        return Err(Error::usage(format!(
            "values and carries must be {}-dimensional to match the family",
            family.dim
        )));
    }
    let ni = family.maps.len();
    let comps = component_tilesets(ni, values.len(), carries.len())?;
    let space = ColourSpace {
        instructions: ni,
        values,
        carries,
    };
    let colours_ok: Vec<bool> = (0..space.len() as u32).map(|c| restriction(&space.decode(c))).collect();
    let half = Rational64::new(1, 2);
    let ni = ni as u32;
    let triples: Vec<(usize, [u32; 4])> = comps.instruction.iter().copied().enumerate().collect();
    let accepted_by_instr: Vec<Vec<(u64, [u32; 4])>> = triples
        .par_iter()
        .map(|&(ii, instr)| {
            let mut out = Vec::new();
            let op = instr[0] % ni;
            for (vi, val) in comps.value.iter().enumerate() {
                let lhs_map = family.apply(op, &values[val[1] as usize]);
                for (ci, car) in comps.carry.iter().enumerate() {
                    for (ki, cnt) in comps.count.iter().enumerate() {
                        let quad: [u32; 4] =
                            std::array::from_fn(|p| space.index(cnt[p], instr[p], val[p], car[p].0, car[p].1));
                        if !quad.iter().all(|&c| colours_ok[c as usize]) {
                            continue;
                        }
                        let lo = &carries[car[0].0 as usize];
                        let hi = &carries[car[2].1 as usize];
                        let (l, n) = (&values[val[0] as usize], &values[val[2] as usize]);
                        let holds = (0..family.dim).all(|d| lhs_map[d] + lo[d] == (l[d] + n[d]) * half + hi[d]);
                        if holds {
                            let idx = ((ii * comps.value.len() + vi) * comps.carry.len() + ci) * comps.count.len() + ki;
                            out.push((idx as u64, quad));
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut accepted: Vec<(u64, [u32; 4])> = accepted_by_instr.into_iter().flatten().collect();
    accepted.sort();
    let accepted: Vec<[u32; 4]> = accepted.into_iter().map(|(_, q)| q).collect();
    let colours = (0..space.len() as u32)
        .map(|c| Colour::Name(space.decode(c).to_string()))
        .collect();
    let tileset = TetraTileset::new(colours, accepted.iter().copied())?.flip_closure();
    Ok(KariBuild {
        tileset,
        candidates: comps.candidate_count(),
        accepted,
    })
}

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// `A = {0, 1, 2}`.
pub fn kari_values() -> Vec<Vector> {
    (0..3).map(|v| vec![r(v, 1)]).collect()
}

/// `B = {-1, -2/3, -1/3, 0, 1/3, 2/3}`.
pub fn kari_carries() -> Vec<Vector> {
    (-3..=2).map(|k| vec![r(k, 3)]).collect()
}

/// `f_0(x) = 2x`, `f_1(x) = 2x/3`.
pub fn kari_family() -> AffineFamily {
    AffineFamily::scalar(&[(r(2, 1), r(0, 1)), (r(2, 3), r(0, 1))]).expect("static family")
}

/// Instruction 0 needs a nonzero value and carries in `{-1, 0}`; instruction 1 needs
/// carries in `{-1/3, 0, 1/3, 2/3}`.
pub fn kari_restriction(c: &KariColour) -> bool {
    let carry = |v: &Vector| v[0];
    match c.instr[0] {
        0 => !c.value[0].is_zero() && c.carry.iter().all(|p| carry(p) == r(-1, 1) || carry(p).is_zero()),
        _ => c.carry.iter().all(|p| carry(p) >= r(-1, 3) && carry(p) <= r(2, 3)),
    }
}

pub fn build_kari_tileset() -> KariBuild {
    build_affine_tileset(&kari_family(), &kari_values(), &kari_carries(), &kari_restriction)
        .expect("the fixed instance is well formed")
}

/// Certifies `2^a (2/3)^b != 1` for `0 < a + b <= period`, so no word of that length in
/// `f_0, f_1` fixes a nonzero point.
pub fn no_periodic_upto(period: u32) -> bool {
    let two = BigUint::from(2u32);
    let three = BigUint::from(3u32);
    (1..=period).all(|len| (0..=len).all(|b| two.pow(len) != three.pow(b)))
}

/// Greedy forward orbit: `f_0` while `x <= 1`, else `f_1`. Returns `x_0 .. x_len`.
pub fn orbit_segment(start: &BigRational, len: usize) -> Vec<BigRational> {
    let one = BigRational::one();
    let two = BigRational::from_integer(2.into());
    let two_thirds = BigRational::new(2.into(), 3.into());
    let mut out = vec![start.clone()];
    let mut x = start.clone();
    for _ in 0..len {
        x = if x <= one { &x * &two } else { &x * &two_thirds };
        out.push(x.clone());
    }
    out
}
