//! The lamplighter group (Z/2) wr Z, finite tetrahedron regions and lamp configurations.
//!
//! Lamp positions are half-integers; the integer `i` stands for position `i + 1/2`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Renders the integer lamp index `i` as the half-integer `i + 1/2`.
pub fn half(i: i64) -> String {
    format!("{}/2", 2 * i + 1)
}

/// A group element `(s, n)`: a finite set of lit lamps and the head position.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LampElement {
    lamps: Vec<i64>,
    head: i64,
}

/// The four Cayley-graph generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    A,
    B,
    AInv,
    BInv,
}

impl Generator {
    pub const ALL: [Generator; 4] = [Generator::A, Generator::B, Generator::AInv, Generator::BInv];

    pub fn element(self) -> LampElement {
        match self {
            Generator::A => LampElement::a(),
            Generator::B => LampElement::b(),
            Generator::AInv => LampElement::a().inv(),
            Generator::BInv => LampElement::b().inv(),
        }
    }

    pub fn inverse(self) -> Generator {
        match self {
            Generator::A => Generator::AInv,
            Generator::B => Generator::BInv,
            Generator::AInv => Generator::A,
            Generator::BInv => Generator::B,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Generator::A => 'a',
            Generator::B => 'b',
            Generator::AInv => 'A',
            Generator::BInv => 'B',
        }
    }

    pub fn from_letter(c: char) -> Option<Generator> {
        match c {
            'a' => Some(Generator::A),
            'b' => Some(Generator::B),
            'A' => Some(Generator::AInv),
            'B' => Some(Generator::BInv),
            _ => None,
        }
    }
}

/// Parses a word over `a, b, A = a^-1, B = b^-1`; `1` or the empty string is the identity.
pub fn parse_word(word: &str) -> Result<Vec<Generator>> {
    let w = word.trim();
    if w == "1" {
        return Ok(Vec::new());
    }
    w.chars()
        .enumerate()
        .map(|(i, c)| {
            Generator::from_letter(c)
                .ok_or_else(|| Error::parse(format!("word position {i}"), format!("unknown generator '{c}'")))
        })
        .collect()
}

fn symmetric_difference(s: &[i64], t: impl Iterator<Item = i64>) -> Vec<i64> {
    let mut out = Vec::with_capacity(s.len());
    let mut t = t.peekable();
    let mut i = 0;
    loop {
        match (s.get(i), t.peek()) {
            (Some(&x), Some(&y)) => {
                if x < y {
                    out.push(x);
                    i += 1;
                } else if y < x {
                    out.push(y);
                    t.next();
                } else {
                    i += 1;
                    t.next();
                }
            }
            (Some(&x), None) => {
                out.push(x);
                i += 1;
            }
            (None, Some(&y)) => {
                out.push(y);
                t.next();
            }
            (None, None) => break,
        }
    }
    out
}

impl LampElement {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds `(s, n)`; repeated lamps toggle, so the result is canonical either way.
    pub fn new(lamps: impl IntoIterator<Item = i64>, head: i64) -> Self {
        let mut v: Vec<i64> = lamps.into_iter().collect();
        v.sort_unstable();
        let mut out: Vec<i64> = Vec::with_capacity(v.len());
        for x in v {
            if out.last() == Some(&x) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        LampElement { lamps: out, head }
    }

    pub fn a() -> Self {
        LampElement { lamps: vec![], head: 1 }
    }

    pub fn b() -> Self {
        LampElement {
            lamps: vec![0],
            head: 1,
        }
    }

    pub fn lamps(&self) -> &[i64] {
        &self.lamps
    }

    pub fn head(&self) -> i64 {
        self.head
    }

    pub fn is_identity(&self) -> bool {
        self.lamps.is_empty() && self.head == 0
    }

    pub fn has_lamp(&self, i: i64) -> bool {
        self.lamps.binary_search(&i).is_ok()
    }

    pub fn mul(&self, other: &LampElement) -> LampElement {
        let n = self.head;
        LampElement {
            lamps: symmetric_difference(&self.lamps, other.lamps.iter().map(|&t| t + n)),
            head: self.head + other.head,
        }
    }

    pub fn inv(&self) -> LampElement {
        let n = self.head;
        LampElement {
            lamps: self.lamps.iter().map(|&s| s - n).collect(),
            head: -n,
        }
    }

    pub fn pow(&self, e: i64) -> LampElement {
        let base = if e < 0 { self.inv() } else { self.clone() };
        let mut acc = LampElement::identity();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    pub fn mul_gen(&self, g: Generator) -> LampElement {
        self.mul(&g.element())
    }

    /// Position reflection `p -> -p`; an automorphism sending `a, b` to `a^-1, b^-1`.
    pub fn reflect(&self) -> LampElement {
        LampElement::new(self.lamps.iter().map(|&i| -i - 1), -self.head)
    }

    /// Word reversal, the anti-automorphism fixing `a` and `b`.
    pub fn reverse(&self) -> LampElement {
        self.reflect().inv()
    }

    /// A word in the generators evaluating to this element (left to right).
    pub fn word(&self) -> Vec<Generator> {
        let mut w = Vec::new();
        let mut pos = 0i64;
        let walk = |w: &mut Vec<Generator>, pos: &mut i64, to: i64| {
            while *pos < to {
                w.push(Generator::A);
                *pos += 1;
            }
            while *pos > to {
                w.push(Generator::AInv);
                *pos -= 1;
            }
        };
        if let (Some(&lo), Some(&hi)) = (self.lamps.first(), self.lamps.last()) {
            walk(&mut w, &mut pos, lo);
            while pos <= hi {
                w.push(if self.has_lamp(pos) { Generator::B } else { Generator::A });
                pos += 1;
            }
        }
        walk(&mut w, &mut pos, self.head);
        w
    }

    pub fn from_word(word: &[Generator]) -> LampElement {
        word.iter().fold(LampElement::identity(), |acc, &g| acc.mul_gen(g))
    }

    /// The tetrahedron quadruple `(v, va, vab^-1, vb)`.
    pub fn tetra_vertices(&self) -> [LampElement; 4] {
        let va = self.mul_gen(Generator::A);
        let vab = va.mul_gen(Generator::BInv);
        let vb = self.mul_gen(Generator::B);
        [self.clone(), va, vab, vb]
    }
}

impl fmt::Display for LampElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lamps: Vec<String> = self.lamps.iter().map(|&i| half(i)).collect();
        write!(f, "({{{}}},{})", lamps.join(","), self.head)
    }
}

impl FromStr for LampElement {
    type Err = Error;

    /// Accepts a generator word such as `abAB`.
    fn from_str(s: &str) -> Result<Self> {
        Ok(LampElement::from_word(&parse_word(s)?))
    }
}

/// The finite band of `height + 1` consecutive levels starting at `base`, with the
/// `height` lamps between them free and every other lamp off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TetraRegion {
    base: i64,
    height: u32,
}

/// Largest supported region height; the vertex count is `(k+1)·2^k`.
pub const MAX_REGION_HEIGHT: u32 = 24;

impl TetraRegion {
    pub fn new(base: i64, height: i64) -> Result<Self> {
        if height < 0 {
            return Err(Error::usage(format!(
                "region height must be non-negative, got {height}"
            )));
        }
        if height > MAX_REGION_HEIGHT as i64 {
            return Err(Error::usage(format!(
                "region height {height} exceeds the supported maximum {MAX_REGION_HEIGHT}"
            )));
        }
        Ok(TetraRegion {
            base,
            height: height as u32,
        })
    }

    pub fn base(&self) -> i64 {
        self.base
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Number of vertices per level, `2^k`.
    pub fn width(&self) -> usize {
        1usize << self.height
    }

    pub fn vertex_count(&self) -> usize {
        (self.height as usize + 1) * self.width()
    }

    pub fn constraint_count(&self) -> usize {
        if self.height == 0 {
            0
        } else {
            self.height as usize * (self.width() / 2)
        }
    }

    pub fn index(&self, level: u32, bits: usize) -> usize {
        level as usize * self.width() + bits
    }

    pub fn level_of(&self, idx: usize) -> u32 {
        (idx / self.width()) as u32
    }

    pub fn bits_of(&self, idx: usize) -> usize {
        idx % self.width()
    }

    pub fn vertex(&self, idx: usize) -> LampElement {
        let level = self.level_of(idx);
        let bits = self.bits_of(idx);
        LampElement::new(
            (0..self.height as i64)
                .filter(|&i| bits >> i & 1 == 1)
                .map(|i| self.base + i),
            self.base + level as i64,
        )
    }

    pub fn locate(&self, v: &LampElement) -> Option<usize> {
        let level = v.head() - self.base;
        if level < 0 || level > self.height as i64 {
            return None;
        }
        let mut bits = 0usize;
        for &l in v.lamps() {
            let i = l - self.base;
            if i < 0 || i >= self.height as i64 {
                return None;
            }
            bits |= 1 << i;
        }
        Some(self.index(level as u32, bits))
    }

    /// Constraint instances ordered by (level offset, remaining bits); each is the
    /// quadruple `(v, va, vab^-1, vb)` of vertex indices.
    pub fn constraints(&self) -> Vec<[usize; 4]> {
        let k = self.height;
        let mut out = Vec::with_capacity(self.constraint_count());
        for j in 0..k {
            let low_mask = (1usize << j) - 1;
            for f in 0..(self.width() / 2) {
                let bits = (f & low_mask) | ((f & !low_mask) << 1);
                let toggled = bits | (1 << j);
                out.push([
                    self.index(j, bits),
                    self.index(j + 1, bits),
                    self.index(j, toggled),
                    self.index(j + 1, toggled),
                ]);
            }
        }
        out
    }

    /// Edges go upward from levels `0..k`; each lower vertex owns an `a` edge and a `b` edge.
    pub fn edge_count(&self) -> usize {
        self.height as usize * self.width() * 2
    }

    /// Index of the upward edge leaving `(level, bits)` along `a` (`use_b = false`) or `b`.
    pub fn edge_index(&self, level: u32, bits: usize, use_b: bool) -> usize {
        (self.index(level, bits)) * 2 + use_b as usize
    }

    /// Lower and upper vertex of an edge.
    pub fn edge_endpoints(&self, e: usize) -> (usize, usize) {
        let lower = e / 2;
        let level = self.level_of(lower);
        let bits = self.bits_of(lower);
        let up_bits = if e % 2 == 1 { bits ^ (1 << level) } else { bits };
        (lower, self.index(level + 1, up_bits))
    }

    /// Vertices with all four incident edges inside the region, each with its edges in
    /// spider order `(a, b, a^-1, b^-1)`.
    pub fn spider_sites(&self) -> Vec<(usize, [usize; 4])> {
        let mut out = Vec::new();
        for level in 1..self.height {
            for bits in 0..self.width() {
                let down_b = bits ^ (1 << (level - 1));
                out.push((
                    self.index(level, bits),
                    [
                        self.edge_index(level, bits, false),
                        self.edge_index(level, bits, true),
                        self.edge_index(level - 1, bits, false),
                        self.edge_index(level - 1, down_b, true),
                    ],
                ));
            }
        }
        out
    }
}

/// A lamp configuration that is zero outside the window `[lo, lo + len)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LampConfig {
    lo: i64,
    bits: Vec<bool>,
}

impl LampConfig {
    pub fn zeros(lo: i64, hi: i64) -> Self {
        LampConfig {
            lo,
            bits: vec![false; (hi - lo).max(0) as usize],
        }
    }

    pub fn from_lamps(lo: i64, hi: i64, lamps: impl IntoIterator<Item = i64>) -> Result<Self> {
        let mut x = Self::zeros(lo, hi);
        for i in lamps {
            if !x.covers(i) {
                return Err(Error::usage(format!("lamp {} outside window [{lo},{hi})", half(i))));
            }
            x.toggle(i);
        }
        Ok(x)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.bits.len() as i64
    }

    pub fn covers(&self, i: i64) -> bool {
        i >= self.lo && i < self.hi()
    }

    pub fn get(&self, i: i64) -> bool {
        self.covers(i) && self.bits[(i - self.lo) as usize]
    }

    pub fn as_u8(&self, i: i64) -> u8 {
        self.get(i) as u8
    }

    pub fn set(&mut self, i: i64, value: bool) {
        assert!(self.covers(i), "lamp {} outside window", half(i));
        self.bits[(i - self.lo) as usize] = value;
    }

    pub fn toggle(&mut self, i: i64) {
        let v = self.get(i);
        self.set(i, !v);
    }

    pub fn ones(&self) -> impl Iterator<Item = i64> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(k, _)| self.lo + k as i64)
    }

    /// Same lamps, window moved so positions are renamed `i -> i + by`.
    pub fn shifted(&self, by: i64) -> LampConfig {
        LampConfig {
            lo: self.lo + by,
            bits: self.bits.clone(),
        }
    }

    /// Equality of the represented configurations, ignoring window extents.
    pub fn same_lamps(&self, other: &LampConfig) -> bool {
        self.ones().eq(other.ones())
    }
}

/// The lamp action as seen by the lamplighter: `a` moves her up, so lamps slide down
/// by one, and `b` additionally toggles the lamp she crosses.
///
/// For `g = (s, n)` this is `x -> reflect(s) xor shift_{-n}(x)`, a left action.
pub fn lamp_act(g: &LampElement, x: &LampConfig) -> Result<LampConfig> {
    let mut out = x.shifted(-g.head());
    for &i in g.lamps() {
        let p = -i - 1;
        if !out.covers(p) {
            return Err(Error::usage(format!(
                "lamp window [{},{}) too small for {g}",
                half(x.lo()),
                half(x.hi())
            )));
        }
        out.toggle(p);
    }
    Ok(out)
}

/// Binary coordinates `(eta_b, nu_b)` of a sea-level element inside `Sigma_n`.
///
/// The lamp at `-1/2 - i` has weight `2^i` in the first coordinate, the lamp at `1/2 + i`
/// weight `2^i` in the second.
pub fn position_codec(g: &LampElement, b: &LampConfig, n: u32) -> Result<(u64, u64)> {
    if n > 63 {
        return Err(Error::usage("codec level must be at most 63"));
    }
    if g.head() != 0 {
        return Err(Error::usage(format!("{g} is not at sea level")));
    }
    let n = n as i64;
    if let Some(&l) = g.lamps().iter().find(|&&l| l < -n || l >= n) {
        return Err(Error::usage(format!("lamp {} outside Sigma_{n}", half(l))));
    }
    if n > 0 && !(b.covers(-n) && b.covers(n - 1)) {
        return Err(Error::usage(format!("b window does not cover Sigma_{n}")));
    }
    let mut eta = 0u64;
    let mut nu = 0u64;
    for i in 0..n {
        let down = -1 - i;
        if g.has_lamp(down) ^ b.get(down) {
            eta |= 1 << i;
        }
        if g.has_lamp(i) ^ b.get(i) {
            nu |= 1 << i;
        }
    }
    Ok((eta, nu))
}
