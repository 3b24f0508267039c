//! Substitutions on the locally finite group `F^(N)`: level expansions, languages,
//! branching decoding, the shared-branching product, the Wang overlay, the sofic cover
//! spiders and Toeplitz columns.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::tilesets::{Colour, SpiderTileset};
use crate::wang::WangTileset;

/// A rule `tau: A -> sets of A^F` with `F = Z/arity`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    pub alphabet: Vec<String>,
    pub arity: usize,
    rules: Vec<Vec<Vec<u32>>>,
}

/// Values on `nabla_n`, indexed by `f_0 + arity·f_1 + ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelPattern {
    pub level: u32,
    pub values: Vec<u32>,
}

/// Upper bound on intermediate pattern sets; larger languages are refused, not truncated.
pub const MAX_SET: usize = 1 << 20;

fn too_many(what: &str) -> Error {
    Error::usage(format!("{what} exceeds {MAX_SET} patterns"))
}

impl Substitution {
    pub fn new(alphabet: Vec<String>, arity: usize, rules: Vec<Vec<Vec<u32>>>) -> Result<Self> {
        if arity < 1 {
            return Err(Error::usage("arity must be at least 1"));
        }
        if rules.len() != alphabet.len() {
            return Err(Error::usage("one rule per letter is required"));
        }
        for (a, images) in rules.iter().enumerate() {
            for t in images {
                if t.len() != arity {
                    return Err(Error::usage(format!(
                        "image of '{}' has arity {}, expected {arity}",
                        alphabet[a],
                        t.len()
                    )));
                }
                if let Some(&bad) = t.iter().find(|&&x| x as usize >= alphabet.len()) {
                    return Err(Error::usage(format!("letter index {bad} out of range")));
                }
            }
        }
        let rules = rules
            .into_iter()
            .map(|images| images.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
            .collect();
        Ok(Substitution { alphabet, arity, rules })
    }

    fn letters(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    /// `a -> (a, 1-a)`.
    pub fn thue_morse() -> Self {
        Self::new(Self::letters(&["0", "1"]), 2, vec![vec![vec![0, 1]], vec![vec![1, 0]]]).expect("static")
    }

    /// `a -> (0, 1-a)`.
    pub fn period_doubling() -> Self {
        Self::new(Self::letters(&["0", "1"]), 2, vec![vec![vec![0, 1]], vec![vec![0, 0]]]).expect("static")
    }

    /// `dagger -> (dagger, dagger)`, `star -> (star, dagger)`.
    pub fn sunny_side_up() -> Self {
        Self::new(Self::letters(&["+", "*"]), 2, vec![vec![vec![0, 0]], vec![vec![1, 0]]]).expect("static")
    }

    /// `t -> (t, t+1)` over `Z/3`.
    pub fn cyclic3() -> Self {
        Self::new(
            Self::letters(&["0", "1", "2"]),
            2,
            (0..3u32).map(|t| vec![vec![t, (t + 1) % 3]]).collect(),
        )
        .expect("static")
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name.replace('-', "_").as_str() {
            "thue_morse" | "tm" => Ok(Self::thue_morse()),
            "period_doubling" | "pd" => Ok(Self::period_doubling()),
            "sunny_side_up" | "ssu" => Ok(Self::sunny_side_up()),
            "cyclic3" => Ok(Self::cyclic3()),
            other => Err(Error::usage(format!("unknown built-in substitution '{other}'"))),
        }
    }

    pub fn letter_count(&self) -> usize {
        self.alphabet.len()
    }

    pub fn images(&self, a: u32) -> &[Vec<u32>] {
        &self.rules[a as usize]
    }

    pub fn is_deterministic(&self) -> bool {
        self.rules.iter().all(|r| r.len() == 1)
    }

    pub fn letter_index(&self, name: &str) -> Option<u32> {
        self.alphabet.iter().position(|x| x == name).map(|i| i as u32)
    }

    fn cells(&self, level: u32) -> Result<usize> {
        (self.arity as u64)
            .checked_pow(level)
            .filter(|&c| c <= 1 << 26)
            .map(|c| c as usize)
            .ok_or_else(|| Error::usage(format!("level {level} is too large")))
    }

    /// Deterministic expansion `p_{m+1}(f + arity·q) = tau(p_m(q))[f + b_m]`, `p_0 = seed`.
    pub fn expand(&self, seed: u32, n: u32, branching: &[u32]) -> Result<LevelPattern> {
        if !self.is_deterministic() {
            return Err(Error::usage(
                "expand needs a deterministic substitution; use level_language",
            ));
        }
        if branching.len() != n as usize {
            return Err(Error::usage(format!(
                "expected {n} branching digits, got {}",
                branching.len()
            )));
        }
        if seed as usize >= self.letter_count() {
            return Err(Error::usage(format!("seed {seed} out of range")));
        }
        self.cells(n)?;
        let mut p = vec![seed];
        for &b in branching {
            p = self.step_det(&p, b);
        }
        Ok(LevelPattern { level: n, values: p })
    }

    fn step_det(&self, p: &[u32], b: u32) -> Vec<u32> {
        let q = self.arity;
        let mut out = vec![0u32; p.len() * q];
        for (r, &a) in p.iter().enumerate() {
            let t = &self.rules[a as usize][0];
            for f in 0..q {
                out[f + q * r] = t[(f + b as usize) % q];
            }
        }
        out
    }

    /// All one-level refinements of `p` with branching digit `b` (independent choice per cell).
    fn step(&self, p: &[u32], b: u32, out: &mut BTreeSet<Vec<u32>>) -> Result<()> {
        let q = self.arity;
        let mut partial: Vec<Vec<u32>> = vec![Vec::with_capacity(p.len() * q)];
        for &a in p {
            let images = &self.rules[a as usize];
            if images.is_empty() {
                return Ok(());
            }
            let mut next = Vec::with_capacity(partial.len() * images.len());
            for base in &partial {
                for t in images {
                    let mut v = base.clone();
                    v.extend((0..q).map(|f| t[(f + b as usize) % q]));
                    next.push(v);
                }
            }
            if next.len() > MAX_SET {
                return Err(too_many("one expansion step"));
            }
            partial = next;
        }
        out.extend(partial);
        if out.len() > MAX_SET {
            return Err(too_many("expansion set"));
        }
        Ok(())
    }

    /// Level-`n` expansions of every seed in `seeds` along a fixed branching.
    pub fn expansions_along(&self, seeds: &BTreeSet<u32>, branching: &[u32]) -> Result<BTreeSet<Vec<u32>>> {
        let mut layer: BTreeSet<Vec<u32>> = seeds.iter().map(|&a| vec![a]).collect();
        for &b in branching {
            let mut next = BTreeSet::new();
            for p in &layer {
                self.step(p, b, &mut next)?;
            }
            layer = next;
        }
        Ok(layer)
    }

    /// Level-`n` expansions of `seeds` over all branchings.
    pub fn expansions(&self, seeds: &BTreeSet<u32>, n: u32) -> Result<BTreeSet<Vec<u32>>> {
        let mut layer: BTreeSet<Vec<u32>> = seeds.iter().map(|&a| vec![a]).collect();
        for _ in 0..n {
            let mut next = BTreeSet::new();
            for p in &layer {
                for b in 0..self.arity as u32 {
                    self.step(p, b, &mut next)?;
                }
            }
            layer = next;
        }
        Ok(layer)
    }

    /// Letters occurring in level-`j` expansions of arbitrary letters, for `j = 0, 1, ...`.
    fn reachable_next(&self, cur: &BTreeSet<u32>) -> BTreeSet<u32> {
        cur.iter()
            .flat_map(|&a| self.rules[a as usize].iter().flatten().copied())
            .collect()
    }

    /// Letters that occur at every level (the limit of the decreasing reachable sets).
    pub fn stable_letters(&self) -> BTreeSet<u32> {
        let mut cur: BTreeSet<u32> = (0..self.letter_count() as u32).collect();
        loop {
            let next = self.reachable_next(&cur);
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    /// `L(n, m)`: restrictions to `nabla_n` of all level-`m` expansions, `m >= n`.
    ///
    /// The block on `nabla_n` of a level-`m` expansion is a level-`n` expansion of the
    /// letter sitting at the origin after `m - n` steps, so only those letters are tracked.
    pub fn restricted_language(&self, n: u32, m: u32) -> Result<BTreeSet<Vec<u32>>> {
        if m < n {
            return Err(Error::usage("m must be at least n"));
        }
        let mut letters: BTreeSet<u32> = (0..self.letter_count() as u32).collect();
        for _ in n..m {
            letters = self.reachable_next(&letters);
        }
        self.expansions(&letters, n)
    }

    /// The level-`n` language, iterating `m = n, n+1, ...` until it provably stops changing
    /// or `cap` extra levels were tried.
    pub fn level_language(&self, n: u32, cap: u32) -> Result<Language> {
        self.cells(n)?;
        let mut letters: BTreeSet<u32> = (0..self.letter_count() as u32).collect();
        let mut current = self.expansions(&letters, n)?;
        for _ in 0..cap {
            let next_letters = self.reachable_next(&letters);
            if next_letters == letters {
                return Ok(Language {
                    level: n,
                    patterns: current,
                    stabilized: true,
                });
            }
            letters = next_letters;
            current = self.expansions(&letters, n)?;
        }
        let stabilized = self.reachable_next(&letters) == letters;
        Ok(Language {
            level: n,
            patterns: current,
            stabilized,
        })
    }

    /// Branching prefixes `(b_0, ..., b_{n-1})` under which `pattern` is a level-`n`
    /// expansion of a stable letter.
    pub fn consistent_branchings(&self, pattern: &[u32]) -> Result<Vec<Vec<u32>>> {
        let n = self.level_of(pattern.len())?;
        let stable = self.stable_letters();
        let mut out = self.desubstitute(pattern, n, &stable)?;
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn level_of(&self, len: usize) -> Result<u32> {
        let mut n = 0;
        let mut c = 1usize;
        while c < len {
            c *= self.arity;
            n += 1;
        }
        if c != len || (self.arity == 1 && len != 1) {
            return Err(Error::usage(format!(
                "pattern length {len} is not a power of {}",
                self.arity
            )));
        }
        Ok(n)
    }

    fn desubstitute(&self, p: &[u32], n: u32, stable: &BTreeSet<u32>) -> Result<Vec<Vec<u32>>> {
        if n == 0 {
            return Ok(if stable.contains(&p[0]) { vec![vec![]] } else { vec![] });
        }
        let q = self.arity;
        let mut out = Vec::new();
        for b in 0..q as u32 {
            let mut options: Vec<Vec<u32>> = Vec::with_capacity(p.len() / q);
            for r in 0..p.len() / q {
                let block = &p[q * r..q * r + q];
                let cands: Vec<u32> = (0..self.letter_count() as u32)
                    .filter(|&a| {
                        self.rules[a as usize]
                            .iter()
                            .any(|t| (0..q).all(|f| t[(f + b as usize) % q] == block[f]))
                    })
                    .collect();
                options.push(cands);
            }
            if options.iter().any(Vec::is_empty) {
                continue;
            }
            let total: usize = options
                .iter()
                .map(Vec::len)
                .try_fold(1usize, |acc, l| acc.checked_mul(l))
                .unwrap_or(usize::MAX);
            if total > MAX_SET {
                return Err(too_many("desubstitution"));
            }
            let mut parents: Vec<Vec<u32>> = vec![Vec::new()];
            for cands in &options {
                parents = parents
                    .into_iter()
                    .flat_map(|base| {
                        cands.iter().map(move |&a| {
                            let mut v = base.clone();
                            v.push(a);
                            v
                        })
                    })
                    .collect();
            }
            let mut prefixes = BTreeSet::new();
            for parent in parents {
                for mut prefix in self.desubstitute(&parent, n - 1, stable)? {
                    prefix.push(b);
                    prefixes.insert(prefix);
                }
            }
            out.extend(prefixes);
        }
        Ok(out)
    }

    /// The unique branching prefix of a language pattern, or every consistent one.
    pub fn decode_branching(&self, pattern: &LevelPattern) -> Result<Decoding> {
        let prefixes = self.consistent_branchings(&pattern.values)?;
        match prefixes.len() {
            0 => Err(Error::validity("pattern is not in the level language")),
            1 => Ok(Decoding::Unique(prefixes.into_iter().next().expect("one element"))),
            _ => Ok(Decoding::Ambiguous(prefixes)),
        }
    }

    /// Patterns on `Sigma_n` (one `nabla_n` row per element of `Lambda_n`) whose rows all
    /// lie in the level language under one shared branching prefix.
    pub fn ytau_language(&self, n: u32) -> Result<BTreeSet<Vec<Vec<u32>>>> {
        if self.arity != 2 {
            return Err(Error::usage("the shared-branching product needs arity 2"));
        }
        let rows = self.cells(n)?;
        let stable = self.stable_letters();
        let mut out = BTreeSet::new();
        for code in 0..(1u64 << n) {
            let branching: Vec<u32> = (0..n).map(|i| (code >> i & 1) as u32).collect();
            let choices: Vec<Vec<u32>> = self.expansions_along(&stable, &branching)?.into_iter().collect();
            let total = (choices.len() as f64).powi(rows as i32);
            if total > MAX_SET as f64 {
                return Err(too_many("the shared-branching product"));
            }
            let mut partial: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
            for _ in 0..rows {
                partial = partial
                    .into_iter()
                    .flat_map(|base| {
                        choices.iter().map(move |c| {
                            let mut v = base.clone();
                            v.push(c.clone());
                            v
                        })
                    })
                    .collect();
            }
            out.extend(partial);
        }
        Ok(out)
    }

    /// Membership in the shared-branching product without materializing it.
    pub fn ytau_contains(&self, rows: &[Vec<u32>]) -> Result<bool> {
        let mut common: Option<BTreeSet<Vec<u32>>> = None;
        for r in rows {
            let set: BTreeSet<Vec<u32>> = self.consistent_branchings(r)?.into_iter().collect();
            common = Some(match common {
                None => set,
                Some(c) => c.intersection(&set).cloned().collect(),
            });
        }
        Ok(common.is_some_and(|c| !c.is_empty()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)
            .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        let alphabet: Vec<String> = v
            .get("alphabet")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse("alphabet", "missing array"))?
            .iter()
            .enumerate()
            .map(|(k, x)| match x {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                _ => Err(Error::parse(format!("alphabet[{k}]"), "expected a string")),
            })
            .collect::<Result<_>>()?;
        let arity = v
            .get("arity")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse("arity", "missing integer"))? as usize;
        let rules_obj = v
            .get("rules")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::parse("rules", "missing object"))?;
        let index: BTreeMap<&str, u32> = alphabet
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as u32))
            .collect();
        let mut rules = vec![Vec::new(); alphabet.len()];
        for (letter, images) in rules_obj {
            let loc = format!("rules.{letter}");
            let a = *index
                .get(letter.as_str())
                .ok_or_else(|| Error::parse(&loc, "letter not in the alphabet"))?;
            let arr = images
                .as_array()
                .ok_or_else(|| Error::parse(&loc, "expected a list of tuples"))?;
            for (k, t) in arr.iter().enumerate() {
                let tloc = format!("{loc}[{k}]");
                let items = t.as_array().ok_or_else(|| Error::parse(&tloc, "expected a tuple"))?;
                let tuple = items
                    .iter()
                    .map(|x| {
                        let name = match x {
                            Value::String(s) => s.clone(),
                            Value::Number(n) => n.to_string(),
                            _ => return Err(Error::parse(&tloc, "expected letter names")),
                        };
                        index
                            .get(name.as_str())
                            .copied()
                            .ok_or_else(|| Error::parse(&tloc, format!("unknown letter '{name}'")))
                    })
                    .collect::<Result<Vec<u32>>>()?;
                rules[a as usize].push(tuple);
            }
        }
        Self::new(alphabet, arity, rules).map_err(|e| Error::parse("rules", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut rules = serde_json::Map::new();
        for (a, images) in self.rules.iter().enumerate() {
            let list: Vec<Vec<&str>> = images
                .iter()
                .map(|t| t.iter().map(|&x| self.alphabet[x as usize].as_str()).collect())
                .collect();
            rules.insert(self.alphabet[a].clone(), json!(list));
        }
        serde_json::to_string_pretty(&json!({
            "alphabet": self.alphabet,
            "arity": self.arity,
            "rules": rules,
        }))
        .expect("json")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Result of [`Substitution::level_language`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Language {
    pub level: u32,
    pub patterns: BTreeSet<Vec<u32>>,
    pub stabilized: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decoding {
    Unique(Vec<u32>),
    Ambiguous(Vec<Vec<u32>>),
}

/// Letters `(a, b, b')` of the Wang overlay, indexed `a·|B|^2 + b·|B| + b'`.
pub fn overlay_index(tiles: usize, a: u32, b: u32, b2: u32) -> u32 {
    a * (tiles * tiles) as u32 + b * tiles as u32 + b2
}

/// `(a, (b, b')) -> {((tau(a)_1, (b, b'')), (tau(a)_2, (b'', b'))) : b'' in B}`.
pub fn overlay_wang_substitution(base: &Substitution, tiles: &WangTileset) -> Result<Substitution> {
    if !base.is_deterministic() || base.arity != 2 {
        return Err(Error::usage(
            "the overlay needs a deterministic substitution of arity 2",
        ));
    }
    let nb = tiles.tiles.len();
    if nb == 0 {
        return Err(Error::usage("the Wang tileset is empty"));
    }
    let mut alphabet = Vec::new();
    let mut rules = Vec::new();
    for a in 0..base.letter_count() as u32 {
        let t = &base.images(a)[0];
        for b in 0..nb as u32 {
            for b2 in 0..nb as u32 {
                alphabet.push(format!("{}|{}|{}", base.alphabet[a as usize], b, b2));
                rules.push(
                    (0..nb as u32)
                        .map(|mid| vec![overlay_index(nb, t[0], b, mid), overlay_index(nb, t[1], mid, b2)])
                        .collect(),
                );
            }
        }
    }
    Substitution::new(alphabet, 2, rules)
}

/// Colour `(c, bit, a)` of the sofic cover, indexed `(2c + bit)·|A| + a`.
pub fn cover_index(letters: usize, c: u32, bit: u32, a: u32) -> u32 {
    ((c % 3) * 2 + bit) * letters as u32 + a
}

/// Spiders `((c,b,a0),(c,b,a1),(c+1,b',a'),(c,b,a))` and the variant with the last two
/// edges swapped, whenever `(a_{b'}, a_{1-b'})` is an image of `a`.
pub fn sofic_cover_tileset(tau: &Substitution) -> Result<SpiderTileset> {
    if tau.arity != 2 {
        return Err(Error::usage("the sofic cover needs arity 2"));
    }
    let na = tau.letter_count();
    let mut colours = Vec::with_capacity(6 * na);
    for c in 0..3 {
        for bit in 0..2 {
            for a in &tau.alphabet {
                colours.push(Colour::Name(format!("{c},{bit},{a}")));
            }
        }
    }
    let mut allowed = Vec::new();
    for c in 0..3u32 {
        for bit in 0..2u32 {
            for b2 in 0..2u32 {
                for a in 0..na as u32 {
                    for t in tau.images(a) {
                        let (a0, a1) = if b2 == 0 { (t[0], t[1]) } else { (t[1], t[0]) };
                        for a2 in 0..na as u32 {
                            let x0 = cover_index(na, c, bit, a0);
                            let x1 = cover_index(na, c, bit, a1);
                            let own = cover_index(na, c, bit, a);
                            let other = cover_index(na, c + 1, b2, a2);
                            allowed.push([x0, x1, other, own]);
                            allowed.push([x0, x1, own, other]);
                        }
                    }
                }
            }
        }
    }
    SpiderTileset::new(colours, allowed)
}

/// Bits stored along a column so that height `2^j (2k+1)` carries source bit `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToeplitzColumn {
    pub depth: u32,
    pub entries: Vec<bool>,
}

pub fn toeplitz_encode(bits: &[bool], n: u32) -> Result<ToeplitzColumn> {
    if n > 30 {
        return Err(Error::usage("depth too large"));
    }
    if bits.len() < n as usize + 1 {
        return Err(Error::usage(format!(
            "depth {n} needs {} source bits, got {}",
            n + 1,
            bits.len()
        )));
    }
    let entries = (1u64..=1 << n).map(|i| bits[i.trailing_zeros() as usize]).collect();
    Ok(ToeplitzColumn { depth: n, entries })
}

/// Recovers bits `0..n` and the partial high bit stored at height `2^n`.
pub fn toeplitz_decode(column: &ToeplitzColumn) -> Result<(Vec<bool>, bool)> {
    let n = column.depth;
    if column.entries.len() != 1usize << n {
        return Err(Error::usage(format!(
            "depth {n} column needs {} entries, got {}",
            1usize << n,
            column.entries.len()
        )));
    }
    let mut bits = vec![None; n as usize + 1];
    for (k, &e) in column.entries.iter().enumerate() {
        let j = (k + 1).trailing_zeros() as usize;
        match bits[j] {
            None => bits[j] = Some(e),
            Some(prev) if prev != e => return Err(Error::validity(format!("height {} disagrees with bit {j}", k + 1))),
            _ => {}
        }
    }
    let high = bits[n as usize].expect("height 2^n present");
    Ok((
        bits[..n as usize]
            .iter()
            .map(|b| b.expect("every level present"))
            .collect(),
        high,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Literal definition: every level-`m` expansion of every letter along every branching,
    /// restricted to the first `arity^n` cells.
    fn brute_restricted(s: &Substitution, n: u32, m: u32) -> BTreeSet<Vec<u32>> {
        let all: BTreeSet<u32> = (0..s.letter_count() as u32).collect();
        let len = s.arity.pow(n);
        s.expansions(&all, m)
            .unwrap()
            .into_iter()
            .map(|p| p[..len].to_vec())
            .collect()
    }

    fn builtins() -> Vec<Substitution> {
        vec![
            Substitution::thue_morse(),
            Substitution::period_doubling(),
            Substitution::sunny_side_up(),
            Substitution::cyclic3(),
        ]
    }

    #[test]
    fn expand_examples() {
        let pd = Substitution::period_doubling();
        assert_eq!(pd.expand(0, 1, &[0]).unwrap().values, vec![0, 1]);
        assert_eq!(pd.expand(0, 1, &[1]).unwrap().values, vec![1, 0]);
        let tm = Substitution::thue_morse();
        assert_eq!(tm.expand(0, 2, &[0, 0]).unwrap().values, vec![0, 1, 1, 0]);
        let ssu = Substitution::sunny_side_up();
        let mut nd = ssu.clone();
        nd.rules[0].push(vec![1, 1]);
        assert!(nd.expand(0, 1, &[0]).is_err());
    }

    #[test]
    fn expand_matches_direct_evaluation() {
        let tm = Substitution::thue_morse();
        for n in 0..8u32 {
            for code in 0..(1u32 << n) {
                let br: Vec<u32> = (0..n).map(|i| code >> i & 1).collect();
                let p = tm.expand(0, n, &br).unwrap();
                for (h, &v) in p.values.iter().enumerate() {
                    // the cell at h reads the parity of set bits of h xor the branching read
                    // from the finest digit outward
                    let mut x = 0u32;
                    for d in 0..n {
                        let digit = (h as u32 >> d & 1) ^ br[(n - 1 - d) as usize];
                        x ^= digit;
                    }
                    assert_eq!(v, x, "n={n} branching={br:?} h={h}");
                }
            }
        }
    }

    #[test]
    fn language_examples() {
        let tm = Substitution::thue_morse().level_language(1, 16).unwrap();
        assert_eq!(tm.patterns, BTreeSet::from([vec![0, 1], vec![1, 0]]));
        assert!(tm.stabilized);
        assert_eq!(
            Substitution::sunny_side_up()
                .level_language(3, 16)
                .unwrap()
                .patterns
                .len(),
            9
        );
        let pd = Substitution::period_doubling().level_language(0, 16).unwrap();
        assert_eq!(pd.patterns, BTreeSet::from([vec![0], vec![1]]));
    }

    #[test]
    fn restricted_language_matches_literal_definition() {
        for s in builtins() {
            for n in 0..=3 {
                for m in n..=n + 3 {
                    assert_eq!(
                        s.restricted_language(n, m).unwrap(),
                        brute_restricted(&s, n, m),
                        "n={n} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn languages_are_nested() {
        for s in builtins() {
            for n in 0..=3 {
                for m in n..=8 {
                    let a = s.restricted_language(n, m).unwrap();
                    let b = s.restricted_language(n, m + 1).unwrap();
                    assert!(b.is_subset(&a));
                }
            }
        }
    }

    #[test]
    fn language_sizes_up_to_ten() {
        for n in 0..=10 {
            let tm = Substitution::thue_morse().level_language(n, 16).unwrap();
            assert_eq!(tm.patterns.len(), 2, "n={n}");
            let ssu = Substitution::sunny_side_up().level_language(n, 16).unwrap();
            assert_eq!(ssu.patterns.len(), (1 << n) + 1, "n={n}");
        }
    }

    #[test]
    fn period_doubling_coincidence() {
        let pd = Substitution::period_doubling();
        let firsts: BTreeSet<u32> = (0..2).map(|a| pd.images(a)[0][0]).collect();
        assert_eq!(firsts.len(), 1);
    }

    #[test]
    fn decode_examples() {
        // The newest branching bit is always forced; the older one is lost exactly when the
        // level-1 parent is `00`, the image of `1`, which both rotations produce.
        let pd = Substitution::period_doubling();
        let mut ambiguous = Vec::new();
        for p in pd.level_language(2, 16).unwrap().patterns {
            match pd
                .decode_branching(&LevelPattern {
                    level: 2,
                    values: p.clone(),
                })
                .unwrap()
            {
                Decoding::Unique(b) => assert_eq!(b.len(), 2),
                Decoding::Ambiguous(all) => {
                    assert!(all.iter().all(|b| b[1] == all[0][1]));
                    ambiguous.push(p);
                }
            }
        }
        assert_eq!(ambiguous, vec![vec![0, 1, 0, 1], vec![1, 0, 1, 0]]);
        let tm = Substitution::thue_morse();
        match tm
            .decode_branching(&LevelPattern {
                level: 1,
                values: vec![0, 1],
            })
            .unwrap()
        {
            Decoding::Ambiguous(all) => assert_eq!(all, vec![vec![0], vec![1]]),
            other => panic!("unexpected {other:?}"),
        }
        let ssu = Substitution::sunny_side_up();
        for n in 1..=5u32 {
            for pos in 0..(1usize << n) {
                let mut values = vec![0u32; 1 << n];
                values[pos] = 1;
                let d = ssu.decode_branching(&LevelPattern { level: n, values }).unwrap();
                let expect: Vec<u32> = (0..n).map(|j| (pos >> (n - 1 - j) & 1) as u32).collect();
                assert_eq!(d, Decoding::Unique(expect));
            }
        }
        let mut two = vec![0u32; 4];
        two[0] = 1;
        two[3] = 1;
        assert!(ssu.decode_branching(&LevelPattern { level: 2, values: two }).is_err());
    }

    #[test]
    fn decode_matches_forward_oracle() {
        for s in builtins() {
            let stable = s.stable_letters();
            for n in 0..=4u32 {
                let lang = s.level_language(n, 16).unwrap().patterns;
                for p in &lang {
                    let got = s.consistent_branchings(p).unwrap();
                    let mut expect = Vec::new();
                    for code in 0..(s.arity as u64).pow(n) {
                        let br: Vec<u32> = (0..n).map(|i| ((code >> i) & 1) as u32).collect();
                        if s.expansions_along(&stable, &br).unwrap().contains(p) {
                            expect.push(br);
                        }
                    }
                    expect.sort();
                    assert_eq!(got, expect);
                }
            }
        }
    }

    #[test]
    fn ytau_examples() {
        let pd = Substitution::period_doubling();
        let y0 = pd.ytau_language(0).unwrap();
        assert_eq!(y0, BTreeSet::from([vec![vec![0]], vec![vec![1]]]));
        let y1 = pd.ytau_language(1).unwrap();
        let lang: Vec<Vec<u32>> = pd.level_language(1, 16).unwrap().patterns.into_iter().collect();
        for r0 in &lang {
            for r1 in &lang {
                let shared = (0..2u32).any(|b| {
                    let e = pd.expansions_along(&pd.stable_letters(), &[b]).unwrap();
                    e.contains(r0) && e.contains(r1)
                });
                let pattern = vec![r0.clone(), r1.clone()];
                assert_eq!(y1.contains(&pattern), shared);
                assert_eq!(pd.ytau_contains(&pattern).unwrap(), shared);
            }
        }
        let decoded: Vec<(Vec<u32>, Vec<u32>)> = pd
            .level_language(2, 16)
            .unwrap()
            .patterns
            .into_iter()
            .map(|p| {
                let d = pd.consistent_branchings(&p).unwrap();
                (p, d[0].clone())
            })
            .collect();
        let (p, bp) = &decoded[0];
        let (q, _) = decoded.iter().find(|(_, b)| b != bp).unwrap();
        let rows = vec![p.clone(), q.clone(), p.clone(), p.clone()];
        assert!(!pd.ytau_contains(&rows).unwrap());
        assert!(!pd.ytau_language(2).unwrap().contains(&rows));
    }

    fn square_tiles(n: usize) -> WangTileset {
        WangTileset::new(
            (0..n).map(|i| Colour::Name(i.to_string())).collect(),
            (0..n as u32).map(|i| [i, i, i, i]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn overlay_examples() {
        let pd = Substitution::period_doubling();
        for nb in 1..=3 {
            let o = overlay_wang_substitution(&pd, &square_tiles(nb)).unwrap();
            for a in 0..o.letter_count() as u32 {
                assert_eq!(o.images(a).len(), nb);
            }
            assert_eq!(o.is_deterministic(), nb == 1);
            let seeds: BTreeSet<u32> = (0..o.letter_count() as u32).collect();
            for br in [vec![0, 1, 1], vec![1, 0, 0]] {
                for p in o.expansions_along(&seeds, &br).unwrap() {
                    let proj: Vec<u32> = p.iter().map(|&x| x / (nb * nb) as u32).collect();
                    let ok = (0..2).any(|s| pd.expand(s, 3, &br).unwrap().values == proj);
                    assert!(ok);
                }
            }
        }
        assert!(overlay_wang_substitution(
            &Substitution::thue_morse(),
            &WangTileset::new(vec![Colour::Name("x".into())], vec![]).unwrap()
        )
        .is_err());
    }

    #[test]
    fn sofic_cover_counts() {
        for s in builtins() {
            let t = sofic_cover_tileset(&s).unwrap();
            let images: usize = (0..s.letter_count() as u32).map(|a| s.images(a).len()).sum();
            assert_eq!(t.allowed().len(), 2 * 3 * 2 * 2 * s.letter_count() * images);
            assert_eq!(t.colour_count(), 6 * s.letter_count());
        }
        let empty = Substitution::new(vec!["x".into(), "y".into()], 2, vec![vec![vec![0, 0]], vec![]]).unwrap();
        let t = sofic_cover_tileset(&empty).unwrap();
        for q in t.allowed() {
            let c = |x: u32| x / 4 % 3;
            let own = if c(q[2]) == c(q[0]) { q[2] } else { q[3] };
            assert_eq!(own % 2, 0, "letter y never sits below");
        }
    }

    #[test]
    fn toeplitz_examples() {
        let b = [true, false, true, true];
        let col = toeplitz_encode(&b, 3).unwrap();
        let expect = [b[0], b[1], b[0], b[2], b[0], b[1], b[0], b[3]];
        assert_eq!(col.entries, expect);
        assert_eq!(toeplitz_encode(&[false], 0).unwrap().entries, vec![false]);
        assert!(toeplitz_encode(&[true], 2).is_err());
        let mut broken = col.clone();
        broken.entries[2] = !broken.entries[2];
        assert!(toeplitz_decode(&broken).is_err());
    }

    proptest! {
        #[test]
        fn toeplitz_round_trip(bits in proptest::collection::vec(any::<bool>(), 11), n in 0u32..=10) {
            let col = toeplitz_encode(&bits, n).unwrap();
            let (low, high) = toeplitz_decode(&col).unwrap();
            prop_assert_eq!(&low[..], &bits[..n as usize]);
            prop_assert_eq!(high, bits[n as usize]);
        }
    }

    #[test]
    fn json_round_trip() {
        for s in builtins() {
            assert_eq!(Substitution::from_json(&s.to_json()).unwrap(), s);
        }
        let bad = r#"{"alphabet":["a"],"arity":2,"rules":{"a":[["a","b"]]}}"#;
        assert!(matches!(Substitution::from_json(bad), Err(Error::Parse { .. })));
    }
}
