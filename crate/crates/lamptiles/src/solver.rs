//! Checking, counting and enumerating colourings of tetrahedron regions, plus the
//! structural diagnostics built on top of them.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::csp::{Budget, Csp, Table, Visit};
use crate::error::{Error, Result};
use crate::group::{LampElement, TetraRegion};
use crate::tilesets::{SpiderTileset, TetraTileset};

/// Search settings shared by every counting entry point.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub threads: usize,
    pub budget: Budget,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            threads: 1,
            budget: Budget::unlimited(),
        }
    }
}

impl SolveOptions {
    pub fn threads(threads: usize) -> Self {
        SolveOptions {
            threads,
            ..Self::default()
        }
    }
}

/// Colour indices for every vertex of a region, in region order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexColouring {
    pub base: i64,
    pub height: i64,
    pub values: Vec<u32>,
}

impl VertexColouring {
    pub fn new(region: TetraRegion, values: Vec<u32>) -> Result<Self> {
        if values.len() != region.vertex_count() {
            return Err(Error::usage(format!(
                "colouring has {} values, region has {} vertices",
                values.len(),
                region.vertex_count()
            )));
        }
        Ok(VertexColouring {
            base: region.base(),
            height: region.height() as i64,
            values,
        })
    }

    pub fn region(&self) -> Result<TetraRegion> {
        let r = TetraRegion::new(self.base, self.height)?;
        if r.vertex_count() != self.values.len() {
            return Err(Error::parse(
                "values",
                format!("expected {} values, got {}", r.vertex_count(), self.values.len()),
            ));
        }
        Ok(r)
    }

    /// Colours every region vertex with `f`.
    pub fn from_fn(region: TetraRegion, f: impl Fn(&LampElement) -> u32) -> Self {
        let values = (0..region.vertex_count()).map(|i| f(&region.vertex(i))).collect();
        VertexColouring {
            base: region.base(),
            height: region.height() as i64,
            values,
        }
    }

    /// The values on one level, indexed by band bits.
    pub fn row(&self, level: u32) -> Result<&[u32]> {
        let r = self.region()?;
        let w = r.width();
        let start = r.index(level, 0);
        Ok(&self.values[start..start + w])
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let c: VertexColouring = serde_json::from_str(&text)
            .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        c.region()?;
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self).expect("json") + "\n")?;
        Ok(())
    }
}

/// The first constraint instance whose quadruple is not an allowed tile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub instance: usize,
    pub vertices: [LampElement; 4],
    pub colours: [u32; 4],
}

pub fn tetra_csp(tileset: &TetraTileset, region: &TetraRegion) -> Csp {
    let mut csp = Csp::new(vec![tileset.colour_count(); region.vertex_count()]);
    let table = Arc::new(Table::from_quads(tileset.allowed()));
    for q in region.constraints() {
        csp.add(q.to_vec(), table.clone());
    }
    csp
}

/// Variables are region edges; spiders are enforced at interior vertices only.
pub fn spider_csp(tileset: &SpiderTileset, region: &TetraRegion) -> Csp {
    let mut csp = Csp::new(vec![tileset.colour_count(); region.edge_count()]);
    let table = Arc::new(Table::from_quads(tileset.allowed()));
    for (_, edges) in region.spider_sites() {
        csp.add(edges.to_vec(), table.clone());
    }
    csp
}

pub fn check(tileset: &TetraTileset, colouring: &VertexColouring) -> Result<std::result::Result<(), Violation>> {
    let region = colouring.region()?;
    if let Some(&bad) = colouring.values.iter().find(|&&c| c as usize >= tileset.colour_count()) {
        return Err(Error::usage(format!(
            "colour index {bad} out of range for a tileset with {} colours",
            tileset.colour_count()
        )));
    }
    for (instance, q) in region.constraints().into_iter().enumerate() {
        let colours = q.map(|v| colouring.values[v]);
        if !tileset.contains(&colours) {
            return Ok(Err(Violation {
                instance,
                vertices: q.map(|v| region.vertex(v)),
                colours,
            }));
        }
    }
    Ok(Ok(()))
}

pub fn count(tileset: &TetraTileset, height: i64, opts: SolveOptions) -> Result<u64> {
    let region = TetraRegion::new(0, height)?;
    tetra_csp(tileset, &region).count(opts.threads, opts.budget)
}

pub fn count_spider(tileset: &SpiderTileset, height: i64, opts: SolveOptions) -> Result<u64> {
    let region = TetraRegion::new(0, height)?;
    spider_csp(tileset, &region).count(opts.threads, opts.budget)
}

/// Colourings in lexicographic order, with a truncation flag when `limit` cut the stream.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub colourings: Vec<VertexColouring>,
    pub truncated: bool,
}

pub fn enumerate(tileset: &TetraTileset, height: i64, limit: Option<usize>, budget: Budget) -> Result<Enumeration> {
    let region = TetraRegion::new(0, height)?;
    let (sols, truncated) = tetra_csp(tileset, &region).enumerate(limit, budget)?;
    Ok(Enumeration {
        colourings: sols
            .into_iter()
            .map(|values| VertexColouring {
                base: 0,
                height,
                values,
            })
            .collect(),
        truncated,
    })
}

/// Calls `f` on every valid colouring (values in region order), possibly concurrently.
/// `f` returns false to abort the search. Returns the number of colourings visited.
pub fn for_each_colouring(
    tileset: &TetraTileset,
    height: i64,
    opts: SolveOptions,
    f: impl Fn(&[u32]) -> bool + Sync,
) -> Result<u64> {
    let region = TetraRegion::new(0, height)?;
    tetra_csp(tileset, &region).visit_parallel(opts.threads, opts.budget, |s| {
        if f(s) {
            Visit::Continue
        } else {
            Visit::Stop
        }
    })
}

/// Whether the bottom row satisfies `x(s) = x(s xor t)` for every `s`.
pub fn invariance_check(colouring: &VertexColouring, t: &[bool]) -> Result<bool> {
    let region = colouring.region()?;
    if t.len() != region.height() as usize {
        return Err(Error::usage(format!(
            "translation has {} bits, region height is {}",
            t.len(),
            region.height()
        )));
    }
    let mask = t.iter().enumerate().fold(0usize, |m, (i, &b)| m | (b as usize) << i);
    let row = colouring.row(0)?;
    Ok((0..row.len()).all(|s| row[s] == row[s ^ mask]))
}

/// `ln(count) / vertex count`, or negative infinity when nothing is valid.
pub fn entropy_from_count(count: u64, height: u32) -> f64 {
    if count == 0 {
        return f64::NEG_INFINITY;
    }
    let vertices = (height as f64 + 1.0) * 2f64.powi(height as i32);
    (count as f64).ln() / vertices
}

pub fn entropy_estimate(tileset: &TetraTileset, height: i64, opts: SolveOptions) -> Result<f64> {
    let c = count(tileset, height, opts)?;
    Ok(entropy_from_count(c, TetraRegion::new(0, height)?.height()))
}

/// Numbers of colour 0 and colour 1 in a `Delta_count` row.
pub fn symbol_counts(row: &[u32]) -> (i64, i64) {
    let ones = row.iter().filter(|&&c| c == 0).count() as i64;
    (ones, row.len() as i64 - ones)
}

/// Closed form for the bottom-row symbol counts of `Delta_count` given the top symbol.
pub fn delta_count_expected(k: u32, top_is_one: bool) -> (i64, i64) {
    let p = 1i64 << k;
    let sign = if k.is_multiple_of(2) { 1 } else { -1 };
    if top_is_one {
        ((2 * p + sign) / 3, (p - sign) / 3)
    } else {
        ((2 * p - 2 * sign) / 3, (p + 2 * sign) / 3)
    }
}

/// Exhaustive structure check of `Delta_count` colourings at one height.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DeltaReport {
    pub height: u32,
    pub colourings: u64,
    /// Colourings with a non-constant top row or bottom counts off the closed form.
    pub violations: u64,
}

pub fn delta_count_structure(height: i64, opts: SolveOptions) -> Result<DeltaReport> {
    use std::sync::atomic::{AtomicU64, Ordering};
    let region = TetraRegion::new(0, height)?;
    let (k, w) = (region.height(), region.width());
    let bad = AtomicU64::new(0);
    let tileset = crate::tilesets::delta_count();
    let total = for_each_colouring(&tileset, height, opts, |values| {
        let top = &values[k as usize * w..];
        let ok =
            top.iter().all(|&x| x == top[0]) && symbol_counts(&values[..w]) == delta_count_expected(k, top[0] == 0);
        if !ok {
            bad.fetch_add(1, Ordering::Relaxed);
        }
        true
    })?;
    Ok(DeltaReport {
        height: k,
        colourings: total,
        violations: bad.into_inner(),
    })
}

/// One connected component of a single-colour edge subgraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonoComponent {
    pub colour: u32,
    pub vertices: Vec<usize>,
    pub edges: usize,
    pub min_level: u32,
    pub max_level: u32,
}

impl MonoComponent {
    pub fn level_span(&self) -> u32 {
        self.max_level - self.min_level
    }

    pub fn is_tree(&self) -> bool {
        self.edges + 1 == self.vertices.len()
    }
}

/// Per-colour forests of a `Theta_0` edge colouring.
#[derive(Clone, Debug)]
pub struct ForestReport {
    pub height: u32,
    /// `degree[c][v]`: number of `c`-coloured edges at vertex `v`.
    pub degree: [Vec<u8>; 3],
    pub components: Vec<MonoComponent>,
}

impl ForestReport {
    /// Whether some monochrome component reaches from the bottom level to the top.
    pub fn has_full_height_tree(&self) -> bool {
        self.height == 0 || self.components.iter().any(|c| c.level_span() == self.height)
    }

    /// Components reaching the top level that start at `level`, grouped by colour.
    pub fn spanning_from(&self, level: u32) -> impl Iterator<Item = &MonoComponent> {
        self.components
            .iter()
            .filter(move |c| c.min_level == level && c.max_level == self.height)
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

/// Monochrome subgraphs of an edge colouring valid for `Theta_0` on the interior.
///
/// Asserts the degree profile of the corooted-tree structure: at an interior vertex the
/// majority colour has degree 3, the next colour degree 1 and the third colour degree 0.
pub fn monochrome_trees(region: &TetraRegion, edges: &[u32]) -> Result<ForestReport> {
    if edges.len() != region.edge_count() {
        return Err(Error::usage("edge colouring does not match the region"));
    }
    if let Some(&c) = edges.iter().find(|&&c| c > 2) {
        return Err(Error::usage(format!("edge colour {c} is not in Z/3")));
    }
    let n = region.vertex_count();
    let mut degree = [vec![0u8; n], vec![0u8; n], vec![0u8; n]];
    let mut parents: [Vec<usize>; 3] = [(0..n).collect(), (0..n).collect(), (0..n).collect()];
    for (e, &c) in edges.iter().enumerate() {
        let (lo, hi) = region.edge_endpoints(e);
        degree[c as usize][lo] += 1;
        degree[c as usize][hi] += 1;
        let p = &mut parents[c as usize];
        let (a, b) = (find(p, lo), find(p, hi));
        if a != b {
            p[a.max(b)] = a.min(b);
        }
    }
    for (v, _) in region.spider_sites() {
        let d = [degree[0][v], degree[1][v], degree[2][v]];
        let Some(m) = (0..3).find(|&c| d[c] == 3) else {
            return Err(Error::validity(format!(
                "vertex {} has no colour of degree 3 (degrees {d:?})",
                region.vertex(v)
            )));
        };
        if d[(m + 1) % 3] != 1 || d[(m + 2) % 3] != 0 {
            return Err(Error::validity(format!(
                "vertex {} has degree profile {d:?}",
                region.vertex(v)
            )));
        }
    }
    let mut components = Vec::new();
    for c in 0..3u32 {
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (v, &d) in degree[c as usize].iter().enumerate().take(n) {
            if d > 0 {
                let r = find(&mut parents[c as usize], v);
                groups.entry(r).or_default().push(v);
            }
        }
        for vertices in groups.into_values() {
            let edge_total: usize = vertices.iter().map(|&v| degree[c as usize][v] as usize).sum::<usize>() / 2;
            let levels = vertices.iter().map(|&v| region.level_of(v));
            let min_level = levels.clone().min().unwrap_or(0);
            let max_level = levels.max().unwrap_or(0);
            components.push(MonoComponent {
                colour: c,
                vertices,
                edges: edge_total,
                min_level,
                max_level,
            });
        }
    }
    Ok(ForestReport {
        height: region.height(),
        degree,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tilesets::{delta_count, theta0, xtree, xtree_half};

    /// Independent oracle: plain backtracking that only checks fully assigned tetrahedra.
    fn brute_count(t: &TetraTileset, k: i64) -> u64 {
        let r = TetraRegion::new(0, k).unwrap();
        let cons = r.constraints();
        let mut by_last: Vec<Vec<[usize; 4]>> = vec![Vec::new(); r.vertex_count()];
        for q in cons {
            by_last[*q.iter().max().unwrap()].push(q);
        }
        let mut vals = vec![0u32; r.vertex_count()];
        fn rec(i: usize, t: &TetraTileset, by_last: &[Vec<[usize; 4]>], vals: &mut Vec<u32>) -> u64 {
            if i == vals.len() {
                return 1;
            }
            let mut total = 0;
            for c in 0..t.colour_count() as u32 {
                vals[i] = c;
                if by_last[i].iter().all(|q| t.contains(&q.map(|v| vals[v]))) {
                    total += rec(i + 1, t, by_last, vals);
                }
            }
            total
        }
        rec(0, t, &by_last, &mut vals)
    }

    #[test]
    fn counts_match_oracle() {
        // The oracle prunes only on completed tetrahedra, so 18 colours stop at height 2.
        for k in 0..=2 {
            assert_eq!(
                count(&xtree(), k, SolveOptions::default()).unwrap(),
                brute_count(&xtree(), k)
            );
        }
        for k in 0..=3 {
            assert_eq!(
                count(&delta_count(), k, SolveOptions::default()).unwrap(),
                brute_count(&delta_count(), k)
            );
        }
    }

    #[test]
    fn xtree_counts_are_nine_times_two_to_the_k() {
        for k in 0..=5 {
            let c = count(&xtree(), k, SolveOptions::default()).unwrap();
            assert_eq!(c, 9 << k, "k = {k}");
        }
    }

    #[test]
    fn delta_count_small_counts() {
        let got: Vec<u64> = (0..=4)
            .map(|k| count(&delta_count(), k, SolveOptions::default()).unwrap())
            .collect();
        assert_eq!(got, vec![2, 3, 8, 48, 2048]);
    }

    #[test]
    fn enumerate_examples() {
        let e = enumerate(&delta_count(), 0, None, Budget::unlimited()).unwrap();
        assert_eq!(e.colourings.len(), 2);
        assert!(!e.truncated);
        let e = enumerate(&xtree(), 2, None, Budget::unlimited()).unwrap();
        assert_eq!(e.colourings.len(), 36);
        for c in &e.colourings {
            assert!(check(&xtree(), c).unwrap().is_ok());
        }
        let mut sorted = e.colourings.iter().map(|c| c.values.clone()).collect::<Vec<_>>();
        sorted.sort();
        assert_eq!(
            sorted,
            e.colourings.iter().map(|c| c.values.clone()).collect::<Vec<_>>()
        );
        let empty = TetraTileset::new(xtree().colours, []).unwrap();
        let e = enumerate(&empty, 1, None, Budget::unlimited()).unwrap();
        assert!(e.colourings.is_empty());
        let e = enumerate(&xtree(), 2, Some(5), Budget::unlimited()).unwrap();
        assert_eq!(e.colourings.len(), 5);
        assert!(e.truncated);
    }

    #[test]
    fn count_equals_enumeration_for_builtins() {
        for t in [delta_count(), xtree(), xtree_half()] {
            for k in 0..=4 {
                let c = count(&t, k, SolveOptions::default()).unwrap();
                let e = enumerate(&t, k, None, Budget::unlimited()).unwrap();
                assert_eq!(c, e.colourings.len() as u64);
            }
        }
    }

    #[test]
    fn constant_colouring_violates_delta_count() {
        let r = TetraRegion::new(0, 2).unwrap();
        let c = VertexColouring::new(r, vec![0; r.vertex_count()]).unwrap();
        let v = check(&delta_count(), &c).unwrap().unwrap_err();
        assert_eq!(v.instance, 0);
        assert_eq!(v.colours, [0, 0, 0, 0]);
    }

    #[test]
    fn thread_independence() {
        for k in 0..=4 {
            let one = count(&delta_count(), k, SolveOptions::threads(1)).unwrap();
            for t in [2, 3, 8] {
                assert_eq!(count(&delta_count(), k, SolveOptions::threads(t)).unwrap(), one);
                assert_eq!(
                    count(&xtree(), k, SolveOptions::threads(t)).unwrap(),
                    count(&xtree(), k, SolveOptions::threads(1)).unwrap()
                );
            }
        }
    }

    #[test]
    fn budget_reports_lower_bound() {
        let opts = SolveOptions {
            threads: 1,
            budget: Budget::nodes(100),
        };
        assert!(matches!(count(&delta_count(), 4, opts), Err(Error::Budget { .. })));
    }

    #[test]
    fn delta_count_structure() {
        for k in 1..=4i64 {
            let e = enumerate(&delta_count(), k, None, Budget::unlimited()).unwrap();
            for c in &e.colourings {
                let top = c.row(k as u32).unwrap();
                assert!(top.iter().all(|&x| x == top[0]));
                assert_eq!(
                    symbol_counts(c.row(0).unwrap()),
                    delta_count_expected(k as u32, top[0] == 0)
                );
            }
        }
    }

    #[test]
    fn delta_count_bottom_rows_are_not_invariant() {
        let k = 4;
        let e = enumerate(&delta_count(), k, None, Budget::unlimited()).unwrap();
        for c in &e.colourings {
            for mask in 1..(1usize << (k - 1)) {
                let t: Vec<bool> = (0..k).map(|i| mask >> i & 1 == 1).collect();
                assert!(!invariance_check(c, &t).unwrap());
            }
            assert!(invariance_check(c, &[false; 4]).unwrap());
        }
        assert!(invariance_check(&e.colourings[0], &[true]).is_err());
    }

    #[test]
    fn xtree_fibres_and_translation() {
        let xt = xtree();
        let tu = |c: u32| (c / 3, c % 3);
        for k in 1..=4i64 {
            let r = TetraRegion::new(0, k).unwrap();
            let e = enumerate(&xt, k, None, Budget::unlimited()).unwrap();
            for c in &e.colourings {
                for v in 0..r.vertex_count() {
                    let level = r.level_of(v);
                    let bits = r.bits_of(v);
                    for i in 0..k as u32 {
                        let w = r.index(level, bits ^ (1 << i));
                        if i >= level {
                            assert_eq!(tu(c.values[v]).0, tu(c.values[w]).0);
                        } else {
                            assert_eq!(tu(c.values[v]).1, tu(c.values[w]).1);
                        }
                    }
                }
                for dt in 0..3 {
                    for du in 0..3 {
                        let shifted = VertexColouring {
                            values: c
                                .values
                                .iter()
                                .map(|&x| {
                                    let (t, u) = tu(x);
                                    ((t + dt) % 3) * 3 + (u + du) % 3
                                })
                                .collect(),
                            ..c.clone()
                        };
                        assert!(check(&xt, &shifted).unwrap().is_ok());
                    }
                }
            }
        }
    }

    #[test]
    fn entropy_values() {
        let e: Vec<f64> = (1..=5)
            .map(|k| entropy_estimate(&xtree(), k, SolveOptions::default()).unwrap())
            .collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]));
        assert!((e[0] - 18f64.ln() / 4.0).abs() < 1e-12);
        assert!(e[4] < 0.05);
        assert_eq!(entropy_from_count(0, 3), f64::NEG_INFINITY);
    }

    fn explicit_edges(region: &TetraRegion, context_on: i64) -> Vec<u32> {
        (0..region.edge_count())
            .map(|e| {
                let g = region.vertex(region.edge_endpoints(e).0);
                let above = g.lamps().iter().filter(|&&l| l >= g.head()).count() as i64 + context_on;
                above.rem_euclid(3) as u32
            })
            .collect()
    }

    #[test]
    fn corooted_trees_explicit() {
        let r = TetraRegion::new(0, 3).unwrap();
        for context in 0..3 {
            let edges = explicit_edges(&r, context);
            let report = monochrome_trees(&r, &edges).unwrap();
            assert!(report.has_full_height_tree());
            for c in &report.components {
                assert!(c.is_tree(), "{c:?}");
            }
        }
        let flat = TetraRegion::new(0, 0).unwrap();
        assert!(monochrome_trees(&flat, &[]).unwrap().components.is_empty());
    }

    #[test]
    fn corooted_trees_exhaustive() {
        let r = TetraRegion::new(0, 3).unwrap();
        let csp = spider_csp(&theta0(), &r);
        let seen = csp
            .visit(Budget::unlimited(), |edges| {
                let report = monochrome_trees(&r, edges).unwrap();
                assert!(report.has_full_height_tree());
                let view = crate::tilesets::spider_vertex_view(&r, edges).unwrap();
                for (v, c) in view.iter().enumerate() {
                    if let Some(c) = c {
                        let up = r.edge_index(r.level_of(v), r.bits_of(v), false);
                        assert_eq!(edges[up], *c);
                    }
                }
                Visit::Continue
            })
            .unwrap();
        assert!(seen > 0);
    }

    #[test]
    fn colouring_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let e = enumerate(&xtree(), 2, Some(1), Budget::unlimited()).unwrap();
        e.colourings[0].save(&path).unwrap();
        assert_eq!(VertexColouring::load(&path).unwrap(), e.colourings[0]);
        std::fs::write(&path, r#"{"base":0,"height":2,"values":[0,1]}"#).unwrap();
        assert!(VertexColouring::load(&path).is_err());
    }
}
