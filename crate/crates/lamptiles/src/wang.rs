//! Wang tilesets, towers on the sea-level windows, square search and the bundle that
//! couples two sofic covers to a Wang tileset.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::csp::{Budget, Csp, Table};
use crate::error::{Error, Result};
use crate::group::{position_codec, LampConfig, LampElement, TetraRegion};
use crate::substitutions::{overlay_wang_substitution, sofic_cover_tileset, Substitution};
use crate::tilesets::{colours_json, parse_colours, Colour, SpiderTileset};

pub const NORTH: usize = 0;
pub const EAST: usize = 1;
pub const SOUTH: usize = 2;
pub const WEST: usize = 3;

/// Tiles are `(N, E, S, W)` colour indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WangTileset {
    pub colours: Vec<Colour>,
    pub tiles: Vec<[u32; 4]>,
}

impl WangTileset {
    pub fn new(colours: Vec<Colour>, tiles: Vec<[u32; 4]>) -> Result<Self> {
        if colours.is_empty() {
            return Err(Error::usage("a Wang tileset needs at least one colour"));
        }
        if let Some(t) = tiles.iter().find(|t| t.iter().any(|&c| c as usize >= colours.len())) {
            return Err(Error::usage(format!("tile {t:?} uses a colour out of range")));
        }
        Ok(WangTileset { colours, tiles })
    }

    /// One tile with all four sides equal.
    pub fn single_matching() -> Self {
        Self::new(vec![Colour::Name("x".into())], vec![[0, 0, 0, 0]]).expect("static")
    }

    /// One tile whose east and west sides differ.
    pub fn single_mismatched() -> Self {
        Self::new(
            vec![Colour::Name("x".into()), Colour::Name("y".into())],
            vec![[0, 0, 0, 1]],
        )
        .expect("static")
    }

    /// `A = (0,0,1,1)`, `B = (1,1,0,0)`: valid tilings are the two checkerboards.
    pub fn checkerboard() -> Self {
        Self::new(
            vec![Colour::Name("0".into()), Colour::Name("1".into())],
            vec![[0, 0, 1, 1], [1, 1, 0, 0]],
        )
        .expect("static")
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "single" | "single_matching" => Ok(Self::single_matching()),
            "mismatched" | "single_mismatched" => Ok(Self::single_mismatched()),
            "checkerboard" => Ok(Self::checkerboard()),
            other => Err(Error::usage(format!("unknown built-in Wang tileset '{other}'"))),
        }
    }

    pub fn fits_east(&self, left: u32, right: u32) -> bool {
        self.tiles[left as usize][EAST] == self.tiles[right as usize][WEST]
    }

    pub fn fits_north(&self, below: u32, above: u32) -> bool {
        self.tiles[below as usize][NORTH] == self.tiles[above as usize][SOUTH]
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let colours = parse_colours(v)?;
        let arr = v
            .get("tiles")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse("tiles", "missing array"))?;
        let mut tiles = Vec::with_capacity(arr.len());
        for (k, t) in arr.iter().enumerate() {
            let mut tile = [0u32; 4];
            for (p, key) in ["n", "e", "s", "w"].iter().enumerate() {
                let loc = format!("tiles[{k}].{key}");
                tile[p] = t
                    .get(*key)
                    .and_then(Value::as_u64)
                    .and_then(|x| u32::try_from(x).ok())
                    .ok_or_else(|| Error::parse(&loc, "expected a colour index"))?;
                if tile[p] as usize >= colours.len() {
                    return Err(Error::parse(&loc, "colour index out of range"));
                }
            }
            tiles.push(tile);
        }
        Self::new(colours, tiles).map_err(|e| Error::parse("colours", e.to_string()))
    }

    pub fn to_json(&self) -> Value {
        let tiles: Vec<Value> = self
            .tiles
            .iter()
            .map(|t| json!({"n": t[0], "e": t[1], "s": t[2], "w": t[3]}))
            .collect();
        json!({"kind": "wang", "colours": colours_json(&self.colours), "tiles": tiles})
    }
}

/// A tile at every element of `Sigma_n`, with the `2n` bits of `b` at integer lamps
/// `-n..n` (entry `i` is lamp `i - n`).
///
/// Cell `c = s' + 2^n s''` is the sea-level element whose lamp `-1-i` is bit `i` of `s'`
/// and whose lamp `i` is bit `i` of `s''`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WangTowerLevel {
    pub n: u32,
    pub b: Vec<bool>,
    pub cells: Vec<u32>,
}

/// A `2^n x 2^n` grid, `tiles[y * 2^n + x]`, with `x` growing east and `y` north.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareTiling {
    pub n: u32,
    pub tiles: Vec<u32>,
}

/// A failed adjacency, in grid coordinates of the first cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WangViolation {
    pub at: (u64, u64),
    pub horizontal: bool,
}

impl std::fmt::Display for WangViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (x, y) = self.at;
        if self.horizontal {
            write!(f, "east side of ({x},{y}) does not match west side of ({},{y})", x + 1)
        } else {
            write!(
                f,
                "north side of ({x},{y}) does not match south side of ({x},{})",
                y + 1
            )
        }
    }
}

/// Largest level handled by towers and squares (4^n cells).
pub const MAX_TOWER_LEVEL: u32 = 12;

fn check_level(n: u32) -> Result<()> {
    if n > MAX_TOWER_LEVEL {
        return Err(Error::usage(format!(
            "level {n} exceeds the supported maximum {MAX_TOWER_LEVEL}"
        )));
    }
    Ok(())
}

impl WangTowerLevel {
    pub fn new(n: u32, b: Vec<bool>, cells: Vec<u32>) -> Result<Self> {
        check_level(n)?;
        if b.len() != 2 * n as usize {
            return Err(Error::usage(format!(
                "level {n} needs {} bits of b, got {}",
                2 * n,
                b.len()
            )));
        }
        if cells.len() != 1 << (2 * n) {
            return Err(Error::usage(format!(
                "level {n} needs {} cells, got {}",
                1u64 << (2 * n),
                cells.len()
            )));
        }
        Ok(WangTowerLevel { n, b, cells })
    }

    pub fn b_config(&self) -> LampConfig {
        let n = self.n as i64;
        LampConfig::from_lamps(-n, n, (0..2 * n).filter(|&i| self.b[i as usize]).map(|i| i - n)).expect("inside window")
    }

    /// The element of `Sigma_n` stored at cell `c`.
    pub fn element(&self, c: usize) -> LampElement {
        let n = self.n as i64;
        let side = 1usize << self.n;
        let (down, up) = (c % side, c / side);
        let lamps = (0..n)
            .filter(|&i| down >> i & 1 == 1)
            .map(|i| -1 - i)
            .chain((0..n).filter(|&i| up >> i & 1 == 1));
        LampElement::new(lamps, 0)
    }

    /// Grid position `(eta_b, nu_b)` of cell `c`.
    pub fn position(&self, c: usize) -> (u64, u64) {
        position_codec(&self.element(c), &self.b_config(), self.n).expect("cell inside Sigma_n")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let raw: WangTowerLevel = serde_json::from_str(&text)
            .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        Self::new(raw.n, raw.b, raw.cells)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self).expect("json") + "\n")?;
        Ok(())
    }
}

impl SquareTiling {
    pub fn new(n: u32, tiles: Vec<u32>) -> Result<Self> {
        check_level(n)?;
        if tiles.len() != 1 << (2 * n) {
            return Err(Error::usage(format!(
                "a 2^{n} square needs {} tiles, got {}",
                1u64 << (2 * n),
                tiles.len()
            )));
        }
        Ok(SquareTiling { n, tiles })
    }

    pub fn side(&self) -> usize {
        1 << self.n
    }

    pub fn at(&self, x: usize, y: usize) -> u32 {
        self.tiles[y * self.side() + x]
    }

    pub fn check(&self, tileset: &WangTileset) -> Result<std::result::Result<(), WangViolation>> {
        check_indices(tileset, &self.tiles)?;
        let side = self.side();
        for y in 0..side {
            for x in 0..side {
                let t = self.at(x, y);
                if x + 1 < side && !tileset.fits_east(t, self.at(x + 1, y)) {
                    return Ok(Err(WangViolation {
                        at: (x as u64, y as u64),
                        horizontal: true,
                    }));
                }
                if y + 1 < side && !tileset.fits_north(t, self.at(x, y + 1)) {
                    return Ok(Err(WangViolation {
                        at: (x as u64, y as u64),
                        horizontal: false,
                    }));
                }
            }
        }
        Ok(Ok(()))
    }

    /// The south-west quadrant of side `2^m`.
    pub fn quadrant(&self, m: u32) -> SquareTiling {
        let side = 1usize << m;
        let tiles = (0..side)
            .flat_map(|y| (0..side).map(move |x| (x, y)))
            .map(|(x, y)| self.at(x, y))
            .collect();
        SquareTiling { n: m, tiles }
    }
}

fn check_indices(tileset: &WangTileset, tiles: &[u32]) -> Result<()> {
    match tiles.iter().find(|&&t| t as usize >= tileset.tiles.len()) {
        Some(bad) => Err(Error::usage(format!("tile index {bad} out of range"))),
        None => Ok(()),
    }
}

/// Validity of a tower: adjacency is read through the codec, pairs leaving `Sigma_n` are skipped.
pub fn check_tower(level: &WangTowerLevel, tileset: &WangTileset) -> Result<std::result::Result<(), WangViolation>> {
    check_indices(tileset, &level.cells)?;
    let side = 1usize << level.n;
    let mut at = vec![usize::MAX; level.cells.len()];
    for c in 0..level.cells.len() {
        let (x, y) = level.position(c);
        at[y as usize * side + x as usize] = c;
    }
    for c in 0..level.cells.len() {
        let (x, y) = level.position(c);
        let t = level.cells[c];
        if (x as usize) + 1 < side {
            let right = level.cells[at[y as usize * side + x as usize + 1]];
            if !tileset.fits_east(t, right) {
                return Ok(Err(WangViolation {
                    at: (x, y),
                    horizontal: true,
                }));
            }
        }
        if (y as usize) + 1 < side {
            let above = level.cells[at[(y as usize + 1) * side + x as usize]];
            if !tileset.fits_north(t, above) {
                return Ok(Err(WangViolation {
                    at: (x, y),
                    horizontal: false,
                }));
            }
        }
    }
    Ok(Ok(()))
}

pub fn tower_to_square(level: &WangTowerLevel) -> SquareTiling {
    let side = 1usize << level.n;
    let mut tiles = vec![0u32; level.cells.len()];
    for (c, &t) in level.cells.iter().enumerate() {
        let (x, y) = level.position(c);
        tiles[y as usize * side + x as usize] = t;
    }
    SquareTiling { n: level.n, tiles }
}

pub fn square_to_tower(square: &SquareTiling, b: Vec<bool>) -> Result<WangTowerLevel> {
    let mut level = WangTowerLevel::new(square.n, b, vec![0; square.tiles.len()])?;
    let side = square.side();
    for c in 0..level.cells.len() {
        let (x, y) = level.position(c);
        level.cells[c] = square.tiles[y as usize * side + x as usize];
    }
    Ok(level)
}

/// First valid `2^n x 2^n` tiling in row-major lexicographic order.
pub fn search_square(tileset: &WangTileset, n: u32, budget: Budget) -> Result<Option<SquareTiling>> {
    check_level(n)?;
    if tileset.tiles.is_empty() {
        return Ok(None);
    }
    let side = 1usize << n;
    let nt = tileset.tiles.len() as u32;
    let pairs = |ok: &dyn Fn(u32, u32) -> bool| {
        Arc::new(Table::new(
            2,
            (0..nt)
                .flat_map(|p| (0..nt).map(move |q| (p, q)))
                .filter(|&(p, q)| ok(p, q))
                .map(|(p, q)| vec![p, q]),
        ))
    };
    let horizontal = pairs(&|p, q| tileset.fits_east(p, q));
    let vertical = pairs(&|p, q| tileset.fits_north(p, q));
    let mut csp = Csp::new(vec![nt as usize; side * side]);
    for y in 0..side {
        for x in 0..side {
            let v = y * side + x;
            if x + 1 < side {
                csp.add(vec![v, v + 1], horizontal.clone());
            }
            if y + 1 < side {
                csp.add(vec![v, v + side], vertical.clone());
            }
        }
    }
    Ok(csp.first(budget)?.map(|tiles| SquareTiling { n, tiles }))
}

/// Two sofic covers of the Wang overlay, one per orientation, tied together at every vertex.
#[derive(Clone, Debug)]
pub struct WangBundle {
    pub tiles: WangTileset,
    pub substitution: Substitution,
    /// The cover read along `(a, b, a^-1, b^-1)`.
    pub forward: SpiderTileset,
    /// The same cover with the roles of up and down exchanged.
    pub backward: SpiderTileset,
}

/// The tile pair `(b, b')` carried by overlay letter `x`.
pub fn overlay_tiles(tiles: usize, x: u32) -> (u32, u32) {
    let pair = x as usize % (tiles * tiles);
    ((pair / tiles) as u32, (pair % tiles) as u32)
}

pub fn wang_to_lamp(tiles: &WangTileset, base: &Substitution) -> Result<WangBundle> {
    let substitution = overlay_wang_substitution(base, tiles)?;
    let forward = sofic_cover_tileset(&substitution)?;
    let backward = forward.inverted();
    Ok(WangBundle {
        tiles: tiles.clone(),
        substitution,
        forward,
        backward,
    })
}

/// Variable layout of a bundle network on one region.
#[derive(Clone, Debug)]
pub struct BundleCsp {
    pub csp: Csp,
    pub region: TetraRegion,
    /// Spider sites in region order; site `i` owns the four label/spider variables below.
    pub sites: Vec<usize>,
    edge_count: usize,
}

impl BundleCsp {
    fn site_var(&self, site: usize, slot: usize) -> usize {
        2 * self.edge_count + 4 * site + slot
    }

    /// Overlay letters of the two layers at each spider site of a solution.
    pub fn labels(&self, solution: &[u32]) -> Vec<(u32, u32)> {
        (0..self.sites.len())
            .map(|i| (solution[self.site_var(i, 2)], solution[self.site_var(i, 3)]))
            .collect()
    }
}

/// The letter a spider assigns to its own vertex: among the edge pair at `own`, the one
/// carrying the same counter value as the opposite pair.
fn own_letter(letters: usize, q: &[u32; 4], own: [usize; 2]) -> u32 {
    let counter = |x: u32| x / letters as u32 / 2;
    let other = if own[0] == 2 { 0 } else { 2 };
    let c = counter(q[other]);
    let pick = if counter(q[own[0]]) == c { own[0] } else { own[1] };
    q[pick] % letters as u32
}

/// Edge variables per layer, then per spider site: forward spider, backward spider, forward
/// label, backward label. Labels of one site must carry the same tile, and the tiles
/// recorded as its east and north neighbours must match it.
pub fn bundle_csp(bundle: &WangBundle, region: &TetraRegion) -> BundleCsp {
    let letters = bundle.substitution.letter_count();
    let nb = bundle.tiles.tiles.len();
    let edge_count = region.edge_count();
    let sites = region.spider_sites();
    let mut sizes = vec![bundle.forward.colour_count(); 2 * edge_count];
    for _ in &sites {
        sizes.extend([
            bundle.forward.allowed().len(),
            bundle.backward.allowed().len(),
            letters,
            letters,
        ]);
    }
    let mut csp = Csp::new(sizes);
    let link = |tileset: &SpiderTileset, pos: usize| {
        Arc::new(Table::new(
            2,
            tileset
                .allowed()
                .iter()
                .enumerate()
                .map(|(s, q)| vec![s as u32, q[pos]]),
        ))
    };
    let label = |tileset: &SpiderTileset, own: [usize; 2]| {
        Arc::new(Table::new(
            2,
            tileset
                .allowed()
                .iter()
                .enumerate()
                .map(|(s, q)| vec![s as u32, own_letter(letters, q, own)]),
        ))
    };
    let forward_links: Vec<_> = (0..4).map(|p| link(&bundle.forward, p)).collect();
    let backward_links: Vec<_> = (0..4).map(|p| link(&bundle.backward, p)).collect();
    let forward_label = label(&bundle.forward, [2, 3]);
    let backward_label = label(&bundle.backward, [0, 1]);
    let cross = Arc::new(Table::new(
        2,
        (0..letters as u32)
            .flat_map(|x| (0..letters as u32).map(move |y| (x, y)))
            .filter(|&(x, y)| {
                let (b, east) = overlay_tiles(nb, x);
                let (north, same) = overlay_tiles(nb, y);
                b == same && bundle.tiles.fits_east(b, east) && bundle.tiles.fits_north(b, north)
            })
            .map(|(x, y)| vec![x, y]),
    ));
    let mut layout = BundleCsp {
        csp: Csp::new(Vec::new()),
        region: *region,
        sites: sites.iter().map(|s| s.0).collect(),
        edge_count,
    };
    for (i, (_, edges)) in sites.iter().enumerate() {
        let (fs, bs, fl, bl) = (
            layout.site_var(i, 0),
            layout.site_var(i, 1),
            layout.site_var(i, 2),
            layout.site_var(i, 3),
        );
        for p in 0..4 {
            csp.add(vec![fs, edges[p]], forward_links[p].clone());
            csp.add(vec![bs, edge_count + edges[p]], backward_links[p].clone());
        }
        csp.add(vec![fs, fl], forward_label.clone());
        csp.add(vec![bs, bl], backward_label.clone());
        csp.add(vec![fl, bl], cross.clone());
    }
    layout.csp = csp;
    layout
}

/// First bundled colouring of the height-`height` region, if any.
pub fn bundle_search(bundle: &WangBundle, height: i64, budget: Budget) -> Result<Option<(BundleCsp, Vec<u32>)>> {
    let region = TetraRegion::new(0, height)?;
    let layout = bundle_csp(bundle, &region);
    let found = layout.csp.first(budget)?;
    Ok(found.map(|s| (layout, s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_level(rng: &mut ChaCha8Rng, n: u32, tiles: u32) -> WangTowerLevel {
        let b = (0..2 * n).map(|_| rng.gen()).collect();
        let cells = (0..1usize << (2 * n)).map(|_| rng.gen_range(0..tiles)).collect();
        WangTowerLevel::new(n, b, cells).unwrap()
    }

    #[test]
    fn single_tile_towers() {
        let ok = WangTileset::single_matching();
        for n in 0..=8 {
            let level = WangTowerLevel::new(n, vec![false; 2 * n as usize], vec![0; 1 << (2 * n)]).unwrap();
            assert!(check_tower(&level, &ok).unwrap().is_ok());
        }
        let bad = WangTileset::single_mismatched();
        let level = WangTowerLevel::new(1, vec![false; 2], vec![0; 4]).unwrap();
        assert!(check_tower(&level, &bad).unwrap().is_err());
        let level0 = WangTowerLevel::new(0, vec![], vec![0]).unwrap();
        assert!(check_tower(&level0, &bad).unwrap().is_ok());
    }

    #[test]
    fn identity_cell_sits_at_origin() {
        let level = WangTowerLevel::new(1, vec![false; 2], vec![0, 1, 2, 3]).unwrap();
        assert_eq!(level.position(0), (0, 0));
        let square = tower_to_square(&level);
        assert_eq!(square.tiles, vec![0, 1, 2, 3]);
        assert!(level.element(0).is_identity());
        assert_eq!(level.element(1), LampElement::new([-1], 0));
    }

    #[test]
    fn convert_round_trip_and_validity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let board = WangTileset::checkerboard();
        for _ in 0..200 {
            let n = rng.gen_range(0..=6);
            let level = random_level(&mut rng, n, 2);
            let square = tower_to_square(&level);
            assert_eq!(square_to_tower(&square, level.b.clone()).unwrap(), level);
            assert_eq!(
                check_tower(&level, &board).unwrap().is_ok(),
                square.check(&board).unwrap().is_ok()
            );
        }
    }

    #[test]
    fn flipping_a_bit_permutes_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let level = random_level(&mut rng, 3, 5);
        let square = tower_to_square(&level);
        let mut flipped = level.clone();
        // entry n-1-i is lamp -1-i, which feeds address bit i of the column
        flipped.b[3 - 1 - 1] ^= true;
        let other = tower_to_square(&flipped);
        for y in 0..8 {
            for x in 0..8 {
                assert_eq!(other.at(x ^ 2, y), square.at(x, y));
            }
        }
    }

    #[test]
    fn search_examples() {
        let t = search_square(&WangTileset::single_matching(), 4, Budget::unlimited())
            .unwrap()
            .unwrap();
        assert!(t.tiles.iter().all(|&x| x == 0));
        for n in 1..=3 {
            assert!(search_square(&WangTileset::single_mismatched(), n, Budget::unlimited())
                .unwrap()
                .is_none());
        }
        assert!(search_square(&WangTileset::single_mismatched(), 0, Budget::unlimited())
            .unwrap()
            .is_some());
        let board = WangTileset::checkerboard();
        let sq = search_square(&board, 3, Budget::unlimited()).unwrap().unwrap();
        assert!(sq.check(&board).unwrap().is_ok());
        let tower = square_to_tower(&sq, vec![true, false, true, true, false, false]).unwrap();
        assert!(check_tower(&tower, &board).unwrap().is_ok());
        for m in 0..3 {
            assert!(sq.quadrant(m).check(&board).unwrap().is_ok());
        }
    }

    #[test]
    fn json_round_trip() {
        let board = WangTileset::checkerboard();
        assert_eq!(WangTileset::from_json(&board.to_json()).unwrap(), board);
        let bad = json!({"kind":"wang","colours":["x"],"tiles":[{"n":0,"e":0,"s":0,"w":2}]});
        match WangTileset::from_json(&bad) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "tiles[0].w"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bundle_examples() {
        let pd = Substitution::period_doubling();
        let good = wang_to_lamp(&WangTileset::single_matching(), &pd).unwrap();
        let (layout, sol) = bundle_search(&good, 3, Budget::unlimited()).unwrap().expect("feasible");
        assert!(layout.csp.satisfied_by(&sol));
        let bad = wang_to_lamp(&WangTileset::single_mismatched(), &pd).unwrap();
        assert!(bundle_search(&bad, 2, Budget::unlimited()).unwrap().is_none());
        assert!(bundle_search(&bad, 1, Budget::unlimited()).unwrap().is_some());
    }

    #[test]
    fn bundle_labels_project_to_matching_tiles() {
        let pd = Substitution::period_doubling();
        let board = WangTileset::checkerboard();
        let bundle = wang_to_lamp(&board, &pd).unwrap();
        let (layout, sol) = bundle_search(&bundle, 2, Budget::nodes(5_000_000))
            .unwrap()
            .expect("feasible");
        for (x, y) in layout.labels(&sol) {
            let (b, east) = overlay_tiles(2, x);
            let (north, same) = overlay_tiles(2, y);
            assert_eq!(b, same);
            assert!(board.fits_east(b, east) && board.fits_north(b, north));
        }
    }
}
