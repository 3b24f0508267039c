//! Tetrahedron and spider tilesets, flip-closure, the named built-ins and JSON I/O.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::TetraRegion;
use crate::substitutions::{sofic_cover_tileset, Substitution};
use crate::wang::WangTileset;

/// A colour label: either a name or a tuple of integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Colour {
    Name(String),
    Tuple(Vec<i64>),
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Colour::Name(s) => write!(f, "{s}"),
            Colour::Tuple(t) if t.len() == 1 => write!(f, "{}", t[0]),
            Colour::Tuple(t) => {
                let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
        }
    }
}

impl Colour {
    fn to_json(&self) -> Value {
        match self {
            Colour::Name(s) => json!(s),
            Colour::Tuple(t) => json!(t),
        }
    }

    fn from_json(v: &Value, location: &str) -> Result<Colour> {
        match v {
            Value::String(s) => Ok(Colour::Name(s.clone())),
            Value::Number(n) => n
                .as_i64()
                .map(|x| Colour::Tuple(vec![x]))
                .ok_or_else(|| Error::parse(location, "colour numbers must be integers")),
            Value::Array(items) => items
                .iter()
                .map(|x| {
                    x.as_i64()
                        .ok_or_else(|| Error::parse(location, "colour tuple entries must be integers"))
                })
                .collect::<Result<Vec<i64>>>()
                .map(Colour::Tuple),
            _ => Err(Error::parse(location, "colour must be a string or an integer tuple")),
        }
    }
}

/// Vertex-colouring rule: allowed quadruples in the order `(v, va, vab^-1, vb)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TetraTileset {
    pub colours: Vec<Colour>,
    allowed: Vec<[u32; 4]>,
}

/// Edge-colouring rule: allowed spiders in the order `(a, b, a^-1, b^-1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpiderTileset {
    pub colours: Vec<Colour>,
    allowed: Vec<[u32; 4]>,
}

fn check_indices(n: usize, allowed: &[[u32; 4]]) -> Result<()> {
    for (k, q) in allowed.iter().enumerate() {
        if let Some(&bad) = q.iter().find(|&&c| c as usize >= n) {
            return Err(Error::parse(
                format!("allowed[{k}]"),
                format!("colour index {bad} out of range for {n} colours"),
            ));
        }
    }
    Ok(())
}

fn canonical(allowed: impl IntoIterator<Item = [u32; 4]>) -> Vec<[u32; 4]> {
    allowed.into_iter().collect::<BTreeSet<_>>().into_iter().collect()
}

/// The orientation swap `(x, y, z, w) -> (z, w, x, y)`.
pub fn flip(q: [u32; 4]) -> [u32; 4] {
    [q[2], q[3], q[0], q[1]]
}

impl TetraTileset {
    pub fn new(colours: Vec<Colour>, allowed: impl IntoIterator<Item = [u32; 4]>) -> Result<Self> {
        let allowed = canonical(allowed);
        check_indices(colours.len(), &allowed)?;
        Ok(TetraTileset { colours, allowed })
    }

    pub fn allowed(&self) -> &[[u32; 4]] {
        &self.allowed
    }

    pub fn colour_count(&self) -> usize {
        self.colours.len()
    }

    pub fn contains(&self, q: &[u32; 4]) -> bool {
        self.allowed.binary_search(q).is_ok()
    }

    pub fn is_flip_closed(&self) -> bool {
        self.allowed.iter().all(|&q| self.contains(&flip(q)))
    }

    pub fn flip_closure(&self) -> TetraTileset {
        TetraTileset {
            colours: self.colours.clone(),
            allowed: canonical(self.allowed.iter().flat_map(|&q| [q, flip(q)])),
        }
    }

    pub fn colour_index(&self, c: &Colour) -> Option<u32> {
        self.colours.iter().position(|x| x == c).map(|i| i as u32)
    }
}

impl SpiderTileset {
    pub fn new(colours: Vec<Colour>, allowed: impl IntoIterator<Item = [u32; 4]>) -> Result<Self> {
        let allowed = canonical(allowed);
        check_indices(colours.len(), &allowed)?;
        Ok(SpiderTileset { colours, allowed })
    }

    pub fn allowed(&self) -> &[[u32; 4]] {
        &self.allowed
    }

    pub fn colour_count(&self) -> usize {
        self.colours.len()
    }

    pub fn contains(&self, q: &[u32; 4]) -> bool {
        self.allowed.binary_search(q).is_ok()
    }

    /// The same rule with `a <-> a^-1` and `b <-> b^-1`.
    pub fn inverted(&self) -> SpiderTileset {
        SpiderTileset {
            colours: self.colours.clone(),
            allowed: canonical(self.allowed.iter().map(|&q| flip(q))),
        }
    }
}

/// Any tileset the file format can hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tileset {
    Tetra(TetraTileset),
    Spider(SpiderTileset),
    Wang(WangTileset),
}

impl Tileset {
    pub fn kind(&self) -> &'static str {
        match self {
            Tileset::Tetra(_) => "tetra",
            Tileset::Spider(_) => "spider",
            Tileset::Wang(_) => "wang",
        }
    }

    pub fn into_tetra(self) -> Result<TetraTileset> {
        match self {
            Tileset::Tetra(t) => Ok(t),
            other => Err(Error::usage(format!("expected a tetra tileset, got {}", other.kind()))),
        }
    }

    pub fn into_spider(self) -> Result<SpiderTileset> {
        match self {
            Tileset::Spider(t) => Ok(t),
            other => Err(Error::usage(format!("expected a spider tileset, got {}", other.kind()))),
        }
    }

    pub fn into_wang(self) -> Result<WangTileset> {
        match self {
            Tileset::Wang(t) => Ok(t),
            other => Err(Error::usage(format!("expected a wang tileset, got {}", other.kind()))),
        }
    }
}

fn z3(x: i64) -> i64 {
    x.rem_euclid(3)
}

/// `{1, 2}` with `(1,1,2,1), (2,1,1,1), (1,2,1,2)`.
pub fn delta_count() -> TetraTileset {
    TetraTileset::new(
        vec![Colour::Tuple(vec![1]), Colour::Tuple(vec![2])],
        [[0, 0, 1, 0], [1, 0, 0, 0], [0, 1, 0, 1]],
    )
    .expect("static tileset")
}

/// Colours `Z/3 x Z/3` (index `3t + u`) with `((t,u),(t,u),(t,u+1),(t+1,u))` and flips.
pub fn xtree_half() -> TetraTileset {
    let colours = (0..3)
        .flat_map(|t| (0..3).map(move |u| Colour::Tuple(vec![t, u])))
        .collect();
    let idx = |t: i64, u: i64| (3 * z3(t) + z3(u)) as u32;
    let mut allowed = Vec::new();
    for t in 0..3 {
        for u in 0..3 {
            allowed.push([idx(t, u), idx(t, u), idx(t, u + 1), idx(t + 1, u)]);
        }
    }
    TetraTileset::new(colours, allowed).expect("static tileset")
}

pub fn xtree() -> TetraTileset {
    xtree_half().flip_closure()
}

/// Spiders `(c, c, c+1, c)` and `(c, c, c, c+1)` over `Z/3`.
pub fn theta0() -> SpiderTileset {
    theta1(1)
}

/// `Theta_0` with every colour carrying one of `b_count` marks, shared along each tree.
pub fn theta1(b_count: usize) -> SpiderTileset {
    let idx = |c: i64, b: usize| (z3(c) as usize * b_count + b) as u32;
    let colours = (0..3)
        .flat_map(|c| {
            (0..b_count).map(move |b| {
                if b_count == 1 {
                    Colour::Tuple(vec![c])
                } else {
                    Colour::Tuple(vec![c, b as i64])
                }
            })
        })
        .collect();
    let mut allowed = Vec::new();
    for c in 0..3 {
        for b in 0..b_count {
            for b2 in 0..b_count {
                let same = idx(c, b);
                let next = idx(c + 1, b2);
                allowed.push([same, same, next, same]);
                allowed.push([same, same, same, next]);
            }
        }
    }
    SpiderTileset::new(colours, allowed).expect("static tileset")
}

/// Pairs of `Theta_{1,A}` colours: the first factor grows up, the second down, and both
/// distinguished edges carry the same mark.
pub fn c2(a_count: usize) -> SpiderTileset {
    let one = theta1(a_count);
    let n1 = one.colour_count();
    let colours = (0..n1)
        .flat_map(|x| {
            let one = &one;
            (0..n1).map(move |y| Colour::Name(format!("{}|{}", one.colours[x], one.colours[y])))
        })
        .collect();
    let mark = |c: u32| c as usize % a_count;
    let distinguished = |q: &[u32; 4]| -> u32 {
        let odd = (0..4)
            .find(|&p| {
                (0..4)
                    .filter(|&r| q[r] / a_count as u32 == q[p] / a_count as u32)
                    .count()
                    == 1
            })
            .expect("spider has a distinguished edge");
        q[odd]
    };
    let down = one.inverted();
    let mut allowed = Vec::new();
    for p in one.allowed() {
        for q in down.allowed() {
            if mark(distinguished(p)) != mark(distinguished(q)) {
                continue;
            }
            let mut s = [0u32; 4];
            for e in 0..4 {
                s[e] = p[e] * n1 as u32 + q[e];
            }
            allowed.push(s);
        }
    }
    SpiderTileset::new(colours, allowed).expect("static tileset")
}

/// Built-in by name: `delta_count`, `xtree`, `xtree_half`, `theta0`, `theta1` (param
/// `B` = mark count), `c2` (param `A`), `sofic_cover` (needs a substitution).
pub fn builtin(name: &str, param: Option<usize>, subst: Option<&Substitution>) -> Result<Tileset> {
    let need = |p: Option<usize>| {
        p.filter(|&x| x > 0)
            .ok_or_else(|| Error::usage(format!("built-in '{name}' needs a positive size parameter")))
    };
    Ok(match name {
        "delta_count" => Tileset::Tetra(delta_count()),
        "xtree" => Tileset::Tetra(xtree()),
        "xtree_half" => Tileset::Tetra(xtree_half()),
        "theta0" => Tileset::Spider(theta0()),
        "theta1" => Tileset::Spider(theta1(need(param)?)),
        "c2" => Tileset::Spider(c2(need(param)?)),
        "sofic_cover" => {
            let s = subst.ok_or_else(|| Error::usage("built-in 'sofic_cover' needs a substitution"))?;
            Tileset::Spider(sofic_cover_tileset(s)?)
        }
        "kari" => Tileset::Tetra(crate::kari::build_kari_tileset().tileset),
        other => return Err(Error::usage(format!("unknown built-in tileset '{other}'"))),
    })
}

pub const BUILTIN_NAMES: &[&str] = &[
    "delta_count",
    "xtree",
    "xtree_half",
    "theta0",
    "theta1",
    "c2",
    "sofic_cover",
    "kari",
];

/// The colour appearing on at least three of the four edges at every interior vertex.
///
/// `edges` is indexed by region edge; colours are read as `Z/3` values, so the input must
/// be a `Theta_0` edge colouring. Boundary vertices map to `None`.
pub fn spider_vertex_view(region: &TetraRegion, edges: &[u32]) -> Result<Vec<Option<u32>>> {
    if edges.len() != region.edge_count() {
        return Err(Error::usage(format!(
            "edge colouring has {} entries, region has {} edges",
            edges.len(),
            region.edge_count()
        )));
    }
    let rule = theta0();
    let mut out = vec![None; region.vertex_count()];
    for (v, site) in region.spider_sites() {
        let q = site.map(|e| edges[e]);
        let majority = (0..3u32).find(|&c| q.iter().filter(|&&x| x == c).count() >= 3);
        let Some(m) = majority else {
            return Err(Error::validity(format!(
                "no majority colour at vertex {}",
                region.vertex(v)
            )));
        };
        if !rule.contains(&q) {
            return Err(Error::validity(format!(
                "spider {:?} at vertex {} violates Theta_0",
                q,
                region.vertex(v)
            )));
        }
        out[v] = Some(m);
    }
    Ok(out)
}

fn parse_quads(v: &Value, key: &str) -> Result<Vec<[u32; 4]>> {
    let arr = v
        .get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse(key, "missing array"))?;
    arr.iter()
        .enumerate()
        .map(|(k, q)| {
            let loc = format!("{key}[{k}]");
            let items = q
                .as_array()
                .ok_or_else(|| Error::parse(&loc, "expected an array of 4 indices"))?;
            if items.len() != 4 {
                return Err(Error::parse(&loc, format!("expected 4 indices, got {}", items.len())));
            }
            let mut out = [0u32; 4];
            for (p, x) in items.iter().enumerate() {
                out[p] = x
                    .as_u64()
                    .and_then(|x| u32::try_from(x).ok())
                    .ok_or_else(|| Error::parse(format!("{loc}[{p}]"), "expected a non-negative index"))?;
            }
            Ok(out)
        })
        .collect()
}

pub(crate) fn parse_colours(v: &Value) -> Result<Vec<Colour>> {
    let arr = v
        .get("colours")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("colours", "missing array"))?;
    arr.iter()
        .enumerate()
        .map(|(k, c)| Colour::from_json(c, &format!("colours[{k}]")))
        .collect()
}

pub(crate) fn colours_json(colours: &[Colour]) -> Value {
    Value::Array(colours.iter().map(Colour::to_json).collect())
}

/// Parses a tileset document.
pub fn from_json_str(text: &str) -> Result<Tileset> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let kind = v
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::parse("kind", "missing string"))?;
    match kind {
        "tetra" | "spider" => {
            let colours = parse_colours(&v)?;
            let allowed = parse_quads(&v, "allowed")?;
            let close = match v.get("autoFlipClose") {
                None => false,
                Some(b) => b
                    .as_bool()
                    .ok_or_else(|| Error::parse("autoFlipClose", "expected a boolean"))?,
            };
            if kind == "tetra" {
                let t = TetraTileset::new(colours, allowed)?;
                Ok(Tileset::Tetra(if close { t.flip_closure() } else { t }))
            } else {
                Ok(Tileset::Spider(SpiderTileset::new(colours, allowed)?))
            }
        }
        "wang" => Ok(Tileset::Wang(WangTileset::from_json(&v)?)),
        other => Err(Error::parse("kind", format!("unknown kind '{other}'"))),
    }
}

pub fn to_json_string(t: &Tileset) -> String {
    let v = match t {
        Tileset::Tetra(t) => json!({
            "kind": "tetra",
            "colours": colours_json(&t.colours),
            "allowed": t.allowed,
            "autoFlipClose": false,
        }),
        Tileset::Spider(t) => json!({
            "kind": "spider",
            "colours": colours_json(&t.colours),
            "allowed": t.allowed,
            "autoFlipClose": false,
        }),
        Tileset::Wang(w) => w.to_json(),
    };
    serde_json::to_string_pretty(&v).expect("json serialization")
}

pub fn load(path: &Path) -> Result<Tileset> {
    from_json_str(&std::fs::read_to_string(path)?)
}

pub fn save(t: &Tileset, path: &Path) -> Result<()> {
    std::fs::write(path, to_json_string(t) + "\n")?;
    Ok(())
}
