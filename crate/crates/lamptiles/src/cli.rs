//! The `lamp` command line. Every command prints `key=value` lines on stdout.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use crate::csp::Budget;
use crate::error::{Error, Result};
use crate::group::{parse_word, LampConfig, LampElement, TetraRegion};
use crate::solver::{self, SolveOptions, VertexColouring};
use crate::substitutions::{Decoding, LevelPattern, Substitution};
use crate::tilesets::{self, Tileset};
use crate::universal::{self as utm, TwoHeadTm};
use crate::wang::{self, WangTileset, WangTowerLevel};
use crate::{kari, render, xtree};

#[derive(Parser, Debug)]
#[command(name = "lamp", version, about = "Tilings and subshifts on the lamplighter group")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sanity checks of the group arithmetic.
    Group {
        #[command(subcommand)]
        cmd: GroupCmd,
    },
    Tileset {
        #[command(subcommand)]
        cmd: TilesetCmd,
    },
    Solve {
        #[command(subcommand)]
        cmd: SolveCmd,
    },
    Kari {
        #[command(subcommand)]
        cmd: KariCmd,
    },
    Subst {
        #[command(subcommand)]
        cmd: SubstCmd,
    },
    Wang {
        #[command(subcommand)]
        cmd: WangCmd,
    },
    Utm {
        #[command(subcommand)]
        cmd: UtmCmd,
    },
    Xtree {
        #[command(subcommand)]
        cmd: XtreeCmd,
    },
    /// Draws a region colouring.
    Render(RenderArgs),
}

#[derive(Subcommand, Debug)]
enum GroupCmd {
    Selftest,
}

#[derive(Args, Debug, Clone)]
struct TilesetSource {
    /// Built-in name or a path to a tileset JSON file.
    #[arg(long)]
    tileset: String,
    /// Size parameter of parametrised built-ins.
    #[arg(long)]
    param: Option<usize>,
    /// Substitution (built-in name or path) for built-ins that need one.
    #[arg(long)]
    subst: Option<String>,
}

impl TilesetSource {
    fn load(&self) -> Result<Tileset> {
        if Path::new(&self.tileset).exists() {
            return tilesets::load(Path::new(&self.tileset));
        }
        let subst = self.subst.as_deref().map(load_subst).transpose()?;
        tilesets::builtin(&self.tileset, self.param, subst.as_ref())
    }
}

#[derive(Subcommand, Debug)]
enum TilesetCmd {
    Show {
        #[command(flatten)]
        source: TilesetSource,
        /// Print the tileset document instead of a summary.
        #[arg(long)]
        json: bool,
    },
    Validate {
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
struct SearchArgs {
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Abort after this many search nodes (exit 3).
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Abort after this many seconds (exit 3).
    #[arg(long)]
    timeout_secs: Option<u64>,
}

impl SearchArgs {
    fn budget(&self) -> Result<Budget> {
        if self.max_nodes == Some(0) || self.timeout_secs == Some(0) || self.threads == 0 {
            return Err(Error::usage("budgets and thread counts must be positive"));
        }
        Ok(Budget {
            max_nodes: self.max_nodes,
            deadline: self.timeout_secs.map(|s| Instant::now() + Duration::from_secs(s)),
        })
    }

    fn options(&self) -> Result<SolveOptions> {
        Ok(SolveOptions {
            threads: self.threads,
            budget: self.budget()?,
        })
    }
}

#[derive(Subcommand, Debug)]
enum SolveCmd {
    Count {
        #[command(flatten)]
        source: TilesetSource,
        #[arg(long)]
        height: i64,
        #[command(flatten)]
        search: SearchArgs,
        /// Exit 1 unless the count equals this value.
        #[arg(long)]
        expect: Option<u64>,
        /// Also print the entropy estimate `ln(count) / vertices`.
        #[arg(long)]
        entropy: bool,
    },
    Enumerate {
        #[command(flatten)]
        source: TilesetSource,
        #[arg(long)]
        height: i64,
        #[arg(long)]
        limit: Option<usize>,
        #[command(flatten)]
        search: SearchArgs,
        /// Write the colourings as a JSON array.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Whether a colouring's bottom row is invariant under a lamp translation.
    Invariance {
        #[arg(long = "in")]
        input: PathBuf,
        /// One bit per lamp of the region, lowest lamp first, e.g. `0110`.
        #[arg(long)]
        translation: String,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Exhaustive top-row and bottom-count check of `delta_count`.
    DeltaStructure {
        #[arg(long)]
        height: i64,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OrbitMode {
    NoPeriodic,
    Segment,
}

#[derive(Subcommand, Debug)]
enum KariCmd {
    Build {
        /// Write the flip-closed tileset to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    Orbit {
        #[arg(long, value_enum)]
        mode: OrbitMode,
        /// Longest period to exclude (no-periodic mode).
        #[arg(long, default_value_t = 20)]
        period: u32,
        /// Orbit length (segment mode).
        #[arg(long, default_value_t = 50)]
        len: usize,
        /// Starting point as a rational, e.g. `1` or `3/2` (segment mode).
        #[arg(long, default_value = "1")]
        start: String,
    },
}

#[derive(Subcommand, Debug)]
enum SubstCmd {
    Expand {
        /// Built-in name or JSON path.
        #[arg(long)]
        subst: String,
        #[arg(long)]
        seed: String,
        #[arg(long)]
        n: u32,
        /// Comma-separated branching digits; defaults to all zeros.
        #[arg(long)]
        branching: Option<String>,
    },
    Language {
        #[arg(long)]
        subst: String,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 64)]
        cap: u32,
        /// Print every pattern.
        #[arg(long)]
        list: bool,
    },
    Decode {
        #[arg(long)]
        subst: String,
        /// Whitespace-separated letter names of a level pattern.
        #[arg(long)]
        pattern: String,
    },
}

#[derive(Subcommand, Debug)]
enum WangCmd {
    CheckTower {
        /// Built-in Wang tileset or JSON path.
        #[arg(long)]
        tileset: String,
        #[arg(long)]
        level: PathBuf,
    },
    Square {
        #[arg(long)]
        tileset: String,
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        search: SearchArgs,
        /// Write the tiling as a tower level over `b = 0`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    ToLamp {
        #[arg(long)]
        tileset: String,
        #[arg(long)]
        subst: String,
        /// Also search a bundle colouring of this region height.
        #[arg(long)]
        height: Option<i64>,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Args, Debug)]
struct TapeArgs {
    /// Program tape file (whitespace-separated symbols), e.g. from `utm compile`.
    #[arg(long, conflicts_with = "tm")]
    tape: Option<PathBuf>,
    /// Machine JSON to compile first.
    #[arg(long)]
    tm: Option<PathBuf>,
    /// Data file (whitespace-separated symbols) placed after the program.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum UtmCmd {
    Compile {
        #[arg(long)]
        tm: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Run {
        #[command(flatten)]
        tape: TapeArgs,
        #[arg(long)]
        log2_size: u32,
        /// Print one line per row.
        #[arg(long)]
        trace: bool,
    },
    Layout {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        c: u32,
        #[arg(long, default_value_t = 1024)]
        program_len: u64,
    },
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// Window `lo..hi` of lamp positions.
    #[arg(long, default_value = "-32..32", allow_hyphen_values = true)]
    window: String,
    /// Comma-separated lit lamps (integer positions).
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    lamps: String,
}

impl ConfigArgs {
    fn config(&self) -> Result<LampConfig> {
        let (lo, hi) = self
            .window
            .split_once("..")
            .ok_or_else(|| Error::parse("window", "expected lo..hi"))?;
        let int = |s: &str, at: &str| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| Error::parse(at, format!("bad integer '{s}'")))
        };
        let lamps = split_list(&self.lamps)
            .map(|s| int(s, "lamps"))
            .collect::<Result<Vec<_>>>()?;
        LampConfig::from_lamps(int(lo, "window")?, int(hi, "window")?, lamps)
    }
}

#[derive(Subcommand, Debug)]
enum XtreeCmd {
    Canonical {
        /// Generator word of the element.
        #[arg(long)]
        element: Option<String>,
        /// Check the canonical colouring on every region up to this height.
        #[arg(long)]
        check_height: Option<i64>,
    },
    Cocycle {
        #[arg(long)]
        word: String,
        #[command(flatten)]
        config: ConfigArgs,
    },
    PseudoOrbit {
        #[arg(long)]
        k: i64,
        #[arg(long)]
        word: String,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Dot,
    Svg,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// A colouring JSON object or an array of them.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "dot")]
    format: Format,
    #[arg(short = 'o', long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Tileset whose colour names label the vertices.
    #[arg(long)]
    tileset: Option<String>,
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

fn load_subst(name: &str) -> Result<Substitution> {
    if Path::new(name).exists() {
        Substitution::load(Path::new(name))
    } else {
        Substitution::builtin(name)
    }
}

fn load_wang(name: &str) -> Result<WangTileset> {
    if Path::new(name).exists() {
        tilesets::load(Path::new(name))?.into_wang()
    } else {
        WangTileset::builtin(name)
    }
}

fn letter(s: &Substitution, name: &str) -> Result<u32> {
    s.letter_index(name)
        .ok_or_else(|| Error::parse(name, "not a letter of the substitution"))
}

fn load_colourings(path: &Path) -> Result<Vec<VertexColouring>> {
    let text = std::fs::read_to_string(path)?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let items = match v {
        serde_json::Value::Array(items) => items,
        other => vec![other],
    };
    items
        .into_iter()
        .enumerate()
        .map(|(i, item)| {
            let c: VertexColouring =
                serde_json::from_value(item).map_err(|e| Error::parse(format!("colouring {i}"), e.to_string()))?;
            c.region()?;
            Ok(c)
        })
        .collect()
}

fn pick(mut cs: Vec<VertexColouring>, index: usize) -> Result<VertexColouring> {
    if index >= cs.len() {
        return Err(Error::usage(format!(
            "index {index} out of range for {} colourings",
            cs.len()
        )));
    }
    Ok(cs.swap_remove(index))
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::usage(e.to_string()))?;
    Ok(pool.install(f))
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run(argv: impl IntoIterator<Item = impl Into<OsString> + Clone>, out: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        // A closed downstream pipe (`lamp ... | head`) is not an error.
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

type Out<'a> = &'a mut dyn Write;

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*)?
    };
}

fn dispatch(cmd: Command, out: Out) -> Result<i32> {
    match cmd {
        Command::Group {
            cmd: GroupCmd::Selftest,
        } => group_selftest(out),
        Command::Tileset { cmd } => tileset_cmd(cmd, out),
        Command::Solve { cmd } => solve_cmd(cmd, out),
        Command::Kari { cmd } => kari_cmd(cmd, out),
        Command::Subst { cmd } => subst_cmd(cmd, out),
        Command::Wang { cmd } => wang_cmd(cmd, out),
        Command::Utm { cmd } => utm_cmd(cmd, out),
        Command::Xtree { cmd } => xtree_cmd(cmd, out),
        Command::Render(args) => render_cmd(args, out),
    }
}

fn group_selftest(out: Out) -> Result<i32> {
    let mut checks = 0u32;
    let mut failed = Vec::new();
    let mut check = |name: &str, ok: bool| {
        checks += 1;
        if !ok {
            failed.push(name.to_string());
        }
    };
    let a = LampElement::a();
    let b = LampElement::b();
    check("b-squared", b.mul(&b) == LampElement::new([0, 1], 2));
    check("ba-inverse", b.mul(&a.inv()) == LampElement::new([0], 0));
    check("ab-inverse", a.mul(&b.inv()) == LampElement::new([0], 0));
    let words = ["", "a", "b", "abAB", "bbaBAb", "aabBAAb", "BaBabA"];
    for w in words {
        let g = LampElement::from_word(&parse_word(w)?);
        check("word-round-trip", LampElement::from_word(&g.word()) == g);
        check("inverse", g.mul(&g.inv()).is_identity());
        check("reverse-anti", g.reverse().reverse() == g);
        let [v, va, vab, vb] = g.tetra_vertices();
        check(
            "tetra-levels",
            va.head() == v.head() + 1 && vb.head() == v.head() + 1 && vab.head() == v.head(),
        );
    }
    for g in words {
        for h in words {
            let (g, h) = (
                LampElement::from_word(&parse_word(g)?),
                LampElement::from_word(&parse_word(h)?),
            );
            check("associativity", g.mul(&h).mul(&a) == g.mul(&h.mul(&a)));
        }
    }
    let r = TetraRegion::new(0, 3)?;
    check("region-size", r.vertex_count() == 32 && r.constraint_count() == 12);
    check(
        "region-locate",
        (0..r.vertex_count()).all(|i| r.locate(&r.vertex(i)) == Some(i)),
    );
    say!(out, "checks={checks} failed={}", failed.len());
    for f in &failed {
        say!(out, "failed_check={f}");
    }
    Ok(if failed.is_empty() { 0 } else { 1 })
}

fn tileset_cmd(cmd: TilesetCmd, out: Out) -> Result<i32> {
    let summary = |t: &Tileset, out: Out| -> Result<()> {
        let (colours, tiles, closed) = match t {
            Tileset::Tetra(t) => (t.colour_count(), t.allowed().len(), Some(t.is_flip_closed())),
            Tileset::Spider(s) => (s.colour_count(), s.allowed().len(), None),
            Tileset::Wang(w) => (w.colours.len(), w.tiles.len(), None),
        };
        say!(out, "kind={} colours={colours} tiles={tiles}", t.kind());
        if let Some(c) = closed {
            say!(out, "flip_closed={c}");
        }
        Ok(())
    };
    match cmd {
        TilesetCmd::Show { source, json } => {
            let t = source.load()?;
            if json {
                say!(out, "{}", tilesets::to_json_string(&t));
            } else {
                summary(&t, out)?;
            }
        }
        TilesetCmd::Validate { file } => {
            let t = tilesets::load(&file)?;
            summary(&t, out)?;
            say!(out, "valid=true");
        }
    }
    Ok(0)
}

fn solve_cmd(cmd: SolveCmd, out: Out) -> Result<i32> {
    match cmd {
        SolveCmd::Count {
            source,
            height,
            search,
            expect,
            entropy,
        } => {
            let opts = search.options()?;
            let count = match source.load()? {
                Tileset::Tetra(t) => solver::count(&t, height, opts)?,
                Tileset::Spider(s) => solver::count_spider(&s, height, opts)?,
                Tileset::Wang(_) => return Err(Error::usage("use `lamp wang square` for Wang tilesets")),
            };
            say!(out, "count={count}");
            if entropy {
                say!(out, "entropy={:.6}", solver::entropy_from_count(count, height as u32));
            }
            if let Some(e) = expect {
                if e != count {
                    say!(out, "expected={e} match=false");
                    return Ok(1);
                }
                say!(out, "match=true");
            }
            Ok(0)
        }
        SolveCmd::Enumerate {
            source,
            height,
            limit,
            search,
            out: path,
        } => {
            let t = source.load()?.into_tetra()?;
            let e = solver::enumerate(&t, height, limit, search.budget()?)?;
            say!(out, "colourings={} truncated={}", e.colourings.len(), e.truncated);
            if let Some(p) = path {
                let text = serde_json::to_string(&e.colourings).expect("json");
                std::fs::write(p, text + "\n")?;
            }
            Ok(0)
        }
        SolveCmd::Invariance {
            input,
            translation,
            index,
        } => {
            let c = pick(load_colourings(&input)?, index)?;
            let t = translation
                .chars()
                .map(|ch| match ch {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(Error::parse("translation", "expected a bit string")),
                })
                .collect::<Result<Vec<_>>>()?;
            say!(out, "invariant={}", solver::invariance_check(&c, &t)?);
            Ok(0)
        }
        SolveCmd::DeltaStructure { height, search } => {
            let r = solver::delta_count_structure(height, search.options()?)?;
            say!(
                out,
                "height={} colourings={} violations={}",
                r.height,
                r.colourings,
                r.violations
            );
            Ok(if r.violations == 0 { 0 } else { 1 })
        }
    }
}

fn kari_cmd(cmd: KariCmd, out: Out) -> Result<i32> {
    match cmd {
        KariCmd::Build { emit, threads } => {
            let build = with_threads(threads, kari::build_kari_tileset)?;
            say!(out, "candidates={} accepted={}", build.candidates, build.accepted.len());
            say!(out, "flip_closed_tiles={}", build.tileset.allowed().len());
            if let Some(p) = emit {
                tilesets::save(&Tileset::Tetra(build.tileset), &p)?;
            }
            Ok(0)
        }
        KariCmd::Orbit {
            mode,
            period,
            len,
            start,
        } => match mode {
            OrbitMode::NoPeriodic => {
                let ok = kari::no_periodic_upto(period);
                say!(out, "period={period} certified={ok}");
                Ok(if ok { 0 } else { 1 })
            }
            OrbitMode::Segment => {
                let x: BigRational = start
                    .parse()
                    .map_err(|_| Error::parse("start", format!("bad rational '{start}'")))?;
                let orbit = kari::orbit_segment(&x, len);
                let lo = BigRational::new(1.into(), 2.into());
                let hi = BigRational::from_integer(2.into());
                let inside = orbit.iter().all(|y| *y >= lo && *y <= hi);
                let shown: Vec<String> = orbit.iter().map(|y| y.to_string()).collect();
                say!(out, "orbit={}", shown.join(" "));
                say!(out, "in_range={inside}");
                Ok(if inside { 0 } else { 1 })
            }
        },
    }
}

fn subst_cmd(cmd: SubstCmd, out: Out) -> Result<i32> {
    let names = |s: &Substitution, v: &[u32]| {
        v.iter()
            .map(|&x| s.alphabet[x as usize].clone())
            .collect::<Vec<_>>()
            .join(" ")
    };
    match cmd {
        SubstCmd::Expand {
            subst,
            seed,
            n,
            branching,
        } => {
            let s = load_subst(&subst)?;
            let seed = letter(&s, &seed)?;
            let br = match branching {
                Some(b) => split_list(&b)
                    .map(|t| {
                        t.parse::<u32>()
                            .map_err(|_| Error::parse("branching", format!("bad digit '{t}'")))
                    })
                    .collect::<Result<Vec<_>>>()?,
                None => vec![0; n as usize],
            };
            let p = s.expand(seed, n, &br)?;
            say!(out, "level={} pattern={}", p.level, names(&s, &p.values));
        }
        SubstCmd::Language { subst, n, cap, list } => {
            let s = load_subst(&subst)?;
            let l = s.level_language(n, cap)?;
            say!(
                out,
                "level={} size={} stabilized={}",
                l.level,
                l.patterns.len(),
                l.stabilized
            );
            if list {
                for p in &l.patterns {
                    say!(out, "pattern={}", names(&s, p));
                }
            }
        }
        SubstCmd::Decode { subst, pattern } => {
            let s = load_subst(&subst)?;
            let values = split_list(&pattern)
                .map(|t| letter(&s, t))
                .collect::<Result<Vec<_>>>()?;
            let mut level = 0u32;
            while s.arity.pow(level) < values.len() {
                level += 1;
            }
            if s.arity.pow(level) != values.len() {
                return Err(Error::usage(format!("pattern length is not a power of {}", s.arity)));
            }
            let fmt = |b: &[u32]| b.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
            match s.decode_branching(&LevelPattern { level, values })? {
                Decoding::Unique(b) => say!(out, "decoding=unique branching={}", fmt(&b)),
                Decoding::Ambiguous(all) => {
                    say!(out, "decoding=ambiguous candidates={}", all.len());
                    for b in &all {
                        say!(out, "branching={}", fmt(b));
                    }
                }
            }
        }
    }
    Ok(0)
}

fn wang_cmd(cmd: WangCmd, out: Out) -> Result<i32> {
    match cmd {
        WangCmd::CheckTower { tileset, level } => {
            let t = load_wang(&tileset)?;
            let l = WangTowerLevel::load(&level)?;
            match wang::check_tower(&l, &t)? {
                Ok(()) => {
                    say!(out, "valid=true");
                    Ok(0)
                }
                Err(v) => {
                    say!(out, "valid=false violation={v}");
                    Ok(1)
                }
            }
        }
        WangCmd::Square {
            tileset,
            n,
            search,
            out: path,
        } => {
            let t = load_wang(&tileset)?;
            match wang::search_square(&t, n, search.budget()?)? {
                Some(sq) => {
                    say!(out, "found=true side={}", sq.side());
                    if let Some(p) = path {
                        wang::square_to_tower(&sq, vec![false; 2 * n as usize])?.save(&p)?;
                    }
                    Ok(0)
                }
                None => {
                    say!(out, "found=false");
                    Ok(1)
                }
            }
        }
        WangCmd::ToLamp {
            tileset,
            subst,
            height,
            search,
        } => {
            let t = load_wang(&tileset)?;
            let bundle = wang::wang_to_lamp(&t, &load_subst(&subst)?)?;
            say!(
                out,
                "letters={} forward_spiders={} backward_spiders={}",
                bundle.substitution.letter_count(),
                bundle.forward.allowed().len(),
                bundle.backward.allowed().len()
            );
            if let Some(h) = height {
                let found = wang::bundle_search(&bundle, h, search.budget()?)?;
                say!(out, "height={h} feasible={}", found.is_some());
                return Ok(if found.is_some() { 0 } else { 1 });
            }
            Ok(0)
        }
    }
}

fn utm_cmd(cmd: UtmCmd, out: Out) -> Result<i32> {
    match cmd {
        UtmCmd::Compile { tm, out: path } => {
            let tm = TwoHeadTm::load(&tm)?;
            let c = utm::compile_tm(&tm);
            say!(out, "id_len={} cells={}", c.id_len, c.tape.len());
            let text = utm::format_tape(&c.tape);
            match path {
                Some(p) => std::fs::write(p, text + "\n")?,
                None => say!(out, "tape={text}"),
            }
            Ok(0)
        }
        UtmCmd::Run { tape, log2_size, trace } => {
            let program = match (&tape.tape, &tape.tm) {
                (Some(p), None) => utm::parse_tape(&std::fs::read_to_string(p)?)?,
                (None, Some(p)) => utm::compile_tm(&TwoHeadTm::load(p)?).tape,
                _ => return Err(Error::usage("give exactly one of --tape and --tm")),
            };
            let data = match &tape.data {
                Some(p) => utm::parse_tape(&std::fs::read_to_string(p)?)?,
                None => Vec::new(),
            };
            let full = utm::full_tape(&program, &data, log2_size)?;
            match utm::run_square(&full, trace) {
                Ok(rep) => {
                    for r in &rep.trace {
                        say!(out, "{r}");
                    }
                    say!(out, "result=accept rows={} id_len={}", rep.accept_row, rep.id_len);
                    Ok(0)
                }
                Err(Error::Fault { position, rule }) => {
                    say!(out, "result=fault position=\"{position}\" rule={rule}");
                    Ok(1)
                }
                Err(Error::Timeout { rows }) => {
                    say!(out, "result=timeout rows={rows}");
                    Ok(1)
                }
                Err(e) => Err(e),
            }
        }
        UtmCmd::Layout { k, c, program_len } => {
            let l = utm::macrotile_layout(k, c, program_len)?;
            say!(
                out,
                "k={k} c={c} n={} row_len={} packet={} side={}",
                l.n,
                l.row_len,
                l.packet,
                l.side
            );
            for f in l.fields.iter().filter(|f| f.name != "%") {
                say!(out, "field={} offset={} len={}", f.name, f.offset, f.len);
            }
            Ok(0)
        }
    }
}

fn xtree_cmd(cmd: XtreeCmd, out: Out) -> Result<i32> {
    match cmd {
        XtreeCmd::Canonical { element, check_height } => {
            if let Some(w) = element {
                let g: LampElement = w.parse()?;
                let (p, q) = xtree::canonical_config(&g);
                say!(out, "element={g} value=({p},{q})");
            }
            if let Some(k) = check_height {
                let t = tilesets::xtree();
                let idx = |v: &LampElement| {
                    let (p, q) = xtree::canonical_config(v);
                    3 * p as u32 + q as u32
                };
                let mut all = true;
                for h in 0..=k {
                    let c = VertexColouring::from_fn(TetraRegion::new(0, h)?, idx);
                    let ok = solver::check(&t, &c)?.is_ok();
                    say!(out, "height={h} valid={ok}");
                    all &= ok;
                }
                return Ok(if all { 0 } else { 1 });
            }
            Ok(0)
        }
        XtreeCmd::Cocycle { word, config } => {
            let g: LampElement = word.parse()?;
            let x = config.config()?;
            let (p, q) = xtree::cocycle(&g, &x)?;
            let (cp, cq) = xtree::cocycle_closed_form(&g, &x);
            say!(
                out,
                "cocycle=({p},{q}) closed_form=({cp},{cq}) agree={}",
                (p, q) == (cp, cq)
            );
            Ok(if (p, q) == (cp, cq) { 0 } else { 1 })
        }
        XtreeCmd::PseudoOrbit { k, word, config } => {
            let w = parse_word(&word)?;
            let orbit = xtree::pseudo_orbit(k, &config.config()?, &w)?;
            for (i, s) in orbit.steps.iter().enumerate() {
                let defects: Vec<String> = s.defects.iter().map(|d| d.to_string()).collect();
                let radius = s.agreement_radius.map_or("none".to_string(), |r| r.to_string());
                say!(
                    out,
                    "step={i} generator={} head={} defects={} radius={radius}",
                    s.generator.letter(),
                    s.head,
                    if defects.is_empty() {
                        "-".to_string()
                    } else {
                        defects.join(",")
                    }
                );
            }
            let lit: Vec<String> = orbit.lamps.ones().map(|i| i.to_string()).collect();
            say!(
                out,
                "period={} head={} lamps={}",
                orbit.period,
                orbit.head,
                lit.join(",")
            );
            Ok(0)
        }
    }
}

fn render_cmd(args: RenderArgs, out: Out) -> Result<i32> {
    let c = pick(load_colourings(&args.input)?, args.index)?;
    let names = match &args.tileset {
        Some(name) => match (TilesetSource {
            tileset: name.clone(),
            param: None,
            subst: None,
        })
        .load()?
        {
            Tileset::Tetra(t) => Some(t.colours),
            Tileset::Spider(s) => Some(s.colours),
            Tileset::Wang(w) => Some(w.colours),
        },
        None => None,
    };
    let text = match args.format {
        Format::Dot => render::to_dot(&c, names.as_deref())?,
        Format::Svg => render::to_svg(&c, names.as_deref())?,
    };
    std::fs::write(&args.out, text)?;
    say!(out, "wrote={} vertices={}", args.out.display(), c.values.len());
    Ok(0)
}
