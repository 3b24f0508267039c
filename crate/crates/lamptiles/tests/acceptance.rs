//! End-to-end acceptance run: one PASS/FAIL line per criterion, then a single verdict.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the table on success.

use std::time::{Duration, Instant};

use lamptiles::csp::Budget;
use lamptiles::group::{lamp_act, LampConfig, LampElement, TetraRegion};
use lamptiles::kari::build_kari_tileset;
use lamptiles::solver::{
    self, count, delta_count_structure, entropy_from_count, enumerate, invariance_check, SolveOptions, VertexColouring,
};
use lamptiles::substitutions::{Decoding, LevelPattern, Substitution};
use lamptiles::tilesets::{delta_count, xtree};
use lamptiles::universal::{check_tile, compile_tm, full_tape, initial_row, run_machine, run_square, successor_row};
use lamptiles::universal::{macrotile_layout, TwoHeadTm};
use lamptiles::wang::{check_tower, search_square, square_to_tower, tower_to_square, WangTileset, WangTowerLevel};
use lamptiles::xtree::{add, canonical_config, cocycle};
use lamptiles::Error;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KARI_CANDIDATES: u64 = 279_936;
const KARI_ACCEPTED: usize = 1488;
const KARI_SECONDS: f64 = 5.0;
const XTREE_SECONDS: f64 = 30.0;
const ENTROPY_CEILING: f64 = 0.05;
const DELTA_SECONDS: u64 = 60;
const UTM_SECONDS: f64 = 10.0;
const RANDOM_TRIALS: usize = 1000;

struct Line {
    id: u32,
    pass: bool,
    detail: String,
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

fn kari_outcome() -> (u64, usize, usize) {
    let b = build_kari_tileset();
    (b.candidates, b.accepted.len(), b.tileset.allowed().len())
}

fn xtree_counts(threads: usize) -> Vec<u64> {
    let t = xtree();
    (1..=5)
        .map(|k| count(&t, k, SolveOptions::threads(threads)).unwrap())
        .collect()
}

fn criterion_1() -> Line {
    let start = Instant::now();
    let (candidates, accepted, _) = pool(1).install(kari_outcome);
    let secs = start.elapsed().as_secs_f64();
    Line {
        id: 1,
        pass: candidates == KARI_CANDIDATES && accepted == KARI_ACCEPTED && secs < KARI_SECONDS,
        detail: format!("candidates={candidates} accepted={accepted} time={secs:.2}s limit={KARI_SECONDS}s"),
    }
}

fn criterion_2() -> Line {
    let start = Instant::now();
    let got = xtree_counts(1);
    let secs = start.elapsed().as_secs_f64();
    let want: Vec<u64> = (1..=5u32).map(|k| 9 << (2 * k)).collect();
    Line {
        id: 2,
        pass: got == want && secs < XTREE_SECONDS,
        detail: format!("counts={got:?} expected={want:?} time={secs:.2}s"),
    }
}

fn criterion_3() -> Line {
    let counts = xtree_counts(1);
    let h: Vec<f64> = counts.iter().zip(1..).map(|(&c, k)| entropy_from_count(c, k)).collect();
    let decreasing = h.windows(2).all(|w| w[1] < w[0]);
    let last = h[4];
    let shown: Vec<String> = h.iter().map(|x| format!("{x:.4}")).collect();
    Line {
        id: 3,
        pass: decreasing && last < ENTROPY_CEILING,
        detail: format!(
            "entropy=[{}] decreasing={decreasing} k5<{ENTROPY_CEILING}",
            shown.join(", ")
        ),
    }
}

fn criterion_4() -> Line {
    let start = Instant::now();
    let deadline = start + Duration::from_secs(DELTA_SECONDS);
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 1..=6 {
        let opts = SolveOptions {
            threads,
            budget: Budget {
                max_nodes: None,
                deadline: Some(deadline),
            },
        };
        match delta_count_structure(k, opts) {
            Ok(r) => {
                pass &= r.violations == 0;
                parts.push(format!("k={k}:{}/{}ok", r.colourings - r.violations, r.colourings));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("k={k}:aborted({e})"));
                break;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Line {
        id: 4,
        pass,
        detail: format!("{} time={secs:.1}s limit={DELTA_SECONDS}s", parts.join(" ")),
    }
}

fn criterion_5() -> Line {
    let k = 4usize;
    let e = enumerate(&delta_count(), k as i64, None, Budget::unlimited()).unwrap();
    let mut invariant = 0;
    for c in &e.colourings {
        for mask in 1..(1usize << (k - 1)) {
            let t: Vec<bool> = (0..k).map(|i| mask >> i & 1 == 1).collect();
            if invariance_check(c, &t).unwrap() {
                invariant += 1;
            }
        }
    }
    Line {
        id: 5,
        pass: invariant == 0 && !e.colourings.is_empty(),
        detail: format!("colourings={} invariant_pairs={invariant}", e.colourings.len()),
    }
}

fn random_element(rng: &mut ChaCha8Rng) -> LampElement {
    let lamps: Vec<i64> = (0..rng.gen_range(0..5)).map(|_| rng.gen_range(-4..=4)).collect();
    LampElement::new(lamps, rng.gen_range(-4..=4))
}

fn criterion_6() -> Line {
    let t = xtree();
    let idx = |v: &LampElement| {
        let (p, q) = canonical_config(v);
        3 * p as u32 + q as u32
    };
    let mut regions = 0;
    let mut bad_regions = 0;
    for k in 0..=6 {
        for base in -3..=3 {
            let c = VertexColouring::from_fn(TetraRegion::new(base, k).unwrap(), idx);
            regions += 1;
            if solver::check(&t, &c).unwrap().is_err() {
                bad_regions += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad_triples = 0;
    for _ in 0..RANDOM_TRIALS {
        let (g, h) = (random_element(&mut rng), random_element(&mut rng));
        let lamps: Vec<i64> = (-6..6).filter(|_| rng.gen()).collect();
        let x = LampConfig::from_lamps(-24, 24, lamps).unwrap();
        let hx = lamp_act(&h, &x).unwrap();
        let lhs = cocycle(&g.mul(&h), &x).unwrap();
        let rhs = add(cocycle(&g, &hx).unwrap(), cocycle(&h, &x).unwrap());
        if lhs != rhs {
            bad_triples += 1;
        }
    }
    Line {
        id: 6,
        pass: bad_regions == 0 && bad_triples == 0,
        detail: format!(
            "regions={regions} invalid={bad_regions} triples={RANDOM_TRIALS} cocycle_failures={bad_triples}"
        ),
    }
}

fn criterion_7() -> Line {
    let tm = Substitution::thue_morse();
    let ssu = Substitution::sunny_side_up();
    let pd = Substitution::period_doubling();
    let mut tm_bad = Vec::new();
    let mut ssu_bad = Vec::new();
    for n in 1..=10u32 {
        let l = tm.level_language(n, 16).unwrap();
        if l.patterns.len() != 2 || !l.stabilized {
            tm_bad.push(n);
        }
        let l = ssu.level_language(n, 16).unwrap();
        if l.patterns.len() != (1 << n) + 1 || !l.stabilized {
            ssu_bad.push(n);
        }
    }
    let pd_lang = pd.level_language(2, 16).unwrap();
    let mut ambiguous = Vec::new();
    for p in &pd_lang.patterns {
        let d = pd
            .decode_branching(&LevelPattern {
                level: 2,
                values: p.clone(),
            })
            .unwrap();
        if !matches!(d, Decoding::Unique(_)) {
            ambiguous.push(p.clone());
        }
    }
    Line {
        id: 7,
        pass: tm_bad.is_empty() && ssu_bad.is_empty() && ambiguous.is_empty(),
        detail: format!(
            "thue_morse_bad_levels={tm_bad:?} sunny_side_up_bad_levels={ssu_bad:?} period_doubling_patterns={} ambiguous={ambiguous:?}",
            pd_lang.patterns.len()
        ),
    }
}

fn random_level(rng: &mut ChaCha8Rng, n: u32, tiles: u32) -> WangTowerLevel {
    let b = (0..2 * n).map(|_| rng.gen()).collect();
    let cells = (0..1usize << (2 * n)).map(|_| rng.gen_range(0..tiles)).collect();
    WangTowerLevel::new(n, b, cells).unwrap()
}

fn criterion_8() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let board = WangTileset::checkerboard();
    let mut round_trip_failures = 0;
    for _ in 0..RANDOM_TRIALS {
        let n = rng.gen_range(0..=6);
        let level = random_level(&mut rng, n, 4);
        if square_to_tower(&tower_to_square(&level), level.b.clone()).unwrap() != level {
            round_trip_failures += 1;
        }
    }
    // Half the instances start from a valid square so both verdicts get exercised.
    let valid: Vec<_> = (1..=4)
        .map(|n| search_square(&board, n, Budget::unlimited()).unwrap().unwrap())
        .collect();
    let (mut disagreements, mut valid_seen) = (0, 0);
    for i in 0..RANDOM_TRIALS {
        let level = if i % 2 == 0 {
            let sq = &valid[rng.gen_range(0..valid.len())];
            let n = sq.side().trailing_zeros();
            let b = (0..2 * n).map(|_| rng.gen()).collect();
            let mut level = square_to_tower(sq, b).unwrap();
            if rng.gen_bool(0.5) {
                let c = rng.gen_range(0..level.cells.len());
                level.cells[c] ^= 1;
            }
            level
        } else {
            let n = rng.gen_range(0..=4);
            random_level(&mut rng, n, 2)
        };
        let tower_ok = check_tower(&level, &board).unwrap().is_ok();
        let square_ok = tower_to_square(&level).check(&board).unwrap().is_ok();
        valid_seen += tower_ok as usize;
        if tower_ok != square_ok {
            disagreements += 1;
        }
    }
    let single = WangTowerLevel::new(1, vec![false; 2], vec![0; 4]).unwrap();
    let rejected = check_tower(&single, &WangTileset::single_mismatched())
        .unwrap()
        .is_err();
    Line {
        id: 8,
        pass: round_trip_failures == 0 && disagreements == 0 && rejected,
        detail: format!(
            "round_trip_failures={round_trip_failures} disagreements={disagreements} valid_instances={valid_seen} mismatched_rejected={rejected}"
        ),
    }
}

/// Every row pair of a full run, checked tile by tile. Returns the phases row by row.
fn checked_phases(tm: &TwoHeadTm, log2: u32) -> Result<Vec<u8>, String> {
    let prog = compile_tm(tm);
    let tape = full_tape(&prog.tape, &[], log2).map_err(|e| e.to_string())?;
    let mut row = initial_row(&tape).map_err(|e| e.to_string())?;
    let mut phases = Vec::new();
    for r in 0..tape.len() as u64 {
        phases.push(row[0].phase);
        if row[0].phase == 2 {
            break;
        }
        let (we, north) = successor_row(&row, prog.id_len, r).map_err(|e| e.to_string())?;
        for x in 0..row.len() {
            check_tile(&row[x], &we[x], &north[x], &we[x + 1]).map_err(|rule| format!("row {r} cell {x}: {rule}"))?;
        }
        row = north;
    }
    Ok(phases)
}

fn criterion_9() -> Line {
    let start = Instant::now();
    let accept = TwoHeadTm::immediate_accept();
    let t = compile_tm(&accept).id_len as u64;
    let tape = full_tape(&compile_tm(&accept).tape, &[], 8).unwrap();
    let report = run_square(&tape, true);
    let (accepted, within) = match &report {
        Ok(r) => (true, r.accept_row <= 2 + t),
        Err(_) => (false, false),
    };
    let tile_check = checked_phases(&accept, 8);
    let segments_ok = match &tile_check {
        Ok(phases) => {
            let mut runs = Vec::new();
            let mut i = 0;
            while i < phases.len() {
                let j = (i..phases.len())
                    .find(|&j| phases[j] != phases[i])
                    .unwrap_or(phases.len());
                if phases[i] == 1 {
                    runs.push(j - i);
                }
                i = j;
            }
            !runs.is_empty() && runs.iter().all(|&len| len as u64 == t)
        }
        Err(_) => false,
    };
    let fault = matches!(
        run_machine(&TwoHeadTm::immediate_fail(), &[], 8, false),
        Err(Error::Fault { .. })
    );
    let secs = start.elapsed().as_secs_f64();
    Line {
        id: 9,
        pass: accepted && within && tile_check.is_ok() && segments_ok && fault && secs < UTM_SECONDS,
        detail: format!(
            "accept={accepted} accept_row={} t={t} tiles={} phase1_segments_exact={segments_ok} fail_faults={fault} time={secs:.2}s",
            report.as_ref().map_or("none".to_string(), |r| r.accept_row.to_string()),
            tile_check.as_ref().map_or_else(|e| e.clone(), |_| "ok".to_string()),
        ),
    }
}

fn criterion_10() -> Line {
    let program = compile_tm(&TwoHeadTm::immediate_accept()).tape.len() as u64;
    match macrotile_layout(1, 1, program) {
        Ok(m) => {
            let want = (BigUint::from(16u32), BigUint::from(4096u32), BigUint::from(65536u32));
            let pass = (m.n.clone(), m.packet.clone(), m.side.clone()) == want && m.is_consistent();
            Line {
                id: 10,
                pass,
                detail: format!(
                    "n={} t={} L={} fields={} disjoint_in_range={}",
                    m.n,
                    m.packet,
                    m.side,
                    m.fields.len(),
                    m.is_consistent()
                ),
            }
        }
        Err(e) => Line {
            id: 10,
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn criterion_11() -> Line {
    let kari: Vec<_> = [1, 8].iter().map(|&n| pool(n).install(kari_outcome)).collect();
    let counts: Vec<_> = [1, 8].iter().map(|&n| pool(n).install(|| xtree_counts(n))).collect();
    Line {
        id: 11,
        pass: kari[0] == kari[1] && counts[0] == counts[1],
        detail: format!("kari={:?}/{:?} xtree={:?}/{:?}", kari[0], kari[1], counts[0], counts[1]),
    }
}

#[test]
fn acceptance_criteria() {
    let criteria: [fn() -> Line; 11] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
    ];
    let mut failed = Vec::new();
    for run in criteria {
        let line = run();
        println!(
            "criterion {:>2} {} {}",
            line.id,
            if line.pass { "PASS" } else { "FAIL" },
            line.detail
        );
        if !line.pass {
            failed.push(line.id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
