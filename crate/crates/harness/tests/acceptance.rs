//! Acceptance criteria, one line per criterion on stdout. Run with
//! `cargo test -p sparsedom-harness --test acceptance`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsedom::decomp::{cz_decompose, cz_set, distance_to_complement, whitney_decompose, whitney_min_level, whitney_overlap_bound};
use sparsedom::kernels::{check_assumption_l1, check_assumption_pointwise, make_operator, CompositeSide};
use sparsedom::maximal::{iterated, maximal, pointwise_band, MaximalSpec};
use sparsedom::orlicz::luxemburg_norm;
use sparsedom::sparse::{
    certificate_eta, dominate_composition, dominate_maximal_composition, sparse_dominate_single, verify_sparsity,
    DominationOptions, SparseFamily,
};
use sparsedom::{AtiFamily, Cube, CubeFamily, DilationMode, Grid, GridFunction, OperatorSpec, Weight};
use sparsedom_harness::golden;
use sparsedom_harness::rows::{max_ratios, to_csv};
use sparsedom_harness::suites::{self, Ctx, Suite};
use sparsedom_harness::Config;

/// Largest stopping constant seen over the 20 domination runs of criterion 6
/// (oracle pass, seed 5); accepted band is `[D_REF/2, 2·D_REF]`.
const D_REF: f64 = 8.0;

/// Frozen pointwise band of `M_{L log L} f / M M f` (pow2 cubes, L = 10,
/// seed 5 draws).
const LLOGL_BAND: (f64, f64) = (0.88, 1.26);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn random_cube(rng: &mut ChaCha8Rng, grid: Grid) -> Cube {
    let n = grid.side();
    let side = rng.gen_range(1..=n);
    let mut off = [0i64; 2];
    for o in off.iter_mut().take(grid.dim()) {
        *o = rng.gen_range(0..=(n - side)) as i64;
    }
    Cube::new(grid, off, side).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let grids = [Grid::line(10).unwrap(), Grid::new(2, 5, false).unwrap()];
    let mut worst = 0.0f64;
    for i in 0..200 {
        let grid = grids[i % 2];
        let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
        let g = GridFunction::new(grid, random_values(&mut rng, grid.cell_count())).unwrap().scaled(scale);
        let q = random_cube(&mut rng, grid);
        let avg = g.abs().integrate(&q).unwrap() / q.measure();
        let lux = luxemburg_norm(&g, &q, 0.0).unwrap();
        worst = worst.max(rel(lux, avg));
    }
    outcome(worst <= 1e-10, format!("max relative error {worst:.2e}"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid = Grid::line(8).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        // Log-uniform values over up to six decades.
        let spread = rng.gen_range(0.0..3.0);
        let v = (0..grid.cell_count()).map(|_| 10f64.powf(rng.gen_range(-spread..spread))).collect();
        let w = Weight::new(GridFunction::new(grid, v).unwrap()).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let pd = p / (p - 1.0);
            let lhs = w.dual(p).unwrap().ap(pd).unwrap();
            let rhs = w.ap(p).unwrap().powf(pd - 1.0);
            worst = worst.max(rel(lhs, rhs));
        }
    }
    outcome(worst <= 1e-8, format!("max relative error {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grids = [Grid::line(8).unwrap(), Grid::new(2, 5, false).unwrap()];
    let mut bad = Vec::new();
    for i in 0..100 {
        let grid = grids[i % 2];
        let two_n = (1usize << grid.dim()) as f64;
        // Sparse spikes over a small background so that selections happen at
        // several scales.
        let mut v = random_values(&mut rng, grid.cell_count());
        for _ in 0..rng.gen_range(1..6) {
            let c = rng.gen_range(0..grid.cell_count());
            v[c] *= 10f64.powf(rng.gen_range(1.0..3.0));
        }
        let f = GridFunction::new(grid, v).unwrap();
        let norm = f.abs().integral();
        let lambda = norm * rng.gen_range(-1.0f64..3.0).exp();
        let cz = cz_decompose(&f, lambda).unwrap();
        let root = grid.root();
        for q in cz.cubes.iter().filter(|q| **q != root) {
            let avg = f.abs().integrate(q).unwrap() / q.measure();
            if !(lambda < avg && avg <= two_n * lambda) {
                bad.push(format!("run {i}: avg {avg} outside ({lambda}, {}]", two_n * lambda));
            }
        }
        if cz.reassemble().values() != f.values() {
            bad.push(format!("run {i}: g + Σb ≠ f"));
        }
        if cz.selected_measure() > norm / lambda {
            bad.push(format!("run {i}: Σ|Q| = {} > {}", cz.selected_measure(), norm / lambda));
        }

        // χ_E variant at level 2^{-(n+1)} with |E| ≤ 2^{-(n+1)}.
        let level = 1.0 / (2.0 * two_n);
        let budget = (level * grid.cell_count() as f64) as usize;
        let mut e = vec![false; grid.cell_count()];
        for _ in 0..rng.gen_range(1..=budget) {
            e[rng.gen_range(0..grid.cell_count())] = true;
        }
        let ps = cz_set(grid, &e, level, &root).unwrap();
        let mut covered = vec![false; grid.cell_count()];
        for p in &ps {
            let inside = p.cells().filter(|&c| e[c]).count() as f64;
            let size = p.cell_count() as f64;
            if !(level * size <= inside && inside <= 0.5 * size) {
                bad.push(format!("run {i}: |P∩E|/|P| = {}", inside / size));
            }
            p.cells().for_each(|c| covered[c] = true);
        }
        if e.iter().zip(&covered).any(|(&x, &c)| x && !c) {
            bad.push(format!("run {i}: E not covered"));
        }
    }
    let detail = bad.first().cloned().unwrap_or_else(|| "100 runs, all contracts hold".into());
    outcome(bad.is_empty(), detail)
}

fn random_open_set(rng: &mut ChaCha8Rng, grid: Grid) -> Vec<bool> {
    loop {
        let mut set = vec![false; grid.cell_count()];
        for _ in 0..rng.gen_range(1..5) {
            let c = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let r = rng.gen_range(0.05..0.4);
            for (cell, s) in set.iter_mut().enumerate() {
                let x = grid.midpoint(cell);
                let d = (0..grid.dim()).map(|k| (x[k] - c[k]).abs()).fold(0.0, f64::max);
                *s |= d < r;
            }
        }
        if set.iter().any(|&b| b) && !set.iter().all(|&b| b) {
            return set;
        }
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = Vec::new();
    let (mut lo, mut hi, mut over) = (f64::INFINITY, 0.0f64, 0.0f64);
    for i in 0..100 {
        let r = if i % 2 == 0 { 1.5 } else { 3.0 };
        let dim = if i % 5 == 4 { 2 } else { 1 };
        let grid = Grid::new(dim, whitney_min_level(r, dim), false).unwrap();
        let omega = random_open_set(&mut rng, grid);
        let wd = whitney_decompose(grid, &omega, r).unwrap();
        let (blo, bhi) = wd.band();
        lo = lo.min(blo / r);
        hi = hi.max(bhi / r);
        let bound = whitney_overlap_bound(r, dim);
        over = over.max(wd.max_overlap as f64 / bound as f64);
        if blo < 5.0 * r || bhi > 15.0 * r {
            bad.push(format!("run {i}: band ({blo}, {bhi}) for R = {r}"));
        }
        if wd.max_overlap > bound {
            bad.push(format!("run {i}: overlap {} > {bound}", wd.max_overlap));
        }
        let mut owner = vec![0usize; grid.cell_count()];
        for q in &wd.cubes {
            q.cells().for_each(|c| owner[c] += 1);
        }
        if (0..grid.cell_count()).any(|c| owner[c] > 1 || (owner[c] == 1 && !omega[c])) {
            bad.push(format!("run {i}: cubes overlap or leave Ω"));
        }
        // Uncovered cells are exactly those where no single cell fits the
        // lower band.
        let dt = distance_to_complement(grid, &omega);
        let reach = 5.0 * r * (dim as f64).sqrt();
        for c in 0..grid.cell_count() {
            let expect_residual = omega[c] && (dt[c] as f64) < reach;
            if omega[c] && (owner[c] == 0) != expect_residual {
                bad.push(format!("run {i}: cell {c} coverage"));
                break;
            }
        }
    }
    let detail = match bad.first() {
        Some(b) => b.clone(),
        None => format!("band/R ∈ [{lo:.2}, {hi:.2}], overlap ≤ {over:.2}·bound"),
    };
    outcome(bad.is_empty(), detail)
}

struct Run {
    family: SparseFamily,
    d_max: f64,
    ratio: f64,
    flagged: bool,
}

fn domination_runs() -> Vec<Run> {
    let grid = Grid::line(6).unwrap();
    let t = make_operator(grid, &OperatorSpec::Hilbert).unwrap();
    let opts = DominationOptions {
        dilation: DilationMode::Clip,
        inner: CubeFamily::Dyadic,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut out = Vec::new();
    for i in 0..20 {
        let f = GridFunction::new(grid, random_values(&mut rng, grid.cell_count())).unwrap();
        let g = GridFunction::new(grid, random_values(&mut rng, grid.cell_count())).unwrap();
        let a = dominate_composition(&t, &t, &f, &opts).unwrap();
        let sides = a.evaluate(&g).unwrap();
        out.push(Run {
            family: a.family,
            d_max: a.d_max,
            ratio: sides.ratio,
            flagged: a.flagged,
        });
        let b = dominate_maximal_composition(&t, &t, &f, &g, 2.0, &opts).unwrap();
        out.push(Run {
            family: b.family,
            d_max: b.d_max,
            ratio: b.sides.ratio,
            flagged: b.flagged,
        });
        let c = sparse_dominate_single(&t, &f, (i % 3) as u32, &opts).unwrap();
        out.push(Run {
            family: c.family,
            d_max: c.d_max,
            ratio: c.certified_ratio,
            flagged: c.flagged,
        });
    }
    out
}

fn criterion_5(runs: &[Run]) -> Outcome {
    let (mut eta, mut eta27) = (1.0f64, 1.0f64);
    let mut consistent = true;
    for r in runs {
        let fam = &r.family;
        let (again, _) = verify_sparsity(fam.grid(), fam.cubes()).unwrap();
        let cert = certificate_eta(fam.grid(), fam.cubes(), fam.certificates()).unwrap();
        consistent &= again == fam.eta() && cert == fam.eta();
        eta = eta.min(fam.eta());
        eta27 = eta27.min(fam.dilated_eta(27, DilationMode::Clip).unwrap());
    }
    let pass = consistent && eta >= 0.5 && eta27 >= 1.0 / 54.0;
    outcome(pass, format!("min η = {eta:.4}, min η(27Q) = {eta27:.4} (need 0.5 and {:.4})", 1.0 / 54.0))
}

fn criterion_6(runs: &[Run]) -> Outcome {
    let max_ratio = runs.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let d = runs.iter().map(|r| r.d_max).fold(0.0, f64::max);
    let flagged = runs.iter().filter(|r| r.flagged).count();
    let pass = max_ratio <= 1.0 && flagged == 0 && (D_REF / 2.0..=2.0 * D_REF).contains(&d);
    outcome(pass, format!("max ratio {max_ratio:.4}, max D {d} (band [{}, {}]), flagged {flagged}", D_REF / 2.0, 2.0 * D_REF))
}

fn kernel_sups(level: u32) -> [f64; 5] {
    let op = make_operator(Grid::new(1, level, true).unwrap(), &OperatorSpec::Hilbert).unwrap();
    let fam = AtiFamily::heat();
    let mut s = [0.0f64; 5];
    for t in AtiFamily::default_sweep(10) {
        let ta = check_assumption_pointwise(&op, &fam, t, CompositeSide::TA).unwrap();
        let dt = check_assumption_pointwise(&op, &fam, t, CompositeSide::DT).unwrap();
        let vals = [check_assumption_l1(&op, &fam, t).unwrap(), ta.holder, ta.size, dt.holder, dt.size];
        for (acc, v) in s.iter_mut().zip(vals) {
            *acc = acc.max(v);
        }
    }
    s
}

fn criterion_7() -> Outcome {
    let a = kernel_sups(10);
    let b = kernel_sups(12);
    let change = a.iter().zip(&b).map(|(x, y)| rel(*y, *x)).fold(0.0, f64::max);
    outcome(change <= 0.10, format!("max relative change {:.2}% (l1 {:.4} → {:.4})", 100.0 * change, a[0], b[0]))
}

fn criterion_8() -> Outcome {
    let grid = Grid::line(10).unwrap();
    let fam = CubeFamily::PowerOfTwoSides;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..50 {
        let f = GridFunction::new(grid, random_values(&mut rng, grid.cell_count())).unwrap();
        let a = maximal(&f, &MaximalSpec::orlicz(1.0, fam)).unwrap();
        let b = iterated(&f, 2, fam).unwrap();
        let (l, h) = pointwise_band(a.values(), b.values());
        lo = lo.min(l);
        hi = hi.max(h);
    }
    let pass = lo >= LLOGL_BAND.0 && hi <= LLOGL_BAND.1;
    outcome(pass, format!("observed [{lo:.4}, {hi:.4}] in frozen [{}, {}]", LLOGL_BAND.0, LLOGL_BAND.1))
}

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn config_path(name: &str) -> PathBuf {
    manifest().join("../../configs").join(name)
}

/// Max ratio per id at `level`, and the golden caps for that level.
fn frozen_sweep(suites: &[Suite], level: u32) -> (BTreeMap<String, f64>, BTreeMap<String, f64>) {
    let (mut cfg, bytes) = Config::load(&config_path("frozen.cfg")).unwrap();
    cfg.grid.level = level;
    let seed = cfg.functions.seed;
    let ctx = Ctx::new(cfg, seed).unwrap();
    let rows = suites::run(&ctx, suites, None, false).unwrap();
    let hash = golden::config_hash(&bytes);
    let g = golden::load(&manifest().join("tests/golden"), &hash).unwrap().expect("golden caps for frozen.cfg");
    let caps = g.caps.get(&level).cloned().unwrap_or_default();
    (max_ratios(&rows), caps)
}

fn check_caps(ids: &[&str], by_level: &[(u32, &BTreeMap<String, f64>, &BTreeMap<String, f64>)]) -> Vec<String> {
    let mut bad = Vec::new();
    for id in ids {
        for (level, ratios, caps) in by_level {
            match (ratios.get(*id), caps.get(*id)) {
                (Some(r), Some(c)) if r <= c => {}
                (r, c) => bad.push(format!("{id} at L={level}: ratio {r:?} cap {c:?}")),
            }
        }
    }
    bad
}

fn criterion_9() -> Outcome {
    let ids = ["weak_unweighted_k2", "weak_llogl_composition", "weak_llog2l_composition", "weak_fs_composition"];
    let (r7, c7) = frozen_sweep(&[Suite::Endpoints], 7);
    let (r8, c8) = frozen_sweep(&[Suite::Endpoints], 8);
    let mut bad = check_caps(&ids, &[(7, &r7, &c7), (8, &r8, &c8)]);
    let mut worst = f64::NEG_INFINITY;
    for id in ids {
        if let (Some(a), Some(b)) = (r7.get(id), r8.get(id)) {
            let growth = b / a - 1.0;
            worst = worst.max(growth);
            if growth > 0.25 {
                bad.push(format!("{id}: L7 {a:.4} → L8 {b:.4}"));
            }
        }
    }
    let detail = bad.first().cloned().unwrap_or_else(|| format!("within caps, worst L7→L8 growth {:.1}%", 100.0 * worst));
    outcome(bad.is_empty(), detail)
}

fn criterion_10() -> Outcome {
    let ids = ["strong_composition", "sparse_holder"];
    let (r7, c7) = frozen_sweep(&[Suite::Bounds, Suite::SparseForms], 7);
    let (r8, c8) = frozen_sweep(&[Suite::Bounds, Suite::SparseForms], 8);
    let bad = check_caps(&ids, &[(7, &r7, &c7), (8, &r8, &c8)]);
    let detail = bad.first().cloned().unwrap_or_else(|| {
        format!(
            "strong_composition {:.3}/{:.3}, sparse_holder {:.3}/{:.3} at L7/L8",
            r7["strong_composition"], r8["strong_composition"], r7["sparse_holder"], r8["sparse_holder"]
        )
    });
    outcome(bad.is_empty(), detail)
}

fn smoke_csv(threads: usize) -> Vec<u8> {
    let (cfg, _) = Config::load(&config_path("smoke.cfg")).unwrap();
    let seed = cfg.functions.seed;
    let ctx = Ctx::new(cfg, seed).unwrap();
    to_csv(&suites::run(&ctx, &Suite::ALL, Some(threads), false).unwrap()).unwrap()
}

fn criterion_11() -> Outcome {
    let a = smoke_csv(1);
    let b = smoke_csv(8);
    outcome(a == b, format!("{} bytes, {} rows", a.len(), a.iter().filter(|&&c| c == b'\n').count() - 1))
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if took > budget {
        o.pass = false;
        o.detail = format!("{} (over budget {budget:?})", o.detail);
    }
    (o, took)
}

fn main() {
    assert!(Path::new(&config_path("frozen.cfg")).exists());
    let secs = Duration::from_secs;
    let mut results = vec![
        timed(secs(1), criterion_1),
        timed(secs(10), criterion_2),
        timed(secs(5), criterion_3),
        timed(secs(5), criterion_4),
    ];
    // The 20 domination runs are shared by criteria 5 and 6; both are
    // charged for them.
    let start = Instant::now();
    let runs = domination_runs();
    let shared = start.elapsed();
    for c in [criterion_5 as fn(&[Run]) -> Outcome, criterion_6] {
        results.push(timed(secs(60).saturating_sub(shared), || c(&runs)));
        results.last_mut().unwrap().1 += shared;
    }
    results.push(timed(secs(120), criterion_7));
    results.push(timed(secs(30), criterion_8));
    results.push(timed(secs(300), criterion_9));
    results.push(timed(secs(300), criterion_10));
    results.push(timed(secs(60), criterion_11));

    for (i, (o, took)) in results.iter().enumerate() {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2}: {verdict}  {} [{:.2?}]", i + 1, o.detail, took);
    }
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, (o, _))| !o.pass).map(|(i, _)| i + 1).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
