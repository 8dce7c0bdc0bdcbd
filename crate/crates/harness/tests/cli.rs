use std::fs;
use std::path::PathBuf;

use sparsedom::kernels::make_operator;
use sparsedom::{Grid, OperatorSpec};
use sparsedom_harness::cli;
use sparsedom_harness::generators::random_sign;
use sparsedom_harness::rows::{from_csv, COLUMNS};
use sparsedom_harness::suites::{self, level_set_measure, young_integral, Ctx, Suite};
use sparsedom_harness::Config;

fn repo(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(std::iter::once("sparsedom").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn missing_config_exits_2() {
    let (code, _, err) = run(&["bounds"]);
    assert_eq!(code, 2);
    assert!(err.contains("--config"), "{err}");
    let (code, _, _) = run(&["bounds", "--config", "/nonexistent/smoke.cfg"]);
    assert_eq!(code, 2);
}

#[test]
fn malformed_config_reports_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(&path, "[grid]\ndim = 1\nlevel = 3\n\n[sweeps]\np = [2.0, 0.5]\n").unwrap();
    let (code, _, err) = run(&["weights", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 6") && err.contains("sweeps.p"), "{err}");

    fs::write(&path, "[grid]\ndim = 1\nlevel = 3\ncolour = 1\n").unwrap();
    let (code, _, err) = run(&["weights", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn report_on_empty_rows_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("rows.csv");
    fs::write(&rows, COLUMNS.join(",") + "\n").unwrap();
    let out = dir.path().join("out");
    let (code, stdout, _) = run(&["report", "--rows", rows.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let written = fs::read_to_string(out.join("rows.csv")).unwrap();
    assert_eq!(written.trim_end(), COLUMNS.join(","));
}

#[test]
fn smoke_bounds_pass_against_golden_caps() {
    let cfg = repo("configs/smoke.cfg");
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, err) = run(&[
        "bounds",
        "--config",
        cfg.to_str().unwrap(),
        "--golden",
        golden_dir().to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("strong_composition"));
    let rows = from_csv(&fs::read(dir.path().join("rows.csv")).unwrap()).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.seed == 7 && r.level == 2 && r.runtime_ms.is_none()));
    assert!(dir.path().join("report.json").exists());
    assert!(dir.path().join("plotdata/strong_composition.csv").exists());
}

#[test]
fn violated_cap_exits_1_with_the_row_id() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(repo("configs/smoke.cfg")).unwrap() + "\n[caps]\nstrong_single = 1e-9\n";
    let path = dir.path().join("tight.cfg");
    fs::write(&path, text).unwrap();
    let (code, _, err) = run(&["bounds", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("FAIL strong_single"), "{err}");
}

#[test]
fn seed_and_level_overrides_reach_the_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo("configs/smoke.cfg");
    let (code, _, err) = run(&[
        "weights",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "99",
        "--level",
        "3",
        "--record-timing",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let rows = from_csv(&fs::read(dir.path().join("rows.csv")).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.seed == 99 && r.level == 3 && r.runtime_ms.is_some()));
}

#[test]
fn smoke_rows_are_well_formed() {
    let (cfg, _) = Config::load(&repo("configs/smoke.cfg")).unwrap();
    let ctx = Ctx::new(cfg, 7).unwrap();
    let rows = suites::run(&ctx, &Suite::ALL, Some(2), false).unwrap();
    for r in &rows {
        match r.ratio {
            Some(x) => assert!(x.is_finite() && x >= 0.0, "{} {x}", r.id),
            None => assert_eq!(r.rhs_core, 0.0),
        }
        if r.rhs_core == 0.0 {
            assert!(r.flagged());
        }
        if let (Some(e1), Some(p)) = (r.extras.get("eps1"), r.p) {
            let e2 = r.extras["eps2"];
            assert!(*e1 > 0.0 && *e1 <= p - 1.0);
            assert!(e2 > 0.0 && e2 <= p / (p - 1.0) - 1.0);
        }
    }
}

#[test]
fn weak_type_ratio_is_invariant_under_doubling_f_and_lambda() {
    let grid = Grid::line(7).unwrap();
    let t = make_operator(grid, &OperatorSpec::Hilbert).unwrap();
    let f = random_sign(grid, 3);
    let tf = t.apply(&t.apply(&f).unwrap()).unwrap();
    let f2 = f.scaled(2.0);
    let tf2 = t.apply(&t.apply(&f2).unwrap()).unwrap();
    for lambda in [0.25, 1.0, 4.0] {
        let ratio = level_set_measure(&tf, lambda) / young_integral(&f, lambda, 1.0, None);
        let doubled = level_set_measure(&tf2, 2.0 * lambda) / young_integral(&f2, 2.0 * lambda, 1.0, None);
        assert_eq!(ratio, doubled);
    }
}
