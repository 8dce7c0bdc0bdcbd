use proptest::prelude::*;
use sparsedom::kernels::{check_assumption_l1, check_assumption_pointwise, make_operator, CompositeSide};
use sparsedom::{AtiFamily, Grid, GridFunction, OperatorSpec};

fn specs() -> Vec<OperatorSpec> {
    vec![
        OperatorSpec::Hilbert,
        OperatorSpec::Rough { omega: vec![1.0, -2.5] },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn apply_is_linear(
        f in prop::collection::vec(-1.0f64..1.0, 64),
        g in prop::collection::vec(-1.0f64..1.0, 64),
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
    ) {
        let grid = Grid::line(6).unwrap();
        let (f, g) = (GridFunction::new(grid, f).unwrap(), GridFunction::new(grid, g).unwrap());
        for spec in specs() {
            let t = make_operator(grid, &spec).unwrap();
            let combo = f.zip_with(&g, |x, y| a * x + b * y).unwrap();
            let lhs = t.apply(&combo).unwrap();
            let (tf, tg) = (t.apply(&f).unwrap(), t.apply(&g).unwrap());
            let scale = lhs.max_abs().max(1.0);
            for ((l, x), y) in lhs.values().iter().zip(tf.values()).zip(tg.values()) {
                prop_assert!((l - (a * x + b * y)).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn truncated_maximal_dominates_the_operator(f in prop::collection::vec(-1.0f64..1.0, 64)) {
        let grid = Grid::line(6).unwrap();
        let f = GridFunction::new(grid, f).unwrap();
        for spec in specs() {
            let t = make_operator(grid, &spec).unwrap();
            let star = t.apply_truncated_maximal(&f).unwrap();
            let tf = t.apply(&f).unwrap();
            for (s, v) in star.values().iter().zip(tf.values()) {
                prop_assert!(*s >= v.abs());
            }
        }
    }
}

#[test]
fn verifiers_are_repeatable() {
    let t = make_operator(Grid::line(7).unwrap(), &OperatorSpec::Hilbert).unwrap();
    let fam = AtiFamily::heat();
    for tt in AtiFamily::default_sweep(7) {
        assert_eq!(check_assumption_l1(&t, &fam, tt).unwrap(), check_assumption_l1(&t, &fam, tt).unwrap());
        for side in [CompositeSide::TA, CompositeSide::DT] {
            let a = check_assumption_pointwise(&t, &fam, tt, side).unwrap();
            assert_eq!(a, check_assumption_pointwise(&t, &fam, tt, side).unwrap());
        }
    }
}
