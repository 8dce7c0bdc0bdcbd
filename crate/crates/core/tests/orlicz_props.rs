use proptest::prelude::*;
use sparsedom::orlicz::{luxemburg_abs, luxemburg_norm, luxemburg_phi, power_average};
use sparsedom::{Cube, Grid, GridFunction};

fn function() -> impl Strategy<Value = (GridFunction, Cube)> {
    (prop::collection::vec(-50.0f64..50.0, 32), 0usize..32, 1usize..=32).prop_map(|(v, off, side)| {
        let g = Grid::line(5).unwrap();
        let side = side.min(32 - off);
        (GridFunction::new(g, v).unwrap(), Cube::new(g, [off as i64, 0], side).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn homogeneous((g, q) in function(), beta in 0.0f64..3.0, c in prop::sample::select(vec![0.1, -0.1, 10.0, -10.0])) {
        let a = luxemburg_norm(&g.scaled(c), &q, beta).unwrap();
        let b = c.abs() * luxemburg_norm(&g, &q, beta).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * b.max(1e-300), "{} vs {}", a, b);
    }

    #[test]
    fn monotone_in_beta((g, q) in function(), b1 in 0.0f64..3.0, d in 0.0f64..2.0) {
        let lo = luxemburg_norm(&g, &q, b1).unwrap();
        let hi = luxemburg_norm(&g, &q, b1 + d).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn average_below_llogl_and_powers_increase((g, q) in function(), r in 1.0f64..4.0, dr in 0.0f64..2.0) {
        let avg = power_average(&g, &q, 1.0).unwrap();
        prop_assert!(avg <= luxemburg_norm(&g, &q, 1.0).unwrap() * (1.0 + 1e-12));
        let a = power_average(&g, &q, r).unwrap();
        let b = power_average(&g, &q, r + dr).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-12));
    }

    #[test]
    fn norm_solves_the_defining_equation(v in prop::collection::vec(0.0f64..20.0, 1..64), beta in 0.1f64..3.0) {
        prop_assume!(v.iter().any(|&x| x > 0.0));
        let lambda = luxemburg_abs(&v, beta);
        prop_assert!((luxemburg_phi(&v, beta, lambda) - 1.0).abs() <= 1e-9);
    }
}
