use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsedom::decomp::{cz_decompose, whitney_decompose, whitney_min_level, whitney_overlap_bound};
use sparsedom::{Grid, GridFunction};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cz_good_part_is_bounded_off_the_cubes(v in prop::collection::vec(-30.0f64..30.0, 128), t in -1.0f64..3.0) {
        let g = Grid::line(7).unwrap();
        let f = GridFunction::new(g, v).unwrap();
        let norm = f.abs().integral();
        prop_assume!(norm > 0.0);
        let lambda = norm * t.exp();
        let cz = cz_decompose(&f, lambda).unwrap();
        let covered = cz.covered();
        for c in 0..g.cell_count() {
            if !covered[c] {
                prop_assert!(cz.good.values()[c].abs() <= 2.0 * lambda);
            }
        }
        prop_assert!(cz.selected_measure() <= norm / lambda);
    }
}

/// Union of random intervals; `None` if it is empty or everything.
fn random_set(rng: &mut ChaCha8Rng, g: Grid) -> Option<Vec<bool>> {
    let mut set = vec![false; g.cell_count()];
    for _ in 0..rng.gen_range(1..4) {
        let (c, r) = (rng.gen_range(0.0..1.0), rng.gen_range(0.02..0.3));
        for (cell, s) in set.iter_mut().enumerate() {
            *s |= (g.midpoint(cell)[0] - c).abs() < r;
        }
    }
    (set.iter().any(|&b| b) && !set.iter().all(|&b| b)).then_some(set)
}

#[test]
fn whitney_invariants_including_large_r() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut runs = 0;
    while runs < 100 {
        let r = [1.5, 3.0, 6.0][runs % 3];
        let g = Grid::line(whitney_min_level(r, 1)).unwrap();
        let Some(omega) = random_set(&mut rng, g) else { continue };
        let w = whitney_decompose(g, &omega, r).unwrap();
        let (lo, hi) = w.band();
        assert!(lo >= 5.0 * r && hi <= 15.0 * r, "R = {r}: ({lo}, {hi})");
        assert!(w.max_overlap <= whitney_overlap_bound(r, 1));
        runs += 1;
    }
}

#[test]
fn whitney_cubes_of_a_subset_refine_those_of_the_superset() {
    let g = Grid::line(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    while checked < 20 {
        let (Some(a), Some(b)) = (random_set(&mut rng, g), random_set(&mut rng, g)) else { continue };
        let big: Vec<bool> = a.iter().zip(&b).map(|(x, y)| *x || *y).collect();
        if big.iter().all(|&x| x) {
            continue;
        }
        let small = whitney_decompose(g, &a, 1.5).unwrap();
        let large = whitney_decompose(g, &big, 1.5).unwrap();
        for q in &small.cubes {
            assert!(large.cubes.iter().any(|p| p.contains(q)));
        }
        checked += 1;
    }
}
