//! Input-function generators. Every generated function has `‖f‖₁ = 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsedom::{Grid, GridFunction};

use crate::config::FunctionConfig;

#[derive(Clone, Debug)]
pub struct NamedFunction {
    pub name: String,
    pub f: GridFunction,
}

/// Rescale to unit `L¹` norm (the zero function is returned unchanged).
pub fn normalize(f: GridFunction) -> GridFunction {
    let m = f.abs().integral();
    if m > 0.0 {
        f.scaled(1.0 / m)
    } else {
        f
    }
}

/// `N·χ` of the cell at fraction `at` of each side.
pub fn one_cell(grid: Grid, at: f64) -> GridFunction {
    let i = ((at * grid.side() as f64) as usize).min(grid.side() - 1);
    let cell = grid.index([i, if grid.dim() == 2 { i } else { 0 }]);
    normalize(GridFunction::indicator(grid, [cell]))
}

/// Independent signs with magnitudes uniform in `(0, 1]`.
pub fn random_sign(grid: Grid, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..grid.cell_count())
        .map(|_| {
            let m = 1.0 - rng.gen::<f64>();
            if rng.gen::<bool>() {
                m
            } else {
                -m
            }
        })
        .collect();
    normalize(GridFunction::new(grid, v).expect("length matches the grid"))
}

/// Haar function of the dyadic interval `[1/4, 1/2)` along the first axis,
/// constant along the second.
pub fn haar(grid: Grid) -> GridFunction {
    normalize(GridFunction::from_fn(grid, |x| {
        if (0.25..0.375).contains(&x[0]) {
            1.0
        } else if (0.375..0.5).contains(&x[0]) {
            -1.0
        } else {
            0.0
        }
    }))
}

/// `exp(−1/(1 − r²))` with `r = |x − c|/0.3`, `c` the center.
pub fn bump(grid: Grid) -> GridFunction {
    let dim = grid.dim();
    normalize(GridFunction::from_fn(grid, |x| {
        let r2: f64 = x[..dim].iter().map(|&t| ((t - 0.5) / 0.3).powi(2)).sum();
        if r2 < 1.0 {
            (-1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    }))
}

/// Seed of draw `i` of a random generator.
pub fn draw_seed(seed: u64, draw: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(draw as u64)
}

/// Functions in config order; random kinds contribute one entry per draw.
pub fn generate(grid: Grid, cfg: &FunctionConfig, seed: u64) -> Vec<NamedFunction> {
    let mut out = Vec::new();
    for kind in &cfg.kinds {
        match kind.as_str() {
            "one_cell" => out.push(NamedFunction {
                name: "one_cell".into(),
                f: one_cell(grid, cfg.cell),
            }),
            "random_sign" => {
                for d in 0..cfg.draws.max(1) {
                    out.push(NamedFunction {
                        name: format!("random_sign#{d}"),
                        f: random_sign(grid, draw_seed(seed, d)),
                    });
                }
            }
            "haar" => out.push(NamedFunction {
                name: "haar".into(),
                f: haar(grid),
            }),
            "bump" => out.push(NamedFunction {
                name: "bump".into(),
                f: bump(grid),
            }),
            other => unreachable!("generator `{other}` passed validation"),
        }
    }
    out
}
