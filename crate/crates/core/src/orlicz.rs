//! Localized Orlicz norms.
//!
//! For a cube `Q` and `β ≥ 0` the Luxemburg norm is
//! `‖g‖_{L(log L)^β,Q} = inf{λ > 0 : Φ(λ) ≤ 1}` with
//! `Φ(λ) = |Q|^{-1} ∫_Q (|g|/λ) log^β(e + |g|/λ)`, natural logarithm.
//! The power average is `⟨|g|⟩_{r,Q} = (|Q|^{-1} ∫_Q |g|^r)^{1/r}`.

use alloc::vec::Vec;

use crate::grid::{Cube, GridFunction};
use crate::math;
use crate::{Error, Result};

/// Relative bracket width at which the root search stops.
const REL_TOL: f64 = 1e-13;
const MAX_ITER: usize = 200;

/// A local size functional `f ↦ Φ(f, Q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LocalFunctional {
    /// `‖·‖_{L(log L)^β,Q}`.
    Luxemburg(f64),
    /// `⟨|·|⟩_{r,Q}`.
    Power(f64),
}

impl LocalFunctional {
    /// Plain average `⟨|·|⟩_Q`.
    pub const AVERAGE: LocalFunctional = LocalFunctional::Power(1.0);

    pub fn luxemburg(beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(LocalFunctional::Luxemburg(beta))
    }

    pub fn power(r: f64) -> Result<Self> {
        check_r(r)?;
        Ok(LocalFunctional::Power(r))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LocalFunctional::Luxemburg(b) => check_beta(b),
            LocalFunctional::Power(r) => check_r(r),
        }
    }

    /// Evaluate on `g` restricted to `q`.
    pub fn eval(&self, g: &GridFunction, q: &Cube) -> Result<f64> {
        match *self {
            LocalFunctional::Luxemburg(b) => luxemburg_norm(g, q, b),
            LocalFunctional::Power(r) => power_average(g, q, r),
        }
    }

    /// Evaluate on the nonnegative values `a` of `|g|` over the cells of a
    /// cube (the cube measure cancels, only the cell count matters).
    pub fn eval_abs(&self, a: &[f64]) -> f64 {
        match *self {
            LocalFunctional::Luxemburg(b) => luxemburg_abs(a, b),
            LocalFunctional::Power(r) => power_abs(a, r),
        }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta >= 0.0 {
        Ok(())
    } else {
        Err(Error::param("beta", beta))
    }
}

fn check_r(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::param("r", r))
    }
}

/// Young function `t log^β(e + t)`.
#[inline]
pub fn young(t: f64, beta: f64) -> f64 {
    t * math::log_e_plus_pow(t, beta)
}

fn gather_abs(g: &GridFunction, q: &Cube) -> Result<Vec<f64>> {
    g.grid().check_same(&q.grid())?;
    let v = g.values();
    Ok(match q.as_range() {
        Some(r) => v[r].iter().map(|x| x.abs()).collect(),
        None => q.cells().map(|c| v[c].abs()).collect(),
    })
}

pub fn luxemburg_norm(g: &GridFunction, q: &Cube, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(luxemburg_abs(&gather_abs(g, q)?, beta))
}

pub fn power_average(g: &GridFunction, q: &Cube, r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(power_abs(&gather_abs(g, q)?, r))
}

/// `⟨a⟩_r` of nonnegative cell values.
pub fn power_abs(a: &[f64], r: f64) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let m = a.len() as f64;
    if r == 1.0 {
        a.iter().sum::<f64>() / m
    } else if r == 2.0 {
        math::sqrt(a.iter().map(|x| x * x).sum::<f64>() / m)
    } else {
        math::powf(a.iter().map(|&x| math::powf(x, r)).sum::<f64>() / m, 1.0 / r)
    }
}

/// `Φ(λ)` on nonnegative cell values.
pub fn luxemburg_phi(a: &[f64], beta: f64, lambda: f64) -> f64 {
    let inv = 1.0 / lambda;
    a.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| young(x * inv, beta))
        .sum::<f64>()
        / a.len() as f64
}

/// Luxemburg norm of nonnegative cell values.
///
/// The root of `Φ(λ) = 1` is bracketed by `λ_lo = ⟨a⟩` (where `Φ ≥ 1`
/// because `log(e + t) ≥ 1`) and `λ_hi = ⟨a⟩ log^β(e + max a / ⟨a⟩)` (where
/// `Φ ≤ 1` because every ratio `a/λ_hi` is at most `max a / ⟨a⟩`), then
/// located by Illinois regula falsi with a bisection safeguard.
pub fn luxemburg_abs(a: &[f64], beta: f64) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let m = a.len() as f64;
    let avg = a.iter().sum::<f64>() / m;
    if avg == 0.0 || beta == 0.0 {
        return avg;
    }
    let max = a.iter().fold(0.0f64, |u, &x| u.max(x));
    // Nonzero values only: zeros contribute nothing to Φ.
    let nz: Vec<f64> = a.iter().copied().filter(|&x| x > 0.0).collect();
    let phi = |lam: f64| -> f64 {
        let inv = 1.0 / lam;
        nz.iter().map(|&x| young(x * inv, beta)).sum::<f64>() / m - 1.0
    };

    let mut lo = avg;
    let mut hi = avg * math::log_e_plus_pow(max / avg, beta);
    let mut f_lo = phi(lo);
    if f_lo <= 0.0 {
        return lo;
    }
    let mut f_hi = phi(hi);
    if f_hi >= 0.0 {
        return hi;
    }
    let mut side = 0i8;
    for _ in 0..MAX_ITER {
        if hi - lo <= REL_TOL * hi {
            break;
        }
        let width = hi - lo;
        let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = phi(x);
        if fx == 0.0 {
            return x;
        }
        if fx > 0.0 {
            lo = x;
            f_lo = fx;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            f_hi = fx;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
        // Safeguard: force a bisection if the step barely shrank the bracket.
        if hi - lo > 0.75 * width {
            let mid = 0.5 * (lo + hi);
            let fm = phi(mid);
            if fm == 0.0 {
                return mid;
            }
            if fm > 0.0 {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
                f_hi = fm;
            }
            side = 0;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use alloc::vec;

    /// Plain bisection on Φ(λ) = 1, independent of the production solver.
    fn bisect_oracle(a: &[f64], beta: f64) -> f64 {
        let phi = |lam: f64| {
            a.iter()
                .map(|&x| (x / lam) * libm::pow(libm::log(core::f64::consts::E + x / lam), beta))
                .sum::<f64>()
                / a.len() as f64
        };
        let (mut lo, mut hi) = (1e-300, 1.0);
        while phi(hi) > 1.0 {
            hi *= 2.0;
        }
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if phi(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn beta_zero_is_average() {
        let g = Grid::line(2).unwrap();
        let f = GridFunction::new(g, vec![1.0, -3.0, 0.5, 2.0]).unwrap();
        let q = g.root();
        assert_eq!(luxemburg_norm(&f, &q, 0.0).unwrap(), 6.5 / 4.0);
    }

    #[test]
    fn zero_function() {
        let g = Grid::line(3).unwrap();
        assert_eq!(luxemburg_norm(&GridFunction::zeros(g), &g.root(), 2.0).unwrap(), 0.0);
    }

    #[test]
    fn constant_one_beta_one() {
        let g = Grid::line(2).unwrap();
        let f = GridFunction::constant(g, 1.0);
        let got = luxemburg_norm(&f, &g.root(), 1.0).unwrap();
        // Frozen from the bisection oracle: root of (1/λ) log(e + 1/λ) = 1.
        let frozen = 1.256_750_618_5;
        assert!((got - frozen).abs() < 1e-9, "{got}");
        assert!((got - bisect_oracle(&[1.0; 4], 1.0)).abs() < 1e-10 * got);
    }

    #[test]
    fn negative_beta_rejected() {
        let g = Grid::line(1).unwrap();
        let f = GridFunction::constant(g, 1.0);
        assert!(luxemburg_norm(&f, &g.root(), -0.5).is_err());
    }

    #[test]
    fn power_average_examples() {
        let g = Grid::line(2).unwrap();
        let q = g.root();
        let f = GridFunction::new(g, vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(power_average(&f, &q, 2.0).unwrap(), 2.0);
        assert_eq!(power_average(&f, &q, 1.0).unwrap(), 1.0);
        let h = GridFunction::new(g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let oracle = libm::cbrt((1.0 + 8.0 + 27.0 + 64.0) / 4.0);
        assert!((power_average(&h, &q, 3.0).unwrap() - oracle).abs() < 1e-14);
    }

    #[test]
    fn spiky_values_match_oracle() {
        let mut a = vec![0.0; 1000];
        a[3] = 1e6;
        a[10] = 1.0;
        for beta in [0.5, 1.0, 2.0, 3.0] {
            let got = luxemburg_abs(&a, beta);
            let want = bisect_oracle(&a, beta);
            assert!((got - want).abs() <= 1e-10 * want, "beta {beta}: {got} vs {want}");
            assert!((luxemburg_phi(&a, beta, got) - 1.0).abs() < 1e-9);
        }
    }
}
