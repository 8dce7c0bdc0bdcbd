//! Muckenhoupt constants of discrete weights.
//!
//! With `σ = w^{-1/(p-1)}` and `p' = p/(p-1)`:
//!
//! - `[w]_{A_p} = max_Q ⟨w⟩_Q ⟨σ⟩_Q^{p-1}`,
//! - `[w]_{A_1} = max_x Mw(x)/w(x)`,
//! - `[w]_{A_∞} = max_Q w(Q)^{-1} ∫_Q M(w χ_Q)`,
//!
//! where `Q` and the cubes inside `M` range over one [`CubeFamily`].

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use once_cell::race::OnceBox;

use crate::grid::{enumerate_cubes, for_each_cube, Cube, CubeFamily, DyadicTree, Grid, GridFunction};
use crate::maximal::{maximal_values, MaximalSpec};
use crate::prefix::PrefixSums;
use crate::{math, Error, Result};

/// Input values below this are raised to it by [`Weight::floored`].
pub const WEIGHT_FLOOR: f64 = 1e-8;

/// Largest family size accepted by the generic `A_∞` evaluator, which costs
/// roughly the square of the family size.
const GENERIC_AINF_MAX_CUBES: usize = 4096;

/// A strictly positive weight with a fixed cube family for its constants.
pub struct Weight {
    w: GridFunction,
    family: CubeFamily,
    a1: OnceBox<f64>,
    ainf: OnceBox<f64>,
}

impl Clone for Weight {
    fn clone(&self) -> Self {
        let copy = |c: &OnceBox<f64>| {
            let out = OnceBox::new();
            if let Some(&v) = c.get() {
                let _ = out.set(Box::new(v));
            }
            out
        };
        Weight {
            w: self.w.clone(),
            family: self.family,
            a1: copy(&self.a1),
            ainf: copy(&self.ainf),
        }
    }
}

impl core::fmt::Debug for Weight {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Weight")
            .field("family", &self.family)
            .field("w", &self.w)
            .finish()
    }
}

impl Weight {
    /// Rejects non-finite or non-positive cells.
    pub fn new(w: GridFunction) -> Result<Self> {
        for (cell, &v) in w.values().iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveWeight { cell, value: v });
            }
        }
        let family = CubeFamily::default_for(w.grid());
        Ok(Weight {
            w,
            family,
            a1: OnceBox::new(),
            ainf: OnceBox::new(),
        })
    }

    /// Raises every cell to at least [`WEIGHT_FLOOR`]; NaN is still rejected.
    pub fn floored(w: GridFunction) -> Result<Self> {
        Weight::new(w.map(|v| if v.is_nan() { v } else { v.max(WEIGHT_FLOOR) }))
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Weight::new(GridFunction::constant(grid, c))
    }

    /// `|x - center|^a` sampled at cell midpoints, floored.
    pub fn power(grid: Grid, a: f64, center: [f64; 2]) -> Result<Self> {
        let dim = grid.dim();
        Weight::floored(GridFunction::from_fn(grid, |p| {
            let d2: f64 = (0..dim).map(|i| (p[i] - center[i]) * (p[i] - center[i])).sum();
            math::powf(math::sqrt(d2), a)
        }))
    }

    pub fn with_family(self, family: CubeFamily) -> Self {
        Weight {
            w: self.w,
            family,
            a1: OnceBox::new(),
            ainf: OnceBox::new(),
        }
    }

    pub fn family(&self) -> CubeFamily {
        self.family
    }

    pub fn grid(&self) -> Grid {
        self.w.grid()
    }

    pub fn function(&self) -> &GridFunction {
        &self.w
    }

    pub fn values(&self) -> &[f64] {
        self.w.values()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Ok(Weight::new(self.w.scaled(c))?.with_family(self.family))
    }

    /// `w(Q)`.
    pub fn mass(&self, q: &Cube) -> Result<f64> {
        self.w.integrate(q)
    }

    pub fn ap(&self, p: f64) -> Result<f64> {
        ap_constant(self, p, self.family)
    }

    pub fn a1(&self) -> f64 {
        *self.a1.get_or_init(|| Box::new(a1_constant(self)))
    }

    pub fn ainf(&self) -> Result<f64> {
        if let Some(&v) = self.ainf.get() {
            return Ok(v);
        }
        let v = ainf_uncached(self)?;
        Ok(*self.ainf.get_or_init(|| Box::new(v)))
    }

    pub fn dual(&self, p: f64) -> Result<Weight> {
        dual_weight(self, p)
    }
}

/// `[w]_{A_p}` over `family`; `p = 1` gives `[w]_{A_1}`.
pub fn ap_constant(w: &Weight, p: f64, family: CubeFamily) -> Result<f64> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::param("p", p));
    }
    if p == 1.0 {
        return Ok(if family == w.family {
            w.a1()
        } else {
            a1_constant(&w.clone().with_family(family))
        });
    }
    let grid = w.grid();
    let sigma = dual_values(w.values(), p);
    let pw = PrefixSums::new(grid, w.values());
    let ps = PrefixSums::new(grid, &sigma);
    let mut best = 0.0f64;
    for_each_cube(grid, family, |q| {
        let v = pw.avg(q) * pow_p_minus_one(ps.avg(q), p);
        best = best.max(v);
    });
    Ok(best)
}

#[inline]
fn pow_p_minus_one(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x
    } else {
        math::powf(x, p - 1.0)
    }
}

fn dual_values(w: &[f64], p: f64) -> Vec<f64> {
    if p == 2.0 {
        w.iter().map(|&x| 1.0 / x).collect()
    } else {
        let e = -1.0 / (p - 1.0);
        w.iter().map(|&x| math::powf(x, e)).collect()
    }
}

/// `max_x Mw(x)/w(x)` with `M` over the weight's family.
pub fn a1_constant(w: &Weight) -> f64 {
    let m = maximal_values(w.grid(), w.values(), &MaximalSpec::hardy_littlewood(w.family));
    m.iter().zip(w.values()).map(|(m, w)| m / w).fold(0.0, f64::max)
}

/// Fujii–Wilson constant over the weight's family.
pub fn ainf_constant(w: &Weight) -> Result<f64> {
    w.ainf()
}

fn ainf_uncached(w: &Weight) -> Result<f64> {
    let grid = w.grid();
    match (grid.dim(), w.family) {
        (1, CubeFamily::All) => Ok(ainf_intervals(w.values())),
        (_, CubeFamily::Dyadic) => Ok(ainf_dyadic(grid, w.values())),
        (_, family) => ainf_generic(grid, w.values(), family),
    }
}

/// All intervals. For `Q = [a, b]`, `M(wχ_Q)` only sees subintervals of `Q`
/// (anything longer holds no more mass and is longer). Growing `b` adds the
/// candidates `[c, b]`, `a ≤ c ≤ b`, and cell `x` can use those with `c ≤ x`.
fn ainf_intervals(w: &[f64]) -> f64 {
    let n = w.len();
    let mut pre = vec![0.0f64; n + 1];
    for i in 0..n {
        pre[i + 1] = pre[i] + w[i];
    }
    let mut m = vec![0.0f64; n];
    let mut best = 0.0f64;
    for a in 0..n {
        for b in a..n {
            m[b] = 0.0;
            let mut pm = 0.0f64;
            let mut total = 0.0;
            for x in a..=b {
                let avg = (pre[b + 1] - pre[x]) / (b + 1 - x) as f64;
                pm = pm.max(avg);
                if pm > m[x] {
                    m[x] = pm;
                }
                total += m[x];
            }
            best = best.max(total / (pre[b + 1] - pre[a]));
        }
    }
    best
}

/// Dyadic family: subcubes of `Q` are its dyadic descendants, and larger
/// dyadic cubes dilute `w χ_Q` below `⟨w⟩_Q`.
fn ainf_dyadic(grid: Grid, w: &[f64]) -> f64 {
    let tree = DyadicTree::new(grid);
    let p = PrefixSums::new(grid, w);
    let avg: Vec<f64> = (0..tree.len()).map(|id| p.avg(&tree.cube(id))).collect();
    let mut best = 0.0f64;
    let mut running = vec![0.0f64; tree.len()];
    for q in 0..tree.len() {
        let ids = tree.subtree(q);
        let mut total = 0.0;
        for &id in &ids {
            let mut v = avg[id];
            if id != q {
                v = v.max(running[tree.parent(id).expect("non-root")]);
            }
            running[id] = v;
            if tree.children(id).is_empty() {
                total += v;
            }
        }
        let mass = avg[q] * tree.cube(q).cell_count() as f64;
        best = best.max(total / mass);
    }
    best
}

/// Any family: every family cube `P` meeting `Q` spreads `∫_{P∩Q} w / |P|`
/// over `P ∩ Q`.
fn ainf_generic(grid: Grid, w: &[f64], family: CubeFamily) -> Result<f64> {
    let cubes = enumerate_cubes(grid, family);
    if cubes.len() > GENERIC_AINF_MAX_CUBES {
        return Err(Error::UnsupportedLevel {
            dim: grid.dim(),
            level: grid.level(),
        });
    }
    let n = grid.side();
    let dim = grid.dim();
    let p = PrefixSums::new(grid, w);
    let mut m = vec![0.0f64; grid.cell_count()];
    let mut best = 0.0f64;
    for q in &cubes {
        let (qo, qe) = (q.offset(), q.extent());
        for c in q.cells() {
            m[c] = 0.0;
        }
        for pc in &cubes {
            let (po, pe) = (pc.offset(), pc.extent());
            let mut lo = [0usize; 2];
            let mut hi = [1usize; 2];
            let mut empty = false;
            for ax in 0..dim {
                lo[ax] = qo[ax].max(po[ax]);
                hi[ax] = (qo[ax] + qe[ax]).min(po[ax] + pe[ax]);
                empty |= lo[ax] >= hi[ax];
            }
            if empty {
                continue;
            }
            let inter = p.box_sum(lo, hi);
            let v = inter / pc.cell_count() as f64;
            for r in lo[0]..hi[0] {
                if dim == 1 {
                    if v > m[r] {
                        m[r] = v;
                    }
                } else {
                    for c in lo[1]..hi[1] {
                        let i = r * n + c;
                        if v > m[i] {
                            m[i] = v;
                        }
                    }
                }
            }
        }
        let total: f64 = q.cells().map(|c| m[c]).sum();
        best = best.max(total / p.sum(q));
    }
    Ok(best)
}

/// `σ = w^{-1/(p-1)}`; exactly `1/w` for `p = 2`.
pub fn dual_weight(w: &Weight, p: f64) -> Result<Weight> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::param("p", p));
    }
    Ok(Weight::new(GridFunction::new(w.grid(), dual_values(w.values(), p))?)?.with_family(w.family))
}

/// `‖f‖_{L^p(w)} = (∫ |f|^p w)^{1/p}` for any nonnegative `w`.
pub fn weighted_norm(f: &GridFunction, w: &GridFunction, p: f64) -> Result<f64> {
    f.grid().check_same(&w.grid())?;
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::param("p", p));
    }
    let s: f64 = f
        .values()
        .iter()
        .zip(w.values())
        .map(|(&x, &wt)| math::powf(x.abs(), p) * wt)
        .sum::<f64>()
        * f.grid().cell_measure();
    Ok(math::powf(s, 1.0 / p))
}

/// `w({x : |f(x)| > λ})`.
pub fn superlevel_measure(f: &GridFunction, w: &GridFunction, lambda: f64) -> Result<f64> {
    f.grid().check_same(&w.grid())?;
    if !(lambda > 0.0) {
        return Err(Error::param("lambda", lambda));
    }
    Ok(f.values()
        .iter()
        .zip(w.values())
        .filter(|(x, _)| x.abs() > lambda)
        .map(|(_, &wt)| wt)
        .sum::<f64>()
        * f.grid().cell_measure())
}
