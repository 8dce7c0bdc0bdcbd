//! Hardy–Littlewood and Orlicz maximal operators, and the grand maximal
//! operators built from singular integrals.
//!
//! Grand maximal operators take their outer supremum over dyadic cubes only:
//! for each dyadic `Q` the masked operator is evaluated once, its maximum over
//! `Q` recorded, and the per-cell value is the maximum along the dyadic chain
//! of cubes containing the cell.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{for_each_cube, Cube, CubeFamily, DilationMode, DyadicTree, Grid, GridFunction};
use crate::kernels::KernelOperator;
use crate::orlicz::{luxemburg_abs, LocalFunctional};
use crate::prefix::PrefixSums;
use crate::{math, Error, Result};

/// A maximal operator `sup_{Q∋x} Φ(f, Q)` over a cube family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaximalSpec {
    pub functional: LocalFunctional,
    pub family: CubeFamily,
}

impl MaximalSpec {
    /// `M`.
    pub fn hardy_littlewood(family: CubeFamily) -> Self {
        MaximalSpec {
            functional: LocalFunctional::AVERAGE,
            family,
        }
    }

    /// `M_{L(log L)^β}`.
    pub fn orlicz(beta: f64, family: CubeFamily) -> Self {
        MaximalSpec {
            functional: LocalFunctional::Luxemburg(beta),
            family,
        }
    }

    /// `M_r g = (M |g|^r)^{1/r}`.
    pub fn power(r: f64, family: CubeFamily) -> Self {
        MaximalSpec {
            functional: LocalFunctional::Power(r),
            family,
        }
    }
}

pub fn maximal(f: &GridFunction, spec: &MaximalSpec) -> Result<GridFunction> {
    spec.functional.validate()?;
    GridFunction::new(f.grid(), maximal_values(f.grid(), f.values(), spec))
}

pub(crate) fn maximal_values(grid: Grid, v: &[f64], spec: &MaximalSpec) -> Vec<f64> {
    match spec.functional {
        LocalFunctional::Power(r) => power_maximal(grid, v, r, spec.family),
        LocalFunctional::Luxemburg(b) if b == 0.0 => power_maximal(grid, v, 1.0, spec.family),
        LocalFunctional::Luxemburg(b) => luxemburg_maximal(grid, v, b, spec.family),
    }
}

fn power_maximal(grid: Grid, v: &[f64], r: f64, family: CubeFamily) -> Vec<f64> {
    let a: Vec<f64> = if r == 1.0 {
        v.iter().map(|x| x.abs()).collect()
    } else {
        v.iter().map(|x| math::powf(x.abs(), r)).collect()
    };
    let p = PrefixSums::new(grid, &a);
    let n = grid.cell_count();
    let mut out = vec![0.0f64; n];
    if grid.dim() == 1 && family == CubeFamily::All {
        // For each left end a, sweep right ends downwards: the running max of
        // avg[a..=b'] over b' ≥ b is the best interval starting at a that
        // contains b.
        for lo in 0..n {
            let mut best = 0.0f64;
            for hi in (lo..n).rev() {
                let avg = p.range_sum(lo, hi + 1) / (hi + 1 - lo) as f64;
                best = best.max(avg);
                if best > out[hi] {
                    out[hi] = best;
                }
            }
        }
    } else {
        for_each_cube(grid, family, |q| {
            let avg = p.avg(q);
            scatter_max(&mut out, q, avg);
        });
    }
    if r != 1.0 {
        out.iter_mut().for_each(|x| *x = math::powf(*x, 1.0 / r));
    }
    out
}

#[inline]
fn scatter_max(out: &mut [f64], q: &Cube, value: f64) {
    match q.as_range() {
        Some(range) => out[range].iter_mut().for_each(|o| {
            if value > *o {
                *o = value;
            }
        }),
        None => {
            for c in q.cells() {
                if value > out[c] {
                    out[c] = value;
                }
            }
        }
    }
}

fn luxemburg_maximal(grid: Grid, v: &[f64], beta: f64, family: CubeFamily) -> Vec<f64> {
    let a: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let mut out = vec![0.0f64; grid.cell_count()];
    let mut buf = Vec::new();
    for_each_cube(grid, family, |q| {
        buf.clear();
        match q.as_range() {
            Some(r) => buf.extend_from_slice(&a[r]),
            None => buf.extend(q.cells().map(|c| a[c])),
        }
        let m = buf.len() as f64;
        let (sum, max) = buf.iter().fold((0.0, 0.0f64), |(s, u), &x| (s + x, u.max(x)));
        if sum == 0.0 {
            return;
        }
        let avg = sum / m;
        // The norm lies in [avg, avg log^β(e + max/avg)]; skip cubes whose
        // upper bound cannot raise any cell.
        let upper = avg * math::log_e_plus_pow(max / avg, beta);
        let floor = match q.as_range() {
            Some(r) => out[r].iter().copied().fold(f64::INFINITY, f64::min),
            None => q.cells().map(|c| out[c]).fold(f64::INFINITY, f64::min),
        };
        if upper <= floor {
            return;
        }
        let val = luxemburg_abs(&buf, beta);
        scatter_max(&mut out, q, val);
    });
    out
}

/// Options shared by the grand maximal operators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrandOptions {
    /// How the `3Q`, `9Q`, `27Q` masks treat the domain boundary.
    pub dilation: DilationMode,
    /// Cube family of the inner maximal operators (`M`, `M_{L(log L)^k}`).
    pub inner: CubeFamily,
}

impl Default for GrandOptions {
    fn default() -> Self {
        GrandOptions {
            dilation: DilationMode::Clip,
            inner: CubeFamily::Dyadic,
        }
    }
}

/// Composite grand maximal operators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GrandVariant {
    /// `sup_{Q∋x} max_{ξ∈Q} M_{L(log L)^β} T₁(f χ_{(9Q)^c})(ξ)`.
    Star(f64),
    /// `sup_{Q∋x} max_{ξ∈Q} |T₁(χ_{(9Q)^c} T₂(f χ_{(27Q)^c}))(ξ)|`.
    DoubleStar,
    /// `sup_{Q∋x} max_{ξ∈Q} M T₁(χ_{(9Q)^c} T₂(f χ_{(27Q)^c}))(ξ)`.
    DoubleStarM,
}

/// Per cell, the max of `value(Q)` over dyadic `Q` inside the subtree rooted
/// at `root` that contain the cell; zero outside the root.
pub(crate) fn dyadic_sup(tree: &DyadicTree, root: usize, mut value: impl FnMut(&Cube) -> f64) -> Vec<f64> {
    let mut per_id = vec![0.0f64; tree.len()];
    for id in tree.subtree(root) {
        per_id[id] = value(&tree.cube(id));
    }
    subtree_chain_max(tree, root, &per_id)
}

/// [`dyadic_sup`] with the per-cube values given by tree id.
pub(crate) fn subtree_chain_max(tree: &DyadicTree, root: usize, per_id: &[f64]) -> Vec<f64> {
    let ids = tree.subtree(root);
    // Subtree ids come coarse to fine, so parents are settled before children.
    let mut best = vec![0.0f64; tree.len()];
    for &id in &ids {
        let mut v = per_id[id];
        if id != root {
            v = v.max(best[tree.parent(id).expect("non-root has a parent")]);
        }
        best[id] = v;
    }
    let mut out = vec![0.0; tree.grid().cell_count()];
    let root_cube = tree.cube(root);
    for cell in root_cube.cells() {
        out[cell] = best[tree.leaf_of(cell)];
    }
    out
}

/// Nonzero entries of `v` on the cells where `keep` holds.
pub(crate) fn masked_nz(v: &[f64], keep: impl Fn(usize) -> bool) -> Vec<(usize, f64)> {
    v.iter()
        .enumerate()
        .filter(|&(j, &x)| x != 0.0 && keep(j))
        .map(|(j, &x)| (j, x))
        .collect()
}

/// `T(v)` evaluated on `rows` only (other entries left zero).
pub(crate) fn apply_rows(t: &KernelOperator, nz: &[(usize, f64)], rows: &Cube) -> Vec<f64> {
    let mut out = vec![0.0; t.grid().cell_count()];
    if !nz.is_empty() {
        t.matrix().apply_nz(nz, rows.cells(), &mut out);
    }
    out
}

pub(crate) fn apply_all(t: &KernelOperator, nz: &[(usize, f64)]) -> Vec<f64> {
    let cells = t.grid().cell_count();
    let mut out = vec![0.0; cells];
    if !nz.is_empty() {
        t.matrix().apply_nz(nz, 0..cells, &mut out);
    }
    out
}

pub(crate) fn max_abs_on(v: &[f64], q: &Cube) -> f64 {
    q.cells().map(|c| v[c].abs()).fold(0.0, f64::max)
}

fn check_pair(a: &KernelOperator, f: &GridFunction) -> Result<()> {
    a.grid().check_same(&f.grid())
}

/// `𝓜_T f(x) = sup_{Q∋x} max_{ξ∈Q} |T(f χ_{(3Q)^c})(ξ)|`.
pub fn grand_maximal(t: &KernelOperator, f: &GridFunction, opts: &GrandOptions) -> Result<GridFunction> {
    check_pair(t, f)?;
    let grid = f.grid();
    let tree = DyadicTree::new(grid);
    let mut err = None;
    let out = dyadic_sup(&tree, 0, |q| match q.dilate(3, opts.dilation) {
        Ok(q3) => {
            let nz = masked_nz(f.values(), |c| !q3.contains_cell(c));
            max_abs_on(&apply_rows(t, &nz, q), q)
        }
        Err(e) => {
            err = Some(e);
            0.0
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    GridFunction::new(grid, out)
}

/// Composite grand maximal operators `𝓜*`, `𝓜**`, `𝓜**_M`.
pub fn grand_maximal_composite(
    t1: &KernelOperator,
    t2: &KernelOperator,
    f: &GridFunction,
    variant: GrandVariant,
    opts: &GrandOptions,
) -> Result<GridFunction> {
    check_pair(t1, f)?;
    check_pair(t2, f)?;
    if let GrandVariant::Star(beta) = variant {
        LocalFunctional::luxemburg(beta)?;
    }
    let grid = f.grid();
    let tree = DyadicTree::new(grid);
    let inner_m = MaximalSpec::hardy_littlewood(opts.inner);
    let mut err = None;
    let out = dyadic_sup(&tree, 0, |q| {
        let dil = |l| q.dilate(l, opts.dilation);
        let res = (|| -> Result<f64> {
            let q9 = dil(9)?;
            Ok(match variant {
                GrandVariant::Star(beta) => {
                    let nz = masked_nz(f.values(), |c| !q9.contains_cell(c));
                    let u = apply_all(t1, &nz);
                    let m = maximal_values(grid, &u, &MaximalSpec::orlicz(beta, opts.inner));
                    max_abs_on(&m, q)
                }
                GrandVariant::DoubleStar | GrandVariant::DoubleStarM => {
                    let q27 = dil(27)?;
                    let nz = masked_nz(f.values(), |c| !q27.contains_cell(c));
                    let u = apply_all(t2, &nz);
                    let nz2 = masked_nz(&u, |c| !q9.contains_cell(c));
                    if variant == GrandVariant::DoubleStar {
                        max_abs_on(&apply_rows(t1, &nz2, q), q)
                    } else {
                        let w = apply_all(t1, &nz2);
                        max_abs_on(&maximal_values(grid, &w, &inner_m), q)
                    }
                }
            })
        })();
        res.unwrap_or_else(|e| {
            err = Some(e);
            0.0
        })
    });
    if let Some(e) = err {
        return Err(e);
    }
    GridFunction::new(grid, out)
}

/// `𝓜*(f, g)(x) = sup_{Q∋x} |Q|^{-1} ∫_Q M T₁(χ_{9Q} T₂(f χ_{(27Q)^c})) |g|`.
pub fn bisublinear_grand_maximal(
    t1: &KernelOperator,
    t2: &KernelOperator,
    f: &GridFunction,
    g: &GridFunction,
    opts: &GrandOptions,
) -> Result<GridFunction> {
    check_pair(t1, f)?;
    check_pair(t2, f)?;
    f.grid().check_same(&g.grid())?;
    let grid = f.grid();
    let tree = DyadicTree::new(grid);
    let inner_m = MaximalSpec::hardy_littlewood(opts.inner);
    let mut err = None;
    let out = dyadic_sup(&tree, 0, |q| {
        let res = (|| -> Result<f64> {
            if g.values().iter().all(|&x| x == 0.0) {
                return Ok(0.0);
            }
            let q9 = q.dilate(9, opts.dilation)?;
            let q27 = q.dilate(27, opts.dilation)?;
            let nz = masked_nz(f.values(), |c| !q27.contains_cell(c));
            let u = apply_all(t2, &nz);
            let nz2 = masked_nz(&u, |c| q9.contains_cell(c));
            let w = apply_all(t1, &nz2);
            let m = maximal_values(grid, &w, &inner_m);
            Ok(q.cells().map(|c| m[c] * g.values()[c].abs()).sum::<f64>() / q.cell_count() as f64)
        })();
        res.unwrap_or_else(|e| {
            err = Some(e);
            0.0
        })
    });
    if let Some(e) = err {
        return Err(e);
    }
    GridFunction::new(grid, out)
}

/// `max_x lhs(x)/rhs(x)`; cells with `lhs = 0` are skipped, and `lhs > 0`
/// with `rhs = 0` yields infinity.
pub fn pointwise_ratio(lhs: &[f64], rhs: &[f64]) -> Result<f64> {
    if lhs.len() != rhs.len() {
        return Err(Error::LengthMismatch {
            expected: lhs.len(),
            found: rhs.len(),
        });
    }
    Ok(lhs
        .iter()
        .zip(rhs)
        .filter(|(&l, _)| l > 0.0)
        .map(|(&l, &r)| if r > 0.0 { l / r } else { f64::INFINITY })
        .fold(0.0, f64::max))
}

/// Two-sided band `(min, max)` of `a/b` over cells where both are positive.
pub fn pointwise_band(a: &[f64], b: &[f64]) -> (f64, f64) {
    a.iter()
        .zip(b)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| x / y)
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)))
}

/// `|{x : M_{L(log L)^β} g(x) > λ}|` against `∫ (|g|/λ) log^β(e + |g|/λ)`:
/// returns `(lhs, rhs)`.
pub fn weak_type_sides(g: &GridFunction, beta: f64, family: CubeFamily, lambda: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0) {
        return Err(Error::param("lambda", lambda));
    }
    let m = maximal(g, &MaximalSpec::orlicz(beta, family))?;
    let cm = g.grid().cell_measure();
    let lhs = m.values().iter().filter(|&&v| v > lambda).count() as f64 * cm;
    let rhs = g
        .values()
        .iter()
        .map(|&v| crate::orlicz::young(v.abs() / lambda, beta))
        .sum::<f64>()
        * cm;
    Ok((lhs, rhs))
}

/// Iterated Hardy–Littlewood maximal function `M^k f`.
pub fn iterated(f: &GridFunction, k: usize, family: CubeFamily) -> Result<GridFunction> {
    let spec = MaximalSpec::hardy_littlewood(family);
    let mut cur = f.abs();
    for _ in 0..k {
        cur = maximal(&cur, &spec)?;
    }
    Ok(cur)
}
