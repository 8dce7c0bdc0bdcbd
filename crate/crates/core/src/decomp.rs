//! Calderón–Zygmund and Whitney decompositions on the dyadic grid.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{Cube, DyadicTree, Grid, GridFunction};
use crate::prefix::PrefixSums;
use crate::{math, Error, Result};

/// How bad parts are formed from the selected cubes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BadParts {
    /// `b_l = f χ_{Q_l}`, `g = f` off the cubes and `0` on them.
    #[default]
    Restriction,
    /// `b_l = (f - ⟨f⟩_{Q_l}) χ_{Q_l}`, `g = ⟨f⟩_{Q_l}` on `Q_l`.
    MeanZero,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CzOptions {
    /// Allow the starting cube itself to be selected.
    pub root_selectable: bool,
    pub bad_parts: BadParts,
    /// Exponent in `t_Q = ℓ(Q)^s`.
    pub s: f64,
}

impl Default for CzOptions {
    fn default() -> Self {
        CzOptions {
            root_selectable: true,
            bad_parts: BadParts::Restriction,
            s: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BadPart {
    pub cube: Cube,
    /// Full-grid values, supported in `cube`.
    pub values: GridFunction,
}

#[derive(Clone, Debug)]
pub struct CzResult {
    pub lambda: f64,
    /// Maximal dyadic cubes with `⟨|f|⟩_Q > λ`, in tree order.
    pub cubes: Vec<Cube>,
    pub good: GridFunction,
    pub bad: Vec<BadPart>,
    /// `t_{Q_l} = ℓ(Q_l)^s`, aligned with `cubes`.
    pub t: Vec<f64>,
}

impl CzResult {
    /// `Σ_l |Q_l|`.
    pub fn selected_measure(&self) -> f64 {
        self.cubes.iter().map(Cube::measure).sum()
    }

    /// Cells covered by the selected cubes.
    pub fn covered(&self) -> Vec<bool> {
        let mut out = vec![false; self.good.grid().cell_count()];
        for q in &self.cubes {
            q.cells().for_each(|c| out[c] = true);
        }
        out
    }

    /// `g + Σ b_l`.
    pub fn reassemble(&self) -> GridFunction {
        let mut v = self.good.values().to_vec();
        for b in &self.bad {
            for c in b.cube.cells() {
                v[c] += b.values.values()[c];
            }
        }
        GridFunction::new(self.good.grid(), v).expect("same grid")
    }
}

pub fn cz_decompose(f: &GridFunction, lambda: f64) -> Result<CzResult> {
    cz_decompose_with(f, lambda, &CzOptions::default())
}

pub fn cz_decompose_with(f: &GridFunction, lambda: f64, opts: &CzOptions) -> Result<CzResult> {
    cz_decompose_within(f, lambda, &f.grid().root(), opts)
}

/// Stopping time inside the dyadic cube `root`; cells outside `root` keep
/// `g = f`.
pub fn cz_decompose_within(f: &GridFunction, lambda: f64, root: &Cube, opts: &CzOptions) -> Result<CzResult> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::param("lambda", lambda));
    }
    if !(opts.s > 0.0) {
        return Err(Error::param("s", opts.s));
    }
    let grid = f.grid();
    grid.check_same(&root.grid())?;
    let abs: Vec<f64> = f.values().iter().map(|x| x.abs()).collect();
    let prefix = PrefixSums::new(grid, &abs);
    let cubes = stopping_cubes(grid, root, opts.root_selectable, |q| prefix.avg(q) > lambda)?;

    let mut good = f.values().to_vec();
    let mut bad = Vec::with_capacity(cubes.len());
    let mut t = Vec::with_capacity(cubes.len());
    for q in &cubes {
        let mut b = vec![0.0; grid.cell_count()];
        match opts.bad_parts {
            BadParts::Restriction => {
                for c in q.cells() {
                    b[c] = good[c];
                    good[c] = 0.0;
                }
            }
            BadParts::MeanZero => {
                let mean = f.integrate(q)? / q.measure();
                for c in q.cells() {
                    b[c] = good[c] - mean;
                    good[c] = mean;
                }
            }
        }
        bad.push(BadPart {
            cube: *q,
            values: GridFunction::new(grid, b)?,
        });
        t.push(math::powf(q.side_length(), opts.s));
    }
    Ok(CzResult {
        lambda,
        cubes,
        good: GridFunction::new(grid, good)?,
        bad,
        t,
    })
}

/// Maximal dyadic subcubes of `root` satisfying `select`, found top-down.
fn stopping_cubes(grid: Grid, root: &Cube, root_selectable: bool, select: impl Fn(&Cube) -> bool) -> Result<Vec<Cube>> {
    if !root.is_dyadic() {
        return Err(Error::NotDyadic);
    }
    let tree = DyadicTree::new(grid);
    let root_id = tree.id_of(root)?;
    let mut out = Vec::new();
    let mut stack = vec![root_id];
    while let Some(id) = stack.pop() {
        let q = tree.cube(id);
        if (id != root_id || root_selectable) && select(&q) {
            out.push(q);
            continue;
        }
        // Reverse so that children are visited in index order.
        stack.extend(tree.children(id).into_iter().rev());
    }
    Ok(out)
}

/// Maximal dyadic subcubes `P` of `root` with `|P ∩ E| > level·|P|`
/// (the root itself is never selected).
pub fn cz_set(grid: Grid, in_set: &[bool], level: f64, root: &Cube) -> Result<Vec<Cube>> {
    if in_set.len() != grid.cell_count() {
        return Err(Error::LengthMismatch {
            expected: grid.cell_count(),
            found: in_set.len(),
        });
    }
    let ind: Vec<f64> = in_set.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let prefix = PrefixSums::new(grid, &ind);
    stopping_cubes(grid, root, false, |q| prefix.avg(q) > level)
}

/// Whitney decomposition of an open set of cells.
#[derive(Clone, Debug)]
pub struct WhitneyResult {
    pub r: f64,
    pub omega: Vec<bool>,
    pub cubes: Vec<Cube>,
    /// `dist(Q_j, Ω^c)`, aligned with `cubes`.
    pub dist: Vec<f64>,
    /// Cells of `Ω` too close to `Ω^c` for any dyadic cube, even a single
    /// cell, to satisfy `5R diam Q ≤ dist(Q, Ω^c)`.
    pub residual: Vec<usize>,
    /// Max over `Ω` of `Σ_j χ_{RQ_j}`.
    pub max_overlap: usize,
}

impl WhitneyResult {
    /// `(min, max)` of `dist(Q_j, Ω^c) / diam Q_j`.
    pub fn band(&self) -> (f64, f64) {
        self.cubes
            .iter()
            .zip(&self.dist)
            .map(|(q, d)| d / q.diam())
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)))
    }

    /// Whether the residual is empty, i.e. the cubes cover `Ω`.
    pub fn covers(&self) -> bool {
        self.residual.is_empty()
    }
}

/// Level from which a Whitney cube of side `2^{-4}` fits the lower band in
/// the middle of the domain: `⌈log₂(16 · 5R√n)⌉`.
pub fn whitney_min_level(r: f64, dim: usize) -> u32 {
    math::ceil_log2(16.0 * 5.0 * r * math::sqrt(dim as f64))
}

/// Upper bound used for `Σ_j χ_{RQ_j}`: three dyadic scales can meet a
/// point, each contributing at most `(⌈R⌉ + 1)^n` cubes.
pub fn whitney_overlap_bound(r: f64, dim: usize) -> usize {
    let per_scale = (math::ceil(r) as usize + 1).pow(dim as u32);
    4 * per_scale
}

/// Chebyshev distance, in cells, from each cell to the nearest cell outside
/// the set (non-wrapping).
pub fn distance_to_complement(grid: Grid, in_set: &[bool]) -> Vec<usize> {
    let n = grid.side();
    let cells = grid.cell_count();
    let mut dist = vec![usize::MAX; cells];
    let mut queue = VecDeque::new();
    for (c, &inside) in in_set.iter().enumerate() {
        if !inside {
            dist[c] = 0;
            queue.push_back(c);
        }
    }
    let dim = grid.dim();
    while let Some(c) = queue.pop_front() {
        let [r, col] = grid.coords(c);
        let d = dist[c] + 1;
        let (rows, cols): (&[i64], &[i64]) = if dim == 1 {
            (&[-1, 1], &[0])
        } else {
            (&[-1, 0, 1], &[-1, 0, 1])
        };
        for &dr in rows {
            for &dc in cols {
                let (nr, nc) = (r as i64 + dr, col as i64 + dc);
                if nr < 0 || nc < 0 || nr >= n as i64 || (dim == 2 && nc >= n as i64) {
                    continue;
                }
                let nb = grid.index([nr as usize, nc as usize]);
                if dist[nb] > d {
                    dist[nb] = d;
                    queue.push_back(nb);
                }
            }
        }
    }
    dist
}

pub fn whitney_decompose(grid: Grid, in_set: &[bool], r: f64) -> Result<WhitneyResult> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::param("R", r));
    }
    if in_set.len() != grid.cell_count() {
        return Err(Error::LengthMismatch {
            expected: grid.cell_count(),
            found: in_set.len(),
        });
    }
    if !in_set.iter().any(|&b| b) {
        return Err(Error::EmptySet);
    }
    if in_set.iter().all(|&b| b) {
        return Err(Error::FullSet);
    }
    let h = grid.cell_width();
    let dt = distance_to_complement(grid, in_set);
    let tree = DyadicTree::new(grid);
    let leaf0 = tree.level_start(grid.level());

    // Cube distances in cells, bottom-up as the min over children.
    let mut dq = vec![usize::MAX; tree.len()];
    for cell in 0..grid.cell_count() {
        dq[leaf0 + cell] = dt[cell];
    }
    for id in (0..leaf0).rev() {
        dq[id] = tree.children(id).iter().map(|&c| dq[c]).min().expect("inner node");
    }
    let ok = |id: usize| -> bool {
        let q = tree.cube(id);
        5.0 * r * q.diam() <= dq[id] as f64 * h
    };
    let mut cubes = Vec::new();
    let mut dist = Vec::new();
    let mut covered = vec![false; grid.cell_count()];
    let mut sat = vec![false; tree.len()];
    for id in 0..tree.len() {
        sat[id] = ok(id);
        if sat[id] && (id == 0 || !sat[tree.parent(id).expect("non-root")]) {
            let q = tree.cube(id);
            q.cells().for_each(|c| covered[c] = true);
            dist.push(dq[id] as f64 * h);
            cubes.push(q);
        }
    }
    let residual: Vec<usize> = (0..grid.cell_count()).filter(|&c| in_set[c] && !covered[c]).collect();

    let mut overlap = vec![0usize; grid.cell_count()];
    for q in &cubes {
        let half = 0.5 * r * q.side_length();
        let (lo, hi) = scaled_cell_range(grid, q, half);
        for row in lo[0]..=hi[0] {
            for col in lo[1]..=hi[1] {
                let cell = grid.index([row, col]);
                if in_set[cell] {
                    overlap[cell] += 1;
                }
            }
        }
    }
    Ok(WhitneyResult {
        r,
        omega: in_set.to_vec(),
        cubes,
        dist,
        residual,
        max_overlap: overlap.into_iter().max().unwrap_or(0),
    })
}

/// Cell coordinate box whose midpoints lie within sup-distance `half` of the
/// centre of `q` (inclusive).
fn scaled_cell_range(grid: Grid, q: &Cube, half: f64) -> ([usize; 2], [usize; 2]) {
    let h = grid.cell_width();
    let n = grid.side() as i64;
    let mut lo = [0usize; 2];
    let mut hi = [0usize; 2];
    for ax in 0..grid.dim() {
        let centre = (q.offset()[ax] as f64 + 0.5 * q.side() as f64) * h;
        // Midpoint of cell i is (i + 0.5) h.
        let a = math::ceil((centre - half) / h - 0.5) as i64;
        let b = math::floor((centre + half) / h - 0.5) as i64;
        lo[ax] = a.clamp(0, n - 1) as usize;
        hi[ax] = b.clamp(0, n - 1) as usize;
    }
    (lo, hi)
}
