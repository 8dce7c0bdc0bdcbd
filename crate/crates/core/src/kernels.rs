//! Discretized singular integral operators and approximations to the identity.
//!
//! Every matrix stores kernel values already multiplied by the cell measure,
//! so `T[i][j] = K(x_i, x_j) · h^n` and applying an operator is a plain
//! matrix-vector product. Translation-invariant kernels are stored as a
//! stencil over cell offsets (Toeplitz on open grids, circulant on periodic
//! ones); everything else is dense row-major.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use once_cell::race::OnceBox;

use crate::grid::{Grid, GridFunction};
use crate::math;
use crate::{Error, Result};

const PI: f64 = core::f64::consts::PI;

/// Built-in operators and explicit matrices.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorSpec {
    /// `K(x,y) = 1/(x−y)` on the line; `π cot(π(x−y))` on the circle.
    Hilbert,
    /// `K(x,y) = (x_j − y_j)/|x−y|³` in the plane, `j ∈ {0, 1}`.
    Riesz2d { component: usize },
    /// `K(x,y) = Ω((x−y)/|x−y|)/|x−y|^n` with `Ω` tabulated: `[Ω(+1), Ω(−1)]`
    /// on the line, `m` equal angular sectors of `[0, 2π)` in the plane.
    Rough { omega: Vec<f64> },
    /// Explicit `N×N` operator matrix (kernel times cell measure), row-major.
    Matrix { values: Vec<f64> },
}

#[derive(Clone, Debug)]
enum Repr {
    Dense(Vec<f64>),
    /// Entry depends only on the cell offset `x_i − x_j`.
    Stencil(Vec<f64>),
}

/// Square matrix acting on grid functions.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    grid: Grid,
    repr: Repr,
}

impl KernelMatrix {
    pub fn dense(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let cells = grid.cell_count();
        if values.len() != cells * cells {
            return Err(Error::NonSquareMatrix {
                len: values.len(),
                cells,
            });
        }
        Ok(KernelMatrix {
            grid,
            repr: Repr::Dense(values),
        })
    }

    /// Translation-invariant matrix from a function of the signed cell
    /// offset; on periodic grids the offset is wrapped into `(−N/2, N/2]`.
    pub fn from_offsets(grid: Grid, f: impl Fn([i64; 2]) -> f64) -> Self {
        let n = grid.side() as i64;
        let mut sym = vec![0.0; stencil_len(grid)];
        let (lo, hi) = if grid.periodic() { (0, n - 1) } else { (-(n - 1), n - 1) };
        let (lo1, hi1) = if grid.dim() == 1 { (0, 0) } else { (lo, hi) };
        for d0 in lo..=hi {
            for d1 in lo1..=hi1 {
                let mut d = [d0, d1];
                if grid.periodic() {
                    for v in d.iter_mut().take(grid.dim()) {
                        if *v > n / 2 {
                            *v -= n;
                        }
                    }
                }
                sym[stencil_slot(grid, d0, d1)] = f(d);
            }
        }
        KernelMatrix {
            grid,
            repr: Repr::Stencil(sym),
        }
    }

    pub fn identity(grid: Grid) -> Self {
        Self::from_offsets(grid, |d| if d == [0, 0] { 1.0 } else { 0.0 })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn is_structured(&self) -> bool {
        matches!(self.repr, Repr::Stencil(_))
    }

    #[inline]
    fn stencil_index(&self, i: usize, j: usize) -> usize {
        let g = self.grid;
        let l = g.level();
        let mask = g.side() - 1;
        if g.dim() == 1 {
            stencil_slot(g, i as i64 - j as i64, 0)
        } else {
            let d0 = (i >> l) as i64 - (j >> l) as i64;
            let d1 = (i & mask) as i64 - (j & mask) as i64;
            stencil_slot(g, d0, d1)
        }
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match &self.repr {
            Repr::Dense(v) => v[i * self.grid.cell_count() + j],
            Repr::Stencil(s) => s[self.stencil_index(i, j)],
        }
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.grid.cell_count()).map(|j| self.entry(i, j)).collect()
    }

    /// `out[i] = Σ_j M[i][j] v[j]` for the listed rows, where `nz` holds the
    /// nonzero `(j, v[j])` in increasing `j`.
    pub fn apply_nz(&self, nz: &[(usize, f64)], rows: impl Iterator<Item = usize>, out: &mut [f64]) {
        let cells = self.grid.cell_count();
        match &self.repr {
            Repr::Dense(m) => {
                for i in rows {
                    let r = &m[i * cells..(i + 1) * cells];
                    out[i] = nz.iter().map(|&(j, v)| r[j] * v).sum();
                }
            }
            Repr::Stencil(s) if self.grid.dim() == 1 && !self.grid.periodic() => {
                let base = cells - 1;
                for i in rows {
                    out[i] = nz.iter().map(|&(j, v)| s[i + base - j] * v).sum();
                }
            }
            Repr::Stencil(s) => {
                for i in rows {
                    out[i] = nz.iter().map(|&(j, v)| s[self.stencil_index(i, j)] * v).sum();
                }
            }
        }
    }

    pub fn apply_values(&self, v: &[f64]) -> Vec<f64> {
        let nz = nonzeros(v);
        let mut out = vec![0.0; v.len()];
        self.apply_nz(&nz, 0..v.len(), &mut out);
        out
    }

    /// `Mᵀ v`.
    pub fn apply_transpose_values(&self, v: &[f64]) -> Vec<f64> {
        let cells = self.grid.cell_count();
        let nz = nonzeros(v);
        (0..cells)
            .map(|j| nz.iter().map(|&(i, x)| self.entry(i, j) * x).sum())
            .collect()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let cells = self.grid.cell_count();
        match &self.repr {
            Repr::Dense(v) => v.clone(),
            Repr::Stencil(_) => {
                let mut out = Vec::with_capacity(cells * cells);
                for i in 0..cells {
                    for j in 0..cells {
                        out.push(self.entry(i, j));
                    }
                }
                out
            }
        }
    }

    /// Matrix product `self · other` (quadrature of `∫ K₁(x,z) K₂(z,y) dz`).
    pub fn mul(&self, other: &KernelMatrix) -> Result<KernelMatrix> {
        self.grid.check_same(&other.grid)?;
        let g = self.grid;
        match (&self.repr, &other.repr) {
            (Repr::Stencil(a), Repr::Stencil(b)) if g.periodic() => Ok(KernelMatrix {
                grid: g,
                repr: Repr::Stencil(circular_convolution(g, a, b)),
            }),
            (Repr::Stencil(a), Repr::Stencil(b)) if g.dim() == 1 => Ok(KernelMatrix {
                grid: g,
                repr: Repr::Dense(toeplitz_product(g.side(), a, b)),
            }),
            _ => {
                let cells = g.cell_count();
                let a = self.to_dense();
                let b = other.to_dense();
                let mut c = vec![0.0; cells * cells];
                for i in 0..cells {
                    let ci = &mut c[i * cells..(i + 1) * cells];
                    for k in 0..cells {
                        let aik = a[i * cells + k];
                        if aik == 0.0 {
                            continue;
                        }
                        let bk = &b[k * cells..(k + 1) * cells];
                        for (x, &y) in ci.iter_mut().zip(bk) {
                            *x += aik * y;
                        }
                    }
                }
                Ok(KernelMatrix {
                    grid: g,
                    repr: Repr::Dense(c),
                })
            }
        }
    }

    fn zero_diagonal(&mut self) {
        let cells = self.grid.cell_count();
        match &mut self.repr {
            Repr::Dense(v) => {
                for i in 0..cells {
                    v[i * cells + i] = 0.0;
                }
            }
            Repr::Stencil(s) => {
                let z = stencil_slot(self.grid, 0, 0);
                s[z] = 0.0;
            }
        }
    }

    /// Row and column sums, for mass checks.
    pub fn row_sums(&self) -> Vec<f64> {
        let cells = self.grid.cell_count();
        (0..cells).map(|i| (0..cells).map(|j| self.entry(i, j)).sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let cells = self.grid.cell_count();
        (0..cells).map(|j| (0..cells).map(|i| self.entry(i, j)).sum()).collect()
    }

    /// `ℓ²` operator norm. Circulant matrices use their exact symbol, others
    /// power iteration on `MᵀM`.
    pub fn l2_norm(&self) -> f64 {
        match &self.repr {
            Repr::Stencil(s) if self.grid.periodic() => circulant_norm(self.grid, s),
            _ => power_iteration_norm(self),
        }
    }
}

fn stencil_len(g: Grid) -> usize {
    let n = g.side();
    let w = if g.periodic() { n } else { 2 * n - 1 };
    if g.dim() == 1 {
        w
    } else {
        w * w
    }
}

#[inline]
fn stencil_slot(g: Grid, d0: i64, d1: i64) -> usize {
    let n = g.side() as i64;
    if g.periodic() {
        let a = d0.rem_euclid(n) as usize;
        if g.dim() == 1 {
            a
        } else {
            a * n as usize + d1.rem_euclid(n) as usize
        }
    } else {
        let a = (d0 + n - 1) as usize;
        if g.dim() == 1 {
            a
        } else {
            a * (2 * n - 1) as usize + (d1 + n - 1) as usize
        }
    }
}

pub(crate) fn nonzeros(v: &[f64]) -> Vec<(usize, f64)> {
    v.iter()
        .enumerate()
        .filter(|(_, &x)| x != 0.0)
        .map(|(j, &x)| (j, x))
        .collect()
}

fn circular_convolution(g: Grid, a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = g.side();
    let mut c = vec![0.0; a.len()];
    if g.dim() == 1 {
        for (e, &ae) in a.iter().enumerate() {
            if ae == 0.0 {
                continue;
            }
            for (d, cd) in c.iter_mut().enumerate() {
                *cd += ae * b[(d + n - e) % n];
            }
        }
    } else {
        for e0 in 0..n {
            for e1 in 0..n {
                let ae = a[e0 * n + e1];
                if ae == 0.0 {
                    continue;
                }
                for d0 in 0..n {
                    let r = ((d0 + n - e0) % n) * n;
                    for d1 in 0..n {
                        c[d0 * n + d1] += ae * b[r + (d1 + n - e1) % n];
                    }
                }
            }
        }
    }
    c
}

/// Dense product of two `N×N` Toeplitz matrices with symbols `a(d)`, `b(d)`
/// stored at `d + N − 1`. Entries along each diagonal follow
/// `P[i+1][j+1] = P[i][j] + a(i+1) b(−1−j) − a(i−N+1) b(N−1−j)`; the
/// recurrence is restarted from a direct sum every `RESYNC` steps.
fn toeplitz_product(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    const RESYNC: usize = 128;
    let off = n as i64 - 1;
    let av = |d: i64| a[(d + off) as usize];
    let bv = |d: i64| b[(d + off) as usize];
    let direct = |i: usize, j: usize| -> f64 {
        (0..n as i64).map(|k| av(i as i64 - k) * bv(k - j as i64)).sum()
    };
    let mut p = vec![0.0; n * n];
    let walk = |i0: usize, j0: usize, p: &mut Vec<f64>| {
        let (mut i, mut j) = (i0, j0);
        let mut cur = direct(i, j);
        p[i * n + j] = cur;
        let mut step = 0;
        while i + 1 < n && j + 1 < n {
            step += 1;
            cur = if step % RESYNC == 0 {
                direct(i + 1, j + 1)
            } else {
                let ii = i as i64;
                let jj = j as i64;
                cur + av(ii + 1) * bv(-1 - jj) - av(ii - off) * bv(off - jj)
            };
            i += 1;
            j += 1;
            p[i * n + j] = cur;
        }
    };
    for j0 in 0..n {
        walk(0, j0, &mut p);
    }
    for i0 in 1..n {
        walk(i0, 0, &mut p);
    }
    p
}

fn circulant_norm(g: Grid, c: &[f64]) -> f64 {
    let n = g.side();
    let tw: Vec<(f64, f64)> = (0..n)
        .map(|m| {
            let th = 2.0 * PI * m as f64 / n as f64;
            (libm::cos(th), libm::sin(th))
        })
        .collect();
    let dft1 = |v: &[(f64, f64)], out: &mut [(f64, f64)]| {
        for (k, o) in out.iter_mut().enumerate() {
            let mut re = 0.0;
            let mut im = 0.0;
            for (d, &(vr, vi)) in v.iter().enumerate() {
                let (cr, sn) = tw[(k * d) % n];
                re += vr * cr + vi * sn;
                im += vi * cr - vr * sn;
            }
            *o = (re, im);
        }
    };
    if g.dim() == 1 {
        let v: Vec<(f64, f64)> = c.iter().map(|&x| (x, 0.0)).collect();
        let mut out = vec![(0.0, 0.0); n];
        dft1(&v, &mut out);
        out.iter().map(|&(r, i)| math::sqrt(r * r + i * i)).fold(0.0, f64::max)
    } else {
        let mut rows = vec![(0.0, 0.0); n * n];
        for d0 in 0..n {
            let v: Vec<(f64, f64)> = c[d0 * n..(d0 + 1) * n].iter().map(|&x| (x, 0.0)).collect();
            dft1(&v, &mut rows[d0 * n..(d0 + 1) * n]);
        }
        let mut best = 0.0f64;
        let mut col = vec![(0.0, 0.0); n];
        let mut out = vec![(0.0, 0.0); n];
        for k1 in 0..n {
            for d0 in 0..n {
                col[d0] = rows[d0 * n + k1];
            }
            dft1(&col, &mut out);
            for &(r, i) in &out {
                best = best.max(math::sqrt(r * r + i * i));
            }
        }
        best
    }
}

fn power_iteration_norm(m: &KernelMatrix) -> f64 {
    let cells = m.grid.cell_count();
    // Fixed pseudo-random start so the estimate is reproducible.
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut v: Vec<f64> = (0..cells)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 + 0.5
        })
        .collect();
    let norm = |x: &[f64]| math::sqrt(x.iter().map(|a| a * a).sum::<f64>());
    let n0 = norm(&v);
    v.iter_mut().for_each(|x| *x /= n0);
    let mut est = 0.0;
    for _ in 0..300 {
        let w = m.apply_transpose_values(&m.apply_values(&v));
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let next = math::sqrt(nw);
        v = w.into_iter().map(|x| x / nw).collect();
        if (next - est).abs() <= 1e-9 * next {
            return next;
        }
        est = next;
    }
    est
}

/// Zero-diagonal singular integral operator.
#[derive(Debug)]
pub struct KernelOperator {
    label: String,
    matrix: KernelMatrix,
    norm: OnceBox<f64>,
}

impl Clone for KernelOperator {
    fn clone(&self) -> Self {
        let norm = OnceBox::new();
        if let Some(v) = self.norm.get() {
            let _ = norm.set(alloc::boxed::Box::new(*v));
        }
        KernelOperator {
            label: self.label.clone(),
            matrix: self.matrix.clone(),
            norm,
        }
    }
}

/// Build an operator from a spec. The diagonal is always zeroed.
pub fn make_operator(grid: Grid, spec: &OperatorSpec) -> Result<KernelOperator> {
    let h = grid.cell_width();
    let matrix = match spec {
        OperatorSpec::Hilbert => {
            if grid.dim() != 1 {
                return Err(Error::UnsupportedDimension(grid.dim()));
            }
            if grid.periodic() {
                let n = grid.side() as i64;
                KernelMatrix::from_offsets(grid, move |d| {
                    if d[0] == 0 || 2 * d[0].abs() == n {
                        0.0
                    } else {
                        let x = PI * d[0] as f64 * h;
                        h * PI / math::tan(x)
                    }
                })
            } else {
                KernelMatrix::from_offsets(grid, |d| if d[0] == 0 { 0.0 } else { 1.0 / d[0] as f64 })
            }
        }
        OperatorSpec::Riesz2d { component } => {
            if grid.dim() != 2 {
                return Err(Error::UnsupportedDimension(grid.dim()));
            }
            if *component > 1 {
                return Err(Error::param("component", *component as f64));
            }
            let c = *component;
            KernelMatrix::from_offsets(grid, |d| {
                let r2 = (d[0] * d[0] + d[1] * d[1]) as f64;
                if r2 == 0.0 {
                    0.0
                } else {
                    d[c] as f64 / (r2 * math::sqrt(r2))
                }
            })
        }
        OperatorSpec::Rough { omega } => {
            if omega.is_empty() || (grid.dim() == 1 && omega.len() != 2) {
                return Err(Error::param("omega length", omega.len() as f64));
            }
            if omega.iter().any(|w| !w.is_finite()) {
                return Err(Error::NonFinite("omega"));
            }
            let om = omega.clone();
            if grid.dim() == 1 {
                KernelMatrix::from_offsets(grid, move |d| match d[0] {
                    0 => 0.0,
                    x if x > 0 => om[0] / x as f64,
                    x => om[1] / (-x) as f64,
                })
            } else {
                let m = om.len();
                KernelMatrix::from_offsets(grid, move |d| {
                    let r2 = (d[0] * d[0] + d[1] * d[1]) as f64;
                    if r2 == 0.0 {
                        return 0.0;
                    }
                    let mut th = math::atan2(d[1] as f64, d[0] as f64);
                    if th < 0.0 {
                        th += 2.0 * PI;
                    }
                    let k = ((th / (2.0 * PI)) * m as f64) as usize;
                    om[k.min(m - 1)] / r2
                })
            }
        }
        OperatorSpec::Matrix { values } => {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("operator matrix"));
            }
            KernelMatrix::dense(grid, values.clone())?
        }
    };
    let label = match spec {
        OperatorSpec::Hilbert => "hilbert",
        OperatorSpec::Riesz2d { .. } => "riesz2d",
        OperatorSpec::Rough { .. } => "rough",
        OperatorSpec::Matrix { .. } => "matrix",
    };
    Ok(KernelOperator::from_matrix(label, matrix))
}

impl KernelOperator {
    pub fn from_matrix(label: &str, mut matrix: KernelMatrix) -> Self {
        matrix.zero_diagonal();
        KernelOperator {
            label: String::from(label),
            matrix,
            norm: OnceBox::new(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn grid(&self) -> Grid {
        self.matrix.grid
    }

    pub fn matrix(&self) -> &KernelMatrix {
        &self.matrix
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix.entry(i, j)
    }

    /// `K(x_i, x_j)` (entry divided by the cell measure).
    pub fn kernel(&self, i: usize, j: usize) -> f64 {
        self.matrix.entry(i, j) / self.grid().cell_measure()
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.grid().check_same(&f.grid())?;
        GridFunction::new(self.grid(), self.matrix.apply_values(f.values()))
    }

    pub fn apply_values(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.apply_values(v)
    }

    /// Lazily computed `ℓ²` operator norm.
    pub fn l2_norm(&self) -> f64 {
        *self.norm.get_or_init(|| alloc::boxed::Box::new(self.matrix.l2_norm()))
    }

    /// Integer distance key of a pair: `|Δ|` in cells on the line, `|Δ|²`
    /// in the plane.
    #[inline]
    fn distance_key(&self, i: usize, j: usize) -> usize {
        let d = self.grid().cell_offset(i, j);
        if self.grid().dim() == 1 {
            d[0].unsigned_abs() as usize
        } else {
            (d[0] * d[0] + d[1] * d[1]) as usize
        }
    }

    fn max_key(&self) -> usize {
        let g = self.grid();
        let m = if g.periodic() { g.side() / 2 } else { g.side() - 1 };
        if g.dim() == 1 {
            m
        } else {
            2 * m * m
        }
    }

    fn key_distance(&self, key: usize) -> f64 {
        let h = self.grid().cell_width();
        if self.grid().dim() == 1 {
            key as f64 * h
        } else {
            math::sqrt(key as f64) * h
        }
    }

    /// Row `x` contributions `T[x][y] f(y)` accumulated per distance key.
    fn bucket_row(&self, x: usize, nz: &[(usize, f64)], buckets: &mut [f64]) {
        for &(y, v) in nz {
            if y != x {
                buckets[self.distance_key(x, y)] += self.matrix.entry(x, y) * v;
            }
        }
    }

    /// `T_ε f(x) = Σ_{|x−y| > ε} T[x][y] f(y)`.
    pub fn apply_truncated(&self, f: &GridFunction, eps: f64) -> Result<GridFunction> {
        self.grid().check_same(&f.grid())?;
        if !(eps >= 0.0) {
            return Err(Error::param("eps", eps));
        }
        let nz = nonzeros(f.values());
        let mut buckets = vec![0.0; self.max_key() + 1];
        let mut out = vec![0.0; self.grid().cell_count()];
        for (x, o) in out.iter_mut().enumerate() {
            buckets.iter_mut().for_each(|b| *b = 0.0);
            self.bucket_row(x, &nz, &mut buckets);
            let mut s = 0.0;
            for k in (1..buckets.len()).rev() {
                if self.key_distance(k) <= eps {
                    break;
                }
                s += buckets[k];
            }
            *o = s;
        }
        GridFunction::new(self.grid(), out)
    }

    /// `T* f = sup_ε |T_ε f|` over `ε = 0` and every realizable pair distance.
    /// Partial sums are formed exactly as in [`Self::apply_truncated`], so
    /// `T* f ≥ |T_ε f|` holds bit-for-bit.
    pub fn apply_truncated_maximal(&self, f: &GridFunction) -> Result<GridFunction> {
        self.grid().check_same(&f.grid())?;
        let nz = nonzeros(f.values());
        let full = self.matrix.apply_values(f.values());
        let mut buckets = vec![0.0; self.max_key() + 1];
        let mut out = vec![0.0; self.grid().cell_count()];
        for (x, o) in out.iter_mut().enumerate() {
            buckets.iter_mut().for_each(|b| *b = 0.0);
            self.bucket_row(x, &nz, &mut buckets);
            let mut s = 0.0;
            let mut best = full[x].abs();
            for k in (1..buckets.len()).rev() {
                s += buckets[k];
                best = best.max(s.abs());
            }
            *o = best;
        }
        GridFunction::new(self.grid(), out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtiKind {
    /// `a_t(x,y) = (4πt)^{-n/2} exp(−|x−y|²/(4t))`, image-summed on periodic grids.
    Heat,
    /// `A_t = I`, the degenerate family.
    Identity,
}

/// Approximation to the identity with its envelope and kernel-condition
/// constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtiFamily {
    pub kind: AtiKind,
    pub s: f64,
    pub eta: f64,
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
}

impl AtiFamily {
    pub fn heat() -> Self {
        AtiFamily {
            kind: AtiKind::Heat,
            s: 2.0,
            eta: 1.0,
            c1: 2.0,
            c2: 2.0,
            alpha: 1.0,
        }
    }

    pub fn identity() -> Self {
        AtiFamily {
            kind: AtiKind::Identity,
            ..Self::heat()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("s", self.s), ("eta", self.eta), ("c1", self.c1), ("c2", self.c2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, v));
            }
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::param("alpha", self.alpha));
        }
        Ok(())
    }

    /// Envelope profile `h(r)`; `(4π)^{-n/2} e^{−r²/4}` for the heat family.
    pub fn envelope(&self, dim: usize, r: f64) -> f64 {
        match self.kind {
            AtiKind::Heat => math::powf(4.0 * PI, -(dim as f64) / 2.0) * math::exp(-r * r / 4.0),
            AtiKind::Identity => 0.0,
        }
    }

    /// `t^{-n/s} h(r / t^{1/s})`.
    pub fn scaled_envelope(&self, dim: usize, t: f64, r: f64) -> f64 {
        let scale = math::powf(t, 1.0 / self.s);
        math::powf(t, -(dim as f64) / self.s) * self.envelope(dim, r / scale)
    }

    /// `r^{n+η} h(r)`, which must vanish as `r → ∞`.
    pub fn decay_tail(&self, dim: usize, r: f64) -> f64 {
        math::powf(r, dim as f64 + self.eta) * self.envelope(dim, r)
    }

    /// `t ∈ {4^{-k} : k = 1..L−2}`.
    pub fn default_sweep(level: u32) -> Vec<f64> {
        (1..level.saturating_sub(1) as i32).map(|k| math::powf(4.0, -(k as f64))).collect()
    }
}

/// Kernel matrix of `A_t` with its mass diagnostics.
#[derive(Clone, Debug)]
pub struct AtiKernel {
    pub matrix: KernelMatrix,
    pub t: f64,
    /// `1 − min` row sum, clamped at zero: mass lost off the domain.
    pub mass_defect: f64,
    /// `max` row sum `− 1`, clamped at zero.
    pub mass_excess: f64,
    /// `t^{1/s}` is below two cell widths.
    pub under_resolved: bool,
}

fn heat_1d(t: f64, x: f64, periodic: bool) -> f64 {
    let norm = 1.0 / math::sqrt(4.0 * PI * t);
    if !periodic {
        return norm * math::exp(-x * x / (4.0 * t));
    }
    // Images until exp(−m²/4t) drops far below double precision.
    let reach = (math::sqrt(4.0 * t * 45.0) + 2.0) as i64;
    let mut s = 0.0;
    for m in -reach..=reach {
        let y = x + m as f64;
        s += math::exp(-y * y / (4.0 * t));
    }
    norm * s
}

pub fn ati_kernel(grid: Grid, family: &AtiFamily, t: f64) -> Result<AtiKernel> {
    family.validate()?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::param("t", t));
    }
    let h = grid.cell_width();
    let matrix = match family.kind {
        AtiKind::Identity => KernelMatrix::identity(grid),
        AtiKind::Heat => {
            let periodic = grid.periodic();
            let dim = grid.dim();
            KernelMatrix::from_offsets(grid, |d| {
                let a = heat_1d(t, d[0] as f64 * h, periodic) * h;
                if dim == 1 {
                    a
                } else {
                    a * heat_1d(t, d[1] as f64 * h, periodic) * h
                }
            })
        }
    };
    let sums = matrix.row_sums();
    let min = sums.iter().copied().fold(f64::INFINITY, f64::min);
    let max = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(AtiKernel {
        matrix,
        t,
        mass_defect: (1.0 - min).max(0.0),
        mass_excess: (max - 1.0).max(0.0),
        under_resolved: under_resolved(grid, family, t),
    })
}

fn under_resolved(grid: Grid, family: &AtiFamily, t: f64) -> bool {
    family.kind == AtiKind::Heat && math::powf(t, 1.0 / family.s) < 2.0 * grid.cell_width()
}

/// Largest `|a_t(x,y)| − t^{-n/s} h(|x−y|/t^{1/s})` over all pairs; `≤ 0`
/// means the envelope bound holds everywhere.
pub fn envelope_excess(grid: Grid, family: &AtiFamily, t: f64) -> Result<f64> {
    let k = ati_kernel(grid, family, t)?;
    let cells = grid.cell_count();
    let m = grid.cell_measure();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..cells {
        for j in 0..cells {
            let a = k.matrix.entry(i, j).abs() / m;
            let env = family.scaled_envelope(grid.dim(), t, grid.distance(i, j));
            worst = worst.max(a - env);
        }
    }
    Ok(worst)
}

/// Kernel matrix of a composite `T A_t` or `D_t T`.
#[derive(Clone, Debug)]
pub struct Composite {
    pub matrix: KernelMatrix,
    pub t: f64,
    pub under_resolved: bool,
}

/// `K_t`, the kernel of `T A_t`.
pub fn composite_ta(op: &KernelOperator, family: &AtiFamily, t: f64) -> Result<Composite> {
    let a = ati_kernel(op.grid(), family, t)?;
    Ok(Composite {
        matrix: op.matrix().mul(&a.matrix)?,
        t,
        under_resolved: a.under_resolved,
    })
}

/// `K^t`, the kernel of `D_t T`.
pub fn composite_dt(op: &KernelOperator, family: &AtiFamily, t: f64) -> Result<Composite> {
    let a = ati_kernel(op.grid(), family, t)?;
    Ok(Composite {
        matrix: a.matrix.mul(op.matrix())?,
        t,
        under_resolved: a.under_resolved,
    })
}

/// Visit every `(x, y)` pair as `(x, y, distance)`; translation-invariant
/// pairs of two circulant matrices collapse to one column.
fn for_pairs(op: &KernelOperator, other: &KernelMatrix, mut visit: impl FnMut(usize, usize, f64)) {
    let g = op.grid();
    let cells = g.cell_count();
    let circulant = g.periodic() && op.matrix().is_structured() && other.is_structured();
    let ys = if circulant { 1 } else { cells };
    for y in 0..ys {
        for x in 0..cells {
            visit(x, y, g.distance(x, y));
        }
    }
}

/// `sup_y Σ_{|x−y| ≥ c₁ t^{1/s}} |K(x,y) − K_t(x,y)| dx`.
pub fn check_assumption_l1(op: &KernelOperator, family: &AtiFamily, t: f64) -> Result<f64> {
    let kt = composite_ta(op, family, t)?;
    let cut = family.c1 * math::powf(t, 1.0 / family.s);
    let cells = op.grid().cell_count();
    let mut col = vec![0.0; cells];
    for_pairs(op, &kt.matrix, |x, y, r| {
        if r >= cut {
            col[y] += (op.entry(x, y) - kt.matrix.entry(x, y)).abs();
        }
    });
    Ok(col.into_iter().fold(0.0, f64::max))
}

/// Which composite a pointwise check compares against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompositeSide {
    /// `K − K_t` with `K_t` the kernel of `T A_t`, cut-off `c₁`.
    TA,
    /// `K − K^t` with `K^t` the kernel of `D_t T`, cut-off `c₂`.
    DT,
}

/// Normalized pointwise sups of the kernel conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointwiseCheck {
    /// `sup |K − K_•|·|x−y|^{n+α} / t^{α/s}` over `|x−y| ≥ c t^{1/s}`.
    pub holder: f64,
    /// `sup |K_•|·t^{n/s}` over `|x−y| ≤ c t^{1/s}`.
    pub size: f64,
}

pub fn check_assumption_pointwise(
    op: &KernelOperator,
    family: &AtiFamily,
    t: f64,
    which: CompositeSide,
) -> Result<PointwiseCheck> {
    let (comp, c) = match which {
        CompositeSide::TA => (composite_ta(op, family, t)?, family.c1),
        CompositeSide::DT => (composite_dt(op, family, t)?, family.c2),
    };
    let g = op.grid();
    let n = g.dim() as f64;
    let m = g.cell_measure();
    let scale = math::powf(t, 1.0 / family.s);
    let cut = c * scale;
    let t_alpha = math::powf(t, family.alpha / family.s);
    let t_n = math::powf(t, n / family.s);
    let mut holder = 0.0f64;
    let mut size = 0.0f64;
    for_pairs(op, &comp.matrix, |x, y, r| {
        let kt = comp.matrix.entry(x, y) / m;
        if r >= cut && r > 0.0 {
            let k = op.entry(x, y) / m;
            holder = holder.max((k - kt).abs() * math::powf(r, n + family.alpha) / t_alpha);
        }
        if r <= cut {
            size = size.max(kt.abs() * t_n);
        }
    });
    Ok(PointwiseCheck { holder, size })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hilbert(level: u32, periodic: bool) -> KernelOperator {
        make_operator(Grid::new(1, level, periodic).unwrap(), &OperatorSpec::Hilbert).unwrap()
    }

    fn dense_oracle(dim: usize, level: u32, periodic: bool, spec: &OperatorSpec) -> (KernelOperator, Vec<f64>) {
        let g = Grid::new(dim, level, periodic).unwrap();
        let op = make_operator(g, spec).unwrap();
        let d = op.matrix().to_dense();
        (op, d)
    }

    #[test]
    fn hilbert_example_and_antisymmetry() {
        let op = hilbert(2, false);
        let g = op.grid();
        let f = GridFunction::new(g, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let tf = op.apply(&f).unwrap();
        assert_eq!(tf.values()[1], 0.25 / (0.375 - 0.125));
        for i in 0..4 {
            assert_eq!(op.entry(i, i), 0.0);
            for j in 0..4 {
                assert_eq!(op.entry(i, j), -op.entry(j, i));
            }
        }
        assert!(op.apply(&GridFunction::zeros(g)).unwrap().is_zero());
    }

    #[test]
    fn matrix_spec_must_be_square_and_gets_zero_diagonal() {
        let g = Grid::line(1).unwrap();
        let bad = OperatorSpec::Matrix { values: vec![1.0; 3] };
        assert!(matches!(make_operator(g, &bad), Err(Error::NonSquareMatrix { .. })));
        let ok = OperatorSpec::Matrix { values: vec![5.0, 1.0, 2.0, 7.0] };
        let op = make_operator(g, &ok).unwrap();
        assert_eq!(op.matrix().to_dense(), vec![0.0, 1.0, 2.0, 0.0]);
    }

    #[test]
    fn truncated_maximal_example() {
        let op = hilbert(2, false);
        let f = GridFunction::new(op.grid(), vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let ts = op.apply_truncated_maximal(&f).unwrap();
        // Brute force over ε ∈ {0, 1/4, 1/2, 3/4}: the only term at cell 3 is 1/3.
        let mut best = 0.0f64;
        for e in [0.0, 0.25, 0.5, 0.75] {
            let v = if 0.75 > e { 0.25 / 0.75 } else { 0.0 };
            best = best.max(f64::abs(v));
        }
        assert_eq!(ts.values()[3], best);
    }

    #[test]
    fn truncated_maximal_dominates_every_truncation() {
        for (dim, periodic) in [(1, false), (1, true), (2, false)] {
            let g = Grid::new(dim, 3, periodic).unwrap();
            let spec = if dim == 1 { OperatorSpec::Hilbert } else { OperatorSpec::Riesz2d { component: 1 } };
            let op = make_operator(g, &spec).unwrap();
            let f = GridFunction::from_fn(g, |p| libm::sin(13.0 * p[0] + 7.0 * p[1]) - 0.2);
            let ts = op.apply_truncated_maximal(&f).unwrap();
            let tf = op.apply(&f).unwrap();
            for e in [0.0, 0.1, 0.2, 0.3, 0.5, 0.9] {
                let te = op.apply_truncated(&f, e).unwrap();
                for x in 0..g.cell_count() {
                    assert!(ts.values()[x] >= te.values()[x].abs());
                }
            }
            for x in 0..g.cell_count() {
                assert!(ts.values()[x] >= tf.values()[x].abs());
            }
        }
    }

    #[test]
    fn structured_products_match_dense() {
        let fam = AtiFamily::heat();
        for (dim, level, periodic) in [(1, 5, false), (1, 5, true), (2, 3, true), (2, 2, false)] {
            let spec = if dim == 1 { OperatorSpec::Hilbert } else { OperatorSpec::Riesz2d { component: 0 } };
            let (op, kd) = dense_oracle(dim, level, periodic, &spec);
            let g = op.grid();
            let a = ati_kernel(g, &fam, 0.01).unwrap().matrix;
            let ad = a.to_dense();
            let cells = g.cell_count();
            let got = composite_ta(&op, &fam, 0.01).unwrap().matrix;
            for i in 0..cells {
                for j in 0..cells {
                    let want: f64 = (0..cells).map(|k| kd[i * cells + k] * ad[k * cells + j]).sum();
                    assert!((got.entry(i, j) - want).abs() < 1e-12, "{dim} {periodic} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn toeplitz_recurrence_survives_resync_boundaries() {
        let n = 300;
        let a: Vec<f64> = (0..2 * n - 1).map(|k| libm::sin(k as f64 * 0.37) / (1.0 + k as f64)).collect();
        let b: Vec<f64> = (0..2 * n - 1).map(|k| libm::cos(k as f64 * 0.11)).collect();
        let p = toeplitz_product(n, &a, &b);
        for &(i, j) in &[(0, 0), (129, 130), (299, 299), (257, 3), (5, 260), (200, 100)] {
            let want: f64 = (0..n)
                .map(|k| a[(i as i64 - k as i64 + n as i64 - 1) as usize] * b[(k as i64 - j as i64 + n as i64 - 1) as usize])
                .sum();
            assert!((p[i * n + j] - want).abs() < 1e-11, "({i},{j})");
        }
    }

    #[test]
    fn heat_family_properties() {
        let fam = AtiFamily::heat();
        let gp = Grid::new(1, 6, true).unwrap();
        let k = ati_kernel(gp, &fam, 0.01).unwrap();
        let ones = k.matrix.apply_values(&vec![1.0; 64]);
        assert!(ones.iter().all(|v| (v - 1.0).abs() < 1e-8));
        let g = Grid::line(6).unwrap();
        let k = ati_kernel(g, &fam, 0.01).unwrap();
        for i in 0..64 {
            for j in 0..64 {
                assert_eq!(k.matrix.entry(i, j), k.matrix.entry(j, i));
            }
        }
        assert!(k.mass_defect > 0.0 && k.mass_defect < 0.5);
        assert!(!k.under_resolved);
        assert!(ati_kernel(g, &fam, 1e-5).unwrap().under_resolved);
        // Open-grid heat kernel equals its envelope up to rounding.
        assert!(envelope_excess(g, &fam, 0.01).unwrap().abs() < 1e-12);
        assert!(fam.decay_tail(1, 40.0) < 1e-100);
    }

    #[test]
    fn degenerate_family_checks_vanish() {
        let op = hilbert(6, false);
        let id = AtiFamily::identity();
        assert_eq!(check_assumption_l1(&op, &id, 0.01).unwrap(), 0.0);
        let pc = check_assumption_pointwise(&op, &id, 0.01, CompositeSide::DT).unwrap();
        assert_eq!(pc.holder, 0.0);
    }

    #[test]
    fn threshold_scales_with_sqrt_t() {
        let fam = AtiFamily::heat();
        for t in [1.0 / 64.0, 1.0 / 16.0] {
            let a = fam.c1 * math::powf(t, 1.0 / fam.s);
            let b = fam.c1 * math::powf(4.0 * t, 1.0 / fam.s);
            assert_eq!(b, 2.0 * a);
        }
        assert_eq!(AtiFamily::default_sweep(5), vec![0.25, 0.0625, 0.015625]);
    }

    #[test]
    fn circulant_norm_matches_power_iteration() {
        let op = hilbert(6, true);
        let exact = op.l2_norm();
        let dense = KernelMatrix::dense(op.grid(), op.matrix().to_dense()).unwrap();
        let approx = power_iteration_norm(&dense);
        assert!((exact - approx).abs() < 1e-3 * exact, "{exact} {approx}");
        // Periodic Hilbert symbol is bounded by π.
        assert!(exact <= PI + 1e-9);
    }
}
