//! Uniform dyadic grids over `[0,1)^n`, piecewise-constant grid functions and
//! grid-aligned cubes.
//!
//! Cells are indexed row-major: in two dimensions cell `(r, c)` has flat index
//! `r * N + c` where `N = 2^L` is the number of cells per axis. Axis 0 is the
//! row axis.

use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Geometry shared by every object that lives on the same discrete domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    dim: u8,
    level: u8,
    periodic: bool,
}

impl Grid {
    pub const MAX_LEVEL_1D: u32 = 20;
    pub const MAX_LEVEL_2D: u32 = 10;

    pub fn new(dim: usize, level: u32, periodic: bool) -> Result<Self> {
        let max = match dim {
            1 => Self::MAX_LEVEL_1D,
            2 => Self::MAX_LEVEL_2D,
            _ => return Err(Error::UnsupportedDimension(dim)),
        };
        if level > max {
            return Err(Error::UnsupportedLevel { dim, level });
        }
        Ok(Grid {
            dim: dim as u8,
            level: level as u8,
            periodic,
        })
    }

    /// Non-periodic one-dimensional grid with `2^level` cells.
    pub fn line(level: u32) -> Result<Self> {
        Self::new(1, level, false)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn level(&self) -> u32 {
        self.level as u32
    }

    #[inline]
    pub fn periodic(&self) -> bool {
        self.periodic
    }

    /// Same geometry with the periodic flag replaced.
    pub fn with_periodic(self, periodic: bool) -> Self {
        Grid { periodic, ..self }
    }

    /// Cells per axis, `N = 2^L`.
    #[inline]
    pub fn side(&self) -> usize {
        1usize << self.level
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    #[inline]
    pub fn cell_width(&self) -> f64 {
        1.0 / self.side() as f64
    }

    #[inline]
    pub fn cell_measure(&self) -> f64 {
        let h = self.cell_width();
        if self.dim == 1 {
            h
        } else {
            h * h
        }
    }

    #[inline]
    pub fn coords(&self, cell: usize) -> [usize; 2] {
        if self.dim == 1 {
            [cell, 0]
        } else {
            let n = self.side();
            [cell / n, cell % n]
        }
    }

    #[inline]
    pub fn index(&self, coords: [usize; 2]) -> usize {
        if self.dim == 1 {
            coords[0]
        } else {
            coords[0] * self.side() + coords[1]
        }
    }

    pub fn midpoint(&self, cell: usize) -> [f64; 2] {
        let h = self.cell_width();
        let c = self.coords(cell);
        let y = if self.dim == 1 { 0.0 } else { (c[1] as f64 + 0.5) * h };
        [(c[0] as f64 + 0.5) * h, y]
    }

    /// Signed per-axis cell offset `x_i - x_j`; on periodic grids the offset
    /// is wrapped into `(-N/2, N/2]`.
    #[inline]
    pub fn cell_offset(&self, i: usize, j: usize) -> [i64; 2] {
        let a = self.coords(i);
        let b = self.coords(j);
        let n = self.side() as i64;
        let mut d = [a[0] as i64 - b[0] as i64, a[1] as i64 - b[1] as i64];
        if self.periodic {
            for v in d.iter_mut() {
                *v = v.rem_euclid(n);
                if *v > n / 2 {
                    *v -= n;
                }
            }
        }
        d
    }

    /// Euclidean distance between cell midpoints (periodic-aware).
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let d = self.cell_offset(i, j);
        let h = self.cell_width();
        math::sqrt((d[0] * d[0] + d[1] * d[1]) as f64) * h
    }

    /// Sup-norm distance between cell midpoints, in cells (periodic-aware).
    pub fn sup_distance_cells(&self, i: usize, j: usize) -> usize {
        let d = self.cell_offset(i, j);
        d[0].unsigned_abs().max(d[1].unsigned_abs()) as usize
    }

    /// The whole domain as a (dyadic, level-0) cube.
    pub fn root(&self) -> Cube {
        Cube::dyadic(*self, 0, [0, 0]).expect("root cube is always valid")
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GeometryMismatch)
        }
    }
}

/// How a cube relates to the domain after construction or dilation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Interior,
    Clipped,
    Wrapped,
}

/// Treatment of dilated cubes that leave the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum DilationMode {
    #[default]
    Clip,
    Wrap,
}

/// Grid-aligned axis-parallel cube.
///
/// A cube keeps its nominal placement (`anchor`, `side`) so that dilation is
/// always about the true center, and separately the realized cell range
/// (`offset`, `extent`) after clipping or wrapping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cube {
    grid: Grid,
    anchor: [i64; 2],
    side: usize,
    offset: [usize; 2],
    extent: [usize; 2],
    dyadic: bool,
    boundary: Boundary,
}

impl Cube {
    /// Cube with lower corner `offset` (in cells) and `side` cells per axis.
    ///
    /// On a periodic grid offsets are taken modulo `N`; on a non-periodic grid
    /// the cube must lie inside the domain.
    pub fn new(grid: Grid, offset: [i64; 2], side: usize) -> Result<Self> {
        if side == 0 {
            return Err(Error::param("side", 0.0));
        }
        let n = grid.side() as i64;
        let inside = (0..grid.dim()).all(|a| offset[a] >= 0 && offset[a] + side as i64 <= n);
        let anchor = if grid.dim() == 1 { [offset[0], 0] } else { offset };
        if inside {
            let mut c = Self::realize(grid, anchor, side, DilationMode::Clip);
            c.dyadic = side.is_power_of_two() && (0..grid.dim()).all(|a| anchor[a] as usize % side == 0);
            Ok(c)
        } else if grid.periodic() {
            Ok(Self::realize(grid, anchor, side, DilationMode::Wrap))
        } else {
            Err(Error::CubeOutOfRange)
        }
    }

    /// Dyadic cube of generation `k` (side `N / 2^k`) at position `pos` among
    /// the `2^k` cubes per axis of that generation.
    pub fn dyadic(grid: Grid, k: u32, pos: [usize; 2]) -> Result<Self> {
        if k > grid.level() {
            return Err(Error::UnsupportedLevel { dim: grid.dim(), level: k });
        }
        let count = 1usize << k;
        if (0..grid.dim()).any(|a| pos[a] >= count) {
            return Err(Error::CubeOutOfRange);
        }
        let side = grid.side() >> k;
        let anchor = [
            (pos[0] * side) as i64,
            if grid.dim() == 1 { 0 } else { (pos[1] * side) as i64 },
        ];
        let mut c = Self::realize(grid, anchor, side, DilationMode::Clip);
        c.dyadic = true;
        Ok(c)
    }

    fn realize(grid: Grid, anchor: [i64; 2], side: usize, mode: DilationMode) -> Self {
        let n = grid.side() as i64;
        let mut offset = [0usize; 2];
        let mut extent = [1usize; 2];
        let mut interior = true;
        for a in 0..grid.dim() {
            let lo = anchor[a];
            let hi = anchor[a] + side as i64;
            if lo < 0 || hi > n {
                interior = false;
            }
            match mode {
                DilationMode::Clip => {
                    let l = lo.max(0);
                    let h = hi.min(n);
                    offset[a] = l as usize;
                    extent[a] = (h - l).max(0) as usize;
                }
                DilationMode::Wrap => {
                    if side as i64 >= n {
                        offset[a] = 0;
                        extent[a] = n as usize;
                    } else {
                        offset[a] = lo.rem_euclid(n) as usize;
                        extent[a] = side;
                    }
                }
            }
        }
        let boundary = if interior {
            Boundary::Interior
        } else {
            match mode {
                DilationMode::Clip => Boundary::Clipped,
                DilationMode::Wrap => Boundary::Wrapped,
            }
        };
        Cube {
            grid,
            anchor,
            side,
            offset,
            extent,
            dyadic: false,
            boundary,
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Nominal side in cells (before clipping).
    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    /// Realized lower corner in cells.
    #[inline]
    pub fn offset(&self) -> [usize; 2] {
        self.offset
    }

    /// Realized number of cells per axis.
    #[inline]
    pub fn extent(&self) -> [usize; 2] {
        self.extent
    }

    #[inline]
    pub fn is_dyadic(&self) -> bool {
        self.dyadic
    }

    #[inline]
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Dyadic generation `k` (side `N / 2^k`) when the cube is dyadic.
    pub fn generation(&self) -> Option<u32> {
        self.dyadic
            .then(|| self.grid.level() - self.side.trailing_zeros())
    }

    /// `ℓ(Q)`, nominal side length.
    pub fn side_length(&self) -> f64 {
        self.side as f64 * self.grid.cell_width()
    }

    /// `diam Q = √n ℓ(Q)`.
    pub fn diam(&self) -> f64 {
        math::sqrt(self.grid.dim() as f64) * self.side_length()
    }

    pub fn cell_count(&self) -> usize {
        (0..self.grid.dim()).map(|a| self.extent[a]).product()
    }

    /// Lebesgue measure of the realized cube.
    pub fn measure(&self) -> f64 {
        self.cell_count() as f64 * self.grid.cell_measure()
    }

    /// `λQ`: same center, side multiplied by `lambda` (odd), then clipped or
    /// wrapped according to `mode`.
    pub fn dilate(&self, lambda: usize, mode: DilationMode) -> Result<Cube> {
        if lambda == 0 || lambda % 2 == 0 {
            return Err(Error::InvalidDilation(lambda));
        }
        if mode == DilationMode::Wrap && !self.grid.periodic() {
            return Err(Error::WrapOnOpenGrid);
        }
        if lambda == 1 {
            return Ok(*self);
        }
        let grow = ((lambda - 1) / 2 * self.side) as i64;
        let mut anchor = self.anchor;
        for a in anchor.iter_mut().take(self.grid.dim()) {
            *a -= grow;
        }
        Ok(Self::realize(self.grid, anchor, self.side * lambda, mode))
    }

    #[inline]
    pub fn contains_cell(&self, cell: usize) -> bool {
        let c = self.grid.coords(cell);
        let n = self.grid.side();
        (0..self.grid.dim()).all(|a| (c[a] + n - self.offset[a]) % n < self.extent[a])
    }

    /// Cell-set containment.
    pub fn contains(&self, other: &Cube) -> bool {
        let n = self.grid.side();
        (0..self.grid.dim()).all(|a| {
            self.extent[a] == n
                || (other.offset[a] + n - self.offset[a]) % n + other.extent[a] <= self.extent[a]
        })
    }

    /// Contiguous flat index range of a non-wrapped one-dimensional cube.
    pub fn as_range(&self) -> Option<core::ops::Range<usize>> {
        (self.grid.dim() == 1 && self.offset[0] + self.extent[0] <= self.grid.side())
            .then(|| self.offset[0]..self.offset[0] + self.extent[0])
    }

    /// Flat indices of the realized cells, row-major.
    pub fn cells(&self) -> Cells {
        Cells {
            n: self.grid.side(),
            dim: self.grid.dim(),
            offset: self.offset,
            extent: self.extent,
            pos: [0, 0],
            done: self.cell_count() == 0,
        }
    }

    /// Dyadic children (`2^n` of them); empty for single cells.
    pub fn children(&self) -> Result<Vec<Cube>> {
        if !self.dyadic {
            return Err(Error::NotDyadic);
        }
        if self.side == 1 {
            return Ok(Vec::new());
        }
        let h = self.side / 2;
        let mut out = Vec::with_capacity(1 << self.grid.dim());
        let ys: &[usize] = if self.grid.dim() == 1 { &[0] } else { &[0, 1] };
        for dx in 0..2 {
            for &dy in ys {
                let anchor = [
                    self.anchor[0] + (dx * h) as i64,
                    self.anchor[1] + (dy * h) as i64,
                ];
                let mut c = Self::realize(self.grid, anchor, h, DilationMode::Clip);
                c.dyadic = true;
                out.push(c);
            }
        }
        Ok(out)
    }

    /// Dyadic parent, `None` for the root.
    pub fn parent(&self) -> Result<Option<Cube>> {
        let k = self.generation().ok_or(Error::NotDyadic)?;
        if k == 0 {
            return Ok(None);
        }
        let side = self.side * 2;
        let mut pos = [0usize; 2];
        for (a, p) in pos.iter_mut().enumerate().take(self.grid.dim()) {
            *p = self.offset[a] / side;
        }
        Cube::dyadic(self.grid, k - 1, pos).map(Some)
    }
}

/// Iterator over the flat cell indices of a [`Cube`].
#[derive(Clone, Debug)]
pub struct Cells {
    n: usize,
    dim: usize,
    offset: [usize; 2],
    extent: [usize; 2],
    pos: [usize; 2],
    done: bool,
}

impl Iterator for Cells {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.done {
            return None;
        }
        let r = (self.offset[0] + self.pos[0]) % self.n;
        let out = if self.dim == 1 {
            self.pos[0] += 1;
            if self.pos[0] == self.extent[0] {
                self.done = true;
            }
            r
        } else {
            let c = (self.offset[1] + self.pos[1]) % self.n;
            self.pos[1] += 1;
            if self.pos[1] == self.extent[1] {
                self.pos[1] = 0;
                self.pos[0] += 1;
                if self.pos[0] == self.extent[0] {
                    self.done = true;
                }
            }
            r * self.n + c
        };
        Some(out)
    }
}

/// Index sets standing in for "sup over all cubes".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CubeFamily {
    /// Dyadic cubes of generations `0..=L`.
    Dyadic,
    /// Every grid-aligned cube that fits in the domain.
    All,
    /// Grid-aligned cubes with power-of-two side at every cell offset.
    PowerOfTwoSides,
}

impl CubeFamily {
    /// Default family for weight constants: all intervals in one dimension,
    /// power-of-two squares in two.
    pub fn default_for(grid: Grid) -> Self {
        if grid.dim() == 1 {
            CubeFamily::All
        } else {
            CubeFamily::PowerOfTwoSides
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CubeFamily::Dyadic => "dyadic",
            CubeFamily::All => "all",
            CubeFamily::PowerOfTwoSides => "pow2",
        }
    }

    /// Whether the family contains every cube of the given side.
    pub(crate) fn admits_side(&self, side: usize) -> bool {
        match self {
            CubeFamily::All => true,
            _ => side.is_power_of_two(),
        }
    }
}

/// Visit every cube of a family without materializing the list, in the
/// order of [`enumerate_cubes`].
pub fn for_each_cube(grid: Grid, family: CubeFamily, mut visit: impl FnMut(&Cube)) {
    let n = grid.side();
    match family {
        CubeFamily::Dyadic => {
            let tree = DyadicTree::new(grid);
            for id in 0..tree.len() {
                visit(&tree.cube(id));
            }
        }
        CubeFamily::All | CubeFamily::PowerOfTwoSides => {
            for side in (1..=n).filter(|&s| family.admits_side(s)) {
                let span = n - side + 1;
                let rows = if grid.dim() == 1 { 1 } else { span };
                for a in 0..span {
                    for b in 0..rows {
                        let c = Cube::new(grid, [a as i64, b as i64], side).expect("in range by construction");
                        visit(&c);
                    }
                }
            }
        }
    }
}

/// Enumerate a cube family. Dyadic cubes come root first, the other families
/// by increasing side, then row-major offset.
pub fn enumerate_cubes(grid: Grid, family: CubeFamily) -> Vec<Cube> {
    let mut out = Vec::new();
    for_each_cube(grid, family, |c| out.push(*c));
    out
}

/// Flat indexing of all dyadic cubes of a grid, coarse to fine.
///
/// Generation `k` holds `2^{nk}` cubes, numbered row-major after the
/// `Σ_{j<k} 2^{nj}` cubes of coarser generations.
#[derive(Clone, Copy, Debug)]
pub struct DyadicTree {
    grid: Grid,
}

impl DyadicTree {
    pub fn new(grid: Grid) -> Self {
        DyadicTree { grid }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    fn per_gen(&self, k: u32) -> usize {
        1usize << (self.grid.dim() as u32 * k)
    }

    pub fn len(&self) -> usize {
        self.level_start(self.grid.level() + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// First id of generation `k`.
    pub fn level_start(&self, k: u32) -> usize {
        (0..k).map(|j| self.per_gen(j)).sum()
    }

    pub fn id(&self, k: u32, pos: [usize; 2]) -> usize {
        let per_axis = 1usize << k;
        let local = if self.grid.dim() == 1 { pos[0] } else { pos[0] * per_axis + pos[1] };
        self.level_start(k) + local
    }

    pub fn locate(&self, id: usize) -> (u32, [usize; 2]) {
        let mut k = 0;
        let mut start = 0;
        while start + self.per_gen(k) <= id {
            start += self.per_gen(k);
            k += 1;
        }
        let local = id - start;
        let per_axis = 1usize << k;
        let pos = if self.grid.dim() == 1 {
            [local, 0]
        } else {
            [local / per_axis, local % per_axis]
        };
        (k, pos)
    }

    pub fn cube(&self, id: usize) -> Cube {
        let (k, pos) = self.locate(id);
        Cube::dyadic(self.grid, k, pos).expect("valid dyadic id")
    }

    pub fn id_of(&self, cube: &Cube) -> Result<usize> {
        let k = cube.generation().ok_or(Error::NotDyadic)?;
        let side = cube.side();
        Ok(self.id(k, [cube.offset()[0] / side, cube.offset()[1] / side]))
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        let (k, pos) = self.locate(id);
        (k > 0).then(|| self.id(k - 1, [pos[0] / 2, pos[1] / 2]))
    }

    pub fn children(&self, id: usize) -> Vec<usize> {
        let (k, pos) = self.locate(id);
        if k == self.grid.level() {
            return Vec::new();
        }
        let ys: &[usize] = if self.grid.dim() == 1 { &[0] } else { &[0, 1] };
        let mut out = Vec::with_capacity(4);
        for dx in 0..2 {
            for &dy in ys {
                out.push(self.id(k + 1, [2 * pos[0] + dx, 2 * pos[1] + dy]));
            }
        }
        out
    }

    /// Ids of the dyadic cubes inside `id` (including itself), coarse to fine.
    pub fn subtree(&self, id: usize) -> Vec<usize> {
        let (k, pos) = self.locate(id);
        let mut out = Vec::new();
        for g in k..=self.grid.level() {
            let scale = 1usize << (g - k);
            let ys = if self.grid.dim() == 1 { 1 } else { scale };
            for a in 0..scale {
                for b in 0..ys {
                    let p = [pos[0] * scale + a, if self.grid.dim() == 1 { 0 } else { pos[1] * scale + b }];
                    out.push(self.id(g, p));
                }
            }
        }
        out
    }

    /// Ids of the strict ancestors of `id`, nearest first.
    pub fn ancestors(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = id;
        while let Some(p) = self.parent(cur) {
            out.push(p);
            cur = p;
        }
        out
    }

    /// Id of the single-cell dyadic cube holding `cell`.
    pub fn leaf_of(&self, cell: usize) -> usize {
        self.id(self.grid.level(), self.grid.coords(cell))
    }

    /// Per cell, the max of `per_cube` over the dyadic cubes containing it.
    pub fn chain_max(&self, per_cube: &[f64]) -> Vec<f64> {
        debug_assert_eq!(per_cube.len(), self.len());
        let mut best = per_cube.to_vec();
        // Parents precede children, so one forward sweep propagates maxima.
        for id in 1..best.len() {
            let p = self.parent(id).expect("non-root");
            if best[p] > best[id] {
                best[id] = best[p];
            }
        }
        let leaf0 = self.level_start(self.grid.level());
        let n = self.grid.cell_count();
        (0..n).map(|cell| best[leaf0 + self.local_leaf(cell)]).collect()
    }

    #[inline]
    fn local_leaf(&self, cell: usize) -> usize {
        // Leaf generation numbering coincides with flat cell numbering.
        cell
    }
}

/// Piecewise-constant real function on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::LengthMismatch {
                expected: grid.cell_count(),
                found: values.len(),
            });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        GridFunction {
            grid,
            values: alloc::vec![c; grid.cell_count()],
        }
    }

    /// Sample `f` at cell midpoints.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.cell_count()).map(|i| f(grid.midpoint(i))).collect();
        GridFunction { grid, values }
    }

    /// Indicator of a cell set given as flat indices.
    pub fn indicator(grid: Grid, cells: impl IntoIterator<Item = usize>) -> Self {
        let mut g = Self::zeros(grid);
        for c in cells {
            g.values[c] = 1.0;
        }
        g
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `∫ f` over the whole domain.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_measure()
    }

    pub fn integrate(&self, q: &Cube) -> Result<f64> {
        integrate(self, q)
    }

    /// `f χ_Q`.
    pub fn restricted(&self, q: &Cube) -> Result<Self> {
        self.grid.check_same(&q.grid())?;
        let mut out = Self::zeros(self.grid);
        for c in q.cells() {
            out.values[c] = self.values[c];
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// `∫_Q f`, an exact cell sum.
pub fn integrate(f: &GridFunction, q: &Cube) -> Result<f64> {
    f.grid.check_same(&q.grid())?;
    if q.boundary() == Boundary::Wrapped && !f.grid.periodic() {
        return Err(Error::CubeOutOfRange);
    }
    let s: f64 = match q.as_range() {
        Some(r) => f.values[r].iter().sum(),
        None => q.cells().map(|c| f.values[c]).sum(),
    };
    Ok(s * f.grid.cell_measure())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn line(level: u32) -> Grid {
        Grid::line(level).unwrap()
    }

    #[test]
    fn integrate_constant_one_is_one() {
        for (dim, level) in [(1, 0), (1, 5), (2, 3)] {
            let g = Grid::new(dim, level, false).unwrap();
            let f = GridFunction::constant(g, 1.0);
            assert_eq!(integrate(&f, &g.root()).unwrap(), 1.0);
        }
    }

    #[test]
    fn integrate_point_mass() {
        let g = line(2);
        let f = GridFunction::new(g, vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(integrate(&f, &g.root()).unwrap(), 1.0);
        let half = Cube::new(g, [0, 0], 2).unwrap();
        // Direct cell sum: 4·¼ + 0·¼.
        let oracle: f64 = [4.0, 0.0].iter().map(|v| v * 0.25).sum();
        assert_eq!(integrate(&f, &half).unwrap(), oracle);
    }

    #[test]
    fn out_of_range_cube_rejected_on_open_grid() {
        let g = line(2);
        assert_eq!(Cube::new(g, [3, 0], 2), Err(Error::CubeOutOfRange));
        assert_eq!(Cube::new(g, [-1, 0], 1), Err(Error::CubeOutOfRange));
        let p = g.with_periodic(true);
        let c = Cube::new(p, [3, 0], 2).unwrap();
        assert_eq!(c.boundary(), Boundary::Wrapped);
        assert_eq!(c.cells().collect::<Vec<_>>(), vec![3, 0]);
    }

    #[test]
    fn dilate_examples() {
        let p = Grid::new(1, 2, true).unwrap();
        let q = Cube::new(p, [1, 0], 1).unwrap();
        let d = q.dilate(3, DilationMode::Wrap).unwrap();
        assert_eq!(d.cells().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(d.boundary(), Boundary::Interior);

        let q0 = Cube::new(p, [0, 0], 1).unwrap();
        let d0 = q0.dilate(3, DilationMode::Wrap).unwrap();
        // Wrap arithmetic: offsets -1, 0, 1 modulo 4.
        let oracle: Vec<usize> = (-1i64..=1).map(|o| o.rem_euclid(4) as usize).collect();
        assert_eq!(d0.cells().collect::<Vec<_>>(), oracle);
        assert_eq!(d0.boundary(), Boundary::Wrapped);

        let g = line(2);
        let root = g.root();
        let c = root.dilate(3, DilationMode::Clip).unwrap();
        assert_eq!((c.offset(), c.extent()), (root.offset(), root.extent()));
        assert_eq!(c.boundary(), Boundary::Clipped);
        assert_eq!(c.side(), 12);
    }

    #[test]
    fn dilate_rejects_even_and_wrap_on_open_grid() {
        let g = line(3);
        let q = Cube::new(g, [2, 0], 1).unwrap();
        assert_eq!(q.dilate(2, DilationMode::Clip), Err(Error::InvalidDilation(2)));
        assert_eq!(q.dilate(0, DilationMode::Clip), Err(Error::InvalidDilation(0)));
        assert_eq!(q.dilate(3, DilationMode::Wrap), Err(Error::WrapOnOpenGrid));
    }

    #[test]
    fn iterated_dilation_matches_nine_on_torus() {
        for dim in [1, 2] {
            let g = Grid::new(dim, 5, true).unwrap();
            for q in enumerate_cubes(g, CubeFamily::Dyadic) {
                let a = q.dilate(3, DilationMode::Wrap).unwrap().dilate(3, DilationMode::Wrap).unwrap();
                let b = q.dilate(9, DilationMode::Wrap).unwrap();
                let mut ca: Vec<_> = a.cells().collect();
                let mut cb: Vec<_> = b.cells().collect();
                ca.sort_unstable();
                cb.sort_unstable();
                assert_eq!(ca, cb);
            }
        }
    }

    #[test]
    fn family_counts() {
        assert_eq!(enumerate_cubes(line(2), CubeFamily::Dyadic).len(), 7);
        assert_eq!(enumerate_cubes(line(2), CubeFamily::All).len(), 10);
        let g2 = Grid::new(2, 3, false).unwrap();
        assert_eq!(enumerate_cubes(g2, CubeFamily::Dyadic).len(), 85);
        // N = 8: Σ_s (N-s+1)^2 over all sides, and over s ∈ {1,2,4,8}.
        assert_eq!(enumerate_cubes(g2, CubeFamily::All).len(), 204);
        assert_eq!(enumerate_cubes(g2, CubeFamily::PowerOfTwoSides).len(), 64 + 49 + 25 + 1);
        let n = 64;
        assert_eq!(enumerate_cubes(line(6), CubeFamily::All).len(), n * (n + 1) / 2);
    }

    #[test]
    fn dyadic_children_partition_parent() {
        for dim in [1, 2] {
            let g = Grid::new(dim, 4, false).unwrap();
            for q in enumerate_cubes(g, CubeFamily::Dyadic) {
                let kids = q.children().unwrap();
                if q.side() == 1 {
                    assert!(kids.is_empty());
                    continue;
                }
                assert_eq!(kids.len(), 1 << dim);
                let mut cells: Vec<usize> = kids.iter().flat_map(|k| k.cells()).collect();
                let before = cells.len();
                cells.sort_unstable();
                cells.dedup();
                assert_eq!(before, cells.len(), "children overlap");
                let mut parent: Vec<usize> = q.cells().collect();
                parent.sort_unstable();
                assert_eq!(cells, parent);
                for k in &kids {
                    assert_eq!(k.parent().unwrap(), Some(q));
                }
            }
        }
    }

    #[test]
    fn dyadic_tree_indexing_round_trips() {
        for dim in [1, 2] {
            let g = Grid::new(dim, 3, false).unwrap();
            let t = DyadicTree::new(g);
            let cubes = enumerate_cubes(g, CubeFamily::Dyadic);
            assert_eq!(t.len(), cubes.len());
            for (id, q) in cubes.iter().enumerate() {
                assert_eq!(t.id_of(q).unwrap(), id);
                assert_eq!(t.cube(id), *q);
                for c in t.children(id) {
                    assert_eq!(t.parent(c), Some(id));
                }
                let sub = t.subtree(id);
                assert!(sub.iter().all(|&s| q.contains(&t.cube(s))));
                let expected: usize = (0..=(g.level() - q.generation().unwrap()))
                    .map(|j| 1usize << (dim as u32 * j))
                    .sum();
                assert_eq!(sub.len(), expected);
            }
            for cell in 0..g.cell_count() {
                assert_eq!(t.cube(t.leaf_of(cell)).cells().next(), Some(cell));
            }
        }
    }

    #[test]
    fn chain_max_matches_brute_force() {
        let g = Grid::new(2, 3, false).unwrap();
        let t = DyadicTree::new(g);
        let vals: Vec<f64> = (0..t.len()).map(|i| ((i * 37) % 101) as f64).collect();
        let got = t.chain_max(&vals);
        for cell in 0..g.cell_count() {
            let brute = (0..t.len())
                .filter(|&id| t.cube(id).contains_cell(cell))
                .map(|id| vals[id])
                .fold(f64::MIN, f64::max);
            assert_eq!(got[cell], brute);
        }
    }

    #[test]
    fn cube_geometry() {
        let g = Grid::new(2, 3, false).unwrap();
        let q = Cube::new(g, [2, 4], 4).unwrap();
        assert_eq!(q.measure(), 0.25);
        assert_eq!(q.side_length(), 0.5);
        assert!((q.diam() - 0.5 * core::f64::consts::SQRT_2).abs() < 1e-15);
        assert!(!q.is_dyadic());
        assert!(Cube::new(g, [4, 4], 4).unwrap().is_dyadic());
        assert_eq!(q.cells().count(), 16);
        assert!(q.cells().all(|c| q.contains_cell(c)));
        assert_eq!((0..64).filter(|&c| q.contains_cell(c)).count(), 16);
    }
}
