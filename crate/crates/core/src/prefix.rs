//! Compensated prefix sums (1D) and summed-area tables (2D) for O(1) cube
//! sums, including cubes that wrap around a periodic domain.

use alloc::vec::Vec;

use crate::grid::{Cube, Grid};

/// Error-free transformation `a + b = s + e`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Running sum carried as an unevaluated pair `hi + lo`.
#[derive(Clone, Copy, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    #[inline]
    fn add(self, x: f64) -> Dd {
        let (s, e) = two_sum(self.hi, x);
        Dd { hi: s, lo: self.lo + e }
    }

    #[inline]
    fn add_dd(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        Dd { hi: s, lo: self.lo + o.lo + e }
    }

    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

pub(crate) struct PrefixSums {
    grid: Grid,
    stride: usize,
    table: Vec<Dd>,
}

impl PrefixSums {
    pub(crate) fn new(grid: Grid, values: &[f64]) -> Self {
        let n = grid.side();
        debug_assert_eq!(values.len(), grid.cell_count());
        if grid.dim() == 1 {
            let mut table = Vec::with_capacity(n + 1);
            let mut acc = Dd::default();
            table.push(acc);
            for &v in values {
                acc = acc.add(v);
                table.push(acc);
            }
            PrefixSums { grid, stride: n + 1, table }
        } else {
            let s = n + 1;
            let mut table = alloc::vec![Dd::default(); s * s];
            for r in 0..n {
                let mut row = Dd::default();
                for c in 0..n {
                    row = row.add(values[r * n + c]);
                    table[(r + 1) * s + c + 1] = table[r * s + c + 1].add_dd(row);
                }
            }
            PrefixSums { grid, stride: s, table }
        }
    }

    #[inline]
    fn line(&self, a: usize, b: usize) -> Dd {
        self.table[b].add_dd(self.table[a].neg())
    }

    #[inline]
    fn rect(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Dd {
        let s = self.stride;
        let t = &self.table;
        t[r1 * s + c1]
            .add_dd(t[r0 * s + c1].neg())
            .add_dd(t[r1 * s + c0].neg())
            .add_dd(t[r0 * s + c0])
    }

    /// Split an axis range `[o, o+e)` on the torus into at most two plain ranges.
    #[inline]
    fn pieces(n: usize, o: usize, e: usize) -> [(usize, usize); 2] {
        if o + e <= n {
            [(o, o + e), (0, 0)]
        } else {
            [(o, n), (0, o + e - n)]
        }
    }

    /// Sum of cell values over the realized cells of `q`.
    pub(crate) fn sum(&self, q: &Cube) -> f64 {
        let n = self.grid.side();
        let o = q.offset();
        let e = q.extent();
        if self.grid.dim() == 1 {
            let mut acc = Dd::default();
            for (a, b) in Self::pieces(n, o[0], e[0]) {
                if b > a {
                    acc = acc.add_dd(self.line(a, b));
                }
            }
            acc.value()
        } else {
            let mut acc = Dd::default();
            for (r0, r1) in Self::pieces(n, o[0], e[0]) {
                for (c0, c1) in Self::pieces(n, o[1], e[1]) {
                    if r1 > r0 && c1 > c0 {
                        acc = acc.add_dd(self.rect(r0, r1, c0, c1));
                    }
                }
            }
            acc.value()
        }
    }

    /// Plain interval sum `Σ_{a ≤ i < b}` (1D only).
    #[inline]
    pub(crate) fn range_sum(&self, a: usize, b: usize) -> f64 {
        self.line(a, b).value()
    }

    /// Sum over the box `[lo, hi)` of cell coordinates (no wrapping).
    #[inline]
    pub(crate) fn box_sum(&self, lo: [usize; 2], hi: [usize; 2]) -> f64 {
        if self.grid.dim() == 1 {
            self.line(lo[0], hi[0]).value()
        } else {
            self.rect(lo[0], hi[0], lo[1], hi[1]).value()
        }
    }

    /// Average of the cell values over `q`.
    #[inline]
    pub(crate) fn avg(&self, q: &Cube) -> f64 {
        self.sum(q) / q.cell_count() as f64
    }
}
