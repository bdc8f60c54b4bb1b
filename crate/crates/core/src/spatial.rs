//! Uniform cell grid for neighbour queries.

use crate::scalar::{Scalar, Vec3};

/// Dense cell grid over an axis-aligned box. Particle indices are bucketed by
/// the cell that contains their centre; a pair search only has to look at the
/// 27 surrounding cells as long as `cell >= max interaction distance`.
#[derive(Debug, Clone)]
pub(crate) struct CellGrid<T> {
    origin: Vec3<T>,
    cell: T,
    dims: [usize; 3],
    cells: Vec<Vec<usize>>,
}

impl<T: Scalar> CellGrid<T> {
    pub(crate) fn build(points: &[Vec3<T>], cell: T) -> Self {
        let mut lo = Vec3::new(T::infinity(), T::infinity(), T::infinity());
        let mut hi = -lo;
        for p in points {
            lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
        if points.is_empty() {
            lo = Vec3::zero();
            hi = Vec3::zero();
        }
        let cell = if cell > T::zero() { cell } else { T::one() };
        let span = hi - lo;
        let dim = |s: T| (s / cell).floor().to_usize().unwrap_or(0).min(1 << 20) + 1;
        let dims = [dim(span.x), dim(span.y), dim(span.z)];
        let mut grid = Self {
            origin: lo,
            cell,
            dims,
            cells: vec![Vec::new(); dims[0] * dims[1] * dims[2]],
        };
        for (i, p) in points.iter().enumerate() {
            let c = grid.cell_of(*p);
            let idx = grid.flat(c);
            grid.cells[idx].push(i);
        }
        grid
    }

    #[inline]
    fn cell_of(&self, p: Vec3<T>) -> [usize; 3] {
        let f = |v: T, o: T, d: usize| {
            let k = ((v - o) / self.cell).floor();
            if k <= T::zero() {
                0
            } else {
                k.to_usize().unwrap_or(usize::MAX).min(d - 1)
            }
        };
        [
            f(p.x, self.origin.x, self.dims[0]),
            f(p.y, self.origin.y, self.dims[1]),
            f(p.z, self.origin.z, self.dims[2]),
        ]
    }

    #[inline]
    fn flat(&self, c: [usize; 3]) -> usize {
        (c[2] * self.dims[1] + c[1]) * self.dims[0] + c[0]
    }

    /// Calls `f` with every stored index whose cell neighbours the cell of `p`.
    pub(crate) fn for_each_near(&self, p: Vec3<T>, mut f: impl FnMut(usize)) {
        let c = self.cell_of(p);
        let range = |k: usize, d: usize| k.saturating_sub(1)..=(k + 1).min(d - 1);
        for z in range(c[2], self.dims[2]) {
            for y in range(c[1], self.dims[1]) {
                for x in range(c[0], self.dims[0]) {
                    for &i in &self.cells[self.flat([x, y, z])] {
                        f(i);
                    }
                }
            }
        }
    }

    /// All unordered pairs `(i, j)`, `i < j`, whose centres are within `reach(i, j)`.
    /// `reach` must never exceed the grid's cell size. Output is sorted.
    pub(crate) fn pairs_within(
        &self,
        points: &[Vec3<T>],
        reach: impl Fn(usize, usize) -> T,
    ) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, &p) in points.iter().enumerate() {
            self.for_each_near(p, |j| {
                if j > i
                    && (points[j] - p).norm() <= reach(i, j) {
                        out.push((i, j));
                    }
            });
        }
        out.sort_unstable();
        out
    }
}
