//! Box-counting dimension of 2-D or 3-D point sets.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::scalar::{linear_fit, Scalar, Vec3};
use crate::spatial::CellGrid;

/// Box sizes used for counting.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum BoxScales<T> {
    /// Halvings of the bounding-box size down to 4× the mean nearest-neighbour distance.
    #[default]
    Auto,
    /// Halvings of `largest` down to no less than `smallest`.
    Range { smallest: T, largest: T },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FractalDimension<T> {
    pub dimension: T,
    pub r_squared: T,
    /// `(box size, occupied boxes)`, largest box first.
    pub counts: Vec<(T, usize)>,
}

const MIN_SCALES: usize = 4;

fn to_vec3<T: Scalar, const N: usize>(p: &[T; N]) -> Vec3<T> {
    let c = |i: usize| if i < N { p[i] } else { T::zero() };
    Vec3::new(c(0), c(1), c(2))
}

/// Mean distance from each point to its nearest distinct neighbour.
fn mean_nearest_neighbour<T: Scalar>(pts: &[Vec3<T>], diag: T, dim: usize) -> T {
    let n = pts.len();
    let cell = diag / T::from_usize_lossy(n).powf(T::one() / T::from_usize_lossy(dim));
    let grid = CellGrid::build(pts, cell);
    let mut total = T::zero();
    let mut counted = 0usize;
    for (i, &p) in pts.iter().enumerate() {
        let mut best = T::infinity();
        grid.for_each_near(p, |j| {
            let d = (pts[j] - p).norm();
            if j != i && d > T::zero() && d < best {
                best = d;
            }
        });
        if best > cell {
            best = pts
                .iter()
                .map(|&q| (q - p).norm())
                .filter(|&d| d > T::zero())
                .fold(T::infinity(), T::min);
        }
        if best.is_finite() {
            total += best;
            counted += 1;
        }
    }
    if counted == 0 {
        T::zero()
    } else {
        total / T::from_usize_lossy(counted)
    }
}

/// Occupied boxes of size `eps` on a grid anchored at `lo`. The last box on
/// each axis is closed so points on the far face are not split off.
fn count_boxes<T: Scalar, const N: usize>(points: &[[T; N]], lo: &[T; N], extent: &[T; N], eps: T) -> usize {
    let last: [i64; N] = std::array::from_fn(|a| {
        ((extent[a] / eps).ceil().to_i64().unwrap_or(i64::MAX) - 1).max(0)
    });
    let mut seen = HashSet::with_capacity(points.len());
    for p in points {
        let key: [i64; N] = std::array::from_fn(|a| {
            let k = ((p[a] - lo[a]) / eps).floor().to_i64().unwrap_or(i64::MAX);
            k.min(last[a])
        });
        seen.insert(key);
    }
    seen.len()
}

/// `D = -slope` of `ln N(ε)` against `ln ε`.
pub fn box_counting_dimension<T: Scalar, const N: usize>(
    points: &[[T; N]],
    scales: BoxScales<T>,
) -> Result<FractalDimension<T>> {
    if N == 0 || N > 3 {
        return Err(Error::Degenerate(format!("{N}-D points are not supported")));
    }
    if points.is_empty() {
        return Err(Error::Degenerate("dimension undefined for an empty point set".into()));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Domain("point set contains non-finite coordinates".into()));
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        for a in 0..N {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let extent: [T; N] = std::array::from_fn(|a| hi[a] - lo[a]);
    let size = extent.iter().copied().fold(T::zero(), T::max);

    let (smallest, largest) = match scales {
        BoxScales::Range { smallest, largest } => {
            if !(smallest > T::zero() && largest > smallest) {
                return Err(Error::config("scale_range", "need 0 < smallest < largest"));
            }
            (smallest, largest)
        }
        BoxScales::Auto => {
            if size == T::zero() {
                // All points coincide: one box at every scale.
                return Ok(FractalDimension { dimension: T::zero(), r_squared: T::one(), counts: Vec::new() });
            }
            let pts: Vec<Vec3<T>> = points.iter().map(to_vec3).collect();
            let diag = extent.iter().map(|&e| e * e).sum::<T>().sqrt();
            let nn = mean_nearest_neighbour(&pts, diag, N);
            (T::lit(4.0) * nn, size)
        }
    };

    let mut counts = Vec::new();
    let mut eps = largest;
    while eps >= smallest * (T::one() - T::epsilon()) {
        counts.push((eps, count_boxes(points, &lo, &extent, eps)));
        eps *= T::lit(0.5);
    }
    if counts.len() < MIN_SCALES || largest / counts.last().map(|c| c.0).unwrap_or(largest) < T::lit(10.0) {
        return Err(Error::Degenerate(format!(
            "dimension undefined: {} box scales between {smallest:e} and {largest:e}, need {MIN_SCALES} spanning a decade",
            counts.len()
        )));
    }
    let xs: Vec<T> = counts.iter().map(|c| c.0.ln()).collect();
    let ys: Vec<T> = counts.iter().map(|c| T::from_usize_lossy(c.1).ln()).collect();
    let (_, slope, r2) = linear_fit(&xs, &ys).ok_or_else(|| Error::Degenerate("box fit failed".into()))?;
    Ok(FractalDimension { dimension: -slope, r_squared: r2, counts })
}
