//! NMR T2 spectrum peak areas.

use crate::error::{Error, Result};
use crate::frostheave::percent_increase;
use crate::scalar::Scalar;

/// Peak boundaries on the T2 axis, ms.
pub const PEAK_BOUNDS: [f64; 2] = [10.0, 100.0];

/// Abscissa the amplitudes are integrated over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SpectrumAxis {
    /// `log10(T2)`, matching the logarithmic sampling of inversion output.
    #[default]
    Log10,
    /// T2 in ms.
    Linear,
}

impl SpectrumAxis {
    fn coord<T: Scalar>(self, t2: T) -> T {
        match self {
            SpectrumAxis::Log10 => t2.log10(),
            SpectrumAxis::Linear => t2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct T2Stats<T> {
    /// Share of the area below 10 ms, 10–100 ms and above 100 ms, %.
    pub peak_pct: [T; 3],
    pub area: T,
    /// `(area - baseline) / baseline · 100`, when a baseline is given.
    pub change_rate_pct: Option<T>,
}

pub fn t2_spectrum_stats<T: Scalar>(spectrum: &[(T, T)], baseline_area: Option<T>) -> Result<T2Stats<T>> {
    t2_spectrum_stats_with(spectrum, baseline_area, SpectrumAxis::default())
}

/// Trapezoid areas per peak. Segments that straddle a boundary are split at
/// the boundary with linear interpolation on the chosen axis.
pub fn t2_spectrum_stats_with<T: Scalar>(
    spectrum: &[(T, T)],
    baseline_area: Option<T>,
    axis: SpectrumAxis,
) -> Result<T2Stats<T>> {
    if spectrum.is_empty() {
        return Err(Error::Empty("t2 spectrum"));
    }
    if let Some(&(t, a)) = spectrum.iter().find(|(t, a)| !(*t > T::zero()) || !t.is_finite() || !a.is_finite()) {
        return Err(Error::Domain(format!("bad spectrum sample ({t}, {a})")));
    }
    if spectrum.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Domain("T2 values must be strictly increasing".into()));
    }
    let bounds = PEAK_BOUNDS.map(|b| axis.coord(T::lit(b)));
    let bin = |x: T| bounds.iter().filter(|&&b| x >= b).count();
    let half = T::lit(0.5);
    let mut peaks = [T::zero(); 3];
    for w in spectrum.windows(2) {
        let (mut x0, mut y0) = (axis.coord(w[0].0), w[0].1);
        let (x1, y1) = (axis.coord(w[1].0), w[1].1);
        for &b in &bounds {
            if x0 < b && b < x1 {
                let yb = y0 + (y1 - y0) * (b - x0) / (x1 - x0);
                peaks[bin(x0)] += (y0 + yb) * half * (b - x0);
                (x0, y0) = (b, yb);
            }
        }
        peaks[bin(x0)] += (y0 + y1) * half * (x1 - x0);
    }
    let area: T = peaks.iter().copied().sum();
    if area == T::zero() {
        return Err(Error::Degenerate("spectrum has zero area".into()));
    }
    Ok(T2Stats {
        peak_pct: peaks.map(|p| p / area * T::lit(100.0)),
        area,
        change_rate_pct: baseline_area.map(|b| percent_increase(b, area)).transpose()?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupSummary<T> {
    pub mean_area: T,
    /// Relative to the first group's mean, %.
    pub change_rate_pct: T,
}

/// Mean spectral area per specimen group and its change against the first group.
pub fn group_area_statistics<T: Scalar>(groups: &[Vec<T>]) -> Result<Vec<GroupSummary<T>>> {
    let means = groups
        .iter()
        .map(|g| {
            if g.is_empty() {
                Err(Error::Empty("t2 area group"))
            } else {
                Ok(g.iter().copied().sum::<T>() / T::from_usize_lossy(g.len()))
            }
        })
        .collect::<Result<Vec<T>>>()?;
    let Some(&base) = means.first() else {
        return Err(Error::Empty("t2 area groups"));
    };
    means
        .iter()
        .map(|&m| Ok(GroupSummary { mean_area: m, change_rate_pct: percent_increase(base, m)? }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_split_on_linear_axis() {
        let s = [(5.0f64, 1.0), (15.0, 1.0)];
        let r = t2_spectrum_stats_with(&s, None, SpectrumAxis::Linear).unwrap();
        assert!((r.area - 10.0).abs() < 1e-12);
        assert!((r.peak_pct[0] - 50.0).abs() < 1e-12);
        assert!((r.peak_pct[1] - 50.0).abs() < 1e-12);
    }

    #[test]
    fn empty_and_unsorted_rejected() {
        assert!(t2_spectrum_stats::<f64>(&[], None).is_err());
        assert!(t2_spectrum_stats(&[(2.0f64, 1.0), (1.0, 1.0)], None).is_err());
    }
}
