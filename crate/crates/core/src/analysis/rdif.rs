//! Dynamic increase factor and its power-law rate model.

use crate::error::{Error, Result};
use crate::scalar::{linear_fit, Scalar};

/// Gas-gun pressure (MPa) to nominal strain rate (1/s).
pub const PRESSURE_TO_RATE: [(f64, f64); 3] = [(0.25, 200.0), (0.30, 400.0), (0.40, 600.0)];

/// Strain rate for a tabulated impact pressure.
pub fn strain_rate_for_pressure<T: Scalar>(pressure: T) -> Option<T> {
    PRESSURE_TO_RATE
        .iter()
        .find(|(p, _)| (T::lit(*p) - pressure).abs() <= T::lit(1e-9))
        .map(|&(_, r)| T::lit(r))
}

/// `σ_d / σ_s`.
pub fn compute_rdif<T: Scalar>(dynamic_strength: T, static_strength: T) -> Result<T> {
    if !(static_strength > T::zero()) {
        return Err(Error::Domain(format!(
            "static strength must be positive, got {static_strength}"
        )));
    }
    Ok(dynamic_strength / static_strength)
}

/// `RDIF = 1 + k·ε̇^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct RdifModel<T> {
    pub k: T,
    pub m: T,
    /// Largest absolute RDIF misfit over the fitted points.
    pub residual: T,
    /// Fewer than two usable points; `k` is 0.
    pub degenerate: bool,
    /// Input indices left out because their RDIF is not above 1.
    pub excluded: Vec<usize>,
}

impl<T: Scalar> RdifModel<T> {
    pub fn evaluate(&self, rate: T) -> T {
        T::one() + self.k * rate.powf(self.m)
    }
}

/// Least squares of `ln(RDIF - 1)` on `ln ε̇` over the points with RDIF > 1.
pub fn fit_rdif_model<T: Scalar>(points: &[(T, T)]) -> Result<RdifModel<T>> {
    if points.is_empty() {
        return Err(Error::Empty("rdif points"));
    }
    if let Some(&(r, _)) = points.iter().find(|(r, d)| !(*r > T::zero()) || !d.is_finite()) {
        return Err(Error::Domain(format!("strain rate must be positive, got {r}")));
    }
    let (used, excluded): (Vec<usize>, Vec<usize>) = (0..points.len()).partition(|&i| points[i].1 > T::one());
    if used.len() < 2 {
        return Ok(RdifModel {
            k: T::zero(),
            m: T::zero(),
            residual: T::zero(),
            degenerate: true,
            excluded,
        });
    }
    let xs: Vec<T> = used.iter().map(|&i| points[i].0.ln()).collect();
    let ys: Vec<T> = used.iter().map(|&i| (points[i].1 - T::one()).ln()).collect();
    let (ln_k, m, _) =
        linear_fit(&xs, &ys).ok_or_else(|| Error::Degenerate("rdif points need two distinct strain rates".into()))?;
    let mut model = RdifModel {
        k: ln_k.exp(),
        m,
        residual: T::zero(),
        degenerate: false,
        excluded,
    };
    model.residual = used
        .iter()
        .map(|&i| (model.evaluate(points[i].0) - points[i].1).abs())
        .fold(T::zero(), T::max);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_and_domain() {
        assert_eq!(compute_rdif(3.0, 3.0).unwrap(), 1.0);
        assert!(compute_rdif(3.0, 0.0).is_err());
    }

    #[test]
    fn unit_rdif_is_degenerate() {
        let m = fit_rdif_model(&[(200.0, 1.0), (400.0, 1.0)]).unwrap();
        assert!(m.degenerate);
        assert_eq!(m.k, 0.0);
        assert_eq!(m.excluded, vec![0, 1]);
    }

    #[test]
    fn pressure_lookup() {
        assert_eq!(strain_rate_for_pressure(0.30), Some(400.0));
        assert_eq!(strain_rate_for_pressure(0.35), None);
    }
}
