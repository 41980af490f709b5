//! Independent check of the tracing contract from serialized data.

use crate::error::{Error, Result};
use crate::model::SkewModel;
use crate::orbit::PseudoOrbit;
use crate::torus::{base_distance, fiber_gap, torus_distance, TorusPoint};

/// Largest accepted base mismatch between `Y_k` and `f(Y_{k−1})`.
pub const CENTER_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// `d(x_k, Y_k) ≥ ε`.
    Distance,
    /// `Y_k` is off the center leaf of `f(Y_{k−1})`.
    CenterResidual,
    /// The center motion at `k` is not below ε.
    CenterMotion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Failure {
    pub index: i64,
    pub kind: FailureKind,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub epsilon: f64,
    /// Indices within this many steps of either window end are reported
    /// but do not count toward pass/fail.
    pub boundary: usize,
    pub distances: Vec<f64>,
    pub residuals: Vec<f64>,
    pub center_motions: Vec<f64>,
    pub max_distance: f64,
    pub max_residual: f64,
    pub max_center_motion: f64,
    pub failures: Vec<Failure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failing_indices(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.failures.iter().map(|f| f.index).collect();
        v.dedup();
        v
    }
}

/// Recompute tracing distances, center-leaf residuals and center motions
/// of `y_star` (indexed from the orbit's `n_min`) against `orbit`.
pub fn verify(
    model: &SkewModel,
    orbit: &PseudoOrbit,
    y_star: &[TorusPoint],
    epsilon: f64,
    boundary: usize,
) -> Result<VerifyReport> {
    if y_star.len() != orbit.len() {
        return Err(Error::InvalidInput(format!(
            "trace has {} points but the orbit has {}",
            y_star.len(),
            orbit.len()
        )));
    }
    let n = y_star.len();
    let mut report = VerifyReport {
        epsilon,
        boundary,
        distances: Vec::with_capacity(n),
        residuals: Vec::with_capacity(n),
        center_motions: Vec::with_capacity(n),
        max_distance: 0.0,
        max_residual: 0.0,
        max_center_motion: 0.0,
        failures: Vec::new(),
    };
    for (i, (x, y)) in orbit.points().iter().zip(y_star).enumerate() {
        let index = orbit.n_min() + i as i64;
        let dist = torus_distance(x, y);
        let (residual, motion) = if i == 0 {
            (0.0, 0.0)
        } else {
            let fy = model.apply(&y_star[i - 1]);
            (base_distance(&fy, y), fiber_gap(&fy, y))
        };
        report.distances.push(dist);
        report.residuals.push(residual);
        report.center_motions.push(motion);
        let interior = i >= boundary && i + boundary < n;
        if !interior {
            continue;
        }
        report.max_distance = report.max_distance.max(dist);
        report.max_residual = report.max_residual.max(residual);
        report.max_center_motion = report.max_center_motion.max(motion.abs());
        let checks = [
            (FailureKind::Distance, dist, !(dist < epsilon)),
            (FailureKind::CenterResidual, residual, !(residual < CENTER_RESIDUAL_TOL)),
            (FailureKind::CenterMotion, motion.abs(), !(motion.abs() < epsilon)),
        ];
        for (kind, value, failed) in checks {
            if failed {
                report.failures.push(Failure { index, kind, value });
            }
        }
    }
    Ok(report)
}
