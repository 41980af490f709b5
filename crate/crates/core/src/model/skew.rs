//! Skew products `f(p, z) = (A p, z + ω + φ(p))` over a hyperbolic toral
//! automorphism, with φ a finite trigonometric polynomial.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::base::BaseMatrix;
use crate::error::{Error, Result};
use crate::torus::TorusPoint;

pub const DEFAULT_SERIES_TOL: f64 = 1e-12;

/// One term `sin_amp·sin(2π k·p) + cos_amp·cos(2π k·p)` of the fiber coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    pub freq: [i64; 2],
    pub sin_amp: f64,
    pub cos_amp: f64,
}

impl FourierMode {
    pub fn value(&self, p: [f64; 2]) -> f64 {
        let arg = TAU * (self.freq[0] as f64 * p[0] + self.freq[1] as f64 * p[1]);
        let (s, c) = arg.sin_cos();
        self.sin_amp * s + self.cos_amp * c
    }

    pub fn gradient(&self, p: [f64; 2]) -> [f64; 2] {
        let arg = TAU * (self.freq[0] as f64 * p[0] + self.freq[1] as f64 * p[1]);
        let (s, c) = arg.sin_cos();
        let g = TAU * (self.sin_amp * c - self.cos_amp * s);
        [g * self.freq[0] as f64, g * self.freq[1] as f64]
    }

    /// Exact Lipschitz constant of the mode.
    pub fn lipschitz(&self) -> f64 {
        let k = (self.freq[0] as f64).hypot(self.freq[1] as f64);
        TAU * k * self.sin_amp.hypot(self.cos_amp)
    }
}

/// A dynamically coherent skew product on `T³`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewModel {
    base: BaseMatrix,
    omega: f64,
    modes: Vec<FourierMode>,
    series_tol: f64,
}

impl SkewModel {
    pub fn new(
        base: BaseMatrix,
        omega: f64,
        modes: Vec<FourierMode>,
        series_tol: f64,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&omega) {
            return Err(Error::Model(format!("omega = {omega} is not in [0, 1)")));
        }
        if !(series_tol > 0.0 && series_tol.is_finite()) {
            return Err(Error::Model(format!(
                "series_tol = {series_tol} must be positive"
            )));
        }
        if let Some(m) = modes
            .iter()
            .find(|m| !m.sin_amp.is_finite() || !m.cos_amp.is_finite())
        {
            return Err(Error::Model(format!("non-finite amplitude in {m:?}")));
        }
        let model = SkewModel {
            base,
            omega,
            modes,
            series_tol,
        };
        let lambda = model.base.frame().lambda;
        if lambda * model.coupling_slope().hypot(1.0) >= 1.0 {
            return Err(Error::Model(format!(
                "fiber coupling Lip(φ) = {} is too strong for a contracting stable rate",
                model.phi_lipschitz()
            )));
        }
        Ok(model)
    }

    /// The linear model: `φ ≡ 0`, `ω = 0`.
    pub fn linear(base: BaseMatrix) -> Self {
        SkewModel {
            base,
            omega: 0.0,
            modes: Vec::new(),
            series_tol: DEFAULT_SERIES_TOL,
        }
    }

    /// Cat-map skew product with `ω = 0.05`, `φ(p) = 0.02·sin(2π p₁)`.
    pub fn default_skew() -> Self {
        SkewModel::new(
            BaseMatrix::cat(),
            0.05,
            vec![FourierMode {
                freq: [1, 0],
                sin_amp: 0.02,
                cos_amp: 0.0,
            }],
            DEFAULT_SERIES_TOL,
        )
        .expect("default skew model is valid")
    }

    pub fn base(&self) -> &BaseMatrix {
        &self.base
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn modes(&self) -> &[FourierMode] {
        &self.modes
    }

    pub fn series_tol(&self) -> f64 {
        self.series_tol
    }

    pub fn is_linear(&self) -> bool {
        self.omega == 0.0 && self.modes.iter().all(|m| m.sin_amp == 0.0 && m.cos_amp == 0.0)
    }

    /// The fiber coupling φ.
    pub fn phi(&self, p: [f64; 2]) -> f64 {
        self.modes.iter().map(|m| m.value(p)).sum()
    }

    pub fn phi_gradient(&self, p: [f64; 2]) -> [f64; 2] {
        self.modes.iter().fold([0.0, 0.0], |acc, m| {
            let g = m.gradient(p);
            [acc[0] + g[0], acc[1] + g[1]]
        })
    }

    /// Lipschitz bound for φ (sum of the per-mode constants).
    pub fn phi_lipschitz(&self) -> f64 {
        self.modes.iter().map(FourierMode::lipschitz).sum()
    }

    /// Bound `Lip(φ)/(1 − λ_A)` on the fiber slope of strong stable and
    /// unstable leaves over their base lines.
    pub fn coupling_slope(&self) -> f64 {
        let lambda = self.base.frame().lambda;
        self.phi_lipschitz() / (1.0 - lambda)
    }

    pub fn apply(&self, x: &TorusPoint) -> TorusPoint {
        let p = x.base();
        let q = self.base.apply(p);
        TorusPoint::from_base(q, x.fiber() + self.omega + self.phi(p))
    }

    pub fn apply_inverse(&self, x: &TorusPoint) -> TorusPoint {
        let q = self.base.apply_inverse(x.base());
        TorusPoint::from_base(q, x.fiber() - self.omega - self.phi(q))
    }

    /// Lipschitz bound for `f` in the flat metric.
    pub fn lipschitz(&self) -> f64 {
        self.base.norm().max(1.0) + self.phi_lipschitz()
    }

    /// Lipschitz bound for `f⁻¹` in the flat metric.
    pub fn inverse_lipschitz(&self) -> f64 {
        let inv = self.base.inverse_norm();
        inv.max(1.0) + self.phi_lipschitz() * inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::torus_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(a: f64, b: f64, c: f64) -> TorusPoint {
        TorusPoint::new(a, b, c).unwrap()
    }

    #[test]
    fn linear_model_matrix_evaluation() {
        let m = SkewModel::linear(BaseMatrix::cat());
        let y = m.apply(&pt(0.1, 0.2, 0.3));
        let e = [0.4, 0.3, 0.3];
        for i in 0..3 {
            assert!((y.coords()[i] - e[i]).abs() < 1e-15);
        }
        let back = m.apply_inverse(&pt(0.4, 0.3, 0.3));
        let e = [0.1, 0.2, 0.3];
        for i in 0..3 {
            assert!((back.coords()[i] - e[i]).abs() < 1e-15);
        }
        let fixed = pt(0.0, 0.0, 0.42);
        assert_eq!(m.apply(&fixed), fixed);
        assert_eq!(m.apply_inverse(&fixed), fixed);
    }

    #[test]
    fn default_skew_at_origin() {
        let m = SkewModel::default_skew();
        let y = m.apply(&pt(0.0, 0.0, 0.0));
        assert_eq!(y.base(), [0.0, 0.0]);
        assert!((y.fiber() - 0.05).abs() < 1e-16);
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [SkewModel::linear(BaseMatrix::cat()), SkewModel::default_skew()] {
            for _ in 0..10_000 {
                let x = pt(rng.random(), rng.random(), rng.random());
                assert!(torus_distance(&m.apply_inverse(&m.apply(&x)), &x) < 1e-13);
                assert!(torus_distance(&m.apply(&m.apply_inverse(&x)), &x) < 1e-13);
            }
        }
    }

    #[test]
    fn center_direction_is_preserved() {
        // central finite difference of f along (0, 0, 1)
        let m = SkewModel::default_skew();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = 1e-6;
        for _ in 0..100 {
            let x = pt(rng.random(), rng.random(), rng.random());
            let up = m.apply(&x.translate([0.0, 0.0, h]));
            let dn = m.apply(&x.translate([0.0, 0.0, -h]));
            let d = crate::torus::minimal_displacement(&dn, &up).components();
            let col = [d[0] / (2.0 * h), d[1] / (2.0 * h), d[2] / (2.0 * h)];
            assert!(col[0].abs() < 1e-8 && col[1].abs() < 1e-8);
            assert!((col[2] - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_coupling_recovers_linear() {
        let m = SkewModel::new(
            BaseMatrix::cat(),
            0.0,
            vec![FourierMode {
                freq: [1, 2],
                sin_amp: 0.0,
                cos_amp: 0.0,
            }],
            1e-12,
        )
        .unwrap();
        assert!(m.is_linear());
        let lin = SkewModel::linear(BaseMatrix::cat());
        let x = pt(0.3, 0.7, 0.1);
        assert_eq!(m.apply(&x), lin.apply(&x));
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let m = FourierMode {
            freq: [2, -1],
            sin_amp: 0.03,
            cos_amp: -0.01,
        };
        let p = [0.31, 0.77];
        let h = 1e-6;
        let g = m.gradient(p);
        let gx = (m.value([p[0] + h, p[1]]) - m.value([p[0] - h, p[1]])) / (2.0 * h);
        let gy = (m.value([p[0], p[1] + h]) - m.value([p[0], p[1] - h])) / (2.0 * h);
        assert!((g[0] - gx).abs() < 1e-8 && (g[1] - gy).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_parameters() {
        let cat = BaseMatrix::cat();
        assert!(SkewModel::new(cat, 1.0, vec![], 1e-12).is_err());
        assert!(SkewModel::new(cat, 0.1, vec![], 0.0).is_err());
        let strong = FourierMode {
            freq: [1, 0],
            sin_amp: 1.0,
            cos_amp: 0.0,
        };
        assert!(SkewModel::new(cat, 0.1, vec![strong], 1e-12).is_err());
    }
}
