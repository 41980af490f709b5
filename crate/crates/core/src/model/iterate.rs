//! Powers `f^k` of a model sharing its foliations.

use super::constants::SystemRates;
use super::skew::SkewModel;
use crate::torus::TorusPoint;

/// The k-fold composition of a skew model.
///
/// The invariant foliations of `f^k` coincide with those of `f`, so all leaf
/// oracles are taken from the underlying model; only the map, its rates and
/// its Lipschitz bounds change.
#[derive(Debug, Clone, PartialEq)]
pub struct IteratedSystem {
    model: SkewModel,
    power: u32,
}

impl SkewModel {
    pub fn iterate(&self, k: u32) -> IteratedSystem {
        assert!(k >= 1, "iterate power must be positive");
        IteratedSystem {
            model: self.clone(),
            power: k,
        }
    }
}

impl IteratedSystem {
    pub fn model(&self) -> &SkewModel {
        &self.model
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn apply(&self, x: &TorusPoint) -> TorusPoint {
        (0..self.power).fold(*x, |y, _| self.model.apply(&y))
    }

    pub fn apply_inverse(&self, x: &TorusPoint) -> TorusPoint {
        (0..self.power).fold(*x, |y, _| self.model.apply_inverse(&y))
    }

    pub fn rates(&self) -> SystemRates {
        let r = self.model.rates();
        let k = self.power as i32;
        SystemRates {
            lambda: r.lambda.powi(k),
            mu: r.mu.powi(k),
            lambda_prime: r.lambda_prime.powi(k),
            mu_prime: r.mu_prime.powi(k),
            delta1: r.delta1,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        self.model.lipschitz().powi(self.power as i32)
    }

    pub fn inverse_lipschitz(&self) -> f64 {
        self.model.inverse_lipschitz().powi(self.power as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BaseMatrix, LeafClass};
    use crate::torus::torus_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn power_one_matches_model() {
        let m = SkewModel::default_skew();
        let it = m.iterate(1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = TorusPoint::new(rng.random(), rng.random(), rng.random()).unwrap();
            assert_eq!(it.apply(&x), m.apply(&x));
            assert_eq!(it.apply_inverse(&x), m.apply_inverse(&x));
        }
        assert_eq!(it.rates(), m.rates());
    }

    #[test]
    fn square_of_linear_model_is_matrix_square() {
        let m = SkewModel::new(BaseMatrix::cat(), 0.05, vec![], 1e-12).unwrap();
        let it = m.iterate(2);
        let a2 = m.base().power(2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let x = TorusPoint::new(rng.random(), rng.random(), rng.random()).unwrap();
            let p = x.base();
            let expect = TorusPoint::from_base(
                [
                    a2[0][0] as f64 * p[0] + a2[0][1] as f64 * p[1],
                    a2[1][0] as f64 * p[0] + a2[1][1] as f64 * p[1],
                ],
                x.fiber() + 0.1,
            );
            assert!(torus_distance(&it.apply(&x), &expect) < 1e-13);
        }
    }

    /// Stable transfer series of `f^k` derived from scratch: base `A^k`,
    /// coupling `φ_k(p) = Σ_{j<k} φ(A^j p)`.
    fn iterated_stable_series(m: &SkewModel, k: u32, p: [f64; 2], t: f64) -> f64 {
        let frame = *m.base().frame();
        let phi_k = |q: [f64; 2]| {
            let mut s = 0.0;
            let mut qj = q;
            for _ in 0..k {
                s += m.phi(qj);
                qj = m.base().apply(qj);
            }
            s
        };
        let lk = frame.lambda.powi(k as i32);
        let mut sum = 0.0;
        let mut pn = p;
        let mut tn = t;
        for _ in 0..200 {
            let qn = [pn[0] + tn * frame.v_s[0], pn[1] + tn * frame.v_s[1]];
            sum += phi_k(pn) - phi_k(qn);
            for _ in 0..k {
                pn = m.base().apply(pn);
            }
            tn *= lk;
            if tn.abs() < 1e-300 {
                break;
            }
        }
        sum
    }

    #[test]
    fn leaves_of_iterate_agree_with_model() {
        let m = SkewModel::default_skew();
        let vs = m.base().frame().v_s;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let p = [rng.random(), rng.random()];
            let t: f64 = rng.random_range(-0.05..0.05);
            let q = [p[0] + t * vs[0], p[1] + t * vs[1]];
            let shared = m.transfer_stable(p, q).unwrap();
            for k in [2, 3] {
                let direct = iterated_stable_series(&m, k, p, t);
                assert!((shared - direct).abs() < 1e-10, "k={k}: {shared} vs {direct}");
            }
        }
        // intersections computed through the iterate use the same oracle
        let it = m.iterate(2);
        let x = TorusPoint::new(0.2, 0.3, 0.4).unwrap();
        let y = x.translate([0.01, -0.02, 0.005]);
        let a = m.intersect(LeafClass::CenterUnstable, &x, LeafClass::Stable, &y, 0.1).unwrap();
        let b = it.model().intersect(LeafClass::CenterUnstable, &x, LeafClass::Stable, &y, 0.1).unwrap();
        assert!(torus_distance(&a, &b) < 1e-10);
    }
}
