//! Hyperbolicity rates and transversality constants with sampled certificates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::leaves::{LeafClass, Plaque};
use super::skew::SkewModel;
use crate::error::{Error, Result};
use crate::torus::{torus_distance, TorusPoint};

/// Safety factor applied to the conditioning of the intersection solve.
pub const L0_SAFETY: f64 = 1.1;
/// Lift-unambiguity radius used as `δ₀`.
pub const DELTA0: f64 = 0.2;
/// Radius on which the contraction inequalities are certified.
pub const DELTA1: f64 = 0.2;
/// `α = ALPHA_FRACTION·ε`; half of `ε/3` with a further 0.9 margin.
pub const ALPHA_FRACTION: f64 = 0.15;

const CERT_SEED: u64 = 0x5eed_c0de;

/// Contraction and expansion rates of the model in the flat metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemRates {
    pub lambda: f64,
    pub mu: f64,
    pub lambda_prime: f64,
    pub mu_prime: f64,
    pub delta1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransversalityConstants {
    pub l0: f64,
    pub delta0: f64,
    pub r1: f64,
    pub r2: f64,
    pub alpha: f64,
}

impl SkewModel {
    /// Rates for which `d(f x, f y) < λ d(x, y)` on local stable leaves and
    /// the mirror statement for `f⁻¹` on unstable leaves hold.
    ///
    /// The base matrix contracts by `λ_A`; the strong leaves tilt into the
    /// fiber with slope at most `c = Lip(φ)/(1 − λ_A)`, giving
    /// `λ = λ_A·√(1 + c²)`. The center (fiber) derivative is exactly 1.
    pub fn rates(&self) -> SystemRates {
        let lambda = self.base().frame().lambda * self.coupling_slope().hypot(1.0);
        SystemRates {
            lambda,
            mu: 1.0 / lambda,
            lambda_prime: 1.0,
            mu_prime: 1.0,
            delta1: DELTA1,
        }
    }

    /// The intersection-blowup constant `L0`.
    pub fn intersection_blowup(&self) -> f64 {
        L0_SAFETY * self.base().frame().solve_conditioning() * self.coupling_slope().hypot(1.0)
    }

    /// Choose `L0, δ₀, r₁, r₂, α` for target accuracy `epsilon` and certify
    /// them by sampling.
    pub fn compute_constants(&self, epsilon: f64) -> Result<TransversalityConstants> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Parameter(format!("epsilon = {epsilon} must be positive")));
        }
        let l0 = self.intersection_blowup();
        let family_cap = 0.9 * l0 * DELTA0 / 3.0;
        let alpha = ALPHA_FRACTION * epsilon;
        let slope = self.coupling_slope().hypot(1.0);
        let mut constants = TransversalityConstants {
            l0,
            delta0: DELTA0,
            r1: family_cap,
            r2: (alpha / (L0_SAFETY * slope)).min(family_cap),
            alpha,
        };
        let worst = self.certify_intersection_bound(l0, 10_000);
        if worst > 1.0 {
            return Err(Error::Model(format!(
                "sampled intersection distance reached {worst:.4}·L0·δ; L0 = {l0} is not certified"
            )));
        }
        for _ in 0..30 {
            if self.holonomy_modulus_violations(&constants, 1000) == 0 {
                return Ok(constants);
            }
            constants.r2 *= 0.5;
        }
        Err(Error::Model("could not certify the holonomy modulus".into()))
    }

    /// Largest observed `d(result, inputs)/(L0·d(x, y))` over random pairs
    /// with `d(x, y) < δ₀`, for both transverse intersection types.
    pub fn certify_intersection_bound(&self, l0: f64, samples: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(CERT_SEED);
        let mut worst = 0.0f64;
        let mut taken = 0;
        while taken < samples {
            let x = random_point(&mut rng);
            let d = [
                rng.random_range(-0.1..0.1),
                rng.random_range(-0.1..0.1),
                rng.random_range(-0.1..0.1),
            ];
            let y = x.translate(d);
            let dist = torus_distance(&x, &y);
            if dist >= DELTA0 || dist == 0.0 {
                continue;
            }
            taken += 1;
            for (cx, cy) in [
                (LeafClass::CenterUnstable, LeafClass::Stable),
                (LeafClass::CenterStable, LeafClass::Unstable),
            ] {
                // radius large enough that the radius check never fires here
                match self.intersect(cx, &x, cy, &y, 10.0) {
                    Ok(z) => {
                        let reach = torus_distance(&z, &x).max(torus_distance(&z, &y));
                        worst = worst.max(reach / (l0 * dist));
                    }
                    Err(_) => worst = f64::INFINITY,
                }
            }
        }
        worst
    }

    /// Number of sampled pairs violating `d(z, z') < r₂ ⇒ d(h z, h z') < α`
    /// for unstable and stable holonomies along center leaves.
    pub fn holonomy_modulus_violations(&self, c: &TransversalityConstants, samples: usize) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(CERT_SEED ^ 0xa11ce);
        let mut violations = 0;
        for i in 0..samples {
            let strong = if i % 2 == 0 {
                LeafClass::Unstable
            } else {
                LeafClass::Stable
            };
            let anchor = random_point(&mut rng);
            let span = c.r1 / 4.0;
            // D¹ and D² are strong plaques through points of the anchor's
            // center-strong plaque at different fiber heights
            let d1 = self.strong_leaf_point(strong, &anchor, rng.random_range(-span..span))
                .translate([0.0, 0.0, rng.random_range(-span..span)]);
            let d2 = self.strong_leaf_point(strong, &anchor, rng.random_range(-span..span))
                .translate([0.0, 0.0, rng.random_range(-span..span)]);
            let target = Plaque { class: strong, point: d2 };
            let s = rng.random_range(-span..span);
            let step = rng.random_range(-1.0..1.0) * c.r2 / (1.0 + self.coupling_slope());
            let z = self.strong_leaf_point(strong, &d1, s);
            let zp = self.strong_leaf_point(strong, &d1, s + step);
            if torus_distance(&z, &zp) >= c.r2 {
                continue;
            }
            let (Ok(hz), Ok(hzp)) = (
                self.holonomy_along_center(&anchor, &z, &target, c.r1),
                self.holonomy_along_center(&anchor, &zp, &target, c.r1),
            ) else {
                violations += 1;
                continue;
            };
            if torus_distance(&hz, &hzp) >= c.alpha {
                violations += 1;
            }
        }
        violations
    }

    /// The point at signed base distance `t` along the strong leaf of `x`.
    pub fn strong_leaf_point(&self, class: LeafClass, x: &TorusPoint, t: f64) -> TorusPoint {
        let frame = *self.base().frame();
        let p = x.base();
        match class {
            LeafClass::Stable => TorusPoint::from_base(
                [p[0] + t * frame.v_s[0], p[1] + t * frame.v_s[1]],
                x.fiber() + self.stable_series(p, t),
            ),
            LeafClass::Unstable => TorusPoint::from_base(
                [p[0] + t * frame.v_u[0], p[1] + t * frame.v_u[1]],
                x.fiber() + self.unstable_series(p, t),
            ),
            other => panic!("strong_leaf_point called with {other} leaf"),
        }
    }
}

pub(crate) fn random_point<R: Rng>(rng: &mut R) -> TorusPoint {
    TorusPoint::from_base([rng.random(), rng.random()], rng.random())
}
