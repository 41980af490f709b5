//! δ-pseudo-orbits: noisy generation, orbits of nearby maps, and defect
//! validation.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitBall};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SkewModel;
use crate::torus::{torus_distance, TorusPoint};

/// Noise is drawn at this fraction of δ so rounding in `f` cannot push a
/// certified defect past δ.
const NOISE_SHRINK: f64 = 1.0 - 1e-9;

/// A finite sequence `x_k`, `k ∈ [n_min, n_max]`, with certified defect
/// `sup d(f(x_k), x_{k+1}) ≤ delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoOrbit {
    n_min: i64,
    points: Vec<TorusPoint>,
    delta: f64,
}

impl PseudoOrbit {
    pub fn new(n_min: i64, points: Vec<TorusPoint>, delta: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("pseudo-orbit has no points".into()));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!("delta = {delta} must be ≥ 0")));
        }
        Ok(PseudoOrbit { n_min, points, delta })
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.points.len() as i64 - 1
    }

    pub fn window(&self) -> (i64, i64) {
        (self.n_min, self.n_max())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn points(&self) -> &[TorusPoint] {
        &self.points
    }

    /// The point with index `k`; panics outside the window.
    pub fn at(&self, k: i64) -> &TorusPoint {
        &self.points[(k - self.n_min) as usize]
    }

    pub fn get(&self, k: i64) -> Option<&TorusPoint> {
        usize::try_from(k - self.n_min).ok().and_then(|i| self.points.get(i))
    }

    pub fn indexed(&self) -> impl Iterator<Item = (i64, &TorusPoint)> {
        (self.n_min..).zip(self.points.iter())
    }
}

fn check_window(window: (i64, i64)) -> Result<()> {
    if window.0 > window.1 {
        return Err(Error::InvalidInput(format!(
            "window [{}, {}] is empty",
            window.0, window.1
        )));
    }
    Ok(())
}

/// Index at which the seed point sits: 0 when it lies in the window,
/// otherwise the nearest endpoint.
fn anchor_index(window: (i64, i64)) -> i64 {
    0i64.clamp(window.0, window.1)
}

/// A seeded δ-pseudo-orbit through `x0` (placed at index 0, or the nearest
/// window endpoint).
///
/// Forward: `x_{k+1} = f(x_k) + ξ`. Backward: `x_{k-1} = f⁻¹(x_k + ξ)`, so
/// that `f(x_{k-1}) = x_k + ξ`. Each `ξ` is uniform in the ball of radius δ,
/// drawn from ChaCha8 seeded with `seed`.
pub fn generate_noisy(
    model: &SkewModel,
    x0: TorusPoint,
    window: (i64, i64),
    delta: f64,
    seed: u64,
) -> Result<PseudoOrbit> {
    check_window(window)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!("delta = {delta} must be ≥ 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = move || -> [f64; 3] {
        let v: [f64; 3] = UnitBall.sample(&mut rng);
        let r = delta * NOISE_SHRINK;
        [r * v[0], r * v[1], r * v[2]]
    };
    let anchor = anchor_index(window);
    let mut forward = vec![x0];
    for _ in anchor..window.1 {
        let last = *forward.last().expect("non-empty");
        forward.push(model.apply(&last).translate(noise()));
    }
    let mut backward = Vec::new();
    let mut cur = x0;
    for _ in window.0..anchor {
        cur = model.apply_inverse(&cur.translate(noise()));
        backward.push(cur);
    }
    backward.reverse();
    backward.extend(forward);
    PseudoOrbit::new(window.0, backward, delta)
}

/// Starting point drawn uniformly on `T³`, on a ChaCha8 stream separate
/// from the noise stream of the same seed.
pub fn seeded_point(seed: u64) -> TorusPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    TorusPoint::wrapped([rng.random(), rng.random(), rng.random()])
}

/// Maximum forward and backward defects `d(f x_k, x_{k+1})`,
/// `d(f⁻¹ x_k, x_{k-1})` over the window.
pub fn validate(model: &SkewModel, orbit: &PseudoOrbit) -> (f64, f64) {
    orbit
        .points
        .windows(2)
        .fold((0.0f64, 0.0f64), |(fwd, bwd), w| {
            (
                fwd.max(torus_distance(&model.apply(&w[0]), &w[1])),
                bwd.max(torus_distance(&model.apply_inverse(&w[1]), &w[0])),
            )
        })
}

/// One term `sin_amp·sin(2π k·x) + cos_amp·cos(2π k·x)` on `T³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigMode {
    pub freq: [i64; 3],
    pub sin_amp: f64,
    pub cos_amp: f64,
}

impl TrigMode {
    pub fn value(&self, x: [f64; 3]) -> f64 {
        let arg = TAU
            * (self.freq[0] as f64 * x[0] + self.freq[1] as f64 * x[1] + self.freq[2] as f64 * x[2]);
        let (s, c) = arg.sin_cos();
        self.sin_amp * s + self.cos_amp * c
    }

    pub fn lipschitz(&self) -> f64 {
        let f = self.freq.map(|k| k as f64);
        TAU * (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt() * self.sin_amp.hypot(self.cos_amp)
    }
}

/// Grid resolution of the `d(f, g)` certificate.
pub const CERT_GRID: usize = 64;
const INVERSE_TOL: f64 = 1e-13;
const INVERSE_MAX_ITER: usize = 200;

/// `g(x) = f(x) + D(x)` with `D` a trigonometric displacement field.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedMap {
    model: SkewModel,
    modes: [Vec<TrigMode>; 3],
    bound: f64,
}

impl PerturbedMap {
    pub fn new(model: SkewModel, modes: [Vec<TrigMode>; 3]) -> Result<Self> {
        if modes.iter().flatten().any(|m| !m.sin_amp.is_finite() || !m.cos_amp.is_finite()) {
            return Err(Error::InvalidInput("non-finite perturbation amplitude".into()));
        }
        let mut g = PerturbedMap {
            model,
            modes,
            bound: 0.0,
        };
        g.bound = g.certify_distance();
        if g.bound >= 0.25 {
            return Err(Error::InvalidInput(format!(
                "perturbation size {} is not small",
                g.bound
            )));
        }
        Ok(g)
    }

    /// `D(x) = (amplitude·sin 2π x₃, 0, 0)`: a base displacement driven by
    /// the fiber coordinate, so `g` is no longer a skew product.
    pub fn fiber_driven(model: SkewModel, amplitude: f64) -> Result<Self> {
        let mode = TrigMode {
            freq: [0, 0, 1],
            sin_amp: amplitude,
            cos_amp: 0.0,
        };
        PerturbedMap::new(model, [vec![mode], vec![], vec![]])
    }

    pub fn model(&self) -> &SkewModel {
        &self.model
    }

    pub fn modes(&self) -> &[Vec<TrigMode>; 3] {
        &self.modes
    }

    /// Certified upper bound on `sup_x d(f(x), g(x))`.
    pub fn distance_bound(&self) -> f64 {
        self.bound
    }

    pub fn displacement(&self, x: [f64; 3]) -> [f64; 3] {
        let comp = |i: usize| self.modes[i].iter().map(|m| m.value(x)).sum::<f64>();
        [comp(0), comp(1), comp(2)]
    }

    /// Lipschitz bound of `|D|`.
    pub fn displacement_lipschitz(&self) -> f64 {
        self.modes
            .iter()
            .map(|ms| ms.iter().map(TrigMode::lipschitz).sum::<f64>().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Grid supremum of `|D|` plus `Lip(D)·h√3/2`, `h = 1/CERT_GRID`.
    fn certify_distance(&self) -> f64 {
        let h = 1.0 / CERT_GRID as f64;
        let mut sup = 0.0f64;
        for i in 0..CERT_GRID {
            for j in 0..CERT_GRID {
                for l in 0..CERT_GRID {
                    let d = self.displacement([i as f64 * h, j as f64 * h, l as f64 * h]);
                    sup = sup.max((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt());
                }
            }
        }
        sup + self.displacement_lipschitz() * h * 3f64.sqrt() / 2.0
    }

    pub fn apply(&self, x: &TorusPoint) -> TorusPoint {
        self.model.apply(x).translate(self.displacement(x.coords()))
    }

    /// `g⁻¹(y)` by the fixed point `x = f⁻¹(y − D(x))`, iterated until
    /// `d(g(x), y) < 1e-13`.
    pub fn apply_inverse(&self, y: &TorusPoint) -> Result<TorusPoint> {
        let mut x = self.model.apply_inverse(y);
        let mut residual = f64::INFINITY;
        for _ in 0..INVERSE_MAX_ITER {
            residual = torus_distance(&self.apply(&x), y);
            if residual < INVERSE_TOL {
                return Ok(x);
            }
            let d = self.displacement(x.coords());
            x = self.model.apply_inverse(&y.translate([-d[0], -d[1], -d[2]]));
        }
        Err(Error::Inversion(residual))
    }
}

/// The `g`-orbit of `x0` (at index 0, or the nearest window endpoint) as a
/// pseudo-orbit of `f` with the certified defect `d(f, g)`.
pub fn from_map(g: &PerturbedMap, x0: TorusPoint, window: (i64, i64)) -> Result<PseudoOrbit> {
    check_window(window)?;
    let anchor = anchor_index(window);
    let mut points = Vec::with_capacity((window.1 - window.0 + 1) as usize);
    let mut cur = x0;
    for _ in window.0..anchor {
        cur = g.apply_inverse(&cur)?;
        points.push(cur);
    }
    points.reverse();
    points.push(x0);
    let mut cur = x0;
    for _ in anchor..window.1 {
        cur = g.apply(&cur);
        points.push(cur);
    }
    PseudoOrbit::new(window.0, points, g.distance_bound())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BaseMatrix;

    fn x0() -> TorusPoint {
        TorusPoint::new(0.1234, 0.5678, 0.9012).unwrap()
    }

    #[test]
    fn zero_delta_is_a_true_orbit() {
        let m = SkewModel::default_skew();
        let o = generate_noisy(&m, x0(), (-20, 20), 0.0, 1).unwrap();
        assert_eq!(o.len(), 41);
        assert_eq!(*o.at(0), x0());
        let (f, b) = validate(&m, &o);
        assert!(f < 1e-13 && b < 1e-13, "{f} {b}");
    }

    #[test]
    fn generation_is_deterministic() {
        let m = SkewModel::default_skew();
        let a = generate_noisy(&m, x0(), (-10, 30), 1e-3, 42).unwrap();
        let b = generate_noisy(&m, x0(), (-10, 30), 1e-3, 42).unwrap();
        let c = generate_noisy(&m, x0(), (-10, 30), 1e-3, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noisy_defects_are_certified() {
        let m = SkewModel::linear(BaseMatrix::cat());
        let mu = m.base().frame().mu;
        let mut hits = 0;
        for seed in 0..100 {
            let o = generate_noisy(&m, x0(), (0, 99), 1e-4, seed).unwrap();
            let (f, b) = validate(&m, &o);
            assert!(f <= 1e-4);
            assert!(b <= mu * 1e-4 * (1.0 + 1e-9));
            if f >= 1e-5 {
                hits += 1;
            }
        }
        assert!(hits >= 99);
    }

    #[test]
    fn window_must_be_nonempty() {
        let m = SkewModel::default_skew();
        assert!(generate_noisy(&m, x0(), (3, 2), 0.0, 0).is_err());
        assert!(generate_noisy(&m, x0(), (0, 2), -1.0, 0).is_err());
        let o = generate_noisy(&m, x0(), (5, 7), 0.0, 0).unwrap();
        assert_eq!(*o.at(5), x0());
    }

    #[test]
    fn zero_perturbation_gives_true_orbit() {
        let m = SkewModel::default_skew();
        let g = PerturbedMap::new(m.clone(), [vec![], vec![], vec![]]).unwrap();
        assert_eq!(g.distance_bound(), 0.0);
        let o = from_map(&g, x0(), (-30, 30)).unwrap();
        let (f, b) = validate(&m, &o);
        assert!(f < 1e-12 && b < 1e-12);
    }

    #[test]
    fn perturbed_orbit_defect_within_certificate() {
        let m = SkewModel::default_skew();
        for amp in [1e-4, 1e-3, 1e-2] {
            let g = PerturbedMap::fiber_driven(m.clone(), amp).unwrap();
            assert!(g.distance_bound() >= amp);
            let o = from_map(&g, x0(), (-50, 50)).unwrap();
            let (f, _) = validate(&m, &o);
            assert!(f <= g.distance_bound(), "{f} > {}", g.distance_bound());
        }
    }

    #[test]
    fn inverse_of_perturbed_map() {
        let g = PerturbedMap::fiber_driven(SkewModel::default_skew(), 1e-3).unwrap();
        let mut cur = x0();
        for _ in 0..50 {
            let prev = g.apply_inverse(&cur).unwrap();
            assert!(torus_distance(&g.apply(&prev), &cur) < 1e-13);
            cur = prev;
        }
    }
}
