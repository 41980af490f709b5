//! Quasi-shadowing: tracing a δ-pseudo-orbit by a sequence that follows
//! true orbits up to a motion along the center leaf at each step.

mod params;
mod steps;
mod trace_io;
mod verify;

pub use params::{
    check_validity, delta_for_epsilon, Inequality, ShadowingParams, DEFAULT_LIMIT_TOL, MARGIN,
};
pub use steps::{splice, Direction, HalfConstruction, WindowSchedule};
pub use trace_io::{read_trace, write_trace, TraceFile};
pub use verify::{verify, Failure, FailureKind, VerifyReport, CENTER_RESIDUAL_TOL};

use crate::error::{Error, Result};
use crate::model::{LeafClass, SkewModel};
use crate::orbit::PseudoOrbit;
use crate::torus::{fiber_gap, torus_distance, TorusPoint};

/// Output of [`quasi_shadow`].
#[derive(Debug, Clone)]
pub struct ShadowingTrace {
    pub params: ShadowingParams,
    pub n_min: i64,
    /// `Y_k`: the tracing sequence.
    pub y_star: Vec<TorusPoint>,
    /// `f(Y_{k−1})`; equals `Y_k` at the first index.
    pub y_prime: Vec<TorusPoint>,
    /// Signed fiber displacement from `y_prime[k]` to `y_star[k]`.
    pub center_motions: Vec<f64>,
    /// Orbit index at which the two halves are spliced.
    pub anchor: i64,
    pub z_seq: Vec<TorusPoint>,
    pub z_prime_seq: Vec<TorusPoint>,
    /// Mirror sequences of the backward half.
    pub w_seq: Vec<TorusPoint>,
    pub w_prime_seq: Vec<TorusPoint>,
    pub y0_u: TorusPoint,
    pub y0_s: TorusPoint,
    /// `(orbit index, y^u)` for the forward half-orbit.
    pub half_u: Vec<(i64, TorusPoint)>,
    /// `(orbit index, y^s)` for the backward half-orbit.
    pub half_s: Vec<(i64, TorusPoint)>,
    /// Windows at which the forward and backward limits were accepted.
    pub n_star: (usize, usize),
}

impl ShadowingTrace {
    pub fn n_max(&self) -> i64 {
        self.n_min + self.y_star.len() as i64 - 1
    }

    pub fn at(&self, k: i64) -> &TorusPoint {
        &self.y_star[(k - self.n_min) as usize]
    }

    pub fn indexed(&self) -> impl Iterator<Item = (i64, &TorusPoint)> {
        (self.n_min..).zip(self.y_star.iter())
    }

    /// Tracing distances `d(x_k, Y_k)`.
    pub fn distances(&self, orbit: &PseudoOrbit) -> Vec<f64> {
        self.y_star
            .iter()
            .zip(orbit.points())
            .map(|(y, x)| torus_distance(x, y))
            .collect()
    }
}

/// Run the construction with parameters from [`delta_for_epsilon`].
pub fn quasi_shadow(model: &SkewModel, orbit: &PseudoOrbit, epsilon: f64) -> Result<ShadowingTrace> {
    let params = delta_for_epsilon(model, epsilon)?;
    quasi_shadow_with(model, orbit, &params, WindowSchedule::default())
}

/// Largest forward and backward defects of the subsampled orbit under `F`.
pub fn subsampled_defects(model: &SkewModel, orbit: &PseudoOrbit, k: u32) -> (f64, f64) {
    let sys = model.iterate(k);
    let (m_min, m_max) = subsampled_range(orbit.window(), k);
    let mut fwd = 0.0f64;
    let mut bwd = 0.0f64;
    for m in m_min..m_max {
        let a = orbit.at(m * k as i64);
        let b = orbit.at((m + 1) * k as i64);
        fwd = fwd.max(torus_distance(&sys.apply(a), b));
        bwd = bwd.max(torus_distance(&sys.apply_inverse(b), a));
    }
    (fwd, bwd)
}

fn subsampled_range(window: (i64, i64), k: u32) -> (i64, i64) {
    let k = k as i64;
    (window.0.div_euclid(k) + (window.0.rem_euclid(k) != 0) as i64, window.1.div_euclid(k))
}

/// Full pipeline: subsample by `k`, run both halves, splice, propagate in
/// both directions, and fill the intermediate indices.
///
/// Intermediate indices are filled backward from the next subsampled point,
/// `Y_{mk+j} = f^{−(k−j)}(Y_{(m+1)k})`, so each block of `k` steps carries
/// one center motion, at index `mk + 1`.
pub fn quasi_shadow_with(
    model: &SkewModel,
    orbit: &PseudoOrbit,
    params: &ShadowingParams,
    schedule: WindowSchedule,
) -> Result<ShadowingTrace> {
    check_validity(params)?;
    let k = params.k;
    let sys = model.iterate(k);
    let (fwd, bwd) = subsampled_defects(model, orbit, k);
    for (direction, defect) in [("forward", fwd), ("backward", bwd)] {
        if defect > params.delta_k {
            return Err(Error::DefectTooLarge {
                direction,
                defect,
                bound: params.delta_k,
            });
        }
    }
    let (m_min, m_max) = subsampled_range(orbit.window(), k);
    if m_max - m_min < 2 {
        return Err(Error::InsufficientWindow {
            last_n: 0,
            gap: f64::INFINITY,
        });
    }
    let anchor = if m_min < 0 && 0 < m_max { 0 } else { (m_min + m_max).div_euclid(2) };
    let ki = k as i64;
    let fwd_idx: Vec<i64> = (anchor..=m_max).map(|m| m * ki).collect();
    let bwd_idx: Vec<i64> = (m_min..=anchor).rev().map(|m| m * ki).collect();
    let pick = |idx: &[i64]| idx.iter().map(|&n| *orbit.at(n)).collect::<Vec<_>>();

    let forward = HalfConstruction::new(&sys, params, Direction::Forward, &pick(&fwd_idx), fwd_idx.clone())?;
    let backward =
        HalfConstruction::new(&sys, params, Direction::Backward, &pick(&bwd_idx), bwd_idx.clone())?;
    let (y0_u, n_fwd) = forward.limit(schedule)?;
    let (y0_s, n_bwd) = backward.limit(schedule)?;
    let half_u = forward.half_orbit(y0_u)?;
    let half_s = backward.half_orbit(y0_s)?;
    let (star0, star0_prime) = splice(&sys, &y0_u, &y0_s, params).map_err(|e| e.at(anchor * ki))?;

    let radius = params.center_radius();
    // subsampled tracing points, index m − m_min
    let mut sub = vec![star0; (m_max - m_min + 1) as usize];
    let a = (anchor - m_min) as usize;
    for i in 1..half_u.len() {
        let fy = sys.apply(&sub[a + i - 1]);
        sub[a + i] = model
            .intersect(LeafClass::Center, &fy, LeafClass::Stable, &half_u[i], radius)
            .map_err(|e| e.at(fwd_idx[i]))?;
    }
    let mut prev = star0_prime;
    for i in 1..half_s.len() {
        let pre = sys.apply_inverse(&prev);
        let y = model
            .intersect(LeafClass::Center, &pre, LeafClass::Unstable, &half_s[i], radius)
            .map_err(|e| e.at(bwd_idx[i]))?;
        sub[a - i] = y;
        prev = y;
    }

    let (n_min, n_max) = orbit.window();
    let mut y_star = vec![star0; orbit.len()];
    let slot = |n: i64| (n - n_min) as usize;
    for m in m_min..=m_max {
        y_star[slot(m * ki)] = sub[(m - m_min) as usize];
    }
    for m in m_min..m_max {
        for j in (1..ki).rev() {
            let next = y_star[slot(m * ki + j + 1)];
            y_star[slot(m * ki + j)] = model.apply_inverse(&next);
        }
    }
    for n in (n_min..m_min * ki).rev() {
        y_star[slot(n)] = model.apply_inverse(&y_star[slot(n + 1)]);
    }
    for n in m_max * ki + 1..=n_max {
        y_star[slot(n)] = model.apply(&y_star[slot(n - 1)]);
    }
    let mut y_prime = Vec::with_capacity(y_star.len());
    y_prime.push(y_star[0]);
    y_prime.extend(y_star.windows(2).map(|w| model.apply(&w[0])));
    let center_motions = y_prime
        .iter()
        .zip(&y_star)
        .map(|(p, y)| fiber_gap(p, y))
        .collect();

    let tag = |idx: &[i64], pts: Vec<TorusPoint>| idx.iter().copied().zip(pts).collect();
    Ok(ShadowingTrace {
        params: *params,
        n_min,
        y_star,
        y_prime,
        center_motions,
        anchor: anchor * ki,
        z_seq: forward.z.clone(),
        z_prime_seq: forward.z_prime.clone(),
        w_seq: backward.z.clone(),
        w_prime_seq: backward.z_prime.clone(),
        y0_u,
        y0_s,
        half_u: tag(&fwd_idx, half_u),
        half_s: tag(&bwd_idx, half_s),
        n_star: (n_fwd, n_bwd),
    })
}
