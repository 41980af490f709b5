//! Steps 1–3 of the construction on a subsampled orbit `X_i`, `F = f^k`.
//!
//! Both half constructions share one implementation parameterised by a
//! time direction: the backward half is the forward half for `F⁻¹` with the
//! roles of the stable and unstable foliations exchanged.

use crate::error::{Error, Result};
use crate::model::{IteratedSystem, LeafClass};
use crate::torus::{torus_distance, TorusPoint};

use super::params::ShadowingParams;

/// Growth schedule of the window `n` used when extracting the limit of
/// `y_{0,n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSchedule {
    pub start: usize,
    pub step: usize,
}

impl Default for WindowSchedule {
    fn default() -> Self {
        WindowSchedule { start: 1, step: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    /// (wide, strong) classes of the `z` intersection: (cu, s) forward.
    fn z_classes(self) -> (LeafClass, LeafClass) {
        match self {
            Direction::Forward => (LeafClass::CenterUnstable, LeafClass::Stable),
            Direction::Backward => (LeafClass::CenterStable, LeafClass::Unstable),
        }
    }

    /// (strong, wide) classes of the `z′` intersection: (u, cs) forward.
    fn z_prime_classes(self) -> (LeafClass, LeafClass) {
        match self {
            Direction::Forward => (LeafClass::Unstable, LeafClass::CenterStable),
            Direction::Backward => (LeafClass::Stable, LeafClass::CenterUnstable),
        }
    }

    /// The expanding strong class along which the half orbit is corrected.
    fn strong(self) -> LeafClass {
        self.z_prime_classes().0
    }

    fn step(self, sys: &IteratedSystem, x: &TorusPoint) -> TorusPoint {
        match self {
            Direction::Forward => sys.apply(x),
            Direction::Backward => sys.apply_inverse(x),
        }
    }

    fn unstep(self, sys: &IteratedSystem, x: &TorusPoint) -> TorusPoint {
        match self {
            Direction::Forward => sys.apply_inverse(x),
            Direction::Backward => sys.apply(x),
        }
    }
}

/// One half (Step 1 or Step 2) over `xs = X_0, X_{±1}, …, X_{±M}`.
#[derive(Debug, Clone)]
pub struct HalfConstruction<'a> {
    sys: &'a IteratedSystem,
    params: &'a ShadowingParams,
    dir: Direction,
    /// Original orbit index of `xs[i]`.
    index_of: Vec<i64>,
    pub z: Vec<TorusPoint>,
    pub z_prime: Vec<TorusPoint>,
}

impl<'a> HalfConstruction<'a> {
    /// The forward sweep: `z_i = W^{cu}(F z_{i−1}) ∩ W^s(X_i)` and
    /// `z′_i = W^u(F z_{i−1}) ∩ W^{cs}(X_i)` (mirrored for the backward half).
    pub fn new(
        sys: &'a IteratedSystem,
        params: &'a ShadowingParams,
        dir: Direction,
        xs: &[TorusPoint],
        index_of: Vec<i64>,
    ) -> Result<Self> {
        let model = sys.model();
        let radius = params.step_radius();
        let (wide, strong) = dir.z_classes();
        let (strong_p, wide_p) = dir.z_prime_classes();
        let mut z = vec![xs[0]];
        let mut z_prime = vec![xs[0]];
        for i in 1..xs.len() {
            let fz = dir.step(sys, &z[i - 1]);
            let at = |e: Error| e.at(index_of[i]);
            z.push(model.intersect(wide, &fz, strong, &xs[i], radius).map_err(at)?);
            z_prime.push(model.intersect(strong_p, &fz, wide_p, &xs[i], radius).map_err(at)?);
        }
        Ok(HalfConstruction {
            sys,
            params,
            dir,
            index_of,
            z,
            z_prime,
        })
    }

    /// Number of steps `M` available.
    pub fn len(&self) -> usize {
        self.z.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The backward sweep for window `n`: `y_n = z′_n`, then
    /// `y′_j = W^c(y_j) ∩ W^u(z′_j)` and `y_{j−1} = F⁻¹(y′_j)`.
    /// Returns `y_{0,n}, …, y_{n,n}`.
    pub fn sweep(&self, n: usize) -> Result<Vec<TorusPoint>> {
        let model = self.sys.model();
        let radius = self.params.center_radius();
        let strong = self.dir.strong();
        let mut y = vec![self.z_prime[0]; n + 1];
        y[n] = self.z_prime[n];
        for j in (1..=n).rev() {
            let yp = if j == n {
                y[n]
            } else {
                model
                    .intersect(LeafClass::Center, &y[j], strong, &self.z_prime[j], radius)
                    .map_err(|e| e.at(self.index_of[j]))?
            };
            y[j - 1] = self.dir.unstep(self.sys, &yp);
        }
        Ok(y)
    }

    /// First `n` on the schedule with `d(y_{0,n}, y_{0,n+s})` and
    /// `d(y_{0,n}, y_{0,n+2s})` both below `limit_tol`.
    pub fn limit(&self, schedule: WindowSchedule) -> Result<(TorusPoint, usize)> {
        let step = schedule.step.max(1);
        let mut n = schedule.start.max(1);
        let mut gap = f64::INFINITY;
        let mut last_n = 0;
        let first = |n: usize| self.sweep(n).map(|y| y[0]);
        while n + 2 * step <= self.len() {
            let y0 = first(n)?;
            let g1 = torus_distance(&y0, &first(n + step)?);
            let g2 = torus_distance(&y0, &first(n + 2 * step)?);
            gap = g1.max(g2);
            last_n = n;
            if gap < self.params.limit_tol {
                return Ok((y0, n));
            }
            n += step;
        }
        Err(Error::InsufficientWindow { last_n, gap })
    }

    /// The half orbit `y^u_i`: `y^u_0` is the limit point; for `i ≥ 1` the
    /// point of `W^u(z_i)` on the center leaf of the full-window sweep.
    ///
    /// Propagating `y^u_0` forward with `F` would amplify its unstable
    /// rounding error by `μᵏ` per step; the full-window sweep realises the
    /// same center leaves stably.
    pub fn half_orbit(&self, y0: TorusPoint) -> Result<Vec<TorusPoint>> {
        let model = self.sys.model();
        let radius = self.params.center_radius();
        let full = self.sweep(self.len())?;
        let mut half = vec![y0];
        for i in 1..=self.len() {
            half.push(
                model
                    .intersect(LeafClass::Center, &full[i], self.dir.strong(), &self.z[i], radius)
                    .map_err(|e| e.at(self.index_of[i]))?,
            );
        }
        Ok(half)
    }
}

/// Step 3: `y*_0 = W^s(y0_u) ∩ W^{cu}(y0_s)` and
/// `(y*_0)′ = W^{cs}(y0_u) ∩ W^u(y0_s)`.
pub fn splice(
    sys: &IteratedSystem,
    y0_u: &TorusPoint,
    y0_s: &TorusPoint,
    params: &ShadowingParams,
) -> Result<(TorusPoint, TorusPoint)> {
    let radius = params.splice_radius();
    let gap = torus_distance(y0_u, y0_s);
    if gap >= radius {
        return Err(Error::Parameter(format!(
            "half-orbit anchors are {gap:e} apart, beyond the splice radius {radius:e}"
        )));
    }
    let model = sys.model();
    let star = model.intersect(LeafClass::CenterUnstable, y0_s, LeafClass::Stable, y0_u, radius)?;
    let star_prime =
        model.intersect(LeafClass::CenterStable, y0_u, LeafClass::Unstable, y0_s, radius)?;
    Ok((star, star_prime))
}
