//! Flat geometry of the 3-torus `ℝ³/ℤ³`.
//!
//! Coordinates `c1, c2` are the base (the 2-torus the hyperbolic matrix acts
//! on) and `c3` is the fiber circle. Distances use the Euclidean norm of the
//! coordinatewise minimal lift, which is the flat quotient metric.

use std::fmt;

use crate::error::{Error, Result};

/// A point of `T³` with every coordinate in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint([f64; 3]);

/// Minimal-lift displacement between two torus points, components in `[-0.5, 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement([f64; 3]);

/// Reduce a real number modulo 1 into `[0, 1)`.
#[inline]
pub fn wrap_unit(v: f64) -> f64 {
    let r = v - v.floor();
    // v slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Minimal representative of a real difference on the circle, in `[-0.5, 0.5)`.
///
/// Ties at exactly one half resolve to `-0.5`.
#[inline]
pub fn circle_offset(d: f64) -> f64 {
    let m = d - (d + 0.5).floor();
    if m >= 0.5 {
        m - 1.0
    } else {
        m
    }
}

/// Signed fiber displacement from `a` to `b` along the center circle.
#[inline]
pub fn fiber_gap(a: &TorusPoint, b: &TorusPoint) -> f64 {
    circle_offset(b.fiber() - a.fiber())
}

/// Wrap a real triple onto the torus.
pub fn wrap(v: [f64; 3]) -> Result<TorusPoint> {
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite coordinate in {v:?}"
        )));
    }
    Ok(TorusPoint::wrapped(v))
}

/// Componentwise minimal representative of `q - p`.
pub fn minimal_displacement(p: &TorusPoint, q: &TorusPoint) -> Displacement {
    Displacement([
        circle_offset(q.0[0] - p.0[0]),
        circle_offset(q.0[1] - p.0[1]),
        circle_offset(q.0[2] - p.0[2]),
    ])
}

/// Flat distance on `T³`.
pub fn torus_distance(p: &TorusPoint, q: &TorusPoint) -> f64 {
    minimal_displacement(p, q).norm()
}

/// Flat distance between the base projections on `T²`.
pub fn base_distance(p: &TorusPoint, q: &TorusPoint) -> f64 {
    let [a, b] = base_displacement(p, q);
    a.hypot(b)
}

/// Minimal-lift displacement between base projections.
pub fn base_displacement(p: &TorusPoint, q: &TorusPoint) -> [f64; 2] {
    [
        circle_offset(q.0[0] - p.0[0]),
        circle_offset(q.0[1] - p.0[1]),
    ]
}

impl TorusPoint {
    /// Wrap finite coordinates; callers guarantee finiteness.
    pub(crate) fn wrapped(v: [f64; 3]) -> Self {
        TorusPoint([wrap_unit(v[0]), wrap_unit(v[1]), wrap_unit(v[2])])
    }

    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        wrap([c1, c2, c3])
    }

    pub fn from_base(base: [f64; 2], fiber: f64) -> Self {
        Self::wrapped([base[0], base[1], fiber])
    }

    pub fn coords(&self) -> [f64; 3] {
        self.0
    }

    pub fn base(&self) -> [f64; 2] {
        [self.0[0], self.0[1]]
    }

    pub fn fiber(&self) -> f64 {
        self.0[2]
    }

    /// Move by a real displacement and re-wrap.
    pub fn translate(&self, d: [f64; 3]) -> Self {
        Self::wrapped([self.0[0] + d[0], self.0[1] + d[1], self.0[2] + d[2]])
    }

    pub fn with_fiber(&self, fiber: f64) -> Self {
        Self::wrapped([self.0[0], self.0[1], fiber])
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

impl Displacement {
    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        let [a, b, c] = self.0;
        (a * a + b * b + c * c).sqrt()
    }
}
