//! Exact foliation oracles for skew products.
//!
//! Center leaves are the vertical fiber circles. Center-stable and
//! center-unstable leaves are (base stable/unstable line) × (fiber circle).
//! Strong stable and unstable leaves are graphs over the base lines, with the
//! fiber offset given by the transfer series
//!
//! ```text
//! h_s(p, q) = Σ_{n≥0} [φ(Aⁿp) − φ(Aⁿq)]
//! h_u(p, q) = Σ_{n≥1} [φ(A⁻ⁿq) − φ(A⁻ⁿp)]
//! ```
//!
//! All leaf computations happen in the minimal lift around the first point;
//! base displacements above [`LIFT_LIMIT`] are rejected.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::skew::SkewModel;
use crate::error::{Error, Result};
use crate::torus::{base_displacement, circle_offset, torus_distance, TorusPoint};

/// Largest base displacement accepted by any leaf computation.
pub const LIFT_LIMIT: f64 = 0.25;

/// Tolerance for "these two points share a center-stable / center-unstable
/// leaf" in the center/strong intersections.
pub const COMMON_LEAF_TOL: f64 = 1e-8;

/// Tolerance for "this base displacement is parallel to the stable / unstable
/// direction" in the transfer functions.
pub const LINE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafClass {
    Stable,
    Center,
    Unstable,
    CenterStable,
    CenterUnstable,
}

impl fmt::Display for LeafClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LeafClass::Stable => "s",
            LeafClass::Center => "c",
            LeafClass::Unstable => "u",
            LeafClass::CenterStable => "cs",
            LeafClass::CenterUnstable => "cu",
        };
        f.write_str(s)
    }
}

/// A local stable or unstable plaque, identified by one of its points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plaque {
    pub class: LeafClass,
    pub point: TorusPoint,
}

impl SkewModel {
    fn checked_base_offset(&self, p: [f64; 2], q: [f64; 2]) -> Result<(f64, f64)> {
        let d = [circle_offset(q[0] - p[0]), circle_offset(q[1] - p[1])];
        let n = d[0].hypot(d[1]);
        if n > LIFT_LIMIT {
            return Err(Error::LiftAmbiguity(n));
        }
        Ok(self.base().frame().decompose(d))
    }

    /// Sum of the stable transfer series for `q = p + t·v_s`.
    pub(crate) fn stable_series(&self, p: [f64; 2], t: f64) -> f64 {
        if t == 0.0 || self.modes().is_empty() {
            return 0.0;
        }
        let frame = *self.base().frame();
        let lip = self.phi_lipschitz();
        let tol = self.series_tol();
        let mut sum = 0.0;
        let mut pn = p;
        let mut tn = t;
        loop {
            let qn = [pn[0] + tn * frame.v_s[0], pn[1] + tn * frame.v_s[1]];
            sum += self.phi(pn) - self.phi(qn);
            pn = self.base().apply(pn);
            tn *= frame.lambda;
            if lip * tn.abs() / (1.0 - frame.lambda) < tol {
                return sum;
            }
        }
    }

    /// Sum of the unstable transfer series for `q = p + s·v_u`.
    pub(crate) fn unstable_series(&self, p: [f64; 2], s: f64) -> f64 {
        if s == 0.0 || self.modes().is_empty() {
            return 0.0;
        }
        let frame = *self.base().frame();
        let lip = self.phi_lipschitz();
        let tol = self.series_tol();
        let mut sum = 0.0;
        let mut pn = self.base().apply_inverse(p);
        let mut sn = s * frame.lambda;
        loop {
            let qn = [pn[0] + sn * frame.v_u[0], pn[1] + sn * frame.v_u[1]];
            sum += self.phi(qn) - self.phi(pn);
            pn = self.base().apply_inverse(pn);
            sn *= frame.lambda;
            if lip * sn.abs() / (1.0 - frame.lambda) < tol {
                return sum;
            }
        }
    }

    /// Fiber offset `h_s(p, q)` carrying `(p, z)` to the point over `q` on
    /// its strong stable leaf.
    pub fn transfer_stable(&self, p: [f64; 2], q: [f64; 2]) -> Result<f64> {
        let (along_u, t) = self.checked_base_offset(p, q)?;
        if along_u.abs() > LINE_TOL {
            return Err(Error::LeafMembership {
                class: LeafClass::Stable,
                residual: along_u.abs(),
            });
        }
        Ok(self.stable_series(p, t))
    }

    /// Fiber offset `h_u(p, q)` along the strong unstable leaf.
    pub fn transfer_unstable(&self, p: [f64; 2], q: [f64; 2]) -> Result<f64> {
        let (s, along_s) = self.checked_base_offset(p, q)?;
        if along_s.abs() > LINE_TOL {
            return Err(Error::LeafMembership {
                class: LeafClass::Unstable,
                residual: along_s.abs(),
            });
        }
        Ok(self.unstable_series(p, s))
    }

    /// Distance-like residual of `y` from the `class` leaf through `x`.
    ///
    /// For strong leaves this is the larger of the off-line base component
    /// and the fiber error against the transfer series. Returns infinity when
    /// the base displacement is outside the lift limit.
    pub fn membership_residual(&self, class: LeafClass, x: &TorusPoint, y: &TorusPoint) -> f64 {
        let Ok((a, b)) = self.checked_base_offset(x.base(), y.base()) else {
            return f64::INFINITY;
        };
        let gap = circle_offset(y.fiber() - x.fiber());
        match class {
            LeafClass::Center => {
                let d = base_displacement(x, y);
                d[0].hypot(d[1])
            }
            LeafClass::CenterUnstable => b.abs(),
            LeafClass::CenterStable => a.abs(),
            LeafClass::Stable => {
                let h = self.stable_series(x.base(), b);
                a.abs().max(circle_offset(gap - h).abs())
            }
            LeafClass::Unstable => {
                let h = self.unstable_series(x.base(), a);
                b.abs().max(circle_offset(gap - h).abs())
            }
        }
    }

    /// The single point of `W^{class_x}(x) ∩ W^{class_y}(y)`.
    ///
    /// Supported pairs are (cu, s), (cs, u), and within a common cu- or
    /// cs-leaf (c, u) and (c, s), in either order. The result must lie
    /// within `L0·radius` of both inputs.
    pub fn intersect(
        &self,
        class_x: LeafClass,
        x: &TorusPoint,
        class_y: LeafClass,
        y: &TorusPoint,
        radius: f64,
    ) -> Result<TorusPoint> {
        use LeafClass::*;
        let point = match (class_x, class_y) {
            (CenterUnstable, Stable) | (CenterStable, Unstable) | (Center, Unstable) | (Center, Stable) => {
                self.intersect_ordered(class_x, x, class_y, y)?
            }
            (Stable, CenterUnstable) | (Unstable, CenterStable) | (Unstable, Center) | (Stable, Center) => {
                self.intersect_ordered(class_y, y, class_x, x)?
            }
            _ => return Err(Error::UnsupportedPair(class_x, class_y)),
        };
        let bound = self.intersection_blowup() * radius;
        let distance = torus_distance(&point, x).max(torus_distance(&point, y));
        if distance > bound {
            return Err(Error::OutsideRadius { distance, bound });
        }
        Ok(point)
    }

    /// `W^{wide}(x) ∩ W^{strong}(y)` where `strong` is s or u.
    fn intersect_ordered(
        &self,
        wide: LeafClass,
        x: &TorusPoint,
        strong: LeafClass,
        y: &TorusPoint,
    ) -> Result<TorusPoint> {
        use LeafClass::*;
        let frame = *self.base().frame();
        // d = p_x - p_y = a·v_u + b·v_s
        let (a, b) = self.checked_base_offset(y.base(), x.base())?;
        let py = y.base();
        let on_stable = |t: f64| {
            let q = [py[0] + t * frame.v_s[0], py[1] + t * frame.v_s[1]];
            TorusPoint::from_base(q, y.fiber() + self.stable_series(py, t))
        };
        let on_unstable = |s: f64| {
            let q = [py[0] + s * frame.v_u[0], py[1] + s * frame.v_u[1]];
            TorusPoint::from_base(q, y.fiber() + self.unstable_series(py, s))
        };
        match (wide, strong) {
            // p_x + s·v_u = p_y + t·v_s  ⇒  t = b
            (CenterUnstable, Stable) => Ok(on_stable(b)),
            // p_x + t·v_s = p_y + s·v_u  ⇒  s = a
            (CenterStable, Unstable) => Ok(on_unstable(a)),
            (Center, Unstable) => {
                if b.abs() > COMMON_LEAF_TOL {
                    return Err(Error::LeafMembership {
                        class: CenterUnstable,
                        residual: b.abs(),
                    });
                }
                Ok(on_unstable(a))
            }
            (Center, Stable) => {
                if a.abs() > COMMON_LEAF_TOL {
                    return Err(Error::LeafMembership {
                        class: CenterStable,
                        residual: a.abs(),
                    });
                }
                Ok(on_stable(b))
            }
            _ => Err(Error::UnsupportedPair(wide, strong)),
        }
    }

    /// Slide `source` along its center leaf onto the stable or unstable
    /// plaque `target`.
    ///
    /// `source` must lie within `r1` of the center-unstable (for an unstable
    /// target) or center-stable (for a stable target) plaque of `anchor`.
    pub fn holonomy_along_center(
        &self,
        anchor: &TorusPoint,
        source: &TorusPoint,
        target: &Plaque,
        r1: f64,
    ) -> Result<TorusPoint> {
        let family = match target.class {
            LeafClass::Unstable => LeafClass::CenterUnstable,
            LeafClass::Stable => LeafClass::CenterStable,
            other => return Err(Error::UnsupportedPair(LeafClass::Center, other)),
        };
        let off = self.membership_residual(family, anchor, source);
        if off > COMMON_LEAF_TOL || torus_distance(anchor, source) > r1 {
            return Err(Error::LeafMembership {
                class: family,
                residual: off.max(torus_distance(anchor, source) - r1),
            });
        }
        self.intersect(LeafClass::Center, source, target.class, &target.point, r1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BaseMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(a: f64, b: f64, c: f64) -> TorusPoint {
        TorusPoint::new(a, b, c).unwrap()
    }

    #[test]
    fn transfer_vanishes_on_coincident_points_and_linear_model() {
        let skew = SkewModel::default_skew();
        let p = [0.3, 0.6];
        assert_eq!(skew.transfer_stable(p, p).unwrap(), 0.0);
        assert_eq!(skew.transfer_unstable(p, p).unwrap(), 0.0);
        let lin = SkewModel::linear(BaseMatrix::cat());
        let f = *lin.base().frame();
        let q = [p[0] + 0.01 * f.v_s[0], p[1] + 0.01 * f.v_s[1]];
        assert_eq!(lin.transfer_stable(p, q).unwrap(), 0.0);
        let q = [p[0] + 0.01 * f.v_u[0], p[1] + 0.01 * f.v_u[1]];
        assert_eq!(lin.transfer_unstable(p, q).unwrap(), 0.0);
    }

    #[test]
    fn transfer_rejects_off_line_points() {
        let skew = SkewModel::default_skew();
        let r = skew.transfer_stable([0.1, 0.1], [0.11, 0.11]);
        assert!(matches!(r, Err(Error::LeafMembership { .. })));
        let r = skew.transfer_unstable([0.1, 0.1], [0.4, 0.4]);
        assert!(matches!(r, Err(Error::LiftAmbiguity(_))));
    }

    #[test]
    fn linear_intersection_example() {
        let lin = SkewModel::linear(BaseMatrix::cat());
        let vs = lin.base().frame().v_s;
        let x = pt(0.0, 0.0, 0.2);
        let y = pt(0.01 * vs[0], 0.01 * vs[1], 0.7);
        let z = lin
            .intersect(LeafClass::CenterUnstable, &x, LeafClass::Stable, &y, 0.5)
            .unwrap();
        assert!(torus_distance(&z, &pt(0.0, 0.0, 0.7)) < 1e-15);
        // coincident bases
        let y = pt(0.0, 0.0, 0.7);
        let z = lin
            .intersect(LeafClass::CenterUnstable, &x, LeafClass::Stable, &y, 0.6)
            .unwrap();
        assert_eq!(z.coords(), [0.0, 0.0, 0.7]);
    }

    #[test]
    fn linear_intersection_matches_closed_form() {
        let lin = SkewModel::linear(BaseMatrix::cat());
        let f = *lin.base().frame();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x = pt(rng.random(), rng.random(), rng.random());
            let d: [f64; 3] = [
                rng.random_range(-0.05..0.05),
                rng.random_range(-0.05..0.05),
                rng.random_range(-0.05..0.05),
            ];
            let y = x.translate(d);
            // closed form: cu(x) ∩ s(y) keeps y's fiber; s v_u - t v_s = d
            // by Cramer's rule, result p_y + t v_s
            let det = f.v_u[0] * (-f.v_s[1]) - (-f.v_s[0]) * f.v_u[1];
            let t = (f.v_u[0] * d[1] - d[0] * f.v_u[1]) / det;
            let expect = x.translate([d[0] + t * f.v_s[0], d[1] + t * f.v_s[1], d[2]]);
            let z = lin
                .intersect(LeafClass::CenterUnstable, &x, LeafClass::Stable, &y, 0.1)
                .unwrap();
            assert!(torus_distance(&z, &expect) < 1e-14);
        }
    }

    #[test]
    fn intersection_lies_on_both_leaves() {
        let skew = SkewModel::default_skew();
        let tol = 10.0 * skew.series_tol();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let x = pt(rng.random(), rng.random(), rng.random());
            let y = x.translate([
                rng.random_range(-0.03..0.03),
                rng.random_range(-0.03..0.03),
                rng.random_range(-0.03..0.03),
            ]);
            let z = skew
                .intersect(LeafClass::CenterUnstable, &x, LeafClass::Stable, &y, 0.06)
                .unwrap();
            assert!(skew.membership_residual(LeafClass::CenterUnstable, &x, &z) < tol);
            assert!(skew.membership_residual(LeafClass::Stable, &y, &z) < tol);
            let w = skew
                .intersect(LeafClass::CenterStable, &y, LeafClass::Unstable, &x, 0.06)
                .unwrap();
            assert!(skew.membership_residual(LeafClass::CenterStable, &y, &w) < tol);
            assert!(skew.membership_residual(LeafClass::Unstable, &x, &w) < tol);
            // cu(x) ∩ s(y) and cs(y) ∩ u(x) share a center leaf
            assert!(crate::torus::base_distance(&z, &w) < 1e-14);
        }
    }

    #[test]
    fn center_intersections_require_common_leaf() {
        let skew = SkewModel::default_skew();
        let vu = skew.base().frame().v_u;
        let y = pt(0.4, 0.4, 0.4);
        let on_cu = y.translate([0.01 * vu[0], 0.01 * vu[1], 0.03]);
        let z = skew
            .intersect(LeafClass::Center, &on_cu, LeafClass::Unstable, &y, 0.05)
            .unwrap();
        assert!(crate::torus::base_distance(&z, &on_cu) < 1e-15);
        assert!(skew.membership_residual(LeafClass::Unstable, &y, &z) < 1e-11);
        let off = y.translate([0.01, -0.01, 0.0]);
        assert!(skew
            .intersect(LeafClass::Center, &off, LeafClass::Unstable, &y, 0.05)
            .is_err());
        assert!(matches!(
            skew.intersect(LeafClass::Stable, &y, LeafClass::Unstable, &y, 0.05),
            Err(Error::UnsupportedPair(..))
        ));
    }

    #[test]
    fn lift_ambiguity_and_radius_errors() {
        let skew = SkewModel::default_skew();
        let x = pt(0.1, 0.1, 0.1);
        let far = pt(0.4, 0.4, 0.1);
        assert!(matches!(
            skew.intersect(LeafClass::CenterUnstable, &x, LeafClass::Stable, &far, 1.0),
            Err(Error::LiftAmbiguity(_))
        ));
        let y = pt(0.15, 0.1, 0.1);
        assert!(matches!(
            skew.intersect(LeafClass::CenterUnstable, &x, LeafClass::Stable, &y, 1e-3),
            Err(Error::OutsideRadius { .. })
        ));
    }

    #[test]
    fn holonomy_identity_and_linear_lift() {
        let lin = SkewModel::linear(BaseMatrix::cat());
        let vu = lin.base().frame().v_u;
        let anchor = pt(0.3, 0.2, 0.5);
        let source = anchor.translate([0.01 * vu[0], 0.01 * vu[1], 0.0]);
        let same = Plaque {
            class: LeafClass::Unstable,
            point: anchor,
        };
        let h = lin.holonomy_along_center(&anchor, &source, &same, 0.05).unwrap();
        assert!(torus_distance(&h, &source) < 1e-15);
        let higher = Plaque {
            class: LeafClass::Unstable,
            point: anchor.with_fiber(0.53),
        };
        let h = lin.holonomy_along_center(&anchor, &source, &higher, 0.05).unwrap();
        assert!(crate::torus::base_distance(&h, &source) < 1e-15);
        assert!((h.fiber() - 0.53).abs() < 1e-15);
    }
}
