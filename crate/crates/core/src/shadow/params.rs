//! Selection of `δ(ε)`, the power `k`, and the holonomy data.

use crate::error::{Error, Result};
use crate::model::{SkewModel, DELTA0, DELTA1};

pub const DEFAULT_LIMIT_TOL: f64 = 1e-12;

/// Required ratio between each bound and its left-hand side.
pub const MARGIN: f64 = 2.0;

/// Largest power searched for `2λᵏL0 < 1/2`.
const MAX_POWER: u32 = 64;

/// Parameters of one shadowing run.
///
/// `delta` is the admissible forward defect of the original pseudo-orbit;
/// `delta_two_sided` the admissible bound on both its forward and backward
/// defects; `delta_k` the resulting defect bound (forward and backward) of
/// the subsampled orbit `x_{mk}` under `F = f^k`. The four inequalities of
/// [`ShadowingParams::invariants`] are stated for `F`, hence in `delta_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowingParams {
    pub epsilon: f64,
    pub delta: f64,
    pub delta_two_sided: f64,
    pub delta_k: f64,
    pub alpha: f64,
    pub r1: f64,
    pub r2: f64,
    pub k: u32,
    pub limit_tol: f64,
    pub l0: f64,
    /// Stable rate of `F`, `λᵏ`.
    pub lambda_k: f64,
}

/// One inequality `lhs < rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inequality {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl Inequality {
    pub fn margin(&self) -> f64 {
        self.rhs / self.lhs
    }
}

impl ShadowingParams {
    pub fn invariants(&self) -> [Inequality; 4] {
        let (l0, lk, d) = (self.l0, self.lambda_k, self.delta_k);
        [
            Inequality {
                name: "2·λᵏ·L0 < 1",
                lhs: 2.0 * lk * l0,
                rhs: 1.0,
            },
            Inequality {
                name: "δ·(1 + 2L0 + 2λᵏL0) < ε/3",
                lhs: d * (1.0 + 2.0 * l0 + 2.0 * lk * l0),
                rhs: self.epsilon / 3.0,
            },
            Inequality {
                name: "λᵏ·(2L0·δ + α) < r2",
                lhs: lk * (2.0 * l0 * d + self.alpha),
                rhs: self.r2,
            },
            Inequality {
                name: "α < ε/3",
                lhs: self.alpha,
                rhs: self.epsilon / 3.0,
            },
        ]
    }

    /// Plaque radius used for the Step 1–2 intersections.
    pub fn step_radius(&self) -> f64 {
        2.0 * self.delta_k
    }

    /// Plaque radius of the splice, `2λᵏ(L0·δ + α)` before the `L0` blowup.
    pub fn splice_radius(&self) -> f64 {
        2.0 * self.lambda_k * (self.l0 * self.delta_k + self.alpha)
    }

    /// Plaque radius for center/strong intersections: anything reaching
    /// beyond `2ε/3` would already break the half-orbit bound.
    pub fn center_radius(&self) -> f64 {
        2.0 * self.epsilon / (3.0 * self.l0)
    }
}

/// `Σ_{j<k} L^j`.
fn geometric_sum(l: f64, k: u32) -> f64 {
    (0..k).map(|j| l.powi(j as i32)).sum()
}

/// Choose the power `k`, `α`, and the largest-margin `δ` for target
/// accuracy `epsilon`.
///
/// `k` is the smallest power with `2λᵏL0 < 1/2`. `δ_k` is half the largest
/// value satisfying the ε and `r2` inequalities with a factor-2 margin, and
/// `delta = δ_k / max(Σ Lip(f)^j, Lip(f⁻¹)·Σ Lip(f⁻¹)^j)` so that both the
/// forward and the backward defect of the subsampled orbit stay below `δ_k`
/// (a forward defect `δ` implies a backward defect `Lip(f⁻¹)·δ`). When both
/// defects are known to be small, `delta_two_sided = δ_k / max(Σ Lip(f)^j,
/// Σ Lip(f⁻¹)^j)` suffices.
pub fn delta_for_epsilon(model: &SkewModel, epsilon: f64) -> Result<ShadowingParams> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!("epsilon = {epsilon} must be positive")));
    }
    if epsilon >= 0.5 {
        return Err(Error::Parameter(format!(
            "epsilon = {epsilon} is not below the torus scale 0.5"
        )));
    }
    let c = model.compute_constants(epsilon)?;
    let lambda = model.rates().lambda;
    let k = (1..=MAX_POWER)
        .find(|&k| 2.0 * lambda.powi(k as i32) * c.l0 < 0.5)
        .ok_or_else(|| Error::Parameter("no power k with 2λᵏL0 < 1/2".into()))?;
    let lk = lambda.powi(k as i32);
    let l0 = c.l0;
    let by_epsilon = epsilon / (3.0 * MARGIN * (1.0 + 2.0 * l0 + 2.0 * lk * l0));
    let by_modulus = (c.r2 / (MARGIN * lk) - c.alpha) / (2.0 * l0);
    if by_modulus <= 0.0 {
        return Err(Error::Parameter(format!(
            "λᵏ·α = {} leaves no room below r2/2 = {}",
            lk * c.alpha,
            c.r2 / 2.0
        )));
    }
    let delta_k = 0.5 * by_epsilon.min(by_modulus);
    let forward = geometric_sum(model.lipschitz(), k);
    let backward = geometric_sum(model.inverse_lipschitz(), k);
    let params = ShadowingParams {
        epsilon,
        delta: delta_k / forward.max(model.inverse_lipschitz() * backward),
        delta_two_sided: delta_k / forward.max(backward),
        delta_k,
        alpha: c.alpha,
        r1: c.r1,
        r2: c.r2,
        k,
        limit_tol: DEFAULT_LIMIT_TOL,
        l0,
        lambda_k: lk,
    };
    check_validity(&params)?;
    Ok(params)
}

/// Every plaque radius used by the construction must stay inside the
/// region where the local product structure and the rates are certified.
pub fn check_validity(p: &ShadowingParams) -> Result<()> {
    let cap = (p.l0 * DELTA0).min(DELTA1);
    let radii = [
        ("2·L0·δ", 2.0 * p.l0 * p.delta_k),
        ("2λᵏL0(L0δ + α)", p.l0 * p.splice_radius()),
    ];
    for (name, r) in radii {
        if r >= cap {
            return Err(Error::Parameter(format!(
                "{name} = {r} is not below min(L0·δ0, δ1) = {cap}; epsilon = {} is too large",
                p.epsilon
            )));
        }
    }
    let family = p.l0 * DELTA0 / 3.0;
    if p.r1 >= family || p.r2 >= family {
        return Err(Error::Parameter(format!(
            "holonomy radii r1 = {}, r2 = {} are not below L0·δ0/3 = {family}",
            p.r1, p.r2
        )));
    }
    Ok(())
}
