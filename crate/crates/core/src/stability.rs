//! Sampled semiconjugacy `π ∘ g = τ ∘ f ∘ π` for maps `g` near `f`, with
//! continuity, density and plaque-expansiveness checks.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formats::fmt_f64;
use crate::model::SkewModel;
use crate::orbit::{from_map, PerturbedMap};
use crate::shadow::{quasi_shadow_with, ShadowingParams, WindowSchedule};
use crate::torus::{base_distance, fiber_gap, torus_distance, TorusPoint};

/// Tolerance of the per-node identity check.
pub const IDENTITY_TOL: f64 = 1e-8;

/// `π`, `π(g x)` and `τ_x` at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeValues {
    pub pi: TorusPoint,
    pub pi_g: TorusPoint,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub index: [usize; 3],
    pub x: TorusPoint,
    /// `Err` carries the shadowing failure message for this node.
    pub values: std::result::Result<NodeValues, String>,
}

#[derive(Debug, Clone)]
pub struct SemiConjugacy {
    pub grid: [usize; 3],
    pub half_length: i64,
    pub params: ShadowingParams,
    pub nodes: Vec<Node>,
}

pub fn grid_point(grid: [usize; 3], idx: [usize; 3]) -> TorusPoint {
    TorusPoint::from_base(
        [idx[0] as f64 / grid[0] as f64, idx[1] as f64 / grid[1] as f64],
        idx[2] as f64 / grid[2] as f64,
    )
}

fn node_slot(grid: [usize; 3], idx: [usize; 3]) -> usize {
    (idx[0] * grid[1] + idx[1]) * grid[2] + idx[2]
}

/// `π(x)` and `π(g x)` from the shadowing trace of the `g`-orbit of `x`
/// over `[−N, N]`: `π(x) = Y_0`, `π(g x) = Y_1`, and `τ_x` is the fiber
/// displacement from `f(π(x))` to `π(g x)`.
pub fn pi_at(
    g: &PerturbedMap,
    x: TorusPoint,
    half_length: i64,
    params: &ShadowingParams,
    schedule: WindowSchedule,
) -> Result<NodeValues> {
    let model = g.model();
    let orbit = from_map(g, x, (-half_length, half_length))?;
    let trace = quasi_shadow_with(model, &orbit, params, schedule)?;
    let pi = *trace.at(0);
    let pi_g = *trace.at(1);
    Ok(NodeValues {
        pi,
        pi_g,
        tau: fiber_gap(&model.apply(&pi), &pi_g),
    })
}

/// Sample `π` and `τ` on a regular grid; nodes run in parallel.
pub fn semiconjugacy(
    g: &PerturbedMap,
    grid: [usize; 3],
    half_length: i64,
    params: &ShadowingParams,
) -> Result<SemiConjugacy> {
    semiconjugacy_with(g, grid, half_length, params, WindowSchedule::default())
}

pub fn semiconjugacy_with(
    g: &PerturbedMap,
    grid: [usize; 3],
    half_length: i64,
    params: &ShadowingParams,
    schedule: WindowSchedule,
) -> Result<SemiConjugacy> {
    if grid.contains(&0) {
        return Err(Error::InvalidInput(format!("grid {grid:?} has an empty axis")));
    }
    if half_length < 1 {
        return Err(Error::InvalidInput(format!("half-length {half_length} must be positive")));
    }
    if g.distance_bound() >= params.delta_two_sided {
        return Err(Error::Parameter(format!(
            "d(f, g) ≤ {} is not below the admissible δ = {}",
            g.distance_bound(),
            params.delta_two_sided
        )));
    }
    let indices: Vec<[usize; 3]> = (0..grid[0])
        .flat_map(|i| (0..grid[1]).flat_map(move |j| (0..grid[2]).map(move |l| [i, j, l])))
        .collect();
    let nodes = indices
        .into_par_iter()
        .map(|index| {
            let x = grid_point(grid, index);
            let values = pi_at(g, x, half_length, params, schedule).map_err(|e| e.to_string());
            Node { index, x, values }
        })
        .collect();
    Ok(SemiConjugacy {
        grid,
        half_length,
        params: *params,
        nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeResidual {
    pub index: [usize; 3],
    /// `d_base(π(g x), f(π(x)))`.
    pub base_mismatch: f64,
    /// `√(base² + (fiber gap − τ)²)`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub residuals: Vec<NodeResidual>,
    pub max_residual: f64,
    pub max_base_mismatch: f64,
    /// Nodes whose residual is not below [`IDENTITY_TOL`].
    pub failing: Vec<[usize; 3]>,
    /// Nodes where shadowing itself failed.
    pub missing: Vec<[usize; 3]>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.failing.is_empty() && self.missing.is_empty()
    }
}

/// Recompute both sides of `π(g x) = τ_x(f(π(x)))` at every node.
pub fn check_identity(model: &SkewModel, sc: &SemiConjugacy) -> IdentityReport {
    let mut report = IdentityReport {
        residuals: Vec::new(),
        max_residual: 0.0,
        max_base_mismatch: 0.0,
        failing: Vec::new(),
        missing: Vec::new(),
    };
    for node in &sc.nodes {
        let Ok(v) = &node.values else {
            report.missing.push(node.index);
            continue;
        };
        let (base, residual) = node_residual(model, v);
        report.max_residual = report.max_residual.max(residual);
        report.max_base_mismatch = report.max_base_mismatch.max(base);
        if !(residual < IDENTITY_TOL) {
            report.failing.push(node.index);
        }
        report.residuals.push(NodeResidual {
            index: node.index,
            base_mismatch: base,
            residual,
        });
    }
    report
}

/// Largest base distance between `π(g x)` read from the trace at `x` and
/// `π` computed directly from the `g`-orbit of `g(x)`, over `samples`
/// random nodes.
pub fn equivariance_gap(g: &PerturbedMap, sc: &SemiConjugacy, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<usize> = (0..samples).map(|_| rng.random_range(0..sc.nodes.len())).collect();
    picks
        .into_par_iter()
        .map(|i| {
            let node = &sc.nodes[i];
            let v = node
                .values
                .as_ref()
                .map_err(|e| Error::InvalidInput(format!("node {:?} failed: {e}", node.index)))?;
            let direct = pi_at(g, g.apply(&node.x), sc.half_length, &sc.params, WindowSchedule::default())?;
            Ok(base_distance(&direct.pi, &v.pi_g))
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    /// Largest `d(π x, π x′)/d(x, x′)` over neighbours along each axis.
    pub max_ratio: [f64; 3],
    pub median_ratio: f64,
    /// Counts of ratios in `[2^{i−8}, 2^{i−7})`, first and last bins open.
    pub histogram: Vec<usize>,
    /// Neighbour pairs whose ratio exceeds 10× the median.
    pub anomalies: Vec<([usize; 3], [usize; 3])>,
}

pub const HISTOGRAM_BINS: usize = 16;

/// Modulus-of-continuity table of `π` over periodic grid neighbours.
pub fn continuity_report(sc: &SemiConjugacy) -> ContinuityReport {
    let grid = sc.grid;
    let mut pairs = Vec::new();
    for node in &sc.nodes {
        for axis in 0..3 {
            if grid[axis] < 2 {
                continue;
            }
            let mut nb = node.index;
            nb[axis] = (nb[axis] + 1) % grid[axis];
            if grid[axis] == 2 && nb[axis] == 0 {
                continue; // the pair was already seen from the other end
            }
            let other = &sc.nodes[node_slot(grid, nb)];
            if let (Ok(a), Ok(b)) = (&node.values, &other.values) {
                let ratio = torus_distance(&a.pi, &b.pi) / torus_distance(&node.x, &other.x);
                pairs.push((axis, node.index, nb, ratio));
            }
        }
    }
    let mut sorted: Vec<f64> = pairs.iter().map(|p| p.3).collect();
    sorted.sort_by(f64::total_cmp);
    let median_ratio = sorted.get(sorted.len() / 2).copied().unwrap_or(0.0);
    let mut max_ratio = [0.0f64; 3];
    let mut histogram = vec![0; HISTOGRAM_BINS];
    let mut anomalies = Vec::new();
    for &(axis, a, b, r) in &pairs {
        max_ratio[axis] = max_ratio[axis].max(r);
        let bin = (r.log2().floor() + 8.0).clamp(0.0, (HISTOGRAM_BINS - 1) as f64) as usize;
        histogram[bin] += 1;
        if r > 10.0 * median_ratio {
            anomalies.push((a, b));
        }
    }
    ContinuityReport {
        max_ratio,
        median_ratio,
        histogram,
        anomalies,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    /// `sup d(π x, x)` over nodes.
    pub sup_displacement: f64,
    /// Largest distance from a node to the nearest `π`-image.
    pub density_gap: f64,
    pub grid_spacing: f64,
    /// Set when the grid is too coarse for the density proxy to mean
    /// anything at this `ε`.
    pub insufficient_resolution: bool,
    pub epsilon: f64,
}

impl DensityReport {
    pub fn passed(&self) -> bool {
        !self.insufficient_resolution
            && self.sup_displacement < self.epsilon
            && self.density_gap < self.epsilon
    }
}

/// ε-density of the image of `π` plus `sup d(π, id)`.
pub fn surjectivity_density(sc: &SemiConjugacy, epsilon: f64) -> DensityReport {
    let images: Vec<TorusPoint> = sc.nodes.iter().filter_map(|n| n.values.as_ref().ok().map(|v| v.pi)).collect();
    let sup_displacement = sc
        .nodes
        .iter()
        .filter_map(|n| n.values.as_ref().ok().map(|v| torus_distance(&v.pi, &n.x)))
        .fold(0.0f64, f64::max);
    let density_gap = sc
        .nodes
        .par_iter()
        .map(|n| images.iter().map(|p| torus_distance(p, &n.x)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max);
    let grid_spacing = sc.grid.iter().map(|&n| 1.0 / n as f64).fold(0.0, f64::max);
    DensityReport {
        sup_displacement,
        density_gap,
        grid_spacing,
        insufficient_resolution: grid_spacing > epsilon,
        epsilon,
    }
}

/// Rows `i1 i2 i3 pi1 pi2 pi3 tau residual`; failed nodes become comments.
pub fn write_semiconjugacy<W: Write>(
    mut w: W,
    model: &SkewModel,
    sc: &SemiConjugacy,
    model_label: &str,
    perturbation: &str,
) -> Result<()> {
    let p = &sc.params;
    writeln!(w, "# model: {model_label}")?;
    writeln!(w, "# perturbation: {perturbation}")?;
    writeln!(w, "# grid: {} {} {}", sc.grid[0], sc.grid[1], sc.grid[2])?;
    writeln!(w, "# half_length: {}", sc.half_length)?;
    writeln!(
        w,
        "# params: epsilon {} delta {} alpha {} r1 {} r2 {} k {} limit_tol {}",
        fmt_f64(p.epsilon),
        fmt_f64(p.delta_two_sided),
        fmt_f64(p.alpha),
        fmt_f64(p.r1),
        fmt_f64(p.r2),
        p.k,
        fmt_f64(p.limit_tol)
    )?;
    for node in &sc.nodes {
        let [i, j, l] = node.index;
        match &node.values {
            Ok(v) => {
                let [a, b, c] = v.pi.coords();
                let (_, residual) = node_residual(model, v);
                writeln!(
                    w,
                    "{i} {j} {l} {} {} {} {} {}",
                    fmt_f64(a),
                    fmt_f64(b),
                    fmt_f64(c),
                    fmt_f64(v.tau),
                    fmt_f64(residual)
                )?;
            }
            Err(e) => writeln!(w, "# node {i} {j} {l} failed: {e}")?,
        }
    }
    Ok(())
}

/// `(base mismatch, identity residual)` of one node.
fn node_residual(model: &SkewModel, v: &NodeValues) -> (f64, f64) {
    let fpi = model.apply(&v.pi);
    let base = base_distance(&fpi, &v.pi_g);
    (base, base.hypot(fiber_gap(&fpi, &v.pi_g) - v.tau))
}

/// Outcome of the plaque-expansiveness probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub eta: f64,
    pub trials: usize,
    /// Pairs of η-center-pseudo-orbits that stayed η-close over the window.
    pub close_pairs: usize,
    /// Largest base distance at any index of a close pair.
    pub max_base_gap: f64,
    /// Close pairs whose bases differ by more than `1e-8` somewhere.
    pub violations: usize,
    /// For the adversarial pairs: steps needed to separate beyond 0.1, and
    /// the hyperbolic bound on that number.
    pub separation_steps: Vec<(usize, usize)>,
    /// Adversarial pairs that never separated within the window.
    pub unseparated: usize,
}

impl ProbeReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
            && self.unseparated == 0
            && self.separation_steps.iter().all(|(s, b)| s <= b)
    }
}

const SEPARATION: f64 = 0.1;

/// Test that center-pseudo-orbits staying η-close share base coordinates,
/// and that base offsets of size `2η` separate at the hyperbolic rate.
pub fn plaque_expansiveness_probe(
    model: &SkewModel,
    eta: f64,
    trials: usize,
    half_length: usize,
    seed: u64,
) -> Result<ProbeReport> {
    if !(eta > 0.0 && eta < 0.05) {
        return Err(Error::InvalidInput(format!("eta = {eta} must be in (0, 0.05)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = *model.base().frame();
    let mut report = ProbeReport {
        eta,
        trials,
        close_pairs: 0,
        max_base_gap: 0.0,
        violations: 0,
        separation_steps: Vec::new(),
        unseparated: 0,
    };
    for _ in 0..trials {
        let x0 = TorusPoint::from_base([rng.random(), rng.random()], rng.random());
        // Center-pseudo-orbits: the true orbit with a fiber offset of at
        // most η/2 at each index, so each step lands in the η-center plaque
        // of the image and the pair stays η-close.
        let a = jittered_orbit(model, x0, half_length, eta, &mut rng);
        let b = jittered_orbit(model, x0, half_length, eta, &mut rng);
        let close = a.iter().zip(&b).all(|(p, q)| torus_distance(p, q) <= eta);
        if close {
            report.close_pairs += 1;
            let gap = a.iter().zip(&b).map(|(p, q)| base_distance(p, q)).fold(0.0, f64::max);
            report.max_base_gap = report.max_base_gap.max(gap);
            if gap > 1e-8 {
                report.violations += 1;
            }
        }
        // adversarial: base offset of size 2η at index 0
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let d = [2.0 * eta * theta.cos(), 2.0 * eta * theta.sin()];
        let (ua, sb) = frame.decompose(d);
        let component = ua.abs().max(sb.abs());
        let bound = ((SEPARATION / component).ln() / frame.mu.ln()).ceil() as usize + 2;
        let y0 = x0.translate([d[0], d[1], 0.0]);
        let mut fx = x0;
        let mut fy = y0;
        let mut bx = x0;
        let mut by = y0;
        let mut steps = None;
        for n in 1..=half_length {
            fx = model.apply(&fx);
            fy = model.apply(&fy);
            bx = model.apply_inverse(&bx);
            by = model.apply_inverse(&by);
            if torus_distance(&fx, &fy) > SEPARATION || torus_distance(&bx, &by) > SEPARATION {
                steps = Some(n);
                break;
            }
        }
        match steps {
            Some(n) => report.separation_steps.push((n, bound)),
            None => report.unseparated += 1,
        }
    }
    Ok(report)
}

fn jittered_orbit<R: Rng>(model: &SkewModel, x0: TorusPoint, n: usize, eta: f64, rng: &mut R) -> Vec<TorusPoint> {
    let mut fwd = vec![x0];
    let mut back = Vec::new();
    let mut cur = x0;
    for _ in 0..n {
        cur = model.apply(&cur);
        fwd.push(cur);
    }
    cur = x0;
    for _ in 0..n {
        cur = model.apply_inverse(&cur);
        back.push(cur);
    }
    back.reverse();
    back.extend(fwd);
    back.into_iter()
        .map(|p| p.translate([0.0, 0.0, rng.random_range(-eta / 2.0..=eta / 2.0)]))
        .collect()
}
