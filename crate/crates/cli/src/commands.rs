use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use quasishadow::formats::{fmt_f64, read_orbit, write_orbit, OrbitHeader};
use quasishadow::model::ModelFile;
use quasishadow::oracle::linear_shadow;
use quasishadow::orbit::{generate_noisy, seeded_point, validate, PerturbedMap};
use quasishadow::shadow::{
    delta_for_epsilon, quasi_shadow_with, read_trace, verify, write_trace, WindowSchedule,
};
use quasishadow::stability::{
    check_identity, continuity_report, plaque_expansiveness_probe, semiconjugacy,
    surjectivity_density, write_semiconjugacy,
};
use quasishadow::torus::torus_distance;
use quasishadow::SkewModel;

use crate::manifest::{Derived, Inputs, Manifest, Params};

/// Gap to the closed-form oracle accepted by `verify` on linear models.
const ORACLE_TOL: f64 = 1e-8;

/// Floating-point slack when checking a generated orbit against its δ.
const ROUNDOFF: f64 = 1e-12;

/// Everything a command needs; built from flags or from a manifest.
pub struct Run {
    pub command: String,
    pub model: SkewModel,
    pub model_label: String,
    pub params: Params,
    pub inputs: Inputs,
    pub out: PathBuf,
}

impl Run {
    fn manifest(&self, params: Params, inputs: Inputs, derived: Option<Derived>) -> Manifest {
        Manifest {
            command: self.command.clone(),
            model_label: self.model_label.clone(),
            params,
            inputs,
            derived,
            model: ModelFile::from_model(&self.model),
        }
    }

    fn input(&self, given: &Option<PathBuf>, default: &str) -> Result<PathBuf> {
        let path = given.clone().unwrap_or_else(|| self.out.join(default));
        std::fs::canonicalize(&path).with_context(|| format!("input {}", path.display()))
    }
}

pub fn dispatch(run: &Run) -> Result<bool> {
    std::fs::create_dir_all(&run.out)
        .with_context(|| format!("creating output directory {}", run.out.display()))?;
    match run.command.as_str() {
        "constants" => constants(run),
        "orbit" => orbit(run),
        "shadow" => shadow(run),
        "verify" => verify_cmd(run),
        "stability" => stability(run),
        "probe" => probe(run),
        other => bail!("unknown command {other:?}"),
    }
}

fn create(out: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = out.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn summary(pass: bool, command: &str, detail: String) -> bool {
    println!("{} {command}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn constants(run: &Run) -> Result<bool> {
    let epsilon = run.params.epsilon.unwrap_or(1e-2);
    let p = delta_for_epsilon(&run.model, epsilon)?;
    let rates = run.model.rates();
    let c = run.model.compute_constants(epsilon)?;
    let mut text = String::new();
    text.push_str(&format!("# model: {}\n", run.model_label));
    for (key, v) in [
        ("lambda", rates.lambda),
        ("mu", rates.mu),
        ("lambda_prime", rates.lambda_prime),
        ("mu_prime", rates.mu_prime),
        ("delta0", c.delta0),
        ("delta1", rates.delta1),
        ("l0", p.l0),
        ("epsilon", p.epsilon),
        ("alpha", p.alpha),
        ("r1", p.r1),
        ("r2", p.r2),
        ("delta", p.delta),
        ("delta_two_sided", p.delta_two_sided),
        ("delta_k", p.delta_k),
        ("lambda_k", p.lambda_k),
    ] {
        text.push_str(&format!("{key} {}\n", fmt_f64(v)));
    }
    text.push_str(&format!("k {}\n", p.k));
    let invariants = p.invariants();
    for ineq in &invariants {
        text.push_str(&format!(
            "inequality {} < {} margin {} # {}\n",
            fmt_f64(ineq.lhs),
            fmt_f64(ineq.rhs),
            fmt_f64(ineq.margin()),
            ineq.name
        ));
    }
    print!("{text}");
    let mut w = create(&run.out, "constants.txt")?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    let params = Params { epsilon: Some(epsilon), ..Params::default() };
    run.manifest(params, Inputs::default(), Some((&p).into())).write(&run.out)?;
    let worst = invariants.iter().map(|i| i.margin()).fold(f64::INFINITY, f64::min);
    Ok(summary(worst >= 2.0, "constants", format!("smallest margin {worst:.3}")))
}

fn orbit(run: &Run) -> Result<bool> {
    let delta = run.params.delta.unwrap_or(0.0);
    let [a, b] = run.params.window.unwrap_or([-50, 50]);
    let seed = run.params.seed.unwrap_or(0);
    let o = generate_noisy(&run.model, seeded_point(seed), (a, b), delta, seed)?;
    let header = OrbitHeader { model: run.model_label.clone(), seed: Some(seed) };
    let mut w = create(&run.out, "orbit.txt")?;
    write_orbit(&mut w, &o, &header)?;
    w.flush()?;
    let params = Params {
        delta: Some(delta),
        window: Some([a, b]),
        seed: Some(seed),
        ..Params::default()
    };
    run.manifest(params, Inputs::default(), None).write(&run.out)?;
    let (fwd, bwd) = validate(&run.model, &o);
    Ok(summary(
        fwd <= delta + ROUNDOFF,
        "orbit",
        format!("{} points, forward defect {fwd:.3e} (backward {bwd:.3e}), δ = {delta:.3e}", o.len()),
    ))
}

fn shadow(run: &Run) -> Result<bool> {
    let epsilon = run.params.epsilon.unwrap_or(1e-2);
    let orbit_path = run.input(&run.inputs.orbit, "orbit.txt")?;
    let (o, _) = read_orbit(open(&orbit_path)?)?;
    let p = delta_for_epsilon(&run.model, epsilon)?;
    let inputs = Inputs { orbit: Some(orbit_path), trace: None };
    let params = Params { epsilon: Some(epsilon), ..Params::default() };
    run.manifest(params, inputs, Some((&p).into())).write(&run.out)?;
    let tr = quasi_shadow_with(&run.model, &o, &p, WindowSchedule::default())?;
    let mut w = create(&run.out, "trace.txt")?;
    write_trace(&mut w, &tr, &o, &run.model_label)?;
    w.flush()?;
    let r = verify(&run.model, &o, &tr.y_star, epsilon, p.k as usize)?;
    Ok(summary(
        r.passed(),
        "shadow",
        format!(
            "max distance {:.3e} < ε = {epsilon:.3e}, max center motion {:.3e}",
            r.max_distance, r.max_center_motion
        ),
    ))
}

fn verify_cmd(run: &Run) -> Result<bool> {
    let orbit_path = run.input(&run.inputs.orbit, "orbit.txt")?;
    let trace_path = run.input(&run.inputs.trace, "trace.txt")?;
    let (o, _) = read_orbit(open(&orbit_path)?)?;
    let tr = read_trace(open(&trace_path)?)?;
    if tr.n_min != o.n_min() || tr.y_star.len() != o.len() {
        bail!(quasishadow::Error::InvalidInput(format!(
            "trace window starting at {} with {} points does not match orbit window {:?}",
            tr.n_min,
            tr.y_star.len(),
            o.window()
        )));
    }
    let epsilon = run.params.epsilon.unwrap_or(tr.params.epsilon);
    let boundary = tr.params.k as usize;
    let inputs = Inputs { orbit: Some(orbit_path), trace: Some(trace_path) };
    let params = Params { epsilon: Some(epsilon), ..Params::default() };
    run.manifest(params, inputs, None).write(&run.out)?;
    let r = verify(&run.model, &o, &tr.y_star, epsilon, boundary)?;
    let oracle_gap = if run.model.is_linear() {
        let oracle = linear_shadow(&run.model, &o, tr.params.k)?;
        Some(tr.y_star.iter().zip(&oracle).map(|(a, b)| torus_distance(a, b)).fold(0.0, f64::max))
    } else {
        None
    };
    let mut w = create(&run.out, "verify.txt")?;
    writeln!(w, "# model: {}", run.model_label)?;
    writeln!(w, "# epsilon: {}", fmt_f64(epsilon))?;
    writeln!(w, "# boundary: {boundary}")?;
    if let Some(gap) = oracle_gap {
        writeln!(w, "# oracle_gap: {}", fmt_f64(gap))?;
    }
    for f in &r.failures {
        writeln!(w, "# failure: {} {:?} {}", f.index, f.kind, fmt_f64(f.value))?;
    }
    for (i, d) in r.distances.iter().enumerate() {
        let idx = o.n_min() + i as i64;
        writeln!(
            w,
            "{idx} {} {} {}",
            fmt_f64(*d),
            fmt_f64(r.residuals[i]),
            fmt_f64(r.center_motions[i])
        )?;
    }
    w.flush()?;
    let oracle_ok = oracle_gap.is_none_or(|g| g < ORACLE_TOL);
    let mut detail = format!("max distance {:.3e} < ε = {epsilon:.3e}", r.max_distance);
    if let Some(gap) = oracle_gap {
        detail.push_str(&format!(", oracle gap {gap:.3e}"));
    }
    if !r.passed() {
        detail.push_str(&format!(", failing indices {:?}", r.failing_indices()));
    }
    Ok(summary(r.passed() && oracle_ok, "verify", detail))
}

fn stability(run: &Run) -> Result<bool> {
    let epsilon = run.params.epsilon.unwrap_or(0.3);
    let amplitude = run.params.amplitude.unwrap_or(1e-3);
    let grid = run.params.grid.unwrap_or([16, 16, 8]);
    let half_length = run.params.half_length.unwrap_or(40);
    let p = delta_for_epsilon(&run.model, epsilon)?;
    let g = PerturbedMap::fiber_driven(run.model.clone(), amplitude)?;
    let params = Params {
        epsilon: Some(epsilon),
        grid: Some(grid),
        half_length: Some(half_length),
        amplitude: Some(amplitude),
        ..Params::default()
    };
    run.manifest(params, Inputs::default(), Some((&p).into())).write(&run.out)?;
    let sc = semiconjugacy(&g, grid, half_length as i64, &p)?;
    let mut w = create(&run.out, "semiconjugacy.txt")?;
    let label = format!("fiber_driven amplitude {}", fmt_f64(amplitude));
    write_semiconjugacy(&mut w, &run.model, &sc, &run.model_label, &label)?;
    w.flush()?;
    let id = check_identity(&run.model, &sc);
    let density = surjectivity_density(&sc, epsilon);
    let cont = continuity_report(&sc);
    let max_ratio = cont.max_ratio.iter().copied().fold(0.0, f64::max);
    Ok(summary(
        id.passed() && density.passed(),
        "stability",
        format!(
            "identity residual {:.3e} ({} failing, {} missing), sup d(π, id) {:.3e}, density gap {:.3e}, max continuity ratio {max_ratio:.3}",
            id.max_residual,
            id.failing.len(),
            id.missing.len(),
            density.sup_displacement,
            density.density_gap
        ),
    ))
}

fn probe(run: &Run) -> Result<bool> {
    let eta = run.params.eta.unwrap_or(1e-3);
    let trials = run.params.trials.unwrap_or(20);
    let half_length = run.params.half_length.unwrap_or(30);
    let seed = run.params.seed.unwrap_or(0);
    let params = Params {
        eta: Some(eta),
        trials: Some(trials),
        half_length: Some(half_length),
        seed: Some(seed),
        ..Params::default()
    };
    run.manifest(params, Inputs::default(), None).write(&run.out)?;
    let r = plaque_expansiveness_probe(&run.model, eta, trials, half_length, seed)?;
    let mut w = create(&run.out, "probe.txt")?;
    writeln!(w, "# model: {}", run.model_label)?;
    writeln!(w, "eta {}", fmt_f64(r.eta))?;
    writeln!(w, "trials {}", r.trials)?;
    writeln!(w, "close_pairs {}", r.close_pairs)?;
    writeln!(w, "max_base_gap {}", fmt_f64(r.max_base_gap))?;
    writeln!(w, "violations {}", r.violations)?;
    writeln!(w, "unseparated {}", r.unseparated)?;
    for (steps, bound) in &r.separation_steps {
        writeln!(w, "separation {steps} {bound}")?;
    }
    w.flush()?;
    let worst = r.separation_steps.iter().map(|s| s.0).max().unwrap_or(0);
    Ok(summary(
        r.passed(),
        "probe",
        format!(
            "{} close pairs, {} violations, max base gap {:.3e}, slowest separation {worst} steps",
            r.close_pairs, r.violations, r.max_base_gap
        ),
    ))
}
