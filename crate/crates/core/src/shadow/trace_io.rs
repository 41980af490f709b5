//! Trace file: header with the run parameters, then
//! `k y*1 y*2 y*3 yp1 yp2 yp3 center_motion trace_dist` rows.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::formats::{check_indices, fmt_f64, point_from, read_table};
use crate::orbit::PseudoOrbit;
use crate::torus::TorusPoint;

use super::{ShadowingParams, ShadowingTrace};

/// Contents of a trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub model: String,
    pub params: ShadowingParams,
    pub n_min: i64,
    pub y_star: Vec<TorusPoint>,
    pub y_prime: Vec<TorusPoint>,
    pub center_motions: Vec<f64>,
    pub trace_dist: Vec<f64>,
}

pub fn write_trace<W: Write>(
    mut w: W,
    trace: &ShadowingTrace,
    orbit: &PseudoOrbit,
    model: &str,
) -> Result<()> {
    let p = &trace.params;
    writeln!(w, "# model: {model}")?;
    for (key, v) in [
        ("epsilon", p.epsilon),
        ("delta", p.delta),
        ("delta_two_sided", p.delta_two_sided),
        ("delta_k", p.delta_k),
        ("alpha", p.alpha),
        ("r1", p.r1),
        ("r2", p.r2),
        ("limit_tol", p.limit_tol),
        ("l0", p.l0),
        ("lambda_k", p.lambda_k),
    ] {
        writeln!(w, "# {key}: {}", fmt_f64(v))?;
    }
    writeln!(w, "# k: {}", p.k)?;
    writeln!(w, "# window: {} {}", trace.n_min, trace.n_max())?;
    let dist = trace.distances(orbit);
    for (i, (idx, y)) in trace.indexed().enumerate() {
        let [a, b, c] = y.coords();
        let [pa, pb, pc] = trace.y_prime[i].coords();
        let row = [a, b, c, pa, pb, pc, trace.center_motions[i], dist[i]].map(fmt_f64);
        writeln!(w, "{idx} {}", row.join(" "))?;
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(reader: R) -> Result<TraceFile> {
    let table = read_table(reader, 9)?;
    let (n_min, n_max) = table.require_window()?;
    check_indices(&table, n_min)?;
    if table.rows.len() as i64 != n_max - n_min + 1 {
        return Err(Error::Parse {
            line: 0,
            msg: format!("window [{n_min}, {n_max}] does not match {} rows", table.rows.len()),
        });
    }
    let k = table.require("k")?.parse::<u32>().map_err(|_| Error::Parse {
        line: 0,
        msg: "header `k` is not a positive integer".into(),
    })?;
    let params = ShadowingParams {
        epsilon: table.require_f64("epsilon")?,
        delta: table.require_f64("delta")?,
        delta_two_sided: table.require_f64("delta_two_sided")?,
        delta_k: table.require_f64("delta_k")?,
        alpha: table.require_f64("alpha")?,
        r1: table.require_f64("r1")?,
        r2: table.require_f64("r2")?,
        k,
        limit_tol: table.require_f64("limit_tol")?,
        l0: table.require_f64("l0")?,
        lambda_k: table.require_f64("lambda_k")?,
    };
    let mut out = TraceFile {
        model: table.get("model").unwrap_or("").to_string(),
        params,
        n_min,
        y_star: Vec::new(),
        y_prime: Vec::new(),
        center_motions: Vec::new(),
        trace_dist: Vec::new(),
    };
    for (line, row) in &table.rows {
        out.y_star.push(point_from(&row[1..4], *line)?);
        out.y_prime.push(point_from(&row[4..7], *line)?);
        out.center_motions.push(row[7]);
        out.trace_dist.push(row[8]);
    }
    Ok(out)
}
