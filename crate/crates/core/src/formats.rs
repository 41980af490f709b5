//! Line-oriented text formats: `# key: value` header lines followed by
//! whitespace-separated numeric rows. Floats use 17 significant digits so
//! every coordinate round-trips bit-exactly.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::orbit::PseudoOrbit;
use crate::torus::TorusPoint;

/// Header lines and numeric rows of a parsed file.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<(String, String)>,
    /// `(line number, row)` pairs.
    pub rows: Vec<(usize, Vec<f64>)>,
}

impl Table {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.header
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("missing header `# {key}:`"),
        })
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        let v = self.require(key)?;
        v.trim().parse().map_err(|_| Error::Parse {
            line: 0,
            msg: format!("header `{key}` is not a number: {v}"),
        })
    }

    pub fn require_window(&self) -> Result<(i64, i64)> {
        let v = self.require("window")?;
        let parts: Vec<_> = v.split_whitespace().map(str::parse::<i64>).collect();
        match parts.as_slice() {
            [Ok(a), Ok(b)] => Ok((*a, *b)),
            _ => Err(Error::Parse {
                line: 0,
                msg: format!("bad window header: {v}"),
            }),
        }
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parse a table; every data row must have exactly `columns` fields.
pub fn read_table<R: BufRead>(reader: R, columns: usize) -> Result<Table> {
    let mut table = Table::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once(':') {
                table.header.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        let row = trimmed
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("not a number: {t}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != columns {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {columns} columns, found {}", row.len()),
            });
        }
        if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("non-finite value {bad}"),
            });
        }
        table.rows.push((lineno, row));
    }
    Ok(table)
}

/// Check that the first column of every row is the consecutive index
/// starting at `start`.
pub fn check_indices(table: &Table, start: i64) -> Result<()> {
    for (offset, (line, row)) in table.rows.iter().enumerate() {
        let expect = start + offset as i64;
        if row[0] != expect as f64 {
            return Err(Error::Parse {
                line: *line,
                msg: format!("expected index {expect}, found {}", row[0]),
            });
        }
    }
    Ok(())
}

pub(crate) fn point_from(row: &[f64], line: usize) -> Result<TorusPoint> {
    TorusPoint::new(row[0], row[1], row[2]).map_err(|e| Error::Parse {
        line,
        msg: e.to_string(),
    })
}

/// Provenance written into an orbit file header.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitHeader {
    pub model: String,
    pub seed: Option<u64>,
}

pub fn write_orbit<W: Write>(mut w: W, orbit: &PseudoOrbit, header: &OrbitHeader) -> Result<()> {
    writeln!(w, "# model: {}", header.model)?;
    writeln!(w, "# delta: {}", fmt_f64(orbit.delta()))?;
    writeln!(w, "# window: {} {}", orbit.n_min(), orbit.n_max())?;
    if let Some(seed) = header.seed {
        writeln!(w, "# rng: chacha8 seed {seed}")?;
    }
    for (k, x) in orbit.indexed() {
        let [a, b, c] = x.coords();
        writeln!(w, "{k} {} {} {}", fmt_f64(a), fmt_f64(b), fmt_f64(c))?;
    }
    Ok(())
}

pub fn read_orbit<R: BufRead>(reader: R) -> Result<(PseudoOrbit, OrbitHeader)> {
    let table = read_table(reader, 4)?;
    let delta = table.require_f64("delta")?;
    let (n_min, n_max) = table.require_window()?;
    check_indices(&table, n_min)?;
    if table.rows.len() as i64 != n_max - n_min + 1 {
        return Err(Error::Parse {
            line: 0,
            msg: format!(
                "window [{n_min}, {n_max}] does not match {} rows",
                table.rows.len()
            ),
        });
    }
    let points = table
        .rows
        .iter()
        .map(|(line, row)| point_from(&row[1..], *line))
        .collect::<Result<Vec<_>>>()?;
    let seed = table
        .get("rng")
        .and_then(|v| v.rsplit(' ').next())
        .and_then(|s| s.parse().ok());
    let header = OrbitHeader {
        model: table.get("model").unwrap_or("").to_string(),
        seed,
    };
    Ok((PseudoOrbit::new(n_min, points, delta)?, header))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SkewModel;
    use crate::orbit::generate_noisy;

    #[test]
    fn orbit_round_trip_is_bit_exact() {
        let m = SkewModel::default_skew();
        let x0 = TorusPoint::new(0.1, 0.2, 0.3).unwrap();
        let o = generate_noisy(&m, x0, (-5, 5), 1e-3, 9).unwrap();
        let h = OrbitHeader {
            model: "default".into(),
            seed: Some(9),
        };
        let mut buf = Vec::new();
        write_orbit(&mut buf, &o, &h).unwrap();
        let (back, hb) = read_orbit(buf.as_slice()).unwrap();
        assert_eq!(back, o);
        assert_eq!(hb, h);
    }

    #[test]
    fn malformed_orbits_are_rejected() {
        let bad_cols = "# delta: 0\n# window: 0 0\n0 0.1 0.2\n";
        assert!(matches!(
            read_orbit(bad_cols.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        let gap = "# delta: 0\n# window: 0 1\n0 0.1 0.2 0.3\n2 0.1 0.2 0.3\n";
        assert!(read_orbit(gap.as_bytes()).is_err());
        let missing = "0 0.1 0.2 0.3\n";
        assert!(read_orbit(missing.as_bytes()).is_err());
        let nan = "# delta: 0\n# window: 0 0\n0 NaN 0.2 0.3\n";
        assert!(read_orbit(nan.as_bytes()).is_err());
    }
}
