//! Classical shadowing of the base pseudo-orbit by a banded linear solve.
//!
//! For the linear model the tracing orbit is `y_k = x_k + c_k` with base
//! corrections solving `c_{k+1} = A c_k − e_k`, `e_k` the base defect,
//! closed by a zero stable component at the left window end and a zero
//! unstable component at the right end. This is an independent check of
//! the geometric construction, which never forms the linear system.

use crate::error::{Error, Result};
use crate::model::SkewModel;
use crate::orbit::PseudoOrbit;
use crate::torus::{base_displacement, TorusPoint};

/// A square matrix with `m1` sub- and `m2` super-diagonals, factorised by
/// Gaussian elimination with partial pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    m1: usize,
    m2: usize,
    /// Row `i` holds columns `i − m1 ..= i + m2`, shifted left as pivoting
    /// fills in; width `m1 + m2 + 1`.
    a: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    m1: usize,
    upper: Vec<Vec<f64>>,
    lower: Vec<Vec<f64>>,
    pivots: Vec<usize>,
}

impl BandMatrix {
    pub fn zeros(n: usize, m1: usize, m2: usize) -> Self {
        BandMatrix {
            n,
            m1,
            m2,
            a: vec![vec![0.0; m1 + m2 + 1]; n],
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.m1 >= i && j <= i + self.m2, "({i}, {j}) outside the band");
        self.a[i][j + self.m1 - i] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.m1 < i || j > i + self.m2 {
            0.0
        } else {
            self.a[i][j + self.m1 - i]
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.m1);
                let hi = (i + self.m2).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn factor(&self) -> Result<BandLu> {
        let (n, m1, m2) = (self.n, self.m1, self.m2);
        let w = m1 + m2 + 1;
        let mut a = self.a.clone();
        // left-justify the first m1 rows
        let mut l = m1;
        for row in a.iter_mut().take(m1.min(n)) {
            for j in l..w {
                row[j - l] = row[j];
            }
            l -= 1;
            for x in row.iter_mut().skip(w - l - 1) {
                *x = 0.0;
            }
        }
        let mut lower = vec![vec![0.0; m1]; n];
        let mut pivots = vec![0; n];
        let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
        let mut l = m1;
        for k in 0..n {
            if l < n {
                l += 1;
            }
            let l = l.min(n);
            let mut p = k;
            let mut best = a[k][0].abs();
            for (j, row) in a.iter().enumerate().take(l).skip(k + 1) {
                if row[0].abs() > best {
                    best = row[0].abs();
                    p = j;
                }
            }
            if best <= scale * 1e-300 || best == 0.0 {
                return Err(Error::InvalidInput(format!("singular banded system at row {k}")));
            }
            pivots[k] = p;
            a.swap(k, p);
            for i in k + 1..l {
                let factor = a[i][0] / a[k][0];
                lower[k][i - k - 1] = factor;
                for j in 1..w {
                    a[i][j - 1] = a[i][j] - factor * a[k][j];
                }
                a[i][w - 1] = 0.0;
            }
        }
        Ok(BandLu {
            n,
            m1,
            upper: a,
            lower,
            pivots,
        })
    }
}

impl BandLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, m1) = (self.n, self.m1);
        let w = self.upper[0].len();
        let mut b = rhs.to_vec();
        let mut l = m1;
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            if l < n {
                l += 1;
            }
            for i in k + 1..l.min(n) {
                b[i] -= self.lower[k][i - k - 1] * b[k];
            }
        }
        let mut l = 1;
        for i in (0..n).rev() {
            let mut s = b[i];
            for kk in 1..l {
                s -= self.upper[i][kk] * b[kk + i];
            }
            b[i] = s / self.upper[i][0];
            if l < w {
                l += 1;
            }
        }
        b
    }
}

/// Base corrections `c_k ∈ R²` of the classical shadowing orbit of the base
/// pseudo-orbit `p_k`, over the whole window.
pub fn base_corrections(model: &SkewModel, orbit: &PseudoOrbit) -> Result<Vec<[f64; 2]>> {
    let base = model.base();
    let a = base.entries();
    let frame = *base.frame();
    let n = orbit.len();
    if n < 2 {
        return Err(Error::InvalidInput("oracle needs at least two points".into()));
    }
    // dual rows: stable coordinate b and unstable coordinate a of decompose
    let det = frame.v_u[0] * frame.v_s[1] - frame.v_s[0] * frame.v_u[1];
    let stable_row = [-frame.v_u[1] / det, frame.v_u[0] / det];
    let unstable_row = [frame.v_s[1] / det, -frame.v_s[0] / det];

    let dim = 2 * n;
    let mut m = BandMatrix::zeros(dim, 2, 2);
    let mut rhs = vec![0.0; dim];
    m.set(0, 0, stable_row[0]);
    m.set(0, 1, stable_row[1]);
    let pts = orbit.points();
    for k in 0..n - 1 {
        let image = TorusPoint::from_base(base.apply(pts[k].base()), 0.0);
        let e = base_displacement(&image, &TorusPoint::from_base(pts[k + 1].base(), 0.0));
        for r in 0..2 {
            let row = 2 * k + 1 + r;
            m.set(row, 2 * k, -(a[r][0] as f64));
            m.set(row, 2 * k + 1, -(a[r][1] as f64));
            m.set(row, 2 * k + 2 + r, 1.0);
            rhs[row] = -e[r];
        }
    }
    m.set(dim - 1, dim - 2, unstable_row[0]);
    m.set(dim - 1, dim - 1, unstable_row[1]);
    let c = m.factor()?.solve(&rhs);
    Ok(c.chunks(2).map(|v| [v[0], v[1]]).collect())
}

/// Base points of the classical shadowing orbit.
pub fn base_shadow(model: &SkewModel, orbit: &PseudoOrbit) -> Result<Vec<[f64; 2]>> {
    let c = base_corrections(model, orbit)?;
    Ok(orbit
        .points()
        .iter()
        .zip(c)
        .map(|(x, c)| {
            let p = x.base();
            TorusPoint::from_base([p[0] + c[0], p[1] + c[1]], 0.0).base()
        })
        .collect())
}

/// Full oracle for the linear model (`φ = 0`, `ω = 0`) and power `k`.
///
/// The base is the classical shadowing orbit. Fibers carry no dynamics, so
/// the fiber at `mk` is that of `x_{mk}` and intermediate indices inherit
/// the fiber of the next multiple of `k` (outside the outermost multiples:
/// of the nearest one).
pub fn linear_shadow(model: &SkewModel, orbit: &PseudoOrbit, k: u32) -> Result<Vec<TorusPoint>> {
    if !model.is_linear() {
        return Err(Error::InvalidInput("the linear oracle needs φ = 0 and ω = 0".into()));
    }
    let k = k as i64;
    let (n_min, n_max) = orbit.window();
    let first = n_min.div_euclid(k) * k + if n_min.rem_euclid(k) != 0 { k } else { 0 };
    let last = n_max.div_euclid(k) * k;
    let base = base_shadow(model, orbit)?;
    Ok(orbit
        .indexed()
        .zip(base)
        .map(|((n, _), p)| {
            let source = if n <= first {
                first
            } else if n >= last {
                last
            } else {
                n.div_euclid(k) * k + if n.rem_euclid(k) != 0 { k } else { 0 }
            };
            TorusPoint::from_base(p, orbit.at(source.clamp(n_min, n_max)).fiber())
        })
        .collect())
}
