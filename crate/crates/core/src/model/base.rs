//! Hyperbolic integer matrices acting on the base 2-torus.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::wrap_unit;

/// Largest singular value of a real 2×2 matrix.
pub(crate) fn spectral_norm(m: [[f64; 2]; 2]) -> f64 {
    let fro2 = m[0][0].powi(2) + m[0][1].powi(2) + m[1][0].powi(2) + m[1][1].powi(2);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0);
    ((fro2 + disc.sqrt()) / 2.0).sqrt()
}

/// Hyperbolic splitting of a base matrix: `A v_s = λ v_s`, `A v_u = μ v_u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenFrame {
    pub v_s: [f64; 2],
    pub v_u: [f64; 2],
    pub lambda: f64,
    pub mu: f64,
}

impl EigenFrame {
    /// Coordinates `(a, b)` with `d = a·v_u + b·v_s`.
    pub fn decompose(&self, d: [f64; 2]) -> (f64, f64) {
        let [us, ut] = self.v_u;
        let [ss, st] = self.v_s;
        let det = us * st - ss * ut;
        let a = (d[0] * st - ss * d[1]) / det;
        let b = (us * d[1] - d[0] * ut) / det;
        (a, b)
    }

    /// Operator norm of the inverse of `[v_u | -v_s]`, the conditioning of
    /// the stable/unstable intersection solve.
    pub fn solve_conditioning(&self) -> f64 {
        let m = [[self.v_u[0], -self.v_s[0]], [self.v_u[1], -self.v_s[1]]];
        let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs();
        spectral_norm(m) / det
    }
}

/// Compute the hyperbolic eigen-frame of an integer 2×2 matrix.
///
/// Vectors are unit length with positive first component (positive second
/// component when the first vanishes).
pub fn eigen_frame(a: [[i64; 2]; 2]) -> Result<EigenFrame> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let trace = a[0][0] + a[1][1];
    if det.abs() != 1 {
        return Err(Error::Model(format!("|det| = {} is not 1", det.abs())));
    }
    if trace * trace <= 4 * det {
        return Err(Error::Model(format!(
            "matrix {a:?} is not hyperbolic (trace² = {} ≤ 4·det = {})",
            trace * trace,
            4 * det
        )));
    }
    let t = trace as f64;
    let root = (t * t - 4.0 * det as f64).sqrt();
    let mu = (t + root) / 2.0;
    let lambda = det as f64 / mu;
    if !(lambda > 0.0 && lambda < 1.0 && mu > 1.0) {
        return Err(Error::Model(format!(
            "eigenvalues {lambda} and {mu} are not in 0 < λ < 1 < μ"
        )));
    }
    let vector = |e: f64| -> [f64; 2] {
        let c1 = [a[0][1] as f64, e - a[0][0] as f64];
        let c2 = [e - a[1][1] as f64, a[1][0] as f64];
        let v = if c1[0].hypot(c1[1]) >= c2[0].hypot(c2[1]) { c1 } else { c2 };
        let n = v[0].hypot(v[1]);
        let sign = if v[0] > 0.0 || (v[0] == 0.0 && v[1] > 0.0) { 1.0 } else { -1.0 };
        [sign * v[0] / n, sign * v[1] / n]
    };
    Ok(EigenFrame {
        v_s: vector(lambda),
        v_u: vector(mu),
        lambda,
        mu,
    })
}

/// A hyperbolic integer matrix with `|det| = 1` and positive eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[i64; 2]; 2]", into = "[[i64; 2]; 2]")]
pub struct BaseMatrix {
    entries: [[i64; 2]; 2],
    frame: EigenFrame,
}

impl TryFrom<[[i64; 2]; 2]> for BaseMatrix {
    type Error = Error;
    fn try_from(entries: [[i64; 2]; 2]) -> Result<Self> {
        BaseMatrix::new(entries)
    }
}

impl From<BaseMatrix> for [[i64; 2]; 2] {
    fn from(m: BaseMatrix) -> Self {
        m.entries
    }
}

impl BaseMatrix {
    pub fn new(entries: [[i64; 2]; 2]) -> Result<Self> {
        let frame = eigen_frame(entries)?;
        Ok(BaseMatrix { entries, frame })
    }

    /// The standard cat map `[[2, 1], [1, 1]]`.
    pub fn cat() -> Self {
        BaseMatrix::new([[2, 1], [1, 1]]).expect("cat map is hyperbolic")
    }

    pub fn entries(&self) -> [[i64; 2]; 2] {
        self.entries
    }

    pub fn frame(&self) -> &EigenFrame {
        &self.frame
    }

    pub fn det(&self) -> i64 {
        let a = self.entries;
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
    }

    /// The integer inverse.
    pub fn inverse_entries(&self) -> [[i64; 2]; 2] {
        let a = self.entries;
        let d = self.det();
        [[d * a[1][1], -d * a[0][1]], [-d * a[1][0], d * a[0][0]]]
    }

    /// `A v` in the lift (no wrapping).
    pub fn mul_lift(&self, v: [f64; 2]) -> [f64; 2] {
        mul(self.entries, v)
    }

    pub fn mul_inverse_lift(&self, v: [f64; 2]) -> [f64; 2] {
        mul(self.inverse_entries(), v)
    }

    /// `A p mod 1`.
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let q = self.mul_lift(p);
        [wrap_unit(q[0]), wrap_unit(q[1])]
    }

    /// `A⁻¹ p mod 1`.
    pub fn apply_inverse(&self, p: [f64; 2]) -> [f64; 2] {
        let q = self.mul_inverse_lift(p);
        [wrap_unit(q[0]), wrap_unit(q[1])]
    }

    /// `‖A‖₂`.
    pub fn norm(&self) -> f64 {
        spectral_norm(to_f64(self.entries))
    }

    /// `‖A⁻¹‖₂`.
    pub fn inverse_norm(&self) -> f64 {
        spectral_norm(to_f64(self.inverse_entries()))
    }

    /// `A^k` as an integer matrix.
    pub fn power(&self, k: u32) -> [[i64; 2]; 2] {
        let mut acc = [[1, 0], [0, 1]];
        for _ in 0..k {
            acc = matmul(acc, self.entries);
        }
        acc
    }
}

fn to_f64(a: [[i64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [a[0][0] as f64, a[0][1] as f64],
        [a[1][0] as f64, a[1][1] as f64],
    ]
}

fn mul(a: [[i64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] as f64 * v[0] + a[0][1] as f64 * v[1],
        a[1][0] as f64 * v[0] + a[1][1] as f64 * v[1],
    ]
}

fn matmul(a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cat_map_eigenvalues_are_roots_of_characteristic_polynomial() {
        let f = eigen_frame([[2, 1], [1, 1]]).unwrap();
        let s5 = 5f64.sqrt();
        assert!((f.mu - (3.0 + s5) / 2.0).abs() < 1e-15);
        assert!((f.lambda - (3.0 - s5) / 2.0).abs() < 1e-15);
        for t in [f.lambda, f.mu] {
            assert!((t * t - 3.0 * t + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cat_map_eigenvectors() {
        let m = BaseMatrix::cat();
        let f = m.frame();
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!((f.v_u[1] / f.v_u[0] - golden).abs() < 1e-12);
        assert!((f.v_s[1] / f.v_s[0] + 1.0 + golden).abs() < 1e-12);
        for (v, t) in [(f.v_u, f.mu), (f.v_s, f.lambda)] {
            let av = m.mul_lift(v);
            let r = (av[0] - t * v[0]).hypot(av[1] - t * v[1]);
            assert!(r < 1e-12);
            assert!((v[0].hypot(v[1]) - 1.0).abs() < 1e-15);
            assert!(v[0] > 0.0);
        }
    }

    #[test]
    fn identity_is_rejected() {
        assert!(matches!(
            eigen_frame([[1, 0], [0, 1]]),
            Err(Error::Model(_))
        ));
        assert!(BaseMatrix::new([[2, 0], [0, 1]]).is_err());
        assert!(BaseMatrix::new([[-2, 1], [1, -1]]).is_err());
    }

    #[test]
    fn symmetric_matrix_has_orthogonal_frame() {
        let f = *BaseMatrix::cat().frame();
        assert!((f.v_u[0] * f.v_s[0] + f.v_u[1] * f.v_s[1]).abs() < 1e-15);
        assert!((f.solve_conditioning() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decompose_reconstructs() {
        let m = BaseMatrix::new([[3, 2], [1, 1]]).unwrap();
        let f = m.frame();
        let d = [0.013, -0.021];
        let (a, b) = f.decompose(d);
        let r = [a * f.v_u[0] + b * f.v_s[0], a * f.v_u[1] + b * f.v_s[1]];
        assert!((r[0] - d[0]).abs() < 1e-16 && (r[1] - d[1]).abs() < 1e-16);
        assert!(f.solve_conditioning() > 1.0);
    }

    #[test]
    fn integer_inverse() {
        let m = BaseMatrix::cat();
        assert_eq!(m.inverse_entries(), [[1, -1], [-1, 2]]);
        assert_eq!(m.power(2), [[5, 3], [3, 2]]);
        let p = [0.1, 0.2];
        let q = m.apply_inverse(m.apply(p));
        assert!((q[0] - p[0]).abs() < 1e-15 && (q[1] - p[1]).abs() < 1e-15);
    }
}
