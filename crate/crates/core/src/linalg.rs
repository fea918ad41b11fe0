//! Small dense symmetric linear algebra: SPD solves by Cholesky and full
//! spectra by cyclic Jacobi rotations. Matrices here are tiny (regression
//! Gram matrices, p ≤ 16), so simplicity and symmetric exactness win over
//! asymptotics.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Dense symmetric matrix in row-major full storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    a: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: alloc::vec![0.0; n * n] }
    }

    pub fn from_rows(n: usize, a: Vec<f64>) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::Domain("matrix storage must be n*n".to_string()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if a[i * n + j] != a[j * n + i] {
                    return Err(Error::Domain("matrix is not symmetric".to_string()));
                }
            }
        }
        Ok(Self { n, a })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
        self.a[j * self.n + i] = v;
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }
}

/// Solves `A x = b` for symmetric positive definite `A` by Cholesky
/// factorization. A failed (non-positive) pivot is reported by index.
pub fn cholesky_solve(a: &SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n;
    if b.len() != n {
        return Err(Error::Domain("right-hand side length mismatch".to_string()));
    }
    // Lower factor, row-major.
    let mut l = alloc::vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::SingularPivot { pivot: i });
                }
                l[i * n + i] = math::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    // Forward then backward substitution.
    let mut y = alloc::vec![0.0f64; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = alloc::vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Ok(x)
}

/// Largest dimension accepted by the Jacobi eigensolver.
pub const JACOBI_MAX_DIM: usize = 16;

/// Full eigenvalue set of a symmetric matrix by cyclic Jacobi rotations,
/// ascending order. Off-diagonal mass is annihilated sweep by sweep until it
/// falls below `tol` relative to the Frobenius norm.
pub fn jacobi_eigenvalues(m: &SymMatrix, tol: f64) -> Result<Vec<f64>> {
    let n = m.n;
    if n == 0 || n > JACOBI_MAX_DIM {
        return Err(Error::Domain("eigensolver accepts 1..=16 dimensions".to_string()));
    }
    let mut a = m.clone();
    let mut frob = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            frob += a.get(i, j) * a.get(i, j);
        }
    }
    frob = math::sqrt(frob);
    if frob == 0.0 {
        return Ok(alloc::vec![0.0; n]);
    }
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a.get(i, j) * a.get(i, j);
            }
        }
        if math::sqrt(off) <= tol * frob {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a.get(p, p), a.get(q, q));
                // Stable rotation angle (Golub & Van Loan).
                let theta = (aqq - app) / (2.0 * apq);
                let t = {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (math::abs(theta) + math::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;
                // Update rows/columns p and q.
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, 0.0);
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    eig.sort_unstable_by(f64::total_cmp);
    Ok(eig)
}
