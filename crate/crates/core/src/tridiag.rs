//! Complex cyclic tridiagonal systems.
//!
//! A periodic three-point stencil gives a matrix that is tridiagonal except for
//! the two corner entries `A[0][n-1]` and `A[n-1][0]`. The corners are removed
//! as a rank-1 update and restored with the Sherman-Morrison formula, so a
//! solve costs two Thomas sweeps over a single factorization.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

/// `lower[i] = A[i][i-1]`, `diag[i] = A[i][i]`, `upper[i] = A[i][i+1]`, with
/// indices taken modulo `n`; so `lower[0]` is the top-right corner and
/// `upper[n-1]` the bottom-left corner.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal {
    pub lower: Vec<Complex64>,
    pub diag: Vec<Complex64>,
    pub upper: Vec<Complex64>,
}

/// The system could not be factored (a vanishing or non-finite pivot).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular;

impl CyclicTridiagonal {
    pub fn zeros(n: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            lower: vec![z; n],
            diag: vec![z; n],
            upper: vec![z; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let n = self.len();
        if row == col {
            self.diag[row]
        } else if col == (row + 1) % n {
            self.upper[row]
        } else if col == (row + n - 1) % n {
            self.lower[row]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// `out = A x`.
    pub fn mul_vec_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.len();
        debug_assert!(n >= 3 && x.len() == n && out.len() == n);
        out[0] = self.lower[0] * x[n - 1] + self.diag[0] * x[0] + self.upper[0] * x[1];
        for i in 1..n - 1 {
            out[i] = self.lower[i] * x[i - 1] + self.diag[i] * x[i] + self.upper[i] * x[i + 1];
        }
        out[n - 1] = self.lower[n - 1] * x[n - 2] + self.diag[n - 1] * x[n - 1] + self.upper[n - 1] * x[0];
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>, Singular> {
        let mut ws = CyclicWorkspace::new(self.len());
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        ws.solve_into(self, rhs, &mut out)?;
        Ok(out)
    }
}

/// Scratch buffers reused across solves of the same size.
#[derive(Debug, Clone)]
pub struct CyclicWorkspace {
    gam: Vec<Complex64>,
    y: Vec<Complex64>,
    z: Vec<Complex64>,
    u: Vec<Complex64>,
}

impl CyclicWorkspace {
    pub fn new(n: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            gam: vec![z; n],
            y: vec![z; n],
            z: vec![z; n],
            u: vec![z; n],
        }
    }

    /// Solve `A x = rhs` into `out`. Requires `n ≥ 3`.
    pub fn solve_into(
        &mut self,
        a: &CyclicTridiagonal,
        rhs: &[Complex64],
        out: &mut [Complex64],
    ) -> Result<(), Singular> {
        let n = a.len();
        assert!(n >= 3, "cyclic solve needs at least three unknowns");
        assert!(rhs.len() == n && out.len() == n && self.gam.len() == n);

        let alpha = a.lower[0]; // A[0][n-1]
        let beta = a.upper[n - 1]; // A[n-1][0]
        let gamma = -a.diag[0];
        if gamma.norm() == 0.0 {
            return Err(Singular);
        }

        // Thomas factorization of the corner-free matrix with the rank-1
        // correction folded into the first and last diagonal entries.
        let first = a.diag[0] - gamma;
        let last = a.diag[n - 1] - alpha * beta / gamma;
        let diag_at = |i: usize| {
            if i == 0 {
                first
            } else if i == n - 1 {
                last
            } else {
                a.diag[i]
            }
        };

        self.u.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        self.u[0] = gamma;
        self.u[n - 1] = beta;

        let mut bet = diag_at(0);
        if !pivot_ok(bet) {
            return Err(Singular);
        }
        self.y[0] = rhs[0] / bet;
        self.z[0] = self.u[0] / bet;
        for j in 1..n {
            self.gam[j] = a.upper[j - 1] / bet;
            bet = diag_at(j) - a.lower[j] * self.gam[j];
            if !pivot_ok(bet) {
                return Err(Singular);
            }
            self.y[j] = (rhs[j] - a.lower[j] * self.y[j - 1]) / bet;
            self.z[j] = (self.u[j] - a.lower[j] * self.z[j - 1]) / bet;
        }
        for j in (0..n - 1).rev() {
            let g = self.gam[j + 1];
            self.y[j] = self.y[j] - g * self.y[j + 1];
            self.z[j] = self.z[j] - g * self.z[j + 1];
        }

        // v = (1, 0, …, 0, alpha/gamma)
        let v_last = alpha / gamma;
        let denom = Complex64::new(1.0, 0.0) + self.z[0] + v_last * self.z[n - 1];
        if !pivot_ok(denom) {
            return Err(Singular);
        }
        let fact = (self.y[0] + v_last * self.y[n - 1]) / denom;
        for ((o, y), z) in out.iter_mut().zip(&self.y).zip(&self.z) {
            *o = *y - fact * *z;
        }
        Ok(())
    }
}

fn pivot_ok(p: Complex64) -> bool {
    let m = p.norm();
    m > 0.0 && m.is_finite()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_system(n: usize, seed: u64) -> (CyclicTridiagonal, Vec<Complex64>) {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut a = CyclicTridiagonal::zeros(n);
        for i in 0..n {
            a.lower[i] = c(next(), next());
            a.upper[i] = c(next(), next());
            a.diag[i] = c(4.0 + next(), next());
        }
        let rhs = (0..n).map(|_| c(next(), next())).collect();
        (a, rhs)
    }

    fn dense(a: &CyclicTridiagonal) -> DMatrix<Complex64> {
        let n = a.len();
        DMatrix::from_fn(n, n, |i, j| a.get(i, j))
    }

    #[test]
    fn matches_dense_solve() {
        for (n, seed) in [(3, 1), (4, 2), (17, 3), (256, 4)] {
            let (a, rhs) = random_system(n, seed);
            let x = a.solve(&rhs).unwrap();
            let reference = dense(&a)
                .lu()
                .solve(&DVector::from_vec(rhs.clone()))
                .unwrap();
            let err = x
                .iter()
                .zip(reference.iter())
                .map(|(p, q)| (p - q).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "n = {n}: {err}");
        }
    }

    #[test]
    fn residual_is_small() {
        let (a, rhs) = random_system(64, 9);
        let x = a.solve(&rhs).unwrap();
        let back = a.mul_vec(&x);
        for (p, q) in back.iter().zip(&rhs) {
            assert!((p - q).norm() < 1e-13);
        }
    }

    #[test]
    fn singular_is_reported() {
        let n = 5;
        let mut a = CyclicTridiagonal::zeros(n);
        // every row sums to zero: the constant vector is in the kernel
        for i in 0..n {
            a.lower[i] = c(-1.0, 0.0);
            a.upper[i] = c(-1.0, 0.0);
            a.diag[i] = c(2.0, 0.0);
        }
        let rhs = vec![c(1.0, 0.0); n];
        match a.solve(&rhs) {
            Err(Singular) => {}
            Ok(x) => assert!(x.iter().any(|v| !v.norm().is_finite() || v.norm() > 1e12)),
        }
    }
}
