//! Thin helpers over nalgebra for the complex Hermitian workloads used
//! throughout the crate.
//!
//! Everything here operates on dynamically sized matrices of `Complex64`.
//! Solves go through Hermitian factorizations guarded by a condition-number
//! limit; no routine forms an explicit inverse.

use crate::error::{Result, SolverError};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RVec = DVector<f64>;

/// Condition-number limit beyond which a factorization is rejected.
pub const COND_LIMIT: f64 = 1e14;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Force exact Hermitian symmetry: (A + A^H) / 2.
pub fn hermitize(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Real part of the trace. The quadratic forms in this crate are Hermitian,
/// so their traces are real up to rounding; this drops the rounding residue.
pub fn trace_re(a: &CMat) -> f64 {
    a.trace().re
}

/// Frobenius norm squared.
pub fn frob2(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted
/// descending. Input is symmetrized first so callers may pass products that
/// are Hermitian only up to rounding.
pub struct HermEig {
    /// Eigenvalues, descending.
    pub values: RVec,
    /// Columns are the matching orthonormal eigenvectors.
    pub vectors: CMat,
}

impl HermEig {
    pub fn new(a: &CMat) -> Self {
        let n = a.nrows();
        let se = hermitize(a).symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| se.eigenvalues[j].total_cmp(&se.eigenvalues[i]));
        let values = RVec::from_iterator(n, order.iter().map(|&i| se.eigenvalues[i]));
        let vectors = CMat::from_columns(
            &order
                .iter()
                .map(|&i| se.eigenvectors.column(i).into_owned())
                .collect::<Vec<_>>(),
        );
        HermEig { values, vectors }
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Condition number in the spectral norm (infinite if singular).
    pub fn cond(&self) -> f64 {
        let hi = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let lo = self.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// A V f(diag) V^H B without forming the full matrix function.
    fn apply_fn(&self, b: &CMat, f: impl Fn(f64) -> f64) -> CMat {
        let vhb = self.vectors.adjoint() * b;
        let mut scaled = vhb;
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            let s = f(self.values[i]);
            row *= c(s);
        }
        &self.vectors * scaled
    }

    /// Solve A X = B through the eigenfactorization.
    pub fn solve(&self, b: &CMat) -> CMat {
        self.apply_fn(b, |d| 1.0 / d)
    }

    /// A^{-1/2} B; requires positive definiteness (checked by the caller).
    pub fn inv_sqrt_apply(&self, b: &CMat) -> CMat {
        self.apply_fn(b, |d| 1.0 / d.sqrt())
    }
}

/// Solve the Hermitian positive-definite system A X = B.
///
/// Fails with [`SolverError::SingularY`] when the condition number exceeds
/// [`COND_LIMIT`] or A is not positive definite within rounding.
pub fn solve_hpd(a: &CMat, b: &CMat) -> Result<CMat> {
    let eig = HermEig::new(a);
    check_hpd(&eig)?;
    Ok(eig.solve(b))
}

pub fn check_hpd(eig: &HermEig) -> Result<()> {
    let cond = eig.cond();
    if !(eig.min() > 0.0) || cond > COND_LIMIT {
        return Err(SolverError::SingularY {
            cond,
            limit: COND_LIMIT,
        });
    }
    Ok(())
}

/// Multiply a matrix by a real diagonal from the left: diag(w) * A.
pub fn diag_mul_left(w: &RVec, a: &CMat) -> CMat {
    let mut out = a.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= c(w[i]);
    }
    out
}

/// Complex diagonal matrix from real entries.
pub fn diag_c(w: &RVec) -> CMat {
    CMat::from_fn(w.len(), w.len(), |i, j| if i == j { c(w[i]) } else { c(0.0) })
}

/// Rotate a vector so its largest-magnitude entry is real and nonnegative.
/// Fixes the free phase of a beamformer deterministically.
pub fn normalize_phase(v: &CVec) -> CVec {
    let mut imax = 0;
    let mut best = 0.0f64;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best {
            best = m;
            imax = i;
        }
    }
    if best == 0.0 {
        return v.clone();
    }
    let phase = v[imax].conj() / c(best);
    v * phase
}

/// Unit vector spanning the dominant column-space direction of F
/// (top eigenvector of F F^H).
pub fn principal_direction(f: &CMat) -> CVec {
    let eig = HermEig::new(&(f * f.adjoint()));
    normalize_phase(&eig.vectors.column(0).into_owned())
}

/// Sine of the principal angle between two unit vectors: sqrt(1 - |u^H v|^2).
/// This is the chordal distance between the lines they span.
pub fn sin_angle(u: &CVec, v: &CVec) -> f64 {
    let uu = u.norm();
    let vv = v.norm();
    let ip = u.dotc(v).norm() / (uu * vv);
    (1.0 - ip.min(1.0) * ip.min(1.0)).max(0.0).sqrt()
}
