//! Dense complex linear algebra shared by the solver modules.
//!
//! One solve path only: LU with partial pivoting (nalgebra), always followed
//! by a back-substitution residual check.  Hermitian eigenvalues go through
//! the real symmetric 2n x 2n embedding [[Re H, -Im H], [Im H, Re H]], whose
//! spectrum is that of H with every eigenvalue doubled.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solve `a x = b` by partial-pivoting LU and verify the residual:
/// ||a x - b||_inf <= tol_factor * (1 + ||b||_inf).  Returns the solution
/// and the achieved residual.
pub fn solve_checked(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    tol_factor: f64,
) -> Result<(DVector<Complex64>, f64)> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::Solve(format!(
            "shape mismatch: a is {}x{}, b has {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if n == 0 {
        return Ok((DVector::zeros(0), 0.0));
    }
    let x = a
        .clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Solve("LU factorisation found a singular matrix".into()))?;
    let r = a * &x - b;
    let resid = r.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let scale = 1.0 + b.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !(resid <= tol_factor * scale) {
        return Err(Error::Solve(format!(
            "back-substitution residual {resid:.3e} exceeds {:.3e}",
            tol_factor * scale
        )));
    }
    Ok((x, resid))
}

/// Largest absolute deviation of `h` from its own conjugate transpose.
pub fn hermitian_deviation(h: &DMatrix<Complex64>) -> f64 {
    let n = h.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            dev = dev.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Minimum eigenvalue of a Hermitian matrix.
///
/// Rejects inputs whose Hermitian deviation exceeds `herm_tol * scale`
/// (scale = 1 + largest entry magnitude); then symmetrises and embeds into
/// the real symmetric double-size matrix, whose eigenvalues are those of
/// `h`, each with multiplicity doubled.
pub fn hermitian_min_eigenvalue(h: &DMatrix<Complex64>, herm_tol: f64) -> Result<f64> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::Solve("hermitian_min_eigenvalue: non-square".into()));
    }
    if n == 0 {
        return Err(Error::invalid(
            "hermitian_min_eigenvalue: empty matrix has no eigenvalues".to_string(),
        ));
    }
    let scale = 1.0 + h.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let dev = hermitian_deviation(h);
    if !(dev <= herm_tol * scale) {
        return Err(Error::Solve(format!(
            "matrix is not Hermitian: deviation {dev:.3e} > {:.3e}",
            herm_tol * scale
        )));
    }
    let mut embed = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            // Symmetrised entry of (H + H^*)/2.
            let e = 0.5 * (h[(i, j)] + h[(j, i)].conj());
            embed[(i, j)] = e.re;
            embed[(i + n, j + n)] = e.re;
            embed[(i + n, j)] = e.im;
            embed[(i, j + n)] = -e.im;
        }
    }
    let eig = embed.symmetric_eigen();
    Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Solve a complex tridiagonal system by the Thomas algorithm (no pivoting;
/// intended for the diagonally dominant Crank-Nicolson matrices).
///
/// `lower` couples row i to i-1 (length n-1), `upper` row i to i+1.
pub fn solve_tridiagonal(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if lower.len() + 1 != n || upper.len() + 1 != n || rhs.len() != n {
        return Err(Error::Solve("tridiagonal shape mismatch".into()));
    }
    let tiny = 1e-300;
    let mut c_star = vec![Complex64::new(0.0, 0.0); n];
    let mut d_star = vec![Complex64::new(0.0, 0.0); n];
    if diag[0].norm() < tiny {
        return Err(Error::Solve("tridiagonal pivot underflow".into()));
    }
    if n > 1 {
        c_star[0] = upper[0] / diag[0];
    }
    d_star[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i - 1] * c_star[i - 1];
        if denom.norm() < tiny {
            return Err(Error::Solve("tridiagonal pivot underflow".into()));
        }
        if i < n - 1 {
            c_star[i] = upper[i] / denom;
        }
        d_star[i] = (rhs[i] - lower[i - 1] * d_star[i - 1]) / denom;
    }
    let mut x = d_star;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c_star[i] * next;
    }
    Ok(x)
}
