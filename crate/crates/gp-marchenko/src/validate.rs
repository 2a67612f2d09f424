//! Independent checks of a constructed field: finite-difference residual in
//! the evolution equation, the linear eigenfunction (Lax) check, and a
//! Crank-Nicolson evolution oracle that knows nothing about the inverse
//! construction.

use nalgebra::Vector2;
use num_complex::Complex64;

use crate::linalg::solve_tridiagonal;
use crate::nsoliton::{solve_coefficients, u_n, Axis, FieldGrid};
use crate::scattering::ScatteringData;
use crate::{Error, Result, FRAC_1_SQRT_2};

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Maximum pointwise residual of
/// `i u_t + u_xx + (1 - |u|^2) u`
/// over the interior of the grid, with second-order centered differences
/// in both directions.  Needs at least 3 points per axis.
pub fn gp_residual(field: &FieldGrid) -> Result<f64> {
    let (nt, nx) = (field.t.len, field.x.len);
    if nt < 3 || nx < 3 {
        return Err(Error::invalid(format!(
            "residual stencil needs >= 3 points per axis, got {nt} x {nx}"
        )));
    }
    let tau = field.t.step;
    let h = field.x.step;
    let mut worst = 0.0_f64;
    for it in 1..nt - 1 {
        for ix in 1..nx - 1 {
            let u = field.at(it, ix);
            let du_dt = (field.at(it + 1, ix) - field.at(it - 1, ix)) / (2.0 * tau);
            let d2u_dx2 =
                (field.at(it, ix + 1) - u * 2.0 + field.at(it, ix - 1)) / (h * h);
            let r = c64(0.0, 1.0) * du_dt + d2u_dx2 + u * (1.0 - u.norm_sqr());
            worst = worst.max(r.norm());
        }
    }
    Ok(worst)
}

/// Principal-branch spectral map `lambda(xi) = sqrt(xi^2 + 1/2)` extended to
/// complex `xi`.
pub fn lambda_of_xi_complex(xi: Complex64) -> Complex64 {
    (xi * xi + 0.5).sqrt()
}

/// Dressed eigenfunction of the linear problem at spectral parameter `xi`
/// (closed lower half-plane), over the collision background:
///
/// `psi(x) = X(x) - W(x) X(x)`,
///
/// with `X = e^{-i xi x} (1, sqrt2 (lambda - xi))^t` the vacuum solution and
/// `W` the half-line moment `int_0^inf K(p) e^{-i xi p} dp` of the kernel
/// matrix `K = [[Psi_1, Psi_2], [conj Psi_2, conj Psi_1]]`, available in
/// closed form because the bound-state kernel is a finite exponential sum.
/// Requires a vanishing reflection coefficient (the background must be u_N).
pub fn zs_eigenfunction(
    data: &ScatteringData,
    t: f64,
    x: f64,
    xi: Complex64,
) -> Result<Vector2<Complex64>> {
    if xi.im > 1e-12 {
        return Err(Error::domain(format!(
            "spectral parameter {xi} must lie in the closed lower half-plane"
        )));
    }
    let lambda = lambda_of_xi_complex(xi);
    let coeffs = solve_coefficients(data, t, x)?;
    let ixi = c64(0.0, 1.0) * xi;
    let mut w11 = c64(0.0, 0.0);
    let mut w12 = c64(0.0, 0.0);
    let mut w21 = c64(0.0, 0.0);
    let mut w22 = c64(0.0, 0.0);
    for (k, &nu) in coeffs.nus().iter().enumerate() {
        let d = (c64(nu, 0.0) + ixi).inv();
        w11 += coeffs.f()[k] * d;
        w12 += coeffs.g()[k] * d;
        w21 += coeffs.g()[k].conj() * d;
        w22 += coeffs.f()[k].conj() * d;
    }
    let phase = (-ixi * x).exp();
    let x1 = phase;
    let x2 = phase * (lambda - xi) * std::f64::consts::SQRT_2;
    Ok(Vector2::new(
        x1 - (w11 * x1 + w12 * x2),
        x2 - (w21 * x1 + w22 * x2),
    ))
}

/// Residual of the dressed eigenfunction in the linear system
///
/// `i M psi_x + Q psi = lambda psi`,  `M = diag(1, -1)`,
/// `Q = [[0, conj q], [q, 0]]`,  `q = u / sqrt2`,
///
/// with the x-derivative taken by a centered difference of step `fd_step`
/// (the returned residual is O(fd_step^2) for a true eigenfunction).
pub fn lax_residual(
    data: &ScatteringData,
    t: f64,
    x: f64,
    xi: Complex64,
    fd_step: f64,
) -> Result<f64> {
    if !(fd_step > 0.0) || !fd_step.is_finite() {
        return Err(Error::invalid(format!("derivative step {fd_step} invalid")));
    }
    let lambda = lambda_of_xi_complex(xi);
    let psi = zs_eigenfunction(data, t, x, xi)?;
    let plus = zs_eigenfunction(data, t, x + fd_step, xi)?;
    let minus = zs_eigenfunction(data, t, x - fd_step, xi)?;
    let dpsi = (plus - minus) / Complex64::from(2.0 * fd_step);
    let q = u_n(data, t, x)? * FRAC_1_SQRT_2;
    let r1 = c64(0.0, 1.0) * dpsi.x + q.conj() * psi.y - lambda * psi.x;
    let r2 = -c64(0.0, 1.0) * dpsi.y + q * psi.x - lambda * psi.y;
    Ok((r1.norm_sqr() + r2.norm_sqr()).sqrt())
}

/// Negative control for the eigenfunction check: the bare plane wave
/// `e^{-i xi x} (1, 0)^t` is *not* an eigenfunction, and its residual
/// (computed with the exact derivative, no differencing error) stays O(1).
pub fn lax_control_residual(
    data: &ScatteringData,
    t: f64,
    x: f64,
    xi: Complex64,
) -> Result<f64> {
    let lambda = lambda_of_xi_complex(xi);
    let phase = (-c64(0.0, 1.0) * xi * x).exp();
    let q = u_n(data, t, x)? * FRAC_1_SQRT_2;
    // i M d/dx acts on (phase, 0) as (xi phase, 0).
    let r1 = (xi - lambda) * phase;
    let r2 = q * phase;
    Ok((r1.norm_sqr() + r2.norm_sqr()).sqrt())
}

/// Crank-Nicolson evolution of `i u_t + u_xx + (1 - |u|^2) u = 0` with
/// Dirichlet values supplied by `boundary(t, x)` at both ends.
///
/// Each step solves the implicit midpoint system
/// `(v - u)/tau = (i/2) D2 (v + u) + i g((u + v)/2)` with
/// `g(w) = (1 - |w|^2) w`, iterating the nonlinear term to fixed point
/// (tolerance 1e-12 relative to the field size) and solving the linear part
/// with the Thomas algorithm.  Returns the state after `steps` steps.
pub fn cn_evolve(
    initial: &[Complex64],
    x: Axis,
    t0: f64,
    tau: f64,
    steps: usize,
    boundary: &dyn Fn(f64, f64) -> Complex64,
) -> Result<Vec<Complex64>> {
    let l = x.len;
    if initial.len() != l {
        return Err(Error::GridMismatch(format!(
            "initial state has {} samples for a {l}-point axis",
            initial.len()
        )));
    }
    if l < 3 {
        return Err(Error::invalid("evolution axis needs >= 3 points".to_string()));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::invalid(format!("time step {tau} invalid")));
    }
    let h = x.step;
    let alpha = c64(0.0, tau / (2.0 * h * h));
    let m = l - 2;
    let lower = vec![-alpha; m - 1];
    let upper = vec![-alpha; m - 1];
    let diag = vec![c64(1.0, 0.0) + alpha * 2.0; m];
    let g = |w: Complex64| w * (1.0 - w.norm_sqr());

    let mut u = initial.to_vec();
    for step in 0..steps {
        let t_next = t0 + (step + 1) as f64 * tau;
        let vb_lo = boundary(t_next, x.min);
        let vb_hi = boundary(t_next, x.max());
        // Explicit part: u + (i tau / 2) D2 u on the interior.
        let mut base = vec![c64(0.0, 0.0); m];
        for j in 1..l - 1 {
            base[j - 1] = u[j] + alpha * (u[j + 1] - u[j] * 2.0 + u[j - 1]);
        }
        base[0] += alpha * vb_lo;
        base[m - 1] += alpha * vb_hi;

        let mut v = u.clone();
        v[0] = vb_lo;
        v[l - 1] = vb_hi;
        let mut converged = false;
        for _ in 0..60 {
            let mut rhs = base.clone();
            for j in 1..l - 1 {
                let mid = (u[j] + v[j]) * 0.5;
                rhs[j - 1] += c64(0.0, tau) * g(mid);
            }
            let interior = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
            let mut delta = 0.0_f64;
            let mut scale = 1.0_f64;
            for j in 1..l - 1 {
                delta = delta.max((interior[j - 1] - v[j]).norm());
                scale = scale.max(interior[j - 1].norm());
                v[j] = interior[j - 1];
            }
            if !delta.is_finite() {
                return Err(Error::Solve(format!(
                    "implicit step diverged at t = {t_next}"
                )));
            }
            if delta <= 1e-12 * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Solve(format!(
                "implicit midpoint iteration stalled at t = {t_next} (step too large)"
            )));
        }
        u = v;
    }
    Ok(u)
}

/// Pointwise comparison of two sampled fields: `(L_inf, RMS)` of the gap.
pub fn compare_slices(a: &[Complex64], b: &[Complex64]) -> Result<(f64, f64)> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::GridMismatch(format!(
            "cannot compare slices of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut linf = 0.0_f64;
    let mut sum = 0.0_f64;
    for (va, vb) in a.iter().zip(b) {
        let d = (va - vb).norm();
        linf = linf.max(d);
        sum += d * d;
    }
    Ok((linf, (sum / a.len() as f64).sqrt()))
}

/// Observed convergence orders `log2(e_i / e_{i+1})` of an error sequence
/// obtained by successive step halving.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .collect()
}
