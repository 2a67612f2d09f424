//! Long-time collision asymptotics: closed-form position shifts and phase
//! factors of each soliton, the rank-one determinant identity underlying
//! their extraction, and empirical verification against the constructed
//! field.
//!
//! As t -> +-infinity the field along the co-moving ray x = 2 lambda_k t +
//! eta converges to a single shifted and rephased soliton,
//!
//! ```text
//! u_N(t, 2 lambda_k t + eta) -> A_k^{+-} U_k(eta - eta_k^{+-}),
//! ```
//!
//! where `U_k` is the one-soliton profile of the k-th datum at t = 0.  The
//! shift `eta_k^-` collects log-factors over the solitons with smaller
//! index, `eta_k^+` over those with larger index, and the phases are
//! accumulated soliton angles.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::nsoliton::{one_soliton, u_n};
use crate::scattering::ScatteringData;
use crate::{Error, Result};

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Which long-time limit a shift or phase refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Asymptote {
    /// t -> -infinity (factors over j < k).
    Past,
    /// t -> +infinity (factors over j > k).
    Future,
}

fn check_index(data: &ScatteringData, k: usize) -> Result<()> {
    if k >= data.n() {
        return Err(Error::invalid(format!(
            "soliton index {k} out of range for {} solitons",
            data.n()
        )));
    }
    Ok(())
}

fn partner_indices(n: usize, k: usize, side: Asymptote) -> std::ops::Range<usize> {
    match side {
        Asymptote::Past => 0..k,
        Asymptote::Future => k + 1..n,
    }
}

/// Position shift `eta_k^{+-}` of soliton `k` (0-based), from the spectral
/// parameters:
///
/// ```text
/// e^{-2 nu_k eta_k^-} = prod_{j<k} (1 - 2 l_k l_j + 2 nu_k nu_j)
///                              / (1 - 2 l_k l_j - 2 nu_k nu_j)
/// ```
///
/// and the mirrored product over j > k for the future side.
pub fn shift_eta(data: &ScatteringData, k: usize, side: Asymptote) -> Result<f64> {
    check_index(data, k)?;
    let l = data.lambdas();
    let nu = data.nus();
    let mut sum = 0.0;
    for j in partner_indices(data.n(), k, side) {
        let plus = 1.0 - 2.0 * l[k] * l[j] + 2.0 * nu[k] * nu[j];
        let minus = 1.0 - 2.0 * l[k] * l[j] - 2.0 * nu[k] * nu[j];
        if !(minus > 0.0) {
            return Err(Error::domain(format!(
                "degenerate shift factor for solitons {k}, {j}: {minus}"
            )));
        }
        sum += (plus / minus).ln();
    }
    Ok(-sum / (2.0 * nu[k]))
}

/// The same shift written purely in terms of the soliton speeds c = 2 lambda
/// (with 2 nu = sqrt(2 - c^2)):
///
/// ```text
/// e^{-sqrt(2 - c_k^2) eta_k^-} = prod_{j<k}
///     (2 - c_k c_j + sqrt((2 - c_k^2)(2 - c_j^2)))
///   / (2 - c_k c_j - sqrt((2 - c_k^2)(2 - c_j^2))).
/// ```
pub fn shift_eta_speed_form(data: &ScatteringData, k: usize, side: Asymptote) -> Result<f64> {
    check_index(data, k)?;
    let c = data.speeds();
    let root_k = (2.0 - c[k] * c[k]).sqrt();
    let mut sum = 0.0;
    for j in partner_indices(data.n(), k, side) {
        let cross = root_k * (2.0 - c[j] * c[j]).sqrt();
        let plus = 2.0 - c[k] * c[j] + cross;
        let minus = 2.0 - c[k] * c[j] - cross;
        if !(minus > 0.0) {
            return Err(Error::domain(format!(
                "degenerate shift factor for solitons {k}, {j}: {minus}"
            )));
        }
        sum += (plus / minus).ln();
    }
    Ok(-sum / root_k)
}

/// Phase factor `A_k^- = e^{2 i sum_{j<k} theta_j}` (resp. j > k for the
/// future side), with theta_j the soliton angle arccos(c_j / sqrt2).
pub fn phase_a(data: &ScatteringData, k: usize, side: Asymptote) -> Result<Complex64> {
    check_index(data, k)?;
    let thetas = data.thetas();
    let sum: f64 = partner_indices(data.n(), k, side)
        .map(|j| thetas[j])
        .sum();
    Ok(Complex64::from_polar(1.0, 2.0 * sum))
}

/// Largest deviation of the constructed field from its predicted one-soliton
/// asymptote along the co-moving ray of soliton `k`:
///
/// `max_eta | u_N(t, 2 lambda_k t + eta) - A_k U_k(eta - eta_k) |`
///
/// at `t = -t_abs` (past) or `t = +t_abs` (future).
pub fn empirical_shift_deviation(
    data: &ScatteringData,
    k: usize,
    side: Asymptote,
    t_abs: f64,
    etas: &[f64],
) -> Result<f64> {
    check_index(data, k)?;
    if !(t_abs > 0.0) || !t_abs.is_finite() {
        return Err(Error::invalid(format!("t_abs = {t_abs} must be positive")));
    }
    let t = match side {
        Asymptote::Past => -t_abs,
        Asymptote::Future => t_abs,
    };
    let eta_shift = shift_eta(data, k, side)?;
    let phase = phase_a(data, k, side)?;
    let lambda = data.lambdas()[k];
    let mu0 = data.mus0()[k];
    let mut worst = 0.0_f64;
    for &eta in etas {
        let x = 2.0 * lambda * t + eta;
        let actual = u_n(data, t, x)?;
        let limit = phase * one_soliton(lambda, mu0, 0.0, eta - eta_shift)?;
        worst = worst.max((actual - limit).norm());
    }
    Ok(worst)
}

/// Locate the modulus dip of soliton `k` at time `t` by scanning
/// `x = 2 lambda_k t + [-half_window, half_window]` with the given step and
/// refining the discrete minimum of |u|^2 with a parabola through its
/// neighbours.  Errors when the window does not bracket an interior dip.
pub fn soliton_center(
    data: &ScatteringData,
    t: f64,
    k: usize,
    half_window: f64,
    step: f64,
) -> Result<f64> {
    check_index(data, k)?;
    if !(step > 0.0) || !(half_window > step) {
        return Err(Error::invalid(format!(
            "window {half_window} / step {step} invalid"
        )));
    }
    let x0 = 2.0 * data.lambdas()[k] * t;
    let m = (half_window / step).ceil() as i64;
    let mut best = (f64::INFINITY, 0_i64);
    for i in -m..=m {
        let x = x0 + i as f64 * step;
        let v = u_n(data, t, x)?.norm_sqr();
        if v < best.0 {
            best = (v, i);
        }
    }
    if best.1 == -m || best.1 == m {
        return Err(Error::domain(format!(
            "window [{:.3}, {:.3}] does not bracket the dip of soliton {k}",
            x0 - half_window,
            x0 + half_window
        )));
    }
    let xc = x0 + best.1 as f64 * step;
    let y0 = u_n(data, t, xc - step)?.norm_sqr();
    let y1 = best.0;
    let y2 = u_n(data, t, xc + step)?.norm_sqr();
    let denom = y0 - 2.0 * y1 + y2;
    if denom <= 0.0 {
        return Err(Error::domain(
            "modulus dip is not locally convex at the scan resolution".to_string(),
        ));
    }
    Ok(xc + 0.5 * step * (y0 - y2) / denom)
}

/// Determinant by recursive cofactor expansion (first row), for matrices of
/// size <= 8.  Deliberately independent of the LU-based solves elsewhere.
pub fn det_by_minors(m: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = m.nrows();
    if n != m.ncols() || n == 0 || n > 8 {
        return Err(Error::invalid(format!(
            "cofactor determinant needs a square matrix of size 1..=8, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(det_rec(m))
}

fn det_rec(m: &DMatrix<Complex64>) -> Complex64 {
    let n = m.nrows();
    if n == 1 {
        return m[(0, 0)];
    }
    if n == 2 {
        return m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    }
    let mut acc = c64(0.0, 0.0);
    for j in 0..n {
        let minor = minor_of(m, 0, j);
        let term = m[(0, j)] * det_rec(&minor);
        acc += if j % 2 == 0 { term } else { -term };
    }
    acc
}

fn minor_of(m: &DMatrix<Complex64>, row: usize, col: usize) -> DMatrix<Complex64> {
    let n = m.nrows();
    DMatrix::from_fn(n - 1, n - 1, |i, j| {
        m[(
            if i < row { i } else { i + 1 },
            if j < col { j } else { j + 1 },
        )]
    })
}

/// Sum of all cofactors `sum_{i,j} (-1)^{i+j} det(minor_{ij})` of a square
/// matrix of size <= 8.
pub fn cofactor_sum(m: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = m.nrows();
    if n != m.ncols() || n == 0 || n > 8 {
        return Err(Error::invalid(format!(
            "cofactor sum needs a square matrix of size 1..=8, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if n == 1 {
        return Ok(c64(1.0, 0.0));
    }
    let mut acc = c64(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            acc += det_rec(&minor_of(m, i, j)) * sign;
        }
    }
    Ok(acc)
}

/// Relative gap in the rank-one update identity
/// `det(M + X 1 1^t) = det M + X sum_{ij} cof_{ij}(M)`
/// (the mechanism that collapses the collision determinant onto a single
/// soliton in the long-time limit).  Both sides are evaluated by cofactor
/// expansion; the gap is `|lhs - rhs| / max(1, |lhs|, |rhs|)`.
pub fn rank_one_update_gap(m: &DMatrix<Complex64>, x: Complex64) -> Result<f64> {
    let n = m.nrows();
    let shifted = DMatrix::from_fn(n, n, |i, j| m[(i, j)] + x);
    let lhs = det_by_minors(&shifted)?;
    let rhs = det_by_minors(m)? + x * cofactor_sum(m)?;
    Ok((lhs - rhs).norm() / (lhs.norm().max(rhs.norm()).max(1.0)))
}
