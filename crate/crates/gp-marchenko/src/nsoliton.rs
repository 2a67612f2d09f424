//! Pure N-soliton fields from the discrete Marchenko system.
//!
//! With kernels generated by the discrete data alone, the half-line
//! Marchenko system collapses onto the span of exp(-nu_k p) and the kernel
//! pair Upsilon(t,x,p) = (sum_k f_k e^{-nu_k p}, sum_k g_k e^{-nu_k p})
//! is fixed by an N x N linear system ("collision system"): writing
//! chi_k = 2 nu_k (x - 2 lambda_k t),
//!
//!   -(2 / (mu_k(0) (lambda_k - i nu_k))) e^{chi_k} g_k
//!        + sqrt2 sum_j [ (lambda_k+lambda_j)/(nu_k+nu_j) + i ] g_j  =  1,
//!
//! and the first component is proportional pointwise:
//! f_k = sqrt2 (lambda_k + i nu_k) g_k (an exact consequence of the pair of
//! integral equations, since |sqrt2 (lambda_k + i nu_k)| = 1).  The field is
//! reconstructed as u_N(t,x) = 1 + 2 sqrt2 i sum_k conj(g_k).
//!
//! Rows with chi_k > 0 are pre-multiplied by e^{-chi_k}: an exact row
//! equilibration that prevents overflow for any (t,x) and keeps the solve
//! residual meaningful (all retained magnitudes are O(1)).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::par;
use crate::scattering::ScatteringData;
use crate::TWO_SQRT_2;

/// Residual bound factor for the collision-system solve:
/// ||A g - b||_inf <= SOLVE_TOL_FACTOR * (1 + ||b||_inf), else hard error.
pub const SOLVE_TOL_FACTOR: f64 = 1e-10;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dark/grey soliton profile
/// U_c(x) = sqrt(1 - c^2/2) tanh(sqrt(1 - c^2/2) x / sqrt2) + i c / sqrt2
/// for |c| < sqrt2; modulus dips to |U_c|^2 = c^2/2 at x = 0.
pub fn soliton_profile(c: f64, x: f64) -> Result<Complex64> {
    let amp2 = 1.0 - 0.5 * c * c;
    if !(amp2 > 0.0) {
        return Err(Error::domain(format!(
            "soliton_profile: speed {c} outside (-sqrt2, sqrt2)"
        )));
    }
    let amp = amp2.sqrt();
    Ok(c64(
        amp * (amp * x * crate::FRAC_1_SQRT_2).tanh(),
        c * crate::FRAC_1_SQRT_2,
    ))
}

/// Closed-form 1-soliton field for data (lambda, mu0):
/// u(t,x) = 1 + 4 nu (i lambda - nu) / (1 - 2 sqrt2 nu mu0^{-1} e^{2 nu (x - 2 lambda t)}).
pub fn one_soliton(lambda: f64, mu0: f64, t: f64, x: f64) -> Result<Complex64> {
    if !(mu0 < 0.0) || !mu0.is_finite() {
        return Err(Error::invalid(format!("mu0 = {mu0} must be negative")));
    }
    let nu = crate::scattering::nu_of_lambda(lambda)?;
    let s = x - 2.0 * lambda * t;
    // 2 sqrt2 nu e^{2 nu s} / |mu0|, evaluated in log space; overflows to
    // +inf for huge s, and the real reciprocal then cleanly gives u = 1.
    let w = ((TWO_SQRT_2 * nu / mu0.abs()).ln() + 2.0 * nu * s).exp();
    Ok(c64(1.0, 0.0) + c64(-4.0 * nu * nu, 4.0 * nu * lambda).scale((1.0 + w).recip()))
}

/// The worked 2-soliton example for data lambda = (-1/2, 1/2),
/// mu0 = (-1, -1):
/// u(t,x) = (5 cosh x + 3 sinh x + 4 sqrt2 i sinh t)
///        / (5 cosh x + 3 sinh x + 4 sqrt2 cosh t).
pub fn two_soliton_example(t: f64, x: f64) -> Complex64 {
    let re = 5.0 * x.cosh() + 3.0 * x.sinh();
    let num = c64(re, 4.0 * std::f64::consts::SQRT_2 * t.sinh());
    let den = c64(re + 4.0 * std::f64::consts::SQRT_2 * t.cosh(), 0.0);
    num / den
}

/// Assemble the (row-equilibrated) collision system `A g = b` at `(t, x)`.
pub fn assemble_system(
    data: &ScatteringData,
    t: f64,
    x: f64,
) -> (DMatrix<Complex64>, DVector<Complex64>) {
    let n = data.n();
    let l = data.lambdas();
    let nu = data.nus();
    let m0 = data.mus0();
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    let mut b = DVector::<Complex64>::zeros(n);
    for k in 0..n {
        let chi = 2.0 * nu[k] * (x - 2.0 * l[k] * t);
        // Row scale e^{-max(chi,0)}: exact equilibration, no overflow.
        let scale = (-chi.max(0.0)).exp();
        let diag_exp = (chi - chi.max(0.0)).exp(); // e^{chi} * scale
        // -(2/mu_k0) / (lambda_k - i nu_k) = -(4/mu_k0)(lambda_k + i nu_k)
        // using lambda^2 + nu^2 = 1/2.
        let h = c64(l[k], nu[k]) * (-4.0 / m0[k] * diag_exp);
        for j in 0..n {
            let s = c64(
                std::f64::consts::SQRT_2 * (l[k] + l[j]) / (nu[k] + nu[j]),
                std::f64::consts::SQRT_2,
            );
            a[(k, j)] = s * scale;
        }
        a[(k, k)] += h;
        b[k] = c64(scale, 0.0);
    }
    (a, b)
}

/// Kernel coefficients of the N-soliton Marchenko pair at one `(t, x)`.
#[derive(Debug, Clone)]
pub struct NSolitonCoefficients {
    nus: Vec<f64>,
    f: Vec<Complex64>,
    g: Vec<Complex64>,
    residual: f64,
}

impl NSolitonCoefficients {
    /// g_k (second kernel component coefficients).
    pub fn g(&self) -> &[Complex64] {
        &self.g
    }

    /// f_k = sqrt2 (lambda_k + i nu_k) g_k.
    pub fn f(&self) -> &[Complex64] {
        &self.f
    }

    pub fn nus(&self) -> &[f64] {
        &self.nus
    }

    /// Back-substitution residual of the equilibrated solve.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Field value u_N = 1 + 2 sqrt2 i sum_k conj(g_k).
    pub fn field_value(&self) -> Complex64 {
        let s: Complex64 = self.g.iter().map(|g| g.conj()).sum();
        c64(1.0, 0.0) + c64(0.0, TWO_SQRT_2) * s
    }

    /// Kernel pair Upsilon(p) = (sum f_k e^{-nu_k p}, sum g_k e^{-nu_k p}).
    pub fn upsilon(&self, p: f64) -> (Complex64, Complex64) {
        let mut u1 = c64(0.0, 0.0);
        let mut u2 = c64(0.0, 0.0);
        for k in 0..self.nus.len() {
            let e = (-self.nus[k] * p).exp();
            u1 += self.f[k] * e;
            u2 += self.g[k] * e;
        }
        (u1, u2)
    }

    /// Laplace-type moments (int_0^infty Upsilon_i(p) e^{-s p} dp) for
    /// Re s > -nu_min, in closed form.
    pub fn upsilon_moment(&self, s: Complex64) -> (Complex64, Complex64) {
        let mut m1 = c64(0.0, 0.0);
        let mut m2 = c64(0.0, 0.0);
        for k in 0..self.nus.len() {
            let d = 1.0 / (s + c64(self.nus[k], 0.0));
            m1 += self.f[k] * d;
            m2 += self.g[k] * d;
        }
        (m1, m2)
    }
}

/// Solve the collision system at `(t, x)`.
pub fn solve_coefficients(data: &ScatteringData, t: f64, x: f64) -> Result<NSolitonCoefficients> {
    let n = data.n();
    if n == 0 {
        return Ok(NSolitonCoefficients {
            nus: Vec::new(),
            f: Vec::new(),
            g: Vec::new(),
            residual: 0.0,
        });
    }
    let (a, b) = assemble_system(data, t, x);
    let (g_vec, residual) = linalg::solve_checked(&a, &b, SOLVE_TOL_FACTOR)?;
    let g: Vec<Complex64> = g_vec.iter().cloned().collect();
    let f: Vec<Complex64> = g
        .iter()
        .zip(data.lambdas().iter().zip(data.nus()))
        .map(|(gk, (&l, &nu))| c64(std::f64::consts::SQRT_2 * l, std::f64::consts::SQRT_2 * nu) * gk)
        .collect();
    Ok(NSolitonCoefficients {
        nus: data.nus().to_vec(),
        f,
        g,
        residual,
    })
}

/// N-soliton field value u_N(t, x).
pub fn u_n(data: &ScatteringData, t: f64, x: f64) -> Result<Complex64> {
    Ok(solve_coefficients(data, t, x)?.field_value())
}

/// Upsilon kernel pair at offset `p` (see [`NSolitonCoefficients::upsilon`]).
pub fn kernel_upsilon(
    data: &ScatteringData,
    t: f64,
    x: f64,
    p: f64,
) -> Result<(Complex64, Complex64)> {
    Ok(solve_coefficients(data, t, x)?.upsilon(p))
}

/// Minimum eigenvalue of the Hermitian invertibility witness
/// M_ij = (mu_i mu_j + conj(beta_i) beta_j) e^{-(nu_i+nu_j)x} / (nu_i+nu_j)
///        - delta_ij mu_i,
/// with beta_i = sqrt2 mu_i (lambda_i - i nu_i) and mu = mu(t).  Positive
/// definiteness of this matrix is what makes the collision system uniquely
/// solvable at every (t, x).
pub fn gram_min_eigenvalue(data: &ScatteringData, t: f64, x: f64) -> Result<f64> {
    let n = data.n();
    if n == 0 {
        return Err(Error::invalid(
            "gram_min_eigenvalue: empty dataset has no witness matrix".to_string(),
        ));
    }
    let l = data.lambdas();
    let nu = data.nus();
    let mus = data.mus_at(t);
    // Guard the growing exponentials e^{-(nu_i+nu_j)x} for x << 0.
    let worst = nu.iter().map(|&v| 2.0 * v * x.abs()).fold(0.0, f64::max);
    if worst > 700.0 {
        return Err(Error::domain(format!(
            "gram witness exponent {worst:.1} would overflow at x = {x}"
        )));
    }
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let bi = c64(
            std::f64::consts::SQRT_2 * l[i],
            -std::f64::consts::SQRT_2 * nu[i],
        ) * mus[i];
        for j in 0..n {
            let bj = c64(
                std::f64::consts::SQRT_2 * l[j],
                -std::f64::consts::SQRT_2 * nu[j],
            ) * mus[j];
            let w = (-(nu[i] + nu[j]) * x).exp() / (nu[i] + nu[j]);
            m[(i, j)] = (c64(mus[i] * mus[j], 0.0) + bi.conj() * bj) * w;
        }
        m[(i, i)] -= c64(mus[i], 0.0);
    }
    linalg::hermitian_min_eigenvalue(&m, 1e-12)
}

/// Which construction produced a [`FieldGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    NSoliton,
    Perturbed,
    CnEvolved,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::NSoliton => "nsoliton",
            Provenance::Perturbed => "perturbed",
            Provenance::CnEvolved => "cn-evolved",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "nsoliton" => Ok(Provenance::NSoliton),
            "perturbed" => Ok(Provenance::Perturbed),
            "cn-evolved" => Ok(Provenance::CnEvolved),
            other => Err(Error::invalid(format!("unknown provenance tag {other:?}"))),
        }
    }
}

/// Uniform grid axis `min + i * step`, `i = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    pub fn new(min: f64, step: f64, len: usize) -> Result<Axis> {
        if !(min.is_finite() && step.is_finite() && step > 0.0) || len == 0 {
            return Err(Error::invalid(format!(
                "axis must have finite min, positive step and len >= 1 (got {min}, {step}, {len})"
            )));
        }
        Ok(Axis { min, step, len })
    }

    /// Axis spanning `[min, max]` with step `step`; `(max - min)/step` must
    /// be within 1e-6 steps of an integer.
    pub fn from_range(min: f64, max: f64, step: f64) -> Result<Axis> {
        if !(step > 0.0) || !(max >= min) {
            return Err(Error::invalid(format!(
                "axis range [{min}, {max}] with step {step} is invalid"
            )));
        }
        let count = (max - min) / step;
        let rounded = count.round();
        if (count - rounded).abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "axis span {max} - {min} is not an integer multiple of step {step}"
            )));
        }
        Axis::new(min, step, rounded as usize + 1)
    }

    /// A single grid point (degenerate axis with an arbitrary positive step).
    pub fn singleton(value: f64) -> Axis {
        Axis {
            min: value,
            step: 1.0,
            len: 1,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + self.step * i as f64
    }

    pub fn max(&self) -> f64 {
        self.value(self.len - 1)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.value(i)).collect()
    }
}

/// Complex field samples on a uniform (t, x) grid, t-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub t: Axis,
    pub x: Axis,
    values: Vec<Complex64>,
    pub provenance: Provenance,
}

impl FieldGrid {
    pub fn from_values(
        t: Axis,
        x: Axis,
        values: Vec<Complex64>,
        provenance: Provenance,
    ) -> Result<FieldGrid> {
        if values.len() != t.len * x.len {
            return Err(Error::GridMismatch(format!(
                "value count {} != {} x {}",
                values.len(),
                t.len,
                x.len
            )));
        }
        Ok(FieldGrid {
            t,
            x,
            values,
            provenance,
        })
    }

    pub fn at(&self, it: usize, ix: usize) -> Complex64 {
        self.values[it * self.x.len + ix]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Row of samples at time index `it`.
    pub fn row(&self, it: usize) -> &[Complex64] {
        &self.values[it * self.x.len..(it + 1) * self.x.len]
    }

    pub fn same_axes(&self, other: &FieldGrid) -> bool {
        self.t == other.t && self.x == other.x
    }
}

/// N-soliton field evaluated on a grid, with the worst solve residual seen.
#[derive(Debug, Clone)]
pub struct GridEval {
    pub field: FieldGrid,
    pub max_residual: f64,
}

fn grid_eval_impl(
    data: &ScatteringData,
    t: Axis,
    x: Axis,
    serial: bool,
) -> Result<GridEval> {
    let nx = x.len;
    let n_total = t.len * nx;
    let eval = |idx: usize| -> Result<(Complex64, f64)> {
        let c = solve_coefficients(data, t.value(idx / nx), x.value(idx % nx))?;
        Ok((c.field_value(), c.residual()))
    };
    let results = if serial {
        par::map_indexed_serial(n_total, eval)
    } else {
        par::map_indexed(n_total, eval)
    };
    let mut values = Vec::with_capacity(n_total);
    let mut max_residual: f64 = 0.0;
    for r in results {
        let (v, resid) = r?;
        values.push(v);
        max_residual = max_residual.max(resid);
    }
    Ok(GridEval {
        field: FieldGrid::from_values(t, x, values, Provenance::NSoliton)?,
        max_residual,
    })
}

/// Evaluate u_N on the tensor grid `t x x` (parallel under the `parallel`
/// feature; output is identical either way).
pub fn grid_eval(data: &ScatteringData, t: Axis, x: Axis) -> Result<GridEval> {
    grid_eval_impl(data, t, x, false)
}

/// Sequential twin of [`grid_eval`] (benchmark baseline).
pub fn grid_eval_serial(data: &ScatteringData, t: Axis, x: Axis) -> Result<GridEval> {
    grid_eval_impl(data, t, x, true)
}
