//! Scattering data on the unit background.
//!
//! A dataset is a finite list of discrete eigenvalues lambda_1 < ... <
//! lambda_N inside (-1/sqrt2, 1/sqrt2) with strictly negative norming
//! constants mu_k(0), plus an optional real reflection coefficient
//! c(lambda) on the continuous spectrum |lambda| >= 1/sqrt2.  Derived per
//! eigenvalue: nu_k = sqrt(1/2 - lambda_k^2) (spatial decay rate) and the
//! soliton velocity c_k = 2 lambda_k.  Time evolution acts on the data
//! alone: mu_k(t) = mu_k(0) exp(4 lambda_k nu_k t), and the reflection
//! picks up the phase exp(-4 i lambda xi t) per branch.

use crate::error::{Error, Result};
use crate::FRAC_1_SQRT_2;

/// Default guard distance delta: eigenvalues must satisfy
/// |lambda| <= 1/sqrt2 - delta so that nu_k stays bounded away from zero.
pub const DEFAULT_GUARD_DELTA: f64 = 1e-6;

/// nu(lambda) = sqrt(1/2 - lambda^2); errors outside |lambda| < 1/sqrt2.
pub fn nu_of_lambda(lambda: f64) -> Result<f64> {
    let r = 0.5 - lambda * lambda;
    if !(r > 0.0) {
        return Err(Error::domain(format!(
            "nu_of_lambda: lambda = {lambda} outside (-1/sqrt2, 1/sqrt2)"
        )));
    }
    Ok(r.sqrt())
}

/// Soliton velocity c = 2 lambda.
pub fn speed_of_lambda(lambda: f64) -> f64 {
    2.0 * lambda
}

/// theta = arccos(c / sqrt2), the half phase jump across one soliton;
/// strictly decreasing in the velocity, theta in [0, pi] for |c| <= sqrt2.
pub fn theta_of_speed(c: f64) -> Result<f64> {
    let r = c * FRAC_1_SQRT_2;
    if !(r.abs() <= 1.0) {
        return Err(Error::domain(format!(
            "theta_of_speed: speed {c} outside [-sqrt2, sqrt2]"
        )));
    }
    Ok(r.acos())
}

/// mu(t) = mu0 * exp(4 lambda nu t).  The decay rate 4 lambda nu is the one
/// exponential flow that keeps the reconstructed field a GP solution; it
/// satisfies the semigroup law exactly.
pub fn evolve_mu(mu0: f64, lambda: f64, t: f64) -> Result<f64> {
    let nu = nu_of_lambda(lambda)?;
    Ok(mu0 * (4.0 * lambda * nu * t).exp())
}

/// Validated discrete scattering data.  `N = 0` (no solitons) is legal and
/// produces the constant background `u = 1` downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData {
    lambdas: Vec<f64>,
    mus0: Vec<f64>,
    nus: Vec<f64>,
    guard_delta: f64,
}

impl ScatteringData {
    /// Validate `(lambdas, mus0)` and derive the decay rates.
    ///
    /// Rules: equal lengths; lambdas strictly increasing (hence distinct);
    /// every |lambda_k| <= 1/sqrt2 - guard_delta; every mu_k < 0; all
    /// entries finite.
    pub fn new(lambdas: Vec<f64>, mus0: Vec<f64>, guard_delta: f64) -> Result<Self> {
        if !(guard_delta > 0.0) || !guard_delta.is_finite() {
            return Err(Error::invalid(format!(
                "guard_delta must be a positive finite number, got {guard_delta}"
            )));
        }
        if lambdas.len() != mus0.len() {
            return Err(Error::invalid(format!(
                "lambdas ({}) and mus0 ({}) differ in length",
                lambdas.len(),
                mus0.len()
            )));
        }
        for (k, &l) in lambdas.iter().enumerate() {
            if !l.is_finite() {
                return Err(Error::invalid(format!("lambda[{k}] = {l} is not finite")));
            }
            if l.abs() > FRAC_1_SQRT_2 - guard_delta {
                return Err(Error::invalid(format!(
                    "lambda[{k}] = {l} within guard distance {guard_delta} of +-1/sqrt2"
                )));
            }
            if k > 0 && !(lambdas[k - 1] < l) {
                return Err(Error::invalid(format!(
                    "lambdas must be strictly increasing; lambda[{}] = {} !< lambda[{k}] = {l}",
                    k - 1,
                    lambdas[k - 1]
                )));
            }
        }
        for (k, &m) in mus0.iter().enumerate() {
            if !m.is_finite() || !(m < 0.0) {
                return Err(Error::invalid(format!(
                    "mu0[{k}] = {m} must be finite and strictly negative"
                )));
            }
        }
        let nus = lambdas
            .iter()
            .map(|&l| nu_of_lambda(l))
            .collect::<Result<Vec<_>>>()?;
        Ok(ScatteringData {
            lambdas,
            mus0,
            nus,
            guard_delta,
        })
    }

    /// Shorthand with the default guard distance.
    pub fn with_default_guard(lambdas: Vec<f64>, mus0: Vec<f64>) -> Result<Self> {
        Self::new(lambdas, mus0, DEFAULT_GUARD_DELTA)
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn mus0(&self) -> &[f64] {
        &self.mus0
    }

    pub fn nus(&self) -> &[f64] {
        &self.nus
    }

    pub fn guard_delta(&self) -> f64 {
        self.guard_delta
    }

    pub fn nu_min(&self) -> Option<f64> {
        self.nus.iter().cloned().reduce(f64::min)
    }

    /// Norming constants evolved to time `t`.
    pub fn mus_at(&self, t: f64) -> Vec<f64> {
        self.lambdas
            .iter()
            .zip(&self.nus)
            .zip(&self.mus0)
            .map(|((&l, &nu), &m0)| m0 * (4.0 * l * nu * t).exp())
            .collect()
    }

    /// Soliton velocities c_k = 2 lambda_k.
    pub fn speeds(&self) -> Vec<f64> {
        self.lambdas.iter().map(|&l| speed_of_lambda(l)).collect()
    }

    /// Half phase jumps theta_k = arccos(c_k / sqrt2).
    pub fn thetas(&self) -> Vec<f64> {
        // |c_k| < sqrt2 is guaranteed by validation, so unwrap is safe.
        self.speeds()
            .iter()
            .map(|&c| theta_of_speed(c).expect("validated speed"))
            .collect()
    }

    /// Data with every eigenvalue negated and the order reversed (again
    /// strictly increasing).  Under x -> -x this maps a dataset onto the
    /// mirror-image soliton configuration; collision shifts of soliton k
    /// on the original data equal those of soliton N+1-k here.
    pub fn mirrored(&self) -> ScatteringData {
        let lambdas = self.lambdas.iter().rev().map(|&l| -l).collect();
        let mus0 = self.mus0.iter().rev().cloned().collect();
        ScatteringData::new(lambdas, mus0, self.guard_delta).expect("mirror of valid data is valid")
    }

    /// Require pairwise distinct decay rates (hypothesis of the far-field
    /// comparison between perturbed and pure N-soliton fields).  Note that
    /// +-lambda pairs share the same nu and are therefore rejected here.
    pub fn require_distinct_nus(&self, tol: f64) -> Result<()> {
        for i in 0..self.nus.len() {
            for j in (i + 1)..self.nus.len() {
                if (self.nus[i] - self.nus[j]).abs() <= tol {
                    return Err(Error::invalid(format!(
                        "decay rates nu[{i}] = {} and nu[{j}] = {} coincide within {tol}",
                        self.nus[i], self.nus[j]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parameters of a single soliton track: velocity, centre offset, carrier
/// phase.  The profile itself lives in [`crate::nsoliton::soliton_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonParams {
    pub speed: f64,
    pub x0: f64,
    pub theta0: f64,
}

impl SolitonParams {
    pub fn new(speed: f64, x0: f64, theta0: f64) -> Result<Self> {
        if !(speed.abs() < std::f64::consts::SQRT_2) {
            return Err(Error::domain(format!(
                "soliton speed {speed} outside (-sqrt2, sqrt2)"
            )));
        }
        if !x0.is_finite() || !theta0.is_finite() {
            return Err(Error::invalid("soliton centre/phase must be finite"));
        }
        Ok(SolitonParams { speed, x0, theta0 })
    }
}

/// Real reflection coefficient on |lambda| >= 1/sqrt2.
///
/// Realness keeps the continuous kernels F12, F22 real for all times (the
/// far-field construction depends on it) and is enforced structurally: all
/// families store real values only.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionCoefficient {
    family: ReflectionFamily,
    /// Decay index n >= 3: the constructions below all satisfy
    /// sup |lambda^(n+2) c(lambda)| < infinity, which the kernel quadrature
    /// uses for its tail bounds.
    decay_index: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReflectionFamily {
    /// c == 0: pure solitons.
    None,
    /// c(lambda) = amplitude * exp(-(xi/width)^2) on both branches, where
    /// xi = sqrt(lambda^2 - 1/2) >= 0 is the spectral parameter.
    Gaussian { amplitude: f64, width: f64 },
    /// Piecewise-linear interpolation of real samples (lambda_i, c_i),
    /// zero outside the sampled range.
    Table { lambdas: Vec<f64>, values: Vec<f64> },
}

impl ReflectionCoefficient {
    pub fn none() -> Self {
        ReflectionCoefficient {
            family: ReflectionFamily::None,
            decay_index: 3,
        }
    }

    pub fn gaussian(amplitude: f64, width: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::invalid(format!(
                "gaussian reflection amplitude {amplitude} not finite"
            )));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::invalid(format!(
                "gaussian reflection width {width} must be positive"
            )));
        }
        Ok(ReflectionCoefficient {
            family: ReflectionFamily::Gaussian { amplitude, width },
            decay_index: 3,
        })
    }

    /// Build a tabulated coefficient.  Samples must be strictly increasing
    /// in lambda, real and finite, and lie in the continuous spectrum
    /// |lambda| >= 1/sqrt2.
    pub fn table(samples: Vec<(f64, f64)>, decay_index: u32) -> Result<Self> {
        if decay_index < 3 {
            return Err(Error::invalid(format!(
                "reflection decay index {decay_index} < 3"
            )));
        }
        for (i, &(l, v)) in samples.iter().enumerate() {
            if !l.is_finite() || !v.is_finite() {
                return Err(Error::invalid(format!("table sample {i} not finite")));
            }
            if l.abs() < FRAC_1_SQRT_2 - 1e-12 {
                return Err(Error::invalid(format!(
                    "table sample {i}: lambda = {l} inside the spectral gap (|lambda| < 1/sqrt2)"
                )));
            }
            if i > 0 && !(samples[i - 1].0 < l) {
                return Err(Error::invalid(
                    "table samples must be strictly increasing in lambda".to_string(),
                ));
            }
        }
        let (lambdas, values) = samples.into_iter().unzip();
        Ok(ReflectionCoefficient {
            family: ReflectionFamily::Table { lambdas, values },
            decay_index,
        })
    }

    pub fn family(&self) -> &ReflectionFamily {
        &self.family
    }

    pub fn decay_index(&self) -> u32 {
        self.decay_index
    }

    pub fn is_zero(&self) -> bool {
        match &self.family {
            ReflectionFamily::None => true,
            ReflectionFamily::Gaussian { amplitude, .. } => *amplitude == 0.0,
            ReflectionFamily::Table { values, .. } => values.iter().all(|&v| v == 0.0),
        }
    }

    /// Evaluate c(lambda).  Branch sign is carried by the sign of `lambda`;
    /// callers feed +-lambda(xi) with lambda(xi) = sqrt(xi^2 + 1/2).
    pub fn eval(&self, lambda: f64) -> f64 {
        debug_assert!(
            lambda.abs() >= FRAC_1_SQRT_2 - 1e-9,
            "reflection evaluated in the spectral gap: lambda = {lambda}"
        );
        match &self.family {
            ReflectionFamily::None => 0.0,
            ReflectionFamily::Gaussian { amplitude, width } => {
                let xi2 = (lambda * lambda - 0.5).max(0.0);
                amplitude * (-xi2 / (width * width)).exp()
            }
            ReflectionFamily::Table { lambdas, values } => {
                if lambdas.is_empty() {
                    return 0.0;
                }
                match lambdas.partition_point(|&l| l < lambda) {
                    0 => {
                        if lambda == lambdas[0] {
                            values[0]
                        } else {
                            0.0
                        }
                    }
                    i if i == lambdas.len() => {
                        if lambda == lambdas[i - 1] {
                            values[i - 1]
                        } else {
                            0.0
                        }
                    }
                    i => {
                        let (l0, l1) = (lambdas[i - 1], lambdas[i]);
                        let w = (lambda - l0) / (l1 - l0);
                        values[i - 1] * (1.0 - w) + values[i] * w
                    }
                }
            }
        }
    }

    /// Numeric estimate of sup_lambda |lambda^k c(lambda)| over both
    /// branches.  The contraction and tail analysis track this for k = n
    /// and k = n + 2 separately.
    pub fn weighted_sup(&self, k: u32) -> f64 {
        match &self.family {
            ReflectionFamily::None => 0.0,
            ReflectionFamily::Gaussian { amplitude, width } => {
                // Scan xi >= 0 until the Gaussian factor is negligible.
                let xi_max = width * 40.0 + 5.0;
                let steps = 20_000;
                let mut sup: f64 = 0.0;
                for i in 0..=steps {
                    let xi = xi_max * i as f64 / steps as f64;
                    let lambda = (xi * xi + 0.5).sqrt();
                    let v = amplitude.abs() * (-(xi / width) * (xi / width)).exp();
                    sup = sup.max(lambda.powi(k as i32) * v);
                }
                sup
            }
            ReflectionFamily::Table { lambdas, values } => {
                // Piecewise linear: the max of |lambda^k c| over a segment is
                // well approximated by sampling nodes and midpoints.
                let mut sup: f64 = 0.0;
                for i in 0..lambdas.len() {
                    sup = sup.max(lambdas[i].abs().powi(k as i32) * values[i].abs());
                    if i + 1 < lambdas.len() {
                        let lm = 0.5 * (lambdas[i] + lambdas[i + 1]);
                        let vm = 0.5 * (values[i] + values[i + 1]);
                        sup = sup.max(lm.abs().powi(k as i32) * vm.abs());
                    }
                }
                sup
            }
        }
    }
}
