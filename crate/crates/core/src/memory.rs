//! Exponential memory kernel `beta(t) = gamma exp(-delta t)` and its
//! right-rectangle quadrature.
//!
//! The quadrature `q^n = k sum_{j=1}^n beta(t_n - t_j) U^j` obeys the exact
//! recursion `q^n = k gamma U^n + exp(-delta k) q^{n-1}` with `q^0 = 0`, so the
//! accumulator stores `q^n` itself and costs one vector per run.

use std::str::FromStr;

use crate::error::{Error, Result};

/// Viscosity `mu` and kernel parameters `gamma`, `delta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub mu: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl ModelParams {
    /// `mu` and `delta` must be positive. `gamma = 0` is accepted and switches
    /// the memory off (plain Navier-Stokes).
    pub fn new(mu: f64, gamma: f64, delta: f64) -> Result<Self> {
        let ok = mu > 0.0 && gamma >= 0.0 && delta > 0.0 && mu.is_finite() && gamma.is_finite() && delta.is_finite();
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "model parameters need mu > 0, gamma >= 0, delta > 0 (got mu={mu}, gamma={gamma}, delta={delta})"
            )));
        }
        Ok(Self { mu, gamma, delta })
    }

    /// Long-time effective viscosity `mu + gamma / delta`.
    pub fn nu(&self) -> f64 {
        self.mu + self.gamma / self.delta
    }

    pub fn kernel(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "memory kernel evaluated at negative time {t}"
            )));
        }
        Ok(self.gamma * (-self.delta * t).exp())
    }
}

/// Running value of the memory quadrature for a fixed time step.
#[derive(Clone, Debug)]
pub struct MemoryAccumulator {
    values: Vec<f64>,
    k: f64,
    gamma: f64,
    decay: f64,
    steps: usize,
}

impl MemoryAccumulator {
    pub fn new(len: usize, k: f64, params: &ModelParams) -> Self {
        Self {
            values: vec![0.0; len],
            k,
            gamma: params.gamma,
            decay: (-params.delta * k).exp(),
            steps: 0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `exp(-delta k)`, the weight carried by the previous accumulator.
    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `acc <- k gamma U^n + exp(-delta k) acc`.
    pub fn update(&mut self, current: &[f64]) -> Result<()> {
        if current.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                found: current.len(),
            });
        }
        let w = self.k * self.gamma;
        for (a, &u) in self.values.iter_mut().zip(current) {
            *a = w * u + self.decay * *a;
        }
        self.steps += 1;
        Ok(())
    }
}

/// Right-rectangle quadrature summed directly over a stored history
/// `history[j - 1] = U^j`, `j = 1..=n`. Reference path for the recursion.
pub fn direct_quadrature(history: &[Vec<f64>], k: f64, gamma: f64, delta: f64) -> Result<Vec<f64>> {
    let n = history.len();
    let len = history
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty history".into()))?
        .len();
    let mut out = vec![0.0; len];
    for (j, u) in history.iter().enumerate() {
        if u.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: u.len(),
            });
        }
        let w = k * gamma * (-delta * ((n - 1 - j) as f64) * k).exp();
        for (o, &v) in out.iter_mut().zip(u) {
            *o += w * v;
        }
    }
    Ok(out)
}

/// Time profiles `g` of the separable manufactured solutions `u = g(t) U(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeProfile {
    Exp,
    Cos,
}

impl TimeProfile {
    pub fn value(self, t: f64) -> f64 {
        match self {
            TimeProfile::Exp => t.exp(),
            TimeProfile::Cos => t.cos(),
        }
    }

    pub fn derivative(self, t: f64) -> f64 {
        match self {
            TimeProfile::Exp => t.exp(),
            TimeProfile::Cos => -t.sin(),
        }
    }
}

impl FromStr for TimeProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(TimeProfile::Exp),
            "cos" => Ok(TimeProfile::Cos),
            other => Err(Error::InvalidArgument(format!("unknown time profile '{other}'"))),
        }
    }
}

/// Closed form of `int_0^t gamma exp(-delta (t - s)) g(s) ds`.
pub fn convolution_profile(profile: TimeProfile, gamma: f64, delta: f64, t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "convolution evaluated at negative time {t}"
        )));
    }
    let fade = (-delta * t).exp();
    Ok(match profile {
        TimeProfile::Exp => gamma * (t.exp() - fade) / (1.0 + delta),
        TimeProfile::Cos => gamma * (delta * t.cos() + t.sin() - delta * fade) / (1.0 + delta * delta),
    })
}
