//! Exact solutions and synthesised forcing for the two benchmark problems.
//!
//! Both velocities come from a separable stream function
//! `psi = c g(t) A(x) A(y)`, so `u = g(t) U(x, y)` with
//! `U = (c A(x) A'(y), -c A'(x) A(y))`, which is divergence free and vanishes
//! on the boundary of the unit square. The pressure is `p = g(t) 2 (x - y)`.
//!
//! * Example 1: `A = x^2 (x - 1)^2`, `c = 1`, `g = e^t` (smooth data).
//! * Example 2: `A = x^{5/2} (x - 1)^2`, `c = 10`, `g = cos t` (nonsmooth
//!   data: `Delta u` behaves like `x^{-1/2}` near `x = 0`).

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::memory::{convolution_profile, ModelParams, TimeProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseId {
    Example1,
    Example2,
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "example1" => Ok(CaseId::Example1),
            "2" | "example2" => Ok(CaseId::Example2),
            other => Err(Error::InvalidArgument(format!("unknown example '{other}'"))),
        }
    }
}

/// `sum c_i x^{p_i}` with derivatives up to third order.
#[derive(Clone, Copy, Debug)]
struct PowerSum(&'static [(f64, f64)]);

impl PowerSum {
    fn derivatives(&self, x: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        for &(coef, power) in self.0 {
            let mut c = coef;
            for (m, slot) in out.iter_mut().enumerate() {
                let p = power - m as f64;
                if c == 0.0 {
                    break;
                }
                let xp = if p.fract() == 0.0 && p >= 0.0 { x.powi(p as i32) } else { x.powf(p) };
                *slot += c * xp;
                c *= p;
            }
        }
        out
    }
}

const FACTOR_SMOOTH: PowerSum = PowerSum(&[(1.0, 4.0), (-2.0, 3.0), (1.0, 2.0)]);
const FACTOR_ROUGH: PowerSum = PowerSum(&[(1.0, 4.5), (-2.0, 3.5), (1.0, 2.5)]);

/// Pointwise exact data. `grad_u[i][j] = d u_i / d x_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactValues {
    pub u: [f64; 2],
    pub grad_u: [[f64; 2]; 2],
    pub lap_u: [f64; 2],
    pub p: f64,
    pub grad_p: [f64; 2],
}

#[derive(Clone, Copy, Debug)]
pub struct ManufacturedCase {
    id: CaseId,
    profile: TimeProfile,
    amplitude: f64,
    factor: PowerSum,
}

/// Time-independent spatial part `(U, grad U, Delta U, P, grad P)`.
struct Spatial {
    u: [f64; 2],
    grad_u: [[f64; 2]; 2],
    lap_u: [f64; 2],
    p: f64,
    grad_p: [f64; 2],
}

impl ManufacturedCase {
    pub fn new(id: CaseId) -> Self {
        match id {
            CaseId::Example1 => Self {
                id,
                profile: TimeProfile::Exp,
                amplitude: 1.0,
                factor: FACTOR_SMOOTH,
            },
            CaseId::Example2 => Self {
                id,
                profile: TimeProfile::Cos,
                amplitude: 10.0,
                factor: FACTOR_ROUGH,
            },
        }
    }

    pub fn id(&self) -> CaseId {
        self.id
    }

    pub fn profile(&self) -> TimeProfile {
        self.profile
    }

    fn spatial(&self, x: f64, y: f64) -> Spatial {
        let c = self.amplitude;
        let [ax, ax1, ax2, ax3] = self.factor.derivatives(x);
        let [ay, ay1, ay2, ay3] = self.factor.derivatives(y);
        Spatial {
            u: [c * ax * ay1, -c * ax1 * ay],
            grad_u: [[c * ax1 * ay1, c * ax * ay2], [-c * ax2 * ay, -c * ax1 * ay1]],
            lap_u: [c * (ax2 * ay1 + ax * ay3), -c * (ax3 * ay + ax1 * ay2)],
            p: 2.0 * (x - y),
            grad_p: [2.0, -2.0],
        }
    }

    pub fn eval_exact(&self, x: f64, y: f64, t: f64) -> ExactValues {
        let g = self.profile.value(t);
        let s = self.spatial(x, y);
        let scale2 = |m: [[f64; 2]; 2]| [[g * m[0][0], g * m[0][1]], [g * m[1][0], g * m[1][1]]];
        ExactValues {
            u: [g * s.u[0], g * s.u[1]],
            grad_u: scale2(s.grad_u),
            lap_u: [g * s.lap_u[0], g * s.lap_u[1]],
            p: g * s.p,
            grad_p: [g * s.grad_p[0], g * s.grad_p[1]],
        }
    }

    pub fn velocity(&self, p: [f64; 2], t: f64) -> [f64; 2] {
        let g = self.profile.value(t);
        let [ax, ax1, ..] = self.factor.derivatives(p[0]);
        let [ay, ay1, ..] = self.factor.derivatives(p[1]);
        let c = self.amplitude * g;
        [c * ax * ay1, -c * ax1 * ay]
    }

    pub fn pressure(&self, p: [f64; 2], t: f64) -> f64 {
        self.profile.value(t) * 2.0 * (p[0] - p[1])
    }

    pub fn initial_velocity(&self, p: [f64; 2]) -> [f64; 2] {
        self.velocity(p, 0.0)
    }

    /// `f = u_t + u . grad u - mu Delta u - int_0^t beta(t - s) Delta u(s) ds + grad p`
    /// with the memory integral in closed form.
    pub fn forcing(&self, params: &ModelParams, x: f64, y: f64, t: f64) -> [f64; 2] {
        let g = self.profile.value(t);
        let dg = self.profile.derivative(t);
        let memory = convolution_profile(self.profile, params.gamma, params.delta, t.max(0.0))
            .expect("time clamped to be non-negative");
        let s = self.spatial(x, y);
        let mut f = [0.0; 2];
        for (i, fi) in f.iter_mut().enumerate() {
            let advect = s.u[0] * s.grad_u[i][0] + s.u[1] * s.grad_u[i][1];
            *fi = dg * s.u[i] + g * g * advect - (params.mu * g + memory) * s.lap_u[i] + g * s.grad_p[i];
        }
        f
    }
}
