//! Backward Euler stepping with a Picard solve per step.
//!
//! Each step solves, for `m = 0, 1, ...` until the relative L2 increment drops
//! below `picard_tol`,
//!
//! ```text
//! [M/k + (mu + k gamma) A + N(U^m)] U^{m+1} - D^T P = M U^n / k + F^{n+1} - exp(-delta k) A Q^n
//!                                        -D U^{m+1} = 0
//! ```
//!
//! where `Q^n` is the memory accumulator. The pressure carries a zero mean
//! through the weighted mean constraint.

use std::io::{self, Write};

use crate::assembly::{Assembler, OperatorSet};
use crate::error::{Error, Result};
use crate::manufactured::ExactValues;
use crate::memory::{MemoryAccumulator, ModelParams};
use crate::sparse::{CsrMatrix, SaddleSystem, RESIDUAL_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveControls {
    /// Relative L2 increment at which Picard stops.
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Relative residual demanded of every linear solve.
    pub linear_tol: f64,
}

impl Default for SolveControls {
    fn default() -> Self {
        Self {
            picard_tol: 1e-10,
            picard_max: 50,
            linear_tol: RESIDUAL_TOLERANCE,
        }
    }
}

impl SolveControls {
    pub fn validate(&self) -> Result<()> {
        if !(self.picard_tol > 0.0 && self.linear_tol > 0.0) || self.picard_max == 0 {
            return Err(Error::InvalidArgument(format!(
                "solver controls need positive tolerances and picard_max >= 1 (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// Per-step stability monitors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorRecord {
    pub n: usize,
    pub t: f64,
    pub l2_norm: f64,
    pub h1_seminorm: f64,
    pub memory_h1_seminorm: f64,
    pub picard_iters: usize,
}

#[derive(Clone, Debug)]
pub struct StepperState {
    pub n: usize,
    pub t: f64,
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    pub memory: MemoryAccumulator,
    pub monitors: Vec<MonitorRecord>,
}

impl StepperState {
    /// `max_n |grad U^n|` over the recorded steps.
    pub fn max_gradient(&self) -> f64 {
        self.monitors.iter().fold(0.0, |m, r| m.max(r.h1_seminorm))
    }
}

/// Body force `f(x, t)`.
pub type Forcing<'a> = dyn Fn([f64; 2], f64) -> [f64; 2] + 'a;

pub struct Stepper {
    asm: Assembler,
    params: ModelParams,
    k: f64,
    controls: SolveControls,
    ops: OperatorSet,
    implicit: CsrMatrix,
    system: SaddleSystem,
    weights: Vec<f64>,
}

impl Stepper {
    pub fn new(asm: Assembler, params: ModelParams, k: f64, controls: SolveControls) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {k}")));
        }
        controls.validate()?;
        let ops = asm.operators();
        let implicit = CsrMatrix::add_scaled(&ops.mass, 1.0 / k, &ops.stiffness, params.mu + k * params.gamma)?;
        let weights = asm.pressure_mean_weights();
        let system = SaddleSystem::new(&implicit, &ops.divergence, asm.velocity().boundary_dofs(), Some(&weights))?;
        Ok(Self {
            asm,
            params,
            k,
            controls,
            ops,
            implicit,
            system,
            weights,
        })
    }

    pub fn assembler(&self) -> &Assembler {
        &self.asm
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn time_step(&self) -> f64 {
        self.k
    }

    pub fn controls(&self) -> &SolveControls {
        &self.controls
    }

    pub fn operators(&self) -> &OperatorSet {
        &self.ops
    }

    /// `(chi_i, 1)`, the weights of the pressure mean constraint.
    pub fn mean_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn l2_norm(&self, u: &[f64]) -> Result<f64> {
        Ok(self.ops.mass.bilinear(u, u)?.max(0.0).sqrt())
    }

    pub fn h1_seminorm(&self, u: &[f64]) -> Result<f64> {
        Ok(self.ops.stiffness.bilinear(u, u)?.max(0.0).sqrt())
    }

    fn state_from(&self, velocity: Vec<f64>) -> StepperState {
        StepperState {
            n: 0,
            t: 0.0,
            pressure: vec![0.0; self.asm.pressure().num_dofs()],
            memory: MemoryAccumulator::new(velocity.len(), self.k, &self.params),
            velocity,
            monitors: Vec::new(),
        }
    }

    pub fn zero_state(&self) -> StepperState {
        self.state_from(vec![0.0; self.asm.velocity().num_dofs()])
    }

    /// State at `t = 0` with the discretely divergence-free projection of `u0`.
    pub fn initial_state(&self, u0: impl Fn([f64; 2]) -> [f64; 2]) -> Result<StepperState> {
        let (velocity, _) = project_initial_velocity(&self.asm, u0)?;
        Ok(self.state_from(velocity))
    }

    /// Advances `state` from `t_n` to `t_{n+1}`.
    pub fn step(&mut self, state: &mut StepperState, f: &Forcing) -> Result<()> {
        let step = state.n + 1;
        self.try_step(state, f).map_err(|e| e.at_step(step))
    }

    fn try_step(&mut self, state: &mut StepperState, f: &Forcing) -> Result<()> {
        let t_next = (state.n + 1) as f64 * self.k;
        let mut momentum = self.asm.load(|x| f(x, t_next));
        let inertia = self.ops.mass.matvec(&state.velocity)?;
        let history = self.ops.stiffness.matvec(state.memory.values())?;
        let decay = state.memory.decay();
        for ((m, i), h) in momentum.iter_mut().zip(&inertia).zip(&history) {
            *m += i / self.k - decay * h;
        }
        let rhs = self.system.rhs(&momentum)?;

        let mut guess = state.velocity.clone();
        let mut pressure = Vec::new();
        let mut increment = f64::INFINITY;
        let mut iterations = 0;
        while iterations < self.controls.picard_max {
            iterations += 1;
            let convection = self.asm.convection(&guess)?;
            let block = CsrMatrix::add_scaled(&self.implicit, 1.0, &convection, 1.0)?;
            self.system.update_velocity_block(&block)?;
            let sol = self
                .system
                .factorize()?
                .solve_with_tolerance(&rhs, self.controls.linear_tol)?;
            let diff: Vec<f64> = sol.velocity.iter().zip(&guess).map(|(a, b)| a - b).collect();
            let change = self.l2_norm(&diff)?;
            let size = self.l2_norm(&sol.velocity)?;
            increment = if size > 0.0 { change / size } else { change };
            guess = sol.velocity;
            pressure = sol.pressure;
            if !increment.is_finite() {
                break;
            }
            if increment <= self.controls.picard_tol {
                break;
            }
        }
        if !(increment <= self.controls.picard_tol) {
            return Err(Error::PicardDivergence { iterations, increment });
        }

        state.memory.update(&guess)?;
        state.n += 1;
        state.t = t_next;
        state.velocity = guess;
        state.pressure = pressure;
        let record = MonitorRecord {
            n: state.n,
            t: state.t,
            l2_norm: self.l2_norm(&state.velocity)?,
            h1_seminorm: self.h1_seminorm(&state.velocity)?,
            memory_h1_seminorm: self.h1_seminorm(state.memory.values())?,
            picard_iters: iterations,
        };
        state.monitors.push(record);
        Ok(())
    }

    /// Takes `steps` steps, calling `observer` after each.
    pub fn run(
        &mut self,
        state: &mut StepperState,
        steps: usize,
        f: &Forcing,
        mut observer: impl FnMut(&StepperState),
    ) -> Result<()> {
        for _ in 0..steps {
            self.step(state, f)?;
            observer(state);
        }
        Ok(())
    }
}

/// Constrained L2 projection: `M U + (-D^T) l = (u0, phi)`, `D U = 0`.
/// Returns the velocity coefficients and the multiplier.
pub fn project_initial_velocity(asm: &Assembler, u0: impl Fn([f64; 2]) -> [f64; 2]) -> Result<(Vec<f64>, Vec<f64>)> {
    project_load(asm, &asm.load(u0))
}

/// Constrained L2 projection of the functional with coefficients `load`.
pub fn project_load(asm: &Assembler, load: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let ops = asm.operators();
    let weights = asm.pressure_mean_weights();
    let system = SaddleSystem::new(&ops.mass, &ops.divergence, asm.velocity().boundary_dofs(), Some(&weights))?;
    let sol = system.factorize()?.solve(&system.rhs(load)?)?;
    Ok((sol.velocity, sol.pressure))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms {
    pub velocity_l2: f64,
    /// Full H1 norm of the velocity error.
    pub velocity_h1: f64,
    /// L2 norm after removing the mean from both pressures.
    pub pressure_l2: f64,
}

/// Errors against `exact` on the fine rule.
pub fn error_norms(
    asm: &Assembler,
    velocity: &[f64],
    pressure: &[f64],
    exact: impl Fn([f64; 2]) -> ExactValues,
) -> Result<ErrorNorms> {
    let vs = asm.velocity();
    let ps = asm.pressure();
    if velocity.len() != vs.num_dofs() {
        return Err(Error::DimensionMismatch {
            expected: vs.num_dofs(),
            found: velocity.len(),
        });
    }
    if pressure.len() != ps.num_dofs() {
        return Err(Error::DimensionMismatch {
            expected: ps.num_dofs(),
            found: pressure.len(),
        });
    }
    let ns = vs.scalar_dofs();
    let tab_v = asm.fine_velocity();
    let tab_p = asm.fine_pressure();
    let (mut l2, mut grad, mut p_sq, mut p_sum, mut area) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (c, geo) in asm.geometries().iter().enumerate() {
        let vd = vs.cell_dofs(c);
        let pd = ps.cell_dofs(c);
        for q in 0..tab_v.num_points() {
            let x = geo.map(tab_v.rule.reference_point(q));
            let w = tab_v.rule.weights[q] * geo.det.abs();
            let e = exact(x);
            let mut uh = [0.0; 2];
            let mut gh = [[0.0; 2]; 2];
            for (a, (&d, &phi)) in vd.iter().zip(tab_v.values(q)).enumerate() {
                let g = geo.push_gradient(tab_v.ref_grads(q)[a]);
                for comp in 0..2 {
                    let coef = velocity[comp * ns + d];
                    uh[comp] += coef * phi;
                    gh[comp][0] += coef * g[0];
                    gh[comp][1] += coef * g[1];
                }
            }
            let ph: f64 = pd.iter().zip(tab_p.values(q)).map(|(&d, &chi)| pressure[d] * chi).sum();
            for comp in 0..2 {
                l2 += w * (uh[comp] - e.u[comp]).powi(2);
                grad += w * ((gh[comp][0] - e.grad_u[comp][0]).powi(2) + (gh[comp][1] - e.grad_u[comp][1]).powi(2));
            }
            let pe = ph - e.p;
            p_sq += w * pe * pe;
            p_sum += w * pe;
            area += w;
        }
    }
    Ok(ErrorNorms {
        velocity_l2: l2.sqrt(),
        velocity_h1: (l2 + grad).sqrt(),
        pressure_l2: (p_sq - p_sum * p_sum / area).max(0.0).sqrt(),
    })
}

pub const MONITOR_HEADER: &str = "n,t,l2_norm,h1_seminorm,memory_h1_seminorm,picard_iters";

pub fn write_monitor_csv<W: Write>(records: &[MonitorRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{MONITOR_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{:.10e},{:.10e},{:.10e},{:.10e},{}",
            r.n, r.t, r.l2_norm, r.h1_seminorm, r.memory_h1_seminorm, r.picard_iters
        )?;
    }
    Ok(())
}
