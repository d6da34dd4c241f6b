//! Mass, stiffness, divergence and convection operators and load vectors.
//!
//! Velocity operators are block diagonal with two identical scalar blocks,
//! so the scalar blocks are assembled once and expanded. Every operator is
//! accumulated into a sparsity pattern computed when the assembler is built.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{FeSpace, QuadratureRule, SpaceKind, Tabulation, MAX_LOCAL_DOFS};
use crate::mesh::{CellGeometry, Mesh};
use crate::sparse::CsrMatrix;

/// Degree of the rule used for loads and error norms.
pub const FINE_DEGREE: usize = 8;

/// Inf-sup stable velocity/pressure pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElementPair {
    /// Quadratic velocity, piecewise constant pressure.
    P2P0,
    /// Linear-plus-bubble velocity, linear pressure.
    Mini,
}

impl ElementPair {
    pub fn velocity_kind(self) -> SpaceKind {
        match self {
            ElementPair::P2P0 => SpaceKind::VelocityP2,
            ElementPair::Mini => SpaceKind::VelocityMini,
        }
    }

    pub fn pressure_kind(self) -> SpaceKind {
        match self {
            ElementPair::P2P0 => SpaceKind::PressureP0,
            ElementPair::Mini => SpaceKind::PressureP1,
        }
    }

    /// Rule degree integrating mass, stiffness and convection exactly.
    pub fn assembly_degree(self) -> usize {
        match self {
            ElementPair::P2P0 => 5,
            ElementPair::Mini => 8,
        }
    }

    fn from_kinds(velocity: SpaceKind, pressure: SpaceKind) -> Result<Self> {
        match (velocity, pressure) {
            (SpaceKind::VelocityP2, SpaceKind::PressureP0) => Ok(ElementPair::P2P0),
            (SpaceKind::VelocityMini, SpaceKind::PressureP1) => Ok(ElementPair::Mini),
            (v, p) => Err(Error::InvalidArgument(format!(
                "incompatible velocity/pressure pair {v:?}/{p:?}"
            ))),
        }
    }
}

impl FromStr for ElementPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p2p0" | "p2-p0" => Ok(ElementPair::P2P0),
            "mini" => Ok(ElementPair::Mini),
            other => Err(Error::InvalidArgument(format!("unknown element pair '{other}'"))),
        }
    }
}

impl fmt::Display for ElementPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementPair::P2P0 => "p2p0",
            ElementPair::Mini => "mini",
        })
    }
}

/// Time-independent operators of the scheme.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    /// Pressure rows, velocity columns: `(div phi_j, chi_i)`.
    pub divergence: CsrMatrix,
}

#[derive(Clone, Debug)]
pub struct Assembler {
    pair: ElementPair,
    velocity: FeSpace,
    pressure: FeSpace,
    geometries: Vec<CellGeometry>,
    tab_v: Tabulation,
    tab_p: Tabulation,
    fine_v: Tabulation,
    fine_p: Tabulation,
    scalar_pattern: CsrMatrix,
    /// `cell * L * L + a * L + b` -> storage index of `(dof_a, dof_b)`.
    scalar_scatter: Vec<usize>,
    pressure_pattern: CsrMatrix,
    pressure_scatter: Vec<usize>,
    div_pattern: CsrMatrix,
    /// `((cell * Lp + i) * 2 + c) * L + a` -> storage index.
    div_scatter: Vec<usize>,
}

fn cell_pattern(space: &FeSpace, ncols: usize) -> Result<(CsrMatrix, Vec<usize>)> {
    let n = space.scalar_dofs();
    let l = space.local_dofs();
    let cells = space.mesh().num_cells();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for c in 0..cells {
        let dofs = space.cell_dofs(c);
        for &a in dofs {
            rows[a].extend_from_slice(dofs);
        }
    }
    for row in &mut rows {
        row.sort_unstable();
        row.dedup();
    }
    let pattern = CsrMatrix::from_row_patterns(ncols, &rows)?;
    let mut scatter = Vec::with_capacity(cells * l * l);
    for c in 0..cells {
        let dofs = space.cell_dofs(c);
        for &a in dofs {
            for &b in dofs {
                scatter.push(pattern.position(a, b).expect("pattern covers cell couplings"));
            }
        }
    }
    Ok((pattern, scatter))
}

impl Assembler {
    pub fn new(mesh: Arc<Mesh>, pair: ElementPair) -> Result<Self> {
        let velocity = FeSpace::new(mesh.clone(), pair.velocity_kind());
        let pressure = FeSpace::new(mesh, pair.pressure_kind());
        Self::from_spaces(velocity, pressure, pair.assembly_degree())
    }

    /// Rejects pairs other than P2-P0 and MINI, and spaces on different meshes.
    pub fn from_spaces(velocity: FeSpace, pressure: FeSpace, degree: usize) -> Result<Self> {
        let pair = ElementPair::from_kinds(velocity.kind(), pressure.kind())?;
        if !Arc::ptr_eq(velocity.mesh(), pressure.mesh()) {
            return Err(Error::InvalidArgument("velocity and pressure live on different meshes".into()));
        }
        let mesh = velocity.mesh().clone();
        let geometries = (0..mesh.num_cells())
            .map(|c| mesh.cell_geometry(c))
            .collect::<Result<Vec<_>>>()?;
        let rule = QuadratureRule::new(degree)?;
        let fine = QuadratureRule::new(FINE_DEGREE)?;
        let tab_v = Tabulation::new(velocity.element(), rule.clone());
        let tab_p = Tabulation::new(pressure.element(), rule);
        let fine_v = Tabulation::new(velocity.element(), fine.clone());
        let fine_p = Tabulation::new(pressure.element(), fine);

        let ns = velocity.scalar_dofs();
        let (scalar_pattern, scalar_scatter) = cell_pattern(&velocity, ns)?;
        let (pressure_pattern, pressure_scatter) = cell_pattern(&pressure, pressure.scalar_dofs())?;

        let np = pressure.num_dofs();
        let lv = velocity.local_dofs();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); np];
        for c in 0..mesh.num_cells() {
            let vd = velocity.cell_dofs(c);
            for &i in pressure.cell_dofs(c) {
                for comp in 0..2 {
                    rows[i].extend(vd.iter().map(|&a| comp * ns + a));
                }
            }
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
        }
        let div_pattern = CsrMatrix::from_row_patterns(2 * ns, &rows)?;
        let mut div_scatter = Vec::with_capacity(mesh.num_cells() * pressure.local_dofs() * 2 * lv);
        for c in 0..mesh.num_cells() {
            let vd = velocity.cell_dofs(c);
            for &i in pressure.cell_dofs(c) {
                for comp in 0..2 {
                    for &a in vd {
                        div_scatter.push(div_pattern.position(i, comp * ns + a).expect("pattern covers cell"));
                    }
                }
            }
        }

        Ok(Self {
            pair,
            velocity,
            pressure,
            geometries,
            tab_v,
            tab_p,
            fine_v,
            fine_p,
            scalar_pattern,
            scalar_scatter,
            pressure_pattern,
            pressure_scatter,
            div_pattern,
            div_scatter,
        })
    }

    pub fn pair(&self) -> ElementPair {
        self.pair
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.velocity.mesh()
    }

    pub fn velocity(&self) -> &FeSpace {
        &self.velocity
    }

    pub fn pressure(&self) -> &FeSpace {
        &self.pressure
    }

    pub fn geometries(&self) -> &[CellGeometry] {
        &self.geometries
    }

    /// Velocity basis on the fine rule.
    pub fn fine_velocity(&self) -> &Tabulation {
        &self.fine_v
    }

    /// Pressure basis on the fine rule.
    pub fn fine_pressure(&self) -> &Tabulation {
        &self.fine_p
    }

    /// Physical basis gradients of `tab` at point `q` of cell `geo`.
    #[inline]
    fn gradients(tab: &Tabulation, geo: &CellGeometry, q: usize, out: &mut [[f64; 2]; MAX_LOCAL_DOFS]) {
        for (o, &g) in out.iter_mut().zip(tab.ref_grads(q)) {
            *o = geo.push_gradient(g);
        }
    }

    fn assemble_scalar(&self, mut kernel: impl FnMut(usize, usize, &[f64], &[[f64; 2]], f64, &mut [f64])) -> CsrMatrix {
        let mut out = self.scalar_pattern.zeros_like();
        let l = self.velocity.local_dofs();
        let mut local = vec![0.0; l * l];
        let mut grads = [[0.0; 2]; MAX_LOCAL_DOFS];
        for (c, geo) in self.geometries.iter().enumerate() {
            local.fill(0.0);
            for q in 0..self.tab_v.num_points() {
                Self::gradients(&self.tab_v, geo, q, &mut grads);
                let w = self.tab_v.rule.weights[q] * geo.det.abs();
                kernel(c, q, self.tab_v.values(q), &grads[..l], w, &mut local);
            }
            let values = out.values_mut();
            for (&pos, &v) in self.scalar_scatter[c * l * l..(c + 1) * l * l].iter().zip(&local) {
                values[pos] += v;
            }
        }
        out
    }

    /// Scalar block `(psi_j, psi_i)`.
    pub fn scalar_mass(&self) -> CsrMatrix {
        let l = self.velocity.local_dofs();
        self.assemble_scalar(|_, _, phi, _, w, local| {
            for a in 0..l {
                for b in 0..l {
                    local[a * l + b] += w * phi[a] * phi[b];
                }
            }
        })
    }

    /// Scalar block `(grad psi_j, grad psi_i)`.
    pub fn scalar_stiffness(&self) -> CsrMatrix {
        let l = self.velocity.local_dofs();
        self.assemble_scalar(|_, _, _, g, w, local| {
            for a in 0..l {
                for b in 0..l {
                    local[a * l + b] += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
        })
    }

    /// Scalar block of `N(w)`: row `i`, column `j` holds
    /// `1/2 (w . grad psi_j, psi_i) - 1/2 (w . grad psi_i, psi_j)`.
    pub fn scalar_convection(&self, w: &[f64]) -> Result<CsrMatrix> {
        let ns = self.velocity.scalar_dofs();
        if w.len() != 2 * ns {
            return Err(Error::DimensionMismatch {
                expected: 2 * ns,
                found: w.len(),
            });
        }
        let l = self.velocity.local_dofs();
        Ok(self.assemble_scalar(|c, _, phi, g, wt, local| {
            let dofs = self.velocity.cell_dofs(c);
            let mut wq = [0.0; 2];
            for (a, &d) in dofs.iter().enumerate() {
                wq[0] += w[d] * phi[a];
                wq[1] += w[ns + d] * phi[a];
            }
            let mut adv = [0.0; MAX_LOCAL_DOFS];
            for a in 0..l {
                adv[a] = wq[0] * g[a][0] + wq[1] * g[a][1];
            }
            for i in 0..l {
                for j in 0..l {
                    local[i * l + j] += 0.5 * wt * (adv[j] * phi[i] - adv[i] * phi[j]);
                }
            }
        }))
    }

    pub fn mass(&self) -> CsrMatrix {
        self.scalar_mass().block_diagonal2()
    }

    pub fn stiffness(&self) -> CsrMatrix {
        self.scalar_stiffness().block_diagonal2()
    }

    /// `N(w)` with entries `b(w, phi_j, phi_i)`.
    pub fn convection(&self, w: &[f64]) -> Result<CsrMatrix> {
        Ok(self.scalar_convection(w)?.block_diagonal2())
    }

    /// Velocity-block sparsity pattern shared by every operator above.
    pub fn velocity_pattern(&self) -> CsrMatrix {
        self.scalar_pattern.block_diagonal2()
    }

    /// `(div phi_j, chi_i)`.
    pub fn divergence(&self) -> CsrMatrix {
        let mut out = self.div_pattern.zeros_like();
        let lv = self.velocity.local_dofs();
        let lp = self.pressure.local_dofs();
        let mut grads = [[0.0; 2]; MAX_LOCAL_DOFS];
        let mut local = vec![0.0; lp * 2 * lv];
        for (c, geo) in self.geometries.iter().enumerate() {
            local.fill(0.0);
            for q in 0..self.tab_v.num_points() {
                Self::gradients(&self.tab_v, geo, q, &mut grads);
                let w = self.tab_v.rule.weights[q] * geo.det.abs();
                let chi = self.tab_p.values(q);
                for i in 0..lp {
                    for comp in 0..2 {
                        for a in 0..lv {
                            local[(i * 2 + comp) * lv + a] += w * chi[i] * grads[a][comp];
                        }
                    }
                }
            }
            let span = lp * 2 * lv;
            let values = out.values_mut();
            for (&pos, &v) in self.div_scatter[c * span..(c + 1) * span].iter().zip(&local) {
                values[pos] += v;
            }
        }
        out
    }

    /// Pressure mass matrix `(chi_j, chi_i)`.
    pub fn pressure_mass(&self) -> CsrMatrix {
        let mut out = self.pressure_pattern.zeros_like();
        let l = self.pressure.local_dofs();
        let mut local = vec![0.0; l * l];
        for (c, geo) in self.geometries.iter().enumerate() {
            local.fill(0.0);
            for q in 0..self.fine_p.num_points() {
                let w = self.fine_p.rule.weights[q] * geo.det.abs();
                let chi = self.fine_p.values(q);
                for a in 0..l {
                    for b in 0..l {
                        local[a * l + b] += w * chi[a] * chi[b];
                    }
                }
            }
            let values = out.values_mut();
            for (&pos, &v) in self.pressure_scatter[c * l * l..(c + 1) * l * l].iter().zip(&local) {
                values[pos] += v;
            }
        }
        out
    }

    /// `(chi_i, 1)`: cell areas for P0, lumped mass for P1.
    pub fn pressure_mean_weights(&self) -> Vec<f64> {
        let m = self.pressure_mass();
        (0..m.nrows()).map(|r| m.row(r).1.iter().sum()).collect()
    }

    pub fn operators(&self) -> OperatorSet {
        OperatorSet {
            mass: self.mass(),
            stiffness: self.stiffness(),
            divergence: self.divergence(),
        }
    }

    /// `(f, phi_i)` on the fine rule.
    pub fn load(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let ns = self.velocity.scalar_dofs();
        let mut out = vec![0.0; 2 * ns];
        for (c, geo) in self.geometries.iter().enumerate() {
            let dofs = self.velocity.cell_dofs(c);
            for q in 0..self.fine_v.num_points() {
                let x = geo.map(self.fine_v.rule.reference_point(q));
                let fx = f(x);
                let w = self.fine_v.rule.weights[q] * geo.det.abs();
                for (&d, &phi) in dofs.iter().zip(self.fine_v.values(q)) {
                    out[d] += w * fx[0] * phi;
                    out[ns + d] += w * fx[1] * phi;
                }
            }
        }
        out
    }
}
