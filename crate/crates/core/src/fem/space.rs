//! Degree-of-freedom layout for the velocity and pressure spaces.
//!
//! Scalar dofs are numbered vertices first, then edges (P2) or cells (MINI
//! bubbles). Vector spaces stack components: global dof = `c * scalar + s`.

use std::sync::Arc;

use super::element::ElementKind;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    VelocityP2,
    VelocityMini,
    PressureP0,
    PressureP1,
}

impl SpaceKind {
    pub fn element(self) -> ElementKind {
        match self {
            SpaceKind::VelocityP2 => ElementKind::P2,
            SpaceKind::VelocityMini => ElementKind::P1Bubble,
            SpaceKind::PressureP0 => ElementKind::P0,
            SpaceKind::PressureP1 => ElementKind::P1,
        }
    }

    pub fn components(self) -> usize {
        match self {
            SpaceKind::VelocityP2 | SpaceKind::VelocityMini => 2,
            SpaceKind::PressureP0 | SpaceKind::PressureP1 => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FeSpace {
    kind: SpaceKind,
    mesh: Arc<Mesh>,
    scalar_dofs: usize,
    local: usize,
    cell_dofs: Vec<usize>,
    nodes: Vec<[f64; 2]>,
    nodal: Vec<bool>,
    boundary: Vec<usize>,
    boundary_mask: Vec<bool>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, kind: SpaceKind) -> Self {
        let element = kind.element();
        let local = element.dofs_per_cell();
        let nv = mesh.num_vertices();
        let mut cell_dofs = Vec::with_capacity(mesh.num_cells() * local);
        let mut nodes = Vec::new();
        let mut nodal = Vec::new();
        let mut scalar_boundary = Vec::new();

        match kind {
            SpaceKind::PressureP0 => {
                for c in 0..mesh.num_cells() {
                    cell_dofs.push(c);
                    nodes.push(mesh.centroid(c));
                    nodal.push(true);
                    scalar_boundary.push(false);
                }
            }
            SpaceKind::PressureP1 | SpaceKind::VelocityP2 | SpaceKind::VelocityMini => {
                nodes.extend_from_slice(mesh.vertices());
                nodal.extend(std::iter::repeat_n(true, nv));
                scalar_boundary.extend_from_slice(mesh.boundary_vertex_flags());
                for (c, tri) in mesh.cells().iter().enumerate() {
                    cell_dofs.extend_from_slice(tri);
                    match kind {
                        SpaceKind::VelocityP2 => {
                            cell_dofs.extend(mesh.cell_edges()[c].iter().map(|&e| nv + e))
                        }
                        SpaceKind::VelocityMini => cell_dofs.push(nv + c),
                        _ => {}
                    }
                }
                match kind {
                    SpaceKind::VelocityP2 => {
                        for e in 0..mesh.num_edges() {
                            nodes.push(mesh.edge_midpoint(e));
                            nodal.push(true);
                        }
                        scalar_boundary.extend_from_slice(mesh.boundary_edge_flags());
                    }
                    SpaceKind::VelocityMini => {
                        for c in 0..mesh.num_cells() {
                            nodes.push(mesh.centroid(c));
                            nodal.push(false);
                            scalar_boundary.push(false);
                        }
                    }
                    _ => {}
                }
            }
        }

        let scalar_dofs = nodes.len();
        let components = kind.components();
        let mut boundary = Vec::new();
        let mut boundary_mask = vec![false; scalar_dofs * components];
        if components == 2 {
            for c in 0..components {
                for (s, &b) in scalar_boundary.iter().enumerate() {
                    if b {
                        boundary.push(c * scalar_dofs + s);
                        boundary_mask[c * scalar_dofs + s] = true;
                    }
                }
            }
        }

        Self {
            kind,
            mesh,
            scalar_dofs,
            local,
            cell_dofs,
            nodes,
            nodal,
            boundary,
            boundary_mask,
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn element(&self) -> ElementKind {
        self.kind.element()
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn components(&self) -> usize {
        self.kind.components()
    }

    pub fn scalar_dofs(&self) -> usize {
        self.scalar_dofs
    }

    /// Total number of dofs, all components included.
    pub fn num_dofs(&self) -> usize {
        self.scalar_dofs * self.components()
    }

    pub fn local_dofs(&self) -> usize {
        self.local
    }

    /// Scalar dof indices of a cell in local order.
    #[inline]
    pub fn cell_dofs(&self, cell: usize) -> &[usize] {
        &self.cell_dofs[cell * self.local..(cell + 1) * self.local]
    }

    /// Nodal point of each scalar dof (bubble dofs report the centroid).
    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    /// Sorted global indices of Dirichlet dofs (velocity spaces only).
    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.boundary_mask[dof]
    }

    pub fn interpolate_scalar(&self, f: impl Fn([f64; 2]) -> f64) -> Result<Vec<f64>> {
        if self.components() != 1 {
            return Err(Error::InvalidArgument(
                "scalar interpolation into a vector space".into(),
            ));
        }
        Ok(self
            .nodes
            .iter()
            .zip(&self.nodal)
            .map(|(&p, &nodal)| if nodal { f(p) } else { 0.0 })
            .collect())
    }

    pub fn interpolate_vector(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Result<Vec<f64>> {
        if self.components() != 2 {
            return Err(Error::InvalidArgument(
                "vector interpolation into a scalar space".into(),
            ));
        }
        let n = self.scalar_dofs;
        let mut out = vec![0.0; 2 * n];
        for (s, (&p, &nodal)) in self.nodes.iter().zip(&self.nodal).enumerate() {
            if nodal {
                let v = f(p);
                out[s] = v[0];
                out[n + s] = v[1];
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize, kind: SpaceKind) -> FeSpace {
        FeSpace::new(Arc::new(Mesh::unit_square(n).unwrap()), kind)
    }

    #[test]
    fn dof_counts() {
        for n in [1, 2, 4, 7] {
            let m = Mesh::unit_square(n).unwrap();
            let (v, e, f) = (m.num_vertices(), m.num_edges(), m.num_cells());
            assert_eq!(space(n, SpaceKind::VelocityP2).num_dofs(), 2 * (v + e));
            assert_eq!(space(n, SpaceKind::VelocityMini).num_dofs(), 2 * (v + f));
            assert_eq!(space(n, SpaceKind::PressureP0).num_dofs(), f);
            assert_eq!(space(n, SpaceKind::PressureP1).num_dofs(), v);
        }
        assert_eq!(space(4, SpaceKind::VelocityP2).num_dofs(), 162);
        assert_eq!(space(4, SpaceKind::VelocityMini).num_dofs(), 114);
        assert_eq!(space(4, SpaceKind::PressureP0).num_dofs(), 32);
    }

    #[test]
    fn every_dof_referenced_by_a_cell() {
        for kind in [
            SpaceKind::VelocityP2,
            SpaceKind::VelocityMini,
            SpaceKind::PressureP0,
            SpaceKind::PressureP1,
        ] {
            let s = space(3, kind);
            let mut seen = vec![false; s.scalar_dofs()];
            for c in 0..s.mesh().num_cells() {
                for &d in s.cell_dofs(c) {
                    seen[d] = true;
                }
            }
            assert!(seen.iter().all(|&b| b), "{kind:?}");
        }
    }

    #[test]
    fn boundary_dofs_lie_on_boundary() {
        let on_boundary = |p: [f64; 2]| {
            p[0] < 1e-14 || p[1] < 1e-14 || p[0] > 1.0 - 1e-14 || p[1] > 1.0 - 1e-14
        };
        for kind in [SpaceKind::VelocityP2, SpaceKind::VelocityMini] {
            let s = space(4, kind);
            let n = s.scalar_dofs();
            let expect: Vec<usize> = (0..2)
                .flat_map(|c| {
                    let s = &s;
                    (0..n).filter_map(move |d| {
                        let bubble = kind == SpaceKind::VelocityMini && d >= s.mesh().num_vertices();
                        (!bubble && on_boundary(s.nodes()[d])).then_some(c * n + d)
                    })
                })
                .collect();
            assert_eq!(s.boundary_dofs(), expect.as_slice());
        }
        // 16 boundary vertices + 16 boundary edges per component at n = 4
        assert_eq!(space(4, SpaceKind::VelocityP2).boundary_dofs().len(), 64);
        assert_eq!(space(4, SpaceKind::VelocityMini).boundary_dofs().len(), 32);
        assert!(space(4, SpaceKind::PressureP0).boundary_dofs().is_empty());
    }

    #[test]
    fn interpolation_examples() {
        let s = space(3, SpaceKind::VelocityP2);
        let ones = s.interpolate_vector(|_| [1.0, 1.0]).unwrap();
        assert!(ones.iter().all(|&v| v == 1.0));

        let p1 = space(1, SpaceKind::PressureP1);
        let xs = p1.interpolate_scalar(|p| p[0]).unwrap();
        let expect: Vec<f64> = p1.mesh().vertices().iter().map(|v| v[0]).collect();
        assert_eq!(xs, expect);

        let mini = space(2, SpaceKind::VelocityMini);
        let u = mini.interpolate_vector(|p| [p[0], p[1]]).unwrap();
        let nv = mini.mesh().num_vertices();
        for c in 0..mini.mesh().num_cells() {
            assert_eq!(u[nv + c], 0.0);
        }

        let p0 = space(2, SpaceKind::PressureP0);
        let vals = p0.interpolate_scalar(|p| p[0] + 2.0 * p[1]).unwrap();
        for (c, v) in vals.iter().enumerate() {
            let g = p0.mesh().centroid(c);
            assert_eq!(*v, g[0] + 2.0 * g[1]);
        }
        assert!(p0.interpolate_vector(|_| [0.0, 0.0]).is_err());
        assert!(s.interpolate_scalar(|_| 0.0).is_err());
    }
}
