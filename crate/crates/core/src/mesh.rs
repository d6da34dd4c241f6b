//! Structured conforming triangulations of the unit square.
//!
//! Vertices are numbered lexicographically by grid position `(j, i)`, i.e.
//! `v = j * (n + 1) + i`. Every grid square is split along its south-west to
//! north-east diagonal; the lower triangle of a square precedes the upper one.
//! Local edge `e` of a cell is the edge opposite local vertex `e`.

use std::collections::HashMap;
use std::io::{self, Write};

use crate::error::{Error, Result};

/// Affine map from the reference triangle `{(0,0), (1,0), (0,1)}` onto a cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellGeometry {
    /// Columns are `x1 - x0` and `x2 - x0`.
    pub jacobian: [[f64; 2]; 2],
    /// Image of the reference origin.
    pub origin: [f64; 2],
    pub det: f64,
    pub area: f64,
    /// `J^{-T}`, maps reference gradients to physical gradients.
    pub inv_transpose: [[f64; 2]; 2],
}

impl CellGeometry {
    /// Physical coordinates of the reference point `xi`.
    #[inline]
    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        let j = &self.jacobian;
        [
            self.origin[0] + j[0][0] * xi[0] + j[0][1] * xi[1],
            self.origin[1] + j[1][0] * xi[0] + j[1][1] * xi[1],
        ]
    }

    /// Physical gradient from a reference gradient.
    #[inline]
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let k = &self.inv_transpose;
        [k[0][0] * g[0] + k[0][1] * g[1], k[1][0] * g[0] + k[1][1] * g[1]]
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    subdivisions: usize,
    vertices: Vec<[f64; 2]>,
    cells: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    cell_edges: Vec<[usize; 3]>,
    edge_cells: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
    boundary_edge: Vec<bool>,
    h: f64,
}

impl Mesh {
    /// Uniform `n x n` triangulation of `[0,1]^2` with `2n^2` triangles.
    pub fn unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "mesh needs at least one subdivision per side".into(),
            ));
        }
        let stride = n + 1;
        let vid = |i: usize, j: usize| j * stride + i;
        let inv_n = 1.0 / n as f64;

        let mut vertices = Vec::with_capacity(stride * stride);
        let mut boundary_vertex = Vec::with_capacity(stride * stride);
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 * inv_n, j as f64 * inv_n]);
                boundary_vertex.push(i == 0 || j == 0 || i == n || j == n);
            }
        }

        let mut cells = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let sw = vid(i, j);
                let se = vid(i + 1, j);
                let ne = vid(i + 1, j + 1);
                let nw = vid(i, j + 1);
                cells.push([sw, se, ne]);
                cells.push([sw, ne, nw]);
            }
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_cells: Vec<Vec<usize>> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, tri) in cells.iter().enumerate() {
            let mut local = [0usize; 3];
            for (e, slot) in local.iter_mut().enumerate() {
                let a = tri[(e + 1) % 3];
                let b = tri[(e + 2) % 3];
                let key = (a.min(b), a.max(b));
                let id = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_cells.push(Vec::with_capacity(2));
                    edges.len() - 1
                });
                edge_cells[id].push(c);
                *slot = id;
            }
            cell_edges.push(local);
        }
        let boundary_edge = edge_cells.iter().map(|cs| cs.len() == 1).collect();

        Ok(Self {
            subdivisions: n,
            vertices,
            cells,
            edges,
            cell_edges,
            edge_cells,
            boundary_vertex,
            boundary_edge,
            h: std::f64::consts::SQRT_2 * inv_n,
        })
    }

    pub fn subdivisions(&self) -> usize {
        self.subdivisions
    }

    /// Grid spacing `1/n`, the resolution label used by the convergence tables.
    pub fn grid_spacing(&self) -> f64 {
        1.0 / self.subdivisions as f64
    }

    /// Mesh size: the longest edge length.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn cell_edges(&self) -> &[[usize; 3]] {
        &self.cell_edges
    }

    /// Cells incident to an edge (one for boundary edges, two otherwise).
    pub fn edge_cells(&self, edge: usize) -> &[usize] {
        &self.edge_cells[edge]
    }

    pub fn boundary_vertex_flags(&self) -> &[bool] {
        &self.boundary_vertex
    }

    pub fn boundary_edge_flags(&self) -> &[bool] {
        &self.boundary_edge
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_midpoint(&self, edge: usize) -> [f64; 2] {
        let [a, b] = self.edges[edge];
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }

    pub fn centroid(&self, cell: usize) -> [f64; 2] {
        let [a, b, c] = self.cells[cell];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0]
    }

    pub fn cell_geometry(&self, cell: usize) -> Result<CellGeometry> {
        let tri = self.cells.get(cell).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "cell index {cell} out of range (mesh has {} cells)",
                self.cells.len()
            ))
        })?;
        let p0 = self.vertices[tri[0]];
        let p1 = self.vertices[tri[1]];
        let p2 = self.vertices[tri[2]];
        let jacobian = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
        let inv_det = 1.0 / det;
        // J^{-T} = (1/det) [[d, -c], [-b, a]] for J = [[a, b], [c, d]]
        let inv_transpose = [
            [jacobian[1][1] * inv_det, -jacobian[1][0] * inv_det],
            [-jacobian[0][1] * inv_det, jacobian[0][0] * inv_det],
        ];
        Ok(CellGeometry {
            jacobian,
            origin: p0,
            det,
            area: 0.5 * det.abs(),
            inv_transpose,
        })
    }

    /// All cell geometries in cell order.
    pub fn geometries(&self) -> Vec<CellGeometry> {
        (0..self.num_cells())
            .map(|c| self.cell_geometry(c).expect("cell index in range"))
            .collect()
    }

    /// Plain-text dump: `v x y` per vertex, then `c i j k` per cell.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        for v in &self.vertices {
            writeln!(out, "v {} {}", v[0], v[1])?;
        }
        for c in &self.cells {
            writeln!(out, "c {} {} {}", c[0], c[1], c[2])?;
        }
        Ok(())
    }
}
