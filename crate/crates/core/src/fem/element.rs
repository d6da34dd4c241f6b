//! Reference-element shape functions in barycentric form.
//!
//! With reference coordinates `(x, y)`: `l0 = 1 - x - y`, `l1 = x`, `l2 = y`.
//! Local dof order is vertices first, then (P2) edge midpoints with local
//! edge `e` opposite vertex `e`, or (MINI) the cell bubble.

/// Maximum local dof count over all supported elements.
pub const MAX_LOCAL_DOFS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElementKind {
    P0,
    P1,
    P2,
    /// P1 enriched with the cubic bubble `27 l0 l1 l2`.
    P1Bubble,
}

const BARY_GRAD: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

#[inline]
fn barycentric(xi: [f64; 2]) -> [f64; 3] {
    [1.0 - xi[0] - xi[1], xi[0], xi[1]]
}

impl ElementKind {
    pub fn dofs_per_cell(self) -> usize {
        match self {
            ElementKind::P0 => 1,
            ElementKind::P1 => 3,
            ElementKind::P2 => 6,
            ElementKind::P1Bubble => 4,
        }
    }

    /// Polynomial degree of the highest basis function.
    pub fn degree(self) -> usize {
        match self {
            ElementKind::P0 => 0,
            ElementKind::P1 => 1,
            ElementKind::P2 => 2,
            ElementKind::P1Bubble => 3,
        }
    }

    /// Basis values at reference point `xi`, written to `out[..dofs_per_cell]`.
    pub fn eval(self, xi: [f64; 2], out: &mut [f64]) {
        let l = barycentric(xi);
        match self {
            ElementKind::P0 => out[0] = 1.0,
            ElementKind::P1 => out[..3].copy_from_slice(&l),
            ElementKind::P2 => {
                for i in 0..3 {
                    out[i] = l[i] * (2.0 * l[i] - 1.0);
                    out[3 + i] = 4.0 * l[(i + 1) % 3] * l[(i + 2) % 3];
                }
            }
            ElementKind::P1Bubble => {
                out[..3].copy_from_slice(&l);
                out[3] = 27.0 * l[0] * l[1] * l[2];
            }
        }
    }

    /// Reference gradients at `xi`, written to `out[..dofs_per_cell]`.
    pub fn grad(self, xi: [f64; 2], out: &mut [[f64; 2]]) {
        let l = barycentric(xi);
        let g = BARY_GRAD;
        match self {
            ElementKind::P0 => out[0] = [0.0, 0.0],
            ElementKind::P1 => out[..3].copy_from_slice(&g),
            ElementKind::P2 => {
                for i in 0..3 {
                    let s = 4.0 * l[i] - 1.0;
                    out[i] = [s * g[i][0], s * g[i][1]];
                    let (a, b) = ((i + 1) % 3, (i + 2) % 3);
                    out[3 + i] = [
                        4.0 * (g[a][0] * l[b] + l[a] * g[b][0]),
                        4.0 * (g[a][1] * l[b] + l[a] * g[b][1]),
                    ];
                }
            }
            ElementKind::P1Bubble => {
                out[..3].copy_from_slice(&g);
                let mut bx = 0.0;
                let mut by = 0.0;
                for i in 0..3 {
                    let other = l[(i + 1) % 3] * l[(i + 2) % 3];
                    bx += g[i][0] * other;
                    by += g[i][1] * other;
                }
                out[3] = [27.0 * bx, 27.0 * by];
            }
        }
    }

    /// Reference coordinates of the nodal points of the Lagrange dofs.
    /// The bubble dof has no nodal point and is reported at the centroid.
    pub fn reference_nodes(self) -> Vec<[f64; 2]> {
        const V: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        match self {
            ElementKind::P0 => vec![[1.0 / 3.0, 1.0 / 3.0]],
            ElementKind::P1 => V.to_vec(),
            ElementKind::P2 => {
                let mut nodes = V.to_vec();
                for i in 0..3 {
                    let (a, b) = (V[(i + 1) % 3], V[(i + 2) % 3]);
                    nodes.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
                }
                nodes
            }
            ElementKind::P1Bubble => {
                let mut nodes = V.to_vec();
                nodes.push([1.0 / 3.0, 1.0 / 3.0]);
                nodes
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ALL: [ElementKind; 4] = [
        ElementKind::P0,
        ElementKind::P1,
        ElementKind::P2,
        ElementKind::P1Bubble,
    ];

    fn random_points(n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| loop {
                let p = [rng.gen::<f64>(), rng.gen::<f64>()];
                if p[0] + p[1] < 1.0 {
                    break p;
                }
            })
            .collect()
    }

    #[test]
    fn lagrange_partition_of_unity() {
        for kind in [ElementKind::P1, ElementKind::P2] {
            let mut vals = [0.0; MAX_LOCAL_DOFS];
            let mut grads = [[0.0; 2]; MAX_LOCAL_DOFS];
            for xi in random_points(50, 1) {
                kind.eval(xi, &mut vals);
                kind.grad(xi, &mut grads);
                let n = kind.dofs_per_cell();
                assert!((vals[..n].iter().sum::<f64>() - 1.0).abs() < 1e-14);
                let gx: f64 = grads[..n].iter().map(|g| g[0]).sum();
                let gy: f64 = grads[..n].iter().map(|g| g[1]).sum();
                assert!(gx.abs() < 1e-13 && gy.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn kronecker_at_nodes() {
        for kind in [ElementKind::P1, ElementKind::P2] {
            let mut vals = [0.0; MAX_LOCAL_DOFS];
            for (i, node) in kind.reference_nodes().into_iter().enumerate() {
                kind.eval(node, &mut vals);
                for (j, v) in vals[..kind.dofs_per_cell()].iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((v - expect).abs() < 1e-15, "{kind:?} node {i} basis {j}: {v}");
                }
            }
        }
    }

    #[test]
    fn bubble_vanishes_on_edges_and_peaks_at_centroid() {
        let mut vals = [0.0; MAX_LOCAL_DOFS];
        for s in [0.0, 0.1, 0.37, 0.5, 0.9, 1.0] {
            for xi in [[s, 0.0], [0.0, s], [s, 1.0 - s]] {
                ElementKind::P1Bubble.eval(xi, &mut vals);
                assert!(vals[3].abs() < 1e-15);
            }
        }
        ElementKind::P1Bubble.eval([1.0 / 3.0, 1.0 / 3.0], &mut vals);
        assert!((vals[3] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let step = 1e-7;
        for kind in ALL {
            let n = kind.dofs_per_cell();
            let mut grads = [[0.0; 2]; MAX_LOCAL_DOFS];
            let mut plus = [0.0; MAX_LOCAL_DOFS];
            let mut minus = [0.0; MAX_LOCAL_DOFS];
            for xi in random_points(10, 7) {
                kind.grad(xi, &mut grads);
                for d in 0..2 {
                    let mut a = xi;
                    let mut b = xi;
                    a[d] += step;
                    b[d] -= step;
                    kind.eval(a, &mut plus);
                    kind.eval(b, &mut minus);
                    for i in 0..n {
                        let fd = (plus[i] - minus[i]) / (2.0 * step);
                        assert!((fd - grads[i][d]).abs() < 1e-6, "{kind:?} dof {i} dir {d}");
                    }
                }
            }
        }
    }
}
