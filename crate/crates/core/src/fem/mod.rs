//! Reference elements, triangle quadrature and finite-element spaces.

mod element;
mod quadrature;
mod space;

pub use element::{ElementKind, MAX_LOCAL_DOFS};
pub use quadrature::QuadratureRule;
pub use space::{FeSpace, SpaceKind};

/// Basis values and reference gradients tabulated at the points of a rule.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub rule: QuadratureRule,
    pub local: usize,
    values: Vec<f64>,
    ref_grads: Vec<[f64; 2]>,
}

impl Tabulation {
    pub fn new(element: ElementKind, rule: QuadratureRule) -> Self {
        let local = element.dofs_per_cell();
        let mut values = vec![0.0; rule.len() * local];
        let mut ref_grads = vec![[0.0; 2]; rule.len() * local];
        for q in 0..rule.len() {
            let xi = rule.reference_point(q);
            element.eval(xi, &mut values[q * local..(q + 1) * local]);
            element.grad(xi, &mut ref_grads[q * local..(q + 1) * local]);
        }
        Self {
            rule,
            local,
            values,
            ref_grads,
        }
    }

    pub fn num_points(&self) -> usize {
        self.rule.len()
    }

    #[inline]
    pub fn values(&self, q: usize) -> &[f64] {
        &self.values[q * self.local..(q + 1) * self.local]
    }

    #[inline]
    pub fn ref_grads(&self, q: usize) -> &[[f64; 2]] {
        &self.ref_grads[q * self.local..(q + 1) * self.local]
    }
}
