//! Symmetric Gauss rules on the reference triangle `{(0,0), (1,0), (0,1)}`.
//!
//! Orbit parameters are the classical Dunavant values, refined by Newton's
//! method on the moment equations to full double precision.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    /// Barycentric coordinates `(l0, l1, l2)`; the reference point is `(l1, l2)`.
    pub points: Vec<[f64; 3]>,
    /// Positive weights summing to the reference area 1/2.
    pub weights: Vec<f64>,
    /// Highest total polynomial degree integrated exactly.
    pub degree: usize,
}

enum Orbit {
    Centroid(f64),
    /// `(a, a, 1 - 2a)` and permutations.
    Pair(f64, f64),
    /// `(a, b, 1 - a - b)` and all six permutations.
    Scalene(f64, f64, f64),
}

const DEGREE_2: &[Orbit] = &[Orbit::Pair(1.0 / 6.0, 1.0 / 3.0)];

const DEGREE_4: &[Orbit] = &[
    Orbit::Pair(0.445_948_490_915_964_886_3, 0.223_381_589_678_011_465_7),
    Orbit::Pair(0.091_576_213_509_770_743_46, 0.109_951_743_655_321_867_6),
];

const DEGREE_5: &[Orbit] = &[
    Orbit::Centroid(0.225),
    Orbit::Pair(0.101_286_507_323_456_338_8, 0.125_939_180_544_827_152_6),
    Orbit::Pair(0.470_142_064_105_115_089_8, 0.132_394_152_788_506_180_7),
];

const DEGREE_6: &[Orbit] = &[
    Orbit::Pair(0.063_089_014_491_502_228_34, 0.050_844_906_370_206_816_92),
    Orbit::Pair(0.249_286_745_170_910_421_3, 0.116_786_275_726_379_366_0),
    Orbit::Scalene(
        0.053_145_049_844_816_947_35,
        0.310_352_451_033_784_405_4,
        0.082_851_075_618_373_575_19,
    ),
];

const DEGREE_8: &[Orbit] = &[
    Orbit::Centroid(0.144_315_607_677_787_168_3),
    Orbit::Pair(0.459_292_588_292_723_156_0, 0.095_091_634_267_284_624_79),
    Orbit::Pair(0.170_569_307_751_760_206_6, 0.103_217_370_534_718_250_3),
    Orbit::Pair(0.050_547_228_317_030_975_46, 0.032_458_497_623_198_080_31),
    Orbit::Scalene(
        0.263_112_829_634_638_113_4,
        0.008_394_777_409_957_605_337,
        0.027_230_314_174_434_994_26,
    ),
];

impl QuadratureRule {
    /// Smallest available rule integrating all polynomials of total degree
    /// `degree` exactly. Supported requests: `1..=8`.
    pub fn new(degree: usize) -> Result<Self> {
        let (orbits, exact): (&[Orbit], usize) = match degree {
            1 => (&[Orbit::Centroid(1.0)], 1),
            2 => (DEGREE_2, 2),
            3 | 4 => (DEGREE_4, 4),
            5 => (DEGREE_5, 5),
            6 => (DEGREE_6, 6),
            7 | 8 => (DEGREE_8, 8),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "no triangle quadrature rule for degree {degree} (supported: 1..=8)"
                )))
            }
        };
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for orbit in orbits {
            match *orbit {
                Orbit::Centroid(w) => {
                    points.push([1.0 / 3.0; 3]);
                    weights.push(w);
                }
                Orbit::Pair(a, w) => {
                    let b = 1.0 - 2.0 * a;
                    for p in [[a, a, b], [a, b, a], [b, a, a]] {
                        points.push(p);
                        weights.push(w);
                    }
                }
                Orbit::Scalene(a, b, w) => {
                    let c = 1.0 - a - b;
                    for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
                        points.push(p);
                        weights.push(w);
                    }
                }
            }
        }
        // tabulated weights are normalised to unit area
        for w in &mut weights {
            *w *= 0.5;
        }
        Ok(Self {
            points,
            weights,
            degree: exact,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Reference coordinates `(x, y)` of quadrature point `q`.
    #[inline]
    pub fn reference_point(&self, q: usize) -> [f64; 2] {
        let p = self.points[q];
        [p[1], p[2]]
    }

    /// Integral of `f` over the reference triangle.
    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        (0..self.len())
            .map(|q| self.weights[q] * f(self.reference_point(q)))
            .sum()
    }
}
