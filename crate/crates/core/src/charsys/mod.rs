//! Characteristic systems and covariant dispersion relations.
//!
//! Two first-order systems are constructed explicitly: the scalar field
//! `L(z)` in the variables `U = (∂₀σ, ∂₁σ, ∂₂σ, ∂₃σ)` ([`scalar_system`]) and
//! nonlinear electrodynamics `L(α)` in `U = (E, B)` ([`vector_system`]).
//! Both are reduced so that `𝒜⁰ = I`; the characteristic speeds in a
//! direction `n̂` are then the eigenvalues of `𝒜ⁿ`.
//!
//! Arbitrary `n̂` is handled by rotating the background so that `n̂ = x̂`,
//! building the `x̂` matrix and transforming back. Direct `Σ nᵢ𝒜ⁱ` builders
//! are kept for validation.
//!
//! The covariant side is a [`Cone`]: a homogeneous polynomial `H(p)` whose
//! zero set contains the characteristic covectors `p = (−λ, n̂)`.

mod exceptional;
mod fresnel;
mod scalar;
mod vector;

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;

use crate::error::Result;
use crate::jets::InvariantPoint;
use crate::lagrangians::Kind;
use crate::linalg::EigenSystem;

pub use exceptional::{
    crosscheck_cone_vs_eigen, exceptionality_per_mode, BurgersFamily, CrossCheck, ScalarFamily, ScalarPlaneFamily,
    SystemFamily, VectorFamily,
};
pub use fresnel::{
    fresnel_quartic, fresnel_roots, fresnel_scan, write_fresnel_csv, FresnelCone, FresnelRoots, FresnelRow,
    FresnelSheet,
};
pub use scalar::{scalar_cone, scalar_matrices, scalar_plane_matrix, scalar_system, ScalarCone};
pub use vector::{vector_blocks, vector_matrix_direct, vector_system};

/// Constant background state.
///
/// Metric `η = diag(−1, 1, 1, 1)`, `ε⁰¹²³ = +1`, `F^{0i} = Eⁱ`,
/// `Bⁱ = ½εⁱʲᵏF_{jk}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldBackground {
    /// Scalar gradient `σ_μ = (A, B, C, D)`.
    Scalar { sigma: [f64; 4] },
    /// Electric and magnetic fields.
    Vector { e: [f64; 3], b: [f64; 3] },
}

impl FieldBackground {
    pub fn scalar(a: f64, b: f64, c: f64, d: f64) -> Self {
        FieldBackground::Scalar { sigma: [a, b, c, d] }
    }

    pub fn vector(e: [f64; 3], b: [f64; 3]) -> Self {
        FieldBackground::Vector { e, b }
    }

    /// `z = ½(−A² + B² + C² + D²)`; zero for vector backgrounds.
    pub fn z(&self) -> f64 {
        match self {
            FieldBackground::Scalar { sigma: [a, b, c, d] } => 0.5 * (-a * a + b * b + c * c + d * d),
            FieldBackground::Vector { .. } => 0.0,
        }
    }

    /// `α = |B|² − |E|²`; zero for scalar backgrounds.
    pub fn alpha(&self) -> f64 {
        match self {
            FieldBackground::Vector { e, b } => {
                let (e, b) = (Vector3::from(*e), Vector3::from(*b));
                b.norm_squared() - e.norm_squared()
            }
            FieldBackground::Scalar { .. } => 0.0,
        }
    }

    /// `β = −E·B`; zero for scalar backgrounds.
    pub fn beta(&self) -> f64 {
        match self {
            FieldBackground::Vector { e, b } => -Vector3::from(*e).dot(&Vector3::from(*b)),
            FieldBackground::Scalar { .. } => 0.0,
        }
    }

    /// Point in invariant space appropriate for a model of the given kind.
    pub fn invariant_point(&self, kind: Kind) -> InvariantPoint {
        match kind {
            Kind::Scalar => InvariantPoint::Z { z: self.z() },
            Kind::VectorAlpha => InvariantPoint::Alpha { alpha: self.alpha() },
            Kind::VectorAlphaBeta => InvariantPoint::AlphaBeta {
                alpha: self.alpha(),
                beta: self.beta(),
            },
            Kind::VectorScalar => InvariantPoint::AlphaBetaZ {
                alpha: self.alpha(),
                beta: self.beta(),
                z: self.z(),
            },
        }
    }
}

/// Reduced first-order system `∂₀U + 𝒜ⁿ ∂ₙU = 0` along one direction, with
/// its eigenstructure.
#[derive(Debug, Clone)]
pub struct CharSystem {
    /// Unit spatial direction.
    pub direction: Vector3<f64>,
    /// `𝒜ⁿ` (the time matrix is the identity after reduction).
    pub matrix: DMatrix<f64>,
    /// Eigenvalues, right/left eigenvectors and conditioning.
    pub eigen: EigenSystem,
    /// Monic polynomial coefficients of the nontrivial factor, constant term
    /// first: `(a₂, a₁)` for the scalar quadratic, `(c₀, c₁, c₂, c₃)` for the
    /// electrodynamics quartic.
    pub coefficients: Vec<f64>,
    /// `Θ = A²L″ − L′` for scalar systems.
    pub theta: Option<f64>,
    /// Number of structurally zero eigenvalues.
    pub zero_multiplicity: usize,
}

impl CharSystem {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues with the `zero_multiplicity` smallest-magnitude ones
    /// removed, ascending.
    pub fn nontrivial_eigenvalues(&self) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..self.eigen.values.len()).collect();
        idx.sort_by(|&a, &b| self.eigen.values[a].abs().total_cmp(&self.eigen.values[b].abs()));
        let mut v: Vec<f64> = idx[self.zero_multiplicity..]
            .iter()
            .map(|&i| self.eigen.values[i])
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Homogeneous dispersion polynomial `H(p)` on covectors `p = (p₀, p⃗)`.
pub trait Cone {
    fn value(&self, p: &[f64; 4]) -> f64;
    fn grad_p(&self, p: &[f64; 4]) -> [f64; 4];
    /// Homogeneity degree in `p`.
    fn degree(&self) -> u32;
    /// Sum of absolute monomial sizes at `p`; normalizes [`Cone::value`].
    fn scale(&self, p: &[f64; 4]) -> f64;
    /// Roots in `p₀` with `p⃗ = n̂` fixed, sorted by real part.
    fn roots_p0(&self, n: &Vector3<f64>) -> Result<Vec<Complex64>>;
}

/// `η^{μν}p_μp_ν = −p₀² + |p⃗|²`.
pub(crate) fn minkowski(p: &[f64; 4]) -> f64 {
    -p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3]
}

/// Roots of `c₂x² + c₁x + c₀` without cancellation, sorted by real part.
pub(crate) fn quadratic_roots(c2: f64, c1: f64, c0: f64) -> Vec<Complex64> {
    let disc = c1 * c1 - 4.0 * c2 * c0;
    let mut r = if disc >= 0.0 {
        let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
        if q == 0.0 {
            vec![Complex64::new(0.0, 0.0); 2]
        } else {
            vec![Complex64::new(q / c2, 0.0), Complex64::new(c0 / q, 0.0)]
        }
    } else {
        let re = -c1 / (2.0 * c2);
        let im = (-disc).sqrt() / (2.0 * c2.abs());
        vec![Complex64::new(re, -im), Complex64::new(re, im)]
    };
    r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    r
}
