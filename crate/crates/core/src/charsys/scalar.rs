use nalgebra::{DMatrix, Matrix4, Vector3, Vector4};
use num_complex::Complex64;

use super::{quadratic_roots, CharSystem, Cone, FieldBackground};
use crate::error::{Error, Result};
use crate::jets::Jet3;
use crate::linalg::{frame_rotation, EigenSystem};

/// Relative size below which `Θ = A²L″ − L′` counts as zero.
pub const THETA_TOL: f64 = 1e-12;

fn sigma_of(bg: &FieldBackground) -> Result<[f64; 4]> {
    match bg {
        FieldBackground::Scalar { sigma } => Ok(*sigma),
        FieldBackground::Vector { .. } => Err(Error::domain("scalar system needs a scalar background")),
    }
}

fn theta(a: f64, l1: f64, l2: f64) -> Result<f64> {
    let th = a * a * l2 - l1;
    if th.abs() <= THETA_TOL * ((a * a * l2).abs() + l1.abs()) || !th.is_finite() {
        return Err(Error::DegenerateSystem(format!(
            "Θ = A²L″ − L′ = {th:e} vanishes; no canonical form"
        )));
    }
    Ok(th)
}

/// The three matrices `Mⁱ` of `∂₀U + Mⁱ∂ᵢU = 0` for `U = (A, B, C, D)`,
/// given `L′` and `L″` at `z(U)`.
///
/// Row 0 is the field equation divided by `Θ`; row `i` is the
/// compatibility condition `∂₀σᵢ − ∂ᵢA = 0`.
pub fn scalar_matrices(sigma: [f64; 4], l1: f64, l2: f64) -> Result<[DMatrix<f64>; 3]> {
    let a = sigma[0];
    let th = theta(a, l1, l2)?;
    Ok(std::array::from_fn(|k| {
        let i = k + 1;
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 0)] = -2.0 * a * sigma[i] * l2 / th;
        for j in 1..4 {
            let delta = if i == j { l1 } else { 0.0 };
            m[(0, j)] = (delta + sigma[i] * sigma[j] * l2) / th;
        }
        m[(i, 0)] = -1.0;
        m
    }))
}

/// The 2×2 block of `M¹` acting on `(A, B)` when `C = D = 0`.
pub fn scalar_plane_matrix(a: f64, b: f64, l1: f64, l2: f64) -> Result<DMatrix<f64>> {
    let th = theta(a, l1, l2)?;
    Ok(DMatrix::from_row_slice(
        2,
        2,
        &[-2.0 * a * b * l2 / th, (b * b * l2 + l1) / th, -1.0, 0.0],
    ))
}

/// Characteristic system of `L(z)` in direction `n̂`.
///
/// `jet` is a one-variable jet of `L` in `z` at `z(σ)`.
pub fn scalar_system(bg: &FieldBackground, jet: &Jet3, n: &Vector3<f64>) -> Result<CharSystem> {
    let sigma = sigma_of(bg)?;
    let (l1, l2) = (jet.partial(1, 0), jet.partial(2, 0));
    let t = frame_rotation(n)?;
    let mut s = DMatrix::<f64>::zeros(4, 4);
    s[(0, 0)] = 1.0;
    s.view_mut((1, 1), (3, 3)).copy_from(&t);
    let u = &s * nalgebra::DVector::from_row_slice(&sigma);
    let rotated = [u[0], u[1], u[2], u[3]];
    let [m1, _, _] = scalar_matrices(rotated, l1, l2)?;
    let matrix = s.transpose() * m1 * &s;
    let th = theta(sigma[0], l1, l2)?;
    let bn = rotated[1];
    let a1 = 2.0 * sigma[0] * bn * l2 / th;
    let a2 = (bn * bn * l2 + l1) / th;
    let eigen = EigenSystem::new(&matrix)?;
    Ok(CharSystem {
        direction: n.normalize(),
        matrix,
        eigen,
        coefficients: vec![a2, a1],
        theta: Some(th),
        zero_multiplicity: 2,
    })
}

/// Effective metric `G^{μν} = η^{μν}L′ + σ^μσ^νL″` of a scalar background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarCone {
    pub g: Matrix4<f64>,
}

impl ScalarCone {
    pub fn new(sigma: [f64; 4], l1: f64, l2: f64) -> Self {
        let up = Vector4::new(-sigma[0], sigma[1], sigma[2], sigma[3]);
        let eta = Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, 1.0));
        ScalarCone {
            g: eta * l1 + up * up.transpose() * l2,
        }
    }

    /// The vacuum light cone `η^{μν}`.
    pub fn minkowski() -> Self {
        ScalarCone::new([0.0; 4], 1.0, 0.0)
    }

    pub fn from_jet(bg: &FieldBackground, jet: &Jet3) -> Result<Self> {
        Ok(ScalarCone::new(sigma_of(bg)?, jet.partial(1, 0), jet.partial(2, 0)))
    }
}

impl Cone for ScalarCone {
    fn value(&self, p: &[f64; 4]) -> f64 {
        let v = Vector4::from(*p);
        v.dot(&(self.g * v))
    }

    fn grad_p(&self, p: &[f64; 4]) -> [f64; 4] {
        let g = self.g * Vector4::from(*p) * 2.0;
        [g[0], g[1], g[2], g[3]]
    }

    fn degree(&self) -> u32 {
        2
    }

    fn scale(&self, p: &[f64; 4]) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += (self.g[(i, j)] * p[i] * p[j]).abs();
            }
        }
        s
    }

    fn roots_p0(&self, n: &Vector3<f64>) -> Result<Vec<Complex64>> {
        let n = n.normalize();
        let g = &self.g;
        let c2 = g[(0, 0)];
        let c1 = 2.0 * (1..4).map(|i| g[(0, i)] * n[i - 1]).sum::<f64>();
        let mut c0 = 0.0;
        for i in 1..4 {
            for j in 1..4 {
                c0 += g[(i, j)] * n[i - 1] * n[j - 1];
            }
        }
        if c2.abs() <= 1e-14 * (c1.abs() + c0.abs()) {
            return Err(Error::DegenerateSystem(
                "G⁰⁰ vanishes; cone has a root at infinity".into(),
            ));
        }
        Ok(quadratic_roots(c2, c1, c0))
    }
}

/// `G^{μν}p_μp_ν` for a scalar background.
pub fn scalar_cone(jet: &Jet3, bg: &FieldBackground, p: &[f64; 4]) -> Result<f64> {
    Ok(ScalarCone::from_jet(bg, jet)?.value(p))
}
