use nalgebra::{DMatrix, Matrix3, Vector3};

use super::{CharSystem, FieldBackground};
use crate::error::{Error, Result};
use crate::jets::Jet3;
use crate::linalg::{char_poly, frame_rotation, singular_values, EigenSystem};

/// Condition number of the `P` block beyond which the system is rejected.
pub const P_CONDITION_LIMIT: f64 = 1e12;

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `εₙᵢₖ = n_l ε_{lik}`.
fn eps_n(n: &Vector3<f64>, i: usize, k: usize) -> f64 {
    (0..3).map(|l| n[l] * levi_civita(l, i, k)).sum()
}

/// Blocks `(H⁰, Hⁿ)` of `H⁰∂₀U + Hⁿ∂ₙU = 0` for `U = (E, B)` and `L(α)`:
///
/// ```text
/// H⁰ = | P  Q |    Hⁿ = | S  R |
///      | 0  I |         | σ  0 |
/// ```
///
/// with `p_ij = 2EᵢEⱼL″ − δᵢⱼL′`, `q_ij = −2EᵢBⱼL″`,
/// `s_ij = 2εₙᵢₖEⱼBₖL″`, `r_ij = −εₙᵢₖ(2BⱼBₖL″ + δⱼₖL′)`, `σ_ij = −εₙᵢⱼ`.
/// The first row block is the nonlinear Ampère law (halved), the second
/// Faraday's law.
pub fn vector_blocks(
    e: &Vector3<f64>,
    b: &Vector3<f64>,
    n: &Vector3<f64>,
    l1: f64,
    l2: f64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut h0 = DMatrix::zeros(6, 6);
    let mut h1 = DMatrix::zeros(6, 6);
    for i in 0..3 {
        for j in 0..3 {
            let d = if i == j { 1.0 } else { 0.0 };
            h0[(i, j)] = 2.0 * e[i] * e[j] * l2 - d * l1;
            h0[(i, j + 3)] = -2.0 * e[i] * b[j] * l2;
            h0[(i + 3, j + 3)] = d;
            let mut s = 0.0;
            let mut r = 0.0;
            for k in 0..3 {
                let ek = eps_n(n, i, k);
                let djk = if j == k { 1.0 } else { 0.0 };
                s += 2.0 * ek * e[j] * b[k] * l2;
                r -= ek * (2.0 * b[j] * b[k] * l2 + djk * l1);
            }
            h1[(i, j)] = s;
            h1[(i, j + 3)] = r;
            h1[(i + 3, j)] = -eps_n(n, i, j);
        }
    }
    (h0, h1)
}

fn reduce(h0: &DMatrix<f64>, h1: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = h0.view((0, 0), (3, 3)).into_owned();
    let s = singular_values(&p);
    let cond = s[0] / s[2];
    if !(cond < P_CONDITION_LIMIT) {
        return Err(Error::DegenerateSystem(format!(
            "block P is singular (condition {cond:e})"
        )));
    }
    let inv = h0
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateSystem("H⁰ is not invertible".into()))?;
    Ok(inv * h1)
}

fn fields_of(bg: &FieldBackground) -> Result<(Vector3<f64>, Vector3<f64>)> {
    match bg {
        FieldBackground::Vector { e, b } => Ok((Vector3::from(*e), Vector3::from(*b))),
        FieldBackground::Scalar { .. } => Err(Error::domain("vector system needs an electromagnetic background")),
    }
}

/// `W = (H⁰)⁻¹Hⁿ` built directly for direction `n̂` (no rotation).
pub fn vector_matrix_direct(bg: &FieldBackground, jet: &Jet3, n: &Vector3<f64>) -> Result<DMatrix<f64>> {
    let (e, b) = fields_of(bg)?;
    let (h0, h1) = vector_blocks(&e, &b, &n.normalize(), jet.partial(1, 0), jet.partial(2, 0));
    reduce(&h0, &h1)
}

/// Characteristic system of `L(α)` electrodynamics in direction `n̂`.
///
/// `jet` is a one-variable jet of `L` in `α` at `α(E, B)`. The quartic
/// coefficients are read off `det(λ − W) = λ²(λ⁴ + c₃λ³ + c₂λ² + c₁λ + c₀)`.
pub fn vector_system(bg: &FieldBackground, jet: &Jet3, n: &Vector3<f64>) -> Result<CharSystem> {
    let (e, b) = fields_of(bg)?;
    let t: Matrix3<f64> = frame_rotation(n)?;
    let (h0, h1) = vector_blocks(&(t * e), &(t * b), &Vector3::x(), jet.partial(1, 0), jet.partial(2, 0));
    let w = reduce(&h0, &h1)?;
    let mut d = DMatrix::<f64>::zeros(6, 6);
    d.view_mut((0, 0), (3, 3)).copy_from(&t);
    d.view_mut((3, 3), (3, 3)).copy_from(&t);
    let matrix = d.transpose() * w * &d;
    let cp = char_poly(&matrix);
    let eigen = EigenSystem::new(&matrix)?;
    Ok(CharSystem {
        direction: n.normalize(),
        matrix,
        eigen,
        coefficients: cp[2..6].to_vec(),
        theta: None,
        zero_multiplicity: 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::InvariantPoint;
    use crate::lagrangians::{builtin, Kind, LagrangianModel};
    use approx::assert_relative_eq;

    fn jet(model: &LagrangianModel, bg: &FieldBackground) -> Jet3 {
        model.jet(&InvariantPoint::Alpha { alpha: bg.alpha() }).unwrap()
    }

    fn assert_vacuum_spectrum(values: &[f64]) {
        for (got, want) in values.iter().zip([-1.0, -1.0, 0.0, 0.0, 1.0, 1.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn maxwell_light_cone() {
        let m = builtin("maxwell", &[]).unwrap();
        let bg = FieldBackground::vector([0.3, -0.2, 0.5], [0.1, 0.4, 0.2]);
        let sys = vector_system(&bg, &jet(&m, &bg), &Vector3::x()).unwrap();
        assert_vacuum_spectrum(&sys.eigen.values);
        assert!(sys.eigen.biorthogonality_error() < 1e-10);
    }

    #[test]
    fn vacuum_background() {
        let m = builtin("sqrt-family", &[1.0, 1.0, 1.0]).unwrap();
        let bg = FieldBackground::vector([0.0; 3], [0.0; 3]);
        let sys = vector_system(&bg, &jet(&m, &bg), &Vector3::new(0.2, 0.3, -0.9)).unwrap();
        assert_vacuum_spectrum(&sys.eigen.values);
    }

    #[test]
    fn reduced_born_infeld_spectrum() {
        // L = 1 − √(1+α): one polarization on the light cone, the other on
        // 2uL″ + 𝒢L′ = 0.
        let m = LagrangianModel::parse("1 - sqrt(1 + a)", Kind::VectorAlpha).unwrap();
        let bg = FieldBackground::vector([0.3, 0.0, 0.0], [0.0, 0.4, 0.0]);
        let sys = vector_system(&bg, &jet(&m, &bg), &Vector3::x()).unwrap();
        let nz = sys.nontrivial_eigenvalues();
        let v = 1.0 / 1.16f64.sqrt();
        for (got, want) in nz.iter().zip([-1.0, -v, v, 1.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-12);
        }
        let zeros: Vec<f64> = sys.eigen.values.iter().copied().filter(|x| x.abs() < 1e-10).collect();
        assert_eq!(zeros.len(), 2);
    }

    #[test]
    fn quartic_coefficients_match_roots() {
        let m = builtin("perturbed-maxwell", &[0.1]).unwrap();
        let bg = FieldBackground::vector([0.3, 0.1, 0.0], [0.0, 0.4, 0.2]);
        let sys = vector_system(&bg, &jet(&m, &bg), &Vector3::new(0.5, 0.5, 0.7)).unwrap();
        let mut coeffs = sys.coefficients.clone();
        coeffs.push(1.0);
        for lam in sys.nontrivial_eigenvalues() {
            let v: f64 = coeffs.iter().rev().fold(0.0, |acc, c| acc * lam + c);
            assert!(v.abs() < 1e-12, "quartic residual {v}");
        }
    }

    #[test]
    fn rotation_matches_direct_construction() {
        let m = builtin("perturbed-maxwell", &[0.1]).unwrap();
        let bg = FieldBackground::vector([0.3, 0.1, -0.2], [0.1, 0.4, 0.2]);
        let j = jet(&m, &bg);
        for n in [
            Vector3::new(0.3, -0.4, 0.5),
            Vector3::new(-0.9, 0.1, 0.2),
            Vector3::new(0.0, 0.6, -0.8),
        ] {
            let sys = vector_system(&bg, &j, &n).unwrap();
            let direct = vector_matrix_direct(&bg, &j, &n).unwrap();
            assert!((sys.matrix - direct).norm() < 1e-13);
        }
    }

    #[test]
    fn singular_p_block() {
        // L′ = 0 at α = 0 for L = α²: P = 2EEᵀL″ has rank one.
        let m = LagrangianModel::parse("a^2", Kind::VectorAlpha).unwrap();
        let bg = FieldBackground::vector([0.3, 0.0, 0.0], [0.0, 0.3, 0.0]);
        let err = vector_system(&bg, &jet(&m, &bg), &Vector3::x()).unwrap_err();
        assert!(matches!(err, Error::DegenerateSystem(_)));
    }
}
