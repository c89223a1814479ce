use nalgebra::{DMatrix, DVector, Vector3};

use super::{scalar_matrices, scalar_plane_matrix, vector_matrix_direct, CharSystem, Cone, FieldBackground};
use crate::error::{Error, Result};
use crate::jets::InvariantPoint;
use crate::lagrangians::LagrangianModel;
use crate::linalg::{complex_eigenvalues, EigenSystem};

/// State-dependent system matrix `𝒜ⁿ(U)` along a fixed direction.
pub trait SystemFamily {
    fn dim(&self) -> usize;
    fn matrix(&self, u: &DVector<f64>) -> Result<DMatrix<f64>>;

    /// Diagonalizes the system at `u`.
    fn eigen(&self, u: &DVector<f64>) -> Result<EigenSystem> {
        EigenSystem::new(&self.matrix(u)?)
    }
}

/// Inviscid Burgers equation as a 1×1 system, `λ = u`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BurgersFamily;

impl SystemFamily for BurgersFamily {
    fn dim(&self) -> usize {
        1
    }

    fn matrix(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(DMatrix::from_element(1, 1, u[0]))
    }
}

/// Scalar field `L(z)` with `U = (A, B, C, D)`, direction `n̂`.
#[derive(Debug, Clone)]
pub struct ScalarFamily {
    pub model: LagrangianModel,
    pub direction: Vector3<f64>,
}

impl SystemFamily for ScalarFamily {
    fn dim(&self) -> usize {
        4
    }

    fn matrix(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        let sigma = [u[0], u[1], u[2], u[3]];
        let z = FieldBackground::Scalar { sigma }.z();
        let jet = self.model.jet(&InvariantPoint::Z { z })?;
        let ms = scalar_matrices(sigma, jet.partial(1, 0), jet.partial(2, 0))?;
        let n = self.direction.normalize();
        Ok(&ms[0] * n.x + &ms[1] * n.y + &ms[2] * n.z)
    }
}

/// 1+1 reduction of the scalar field: `U = (A, B)` with `C = D = 0`.
#[derive(Debug, Clone)]
pub struct ScalarPlaneFamily {
    pub model: LagrangianModel,
}

impl SystemFamily for ScalarPlaneFamily {
    fn dim(&self) -> usize {
        2
    }

    fn matrix(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        let z = 0.5 * (-u[0] * u[0] + u[1] * u[1]);
        let jet = self.model.jet(&InvariantPoint::Z { z })?;
        scalar_plane_matrix(u[0], u[1], jet.partial(1, 0), jet.partial(2, 0))
    }
}

/// `L(α)` electrodynamics with `U = (E, B)`, direction `n̂`.
#[derive(Debug, Clone)]
pub struct VectorFamily {
    pub model: LagrangianModel,
    pub direction: Vector3<f64>,
}

impl SystemFamily for VectorFamily {
    fn dim(&self) -> usize {
        6
    }

    fn matrix(&self, u: &DVector<f64>) -> Result<DMatrix<f64>> {
        let bg = FieldBackground::vector([u[0], u[1], u[2]], [u[3], u[4], u[5]]);
        let jet = self.model.jet(&InvariantPoint::Alpha { alpha: bg.alpha() })?;
        vector_matrix_direct(&bg, &jet, &self.direction)
    }
}

/// Eigenvalue of `family` at `u` nearest to `target`.
pub(crate) fn tracked_eigenvalue<F: SystemFamily + ?Sized>(family: &F, u: &DVector<f64>, target: f64) -> Result<f64> {
    let ev = complex_eigenvalues(&family.matrix(u)?);
    ev.iter()
        .min_by(|a, b| (a.re - target).abs().total_cmp(&(b.re - target).abs()))
        .map(|c| c.re)
        .ok_or_else(|| Error::domain("empty system"))
}

/// Right eigenvector with its largest component made positive.
pub(crate) fn canonical_right(es: &EigenSystem, mode: usize) -> DVector<f64> {
    let r = es.right.column(mode).into_owned();
    let imax = r.iamax();
    if r[imax] < 0.0 {
        -r
    } else {
        r
    }
}

/// Normalized genuine-nonlinearity coefficient `(∇_Uλ · R) / |∇_Uλ|` of mode
/// `mode` (index into the ascending spectrum) at state `u`.
///
/// Derivatives are central differences with one Richardson step, at
/// `h = 1e−5·max(|U|, 1)`, tracking the eigenvalue nearest the unperturbed
/// one. Zero means the mode is exceptional at `u`. If `λ` is locally
/// constant (`|∇λ| < 1e−8`) the unnormalized derivative is returned.
pub fn exceptionality_per_mode<F: SystemFamily + ?Sized>(family: &F, u: &DVector<f64>, mode: usize) -> Result<f64> {
    let es = family.eigen(u)?;
    if mode >= es.values.len() {
        return Err(Error::Usage(format!(
            "mode {mode} out of range (system has {})",
            es.values.len()
        )));
    }
    let lam = es.values[mode];
    let h = 1e-5 * u.norm().max(1.0);
    let spacing = es
        .values
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != mode)
        .map(|(_, v)| (v - lam).abs())
        .fold(f64::INFINITY, f64::min);
    if spacing < 10.0 * h {
        return Err(Error::ModeCollision {
            spacing,
            limit: 10.0 * h,
        });
    }
    let derivative = |dir: &DVector<f64>| -> Result<f64> {
        let central = |step: f64| -> Result<f64> {
            let up = tracked_eigenvalue(family, &(u + dir * step), lam)?;
            let dn = tracked_eigenvalue(family, &(u - dir * step), lam)?;
            Ok((up - dn) / (2.0 * step))
        };
        let (d1, d2) = (central(h)?, central(0.5 * h)?);
        Ok((4.0 * d2 - d1) / 3.0)
    };
    let r = canonical_right(&es, mode);
    let along = derivative(&r)?;
    let mut grad2 = 0.0;
    for k in 0..family.dim() {
        let mut e = DVector::zeros(family.dim());
        e[k] = 1.0;
        grad2 += derivative(&e)?.powi(2);
    }
    let grad = grad2.sqrt();
    Ok(if grad < 1e-8 { along } else { along / grad })
}

/// Agreement between a system's nontrivial eigenvalues and a cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCheck {
    /// Largest `|H(−λ, n̂)| / scale` over nontrivial modes.
    pub cone_residual: f64,
    /// Largest `|λ − (−p₀)| / (1 + |λ|)` between sorted eigenvalues and cone
    /// roots.
    pub root_mismatch: f64,
}

impl CrossCheck {
    pub fn max(&self) -> f64 {
        self.cone_residual.max(self.root_mismatch)
    }
}

/// Evaluates `cone` on `p = (−λ, n̂)` for each nontrivial eigenvalue of
/// `system` and compares the eigenvalues with the cone's roots in `p₀`.
pub fn crosscheck_cone_vs_eigen(system: &CharSystem, cone: &dyn Cone) -> Result<CrossCheck> {
    let n = system.direction;
    let lams = system.nontrivial_eigenvalues();
    let mut cone_residual: f64 = 0.0;
    for &lam in &lams {
        let p = [-lam, n.x, n.y, n.z];
        let scale = cone.scale(&p).max(f64::MIN_POSITIVE);
        cone_residual = cone_residual.max(cone.value(&p).abs() / scale);
    }
    let roots = cone.roots_p0(&n)?;
    if roots.len() != lams.len() {
        return Err(Error::domain(format!(
            "cone has {} roots but the system has {} nontrivial modes",
            roots.len(),
            lams.len()
        )));
    }
    let mut speeds: Vec<(f64, f64)> = roots.iter().map(|r| (-r.re, r.im.abs())).collect();
    speeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    let root_mismatch = lams
        .iter()
        .zip(&speeds)
        .map(|(l, (s, im))| ((l - s).abs() + im) / (1.0 + l.abs()))
        .fold(0.0, f64::max);
    Ok(CrossCheck {
        cone_residual,
        root_mismatch,
    })
}
