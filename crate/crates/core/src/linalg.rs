//! Small dense linear algebra on top of `nalgebra`: real spectra with
//! left/right eigenvectors, characteristic polynomials, polynomial roots,
//! rank and kernels.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance for treating two eigenvalues as one cluster.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Dimension of the right kernel: the number of columns minus the number of
/// singular values above `rel_tol · σ_max`.
pub fn kernel_dim(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return m.ncols();
    }
    m.ncols() - s.iter().filter(|&&x| x > rel_tol * smax).count()
}

/// Right singular vectors ordered by increasing singular value, as columns,
/// together with those singular values. Short matrices are padded with zero
/// rows so that the full right basis is available.
fn right_basis(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.ncols();
    let padded = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let sv = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let cols: Vec<DVector<f64>> = idx.iter().map(|&i| vt.row(i).transpose()).collect();
    (sv, DMatrix::from_columns(&cols))
}

/// Orthonormal basis (columns) of the numerical right kernel.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (sv, v) = right_basis(m);
    let smax = sv.last().copied().unwrap_or(0.0);
    let k = sv.iter().filter(|&&s| s <= rel_tol * smax || smax == 0.0).count();
    v.columns(0, k).into_owned()
}

/// Complex eigenvalues, sorted by real then imaginary part.
pub fn complex_eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    let mut ev: Vec<Complex64> = m
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|c| Complex64::new(c.re, c.im))
        .collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}

/// Real eigenvalues in ascending order; fails if any eigenvalue has an
/// imaginary part beyond `imag_tol · (1 + |λ|)`.
pub fn real_eigenvalues(m: &DMatrix<f64>, imag_tol: f64) -> Result<Vec<f64>> {
    let ev = complex_eigenvalues(m);
    if let Some(c) = ev.iter().find(|c| c.im.abs() > imag_tol * (1.0 + c.norm())) {
        return Err(Error::NotHyperbolic(format!("complex eigenvalue {c}")));
    }
    Ok(ev.iter().map(|c| c.re).collect())
}

/// Real eigen-decomposition `A R = R Λ`, `L A = Λ L`, `L R = I`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Ascending eigenvalues (clusters replaced by their mean).
    pub values: Vec<f64>,
    /// Right eigenvectors as columns, unit length.
    pub right: DMatrix<f64>,
    /// Left eigenvectors as rows, scaled so that `left · right = I`.
    pub left: DMatrix<f64>,
    /// 2-norm condition number of `right`.
    pub condition: f64,
}

impl EigenSystem {
    /// Diagonalizes a real matrix with real spectrum.
    ///
    /// Eigenvalues closer than `CLUSTER_TOL · (1 + max|λ|)` are grouped and
    /// their invariant subspace is taken from the null space of `A − λI`.
    /// Fails with [`Error::NotHyperbolic`] on complex eigenvalues or a
    /// defective (non-diagonalizable) cluster.
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        let raw = real_eigenvalues(a, 1e-7)?;
        let scale = 1.0 + raw.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tol = CLUSTER_TOL * scale;
        let mut clusters: Vec<Vec<f64>> = Vec::new();
        for &v in &raw {
            match clusters.last_mut() {
                Some(c) if (v - c[c.len() - 1]).abs() < tol => c.push(v),
                _ => clusters.push(vec![v]),
            }
        }
        let anorm = a.norm().max(f64::MIN_POSITIVE);
        let mut values = Vec::with_capacity(n);
        let mut rcols: Vec<DVector<f64>> = Vec::with_capacity(n);
        let mut lrows: Vec<DVector<f64>> = Vec::with_capacity(n);
        for c in &clusters {
            let m = c.len();
            let lam = c.iter().sum::<f64>() / m as f64;
            let shifted = a - DMatrix::identity(n, n) * lam;
            let (sr, vr) = right_basis(&shifted);
            let (_, vl) = right_basis(&shifted.transpose());
            if sr[m - 1] > 1e-6 * anorm {
                return Err(Error::NotHyperbolic(format!(
                    "eigenvalue {lam} of multiplicity {m} lacks a full eigenvector set"
                )));
            }
            let r = vr.columns(0, m).into_owned();
            let l = vl.columns(0, m).transpose();
            let g = &l * &r;
            let ginv = g
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::NotHyperbolic(format!("left/right eigenvectors of {lam} are orthogonal")))?;
            let l = ginv * l;
            for k in 0..m {
                values.push(lam);
                rcols.push(r.column(k).into_owned());
                lrows.push(l.row(k).transpose());
            }
        }
        let right = DMatrix::from_columns(&rcols);
        let left = DMatrix::from_columns(&lrows).transpose();
        let s = singular_values(&right);
        let condition = s[0] / s[s.len() - 1];
        Ok(EigenSystem {
            values,
            right,
            left,
            condition,
        })
    }

    /// Largest `|L_I R_J − δ_IJ|`.
    pub fn biorthogonality_error(&self) -> f64 {
        let n = self.values.len();
        let g = &self.left * &self.right;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - d).abs());
            }
        }
        worst
    }
}

/// Characteristic polynomial `det(λI − A)` by the Faddeev-LeVerrier
/// recursion; coefficients from constant term to the (unit) leading term.
pub fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let id = DMatrix::<f64>::identity(n, n);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + &id * coeffs[n - k + 1];
        let am = a * &m;
        coeffs[n - k] = -am.trace() / k as f64;
    }
    coeffs
}

/// Roots of `Σ c_k x^k` (constant term first) as eigenvalues of the
/// companion matrix. Trailing (leading-order) zeros are rejected.
pub fn companion_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.len().saturating_sub(1);
    let lead = *coeffs.last().ok_or_else(|| Error::domain("empty polynomial"))?;
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::domain("polynomial leading coefficient is zero"));
    }
    if deg == 0 {
        return Ok(vec![]);
    }
    let mut c = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        c[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        c[(i, deg - 1)] = -coeffs[i] / lead;
    }
    Ok(complex_eigenvalues(&c))
}

/// Proper rotation `T` (rows form a right-handed orthonormal frame) with
/// `T n̂ = x̂`.
pub fn frame_rotation(n: &Vector3<f64>) -> Result<Matrix3<f64>> {
    let norm = n.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::domain("direction must be a nonzero finite vector"));
    }
    let e1 = n / norm;
    let helper = if e1.x.abs() <= e1.y.abs() && e1.x.abs() <= e1.z.abs() {
        Vector3::x()
    } else if e1.y.abs() <= e1.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let e2 = (helper - e1 * e1.dot(&helper)).normalize();
    let e3 = e1.cross(&e2);
    Ok(Matrix3::from_rows(&[e1.transpose(), e2.transpose(), e3.transpose()]))
}
