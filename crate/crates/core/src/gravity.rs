//! Kernel analysis of the discontinuity equations of Einstein, quadratic
//! and `f(R)` gravity on a flat background.
//!
//! A jump `π_{μν}` in the highest metric derivatives across a surface with
//! normal `φ_μ` must satisfy the harmonic-gauge rows
//! `2π^{μν}φ_μ − π φ^ν = 0` and the jumped field equations. Each theory is
//! assembled as a real matrix acting on the `D(D+1)/2` independent
//! components of `π` (`i ≤ j`); a nontrivial kernel means a discontinuity
//! can propagate on that surface. The field-equation rows are built as
//! written, without substituting the gauge identities.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{null_space, singular_values};

/// Singular values below `RANK_TOL · σ_max` count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Gravitational theory whose discontinuity equations are analyzed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Theory {
    Einstein,
    /// `p R_{μν}R^{μν} − q R²` (the jump equation is the `D = 4` one).
    Quadratic {
        p: f64,
        q: f64,
    },
    /// `f(R)` with the value of `f″` at the background.
    #[serde(rename = "f_of_r")]
    FofR {
        fpp: f64,
    },
}

impl Theory {
    fn validate(&self) -> Result<()> {
        match *self {
            Theory::Quadratic { p, q } if p == 0.0 && q == 0.0 => {
                Err(Error::ZeroCoupling("quadratic theory needs (p, q) ≠ (0, 0)".into()))
            }
            Theory::FofR { fpp: 0.0 } => Err(Error::ZeroCoupling(
                "f″ = 0 reduces f(R) to Einstein; use the Einstein operator".into(),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Theory::Einstein => f.write_str("einstein"),
            Theory::Quadratic { p, q } => write!(f, "quadratic(p={p},q={q})"),
            Theory::FofR { fpp } => write!(f, "fr(fpp={fpp})"),
        }
    }
}

impl FromStr for Theory {
    type Err = Error;

    /// Parses the bare names `einstein`, `quadratic` (p = 1, q = 0) and
    /// `fr` (f″ = 1).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "einstein" => Ok(Theory::Einstein),
            "quadratic" => Ok(Theory::Quadratic { p: 1.0, q: 0.0 }),
            "fr" | "f(r)" => Ok(Theory::FofR { fpp: 1.0 }),
            other => Err(Error::Usage(format!(
                "unknown theory `{other}` (expected einstein, quadratic or fr)"
            ))),
        }
    }
}

/// `η = diag(−1, 1, …, 1)`.
fn eta(d: usize) -> DMatrix<f64> {
    let mut g = DMatrix::identity(d, d);
    g[(0, 0)] = -1.0;
    g
}

/// Index pairs `(i, j)` with `i ≤ j`.
fn sym_index(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect()
}

fn check_covector(phi: &[f64]) -> Result<()> {
    if phi.len() < 4 {
        return Err(Error::Usage(format!("dimension {} < 4 is not supported", phi.len())));
    }
    if phi.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("covector must be finite"));
    }
    if phi.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroCovector);
    }
    Ok(())
}

/// A covector with the contractions used by every theory.
#[derive(Debug, Clone, PartialEq)]
pub struct GravityProbe {
    pub phi: DVector<f64>,
    /// `φ^μ = η^{μν}φ_ν`.
    pub phi_up: DVector<f64>,
    /// `Q = φ^λφ_λ`.
    pub q: f64,
    g: DMatrix<f64>,
}

impl GravityProbe {
    pub fn new(phi: &[f64]) -> Result<Self> {
        check_covector(phi)?;
        let d = phi.len();
        let g = eta(d);
        let phi = DVector::from_column_slice(phi);
        let phi_up = &g * &phi;
        Ok(GravityProbe {
            q: phi.dot(&phi_up),
            phi,
            phi_up,
            g,
        })
    }

    pub fn dim(&self) -> usize {
        self.phi.len()
    }

    /// `π^λ_λ`.
    pub fn trace(&self, pi: &DMatrix<f64>) -> f64 {
        (&self.g * pi).trace()
    }

    /// Gauge rows `2π^{μν}φ_μ − π φ^ν`.
    pub fn gauge(&self, pi: &DMatrix<f64>) -> DVector<f64> {
        let pi_up = &self.g * pi * &self.g;
        pi_up.transpose() * &self.phi * 2.0 - &self.phi_up * self.trace(pi)
    }

    /// `φ^λπ_{λν}`.
    fn contract(&self, pi: &DMatrix<f64>) -> DVector<f64> {
        pi.transpose() * &self.phi_up
    }

    /// `φ^σφ^τπ_{στ}`.
    fn ffpi(&self, pi: &DMatrix<f64>) -> f64 {
        self.phi_up.dot(&(pi * &self.phi_up))
    }

    /// Jump of the field equations, `δ₀E_{μν}`.
    pub fn field_jump(&self, theory: &Theory, pi: &DMatrix<f64>) -> DMatrix<f64> {
        let (phi, g, q) = (&self.phi, &self.g, self.q);
        let tr = self.trace(pi);
        let ff = self.ffpi(pi);
        let pp = phi * phi.transpose();
        match *theory {
            Theory::Einstein => {
                let c = self.contract(pi);
                let sym = phi * c.transpose() + &c * phi.transpose();
                (sym - &pp * tr - pi * q - g * (ff - q * tr)) * 0.5
            }
            Theory::Quadratic { p, q: qq } => {
                (&pp * (0.5 * (p - 2.0 * qq) * tr) - pi * (0.5 * p * q) - g * (0.5 * (0.5 * p - 2.0 * qq) * q * tr)) * q
            }
            Theory::FofR { fpp } => (g * q - pp) * ((ff - q * tr) * fpp),
        }
    }

    /// Unit basis tensor for component `(i, j)`.
    fn basis(&self, i: usize, j: usize) -> DMatrix<f64> {
        let d = self.dim();
        let mut pi = DMatrix::zeros(d, d);
        pi[(i, j)] = 1.0;
        pi[(j, i)] = 1.0;
        pi
    }

    /// Symmetric tensor from its `i ≤ j` components.
    pub fn tensor(&self, comps: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim();
        let mut pi = DMatrix::zeros(d, d);
        for (k, (i, j)) in sym_index(d).into_iter().enumerate() {
            pi[(i, j)] = comps[k];
            pi[(j, i)] = comps[k];
        }
        pi
    }

    /// Linear map from the `i ≤ j` components of `π` to the stacked gauge
    /// rows (`D`) and field-equation rows (`D(D+1)/2`).
    pub fn operator(&self, theory: &Theory) -> Result<DMatrix<f64>> {
        theory.validate()?;
        let d = self.dim();
        let idx = sym_index(d);
        let n = idx.len();
        let mut m = DMatrix::zeros(d + n, n);
        for (col, &(i, j)) in idx.iter().enumerate() {
            let pi = self.basis(i, j);
            let gauge = self.gauge(&pi);
            let e = self.field_jump(theory, &pi);
            for r in 0..d {
                m[(r, col)] = gauge[r];
            }
            for (r, &(a, b)) in idx.iter().enumerate() {
                m[(d + r, col)] = e[(a, b)];
            }
        }
        Ok(m)
    }

    /// Orthonormal basis (columns, in component coordinates) of the
    /// gauge-satisfying `π`.
    pub fn gauge_kernel(&self) -> DMatrix<f64> {
        let d = self.dim();
        let idx = sym_index(d);
        let mut m = DMatrix::zeros(d, idx.len());
        for (col, &(i, j)) in idx.iter().enumerate() {
            m.set_column(col, &self.gauge(&self.basis(i, j)));
        }
        null_space(&m, RANK_TOL)
    }

    /// Projects component vector `comps` onto the gauge kernel.
    pub fn project_to_gauge(&self, comps: &DVector<f64>) -> DVector<f64> {
        let k = self.gauge_kernel();
        &k * (k.transpose() * comps)
    }
}

pub fn einstein_operator(phi: &[f64]) -> Result<DMatrix<f64>> {
    GravityProbe::new(phi)?.operator(&Theory::Einstein)
}

pub fn quadratic_operator(p: f64, q: f64, phi: &[f64]) -> Result<DMatrix<f64>> {
    GravityProbe::new(phi)?.operator(&Theory::Quadratic { p, q })
}

pub fn fr_operator(fpp: f64, phi: &[f64]) -> Result<DMatrix<f64>> {
    GravityProbe::new(phi)?.operator(&Theory::FofR { fpp })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    NullDirection,
    NonNull,
}

/// Kernel of one assembled operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    pub dimension: usize,
    pub kernel_dim: usize,
    pub singular_values: Vec<f64>,
    pub q: f64,
    pub classification: Direction,
}

/// Assembles the operator for `theory` at `φ` and counts its kernel.
pub fn analyze(theory: &Theory, phi: &[f64]) -> Result<KernelReport> {
    let probe = GravityProbe::new(phi)?;
    let m = probe.operator(theory)?;
    let sv = singular_values(&m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * smax).count();
    let scale = probe.phi.norm_squared();
    Ok(KernelReport {
        dimension: probe.dim(),
        kernel_dim: m.ncols() - rank,
        singular_values: sv,
        q: probe.q,
        classification: if probe.q.abs() <= 1e-12 * scale {
            Direction::NullDirection
        } else {
            Direction::NonNull
        },
    })
}

/// Residuals of the gauge consequences
/// `φ_μφ^λπ_{λν} + φ_νφ^λπ_{λμ} − φ_μφ_νπ = 0` and `φφπ = ½Qπ`, relative to
/// `|φ|²|π|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals {
    pub contracted: f64,
    pub double_contracted: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.contracted.max(self.double_contracted)
    }
}

pub fn identity_checks(phi: &[f64], pi: &DMatrix<f64>) -> Result<IdentityResiduals> {
    let probe = GravityProbe::new(phi)?;
    let scale = probe.phi.norm_squared() * pi.norm();
    if scale == 0.0 {
        return Ok(IdentityResiduals {
            contracted: 0.0,
            double_contracted: 0.0,
        });
    }
    let tr = probe.trace(pi);
    let c = probe.contract(pi);
    let f = &probe.phi;
    let contracted = f * c.transpose() + &c * f.transpose() - f * f.transpose() * tr;
    let double = probe.ffpi(pi) - 0.5 * probe.q * tr;
    Ok(IdentityResiduals {
        contracted: contracted.amax() / scale,
        double_contracted: double.abs() / scale,
    })
}

/// `|tr δ₀E − c(D)·Q^k·π| / (|φ|^{2k}|π|)` for a gauge-satisfying `π`, where
/// the gauge identities predict `tr δ₀G = ((D−2)/4) Q π` for Einstein and
/// `tr δ₀E = ((1−D)/2) Q² π f″` for `f(R)`.
pub fn trace_identity_residual(theory: &Theory, phi: &[f64], pi: &DMatrix<f64>) -> Result<f64> {
    let probe = GravityProbe::new(phi)?;
    let d = probe.dim() as f64;
    let tr = probe.trace(pi);
    let e = probe.field_jump(theory, pi);
    let (predicted, power) = match *theory {
        Theory::Einstein => ((d - 2.0) / 4.0 * probe.q * tr, 1),
        Theory::FofR { fpp } => ((1.0 - d) / 2.0 * probe.q * probe.q * tr * fpp, 2),
        Theory::Quadratic { .. } => return Err(Error::Usage("trace identity is defined for einstein and fr".into())),
    };
    let scale = probe.phi.norm_squared().powi(power) * pi.norm().max(f64::MIN_POSITIVE);
    Ok((probe.trace(&e) - predicted).abs() / scale)
}

/// Uniform `[−1, 1]^D` covector with `|Q| > 0.1`.
pub fn random_nonnull<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let phi: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let q: f64 = -phi[0] * phi[0] + phi[1..].iter().map(|x| x * x).sum::<f64>();
        if q.abs() > 0.1 {
            return phi;
        }
    }
}

/// Null covector `(|v|, v)` with `v` uniform in `[−1, 1]^{D−1}`.
pub fn random_null<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (1..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            let mut phi = vec![n];
            phi.extend(v);
            return phi;
        }
    }
}

/// Histograms of kernel dimensions over random null and non-null normals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GravityReport {
    pub schema: String,
    pub theory: Theory,
    #[serde(rename = "D")]
    pub d: usize,
    pub trials: usize,
    pub null_kernel_dims: BTreeMap<usize, usize>,
    pub nonnull_kernel_dims: BTreeMap<usize, usize>,
}

impl GravityReport {
    pub fn null_min(&self) -> usize {
        self.null_kernel_dims.keys().next().copied().unwrap_or(0)
    }

    pub fn nonnull_max(&self) -> usize {
        self.nonnull_kernel_dims.keys().next_back().copied().unwrap_or(0)
    }
}

pub fn monte_carlo<R: Rng + ?Sized>(theory: &Theory, d: usize, trials: usize, rng: &mut R) -> Result<GravityReport> {
    if trials == 0 {
        return Err(Error::Usage("trials must be positive".into()));
    }
    let mut null_kernel_dims = BTreeMap::new();
    let mut nonnull_kernel_dims = BTreeMap::new();
    for _ in 0..trials {
        let k = analyze(theory, &random_null(rng, d))?.kernel_dim;
        *null_kernel_dims.entry(k).or_insert(0) += 1;
        let k = analyze(theory, &random_nonnull(rng, d))?.kernel_dim;
        *nonnull_kernel_dims.entry(k).or_insert(0) += 1;
    }
    Ok(GravityReport {
        schema: crate::ce::REPORT_SCHEMA.to_string(),
        theory: *theory,
        d,
        trials,
        null_kernel_dims,
        nonnull_kernel_dims,
    })
}
