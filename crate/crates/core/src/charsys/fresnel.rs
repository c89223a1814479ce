use std::io::Write;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::Serialize;

use super::{minkowski, quadratic_roots, Cone, FieldBackground};
use crate::ce::{kpr, strong_pair};
use crate::error::{Error, Result};
use crate::jets::Jet3;
use crate::lagrangians::{Kind, LagrangianModel};

/// Relative coincidence tolerance for roots: `|rᵢ − rⱼ| < 1e−8·(1 + max|r|)`.
pub const COINCIDENCE_TOL: f64 = 1e-8;

/// Fresnel quartic `H = K u² + P u𝒢 + R 𝒢²` of an `L(α, β)` background,
/// with `u = U^μU_μ`, `U^μ = F^{λμ}p_λ` and `𝒢 = p·p`.
///
/// In components `U⁰ = −E·p⃗` and `U⃗ = p₀E + B×p⃗`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelCone {
    pub e: Vector3<f64>,
    pub b: Vector3<f64>,
    pub k: f64,
    pub p: f64,
    pub r: f64,
    /// `P² − 4KR`, evaluated as the sum of squares `¼vec1² + 4vec2²`.
    pub delta: f64,
    /// Magnitude of the coefficients before cancellation.
    coefficient_scale: f64,
}

impl FresnelCone {
    /// Builds the cone from a jet in `(α, β)` (a one-variable jet in `α`
    /// works too: the `β` partials are zero).
    pub fn from_jet(bg: &FieldBackground, jet: &Jet3) -> Result<Self> {
        let FieldBackground::Vector { e, b } = *bg else {
            return Err(Error::domain("Fresnel cone needs an electromagnetic background"));
        };
        let (a, bt) = (bg.alpha(), bg.beta());
        let (la, laa, lab, lbb) = (
            jet.partial(1, 0),
            jet.partial(2, 0),
            jet.partial(1, 1),
            jet.partial(0, 2),
        );
        let [k, p, r] = kpr(a, bt, la, laa, lab, lbb);
        let [v1, v2] = strong_pair(a, bt, la, laa, lab, lbb);
        let s = la.abs() + (laa.abs() + lab.abs() + lbb.abs()) * (1.0 + a.abs() + bt.abs());
        Ok(FresnelCone {
            e: Vector3::from(e),
            b: Vector3::from(b),
            k,
            p,
            r,
            delta: 0.25 * v1 * v1 + 4.0 * v2 * v2,
            coefficient_scale: s * s,
        })
    }

    /// Light cone of Maxwell theory, `H = 𝒢²/4`.
    pub fn maxwell(e: [f64; 3], b: [f64; 3]) -> Self {
        FresnelCone {
            e: Vector3::from(e),
            b: Vector3::from(b),
            k: 0.0,
            p: 0.0,
            r: 0.25,
            delta: 0.0,
            coefficient_scale: 0.25,
        }
    }

    fn split(p: &[f64; 4]) -> (f64, Vector3<f64>) {
        (p[0], Vector3::new(p[1], p[2], p[3]))
    }

    /// `u = U^μU_μ`.
    pub fn u(&self, p: &[f64; 4]) -> f64 {
        let (p0, pv) = Self::split(p);
        let v = self.e * p0 + self.b.cross(&pv);
        let u0 = self.e.dot(&pv);
        v.norm_squared() - u0 * u0
    }

    /// Coefficients `(u₀, u₁, u₂)` of `u` as a polynomial in `p₀` at `p⃗ = n̂`.
    fn u_poly(&self, n: &Vector3<f64>) -> [f64; 3] {
        let bn = self.b.cross(n);
        let en = self.e.dot(n);
        [
            bn.norm_squared() - en * en,
            2.0 * self.e.dot(&bn),
            self.e.norm_squared(),
        ]
    }

    /// The two quadratic sheets `aᵢu + bᵢ𝒢` whose product is `H` up to a
    /// constant. Rays must follow a sheet: where the sheets coincide `H` is
    /// a perfect square and its gradient vanishes on the cone.
    pub fn sheets(&self) -> Result<[FresnelSheet; 2]> {
        Ok(self.factors()?.map(|(a, b)| FresnelSheet {
            e: self.e,
            b: self.b,
            cu: a,
            cg: b,
        }))
    }

    /// The sheet on which `p` lies most closely.
    pub fn sheet_for(&self, p: &[f64; 4]) -> Result<FresnelSheet> {
        let [s1, s2] = self.sheets()?;
        let rel = |s: &FresnelSheet| s.value(p).abs() / s.scale(p).max(f64::MIN_POSITIVE);
        Ok(if rel(&s1) <= rel(&s2) { s1 } else { s2 })
    }

    /// Factors `(a, b)` with `H ∝ (a₁u + b₁𝒢)(a₂u + b₂𝒢)`.
    fn factors(&self) -> Result<[(f64, f64); 2]> {
        let (k, p, r) = (self.k, self.p, self.r);
        let size = k.abs() + p.abs() + r.abs();
        if size <= 1e-14 * self.coefficient_scale || size == 0.0 {
            return Err(Error::DegenerateQuartic(
                "K, P and R all vanish; propagation is undetermined".into(),
            ));
        }
        let q = -0.5 * (p + p.signum() * self.delta.max(0.0).sqrt());
        if q.abs() <= 1e-14 * size {
            return Ok(if k.abs() >= r.abs() {
                [(1.0, 0.0), (1.0, 0.0)]
            } else {
                [(0.0, 1.0), (0.0, 1.0)]
            });
        }
        Ok([(k, -q), (q, -r)])
    }
}

impl Cone for FresnelCone {
    fn value(&self, p: &[f64; 4]) -> f64 {
        let (u, g) = (self.u(p), minkowski(p));
        self.k * u * u + self.p * u * g + self.r * g * g
    }

    fn grad_p(&self, p: &[f64; 4]) -> [f64; 4] {
        let (u, g) = (self.u(p), minkowski(p));
        combine_grad(
            &self.e,
            &self.b,
            p,
            2.0 * self.k * u + self.p * g,
            self.p * u + 2.0 * self.r * g,
        )
    }

    fn degree(&self) -> u32 {
        4
    }

    fn scale(&self, p: &[f64; 4]) -> f64 {
        let f = (self.e.norm() + self.b.norm()).powi(2);
        let p2: f64 = p.iter().map(|x| x * x).sum();
        (self.k.abs() * f * f + self.p.abs() * f + self.r.abs()) * p2 * p2
    }

    fn roots_p0(&self, n: &Vector3<f64>) -> Result<Vec<Complex64>> {
        let n = n.normalize();
        let [u0, u1, u2] = self.u_poly(&n);
        let f = self.e.norm_squared() + self.b.norm_squared();
        let mut roots = Vec::with_capacity(4);
        for (a, b) in self.factors()? {
            let (c2, c1, c0) = (a * u2 - b, a * u1, a * u0 + b);
            if c2.abs() <= 1e-14 * (a.abs() * (1.0 + f) + b.abs()) {
                return Err(Error::DegenerateQuartic(
                    "a factor of H loses its p₀² term (root at infinity)".into(),
                ));
            }
            roots.extend(quadratic_roots(c2, c1, c0));
        }
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(roots)
    }
}

/// `∂H/∂p` for `H(u, 𝒢)` given `∂H/∂u` and `∂H/∂𝒢`.
fn combine_grad(e: &Vector3<f64>, b: &Vector3<f64>, p: &[f64; 4], hu: f64, hg: f64) -> [f64; 4] {
    let (p0, pv) = FresnelCone::split(p);
    let v = e * p0 + b.cross(&pv);
    let du0 = 2.0 * e.dot(&v);
    let du = v.cross(b) * 2.0 - e * (2.0 * e.dot(&pv));
    [
        hu * du0 - hg * 2.0 * p0,
        hu * du.x + hg * 2.0 * pv.x,
        hu * du.y + hg * 2.0 * pv.y,
        hu * du.z + hg * 2.0 * pv.z,
    ]
}

/// One quadratic factor `cu·u + cg·𝒢` of a Fresnel quartic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelSheet {
    pub e: Vector3<f64>,
    pub b: Vector3<f64>,
    pub cu: f64,
    pub cg: f64,
}

impl FresnelSheet {
    fn u(&self, p: &[f64; 4]) -> f64 {
        let (p0, pv) = FresnelCone::split(p);
        let v = self.e * p0 + self.b.cross(&pv);
        let u0 = self.e.dot(&pv);
        v.norm_squared() - u0 * u0
    }
}

impl Cone for FresnelSheet {
    fn value(&self, p: &[f64; 4]) -> f64 {
        self.cu * self.u(p) + self.cg * minkowski(p)
    }

    fn grad_p(&self, p: &[f64; 4]) -> [f64; 4] {
        combine_grad(&self.e, &self.b, p, self.cu, self.cg)
    }

    fn degree(&self) -> u32 {
        2
    }

    fn scale(&self, p: &[f64; 4]) -> f64 {
        let f = (self.e.norm() + self.b.norm()).powi(2);
        let p2: f64 = p.iter().map(|x| x * x).sum();
        (self.cu.abs() * f + self.cg.abs()) * p2
    }

    fn roots_p0(&self, n: &Vector3<f64>) -> Result<Vec<Complex64>> {
        let n = n.normalize();
        let cone = FresnelCone::maxwell(self.e.into(), self.b.into());
        let [u0, u1, u2] = cone.u_poly(&n);
        let (c2, c1, c0) = (self.cu * u2 - self.cg, self.cu * u1, self.cu * u0 + self.cg);
        let f = self.e.norm_squared() + self.b.norm_squared();
        if c2.abs() <= 1e-14 * (self.cu.abs() * (1.0 + f) + self.cg.abs()) {
            return Err(Error::DegenerateQuartic(
                "sheet loses its p₀² term (root at infinity)".into(),
            ));
        }
        Ok(quadratic_roots(c2, c1, c0))
    }
}

/// Coefficients of `H(p₀, n̂)` as a quartic in `p₀`, constant term first.
/// Solving it with [`crate::linalg::companion_roots`] is an independent
/// route to the roots of [`fresnel_roots`].
pub fn fresnel_quartic(cone: &FresnelCone, n: &Vector3<f64>) -> [f64; 5] {
    let u = cone.u_poly(&n.normalize());
    let g = [1.0, 0.0, -1.0];
    let mul = |x: &[f64; 3], y: &[f64; 3]| {
        let mut out = [0.0; 5];
        for i in 0..3 {
            for j in 0..3 {
                out[i + j] += x[i] * y[j];
            }
        }
        out
    };
    let (uu, ug, gg) = (mul(&u, &u), mul(&u, &g), mul(&g, &g));
    std::array::from_fn(|i| cone.k * uu[i] + cone.p * ug[i] + cone.r * gg[i])
}

/// Roots of the Fresnel quartic in `p₀` for `p⃗ = n̂` and their coincidence
/// structure.
#[derive(Debug, Clone, PartialEq)]
pub struct FresnelRoots {
    /// Four roots sorted by real part.
    pub roots: Vec<Complex64>,
    /// `|r₁ − r₀|` and `|r₃ − r₂|`.
    pub pair_gaps: [f64; 2],
    /// For each root, the index of another root within tolerance.
    pub coincident_with: [Option<usize>; 4],
    /// True if some pair is split beyond tolerance.
    pub birefringent: bool,
    /// Largest imaginary part.
    pub max_imag: f64,
}

impl FresnelRoots {
    fn from_roots(roots: Vec<Complex64>) -> Self {
        let max = roots.iter().fold(0.0f64, |m, r| m.max(r.norm()));
        let tol = COINCIDENCE_TOL * (1.0 + max);
        let pair_gaps = [(roots[1] - roots[0]).norm(), (roots[3] - roots[2]).norm()];
        let coincident_with = std::array::from_fn(|i| {
            (0..4)
                .filter(|&j| j != i)
                .map(|j| (j, (roots[i] - roots[j]).norm()))
                .filter(|&(_, d)| d < tol)
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(j, _)| j)
        });
        FresnelRoots {
            birefringent: pair_gaps.iter().any(|&g| g > tol),
            max_imag: roots.iter().fold(0.0f64, |m, r| m.max(r.im.abs())),
            roots,
            pair_gaps,
            coincident_with,
        }
    }

    /// Real parts of the roots.
    pub fn real(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.re).collect()
    }
}

/// Solves `H(p₀, n̂) = 0` for the four characteristic frequencies.
///
/// `H` is factored as a binary quadratic form in `(u, 𝒢)`, using the
/// sum-of-squares discriminant, and each factor is solved as a quadratic in
/// `p₀`. Exact double roots therefore stay double to rounding, which a
/// direct quartic solve cannot guarantee.
pub fn fresnel_roots(jet: &Jet3, bg: &FieldBackground, n: &Vector3<f64>) -> Result<FresnelRoots> {
    let cone = FresnelCone::from_jet(bg, jet)?;
    Ok(FresnelRoots::from_roots(cone.roots_p0(n)?))
}

/// One root of one scan sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FresnelRow {
    pub model: String,
    pub ex: f64,
    pub ey: f64,
    pub ez: f64,
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
    pub nx: f64,
    pub ny: f64,
    pub nz: f64,
    pub root_index: usize,
    pub p0: f64,
    pub p0_imag: f64,
    pub coincident_with: Option<usize>,
    pub birefringent_flag: bool,
}

/// Fresnel roots of `model` over a list of `(background, direction)` samples,
/// four rows per sample.
pub fn fresnel_scan(model: &LagrangianModel, samples: &[(FieldBackground, Vector3<f64>)]) -> Result<Vec<FresnelRow>> {
    if model.kind() == Kind::Scalar {
        return Err(Error::Usage("fresnel needs an electrodynamics model".into()));
    }
    let mut rows = Vec::with_capacity(4 * samples.len());
    for (bg, n) in samples {
        let FieldBackground::Vector { e, b } = *bg else {
            return Err(Error::domain("Fresnel scan needs electromagnetic backgrounds"));
        };
        let jet = model.jet(&bg.invariant_point(model.kind()))?;
        let fr = fresnel_roots(&jet, bg, n)?;
        let n = n.normalize();
        for (i, r) in fr.roots.iter().enumerate() {
            rows.push(FresnelRow {
                model: model.name().to_string(),
                ex: e[0],
                ey: e[1],
                ez: e[2],
                bx: b[0],
                by: b[1],
                bz: b[2],
                nx: n.x,
                ny: n.y,
                nz: n.z,
                root_index: i,
                p0: r.re,
                p0_imag: r.im,
                coincident_with: fr.coincident_with[i],
                birefringent_flag: fr.birefringent,
            });
        }
    }
    Ok(rows)
}

pub fn write_fresnel_csv<W: Write>(rows: &[FresnelRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
