//! Completely-exceptional (CE) conditions and Lagrangian classification.
//!
//! Every residual is reported both raw and normalized. The normalization
//! divides by the sum of absolute values of the fully expanded monomials
//! making up the residual (plus `1e-300`), so "vanishes" has a scale-free
//! meaning: a normalized residual near `1e-16` is pure rounding.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{InvariantPoint, Jet3};
use crate::lagrangians::{Kind, LagrangianModel};

/// Floor added to every normalization denominator.
pub const NORM_FLOOR: f64 = 1e-300;

/// A residual together with the scale it is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub raw: f64,
    pub scale: f64,
}

impl Residual {
    pub fn normalized(&self) -> f64 {
        self.raw.abs() / (self.scale + NORM_FLOOR)
    }
}

impl From<Tracked> for Residual {
    fn from(t: Tracked) -> Self {
        Residual {
            raw: t.value,
            scale: t.abs,
        }
    }
}

/// Number that carries, alongside its value, the sum of absolute values of
/// the monomials it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Tracked {
    pub value: f64,
    pub abs: f64,
}

impl Add for Tracked {
    type Output = Tracked;
    fn add(self, o: Tracked) -> Tracked {
        Tracked {
            value: self.value + o.value,
            abs: self.abs + o.abs,
        }
    }
}

impl Sub for Tracked {
    type Output = Tracked;
    fn sub(self, o: Tracked) -> Tracked {
        Tracked {
            value: self.value - o.value,
            abs: self.abs + o.abs,
        }
    }
}

impl Mul for Tracked {
    type Output = Tracked;
    fn mul(self, o: Tracked) -> Tracked {
        Tracked {
            value: self.value * o.value,
            abs: self.abs * o.abs,
        }
    }
}

impl Neg for Tracked {
    type Output = Tracked;
    fn neg(self) -> Tracked {
        Tracked {
            value: -self.value,
            abs: self.abs,
        }
    }
}

/// Commutative ring operations shared by `f64`, [`Tracked`], [`Jet3`] and
/// first-order duals over any of them.
pub(crate) trait Ring:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn lift(v: f64) -> Self;
}

impl Ring for f64 {
    fn lift(v: f64) -> Self {
        v
    }
}

impl Ring for Tracked {
    fn lift(v: f64) -> Self {
        Tracked { value: v, abs: v.abs() }
    }
}

impl Ring for Jet3 {
    fn lift(v: f64) -> Self {
        Jet3::constant(v)
    }
}

/// First-order dual number in `(α, β)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Dual2<T> {
    pub v: T,
    pub da: T,
    pub db: T,
}

impl<T: Ring> Add for Dual2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual2 {
            v: self.v + o.v,
            da: self.da + o.da,
            db: self.db + o.db,
        }
    }
}

impl<T: Ring> Sub for Dual2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual2 {
            v: self.v - o.v,
            da: self.da - o.da,
            db: self.db - o.db,
        }
    }
}

impl<T: Ring> Mul for Dual2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual2 {
            v: self.v * o.v,
            da: self.da * o.v + self.v * o.da,
            db: self.db * o.v + self.v * o.db,
        }
    }
}

impl<T: Ring> Neg for Dual2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual2 {
            v: -self.v,
            da: -self.da,
            db: -self.db,
        }
    }
}

impl<T: Ring> Ring for Dual2<T> {
    fn lift(v: f64) -> Self {
        Dual2 {
            v: T::lift(v),
            da: T::lift(0.0),
            db: T::lift(0.0),
        }
    }
}

/// The partial derivatives of `L(α, β)` through third order at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBetaPartials {
    pub alpha: f64,
    pub beta: f64,
    pub l_a: f64,
    pub l_b: f64,
    pub l_aa: f64,
    pub l_ab: f64,
    pub l_bb: f64,
    pub l_aaa: f64,
    pub l_aab: f64,
    pub l_abb: f64,
    pub l_bbb: f64,
}

impl AlphaBetaPartials {
    /// Reads partials from a jet in `(α, β)`; an `L(α)` jet has all
    /// β-partials zero.
    pub fn from_jet(jet: &Jet3, alpha: f64, beta: f64) -> Self {
        AlphaBetaPartials {
            alpha,
            beta,
            l_a: jet.partial(1, 0),
            l_b: jet.partial(0, 1),
            l_aa: jet.partial(2, 0),
            l_ab: jet.partial(1, 1),
            l_bb: jet.partial(0, 2),
            l_aaa: jet.partial(3, 0),
            l_aab: jet.partial(2, 1),
            l_abb: jet.partial(1, 2),
            l_bbb: jet.partial(0, 3),
        }
    }

    fn lifted<T: Ring>(&self) -> [T; 10] {
        [
            self.alpha, self.beta, self.l_a, self.l_aa, self.l_ab, self.l_bb, self.l_aaa, self.l_aab, self.l_abb,
            self.l_bbb,
        ]
        .map(T::lift)
    }

    /// Lifts to first-order duals so that `K, P, R` computed from them carry
    /// their α- and β-derivatives.
    fn duals<T: Ring>(&self) -> [Dual2<T>; 6] {
        let [a, b, la, laa, lab, lbb, laaa, laab, labb, lbbb] = self.lifted::<T>();
        let (zero, one) = (T::lift(0.0), T::lift(1.0));
        [
            Dual2 {
                v: a,
                da: one,
                db: zero,
            },
            Dual2 {
                v: b,
                da: zero,
                db: one,
            },
            Dual2 {
                v: la,
                da: laa,
                db: lab,
            },
            Dual2 {
                v: laa,
                da: laaa,
                db: laab,
            },
            Dual2 {
                v: lab,
                da: laab,
                db: labb,
            },
            Dual2 {
                v: lbb,
                da: labb,
                db: lbbb,
            },
        ]
    }
}

/// `K, P, R` of the Fresnel quartic `H = K u² + P u𝒢 + R 𝒢²`.
pub(crate) fn kpr<T: Ring>(a: T, b: T, la: T, laa: T, lab: T, lbb: T) -> [T; 3] {
    let half = T::lift(0.5);
    let quarter = T::lift(0.25);
    let two = T::lift(2.0);
    let k = laa * lbb - lab * lab;
    let p = two * la * (laa + quarter * lbb) - a * k;
    let r = la * (la + two * b * lab - half * a * lbb) - b * b * k;
    [k, p, r]
}

/// Strong-CE polynomials `(−L_α(4L_αα − L_ββ) + 2αK, −L_α L_αβ + βK)`.
pub(crate) fn strong_pair<T: Ring>(a: T, b: T, la: T, laa: T, lab: T, lbb: T) -> [T; 2] {
    let k = laa * lbb - lab * lab;
    let v1 = -(la * (T::lift(4.0) * laa - lbb)) + T::lift(2.0) * a * k;
    let v2 = -(la * lab) + b * k;
    [v1, v2]
}

/// Auxiliary combinations of the `L(α, β)` characteristic analysis at one
/// point, with first derivatives of `K, P, R` from jet arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VectorCharData {
    pub partials: AlphaBetaPartials,
    pub k: f64,
    pub cap_p: f64,
    pub cap_r: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    /// Discriminant over `𝒢²`.
    pub delta: f64,
    pub k_a: f64,
    pub k_b: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub r_a: f64,
    pub r_b: f64,
}

impl VectorCharData {
    /// Builds the data from a jet in `(α, β)`.
    ///
    /// `K, P, R` are evaluated on the derivative jets `L_α, L_αα, ...`, so
    /// their first partials come out of the same arithmetic.
    pub fn from_jet(jet: &Jet3, alpha: f64, beta: f64) -> Self {
        let la = jet.derivative(0);
        let lb = jet.derivative(1);
        let laa = la.derivative(0);
        let lab = la.derivative(1);
        let lbb = lb.derivative(1);
        let a = Jet3::variable(0, alpha);
        let b = Jet3::variable(1, beta);
        let [k, cp, cr] = kpr(a, b, la, laa, lab, lbb);
        Self::assemble(
            AlphaBetaPartials::from_jet(jet, alpha, beta),
            [k, cp, cr].map(|j| [j.value(), j.partial(1, 0), j.partial(0, 1)]),
        )
    }

    /// Builds the data from raw partials (e.g. synthetic jets).
    pub fn from_partials(partials: AlphaBetaPartials) -> Self {
        let [a, b, la, laa, lab, lbb] = partials.duals::<f64>();
        let combos = kpr(a, b, la, laa, lab, lbb);
        Self::assemble(partials, combos.map(|d| [d.v, d.da, d.db]))
    }

    fn assemble(partials: AlphaBetaPartials, kpr: [[f64; 3]; 3]) -> Self {
        let pt = &partials;
        let [v1, v2] = strong_pair(pt.alpha, pt.beta, pt.l_a, pt.l_aa, pt.l_ab, pt.l_bb);
        VectorCharData {
            partials,
            k: kpr[0][0],
            cap_p: kpr[1][0],
            cap_r: kpr[2][0],
            p: 2.0 * pt.l_aa,
            q: pt.l_a + pt.beta * pt.l_ab,
            r: pt.l_ab,
            s: 0.5 * pt.beta * pt.l_bb,
            delta: 0.25 * v1 * v1 + 4.0 * v2 * v2,
            k_a: kpr[0][1],
            k_b: kpr[0][2],
            p_a: kpr[1][1],
            p_b: kpr[1][2],
            r_a: kpr[2][1],
            r_b: kpr[2][2],
        }
    }
}

/// `L′L‴ − 3L″²` for a one-variable jet (in `z`, or in `α` for `L(α)`).
pub fn scalar_ce_residual(jet: &Jet3) -> Residual {
    let t = |v: f64| Tracked::lift(v);
    let (l1, l2, l3) = (t(jet.partial(1, 0)), t(jet.partial(2, 0)), t(jet.partial(3, 0)));
    (l1 * l3 - t(3.0) * l2 * l2).into()
}

/// Strong-CE residuals at `(α, β)` for a jet in `(α, β)`.
pub fn strong_ce_residuals(jet: &Jet3, alpha: f64, beta: f64) -> [Residual; 2] {
    let p = AlphaBetaPartials::from_jet(jet, alpha, beta);
    strong_from_partials(&p)
}

fn strong_from_partials(p: &AlphaBetaPartials) -> [Residual; 2] {
    let [a, b, la, laa, lab, lbb, ..] = p.lifted::<Tracked>();
    strong_pair(a, b, la, laa, lab, lbb).map(Residual::from)
}

/// Discriminant of the Fresnel quadratic form over `𝒢²`, as a sum of two
/// squares (nonnegative by construction).
pub fn discriminant(jet: &Jet3, alpha: f64, beta: f64) -> f64 {
    let [v1, v2] = strong_ce_residuals(jet, alpha, beta);
    0.25 * v1.raw * v1.raw + 4.0 * v2.raw * v2.raw
}

/// Relative threshold below which `K` or the discriminant count as zero.
pub const DEGENERACY_TOL: f64 = 1e-12;

fn degeneracy_check(p: &AlphaBetaPartials, tol: f64) -> Result<()> {
    let [_, _, _, laa, lab, lbb, ..] = p.lifted::<Tracked>();
    let k = laa * lbb - lab * lab;
    if k.value.abs() <= tol * k.abs {
        return Err(Error::Degeneracy(format!(
            "K = {:e} vanishes at (α, β) = ({}, {})",
            k.value, p.alpha, p.beta
        )));
    }
    let [v1, v2] = strong_from_partials(p);
    let delta = 0.25 * v1.raw * v1.raw + 4.0 * v2.raw * v2.raw;
    let scale = 0.25 * v1.scale * v1.scale + 4.0 * v2.scale * v2.scale;
    if delta <= tol * scale {
        return Err(Error::Degeneracy(format!(
            "discriminant {delta:e} vanishes at (α, β) = ({}, {}); strong-CE branch applies",
            p.alpha, p.beta
        )));
    }
    Ok(())
}

fn tar_pair<T: Ring>(p: &AlphaBetaPartials) -> [T; 2] {
    let [a, b, la, laa, lab, lbb] = p.duals::<T>();
    let [k, cp, cr] = kpr(a, b, la, laa, lab, lbb);
    let (ka, kb, pa, pb, ra, rb) = (k.da, k.db, cp.da, cp.db, cr.da, cr.db);
    let (k, cp, cr) = (k.v, cp.v, cr.v);
    let c = T::lift;
    let sp = c(2.0) * laa.v;
    let q = la.v + b.v * lab.v;
    let r = lab.v;
    let s = c(0.5) * b.v * lbb.v;
    let k2 = k * k;
    let t3 = c(2.0) * ka * (r * cp * cp - s * cp * k - r * cr * k)
        + kb * (q * cp * k - sp * cp * cp + sp * cr * k)
        + c(2.0) * pa * (s * k2 - r * cp * k)
        + k * pb * (sp * cp - q * k)
        + c(2.0) * ra * (r * k2)
        - rb * (sp * k2)
        - c(2.0) * r * cp * k2
        + c(4.0) * s * k2 * k;
    let t4 = c(2.0) * ka * (r * cp * cr - s * cr * k) + kb * (q * cr * k - sp * cr * cp) - c(2.0) * pa * (r * cr * k)
        + pb * (sp * k * cr)
        + c(2.0) * ra * (s * k2)
        - rb * (q * k2)
        - c(4.0) * r * cr * k2
        + c(2.0) * s * cp * k2;
    [t3, t4]
}

/// General (non-birefringent-branch) CE conditions, written in terms of
/// `K, P, R`, their first derivatives and `p, q, r, s`.
///
/// Fails with [`Error::Degeneracy`] when `K` or the discriminant vanish,
/// where the strong-CE conditions apply instead.
pub fn general_ce_residuals(data: &VectorCharData) -> Result<[Residual; 2]> {
    general_ce_residuals_with(data, DEGENERACY_TOL)
}

pub fn general_ce_residuals_with(data: &VectorCharData, tol: f64) -> Result<[Residual; 2]> {
    degeneracy_check(&data.partials, tol)?;
    Ok(tar_pair::<Tracked>(&data.partials).map(Residual::from))
}

/// The same two CE conditions fully expanded in `L` and its partials.
pub fn expanded_ce_residuals(jet: &Jet3, alpha: f64, beta: f64) -> Result<[Residual; 2]> {
    expanded_ce_residuals_from_partials(&AlphaBetaPartials::from_jet(jet, alpha, beta), DEGENERACY_TOL)
}

pub fn expanded_ce_residuals_from_partials(p: &AlphaBetaPartials, tol: f64) -> Result<[Residual; 2]> {
    degeneracy_check(p, tol)?;
    let [a, b, la, laa, lab, lbb, laaa, laab, labb, lbbb] = p.lifted::<Tracked>();
    let c = Tracked::lift;
    let k = laa * lbb - lab * lab;
    let k2 = k * k;
    let sq = |x: Tracked| x * x;
    let cube = |x: Tracked| x * x * x;
    let m1 = c(1.5)
        * la
        * labb
        * (la * (c(16.0) * cube(laa) * lab + c(8.0) * laa * cube(lab) + cube(lab) * lbb)
            - k * (c(8.0) * a * sq(laa) * lab + b * (c(8.0) * laa * sq(lab) + c(4.0) * sq(laa) * lbb + sq(lab) * lbb)))
        + c(0.5)
            * la
            * laaa
            * (la * lab * (c(16.0) * laa * sq(lab) + c(8.0) * sq(lab) * lbb + cube(lbb))
                - k * (c(8.0) * a * cube(lab) + b * lbb * (c(12.0) * sq(lab) + sq(lbb))))
        - c(1.5)
            * la
            * lab
            * laab
            * (la * lab * (c(16.0) * sq(laa) + c(4.0) * sq(lab) + c(4.0) * laa * lbb + sq(lbb))
                - k * (c(8.0) * a * laa * lab + b * (c(4.0) * sq(lab) + c(8.0) * laa * lbb + sq(lbb))))
        - c(0.5)
            * la
            * lbbb
            * (la * (c(16.0) * sq(sq(laa)) + c(12.0) * sq(laa) * sq(lab) + sq(sq(lab)) - c(4.0) * cube(laa) * lbb)
                - k * (c(8.0) * a * cube(laa) + b * lab * (c(12.0) * sq(laa) + sq(lab))))
        - c(1.5) * (c(4.0) * laa + lbb) * k2 * (la * lab - b * k);
    let m2 = -c(1.5)
        * la
        * laab
        * ((c(4.0) * laa + lbb) * (c(2.0) * sq(la) * sq(lab) - a * la * sq(lab) * lbb)
            + b * la * lab * (c(16.0) * laa * sq(lab) + c(6.0) * sq(lab) * lbb - c(2.0) * laa * sq(lbb))
            - b * k
                * (-(a * lab * sq(lbb))
                    + c(2.0) * b * (c(4.0) * laa * sq(lab) + c(2.0) * sq(lab) * lbb + laa * sq(lbb))))
        + c(1.5)
            * la
            * labb
            * ((c(4.0) * sq(laa) + sq(lab)) * (c(2.0) * sq(la) * lab - a * la * lab * lbb)
                - b * k * lab * (-(a * lab * lbb) + c(2.0) * b * (c(4.0) * sq(laa) + sq(lab) + c(2.0) * laa * lbb))
                + c(2.0)
                    * b
                    * la
                    * (c(8.0) * sq(laa) * sq(lab) + c(2.0) * sq(sq(lab)) + laa * lbb * sq(lab) - sq(laa) * sq(lbb)))
        + c(0.5)
            * la
            * laaa
            * ((c(4.0) * sq(lab) + sq(lbb)) * (c(2.0) * sq(la) * lab - a * la * lab * lbb)
                + b * la * (c(16.0) * sq(sq(lab)) + c(6.0) * sq(lab) * sq(lbb) - c(2.0) * laa * cube(lbb))
                - b * k * (c(8.0) * b * cube(lab) + c(6.0) * b * lab * sq(lbb) - a * cube(lbb)))
        - c(0.5)
            * la
            * lbbb
            * (c(2.0) * sq(la) * laa * (c(4.0) * sq(laa) + c(2.0) * sq(lab) - laa * lbb)
                + c(2.0) * b * la * laa * lab * (c(8.0) * sq(laa) + c(5.0) * sq(lab) - c(3.0) * laa * lbb)
                - b * k * (c(8.0) * b * cube(laa) + c(6.0) * b * laa * sq(lab) - a * cube(lab))
                - a * la * (sq(sq(lab)) + c(4.0) * cube(laa) * lbb))
        - c(1.5) * k2 * (c(4.0) * la + c(4.0) * b * lab - a * lbb) * (la * lab - b * k);
    Ok([m1.into(), m2.into()])
}

/// Step used for the `z`-differencing in [`coupling_residuals`].
pub const COUPLING_STEP: f64 = 1e-5;

/// Mixed couplings `(L_zα, L_zβ)` of an `L(α, β, z)` model, normalized by
/// `|L_zX| + √|L_XX L_zz|` (the Cauchy-Schwarz scale of the Hessian block).
pub fn coupling_residuals(model: &LagrangianModel, point: &InvariantPoint) -> Result<[Residual; 2]> {
    if model.kind() != Kind::VectorScalar {
        return Err(Error::Usage(format!(
            "coupling residuals need an alpha-beta-z model, got {}",
            model.kind()
        )));
    }
    let (a, b, z) = (point.alpha(), point.beta(), point.z());
    let at = |dz: f64| -> Result<(f64, f64)> {
        let j = model.jet(&InvariantPoint::AlphaBetaZ {
            alpha: a,
            beta: b,
            z: z + dz,
        })?;
        Ok((j.partial(1, 0), j.partial(0, 1)))
    };
    let central = |h: f64| -> Result<(f64, f64)> {
        let (pa, pb) = at(h)?;
        let (ma, mb) = at(-h)?;
        Ok(((pa - ma) / (2.0 * h), (pb - mb) / (2.0 * h)))
    };
    let h = COUPLING_STEP;
    let (da1, db1) = central(h)?;
    let (da2, db2) = central(h / 2.0)?;
    let lza = (4.0 * da2 - da1) / 3.0;
    let lzb = (4.0 * db2 - db1) / 3.0;
    let jab = model.jet(point)?;
    let lzz = model.jet_in_z(point)?.partial(2, 0);
    let res = |m: f64, diag: f64| Residual {
        raw: m,
        scale: m.abs() + (diag * lzz).abs().sqrt(),
    };
    Ok([res(lza, jab.partial(2, 0)), res(lzb, jab.partial(0, 2))])
}

/// Classification outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    StronglyCE,
    CE,
    Degenerate,
    NotCE,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::StronglyCE => "StronglyCE",
            Label::CE => "CE",
            Label::Degenerate => "Degenerate",
            Label::NotCE => "NotCE",
        })
    }
}

/// One sampled axis of a classification grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(name: &str, lo: f64, hi: f64, n: usize) -> Self {
        Axis {
            name: name.to_string(),
            lo,
            hi,
            n,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.n {
            0 => vec![],
            1 => vec![0.5 * (self.lo + self.hi)],
            n => (0..n)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

/// Rectangular grid in invariant space, e.g. `"a:-0.5:2:21,b:-1:1:21"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub axes: Vec<Axis>,
}

impl Grid {
    /// Default sampling for a model kind.
    pub fn default_for(kind: Kind) -> Self {
        let a = Axis::new("a", -0.5, 2.0, 21);
        let b = Axis::new("b", -1.0, 1.0, 21);
        let axes = match kind {
            Kind::Scalar => vec![Axis::new("z", -0.45, 0.45, 21)],
            Kind::VectorAlpha | Kind::VectorAlphaBeta => vec![a, b],
            Kind::VectorScalar => vec![a, b, Axis::new("z", -0.45, 0.45, 5)],
        };
        Grid { axes }
    }

    /// All grid points in row-major order (last axis fastest).
    pub fn points(&self, kind: Kind) -> Vec<InvariantPoint> {
        let mut coords: Vec<[f64; 3]> = vec![[0.0; 3]];
        for axis in &self.axes {
            let slot = match axis.name.as_str() {
                "a" => 0,
                "b" => 1,
                _ => 2,
            };
            coords = coords
                .into_iter()
                .flat_map(|c| {
                    axis.values().into_iter().map(move |v| {
                        let mut c = c;
                        c[slot] = v;
                        c
                    })
                })
                .collect();
        }
        coords
            .into_iter()
            .map(|[alpha, beta, z]| match kind {
                Kind::Scalar => InvariantPoint::Z { z },
                Kind::VectorAlpha => InvariantPoint::AlphaBeta { alpha, beta },
                Kind::VectorAlphaBeta => InvariantPoint::AlphaBeta { alpha, beta },
                Kind::VectorScalar => InvariantPoint::AlphaBetaZ { alpha, beta, z },
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut axes = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let f: Vec<&str> = part.split(':').map(str::trim).collect();
            let bad = || Error::Usage(format!("bad grid axis `{part}` (expected name:lo:hi:n)"));
            if f.len() != 4 {
                return Err(bad());
            }
            let name = match f[0] {
                "a" | "alpha" => "a",
                "b" | "beta" => "b",
                "z" => "z",
                _ => return Err(bad()),
            };
            let lo: f64 = f[1].parse().map_err(|_| bad())?;
            let hi: f64 = f[2].parse().map_err(|_| bad())?;
            let n: usize = f[3].parse().map_err(|_| bad())?;
            if !lo.is_finite() || !hi.is_finite() || hi < lo {
                return Err(bad());
            }
            if axes.iter().any(|a: &Axis| a.name == name) {
                return Err(Error::Usage(format!("grid axis `{name}` given twice")));
            }
            axes.push(Axis::new(name, lo, hi, n));
        }
        if axes.is_empty() {
            return Err(Error::Usage("grid has no axes".into()));
        }
        Ok(Grid { axes })
    }
}

/// Tolerances used by [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Normalized residual below which a condition counts as satisfied.
    pub tol: f64,
    /// Points closer than this to a domain guard are excluded.
    pub margin: f64,
    /// Relative threshold for `K` and the discriminant.
    pub degeneracy: f64,
    /// Threshold for the normalized mixed couplings `L_zα, L_zβ`.
    pub coupling_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            tol: 1e-9,
            margin: 0.05,
            degeneracy: DEGENERACY_TOL,
            coupling_tol: 1e-8,
        }
    }
}

/// Outcome at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    Excluded,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub point: BTreeMap<String, f64>,
    pub status: PointStatus,
    /// Normalized residuals by name (`scal`, `vec1`, `vec2`, `tar3`, `tar4`,
    /// `coupling_za`, `coupling_zb`).
    pub residuals: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    /// Which residual family decided the label.
    pub residual: String,
    pub max: f64,
    pub argmax_point: BTreeMap<String, f64>,
    /// Largest normalized value of every residual that was evaluated.
    pub per_residual_max: BTreeMap<String, f64>,
}

/// Classification report; serializes to the `cewave-report/1` JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CEReport {
    pub schema: String,
    pub model: String,
    pub expression: String,
    pub kind: Kind,
    pub grid: Grid,
    pub tol: f64,
    pub label: Label,
    pub notes: Vec<String>,
    pub residual_summary: ResidualSummary,
    pub per_point: Vec<PointRecord>,
}

pub const REPORT_SCHEMA: &str = "cewave-report/1";

fn coords(p: &InvariantPoint) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    match *p {
        InvariantPoint::Z { z } => {
            m.insert("z".into(), z);
        }
        InvariantPoint::Alpha { alpha } => {
            m.insert("a".into(), alpha);
        }
        InvariantPoint::AlphaBeta { alpha, beta } => {
            m.insert("a".into(), alpha);
            m.insert("b".into(), beta);
        }
        InvariantPoint::AlphaBetaZ { alpha, beta, z } => {
            m.insert("a".into(), alpha);
            m.insert("b".into(), beta);
            m.insert("z".into(), z);
        }
    }
    m
}

/// Evaluates every applicable residual at one point.
fn evaluate_point(model: &LagrangianModel, point: &InvariantPoint, opts: &ClassifyOptions) -> Result<PointRecord> {
    let mut rec = PointRecord {
        point: coords(point),
        status: PointStatus::Ok,
        residuals: BTreeMap::new(),
    };
    if !model.in_domain(point, opts.margin) {
        rec.status = PointStatus::Excluded;
        return Ok(rec);
    }
    let mut put = |name: &str, r: &Residual| {
        rec.residuals.insert(name.to_string(), r.normalized());
    };
    match model.kind() {
        Kind::Scalar => put("scal", &scalar_ce_residual(&model.jet(point)?)),
        Kind::VectorAlpha => {
            let jet = model.jet(point)?;
            let [v1, v2] = strong_ce_residuals(&jet, point.alpha(), point.beta());
            put("vec1", &v1);
            put("vec2", &v2);
            put("scal", &scalar_ce_residual(&jet));
        }
        Kind::VectorAlphaBeta | Kind::VectorScalar => {
            let jet = model.jet(point)?;
            let [v1, v2] = strong_ce_residuals(&jet, point.alpha(), point.beta());
            put("vec1", &v1);
            put("vec2", &v2);
            let data = VectorCharData::from_jet(&jet, point.alpha(), point.beta());
            match general_ce_residuals_with(&data, opts.degeneracy) {
                Ok([t3, t4]) => {
                    put("tar3", &t3);
                    put("tar4", &t4);
                }
                Err(Error::Degeneracy(_)) => rec.status = PointStatus::Degenerate,
                Err(e) => return Err(e),
            }
            if model.kind() == Kind::VectorScalar {
                let [za, zb] = coupling_residuals(model, point)?;
                rec.residuals.insert("coupling_za".into(), za.normalized());
                rec.residuals.insert("coupling_zb".into(), zb.normalized());
                let sz = scalar_ce_residual(&model.jet_in_z(point)?);
                rec.residuals.insert("scal".into(), sz.normalized());
            }
        }
    }
    Ok(rec)
}

fn family_max(records: &[PointRecord], names: &[&str]) -> (f64, BTreeMap<String, f64>) {
    let mut best = (0.0, BTreeMap::new());
    let mut first = true;
    for r in records.iter().filter(|r| r.status != PointStatus::Excluded) {
        let v = names
            .iter()
            .filter_map(|n| r.residuals.get(*n))
            .fold(0.0f64, |m, &x| m.max(x));
        if first || v > best.0 {
            best = (v, r.point.clone());
            first = false;
        }
    }
    best
}

/// Classifies a Lagrangian over a grid of invariant values.
///
/// * `StronglyCE`: the strong residuals (`scal` for scalar models, `vec1`,
///   `vec2` otherwise) vanish at every sampled point.
/// * `CE`: otherwise, the general conditions vanish everywhere (`scal` along
///   `α` for `L(α)`; `tar3`, `tar4` at nondegenerate points of `L(α, β)`,
///   with degenerate points required to satisfy the strong conditions).
/// * `Degenerate`: more than half the evaluated points trip the `K`/Δ guard.
/// * `NotCE`: anything else. Mixed `L(α, β, z)` models must additionally
///   have vanishing `L_zα, L_zβ`; a `y`-dependent model is `NotCE` outright.
pub fn classify(model: &LagrangianModel, grid: &Grid, opts: &ClassifyOptions) -> Result<CEReport> {
    let kind = model.kind();
    let mut report = CEReport {
        schema: REPORT_SCHEMA.into(),
        model: model.name().to_string(),
        expression: model.expr().to_string(),
        kind,
        grid: grid.clone(),
        tol: opts.tol,
        label: Label::NotCE,
        notes: vec![],
        residual_summary: ResidualSummary {
            residual: String::new(),
            max: 0.0,
            argmax_point: BTreeMap::new(),
            per_residual_max: BTreeMap::new(),
        },
        per_point: vec![],
    };
    if model.y_dependent() {
        report
            .notes
            .push("depends on the mixed invariant y; no CE Lagrangian has nontrivial y-dependence".into());
        report.residual_summary.residual = "y_dependence".into();
        return Ok(report);
    }
    let points = grid.points(kind);
    let records = points
        .iter()
        .map(|p| evaluate_point(model, p, opts))
        .collect::<Result<Vec<_>>>()?;
    let evaluated = records.iter().filter(|r| r.status != PointStatus::Excluded).count();
    if evaluated == 0 {
        return Err(Error::EmptyGrid);
    }
    let excluded = records.len() - evaluated;
    if excluded > 0 {
        report.notes.push(format!(
            "{excluded} of {} grid points outside the guarded domain",
            records.len()
        ));
    }
    for r in &records {
        for (k, v) in &r.residuals {
            let e = report.residual_summary.per_residual_max.entry(k.clone()).or_insert(0.0);
            *e = e.max(*v);
        }
    }
    let degenerate = records.iter().filter(|r| r.status == PointStatus::Degenerate).count();
    let tol = opts.tol;
    let below = |names: &[&str]| family_max(&records, names).0 < tol;

    let (label, family): (Label, &[&str]) = match kind {
        Kind::Scalar => {
            if below(&["scal"]) {
                (Label::StronglyCE, &["scal"])
            } else {
                (Label::NotCE, &["scal"])
            }
        }
        Kind::VectorAlpha => {
            if below(&["vec1", "vec2"]) {
                (Label::StronglyCE, &["vec1", "vec2"])
            } else if below(&["scal"]) {
                (Label::CE, &["scal"])
            } else {
                (Label::NotCE, &["scal"])
            }
        }
        Kind::VectorAlphaBeta | Kind::VectorScalar => {
            let vec_label = vector_label(&records, tol, degenerate, evaluated);
            if kind == Kind::VectorAlphaBeta {
                vec_label
            } else {
                let (coupling, _) = family_max(&records, &["coupling_za", "coupling_zb"]);
                if coupling >= opts.coupling_tol {
                    report.notes.push(format!(
                        "vector and scalar sectors interact (max normalized coupling {coupling:e})"
                    ));
                    (Label::NotCE, &["coupling_za", "coupling_zb"][..])
                } else {
                    let scal = if below(&["scal"]) {
                        Label::StronglyCE
                    } else {
                        Label::NotCE
                    };
                    if scal == Label::NotCE {
                        (Label::NotCE, &["scal"][..])
                    } else {
                        vec_label
                    }
                }
            }
        }
    };
    if degenerate > 0 {
        report.notes.push(format!(
            "{degenerate} of {evaluated} evaluated points have vanishing K or discriminant"
        ));
    }
    let (max, argmax) = family_max(&records, family);
    report.label = label;
    report.residual_summary.residual = family.join("+");
    report.residual_summary.max = max;
    report.residual_summary.argmax_point = argmax;
    report.per_point = records;
    Ok(report)
}

fn vector_label(
    records: &[PointRecord],
    tol: f64,
    degenerate: usize,
    evaluated: usize,
) -> (Label, &'static [&'static str]) {
    const STRONG: &[&str] = &["vec1", "vec2"];
    const TAR: &[&str] = &["tar3", "tar4"];
    if family_max(records, STRONG).0 < tol {
        return (Label::StronglyCE, STRONG);
    }
    if 2 * degenerate > evaluated {
        return (Label::Degenerate, STRONG);
    }
    let ok = records.iter().filter(|r| r.status != PointStatus::Excluded).all(|r| {
        let names = if r.status == PointStatus::Degenerate {
            STRONG
        } else {
            TAR
        };
        names.iter().all(|n| r.residuals.get(*n).is_some_and(|&v| v < tol))
    });
    if ok {
        (Label::CE, TAR)
    } else {
        (Label::NotCE, TAR)
    }
}
