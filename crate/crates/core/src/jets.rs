//! Third-order truncated Taylor arithmetic in up to two formal variables.
//!
//! A [`Jet3`] carries the value of a function and all of its partial
//! derivatives through third order. Arithmetic on jets applies the chain and
//! product rules exactly (up to rounding), so evaluating a Lagrangian
//! expression on jets yields `L`, `L_α`, `L_αβ`, `L_αββ`, ... with no
//! truncation error. Finite differences only appear as a test oracle
//! ([`jet_check_fd`]).

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lagrangians::LagrangianModel;

/// Arguments and denominators below this magnitude raise a domain error.
pub const SINGULAR_FLOOR: f64 = 1e-300;

/// Monomial exponents `(i, j)` for `x^i y^j`, graded by total degree.
const MONOMIALS: [(usize, usize); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

const FACTORIAL: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

const fn slot(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

/// Value and partial derivatives through order three of a function of up to
/// two variables, stored as Taylor coefficients.
///
/// Mixed partials are stored once, so symmetry holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    c: [f64; 10],
}

impl Default for Jet3 {
    fn default() -> Self {
        Jet3::constant(0.0)
    }
}

impl Jet3 {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; 10];
        c[0] = v;
        Jet3 { c }
    }

    /// The formal variable `index` (0 or 1) expanded about `at`.
    pub fn variable(index: usize, at: f64) -> Self {
        assert!(index < 2, "Jet3 supports two formal variables");
        let mut j = Jet3::constant(at);
        j.c[1 + index] = 1.0;
        j
    }

    /// Builds a jet from raw partial derivatives.
    ///
    /// `second = [f_xx, f_xy, f_yy]`, `third = [f_xxx, f_xxy, f_xyy, f_yyy]`.
    pub fn from_partials(value: f64, first: [f64; 2], second: [f64; 3], third: [f64; 4]) -> Self {
        let mut c = [0.0; 10];
        c[0] = value;
        c[1] = first[0];
        c[2] = first[1];
        c[3] = second[0] / 2.0;
        c[4] = second[1];
        c[5] = second[2] / 2.0;
        c[6] = third[0] / 6.0;
        c[7] = third[1] / 2.0;
        c[8] = third[2] / 2.0;
        c[9] = third[3] / 6.0;
        Jet3 { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Partial derivative `∂^{i+j} f / ∂x^i ∂y^j`, `i + j ≤ 3`.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        assert!(i + j <= 3, "Jet3 holds partials through order 3");
        self.c[slot(i, j)] * FACTORIAL[i] * FACTORIAL[j]
    }

    pub fn taylor_coefficients(&self) -> &[f64; 10] {
        &self.c
    }

    /// Jet of `∂f/∂x_index`. The result is exact only through order two;
    /// its third-order slots are zero.
    pub fn derivative(&self, index: usize) -> Jet3 {
        let mut out = [0.0; 10];
        for (k, &(i, j)) in MONOMIALS.iter().enumerate().take(6) {
            let (si, sj, factor) = if index == 0 {
                (i + 1, j, (i + 1) as f64)
            } else {
                (i, j + 1, (j + 1) as f64)
            };
            out[k] = factor * self.c[slot(si, sj)];
        }
        Jet3 { c: out }
    }

    /// `f(self)` given `f(a), f'(a), f''(a), f'''(a)` at `a = self.value()`.
    pub fn compose(&self, f: [f64; 4]) -> Jet3 {
        let mut h = *self;
        h.c[0] = 0.0;
        let h2 = h * h;
        let h3 = h2 * h;
        let mut out = Jet3::constant(f[0]);
        out += h * f[1];
        out += h2 * (f[2] / 2.0);
        out += h3 * (f[3] / 6.0);
        out
    }

    pub fn recip(&self) -> Result<Jet3> {
        let a = self.value();
        if a.abs() < SINGULAR_FLOOR || !a.is_finite() {
            return Err(Error::domain(format!("division by {a:e}")));
        }
        let r = 1.0 / a;
        Ok(self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]))
    }

    pub fn try_div(&self, rhs: &Jet3) -> Result<Jet3> {
        Ok(*self * rhs.recip()?)
    }

    pub fn sqrt(&self) -> Result<Jet3> {
        self.powf(0.5)
    }

    /// Real power `self^r` for a base bounded away from zero (positive unless
    /// `r` is an integer).
    pub fn powf(&self, r: f64) -> Result<Jet3> {
        if r.fract() == 0.0 && r.abs() <= i32::MAX as f64 {
            return self.powi(r as i32);
        }
        let a = self.value();
        if a < SINGULAR_FLOOR || !a.is_finite() {
            return Err(Error::domain(format!("non-integer power of {a:e}")));
        }
        let p0 = a.powf(r);
        let p1 = r * p0 / a;
        let p2 = (r - 1.0) * p1 / a;
        let p3 = (r - 2.0) * p2 / a;
        Ok(self.compose([p0, p1, p2, p3]))
    }

    pub fn powi(&self, n: i32) -> Result<Jet3> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut acc = Jet3::constant(1.0);
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        Ok(acc)
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(mut self, rhs: Jet3) -> Jet3 {
        self += rhs;
        self
    }
}

impl AddAssign for Jet3 {
    fn add_assign(&mut self, rhs: Jet3) {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: Jet3) -> Jet3 {
        self + (-rhs)
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(mut self) -> Jet3 {
        for a in self.c.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: Jet3) -> Jet3 {
        let mut out = [0.0; 10];
        for (ka, &(ia, ja)) in MONOMIALS.iter().enumerate() {
            let a = self.c[ka];
            if a == 0.0 {
                continue;
            }
            for (kb, &(ib, jb)) in MONOMIALS.iter().enumerate() {
                if ia + ja + ib + jb > 3 {
                    break;
                }
                out[slot(ia + ib, ja + jb)] += a * rhs.c[kb];
            }
        }
        Jet3 { c: out }
    }
}

impl Add<f64> for Jet3 {
    type Output = Jet3;
    fn add(mut self, rhs: f64) -> Jet3 {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet3 {
    type Output = Jet3;
    fn sub(mut self, rhs: f64) -> Jet3 {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(mut self, rhs: f64) -> Jet3 {
        for a in self.c.iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl Mul<Jet3> for f64 {
    type Output = Jet3;
    fn mul(self, rhs: Jet3) -> Jet3 {
        rhs * self
    }
}

impl Add<Jet3> for f64 {
    type Output = Jet3;
    fn add(self, rhs: Jet3) -> Jet3 {
        rhs + self
    }
}

impl Sub<Jet3> for f64 {
    type Output = Jet3;
    fn sub(self, rhs: Jet3) -> Jet3 {
        (-rhs) + self
    }
}

/// Point in invariant space at which a Lagrangian is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InvariantPoint {
    Z { z: f64 },
    Alpha { alpha: f64 },
    AlphaBeta { alpha: f64, beta: f64 },
    AlphaBetaZ { alpha: f64, beta: f64, z: f64 },
}

impl InvariantPoint {
    pub fn alpha(&self) -> f64 {
        match *self {
            InvariantPoint::Alpha { alpha }
            | InvariantPoint::AlphaBeta { alpha, .. }
            | InvariantPoint::AlphaBetaZ { alpha, .. } => alpha,
            InvariantPoint::Z { .. } => 0.0,
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            InvariantPoint::AlphaBeta { beta, .. } | InvariantPoint::AlphaBetaZ { beta, .. } => beta,
            _ => 0.0,
        }
    }

    pub fn z(&self) -> f64 {
        match *self {
            InvariantPoint::Z { z } | InvariantPoint::AlphaBetaZ { z, .. } => z,
            _ => 0.0,
        }
    }

    /// Coordinates in the order the invariants are declared.
    pub fn coords(&self) -> Vec<f64> {
        match *self {
            InvariantPoint::Z { z } => vec![z],
            InvariantPoint::Alpha { alpha } => vec![alpha],
            InvariantPoint::AlphaBeta { alpha, beta } => vec![alpha, beta],
            InvariantPoint::AlphaBetaZ { alpha, beta, z } => vec![alpha, beta, z],
        }
    }

    fn is_finite(&self) -> bool {
        self.coords().iter().all(|v| v.is_finite())
    }

    /// Shift of the `k`-th formal jet variable (see [`jet_eval`]).
    pub(crate) fn shifted(&self, k: usize, h: f64) -> InvariantPoint {
        let mut p = *self;
        match &mut p {
            InvariantPoint::Z { z } => *z += h,
            InvariantPoint::Alpha { alpha } => *alpha += h,
            InvariantPoint::AlphaBeta { alpha, beta } | InvariantPoint::AlphaBetaZ { alpha, beta, .. } => {
                if k == 0 {
                    *alpha += h
                } else {
                    *beta += h
                }
            }
        }
        p
    }
}

/// Evaluates `model` and all its partials through order three at `point`.
///
/// Formal variables: `z` for scalar models, `α` for `L(α)`, `(α, β)` for
/// `L(α,β)` and `L(α,β,z)` (where `z` is held fixed; see
/// [`jet_eval_z`](crate::lagrangians::LagrangianModel::jet_in_z) for the
/// complementary jet).
pub fn jet_eval(model: &LagrangianModel, point: &InvariantPoint) -> Result<Jet3> {
    if !point.is_finite() {
        return Err(Error::domain("non-finite invariant"));
    }
    model.jet(point)
}

/// Largest relative deviation between the jet partials (orders one and two)
/// and central finite differences of the plain evaluation at `step`.
///
/// Deviation is measured as `|jet − fd| / max(1, |jet|)`.
pub fn jet_check_fd(model: &LagrangianModel, point: &InvariantPoint, step: f64) -> Result<f64> {
    let jet = jet_eval(model, point)?;
    let nvars = model.kind().jet_variables();
    // Stencil must not straddle a pole or leave the domain.
    let mut stencil = vec![*point];
    for k in 0..nvars {
        for s in [-2.0, -1.0, 1.0, 2.0] {
            stencil.push(point.shifted(k, s * step));
        }
    }
    if nvars == 2 {
        for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            stencil.push(point.shifted(0, sa * step).shifted(1, sb * step));
        }
    }
    let centre = model.guard_values(point)?;
    for p in &stencil[1..] {
        let vals = model.guard_values(p)?;
        for (g0, g) in centre.iter().zip(&vals) {
            if g0.signum() != g.signum() || g.abs() < SINGULAR_FLOOR {
                return Err(Error::domain("finite-difference stencil crosses a singularity"));
            }
        }
    }
    let f = |p: &InvariantPoint| model.eval(p);
    let f0 = f(point)?;
    let mut worst: f64 = 0.0;
    let mut dev = |exact: f64, approx: f64| {
        worst = worst.max((exact - approx).abs() / exact.abs().max(1.0));
    };
    for k in 0..nvars {
        let fp = f(&point.shifted(k, step))?;
        let fm = f(&point.shifted(k, -step))?;
        let (i, j) = if k == 0 { (1, 0) } else { (0, 1) };
        dev(jet.partial(i, j), (fp - fm) / (2.0 * step));
        dev(jet.partial(2 * i, 2 * j), (fp - 2.0 * f0 + fm) / (step * step));
    }
    if nvars == 2 {
        let fpp = f(&point.shifted(0, step).shifted(1, step))?;
        let fpm = f(&point.shifted(0, step).shifted(1, -step))?;
        let fmp = f(&point.shifted(0, -step).shifted(1, step))?;
        let fmm = f(&point.shifted(0, -step).shifted(1, -step))?;
        dev(jet.partial(1, 1), (fpp - fpm - fmp + fmm) / (4.0 * step * step));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn variable_partials() {
        let x = Jet3::variable(0, 2.0);
        assert_eq!(x.value(), 2.0);
        assert_eq!(x.partial(1, 0), 1.0);
        assert_eq!(x.partial(0, 1), 0.0);
        assert_eq!(x.partial(2, 0), 0.0);
    }

    #[test]
    fn cubic_polynomial_exact() {
        // f = x^3 y^0 + 2 x y^2 at (1.5, -0.5)
        let x = Jet3::variable(0, 1.5);
        let y = Jet3::variable(1, -0.5);
        let f = x * x * x + 2.0 * x * y * y;
        assert_relative_eq!(f.value(), 3.375 + 0.75, epsilon = 1e-15);
        assert_relative_eq!(f.partial(1, 0), 3.0 * 2.25 + 0.5, epsilon = 1e-15);
        assert_relative_eq!(f.partial(0, 1), 4.0 * 1.5 * -0.5, epsilon = 1e-15);
        assert_relative_eq!(f.partial(2, 0), 9.0, epsilon = 1e-15);
        assert_relative_eq!(f.partial(1, 1), -2.0, epsilon = 1e-15);
        assert_relative_eq!(f.partial(0, 2), 6.0, epsilon = 1e-15);
        assert_relative_eq!(f.partial(3, 0), 6.0, epsilon = 1e-15);
        assert_relative_eq!(f.partial(2, 1), 0.0, epsilon = 1e-15);
        assert_relative_eq!(f.partial(1, 2), 4.0, epsilon = 1e-15);
        assert_relative_eq!(f.partial(0, 3), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn from_partials_round_trip() {
        let j = Jet3::from_partials(1.0, [2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0, 10.0]);
        let got = [
            j.partial(0, 0),
            j.partial(1, 0),
            j.partial(0, 1),
            j.partial(2, 0),
            j.partial(1, 1),
            j.partial(0, 2),
            j.partial(3, 0),
            j.partial(2, 1),
            j.partial(1, 2),
            j.partial(0, 3),
        ];
        assert_eq!(got, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
    }

    #[test]
    fn derivative_shifts_orders() {
        let j = Jet3::from_partials(1.0, [2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0, 10.0]);
        let da = j.derivative(0);
        assert_eq!(da.value(), 2.0);
        assert_eq!(da.partial(1, 0), 4.0);
        assert_eq!(da.partial(0, 1), 5.0);
        assert_eq!(da.partial(2, 0), 7.0);
        assert_eq!(da.partial(1, 1), 8.0);
        assert_eq!(da.partial(0, 2), 9.0);
        let db = j.derivative(1);
        assert_eq!(db.value(), 3.0);
        assert_eq!(db.partial(0, 2), 10.0);
    }

    #[test]
    fn sqrt_of_one_plus_x() {
        // sqrt(1+x) at x=0: 1, 1/2, -1/4, 3/8
        let s = (Jet3::variable(0, 0.0) + 1.0).sqrt().unwrap();
        assert_relative_eq!(s.partial(0, 0), 1.0);
        assert_relative_eq!(s.partial(1, 0), 0.5);
        assert_relative_eq!(s.partial(2, 0), -0.25);
        assert_relative_eq!(s.partial(3, 0), 0.375);
    }

    #[test]
    fn recip_and_division() {
        let x = Jet3::variable(0, 2.0);
        let r = x.recip().unwrap();
        assert_relative_eq!(r.partial(0, 0), 0.5);
        assert_relative_eq!(r.partial(1, 0), -0.25);
        assert_relative_eq!(r.partial(2, 0), 0.25);
        assert_relative_eq!(r.partial(3, 0), -0.375);
        let q = Jet3::constant(1.0).try_div(&x).unwrap();
        assert_eq!(q, r);
    }

    #[test]
    fn singular_operations_fail() {
        assert!(matches!(Jet3::constant(0.0).recip(), Err(Error::Domain(_))));
        assert!(matches!(Jet3::constant(-1.0).sqrt(), Err(Error::Domain(_))));
        assert!(matches!(Jet3::constant(1e-301).sqrt(), Err(Error::Domain(_))));
        assert!(Jet3::constant(-2.0).powi(3).is_ok());
        assert!(matches!(Jet3::constant(0.0).powi(-1), Err(Error::Domain(_))));
    }

    #[test]
    fn negative_integer_power() {
        let x = Jet3::variable(1, 0.5);
        let p = x.powi(-2).unwrap();
        // d/dy y^-2 = -2 y^-3
        assert_relative_eq!(p.partial(0, 1), -16.0, epsilon = 1e-12);
        assert_relative_eq!(p.partial(0, 3), -24.0 * 0.5f64.powi(-5), epsilon = 1e-9);
    }
}
