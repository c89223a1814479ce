use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::jets::{Jet3, SINGULAR_FLOOR};

/// Field invariants that may appear in a Lagrangian expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Invariant {
    /// Scalar kinetic invariant `z`.
    Z,
    /// `α`, written `a` or `alpha`.
    Alpha,
    /// `β`, written `b` or `beta`.
    Beta,
    /// Mixed invariant `y`; carried as a flag only and evaluated as zero.
    Y,
}

impl Invariant {
    pub fn symbol(self) -> &'static str {
        match self {
            Invariant::Z => "z",
            Invariant::Alpha => "a",
            Invariant::Beta => "b",
            Invariant::Y => "y",
        }
    }
}

/// Literal exponent, stored in units of one half (`halves = 3` is `3/2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exponent {
    pub halves: i32,
}

impl Exponent {
    pub fn integer(n: i32) -> Self {
        Exponent { halves: 2 * n }
    }

    pub fn is_integer(self) -> bool {
        self.halves % 2 == 0
    }

    pub fn value(self) -> f64 {
        self.halves as f64 / 2.0
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "({})", self.halves / 2)
        } else {
            write!(f, "({}/2)", self.halves)
        }
    }
}

/// Expression tree for a Lagrangian in its invariants.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Invariant),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Exponent),
    Sqrt(Box<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => {
                if *v < 0.0 {
                    write!(f, "({v:?})")
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::Var(v) => f.write_str(v.symbol()),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(l, r) => write!(f, "({l} + {r})"),
            Expr::Sub(l, r) => write!(f, "({l} - {r})"),
            Expr::Mul(l, r) => write!(f, "({l} * {r})"),
            Expr::Div(l, r) => write!(f, "({l} / {r})"),
            Expr::Pow(b, e) => write!(f, "({b}^{e})"),
            Expr::Sqrt(e) => write!(f, "sqrt({e})"),
        }
    }
}

/// A condition on a subexpression that must hold for the Lagrangian to be
/// evaluable (and smooth) at a point.
#[derive(Debug, Clone, PartialEq)]
pub enum Guard {
    /// Argument of a square root or half-integer power: must be positive.
    Positive(Expr),
    /// Denominator or base of a negative power: must not vanish.
    NonZero(Expr),
}

impl Guard {
    pub fn expr(&self) -> &Expr {
        match self {
            Guard::Positive(e) | Guard::NonZero(e) => e,
        }
    }

    /// Signed distance-like margin: the argument itself for `Positive`,
    /// its magnitude for `NonZero`.
    pub fn slack(&self, value: f64) -> f64 {
        match self {
            Guard::Positive(_) => value,
            Guard::NonZero(_) => value.abs(),
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::Positive(e) => write!(f, "{e} > 0"),
            Guard::NonZero(e) => write!(f, "{e} != 0"),
        }
    }
}

/// Numeric types an expression can be evaluated over.
pub(crate) trait Number:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn lift(v: f64) -> Self;
    fn divide(self, rhs: Self) -> Result<Self>;
    fn power(self, e: Exponent) -> Result<Self>;
}

impl Number for f64 {
    fn lift(v: f64) -> Self {
        v
    }

    fn divide(self, rhs: Self) -> Result<Self> {
        if rhs.abs() < SINGULAR_FLOOR || !rhs.is_finite() {
            return Err(Error::domain(format!("division by {rhs:e}")));
        }
        Ok(self / rhs)
    }

    fn power(self, e: Exponent) -> Result<Self> {
        if e.is_integer() {
            if e.halves < 0 && self.abs() < SINGULAR_FLOOR {
                return Err(Error::domain(format!("negative power of {self:e}")));
            }
            Ok(self.powi(e.halves / 2))
        } else {
            if self < SINGULAR_FLOOR {
                return Err(Error::domain(format!("half-integer power of {self:e}")));
            }
            Ok(self.powf(e.value()))
        }
    }
}

impl Number for Jet3 {
    fn lift(v: f64) -> Self {
        Jet3::constant(v)
    }

    fn divide(self, rhs: Self) -> Result<Self> {
        self.try_div(&rhs)
    }

    fn power(self, e: Exponent) -> Result<Self> {
        if e.is_integer() {
            self.powi(e.halves / 2)
        } else {
            self.powf(e.value())
        }
    }
}

/// Values bound to the invariants during evaluation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bindings<T> {
    pub z: T,
    pub alpha: T,
    pub beta: T,
}

impl Expr {
    pub(crate) fn eval<T: Number>(&self, env: &Bindings<T>) -> Result<T> {
        Ok(match self {
            Expr::Const(v) => T::lift(*v),
            Expr::Var(Invariant::Z) => env.z,
            Expr::Var(Invariant::Alpha) => env.alpha,
            Expr::Var(Invariant::Beta) => env.beta,
            Expr::Var(Invariant::Y) => T::lift(0.0),
            Expr::Neg(e) => -e.eval(env)?,
            Expr::Add(l, r) => l.eval(env)? + r.eval(env)?,
            Expr::Sub(l, r) => l.eval(env)? - r.eval(env)?,
            Expr::Mul(l, r) => l.eval(env)? * r.eval(env)?,
            Expr::Div(l, r) => l.eval(env)?.divide(r.eval(env)?)?,
            Expr::Pow(b, e) => b.eval(env)?.power(*e)?,
            Expr::Sqrt(e) => e.eval(env)?.power(Exponent { halves: 1 })?,
        })
    }

    /// Visits every node in prefix order.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        visit(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Sqrt(e) => e.walk(visit),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
                l.walk(visit);
                r.walk(visit);
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        let mut any = false;
        self.walk(&mut |e| any |= matches!(e, Expr::Var(_)));
        !any
    }

    pub fn uses(&self, var: Invariant) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= *e == Expr::Var(var));
        found
    }

    /// Domain conditions implied by the expression's singular operations.
    pub fn guards(&self) -> Vec<Guard> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            let g = match e {
                Expr::Sqrt(arg) => Some(Guard::Positive((**arg).clone())),
                Expr::Pow(base, ex) if !ex.is_integer() => Some(Guard::Positive((**base).clone())),
                Expr::Pow(base, ex) if ex.halves < 0 => Some(Guard::NonZero((**base).clone())),
                Expr::Div(_, den) => Some(Guard::NonZero((**den).clone())),
                _ => None,
            };
            if let Some(g) = g {
                if !g.expr().is_constant() && !out.contains(&g) {
                    out.push(g);
                }
            }
        });
        out
    }

    /// Replaces every occurrence of `from` by `to`.
    pub fn substitute(&self, from: Invariant, to: Invariant) -> Expr {
        let s = |e: &Expr| Box::new(e.substitute(from, to));
        match self {
            Expr::Var(v) if *v == from => Expr::Var(to),
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(e) => Expr::Neg(s(e)),
            Expr::Add(l, r) => Expr::Add(s(l), s(r)),
            Expr::Sub(l, r) => Expr::Sub(s(l), s(r)),
            Expr::Mul(l, r) => Expr::Mul(s(l), s(r)),
            Expr::Div(l, r) => Expr::Div(s(l), s(r)),
            Expr::Pow(b, e) => Expr::Pow(s(b), *e),
            Expr::Sqrt(e) => Expr::Sqrt(s(e)),
        }
    }
}

// Small constructors used by the built-in models and tests.
pub(crate) fn c(v: f64) -> Expr {
    Expr::Const(v)
}
pub(crate) fn var(v: Invariant) -> Expr {
    Expr::Var(v)
}
pub(crate) fn add(l: Expr, r: Expr) -> Expr {
    Expr::Add(Box::new(l), Box::new(r))
}
pub(crate) fn sub(l: Expr, r: Expr) -> Expr {
    Expr::Sub(Box::new(l), Box::new(r))
}
pub(crate) fn mul(l: Expr, r: Expr) -> Expr {
    Expr::Mul(Box::new(l), Box::new(r))
}
pub(crate) fn div(l: Expr, r: Expr) -> Expr {
    Expr::Div(Box::new(l), Box::new(r))
}
pub(crate) fn pow(b: Expr, halves: i32) -> Expr {
    Expr::Pow(Box::new(b), Exponent { halves })
}
pub(crate) fn sqrt(e: Expr) -> Expr {
    Expr::Sqrt(Box::new(e))
}
pub(crate) fn neg(e: Expr) -> Expr {
    Expr::Neg(Box::new(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(z: f64, a: f64, b: f64) -> Bindings<f64> {
        Bindings { z, alpha: a, beta: b }
    }

    #[test]
    fn evaluates_born_infeld() {
        let bi = sub(
            c(1.0),
            sqrt(sub(add(c(1.0), var(Invariant::Alpha)), pow(var(Invariant::Beta), 4))),
        );
        let v = bi.eval(&env(0.0, 0.3, 0.2)).unwrap();
        assert!((v - (1.0 - (1.26f64).sqrt())).abs() < 1e-15);
    }

    #[test]
    fn guards_collected_once() {
        let e = add(div(c(1.0), var(Invariant::Beta)), div(c(2.0), var(Invariant::Beta)));
        assert_eq!(e.guards(), vec![Guard::NonZero(var(Invariant::Beta))]);
        let h = pow(var(Invariant::Z), 3);
        assert_eq!(h.guards(), vec![Guard::Positive(var(Invariant::Z))]);
    }

    #[test]
    fn display_is_parenthesized() {
        let e = sub(c(1.0), mul(c(-2.0), pow(var(Invariant::Alpha), 1)));
        assert_eq!(e.to_string(), "(1.0 - ((-2.0) * (a^(1/2))))");
    }

    #[test]
    fn domain_errors() {
        assert!(sqrt(c(-1.0)).eval(&env(0.0, 0.0, 0.0)).is_err());
        assert!(div(c(1.0), c(0.0)).eval(&env(0.0, 0.0, 0.0)).is_err());
        assert!(pow(c(0.0), -2).eval(&env(0.0, 0.0, 0.0)).is_err());
        assert_eq!(pow(c(-2.0), 6).eval(&env(0.0, 0.0, 0.0)).unwrap(), -8.0);
    }

    #[test]
    fn substitution() {
        let e = add(var(Invariant::Alpha), var(Invariant::Beta));
        let s = e.substitute(Invariant::Alpha, Invariant::Z);
        assert!(s.uses(Invariant::Z) && !s.uses(Invariant::Alpha));
    }
}
