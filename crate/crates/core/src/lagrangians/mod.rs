//! Lagrangian models: built-in families and user expressions.

mod builtins;
pub mod expr;
mod parser;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{InvariantPoint, Jet3};
pub use builtins::{builtin, BUILTIN_NAMES};
use expr::{Bindings, Expr, Guard, Invariant};
pub use parser::parse_lagrangian;

/// Which invariants a Lagrangian depends on; selects the CE pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// `L(z)` for a scalar field.
    Scalar,
    /// `L(α)` for electrodynamics.
    VectorAlpha,
    /// `L(α, β)` for electrodynamics.
    VectorAlphaBeta,
    /// `L(α, β, z)` (optionally with a `y` flag) for the coupled system.
    VectorScalar,
}

impl Kind {
    pub fn allows(self, v: Invariant) -> bool {
        match self {
            Kind::Scalar => v == Invariant::Z,
            Kind::VectorAlpha => v == Invariant::Alpha,
            Kind::VectorAlphaBeta => matches!(v, Invariant::Alpha | Invariant::Beta),
            Kind::VectorScalar => true,
        }
    }

    /// Number of formal jet variables used by [`LagrangianModel::jet`].
    pub fn jet_variables(self) -> usize {
        match self {
            Kind::Scalar | Kind::VectorAlpha => 1,
            Kind::VectorAlphaBeta | Kind::VectorScalar => 2,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Scalar => "scalar",
            Kind::VectorAlpha => "alpha",
            Kind::VectorAlphaBeta => "alpha-beta",
            Kind::VectorScalar => "alpha-beta-z",
        })
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scalar" | "z" => Ok(Kind::Scalar),
            "alpha" | "a" | "vector-alpha" => Ok(Kind::VectorAlpha),
            "alpha-beta" | "ab" | "vector-alpha-beta" => Ok(Kind::VectorAlphaBeta),
            "alpha-beta-z" | "abz" | "vector-scalar" => Ok(Kind::VectorScalar),
            other => Err(Error::Usage(format!(
                "unknown kind `{other}` (expected scalar, alpha, alpha-beta or alpha-beta-z)"
            ))),
        }
    }
}

/// A Lagrangian together with its kind and domain guards.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianModel {
    name: String,
    kind: Kind,
    expr: Expr,
    guards: Vec<Guard>,
    y_dependent: bool,
}

impl LagrangianModel {
    /// Wraps an expression, checking that it only uses invariants allowed by
    /// `kind`.
    pub fn new(name: impl Into<String>, kind: Kind, expr: Expr) -> Result<Self> {
        let mut bad = None;
        expr.walk(&mut |e| {
            if let Expr::Var(v) = e {
                if !kind.allows(*v) && bad.is_none() {
                    bad = Some(*v);
                }
            }
        });
        if let Some(v) = bad {
            return Err(Error::Kind {
                name: v.symbol().to_string(),
                offset: 0,
                kind: kind.to_string(),
            });
        }
        Ok(LagrangianModel {
            name: name.into(),
            kind,
            guards: expr.guards(),
            y_dependent: expr.uses(Invariant::Y),
            expr,
        })
    }

    /// Parses a user expression; the model is named by its source text.
    pub fn parse(text: &str, kind: Kind) -> Result<Self> {
        let expr = parse_lagrangian(text, kind)?;
        LagrangianModel::new(text.trim(), kind, expr)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn guards(&self) -> &[Guard] {
        &self.guards
    }

    /// True if the expression mentions the mixed invariant `y`.
    pub fn y_dependent(&self) -> bool {
        self.y_dependent
    }

    /// Reinterprets a single-invariant model as the other single-invariant
    /// kind (`L(α)` ↔ `L(z)`), substituting the variable.
    pub fn rebind(&self, kind: Kind) -> Result<Self> {
        let expr = match (self.kind, kind) {
            (a, b) if a == b => self.expr.clone(),
            (Kind::VectorAlpha, Kind::Scalar) => self.expr.substitute(Invariant::Alpha, Invariant::Z),
            (Kind::Scalar, Kind::VectorAlpha) => self.expr.substitute(Invariant::Z, Invariant::Alpha),
            (Kind::VectorAlpha, Kind::VectorAlphaBeta | Kind::VectorScalar)
            | (Kind::VectorAlphaBeta, Kind::VectorScalar)
            | (Kind::Scalar, Kind::VectorScalar) => self.expr.clone(),
            (from, to) => return Err(Error::Usage(format!("cannot reinterpret a {from} model as {to}"))),
        };
        LagrangianModel::new(self.name.clone(), kind, expr)
    }

    fn bindings<T: expr::Number>(&self, point: &InvariantPoint, vars: [Option<T>; 3]) -> Bindings<T> {
        let [z, a, b] = vars;
        Bindings {
            z: z.unwrap_or_else(|| T::lift(point.z())),
            alpha: a.unwrap_or_else(|| T::lift(point.alpha())),
            beta: b.unwrap_or_else(|| T::lift(point.beta())),
        }
    }

    pub fn eval(&self, point: &InvariantPoint) -> Result<f64> {
        let v = self.expr.eval(&self.bindings::<f64>(point, [None, None, None]))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(format!("non-finite value at {point:?}")))
        }
    }

    /// Jet in the model's natural variables: `z` (Scalar), `α` (VectorAlpha)
    /// or `(α, β)` (VectorAlphaBeta, VectorScalar with `z` frozen).
    pub fn jet(&self, point: &InvariantPoint) -> Result<Jet3> {
        let vars = match self.kind {
            Kind::Scalar => [Some(Jet3::variable(0, point.z())), None, None],
            Kind::VectorAlpha => [None, Some(Jet3::variable(0, point.alpha())), None],
            Kind::VectorAlphaBeta | Kind::VectorScalar => [
                None,
                Some(Jet3::variable(0, point.alpha())),
                Some(Jet3::variable(1, point.beta())),
            ],
        };
        self.expr.eval(&self.bindings(point, vars))
    }

    /// One-variable jet in `z` with `α, β` frozen.
    pub fn jet_in_z(&self, point: &InvariantPoint) -> Result<Jet3> {
        let vars = [Some(Jet3::variable(0, point.z())), None, None];
        self.expr.eval(&self.bindings(point, vars))
    }

    /// Values of the guard subexpressions (in [`guards`](Self::guards) order).
    pub fn guard_values(&self, point: &InvariantPoint) -> Result<Vec<f64>> {
        let env = self.bindings::<f64>(point, [None, None, None]);
        self.guards.iter().map(|g| g.expr().eval(&env)).collect()
    }

    /// True if every guard holds with at least `margin` to spare and the
    /// Lagrangian evaluates to a finite number.
    pub fn in_domain(&self, point: &InvariantPoint, margin: f64) -> bool {
        let Ok(values) = self.guard_values(point) else {
            return false;
        };
        self.guards.iter().zip(values).all(|(g, v)| g.slack(v) > margin) && self.eval(point).is_ok()
    }
}

impl fmt::Display for LagrangianModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: L = {}", self.name, self.kind, self.expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kinds_parse() {
        assert_eq!("alpha".parse::<Kind>().unwrap(), Kind::VectorAlpha);
        assert_eq!("scalar".parse::<Kind>().unwrap(), Kind::Scalar);
        assert!("foo".parse::<Kind>().is_err());
        for k in [
            Kind::Scalar,
            Kind::VectorAlpha,
            Kind::VectorAlphaBeta,
            Kind::VectorScalar,
        ] {
            assert_eq!(k.to_string().parse::<Kind>().unwrap(), k);
        }
    }

    #[test]
    fn born_infeld_domain() {
        let m = LagrangianModel::parse("1 - sqrt(1 + a - b^2)", Kind::VectorAlphaBeta).unwrap();
        assert!(m.in_domain(&InvariantPoint::AlphaBeta { alpha: 0.0, beta: 0.0 }, 0.05));
        assert!(!m.in_domain(&InvariantPoint::AlphaBeta { alpha: -0.5, beta: 0.8 }, 0.05));
        assert!(!m.in_domain(
            &InvariantPoint::AlphaBeta {
                alpha: -0.98,
                beta: 0.0
            },
            0.05
        ));
    }

    #[test]
    fn y_flag() {
        let m = LagrangianModel::parse("a + y", Kind::VectorScalar).unwrap();
        assert!(m.y_dependent());
        let m = LagrangianModel::parse("a + z", Kind::VectorScalar).unwrap();
        assert!(!m.y_dependent());
    }

    #[test]
    fn jet_in_z_of_mixed_model() {
        let m = LagrangianModel::parse("a*z + z^2", Kind::VectorScalar).unwrap();
        let p = InvariantPoint::AlphaBetaZ {
            alpha: 0.5,
            beta: 0.1,
            z: 2.0,
        };
        let jz = m.jet_in_z(&p).unwrap();
        assert_relative_eq!(jz.partial(1, 0), 0.5 + 4.0);
        let jab = m.jet(&p).unwrap();
        assert_relative_eq!(jab.partial(1, 0), 2.0);
    }

    #[test]
    fn rebind_alpha_to_z() {
        let m = builtin("sqrt-family", &[1.0, 1.0, -2.0]).unwrap();
        assert_eq!(m.kind(), Kind::VectorAlpha);
        let s = m.rebind(Kind::Scalar).unwrap();
        let a = m.eval(&InvariantPoint::Alpha { alpha: 0.2 }).unwrap();
        let z = s.eval(&InvariantPoint::Z { z: 0.2 }).unwrap();
        assert_eq!(a, z);
        assert!(s.rebind(Kind::VectorAlphaBeta).is_err());
    }
}
