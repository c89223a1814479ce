use super::expr::{add, c, div, mul, neg, pow, sqrt, sub, var, Invariant};
use super::{Kind, LagrangianModel};
use crate::error::{Error, Result};

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 7] = [
    "maxwell",
    "born-infeld",
    "scalar-maxwell",
    "scalar-bi",
    "sqrt-family",
    "alpha-over-beta",
    "perturbed-maxwell",
];

/// Built-in Lagrangian families.
///
/// | name | L | params |
/// |---|---|---|
/// | `maxwell` | −α/2 | none |
/// | `born-infeld` | 1 − √(1 + α − β²) | none |
/// | `scalar-maxwell` | −z | none |
/// | `scalar-bi` | 1 − √(1 + 2z) | none |
/// | `sqrt-family` | k + (d + cα)^½ | k, d, c |
/// | `alpha-over-beta` | α/β | none |
/// | `perturbed-maxwell` | −α/2 + εα² | ε |
///
/// `sqrt-family` is built as an `L(α)` model; use
/// [`LagrangianModel::rebind`] for the scalar `k + √(d + cz)` version.
pub fn builtin(name: &str, params: &[f64]) -> Result<LagrangianModel> {
    let a = || var(Invariant::Alpha);
    let b = || var(Invariant::Beta);
    let z = || var(Invariant::Z);
    let arity = |n: usize| -> Result<()> {
        if params.len() != n {
            return Err(Error::BadParams {
                model: name.to_string(),
                message: format!("expected {n} parameter(s), got {}", params.len()),
            });
        }
        if let Some(p) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::BadParams {
                model: name.to_string(),
                message: format!("parameter {p} is not finite"),
            });
        }
        Ok(())
    };
    let (kind, expr) = match name {
        "maxwell" => {
            arity(0)?;
            (Kind::VectorAlpha, div(neg(a()), c(2.0)))
        }
        "born-infeld" => {
            arity(0)?;
            let arg = sub(add(c(1.0), a()), pow(b(), 4));
            (Kind::VectorAlphaBeta, sub(c(1.0), sqrt(arg)))
        }
        "scalar-maxwell" => {
            arity(0)?;
            (Kind::Scalar, neg(z()))
        }
        "scalar-bi" => {
            arity(0)?;
            (Kind::Scalar, sub(c(1.0), sqrt(add(c(1.0), mul(c(2.0), z())))))
        }
        "sqrt-family" => {
            arity(3)?;
            let (k, d, cc) = (params[0], params[1], params[2]);
            if cc == 0.0 {
                return Err(Error::BadParams {
                    model: name.to_string(),
                    message: "c must be nonzero".into(),
                });
            }
            (Kind::VectorAlpha, add(c(k), pow(add(c(d), mul(c(cc), a())), 1)))
        }
        "alpha-over-beta" => {
            arity(0)?;
            (Kind::VectorAlphaBeta, div(a(), b()))
        }
        "perturbed-maxwell" => {
            arity(1)?;
            let eps = params[0];
            (Kind::VectorAlpha, add(div(neg(a()), c(2.0)), mul(c(eps), pow(a(), 4))))
        }
        other => return Err(Error::UnknownModel(other.to_string())),
    };
    let label = if params.is_empty() {
        name.to_string()
    } else {
        let ps: Vec<String> = params.iter().map(|p| format!("{p:?}")).collect();
        format!("{name}[{}]", ps.join(","))
    };
    LagrangianModel::new(label, kind, expr)
}
