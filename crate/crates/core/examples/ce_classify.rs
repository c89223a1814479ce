//! Classify the built-in models and a few expressions on their default grids.

use cewave::ce::{classify, ClassifyOptions, Grid};
use cewave::lagrangians::{builtin, Kind, LagrangianModel};

fn main() -> cewave::Result<()> {
    let mut models = vec![
        builtin("maxwell", &[])?,
        builtin("born-infeld", &[])?,
        builtin("alpha-over-beta", &[])?,
        builtin("perturbed-maxwell", &[0.1])?,
        builtin("scalar-bi", &[])?,
        builtin("sqrt-family", &[1.0, 1.0, -2.0])?.rebind(Kind::Scalar)?,
    ];
    models.push(LagrangianModel::parse("z + z^3", Kind::Scalar)?);
    models.push(LagrangianModel::parse(
        "-a/2 + 0.1*a^2 + 0.1*b^2",
        Kind::VectorAlphaBeta,
    )?);

    let opts = ClassifyOptions::default();
    for m in &models {
        let rep = classify(m, &Grid::default_for(m.kind()), &opts)?;
        println!(
            "{:<40} {:<11} max {} residual {:.2e}",
            m.name(),
            rep.label.to_string(),
            rep.residual_summary.residual,
            rep.residual_summary.max
        );
    }
    Ok(())
}
