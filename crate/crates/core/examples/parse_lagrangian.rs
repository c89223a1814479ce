//! Parse a Lagrangian, print its normalized form and its derivatives.

use cewave::jets::InvariantPoint;
use cewave::lagrangians::{Kind, LagrangianModel};

fn main() -> cewave::Result<()> {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "1 - sqrt(1 + a - b^2)".into());
    let model = LagrangianModel::parse(&text, Kind::VectorAlphaBeta)?;
    println!("{model}");
    for (alpha, beta) in [(0.0, 0.0), (0.5, 0.2), (-0.3, 0.4)] {
        let p = InvariantPoint::AlphaBeta { alpha, beta };
        if !model.in_domain(&p, 0.0) {
            println!("(α, β) = ({alpha}, {beta}): outside the domain");
            continue;
        }
        let j = model.jet(&p)?;
        println!(
            "(α, β) = ({alpha}, {beta}): L = {:.6}, L_α = {:.6}, L_β = {:.6}, L_αα = {:.6}, L_ααα = {:.6}",
            j.value(),
            j.partial(1, 0),
            j.partial(0, 1),
            j.partial(2, 0),
            j.partial(3, 0)
        );
    }
    Ok(())
}
