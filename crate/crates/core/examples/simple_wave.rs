//! Simple waves of an exceptional and a non-exceptional scalar theory.

use cewave::charsys::{exceptionality_per_mode, ScalarPlaneFamily};
use cewave::lagrangians::{builtin, Kind, LagrangianModel};
use cewave::shock1d::simple_wave_construct;
use nalgebra::DVector;

fn main() -> cewave::Result<()> {
    let cases = [
        (builtin("scalar-bi", &[])?, 0.3),
        (LagrangianModel::parse("z^2", Kind::Scalar)?, 1.0),
    ];
    for (model, a0) in cases {
        let name = model.name().to_string();
        let fam = ScalarPlaneFamily { model };
        let u0 = DVector::from_vec(vec![a0, 0.1]);
        let g = exceptionality_per_mode(&fam, &u0, 1)?;
        let w = simple_wave_construct(&fam, 1, 1, (0.1, 0.6), &u0, 200)?;
        println!("{name}:");
        println!("  normalized ∇λ·R        {g:.3e}");
        println!("  λ variation on [0.1, 0.6] {:.3e}", w.lambda_variation());
        println!("  parallel error          {:.3e}", w.parallel_error(&fam)?);
    }
    Ok(())
}
