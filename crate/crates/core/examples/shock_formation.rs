//! Burgers shock formation from u₀ = sin x, checked three ways, and the
//! fan of an exceptional simple wave carrying the same profile.

use std::f64::consts::PI;

use cewave::charsys::ScalarPlaneFamily;
use cewave::lagrangians::builtin;
use cewave::rays::crossing_time;
use cewave::shock1d::{
    exceptional_flux_demo, l1_distance_to_exact, moc_solve, shock_time, simple_wave_construct, upwind_solve, Burgers,
    Profile1D,
};
use nalgebra::DVector;

fn main() -> cewave::Result<()> {
    let profile = Profile1D::callable(f64::sin, 0.0, 2.0 * PI, true)?;
    let id = |u: f64| u;
    println!("shock_time     {:?}", shock_time(&id, &profile, 400)?);
    println!(
        "crossing_time  {:?}",
        crossing_time(&|x| profile.eval(x), &profile.grid(400), 10.0)?
    );
    for t in [0.5, 1.5] {
        println!("t = {t}: multivalued {}", moc_solve(&id, &profile, t, 400)?.multivalued);
    }
    for nx in [200, 400, 800] {
        let sol = upwind_solve(&Burgers, &profile, 0.5, nx, 0.8)?;
        println!(
            "upwind nx = {nx}: L¹ error {:.3e}",
            l1_distance_to_exact(&sol, &id, &profile)?
        );
    }

    let fam = ScalarPlaneFamily {
        model: builtin("scalar-bi", &[])?,
    };
    let wave = simple_wave_construct(&fam, 1, 1, (0.1, 0.6), &DVector::from_vec(vec![0.3, 0.1]), 200)?;
    let demo = exceptional_flux_demo(&wave, &profile, &[1.0, 5.0], 10.0, 400)?;
    println!(
        "burgers crossing {:?}, scalar-bi wave crossing {:?}",
        demo.burgers_crossing, demo.wave_crossing
    );
    Ok(())
}
