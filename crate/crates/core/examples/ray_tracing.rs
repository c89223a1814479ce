//! Trace rays of the Born-Infeld cone and of a Burgers-like Hamiltonian.

use cewave::charsys::{Cone, FieldBackground, FresnelCone};
use cewave::lagrangians::builtin;
use cewave::rays::{trace, BurgersAnalog, RayState, Uniform};
use nalgebra::Vector3;

fn main() -> cewave::Result<()> {
    let bi = builtin("born-infeld", &[])?;
    let bg = FieldBackground::vector([0.3, 0.0, 0.0], [0.0, 0.4, 0.0]);
    let cone = FresnelCone::from_jet(&bg, &bi.jet(&bg.invariant_point(bi.kind()))?)?;
    let n = Vector3::new(0.6, 0.0, 0.8);
    for root in cone.roots_p0(&n)? {
        let p = [root.re, n.x, n.y, n.z];
        let path = trace(&Uniform(cone.sheet_for(&p)?), RayState::new([0.0; 4], p), 10.0, 1e-2)?;
        let x = path.samples.last().unwrap().x;
        let v = [x[1] / x[0], x[2] / x[0], x[3] / x[0]];
        println!(
            "p0 = {:+.6}: group velocity {v:.6?}, |H| drift {:.1e}",
            root.re, path.max_drift
        );
    }

    let h = BurgersAnalog::new(|x| 0.5 + 0.3 * x.sin(), |x| 0.3 * x.cos());
    let start = RayState::new([0.0, 0.2, 0.0, 0.0], [-(0.5 + 0.3 * 0.2f64.sin()), 1.0, 0.0, 0.0]);
    for step in [0.1, 0.05, 0.025] {
        println!(
            "burgers analog, step {step}: drift {:.3e}",
            trace(&h, start, 5.0, step)?.max_drift
        );
    }
    Ok(())
}
