//! Compare the Fresnel roots of Born-Infeld and a perturbed Maxwell theory
//! on the same background.

use cewave::charsys::{fresnel_roots, FieldBackground};
use cewave::lagrangians::builtin;
use nalgebra::Vector3;

fn main() -> cewave::Result<()> {
    let bg = FieldBackground::vector([0.3, 0.1, 0.0], [0.0, 0.4, 0.2]);
    let n = Vector3::new(0.6, 0.0, 0.8);
    for (name, params) in [("born-infeld", vec![]), ("perturbed-maxwell", vec![0.1])] {
        let m = builtin(name, &params)?;
        let fr = fresnel_roots(&m.jet(&bg.invariant_point(m.kind()))?, &bg, &n)?;
        println!("{name}:");
        println!("  roots       {:?}", fr.real());
        println!("  pair gaps   {:.3e}, {:.3e}", fr.pair_gaps[0], fr.pair_gaps[1]);
        println!("  birefringent {}", fr.birefringent);
    }
    Ok(())
}
