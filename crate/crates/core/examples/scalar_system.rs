//! Characteristic system of the scalar Born-Infeld field: eigenvalues,
//! eigenvectors and agreement with its cone.

use cewave::charsys::{crosscheck_cone_vs_eigen, scalar_system, FieldBackground, ScalarCone};
use cewave::lagrangians::{builtin, Kind};
use nalgebra::Vector3;

fn main() -> cewave::Result<()> {
    let m = builtin("scalar-bi", &[])?;
    let bg = FieldBackground::scalar(0.2, 0.5, 0.1, 0.3);
    let jet = m.jet(&bg.invariant_point(Kind::Scalar))?;
    let n = Vector3::new(0.3, -0.2, 0.9).normalize();
    let sys = scalar_system(&bg, &jet, &n)?;
    println!("matrix along n = {:?}:{}", n.as_slice(), sys.matrix);
    println!("eigenvalues {:?}", sys.eigen.values);
    println!("nontrivial  {:?}", sys.nontrivial_eigenvalues());
    println!("biorthogonality error {:.2e}", sys.eigen.biorthogonality_error());
    let cone = ScalarCone::from_jet(&bg, &jet)?;
    let cc = crosscheck_cone_vs_eigen(&sys, &cone)?;
    println!(
        "cone residual {:.2e}, root mismatch {:.2e}",
        cc.cone_residual, cc.root_mismatch
    );
    Ok(())
}
