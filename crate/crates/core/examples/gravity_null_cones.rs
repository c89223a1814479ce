//! Kernel dimensions of the gravitational discontinuity operators on null
//! and non-null normals.

use cewave::gravity::{monte_carlo, Theory};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cewave::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let theories = [
        (Theory::Einstein, 4),
        (Theory::Einstein, 5),
        (Theory::Quadratic { p: 1.0, q: 0.0 }, 4),
        (Theory::Quadratic { p: 3.0, q: 1.0 }, 4),
        (Theory::FofR { fpp: 1.0 }, 4),
        (Theory::FofR { fpp: 2.0 }, 6),
    ];
    for (th, d) in theories {
        let r = monte_carlo(&th, d, 50, &mut rng)?;
        println!(
            "{:<24} D = {d}: null {:?}, non-null {:?}",
            th.to_string(),
            r.null_kernel_dims,
            r.nonnull_kernel_dims
        );
    }
    Ok(())
}
