//! Phase-covariant channels acting before the measurement, and the test for
//! equivalence with the canonical observable.

use phaseopt::measure::{density, DensityMatrix, DiagonalState};
use phaseopt::optimal::{canonical_channel, preclean_check, preprocess, CovariantChannelSpec};
use phaseopt::phasecore::PhaseMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> phaseopt::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    // statistics of any phase observable are canonical statistics of Φ_E(ρ)
    let e = PhaseMatrix::state_generated(&DiagonalState::number(1), 24)?;
    let rho = DensityMatrix::random(24, &mut rng);
    let out = canonical_channel(&e).apply(&rho)?;
    let gap = density(&e, &rho, 128)?.max_abs_diff(&density(&PhaseMatrix::canonical(24)?, &out, 128)?);
    println!("channel identity deviation {gap:.1e}");

    for (name, m) in [
        ("example 4", PhaseMatrix::example4(3, 64)?),
        ("example 5", PhaseMatrix::example5(64)?),
        ("vacuum-generated", PhaseMatrix::state_generated(&DiagonalState::number(0), 64)?),
    ] {
        let r = preclean_check(&m, 1e-9, 1e-9);
        println!("{name:<17} n0 {:?}, tail rank {:?}", r.n0, r.tail_rank);
        if let Some(n0) = r.n0 {
            let spec = CovariantChannelSpec::canonicalizing(&m, n0)?;
            let pre = preprocess(&m, &spec)?;
            println!("  canonicalized to D = {}: canonical {}", pre.dim(), pre.rank(1e-9) == 1);
        }
    }

    let spec = CovariantChannelSpec::random(10, 10, 2, &mut rng);
    let pre = preprocess(&PhaseMatrix::canonical(10)?, &spec)?;
    println!("random covariant channel before the canonical observable: rank {}", pre.rank(1e-9));
    Ok(())
}
