//! Effects, probabilities and outcome densities for arcs of the circle.

use std::f64::consts::PI;

use num_complex::Complex64;
use phaseopt::measure::{density, effect_norm, prob, Arc, CoherentVector, DensityMatrix};
use phaseopt::phasecore::PhaseMatrix;

fn main() -> phaseopt::Result<()> {
    let half = Arc::new(0.0, PI)?;
    println!("canonical half-circle norm by truncation:");
    for dim in [2, 4, 8, 16, 32] {
        println!("  D={dim:>2}: {:.15}", effect_norm(&PhaseMatrix::canonical(dim)?, &half));
    }

    // a strong coherent state concentrates the canonical distribution
    let dim = 150;
    let z = Complex64::from_polar(5.0, 1.0);
    let coherent = CoherentVector::new(z, dim)?;
    let rho = coherent.to_density();
    let canonical = PhaseMatrix::canonical(dim)?;
    for width in [0.1, 0.25, 0.5] {
        let p = prob(&canonical, &rho, &Arc::centered(z.arg(), width)?)?;
        println!("P(|θ - arg z| < {width}) = {p:.6}");
    }
    println!("truncation fidelity 1 - {:.1e}", 1.0 - coherent.fidelity);

    let union = Arc::union(&[Arc::new(0.0, 0.5)?.segments()[0], Arc::new(3.0, 1.0)?.segments()[0]])?;
    println!("two-piece arc of length {:.3}: P = {:.6}", union.length(), prob(&canonical, &rho, &union)?);

    let curve = density(&PhaseMatrix::canonical(12)?, &DensityMatrix::number_state(3, 12)?, 8)?;
    print!("\nnumber state |3>, flat density:\n{}", curve.to_csv());
    Ok(())
}
