//! Building, validating and serializing phase matrices.

use num_complex::Complex64;
use phaseopt::io::to_json;
use phaseopt::linalg::CMatrix;
use phaseopt::measure::DiagonalState;
use phaseopt::phasecore::{u_equivalent, validate, PhaseMatrix, DEFAULT_EPS_PSD};

fn main() -> phaseopt::Result<()> {
    let dim = 8;
    let candidates = [
        ("canonical", PhaseMatrix::canonical(dim)?),
        ("trivial", PhaseMatrix::trivial(dim)?),
        ("chessboard(0.5i)", PhaseMatrix::chessboard(Complex64::new(0.0, 0.5), dim)?),
        ("thermal-like state", PhaseMatrix::state_generated(&DiagonalState::new(vec![0.6, 0.3, 0.1])?, dim)?),
        ("example 4", PhaseMatrix::example4(3, dim)?),
        ("example 5", PhaseMatrix::example5(dim)?),
    ];
    for (name, m) in &candidates {
        println!("{name:<20} rank {:>2}  min eigenvalue {:+.2e}  real {}", m.rank(1e-9), m.min_eigenvalue(), m.is_real(1e-12));
    }

    // a matrix that is not a phase matrix
    let mut bad = CMatrix::identity(3, 3);
    bad[(0, 2)] = Complex64::new(0.9, 0.0);
    bad[(2, 0)] = Complex64::new(0.9, 0.0);
    bad[(0, 1)] = Complex64::new(-0.9, 0.0);
    bad[(1, 0)] = Complex64::new(-0.9, 0.0);
    println!("\nvalidate(bad): {}", validate(&bad, DEFAULT_EPS_PSD).summary());

    // equivalent as observables, yet no diagonal unitary links them
    let z = Complex64::new(0.5, 0.0);
    let e1 = PhaseMatrix::single_coherence(z, 0, 6)?;
    let e2 = PhaseMatrix::single_coherence(z, 2, 6)?;
    println!("single-coherence pair diagonally equivalent: {}", u_equivalent(&e1, &e2, 1e-9)?.is_some());

    print!("\nexample 5 at D = 3 as JSON:\n{}", to_json(&PhaseMatrix::example5(3)?)?);
    Ok(())
}
