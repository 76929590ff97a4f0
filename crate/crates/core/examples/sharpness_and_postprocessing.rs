//! Approximate sharpness on the visible tail, smearing by measures on the
//! circle, and postprocessing classes.

use num_complex::Complex64;
use phaseopt::measure::DiagonalState;
use phaseopt::optimal::{
    approx_sharp_check, post_equiv_class, recover_state, smear, CircleMeasure, DEFAULT_K_MAX, DEFAULT_TOL_SHARP,
    DEFAULT_WINDOW,
};
use phaseopt::phasecore::PhaseMatrix;

fn main() -> phaseopt::Result<()> {
    let dim = 256;
    for (name, m) in [
        ("canonical", PhaseMatrix::canonical(dim)?),
        ("|10>", PhaseMatrix::state_generated(&DiagonalState::number(10), dim)?),
        ("example 5", PhaseMatrix::example5(dim)?),
        ("chessboard(0)", PhaseMatrix::chessboard(Complex64::new(0.0, 0.0), dim)?),
    ] {
        let r = approx_sharp_check(&m, DEFAULT_WINDOW, DEFAULT_K_MAX, DEFAULT_TOL_SHARP)?;
        let trend: Vec<String> = r.trend.iter().map(|t| format!("{t:.4}")).collect();
        println!("{name:<14} {:?}, window maxima [{}]", r.verdict, trend.join(", "));
    }

    let m = PhaseMatrix::example5(16)?;
    let fejer = smear(&m, &CircleMeasure::fejer(3, 0.0));
    for (i, j) in [(0, 2), (4, 6), (4, 8)] {
        println!("Fejér smearing |c({i},{j})|: {:.3} -> {:.3}", m.get(i, j).norm(), fejer.get(i, j).norm());
    }
    println!("Haar smearing gives the trivial matrix: {}", smear(&m, &CircleMeasure::haar()) == PhaseMatrix::trivial(16)?);

    let sharp = (DEFAULT_WINDOW, DEFAULT_K_MAX, DEFAULT_TOL_SHARP);
    let m = PhaseMatrix::example5(64)?;
    let x = Complex64::from_polar(1.0, 0.8);
    println!("\ntranslation recovered: {:?}", post_equiv_class(&m, &m.translate(x)?, sharp, 1e-10)?);
    let vacuum = PhaseMatrix::state_generated(&DiagonalState::number(0), 64)?;
    println!("canonical vs vacuum-generated: {:?}", post_equiv_class(&PhaseMatrix::canonical(64)?, &vacuum, sharp, 1e-10)?);

    let state = DiagonalState::new(vec![0.1, 0.4, 0.0, 0.5])?;
    let generated = PhaseMatrix::state_generated(&state, 64)?;
    let r = recover_state(&generated, 30, 1e-8)?;
    println!("recovered weights {:?}, residual {:.1e}", r.state.weights(), r.residual);
    Ok(())
}
