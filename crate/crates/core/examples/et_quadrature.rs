//! State-generated observables computed two ways: closed-form phase entries
//! against a direct average of displaced copies of the state.

use std::f64::consts::PI;

use phaseopt::linalg;
use phaseopt::measure::{
    effect_operator, et_phase_entry_oracle, et_quadrature_oracle, Arc, DiagonalState, DEFAULT_QUAD_POINTS,
    DEFAULT_R_MAX,
};
use phaseopt::phasecore::PhaseMatrix;

fn main() -> phaseopt::Result<()> {
    let dim = 12;
    for (name, state) in [
        ("vacuum", DiagonalState::number(0)),
        ("|2>", DiagonalState::number(2)),
        ("mixture", DiagonalState::new(vec![0.5, 0.0, 0.3, 0.2])?),
    ] {
        let phase = PhaseMatrix::state_generated(&state, dim)?;
        for arc in [Arc::new(0.0, PI)?, Arc::new(1.0, 0.3)?, Arc::full()] {
            let oracle = et_quadrature_oracle(&state, &arc, dim, DEFAULT_R_MAX, DEFAULT_QUAD_POINTS)?;
            let deviation = linalg::max_abs_diff(&oracle, &effect_operator(&phase, &arc));
            println!("{name:<8} arc length {:.3}: max entry deviation {deviation:.2e}", arc.length());
        }
    }

    println!("\nsingle entries from the radial integral:");
    let state = DiagonalState::number(1);
    let phase = PhaseMatrix::state_generated(&state, 40)?;
    for (m, n) in [(0, 2), (3, 4), (10, 30)] {
        let oracle = et_phase_entry_oracle(&state, m, n, DEFAULT_R_MAX, DEFAULT_QUAD_POINTS);
        println!("  c({m},{n}) = {:+.15} (oracle {oracle:+.15})", phase.get(m as usize, n as usize).re);
    }
    Ok(())
}
