//! Extremality through the span of the projectors onto the Gram vectors.

use num_complex::Complex64;
use phaseopt::measure::DiagonalState;
use phaseopt::optimal::{extremal_check, real_nonextremal_shortcut, witness_pairing};
use phaseopt::phasecore::PhaseMatrix;

fn main() -> phaseopt::Result<()> {
    let dim = 32;
    let cases = [
        ("canonical", PhaseMatrix::canonical(dim)?),
        ("chessboard(0.5)", PhaseMatrix::chessboard(Complex64::new(0.5, 0.0), dim)?),
        ("chessboard(0.5i)", PhaseMatrix::chessboard(Complex64::new(0.0, 0.5), dim)?),
        ("example 5", PhaseMatrix::example5(dim)?),
        ("vacuum-generated", PhaseMatrix::state_generated(&DiagonalState::number(0), dim)?),
    ];
    for (name, phase) in &cases {
        let eta = phase.gram_factor(1e-9);
        let report = extremal_check(&eta, 1e-9);
        print!("{name:<18} rank {:>2}, span {:>3} -> extremal {}", report.rank, report.span_rank, report.extremal);
        if let Some(w) = &report.witness {
            let worst = witness_pairing(&eta, w).iter().map(|z| z.norm()).fold(0.0, f64::max);
            print!(", witness pairing {worst:.1e}");
        }
        if let Some(cert) = real_nonextremal_shortcut(phase, 1e-9, 1e-9) {
            print!(", real certificate at {:?}", cert.pair);
        }
        println!();
    }
    Ok(())
}
