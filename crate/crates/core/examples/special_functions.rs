//! Phase-matrix entries of number-state generated observables, through the
//! closed forms and the associated Laguerre polynomials.

use phaseopt::specfun::{c_fock_0_2k, c_state, laguerre, laguerre_moment};

fn main() {
    println!("c(0,0,2) = {:.15} (1/sqrt 2 = {:.15})", c_state(0, 0, 2), std::f64::consts::FRAC_1_SQRT_2);

    println!("\nc(s,0,2k): rows s, columns k = 0..6");
    for s in 0..6 {
        let row: Vec<String> = (0..6).map(|k| format!("{:>9.5}", c_state(s, 0, 2 * k))).collect();
        println!("s={s} {}", row.join(" "));
    }

    println!("\nclosed form against the Gauss-Laguerre route:");
    for (s, k) in [(0, 1), (3, 4), (7, 12)] {
        let closed = c_fock_0_2k(s, k).unwrap();
        println!("  s={s} k={k}: {closed:+.12e} vs {:+.12e}", c_state(s, 0, 2 * k));
    }

    println!("\nL^(2)_3(x) coefficients: {:?}", laguerre(2, 3).coefficients());
    println!("∫ x^1.5 e^-x L^(1)_4(x) dx = {:.12}", laguerre_moment(1.5, 1, 4).unwrap());

    println!("\nconvergence to the canonical entries, 1 - c(s, m, m+1):");
    for m in [10, 40, 160] {
        println!("  m={m:>3}: s=0 {:.3e}, s=5 {:.3e}", 1.0 - c_state(0, m, m + 1), 1.0 - c_state(5, m, m + 1));
    }
}
