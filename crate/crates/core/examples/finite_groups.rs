//! Covariant observables on Z_N: smearing bounds, mixing, channel averaging
//! and unitary preprocessing, each checked over all subsets.

use num_complex::Complex64;
use phaseopt::groupsim::{
    covariantize, mix_check, norm_bound_check, random_psd, run_scenario, unitary_pre_equivalence, CyclicRep,
    FiniteCovariantObservable, FiniteMeasure, Scenario, Superoperator, SCENARIO_CHECKS,
};
use phaseopt::io::{to_json, MatrixRecord};
use phaseopt::linalg::{self, CMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> phaseopt::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rep = CyclicRep::number(6, 6)?;
    let canonical = FiniteCovariantObservable::make_covariant(&rep, &CMatrix::from_element(6, 6, Complex64::new(1.0, 0.0)))?;
    println!("finite canonical: ‖E({{x}})‖ = {:.12}", linalg::max_eigenvalue(&canonical.point(0)));

    let nu = FiniteMeasure::new(vec![0.6, 0.4, 0.0, 0.0, 0.0, 0.0])?;
    for mask in [0b1u64, 0b11, 0b1010] {
        let b = norm_bound_check(&canonical, &nu, mask)?;
        println!("X = {mask:06b}: ‖E_ν(X)‖ = {:.4} <= {:.4}", b.lhs, b.rhs);
    }

    let other = FiniteCovariantObservable::make_covariant(&rep, &random_psd(6, 3, &mut rng))?;
    let mix = mix_check(&canonical, &other, 0.5)?;
    println!("mixing over {} subsets: max excess {:.1e}", mix.subsets, mix.max_excess);

    let small = CyclicRep::number(5, 3)?;
    let averaged = covariantize(&small, &Superoperator::random(3, 2, &mut rng))?;
    println!("averaged channel: Choi min {:.3e}, covariance residual {:.1e}",
        linalg::min_eigenvalue(&averaged.choi()), averaged.covariance_residual(&small));

    let degenerate = CyclicRep::new(3, vec![0, 3, 1])?;
    let obs = FiniteCovariantObservable::make_covariant(&degenerate, &random_psd(3, 3, &mut rng))?;
    let w = degenerate.random_commutant_unitary(&mut rng);
    let pre = unitary_pre_equivalence(&obs, &w)?;
    println!("unitary preprocessing norm gap {:.1e}", pre.forward.max_gap.max(pre.backward.max_gap));

    let scenario = Scenario {
        order: 4,
        weights: vec![0, 1, 2, 3],
        seed: MatrixRecord::from_matrix(&CMatrix::from_element(4, 4, Complex64::new(1.0, 0.0))),
        nu: vec![0.5, 0.25, 0.0, 0.25],
        checks: SCENARIO_CHECKS.iter().map(|s| s.to_string()).collect(),
        rng_seed: 0,
    };
    let report = run_scenario(&scenario)?;
    println!("scenario passed {}, sharp {}", report.passed, report.approximately_sharp);
    print!("{}", to_json(&report.checks.iter().map(|c| (&c.name, c.passed)).collect::<Vec<_>>())?);
    Ok(())
}
