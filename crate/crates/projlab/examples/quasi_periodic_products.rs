//! Quasi-periodic products: every length-m window covers all projectors.
//! A seeded generator produces valid schedules; deviations stay under
//! beta^(m-1) * q^(i/m).
//!
//! Run with: cargo run --example quasi_periodic_products

use projlab::criteria::{gamma_for_quality, quasi_periodic_envelope};
use projlab::engine::{
    make_schedule, random_quasi_periodic_tau, run_product, validate_quasi_periodic, ScheduleKind,
    ScheduleSpec,
};
use projlab::projector::{make_orthogonal_projector, ProjectorFamily, SubspaceBasis};
use projlab::space::NormedSpace;

fn main() -> projlab::Result<()> {
    let (n, m, q) = (3, 4, 0.5);

    // A window sequence drawn at random under the cover constraint.
    let tau = random_quasi_periodic_tau(n, m, 240, 2024);
    validate_quasi_periodic(&tau, n, m)?;
    println!("first 24 schedule entries: {:?}", &tau[..24]);

    // Invalid sequences are rejected with the offending window.
    let err = validate_quasi_periodic(&[0, 0, 1, 0, 1, 0], 2, 2).unwrap_err();
    println!("invalid example rejected: {err}");

    // Three coordinate planes in R4 sharing the e2 axis; all pairwise
    // cosines are 0, inside any budget.
    let space = NormedSpace::euclidean(4);
    let planes = [
        vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]],
        vec![vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]],
        vec![vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]],
    ];
    let projectors: Vec<_> = planes
        .iter()
        .map(|b| make_orthogonal_projector(&SubspaceBasis::new(4, b).unwrap(), &space).unwrap())
        .collect();
    let mut family = ProjectorFamily::new(space, projectors)?;
    family.build_pairs_auto()?;
    family.certify_weak()?;

    let beta = family.beta_upper();
    let budget = gamma_for_quality(beta, n, m, q)?;
    println!("\nangle budget for q = {q}, m = {m}: gamma = {:.4e}", budget.gamma);

    let schedule = make_schedule(
        ScheduleSpec {
            kind: ScheduleKind::QuasiPeriodic { m, tau },
            steps: 240,
        },
        n,
    )?;
    let envelope = move |i: usize| Some(quasi_periodic_envelope(beta, q, m, i));
    let trace = run_product(&family, &schedule, Some(&envelope))?;
    println!("\n  step    deviation        envelope");
    for s in trace.steps.iter().step_by(40) {
        println!(
            "  {:>4}    {:.6e}    {:.6e}",
            s.step,
            s.deviation,
            s.envelope.unwrap()
        );
    }
    println!("violations: {}", trace.violations());
    Ok(())
}
