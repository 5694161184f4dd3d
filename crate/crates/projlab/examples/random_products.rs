//! Random products P_τ(i)···P_τ(1) with τ drawn i.i.d. from μ: block
//! statistics converging to n!·Πμ(j), the settling index k_τ, and the
//! envelope valid beyond n·k_τ.
//!
//! Run with: cargo run --example random_products

use projlab::criteria::{gamma_for_quality, random_block_factor, random_params};
use projlab::engine::{lln_statistics, make_schedule, run_product, ScheduleKind, ScheduleSpec};
use projlab::linalg::Mat;
use projlab::projector::{make_orthogonal_projector, ProjectorFamily, SubspaceBasis};
use projlab::space::{norm_in, NormedSpace};

fn main() -> projlab::Result<()> {
    let n = 2;
    let mu = vec![0.5, 0.5];
    let params = random_params(1.0, n, &mu)?;
    println!(
        "mu = {mu:?}: permutation-block frequency = {}, lambda = {}, q = {:.4}",
        params.freq, params.lambda, params.q
    );

    // Family inside the angle budget for this q.
    let budget = gamma_for_quality(1.0, n, n, params.q)?;
    let cos = 0.8 * budget.gamma;
    println!("angle budget gamma = {:.4e}; using cosine {cos:.4e}", budget.gamma);
    let space = NormedSpace::euclidean(2);
    let p1 = make_orthogonal_projector(&SubspaceBasis::new(2, &[vec![1.0, 0.0]])?, &space)?;
    let p2 = make_orthogonal_projector(
        &SubspaceBasis::new(2, &[vec![cos, (1.0 - cos * cos).sqrt()]])?,
        &space,
    )?;
    let mut family = ProjectorFamily::new(space.clone(), vec![p1, p2])?;
    family.build_pairs_auto()?;
    family.certify_weak()?;

    let schedule = make_schedule(
        ScheduleSpec {
            kind: ScheduleKind::Random {
                mu,
                seed: 42,
                lambda: None,
            },
            steps: 2000,
        },
        n,
    )?;

    // Law-of-large-numbers statistics: |A(τ,k)|/k approaches freq.
    let freqs = lln_statistics(&schedule, n, 1000)?;
    println!("\nrunning block frequency |A(τ,k)|/k:");
    for k in [10, 100, 1000] {
        println!("  k = {k:>5}: {:.4}", freqs[k - 1]);
    }

    // Envelope beyond n·k_tau.
    let beta = family.beta_upper();
    let factor = random_block_factor(beta, params.q, n, params.lambda);
    let global = &family.consistency.as_ref().unwrap().global_op;
    let nimp = norm_in(
        &Mat::identity(space.dim()).sub(&global.matrix),
        &space,
    )
    .upper;
    let envelope =
        move |i: usize| Some(nimp * beta.powi(n as i32 - 1) * factor.powi((i / n) as i32));
    let trace = run_product(&family, &schedule, Some(&envelope))?;
    println!(
        "\nk_tau = {:?}; envelope active from step {}",
        trace.k_tau,
        trace.k_tau.map(|k| n * k).unwrap_or(0)
    );
    println!("violations beyond n·k_tau: {}", trace.violations());
    println!("final deviation: {:.3e}", trace.final_deviation());
    Ok(())
}
