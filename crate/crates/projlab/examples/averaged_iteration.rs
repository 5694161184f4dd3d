//! Averaged iteration T = Σ α_k P_k: the contraction rate from the angle
//! table, the C·r^i envelope, the energy function that drives the
//! contraction argument, and agreement of the iteration limit with the
//! canonical global projector.
//!
//! Run with: cargo run --example averaged_iteration

use projlab::angle::angle_table;
use projlab::criteria::{averaged_rate, WeightVector};
use projlab::engine::{averaged_operator, energy, run_averaged, LimitMode};
use projlab::linalg::{spectral_norm, Mat};
use projlab::projector::{make_orthogonal_projector, ProjectorFamily, SubspaceBasis};
use projlab::space::{NormedSpace, Operator};

fn main() -> projlab::Result<()> {
    // Two coordinate planes in R3 sharing the e2 axis.
    let space = NormedSpace::euclidean(3);
    let p1 = make_orthogonal_projector(
        &SubspaceBasis::new(3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]])?,
        &space,
    )?;
    let p2 = make_orthogonal_projector(
        &SubspaceBasis::new(3, &[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]])?,
        &space,
    )?;
    let mut family = ProjectorFamily::new(space.clone(), vec![p1, p2])?;
    family.build_pairs_auto()?;
    family.certify_weak()?;

    let alphas = WeightVector::uniform(2);
    let beta = family.beta_upper();
    let table = angle_table(&family)?;
    let rate = averaged_rate(&table, &alphas, beta)?;
    println!(
        "rate: r = {:.6} (min-variant {:.6}), C = {:.4}, pass = {}",
        rate.r, rate.r_min, rate.big_c, rate.pass
    );

    // Energy of I and its contraction under T.
    let t = averaged_operator(&family, &alphas);
    let eye = Operator::identity(space.clone());
    let e_i = energy(&family, &alphas, &eye)?;
    let t_op = Operator::new(t.clone(), space.clone())?;
    let e_t = energy(&family, &alphas, &t_op)?;
    println!("energy: E(I) = {e_i:.6}, E(T) = {e_t:.6} <= r·E(I) = {:.6}", rate.r * e_i);

    // Run the iteration; every step sits under C·r^i.
    let trace = run_averaged(&family, &alphas, 40, LimitMode::Certified)?;
    println!("\n  i    deviation        envelope");
    for s in trace.steps.iter().step_by(8) {
        println!(
            "{:>3}    {:.6e}    {:.6e}",
            s.step,
            s.deviation,
            s.envelope.unwrap_or(f64::NAN)
        );
    }
    println!("violations: {}", trace.violations());

    // The limit estimated from powers of T equals the certified global
    // projector (the projector onto span{e2} here).
    let estimated = run_averaged(&family, &alphas, 5, LimitMode::Estimate)?;
    let certified = &family.consistency.as_ref().unwrap().global_op.matrix;
    let gap = spectral_norm(&estimated.limit_op.matrix.sub(certified));
    println!("\n||estimated limit - certified global projector||_2 = {gap:.2e}");

    let mut e2 = Mat::zeros(3, 3);
    e2.set(1, 1, 1.0);
    println!(
        "certified limit is the projector onto the shared axis: {}",
        spectral_norm(&certified.sub(&e2)) < 1e-12
    );
    Ok(())
}
