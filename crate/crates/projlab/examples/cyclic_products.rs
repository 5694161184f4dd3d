//! Cyclic products (P_n ... P_1)^i: derive the angle budget for a target
//! per-sweep quality q, build a family inside the budget and watch the
//! deviation sit under q^i at every sweep boundary.
//!
//! Run with: cargo run --example cyclic_products

use projlab::criteria::gamma_for_quality;
use projlab::engine::{make_schedule, run_product, ScheduleKind, ScheduleSpec};
use projlab::projector::{make_orthogonal_projector, ProjectorFamily, SubspaceBasis};
use projlab::space::NormedSpace;

fn main() -> projlab::Result<()> {
    let q = 0.5;
    let budget = gamma_for_quality(1.0, 2, 2, q)?;
    println!(
        "quality target q = {q}: angle budget gamma = {:.4e} (uniform {:.4e}, split {:.4e}, i0 = {})",
        budget.gamma, budget.gamma_uniform, budget.gamma_split, budget.i0
    );

    // Two lines with cosine at 80% of the budget.
    let cos = 0.8 * budget.gamma;
    let space = NormedSpace::euclidean(2);
    let p1 = make_orthogonal_projector(&SubspaceBasis::new(2, &[vec![1.0, 0.0]])?, &space)?;
    let p2 = make_orthogonal_projector(
        &SubspaceBasis::new(2, &[vec![cos, (1.0 - cos * cos).sqrt()]])?,
        &space,
    )?;
    let mut family = ProjectorFamily::new(space, vec![p1, p2])?;
    family.build_pairs_auto()?;
    family.certify_weak()?;

    let schedule = make_schedule(
        ScheduleSpec {
            kind: ScheduleKind::Cyclic,
            steps: 40,
        },
        2,
    )?;
    let envelope = |i: usize| -> Option<f64> {
        if i % 2 == 0 {
            Some(q.powi((i / 2) as i32))
        } else {
            None
        }
    };
    let trace = run_product(&family, &schedule, Some(&envelope))?;
    println!("\n  step    deviation        envelope (at sweep boundaries)");
    for s in trace.steps.iter().filter(|s| s.envelope.is_some()).take(10) {
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
