//! The angle between projections: pairwise cosine tables, agreement with
//! the Friedrichs angle for orthogonal projectors, and the commutator
//! bound that turns angles into product estimates.
//!
//! Run with: cargo run --example angle_tables

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use projlab::angle::{angle_table, cos_angle, friedrichs_cos, verify_commutator_bound};
use projlab::linalg::Mat;
use projlab::projector::{
    make_orthogonal_projector, make_pair_projector, PairMode, ProjectorFamily, SubspaceBasis,
};
use projlab::space::{NormedSpace, Operator};

fn line(theta: f64, space: &NormedSpace) -> projlab::projector::Projector {
    let basis = SubspaceBasis::new(2, &[vec![theta.cos(), theta.sin()]]).unwrap();
    make_orthogonal_projector(&basis, space).unwrap()
}

fn main() -> projlab::Result<()> {
    let space = NormedSpace::euclidean(2);

    // For lines at angle θ the cosine is |cos θ|.
    println!("lines at angle θ vs measured cosine:");
    for deg in [30.0_f64, 45.0, 60.0, 90.0] {
        let theta = deg.to_radians();
        let p1 = line(0.0, &space);
        let p2 = line(theta, &space);
        let pp = make_pair_projector(&p1, &p2, (0, 1), PairMode::AutoOrthogonal)?;
        let c = cos_angle(&p1, &p2, &pp);
        println!(
            "  θ = {deg:>4}°: cos = {:.12}  (|cos θ| = {:.12})",
            c.upper,
            theta.cos().abs()
        );
    }

    // Agreement with the Friedrichs angle on random subspaces of R^4.
    let s4 = NormedSpace::euclidean(4);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let rand_basis = |k: usize, rng: &mut ChaCha8Rng| loop {
            let cols: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..4).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
                .collect();
            if let Ok(b) = SubspaceBasis::new(4, &cols) {
                return b;
            }
        };
        let b1 = rand_basis(2, &mut rng);
        let b2 = rand_basis(2, &mut rng);
        let p1 = make_orthogonal_projector(&b1, &s4)?;
        let p2 = make_orthogonal_projector(&b2, &s4)?;
        let pp = make_pair_projector(&p1, &p2, (0, 1), PairMode::AutoOrthogonal)?;
        let c = cos_angle(&p1, &p2, &pp).upper;
        let f = friedrichs_cos(&b1, &b2, &s4)?;
        worst = worst.max((c - f).abs());
    }
    println!("\nmax |cos - friedrichs| over 100 random plane pairs: {worst:.2e}");

    // A full pairwise table for three planes sharing an axis.
    let s4 = NormedSpace::euclidean(4);
    let planes = [
        vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]],
        vec![vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]],
        vec![vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]],
    ];
    let projectors: Vec<_> = planes
        .iter()
        .map(|b| make_orthogonal_projector(&SubspaceBasis::new(4, b).unwrap(), &s4).unwrap())
        .collect();
    let mut family = ProjectorFamily::new(s4.clone(), projectors)?;
    family.build_pairs_auto()?;
    let table = angle_table(&family)?;
    println!("\nangle table for three planes sharing the e2 axis:");
    for row in table.rows() {
        println!(
            "  ({}, {}): cos in [{:.2e}, {:.2e}], exact = {}",
            row.j1, row.j2, row.cos_lower, row.cos_upper, row.exact
        );
    }

    // The commutator bound on a random operator.
    let p1 = family.projector(0).clone();
    let p2 = family.projector(1).clone();
    let pp = family.pair(0, 1).unwrap().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = Operator::new(
        Mat::from_rows(
            &(0..4)
                .map(|_| (0..4).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
                .collect::<Vec<_>>(),
        ),
        s4,
    )?;
    let check = verify_commutator_bound(&p1, &p2, &pp, &s, None)?;
    println!(
        "\ncommutator bound on a random S: lhs = {:.3e} <= rhs = {:.3e} (holds: {})",
        check.lhs, check.rhs, check.holds
    );
    Ok(())
}
