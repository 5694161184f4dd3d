//! Building and validating projectors: orthogonal, oblique, range
//! intersections, pair projectors with their compatibility residuals,
//! and consistency certificates.
//!
//! Run with: cargo run --example build_projectors

use projlab::projector::{
    check_full_consistency, intersect_ranges, make_oblique_projector, make_orthogonal_projector,
    make_pair_projector, PairMode, ProjectorFamily, SubspaceBasis,
};
use projlab::space::NormedSpace;

fn print_matrix(label: &str, m: &projlab::linalg::Mat) {
    println!("{label}:");
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format!("{:+.3}", m.get(i, j))).collect();
        println!("  [{}]", row.join(", "));
    }
}

fn main() -> projlab::Result<()> {
    let space = NormedSpace::euclidean(3);

    // Orthogonal projector onto a plane.
    let plane = SubspaceBasis::new(3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]])?;
    let p1 = make_orthogonal_projector(&plane, &space)?;
    print_matrix("orthogonal projector onto span{e1,e2}", p1.matrix());
    println!("  norm certificate: [{}, {}]", p1.norm_cert.lower, p1.norm_cert.upper);

    // Oblique projector: fixes a line, kills a non-orthogonal complement.
    let s2 = NormedSpace::euclidean(2);
    let range = SubspaceBasis::new(2, &[vec![1.0, 0.0]])?;
    let kernel = SubspaceBasis::new(2, &[vec![-1.0, 1.0]])?;
    let oblique = make_oblique_projector(&range, &kernel, &s2)?;
    print_matrix("\noblique projector (range e1, kernel (-1,1))", oblique.matrix());
    println!(
        "  norm = {} (> 1: obliqueness costs norm)",
        oblique.norm_cert.upper
    );

    // Range intersection by principal vectors.
    let plane2 = SubspaceBasis::new(3, &[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]])?;
    let inter = intersect_ranges(&plane, &plane2);
    println!("\nspan{{e1,e2}} ∩ span{{e2,e3}} has dimension {}", inter.len());

    // Pair projector with measured compatibility residuals.
    let p2 = make_orthogonal_projector(&plane2, &space)?;
    let pp = make_pair_projector(&p1, &p2, (0, 1), PairMode::AutoOrthogonal)?;
    println!(
        "pair projector residuals: left = {:.2e}, right = {:.2e}",
        pp.residual_left, pp.residual_right
    );

    // An incompatible candidate is rejected, not silently accepted:
    // an oblique projector onto the e1 axis breaks the absorption
    // identity against the orthogonal one.
    let oblique_line = make_oblique_projector(
        &SubspaceBasis::new(2, &[vec![1.0, 0.0]])?,
        &SubspaceBasis::new(2, &[vec![-1.0, 1.0]])?,
        &s2,
    )?;
    let ortho_line = make_orthogonal_projector(&SubspaceBasis::new(2, &[vec![1.0, 0.0]])?, &s2)?;
    let mut fam2 = ProjectorFamily::new(s2, vec![oblique_line, ortho_line])?;
    fam2.build_pairs_auto()?;
    match fam2.certify_weak() {
        Ok(_) => println!("\nunexpected: oblique family certified"),
        Err(e) => println!("\nconsistency check rejects the oblique family:\n  {e}"),
    }

    // Orthogonal families are consistent at every subset size.
    let axes: Vec<_> = (0..3)
        .map(|i| {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            make_orthogonal_projector(&SubspaceBasis::new(3, &[v]).unwrap(), &space).unwrap()
        })
        .collect();
    let family = ProjectorFamily::new(space, axes)?;
    let cert = check_full_consistency(&family)?;
    println!(
        "\ncoordinate axes: full consistency with {} subset projectors",
        cert.subset_table.map(|t| t.len()).unwrap_or(0)
    );
    Ok(())
}
