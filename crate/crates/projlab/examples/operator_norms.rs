//! Vector and operator norms over weighted p-normed spaces: exact values
//! for p in {1, 2, inf}, certified intervals elsewhere.
//!
//! Run with: cargo run --example operator_norms

use projlab::linalg::Mat;
use projlab::space::{estimate_norm_ascent, norm_in, vector_norm, NormedSpace, Operator, PExp};

fn main() -> projlab::Result<()> {
    // Vector norms.
    let euclid = NormedSpace::euclidean(2);
    println!("||(3,-4)||_2          = {}", vector_norm(&[3.0, -4.0], &euclid)?);
    let one = NormedSpace::new(3, PExp::Finite(1.0), None)?;
    println!("||(1,-2,3)||_1        = {}", vector_norm(&[1.0, -2.0, 3.0], &one)?);
    let weighted = NormedSpace::new(2, PExp::Finite(2.0), Some(vec![4.0, 1.0]))?;
    println!(
        "||(1,1)||_2,w=(4,1)   = {}",
        vector_norm(&[1.0, 1.0], &weighted)?
    );

    // Exact induced norms at the endpoint exponents.
    let a = Mat::from_rows(&[vec![1.0, -2.0], vec![3.0, 4.0]]);
    let n1 = norm_in(&a, &NormedSpace::new(2, PExp::Finite(1.0), None)?);
    let n2 = norm_in(&a, &euclid);
    let ninf = norm_in(&a, &NormedSpace::new(2, PExp::Infinity, None)?);
    println!("\nA = [[1,-2],[3,4]]");
    println!("||A||_1   = {} (exact: {})", n1.upper, n1.exact);
    println!("||A||_2   = {} (exact: {})", n2.upper, n2.exact);
    println!("||A||_inf = {} (exact: {})", ninf.upper, ninf.exact);

    // Interval certificate for p = 3: ascent from below, interpolation
    // from above. More starts never lower the bound.
    let p3 = NormedSpace::new(2, PExp::Finite(3.0), None)?;
    let shear = Operator::new(Mat::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]), p3)?;
    println!("\nA = [[1,1],[0,1]] in p = 3:");
    for starts in [1, 4, 32] {
        let cert = estimate_norm_ascent(&shear, starts, 1);
        println!(
            "  starts = {starts:>2}: lower = {:.12}, upper = {:.12}, exact = {}",
            cert.lower, cert.upper, cert.exact
        );
    }
    Ok(())
}
