//! Shared generators for the integration suites: seeded random
//! subspaces, orthogonal families, and oblique pairs built to satisfy
//! the pair-projector compatibility identities exactly.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use projlab::linalg::{orthonormal_range, Mat};
use projlab::projector::{
    make_oblique_projector, make_orthogonal_projector, make_pair_projector, PairMode, PairProjector,
    Projector, ProjectorFamily, SubspaceBasis,
};
use projlab::space::NormedSpace;

pub fn euclid(dim: usize) -> NormedSpace {
    NormedSpace::euclidean(dim)
}

pub fn random_subspace(dim: usize, k: usize, rng: &mut ChaCha8Rng) -> SubspaceBasis {
    loop {
        let cols: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
            .collect();
        if let Ok(b) = SubspaceBasis::new(dim, &cols) {
            return b;
        }
    }
}

/// Random orthonormal frame as matrix columns (redraws until full rank).
pub fn random_frame(dim: usize, rng: &mut ChaCha8Rng) -> Mat {
    loop {
        let m = Mat::from_rows(
            &(0..dim)
                .map(|_| (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
                .collect::<Vec<_>>(),
        );
        let q = orthonormal_range(&m, 1e-10);
        if q.cols() == dim {
            return q;
        }
    }
}

/// Family of random orthogonal projectors with auto pair projectors and
/// the weak-consistency certificate attached.
pub fn random_orthogonal_family(
    dim: usize,
    n: usize,
    max_rank: usize,
    rng: &mut ChaCha8Rng,
) -> ProjectorFamily {
    let space = euclid(dim);
    let projectors: Vec<Projector> = (0..n)
        .map(|_| {
            let k = 1 + (rng.gen::<u32>() as usize) % max_rank;
            make_orthogonal_projector(&random_subspace(dim, k, rng), &space).unwrap()
        })
        .collect();
    let mut family = ProjectorFamily::new(space, projectors).unwrap();
    family.build_pairs_auto().unwrap();
    family.certify_weak().unwrap();
    family
}

/// Orthogonal family with controlled pairwise cosines: members are lines
/// (or planes through one shared direction) built from a random frame
/// with mixing coefficients of size about `eps`.
pub fn small_angle_family(
    dim: usize,
    n: usize,
    eps: f64,
    shared_direction: bool,
    rng: &mut ChaCha8Rng,
) -> ProjectorFamily {
    assert!(dim >= n + shared_direction as usize);
    let space = euclid(dim);
    let frame = random_frame(dim, rng);
    let offset = shared_direction as usize;
    let mut projectors = Vec::with_capacity(n);
    for j in 0..n {
        let mut dir = frame.col(offset + j);
        for k in 0..n {
            if k == j {
                continue;
            }
            let mix = eps * (rng.gen::<f64>() * 2.0 - 1.0);
            for (d, f) in dir.iter_mut().zip(frame.col(offset + k)) {
                *d += mix * f;
            }
        }
        let mut vs = vec![dir];
        if shared_direction {
            vs.push(frame.col(0));
        }
        projectors
            .push(make_orthogonal_projector(&SubspaceBasis::new(dim, &vs).unwrap(), &space).unwrap());
    }
    let mut family = ProjectorFamily::new(space, projectors).unwrap();
    family.build_pairs_auto().unwrap();
    family.certify_weak().unwrap();
    family
}

/// Oblique pair satisfying both compatibility identities exactly: the
/// ranges share a subspace W (possibly trivial) and both kernels stay
/// orthogonal to W, so the orthogonal projector onto W absorbs each
/// member.
pub fn compatible_oblique_pair(
    dim: usize,
    rng: &mut ChaCha8Rng,
) -> (Projector, Projector, PairProjector) {
    let space = euclid(dim);
    let frame = random_frame(dim, rng);
    let w = if dim >= 3 && rng.gen::<bool>() { 1 } else { 0 };
    let a1 = frame.col(w);
    let mix = rng.gen::<f64>() * 0.3;
    let a2: Vec<f64> = frame
        .col(w)
        .iter()
        .zip(frame.col(w + 1))
        .map(|(x, y)| mix * x + (1.0 - mix * mix).sqrt() * y)
        .collect();

    let shared: Vec<Vec<f64>> = (0..w).map(|i| frame.col(i)).collect();
    let range = |axis: &[f64]| -> SubspaceBasis {
        let mut vs = shared.clone();
        vs.push(axis.to_vec());
        SubspaceBasis::new(dim, &vs).unwrap()
    };

    // Kernel basis: the frame directions beyond the range, each nudged
    // along the range axis. Staying inside span(W)-perp keeps the
    // absorption identity exact.
    let kernel = |axis: &[f64], rng: &mut ChaCha8Rng| -> SubspaceBasis {
        let mut vs = Vec::new();
        for i in (w + 1)..dim {
            let delta = rng.gen::<f64>() * 0.6 - 0.3;
            let col: Vec<f64> = frame
                .col(i)
                .iter()
                .zip(axis)
                .map(|(x, a)| x + delta * a)
                .collect();
            vs.push(col);
        }
        SubspaceBasis::new(dim, &vs).unwrap()
    };

    // The kernel construction for the second member must complement its
    // own axis, so build it from a frame of W-perp adapted to a2.
    let a2_completion: Vec<Vec<f64>> = {
        // Directions of W-perp orthogonal to a2: rotate (a1, f_{w+1})
        // and keep the rest of the frame.
        let mut vs = Vec::new();
        let orth: Vec<f64> = frame
            .col(w)
            .iter()
            .zip(frame.col(w + 1))
            .map(|(x, y)| -(1.0 - mix * mix).sqrt() * x + mix * y)
            .collect();
        vs.push(orth);
        for i in (w + 2)..dim {
            vs.push(frame.col(i));
        }
        vs
    };
    let kernel2 = |rng: &mut ChaCha8Rng| -> SubspaceBasis {
        let mut vs = Vec::new();
        for base in &a2_completion {
            let delta = rng.gen::<f64>() * 0.6 - 0.3;
            let col: Vec<f64> = base.iter().zip(&a2).map(|(x, a)| x + delta * a).collect();
            vs.push(col);
        }
        SubspaceBasis::new(dim, &vs).unwrap()
    };

    let p1 = make_oblique_projector(&range(&a1), &kernel(&a1, rng), &space).unwrap();
    let p2 = make_oblique_projector(&range(&a2), &kernel2(rng), &space).unwrap();
    let pp = make_pair_projector(&p1, &p2, (0, 1), PairMode::AutoOrthogonal)
        .expect("construction satisfies the compatibility identities");
    (p1, p2, pp)
}
