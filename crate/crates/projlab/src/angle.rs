//! The cosine of the angle attached to a compatible projector triple
//! (P1, P2, P12), its Friedrichs specialization for Euclidean subspaces,
//! and the commutator bound that links angles to products.
//!
//! Cosines are certificates, not plain numbers: when the ambient norm is
//! only known as an interval, criteria consume the upper end, which keeps
//! every certification sound. Values are never clamped at 1 — a cosine
//! above 1 is meaningful and simply fails the criteria.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{orthonormal_range, spectral_norm, Mat};
use crate::projector::{intersect_ranges, PairProjector, Projector, ProjectorFamily, RANK_TOL};
use crate::space::{norm_in, NormCertificate, NormedSpace, Operator};

/// Cosine of the angle for a certified triple:
/// max(||P1 (P2 - P12)||, ||P2 (P1 - P12)||) in the ambient norm.
pub fn cos_angle(p1: &Projector, p2: &Projector, p12: &PairProjector) -> NormCertificate {
    let space = p1.space();
    let a = p1.matrix().mul(&p2.matrix().sub(&p12.op.matrix));
    let b = p2.matrix().mul(&p1.matrix().sub(&p12.op.matrix));
    let ca = norm_in(&a, space);
    let cb = norm_in(&b, space);
    NormCertificate {
        lower: ca.lower.max(cb.lower),
        upper: ca.upper.max(cb.upper),
        exact: ca.exact && cb.exact,
    }
}

/// Largest principal-angle cosine between span(a) and span(b) after
/// deflating their intersection. Euclidean spaces only.
pub fn friedrichs_cos(
    a: &crate::projector::SubspaceBasis,
    b: &crate::projector::SubspaceBasis,
    space: &NormedSpace,
) -> Result<f64> {
    if !space.is_euclidean() {
        return Err(Error::HilbertOnly);
    }
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    let w = intersect_ranges(a, b);
    let qa = a.orthonormal();
    let qa_def = if w.is_empty() {
        qa.clone()
    } else {
        let qw = w.orthonormal();
        let proj = qw.mul(&qw.transpose());
        let residual = qa.sub(&proj.mul(qa));
        orthonormal_range(&residual, RANK_TOL)
    };
    if qa_def.cols() == 0 {
        return Ok(0.0);
    }
    Ok(spectral_norm(&qa_def.transpose().mul(b.orthonormal())))
}

/// One row of an angle table, indices 1-based for reports.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AngleRow {
    pub j1: usize,
    pub j2: usize,
    pub cos_lower: f64,
    pub cos_upper: f64,
    pub exact: bool,
}

/// Symmetric table of pairwise angle cosines with a zero diagonal.
#[derive(Clone, Debug)]
pub struct AngleTable {
    n: usize,
    entries: Vec<NormCertificate>,
}

impl AngleTable {
    /// Builds a table from explicit pairwise certificates (for bounds
    /// obtained outside this crate). Unlisted pairs default to exact 0;
    /// the diagonal is always exact 0.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize, NormCertificate)]) -> Self {
        let mut entries = vec![NormCertificate::exact(0.0); n * n];
        for &(j, k, c) in pairs {
            assert!(j < n && k < n && j != k, "bad pair ({j},{k})");
            entries[j * n + k] = c;
            entries[k * n + j] = c;
        }
        AngleTable { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, k: usize) -> NormCertificate {
        self.entries[j * self.n + k]
    }

    pub fn upper(&self, j: usize, k: usize) -> f64 {
        self.get(j, k).upper
    }

    pub fn lower(&self, j: usize, k: usize) -> f64 {
        self.get(j, k).lower
    }

    /// Largest off-diagonal upper bound; 0 for a single projector.
    pub fn max_upper(&self) -> f64 {
        let mut m = 0.0_f64;
        for j in 0..self.n {
            for k in j + 1..self.n {
                m = m.max(self.upper(j, k));
            }
        }
        m
    }

    pub fn rows(&self) -> Vec<AngleRow> {
        let mut out = Vec::new();
        for j in 0..self.n {
            for k in j + 1..self.n {
                let c = self.get(j, k);
                out.push(AngleRow {
                    j1: j + 1,
                    j2: k + 1,
                    cos_lower: c.lower,
                    cos_upper: c.upper,
                    exact: c.exact,
                });
            }
        }
        out
    }
}

/// Fills the pairwise cosine table from the family's certified pair
/// projectors. Every unordered pair must already have one.
pub fn angle_table(family: &ProjectorFamily) -> Result<AngleTable> {
    let n = family.len();
    let mut entries = vec![NormCertificate::exact(0.0); n * n];
    for j in 0..n {
        for k in j + 1..n {
            let pp = family
                .pair(j, k)
                .ok_or(Error::MissingPairProjector { j1: j + 1, j2: k + 1 })?;
            let c = cos_angle(family.projector(j), family.projector(k), pp);
            entries[j * n + k] = c;
            entries[k * n + j] = c;
        }
    }
    Ok(AngleTable { n, entries })
}

/// Both sides of the commutator bound for one operator `s`, and whether
/// the bound holds with `1e-9` slack.
#[derive(Clone, Copy, Debug)]
pub struct CommutatorCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub cos: f64,
    pub holds: bool,
}

/// Evaluates ||(P1 P2 - P2 P1) S|| against
/// ((beta + beta² + c)·c / (1 - c)) · (||(I-P1)S|| + ||(I-P2)S||).
///
/// `beta` defaults to the larger of the two projector norm uppers. Fails
/// when the cosine is not below 1, where the bound says nothing.
pub fn verify_commutator_bound(
    p1: &Projector,
    p2: &Projector,
    p12: &PairProjector,
    s: &Operator,
    beta: Option<f64>,
) -> Result<CommutatorCheck> {
    let space = p1.space();
    let c = cos_angle(p1, p2, p12).upper;
    if c >= 1.0 {
        return Err(Error::CosineNotBelowOne { cos: c });
    }
    let beta = beta.unwrap_or_else(|| p1.norm_cert.upper.max(p2.norm_cert.upper));
    let m1 = p1.matrix();
    let m2 = p2.matrix();
    let comm = m1.mul(m2).sub(&m2.mul(m1)).mul(&s.matrix);
    let lhs = norm_in(&comm, space).upper;
    let eye = Mat::identity(space.dim());
    let r1 = norm_in(&eye.sub(m1).mul(&s.matrix), space).upper;
    let r2 = norm_in(&eye.sub(m2).mul(&s.matrix), space).upper;
    let rhs = (beta + beta * beta + c) * c / (1.0 - c) * (r1 + r2);
    Ok(CommutatorCheck {
        lhs,
        rhs,
        cos: c,
        holds: lhs <= rhs + 1e-9,
    })
}
