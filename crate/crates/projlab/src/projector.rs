//! Projector construction and validation: orthogonal and oblique
//! projectors, intersection subspaces, pair projectors onto range
//! intersections, and the consistency certificates that product runs
//! rely on.
//!
//! A pair projector onto Im(P1) ∩ Im(P2) is only accepted when it
//! satisfies the compatibility identities P12·P1 = P12 and P12·P2 = P12
//! up to `COMPAT_TOL`; the identities are exact algebra, so anything
//! beyond floating-point slack is a genuine failure.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{nullspace, orthonormal_range, rank_from_sigma, spectral_norm, svd, Mat};
use crate::space::{norm_in, NormCertificate, NormedSpace, Operator};

/// Relative tolerance for every rank decision (against the largest
/// singular value). A wrong rank silently changes an intersection, which
/// corrupts the angles computed downstream.
pub const RANK_TOL: f64 = 1e-10;

/// Threshold separating "compatibility identity holds up to floating
/// point" from a genuine violation.
pub const COMPAT_TOL: f64 = 1e-8;

/// Idempotence tolerance: ||P² - P||₂ <= IDEM_TOL · (1 + ||P||₂²).
pub const IDEM_TOL: f64 = 1e-10;

/// A list of linearly independent vectors spanning a subspace. The empty
/// list is the zero subspace.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    dim: usize,
    /// Basis vectors as columns, exactly as supplied.
    mat: Mat,
    /// Orthonormalized copy of the same span.
    ortho: Mat,
}

impl SubspaceBasis {
    pub fn new(dim: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        for v in vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        let mat = Mat::from_cols(dim, vectors);
        let ortho = if vectors.is_empty() {
            Mat::zeros(dim, 0)
        } else {
            let f = svd(&mat);
            let rank = rank_from_sigma(&f.sigma, RANK_TOL);
            if rank != vectors.len() {
                return Err(Error::RankDeficientBasis {
                    vectors: vectors.len(),
                    rank,
                });
            }
            orthonormal_range(&mat, RANK_TOL)
        };
        Ok(SubspaceBasis { dim, mat, ortho })
    }

    pub fn empty(dim: usize) -> Self {
        SubspaceBasis {
            dim,
            mat: Mat::zeros(dim, 0),
            ortho: Mat::zeros(dim, 0),
        }
    }

    /// Builds a basis from a matrix whose columns are already orthonormal.
    pub(crate) fn from_orthonormal_cols(q: Mat) -> Self {
        SubspaceBasis {
            dim: q.rows(),
            mat: q.clone(),
            ortho: q,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis vectors (the subspace dimension).
    pub fn len(&self) -> usize {
        self.mat.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vectors(&self) -> Vec<Vec<f64>> {
        (0..self.mat.cols()).map(|j| self.mat.col(j)).collect()
    }

    /// Orthonormal basis of the same span, as matrix columns.
    pub fn orthonormal(&self) -> &Mat {
        &self.ortho
    }

    /// Distance of `v` from this subspace in the Euclidean norm.
    pub fn residual_of(&self, v: &[f64]) -> f64 {
        let proj = self.ortho.mul(&self.ortho.transpose()).apply(v);
        v.iter()
            .zip(&proj)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// An idempotent operator with verified structure: range and kernel bases
/// plus a cached norm certificate in the ambient space.
#[derive(Clone, Debug)]
pub struct Projector {
    pub op: Operator,
    pub range_basis: SubspaceBasis,
    pub kernel_basis: SubspaceBasis,
    pub norm_cert: NormCertificate,
}

impl Projector {
    pub fn matrix(&self) -> &Mat {
        &self.op.matrix
    }

    pub fn space(&self) -> &NormedSpace {
        &self.op.space
    }

    pub fn is_zero(&self) -> bool {
        self.range_basis.is_empty()
    }

    /// Idempotence residual ||P² - P||₂.
    pub fn idempotence_residual(&self) -> f64 {
        let p = &self.op.matrix;
        spectral_norm(&p.mul(p).sub(p))
    }

    /// Wraps an arbitrary matrix after verifying idempotence and deriving
    /// range and kernel bases from it.
    pub fn from_operator(op: Operator) -> Result<Self> {
        let p = &op.matrix;
        let norm2 = spectral_norm(p);
        let residual = spectral_norm(&p.mul(p).sub(p));
        if residual > IDEM_TOL * (1.0 + norm2 * norm2) {
            return Err(Error::NotIdempotent { residual });
        }
        let range = SubspaceBasis::from_orthonormal_cols(orthonormal_range(p, RANK_TOL));
        let kernel = SubspaceBasis::from_orthonormal_cols(nullspace(p, RANK_TOL));
        let cert = certify_projector_norm(p, &op.space, range.is_empty());
        Ok(Projector {
            norm_cert: cert,
            range_basis: range,
            kernel_basis: kernel,
            op,
        })
    }
}

/// Norm certificate for a verified projector. A nonzero idempotent has
/// norm at least 1 in every induced norm, so the lower end is bumped
/// accordingly when the ascent estimate falls short.
fn certify_projector_norm(p: &Mat, space: &NormedSpace, is_zero: bool) -> NormCertificate {
    if is_zero {
        return NormCertificate::exact(0.0);
    }
    let cert = norm_in(p, space);
    if cert.lower >= 1.0 {
        cert
    } else {
        NormCertificate::interval(1.0, cert.upper.max(1.0))
    }
}

/// Euclidean-orthogonal projector onto the span of `basis`.
pub fn make_orthogonal_projector(basis: &SubspaceBasis, space: &NormedSpace) -> Result<Projector> {
    if basis.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got: basis.dim(),
        });
    }
    let q = basis.orthonormal();
    let p = if q.cols() == 0 {
        Mat::zeros(space.dim(), space.dim())
    } else {
        q.mul(&q.transpose())
    };
    let kernel = SubspaceBasis::from_orthonormal_cols(if q.cols() == 0 {
        Mat::identity(space.dim())
    } else {
        nullspace(&p, RANK_TOL)
    });
    let cert = if basis.is_empty() {
        NormCertificate::exact(0.0)
    } else if space.is_euclidean() {
        // Symmetric idempotent: spectral norm is exactly 1.
        NormCertificate::exact(1.0)
    } else {
        certify_projector_norm(&p, space, false)
    };
    Ok(Projector {
        op: Operator::new(p, space.clone())?,
        range_basis: SubspaceBasis::from_orthonormal_cols(q.clone()),
        kernel_basis: kernel,
        norm_cert: cert,
    })
}

/// Projector that fixes `range` pointwise and kills `kernel`. The two
/// subspaces must be complementary.
pub fn make_oblique_projector(
    range: &SubspaceBasis,
    kernel: &SubspaceBasis,
    space: &NormedSpace,
) -> Result<Projector> {
    let d = space.dim();
    if range.dim() != d || kernel.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: range.dim().max(kernel.dim()),
        });
    }
    if range.len() + kernel.len() != d {
        return Err(Error::NonComplementary { ratio: 0.0 });
    }
    if range.is_empty() {
        return make_orthogonal_projector(range, space);
    }
    let stacked = range.orthonormal().hcat(kernel.orthonormal());
    let f = svd(&stacked);
    let smax = f.sigma.first().copied().unwrap_or(0.0);
    let smin = f.sigma.last().copied().unwrap_or(0.0);
    if smax <= 0.0 || smin <= RANK_TOL * smax {
        return Err(Error::NonComplementary {
            ratio: if smax > 0.0 { smin / smax } else { 0.0 },
        });
    }
    // P [R | K] = [R | 0]  =>  solve Mᵀ Xᵀ = [R | 0]ᵀ for X = P.
    let rhs = range
        .orthonormal()
        .hcat(&Mat::zeros(d, kernel.len()))
        .transpose();
    let xt = solve_transposed(&stacked, &rhs).ok_or(Error::NonComplementary {
        ratio: smin / smax,
    })?;
    let p = xt.transpose();
    let cert = certify_projector_norm(&p, space, false);
    Ok(Projector {
        op: Operator::new(p, space.clone())?,
        range_basis: SubspaceBasis::from_orthonormal_cols(range.orthonormal().clone()),
        kernel_basis: SubspaceBasis::from_orthonormal_cols(kernel.orthonormal().clone()),
        norm_cert: cert,
    })
}

fn solve_transposed(m: &Mat, rhs: &Mat) -> Option<Mat> {
    crate::linalg::solve(&m.transpose(), rhs)
}

/// Basis of Im(a) ∩ Im(b) by the principal-vector method: the singular
/// directions of QaᵀQb whose cosine is 1 up to the rank tolerance.
pub fn intersect_ranges(a: &SubspaceBasis, b: &SubspaceBasis) -> SubspaceBasis {
    let dim = a.dim();
    if a.is_empty() || b.is_empty() {
        return SubspaceBasis::empty(dim);
    }
    let qa = a.orthonormal();
    let qb = b.orthonormal();
    let m = qa.transpose().mul(qb);
    let f = svd(&m);
    let mut picked: Vec<Vec<f64>> = Vec::new();
    for (idx, &s) in f.sigma.iter().enumerate() {
        if s >= 1.0 - RANK_TOL {
            // Average the two reconstructions; they agree up to rounding.
            let xa = qa.apply(&f.u.col(idx));
            let xb = qb.apply(&f.v.col(idx));
            let avg: Vec<f64> = xa.iter().zip(&xb).map(|(x, y)| 0.5 * (x + y)).collect();
            picked.push(avg);
        }
    }
    if picked.is_empty() {
        return SubspaceBasis::empty(dim);
    }
    let q = orthonormal_range(&Mat::from_cols(dim, &picked), RANK_TOL);
    SubspaceBasis::from_orthonormal_cols(q)
}

/// How a pair projector is constructed.
#[derive(Clone, Debug)]
pub enum PairMode {
    /// Euclidean-orthogonal projector onto the range intersection.
    AutoOrthogonal,
    /// Oblique projector onto the intersection along the given kernel.
    Explicit(SubspaceBasis),
}

/// Certified projector onto Im(P_{j1}) ∩ Im(P_{j2}) together with its
/// measured compatibility residuals.
#[derive(Clone, Debug)]
pub struct PairProjector {
    pub op: Operator,
    /// 0-based projector indices (j1 < j2).
    pub pair: (usize, usize),
    pub residual_left: f64,
    pub residual_right: f64,
}

/// Builds the pair projector and fails when either compatibility identity
/// is violated beyond `COMPAT_TOL`; the candidate then does not witness an
/// angle for this pair and the caller may retry with another kernel.
pub fn make_pair_projector(
    p1: &Projector,
    p2: &Projector,
    pair: (usize, usize),
    mode: PairMode,
) -> Result<PairProjector> {
    let space = p1.space();
    let inter = intersect_ranges(&p1.range_basis, &p2.range_basis);
    let cand = match mode {
        PairMode::AutoOrthogonal => make_orthogonal_projector(&inter, space)?,
        PairMode::Explicit(kernel) => make_oblique_projector(&inter, &kernel, space)?,
    };
    let pm = cand.matrix();
    let left = spectral_norm(&pm.mul(p1.matrix()).sub(pm));
    let right = spectral_norm(&pm.mul(p2.matrix()).sub(pm));
    if left > COMPAT_TOL || right > COMPAT_TOL {
        return Err(Error::CompatibilityViolation {
            j1: pair.0 + 1,
            j2: pair.1 + 1,
            left,
            right,
        });
    }
    Ok(PairProjector {
        op: cand.op,
        pair,
        residual_left: left,
        residual_right: right,
    })
}

/// Consistency certificate level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConsistencyLevel {
    Weak,
    Full,
}

/// Witness that a family admits a projector onto the full range
/// intersection absorbing every member on the left.
#[derive(Clone, Debug)]
pub struct ConsistencyCertificate {
    pub global_op: Operator,
    /// Per-member residuals ||G·P_j - G||₂.
    pub residuals: Vec<f64>,
    pub level: ConsistencyLevel,
    /// For full certificates: one projector per subset of size >= 2
    /// (0-based, ascending indices).
    pub subset_table: Option<BTreeMap<Vec<usize>, Operator>>,
}

/// A family of projectors over one space, with whatever pair projectors,
/// weights and consistency evidence have been attached so far.
#[derive(Clone, Debug)]
pub struct ProjectorFamily {
    space: NormedSpace,
    projectors: Vec<Projector>,
    pair_projectors: BTreeMap<(usize, usize), PairProjector>,
    pub consistency: Option<ConsistencyCertificate>,
    pub alphas: Option<Vec<f64>>,
}

impl ProjectorFamily {
    pub fn new(space: NormedSpace, projectors: Vec<Projector>) -> Result<Self> {
        if projectors.is_empty() {
            return Err(Error::InvalidSpace("family must be nonempty".into()));
        }
        for p in &projectors {
            if p.space() != &space {
                return Err(Error::InvalidSpace(
                    "all projectors must share the family's space".into(),
                ));
            }
        }
        Ok(ProjectorFamily {
            space,
            projectors,
            pair_projectors: BTreeMap::new(),
            consistency: None,
            alphas: None,
        })
    }

    pub fn space(&self) -> &NormedSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projector(&self, j: usize) -> &Projector {
        &self.projectors[j]
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn pair(&self, j1: usize, j2: usize) -> Option<&PairProjector> {
        let key = if j1 < j2 { (j1, j2) } else { (j2, j1) };
        self.pair_projectors.get(&key)
    }

    pub fn pairs(&self) -> impl Iterator<Item = &PairProjector> {
        self.pair_projectors.values()
    }

    pub fn insert_pair(&mut self, pp: PairProjector) {
        let key = if pp.pair.0 < pp.pair.1 {
            pp.pair
        } else {
            (pp.pair.1, pp.pair.0)
        };
        self.pair_projectors.insert(key, pp);
    }

    /// Builds every missing pair projector with the orthogonal default.
    pub fn build_pairs_auto(&mut self) -> Result<()> {
        let n = self.len();
        for j1 in 0..n {
            for j2 in j1 + 1..n {
                if self.pair_projectors.contains_key(&(j1, j2)) {
                    continue;
                }
                let pp = make_pair_projector(
                    &self.projectors[j1],
                    &self.projectors[j2],
                    (j1, j2),
                    PairMode::AutoOrthogonal,
                )?;
                self.pair_projectors.insert((j1, j2), pp);
            }
        }
        Ok(())
    }

    /// Largest projector-norm upper certificate: the uniform bound used by
    /// every criterion.
    pub fn beta_upper(&self) -> f64 {
        self.projectors
            .iter()
            .map(|p| p.norm_cert.upper)
            .fold(0.0_f64, f64::max)
    }

    /// Basis of the intersection of all ranges.
    pub fn range_intersection(&self) -> SubspaceBasis {
        let mut acc = self.projectors[0].range_basis.clone();
        for p in &self.projectors[1..] {
            acc = intersect_ranges(&acc, &p.range_basis);
        }
        acc
    }

    /// Runs [`check_weak_consistency`] and stores the certificate.
    pub fn certify_weak(&mut self) -> Result<&ConsistencyCertificate> {
        let cert = check_weak_consistency(self)?;
        self.consistency = Some(cert);
        Ok(self.consistency.as_ref().unwrap())
    }
}

fn consistency_residuals(
    global: &Mat,
    family: &ProjectorFamily,
    members: &[usize],
) -> (Vec<f64>, Option<(usize, f64)>) {
    let mut residuals = Vec::with_capacity(members.len());
    let mut worst: Option<(usize, f64)> = None;
    for &j in members {
        let r = spectral_norm(&global.mul(family.projector(j).matrix()).sub(global));
        if r > COMPAT_TOL && worst.is_none() {
            worst = Some((j, r));
        }
        residuals.push(r);
    }
    (residuals, worst)
}

/// Certifies weak consistency with the default candidate: the orthogonal
/// projector onto the intersection of all ranges (the member itself for a
/// one-projector family).
pub fn check_weak_consistency(family: &ProjectorFamily) -> Result<ConsistencyCertificate> {
    let candidate = if family.len() == 1 {
        family.projector(0).clone()
    } else {
        make_orthogonal_projector(&family.range_intersection(), family.space())?
    };
    check_weak_consistency_with(family, &candidate)
}

/// Certifies weak consistency with a caller-supplied candidate projector
/// onto the full intersection.
pub fn check_weak_consistency_with(
    family: &ProjectorFamily,
    candidate: &Projector,
) -> Result<ConsistencyCertificate> {
    let members: Vec<usize> = (0..family.len()).collect();
    let (residuals, worst) = consistency_residuals(candidate.matrix(), family, &members);
    if let Some((index, residual)) = worst {
        return Err(Error::ConsistencyViolation {
            subset: members.iter().map(|j| j + 1).collect(),
            index: index + 1,
            residual,
        });
    }
    Ok(ConsistencyCertificate {
        global_op: candidate.op.clone(),
        residuals,
        level: ConsistencyLevel::Weak,
        subset_table: None,
    })
}

/// Certifies consistency over every subset of size >= 2, reporting the
/// first violating subset (subsets enumerated by ascending bitmask).
pub fn check_full_consistency(family: &ProjectorFamily) -> Result<ConsistencyCertificate> {
    let n = family.len();
    assert!(n <= 16, "full consistency enumeration is exponential in n");
    let mut table: BTreeMap<Vec<usize>, Operator> = BTreeMap::new();
    let mut global: Option<(Operator, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        let mut inter = family.projector(members[0]).range_basis.clone();
        for &j in &members[1..] {
            inter = intersect_ranges(&inter, &family.projector(j).range_basis);
        }
        let cand = make_orthogonal_projector(&inter, family.space())?;
        let (residuals, worst) = consistency_residuals(cand.matrix(), family, &members);
        if let Some((index, residual)) = worst {
            return Err(Error::ConsistencyViolation {
                subset: members.iter().map(|j| j + 1).collect(),
                index: index + 1,
                residual,
            });
        }
        if members.len() == n {
            global = Some((cand.op.clone(), residuals));
        }
        table.insert(members, cand.op);
    }
    let (global_op, residuals) = match global {
        Some(g) => g,
        // n = 1: the member itself is its own global projector.
        None => {
            let cert = check_weak_consistency(family)?;
            (cert.global_op, cert.residuals)
        }
    };
    Ok(ConsistencyCertificate {
        global_op,
        residuals,
        level: ConsistencyLevel::Full,
        subset_table: Some(table),
    })
}
