//! Certification of uniform convergence for averaged, cyclic,
//! quasi-periodic and random products of projections on finite
//! dimensional p-normed spaces, driven by an angle attached to each
//! compatible projector pair.
//!
//! The pieces, bottom up:
//!
//! - [`space`]: weighted p-norms and certified induced operator norms
//!   (exact for p in {1, 2, inf}, interval certificates elsewhere).
//! - [`projector`]: orthogonal and oblique projectors with verified
//!   structure, subspace intersections, pair projectors satisfying the
//!   compatibility identities, and consistency certificates.
//! - [`angle`]: the pairwise angle cosine, its Friedrichs specialization,
//!   and the commutator bound.
//! - [`criteria`]: contraction rates, angle budgets and the envelopes the
//!   runs are checked against.
//! - [`engine`]: schedules and runs producing deviation traces.
//! - [`scenario`] / [`commands`]: the JSON scenario surface and the file
//!   emitting commands behind the `projlab` binary.
//!
//! Every randomized piece is seeded, so identical inputs give identical
//! outputs, including byte-identical trace files.
//!
//! See the `examples/` directory for one runnable walk-through per
//! capability, e.g. `cargo run --example cyclic_products`.

pub mod angle;
pub mod commands;
pub mod criteria;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod projector;
pub mod scenario;
pub mod space;
pub mod svg;

pub use angle::{angle_table, cos_angle, friedrichs_cos, verify_commutator_bound, AngleTable};
pub use criteria::{
    averaged_rate, cyclic_envelope, gamma_for_quality, quasi_periodic_envelope, random_envelope,
    random_params, solve_gamma, CriteriaReport, WeightVector,
};
pub use engine::{
    block_frequencies, energy, lln_statistics, make_schedule, run_averaged, run_product,
    IterationTrace, LimitMode, Schedule, ScheduleKind, ScheduleSpec,
};
pub use error::{Error, Result};
pub use projector::{
    check_full_consistency, check_weak_consistency, intersect_ranges, make_oblique_projector,
    make_orthogonal_projector, make_pair_projector, PairMode, PairProjector, Projector,
    ProjectorFamily, SubspaceBasis,
};
pub use scenario::{load_scenario, save_scenario, Scenario};
pub use space::{
    estimate_norm_ascent, operator_norm, vector_norm, NormCertificate, NormedSpace, Operator, PExp,
};
