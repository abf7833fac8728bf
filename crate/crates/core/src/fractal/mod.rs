//! Affine iterated function systems on the torus, their coding maps and
//! the walk maps obtained by inverting each contraction.

mod exponents;
mod ifs;
mod numeric;
mod orbit;

pub use exponents::{ell_sequence, kappa, kappa_ell_s, power_identity, precision_budget, repetition_weight, EllS};
pub use ifs::{code_prefix, coding_tail_bound, letter_frequencies, sample_word, AffineEndo, AffineIFS, Word};
pub use numeric::{
    coding_tail_log2, ifs_point_fixed, linear_map, precision_schedule, run_orbit, tail_length_for, FixedPoint,
    OrbitStart, OrbitStep, OrbitSummary,
};
pub use orbit::{commutation_defect, commutation_vector, h_word_at_zero, orbit_identity_check, walk_trajectory};

pub(crate) use ifs::sample_letters;
