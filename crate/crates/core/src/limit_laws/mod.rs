//! Closed-form side: grid classes, normalisation, the case-wise exponent
//! functions and the limiting distribution `G`.

mod cases;
mod grid;
mod norm;
mod piterbarg;

pub use cases::{clamp_arg, f_case, CaseConstants, KindReq, TheoremCase, ARG_CLAMP};
pub use grid::{classify_grid, GridKind, GridSpec};
pub use norm::{a_t, norm_constants, ConstantTable, MaxTarget, NormConstants};
pub use piterbarg::{
    check_max_stability, cube_lattice, gumbel_marginal, Integration, LatticePoint, Margin,
    PiterbargLaw, PiterbargParams,
};
