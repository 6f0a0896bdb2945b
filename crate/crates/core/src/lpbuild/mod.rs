//! Linear programs as sparse rational models.
//!
//! * [`build_delsarte`]: the classic program over `a_0..a_n`.
//! * [`build_delsarte_lin`]: the symmetrized program over `I_{r,n}` with its
//!   variants, optionally fused over `GL(r,2)` orbits.
//! * [`build_cube_primal`] and [`build_cube_dual`]: the programs over functions
//!   on the cube, for small-scale equivalence checks.
//!
//! Variables are free; nonnegativity and zeroing appear as rows or by
//! elimination. Every row carries a [`Provenance`] tag.

mod cube;
mod model;
mod symmetric;

pub use cube::{
    build_cube_dual, build_cube_primal, full_rank_maps, gl_average, lift_dual_solution, verify_dual, DualSolution,
    LiftMethod,
};
pub use model::*;
pub use symmetric::{
    build_delsarte, build_delsarte_lin, build_delsarte_lin_with, build_delsarte_with, delsarte_point_from_phi,
    fuse_gl, phi_value, BuildOptions, MAX_INDEX_SET, MAX_KRAWTCHOUK_WORK,
};
