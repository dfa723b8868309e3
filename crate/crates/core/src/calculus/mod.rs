//! Loop integrals, cone extensions, metric derivatives and Stokes checks.

pub mod grid;
pub mod loops;
pub mod map;
pub mod md;
pub mod stokes;

pub use grid::GridSpec;
pub use loops::{bump_field, distance_field, fsum, loop_integral, LoopIntegral, SampledLoop, ScalarField};
pub use map::{
    bicombing_check, boundary_reproduces_loop, cone_extension, identity_disc_map, inner_disc_constant, BicombingCheck,
    SampledMap,
};
pub use md::{degeneracy_field, md_field, seminorm_check, Degeneracy, MdConfig, MdField, SeminormReport};
pub use stokes::{stokes_check, StokesReport};
