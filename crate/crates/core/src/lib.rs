//! Shapley-Folkman machinery for separable nonconvex finite-sum problems.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. Everything that
//! draws random numbers takes an explicit seed or generator.
//!
//! - [`geometry`]: point sets, Minkowski averages, 2-D hulls, Hausdorff distances.
//! - [`envelope`]: convex envelopes of grid-sampled functions and the
//!   nonconvexity measures `rho` / `rho_k`.
//! - [`caratheodory`]: exact conic/convex reduction and approximate
//!   (Frank-Wolfe, sampling without replacement) representations.
//! - [`shapley_folkman`]: exact and approximate Shapley-Folkman decompositions.
//! - [`relaxation`]: the convex relaxation of a separable problem, purification
//!   and every duality-gap certificate.
//! - [`sampling_bounds`]: Serfling-type tail bounds, `sigma_m`, constraint sampling.
//! - [`lp`]: the dense two-phase simplex used throughout.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod caratheodory;
pub mod envelope;
mod error;
pub mod geometry;
pub mod instances;
pub(crate) mod linalg;
pub mod lp;
pub mod math;
pub mod relaxation;
pub mod sampling_bounds;
pub mod shapley_folkman;

pub use error::{Error, Result};

/// Seeded generator used by every randomized routine in the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the crate's generator from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
