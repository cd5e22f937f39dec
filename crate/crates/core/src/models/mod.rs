//! Model operators K and perturbation operators B.
//!
//! Diagonal models realize two-term laws exactly (optionally with a
//! deterministic or seeded-random remainder); Nystrom models discretize
//! covariance kernels on [0,1]; perturbations either saturate the decay
//! hypotheses by construction or are measured from integral kernels.

mod kernel;
mod law;
mod nystrom;
mod perturb;
mod quadrature;

pub use kernel::{KernelExpr, KernelSpec};
pub use law::{
    build_diagonal_k, build_two_sequence_k, AsymptoticLaw, ModelLaw, NystromData, Provenance,
    SpectralModel, Wobble,
};
pub use nystrom::{eigenfunction_interpolant, metric_perturbation_from_kernel, nystrom_model};
pub use perturb::{
    build_rank_one_perturbation, build_random_sign_perturbation, split_sign, PerturbationMatrix,
    PerturbationMode,
};
pub use quadrature::QuadratureRule;
