//! Small-`N` bosonic dynamics on periodic lattices, marginal densities, correlation
//! dressing and grid or pointwise realisations of the dressed hierarchy operators.
//!
//! Particle indices in operator signatures are 1-based, matching `x_1, …, x_k`.

mod checkpoint;
mod dressing;
mod functionals;
mod hierarchy;
mod identities;
mod marginal;
mod operators;
mod propagate;
mod tables;
mod wavefunction;

pub use checkpoint::{read_checkpoint, write_checkpoint, write_kernel_csv, HEADER_BYTES, MAGIC, VERSION};
pub use dressing::{dress, dressing_field, dressing_gap, undress, DressedMarginal, DressingGap, DRESSING_FLOOR};
pub use functionals::{chaos_distance, dk_metric, dk_observable, energy_functional, DK_FAMILY_SEED};
pub use hierarchy::{bbgky_residual, kinetic_commutator, pair_commutator, BbgkyReport};
pub use identities::{
    a_envelope_ratio, b_decomposition_residual, leibniz_identity_residual, sample_kernel_configs,
    wave_operator_identity_residual, Config, ConfigSampler, IdentityReport, SmoothClosure,
};
pub use marginal::{collapse_from_wavefunction, kernel_bytes, marginal, MarginalKernel};
pub use operators::{
    a_multiplier, a_total_multiplier, apply_a, apply_b_collapse, apply_conjugated_collapse, apply_e,
    collapse_prefactor, collapse_weight, conjugated_weight, e_coefficient, spectral_gradient, BVariant,
    CollapseSample, Localization,
};
pub use propagate::{interaction_energy, propagate, Propagator};
pub use tables::{GridInteraction, PairTable, SiteLayout};
pub use wavefunction::{init_product_state, WaveFunction};
