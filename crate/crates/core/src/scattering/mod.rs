//! Zero-energy scattering for nonnegative radial pair potentials.
//!
//! The screened problem `(−Δ + ½sV)f = 0`, `f → 1`, is solved through
//! `u = r·f`, which satisfies `u'' = ½·s·V(r)·u`. With `f = 1 − s·w₀` the
//! reported length `a₀ = lim r·w₀(r)` equals `scat(sV)/s`, and for
//! `s = N^{β−1}` this is `N·scat(N⁻¹V_N)`.

mod potential;
mod profile;
mod scaled;
mod solver;

pub use potential::{PotentialKind, RadialPotential, NEGLIGIBLE};
pub use profile::PairProfile;
pub use scaled::ScaledPotential;
pub use solver::{
    born_limit_scan, coupling_constant, decay_profile, scattering_length, screening_factor,
    solve_screened, solve_zero_energy, ScanEntry, ScatteringSolution, DEFAULT_TOL,
};
