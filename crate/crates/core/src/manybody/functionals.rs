use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};
use crate::scalar::Real;

use super::hierarchy::fourier_multiplier;
use super::marginal::MarginalKernel;

/// Diagonal trace of `∏_j ⟨ξ_j⟩⟨ξ_j′⟩` times an optional extra `⟨ξ_1⟩⟨ξ_1′⟩`.
fn weighted_trace<T: Real>(kernel: &MarginalKernel<T>, extra: bool) -> T {
    let k = kernel.k;
    let out = fourier_multiplier(kernel, |sq| {
        let mut p = sq.iter().map(|s| (T::one() + *s).sqrt()).fold(T::one(), |a, b| a * b);
        if extra && k > 0 {
            p = p * (T::one() + sq[0]).sqrt() * (T::one() + sq[k]).sqrt();
        }
        p
    });
    out.trace().re
}

/// `(Tr S^{(k)}γ, Tr S_1S_1′S^{(k)}γ)` with `S_j = (1 − Δ_{x_j})^{1/2}`.
pub fn energy_functional<T: Real>(kernel: &MarginalKernel<T>) -> (T, T) {
    (weighted_trace(kernel, false), weighted_trace(kernel, true))
}

/// Hilbert-Schmidt distance from `∏_j |φ⟩⟨φ|`.
pub fn chaos_distance<T: Real>(gamma: &MarginalKernel<T>, phi: &[Complex<T>]) -> Result<T> {
    if phi.len() != gamma.grid.sites(1) {
        return domain("single-particle field does not match the kernel grid");
    }
    let prod = MarginalKernel::product(phi, gamma.k, &gamma.grid);
    Ok(gamma.sub(&prod)?.hs_norm())
}

/// Seed of the observable family used by [`dk_metric`].
pub const DK_FAMILY_SEED: u64 = 0x6470_6b5f_6661_6d31;

/// `i`-th member (from 1) of the fixed family: a random Hermitian kernel with unit Hilbert-Schmidt norm,
/// hence operator norm at most one.
pub fn dk_observable<T: Real>(template: &MarginalKernel<T>, i: usize) -> MarginalKernel<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(DK_FAMILY_SEED ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let s = template.side();
    let mut j = MarginalKernel::zeros(template.k, &template.grid);
    for r in 0..s {
        for c in r..s {
            let re = T::lit(rng.gen_range(-1.0..1.0));
            let im = if r == c { T::zero() } else { T::lit(rng.gen_range(-1.0..1.0)) };
            let z = Complex::new(re, im);
            j.data[r * s + c] = z;
            j.data[c * s + r] = z.conj();
        }
    }
    let nrm = j.hs_norm();
    j.data.iter_mut().for_each(|z| *z = *z / nrm);
    j
}

/// `Σ_{i=1}^{I} 2^{−i}|Tr J_i(γ − γ̃)|`; truncation error at most `2^{−I}‖γ − γ̃‖_{HS}`.
pub fn dk_metric<T: Real>(gamma: &MarginalKernel<T>, gamma_tilde: &MarginalKernel<T>, family_size: usize) -> Result<T> {
    let diff = gamma.sub(gamma_tilde)?;
    let w = diff.weight() * diff.weight();
    let mut total = T::zero();
    let mut half = T::one();
    for i in 1..=family_size {
        half = half * T::lit(0.5);
        let j = dk_observable(&diff, i);
        let pairing = j
            .data
            .iter()
            .zip(&diff.data)
            .fold(Complex::new(T::zero(), T::zero()), |a, (x, y)| a + x.conj() * *y)
            * w;
        total = total + half * pairing.norm();
    }
    Ok(total)
}
