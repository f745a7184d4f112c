use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::grid::{MemoryBudget, Spectral};
use crate::scalar::Real;
use crate::scattering::ScaledPotential;

use super::marginal::{collapse_from_wavefunction, marginal, MarginalKernel};
use super::tables::{PairTable, SiteLayout};
use super::wavefunction::WaveFunction;

/// Applies `m(|ξ_1|², …, |ξ_k|², |ξ_1′|², …, |ξ_k′|²)` in Fourier space to a kernel.
pub(crate) fn fourier_multiplier<T: Real>(
    kernel: &MarginalKernel<T>,
    m: impl Fn(&[T]) -> T + Sync,
) -> MarginalKernel<T> {
    let grid = kernel.grid;
    let n = grid.points_per_axis;
    let d = grid.d;
    let vars = 2 * kernel.k;
    let axes = vars * d;
    let k2: Vec<T> = grid.wavenumbers().iter().map(|q| *q * *q).collect();
    let spec = Spectral::new(n);
    let mut out = kernel.clone();
    spec.forward_all(&mut out.data, axes);
    out.data.par_iter_mut().enumerate().for_each(|(p, z)| {
        let mut sq = vec![T::zero(); vars];
        let mut rest = p;
        for a in (0..axes).rev() {
            sq[a / d] = sq[a / d] + k2[rest % n];
            rest /= n;
        }
        *z = *z * m(&sq);
    });
    spec.inverse_all(&mut out.data, axes);
    out
}

/// `[−Δ, γ]` as the kernel `Σ_j(−Δ_{x_j} + Δ_{x_j′})γ`.
pub fn kinetic_commutator<T: Real>(gamma: &MarginalKernel<T>) -> MarginalKernel<T> {
    let k = gamma.k;
    fourier_multiplier(gamma, |sq| {
        sq[..k].iter().copied().sum::<T>() - sq[k..].iter().copied().sum::<T>()
    })
}

/// `(1/N)Σ_{i<j≤k}(V_N(x_i−x_j) − V_N(x_i′−x_j′))γ`.
pub fn pair_commutator<T: Real>(gamma: &MarginalKernel<T>, v: &PairTable<T>, mean_field: T) -> MarginalKernel<T> {
    let lay = SiteLayout::new(&gamma.grid);
    let k = gamma.k;
    let s = gamma.side();
    let pot: Vec<T> = (0..s)
        .map(|r| {
            let mut xs = vec![0usize; k];
            lay.split(r, k, &mut xs);
            let mut e = T::zero();
            for i in 0..k {
                for j in i + 1..k {
                    e = e + v.at(lay.diff(xs[i], xs[j]));
                }
            }
            e * mean_field
        })
        .collect();
    let mut out = gamma.clone();
    out.data.par_chunks_mut(s).enumerate().for_each(|(r, row)| {
        for (c, z) in row.iter_mut().enumerate() {
            *z = *z * (pot[r] - pot[c]);
        }
    });
    out
}

/// Mismatch of the marginal hierarchy at the middle snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbgkyReport<T> {
    /// Frobenius norm of the mismatch divided by the largest term norm.
    pub residual: T,
    pub mismatch: T,
    pub largest_term: T,
    pub dt: T,
}

/// Checks `i∂_tγ^{(k)} = [−Δ,γ^{(k)}] + (1/N)Σ[V_N,γ^{(k)}] + (N−k)/N Σ_j Tr_{k+1}[V_N(x_j−x_{k+1}), γ^{(k+1)}]`
/// with a centred difference in time around the middle snapshot.
///
/// The collapsing term is contracted directly from `ψ`, so `γ^{(k+1)}` is never formed.
pub fn bbgky_residual<T: Real>(
    snapshots: &[WaveFunction<T>],
    k: usize,
    sp: &ScaledPotential<T>,
    budget: &MemoryBudget,
) -> Result<BbgkyReport<T>> {
    if snapshots.len() < 3 {
        return domain(format!("need at least 3 snapshots, got {}", snapshots.len()));
    }
    let m = snapshots.len() / 2;
    let (prev, mid, next) = (&snapshots[m - 1], &snapshots[m], &snapshots[m + 1]);
    if prev.n != mid.n || next.n != mid.n || prev.grid != mid.grid || next.grid != mid.grid {
        return domain("snapshots must share particle count and grid");
    }
    let n = mid.n;
    if k == 0 || k > n {
        return domain(format!("order {k} outside 1..={n}"));
    }
    let (dt_a, dt_b) = (mid.time - prev.time, next.time - mid.time);
    if !(dt_a > T::zero()) || ((dt_a - dt_b) / dt_a).abs() > T::lit(1e-9) {
        return domain("snapshots must be uniformly spaced in time");
    }
    let grid = mid.grid;
    let v = PairTable::build(&grid, |x| sp.v_n(x.iter().map(|c| *c * *c).sum::<T>().sqrt()));

    let g_prev = marginal(prev, k, budget)?;
    let g_next = marginal(next, k, budget)?;
    let g_mid = marginal(mid, k, budget)?;
    let two_dt = dt_a + dt_b;
    let i_unit = Complex::new(T::zero(), T::one());
    let lhs: Vec<Complex<T>> = g_next
        .data
        .iter()
        .zip(&g_prev.data)
        .map(|(a, b)| i_unit * (*a - *b) / two_dt)
        .collect();

    let kin = kinetic_commutator(&g_mid);
    let pair = pair_commutator(&g_mid, &v, sp.mean_field());
    let mut terms = vec![lhs.clone(), kin.data, pair.data];
    if k < n {
        let pre = T::lit((n - k) as f64 / n as f64);
        let coll = collapse_from_wavefunction(mid, k, &v, budget)?;
        terms.push(coll.data.into_iter().map(|z| z * pre).collect());
    }
    let frob = |d: &[Complex<T>]| d.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    let mismatch: Vec<Complex<T>> = (0..lhs.len())
        .map(|p| terms[1..].iter().fold(lhs[p], |acc, t| acc - t[p]))
        .collect();
    let largest = terms.iter().map(|t| frob(t)).fold(T::zero(), T::max);
    let mis = frob(&mismatch);
    Ok(BbgkyReport {
        residual: if largest > T::zero() { mis / largest } else { T::zero() },
        mismatch: mis,
        largest_term: largest,
        dt: dt_a,
    })
}
