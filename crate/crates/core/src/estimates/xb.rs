use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::Result;
use crate::grid::{complex_bytes, LatticeGrid, MemoryBudget, Spectral};
use crate::manybody::SiteLayout;
use crate::numerics::gauss_legendre;
use crate::scalar::Real;

use super::density::{site_k2, Cutoff, Representation, SpaceTimeDensity, TimeAxis};

/// `‖α‖_{X_b}` from the discrete space-time Fourier transform.
///
/// The weight is `⟨τ + Σ|ξ_j|² − Σ|ξ_j′|²⟩^{2b}` with `τ_m = 2πm/(len·dt)`. The
/// normalisation makes `b = 0` the discrete `L²_t L²` norm. The window is
/// treated as periodic, so the caller applies a cutoff first.
pub fn xb_norm<T: Real>(alpha: &SpaceTimeDensity<T>, b: T, budget: &MemoryBudget) -> Result<T> {
    let grid = alpha.grid;
    let slots = alpha.slots();
    let k = alpha.k;
    let taus = tau_grid(&alpha.time);
    let k2 = site_k2(&grid);
    let lay = SiteLayout::new(&grid);
    let half = T::lit(0.5);
    let weight = |s: T| {
        let q = T::one() + s * s;
        if b == -half {
            T::one() / q.sqrt()
        } else if b == half {
            q.sqrt()
        } else if b == T::zero() {
            T::one()
        } else {
            q.powf(b)
        }
    };
    let sigma = |flat: usize, labels: &[usize]| {
        let mut rest = flat;
        let mut s = T::zero();
        for &l in labels.iter().rev() {
            let q = k2[rest % lay.per_var()];
            s = if l < k { s + q } else { s - q };
            rest /= lay.per_var();
        }
        s
    };
    let nt = alpha.time.len;
    let mut planner = FftPlanner::new();
    let tfft = planner.plan_fft_forward(nt);
    let total_axes = slots * grid.d;
    let norm = alpha.time.dt * grid.cell_volume().powi(slots as i32)
        / (T::from_usize_lossy(nt) * T::from_usize_lossy(grid.points_per_axis).powi(total_axes as i32));
    let sum = match &alpha.repr {
        Representation::Dense(d) => {
            budget.check(complex_bytes::<T>(d.len()))?;
            let s = alpha.spatial_sites();
            let mut f = d.clone();
            let spec = Spectral::new(grid.points_per_axis);
            for slice in f.chunks_mut(s) {
                spec.forward_all(slice, total_axes);
            }
            let labels: Vec<usize> = (0..slots).collect();
            (0..s)
                .into_par_iter()
                .map(|x| {
                    let mut col: Vec<Complex<T>> = (0..nt).map(|t| f[t * s + x]).collect();
                    tfft.process(&mut col);
                    let sg = sigma(x, &labels);
                    col.iter().zip(&taus).map(|(z, tau)| weight(*tau + sg) * z.norm_sqr()).sum::<T>()
                })
                // sequential sum: the result must not depend on how rayon splits the range
                .collect::<Vec<T>>()
                .into_iter()
                .sum::<T>()
        }
        Representation::LowRank(lr) => {
            let passive = lr.passive(slots);
            let na = lr.active.len();
            let np = passive.len();
            let rank = lr.terms.len();
            budget.check(complex_bytes::<T>(rank * (grid.sites(na) + grid.sites(np) + nt)))?;
            let spec = Spectral::new(grid.points_per_axis);
            let mut ghat = Vec::with_capacity(rank);
            let mut ahat = Vec::with_capacity(rank);
            let mut phat = Vec::with_capacity(rank);
            let passive_hat = |p: &[Complex<T>]| {
                let mut p = p.to_vec();
                if np > 0 {
                    spec.forward_all(&mut p, np * grid.d);
                }
                p
            };
            let shared = lr.shared_passive().map(passive_hat);
            for r in &lr.terms {
                let mut g = r.time.clone();
                tfft.process(&mut g);
                ghat.push(g);
                let mut a = r.active.clone();
                spec.forward_all(&mut a, na * grid.d);
                ahat.push(a);
                phat.push(shared.clone().unwrap_or_else(|| passive_hat(&r.passive)));
            }
            let sig_a: Vec<T> = (0..grid.sites(na)).map(|x| sigma(x, &lr.active)).collect();
            let scale = phat
                .iter()
                .flat_map(|p| p.iter().map(|z| z.norm_sqr()))
                .fold(T::zero(), T::max);
            let floor = scale * T::lit(1e-30);
            let mut total = T::zero();
            for xp in 0..grid.sites(np) {
                if phat.iter().all(|p| p[xp].norm_sqr() <= floor) {
                    continue;
                }
                let sp = sigma(xp, &passive);
                let kappa: Vec<Complex<T>> = lr.terms.iter().zip(&phat).map(|(r, p)| r.coeff * p[xp]).collect();
                total = total
                    + (0..grid.sites(na))
                        .into_par_iter()
                        .map(|xa| {
                            let amp: Vec<Complex<T>> = (0..rank).map(|r| kappa[r] * ahat[r][xa]).collect();
                            let mut acc = T::zero();
                            for (m, tau) in taus.iter().enumerate() {
                                let z: Complex<T> = (0..rank).map(|r| amp[r] * ghat[r][m]).sum();
                                acc = acc + weight(*tau + sig_a[xa] + sp) * z.norm_sqr();
                            }
                            acc
                        })
                        .collect::<Vec<T>>()
                        .into_iter()
                        .sum::<T>();
            }
            total
        }
    };
    Ok((sum * norm).sqrt())
}

/// Angular frequencies of the time DFT in FFT order.
fn tau_grid<T: Real>(time: &TimeAxis<T>) -> Vec<T> {
    let nt = time.len as i64;
    let period = T::from_usize_lossy(time.len) * time.dt;
    (0..nt)
        .map(|m| {
            let f = if m < (nt + 1) / 2 { m } else { m - nt };
            T::lit(f as f64) * T::TAU() / period
        })
        .collect()
}

/// `θ̂(τ) = ∫θ(t)e^{−iτt}dt`, real because `θ` is even.
pub fn cutoff_transform<T: Real>(cutoff: &Cutoff<T>, tau: T) -> T {
    let two = T::lit(2.0);
    let t = cutoff.plateau;
    let flat = if tau == T::zero() { two * t } else { two * (tau * t).sin() / tau };
    let panels = 32 + (two * (tau * t).abs()).to_f64_lossy() as usize;
    let edge = gauss_legendre(|s| cutoff.value(s) * (tau * s).cos(), t, two * t, panels);
    flat + two * edge
}

/// `‖θ‖²_{H^b} = ∫⟨τ⟩^{2b}|θ̂(τ)|² dτ/2π` by direct quadrature.
pub fn cutoff_hb_norm_sq<T: Real>(cutoff: &Cutoff<T>, b: T) -> T {
    let cut = T::lit(200.0) / cutoff.plateau;
    let f = |tau: T| (T::one() + tau * tau).powf(b) * cutoff_transform(cutoff, tau).powi(2);
    T::lit(2.0) * gauss_legendre(f, T::zero(), cut, 2000) / T::TAU()
}

/// `θ(t)U^{(k)}(t)f` sampled on `time` for a kernel `f` over `2k` slots.
///
/// `U^{(k)}(t)` is the free evolution `e^{itΔ}f e^{−itΔ}`, which multiplies
/// `f̂(ξ, ξ′)` by `e^{−it(Σ|ξ_j|² − Σ|ξ_j′|²)}`.
pub fn free_evolution_window<T: Real>(
    grid: &LatticeGrid<T>,
    k: usize,
    f: &[Complex<T>],
    time: TimeAxis<T>,
    cutoff: &Cutoff<T>,
    budget: &MemoryBudget,
) -> Result<SpaceTimeDensity<T>> {
    let slots = 2 * k;
    let s = grid.sites(slots);
    budget.check(complex_bytes::<T>(s * time.len))?;
    let axes = slots * grid.d;
    let spec = Spectral::new(grid.points_per_axis);
    let mut fh = f.to_vec();
    spec.forward_all(&mut fh, axes);
    let k2 = site_k2(grid);
    let lay = SiteLayout::new(grid);
    let sig: Vec<T> = (0..s)
        .map(|x| {
            let mut sites = vec![0usize; slots];
            lay.split(x, slots, &mut sites);
            sites
                .iter()
                .enumerate()
                .map(|(v, &q)| if v < k { k2[q] } else { -k2[q] })
                .sum()
        })
        .collect();
    let mut data = vec![Complex::new(T::zero(), T::zero()); s * time.len];
    for (j, slice) in data.chunks_mut(s).enumerate() {
        let t = time.time(j);
        let th = cutoff.value(t);
        for ((z, a), sg) in slice.iter_mut().zip(&fh).zip(&sig) {
            *z = *a * crate::scalar::cis(-t * *sg) * th;
        }
        spec.inverse_all(slice, axes);
    }
    SpaceTimeDensity::dense(k, grid, time, data)
}
