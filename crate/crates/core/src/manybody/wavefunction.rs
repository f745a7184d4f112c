use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::grid::{complex_bytes, l2_norm_sq, LatticeGrid, MemoryBudget};
use crate::scalar::Real;

use super::tables::SiteLayout;

/// Bosonic `N`-body wavefunction on `grid^{N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction<T: Real> {
    pub n: usize,
    pub grid: LatticeGrid<T>,
    pub amplitudes: Vec<Complex<T>>,
    pub time: T,
}

impl<T: Real> WaveFunction<T> {
    pub fn axes(&self) -> usize {
        self.grid.d * self.n
    }

    /// Discrete `‖ψ‖²` with cell volume weights.
    pub fn norm_sq(&self) -> T {
        l2_norm_sq(&self.amplitudes, self.grid.cell_volume().powi(self.n as i32))
    }

    pub fn normalize(&mut self) {
        let s = T::one() / self.norm_sq().sqrt();
        self.amplitudes.par_iter_mut().for_each(|z| *z = *z * s);
    }

    /// Amplitudes with particle variables reordered: variable `v` of the result is `perm[v]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Vec<Complex<T>> {
        let lay = SiteLayout::new(&self.grid);
        let n = self.n;
        (0..self.amplitudes.len())
            .into_par_iter()
            .map(|flat| {
                let mut s = vec![0usize; n];
                lay.split(flat, n, &mut s);
                let src: Vec<usize> = (0..n).map(|v| s[perm[v]]).collect();
                self.amplitudes[lay.join(&src)]
            })
            .collect()
    }

    /// Largest deviation `|ψ − P_{ij}ψ|` over all particle transpositions.
    pub fn symmetry_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let mut perm: Vec<usize> = (0..self.n).collect();
                perm.swap(i, j);
                let p = self.permuted(&perm);
                let d = p
                    .iter()
                    .zip(&self.amplitudes)
                    .map(|(a, b)| (a - b).norm())
                    .fold(T::zero(), T::max);
                worst = worst.max(d);
            }
        }
        worst
    }
}

/// `ψ = ∏_j φ(x_j)`; an unnormalised `φ` is normalised and reported.
pub fn init_product_state<T: Real>(
    phi: &[Complex<T>],
    grid: &LatticeGrid<T>,
    n: usize,
    budget: &MemoryBudget,
) -> Result<(WaveFunction<T>, Vec<String>)> {
    let per = grid.sites(1);
    if phi.len() != per {
        return domain(format!("single-particle field has {} samples, grid has {per}", phi.len()));
    }
    if n == 0 {
        return domain("particle count must be at least 1");
    }
    budget.check(complex_bytes::<T>(grid.sites(n)))?;
    let mut warnings = Vec::new();
    let nrm = l2_norm_sq(phi, grid.cell_volume());
    let mut phi = phi.to_vec();
    if (nrm - T::one()).abs() > T::lit(1e-12) {
        warnings.push(format!("single-particle field had norm^2 {nrm}; normalised"));
        let s = T::one() / nrm.sqrt();
        phi.iter_mut().for_each(|z| *z = *z * s);
    }
    let mut amp = phi.clone();
    for _ in 1..n {
        let prev = amp;
        amp = prev
            .par_iter()
            .flat_map_iter(|a| phi.iter().map(move |b| *a * *b))
            .collect();
    }
    Ok((
        WaveFunction {
            n,
            grid: *grid,
            amplitudes: amp,
            time: T::zero(),
        },
        warnings,
    ))
}
