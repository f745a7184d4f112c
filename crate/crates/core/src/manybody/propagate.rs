use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::grid::{complex_bytes, LatticeGrid, MemoryBudget, Spectral};
use crate::scalar::{cis, Real};
use crate::scattering::ScaledPotential;

use super::tables::{PairTable, SiteLayout};
use super::wavefunction::WaveFunction;

/// Multiplies a spectral array by `∏_a table[i_a]` over all axes.
pub(crate) fn apply_separable<T: Real>(data: &mut [Complex<T>], n: usize, axes: usize, table: &[Complex<T>]) {
    data.par_chunks_mut(n).enumerate().for_each(|(line, chunk)| {
        let mut pre = Complex::new(T::one(), T::zero());
        let mut rest = line;
        for _ in 0..axes - 1 {
            pre = pre * table[rest % n];
            rest /= n;
        }
        for (i, z) in chunk.iter_mut().enumerate() {
            *z = *z * pre * table[i];
        }
    });
}

/// Mean-field interaction energy `(1/N)Σ_{i<j}V_N(x_i − x_j)` on every configuration.
pub fn interaction_energy<T: Real>(grid: &LatticeGrid<T>, n: usize, v: &PairTable<T>, mean_field: T) -> Vec<T> {
    let lay = SiteLayout::new(grid);
    (0..grid.sites(n))
        .into_par_iter()
        .map(|flat| {
            let mut s = vec![0usize; n];
            lay.split(flat, n, &mut s);
            let mut e = T::zero();
            for i in 0..n {
                for j in i + 1..n {
                    e = e + v.at(lay.diff(s[i], s[j]));
                }
            }
            e * mean_field
        })
        .collect()
}

/// Strang split-step propagator for `H = −Σ Δ_j + (1/N)Σ_{i<j} V_N(x_i − x_j)`.
pub struct Propagator<T: Real> {
    grid: LatticeGrid<T>,
    n: usize,
    dt: T,
    kin_half: Vec<Complex<T>>,
    kin_full: Vec<Complex<T>>,
    pot_phase: Vec<Complex<T>>,
    spectral: Spectral<T>,
}

impl<T: Real> Propagator<T> {
    pub fn new(
        grid: &LatticeGrid<T>,
        n: usize,
        sp: &ScaledPotential<T>,
        dt: T,
        budget: &MemoryBudget,
    ) -> Result<Self> {
        if n == 0 {
            return domain("particle count must be at least 1");
        }
        if !(dt > T::zero()) {
            return domain("time step must be positive");
        }
        Self::check_budget(grid, n, budget)?;
        let v = PairTable::build(grid, |x| sp.v_n(x.iter().map(|c| *c * *c).sum::<T>().sqrt()));
        let energy = interaction_energy(grid, n, &v, sp.mean_field());
        let pot_phase = energy.par_iter().map(|e| cis(-dt * *e)).collect();
        let k = grid.wavenumbers();
        let half = T::lit(0.5);
        Ok(Self {
            grid: *grid,
            n,
            dt,
            kin_half: k.iter().map(|q| cis(-*q * *q * dt * half)).collect(),
            kin_full: k.iter().map(|q| cis(-*q * *q * dt)).collect(),
            pot_phase,
            spectral: Spectral::new(grid.points_per_axis),
        })
    }

    /// Bytes held during propagation: state, phase table, transform scratch.
    pub fn required_bytes(grid: &LatticeGrid<T>, n: usize) -> u64 {
        3 * complex_bytes::<T>(grid.sites(n))
    }

    pub fn check_budget(grid: &LatticeGrid<T>, n: usize, budget: &MemoryBudget) -> Result<()> {
        budget.check(Self::required_bytes(grid, n))
    }

    /// `dt` times the largest single-particle kinetic eigenvalue `d·k_max²`.
    pub fn stability_number(&self) -> T {
        let kmax = self.grid.nyquist();
        self.dt * kmax * kmax * T::from_usize_lossy(self.grid.d)
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    fn kinetic(&self, amp: &mut [Complex<T>], table: &[Complex<T>]) {
        let axes = self.grid.d * self.n;
        self.spectral.forward_all(amp, axes);
        apply_separable(amp, self.grid.points_per_axis, axes, table);
        self.spectral.inverse_all(amp, axes);
    }

    fn potential(&self, amp: &mut [Complex<T>]) {
        amp.par_iter_mut()
            .zip(self.pot_phase.par_iter())
            .for_each(|(z, p)| *z = *z * *p);
    }

    /// Advances `steps` Strang steps; adjacent kinetic half-steps are fused.
    pub fn advance(&self, psi: &mut WaveFunction<T>, steps: usize) {
        assert_eq!(psi.n, self.n);
        if steps == 0 {
            return;
        }
        self.kinetic(&mut psi.amplitudes, &self.kin_half);
        for s in 0..steps {
            self.potential(&mut psi.amplitudes);
            let table = if s + 1 == steps { &self.kin_half } else { &self.kin_full };
            self.kinetic(&mut psi.amplitudes, table);
        }
        psi.time = psi.time + self.dt * T::from_usize_lossy(steps);
    }
}

/// Propagates a copy of `psi` by `steps` steps of size `dt`.
pub fn propagate<T: Real>(
    psi: &WaveFunction<T>,
    sp: &ScaledPotential<T>,
    dt: T,
    steps: usize,
    budget: &MemoryBudget,
) -> Result<WaveFunction<T>> {
    let prop = Propagator::new(&psi.grid, psi.n, sp, dt, budget)?;
    let mut out = psi.clone();
    prop.advance(&mut out, steps);
    Ok(out)
}
