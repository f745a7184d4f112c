use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::grid::{complex_bytes, LatticeGrid, MemoryBudget};
use crate::scalar::Real;

use super::tables::{PairTable, SiteLayout};
use super::wavefunction::WaveFunction;

/// Kernel `γ(x_1..x_k; x_1′..x_k′)`, rows indexed by the unprimed sites.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalKernel<T> {
    pub k: usize,
    pub grid: LatticeGrid<T>,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> MarginalKernel<T> {
    pub fn zeros(k: usize, grid: &LatticeGrid<T>) -> Self {
        let r = grid.sites(k);
        Self {
            k,
            grid: *grid,
            data: vec![Complex::new(T::zero(), T::zero()); r * r],
        }
    }

    /// Sites per side, `n^{dk}`.
    pub fn side(&self) -> usize {
        self.grid.sites(self.k)
    }

    /// `h^{dk}`.
    pub fn weight(&self) -> T {
        self.grid.cell_volume().powi(self.k as i32)
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.side() + col]
    }

    /// Product kernel `∏_j φ(x_j) conj φ(x_j′)`.
    pub fn product(phi: &[Complex<T>], k: usize, grid: &LatticeGrid<T>) -> Self {
        let mut psi = phi.to_vec();
        for _ in 1..k {
            psi = psi.iter().flat_map(|a| phi.iter().map(move |b| *a * *b)).collect();
        }
        let data = psi
            .iter()
            .flat_map(|a| psi.iter().map(move |b| *a * b.conj()))
            .collect();
        Self { k, grid: *grid, data }
    }

    pub fn trace(&self) -> Complex<T> {
        let s = self.side();
        let w = self.weight();
        (0..s).map(|i| self.data[i * s + i]).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b) * w
    }

    /// `max |γ(x;x′) − conj γ(x′;x)|`.
    pub fn hermiticity_defect(&self) -> T {
        let s = self.side();
        let mut worst = T::zero();
        for i in 0..s {
            for j in i..s {
                worst = worst.max((self.data[i * s + j] - self.data[j * s + i].conj()).norm());
            }
        }
        worst
    }

    /// Discrete Hilbert-Schmidt norm.
    pub fn hs_norm(&self) -> T {
        (self.data.iter().map(|z| z.norm_sqr()).sum::<T>() * self.weight() * self.weight()).sqrt()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.k != other.k || self.grid != other.grid {
            return domain("kernels live on different spaces");
        }
        Ok(Self {
            k: self.k,
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a - *b).collect(),
        })
    }

    /// Smallest eigenvalue of the discretised operator `γ·h^{dk}`.
    pub fn min_eigenvalue(&self) -> f64 {
        let s = self.side();
        let w = self.weight().to_f64_lossy();
        let m = DMatrix::from_fn(s, s, |i, j| {
            let z = self.data[i * s + j];
            nalgebra::Complex::new(z.re.to_f64_lossy() * w, z.im.to_f64_lossy() * w)
        });
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Tr_{k}`: traces out the last particle.
    pub fn partial_trace(&self) -> Result<Self> {
        if self.k == 0 {
            return domain("cannot trace out of an order-0 kernel");
        }
        let lay = SiteLayout::new(&self.grid);
        let per = lay.per_var();
        let k = self.k - 1;
        let small = self.grid.sites(k);
        let big = self.side();
        let h = self.grid.cell_volume();
        let data = (0..small * small)
            .into_par_iter()
            .map(|idx| {
                let (r, c) = (idx / small, idx % small);
                let mut acc = Complex::new(T::zero(), T::zero());
                for y in 0..per {
                    acc = acc + self.data[(r * per + y) * big + c * per + y];
                }
                acc * h
            })
            .collect();
        Ok(Self { k, grid: self.grid, data })
    }
}

/// Bytes of an order-`k` kernel.
pub fn kernel_bytes<T: Real>(grid: &LatticeGrid<T>, k: usize) -> u64 {
    let s = grid.sites(k);
    complex_bytes::<T>(s * s)
}

/// `γ^{(k)} = Tr_{k+1..N}|ψ⟩⟨ψ|` with cell-volume weights.
pub fn marginal<T: Real>(psi: &WaveFunction<T>, k: usize, budget: &MemoryBudget) -> Result<MarginalKernel<T>> {
    if k == 0 || k > psi.n {
        return domain(format!("marginal order {k} outside 1..={}", psi.n));
    }
    budget.check(kernel_bytes(&psi.grid, k))?;
    let rows = psi.grid.sites(k);
    let cols = psi.grid.sites(psi.n - k);
    let w = psi.grid.cell_volume().powi((psi.n - k) as i32);
    let a = &psi.amplitudes;
    let mut data = vec![Complex::new(T::zero(), T::zero()); rows * rows];
    data.par_chunks_mut(rows).enumerate().for_each(|(r, out)| {
        let ar = &a[r * cols..(r + 1) * cols];
        for (rp, o) in out.iter_mut().enumerate() {
            let ap = &a[rp * cols..(rp + 1) * cols];
            let mut acc = Complex::new(T::zero(), T::zero());
            for (x, y) in ar.iter().zip(ap) {
                acc = acc + *x * y.conj();
            }
            *o = acc * w;
        }
    });
    Ok(MarginalKernel {
        k,
        grid: psi.grid,
        data,
    })
}

/// `Σ_{j≤k} Tr_{k+1}[V(x_j − x_{k+1}), γ^{(k+1)}]` evaluated directly from `ψ`,
/// without forming `γ^{(k+1)}`.
pub fn collapse_from_wavefunction<T: Real>(
    psi: &WaveFunction<T>,
    k: usize,
    v: &PairTable<T>,
    budget: &MemoryBudget,
) -> Result<MarginalKernel<T>> {
    if k == 0 || k >= psi.n {
        return domain(format!("collapse order {k} needs 1 <= k < N = {}", psi.n));
    }
    budget.check(kernel_bytes(&psi.grid, k))?;
    let lay = SiteLayout::new(&psi.grid);
    let per = lay.per_var();
    let rows = psi.grid.sites(k);
    let rest = psi.grid.sites(psi.n - k - 1);
    let w = psi.grid.cell_volume().powi((psi.n - k) as i32);
    let a = &psi.amplitudes;
    let mut data = vec![Complex::new(T::zero(), T::zero()); rows * rows];
    data.par_chunks_mut(rows).enumerate().for_each(|(r, out)| {
        let mut xs = vec![0usize; k];
        let mut xps = vec![0usize; k];
        lay.split(r, k, &mut xs);
        for (rp, o) in out.iter_mut().enumerate() {
            lay.split(rp, k, &mut xps);
            let mut acc = Complex::new(T::zero(), T::zero());
            for y in 0..per {
                let mut dv = T::zero();
                for j in 0..k {
                    dv = dv + v.at(lay.diff(xs[j], y)) - v.at(lay.diff(xps[j], y));
                }
                if dv == T::zero() {
                    continue;
                }
                let base_r = (r * per + y) * rest;
                let base_p = (rp * per + y) * rest;
                let mut s = Complex::new(T::zero(), T::zero());
                for z in 0..rest {
                    s = s + a[base_r + z] * a[base_p + z].conj();
                }
                acc = acc + s * dv;
            }
            *o = acc * w;
        }
    });
    Ok(MarginalKernel {
        k,
        grid: psi.grid,
        data,
    })
}
