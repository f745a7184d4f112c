//! Periodic lattices and multidimensional spectral transforms.
//!
//! Fields over several particles are stored row-major with one axis per
//! spatial component: particle 1 axes first, then particle 2, and so on.
//! Every axis has the same number of points.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Periodic cubic lattice for one particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeGrid<T> {
    pub d: usize,
    pub points_per_axis: usize,
    pub box_length: T,
}

impl<T: Real> LatticeGrid<T> {
    /// Dynamics grid: `d` in {1, 3}, power-of-two axis length in 8..=64.
    pub fn new(d: usize, points_per_axis: usize, box_length: T) -> Result<Self> {
        if !points_per_axis.is_power_of_two() || !(8..=64).contains(&points_per_axis) {
            return domain(format!(
                "points_per_axis must be a power of two in 8..=64, got {points_per_axis}"
            ));
        }
        Self::with_any_even(d, points_per_axis, box_length)
    }

    /// Relaxed constructor for coarse probe lattices: any even length in 4..=64.
    pub fn with_any_even(d: usize, points_per_axis: usize, box_length: T) -> Result<Self> {
        if d != 1 && d != 3 {
            return domain(format!("dimension must be 1 or 3, got {d}"));
        }
        if points_per_axis % 2 != 0 || !(4..=64).contains(&points_per_axis) {
            return domain(format!(
                "points_per_axis must be even in 4..=64, got {points_per_axis}"
            ));
        }
        if !(box_length > T::zero()) || !box_length.is_finite() {
            return domain("box_length must be positive");
        }
        Ok(Self {
            d,
            points_per_axis,
            box_length,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.points_per_axis
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.box_length / T::from_usize_lossy(self.points_per_axis)
    }

    #[inline]
    pub fn cell_volume(&self) -> T {
        self.spacing().powi(self.d as i32)
    }

    pub fn volume(&self) -> T {
        self.box_length.powi(self.d as i32)
    }

    /// Number of sites for `vars` particle variables.
    pub fn sites(&self, vars: usize) -> usize {
        self.points_per_axis.pow((self.d * vars) as u32)
    }

    /// Coordinate of axis index `i`, centred on the origin.
    #[inline]
    pub fn coord(&self, i: usize) -> T {
        T::from_usize_lossy(i) * self.spacing() - self.box_length * T::lit(0.5)
    }

    /// Signed integer frequency of axis index `i` in FFT order.
    #[inline]
    pub fn freq_index(&self, i: usize) -> i64 {
        let n = self.points_per_axis as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Physical wavenumber of axis index `i` in FFT order.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> T {
        T::lit(self.freq_index(i) as f64) * T::TAU() / self.box_length
    }

    pub fn wavenumbers(&self) -> Vec<T> {
        (0..self.points_per_axis).map(|i| self.wavenumber(i)).collect()
    }

    /// Minimum-image displacement between axis indices `i` and `j`.
    #[inline]
    pub fn displacement(&self, i: usize, j: usize) -> T {
        let n = self.points_per_axis as i64;
        let mut m = (i as i64 - j as i64).rem_euclid(n);
        if m >= n / 2 {
            m -= n;
        }
        T::lit(m as f64) * self.spacing()
    }

    /// Nyquist wavenumber.
    pub fn nyquist(&self) -> T {
        T::PI() * T::from_usize_lossy(self.points_per_axis) / self.box_length
    }
}

/// Splits a flat index over `axes` axes of length `n` into per-axis indices.
#[inline]
pub fn unravel(mut flat: usize, n: usize, axes: usize, out: &mut [usize]) {
    for a in (0..axes).rev() {
        out[a] = flat % n;
        flat /= n;
    }
}

#[inline]
pub fn ravel(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Byte footprint of `count` complex values.
pub fn complex_bytes<T>(count: usize) -> u64 {
    (count as u64) * (std::mem::size_of::<Complex<T>>() as u64)
}

/// Memory ceiling consulted before large allocations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryBudget {
    pub bytes: u64,
}

impl MemoryBudget {
    pub const DEFAULT_BYTES: u64 = 4 << 30;

    pub fn new(bytes: u64) -> Self {
        Self { bytes }
    }

    pub fn check(&self, required: u64) -> Result<()> {
        if required > self.bytes {
            Err(Error::MemoryBudget {
                required,
                budget: self.bytes,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for MemoryBudget {
    fn default() -> Self {
        Self::new(Self::DEFAULT_BYTES)
    }
}

/// Plans for in-place FFTs along axes of a uniform row-major array.
pub struct Spectral<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> Spectral<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalised forward transform along each listed axis.
    pub fn forward(&self, data: &mut [Complex<T>], total_axes: usize, axes: &[usize]) {
        for &a in axes {
            self.transform_axis(data, total_axes, a, false);
        }
    }

    /// Inverse transform along each listed axis, scaled by `1/n` per axis.
    pub fn inverse(&self, data: &mut [Complex<T>], total_axes: usize, axes: &[usize]) {
        for &a in axes {
            self.transform_axis(data, total_axes, a, true);
        }
        if !axes.is_empty() {
            let s = T::one() / T::from_usize_lossy(self.n).powi(axes.len() as i32);
            data.par_iter_mut().for_each(|z| *z = *z * s);
        }
    }

    pub fn forward_all(&self, data: &mut [Complex<T>], total_axes: usize) {
        let axes: Vec<usize> = (0..total_axes).collect();
        self.forward(data, total_axes, &axes);
    }

    pub fn inverse_all(&self, data: &mut [Complex<T>], total_axes: usize) {
        let axes: Vec<usize> = (0..total_axes).collect();
        self.inverse(data, total_axes, &axes);
    }

    fn transform_axis(&self, data: &mut [Complex<T>], total_axes: usize, axis: usize, inv: bool) {
        let n = self.n;
        assert!(axis < total_axes);
        assert_eq!(data.len(), n.pow(total_axes as u32));
        let fft = if inv { &self.inverse } else { &self.forward };
        let inner = n.pow((total_axes - axis - 1) as u32);
        let block = n * inner;
        const LINES_PER_TASK: usize = 64;
        if inner == 1 {
            data.par_chunks_mut(n * LINES_PER_TASK).for_each(|chunk| {
                let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
                fft.process_with_scratch(chunk, &mut scratch);
            });
            return;
        }
        // Transform column bundles of each contiguous block to keep accesses local.
        const COLS: usize = 16;
        data.par_chunks_mut(block).for_each(|blk| {
            let zero = Complex::new(T::zero(), T::zero());
            let mut lines = vec![zero; n * COLS];
            let mut scratch = vec![zero; fft.get_inplace_scratch_len()];
            let mut c0 = 0;
            while c0 < inner {
                let w = COLS.min(inner - c0);
                for j in 0..n {
                    let row = &blk[j * inner + c0..j * inner + c0 + w];
                    for (c, z) in row.iter().enumerate() {
                        lines[c * n + j] = *z;
                    }
                }
                fft.process_with_scratch(&mut lines[..w * n], &mut scratch);
                for j in 0..n {
                    let row = &mut blk[j * inner + c0..j * inner + c0 + w];
                    for (c, z) in row.iter_mut().enumerate() {
                        *z = lines[c * n + j];
                    }
                }
                c0 += w;
            }
        });
    }
}

/// Discrete L² norm squared with the given cell weight.
pub fn l2_norm_sq<T: Real>(data: &[Complex<T>], weight: T) -> T {
    data.iter().map(|z| z.norm_sqr()).sum::<T>() * weight
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_round_trip_on_middle_axis() {
        let n = 8;
        let sp = Spectral::<f64>::new(n);
        let orig: Vec<Complex<f64>> = (0..n * n * n)
            .map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut d = orig.clone();
        sp.forward(&mut d, 3, &[1]);
        sp.inverse(&mut d, 3, &[1]);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn plane_wave_lands_on_one_bin() {
        let g = LatticeGrid::<f64>::new(1, 16, 5.0).unwrap();
        let sp = Spectral::new(16);
        let m = 3usize;
        let mut d: Vec<Complex<f64>> = (0..16)
            .map(|i| {
                let x = g.coord(i);
                Complex::new(0.0, g.wavenumber(m) * x).exp()
            })
            .collect();
        sp.forward_all(&mut d, 1);
        for (i, z) in d.iter().enumerate() {
            if i == m {
                assert!((z.norm() - 16.0).abs() < 1e-12);
            } else {
                assert!(z.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn minimum_image() {
        let g = LatticeGrid::<f64>::new(1, 8, 8.0).unwrap();
        assert_eq!(g.displacement(7, 0), -1.0);
        assert_eq!(g.displacement(0, 7), 1.0);
        assert_eq!(g.displacement(4, 0), -4.0);
    }
}
