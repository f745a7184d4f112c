//! Cubic NLS `i∂_tφ = −Δφ + c₀|φ|²φ` on a periodic box, with the mass, energy
//! and the two space-time functionals compared in the uniqueness discussion.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::grid::{LatticeGrid, Spectral};
use crate::scalar::{cis, Real};

/// Single-particle field with its coupling constant.
#[derive(Debug, Clone, PartialEq)]
pub struct NLSField<T> {
    pub grid: LatticeGrid<T>,
    pub phi: Vec<Complex<T>>,
    pub coupling: T,
    pub time: T,
}

impl<T: Real> NLSField<T> {
    pub fn new(grid: &LatticeGrid<T>, phi: Vec<Complex<T>>, coupling: T) -> Result<Self> {
        if phi.len() != grid.sites(1) {
            return domain(format!("field has {} samples, grid has {}", phi.len(), grid.sites(1)));
        }
        Ok(Self {
            grid: *grid,
            phi,
            coupling,
            time: T::zero(),
        })
    }

    /// `A e^{iξ·x}` with `ξ = 2π m/L`.
    pub fn plane_wave(grid: &LatticeGrid<T>, amplitude: Complex<T>, mode: &[i64], coupling: T) -> Result<Self> {
        if mode.len() != grid.d {
            return domain("mode vector must have one entry per axis");
        }
        let n = grid.points_per_axis;
        let phi = (0..grid.sites(1))
            .map(|s| {
                let mut ph = T::zero();
                for (c, m) in mode.iter().enumerate() {
                    let i = (s / n.pow((grid.d - 1 - c) as u32)) % n;
                    ph = ph + T::lit(*m as f64) * T::TAU() / grid.box_length * grid.coord(i);
                }
                amplitude * cis(ph)
            })
            .collect();
        Self::new(grid, phi, coupling)
    }

    /// `∫|φ|²`.
    pub fn mass(&self) -> T {
        crate::grid::l2_norm_sq(&self.phi, self.grid.cell_volume())
    }

    /// `∫|∇φ|² + (c₀/2)|φ|⁴`.
    pub fn energy(&self) -> T {
        let kin = multiplier_norm_sq(&self.grid, &self.phi, |k2| k2);
        let h = self.grid.cell_volume();
        let pot = self.phi.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum::<T>() * h;
        kin + self.coupling * T::lit(0.5) * pot
    }

    /// `‖⟨∇⟩φ‖_{L²}`.
    pub fn esy_norm(&self) -> T {
        multiplier_norm_sq(&self.grid, &self.phi, |k2| T::one() + k2).sqrt()
    }

    /// `‖|∇|(|φ|²φ)‖_{L²}`.
    pub fn km_integrand(&self) -> T {
        let cubic: Vec<Complex<T>> = self.phi.iter().map(|z| *z * z.norm_sqr()).collect();
        multiplier_norm_sq(&self.grid, &cubic, |k2| k2).sqrt()
    }
}

/// `Σ_ξ m(|ξ|²)|f̂(ξ)|²` normalised so that `m ≡ 1` gives `‖f‖²`.
fn multiplier_norm_sq<T: Real>(grid: &LatticeGrid<T>, f: &[Complex<T>], m: impl Fn(T) -> T + Sync) -> T {
    let n = grid.points_per_axis;
    let d = grid.d;
    let k2: Vec<T> = grid.wavenumbers().iter().map(|q| *q * *q).collect();
    let mut hat = f.to_vec();
    Spectral::new(n).forward_all(&mut hat, d);
    let total: T = hat
        .par_iter()
        .enumerate()
        .map(|(p, z)| {
            let mut s = T::zero();
            let mut rest = p;
            for _ in 0..d {
                s = s + k2[rest % n];
                rest /= n;
            }
            m(s) * z.norm_sqr()
        })
        .collect::<Vec<T>>()
        .into_iter()
        .sum();
    total * grid.cell_volume() / T::from_usize_lossy(grid.sites(1))
}

/// Strang split-step stepper with the exact pointwise nonlinear phase.
pub struct NlsPropagator<T: Real> {
    grid: LatticeGrid<T>,
    dt: T,
    half: Vec<Complex<T>>,
    full: Vec<Complex<T>>,
    spectral: Spectral<T>,
}

impl<T: Real> NlsPropagator<T> {
    pub fn new(grid: &LatticeGrid<T>, dt: T) -> Result<Self> {
        if !(dt > T::zero()) {
            return domain("time step must be positive");
        }
        let n = grid.points_per_axis;
        let k = grid.wavenumbers();
        let d = grid.d;
        let table = |scale: T| -> Vec<Complex<T>> {
            (0..grid.sites(1))
                .map(|p| {
                    let mut s = T::zero();
                    let mut rest = p;
                    for _ in 0..d {
                        s = s + k[rest % n] * k[rest % n];
                        rest /= n;
                    }
                    cis(-s * dt * scale)
                })
                .collect()
        };
        Ok(Self {
            grid: *grid,
            dt,
            half: table(T::lit(0.5)),
            full: table(T::one()),
            spectral: Spectral::new(n),
        })
    }

    fn kinetic(&self, f: &mut [Complex<T>], table: &[Complex<T>]) {
        self.spectral.forward_all(f, self.grid.d);
        f.par_iter_mut().zip(table.par_iter()).for_each(|(z, p)| *z = *z * *p);
        self.spectral.inverse_all(f, self.grid.d);
    }

    fn nonlinear(&self, f: &mut [Complex<T>], c: T) {
        let dt = self.dt;
        f.par_iter_mut().for_each(|z| *z = *z * cis(-c * z.norm_sqr() * dt));
    }

    pub fn advance(&self, field: &mut NLSField<T>, steps: usize) {
        if steps == 0 {
            return;
        }
        self.kinetic(&mut field.phi, &self.half);
        for s in 0..steps {
            self.nonlinear(&mut field.phi, field.coupling);
            let t = if s + 1 == steps { &self.half } else { &self.full };
            self.kinetic(&mut field.phi, t);
        }
        field.time = field.time + self.dt * T::from_usize_lossy(steps);
    }
}

pub fn nls_propagate<T: Real>(phi: &NLSField<T>, dt: T, steps: usize) -> Result<NLSField<T>> {
    let p = NlsPropagator::new(&phi.grid, dt)?;
    let mut out = phi.clone();
    p.advance(&mut out, steps);
    Ok(out)
}

/// Snapshots every `every` steps, including the initial datum.
pub fn nls_trajectory<T: Real>(phi: &NLSField<T>, dt: T, steps: usize, every: usize) -> Result<Vec<NLSField<T>>> {
    if every == 0 {
        return domain("snapshot cadence must be positive");
    }
    let p = NlsPropagator::new(&phi.grid, dt)?;
    let mut cur = phi.clone();
    let mut out = vec![cur.clone()];
    let mut done = 0;
    while done < steps {
        let m = every.min(steps - done);
        p.advance(&mut cur, m);
        done += m;
        out.push(cur.clone());
    }
    Ok(out)
}

fn check_trajectory<T: Real>(traj: &[NLSField<T>]) -> Result<()> {
    if traj.is_empty() {
        return domain("empty trajectory");
    }
    Ok(())
}

/// `∫₀ᵀ ‖|∇|(|φ|²φ)‖_{L²} dt` by the trapezoid rule over the snapshot times.
pub fn km_functional<T: Real>(traj: &[NLSField<T>]) -> Result<T> {
    Ok(*km_partials(traj)?.last().expect("non-empty"))
}

/// Running trapezoid sums of the KM integrand, one per snapshot.
pub fn km_partials<T: Real>(traj: &[NLSField<T>]) -> Result<Vec<T>> {
    check_trajectory(traj)?;
    let vals: Vec<T> = traj.par_iter().map(|f| f.km_integrand()).collect();
    let mut acc = T::zero();
    let mut out = vec![T::zero()];
    for i in 1..traj.len() {
        let dt = traj[i].time - traj[i - 1].time;
        acc = acc + (vals[i] + vals[i - 1]) * dt * T::lit(0.5);
        out.push(acc);
    }
    Ok(out)
}

/// `sup_t ‖⟨∇⟩φ‖_{L²}` over the snapshots.
pub fn esy_functional<T: Real>(traj: &[NLSField<T>]) -> Result<T> {
    check_trajectory(traj)?;
    Ok(traj.iter().map(|f| f.esy_norm()).fold(T::zero(), T::max))
}

/// One row of a trajectory table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormRow<T> {
    pub t: T,
    pub mass: T,
    pub energy: T,
    pub esy: T,
    pub km_partial: T,
}

pub fn trajectory_norms<T: Real>(traj: &[NLSField<T>]) -> Result<Vec<NormRow<T>>> {
    let km = km_partials(traj)?;
    Ok(traj
        .iter()
        .zip(km)
        .map(|(f, k)| NormRow {
            t: f.time,
            mass: f.mass(),
            energy: f.energy(),
            esy: f.esy_norm(),
            km_partial: k,
        })
        .collect())
}
