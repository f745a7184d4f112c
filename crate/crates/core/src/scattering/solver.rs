use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::numerics::fit_line;
use crate::scalar::Real;

use super::potential::RadialPotential;

/// Default relative tolerance of the radial solver.
pub const DEFAULT_TOL: f64 = 1e-11;

const MAX_STEPS: usize = 1 << 22;

/// Zero-energy scattering data of the screened problem `(−Δ + ½sV)(1 − s·w₀) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSolution<T> {
    pub r_grid: Vec<T>,
    /// `u = r·f` with `f = 1 − s·w₀`, normalised so that `u ~ r − s·a₀`.
    pub u: Vec<T>,
    pub u_prime: Vec<T>,
    pub w0: Vec<T>,
    pub a0: T,
    pub beta: T,
    pub n: u64,
    /// Screening factor `s = N^{β−1}`.
    pub screening: T,
    /// Richardson estimate of the relative discretisation error.
    pub residual: T,
    pub support: T,
}

/// Screening factor `N^{β−1}`.
pub fn screening_factor<T: Real>(n: u64, beta: T) -> T {
    T::lit(n as f64).powf(beta - T::one())
}

fn check_beta<T: Real>(beta: T) -> Result<()> {
    if !(beta > T::zero() && beta <= T::one()) {
        return domain(format!("beta must lie in (0, 1], got {beta}"));
    }
    Ok(())
}

pub fn solve_zero_energy<T: Real>(
    v: &RadialPotential<T>,
    n: u64,
    beta: T,
    tol: T,
) -> Result<ScatteringSolution<T>> {
    if n == 0 {
        return domain("particle count must be at least 1");
    }
    check_beta(beta)?;
    let mut sol = solve_screened(v, screening_factor(n, beta), tol)?;
    sol.n = n;
    sol.beta = beta;
    Ok(sol)
}

struct Trajectory<T> {
    r: Vec<T>,
    u: Vec<T>,
    p: Vec<T>,
}

/// RK4 for `u'' = ½·s·V(r)·u` from `u(0) = 0, u'(0) = 1`, `steps[i]` steps on segment `i`.
fn integrate<T: Real>(v: &RadialPotential<T>, s: T, seg: &[T], steps: &[usize]) -> Trajectory<T> {
    let total: usize = steps.iter().sum();
    let mut r = Vec::with_capacity(total + 1);
    let mut u = Vec::with_capacity(total + 1);
    let mut p = Vec::with_capacity(total + 1);
    let (mut uc, mut pc) = (T::zero(), T::one());
    r.push(T::zero());
    u.push(uc);
    p.push(pc);
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    for (w, &m) in seg.windows(2).zip(steps) {
        let (lo, hi) = (w[0], w[1]);
        let h = (hi - lo) / T::from_usize_lossy(m);
        let q = |x: T| half * s * v.value_in_segment(x, lo, hi);
        for i in 0..m {
            let x = lo + h * T::from_usize_lossy(i);
            let k1u = pc;
            let k1p = q(x) * uc;
            let k2u = pc + half * h * k1p;
            let k2p = q(x + half * h) * (uc + half * h * k1u);
            let k3u = pc + half * h * k2p;
            let k3p = q(x + half * h) * (uc + half * h * k2u);
            let k4u = pc + h * k3p;
            let k4p = q(x + h) * (uc + h * k3u);
            uc = uc + h * sixth * (k1u + T::lit(2.0) * (k2u + k3u) + k4u);
            pc = pc + h * sixth * (k1p + T::lit(2.0) * (k2p + k3p) + k4p);
            r.push(if i + 1 == m { hi } else { x + h });
            u.push(uc);
            p.push(pc);
        }
    }
    Trajectory { r, u, p }
}

/// Solves the problem at an explicit screening factor `s > 0`.
pub fn solve_screened<T: Real>(v: &RadialPotential<T>, s: T, tol: T) -> Result<ScatteringSolution<T>> {
    if !(s > T::zero()) || !s.is_finite() {
        return domain("screening factor must be positive");
    }
    let support = v.support_radius();
    let r_max = v.r_max;
    if r_max < support * T::lit(2.0) {
        return Err(Error::RmaxTooSmall {
            r_max: r_max.to_f64_lossy(),
            required: (support * T::lit(2.0)).to_f64_lossy(),
        });
    }
    let seg = v.segments(r_max);
    let h0 = (support / T::lit(32.0)).min(r_max / T::lit(256.0));
    let mut steps: Vec<usize> = seg
        .windows(2)
        .map(|w| ((w[1] - w[0]) / h0).ceil().to_usize().unwrap_or(1).max(4))
        .collect();

    let mut coarse = integrate(v, s, &seg, &steps);
    let (traj, residual) = loop {
        let fine_steps: Vec<usize> = steps.iter().map(|m| 2 * m).collect();
        let fine = integrate(v, s, &seg, &fine_steps);
        let scale = coarse.u.iter().fold(T::zero(), |a, b| a.max(b.abs())).max(T::min_positive_value());
        let sixteen = T::lit(16.0);
        let fifteen = T::lit(15.0);
        let mut est = T::zero();
        let mut ex = Trajectory {
            r: coarse.r.clone(),
            u: Vec::with_capacity(coarse.u.len()),
            p: Vec::with_capacity(coarse.u.len()),
        };
        for i in 0..coarse.u.len() {
            let (uf, pf) = (fine.u[2 * i], fine.p[2 * i]);
            est = est.max((uf - coarse.u[i]).abs() / fifteen);
            ex.u.push((sixteen * uf - coarse.u[i]) / fifteen);
            ex.p.push((sixteen * pf - coarse.p[i]) / fifteen);
        }
        let rel = est / scale;
        if rel <= tol {
            break (ex, rel);
        }
        if fine_steps.iter().sum::<usize>() * 2 > MAX_STEPS {
            return Err(Error::Numerical(format!(
                "radial solver did not reach tolerance {tol}: estimate {rel}"
            )));
        }
        steps = fine_steps;
        coarse = fine;
    };

    // Affine tail u = c (r − a) on [1.5·support, r_max].
    let tail_start = support * T::lit(1.5);
    let (tr, tu): (Vec<T>, Vec<T>) = traj
        .r
        .iter()
        .zip(&traj.u)
        .filter(|(r, _)| **r >= tail_start)
        .map(|(r, u)| (*r, *u))
        .unzip();
    if tr.len() < 2 {
        return Err(Error::RmaxTooSmall {
            r_max: r_max.to_f64_lossy(),
            required: (support * T::lit(2.0)).to_f64_lossy(),
        });
    }
    let (c, b, maxres) = fit_line(&tr, &tu)?;
    let uscale = tu.iter().fold(T::zero(), |a, x| a.max(x.abs()));
    if maxres > uscale * T::lit(1e-8) || !(c > T::zero()) {
        return Err(Error::RmaxTooSmall {
            r_max: r_max.to_f64_lossy(),
            required: (r_max * T::lit(2.0)).to_f64_lossy(),
        });
    }
    let a_s = -b / c;
    let u: Vec<T> = traj.u.iter().map(|x| *x / c).collect();
    let u_prime: Vec<T> = traj.p.iter().map(|x| *x / c).collect();
    let w0: Vec<T> = traj
        .r
        .iter()
        .zip(u.iter().zip(&u_prime))
        .map(|(&r, (&ui, &pi))| {
            let f = if r > T::zero() { ui / r } else { pi };
            (T::one() - f) / s
        })
        .collect();
    Ok(ScatteringSolution {
        r_grid: traj.r,
        u,
        u_prime,
        w0,
        a0: a_s / s,
        beta: T::one(),
        n: 1,
        screening: s,
        residual,
        support,
    })
}

/// `a₀ = scat(V)`, the unscreened scattering length.
pub fn scattering_length<T: Real>(v: &RadialPotential<T>) -> Result<T> {
    Ok(solve_screened(v, T::one(), T::lit(DEFAULT_TOL))?.a0)
}

/// `c₀ = ∫V` for `β < 1` and `8π·a₀` for `β = 1`.
pub fn coupling_constant<T: Real>(v: &RadialPotential<T>, beta: T) -> Result<T> {
    check_beta(beta)?;
    if beta < T::one() {
        Ok(v.integral_3d())
    } else {
        Ok(T::lit(8.0) * T::PI() * scattering_length(v)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanEntry<T> {
    pub n: u64,
    pub beta: T,
    /// `8π·N·scat(N⁻¹V_N)`.
    pub value: T,
    pub residual: T,
}

/// Evaluates `8π·N·scat(N⁻¹V_N)` along a list of particle counts.
pub fn born_limit_scan<T: Real>(
    v: &RadialPotential<T>,
    beta: T,
    n_list: &[u64],
) -> Result<Vec<ScanEntry<T>>> {
    check_beta(beta)?;
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return domain("N list must be strictly increasing");
    }
    n_list
        .par_iter()
        .map(|&n| {
            let sol = solve_zero_energy(v, n, beta, T::lit(DEFAULT_TOL))?;
            Ok(ScanEntry {
                n,
                beta,
                value: T::lit(8.0) * T::PI() * sol.a0,
                residual: sol.residual,
            })
        })
        .collect()
}

/// Log-log slopes of `w₀` and `|∇w₀|` over the exterior samples.
pub fn decay_profile<T: Real>(sol: &ScatteringSolution<T>) -> Result<(T, T)> {
    let r = &sol.r_grid;
    let idx: Vec<usize> = (1..r.len() - 1)
        .filter(|&i| r[i] > sol.support && sol.w0[i] > T::zero())
        .collect();
    if idx.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "exterior region has {} usable samples, need 10",
            idx.len()
        )));
    }
    let lr: Vec<T> = idx.iter().map(|&i| r[i].ln()).collect();
    let lw: Vec<T> = idx.iter().map(|&i| sol.w0[i].ln()).collect();
    let lg: Vec<T> = idx
        .iter()
        .map(|&i| {
            let g = (sol.w0[i + 1] - sol.w0[i - 1]) / (r[i + 1] - r[i - 1]);
            g.abs().ln()
        })
        .collect();
    let (pw, _, _) = fit_line(&lr, &lw)?;
    let (pg, _, _) = fit_line(&lr, &lg)?;
    Ok((pw, pg))
}
