use num_complex::Complex;
use rayon::prelude::*;

use crate::boardgame::{expand_l, LMonomial};
use crate::error::{domain, Result};
use crate::grid::{MemoryBudget, Spectral};
use crate::scalar::Real;
use crate::scattering::PairProfile;

use super::marginal::{kernel_bytes, MarginalKernel};
use super::tables::GridInteraction;

fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// `−∇w(x_l−x_i)·∇w(x_l−x_j) / ((1−w(x_l−x_i))(1−w(x_l−x_j)))`.
pub fn a_multiplier<T: Real>(profile: &PairProfile<T>, xi: &[T], xj: &[T], xl: &[T]) -> T {
    let (di, dj) = (sub(xl, xi), sub(xl, xj));
    let gi = profile.grad(&di);
    let gj = profile.grad(&dj);
    let fi = T::one() - profile.w(norm(&di));
    let fj = T::one() - profile.w(norm(&dj));
    -dot(&gi, &gj) / (fi * fj)
}

/// Multiplier of `A_N^{(k)}`: [`a_multiplier`] summed over distinct ordered triples.
pub fn a_total_multiplier<T: Real>(profile: &PairProfile<T>, xs: &[Vec<T>]) -> T {
    let k = xs.len();
    let mut acc = T::zero();
    for l in 0..k {
        for i in 0..k {
            for j in 0..k {
                if i != l && j != l && i != j {
                    acc = acc + a_multiplier(profile, &xs[i], &xs[j], &xs[l]);
                }
            }
        }
    }
    acc
}

/// `2∇w(x_j−x_l)/(1−w(x_j−x_l))`, the coefficient of `∇_{x_l}` in `E_{j,l}`.
pub fn e_coefficient<T: Real>(profile: &PairProfile<T>, xj: &[T], xl: &[T]) -> Vec<T> {
    let d = sub(xj, xl);
    let f = T::one() - profile.w(norm(&d));
    let two = T::lit(2.0);
    profile.grad(&d).into_iter().map(|g| two * g / f).collect()
}

pub(crate) fn norm<T: Real>(x: &[T]) -> T {
    x.iter().map(|c| *c * *c).sum::<T>().sqrt()
}

/// Which collapsing operator to realise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BVariant {
    /// `V_N(x_l−y) − V_N(x_l′−y)`.
    Plain,
    /// `Ṽ_N(x_l−y) − Ṽ_N(x_l′−y)`.
    Tilde,
    /// `Ṽ_N(x_l−y)L_{l} − Ṽ_N(x_l′−y)L_{l′}`.
    Many,
}

/// Pair data of one output entry `(x; x′)` against the traced variable `y`.
#[derive(Debug, Clone)]
pub struct CollapseSample<T> {
    /// `V_N(x_l − y)`.
    pub v: T,
    /// `V_N(x_l′ − y)`.
    pub v_primed: T,
    /// `w_N(x_j − y)` for `j = 1..=k`.
    pub w: Vec<T>,
    /// `w_N(x_j′ − y)` for `j = 1..=k`.
    pub w_primed: Vec<T>,
}

/// Localisation expansion for one `l`, reused across samples.
#[derive(Debug, Clone)]
pub struct Localization {
    pub l: usize,
    pub monomials: Vec<LMonomial>,
}

impl Localization {
    pub fn new(k: usize, l: usize) -> Self {
        Self {
            l,
            monomials: expand_l(k, l),
        }
    }

    /// `(L_{l}, L_{l′})`; the primed factor is obtained by exchanging the two `w` lists.
    pub fn eval<T: Real>(&self, s: &CollapseSample<T>) -> (T, T) {
        let lu = self.monomials.iter().map(|m| m.eval(&s.w, &s.w_primed)).sum();
        let lp = self.monomials.iter().map(|m| m.eval(&s.w_primed, &s.w)).sum();
        (lu, lp)
    }
}

/// Integrand weight of the collapsing operator, without the `(N−k)/N` prefactor.
pub fn collapse_weight<T: Real>(variant: BVariant, loc: &Localization, s: &CollapseSample<T>) -> T {
    let li = loc.l - 1;
    match variant {
        BVariant::Plain => s.v - s.v_primed,
        BVariant::Tilde => s.v * (T::one() - s.w[li]) - s.v_primed * (T::one() - s.w_primed[li]),
        BVariant::Many => {
            let (lu, lp) = loc.eval(s);
            s.v * (T::one() - s.w[li]) * lu - s.v_primed * (T::one() - s.w_primed[li]) * lp
        }
    }
}

/// Weight of `W^{(k)} B_{l} (W^{(k+1)})^{−1}` by direct conjugation.
pub fn conjugated_weight<T: Real>(_loc: &Localization, s: &CollapseSample<T>) -> T {
    let g: T = s
        .w
        .iter()
        .chain(&s.w_primed)
        .map(|w| T::one() - *w)
        .fold(T::one(), |a, b| a * b);
    (s.v - s.v_primed) * g
}

/// `(N−k)/N`.
pub fn collapse_prefactor<T: Real>(n: u64, k: usize) -> T {
    T::lit((n as f64 - k as f64) / n as f64)
}

fn check_indices(k: usize, idx: &[usize]) -> Result<()> {
    for (a, &i) in idx.iter().enumerate() {
        if i == 0 || i > k {
            return domain(format!("particle index {i} outside 1..={k}"));
        }
        if idx[..a].contains(&i) {
            return domain(format!("particle indices must be distinct, got {idx:?}"));
        }
    }
    Ok(())
}

/// Multiplies the unprimed variables of `alpha` by the `(i, j, l)` piece of `A_N^{(k)}`.
pub fn apply_a<T: Real>(
    alpha: &MarginalKernel<T>,
    i: usize,
    j: usize,
    l: usize,
    inter: &GridInteraction<T>,
) -> Result<MarginalKernel<T>> {
    check_indices(alpha.k, &[i, j, l])?;
    let lay = inter.layout;
    let s = alpha.side();
    let d = inter.grid.d;
    let mult: Vec<T> = (0..s)
        .into_par_iter()
        .map(|r| {
            let mut xs = vec![0usize; alpha.k];
            lay.split(r, alpha.k, &mut xs);
            let ii = lay.diff(xs[l - 1], xs[i - 1]);
            let jj = lay.diff(xs[l - 1], xs[j - 1]);
            let g: T = (0..d).map(|c| inter.grad_w[c].at(ii) * inter.grad_w[c].at(jj)).sum();
            -g / ((T::one() - inter.w.at(ii)) * (T::one() - inter.w.at(jj)))
        })
        .collect();
    let mut out = alpha.clone();
    out.data.par_chunks_mut(s).zip(mult.par_iter()).for_each(|(row, m)| {
        row.iter_mut().for_each(|z| *z = *z * *m);
    });
    Ok(out)
}

/// Spectral `∂/∂x_l^c` of a kernel for every component `c`.
pub fn spectral_gradient<T: Real>(alpha: &MarginalKernel<T>, l: usize) -> Result<Vec<MarginalKernel<T>>> {
    check_indices(alpha.k, &[l])?;
    let grid = alpha.grid;
    let n = grid.points_per_axis;
    let d = grid.d;
    let total = 2 * alpha.k * d;
    let spec = Spectral::new(n);
    let mut ik: Vec<Complex<T>> = grid.wavenumbers().into_iter().map(|q| Complex::new(T::zero(), q)).collect();
    ik[n / 2] = Complex::new(T::zero(), T::zero());
    (0..d)
        .map(|c| {
            let axis = (l - 1) * d + c;
            let mut out = alpha.clone();
            spec.forward(&mut out.data, total, &[axis]);
            let inner = n.pow((total - axis - 1) as u32);
            out.data.par_iter_mut().enumerate().for_each(|(p, z)| {
                *z = *z * ik[(p / inner) % n];
            });
            spec.inverse(&mut out.data, total, &[axis]);
            Ok(out)
        })
        .collect()
}

/// `E_{j,l}α = 2(∇_{x_l}G_{j,l}/G_{j,l})·∇_{x_l}α`.
pub fn apply_e<T: Real>(
    alpha: &MarginalKernel<T>,
    j: usize,
    l: usize,
    inter: &GridInteraction<T>,
) -> Result<MarginalKernel<T>> {
    check_indices(alpha.k, &[j, l])?;
    let grads = spectral_gradient(alpha, l)?;
    let lay = inter.layout;
    let s = alpha.side();
    let two = T::lit(2.0);
    let mut out = MarginalKernel::zeros(alpha.k, &alpha.grid);
    out.data.par_chunks_mut(s).enumerate().for_each(|(r, row)| {
        let mut xs = vec![0usize; alpha.k];
        lay.split(r, alpha.k, &mut xs);
        let idx = lay.diff(xs[j - 1], xs[l - 1]);
        let f = T::one() - inter.w.at(idx);
        for (c, g) in grads.iter().enumerate() {
            let coef = two * inter.grad_w[c].at(idx) / f;
            if coef == T::zero() {
                continue;
            }
            for (col, z) in row.iter_mut().enumerate() {
                *z = *z + g.data[r * s + col] * coef;
            }
        }
    });
    Ok(out)
}

/// Contracts an order-`k+1` kernel over `y = x_{k+1}` against the chosen collapsing weight.
pub fn apply_b_collapse<T: Real>(
    alpha: &MarginalKernel<T>,
    l: usize,
    inter: &GridInteraction<T>,
    variant: BVariant,
    budget: &MemoryBudget,
) -> Result<MarginalKernel<T>> {
    collapse_grid(alpha, l, inter, budget, |loc, s| collapse_weight(variant, loc, s))
}

/// `W^{(k)} B_{l} (W^{(k+1)})^{−1}α` on the grid, by direct conjugation.
pub fn apply_conjugated_collapse<T: Real>(
    alpha: &MarginalKernel<T>,
    l: usize,
    inter: &GridInteraction<T>,
    budget: &MemoryBudget,
) -> Result<MarginalKernel<T>> {
    collapse_grid(alpha, l, inter, budget, conjugated_weight)
}

fn collapse_grid<T: Real, F>(
    alpha: &MarginalKernel<T>,
    l: usize,
    inter: &GridInteraction<T>,
    budget: &MemoryBudget,
    weight: F,
) -> Result<MarginalKernel<T>>
where
    F: Fn(&Localization, &CollapseSample<T>) -> T + Sync,
{
    if alpha.k < 2 {
        return domain("collapse needs a kernel of order at least 2");
    }
    if alpha.grid != inter.grid {
        return domain("kernel and interaction tables live on different grids");
    }
    let k = alpha.k - 1;
    check_indices(k, &[l])?;
    budget.check(kernel_bytes(&alpha.grid, k))?;
    let lay = inter.layout;
    let per = lay.per_var();
    let small = alpha.grid.sites(k);
    let big = alpha.side();
    let pre = collapse_prefactor::<T>(inter.n_particles, k) * alpha.grid.cell_volume();
    let loc = Localization::new(k, l);
    let mut out = MarginalKernel::zeros(k, &alpha.grid);
    out.data.par_chunks_mut(small).enumerate().for_each(|(r, row)| {
        let mut xs = vec![0usize; k];
        let mut xps = vec![0usize; k];
        let mut sample = CollapseSample {
            v: T::zero(),
            v_primed: T::zero(),
            w: vec![T::zero(); k],
            w_primed: vec![T::zero(); k],
        };
        lay.split(r, k, &mut xs);
        for (c, z) in row.iter_mut().enumerate() {
            lay.split(c, k, &mut xps);
            let mut acc = Complex::new(T::zero(), T::zero());
            for y in 0..per {
                sample.v = inter.v.at(lay.diff(xs[l - 1], y));
                sample.v_primed = inter.v.at(lay.diff(xps[l - 1], y));
                for q in 0..k {
                    sample.w[q] = inter.w.at(lay.diff(xs[q], y));
                    sample.w_primed[q] = inter.w.at(lay.diff(xps[q], y));
                }
                let wt = weight(&loc, &sample);
                if wt != T::zero() {
                    acc = acc + alpha.data[(r * per + y) * big + c * per + y] * wt;
                }
            }
            *z = acc * pre;
        }
    });
    Ok(out)
}
