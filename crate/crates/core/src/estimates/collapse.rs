use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::grid::{complex_bytes, MemoryBudget};
use crate::manybody::SiteLayout;
use crate::scalar::Real;

use super::density::{apply_slot_multiplier, Representation, SpaceTimeDensity};

/// Smallest axis length accepted by [`collapsing_apply`].
pub const MIN_COLLAPSE_POINTS: usize = 8;

/// Which side of `Tr_{k+1}[δ(x_j − x_{k+1}), γ]` to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseTerm {
    /// `γ(x, x_j; x′, x_j)`.
    Plus,
    /// `γ(x, x_j′; x′, x_j′)`.
    Minus,
    /// `Plus − Minus`.
    Commutator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseResult<T> {
    /// `R^{(k)}B_{j,k+1}γ^{(k+1)}` as an order-`k` density.
    pub field: SpaceTimeDensity<T>,
    /// `∫‖field(t)‖_{L²} dt` by the trapezoid rule.
    pub l1_l2: T,
}

/// Restricts `x_{k+1} = x_{k+1}′` to `x_j` (or `x_j′`), then applies `∏|∇_{x_i}||∇_{x_i′}|`.
///
/// On the lattice `∫δ(x_j − y)f(y)dy` is the sample at `y = x_j`, so the restriction
/// carries no extra weight. `j` is 1-based.
pub fn collapsing_apply<T: Real>(
    gamma: &SpaceTimeDensity<T>,
    j: usize,
    term: CollapseTerm,
    budget: &MemoryBudget,
) -> Result<CollapseResult<T>> {
    let big = gamma.k;
    if big < 2 {
        return domain("collapse needs an input of order at least 2");
    }
    let k = big - 1;
    if j == 0 || j > k {
        return domain(format!("collapse index j = {j} outside 1..={k}"));
    }
    if gamma.grid.points_per_axis < MIN_COLLAPSE_POINTS {
        return domain(format!(
            "collapse refused: {} points per axis, need at least {MIN_COLLAPSE_POINTS}",
            gamma.grid.points_per_axis
        ));
    }
    let dense = gamma.to_dense(budget)?;
    let src = match &dense.repr {
        Representation::Dense(d) => d,
        Representation::LowRank(_) => unreachable!("to_dense returns a dense density"),
    };
    let grid = gamma.grid;
    let lay = SiteLayout::new(&grid);
    let out_slots = 2 * k;
    let in_slots = 2 * big;
    let s_out = grid.sites(out_slots);
    let s_in = grid.sites(in_slots);
    budget.check(complex_bytes::<T>(s_out * gamma.time.len))?;
    let mut data = vec![Complex::new(T::zero(), T::zero()); s_out * gamma.time.len];
    data.par_chunks_mut(s_out).enumerate().for_each(|(t, slice)| {
        let base = &src[t * s_in..(t + 1) * s_in];
        let mut out_sites = vec![0usize; out_slots];
        let mut in_sites = vec![0usize; in_slots];
        for (flat, z) in slice.iter_mut().enumerate() {
            lay.split(flat, out_slots, &mut out_sites);
            let mut pick = |y: usize| {
                in_sites[..k].copy_from_slice(&out_sites[..k]);
                in_sites[k] = y;
                in_sites[big..big + k].copy_from_slice(&out_sites[k..]);
                in_sites[big + k] = y;
                base[lay.join(&in_sites)]
            };
            *z = match term {
                CollapseTerm::Plus => pick(out_sites[j - 1]),
                CollapseTerm::Minus => pick(out_sites[k + j - 1]),
                CollapseTerm::Commutator => {
                    let p = pick(out_sites[j - 1]);
                    p - pick(out_sites[k + j - 1])
                }
            };
        }
    });
    let labels: Vec<usize> = (0..out_slots).collect();
    let h = grid.cell_volume().powi(out_slots as i32);
    let mut norms = Vec::with_capacity(gamma.time.len);
    for slice in data.chunks_mut(s_out) {
        apply_slot_multiplier(&grid, slice, &labels, &|_, q: T| q.sqrt());
        norms.push((slice.iter().map(|z| z.norm_sqr()).sum::<T>() * h).sqrt());
    }
    let l1_l2 = trapezoid(&norms, gamma.time.dt);
    Ok(CollapseResult {
        field: SpaceTimeDensity::dense(k, &grid, gamma.time, data)?,
        l1_l2,
    })
}

pub(crate) fn trapezoid<T: Real>(f: &[T], dt: T) -> T {
    match f.len() {
        0 => T::zero(),
        1 => f[0] * dt,
        n => (f.iter().copied().sum::<T>() - (f[0] + f[n - 1]) * T::lit(0.5)) * dt,
    }
}
