use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::scattering::ScaledPotential;

use super::marginal::MarginalKernel;
use super::tables::GridInteraction;

/// Smallest admissible `1 − w_N` before dressing is refused.
pub const DRESSING_FLOOR: f64 = 1e-6;

/// `α^{(k)} = γ^{(k)}/(G(x)G(x′))` together with `G_N^{(k)}` on the row sites.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedMarginal<T> {
    pub k: usize,
    pub alpha: MarginalKernel<T>,
    pub g: Vec<T>,
}

/// `G_N^{(k)}(x) = ∏_{i<j}(1 − w_N(x_i − x_j))` on every `k`-site configuration.
pub fn dressing_field<T: Real>(inter: &GridInteraction<T>, k: usize) -> Result<Vec<T>> {
    let lay = inter.layout;
    let floor = T::lit(DRESSING_FLOOR);
    let g: Vec<std::result::Result<T, usize>> = (0..inter.grid.sites(k))
        .into_par_iter()
        .map(|flat| {
            let mut s = vec![0usize; k];
            lay.split(flat, k, &mut s);
            let mut g = T::one();
            for i in 0..k {
                for j in i + 1..k {
                    let idx = lay.diff(s[i], s[j]);
                    let f = T::one() - inter.w.at(idx);
                    if f < floor {
                        return Err(idx);
                    }
                    g = g * f;
                }
            }
            Ok(g)
        })
        .collect();
    g.into_iter()
        .map(|r| {
            r.map_err(|idx| {
                let dist = (0..inter.grid.d)
                    .map(|c| inter.grid.displacement(lay.axis(idx, c), 0).to_f64_lossy().powi(2))
                    .sum::<f64>()
                    .sqrt();
                Error::SingularDressing {
                    distance: dist,
                    value: (T::one() - inter.w.at(idx)).to_f64_lossy(),
                }
            })
        })
        .collect()
}

fn scale_kernel<T: Real>(gamma: &MarginalKernel<T>, g: &[T], invert: bool) -> MarginalKernel<T> {
    let s = gamma.side();
    let mut out = gamma.clone();
    out.data.par_chunks_mut(s).enumerate().for_each(|(r, row)| {
        for (c, z) in row.iter_mut().enumerate() {
            let f = g[r] * g[c];
            *z = if invert { *z / f } else { *z * f };
        }
    });
    out
}

/// Pointwise division of `γ` by `G(x)G(x′)`.
pub fn dress<T: Real>(gamma: &MarginalKernel<T>, inter: &GridInteraction<T>) -> Result<DressedMarginal<T>> {
    if gamma.grid != inter.grid {
        return domain("kernel and interaction tables live on different grids");
    }
    let g = dressing_field(inter, gamma.k)?;
    Ok(DressedMarginal {
        k: gamma.k,
        alpha: scale_kernel(gamma, &g, true),
        g,
    })
}

/// `γ = G(x)G(x′)α`.
pub fn undress<T: Real>(alpha: &DressedMarginal<T>) -> MarginalKernel<T> {
    scale_kernel(&alpha.alpha, &alpha.g, false)
}

impl<T: Real> DressedMarginal<T> {
    /// Largest pointwise `|α − γ|/|γ|` over entries with `|γ| > floor`.
    pub fn max_relative_change(&self, gamma: &MarginalKernel<T>, floor: T) -> T {
        self.alpha
            .data
            .iter()
            .zip(&gamma.data)
            .filter(|(_, g)| g.norm() > floor)
            .map(|(a, g): (&Complex<T>, &Complex<T>)| (*a - *g).norm() / g.norm())
            .fold(T::zero(), T::max)
    }
}

/// Multiplier bound for undoing the dressing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressingGap<T> {
    /// `max |w_N/(1 − w_N)|`.
    pub gap: T,
}

impl<T: Real> DressingGap<T> {
    /// `(1 + gap)^{k(k−1)} − 1`, covering both `G(x)` and `G(x′)`.
    pub fn order_bound(&self, k: usize) -> T {
        (T::one() + self.gap).powi((k * k.saturating_sub(1)) as i32) - T::one()
    }
}

/// Samples of the radial scan used by [`dressing_gap`].
const GAP_SAMPLES: usize = 8192;

/// `max_r |w_N/(1 − w_N)|` over a radial scan including `r = 0`.
pub fn dressing_gap<T: Real>(sp: &ScaledPotential<T>) -> Result<DressingGap<T>> {
    if sp.profile.is_zero() {
        return Ok(DressingGap { gap: T::zero() });
    }
    let r_hi = T::lit(4.0) * sp.range().max(sp.base.r_max / sp.lambda());
    let mut gap = T::zero();
    for i in 0..=GAP_SAMPLES {
        let r = r_hi * T::from_usize_lossy(i) / T::from_usize_lossy(GAP_SAMPLES);
        let w = sp.w_n(r);
        let f = T::one() - w;
        if f < T::lit(DRESSING_FLOOR) {
            return Err(Error::SingularDressing {
                distance: r.to_f64_lossy(),
                value: f.to_f64_lossy(),
            });
        }
        gap = gap.max((w / f).abs());
    }
    Ok(DressingGap { gap })
}
