use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::grid::LatticeGrid;
use crate::manybody::SiteLayout;
use crate::scalar::Real;

use super::density::{Representation, SpaceTimeDensity};

/// Coordinate shears on the unprimed variables.
///
/// `T1 f(x1,x2) = f(x1+x2, x2)`, `T2 f(x1,x2) = f(x1, x2+x1)`,
/// `T12 f(x1,x2,x3) = f(x1+x3, x2+x3, x3)`, `T13 f = f(x1+x2, x2, x3+x2)`,
/// `T23 f = f(x1, x2+x1, x3+x1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shear {
    T1,
    T2,
    T12,
    T13,
    T23,
}

impl Shear {
    /// `(target, source)` slot pairs: `x_target ↦ x_target + x_source`.
    pub fn pairs(self) -> &'static [(usize, usize)] {
        match self {
            Shear::T1 => &[(0, 1)],
            Shear::T2 => &[(1, 0)],
            Shear::T12 => &[(0, 2), (1, 2)],
            Shear::T13 => &[(0, 1), (2, 1)],
            Shear::T23 => &[(1, 0), (2, 0)],
        }
    }

    pub fn min_order(self) -> usize {
        match self {
            Shear::T1 | Shear::T2 => 2,
            _ => 3,
        }
    }
}

/// Applies `which`, or its inverse, by periodic index arithmetic.
pub fn shear<T: Real>(alpha: &SpaceTimeDensity<T>, which: Shear, inverse: bool) -> Result<SpaceTimeDensity<T>> {
    if alpha.k < which.min_order() {
        return domain(format!("{which:?} needs order at least {}", which.min_order()));
    }
    shear_pairs(alpha, which.pairs(), inverse)
}

/// Single shear `x_target ↦ x_target + x_source` on arbitrary distinct slots.
pub fn elementary_shear<T: Real>(
    alpha: &SpaceTimeDensity<T>,
    target: usize,
    source: usize,
    inverse: bool,
) -> Result<SpaceTimeDensity<T>> {
    if target == source || target >= alpha.slots() || source >= alpha.slots() {
        return domain("shear needs two distinct slots below 2k");
    }
    shear_pairs(alpha, &[(target, source)], inverse)
}

fn shear_pairs<T: Real>(alpha: &SpaceTimeDensity<T>, pairs: &[(usize, usize)], inverse: bool) -> Result<SpaceTimeDensity<T>> {
    let slots = alpha.slots();
    let mut out = alpha.clone();
    match &mut out.repr {
        Representation::Dense(d) => {
            let labels: Vec<usize> = (0..slots).collect();
            let s = alpha.spatial_sites();
            for slice in d.chunks_mut(s) {
                gather(&alpha.grid, slice, &labels, pairs, inverse);
            }
        }
        Representation::LowRank(lr) => {
            let passive = lr.passive(slots);
            let touched: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
            if touched.iter().all(|s| lr.active.contains(s)) {
                for r in &mut lr.terms {
                    gather(&alpha.grid, &mut r.active, &lr.active, pairs, inverse);
                }
            } else if touched.iter().all(|s| passive.contains(s)) {
                for r in &mut lr.terms {
                    gather(&alpha.grid, &mut r.passive, &passive, pairs, inverse);
                }
            } else {
                return domain("shear mixing active and passive slots needs a dense density");
            }
        }
    }
    Ok(out)
}

/// `out(x) = in(x')` with `x'_target = x_target ± x_source` per axis.
fn gather<T: Real>(
    grid: &LatticeGrid<T>,
    field: &mut [Complex<T>],
    labels: &[usize],
    pairs: &[(usize, usize)],
    inverse: bool,
) {
    let lay = SiteLayout::new(grid);
    let n = grid.points_per_axis;
    let d = grid.d;
    let vars = labels.len();
    let pos = |slot: usize| labels.iter().position(|&l| l == slot).expect("slot carried by field");
    let local: Vec<(usize, usize)> = pairs.iter().map(|&(t, s)| (pos(t), pos(s))).collect();
    let src = field.to_vec();
    field.par_iter_mut().enumerate().for_each(|(flat, z)| {
        let mut sites = vec![0usize; vars];
        lay.split(flat, vars, &mut sites);
        let orig = sites.clone();
        for &(t, s) in &local {
            let mut moved = 0;
            for c in 0..d {
                let it = lay.axis(orig[t], c);
                let is = lay.axis(orig[s], c);
                let j = if inverse { it + n + n / 2 - is } else { it + is + n - n / 2 } % n;
                moved = moved * n + j;
            }
            sites[t] = moved;
        }
        *z = src[lay.join(&sites)];
    });
}
