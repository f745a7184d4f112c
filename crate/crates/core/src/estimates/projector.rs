use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::grid::{LatticeGrid, Spectral};
use crate::manybody::SiteLayout;
use crate::scalar::Real;

use super::density::{site_k2, Representation, SpaceTimeDensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpMode {
    /// `ρ ≤ M`.
    Leq,
    /// `M/2 < ρ ≤ M`, and `ρ ≤ 1` at `M = 1`.
    Annular,
}

/// Sharp projector on `ρ = max_{slot} |ξ_slot|` over the listed slots, `M = 2^level`.
///
/// `Leq` is the product of the one-variable projectors `P_{≤M}`; the annular
/// pieces are `P_{≤M} − P_{≤M/2}`, so they are disjoint and sum to the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicProjector {
    pub level: u32,
    pub mode: LpMode,
    pub slots: Vec<usize>,
}

impl DyadicProjector {
    pub fn new(level: u32, mode: LpMode, slots: Vec<usize>) -> Self {
        Self { level, mode, slots }
    }

    pub fn m(&self) -> f64 {
        2f64.powi(self.level as i32)
    }

    /// Whether the symbol is 1 at `ρ² = max |ξ_slot|²`.
    pub fn keeps<T: Real>(&self, rho2: T) -> bool {
        let m = T::lit(self.m());
        let tol = T::lit(1e-12);
        let le = |r: T| rho2 <= r * r * (T::one() + tol);
        match self.mode {
            LpMode::Leq => le(m),
            LpMode::Annular if self.level == 0 => le(T::one()),
            LpMode::Annular => le(m) && !le(m * T::lit(0.5)),
        }
    }
}

/// Largest `|ξ|` of one variable on the grid.
pub fn max_grid_frequency<T: Real>(grid: &LatticeGrid<T>) -> T {
    site_k2(grid).into_iter().fold(T::zero(), T::max).sqrt()
}

/// Result of [`lp_project`]; `warning` is set when `M` lies beyond every grid frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Projected<T> {
    pub density: SpaceTimeDensity<T>,
    pub warning: Option<String>,
}

pub fn lp_project<T: Real>(alpha: &SpaceTimeDensity<T>, proj: &DyadicProjector) -> Result<Projected<T>> {
    let slots = alpha.slots();
    if proj.slots.is_empty() || proj.slots.iter().any(|&s| s >= slots) {
        return domain("projector slots must be nonempty and below 2k");
    }
    let top = max_grid_frequency(&alpha.grid);
    let warning = (T::lit(proj.m()) > top).then(|| {
        format!(
            "level M = {} exceeds the largest grid frequency {:.6}; the cutoff does not act",
            proj.m(),
            top.to_f64_lossy()
        )
    });
    let mut out = alpha.clone();
    match &mut out.repr {
        Representation::Dense(d) => {
            let labels: Vec<usize> = (0..slots).collect();
            let s = alpha.spatial_sites();
            for slice in d.chunks_mut(s) {
                project_field(&alpha.grid, slice, &labels, proj);
            }
        }
        Representation::LowRank(lr) => {
            let passive = lr.passive(slots);
            let in_active = proj.slots.iter().all(|s| lr.active.contains(s));
            let in_passive = proj.slots.iter().all(|s| passive.contains(s));
            if !in_active && !in_passive && proj.mode == LpMode::Annular {
                return domain("annular projection across active and passive slots needs a dense density");
            }
            let act: Vec<usize> = proj.slots.iter().copied().filter(|s| lr.active.contains(s)).collect();
            let pas: Vec<usize> = proj.slots.iter().copied().filter(|s| passive.contains(s)).collect();
            let pa = DyadicProjector::new(proj.level, proj.mode, act);
            let pp = DyadicProjector::new(proj.level, proj.mode, pas);
            for r in &mut lr.terms {
                if !pa.slots.is_empty() {
                    project_field(&alpha.grid, &mut r.active, &lr.active, &pa);
                }
                if !pp.slots.is_empty() {
                    project_field(&alpha.grid, &mut r.passive, &passive, &pp);
                }
            }
        }
    }
    Ok(Projected { density: out, warning })
}

/// Projects a field whose variables carry the slot labels `labels`.
fn project_field<T: Real>(grid: &LatticeGrid<T>, field: &mut [Complex<T>], labels: &[usize], proj: &DyadicProjector) {
    let vars = labels.len();
    let lay = SiteLayout::new(grid);
    let k2 = site_k2(grid);
    let watched: Vec<bool> = labels.iter().map(|l| proj.slots.contains(l)).collect();
    let spec = Spectral::new(grid.points_per_axis);
    let axes = vars * grid.d;
    spec.forward_all(field, axes);
    field.par_iter_mut().enumerate().for_each(|(p, z)| {
        let mut rest = p;
        let mut rho2 = T::zero();
        for v in (0..vars).rev() {
            if watched[v] {
                rho2 = rho2.max(k2[rest % lay.per_var()]);
            }
            rest /= lay.per_var();
        }
        if !proj.keeps(rho2) {
            *z = Complex::new(T::zero(), T::zero());
        }
    });
    spec.inverse_all(field, axes);
}
