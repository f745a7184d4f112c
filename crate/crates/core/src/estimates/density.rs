use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::grid::{complex_bytes, LatticeGrid, MemoryBudget, Spectral};
use crate::manybody::{PairTable, SiteLayout};
use crate::scalar::Real;

/// Largest rank accepted by the low-rank representation.
pub const MAX_RANK: usize = 8;

/// Uniform time samples `t_j = t0 + j·dt`, `j < len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeAxis<T> {
    pub t0: T,
    pub dt: T,
    pub len: usize,
}

impl<T: Real> TimeAxis<T> {
    pub fn new(t0: T, dt: T, len: usize) -> Result<Self> {
        if len == 0 || !(dt > T::zero()) || !dt.is_finite() || !t0.is_finite() {
            return domain("time axis needs len ≥ 1 and a positive finite dt");
        }
        Ok(Self { t0, dt, len })
    }

    /// `len` samples covering the support `[−2T, 2T)` of a cutoff with plateau `T`.
    pub fn window(cutoff: &Cutoff<T>, len: usize) -> Result<Self> {
        let half = cutoff.plateau * T::lit(2.0);
        Self::new(-half, half * T::lit(2.0) / T::from_usize_lossy(len.max(1)), len)
    }

    #[inline]
    pub fn time(&self, j: usize) -> T {
        self.t0 + T::from_usize_lossy(j) * self.dt
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.len).map(|j| self.time(j)).collect()
    }
}

/// Smooth cutoff `θ` with `θ = 1` on `|t| ≤ T` and `θ = 0` on `|t| ≥ 2T`.
///
/// The transition is the standard `C^∞` glue `e^{−1/s}/(e^{−1/s} + e^{−1/(1−s)})`
/// in `s = (|t| − T)/T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff<T> {
    pub plateau: T,
}

impl<T: Real> Cutoff<T> {
    pub fn new(plateau: T) -> Result<Self> {
        if !(plateau > T::zero()) || !plateau.is_finite() {
            return domain("cutoff plateau must be positive");
        }
        Ok(Self { plateau })
    }

    pub fn value(&self, t: T) -> T {
        let s = (t.abs() - self.plateau) / self.plateau;
        if s <= T::zero() {
            return T::one();
        }
        if s >= T::one() {
            return T::zero();
        }
        let a = (-T::one() / (T::one() - s)).exp();
        let b = (-T::one() / s).exp();
        a / (a + b)
    }
}

/// One term `c · g(t) · a(active slots) · h(passive slots)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankTerm<T> {
    pub coeff: Complex<T>,
    pub time: Vec<Complex<T>>,
    pub active: Vec<Complex<T>>,
    pub passive: Vec<Complex<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowRank<T> {
    /// Sorted slot indices carried by the active factor.
    pub active: Vec<usize>,
    pub terms: Vec<LowRankTerm<T>>,
}

impl<T: PartialEq> LowRank<T> {
    pub fn passive(&self, slots: usize) -> Vec<usize> {
        (0..slots).filter(|s| !self.active.contains(s)).collect()
    }

    /// The passive factor when every term carries the same one.
    pub fn shared_passive(&self) -> Option<&[Complex<T>]> {
        let first = self.terms.first()?;
        self.terms
            .iter()
            .all(|r| r.passive == first.passive)
            .then_some(first.passive.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Representation<T> {
    /// Row-major `[t][slot 0]..[slot 2k−1]`.
    Dense(Vec<Complex<T>>),
    LowRank(LowRank<T>),
}

/// Space-time kernel `α(t, x_1..x_k, x_1′..x_k′)`.
///
/// Slot `i < k` holds `x_{i+1}`, slot `k + i` holds `x_{i+1}′`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeDensity<T> {
    pub k: usize,
    pub grid: LatticeGrid<T>,
    pub time: TimeAxis<T>,
    pub repr: Representation<T>,
}

impl<T: Real> SpaceTimeDensity<T> {
    pub fn dense(k: usize, grid: &LatticeGrid<T>, time: TimeAxis<T>, data: Vec<Complex<T>>) -> Result<Self> {
        if k == 0 {
            return domain("order must be at least 1");
        }
        let want = time.len * grid.sites(2 * k);
        if data.len() != want {
            return domain(format!("dense density has {} samples, expected {want}", data.len()));
        }
        Ok(Self {
            k,
            grid: *grid,
            time,
            repr: Representation::Dense(data),
        })
    }

    pub fn low_rank(
        k: usize,
        grid: &LatticeGrid<T>,
        time: TimeAxis<T>,
        active: Vec<usize>,
        terms: Vec<LowRankTerm<T>>,
    ) -> Result<Self> {
        if k == 0 {
            return domain("order must be at least 1");
        }
        let slots = 2 * k;
        if active.is_empty() || active.windows(2).any(|w| w[0] >= w[1]) || active.iter().any(|&s| s >= slots) {
            return domain("active slots must be sorted, distinct and below 2k");
        }
        if terms.len() > MAX_RANK {
            return domain(format!("rank {} exceeds {MAX_RANK}", terms.len()));
        }
        let na = grid.sites(active.len());
        let np = grid.sites(slots - active.len());
        for t in &terms {
            if t.time.len() != time.len || t.active.len() != na || t.passive.len() != np {
                return domain("low-rank factor has the wrong length");
            }
        }
        Ok(Self {
            k,
            grid: *grid,
            time,
            repr: Representation::LowRank(LowRank { active, terms }),
        })
    }

    pub fn slots(&self) -> usize {
        2 * self.k
    }

    /// Spatial sites per time sample, `n^{2kd}`.
    pub fn spatial_sites(&self) -> usize {
        self.grid.sites(self.slots())
    }

    pub fn dense_bytes(&self) -> u64 {
        complex_bytes::<T>(self.time.len * self.spatial_sites())
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Representation::Dense(_))
    }

    pub fn dense_data(&self) -> Option<&[Complex<T>]> {
        match &self.repr {
            Representation::Dense(d) => Some(d),
            Representation::LowRank(_) => None,
        }
    }

    /// Value at time index `t` and per-slot site indices.
    pub fn eval(&self, t: usize, sites: &[usize]) -> Complex<T> {
        let lay = SiteLayout::new(&self.grid);
        match &self.repr {
            Representation::Dense(d) => d[t * self.spatial_sites() + lay.join(sites)],
            Representation::LowRank(lr) => {
                let (ia, ip) = split_index(&lay, &lr.active, sites);
                lr.terms
                    .iter()
                    .map(|r| r.coeff * r.time[t] * r.active[ia] * r.passive[ip])
                    .sum()
            }
        }
    }

    pub fn to_dense(&self, budget: &MemoryBudget) -> Result<Self> {
        let lr = match &self.repr {
            Representation::Dense(_) => return Ok(self.clone()),
            Representation::LowRank(lr) => lr,
        };
        budget.check(self.dense_bytes())?;
        let lay = SiteLayout::new(&self.grid);
        let slots = self.slots();
        let s = self.spatial_sites();
        let mut data = vec![Complex::new(T::zero(), T::zero()); self.time.len * s];
        data.par_chunks_mut(s).enumerate().for_each(|(t, slice)| {
            let mut sites = vec![0usize; slots];
            for (flat, z) in slice.iter_mut().enumerate() {
                lay.split(flat, slots, &mut sites);
                let (ia, ip) = split_index(&lay, &lr.active, &sites);
                *z = lr
                    .terms
                    .iter()
                    .map(|r| r.coeff * r.time[t] * r.active[ia] * r.passive[ip])
                    .sum();
            }
        });
        Self::dense(self.k, &self.grid, self.time, data)
    }

    /// Discrete `L²_t L²_{x,x′}` norm (rectangle rule in time).
    pub fn l2_norm(&self) -> T {
        self.multiplier_l2_norm(|_, _| T::one())
    }

    /// `‖m(∇)α‖_{L²_t L²}` for a multiplier `∏_slot m(slot, |ξ_slot|²)`.
    pub fn multiplier_l2_norm(&self, m: impl Fn(usize, T) -> T + Sync) -> T {
        let h = self.grid.cell_volume();
        let slots = self.slots();
        let weight = self.time.dt * h.powi(slots as i32);
        match &self.repr {
            Representation::Dense(d) => {
                let s = self.spatial_sites();
                let all: Vec<usize> = (0..slots).collect();
                let mut total = T::zero();
                for slice in d.chunks(s) {
                    let f = multiplied_transform(&self.grid, slice, &all, &m);
                    total = total + f.iter().map(|z| z.norm_sqr()).sum::<T>() / T::from_usize_lossy(s);
                }
                (total * weight).sqrt()
            }
            Representation::LowRank(lr) => {
                let passive = lr.passive(slots);
                let na = T::from_usize_lossy(self.grid.sites(lr.active.len()));
                let np = T::from_usize_lossy(self.grid.sites(passive.len()));
                let shared = lr.shared_passive().map(|p| multiplied_transform(&self.grid, p, &passive, &m));
                let factors: Vec<(Vec<Complex<T>>, Vec<Complex<T>>)> = lr
                    .terms
                    .iter()
                    .map(|r| {
                        (
                            multiplied_transform(&self.grid, &r.active, &lr.active, &m),
                            match &shared {
                                Some(p) => p.clone(),
                                None => multiplied_transform(&self.grid, &r.passive, &passive, &m),
                            },
                        )
                    })
                    .collect();
                let mut total = Complex::new(T::zero(), T::zero());
                for (r, (ar, pr)) in lr.terms.iter().zip(&factors) {
                    for (s, (as_, ps)) in lr.terms.iter().zip(&factors) {
                        total = total
                            + r.coeff * s.coeff.conj() * inner(&r.time, &s.time) * inner(ar, as_) * inner(pr, ps);
                    }
                }
                (total.re.max(T::zero()) / (na * np) * weight).sqrt()
            }
        }
    }

    /// `α*(t, x, x′) = conj α(t, x′, x)`; needs a dense density.
    pub fn adjoint(&self) -> Result<Self> {
        let Representation::Dense(d) = &self.repr else {
            return domain("adjoint needs a dense density");
        };
        let lay = SiteLayout::new(&self.grid);
        let (k, slots, s) = (self.k, self.slots(), self.spatial_sites());
        let mut out = vec![Complex::new(T::zero(), T::zero()); d.len()];
        out.par_chunks_mut(s).enumerate().for_each(|(t, slice)| {
            let mut sites = vec![0usize; slots];
            for (flat, z) in slice.iter_mut().enumerate() {
                lay.split(flat, slots, &mut sites);
                sites.rotate_left(k);
                *z = d[t * s + lay.join(&sites)].conj();
            }
        });
        Self::dense(k, &self.grid, self.time, out)
    }

    /// Largest pointwise difference to another density of the same shape.
    pub fn max_difference(&self, other: &Self) -> Result<T> {
        if self.k != other.k || self.grid != other.grid || self.time.len != other.time.len {
            return domain("densities differ in shape");
        }
        let lay = SiteLayout::new(&self.grid);
        let slots = self.slots();
        let mut sites = vec![0usize; slots];
        let mut worst = T::zero();
        for t in 0..self.time.len {
            for flat in 0..self.spatial_sites() {
                lay.split(flat, slots, &mut sites);
                worst = worst.max((self.eval(t, &sites) - other.eval(t, &sites)).norm());
            }
        }
        Ok(worst)
    }

    /// Multiplies every time sample by `f(t)`.
    pub fn scale_time(&self, f: impl Fn(T) -> T) -> Self {
        let w: Vec<T> = self.time.times().into_iter().map(f).collect();
        let mut out = self.clone();
        match &mut out.repr {
            Representation::Dense(d) => {
                let s = self.spatial_sites();
                for (t, slice) in d.chunks_mut(s).enumerate() {
                    slice.iter_mut().for_each(|z| *z = *z * w[t]);
                }
            }
            Representation::LowRank(lr) => {
                for r in &mut lr.terms {
                    r.time.iter_mut().zip(&w).for_each(|(z, c)| *z = *z * *c);
                }
            }
        }
        out
    }

    /// Applies the cutoff `θ(t)`.
    pub fn with_cutoff(&self, cutoff: &Cutoff<T>) -> Self {
        self.scale_time(|t| cutoff.value(t))
    }

    /// Multiplies by `V(x_a − x_b)` for slots `a ≠ b`. A low-rank density needs both slots active.
    pub fn multiply_pair(&self, v: &PairTable<T>, a: usize, b: usize) -> Result<Self> {
        let slots = self.slots();
        if a == b || a >= slots || b >= slots {
            return domain("pair multiplication needs two distinct slots");
        }
        let lay = SiteLayout::new(&self.grid);
        let per = lay.per_var();
        let site_of = |flat: usize, v: usize, vars: usize| (flat / per.pow((vars - 1 - v) as u32)) % per;
        let mut out = self.clone();
        match &mut out.repr {
            Representation::Dense(d) => {
                let s = self.spatial_sites();
                d.par_chunks_mut(s).for_each(|slice| {
                    for (flat, z) in slice.iter_mut().enumerate() {
                        *z = *z * v.at(lay.diff(site_of(flat, a, slots), site_of(flat, b, slots)));
                    }
                });
            }
            Representation::LowRank(lr) => {
                let (Some(pa), Some(pb)) = (
                    lr.active.iter().position(|&s| s == a),
                    lr.active.iter().position(|&s| s == b),
                ) else {
                    return domain("pair multiplication on a low-rank density needs both slots active");
                };
                let na = lr.active.len();
                for r in &mut lr.terms {
                    r.active.par_iter_mut().enumerate().for_each(|(flat, z)| {
                        *z = *z * v.at(lay.diff(site_of(flat, pa, na), site_of(flat, pb, na)));
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Indices into the active and passive factors for a full slot assignment.
fn split_index(lay: &SiteLayout, active: &[usize], sites: &[usize]) -> (usize, usize) {
    let s = lay.per_var();
    let mut ia = 0;
    let mut ip = 0;
    for (slot, &site) in sites.iter().enumerate() {
        if active.contains(&slot) {
            ia = ia * s + site;
        } else {
            ip = ip * s + site;
        }
    }
    (ia, ip)
}

pub(crate) fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).map(|(x, y)| *x * y.conj()).sum()
}

/// `|ξ|²` for every site of one variable.
pub(crate) fn site_k2<T: Real>(grid: &LatticeGrid<T>) -> Vec<T> {
    let lay = SiteLayout::new(grid);
    let k = grid.wavenumbers();
    (0..lay.per_var())
        .map(|s| (0..grid.d).map(|c| k[lay.axis(s, c)] * k[lay.axis(s, c)]).sum())
        .collect()
}

/// Forward transform of a field multiplied by `∏_i m(labels[i], |ξ_i|²)`.
fn multiplied_transform<T: Real>(
    grid: &LatticeGrid<T>,
    field: &[Complex<T>],
    labels: &[usize],
    m: &(impl Fn(usize, T) -> T + Sync),
) -> Vec<Complex<T>> {
    let mut f = field.to_vec();
    let vars = labels.len();
    if vars == 0 {
        return f;
    }
    let spec = Spectral::new(grid.points_per_axis);
    spec.forward_all(&mut f, vars * grid.d);
    scale_by_symbol(grid, &mut f, labels, m);
    f
}

fn scale_by_symbol<T: Real>(
    grid: &LatticeGrid<T>,
    f: &mut [Complex<T>],
    labels: &[usize],
    m: &(impl Fn(usize, T) -> T + Sync),
) {
    let per = grid.sites(1);
    let k2 = site_k2(grid);
    let table: Vec<Vec<T>> = labels.iter().map(|&l| k2.iter().map(|q| m(l, *q)).collect()).collect();
    f.par_iter_mut().enumerate().for_each(|(p, z)| {
        let mut rest = p;
        let mut w = T::one();
        for col in table.iter().rev() {
            w = w * col[rest % per];
            rest /= per;
        }
        *z = *z * w;
    });
}

/// Applies `∏_i m(labels[i], |ξ_i|²)` to a field over `labels.len()` variables.
pub(crate) fn apply_slot_multiplier<T: Real>(
    grid: &LatticeGrid<T>,
    field: &mut [Complex<T>],
    labels: &[usize],
    m: &(impl Fn(usize, T) -> T + Sync),
) {
    let vars = labels.len();
    if vars == 0 {
        return;
    }
    let k2 = site_k2(grid);
    if labels.iter().all(|&l| k2.iter().all(|q| m(l, *q) == T::one())) {
        return;
    }
    let spec = Spectral::new(grid.points_per_axis);
    let axes = vars * grid.d;
    spec.forward_all(field, axes);
    scale_by_symbol(grid, field, labels, m);
    spec.inverse_all(field, axes);
}
