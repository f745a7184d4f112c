use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::grid::{LatticeGrid, MemoryBudget, Spectral};
use crate::manybody::{PairTable, SiteLayout};
use crate::scalar::{cis, Real};

use super::density::{site_k2, Cutoff, LowRankTerm, SpaceTimeDensity, TimeAxis};
use super::projector::max_grid_frequency;
use super::xb::xb_norm;

/// Inequalities probed on random ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProbeName {
    /// `‖V(x1−x2)γ‖_{X_{−1/2}} ≲ ‖V‖_{L^{3/2}}‖⟨∇_{x1}⟩γ‖_{L²L²}`.
    Str2BodyL32,
    /// `‖V(x1−x2)γ‖_{X_{−1/2}} ≲ ‖V‖_{L^{6/5}}‖⟨∇_{x1}⟩^{3/4}⟨∇_{x2}⟩^{3/4}γ‖_{L²L²}`.
    Str2BodyL65Shared,
    /// `‖V(x1−x2)W(x1−x3)γ‖_{X_{−1/2}} ≲ ‖V‖_{L^{3/2}}‖W‖_{L^{3/2}}‖⟨∇_{x1}⟩⟨∇_{x2}⟩⟨∇_{x3}⟩γ‖_{L²L²}`.
    Str3Body,
    /// `‖R_{≤M}B̃U(t)f‖_{L²L²} ≲ ‖Ṽ‖_{L¹}Σ_{M′≥M}(M/M′)^{1−ε}‖R_{≤M′}f‖_{L²}`.
    CollapseLpSum,
}

impl ProbeName {
    pub const ALL: [ProbeName; 4] = [
        ProbeName::Str2BodyL32,
        ProbeName::Str2BodyL65Shared,
        ProbeName::Str3Body,
        ProbeName::CollapseLpSum,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProbeName::Str2BodyL32 => "str_2body_L32",
            ProbeName::Str2BodyL65Shared => "str_2body_L65_shared",
            ProbeName::Str3Body => "str_3body",
            ProbeName::CollapseLpSum => "collapse_LP_sum",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }

    /// Lattice dimension of the probe. The three-body probe runs in 1D so that
    /// its three active variables stay within three axes.
    pub fn dimension(self) -> usize {
        match self {
            ProbeName::Str3Body => 1,
            _ => 3,
        }
    }

    /// Default coarse resolution; the doubling check runs at twice this.
    pub fn coarse_points(self) -> usize {
        match self {
            ProbeName::Str3Body => 8,
            _ => 6,
        }
    }
}

/// Left and right side of one inequality instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides<T> {
    pub lhs: T,
    pub rhs: T,
}

impl<T: Real> Sides<T> {
    pub fn ratio(&self) -> T {
        if self.lhs == T::zero() {
            T::zero()
        } else {
            self.lhs / self.rhs
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport<T> {
    pub name: ProbeName,
    pub points: usize,
    pub seed: u64,
    /// One entry per ensemble member, in member order.
    pub sides: Vec<Sides<T>>,
    pub max_ratio: T,
    pub median_ratio: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublingReport<T> {
    pub coarse: ProbeReport<T>,
    pub fine: ProbeReport<T>,
    /// `max(fine.max/coarse.max, coarse.max/fine.max)`.
    pub growth: T,
}

/// Box length of every probe lattice.
pub const PROBE_BOX: f64 = std::f64::consts::TAU;
/// Plateau of the time cutoff used by the Strichartz probes.
pub const PROBE_PLATEAU: f64 = 0.5;
/// Time samples on the cutoff window.
pub const PROBE_TIME_POINTS: usize = 32;
/// Time horizon of the collapse probe.
pub const COLLAPSE_HORIZON: f64 = 1.0;
/// `ε` in the collapse probe weights.
pub const COLLAPSE_EPSILON: f64 = 0.05;

/// `(Σ|v|^p h^d)^{1/p}`.
pub fn lp_norm<T: Real>(v: &PairTable<T>, grid: &LatticeGrid<T>, p: T) -> T {
    (v.values.iter().map(|x| x.abs().powf(p)).sum::<T>() * grid.cell_volume()).powf(T::one() / p)
}

/// Gaussian `a·e^{−|x|²/2σ²}` on the minimum-image displacement.
pub fn gaussian_table<T: Real>(grid: &LatticeGrid<T>, amplitude: T, width: T) -> PairTable<T> {
    PairTable::build(grid, |x| {
        let r2: T = x.iter().map(|c| *c * *c).sum();
        amplitude * (-r2 / (T::lit(2.0) * width * width)).exp()
    })
}

/// Both sides of the two-body probes for a density of order 2 with slots 0, 1 active.
pub fn str_2body<T: Real>(
    gamma: &SpaceTimeDensity<T>,
    v: &PairTable<T>,
    shared: bool,
    budget: &MemoryBudget,
) -> Result<Sides<T>> {
    if gamma.k != 2 {
        return domain("two-body probe needs an order-2 density");
    }
    let beta = gamma.multiply_pair(v, 0, 1)?;
    let lhs = xb_norm(&beta, T::lit(-0.5), budget)?;
    let rhs = if shared {
        let s = T::lit(0.375);
        lp_norm(v, &gamma.grid, T::lit(1.2))
            * gamma.multiplier_l2_norm(|slot, q| if slot < 2 { (T::one() + q).powf(s) } else { T::one() })
    } else {
        lp_norm(v, &gamma.grid, T::lit(1.5))
            * gamma.multiplier_l2_norm(|slot, q| if slot == 0 { (T::one() + q).sqrt() } else { T::one() })
    };
    Ok(Sides { lhs, rhs })
}

/// Both sides of the three-body probe for an order-3 density with slots 0, 1, 2 active.
pub fn str_3body<T: Real>(
    gamma: &SpaceTimeDensity<T>,
    v: &PairTable<T>,
    w: &PairTable<T>,
    budget: &MemoryBudget,
) -> Result<Sides<T>> {
    if gamma.k != 3 {
        return domain("three-body probe needs an order-3 density");
    }
    let beta = gamma.multiply_pair(v, 0, 1)?.multiply_pair(w, 0, 2)?;
    let lhs = xb_norm(&beta, T::lit(-0.5), budget)?;
    let p = T::lit(1.5);
    let rhs = lp_norm(v, &gamma.grid, p)
        * lp_norm(w, &gamma.grid, p)
        * gamma.multiplier_l2_norm(|slot, q| if slot < 3 { (T::one() + q).sqrt() } else { T::one() });
    Ok(Sides { lhs, rhs })
}

/// Factorised datum `f = Σ_r u_r ⊗ v_r ⊗ conj(p) ⊗ conj(q)` for the collapse probe.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseDatum<T> {
    pub grid: LatticeGrid<T>,
    pub unprimed: Vec<(Vec<Complex<T>>, Vec<Complex<T>>)>,
    pub primed: (Vec<Complex<T>>, Vec<Complex<T>>),
}

/// Both sides of the localized collapse estimate at level `M = 2^level`, `k = 1`.
///
/// The left side is `(∫_0^T ‖P_{≤M}|∇_{x1}|P_{≤M}|∇_{x1′}| B̃⁺_{1,2}U^{(2)}(t)f‖² dt)^{1/2}`
/// with `B̃⁺f(x1; x1′) = ∫Ṽ(x1 − y)f(x1, y; x1′, y)dy`.
pub fn collapse_lp_sum<T: Real>(
    datum: &CollapseDatum<T>,
    v: &PairTable<T>,
    time: &TimeAxis<T>,
    level: u32,
    epsilon: T,
) -> Result<Sides<T>> {
    let grid = datum.grid;
    let sites = grid.sites(1);
    if datum.unprimed.is_empty() || datum.unprimed.len() > super::density::MAX_RANK {
        return domain("collapse datum needs rank between 1 and 8");
    }
    let fields = datum
        .unprimed
        .iter()
        .flat_map(|(a, b)| [a, b])
        .chain([&datum.primed.0, &datum.primed.1]);
    if fields.into_iter().any(|f| f.len() != sites) {
        return domain("collapse datum factor has the wrong length");
    }
    let spec = Spectral::new(grid.points_per_axis);
    let axes = grid.d;
    let h = grid.cell_volume();
    let k2 = site_k2(&grid);
    let m = T::lit(2f64.powi(level as i32));
    let keep = |q: T, m: T| q <= m * m * (T::one() + T::lit(1e-12));
    let mut vhat: Vec<Complex<T>> = v.values.iter().map(|x| Complex::new(*x, T::zero())).collect();
    spec.forward_all(&mut vhat, axes);
    let evolve = |f: &[Complex<T>], t: T| {
        let mut g = f.to_vec();
        spec.forward_all(&mut g, axes);
        g.iter_mut().zip(&k2).for_each(|(z, q)| *z = *z * cis(-t * *q));
        spec.inverse_all(&mut g, axes);
        g
    };
    let low_grad_norm = |f: &[Complex<T>], m: T| {
        let mut g = f.to_vec();
        spec.forward_all(&mut g, axes);
        let s: T = g
            .iter()
            .zip(&k2)
            .map(|(z, q)| if keep(*q, m) { z.norm_sqr() * *q } else { T::zero() })
            .sum();
        (s * h / T::from_usize_lossy(sites)).sqrt()
    };
    let norms: Vec<T> = (0..time.len)
        .into_par_iter()
        .map(|j| {
            let t = time.time(j);
            let p = evolve(&datum.primed.0, t);
            let q = evolve(&datum.primed.1, t);
            let mut a = vec![Complex::new(T::zero(), T::zero()); sites];
            for (u, w) in &datum.unprimed {
                let u = evolve(u, t);
                let mut c: Vec<Complex<T>> = evolve(w, t).iter().zip(&q).map(|(x, y)| *x * y.conj()).collect();
                spec.forward_all(&mut c, axes);
                c.iter_mut().zip(&vhat).for_each(|(z, vv)| *z = *z * *vv * h);
                spec.inverse_all(&mut c, axes);
                a.iter_mut().zip(u.iter().zip(&c)).for_each(|(z, (x, y))| *z = *z + *x * *y);
            }
            let pc: Vec<Complex<T>> = p.iter().map(|z| z.conj()).collect();
            (low_grad_norm(&a, m) * low_grad_norm(&pc, m)).powi(2)
        })
        .collect();
    let lhs = (norms.iter().copied().sum::<T>() * time.dt).sqrt();

    let top = max_grid_frequency(&grid);
    let l1 = v.values.iter().map(|x| x.abs()).sum::<T>() * h;
    let tensor_norm = |mm: T| {
        let proj: Vec<(Vec<Complex<T>>, Vec<Complex<T>>)> = datum
            .unprimed
            .iter()
            .map(|(u, w)| (low_grad(&spec, &k2, u, mm, axes), low_grad(&spec, &k2, w, mm, axes)))
            .collect();
        let mut g = Complex::new(T::zero(), T::zero());
        for (ur, wr) in &proj {
            for (us, ws) in &proj {
                g = g + super::density::inner(ur, us) * super::density::inner(wr, ws);
            }
        }
        (g.re.max(T::zero()) * h * h).sqrt() * low_grad_norm(&datum.primed.0, mm) * low_grad_norm(&datum.primed.1, mm)
    };
    let decay = T::one() - epsilon;
    let mut rhs = T::zero();
    let mut mm = m;
    loop {
        let term = (m / mm).powf(decay) * tensor_norm(mm);
        if mm >= top {
            let ratio = T::lit(0.5).powf(decay);
            rhs = rhs + term / (T::one() - ratio);
            break;
        }
        rhs = rhs + term;
        mm = mm * T::lit(2.0);
    }
    Ok(Sides { lhs, rhs: rhs * l1 })
}

/// `P_{≤M}|∇|f` in physical space.
fn low_grad<T: Real>(spec: &Spectral<T>, k2: &[T], f: &[Complex<T>], m: T, axes: usize) -> Vec<Complex<T>> {
    let mut g = f.to_vec();
    spec.forward_all(&mut g, axes);
    g.iter_mut().zip(k2).for_each(|(z, q)| {
        *z = if *q <= m * m * (T::one() + T::lit(1e-12)) {
            *z * q.sqrt()
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    spec.inverse_all(&mut g, axes);
    g
}

/// Random trigonometric polynomial with modes `|m_c| ≤ band` on every axis.
pub fn band_limited<T: Real>(grid: &LatticeGrid<T>, band: i64, rng: &mut ChaCha8Rng) -> Vec<Complex<T>> {
    let lay = SiteLayout::new(grid);
    let n = grid.points_per_axis;
    let mut hat = vec![Complex::new(T::zero(), T::zero()); grid.sites(1)];
    for (s, z) in hat.iter_mut().enumerate() {
        if (0..grid.d).all(|c| grid.freq_index(lay.axis(s, c)).abs() <= band) {
            *z = Complex::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0)));
        }
    }
    let spec = Spectral::new(n);
    spec.inverse_all(&mut hat, grid.d);
    let scale = T::from_usize_lossy(grid.sites(1));
    hat.iter_mut().for_each(|z| *z = *z * scale);
    hat
}

/// `e^{iη·x}` with integer mode vector `mode`.
pub fn plane_wave<T: Real>(grid: &LatticeGrid<T>, mode: &[i64]) -> Vec<Complex<T>> {
    let lay = SiteLayout::new(grid);
    let kf = T::TAU() / grid.box_length;
    (0..grid.sites(1))
        .map(|s| {
            let ph = (0..grid.d)
                .map(|c| T::lit(mode[c] as f64) * kf * grid.coord(lay.axis(s, c)))
                .sum::<T>();
            cis(ph)
        })
        .collect()
}

/// Tensor product of single-variable fields, first factor slowest.
pub fn tensor<T: Real>(factors: &[&[Complex<T>]]) -> Vec<Complex<T>> {
    factors.iter().fold(vec![Complex::new(T::one(), T::zero())], |acc, f| {
        acc.iter().flat_map(|a| f.iter().map(move |b| *a * *b)).collect()
    })
}

/// Sum of `u_{σ(1)} ⊗ … ⊗ u_{σ(m)}` over all permutations σ.
fn symmetrized<T: Real>(factors: &[Vec<Complex<T>>]) -> Vec<Complex<T>> {
    let m = factors.len();
    let mut out: Vec<Complex<T>> = Vec::new();
    let mut perm: Vec<usize> = (0..m).collect();
    permute(&mut perm, 0, &mut |p| {
        let refs: Vec<&[Complex<T>]> = p.iter().map(|&i| factors[i].as_slice()).collect();
        let t = tensor(&refs);
        if out.is_empty() {
            out = t;
        } else {
            out.iter_mut().zip(&t).for_each(|(a, b)| *a = *a + *b);
        }
    });
    out
}

fn permute(p: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permute(p, i + 1, f);
        p.swap(i, j);
    }
}

fn member_rng(seed: u64, member: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(member as u64 + 1)))
}

fn random_mode(rng: &mut ChaCha8Rng, d: usize) -> Vec<i64> {
    (0..d).map(|_| rng.gen_range(-1..=1)).collect()
}

/// Symmetric low-rank ensemble member of order `k`: rank 3, band 1, θ-windowed
/// time profiles `e^{−iωt}`, plane-wave passive factor.
pub fn ensemble_member<T: Real>(
    grid: &LatticeGrid<T>,
    k: usize,
    seed: u64,
    member: usize,
) -> Result<SpaceTimeDensity<T>> {
    let mut rng = member_rng(seed, member);
    let cutoff = Cutoff::new(T::lit(PROBE_PLATEAU))?;
    let time = TimeAxis::window(&cutoff, PROBE_TIME_POINTS)?;
    let passive_factors: Vec<Vec<Complex<T>>> = (0..k).map(|_| plane_wave(grid, &random_mode(&mut rng, grid.d))).collect();
    let refs: Vec<&[Complex<T>]> = passive_factors.iter().map(|f| f.as_slice()).collect();
    let passive = tensor(&refs);
    let terms = (0..3)
        .map(|_| {
            let factors: Vec<Vec<Complex<T>>> = (0..k).map(|_| band_limited(grid, 1, &mut rng)).collect();
            let omega = T::lit(rng.gen_range(-4.0..4.0));
            LowRankTerm {
                coeff: Complex::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0))),
                time: time.times().into_iter().map(|t| cis(-omega * t) * cutoff.value(t)).collect(),
                active: symmetrized(&factors),
                passive: passive.clone(),
            }
        })
        .collect();
    SpaceTimeDensity::low_rank(k, grid, time, (0..k).collect(), terms)
}

/// Rank-3 band-1 datum for the collapse probe.
pub fn collapse_member<T: Real>(grid: &LatticeGrid<T>, seed: u64, member: usize) -> CollapseDatum<T> {
    let mut rng = member_rng(seed, member);
    let unprimed = (0..3)
        .map(|_| (band_limited(grid, 1, &mut rng), band_limited(grid, 1, &mut rng)))
        .collect();
    let primed = (band_limited(grid, 1, &mut rng), band_limited(grid, 1, &mut rng));
    CollapseDatum {
        grid: *grid,
        unprimed,
        primed,
    }
}

/// Potential widths used by the probes.
pub const PROBE_WIDTH_V: f64 = 0.6;
pub const PROBE_WIDTH_W: f64 = 0.8;

/// Runs one probe on `ensemble` fixed-seed members at `points` per axis.
pub fn probe_inequality<T: Real>(
    name: ProbeName,
    ensemble: usize,
    points: usize,
    seed: u64,
    budget: &MemoryBudget,
) -> Result<ProbeReport<T>> {
    probe_with_scale(name, ensemble, points, seed, T::one(), budget)
}

/// As [`probe_inequality`] with the potentials multiplied by `scale`.
pub fn probe_with_scale<T: Real>(
    name: ProbeName,
    ensemble: usize,
    points: usize,
    seed: u64,
    scale: T,
    budget: &MemoryBudget,
) -> Result<ProbeReport<T>> {
    if ensemble == 0 {
        return domain("ensemble must have at least one member");
    }
    let grid = LatticeGrid::with_any_even(name.dimension(), points, T::lit(PROBE_BOX))?;
    let v = gaussian_table(&grid, scale, T::lit(PROBE_WIDTH_V));
    let w = gaussian_table(&grid, scale, T::lit(PROBE_WIDTH_W));
    let sides: Vec<Sides<T>> = (0..ensemble)
        .into_par_iter()
        .map(|i| match name {
            ProbeName::Str2BodyL32 | ProbeName::Str2BodyL65Shared => {
                let g = ensemble_member(&grid, 2, seed, i)?;
                str_2body(&g, &v, name == ProbeName::Str2BodyL65Shared, budget)
            }
            ProbeName::Str3Body => {
                let g = ensemble_member(&grid, 3, seed, i)?;
                str_3body(&g, &v, &w, budget)
            }
            ProbeName::CollapseLpSum => {
                let datum = collapse_member(&grid, seed, i);
                let steps = PROBE_TIME_POINTS;
                let time = TimeAxis::new(T::zero(), T::lit(COLLAPSE_HORIZON) / T::from_usize_lossy(steps), steps)?;
                let mut best: Option<Sides<T>> = None;
                for level in 0..=2 {
                    let s = collapse_lp_sum(&datum, &v, &time, level, T::lit(COLLAPSE_EPSILON))?;
                    if best.map_or(true, |b| s.ratio() > b.ratio()) {
                        best = Some(s);
                    }
                }
                Ok(best.expect("three levels evaluated"))
            }
        })
        .collect::<Result<_>>()?;
    let mut ratios: Vec<T> = sides.iter().map(|s| s.ratio()).collect();
    if ratios.iter().any(|r| !r.is_finite()) {
        return Err(crate::error::Error::Numerical(format!("{} produced a non-finite ratio", name.as_str())));
    }
    ratios.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    let max_ratio = *ratios.last().expect("nonempty ensemble");
    let mid = ratios.len() / 2;
    let median_ratio = if ratios.len() % 2 == 1 {
        ratios[mid]
    } else {
        (ratios[mid - 1] + ratios[mid]) * T::lit(0.5)
    };
    Ok(ProbeReport {
        name,
        points,
        seed,
        sides,
        max_ratio,
        median_ratio,
    })
}

/// Runs the probe at `coarse` and `2·coarse` points per axis.
pub fn probe_doubling<T: Real>(
    name: ProbeName,
    ensemble: usize,
    coarse: usize,
    seed: u64,
    budget: &MemoryBudget,
) -> Result<DoublingReport<T>> {
    let c = probe_inequality(name, ensemble, coarse, seed, budget)?;
    let f = probe_inequality(name, ensemble, 2 * coarse, seed, budget)?;
    let growth = if c.max_ratio == T::zero() || f.max_ratio == T::zero() {
        T::one()
    } else {
        let up: T = f.max_ratio / c.max_ratio;
        up.max(T::one() / up)
    };
    Ok(DoublingReport {
        coarse: c,
        fine: f,
        growth,
    })
}
