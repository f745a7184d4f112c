use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{AdScalar, HyperDual};
use crate::error::{domain, Error, Result};
use crate::scalar::{bracket, Real};
use crate::scattering::{PairProfile, ScaledPotential};

use super::operators::{
    a_multiplier, a_total_multiplier, collapse_prefactor, collapse_weight, conjugated_weight, BVariant,
    CollapseSample, Localization,
};

/// Positions of `k` particles in three dimensions.
pub type Config<T> = Vec<Vec<T>>;

/// Draws clusters of points in a ball, rejecting pairs near a sharp edge of `w`.
#[derive(Debug, Clone)]
pub struct ConfigSampler<T> {
    /// Ball radius.
    pub radius: T,
    /// Minimum distance of every pair distance from the profile edge.
    pub edge_margin: T,
    pub seed: u64,
}

const MAX_REJECTIONS: usize = 100_000;

impl<T: Real> ConfigSampler<T> {
    pub fn sample(&self, profile: &PairProfile<T>, k: usize, count: usize) -> Result<(Vec<Config<T>>, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(count);
        let mut rejected = 0;
        while out.len() < count {
            let cfg: Config<T> = (0..k).map(|_| ball_point(&mut rng, self.radius)).collect();
            if too_close_to_edge(profile, &cfg, self.edge_margin) {
                rejected += 1;
                if rejected > MAX_REJECTIONS {
                    return Err(Error::Numerical("configuration sampler rejected too many draws".into()));
                }
                continue;
            }
            out.push(cfg);
        }
        Ok((out, rejected))
    }
}

fn ball_point<T: Real>(rng: &mut ChaCha8Rng, radius: T) -> Vec<T> {
    loop {
        let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if p.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            return p.into_iter().map(|c| T::lit(c) * radius).collect();
        }
    }
}

fn too_close_to_edge<T: Real>(profile: &PairProfile<T>, cfg: &Config<T>, margin: T) -> bool {
    let Some(edge) = profile.edge() else {
        return false;
    };
    for i in 0..cfg.len() {
        for j in i + 1..cfg.len() {
            let r = dist(&cfg[i], &cfg[j]);
            if (r - edge).abs() < margin {
                return true;
            }
        }
    }
    false
}

fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum::<T>().sqrt()
}

/// `G = ∏_{i<j}(1 − w(|x_i − x_j|))` with coordinate `(l, c)` as the dual variable.
fn dressing_second_derivative<T: Real>(profile: &PairProfile<T>, cfg: &Config<T>, l: usize, c: usize) -> HyperDual<T> {
    let pts: Vec<Vec<HyperDual<T>>> = cfg
        .iter()
        .enumerate()
        .map(|(p, x)| {
            x.iter()
                .enumerate()
                .map(|(q, v)| {
                    if p == l && q == c {
                        HyperDual::variable(*v)
                    } else {
                        HyperDual::constant(*v)
                    }
                })
                .collect()
        })
        .collect();
    let mut g = HyperDual::constant(T::one());
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let r2 = pts[i]
                .iter()
                .zip(&pts[j])
                .map(|(a, b)| (*a - *b) * (*a - *b))
                .fold(HyperDual::constant(T::zero()), |s, t| s + t);
            g = g * (HyperDual::constant(T::one()) - profile.w_ad(r2.sqrt()));
        }
    }
    g
}

/// `(G, Δ_{x_l}G for each l)` by exact second derivatives.
fn dressing_laplacians<T: Real>(profile: &PairProfile<T>, cfg: &Config<T>) -> (T, Vec<T>) {
    let mut g = T::one();
    let lap = (0..cfg.len())
        .map(|l| {
            (0..cfg[l].len())
                .map(|c| {
                    let h = dressing_second_derivative(profile, cfg, l, c);
                    g = h.re;
                    h.e12
                })
                .sum()
        })
        .collect();
    (g, lap)
}

fn relative<T: Real>(lhs: T, rhs: T, scale: T) -> T {
    let den = scale.max(lhs.abs()).max(rhs.abs());
    if den == T::zero() {
        T::zero()
    } else {
        (lhs - rhs).abs() / den
    }
}

/// Outcome of a pointwise identity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport<T> {
    pub max_residual: T,
    pub evaluated: usize,
    pub rejected: usize,
}

/// Checks `H^{(k)}G = G·Σ_{i,j,l distinct} a_{ijl}` at each configuration.
///
/// The left side is `−Σ_l Δ_{x_l}G + (1/N)Σ_{i<j}V_N G` with exact derivatives of `w_N`.
/// Configurations within `edge_margin` of the sharp edge are skipped and counted.
pub fn wave_operator_identity_residual<T: Real>(
    sp: &ScaledPotential<T>,
    configs: &[Config<T>],
    edge_margin: T,
) -> Result<IdentityReport<T>> {
    if sp.d != 3 {
        return domain("the wave-operator identity is checked in three dimensions");
    }
    let mut worst = T::zero();
    let mut evaluated = 0;
    let mut rejected = 0;
    for cfg in configs {
        if cfg.iter().any(|x| x.len() != 3) {
            return domain("configurations must consist of 3-vectors");
        }
        if too_close_to_edge(&sp.profile, cfg, edge_margin) {
            rejected += 1;
            continue;
        }
        let (g, lap) = dressing_laplacians(&sp.profile, cfg);
        let mut pot = T::zero();
        for i in 0..cfg.len() {
            for j in i + 1..cfg.len() {
                pot = pot + sp.v_n(dist(&cfg[i], &cfg[j]));
            }
        }
        let pot = pot * sp.mean_field() * g;
        let kin: T = lap.iter().map(|x| -*x).sum();
        let lhs = kin + pot;
        let rhs = g * a_total_multiplier(&sp.profile, cfg);
        let scale = lap.iter().map(|x| x.abs()).sum::<T>() + pot.abs();
        worst = worst.max(relative(lhs, rhs, scale));
        evaluated += 1;
    }
    Ok(IdentityReport {
        max_residual: worst,
        evaluated,
        rejected,
    })
}

/// Checks the product-rule expansion of `−Σ_l Δ_{x_l}G/G` for `G = ∏ g(|x_i−x_j|)`, `g = 1 − w`,
/// without using any equation satisfied by `w`.
pub fn leibniz_identity_residual<T: Real>(profile: &PairProfile<T>, configs: &[Config<T>]) -> T {
    let two = T::lit(2.0);
    let mut worst = T::zero();
    for cfg in configs {
        let k = cfg.len();
        let (g, lap) = dressing_laplacians(profile, cfg);
        let lhs: T = lap.iter().map(|x| -*x / g).sum();
        let mut rhs = T::zero();
        let mut scale = T::zero();
        for l in 0..k {
            for j in 0..k {
                if j == l {
                    continue;
                }
                let r = dist(&cfg[l], &cfg[j]);
                let (w, w1, w2) = profile.derivs(r);
                // Δg = −(w'' + 2w'/r) for g = 1 − w
                let term = (w2 + two * w1 / r) / (T::one() - w);
                rhs = rhs + term;
                scale = scale + term.abs();
            }
            for i in 0..k {
                for j in i + 1..k {
                    if i == l || j == l {
                        continue;
                    }
                    let a = a_multiplier(profile, &cfg[i], &cfg[j], &cfg[l]);
                    rhs = rhs + two * a;
                    scale = scale + (two * a).abs();
                }
            }
        }
        worst = worst.max(relative(lhs, rhs, scale));
    }
    worst
}

/// Largest `|a_{ijl}| / (N^{4β−2}⟨N^β(x_i−x_l)⟩^{−2}⟨N^β(x_j−x_l)⟩^{−2})` over configurations of three points.
pub fn a_envelope_ratio<T: Real>(sp: &ScaledPotential<T>, configs: &[Config<T>]) -> T {
    let lam = sp.lambda();
    let pref = T::lit(sp.n as f64).powf(T::lit(4.0) * sp.beta - T::lit(2.0));
    configs
        .iter()
        .filter(|c| c.len() >= 3)
        .map(|c| {
            let (xi, xj, xl) = (&c[0], &c[1], &c[2]);
            let m = a_multiplier(&sp.profile, xi, xj, xl).abs();
            let bi = bracket(lam * dist(xi, xl));
            let bj = bracket(lam * dist(xj, xl));
            m / (pref / (bi * bi * bj * bj))
        })
        .fold(T::zero(), T::max)
}

/// Seeded smooth complex test function of `2k+1` points: `exp(Σ_m c_m·z_m)`.
#[derive(Debug, Clone)]
pub struct SmoothClosure<T> {
    coeffs: Vec<Vec<Complex<T>>>,
}

impl<T: Real> SmoothClosure<T> {
    pub fn new(points: usize, dim: usize, scale: T, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..points)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        Complex::new(
                            T::lit(rng.gen_range(-1.0..1.0)) * scale,
                            T::lit(rng.gen_range(-1.0..1.0)) * scale,
                        )
                    })
                    .collect()
            })
            .collect();
        Self { coeffs }
    }

    pub fn eval(&self, pts: &[&[T]]) -> Complex<T> {
        let mut s = Complex::new(T::zero(), T::zero());
        for (c, p) in self.coeffs.iter().zip(pts) {
            for (a, x) in c.iter().zip(p.iter()) {
                s = s + *a * *x;
            }
        }
        s.exp()
    }
}

/// Midpoint lattice over the bounding box of two balls.
fn y_lattice<T: Real>(a: &[T], b: &[T], radius: T, m: usize) -> (Vec<Vec<T>>, T) {
    let lo: Vec<T> = a.iter().zip(b).map(|(x, y)| x.min(*y) - radius).collect();
    let hi: Vec<T> = a.iter().zip(b).map(|(x, y)| x.max(*y) + radius).collect();
    let h: Vec<T> = lo.iter().zip(&hi).map(|(l, u)| (*u - *l) / T::from_usize_lossy(m)).collect();
    let mut pts = Vec::with_capacity(m * m * m);
    for i in 0..m {
        for j in 0..m {
            for q in 0..m {
                let idx = [i, j, q];
                pts.push(
                    (0..3)
                        .map(|c| lo[c] + (T::from_usize_lossy(idx[c]) + T::lit(0.5)) * h[c])
                        .collect(),
                );
            }
        }
    }
    (pts, h[0] * h[1] * h[2])
}

/// Checks `W^{(k)}B_{l}(W^{(k+1)})^{−1}α = B̃_{many,l}α + B̃_{l}α` at configurations `(x; x′)`.
///
/// Each config holds `2k` points: `x_1..x_k` then `x_1′..x_k′`. The traced variable runs over
/// an `m³` midpoint lattice covering the interaction range around `x_l` and `x_l′`.
pub fn b_decomposition_residual<T: Real>(
    sp: &ScaledPotential<T>,
    k: usize,
    l: usize,
    configs: &[Config<T>],
    alpha: &SmoothClosure<T>,
    m: usize,
) -> Result<T> {
    if l == 0 || l > k {
        return domain(format!("index l = {l} outside 1..={k}"));
    }
    let loc = Localization::new(k, l);
    let pre = collapse_prefactor::<T>(sp.n, k);
    let reach = sp.range() * T::lit(1.05);
    let mut worst = T::zero();
    for cfg in configs {
        if cfg.len() != 2 * k {
            return domain("each configuration needs 2k points");
        }
        let (xs, xps) = cfg.split_at(k);
        let (ys, vol) = y_lattice(&xs[l - 1], &xps[l - 1], reach, m);
        let mut direct = Complex::new(T::zero(), T::zero());
        let mut split = Complex::new(T::zero(), T::zero());
        let mut scale = T::zero();
        for y in &ys {
            let sample = CollapseSample {
                v: sp.v_n(dist(&xs[l - 1], y)),
                v_primed: sp.v_n(dist(&xps[l - 1], y)),
                w: xs.iter().map(|x| sp.w_n(dist(x, y))).collect(),
                w_primed: xps.iter().map(|x| sp.w_n(dist(x, y))).collect(),
            };
            if sample.v == T::zero() && sample.v_primed == T::zero() {
                continue;
            }
            let mut pts: Vec<&[T]> = xs.iter().map(|v| v.as_slice()).collect();
            pts.push(y);
            pts.extend(xps.iter().map(|v| v.as_slice()));
            pts.push(y);
            let a = alpha.eval(&pts);
            let many = collapse_weight(BVariant::Many, &loc, &sample);
            let tilde = collapse_weight(BVariant::Tilde, &loc, &sample);
            direct = direct + a * conjugated_weight(&loc, &sample);
            split = split + a * many + a * tilde;
            scale = scale + a.norm() * (many.abs() + tilde.abs());
        }
        let direct = direct * pre * vol;
        let split = split * pre * vol;
        let scale = scale * pre * vol;
        let den = scale.max(direct.norm());
        if den > T::zero() {
            worst = worst.max((direct - split).norm() / den);
        }
    }
    Ok(worst)
}

/// Pairs `(x_l, x_l′)` are drawn inside the interaction range so the collapse is nontrivial.
pub fn sample_kernel_configs<T: Real>(sp: &ScaledPotential<T>, k: usize, count: usize, seed: u64) -> Vec<Config<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = sp.range().max(T::lit(1e-12)) * T::lit(1.5);
    (0..count).map(|_| (0..2 * k).map(|_| ball_point(&mut rng, r)).collect()).collect()
}
