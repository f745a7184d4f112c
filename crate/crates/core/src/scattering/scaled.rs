use std::sync::Arc;

use crate::error::{domain, Result};
use crate::scalar::Real;

use super::potential::{PotentialKind, RadialPotential};
use super::profile::PairProfile;
use super::solver::{screening_factor, solve_screened, DEFAULT_TOL};

/// `V_N = N^{dβ}V(N^β·)` together with the pair correlation `w_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledPotential<T> {
    pub base: RadialPotential<T>,
    pub n: u64,
    pub beta: T,
    /// Spatial dimension of the scaling law (3, or 1 for the surrogate).
    pub d: usize,
    /// `w_N` as a function of `|x|`.
    pub profile: PairProfile<T>,
}

impl<T: Real> ScaledPotential<T> {
    /// Three-dimensional scaling with `w_N = N^{β−1}w₀(N^β·)` from the screened problem.
    pub fn new(base: RadialPotential<T>, n: u64, beta: T) -> Result<Self> {
        Self::check(n, beta)?;
        let s = screening_factor(n, beta);
        let lambda = T::lit(n as f64).powf(beta);
        let profile = match &base.kind {
            _ if base.is_zero() => PairProfile::Zero,
            PotentialKind::SquareBarrier { height, radius } => {
                PairProfile::square_barrier(*height, *radius, s, lambda)
            }
            _ => PairProfile::Numeric {
                lambda,
                sol: Arc::new(solve_screened(&base, s, T::lit(DEFAULT_TOL))?),
            },
        };
        Ok(Self {
            base,
            n,
            beta,
            d: 3,
            profile,
        })
    }

    /// `d`-dimensional surrogate scaling `N^{dβ}V(N^β·)` without pair correlation.
    pub fn surrogate(base: RadialPotential<T>, n: u64, beta: T, d: usize) -> Result<Self> {
        Self::check(n, beta)?;
        if d != 1 && d != 3 {
            return domain("surrogate dimension must be 1 or 3");
        }
        Ok(Self {
            base,
            n,
            beta,
            d,
            profile: PairProfile::Zero,
        })
    }

    /// Replaces the pair correlation profile.
    pub fn with_profile(mut self, profile: PairProfile<T>) -> Self {
        self.profile = profile;
        self
    }

    fn check(n: u64, beta: T) -> Result<()> {
        if n == 0 {
            return domain("particle count must be at least 1");
        }
        if !(beta > T::zero() && beta <= T::one()) {
            return domain(format!("beta must lie in (0, 1], got {beta}"));
        }
        Ok(())
    }

    /// `N^β`.
    pub fn lambda(&self) -> T {
        T::lit(self.n as f64).powf(self.beta)
    }

    /// `N^{β−1}`.
    pub fn screening(&self) -> T {
        screening_factor(self.n, self.beta)
    }

    /// `1/N`.
    pub fn mean_field(&self) -> T {
        T::one() / T::lit(self.n as f64)
    }

    pub fn v_n(&self, r: T) -> T {
        let l = self.lambda();
        l.powi(self.d as i32) * self.base.value(l * r)
    }

    pub fn w_n(&self, r: T) -> T {
        self.profile.w(r)
    }

    /// `Ṽ_N = V_N(1 − w_N)`.
    pub fn v_tilde(&self, r: T) -> T {
        self.v_n(r) * (T::one() - self.w_n(r))
    }

    /// Support radius of `V_N`.
    pub fn range(&self) -> T {
        self.base.support_radius() / self.lambda()
    }

    /// Radial quadrature of `∫ V_N` in the scaling dimension.
    pub fn integral_v_n(&self) -> T {
        let l = self.lambda();
        let seg: Vec<T> = self.base.segments(self.base.r_max).iter().map(|r| *r / l).collect();
        let mut total = T::zero();
        for w in seg.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let f = |r: T| {
                let v = l.powi(self.d as i32) * self.base.value_in_segment(l * r, l * lo, l * hi);
                if self.d == 3 {
                    T::lit(4.0) * T::PI() * r * r * v
                } else {
                    T::lit(2.0) * v
                }
            };
            total = total + crate::numerics::gauss_legendre(f, lo, hi, 400);
        }
        total
    }
}
