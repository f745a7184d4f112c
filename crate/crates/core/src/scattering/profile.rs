use std::sync::Arc;

use crate::autodiff::AdScalar;
use crate::scalar::Real;

use super::solver::ScatteringSolution;

/// Below this `κρ` the closed forms switch to their Taylor expansion.
const SERIES_CUTOFF: f64 = 1e-4;

/// Radial pair-correlation profile `w(r)` in physical (already scaled) units.
#[derive(Debug, Clone, PartialEq)]
pub enum PairProfile<T> {
    Zero,
    /// `w(r) = 1 − f(λr)` for the screened square barrier:
    /// `f(ρ) = sinh(κρ)/(κ cosh(κR)·ρ)` inside, `1 − a/ρ` outside.
    SquareBarrier { kappa: T, radius: T, a_s: T, lambda: T },
    /// `w(r) = depth·exp(−(r/width)²)`.
    Gaussian { depth: T, width: T },
    /// `w(r) = 1 − u(λr)/(λr)` from a tabulated solution.
    Numeric { lambda: T, sol: Arc<ScatteringSolution<T>> },
}

impl<T: Real> PairProfile<T> {
    /// Closed-form square barrier of height `v0`, radius `radius`, screening `s`, scale `lambda`.
    pub fn square_barrier(v0: T, radius: T, s: T, lambda: T) -> Self {
        let kappa = (s * v0 * T::lit(0.5)).sqrt();
        if kappa == T::zero() {
            return PairProfile::Zero;
        }
        let a_s = radius - (kappa * radius).tanh() / kappa;
        PairProfile::SquareBarrier {
            kappa,
            radius,
            a_s,
            lambda,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PairProfile::Zero)
    }

    /// Radius of the sharp edge, if any (`R/λ` for the square barrier).
    pub fn edge(&self) -> Option<T> {
        match self {
            PairProfile::SquareBarrier { radius, lambda, .. } => Some(*radius / *lambda),
            _ => None,
        }
    }

    /// `w` composed with a (possibly dual) radius.
    pub fn w_ad<S: AdScalar<T>>(&self, r: S) -> S {
        match self {
            PairProfile::Zero => S::cst(T::zero()),
            PairProfile::SquareBarrier {
                kappa,
                radius,
                a_s,
                lambda,
            } => {
                let rho = r * S::cst(*lambda);
                let amp = T::one() / (*kappa * (*kappa * *radius).cosh());
                let f = if (*kappa * rho.value()).abs() < T::lit(SERIES_CUTOFF) {
                    let x = rho * S::cst(*kappa);
                    let x2 = x * x;
                    S::cst(amp * *kappa)
                        * (S::cst(T::one()) + x2 / S::cst(T::lit(6.0)) + x2 * x2 / S::cst(T::lit(120.0)))
                } else if rho.value() < *radius {
                    S::cst(amp) * (rho * S::cst(*kappa)).sinh() / rho
                } else {
                    S::cst(T::one()) - S::cst(*a_s) / rho
                };
                S::cst(T::one()) - f
            }
            PairProfile::Gaussian { depth, width } => {
                let x = r / S::cst(*width);
                S::cst(*depth) * (-(x * x)).exp()
            }
            PairProfile::Numeric { .. } => {
                let (w, w1, w2) = self.derivs(r.value());
                r.lift(w, w1, w2)
            }
        }
    }

    pub fn w(&self, r: T) -> T {
        self.w_ad(r)
    }

    /// `(w, w', w'')` at radius `r > 0`.
    pub fn derivs(&self, r: T) -> (T, T, T) {
        match self {
            PairProfile::Zero => (T::zero(), T::zero(), T::zero()),
            PairProfile::SquareBarrier {
                kappa,
                radius,
                a_s,
                lambda,
            } => {
                let rho = r * *lambda;
                let (f, f1, f2) = if (*kappa * rho).abs() < T::lit(SERIES_CUTOFF) {
                    let amp = T::one() / (*kappa * (*kappa * *radius).cosh());
                    let k = *kappa;
                    let x = k * rho;
                    let c = amp * k;
                    (
                        c * (T::one() + x * x / T::lit(6.0) + x.powi(4) / T::lit(120.0)),
                        c * k * (x / T::lit(3.0) + x.powi(3) / T::lit(30.0)),
                        c * k * k * (T::one() / T::lit(3.0) + x * x / T::lit(10.0)),
                    )
                } else if rho < *radius {
                    let amp = T::one() / (*kappa * (*kappa * *radius).cosh());
                    let (sh, ch) = ((*kappa * rho).sinh(), (*kappa * rho).cosh());
                    let k = *kappa;
                    let two = T::lit(2.0);
                    (
                        amp * sh / rho,
                        amp * (k * ch / rho - sh / (rho * rho)),
                        amp * (k * k * sh / rho - two * k * ch / (rho * rho) + two * sh / (rho * rho * rho)),
                    )
                } else {
                    (
                        T::one() - *a_s / rho,
                        *a_s / (rho * rho),
                        -T::lit(2.0) * *a_s / (rho * rho * rho),
                    )
                };
                (T::one() - f, -*lambda * f1, -*lambda * *lambda * f2)
            }
            PairProfile::Gaussian { depth, width } => {
                let s2 = *width * *width;
                let w = *depth * (-(r * r) / s2).exp();
                let two = T::lit(2.0);
                (w, -two * r / s2 * w, (T::lit(4.0) * r * r / (s2 * s2) - two / s2) * w)
            }
            PairProfile::Numeric { lambda, sol } => {
                let rho = r * *lambda;
                let (u, u1, u2) = hermite_u(sol, rho);
                if rho < T::lit(SERIES_CUTOFF) {
                    return (T::one() - sol.u_prime[0], T::zero(), -*lambda * *lambda * u2);
                }
                let f = u / rho;
                let f1 = (u1 - f) / rho;
                let f2 = (u2 - T::lit(2.0) * f1) / rho;
                (T::one() - f, -*lambda * f1, -*lambda * *lambda * f2)
            }
        }
    }

    /// `∇w(x)` for a displacement vector `x`.
    pub fn grad(&self, x: &[T]) -> Vec<T> {
        let r = x.iter().map(|c| *c * *c).sum::<T>().sqrt();
        if r == T::zero() {
            return vec![T::zero(); x.len()];
        }
        let (_, w1, _) = self.derivs(r);
        x.iter().map(|c| w1 * *c / r).collect()
    }
}

/// Cubic Hermite reconstruction of `(u, u', u'')` at `rho`.
fn hermite_u<T: Real>(sol: &ScatteringSolution<T>, rho: T) -> (T, T, T) {
    let r = &sol.r_grid;
    let last = r.len() - 1;
    if rho >= r[last] {
        // exterior: u = r − a·s exactly
        let a = sol.a0 * sol.screening;
        return (rho - a, T::one(), T::zero());
    }
    let i = match r.partition_point(|&x| x <= rho) {
        0 => 0,
        p => (p - 1).min(last - 1),
    };
    let h = r[i + 1] - r[i];
    let t = (rho - r[i]) / h;
    let (y0, y1) = (sol.u[i], sol.u[i + 1]);
    let (m0, m1) = (sol.u_prime[i] * h, sol.u_prime[i + 1] * h);
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let six = T::lit(6.0);
    let t2 = t * t;
    let t3 = t2 * t;
    let u = (two * t3 - three * t2 + one) * y0
        + (t3 - two * t2 + t) * m0
        + (-two * t3 + three * t2) * y1
        + (t3 - t2) * m1;
    let du = (six * t2 - six * t) * y0
        + (three * t2 - T::lit(4.0) * t + one) * m0
        + (-six * t2 + six * t) * y1
        + (three * t2 - two * t) * m1;
    let d2u = (T::lit(12.0) * t - six) * y0
        + (six * t - T::lit(4.0)) * m0
        + (-T::lit(12.0) * t + six) * y1
        + (six * t - two) * m1;
    (u, du / h, d2u / (h * h))
}
