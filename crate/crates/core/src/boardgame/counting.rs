use crate::error::{domain, Error, Result};
use crate::numerics::fit_line;

/// Dyadic sums stop at `M = 2^40`.
pub const DYADIC_CAP_LOG2: u32 = 40;

fn dyadic_log2(m: u64, what: &str) -> Result<u32> {
    if m == 0 || !m.is_power_of_two() {
        return domain(format!("{what} = {m} is not dyadic"));
    }
    Ok(m.trailing_zeros())
}

fn ln_factorial(j: usize) -> f64 {
    (1..=j).map(|i| (i as f64).ln()).sum()
}

/// Number of nondecreasing chains `M_{k−1} ≤ M_k ≤ … ≤ M_{k+j−1} ≤ M_{k+j}` of
/// dyadic scales between two endpoints `2^m` apart, by explicit enumeration.
pub fn iterates3_count_chains(j: usize, m: u32) -> u128 {
    fn rec(left: usize, lo: u32, top: u32) -> u128 {
        if left == 0 {
            return 1;
        }
        (lo..=top).map(|e| rec(left - 1, e, top)).sum()
    }
    rec(j, 0, m)
}

/// Returns `(chain count, (log₂(M_high/M_low) + j)^j / j!)`.
pub fn iterates3_check(j: usize, m_low: u64, m_high: u64) -> Result<(u128, f64)> {
    if j == 0 || j > 10 {
        return domain(format!("j must lie in 1..=10, got {j}"));
    }
    let lo = dyadic_log2(m_low, "M_low")?;
    let hi = dyadic_log2(m_high, "M_high")?;
    if hi < lo {
        return domain("M_low must not exceed M_high");
    }
    let m = hi - lo;
    let lhs = iterates3_count_chains(j, m);
    let rhs = ((m as f64 + j as f64).ln() * j as f64 - ln_factorial(j)).exp();
    Ok((lhs, rhs))
}

/// Direct check of `tʲ(α log M + j)ʲ/j! ≤ M^ε` at one `(j, M)`.
pub fn iterates4_holds(t: f64, alpha: f64, epsilon: f64, j: usize, m: f64) -> bool {
    let fact: f64 = (1..=j).map(|i| i as f64).product();
    let lhs = (t * (alpha * m.ln() + j as f64)).powi(j as i32) / fact;
    lhs <= m.powf(epsilon) * (1.0 + 1e-12)
}

/// Largest `t` with `tʲ(α log M + j)ʲ/j! ≤ M^ε` for `1 ≤ j ≤ j_max` and every
/// `M ∈ [1, M_max]`, found by bisection.
///
/// The constraint is enforced on the whole interval, not only at dyadic `M`:
/// `j·ln(αL + j) − εL` is concave in `L = log M`, so its supremum is exact.
pub fn iterates4_find_t(alpha: f64, epsilon: f64, j_max: usize, m_max: u64) -> Result<f64> {
    if !(alpha > 0.0) || !(epsilon > 0.0) {
        return domain("alpha and epsilon must be positive");
    }
    if j_max == 0 {
        return domain("j_max must be at least 1");
    }
    let l_max = dyadic_log2(m_max, "M_max")? as f64 * std::f64::consts::LN_2;
    let worst: Vec<f64> = (1..=j_max)
        .map(|j| {
            let jf = j as f64;
            let l_star = (jf / epsilon - jf / alpha).clamp(0.0, l_max);
            jf * (alpha * l_star + jf).ln() - epsilon * l_star - ln_factorial(j)
        })
        .collect();
    let feasible = |t: f64| {
        let lt = t.ln();
        worst.iter().enumerate().all(|(i, w)| (i + 1) as f64 * lt + w <= 0.0)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while feasible(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Numerical("t search did not terminate".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !(lo > 0.0) {
        return Err(Error::Numerical("no positive t satisfies the constraint".into()));
    }
    Ok(lo)
}

/// Summand `min(M^{a}·N^{b}, M^{c})` of a dyadic min-sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinSumForm {
    pub tail_m: f64,
    pub tail_n: f64,
    pub head_m: f64,
}

impl MinSumForm {
    /// `min(M^{−1+2ε}N^β, M^{2ε})`.
    pub fn kip(beta: f64, epsilon: f64) -> Self {
        Self {
            tail_m: -1.0 + 2.0 * epsilon,
            tail_n: beta,
            head_m: 2.0 * epsilon,
        }
    }

    /// `min(M^{−1+2ε}N^{3β}, M^{2+2ε})`.
    pub fn pp(beta: f64, epsilon: f64) -> Self {
        Self {
            tail_m: -1.0 + 2.0 * epsilon,
            tail_n: 3.0 * beta,
            head_m: 2.0 + 2.0 * epsilon,
        }
    }
}

/// `Σ_{M_start ≤ M ≤ 2^40, M dyadic} min(M^{a}N^{b}, M^{c})`.
pub fn dyadic_min_sum(n: u64, m_start: u64, form: MinSumForm) -> Result<f64> {
    dyadic_log2(n, "N")?;
    let e0 = dyadic_log2(m_start, "M_start")?;
    if form.tail_m >= 0.0 {
        return Err(Error::Divergent(format!(
            "tail exponent {} is not negative",
            form.tail_m
        )));
    }
    if e0 > DYADIC_CAP_LOG2 {
        return Ok(0.0);
    }
    let nf = n as f64;
    Ok((e0..=DYADIC_CAP_LOG2)
        .map(|e| {
            let m = (e as f64).exp2();
            (m.powf(form.tail_m) * nf.powf(form.tail_n)).min(m.powf(form.head_m))
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinSumScan {
    pub n: Vec<u64>,
    pub values: Vec<f64>,
    /// Slope of `log value` against `log N`.
    pub fitted_exponent: f64,
}

/// Evaluates the sum for `N = 2^e`, `e` in `n_log2`, and fits the growth exponent.
pub fn dyadic_min_sum_scan(
    n_log2: &[u32],
    m_start: u64,
    form: MinSumForm,
) -> Result<MinSumScan> {
    if n_log2.len() < 2 {
        return domain("scan needs at least two values of N");
    }
    let n: Vec<u64> = n_log2.iter().map(|&e| 1u64 << e).collect();
    let values = n
        .iter()
        .map(|&nn| dyadic_min_sum(nn, m_start, form))
        .collect::<Result<Vec<f64>>>()?;
    let lx: Vec<f64> = n.iter().map(|&x| (x as f64).ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (slope, _, _) = fit_line(&lx, &ly)?;
    Ok(MinSumScan {
        n,
        values,
        fitted_exponent: slope,
    })
}
