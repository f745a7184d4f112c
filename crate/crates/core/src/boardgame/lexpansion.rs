use crate::scalar::Real;

/// One `w` factor of the expansion, evaluated against `x_{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WFactor {
    /// `w(x_j − x_{k+1})`
    Unprimed(usize),
    /// `w(x_j′ − x_{k+1})`
    Primed(usize),
}

/// Signed product of `w` factors; `sigma` is the leading factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LMonomial {
    pub sign: i8,
    pub factors: Vec<WFactor>,
    pub sigma: WFactor,
}

impl LMonomial {
    /// Value given `w(x_j − x_{k+1})` and `w(x_j′ − x_{k+1})` indexed by `j − 1`.
    pub fn eval<T: Real>(&self, w_unprimed: &[T], w_primed: &[T]) -> T {
        let mut p = if self.sign < 0 { -T::one() } else { T::one() };
        for f in &self.factors {
            p = p * match *f {
                WFactor::Unprimed(j) => w_unprimed[j - 1],
                WFactor::Primed(j) => w_primed[j - 1],
            };
        }
        p
    }
}

/// Ordered `G` factors of `L_{l,k+1} + 1`: unprimed `j ≠ l` then primed `j`.
fn factor_list(k: usize, l: usize) -> Vec<WFactor> {
    (1..=k)
        .filter(|&j| j != l)
        .map(WFactor::Unprimed)
        .chain((1..=k).map(WFactor::Primed))
        .collect()
}

/// Expansion of `L_{l,k+1} = G_{l′,k+1}∏_{j≠l}G_{j,k+1}G_{j′,k+1} − 1` with `G = 1 − w`.
///
/// Monomials are listed by increasing subset bitmask over the ordered factor list.
pub fn expand_l(k: usize, l: usize) -> Vec<LMonomial> {
    assert!(k >= 1 && (1..=k).contains(&l), "need 1 <= l <= k");
    let factors = factor_list(k, l);
    let nf = factors.len();
    (1u64..(1u64 << nf))
        .map(|mask| {
            let chosen: Vec<WFactor> = (0..nf).filter(|b| mask >> b & 1 == 1).map(|b| factors[b]).collect();
            LMonomial {
                sign: if chosen.len() % 2 == 1 { -1 } else { 1 },
                sigma: chosen[0],
                factors: chosen,
            }
        })
        .collect()
}
