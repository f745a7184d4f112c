use crate::error::Result;
use crate::numerics::fit_line;
use crate::scalar::{bracket, Real};
use crate::scattering::{RadialPotential, ScaledPotential};

/// Particle numbers `2^6, …, 2^20` of the envelope scan.
pub fn shape_scan_sizes() -> Vec<u64> {
    (6..=20).map(|e| 1u64 << e).collect()
}

/// Samples of the radial scan in `ρ = N^β r`.
pub const SHAPE_SAMPLES: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeRow<T> {
    pub n: u64,
    /// `max_r N⁻¹V_N(r)`.
    pub potential_peak: T,
    /// `max_r |∇w_N(r)|²`, the coincident cross-pair product.
    pub gradient_peak: T,
    /// `gradient_peak / potential_peak`.
    pub envelope_ratio: T,
    /// `max_r N⁻¹V_N / (N^{3β−1}⟨N^βr⟩^{−100})`.
    pub potential_envelope: T,
    /// `max_r |∇w_N| / (N^{2β−1}⟨N^βr⟩^{−2})`.
    pub gradient_constant: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport<T> {
    pub beta: T,
    pub rows: Vec<ShapeRow<T>>,
    /// Slope of `ln envelope_ratio` against `ln N`.
    pub fitted_exponent: T,
    /// Largest `gradient_constant` over the scan.
    pub gradient_constant: T,
}

/// Compares `N⁻¹V_N` and `(∇w_N)·(∇w_N)` with their envelopes over `N ∈ {2^6, …, 2^20}`.
pub fn potential_shape_compare<T: Real>(base: &RadialPotential<T>, beta: T) -> Result<ShapeReport<T>> {
    potential_shape_scan(base, beta, &shape_scan_sizes())
}

pub fn potential_shape_scan<T: Real>(base: &RadialPotential<T>, beta: T, sizes: &[u64]) -> Result<ShapeReport<T>> {
    let rho_max = (base.support_radius() * T::lit(4.0)).max(T::lit(20.0));
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let sp = ScaledPotential::new(base.clone(), n, beta)?;
        let nf = T::lit(n as f64);
        let lambda = sp.lambda();
        let mut row = ShapeRow {
            n,
            potential_peak: T::zero(),
            gradient_peak: T::zero(),
            envelope_ratio: T::zero(),
            potential_envelope: T::zero(),
            gradient_constant: T::zero(),
        };
        let e1 = nf.powf(T::lit(3.0) * beta - T::one());
        let e_grad = nf.powf(T::lit(2.0) * beta - T::one());
        for i in 1..=SHAPE_SAMPLES {
            let rho = rho_max * T::from_usize_lossy(i) / T::from_usize_lossy(SHAPE_SAMPLES);
            let r = rho / lambda;
            let pot = sp.v_n(r) / nf;
            let (_, dw, _) = sp.profile.derivs(r);
            let g = dw.abs();
            let b = bracket(rho);
            row.potential_peak = row.potential_peak.max(pot);
            row.gradient_peak = row.gradient_peak.max(g * g);
            row.potential_envelope = row.potential_envelope.max(pot / (e1 * b.powi(-100)));
            row.gradient_constant = row.gradient_constant.max(g / (e_grad * b.powi(-2)));
        }
        row.envelope_ratio = if row.potential_peak > T::zero() {
            row.gradient_peak / row.potential_peak
        } else {
            T::zero()
        };
        rows.push(row);
    }
    let usable: Vec<&ShapeRow<T>> = rows.iter().filter(|r| r.envelope_ratio > T::zero()).collect();
    let fitted_exponent = if usable.len() >= 2 {
        let x: Vec<T> = usable.iter().map(|r| T::lit(r.n as f64).ln()).collect();
        let y: Vec<T> = usable.iter().map(|r| r.envelope_ratio.ln()).collect();
        fit_line(&x, &y)?.0
    } else {
        T::zero()
    };
    let gradient_constant = rows.iter().map(|r| r.gradient_constant).fold(T::zero(), T::max);
    Ok(ShapeReport {
        beta,
        rows,
        fitted_exponent,
        gradient_constant,
    })
}
