use crate::error::{domain, Result};
use crate::numerics::{gauss_legendre, CubicSpline};
use crate::scalar::Real;

/// Threshold below which a decaying profile counts as vanished.
pub const NEGLIGIBLE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind<T> {
    SquareBarrier { height: T, radius: T },
    Gaussian { amplitude: T, width: T },
    Tabulated { r: Vec<T>, values: Vec<T> },
}

/// Spherically symmetric, nonnegative pair potential on ℝ³.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPotential<T> {
    pub kind: PotentialKind<T>,
    pub r_max: T,
    spline: Option<CubicSpline<T>>,
}

impl<T: Real> RadialPotential<T> {
    pub fn square_barrier(height: T, radius: T, r_max: T) -> Result<Self> {
        Self::build(PotentialKind::SquareBarrier { height, radius }, r_max)
    }

    pub fn gaussian(amplitude: T, width: T, r_max: T) -> Result<Self> {
        Self::build(PotentialKind::Gaussian { amplitude, width }, r_max)
    }

    pub fn tabulated(r: Vec<T>, values: Vec<T>, r_max: T) -> Result<Self> {
        Self::build(PotentialKind::Tabulated { r, values }, r_max)
    }

    /// `V ≡ 0` (a barrier of zero height).
    pub fn zero() -> Self {
        Self::build(
            PotentialKind::SquareBarrier {
                height: T::zero(),
                radius: T::one(),
            },
            T::lit(4.0),
        )
        .expect("zero potential is valid")
    }

    /// Same potential with `r_max` set to a multiple of the support radius.
    pub fn with_default_rmax(kind: PotentialKind<T>) -> Result<Self> {
        let probe = Self::build_unchecked(kind.clone(), T::one())?;
        let r_max = probe.support_radius() * T::lit(4.0);
        Self::build(kind, r_max)
    }

    fn build_unchecked(kind: PotentialKind<T>, r_max: T) -> Result<Self> {
        match &kind {
            PotentialKind::SquareBarrier { height, radius } => {
                if *height < T::zero() || !height.is_finite() {
                    return domain(format!("negative potential sample: height {height}"));
                }
                if !(*radius > T::zero()) {
                    return domain("barrier radius must be positive");
                }
            }
            PotentialKind::Gaussian { amplitude, width } => {
                if *amplitude < T::zero() || !amplitude.is_finite() {
                    return domain(format!("negative potential sample: amplitude {amplitude}"));
                }
                if !(*width > T::zero()) {
                    return domain("gaussian width must be positive");
                }
            }
            PotentialKind::Tabulated { r, values } => {
                if let Some(v) = values.iter().find(|v| **v < T::zero() || !v.is_finite()) {
                    return domain(format!("negative potential sample: {v}"));
                }
                if r.first().map_or(true, |&r0| r0 < T::zero()) {
                    return domain("tabulated radii must start at r >= 0");
                }
            }
        }
        let spline = match &kind {
            PotentialKind::Tabulated { r, values } => Some(CubicSpline::new(r.clone(), values.clone())?),
            _ => None,
        };
        Ok(Self { kind, r_max, spline })
    }

    fn build(kind: PotentialKind<T>, r_max: T) -> Result<Self> {
        let p = Self::build_unchecked(kind, r_max)?;
        if !(r_max > T::zero()) || !r_max.is_finite() {
            return domain("r_max must be positive");
        }
        Ok(p)
    }

    /// `V(r)`; right-continuous at a barrier edge.
    pub fn value(&self, r: T) -> T {
        match &self.kind {
            PotentialKind::SquareBarrier { height, radius } => {
                if r < *radius {
                    *height
                } else {
                    T::zero()
                }
            }
            PotentialKind::Gaussian { amplitude, width } => {
                let x = r / *width;
                *amplitude * (-x * x).exp()
            }
            PotentialKind::Tabulated { r: rs, .. } => {
                let s = self.spline.as_ref().expect("tabulated spline");
                if r > rs[rs.len() - 1] {
                    T::zero()
                } else {
                    s.eval(r).max(T::zero())
                }
            }
        }
    }

    /// `V` evaluated inside the open segment `(lo, hi)` free of breakpoints.
    pub fn value_in_segment(&self, r: T, lo: T, hi: T) -> T {
        match &self.kind {
            PotentialKind::SquareBarrier { .. } => self.value((lo + hi) * T::lit(0.5)),
            _ => self.value(r),
        }
    }

    /// Radii where `V` or its derivative jumps.
    pub fn breakpoints(&self) -> Vec<T> {
        match &self.kind {
            PotentialKind::SquareBarrier { radius, .. } => vec![*radius],
            PotentialKind::Gaussian { .. } => vec![],
            PotentialKind::Tabulated { r, .. } => vec![r[r.len() - 1]],
        }
    }

    /// Radius beyond which `V` vanishes or stays below the negligible threshold.
    pub fn support_radius(&self) -> T {
        match &self.kind {
            PotentialKind::SquareBarrier { radius, .. } => *radius,
            PotentialKind::Gaussian { amplitude, width } => {
                let ratio = amplitude.to_f64_lossy() / NEGLIGIBLE;
                if ratio <= 1.0 {
                    *width
                } else {
                    *width * T::lit(ratio.ln().sqrt())
                }
            }
            PotentialKind::Tabulated { r, .. } => r[r.len() - 1],
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            PotentialKind::SquareBarrier { height, .. } => *height == T::zero(),
            PotentialKind::Gaussian { amplitude, .. } => *amplitude == T::zero(),
            PotentialKind::Tabulated { values, .. } => values.iter().all(|v| *v == T::zero()),
        }
    }

    /// Segment boundaries `0 = r_0 < ... < r_max` aligned with the breakpoints.
    pub fn segments(&self, r_end: T) -> Vec<T> {
        let mut pts = vec![T::zero()];
        for b in self.breakpoints() {
            if b > T::zero() && b < r_end {
                pts.push(b);
            }
        }
        pts.push(r_end);
        pts
    }

    /// `∫_{ℝ³} V = 4π ∫ r² V(r) dr`.
    pub fn integral_3d(&self) -> T {
        if let PotentialKind::SquareBarrier { height, radius } = &self.kind {
            return T::lit(4.0) * T::PI() * *height * radius.powi(3) / T::lit(3.0);
        }
        self.radial_moment(2) * T::lit(4.0) * T::PI()
    }

    /// `∫_ℝ V(|x|) dx = 2 ∫ V(r) dr`, used by the one-dimensional surrogate.
    pub fn integral_1d(&self) -> T {
        if let PotentialKind::SquareBarrier { height, radius } = &self.kind {
            return T::lit(2.0) * *height * *radius;
        }
        self.radial_moment(0) * T::lit(2.0)
    }

    /// `∫_0^{r_max} r^p V(r) dr` by composite Gauss-Legendre on the segments.
    pub fn radial_moment(&self, p: i32) -> T {
        let seg = self.segments(self.r_max);
        let mut total = T::zero();
        for w in seg.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            total = total
                + gauss_legendre(|r| r.powi(p) * self.value_in_segment(r, lo, hi), lo, hi, 400);
        }
        total
    }

    /// Integral of `V` over ℝ^d for `d` in {1, 3}.
    pub fn integral(&self, d: usize) -> T {
        if d == 1 {
            self.integral_1d()
        } else {
            self.integral_3d()
        }
    }
}
