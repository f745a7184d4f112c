//! Small numerical kernels: cubic splines, Gauss-Legendre panels, line fits.

use crate::error::{domain, Result};
use crate::scalar::Real;

/// Natural cubic spline through strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline<T> {
    x: Vec<T>,
    y: Vec<T>,
    m: Vec<T>,
}

impl<T: Real> CubicSpline<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return domain("spline needs at least two samples of equal length");
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("spline abscissae must be strictly increasing");
        }
        let mut m = vec![T::zero(); n];
        if n > 2 {
            // Thomas algorithm on the interior second-derivative system.
            let two = T::lit(2.0);
            let six = T::lit(6.0);
            let mut c = vec![T::zero(); n];
            let mut d = vec![T::zero(); n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let rhs = six * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
                let diag = two * (h0 + h1) - h0 * c[i - 1];
                c[i] = h1 / diag;
                d[i] = (rhs - h0 * d[i - 1]) / diag;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        Ok(Self { x, y, m })
    }

    pub fn x_min(&self) -> T {
        self.x[0]
    }

    pub fn x_max(&self) -> T {
        self.x[self.x.len() - 1]
    }

    /// Value at `t`, clamped to the sampled interval.
    pub fn eval(&self, t: T) -> T {
        let n = self.x.len();
        let t = t.max(self.x[0]).min(self.x[n - 1]);
        let i = match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let six = T::lit(6.0);
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / six
    }
}

const GL5_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Composite 5-point Gauss-Legendre rule over `[a, b]` with `panels` panels.
pub fn gauss_legendre<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, panels: usize) -> T {
    let h = (b - a) / T::from_usize_lossy(panels);
    let half = h * T::lit(0.5);
    let mut total = T::zero();
    for p in 0..panels {
        let mid = a + h * (T::from_usize_lossy(p) + T::lit(0.5));
        let mut s = T::zero();
        for (xn, wn) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            s = s + T::lit(*wn) * f(mid + half * T::lit(*xn));
        }
        total = total + s * half;
    }
    total
}

/// Least-squares line `y = slope·x + intercept`; returns `(slope, intercept, max |residual|)`.
pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> Result<(T, T, T)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return domain("line fit needs at least two points");
    }
    let nf = T::from_usize_lossy(n);
    let mx = x.iter().copied().sum::<T>() / nf;
    let my = y.iter().copied().sum::<T>() / nf;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        sxx = sxx + (a - mx) * (a - mx);
        sxy = sxy + (a - mx) * (b - my);
    }
    if sxx == T::zero() {
        return domain("degenerate abscissae in line fit");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let maxres = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| (b - slope * a - intercept).abs())
        .fold(T::zero(), T::max);
    Ok((slope, intercept, maxres))
}
