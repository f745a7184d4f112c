use crate::grid::LatticeGrid;
use crate::scalar::Real;
use crate::scattering::{PairProfile, ScaledPotential};

/// Site bookkeeping for fields whose variables each live on one particle lattice.
#[derive(Debug, Clone, Copy)]
pub struct SiteLayout {
    pub n: usize,
    pub d: usize,
}

impl SiteLayout {
    pub fn new<T: Real>(grid: &LatticeGrid<T>) -> Self {
        Self {
            n: grid.points_per_axis,
            d: grid.d,
        }
    }

    /// Sites of one variable, `n^d`.
    #[inline]
    pub fn per_var(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Splits a flat index over `vars` variables into per-variable site indices.
    #[inline]
    pub fn split(&self, mut flat: usize, vars: usize, out: &mut [usize]) {
        let s = self.per_var();
        for v in (0..vars).rev() {
            out[v] = flat % s;
            flat /= s;
        }
    }

    #[inline]
    pub fn join(&self, sites: &[usize]) -> usize {
        let s = self.per_var();
        sites.iter().fold(0, |acc, &x| acc * s + x)
    }

    /// Axis index `c` of a site.
    #[inline]
    pub fn axis(&self, site: usize, c: usize) -> usize {
        (site / self.n.pow((self.d - 1 - c) as u32)) % self.n
    }

    /// Table index of the periodic displacement `a − b`.
    #[inline]
    pub fn diff(&self, a: usize, b: usize) -> usize {
        let mut idx = 0;
        for c in 0..self.d {
            let ia = self.axis(a, c);
            let ib = self.axis(b, c);
            idx = idx * self.n + (ia + self.n - ib) % self.n;
        }
        idx
    }
}

/// Function of the minimum-image displacement, tabulated over `n^d` offsets.
#[derive(Debug, Clone)]
pub struct PairTable<T> {
    pub values: Vec<T>,
}

impl<T: Real> PairTable<T> {
    pub fn build(grid: &LatticeGrid<T>, f: impl Fn(&[T]) -> T) -> Self {
        let lay = SiteLayout::new(grid);
        let mut disp = vec![T::zero(); grid.d];
        let values = (0..lay.per_var())
            .map(|s| {
                for (c, x) in disp.iter_mut().enumerate() {
                    *x = grid.displacement(lay.axis(s, c), 0);
                }
                f(&disp)
            })
            .collect();
        Self { values }
    }

    #[inline]
    pub fn at(&self, idx: usize) -> T {
        self.values[idx]
    }
}

fn norm<T: Real>(x: &[T]) -> T {
    x.iter().map(|c| *c * *c).sum::<T>().sqrt()
}

/// Pair potential and correlation tabulated on a lattice.
#[derive(Debug, Clone)]
pub struct GridInteraction<T> {
    pub grid: LatticeGrid<T>,
    pub layout: SiteLayout,
    /// Particle count used for prefactors.
    pub n_particles: u64,
    pub v: PairTable<T>,
    pub v_tilde: PairTable<T>,
    pub w: PairTable<T>,
    /// `∇w`, component-major: `grad_w[c]`.
    pub grad_w: Vec<PairTable<T>>,
}

impl<T: Real> GridInteraction<T> {
    /// Tables of `V_N`, `Ṽ_N`, `w_N` and `∇w_N` on the lattice.
    pub fn new(grid: &LatticeGrid<T>, sp: &ScaledPotential<T>) -> Self {
        Self::from_parts(grid, sp.n, |r| sp.v_n(r), &sp.profile)
    }

    pub fn from_parts(
        grid: &LatticeGrid<T>,
        n_particles: u64,
        v: impl Fn(T) -> T,
        profile: &PairProfile<T>,
    ) -> Self {
        let vt = PairTable::build(grid, |x| v(norm(x)));
        let wt = PairTable::build(grid, |x| profile.w(norm(x)));
        let vtil = PairTable {
            values: vt.values.iter().zip(&wt.values).map(|(a, b)| *a * (T::one() - *b)).collect(),
        };
        let grad_w = (0..grid.d)
            .map(|c| PairTable::build(grid, |x| profile.grad(x)[c]))
            .collect();
        Self {
            grid: *grid,
            layout: SiteLayout::new(grid),
            n_particles,
            v: vt,
            v_tilde: vtil,
            w: wt,
            grad_w,
        }
    }

    pub fn mean_field(&self) -> T {
        T::one() / T::lit(self.n_particles as f64)
    }

    pub fn has_correlation(&self) -> bool {
        self.w.values.iter().any(|x| *x != T::zero())
    }
}
