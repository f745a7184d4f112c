use gphl_core::estimates::*;
use gphl_core::grid::MemoryBudget;
use gphl_core::manybody::PairTable;
use gphl_core::{Cutoff, Error, LatticeGrid, RadialPotential, SpaceTimeDensity, TimeAxis};
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn budget() -> MemoryBudget {
    MemoryBudget::default()
}

fn grid(d: usize, n: usize) -> LatticeGrid {
    LatticeGrid::with_any_even(d, n, TAU).unwrap()
}

fn random_field(len: usize, rng: &mut ChaCha8Rng) -> Vec<C> {
    (0..len)
        .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn random_dense(k: usize, g: &LatticeGrid, steps: usize, seed: u64) -> SpaceTimeDensity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let time = TimeAxis::new(0.0, 0.1, steps).unwrap();
    let data = random_field(steps * g.sites(2 * k), &mut rng);
    SpaceTimeDensity::dense(k, g, time, data).unwrap()
}

fn axis_time(steps: usize) -> TimeAxis {
    let cutoff = Cutoff::new(PROBE_PLATEAU).unwrap();
    TimeAxis::window(&cutoff, steps).unwrap()
}

/// Rank-2 density with active slots `active` and a plane-wave passive factor.
fn random_low_rank(k: usize, g: &LatticeGrid, active: Vec<usize>, seed: u64) -> SpaceTimeDensity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let time = axis_time(8);
    let passive_vars = 2 * k - active.len();
    let passive = tensor(
        &(0..passive_vars)
            .map(|i| plane_wave(g, &[i as i64 % 2]))
            .collect::<Vec<_>>()
            .iter()
            .map(|v| v.as_slice())
            .collect::<Vec<_>>(),
    );
    let terms = (0..2)
        .map(|_| LowRankTerm {
            coeff: C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            time: random_field(time.len, &mut rng),
            active: random_field(g.sites(active.len()), &mut rng),
            passive: passive.clone(),
        })
        .collect();
    SpaceTimeDensity::low_rank(k, g, time, active, terms).unwrap()
}

fn difference(a: &SpaceTimeDensity, b: &SpaceTimeDensity) -> f64 {
    a.max_difference(b).unwrap()
}

fn combine(a: &SpaceTimeDensity, b: &SpaceTimeDensity, sign: f64) -> SpaceTimeDensity {
    let x = a.dense_data().unwrap();
    let y = b.dense_data().unwrap();
    let data = x.iter().zip(y).map(|(p, q)| p + q * sign).collect();
    SpaceTimeDensity::dense(a.k, &a.grid, a.time, data).unwrap()
}

fn top_level(g: &LatticeGrid) -> u32 {
    max_grid_frequency(g).log2().ceil() as u32
}

// Projectors

#[test]
fn leq_projection_is_idempotent() {
    let g = grid(1, 16);
    let a = random_dense(1, &g, 3, 1);
    for level in 0..=3 {
        let p = DyadicProjector::new(level, LpMode::Leq, vec![0, 1]);
        let once = lp_project(&a, &p).unwrap().density;
        let twice = lp_project(&once, &p).unwrap().density;
        assert!(difference(&once, &twice) < 1e-14, "level {level}");
    }
}

#[test]
fn leq_removes_plane_wave_above_m() {
    let g = grid(1, 16);
    let time = TimeAxis::new(0.0, 0.1, 2).unwrap();
    let w = plane_wave(&g, &[5]);
    let one = plane_wave(&g, &[0]);
    let field = tensor(&[w.as_slice(), one.as_slice()]);
    let data: Vec<C> = field.iter().chain(field.iter()).copied().collect();
    let a = SpaceTimeDensity::dense(1, &g, time, data).unwrap();
    let low = lp_project(&a, &DyadicProjector::new(2, LpMode::Leq, vec![0, 1])).unwrap();
    assert!(low.warning.is_none());
    assert!(low.density.l2_norm() < 1e-12);
    let high = lp_project(&a, &DyadicProjector::new(3, LpMode::Leq, vec![0, 1])).unwrap();
    assert!(difference(&high.density, &a) < 1e-12);
}

#[test]
fn joint_leq_is_product_of_single_slot_projectors() {
    let g = grid(1, 16);
    let a = random_dense(1, &g, 2, 2);
    let joint = lp_project(&a, &DyadicProjector::new(2, LpMode::Leq, vec![0, 1])).unwrap().density;
    let first = lp_project(&a, &DyadicProjector::new(2, LpMode::Leq, vec![0])).unwrap().density;
    let both = lp_project(&first, &DyadicProjector::new(2, LpMode::Leq, vec![1])).unwrap().density;
    assert!(difference(&joint, &both) < 1e-13);
}

#[test]
fn annular_pieces_are_orthogonal_and_resolve_the_identity() {
    let g = grid(1, 16);
    let a = random_dense(1, &g, 2, 3);
    let top = top_level(&g);
    let pieces: Vec<SpaceTimeDensity> = (0..=top)
        .map(|l| lp_project(&a, &DyadicProjector::new(l, LpMode::Annular, vec![0, 1])).unwrap().density)
        .collect();
    let total: f64 = pieces.iter().map(|p| p.l2_norm().powi(2)).sum();
    let whole = a.l2_norm().powi(2);
    assert!((total - whole).abs() < 1e-12 * whole);
    for i in 0..pieces.len() {
        for j in i + 2..pieces.len() {
            let s = combine(&pieces[i], &pieces[j], 1.0).l2_norm().powi(2);
            let parts = pieces[i].l2_norm().powi(2) + pieces[j].l2_norm().powi(2);
            assert!((s - parts).abs() < 1e-12 * whole, "levels {i} and {j}");
        }
    }
    let mut sum = pieces[0].clone();
    for p in &pieces[1..] {
        sum = combine(&sum, p, 1.0);
    }
    assert!(difference(&sum, &a) < 1e-12);
}

#[test]
fn projector_above_grid_warns_and_keeps_everything() {
    let g = grid(1, 8);
    let a = random_dense(1, &g, 2, 4);
    let out = lp_project(&a, &DyadicProjector::new(6, LpMode::Leq, vec![0])).unwrap();
    assert!(out.warning.as_deref().unwrap().contains("exceeds"));
    assert!(difference(&out.density, &a) < 1e-13);
    let annulus = lp_project(&a, &DyadicProjector::new(6, LpMode::Annular, vec![0])).unwrap();
    assert!(annulus.warning.is_some());
    assert!(annulus.density.l2_norm() < 1e-12);
}

#[test]
fn low_rank_projection_matches_dense() {
    let g = grid(1, 8);
    let lr = random_low_rank(2, &g, vec![0, 1], 5);
    let dense = lr.to_dense(&budget()).unwrap();
    for (mode, slots) in [(LpMode::Leq, vec![0, 1]), (LpMode::Annular, vec![0]), (LpMode::Leq, vec![1, 3])] {
        let p = DyadicProjector::new(1, mode, slots);
        let a = lp_project(&lr, &p).unwrap().density;
        let b = lp_project(&dense, &p).unwrap().density;
        assert!(!a.is_dense());
        assert!(difference(&a, &b) < 1e-12);
    }
    let mixed = DyadicProjector::new(1, LpMode::Annular, vec![0, 2]);
    assert!(matches!(lp_project(&lr, &mixed), Err(Error::Domain(_))));
}

// Low-rank representation

#[test]
fn low_rank_eval_matches_dense_expansion() {
    let g = grid(1, 8);
    let lr = random_low_rank(2, &g, vec![0, 2], 6);
    let dense = lr.to_dense(&budget()).unwrap();
    assert!(difference(&lr, &dense) < 1e-12);
    assert!((lr.l2_norm() - dense.l2_norm()).abs() < 1e-12 * dense.l2_norm());
}

#[test]
fn low_rank_validation_rejects_bad_shapes() {
    let g = grid(1, 8);
    let time = axis_time(4);
    let term = LowRankTerm {
        coeff: C::new(1.0, 0.0),
        time: vec![C::new(1.0, 0.0); 4],
        active: vec![C::new(1.0, 0.0); 8],
        passive: vec![C::new(1.0, 0.0); 8],
    };
    assert!(SpaceTimeDensity::low_rank(1, &g, time, vec![0], vec![term.clone()]).is_ok());
    assert!(SpaceTimeDensity::low_rank(1, &g, time, vec![1, 0], vec![term.clone()]).is_err());
    assert!(SpaceTimeDensity::low_rank(1, &g, time, vec![0], vec![term; MAX_RANK + 1]).is_err());
}

#[test]
fn dense_budget_is_enforced() {
    let g = grid(1, 8);
    let lr = random_low_rank(2, &g, vec![0, 1], 7);
    let tiny = MemoryBudget::new(1024);
    assert!(matches!(lr.to_dense(&tiny), Err(Error::MemoryBudget { .. })));
}

// X_b norms

#[test]
fn xb_at_zero_is_the_l2_norm() {
    let g = grid(1, 8);
    let dense = random_dense(2, &g, 6, 8);
    let l2 = dense.l2_norm();
    assert!((xb_norm(&dense, 0.0, &budget()).unwrap() - l2).abs() < 1e-12 * l2);
    let lr = random_low_rank(2, &g, vec![0, 1], 9);
    let l2 = lr.l2_norm();
    assert!((xb_norm(&lr, 0.0, &budget()).unwrap() - l2).abs() < 1e-12 * l2);
}

#[test]
fn xb_low_rank_matches_dense_path() {
    let g = grid(1, 8);
    let lr = random_low_rank(2, &g, vec![0, 1], 10);
    let dense = lr.to_dense(&budget()).unwrap();
    for b in [-0.5, 0.5, 0.3] {
        let x = xb_norm(&lr, b, &budget()).unwrap();
        let y = xb_norm(&dense, b, &budget()).unwrap();
        assert!((x - y).abs() < 1e-10 * y, "b = {b}: {x} vs {y}");
    }
}

#[test]
fn xb_is_monotone_in_b() {
    let g = grid(1, 8);
    let a = random_dense(1, &g, 8, 11);
    let norms: Vec<f64> = [-0.5, -0.2, 0.0, 0.2, 0.5]
        .iter()
        .map(|&b| xb_norm(&a, b, &budget()).unwrap())
        .collect();
    assert!(norms.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-14)));
}

#[test]
fn windowed_free_evolution_matches_cutoff_oracle() {
    let g = grid(1, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let u = band_limited(&g, 2, &mut rng);
    let v = band_limited(&g, 2, &mut rng);
    let f = tensor(&[u.as_slice(), v.as_slice()]);
    let f_norm2: f64 = f.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.cell_volume().powi(2);
    let cutoff = Cutoff::new(PROBE_PLATEAU).unwrap();
    let time = TimeAxis::window(&cutoff, 256).unwrap();
    let alpha = free_evolution_window(&g, 1, &f, time, &cutoff, &budget()).unwrap();
    for b in [0.0, 0.5] {
        let lhs = xb_norm(&alpha, b, &budget()).unwrap().powi(2);
        let oracle = f_norm2 * cutoff_hb_norm_sq(&cutoff, b);
        assert!((lhs / oracle - 1.0).abs() < 0.1, "b = {b}: {lhs} vs {oracle}");
    }
}

#[test]
fn cutoff_profile_and_transform() {
    let c = Cutoff::new(0.5).unwrap();
    assert_eq!(c.value(0.3), 1.0);
    assert_eq!(c.value(-0.5), 1.0);
    assert_eq!(c.value(1.0), 0.0);
    assert!((c.value(0.75) - 0.5).abs() < 1e-15);
    let mid = [0.55, 0.7, 0.9].map(|t| c.value(t));
    assert!(mid.windows(2).all(|w| w[0] > w[1]));
    // θ̂(0) = ∫θ = 2T + 2·T/2 by the symmetry of the glue.
    assert!((cutoff_transform(&c, 0.0) - 1.5).abs() < 1e-10);
    assert!((cutoff_hb_norm_sq(&c, 0.0) - theta_l2_sq(&c)).abs() < 1e-6);
}

/// `∫θ²` by a fine midpoint rule on `[−2T, 2T]`.
fn theta_l2_sq(c: &Cutoff) -> f64 {
    let m = 200_000;
    let a = -2.0 * c.plateau;
    let h = 4.0 * c.plateau / m as f64;
    (0..m).map(|i| c.value(a + (i as f64 + 0.5) * h).powi(2)).sum::<f64>() * h
}

// Shears

#[test]
fn shear_round_trip_and_norm() {
    let g = grid(1, 8);
    let a = random_dense(2, &g, 2, 13);
    for which in [Shear::T1, Shear::T2] {
        let s = shear(&a, which, false).unwrap();
        let back = shear(&s, which, true).unwrap();
        assert_eq!(difference(&back, &a), 0.0);
        assert!((s.l2_norm() - a.l2_norm()).abs() < 1e-14 * a.l2_norm());
    }
    let b = random_dense(3, &grid(1, 4), 2, 14);
    for which in [Shear::T12, Shear::T13, Shear::T23] {
        let s = shear(&b, which, false).unwrap();
        assert_eq!(difference(&shear(&s, which, true).unwrap(), &b), 0.0);
    }
}

#[test]
fn t1_acts_by_coordinate_addition() {
    let g = grid(1, 8);
    let a = random_dense(2, &g, 1, 15);
    let s = shear(&a, Shear::T1, false).unwrap();
    let n = 8;
    for (i1, i2) in [(0, 0), (3, 5), (7, 7), (1, 6)] {
        // coord(i1) + coord(i2) = coord(i1 + i2 − n/2).
        let j = (i1 + i2 + n - n / 2) % n;
        assert_eq!(s.eval(0, &[i1, i2, 2, 3]), a.eval(0, &[j, i2, 2, 3]));
    }
}

#[test]
fn t12_is_two_elementary_shears() {
    let g = grid(1, 4);
    let a = random_dense(3, &g, 2, 16);
    let direct = shear(&a, Shear::T12, false).unwrap();
    let steps = elementary_shear(&elementary_shear(&a, 0, 2, false).unwrap(), 1, 2, false).unwrap();
    assert!(difference(&direct, &steps) < 1e-14);
    assert!(shear(&random_dense(2, &g, 1, 17), Shear::T12, false).is_err());
}

#[test]
fn low_rank_shear_matches_dense() {
    let g = grid(1, 8);
    let lr = random_low_rank(2, &g, vec![0, 1], 18);
    let dense = lr.to_dense(&budget()).unwrap();
    let a = shear(&lr, Shear::T2, false).unwrap();
    assert!(!a.is_dense());
    assert!(difference(&a, &shear(&dense, Shear::T2, false).unwrap()) < 1e-14);
    assert!(elementary_shear(&lr, 0, 2, false).is_err());
}

// Collapse

fn collapse_input(g: &LatticeGrid, steps: usize, seed: u64) -> SpaceTimeDensity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let time = TimeAxis::new(0.0, 1.0 / (steps - 1) as f64, steps).unwrap();
    let terms = (0..2)
        .map(|_| {
            let f: Vec<Vec<C>> = (0..4).map(|_| band_limited(g, 1, &mut rng)).collect();
            let refs: Vec<&[C]> = f.iter().map(|v| v.as_slice()).collect();
            let omega = rng.gen_range(-2.0..2.0);
            LowRankTerm {
                coeff: C::new(1.0, 0.0),
                time: time.times().iter().map(|&t| C::from_polar(1.0, -omega * t)).collect(),
                active: tensor(&refs),
                passive: vec![C::new(1.0, 0.0)],
            }
        })
        .collect();
    SpaceTimeDensity::low_rank(2, g, time, vec![0, 1, 2, 3], terms).unwrap()
}

#[test]
fn collapse_of_plane_waves_has_closed_form() {
    let g = grid(1, 8);
    let steps = 5;
    let time = TimeAxis::new(0.0, 0.25, steps).unwrap();
    let (a, b, c, e) = (1i64, 2i64, -1i64, 1i64);
    let conj = |m: i64| plane_wave(&g, &[-m]);
    let f = tensor(&[plane_wave(&g, &[a]).as_slice(), plane_wave(&g, &[b]).as_slice(), &conj(c), &conj(e)]);
    let data: Vec<C> = (0..steps).flat_map(|_| f.iter().copied()).collect();
    let gamma = SpaceTimeDensity::dense(2, &g, time, data).unwrap();
    let plus = collapsing_apply(&gamma, 1, CollapseTerm::Plus, &budget()).unwrap();
    let expect = tensor(&[plane_wave(&g, &[a + b - e]).as_slice(), &conj(c)]);
    let weight = ((a + b - e) as f64).abs() * (c as f64).abs();
    let field = plus.field.dense_data().unwrap();
    let worst = field
        .iter()
        .zip(expect.iter().cycle())
        .map(|(z, w)| (z - w * weight).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-12);
    assert!((plus.l1_l2 - weight * TAU * 1.0).abs() < 1e-12);
    let minus = collapsing_apply(&gamma, 1, CollapseTerm::Minus, &budget()).unwrap();
    let expect = tensor(&[plane_wave(&g, &[a]).as_slice(), &conj(c - b + e)]);
    let weight = (a as f64).abs() * ((c - b + e) as f64).abs();
    let worst = minus
        .field
        .dense_data()
        .unwrap()
        .iter()
        .zip(expect.iter().cycle())
        .map(|(z, w)| (z - w * weight).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-12);
}

#[test]
fn collapse_of_hermitian_kernel_is_skew() {
    let g = grid(1, 8);
    let raw = collapse_input(&g, 3, 19).to_dense(&budget()).unwrap();
    let herm = combine(&raw, &raw.adjoint().unwrap(), 1.0);
    assert!(difference(&herm, &herm.adjoint().unwrap()) < 1e-14);
    let plus = collapsing_apply(&herm, 1, CollapseTerm::Plus, &budget()).unwrap().field;
    let minus = collapsing_apply(&herm, 1, CollapseTerm::Minus, &budget()).unwrap().field;
    assert!(difference(&plus.adjoint().unwrap(), &minus) < 1e-12);
    let comm = collapsing_apply(&herm, 1, CollapseTerm::Commutator, &budget()).unwrap().field;
    assert!(difference(&comm, &combine(&plus, &minus, -1.0)) < 1e-12);
    let anti = combine(&comm, &comm.adjoint().unwrap(), 1.0);
    assert!(anti.l2_norm() < 1e-10 * comm.l2_norm());
}

#[test]
fn collapse_norm_is_stable_under_doubling() {
    let coarse = collapse_input(&grid(1, 8), 5, 20);
    let fine = collapse_input(&grid(1, 16), 5, 20);
    for term in [CollapseTerm::Plus, CollapseTerm::Commutator] {
        let a = collapsing_apply(&coarse, 1, term, &budget()).unwrap().l1_l2;
        let b = collapsing_apply(&fine, 1, term, &budget()).unwrap().l1_l2;
        assert!((a / b - 1.0).abs() < 0.05, "{term:?}: {a} vs {b}");
    }
}

#[test]
fn collapse_refuses_coarse_grids_and_bad_indices() {
    let g = grid(1, 6);
    let gamma = random_dense(2, &g, 2, 21);
    let err = collapsing_apply(&gamma, 1, CollapseTerm::Plus, &budget()).unwrap_err();
    assert!(err.to_string().contains("refused"));
    let gamma = random_dense(2, &grid(1, 8), 2, 22);
    assert!(collapsing_apply(&gamma, 2, CollapseTerm::Plus, &budget()).is_err());
    assert!(collapsing_apply(&random_dense(1, &grid(1, 8), 2, 23), 1, CollapseTerm::Plus, &budget()).is_err());
}

// Probes

#[test]
fn probe_names_round_trip() {
    for name in ProbeName::ALL {
        assert_eq!(ProbeName::parse(name.as_str()), Some(name));
    }
    assert_eq!(ProbeName::parse("str_4body"), None);
}

#[test]
fn zero_potential_gives_zero_ratio() {
    for name in ProbeName::ALL {
        let pts = if name == ProbeName::Str3Body { 8 } else { 4 };
        let r = probe_with_scale(name, 2, pts, 1, 0.0, &budget()).unwrap();
        assert_eq!(r.max_ratio, 0.0, "{}", name.as_str());
        assert!(r.sides.iter().all(|s| s.rhs == 0.0 || s.lhs == 0.0));
    }
}

#[test]
fn two_body_probe_matches_hand_calculation() {
    let g = grid(1, 8);
    let time = axis_time(16);
    let cutoff = Cutoff::new(PROBE_PLATEAU).unwrap();
    let (m1, m2, p1, p2) = (1i64, 0i64, 0i64, 1i64);
    let active = tensor(&[plane_wave(&g, &[m1]).as_slice(), plane_wave(&g, &[m2]).as_slice()]);
    let passive = tensor(&[plane_wave(&g, &[-p1]).as_slice(), plane_wave(&g, &[-p2]).as_slice()]);
    let profile: Vec<C> = time.times().iter().map(|&t| C::new(cutoff.value(t), 0.0)).collect();
    let term = LowRankTerm {
        coeff: C::new(1.0, 0.0),
        time: profile.clone(),
        active,
        passive,
    };
    let gamma = SpaceTimeDensity::low_rank(2, &g, time, vec![0, 1], vec![term]).unwrap();
    let v = PairTable::build(&g, |x| x[0].cos());
    let sides = str_2body(&gamma, &v, false, &budget()).unwrap();

    // cos(x1 − x2) splits the datum into two plane waves of amplitude 1/2.
    let len = time.len;
    let spectrum: Vec<f64> = (0..len)
        .map(|m| {
            profile
                .iter()
                .enumerate()
                .map(|(j, g)| g * C::from_polar(1.0, -TAU * (j * m) as f64 / len as f64))
                .sum::<C>()
                .norm_sqr()
        })
        .collect();
    let tau = |m: usize| {
        let s = if m < len / 2 { m as f64 } else { m as f64 - len as f64 };
        TAU * s / (len as f64 * time.dt)
    };
    let sq = |m: i64| (m * m) as f64;
    let passive_sigma = sq(p1) + sq(p2);
    let mut lhs2 = 0.0;
    for (a, b) in [(m1 + 1, m2 - 1), (m1 - 1, m2 + 1)] {
        let sigma = sq(a) + sq(b) - passive_sigma;
        let t: f64 = (0..len).map(|m| spectrum[m] / (1.0 + (tau(m) + sigma).powi(2)).sqrt()).sum();
        lhs2 += 0.25 * t * time.dt / len as f64;
    }
    let lhs = (lhs2 * TAU.powi(4)).sqrt();
    let h = g.cell_volume();
    let v_norm = ((0..8).map(|i| g.coord(i).cos().abs().powf(1.5)).sum::<f64>() * h).powf(1.0 / 1.5);
    let g_norm = (profile.iter().map(|z| z.norm_sqr()).sum::<f64>() * time.dt).sqrt();
    let rhs = v_norm * (1.0 + sq(m1)).sqrt() * g_norm * TAU * TAU;
    assert!((sides.lhs - lhs).abs() < 1e-10 * lhs, "{} vs {lhs}", sides.lhs);
    assert!((sides.rhs - rhs).abs() < 1e-10 * rhs, "{} vs {rhs}", sides.rhs);
}

#[test]
fn potential_norms_and_tables() {
    let g = grid(3, 8);
    let v = gaussian_table(&g, 1.0, PROBE_WIDTH_V);
    let l1 = lp_norm(&v, &g, 1.0);
    let exact = (TAU * PROBE_WIDTH_V * PROBE_WIDTH_V).powf(1.5);
    assert!((l1 / exact - 1.0).abs() < 0.01);
    assert!(lp_norm(&v, &g, 1.2) > lp_norm(&v, &g, 1.5));
}

#[test]
fn ensemble_members_are_deterministic_and_symmetric() {
    let g = grid(1, 8);
    let a = ensemble_member(&g, 2, 5, 3).unwrap();
    assert_eq!(a, ensemble_member(&g, 2, 5, 3).unwrap());
    assert_ne!(a, ensemble_member(&g, 2, 5, 4).unwrap());
    for (i, j) in [(0, 5), (3, 7), (6, 1)] {
        let x = a.eval(4, &[i, j, 2, 2]);
        let y = a.eval(4, &[j, i, 2, 2]);
        assert!((x - y).norm() < 1e-12);
    }
}

#[test]
fn probe_ratios_are_stable_under_doubling() {
    for (name, coarse, members) in [(ProbeName::Str3Body, 8, 6), (ProbeName::CollapseLpSum, 4, 4), (ProbeName::Str2BodyL65Shared, 4, 3)] {
        let r = probe_doubling::<f64>(name, members, coarse, 7, &budget()).unwrap();
        assert!(r.coarse.max_ratio.is_finite() && r.fine.max_ratio > 0.0);
        assert!(r.growth < 1.5, "{}: growth {}", name.as_str(), r.growth);
        assert!(r.coarse.median_ratio <= r.coarse.max_ratio);
    }
}

// Potential shapes

#[test]
fn envelope_ratio_is_flat_at_beta_one() {
    let base = RadialPotential::square_barrier(1.0, 1.0, 6.0).unwrap();
    let r = potential_shape_compare(&base, 1.0).unwrap();
    assert_eq!(r.rows.len(), 15);
    let first = r.rows[0].envelope_ratio;
    assert!(r.rows.iter().all(|row| (row.envelope_ratio / first - 1.0).abs() < 1e-6));
    assert!(r.fitted_exponent.abs() < 1e-6);
}

#[test]
fn envelope_ratio_decays_at_half_beta() {
    let base = RadialPotential::square_barrier(1.0, 1.0, 6.0).unwrap();
    let r = potential_shape_compare(&base, 0.5).unwrap();
    assert!((r.fitted_exponent + 0.5).abs() < 0.05, "{}", r.fitted_exponent);
    let consts: Vec<f64> = r.rows.iter().map(|row| row.gradient_constant).collect();
    assert!(consts.iter().all(|c| c.is_finite() && *c > 0.0));
    let spread = consts.iter().cloned().fold(0.0, f64::max) / consts.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 2.0, "gradient constants drift by {spread}");
    assert!(r.rows.iter().all(|row| row.potential_envelope.is_finite()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn projectors_commute_and_are_idempotent(seed in 0u64..1000, l1 in 0u32..4, l2 in 0u32..4) {
        let g = grid(1, 8);
        let a = random_dense(1, &g, 1, seed);
        let p = DyadicProjector::new(l1, LpMode::Annular, vec![0, 1]);
        let q = DyadicProjector::new(l2, LpMode::Leq, vec![1]);
        let pq = lp_project(&lp_project(&a, &q).unwrap().density, &p).unwrap().density;
        let qp = lp_project(&lp_project(&a, &p).unwrap().density, &q).unwrap().density;
        prop_assert!(difference(&pq, &qp) < 1e-13);
        let pp = lp_project(&lp_project(&a, &p).unwrap().density, &p).unwrap().density;
        prop_assert!(difference(&pp, &lp_project(&a, &p).unwrap().density) < 1e-13);
    }

    #[test]
    fn shears_preserve_l2_and_invert(seed in 0u64..1000, t in 0usize..2, inv in any::<bool>()) {
        let g = grid(1, 8);
        let a = random_dense(2, &g, 1, seed);
        let which = [Shear::T1, Shear::T2][t];
        let s = shear(&a, which, inv).unwrap();
        prop_assert!((s.l2_norm() - a.l2_norm()).abs() < 1e-13 * a.l2_norm());
        prop_assert_eq!(difference(&shear(&s, which, !inv).unwrap(), &a), 0.0);
    }

    #[test]
    fn xb_zero_equals_l2(seed in 0u64..1000, steps in 1usize..6) {
        let a = random_dense(1, &grid(1, 8), steps, seed);
        let l2 = a.l2_norm();
        prop_assert!((xb_norm(&a, 0.0, &budget()).unwrap() - l2).abs() < 1e-12 * l2);
    }

    #[test]
    fn xb_scales_linearly(seed in 0u64..1000, c in 0.1f64..10.0) {
        let a = random_dense(1, &grid(1, 8), 4, seed);
        let scaled = a.scale_time(|_| c);
        let x = xb_norm(&a, 0.5, &budget()).unwrap();
        prop_assert!((xb_norm(&scaled, 0.5, &budget()).unwrap() - c * x).abs() < 1e-12 * c * x);
    }
}

#[test]
fn norms_do_not_depend_on_thread_count() {
    let g = grid(1, 16);
    let dense = random_dense(1, &g, 8, 21);
    let lr = random_low_rank(2, &g, vec![0, 1], 22);
    let eval = || {
        [
            xb_norm(&dense, -0.5, &budget()).unwrap(),
            xb_norm(&lr, 0.5, &budget()).unwrap(),
            gphl_core::NLSField::new(&g, band_limited(&g, 3, &mut ChaCha8Rng::seed_from_u64(23)), 1.0)
                .unwrap()
                .energy(),
        ]
    };
    let reference = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(eval);
    for threads in [2, 3, 5] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        for _ in 0..3 {
            let got = pool.install(eval);
            assert_eq!(got.map(f64::to_bits), reference.map(f64::to_bits), "{threads} threads");
        }
    }
}
