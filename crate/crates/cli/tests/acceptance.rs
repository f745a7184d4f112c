//! Acceptance suite: thirteen criteria at their pinned tolerances and runtime limits.
//! Prints one PASS/FAIL line per criterion; the process fails if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use gphl_cli::experiments::{self, canonical_consistent, nonincreasing_within, packet, CHAOS_BAND};
use gphl_cli::ExperimentConfig;
use gphl_core::boardgame::{
    class_count, dyadic_min_sum_scan, enumerate_maps, expand_l, iterates3_check, iterates4_find_t, iterates4_holds,
    MinSumForm,
};
use gphl_core::estimates::{lp_project, max_grid_frequency, xb_norm, DyadicProjector, LpMode};
use gphl_core::grid::MemoryBudget;
use gphl_core::manybody::{
    apply_b_collapse, b_decomposition_residual, bbgky_residual, init_product_state, marginal, sample_kernel_configs,
    wave_operator_identity_residual, BVariant, ConfigSampler, Propagator, SmoothClosure,
};
use gphl_core::scattering::{born_limit_scan, scattering_length, solve_screened, DEFAULT_TOL};
use gphl_core::{
    GridInteraction, LatticeGrid, RadialPotential, ScaledPotential, SpaceTimeDensity, TimeAxis, WaveFunction,
};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Check = Result<String, String>;

fn budget() -> MemoryBudget {
    MemoryBudget::default()
}

fn barrier() -> RadialPotential {
    RadialPotential::square_barrier(2.0, 1.0, 6.0).unwrap()
}

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn core<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn run_default(json: &str) -> Result<experiments::Outcome, String> {
    let cfg = core(ExperimentConfig::from_json(json))?;
    core(experiments::run(&cfg, &budget()))
}

// ---------------------------------------------------------------- criteria

fn c1_scattering_closed_form() -> Check {
    let v = RadialPotential::square_barrier(2.0, 1.0, 6.0).map_err(|e| e.to_string())?;
    let a0 = core(scattering_length(&v))?;
    let w0 = core(solve_screened(&v, 1.0, DEFAULT_TOL))?.w0[0];
    let a_ref = 1.0 - 1f64.tanh();
    let w_ref = 1.0 - 1.0 / 1f64.cosh();
    let (ea, ew) = ((a0 - a_ref).abs() / a_ref, (w0 - w_ref).abs() / w_ref);
    ensure(ea < 1e-6 && ew < 1e-6, format!("a0 rel err {ea:e}, w0(0) rel err {ew:e}"))?;
    Ok(format!("a0 rel err {ea:.1e}, w0(0) rel err {ew:.1e}"))
}

fn c2_coupling_dichotomy() -> Check {
    let v = barrier();
    let target = 8.0 * PI / 3.0;
    let n = [100u64, 10_000, 1_000_000];
    let half = core(born_limit_scan(&v, 0.5, &n))?;
    let gaps: Vec<f64> = half.iter().map(|e| (e.value - target).abs() / target).collect();
    ensure(gaps.windows(2).all(|w| w[1] < w[0]), format!("beta=0.5 gaps not decreasing: {gaps:?}"))?;
    let one = core(born_limit_scan(&v, 1.0, &n))?;
    let reference = 8.0 * PI * (1.0 - 1f64.tanh());
    let worst = one.iter().map(|e| (e.value - reference).abs()).fold(0.0, f64::max);
    ensure(worst < 1e-10, format!("beta=1 deviation {worst:e}"))?;
    Ok(format!("beta=0.5 gaps {:.2e} > {:.2e} > {:.2e}; beta=1 deviation {worst:.1e}", gaps[0], gaps[1], gaps[2]))
}

fn c3_wave_operator_identity() -> Check {
    let mut worst: f64 = 0.0;
    for (n, beta) in [(100u64, 0.5), (1000, 0.7), (50, 1.0)] {
        let sp = core(ScaledPotential::new(barrier(), n, beta))?;
        let edge = 1.0 / sp.lambda();
        let margin = 2.0 * edge / 64.0;
        let sampler = ConfigSampler {
            radius: 1.5 * edge,
            edge_margin: margin,
            seed: 41,
        };
        let (cfgs, _) = core(sampler.sample(&sp.profile, 3, 100))?;
        let rep = core(wave_operator_identity_residual(&sp, &cfgs, margin))?;
        ensure(rep.evaluated == 100, format!("only {} configurations evaluated", rep.evaluated))?;
        worst = worst.max(rep.max_residual);
    }
    ensure(worst < 1e-10, format!("max relative residual {worst:e}"))?;
    Ok(format!("max relative residual {worst:.1e} over 3 x 100 configurations"))
}

fn c4_b_conjugation() -> Check {
    let sp = core(ScaledPotential::new(barrier(), 100, 0.5))?;
    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        let cfgs = sample_kernel_configs(&sp, k, 10, 31 + k as u64);
        let alpha = SmoothClosure::new(2 * k + 2, 3, 2.0, 37);
        for l in 1..=k {
            worst = worst.max(core(b_decomposition_residual(&sp, k, l, &cfgs, &alpha, 12))?);
        }
    }
    ensure(worst < 1e-10, format!("decomposition residual {worst:e}"))?;
    let g = core(LatticeGrid::new(1, 8, 4.0))?;
    let sur = core(ScaledPotential::surrogate(barrier(), 4, 0.5, 1))?;
    let inter = GridInteraction::from_parts(&g, sur.n, |r| sur.v_n(r), &sur.profile);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let chi: Vec<C> = (0..8).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let (psi, _) = core(init_product_state(&chi, &g, 3, &budget()))?;
    let g3 = core(marginal(&psi, 3, &budget()))?;
    for l in 1..=2 {
        let many = core(apply_b_collapse(&g3, l, &inter, BVariant::Many, &budget()))?;
        ensure(many.data.iter().all(|z| z.norm() == 0.0), format!("B_many nonzero for w = 0, l = {l}"))?;
    }
    Ok(format!("decomposition residual {worst:.1e}; B_many identically 0 when w = 0"))
}

fn c5_bbgky_second_order() -> Check {
    let g = core(LatticeGrid::new(1, 16, 6.0))?;
    let phi = packet(&g, 0.8, 0.3, 1.0);
    let sp = core(ScaledPotential::surrogate(barrier(), 3, 0.5, 1))?;
    let (psi, _) = core(init_product_state(&phi, &g, 3, &budget()))?;
    let snaps = |dt: f64| -> Result<Vec<WaveFunction>, String> {
        let p = core(Propagator::new(&g, 3, &sp, dt, &budget()))?;
        let mut cur = psi.clone();
        p.advance(&mut cur, (0.05 / dt).round() as usize - 1);
        let mut out = vec![cur.clone()];
        for _ in 0..2 {
            p.advance(&mut cur, 1);
            out.push(cur.clone());
        }
        Ok(out)
    };
    let (a, b) = (snaps(4e-3)?, snaps(2e-3)?);
    let mut ratios = Vec::new();
    for k in 1..=2 {
        let r1 = core(bbgky_residual(&a, k, &sp, &budget()))?.residual;
        let r2 = core(bbgky_residual(&b, k, &sp, &budget()))?.residual;
        ratios.push(r1 / r2);
    }
    ensure(ratios.iter().all(|r| (3.5..=4.5).contains(r)), format!("ratios {ratios:?}"))?;
    Ok(format!("halving ratios k=1: {:.3}, k=2: {:.3}", ratios[0], ratios[1]))
}

fn c6_chaos_trend() -> Check {
    let out = run_default(r#"{"schema_version": 1, "experiment": "chaos"}"#)?;
    let finals: Vec<f64> = out.summary["final_distance"]
        .as_array()
        .ok_or("missing final distances")?
        .iter()
        .map(|r| r["hs_distance"].as_f64().unwrap_or(f64::NAN))
        .collect();
    ensure(
        finals.len() == 4 && nonincreasing_within(&finals, CHAOS_BAND),
        format!("HS distances at t=0.5 for N=2..5: {finals:?}"),
    )?;
    let s: Vec<String> = finals.iter().map(|d| format!("{d:.4}")).collect();
    Ok(format!("HS distance at t=0.5, N=2..5: {}", s.join(", ")))
}

fn c7_board_game() -> Check {
    let fact = |q: usize| (1..=q).product::<usize>();
    for k in 1..=3 {
        for q in 1..=7 {
            let n = core(enumerate_maps(k, q))?.len();
            ensure(n == fact(q), format!("k={k} q={q}: {n} maps, q! = {}", fact(q)))?;
        }
        for q in 1..=6 {
            let c = core(class_count(k, q))?;
            ensure(c <= 4usize.pow(q as u32), format!("k={k} q={q}: {c} classes"))?;
        }
        for q in 1..=5 {
            ensure(core(canonical_consistent(k, q))?, format!("canonical forms inconsistent at k={k} q={q}"))?;
        }
    }
    Ok(format!("q! maps (q<=7), classes <= 4^q (q<=6, k=1 q=6: {}), canonical forms consistent (q<=5)", core(class_count(1, 6))?))
}

fn c8_l_expansion() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for k in 1..=5 {
        for l in 1..=k {
            let mons = expand_l(k, l);
            let expected = (1usize << (2 * k - 1)) - 1;
            ensure(mons.len() == expected, format!("k={k} l={l}: {} monomials", mons.len()))?;
            for _ in 0..20 {
                let wu: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
                let wp: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
                let sum: f64 = mons.iter().map(|m| m.eval(&wu, &wp)).sum();
                let mut prod = 1.0 - wp[l - 1];
                for j in (1..=k).filter(|&j| j != l) {
                    prod *= (1.0 - wu[j - 1]) * (1.0 - wp[j - 1]);
                }
                worst = worst.max((sum + 1.0 - prod).abs());
            }
        }
    }
    ensure(worst < 1e-12, format!("product identity error {worst:e}"))?;
    Ok(format!("counts 2^(2k-1)-1 for k<=5; product identity error {worst:.1e}"))
}

fn c9_counting_lemmas() -> Check {
    let mut checked = 0;
    for j in 1..=8 {
        for m_low in [1u64, 2, 4, 8] {
            for e in 0..=12 {
                let (lhs, rhs) = core(iterates3_check(j, m_low, m_low << e))?;
                ensure(lhs as f64 <= rhs * (1.0 + 1e-12), format!("iterates3 j={j} M_low={m_low} ratio 2^{e}"))?;
                checked += 1;
            }
        }
    }
    let mut ts = Vec::new();
    for (alpha, eps) in [(1.0, 0.5), (1.0, 0.1), (2.0, 1.0)] {
        let t = core(iterates4_find_t(alpha, eps, 8, 1 << 20))?;
        let dense = (1..=8).all(|j| (0..=4000).all(|s| iterates4_holds(t, alpha, eps, j, (s as f64 / 200.0).exp2())));
        ensure(dense, format!("iterates4 t={t} fails on the dense grid (alpha={alpha}, eps={eps})"))?;
        ts.push(t);
    }
    Ok(format!("iterates3: {checked} cases; iterates4 t = {:.4}, {:.4}, {:.4} re-verified", ts[0], ts[1], ts[2]))
}

fn c10_dyadic_sums() -> Check {
    let eps = 0.1;
    let n: Vec<u32> = (10..=24).collect();
    let mut parts = Vec::new();
    for beta in [0.3, 0.5, 0.9] {
        let kip = core(dyadic_min_sum_scan(&n, 1, MinSumForm::kip(beta, eps)))?.fitted_exponent;
        let pp = core(dyadic_min_sum_scan(&n, 1, MinSumForm::pp(beta, eps)))?.fitted_exponent;
        ensure(kip <= 2.0 * eps + 0.02, format!("beta={beta}: KIP exponent {kip}"))?;
        ensure(pp <= 2.0 * beta + 2.0 * eps + 0.02, format!("beta={beta}: PP exponent {pp}"))?;
        parts.push(format!("beta={beta}: {kip:.3}/{pp:.3}"));
    }
    Ok(format!("KIP/PP exponents {}", parts.join(", ")))
}

fn c11_nls() -> Check {
    let out = run_default(r#"{"schema_version": 1, "experiment": "nls-norms"}"#)?;
    let s = &out.summary;
    let get = |k: &str| s[k].as_f64().unwrap_or(f64::NAN);
    let (m, e, p) = (
        get("max_mass_drift"),
        get("max_relative_energy_drift"),
        get("plane_wave_phase_error_per_time"),
    );
    ensure(m < 1e-10, format!("mass drift {m:e}"))?;
    ensure(e < 1e-8, format!("energy drift {e:e}"))?;
    ensure(p < 1e-8, format!("phase error {p:e}"))?;
    ensure(s["functionals_finite"] == Value::Bool(true), "esy/km not finite".into())?;
    Ok(format!("mass drift {m:.1e}, energy drift {e:.1e}, phase error/time {p:.1e} over 10^4 steps"))
}

fn c12_probes() -> Check {
    let g = core(LatticeGrid::with_any_even(1, 16, TAU))?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let time = core(TimeAxis::new(0.0, 0.1, 3))?;
    let data: Vec<C> = (0..3 * g.sites(2)).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let a = core(SpaceTimeDensity::dense(1, &g, time, data))?;
    let top = max_grid_frequency(&g).log2().ceil() as u32;
    let mut algebra: f64 = 0.0;
    for level in 0..=top {
        let p = DyadicProjector::new(level, LpMode::Leq, vec![0, 1]);
        let once = core(lp_project(&a, &p))?.density;
        let twice = core(lp_project(&once, &p))?.density;
        algebra = algebra.max(core(once.max_difference(&twice))?);
    }
    let mut sum: Option<SpaceTimeDensity> = None;
    for level in 0..=top {
        let piece = core(lp_project(&a, &DyadicProjector::new(level, LpMode::Annular, vec![0, 1])))?.density;
        sum = Some(match sum {
            None => piece,
            Some(s) => {
                let (x, y) = (s.dense_data().ok_or("dense")?, piece.dense_data().ok_or("dense")?);
                let data = x.iter().zip(y).map(|(p, q)| p + q).collect();
                core(SpaceTimeDensity::dense(1, &g, time, data))?
            }
        });
    }
    algebra = algebra.max(core(sum.expect("at least one level").max_difference(&a))?);
    ensure(algebra < 1e-12, format!("projector algebra defect {algebra:e}"))?;
    let l2 = a.l2_norm();
    let xb0 = (core(xb_norm(&a, 0.0, &budget()))? - l2).abs() / l2;
    ensure(xb0 < 1e-12, format!("xb_norm(., 0) vs L2: {xb0:e}"))?;

    let out = run_default(r#"{"schema_version": 1, "experiment": "probes"}"#)?;
    let growth = out.summary["max_growth"].as_f64().unwrap_or(f64::NAN);
    ensure(out.summary["all_finite"] == Value::Bool(true), "non-finite probe ratio".into())?;
    ensure(growth < 1.5, format!("growth {growth}"))?;
    let per: Vec<String> = out.summary["growth"]
        .as_array()
        .map(|a| a.iter().map(|g| format!("{} {:.3}", g["probe"].as_str().unwrap_or("?"), g["growth"].as_f64().unwrap_or(f64::NAN))).collect())
        .unwrap_or_default();
    Ok(format!("projector defect {algebra:.1e}, X_0 vs L2 {xb0:.1e}; growth: {}", per.join(", ")))
}

/// Small configurations of every experiment; determinism does not depend on size.
const DETERMINISM_CONFIGS: [(&str, &str); 9] = [
    ("scattering-scan", r#"{}"#),
    ("born-limit", r#"{}"#),
    ("chaos", r#"{"n_list": [2, 3], "t_final": 0.1, "report_every": 10, "checkpoints": true}"#),
    ("bbgky-residual", r#"{}"#),
    ("identity-check", r#"{"configs": 20}"#),
    ("boardgame", r#"{"q_max_maps": 6, "q_max_classes": 5, "q_max_orbits": 4}"#),
    ("dyadic", r#"{}"#),
    ("probes", r#"{"ensemble": 2, "coarse_points": 4}"#),
    ("nls-norms", r#"{"steps": 1000, "ensemble": 3}"#),
];

fn strip_wall_time(json: &str) -> String {
    json.lines().filter(|l| !l.contains("\"wall_time_seconds\"")).collect::<Vec<_>>().join("\n")
}

fn c13_determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_gphl");
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for (name, params) in DETERMINISM_CONFIGS {
        let cfg = root.path().join(format!("{name}.json"));
        let text = format!(r#"{{"schema_version": 1, "experiment": "{name}", "seed": 5, "workers": 2, "params": {params}}}"#);
        std::fs::write(&cfg, text).map_err(|e| e.to_string())?;
        let dirs = [root.path().join(format!("{name}-a")), root.path().join(format!("{name}-b"))];
        for d in &dirs {
            let st = Command::new(bin).arg("run").arg(&cfg).arg("--out-dir").arg(d).output().map_err(|e| e.to_string())?;
            ensure(st.status.success(), format!("{name}: exit {:?}: {}", st.status.code(), String::from_utf8_lossy(&st.stderr)))?;
        }
        let read = |d: &Path| -> Result<Vec<(String, Vec<u8>)>, String> {
            let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(d)
                .map_err(|e| e.to_string())?
                .map(|e| {
                    let p = e.unwrap().path();
                    let bytes = std::fs::read(&p).unwrap();
                    (p.file_name().unwrap().to_string_lossy().into_owned(), bytes)
                })
                .collect();
            out.sort();
            Ok(out)
        };
        let (a, b) = (read(&dirs[0])?, read(&dirs[1])?);
        ensure(a.len() == b.len() && a.len() >= 2, format!("{name}: output sets differ"))?;
        for ((fa, ba), (fb, bb)) in a.iter().zip(&b) {
            ensure(fa == fb, format!("{name}: {fa} vs {fb}"))?;
            let same = if fa.ends_with(".json") {
                strip_wall_time(&String::from_utf8_lossy(ba)) == strip_wall_time(&String::from_utf8_lossy(bb))
            } else {
                ba == bb
            };
            ensure(same, format!("{name}: {fa} differs between reruns"))?;
            files += 1;
        }
    }
    Ok(format!("9 experiments rerun: {files} files identical (JSON compared without wall time)"))
}

// ---------------------------------------------------------------- driver

type Criterion = (&'static str, Option<Duration>, fn() -> Check);

fn main() {
    let criteria: [Criterion; 13] = [
        ("1 scattering closed form", Some(Duration::from_secs(1)), c1_scattering_closed_form),
        ("2 coupling dichotomy", Some(Duration::from_secs(10)), c2_coupling_dichotomy),
        ("3 wave-operator identity", Some(Duration::from_secs(5)), c3_wave_operator_identity),
        ("4 B conjugation identity", Some(Duration::from_secs(10)), c4_b_conjugation),
        ("5 BBGKY residual order", Some(Duration::from_secs(120)), c5_bbgky_second_order),
        ("6 propagation of chaos trend", Some(Duration::from_secs(900)), c6_chaos_trend),
        ("7 board game counts", Some(Duration::from_secs(60)), c7_board_game),
        ("8 L-expansion", Some(Duration::from_secs(10)), c8_l_expansion),
        ("9 counting lemmas", Some(Duration::from_secs(60)), c9_counting_lemmas),
        ("10 dyadic min-sums", Some(Duration::from_secs(30)), c10_dyadic_sums),
        ("11 NLS conservation", Some(Duration::from_secs(120)), c11_nls),
        ("12 estimate probes", Some(Duration::from_secs(600)), c12_probes),
        ("13 determinism", None, c13_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, limit, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let result = match (result, limit) {
            (Ok(_), Some(l)) if took > l => Err(format!("runtime {:.1}s exceeds {}s", took.as_secs_f64(), l.as_secs())),
            (r, _) => r,
        };
        match result {
            Ok(msg) => println!("PASS  {name:<30} [{:>7.2}s]  {msg}", took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name:<30} [{:>7.2}s]  {msg}", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
