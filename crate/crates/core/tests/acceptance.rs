//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.
//!
//! Runs as a plain binary (`harness = false`) so every line is printed even when
//! the criterion passes. `cargo test --test acceptance -- 3 9` runs a subset.

use irs_noma::ao::{self, AoConfig, Status};
use irs_noma::baselines::BaselineKind;
use irs_noma::channel::{generate_realization, ChannelRealization, FadingParams, Geometry, Point};
use irs_noma::harness::{gain_percent, run_sweep, ScenarioConfig, SicConfig, Sweep, SweepResult};
use irs_noma::phase::PenaltyConfig;
use irs_noma::rates::{optimal_alpha, optimal_power_coeff, EffectiveGains, LinkBudget};
use irs_noma::{CVector, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

type Criterion = fn() -> Outcome;

const CRITERIA: [(u32, &str, Criterion); 11] = [
    (1, "weak-user constraint tightness", tightness),
    (2, "power split optimality", alpha_optimality),
    (3, "alternating-optimization ascent", ao_ascent),
    (4, "rank-one penalty", rank_one),
    (5, "small-instance global oracle", small_instance_oracle),
    (6, "NOMA over OMA gains", noma_over_oma),
    (7, "monotone in element count", monotone_in_elements),
    (8, "distance degradation", distance_degradation),
    (9, "CSI sensitivity", csi_sensitivity),
    (10, "imperfect SIC ordering", imperfect_sic),
    (11, "determinism", determinism),
];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (id, name, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {id:>2} ({name}): {} [{:.1} s]",
            out.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!out.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}

// Independent evaluation of the model, used as the oracle side below.

fn cascaded_power(ch: &ChannelRealization, user: usize, v: &CVector) -> f64 {
    (0..ch.num_elements())
        .map(|m| ch.h[m] * v[m] * ch.f[user][m])
        .sum::<C64>()
        .norm_sqr()
}

fn log2_1p(x: f64) -> f64 {
    (1.0 + x).log2()
}

/// Best strong-user rate at fixed phases by direct formula, or `None` when infeasible.
fn strong_rate_by_formula(powers: [f64; 2], b: &LinkBudget) -> Option<f64> {
    let (p, s2, g, l) = (
        b.tx_power,
        b.noise_power,
        b.qos_threshold,
        f64::from(b.spreading_gain),
    );
    let alpha = powers
        .iter()
        .map(|&gk| 1.0 - g * s2 / (l * p * gk))
        .fold(1.0, f64::min);
    let (gs, gw) = if powers[0] >= powers[1] {
        (powers[0], powers[1])
    } else {
        (powers[1], powers[0])
    };
    let a_s = (1.0 - g * s2 / (alpha * p * gw)) / (1.0 + g);
    (alpha > 0.0 && a_s > 0.0).then(|| log2_1p(alpha * p * a_s * gs / s2))
}

fn random_phase_vector(m: usize, rng: &mut impl Rng) -> CVector {
    CVector::from_fn(m, |_, _| {
        C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))
    })
}

fn draw(m: usize, rng: &mut impl Rng) -> ChannelRealization {
    let g = Geometry {
        num_elements: m,
        ..Geometry::default()
    };
    generate_realization(&g, &FadingParams::default(), rng).expect("valid default geometry")
}

fn tightness() -> Outcome {
    let b = LinkBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut checked, mut worst) = (0, 0.0f64);
    while checked < 500 {
        let ch = draw(8, &mut rng);
        let v = random_phase_vector(8, &mut rng);
        let gains = EffectiveGains::compute(&ch, &v);
        let Ok(alpha) = optimal_alpha(&gains, &b) else {
            continue;
        };
        let powers = [cascaded_power(&ch, 0, &v), cascaded_power(&ch, 1, &v)];
        let gw = powers[0].min(powers[1]);
        let Ok(a_s) = optimal_power_coeff(alpha, gw, &b) else {
            continue;
        };
        let sinr =
            alpha * b.tx_power * (1.0 - a_s) * gw / (alpha * b.tx_power * a_s * gw + b.noise_power);
        worst = worst.max((sinr - b.qos_threshold).abs() / b.qos_threshold);
        checked += 1;
    }
    Outcome::new(
        worst <= 1e-9,
        format!("max relative error {worst:.2e} over {checked} realizations (limit 1e-9)"),
    )
}

fn alpha_optimality() -> Outcome {
    let b = LinkBudget::default();
    let (p, s2, g, l) = (
        b.tx_power,
        b.noise_power,
        b.qos_threshold,
        f64::from(b.spreading_gain),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut exceed, mut checked, mut not_feasible) = (0, 0, 0);
    while checked < 200 {
        let ch = draw(30, &mut rng);
        let v = random_phase_vector(30, &mut rng);
        let powers = [cascaded_power(&ch, 0, &v), cascaded_power(&ch, 1, &v)];
        let Ok(alpha) = optimal_alpha(&EffectiveGains::compute(&ch, &v), &b) else {
            continue;
        };
        let feasible = |a: f64| powers.iter().all(|&gk| l * (1.0 - a) * p * gk / s2 >= g);
        let grid_best = (1..=10_000)
            .map(|k| k as f64 * 1e-4)
            .filter(|&a| feasible(a))
            .fold(0.0, f64::max);
        if grid_best > alpha {
            exceed += 1;
        }
        if !feasible(alpha * (1.0 - 1e-12)) {
            not_feasible += 1;
        }
        checked += 1;
    }
    Outcome::new(
        exceed == 0 && not_feasible == 0,
        format!("{exceed} of {checked} grids beat the closed form; {not_feasible} closed-form values infeasible"),
    )
}

fn full_solves(m: usize, count: usize, seed: u64) -> Vec<ao::Solution> {
    let b = LinkBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 10 * count {
        attempts += 1;
        let ch = draw(m, &mut rng);
        let cfg = AoConfig {
            seed: rng.random(),
            ..AoConfig::default()
        };
        if let Ok(sol) = ao::solve(&ch, &b, &cfg) {
            if sol.status == Status::Feasible {
                out.push(sol);
            }
        }
    }
    out
}

fn ao_ascent() -> Outcome {
    let b = LinkBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut feasible, mut monotone, mut converged, mut errors) = (0, 0, 0, 0);
    for _ in 0..100 {
        let ch = draw(16, &mut rng);
        let cfg = AoConfig {
            seed: rng.random(),
            ..AoConfig::default()
        };
        assert_eq!((cfg.epsilon, cfg.max_outer_iters), (1e-4, 30));
        let sol = match ao::solve(&ch, &b, &cfg) {
            Ok(s) => s,
            Err(_) => {
                errors += 1;
                continue;
            }
        };
        if !sol.is_feasible() {
            continue;
        }
        feasible += 1;
        if sol.trace.windows(2).all(|w| w[1] >= w[0] - 1e-6) {
            monotone += 1;
        }
        if sol.converged && sol.iterations <= 30 {
            converged += 1;
        }
    }
    let rate = converged as f64 / feasible.max(1) as f64;
    Outcome::new(
        feasible > 0 && monotone == feasible && rate >= 0.95,
        format!(
            "{monotone}/{feasible} traces nondecreasing, {converged}/{feasible} converged within 30 ({:.1}%, need 95%); {errors} solver errors",
            100.0 * rate
        ),
    )
}

fn rank_one() -> Outcome {
    let mu = PenaltyConfig::default().mu;
    let sizes = [4, 8, 12, 16];
    let sols: Vec<_> = sizes
        .iter()
        .enumerate()
        .flat_map(|(i, &m)| full_solves(m, 25, 404 + i as u64))
        .collect();
    let with_residual: Vec<f64> = sols
        .iter()
        .filter_map(|s| s.rank_residuals.last().copied())
        .collect();
    let good = with_residual.iter().filter(|&&r| r <= 1e-4).count();
    let worst = with_residual.iter().copied().fold(0.0, f64::max);
    let share = good as f64 / with_residual.len().max(1) as f64;
    Outcome::new(
        mu == 5e-5 && with_residual.len() >= 100 && share >= 0.95,
        format!(
            "mu {mu:e}; {good}/{} instances (M in {sizes:?}) at residual <= 1e-4 ({:.1}%, need 95%); worst {worst:.2e}",
            with_residual.len(),
            100.0 * share
        ),
    )
}

/// Exhaustive search over `levels` phases per element with closed-form power allocation.
fn exhaustive_best(ch: &ChannelRealization, b: &LinkBudget, levels: usize) -> Option<f64> {
    let m = ch.num_elements();
    let total = levels.pow(m as u32);
    let unit: Vec<C64> = (0..levels)
        .map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / levels as f64))
        .collect();
    let mut best: Option<f64> = None;
    for code in 0..total {
        let mut c = code;
        let v = CVector::from_fn(m, |_, _| {
            let z = unit[c % levels];
            c /= levels;
            z
        });
        let powers = [cascaded_power(ch, 0, &v), cascaded_power(ch, 1, &v)];
        if let Some(r) = strong_rate_by_formula(powers, b) {
            best = Some(best.map_or(r, |x: f64| x.max(r)));
        }
    }
    best
}

fn small_instance_oracle() -> Outcome {
    let b = LinkBudget::default();
    let mut lines = Vec::new();
    let mut pass = true;
    for m in [2usize, 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + m as u64);
        let (mut instances, mut hits, mut worst) = (0, 0, f64::INFINITY);
        while instances < 100 {
            let ch = draw(m, &mut rng);
            let cfg = AoConfig {
                seed: rng.random(),
                ..AoConfig::default()
            };
            let Some(best) = exhaustive_best(&ch, &b, 32) else {
                continue;
            };
            instances += 1;
            let got = match ao::solve(&ch, &b, &cfg) {
                Ok(s) if s.is_feasible() => s.rate_strong,
                _ => 0.0,
            };
            worst = worst.min(got / best);
            if got >= 0.95 * best {
                hits += 1;
            }
        }
        pass &= hits >= 90;
        lines.push(format!(
            "M={m}: {hits}/{instances} within 95% (worst ratio {worst:.3})"
        ));
    }
    Outcome::new(pass, format!("{}; need 90%", lines.join(", ")))
}

fn scenario(schemes: &[BaselineKind], sweep: Sweep) -> ScenarioConfig {
    ScenarioConfig {
        schemes: schemes.to_vec(),
        sweep,
        trials: 200,
        ..ScenarioConfig::default()
    }
}

fn mean(result: &SweepResult, scheme: BaselineKind, value: f64) -> f64 {
    result
        .row(scheme, value)
        .expect("row for every scheme and value")
        .mean_sum_rate_bps_hz
}

fn noma_over_oma() -> Outcome {
    let defaults = ScenarioConfig::default();
    let Sweep::SnrDb { values } = &defaults.sweep else {
        unreachable!("default sweep is over SNR")
    };
    let at = values[values.len() / 2];
    let cfg = scenario(&BaselineKind::ALL, Sweep::SnrDb { values: vec![at] });
    assert_eq!(cfg.geometry.num_elements, 30);
    let result = run_sweep(&cfg).expect("sweep runs");
    let full = mean(&result, BaselineKind::FullAlgorithm, at);
    let over_aligned = gain_percent(full, mean(&result, BaselineKind::OmaAligned, at));
    let over_random = gain_percent(full, mean(&result, BaselineKind::OmaRandomPhase, at));
    Outcome::new(
        over_aligned >= 25.0 && over_random >= 45.0,
        format!("at {at} dB: +{over_aligned:.1}% over OMA aligned (need 25%), +{over_random:.1}% over OMA random (need 45%)"),
    )
}

fn monotone_in_elements() -> Outcome {
    let cfg = scenario(
        &BaselineKind::ALL,
        Sweep::Elements {
            values: vec![20, 40],
        },
    );
    let result = run_sweep(&cfg).expect("sweep runs");
    let mut pass = true;
    let parts: Vec<String> = BaselineKind::ALL
        .iter()
        .map(|&k| {
            let (lo, hi) = (mean(&result, k, 20.0), mean(&result, k, 40.0));
            pass &= hi > lo;
            format!("{k} {lo:.3}->{hi:.3}")
        })
        .collect();
    Outcome::new(pass, parts.join(", "))
}

fn distance_degradation() -> Outcome {
    let xs = [0.0, 4.0, 8.0];
    let cfg = scenario(
        &[BaselineKind::FullAlgorithm, BaselineKind::RandomPhase],
        Sweep::ApXM {
            values: xs.to_vec(),
        },
    );
    assert_eq!(cfg.geometry.to_geometry().ap_position, Point::new(0.0, 0.0));
    let result = run_sweep(&cfg).expect("sweep runs");
    let full: Vec<f64> = xs
        .iter()
        .map(|&x| mean(&result, BaselineKind::FullAlgorithm, x))
        .collect();
    let random: Vec<f64> = xs
        .iter()
        .map(|&x| mean(&result, BaselineKind::RandomPhase, x))
        .collect();
    let decreasing = full.windows(2).all(|w| w[1] < w[0]);
    let dominates = full.iter().zip(&random).all(|(f, r)| f >= r);
    Outcome::new(
        decreasing && dominates,
        format!("optimized {full:.3?}, random {random:.3?} at x = {xs:?} m"),
    )
}

fn csi_sensitivity() -> Outcome {
    let cfg = scenario(
        &[BaselineKind::FullAlgorithm],
        Sweep::CsiEta {
            values: vec![0.0, 0.5],
        },
    );
    let result = run_sweep(&cfg).expect("sweep runs");
    let (ideal, noisy) = (
        mean(&result, BaselineKind::FullAlgorithm, 0.0),
        mean(&result, BaselineKind::FullAlgorithm, 0.5),
    );
    let loss = 100.0 * (1.0 - noisy / ideal);
    Outcome::new(
        (3.0..=15.0).contains(&loss),
        format!("{ideal:.3} -> {noisy:.3} bps/Hz, loss {loss:.2}% (need 3% to 15%)"),
    )
}

fn imperfect_sic() -> Outcome {
    let (tight, loose) = (-95.0, -85.0);
    let full = [BaselineKind::FullAlgorithm];
    let capped = scenario(
        &full,
        Sweep::SicGammaDbm {
            values: vec![tight, loose],
            beta: 0.1,
        },
    );
    let capped = run_sweep(&capped).expect("sweep runs");
    let perfect = ScenarioConfig {
        sic: None::<SicConfig>,
        ..scenario(
            &full,
            Sweep::SnrDb {
                values: vec![120.0],
            },
        )
    };
    let perfect = run_sweep(&perfect).expect("sweep runs");
    let (rt, rl, rp) = (
        mean(&capped, full[0], tight),
        mean(&capped, full[0], loose),
        mean(&perfect, full[0], 120.0),
    );
    Outcome::new(
        rt <= rl && rl <= rp,
        format!("cap {tight} dBm {rt:.4}, cap {loose} dBm {rl:.4}, perfect SIC {rp:.4} bps/Hz (beta 0.1)"),
    )
}

fn determinism() -> Outcome {
    let run = |workers: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_irs-noma"));
        cmd.args(["--quiet", "solve", "--seed", "7"]);
        if let Some(w) = workers {
            cmd.args(["--workers", w]);
        }
        let out = cmd.output().expect("binary runs");
        assert!(out.status.success(), "solve exited with {}", out.status);
        out.stdout
    };
    let first = run(None);
    let second = run(None);
    let one = run(Some("1"));
    let eight = run(Some("8"));
    let pass = !first.is_empty() && first == second && one == eight && first == one;
    Outcome::new(
        pass,
        format!(
            "{} bytes; repeat equal {}, workers 1 vs 8 equal {}",
            first.len(),
            first == second,
            one == eight
        ),
    )
}
