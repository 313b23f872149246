//! Monte-Carlo sweeps over SNR, element count, AP distance, CSI error and
//! residual-SIC cap, with CSV output and gain summaries.
//!
//! Trial `t` of a run draws from a ChaCha8 stream keyed by
//! `(master_seed, t)`, independent of the sweep value and the scheme, so
//! every point of a sweep sees the same user drops and fading.

use crate::ao::{evaluate, AoConfig};
use crate::baselines::{solve_scheme, BaselineKind, OmaConfig};
use crate::channel::{
    generate_realization, ChannelRealization, CsiErrorModel, CsiLinks, FadingParams, Geometry,
    Point, Rect,
};
use crate::phase::PenaltyConfig;
use crate::rates::{LinkBudget, SicModel};
use crate::units::{db_to_linear, dbm_to_watts};
use crate::{Error, Result};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub ap_x_m: f64,
    pub ap_y_m: f64,
    pub irs_x_m: f64,
    pub irs_y_m: f64,
    pub user_x_min_m: f64,
    pub user_x_max_m: f64,
    pub user_y_min_m: f64,
    pub user_y_max_m: f64,
    pub num_elements: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            ap_x_m: 0.0,
            ap_y_m: 0.0,
            irs_x_m: 2.0,
            irs_y_m: 2.0,
            user_x_min_m: 2.0,
            user_x_max_m: 20.0,
            user_y_min_m: 1.0,
            user_y_max_m: 2.0,
            num_elements: 30,
        }
    }
}

impl GeometryConfig {
    pub fn to_geometry(&self) -> Geometry {
        Geometry {
            ap_position: Point::new(self.ap_x_m, self.ap_y_m),
            irs_position: Point::new(self.irs_x_m, self.irs_y_m),
            user_region: Rect {
                x_min: self.user_x_min_m,
                x_max: self.user_x_max_m,
                y_min: self.user_y_min_m,
                y_max: self.user_y_max_m,
            },
            num_elements: self.num_elements,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FadingConfig {
    pub rician_k_db: f64,
    pub pathloss_exponent: f64,
    pub carrier_freq_hz: f64,
}

impl Default for FadingConfig {
    fn default() -> Self {
        Self {
            rician_k_db: 3.0,
            pathloss_exponent: 2.1,
            carrier_freq_hz: 915e6,
        }
    }
}

impl FadingConfig {
    pub fn to_params(&self) -> FadingParams {
        FadingParams {
            rician_k: db_to_linear(self.rician_k_db),
            pathloss_exponent: self.pathloss_exponent,
            carrier_freq: self.carrier_freq_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub tx_power_dbm: f64,
    pub noise_power_dbm: f64,
    pub qos_threshold_db: f64,
    pub spreading_gain: u32,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            tx_power_dbm: 10.0,
            noise_power_dbm: -110.0,
            qos_threshold_db: 10.0,
            spreading_gain: 10,
        }
    }
}

impl LinkConfig {
    pub fn to_budget(&self) -> LinkBudget {
        LinkBudget {
            tx_power: dbm_to_watts(self.tx_power_dbm),
            noise_power: dbm_to_watts(self.noise_power_dbm),
            qos_threshold: db_to_linear(self.qos_threshold_db),
            spreading_gain: self.spreading_gain,
        }
    }
}

/// Outer-loop settings; the per-trial seed comes from the harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AoSettings {
    pub epsilon: f64,
    pub max_outer_iters: usize,
    pub penalty: PenaltyConfig,
}

impl Default for AoSettings {
    fn default() -> Self {
        let d = AoConfig::default();
        Self {
            epsilon: d.epsilon,
            max_outer_iters: d.max_outer_iters,
            penalty: d.penalty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsiConfig {
    /// Error variance relative to the true entry power.
    pub eta: f64,
    pub links: CsiLinks,
}

impl Default for CsiConfig {
    fn default() -> Self {
        Self {
            eta: 0.0,
            links: CsiLinks::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SicConfig {
    pub beta: f64,
    /// Residual-interference cap; `None` leaves the residual unconstrained.
    #[serde(default)]
    pub gamma_sic_dbm: Option<f64>,
}

impl SicConfig {
    pub fn to_model(&self) -> SicModel {
        SicModel {
            beta: self.beta,
            gamma_sic: self.gamma_sic_dbm.map(dbm_to_watts),
        }
    }
}

/// The swept parameter and its values, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "param", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    /// `P_T / σ²` in dB, varied through `P_T` at fixed noise power.
    SnrDb {
        values: Vec<f64>,
    },
    Elements {
        values: Vec<usize>,
    },
    /// AP placed at `(−x, 0)`.
    ApXM {
        values: Vec<f64>,
    },
    CsiEta {
        values: Vec<f64>,
    },
    /// Residual-SIC caps at imperfection factor `beta`.
    SicGammaDbm {
        values: Vec<f64>,
        beta: f64,
    },
}

impl Sweep {
    pub fn param_name(&self) -> &'static str {
        match self {
            Sweep::SnrDb { .. } => "snr_db",
            Sweep::Elements { .. } => "elements",
            Sweep::ApXM { .. } => "ap_x_m",
            Sweep::CsiEta { .. } => "csi_eta",
            Sweep::SicGammaDbm { .. } => "sic_gamma_dbm",
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::Elements { values } => values.iter().map(|&m| m as f64).collect(),
            Sweep::SnrDb { values } | Sweep::ApXM { values } | Sweep::CsiEta { values } => {
                values.clone()
            }
            Sweep::SicGammaDbm { values, .. } => values.clone(),
        }
    }
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep::SnrDb {
            values: vec![110.0, 115.0, 120.0, 125.0, 130.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub geometry: GeometryConfig,
    pub fading: FadingConfig,
    pub link: LinkConfig,
    pub ao: AoSettings,
    pub oma: OmaConfig,
    pub csi: CsiConfig,
    pub sic: Option<SicConfig>,
    pub schemes: Vec<BaselineKind>,
    pub trials: usize,
    pub master_seed: u64,
    /// Worker threads; `None` uses every available core.
    pub workers: Option<usize>,
    pub sweep: Sweep,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            fading: FadingConfig::default(),
            link: LinkConfig::default(),
            ao: AoSettings::default(),
            oma: OmaConfig::default(),
            csi: CsiConfig::default(),
            sic: None,
            schemes: BaselineKind::ALL.to_vec(),
            trials: 200,
            master_seed: 1,
            workers: None,
            sweep: Sweep::default(),
        }
    }
}

/// Everything a single trial needs at one sweep value.
#[derive(Debug, Clone)]
struct OperatingPoint {
    geometry: Geometry,
    fading: FadingParams,
    budget: LinkBudget,
    ao: AoConfig,
    csi: Option<CsiErrorModel>,
    sic: Option<SicModel>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Collects every problem, each prefixed with its field path.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut check = |ok: bool, path: &str, msg: &str| {
            if !ok {
                problems.push(format!("{path}: {msg}"));
            }
        };
        check(self.trials >= 1, "trials", "must be at least 1");
        check(
            !self.schemes.is_empty(),
            "schemes",
            "must list at least one scheme",
        );
        check(self.workers != Some(0), "workers", "must be at least 1");
        check(
            self.geometry.num_elements >= 1,
            "geometry.num_elements",
            "must be at least 1",
        );
        check(
            self.geometry.user_x_max_m > self.geometry.user_x_min_m,
            "geometry.user_x_max_m",
            "must exceed user_x_min_m",
        );
        check(
            self.geometry.user_y_max_m > self.geometry.user_y_min_m,
            "geometry.user_y_max_m",
            "must exceed user_y_min_m",
        );
        check(
            self.fading.pathloss_exponent > 0.0,
            "fading.pathloss_exponent",
            "must be positive",
        );
        check(
            self.fading.carrier_freq_hz > 0.0,
            "fading.carrier_freq_hz",
            "must be positive",
        );
        check(
            self.link.spreading_gain >= 1,
            "link.spreading_gain",
            "must be at least 1",
        );
        check(self.ao.epsilon > 0.0, "ao.epsilon", "must be positive");
        check(
            self.ao.max_outer_iters >= 1,
            "ao.max_outer_iters",
            "must be at least 1",
        );
        check(
            self.ao.penalty.mu > 0.0,
            "ao.penalty.mu",
            "must be positive",
        );
        check(
            self.ao.penalty.max_sca_iters >= 1,
            "ao.penalty.max_sca_iters",
            "must be at least 1",
        );
        check(
            self.ao.penalty.sca_tol > 0.0,
            "ao.penalty.sca_tol",
            "must be positive",
        );
        check(
            self.ao.penalty.rank_tol > 0.0,
            "ao.penalty.rank_tol",
            "must be positive",
        );
        check(self.csi.eta >= 0.0, "csi.eta", "must be non-negative");
        if let Some(sic) = &self.sic {
            check(
                (0.0..=1.0).contains(&sic.beta),
                "sic.beta",
                "must lie in [0, 1]",
            );
        }
        let values = self.sweep.values();
        check(!values.is_empty(), "sweep.values", "must not be empty");
        check(
            values.windows(2).all(|w| w[0] < w[1]),
            "sweep.values",
            "must be sorted ascending without repeats",
        );
        match &self.sweep {
            Sweep::Elements { values } => check(
                values.iter().all(|&m| m >= 1),
                "sweep.values",
                "element counts must be at least 1",
            ),
            Sweep::CsiEta { values } => check(
                values.iter().all(|&e| e >= 0.0),
                "sweep.values",
                "must be non-negative",
            ),
            Sweep::SicGammaDbm { beta, .. } => check(
                (0.0..=1.0).contains(beta),
                "sweep.beta",
                "must lie in [0, 1]",
            ),
            _ => {}
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    fn point(&self, value: f64) -> OperatingPoint {
        let mut geometry = self.geometry.to_geometry();
        let mut budget = self.link.to_budget();
        let mut csi = (self.csi.eta > 0.0).then_some(CsiErrorModel { eta: self.csi.eta });
        let mut sic = self.sic.as_ref().map(SicConfig::to_model);
        match &self.sweep {
            Sweep::SnrDb { .. } => {
                budget.tx_power = dbm_to_watts(value + self.link.noise_power_dbm)
            }
            Sweep::Elements { .. } => geometry.num_elements = value as usize,
            Sweep::ApXM { .. } => geometry.ap_position = Point::new(-value, 0.0),
            Sweep::CsiEta { .. } => csi = (value > 0.0).then_some(CsiErrorModel { eta: value }),
            Sweep::SicGammaDbm { beta, .. } => {
                sic = Some(SicModel {
                    beta: *beta,
                    gamma_sic: Some(dbm_to_watts(value)),
                })
            }
        }
        OperatingPoint {
            geometry,
            fading: self.fading.to_params(),
            budget,
            ao: AoConfig {
                epsilon: self.ao.epsilon,
                max_outer_iters: self.ao.max_outer_iters,
                seed: 0,
                penalty: self.ao.penalty,
                sic,
            },
            csi,
            sic,
        }
    }
}

/// RNG of trial `trial` under `master_seed`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// True channels, the channels the solver sees, and the outer-loop seed of
/// one trial.
pub fn draw_trial(
    geometry: &Geometry,
    fading: &FadingParams,
    csi: Option<(&CsiErrorModel, CsiLinks)>,
    master_seed: u64,
    trial: u64,
) -> Result<(ChannelRealization, ChannelRealization, u64)> {
    let mut rng = trial_rng(master_seed, trial);
    let truth = generate_realization(geometry, fading, &mut rng)?;
    let seed = rng.next_u64();
    let seen = match csi {
        Some((model, links)) => truth.with_csi_error(model, links, &mut rng),
        None => truth.clone(),
    };
    Ok((truth, seen, seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct TrialOutcome {
    sum_rate: Option<f64>,
    iterations: usize,
    solve_ms: f64,
}

fn run_trial(
    cfg: &ScenarioConfig,
    point: &OperatingPoint,
    trial: u64,
) -> Result<Vec<TrialOutcome>> {
    let (truth, seen, seed) = draw_trial(
        &point.geometry,
        &point.fading,
        point.csi.as_ref().map(|m| (m, cfg.csi.links)),
        cfg.master_seed,
        trial,
    )?;
    let ao = AoConfig { seed, ..point.ao };
    let mut out = Vec::with_capacity(cfg.schemes.len());
    for &kind in &cfg.schemes {
        let start = Instant::now();
        let solved = solve_scheme(kind, &seen, &point.budget, &ao, &cfg.oma);
        let solve_ms = start.elapsed().as_secs_f64() * 1e3;
        let outcome = match solved {
            Ok(sol) if sol.is_feasible() => {
                let report = evaluate(&sol, &seen, &point.budget, point.sic.as_ref(), Some(&truth));
                TrialOutcome {
                    sum_rate: Some(report.sum_rate),
                    iterations: sol.iterations,
                    solve_ms,
                }
            }
            Ok(sol) => TrialOutcome {
                sum_rate: None,
                iterations: sol.iterations,
                solve_ms,
            },
            Err(e @ Error::SolverFailure { .. }) => {
                log::warn!("trial {trial}, {kind}: {e}; counted as infeasible");
                TrialOutcome {
                    sum_rate: None,
                    iterations: 0,
                    solve_ms,
                }
            }
            Err(e) => return Err(e),
        };
        out.push(outcome);
    }
    Ok(out)
}

/// One (scheme, sweep value) aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: BaselineKind,
    pub sweep_param: String,
    pub sweep_value: f64,
    /// Mean over feasible trials, bits/s/Hz; NaN when none was feasible.
    pub mean_sum_rate_bps_hz: f64,
    pub stderr: f64,
    pub feasible: usize,
    pub infeasible: usize,
    pub mean_iters: f64,
    pub mean_solve_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, scheme: BaselineKind, value: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme && r.sweep_value == value)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)
                .map_err(|e| Error::Config(format!("CSV write failed: {e}")))?;
        }
        w.flush()
            .map_err(|e| Error::Config(format!("CSV write failed: {e}")))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<SweepRow>, _>>()
            .map_err(|e| Error::Config(format!("CSV parse failed: {e}")))?;
        Ok(Self { rows })
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Runs every scheme at every sweep value over `cfg.trials` trials.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cfg.workers {
            b = b.num_threads(n);
        }
        b.build()
            .map_err(|e| Error::Config(format!("workers: {e}")))?
    };
    let mut rows = Vec::new();
    for value in cfg.sweep.values() {
        let point = cfg.point(value);
        let outcomes: Vec<Vec<TrialOutcome>> = pool.install(|| {
            (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| run_trial(cfg, &point, t))
                .collect::<Result<Vec<_>>>()
        })?;
        for (i, &scheme) in cfg.schemes.iter().enumerate() {
            rows.push(aggregate(
                scheme,
                cfg.sweep.param_name(),
                value,
                outcomes.iter().map(|o| o[i]),
            ));
        }
    }
    Ok(SweepResult { rows })
}

fn aggregate(
    scheme: BaselineKind,
    param: &str,
    value: f64,
    outcomes: impl Iterator<Item = TrialOutcome>,
) -> SweepRow {
    let outcomes: Vec<TrialOutcome> = outcomes.collect();
    let rates: Vec<f64> = outcomes.iter().filter_map(|o| o.sum_rate).collect();
    let n = rates.len();
    let mean = if n > 0 {
        rates.iter().sum::<f64>() / n as f64
    } else {
        f64::NAN
    };
    let stderr = if n > 1 {
        let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    let feasible_iters: Vec<usize> = outcomes
        .iter()
        .filter(|o| o.sum_rate.is_some())
        .map(|o| o.iterations)
        .collect();
    let mean_iters = if feasible_iters.is_empty() {
        0.0
    } else {
        feasible_iters.iter().sum::<usize>() as f64 / feasible_iters.len() as f64
    };
    SweepRow {
        scheme,
        sweep_param: param.to_string(),
        sweep_value: value,
        mean_sum_rate_bps_hz: mean,
        stderr,
        feasible: n,
        infeasible: outcomes.len() - n,
        mean_iters,
        mean_solve_ms: outcomes.iter().map(|o| o.solve_ms).sum::<f64>()
            / outcomes.len().max(1) as f64,
    }
}

/// `100 · (full − reference) / reference`.
pub fn gain_percent(full: f64, reference: f64) -> f64 {
    100.0 * (full - reference) / reference
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gain {
    pub reference: BaselineKind,
    pub sweep_value: f64,
    pub full_mean: f64,
    pub reference_mean: f64,
    pub gain_percent: f64,
}

/// Gain of the full algorithm over each reference scheme at sweep value `at`.
pub fn summarize_gains(
    result: &SweepResult,
    references: &[BaselineKind],
    at: f64,
) -> Result<Vec<Gain>> {
    let lookup = |scheme: BaselineKind| {
        result
            .row(scheme, at)
            .ok_or_else(|| Error::Config(format!("no row for scheme {scheme} at sweep value {at}")))
    };
    let full = lookup(BaselineKind::FullAlgorithm)?.mean_sum_rate_bps_hz;
    references
        .iter()
        .map(|&reference| {
            let r = lookup(reference)?.mean_sum_rate_bps_hz;
            Ok(Gain {
                reference,
                sweep_value: at,
                full_mean: full,
                reference_mean: r,
                gain_percent: gain_percent(full, r),
            })
        })
        .collect()
}

pub fn write_csv_file(result: &SweepResult, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))?;
    result.write_csv(std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize) -> ScenarioConfig {
        ScenarioConfig {
            geometry: GeometryConfig {
                num_elements: 4,
                ..GeometryConfig::default()
            },
            trials,
            sweep: Sweep::SnrDb {
                values: vec![120.0],
            },
            schemes: vec![BaselineKind::FullAlgorithm],
            workers: Some(1),
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn single_row_and_reproducible() {
        let cfg = small(1);
        let a = run_sweep(&cfg).unwrap();
        assert_eq!(a.rows.len(), 1);
        assert_eq!(a.rows[0].feasible + a.rows[0].infeasible, 1);
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(
            a.rows[0].mean_sum_rate_bps_hz,
            b.rows[0].mean_sum_rate_bps_hz
        );
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut cfg = small(6);
        cfg.schemes = BaselineKind::ALL.to_vec();
        let one = run_sweep(&cfg).unwrap();
        cfg.workers = Some(3);
        let three = run_sweep(&cfg).unwrap();
        for (a, b) in one.rows.iter().zip(&three.rows) {
            assert_eq!(
                a.mean_sum_rate_bps_hz.to_bits(),
                b.mean_sum_rate_bps_hz.to_bits()
            );
            assert_eq!((a.feasible, a.infeasible), (b.feasible, b.infeasible));
        }
    }

    #[test]
    fn csv_round_trip_and_header() {
        let mut cfg = small(3);
        cfg.schemes = vec![BaselineKind::FullAlgorithm, BaselineKind::OmaAligned];
        cfg.sweep = Sweep::SnrDb {
            values: vec![115.0, 120.0],
        };
        let res = run_sweep(&cfg).unwrap();
        let text = res.to_csv_string().unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "scheme,sweep_param,sweep_value,mean_sum_rate_bps_hz,stderr,feasible,infeasible,mean_iters,mean_solve_ms"
        );
        let back = SweepResult::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, res);
    }

    #[test]
    fn gains_arithmetic() {
        assert_eq!(gain_percent(2.0, 2.0), 0.0);
        assert!((gain_percent(1.4, 1.0) - 40.0).abs() < 1e-12);
        let row = |scheme, mean| SweepRow {
            scheme,
            sweep_param: "snr_db".into(),
            sweep_value: 120.0,
            mean_sum_rate_bps_hz: mean,
            stderr: 0.0,
            feasible: 1,
            infeasible: 0,
            mean_iters: 1.0,
            mean_solve_ms: 0.0,
        };
        let res = SweepResult {
            rows: vec![
                row(BaselineKind::FullAlgorithm, 14.0),
                row(BaselineKind::OmaAligned, 10.0),
            ],
        };
        let g = summarize_gains(&res, &[BaselineKind::OmaAligned], 120.0).unwrap();
        assert!((g[0].gain_percent - 40.0).abs() < 1e-12);
        assert!(summarize_gains(&res, &[BaselineKind::OmaRandomPhase], 120.0).is_err());
        assert!(summarize_gains(&res, &[BaselineKind::OmaAligned], 110.0).is_err());
    }

    #[test]
    fn validation_names_fields() {
        let mut cfg = small(1);
        cfg.trials = 0;
        cfg.sweep = Sweep::ApXM {
            values: vec![4.0, 0.0],
        };
        let Err(Error::Config(msg)) = cfg.validate() else {
            panic!()
        };
        assert!(msg.contains("trials"));
        assert!(msg.contains("sweep.values"));
        cfg.sweep = Sweep::CsiEta { values: vec![] };
        let Err(Error::Config(msg)) = cfg.validate() else {
            panic!()
        };
        assert!(msg.contains("sweep.values: must not be empty"));
    }

    #[test]
    fn json_config_parses_with_defaults() {
        let cfg = ScenarioConfig::from_json(
            r#"{"trials": 5, "link": {"tx_power_dbm": 20}, "sweep": {"param": "elements", "values": [10, 20]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.trials, 5);
        assert_eq!(cfg.link.tx_power_dbm, 20.0);
        assert_eq!(cfg.link.noise_power_dbm, -110.0);
        assert_eq!(cfg.sweep.values(), vec![10.0, 20.0]);
        assert!(ScenarioConfig::from_json(r#"{"trails": 5}"#).is_err());
        let sic = ScenarioConfig::from_json(
            r#"{"sweep": {"param": "sic_gamma_dbm", "values": [-75, -70], "beta": 0.1}}"#,
        )
        .unwrap();
        assert_eq!(sic.sweep.param_name(), "sic_gamma_dbm");
    }

    #[test]
    fn sweep_points_apply_their_parameter() {
        let mut cfg = small(1);
        let p = cfg.point(130.0);
        assert!((p.budget.tx_power - dbm_to_watts(20.0)).abs() < 1e-15);
        cfg.sweep = Sweep::ApXM { values: vec![4.0] };
        assert_eq!(cfg.point(4.0).geometry.ap_position, Point::new(-4.0, 0.0));
        cfg.sweep = Sweep::CsiEta {
            values: vec![0.0, 0.5],
        };
        assert!(cfg.point(0.0).csi.is_none());
        assert_eq!(cfg.point(0.5).csi, Some(CsiErrorModel { eta: 0.5 }));
    }

    #[test]
    fn missing_file_names_path() {
        let Err(Error::Config(msg)) = ScenarioConfig::load(Path::new("/nonexistent/fig2.json"))
        else {
            panic!()
        };
        assert!(msg.contains("/nonexistent/fig2.json"));
    }
}
