//! Monte Carlo harness for the simulation examples, plus the CLI and file I/O.
//!
//! One configuration describes one example (symmetry, homogeneity or independence
//! scenario), a list of kernels and the `(n, p, parameter)` grid. The threshold `Δ` is
//! fixed once per `(kernel, p)`; every trial then draws fresh data from the scenario at
//! the grid parameter and runs the equivalence test for all kernels on that draw.

pub mod cli;
pub mod io;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decision::{decide, normal_quantile, Caveat, EquivalenceConfig};
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::samplers::{BenchmarkSpec, RngStream};
use crate::thresholds::{
    threshold_gaussian_shift_quadrature, threshold_random_approx_multi, ThresholdMethod, MIN_RA_SIZE,
};
use crate::variance::estimate_many;

// Stream tags keep threshold draws and trial draws apart.
const TAG_THRESHOLD: u64 = 1;
const TAG_TRIAL: u64 = 2;

/// Harness floor on the benchmark sample size.
pub const MIN_HARNESS_B: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    /// Symmetry, skew-normal.
    #[serde(alias = "E1a")]
    E1a,
    /// Symmetry, skew-Cauchy.
    #[serde(alias = "E1b")]
    E1b,
    /// Homogeneity, Gaussian location shift.
    #[serde(alias = "E2a")]
    E2a,
    /// Homogeneity, Gamma scale change.
    #[serde(alias = "E2b")]
    E2b,
    /// Independence, multivariate normal.
    #[serde(alias = "E3a")]
    E3a,
    /// Independence, multivariate t with 5 degrees of freedom.
    #[serde(alias = "E3b")]
    E3b,
}

impl Example {
    pub fn name(self) -> &'static str {
        match self {
            Example::E1a => "e1a",
            Example::E1b => "e1b",
            Example::E2a => "e2a",
            Example::E2b => "e2b",
            Example::E3a => "e3a",
            Example::E3b => "e3b",
        }
    }

    fn code(self) -> u64 {
        self as u64 + 1
    }

    pub fn is_independence(self) -> bool {
        matches!(self, Example::E3a | Example::E3b)
    }

    /// Default boundary parameter: `θ0 = 3`, `μ0 = 2`, `ρ0 = 0.8`.
    pub fn default_benchmark(self) -> f64 {
        match self {
            Example::E1a | Example::E1b => 3.0,
            Example::E2a | Example::E2b => 2.0,
            Example::E3a | Example::E3b => 0.8,
        }
    }

    /// Default parameter grid, null side first.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            Example::E1a | Example::E1b => vec![5.0, 4.0, 3.0, 2.0, 1.0, 0.0],
            Example::E2a | Example::E2b => vec![2.2, 2.1, 2.0, 1.9, 1.8, 1.7],
            Example::E3a | Example::E3b => vec![0.84, 0.82, 0.8, 0.75, 0.7, 0.65],
        }
    }

    /// Scenario at parameter value `param`.
    pub fn scenario(self, p: usize, q: usize, param: f64) -> BenchmarkSpec {
        match self {
            Example::E1a => BenchmarkSpec::SkewNormal { p, theta: param },
            Example::E1b => BenchmarkSpec::SkewCauchy { p, theta: param },
            Example::E2a => BenchmarkSpec::GaussShift { p, mu: param },
            Example::E2b => BenchmarkSpec::GammaScale { p, shape: 5.0, scale: param },
            Example::E3a => BenchmarkSpec::MvnCross { p, q, rho: param },
            Example::E3b => BenchmarkSpec::MvtCross { p, q, rho: param, nu: 5.0 },
        }
    }
}

impl std::str::FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase()))
            .map_err(|_| Error::Config(format!("unknown example '{s}' (expected e1a, e1b, e2a, e2b, e3a or e3b)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarnessThreshold {
    #[serde(alias = "ra")]
    RandomApprox,
    #[serde(alias = "quad")]
    Quadrature,
}

/// Stable `γ ∈ {0.5, 1, 1.5, 2}`.
pub fn stable_grid() -> Vec<KernelSpec> {
    family_grid(KernelFamily::Stable)
}

/// The default `γ` grid of a family: stable and energy `{0.5, 1, 1.5, 2}`, Laplace
/// `{0.1, 0.25, 1, 4}`.
pub fn family_grid(family: KernelFamily) -> Vec<KernelSpec> {
    let gammas: &[f64] = match family {
        KernelFamily::Laplace => &[0.1, 0.25, 1.0, 4.0],
        KernelFamily::Stable | KernelFamily::Energy => &[0.5, 1.0, 1.5, 2.0],
    };
    gammas
        .iter()
        .map(|&g| KernelSpec::new(family, g).expect("grid values are valid"))
        .collect()
}

fn default_kernels() -> Vec<KernelSpec> {
    stable_grid()
}
fn default_n() -> Vec<usize> {
    vec![100, 200, 300]
}
fn default_p() -> Vec<usize> {
    vec![2, 4, 6]
}
fn default_trials() -> usize {
    2000
}
fn default_alpha() -> f64 {
    0.05
}
fn default_b() -> usize {
    5000
}
fn default_seed() -> u64 {
    20240601
}
fn default_method() -> HarnessThreshold {
    HarnessThreshold::RandomApprox
}

/// Declarative description of one Monte Carlo study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub example: Example,
    #[serde(default = "default_kernels")]
    pub kernels: Vec<KernelSpec>,
    #[serde(default = "default_n")]
    pub n: Vec<usize>,
    #[serde(default = "default_p")]
    pub p: Vec<usize>,
    /// Second-block dimension for independence; defaults to `p`.
    #[serde(default)]
    pub q: Option<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Boundary parameter (`θ0`, `μ0` or `ρ0`); defaults per example.
    #[serde(default)]
    pub benchmark: Option<f64>,
    /// Parameter grid; defaults per example.
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    #[serde(default = "default_b", alias = "B")]
    pub b: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_method")]
    pub threshold_method: HarnessThreshold,
}

impl ExperimentConfig {
    /// Configuration with all defaults for `example`.
    pub fn new(example: Example) -> Self {
        Self {
            example,
            kernels: default_kernels(),
            n: default_n(),
            p: default_p(),
            q: None,
            trials: default_trials(),
            alpha: default_alpha(),
            benchmark: None,
            grid: None,
            b: default_b(),
            seed: default_seed(),
            threshold_method: default_method(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn benchmark_value(&self) -> f64 {
        self.benchmark.unwrap_or_else(|| self.example.default_benchmark())
    }

    pub fn grid_values(&self) -> Vec<f64> {
        self.grid.clone().unwrap_or_else(|| self.example.default_grid())
    }

    fn q_for(&self, p: usize) -> usize {
        self.q.unwrap_or(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.kernels.is_empty() || self.n.is_empty() || self.p.is_empty() || self.grid_values().is_empty() {
            return Err(Error::Config("kernel list and grids must be nonempty".into()));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 4) {
            return Err(Error::Config(format!("sample sizes must be at least 4, got {n}")));
        }
        if self.p.contains(&0) || self.q == Some(0) {
            return Err(Error::Config("dimensions must be at least 1".into()));
        }
        EquivalenceConfig::new(1.0, self.alpha)?;
        match self.threshold_method {
            HarnessThreshold::RandomApprox if self.b < MIN_HARNESS_B => {
                return Err(Error::Config(format!(
                    "the harness needs B >= {MIN_HARNESS_B}, got {}",
                    self.b
                )))
            }
            HarnessThreshold::Quadrature => {
                if self.example != Example::E2a {
                    return Err(Error::Config("quadrature thresholds exist only for e2a".into()));
                }
                if let Some(k) = self.kernels.iter().find(|k| !k.family().is_characteristic_function()) {
                    return Err(Error::Config(format!(
                        "quadrature thresholds need a characteristic-function kernel, got {}",
                        k.family().name()
                    )));
                }
            }
            _ => {}
        }
        for &p in &self.p {
            let q = self.q_for(p);
            self.example.scenario(p, q, self.benchmark_value()).validate()?;
            for &param in &self.grid_values() {
                self.example.scenario(p, q, param).validate()?;
            }
        }
        Ok(())
    }
}

/// One grid cell of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub example: Example,
    pub family: KernelFamily,
    pub gamma: f64,
    pub n: usize,
    pub p: usize,
    /// Second-block dimension (independence only).
    pub q: Option<usize>,
    pub param: f64,
    pub delta: f64,
    pub threshold_method: ThresholdMethod,
    pub rejections: usize,
    pub trials: usize,
    pub rejection_rate: f64,
    pub mean_statistic: f64,
    pub mean_sigma: f64,
    pub wall_time_secs: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub caveats: Vec<Caveat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub cells: Vec<CellResult>,
}

/// Per-kernel threshold for one dimension, or the reason it is unavailable.
type Thresholds = Vec<std::result::Result<(f64, ThresholdMethod), String>>;

fn thresholds_for(cfg: &ExperimentConfig, p: usize) -> Thresholds {
    let q = cfg.q_for(p);
    let bench = cfg.example.scenario(p, q, cfg.benchmark_value());
    match cfg.threshold_method {
        HarnessThreshold::Quadrature => cfg
            .kernels
            .iter()
            .map(|k| {
                threshold_gaussian_shift_quadrature(k, p, cfg.benchmark_value())
                    .map(|t| (t.delta, t.method))
                    .map_err(|e| e.to_string())
            })
            .collect(),
        HarnessThreshold::RandomApprox => {
            // One benchmark draw per dimension, shared by all kernels.
            let stream = RngStream::derive(cfg.seed, &[TAG_THRESHOLD, cfg.example.code(), p as u64, q as u64]);
            let pairs: Vec<_> = cfg.kernels.iter().map(|k| (*k, *k)).collect();
            match threshold_random_approx_multi(&bench, &pairs, cfg.b.max(MIN_RA_SIZE), stream) {
                Ok(ts) => ts.into_iter().map(|t| Ok((t.delta, t.method))).collect(),
                Err(e) => vec![Err(e.to_string()); cfg.kernels.len()],
            }
        }
    }
}

fn caveats(kernel: &KernelSpec, heavy_tailed: bool) -> Vec<Caveat> {
    let mut out = Vec::new();
    if kernel.family() == KernelFamily::Energy && heavy_tailed {
        out.push(Caveat::EnergyMomentConditions);
    }
    if kernel.is_energy_boundary() {
        out.push(Caveat::EnergyGammaTwo);
    }
    out
}

#[derive(Clone, Copy, Default)]
struct TrialOutcome {
    reject: bool,
    statistic: f64,
    sigma: f64,
}

/// Runs the experiment on the global thread pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &p in &cfg.p {
        let q = cfg.q_for(p);
        let thresholds = thresholds_for(cfg, p);
        for &n in &cfg.n {
            for &param in &cfg.grid_values() {
                cells.extend(run_cell(cfg, &thresholds, n, p, q, param));
            }
        }
    }
    Ok(ExperimentResult {
        config: cfg.clone(),
        cells,
    })
}

/// Runs the experiment on a dedicated pool of `jobs` threads. Output does not depend
/// on `jobs`.
pub fn run_experiment_with_jobs(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(cfg))
}

fn run_cell(cfg: &ExperimentConfig, thresholds: &Thresholds, n: usize, p: usize, q: usize, param: f64) -> Vec<CellResult> {
    let start = Instant::now();
    let scenario = cfg.example.scenario(p, q, param);
    let pairs: Vec<_> = cfg.kernels.iter().map(|k| (*k, *k)).collect();
    let z = normal_quantile(cfg.alpha).expect("alpha validated");
    let example = cfg.example;
    let seed = cfg.seed;

    // Trial t sees the same stream at every grid parameter (common random numbers).
    let trial = |t: usize| -> Result<Vec<TrialOutcome>> {
        let stream = RngStream::derive(seed, &[TAG_TRIAL, example.code(), n as u64, p as u64, q as u64, t as u64]);
        let data = scenario.draw(n, &mut stream.rng())?;
        let estimates = estimate_many(&pairs, &data)?;
        estimates
            .iter()
            .zip(thresholds)
            .map(|(e, th)| {
                let sigma = e.variance.max(0.0).sqrt();
                let reject = match th {
                    Ok((delta, _)) => {
                        let eq = EquivalenceConfig { delta: *delta, alpha: cfg.alpha };
                        if *delta > 0.0 {
                            decide(e.statistic, sigma, n, &eq)?.reject_null
                        } else {
                            e.statistic <= delta + sigma * z / (n as f64).sqrt()
                        }
                    }
                    Err(_) => false,
                };
                Ok(TrialOutcome {
                    reject,
                    statistic: e.statistic,
                    sigma,
                })
            })
            .collect()
    };
    let outcomes: Vec<Result<Vec<TrialOutcome>>> = (0..cfg.trials).into_par_iter().map(trial).collect();
    let first_error = outcomes.iter().find_map(|o| o.as_ref().err().map(|e| e.to_string()));
    let elapsed = start.elapsed().as_secs_f64();

    cfg.kernels
        .iter()
        .enumerate()
        .map(|(k, kernel)| {
            let (delta, method, mut error) = match &thresholds[k] {
                Ok((d, m)) => (*d, *m, None),
                Err(e) => (f64::NAN, ThresholdMethod::RandomApprox, Some(format!("threshold: {e}"))),
            };
            if error.is_none() {
                error = first_error.clone();
            }
            let (mut rejections, mut sum_stat, mut sum_sigma) = (0usize, 0.0, 0.0);
            if error.is_none() {
                for o in outcomes.iter().flatten() {
                    rejections += o[k].reject as usize;
                    sum_stat += o[k].statistic;
                    sum_sigma += o[k].sigma;
                }
            }
            let trials = cfg.trials as f64;
            let nan_if_err = |v: f64| if error.is_some() { f64::NAN } else { v };
            if let Some(e) = &error {
                log::warn!("{} n={n} p={p} param={param}: {e}", example.name());
            }
            CellResult {
                example,
                family: kernel.family(),
                gamma: kernel.gamma(),
                n,
                p,
                q: example.is_independence().then_some(q),
                param,
                delta,
                threshold_method: method,
                rejections,
                trials: cfg.trials,
                rejection_rate: nan_if_err(rejections as f64 / trials),
                mean_statistic: nan_if_err(sum_stat / trials),
                mean_sigma: nan_if_err(sum_sigma / trials),
                wall_time_secs: elapsed,
                seed,
                caveats: caveats(kernel, scenario.is_heavy_tailed()),
                error,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(example: Example) -> ExperimentConfig {
        ExperimentConfig {
            kernels: vec![KernelSpec::stable(1.0).unwrap(), KernelSpec::energy(1.0).unwrap()],
            n: vec![30],
            p: vec![2],
            trials: 40,
            b: 1000,
            grid: Some(vec![example.default_benchmark(), 0.5 * example.default_benchmark()]),
            ..ExperimentConfig::new(example)
        }
    }

    #[test]
    fn json_defaults_mirror_the_study_design() {
        let cfg = ExperimentConfig::from_json(r#"{"example": "E2a"}"#).unwrap();
        assert_eq!(cfg.trials, 2000);
        assert_eq!(cfg.alpha, 0.05);
        assert_eq!(cfg.b, 5000);
        assert_eq!(cfg.n, vec![100, 200, 300]);
        assert_eq!(cfg.p, vec![2, 4, 6]);
        assert_eq!(cfg.benchmark_value(), 2.0);
        assert_eq!(cfg.kernels.len(), 4);
        assert_eq!(Example::E1a.default_benchmark(), 3.0);
        assert_eq!(Example::E3b.default_benchmark(), 0.8);
        let cfg = ExperimentConfig::from_json(r#"{"example": "e3a", "B": 2000, "threshold_method": "ra"}"#).unwrap();
        assert_eq!(cfg.b, 2000);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for bad in [
            r#"{"example": "e2a", "trials": 0}"#,
            r#"{"example": "e2a", "n": []}"#,
            r#"{"example": "e2a", "B": 500}"#,
            r#"{"example": "e1a", "threshold_method": "quad"}"#,
            r#"{"example": "e3a", "grid": [1.2]}"#,
            r#"{"example": "e2a", "alpha": 1.5}"#,
            r#"{"example": "e9"}"#,
            r#"{"example": "e2a", "bogus": 1}"#,
        ] {
            assert!(ExperimentConfig::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn result_shape_and_rate_definition() {
        let cfg = small(Example::E1a);
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.cells.len(), 2 * 2);
        for c in &res.cells {
            assert_eq!(c.rejection_rate, c.rejections as f64 / c.trials as f64);
            assert!(c.error.is_none());
            assert_eq!(c.q, None);
        }
    }

    #[test]
    fn deterministic_across_job_counts() {
        let cfg = small(Example::E3a);
        let a = run_experiment_with_jobs(&cfg, 1).unwrap();
        let b = run_experiment_with_jobs(&cfg, 3).unwrap();
        let strip = |r: &ExperimentResult| {
            r.cells
                .iter()
                .map(|c| (c.rejections, c.mean_statistic.to_bits(), c.mean_sigma.to_bits(), c.delta.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
        assert!(a.cells.iter().all(|c| c.q == Some(2)));
    }

    #[test]
    fn energy_caveat_only_for_heavy_tails() {
        let res = run_experiment(&small(Example::E1b)).unwrap();
        let energy: Vec<_> = res.cells.iter().filter(|c| c.family == KernelFamily::Energy).collect();
        assert!(energy.iter().all(|c| c.caveats.contains(&Caveat::EnergyMomentConditions)));
        let res = run_experiment(&small(Example::E1a)).unwrap();
        assert!(res.cells.iter().all(|c| c.caveats.is_empty()));
    }

    #[test]
    fn quadrature_thresholds_for_gauss_shift() {
        let cfg = ExperimentConfig {
            kernels: vec![KernelSpec::stable(1.0).unwrap()],
            threshold_method: HarnessThreshold::Quadrature,
            ..small(Example::E2a)
        };
        let res = run_experiment(&cfg).unwrap();
        assert!((res.cells[0].delta - 0.315284).abs() < 5e-4);
        assert_eq!(res.cells[0].threshold_method, ThresholdMethod::Quadrature);
    }
}
