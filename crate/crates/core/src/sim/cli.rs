//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error, 4 numerical
//! error. Diagnostics go to stderr; machine-readable output to `--out` (or stdout).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::data::{PairedSample, TwoSample};
use crate::decision::{run_test, EquivalenceConfig, TestData, ThresholdProvenance};
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::samplers::{BenchmarkSpec, RngStream};
use crate::sim::io::{read_sample_csv, write_results_csv};
use crate::sim::{run_experiment_with_jobs, ExperimentConfig};
use crate::thresholds::{
    closed_form_homogeneity_mixture, closed_form_independence_gauss, closed_form_symmetry_mixture,
    threshold_gaussian_shift_quadrature, threshold_random_approx, ThresholdMethod, ThresholdResult,
};

/// Environment variable holding the default number of worker threads.
pub const JOBS_ENV: &str = "CFEQUIV_JOBS";

#[derive(Debug, Parser)]
#[command(name = "cfequiv", version, about = "Characteristic-function equivalence tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an equivalence test on data from CSV files.
    Test(TestArgs),
    /// Compute an equivalence margin for a benchmark law.
    Threshold(ThresholdArgs),
    /// Evaluate a closed-form or quadrature population distance.
    ClosedForm(ClosedFormArgs),
    /// Run a Monte Carlo study described by a JSON config.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum HypothesisArg {
    Symmetry,
    Homogeneity,
    Independence,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Stable,
    Laplace,
    Energy,
}

impl From<FamilyArg> for KernelFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Stable => KernelFamily::Stable,
            FamilyArg::Laplace => KernelFamily::Laplace,
            FamilyArg::Energy => KernelFamily::Energy,
        }
    }
}

#[derive(Debug, Args)]
struct KernelArgs {
    #[arg(long, value_enum, default_value = "stable")]
    family: FamilyArg,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Exponent of the second-block kernel (independence only).
    #[arg(long)]
    gamma2: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

impl KernelArgs {
    fn kernels(&self) -> Result<(KernelSpec, Option<KernelSpec>)> {
        let family = self.family.into();
        let k = KernelSpec::with_scale(family, self.gamma, self.scale)?;
        let kq = self
            .gamma2
            .map(|g| KernelSpec::with_scale(family, g, self.scale))
            .transpose()?;
        Ok((k, kq))
    }
}

#[derive(Debug, Args)]
struct TestArgs {
    #[arg(value_enum)]
    hypothesis: HypothesisArg,
    #[arg(long)]
    data: PathBuf,
    /// Second sample (homogeneity) or second block (independence).
    #[arg(long)]
    data2: Option<PathBuf>,
    /// Independence from one file: the first P columns form x, the rest y.
    #[arg(long)]
    split: Option<usize>,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, conflicts_with = "delta_config", required_unless_present = "delta_config")]
    delta: Option<f64>,
    /// JSON file describing how to compute the margin.
    #[arg(long)]
    delta_config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Margin recipe accepted by `test --delta-config`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
enum DeltaConfig {
    #[serde(alias = "ra")]
    RandomApprox {
        benchmark: BenchmarkSpec,
        #[serde(default = "default_b", alias = "B")]
        b: usize,
        #[serde(default)]
        seed: u64,
    },
    #[serde(alias = "quad")]
    Quadrature { p: usize, mu0: f64 },
}

fn default_b() -> usize {
    5000
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BenchmarkName {
    SkewNormal,
    SkewCauchy,
    GaussShift,
    GammaScale,
    MvnCross,
    MvtCross,
    GaussMixtureShift,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Ra,
    Quad,
}

#[derive(Debug, Args)]
struct BenchmarkParams {
    #[arg(long, default_value_t = 2)]
    p: usize,
    /// Second-block dimension (defaults to p).
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, visible_alias = "theta0", default_value_t = 3.0)]
    theta: f64,
    #[arg(long, visible_alias = "mu0", default_value_t = 2.0)]
    mu: f64,
    #[arg(long, visible_alias = "rho0", default_value_t = 0.8)]
    rho: f64,
    #[arg(long, default_value_t = 5.0)]
    nu: f64,
    #[arg(long, default_value_t = 5.0)]
    shape: f64,
    /// Mixture shift, comma separated (length p).
    #[arg(long, value_delimiter = ',')]
    shift: Vec<f64>,
}

impl BenchmarkParams {
    fn spec(&self, name: BenchmarkName) -> BenchmarkSpec {
        let (p, q) = (self.p, self.q.unwrap_or(self.p));
        match name {
            BenchmarkName::SkewNormal => BenchmarkSpec::SkewNormal { p, theta: self.theta },
            BenchmarkName::SkewCauchy => BenchmarkSpec::SkewCauchy { p, theta: self.theta },
            BenchmarkName::GaussShift => BenchmarkSpec::GaussShift { p, mu: self.mu },
            BenchmarkName::GammaScale => BenchmarkSpec::GammaScale {
                p,
                shape: self.shape,
                scale: self.mu,
            },
            BenchmarkName::MvnCross => BenchmarkSpec::MvnCross { p, q, rho: self.rho },
            BenchmarkName::MvtCross => BenchmarkSpec::MvtCross {
                p,
                q,
                rho: self.rho,
                nu: self.nu,
            },
            BenchmarkName::GaussMixtureShift => BenchmarkSpec::GaussMixtureShift {
                p,
                delta: self.shift.clone(),
            },
        }
    }
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long, value_enum)]
    benchmark: BenchmarkName,
    #[command(flatten)]
    params: BenchmarkParams,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, value_enum, default_value = "ra")]
    method: MethodArg,
    #[arg(short = 'B', long = "B", default_value_t = 5000)]
    b: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ClosedFormKind {
    IndepGauss,
    SymMixture,
    HomogMixture,
    GaussShift,
}

#[derive(Debug, Args)]
struct ClosedFormArgs {
    #[arg(value_enum)]
    kind: ClosedFormKind,
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// Norm of the mixture shift.
    #[arg(long, default_value_t = 0.0)]
    delta_norm: f64,
    #[arg(long, visible_alias = "mu", default_value_t = 2.0)]
    mu0: f64,
    #[command(flatten)]
    kernel: KernelArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write the full result (including mean statistics and timings) as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, env = JOBS_ENV)]
    jobs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::UnsupportedKernel(_) | Error::InputDomain(_) => 2,
        Error::Data { .. } | Error::DataFile(_) | Error::Io(_) | Error::Shape(_) | Error::InsufficientSample { .. } => 3,
        Error::Numerical(_) | Error::NotPositiveDefinite { .. } => 4,
    }
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Threshold(a) => cmd_threshold(a),
        Command::ClosedForm(a) => cmd_closed_form(a),
        Command::Simulate(a) => cmd_simulate(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .map_err(|e| Error::DataFile(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(format!("serialization: {e}")))
}

fn load_test_data(a: &TestArgs) -> Result<TestData> {
    let x = read_sample_csv(&a.data, None)?;
    let second = a.data2.as_ref().map(|p| read_sample_csv(p, None)).transpose()?;
    Ok(match a.hypothesis {
        HypothesisArg::Symmetry => {
            if second.is_some() || a.split.is_some() {
                return Err(Error::Config("symmetry takes a single sample without --split".into()));
            }
            TestData::Symmetry(x)
        }
        HypothesisArg::Homogeneity => {
            let y = second.ok_or_else(|| Error::Config("homogeneity needs --data2".into()))?;
            TestData::Homogeneity(TwoSample::new(x, y)?)
        }
        HypothesisArg::Independence => match (second, a.split) {
            (Some(y), None) => TestData::Independence(PairedSample::new(x, y)?),
            (None, Some(p)) => {
                let (xs, ys) = x.split_columns(p)?;
                TestData::Independence(PairedSample::new(xs, ys)?)
            }
            _ => return Err(Error::Config("independence needs exactly one of --data2 and --split".into())),
        },
    })
}

fn dimension(data: &TestData) -> usize {
    match data {
        TestData::Symmetry(x) => x.d(),
        TestData::Homogeneity(s) => s.x.d(),
        TestData::Independence(s) => s.x.d(),
    }
}

fn cmd_test(a: TestArgs) -> Result<()> {
    let data = load_test_data(&a)?;
    let (k, kq) = a.kernel.kernels()?;
    if kq.is_some() && !matches!(data, TestData::Independence(_)) {
        return Err(Error::Config("--gamma2 only applies to independence".into()));
    }
    let (delta, provenance) = match (&a.delta, &a.delta_config) {
        (Some(d), _) => (*d, ThresholdProvenance::UserSupplied),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::DataFile(format!("{}: {e}", path.display())))?;
            let recipe: DeltaConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let t = match recipe {
                DeltaConfig::RandomApprox { benchmark, b, seed } => {
                    threshold_random_approx(&benchmark, &k, kq.as_ref(), b, RngStream::new(seed, 0))?
                }
                DeltaConfig::Quadrature { p, mu0 } => {
                    if p != dimension(&data) {
                        return Err(Error::Config(format!(
                            "quadrature margin is for p={p}, data have dimension {}",
                            dimension(&data)
                        )));
                    }
                    threshold_gaussian_shift_quadrature(&k, p, mu0)?
                }
            };
            let prov = match t.method {
                ThresholdMethod::RandomApprox => ThresholdProvenance::RandomApprox,
                ThresholdMethod::Quadrature => ThresholdProvenance::Quadrature,
                ThresholdMethod::ClosedForm => ThresholdProvenance::ClosedForm,
            };
            (t.delta, prov)
        }
        (None, None) => return Err(Error::Config("either --delta or --delta-config is required".into())),
    };
    let cfg = EquivalenceConfig::new(delta, a.alpha)?;
    let report = run_test(&data, &k, kq.as_ref(), &cfg, provenance)?;
    eprintln!(
        "statistic {:.6}  sigma {:.6}  critical value {:.6}  -> {}",
        report.decision.statistic,
        report.decision.sigma_n,
        report.decision.critical_value,
        if report.reject_null() {
            "equivalence declared (null rejected)"
        } else {
            "null not rejected"
        }
    );
    emit(&to_json(&report)?, a.out.as_deref())
}

fn cmd_threshold(a: ThresholdArgs) -> Result<()> {
    let (k, kq) = a.kernel.kernels()?;
    let result: ThresholdResult = match a.method {
        MethodArg::Ra => threshold_random_approx(&a.params.spec(a.benchmark), &k, kq.as_ref(), a.b, RngStream::new(a.seed, 0))?,
        MethodArg::Quad => match a.benchmark {
            BenchmarkName::GaussShift => threshold_gaussian_shift_quadrature(&k, a.params.p, a.params.mu)?,
            _ => return Err(Error::Config("quadrature is available for gauss-shift only".into())),
        },
    };
    if result.negative {
        eprintln!("warning: the random-approximation margin is negative; increase -B");
    }
    emit(&to_json(&result)?, a.out.as_deref())
}

fn cmd_closed_form(a: ClosedFormArgs) -> Result<()> {
    let value = match a.kind {
        ClosedFormKind::IndepGauss => closed_form_independence_gauss(a.rho)?,
        ClosedFormKind::SymMixture => closed_form_symmetry_mixture(a.p, a.delta_norm)?,
        ClosedFormKind::HomogMixture => closed_form_homogeneity_mixture(a.p, a.delta_norm)?,
        ClosedFormKind::GaussShift => {
            let (k, _) = a.kernel.kernels()?;
            threshold_gaussian_shift_quadrature(&k, a.p, a.mu0)?.delta
        }
    };
    emit(&value.to_string(), None)
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.config).map_err(|e| Error::DataFile(format!("{}: {e}", a.config.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let jobs = a.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let result = run_experiment_with_jobs(&cfg, jobs)?;
    write_results_csv(&result, &a.out)?;
    if let Some(path) = &a.json {
        emit(&to_json(&result)?, Some(path))?;
    }
    let failed = result.cells.iter().filter(|c| c.error.is_some()).count();
    eprintln!("{} cells written to {}", result.cells.len(), a.out.display());
    if failed > 0 {
        eprintln!("warning: {failed} cells failed; see the error field of the JSON output");
    }
    Ok(())
}
