//! Equivalence decision rule and test reports.
//!
//! The null hypothesis is `Δ_pop >= Δ`; it is rejected (equivalence declared) when
//! `Δ_n <= Δ + σ_n z_α / √n`, with `z_α` the lower `α` quantile of the standard normal.

use serde::{Deserialize, Serialize};

use crate::data::{PairedSample, SampleMatrix, TwoSample};
use crate::error::{Error, Result};
use crate::estimators::IndependenceComponents;
use crate::kernels::{KernelFamily, KernelSpec};
use crate::variance::estimate_many;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    Symmetry,
    Homogeneity,
    Independence,
}

/// Where the equivalence margin came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdProvenance {
    UserSupplied,
    RandomApprox,
    Quadrature,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceConfig {
    pub delta: f64,
    pub alpha: f64,
}

impl EquivalenceConfig {
    pub fn new(delta: f64, alpha: f64) -> Result<Self> {
        let cfg = Self { delta, alpha };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::Config(format!("equivalence margin must be positive, got {}", self.delta)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Lower-tail quantile of the standard normal distribution.
///
/// Wichura's AS241 (PPND16) rational approximations; relative accuracy about `1e-16`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InputDomain(format!("normal quantile needs p in (0, 1), got {p}")));
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = poly(
            r,
            &[
                3.387_132_872_796_366_608,
                133.141_667_891_784_377_45,
                1_971.590_950_306_551_442_7,
                13_731.693_765_509_461_125,
                45_921.953_931_549_871_457,
                67_265.770_927_008_700_853,
                33_430.575_583_588_128_105,
                2_509.080_928_730_122_672_7,
            ],
        );
        let den = poly(
            r,
            &[
                1.0,
                42.313_330_701_600_911_252,
                687.187_007_492_057_908_30,
                5_394.196_021_424_751_107_7,
                21_213.794_301_586_595_867,
                39_307.895_800_092_710_610,
                28_729.085_735_721_942_674,
                5_226.495_278_852_854_561_0,
            ],
        );
        return Ok(q * num / den);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        poly(
            r,
            &[
                1.423_437_110_749_683_577_34,
                4.630_337_846_156_545_295_90,
                5.769_497_221_460_691_405_50,
                3.647_848_324_763_204_605_04,
                1.270_458_252_452_368_382_58,
                2.417_807_251_774_506_117_70e-1,
                2.272_384_498_926_918_458_33e-2,
                7.745_450_142_783_414_076_40e-4,
            ],
        ) / poly(
            r,
            &[
                1.0,
                2.053_191_626_637_758_821_87,
                1.676_384_830_183_803_849_40,
                6.897_673_349_851_000_045_50e-1,
                1.481_039_764_274_800_745_90e-1,
                1.519_866_656_361_645_719_66e-2,
                5.475_938_084_995_344_946_00e-4,
                1.050_750_071_644_416_843_24e-9,
            ],
        )
    } else {
        r -= 5.0;
        poly(
            r,
            &[
                6.657_904_643_501_103_777_20,
                5.463_784_911_164_114_369_90,
                1.784_826_539_917_291_335_80,
                2.965_605_718_285_048_912_30e-1,
                2.653_218_952_657_612_309_30e-2,
                1.242_660_947_388_078_438_60e-3,
                2.711_555_568_743_487_578_15e-5,
                2.010_334_399_292_288_132_65e-7,
            ],
        ) / poly(
            r,
            &[
                1.0,
                5.998_322_065_558_879_376_90e-1,
                1.369_298_809_227_358_053_10e-1,
                1.487_536_129_085_061_485_25e-2,
                7.868_691_311_456_132_591_00e-4,
                1.846_318_317_510_054_681_80e-5,
                1.421_511_758_316_445_888_70e-7,
                2.044_263_103_389_939_785_64e-15,
            ],
        )
    };
    Ok(if q < 0.0 { -val } else { val })
}

// Horner evaluation, coefficients in increasing degree.
fn poly(x: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Outcome of the critical-region comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decision {
    pub statistic: f64,
    pub sigma_n: f64,
    pub n: usize,
    pub delta: f64,
    pub alpha: f64,
    pub z_alpha: f64,
    pub critical_value: f64,
    /// `true` means the null is rejected: the data are declared `Δ`-close to the model.
    pub reject_null: bool,
    /// The variance estimate was zero, so the rule reduced to `statistic <= Δ`.
    pub degenerate_variance: bool,
}

pub fn decide(statistic: f64, sigma_n: f64, n: usize, cfg: &EquivalenceConfig) -> Result<Decision> {
    cfg.validate()?;
    if n < 2 {
        return Err(Error::insufficient(2, n));
    }
    if !(sigma_n >= 0.0 && sigma_n.is_finite()) {
        return Err(Error::InputDomain(format!("sigma_n must be finite and nonnegative, got {sigma_n}")));
    }
    if !statistic.is_finite() {
        return Err(Error::Numerical(format!("statistic is not finite: {statistic}")));
    }
    let z_alpha = normal_quantile(cfg.alpha)?;
    let critical_value = cfg.delta + sigma_n * z_alpha / (n as f64).sqrt();
    Ok(Decision {
        statistic,
        sigma_n,
        n,
        delta: cfg.delta,
        alpha: cfg.alpha,
        z_alpha,
        critical_value,
        reject_null: statistic <= critical_value,
        degenerate_variance: sigma_n == 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Caveat {
    /// Energy kernels need finite moments of order `2γ` for the normal limit.
    EnergyMomentConditions,
    /// `γ = 2` is outside the range where the energy distance characterizes the model.
    EnergyGammaTwo,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub hypothesis: Hypothesis,
    #[serde(flatten)]
    pub decision: Decision,
    pub kernels: Vec<KernelSpec>,
    pub threshold_provenance: ThresholdProvenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<IndependenceComponents>,
    pub caveats: Vec<Caveat>,
}

impl TestReport {
    pub fn statistic(&self) -> f64 {
        self.decision.statistic
    }

    pub fn reject_null(&self) -> bool {
        self.decision.reject_null
    }
}

/// Data for one test, tagged by hypothesis.
#[derive(Debug, Clone)]
pub enum TestData {
    Symmetry(SampleMatrix),
    Homogeneity(TwoSample),
    Independence(PairedSample),
}

impl TestData {
    pub fn hypothesis(&self) -> Hypothesis {
        match self {
            TestData::Symmetry(_) => Hypothesis::Symmetry,
            TestData::Homogeneity(_) => Hypothesis::Homogeneity,
            TestData::Independence(_) => Hypothesis::Independence,
        }
    }

    /// Number of observations (pairs for the two-sample and independence data).
    pub fn n(&self) -> usize {
        match self {
            TestData::Symmetry(x) => x.n(),
            TestData::Homogeneity(s) => s.n(),
            TestData::Independence(s) => s.n(),
        }
    }
}

pub(crate) fn caveats_for(kernels: &[KernelSpec]) -> Vec<Caveat> {
    let mut out = Vec::new();
    if kernels.iter().any(|k| k.family() == KernelFamily::Energy) {
        out.push(Caveat::EnergyMomentConditions);
    }
    if kernels.iter().any(KernelSpec::is_energy_boundary) {
        out.push(Caveat::EnergyGammaTwo);
    }
    out
}

/// Runs the full test: estimator, variance estimator and decision rule.
///
/// `kernel_q` is the kernel for the second block in independence testing; it defaults
/// to `kernel` and is ignored for the other hypotheses.
pub fn run_test(
    data: &TestData,
    kernel: &KernelSpec,
    kernel_q: Option<&KernelSpec>,
    cfg: &EquivalenceConfig,
    provenance: ThresholdProvenance,
) -> Result<TestReport> {
    cfg.validate()?;
    let kq = kernel_q.copied().unwrap_or(*kernel);
    let est = estimate_many(&[(*kernel, kq)], data)?[0];
    let kernels = match data {
        TestData::Independence(_) => vec![*kernel, kq],
        _ => vec![*kernel],
    };
    let (statistic, variance, n, components) = (est.statistic, est.variance, data.n(), est.components);
    let decision = decide(statistic, variance.max(0.0).sqrt(), n, cfg)?;
    Ok(TestReport {
        hypothesis: data.hypothesis(),
        decision,
        caveats: caveats_for(&kernels),
        kernels,
        threshold_provenance: provenance,
        components,
    })
}
