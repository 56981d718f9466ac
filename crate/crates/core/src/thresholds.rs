//! Equivalence margins `Δ`.
//!
//! Three routes are available:
//! random approximation (the statistic evaluated on one large draw from the benchmark
//! law), deterministic quadrature of the population distance for the Gaussian
//! location-shift benchmark, and closed forms for Gaussian models with the
//! unnormalized weight `exp(-‖t‖²)`.
//!
//! The module also hosts two quadrature oracles: the weighted L2 distance between
//! univariate empirical characteristic functions, and the bivariate Gaussian
//! independence distance by direct 2D integration.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, Continuous};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::data::{SampleMatrix, TwoSample};
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::quadrature::{integrate_with_breaks, QuadOptions};
use crate::samplers::{BenchmarkSpec, RngStream};
use crate::variance::estimate_many;

/// Smallest benchmark sample accepted by the random approximation.
pub const MIN_RA_SIZE: usize = 100;

/// Poisson mass dropped from the noncentral chi-square mixture.
const POISSON_TAIL: f64 = 1e-12;

/// Absolute tolerance of each radial integral.
const RADIAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMethod {
    RandomApprox,
    Quadrature,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub delta: f64,
    pub method: ThresholdMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimated_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stream_id: Option<u64>,
    /// Plug-in standard error `σ_B / √B` of a random-approximation threshold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard_error: Option<f64>,
    /// Set when a random-approximation threshold came out negative.
    #[serde(default)]
    pub negative: bool,
}

impl ThresholdResult {
    fn closed_form(delta: f64) -> Self {
        Self {
            delta,
            method: ThresholdMethod::ClosedForm,
            b_used: None,
            estimated_error: None,
            seed: None,
            stream_id: None,
            standard_error: None,
            negative: false,
        }
    }
}

/// Random-approximation threshold: draw `b` observations from the benchmark law and
/// return the matching statistic on that draw.
///
/// `kernel_q` is the second-block kernel for independence benchmarks (defaults to
/// `kernel`); it must be `None` otherwise.
pub fn threshold_random_approx(
    benchmark: &BenchmarkSpec,
    kernel: &KernelSpec,
    kernel_q: Option<&KernelSpec>,
    b: usize,
    stream: RngStream,
) -> Result<ThresholdResult> {
    let independence = matches!(
        benchmark,
        BenchmarkSpec::MvnCross { .. } | BenchmarkSpec::MvtCross { .. }
    );
    if kernel_q.is_some() && !independence {
        return Err(Error::Config("a second kernel only applies to independence benchmarks".into()));
    }
    let pair = (*kernel, kernel_q.copied().unwrap_or(*kernel));
    Ok(threshold_random_approx_multi(benchmark, &[pair], b, stream)?.remove(0))
}

/// Random-approximation thresholds for several kernels sharing one benchmark draw.
///
/// Only the first kernel of each pair matters for symmetry and homogeneity benchmarks.
pub fn threshold_random_approx_multi(
    benchmark: &BenchmarkSpec,
    kernels: &[(KernelSpec, KernelSpec)],
    b: usize,
    stream: RngStream,
) -> Result<Vec<ThresholdResult>> {
    if b < MIN_RA_SIZE {
        return Err(Error::Config(format!(
            "random approximation needs B >= {MIN_RA_SIZE}, got {b}"
        )));
    }
    benchmark.validate()?;
    let data = benchmark.draw(b, &mut stream.rng())?;
    let estimates = estimate_many(kernels, &data)?;
    Ok(estimates
        .iter()
        .zip(kernels)
        .map(|(e, (k, _))| {
            let negative = e.statistic < 0.0;
            if negative {
                log::warn!(
                    "negative random-approximation threshold {} for {} gamma={} (B={b})",
                    e.statistic,
                    k.family().name(),
                    k.gamma()
                );
            }
            ThresholdResult {
                delta: e.statistic,
                method: ThresholdMethod::RandomApprox,
                b_used: Some(b),
                estimated_error: None,
                seed: Some(stream.seed),
                stream_id: Some(stream.stream_id),
                standard_error: Some(e.variance.max(0.0).sqrt() / (b as f64).sqrt()),
                negative,
            }
        })
        .collect())
}

fn require_cf_kernel(spec: &KernelSpec) -> Result<()> {
    if spec.family().is_characteristic_function() {
        Ok(())
    } else {
        Err(Error::UnsupportedKernel(format!(
            "{} kernels have no weight density",
            spec.family().name()
        )))
    }
}

/// `E[C(W)]` with `‖W‖² = 2V`, `V ~ χ²_m`.
fn chi_square_expectation(spec: &KernelSpec, m: f64) -> Result<(f64, f64)> {
    let dist = ChiSquared::new(m).map_err(|e| Error::Numerical(format!("chi-square({m}): {e}")))?;
    let sd = (2.0 * m).sqrt();
    let upper = m + 14.0 * sd + 80.0;
    let mut breaks = vec![0.0];
    if m > 2.0 {
        breaks.push(m - 2.0);
    }
    breaks.extend([m + sd, m + 4.0 * sd, upper]);
    let opts = QuadOptions::abs(RADIAL_TOL);
    let out = integrate_with_breaks(|v| spec.eval_sq(2.0 * v) * dist.pdf(v), &breaks, opts)
        .map_err(|e| Error::Numerical(format!("radial integral with {m} degrees of freedom: {e}")))?;
    Ok((out.value, out.error))
}

/// Population homogeneity distance between `N_p(0, I)` and `N_p(μ0 1_p, I)`.
///
/// Uses `Δ = 2E[C(W)] - 2E[C(W')]` with `W ~ N_p(0, 2I)` and `W' ~ N_p(μ0 1_p, 2I)`.
/// `‖W‖²/2` is `χ²_p`; `‖W'‖²/2` is noncentral `χ²_p(λ)` with `λ = pμ0²/2`, expanded as a
/// Poisson(`λ/2`) mixture of central `χ²_{p+2k}` laws.
pub fn threshold_gaussian_shift_quadrature(spec: &KernelSpec, p: usize, mu0: f64) -> Result<ThresholdResult> {
    require_cf_kernel(spec)?;
    if p == 0 {
        return Err(Error::InputDomain("dimension must be at least 1".into()));
    }
    if !mu0.is_finite() {
        return Err(Error::InputDomain(format!("shift must be finite, got {mu0}")));
    }
    let pf = p as f64;
    let (central, central_err) = chi_square_expectation(spec, pf)?;

    let rate = pf * mu0 * mu0 / 4.0;
    let (mut shifted, mut shifted_err, mut mass) = (0.0, 0.0, 0.0);
    let k_max = (rate + 40.0 * rate.sqrt() + 200.0).ceil() as usize;
    for k in 0..=k_max {
        let w = if rate == 0.0 {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (-rate + k as f64 * rate.ln() - ln_gamma(k as f64 + 1.0)).exp()
        };
        if w > 0.0 {
            let (v, e) = if k == 0 {
                (central, central_err)
            } else {
                chi_square_expectation(spec, pf + 2.0 * k as f64)?
            };
            shifted += w * v;
            shifted_err += w * e;
            mass += w;
        }
        if k as f64 >= rate && 1.0 - mass <= POISSON_TAIL {
            let delta = 2.0 * (central - shifted);
            let tail = (1.0 - mass).max(0.0);
            return Ok(ThresholdResult {
                delta,
                method: ThresholdMethod::Quadrature,
                b_used: None,
                estimated_error: Some(2.0 * (central_err + shifted_err + tail)),
                seed: None,
                stream_id: None,
                standard_error: None,
                negative: delta < 0.0,
            });
        }
    }
    Err(Error::Numerical(format!(
        "Poisson mixture did not reach tail mass {POISSON_TAIL} (rate {rate}, mass {mass})"
    )))
}

/// Independence distance of the bivariate Gaussian with correlation `ρ`, for the
/// weight `exp(-t1² - t2²)`: `π(1/2 + 1/√(4-ρ²) - 4/√(16-ρ²))`.
pub fn closed_form_independence_gauss(rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::InputDomain(format!("correlation must lie in (-1, 1), got {rho}")));
    }
    let r2 = rho * rho;
    Ok(PI * (0.5 + 1.0 / (4.0 - r2).sqrt() - 4.0 / (16.0 - r2).sqrt()))
}

fn check_mixture_args(p: usize, delta_norm: f64) -> Result<()> {
    if p == 0 {
        return Err(Error::InputDomain("dimension must be at least 1".into()));
    }
    if !(delta_norm >= 0.0) {
        return Err(Error::InputDomain(format!("shift norm must be >= 0, got {delta_norm}")));
    }
    Ok(())
}

/// Symmetry distance of the equal mixture of `N_p(0, I)` and `N_p(δ, I)`, weight
/// `exp(-‖t‖²)`: `π^{p/2} / 2^{p/2+3} (1 - exp(-‖δ‖²/2))`.
pub fn closed_form_symmetry_mixture(p: usize, delta_norm: f64) -> Result<f64> {
    check_mixture_args(p, delta_norm)?;
    let h = p as f64 / 2.0;
    Ok(PI.powf(h) / 2f64.powf(h + 3.0) * -(-delta_norm * delta_norm / 2.0).exp_m1())
}

/// Homogeneity distance between that mixture and `N_p(0, I)`, weight `exp(-‖t‖²)`:
/// `π^{p/2} / 2^{p/2+1} (1 - exp(-‖δ‖²/8))`.
pub fn closed_form_homogeneity_mixture(p: usize, delta_norm: f64) -> Result<f64> {
    check_mixture_args(p, delta_norm)?;
    let h = p as f64 / 2.0;
    Ok(PI.powf(h) / 2f64.powf(h + 1.0) * -(-delta_norm * delta_norm / 8.0).exp_m1())
}

/// Closed-form threshold wrapped as a [`ThresholdResult`].
pub fn closed_form_result(delta: f64) -> ThresholdResult {
    ThresholdResult::closed_form(delta)
}

/// Kernel whose estimators target the closed forms above after multiplying by
/// `π^{-p/2}`: the normalized weight `π^{-p/2} exp(-‖t‖²)` has characteristic function
/// `exp(-‖s‖²/4)`.
pub fn closed_form_kernel() -> KernelSpec {
    KernelSpec::with_scale(KernelFamily::Stable, 2.0, 0.5).expect("valid constant kernel")
}

/// Factor `π^{-p/2}` taking the closed forms to the normalized-weight scale.
pub fn closed_form_normalization(p: usize) -> f64 {
    PI.powf(-(p as f64) / 2.0)
}

/// Direct 2D quadrature of the independence distance of the bivariate Gaussian with
/// correlation `ρ`, weight `exp(-t1² - t2²)`, over the box `[-9, 9]²`.
pub fn independence_gauss_quadrature(rho: f64, tol: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::InputDomain(format!("correlation must lie in (-1, 1), got {rho}")));
    }
    const L: f64 = 9.0;
    let inner_opts = QuadOptions::abs(tol / 100.0);
    let inner = |t1: f64| -> Result<f64> {
        let f = |t2: f64| {
            let joint = (-(t1 * t1 + 2.0 * rho * t1 * t2 + t2 * t2) / 2.0).exp();
            let product = (-(t1 * t1 + t2 * t2) / 2.0).exp();
            let d = joint - product;
            d * d * (-t1 * t1 - t2 * t2).exp()
        };
        Ok(integrate_with_breaks(f, &[-L, 0.0, L], inner_opts)?.value)
    };
    // The outer integrand is smooth; surface inner failures after the fact.
    let failure = std::cell::Cell::new(None);
    let outer = integrate_with_breaks(
        |t1| {
            inner(t1).unwrap_or_else(|e| {
                failure.set(Some(e.to_string()));
                0.0
            })
        },
        &[-L, 0.0, L],
        QuadOptions::abs(tol / 2.0),
    )?;
    if let Some(msg) = failure.take() {
        return Err(Error::Numerical(format!("inner integral: {msg}")));
    }
    Ok(outer.value)
}

#[derive(Debug, Clone, Copy)]
enum WeightDensity {
    // N(0, 2s²): characteristic function exp(-s²u²).
    Gauss(f64),
    // Cauchy with scale s: characteristic function exp(-s|u|).
    Cauchy(f64),
}

impl WeightDensity {
    fn for_kernel(spec: &KernelSpec) -> Result<Self> {
        match spec.family() {
            KernelFamily::Stable if spec.gamma() == 2.0 => Ok(WeightDensity::Gauss(spec.scale())),
            KernelFamily::Stable if spec.gamma() == 1.0 => Ok(WeightDensity::Cauchy(spec.scale())),
            _ => Err(Error::UnsupportedKernel(format!(
                "no univariate weight density for {} gamma={}",
                spec.family().name(),
                spec.gamma()
            ))),
        }
    }

    fn pdf(self, t: f64) -> f64 {
        match self {
            WeightDensity::Gauss(s) => (-t * t / (4.0 * s * s)).exp() / (2.0 * s * PI.sqrt()),
            WeightDensity::Cauchy(s) => s / (PI * (s * s + t * t)),
        }
    }

    /// `P(T > t)` for `t >= 0`.
    fn upper_tail(self, t: f64) -> f64 {
        match self {
            WeightDensity::Gauss(s) => 0.5 * erfc(t / (2.0 * s)),
            WeightDensity::Cauchy(s) => (s / t).atan() / PI,
        }
    }

    /// Smallest `t >= 0` with `pdf(t) <= level` (the densities decrease on `[0, ∞)`).
    fn cutoff(self, level: f64) -> f64 {
        let peak = self.pdf(0.0);
        if level >= peak {
            return 0.0;
        }
        match self {
            WeightDensity::Gauss(s) => 2.0 * s * (peak / level).ln().sqrt(),
            WeightDensity::Cauchy(s) => (s / (PI * level) - s * s).max(0.0).sqrt(),
        }
    }
}

/// Weighted L2 distance `∫ |φ̂_X(t) - φ̂_Y(t)|² w(t) dt` between univariate empirical
/// characteristic functions, returned on the U-statistic scale so that it is directly
/// comparable with [`crate::estimators::homogeneity_stat`].
///
/// The integral is the V-statistic
/// `n⁻² Σ_{i,j} {C(x_i - x_j) + C(y_i - y_j) - 2C(x_i - y_j)}`; removing the `i = j`
/// terms `Σ_i {2 - 2C(x_i - y_i)}` and renormalizing by `n(n-1)` gives the U-statistic.
///
/// The integrand is even; it is integrated on `[0, T]` in panels of half a period of the
/// fastest frequency. Beyond `T` the constant part of `|φ̂_X - φ̂_Y|²` is integrated
/// exactly against the weight tail and each cosine term is bounded by
/// `2w(T)/|a|` (second mean value theorem), with `T` chosen so that the bound is `tol/2`.
pub fn ecf_distance_quadrature(x: &SampleMatrix, y: &SampleMatrix, spec: &KernelSpec, tol: f64) -> Result<f64> {
    let weight = WeightDensity::for_kernel(spec)?;
    let s = TwoSample::new(x.clone(), y.clone())?;
    if s.x.d() != 1 {
        return Err(Error::InputDomain(format!(
            "the empirical-CF oracle is univariate, got dimension {}",
            s.x.d()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InputDomain(format!("tolerance must be positive, got {tol}")));
    }
    let (xs, ys) = (s.x.values(), s.y.values());
    let n = xs.len();
    let nf = n as f64;
    let inv_n2 = 1.0 / (nf * nf);

    // |D(t)|² = c0 + Σ_k coef_k cos(a_k t); collect c0, Σ|coef_k|/|a_k| and max |a_k|.
    let (mut c0, mut inv_freq_sum, mut max_freq) = (2.0 / nf, 0.0, 0.0f64);
    let mut add = |a: f64, coef: f64| {
        let a = a.abs();
        if a == 0.0 {
            c0 += coef;
        } else {
            inv_freq_sum += coef.abs() / a;
            max_freq = max_freq.max(a);
        }
    };
    for i in 0..n {
        for j in (i + 1)..n {
            add(xs[i] - xs[j], 2.0 * inv_n2);
            add(ys[i] - ys[j], 2.0 * inv_n2);
        }
        for &yj in ys {
            add(xs[i] - yj, -2.0 * inv_n2);
        }
    }

    let cutoff = if inv_freq_sum > 0.0 {
        // Two half-lines, each bounded by inv_freq_sum * 2 w(T).
        weight.cutoff(tol / (8.0 * inv_freq_sum))
    } else {
        0.0
    };
    let integrand = |t: f64| {
        let (mut cx, mut sx, mut cy, mut sy) = (0.0, 0.0, 0.0, 0.0);
        for (&a, &b) in xs.iter().zip(ys) {
            let (sa, ca) = (t * a).sin_cos();
            let (sb, cb) = (t * b).sin_cos();
            cx += ca;
            sx += sa;
            cy += cb;
            sy += sb;
        }
        let (dc, ds) = ((cx - cy) / nf, (sx - sy) / nf);
        (dc * dc + ds * ds) * weight.pdf(t)
    };
    let mut body = 0.0;
    if cutoff > 0.0 {
        let panel = if max_freq > 0.0 { PI / max_freq } else { cutoff };
        let panels = (cutoff / panel).ceil().max(1.0) as usize;
        let breaks: Vec<f64> = (0..=panels).map(|k| cutoff * k as f64 / panels as f64).collect();
        let opts = QuadOptions {
            abs_tol: tol / 4.0,
            rel_tol: 0.0,
            max_intervals: 8 * panels + 10_000,
        };
        body = integrate_with_breaks(integrand, &breaks, opts)?.value;
    }
    let v = 2.0 * (body + c0 * weight.upper_tail(cutoff));

    let diag: f64 = xs.iter().zip(ys).map(|(a, b)| 2.0 - 2.0 * spec.eval_sq((a - b) * (a - b))).sum();
    Ok((nf * nf * v - diag) / (nf * (nf - 1.0)))
}
