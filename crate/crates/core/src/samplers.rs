//! Seeded generators for the benchmark and alternative distributions.
//!
//! Every draw is driven by an [`RngStream`]: a `(seed, stream_id)` pair mapped onto a
//! ChaCha8 key and stream. Identical pairs replay identical sequences, distinct stream
//! ids give non-overlapping keystreams, so Monte Carlo trial `t` of cell `c` always sees
//! the same data regardless of scheduling.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{PairedSample, SampleMatrix, TwoSample};
use crate::decision::TestData;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Stream id derived from a tuple of indices (experiment cell, trial, ...).
    pub fn derive(seed: u64, parts: &[u64]) -> Self {
        let stream_id = parts
            .iter()
            .fold(0x243f_6a88_85a3_08d3u64, |h, &p| splitmix64(h ^ splitmix64(p)));
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Lower Cholesky factor of a symmetric positive-definite `dim x dim` matrix (row-major).
pub fn cholesky(a: &[f64], dim: usize) -> Result<Vec<f64>> {
    if a.len() != dim * dim {
        return Err(Error::Shape(format!("expected a {dim}x{dim} matrix")));
    }
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                }
                l[i * dim + i] = s.sqrt();
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    Ok(l)
}

/// Block covariance `[[I_p, Σ0], [Σ0ᵀ, I_q]]` with `(Σ0)_ij = ρ δ_ij`.
pub fn sigma_rho(p: usize, q: usize, rho: f64) -> Vec<f64> {
    let dim = p + q;
    let mut s = vec![0.0; dim * dim];
    for i in 0..dim {
        s[i * dim + i] = 1.0;
    }
    for i in 0..p.min(q) {
        s[i * dim + (p + i)] = rho;
        s[(p + i) * dim + i] = rho;
    }
    s
}

fn standard_normals<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

fn lower_mul(l: &[f64], z: &[f64], out: &mut [f64]) {
    let dim = z.len();
    for i in 0..dim {
        out[i] = l[i * dim..i * dim + i + 1].iter().zip(z).map(|(a, b)| a * b).sum();
    }
}

/// `n` rows of `N_p(mean, cov)`.
pub fn sample_mvn<R: Rng + ?Sized>(p: usize, mean: &[f64], cov: &[f64], n: usize, rng: &mut R) -> Result<SampleMatrix> {
    if mean.len() != p {
        return Err(Error::Shape(format!("mean has length {}, expected {p}", mean.len())));
    }
    let l = cholesky(cov, p)?;
    let mut z = vec![0.0; p];
    let mut row = vec![0.0; p];
    let mut values = Vec::with_capacity(n * p);
    for _ in 0..n {
        standard_normals(rng, &mut z);
        lower_mul(&l, &z, &mut row);
        values.extend(row.iter().zip(mean).map(|(r, m)| r + m));
    }
    SampleMatrix::new(n, p, values)
}

/// Shared coordinate of `δ = α / √(1 + αᵀα)` for the slant vector `α = θ 1_p`.
pub fn skew_delta(p: usize, theta: f64) -> f64 {
    theta / (1.0 + p as f64 * theta * theta).sqrt()
}

struct SkewNormalDraw {
    delta: f64,
    chol: Vec<f64>,
    z: Vec<f64>,
}

impl SkewNormalDraw {
    fn new(p: usize, theta: f64) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::Config(format!("skewness parameter must be >= 0, got {theta}")));
        }
        let delta = skew_delta(p, theta);
        let mut cov = vec![-delta * delta; p * p];
        for i in 0..p {
            cov[i * p + i] += 1.0;
        }
        Ok(Self {
            delta,
            chol: cholesky(&cov, p)?,
            z: vec![0.0; p],
        })
    }

    // X = δ|Z0| + Z with Z ~ N_p(0, I - δδᵀ).
    fn fill<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [f64]) {
        let z0: f64 = rng.sample(StandardNormal);
        standard_normals(rng, &mut self.z);
        lower_mul(&self.chol, &self.z, out);
        let shift = self.delta * z0.abs();
        out.iter_mut().for_each(|v| *v += shift);
    }
}

/// Skew-normal `SN_p(0, I_p, θ 1_p)` with slant vector `θ 1_p`.
pub fn sample_skew_normal<R: Rng + ?Sized>(p: usize, theta: f64, n: usize, rng: &mut R) -> Result<SampleMatrix> {
    let mut sn = SkewNormalDraw::new(p, theta)?;
    let mut values = vec![0.0; n * p];
    for row in values.chunks_exact_mut(p) {
        sn.fill(rng, row);
    }
    SampleMatrix::new(n, p, values)
}

/// Skew-Cauchy `SC_p(0, I_p, θ 1_p)`: skew-t with one degree of freedom, `S / √V`
/// with `S` skew-normal and `V ~ χ²_1`.
pub fn sample_skew_cauchy<R: Rng + ?Sized>(p: usize, theta: f64, n: usize, rng: &mut R) -> Result<SampleMatrix> {
    let mut sn = SkewNormalDraw::new(p, theta)?;
    let mut values = vec![0.0; n * p];
    for row in values.chunks_exact_mut(p) {
        sn.fill(rng, row);
        let g: f64 = rng.sample(StandardNormal);
        let inv = 1.0 / g.abs();
        row.iter_mut().for_each(|v| *v *= inv);
    }
    SampleMatrix::new(n, p, values)
}

/// iid `Gamma(shape, scale)` entries.
pub fn sample_gamma_iid<R: Rng + ?Sized>(p: usize, shape: f64, scale: f64, n: usize, rng: &mut R) -> Result<SampleMatrix> {
    let dist = Gamma::new(shape, scale)
        .map_err(|e| Error::Config(format!("gamma(shape={shape}, scale={scale}): {e}")))?;
    SampleMatrix::new(n, p, (0..n * p).map(|_| dist.sample(rng)).collect())
}

/// Multivariate t with scale `Σ_ρ` and `ν` degrees of freedom, split into `(x, y)`.
pub fn sample_mvt_cross<R: Rng + ?Sized>(
    p: usize,
    q: usize,
    rho: f64,
    nu: f64,
    n: usize,
    rng: &mut R,
) -> Result<PairedSample> {
    let chi = ChiSquared::new(nu).map_err(|e| Error::Config(format!("chi-square({nu}): {e}")))?;
    cross_sample(p, q, rho, n, rng, |rng| (chi.sample(rng) / nu).sqrt().recip())
}

/// Gaussian `N_{p+q}(0, Σ_ρ)` split into `(x, y)`.
pub fn sample_mvn_cross<R: Rng + ?Sized>(p: usize, q: usize, rho: f64, n: usize, rng: &mut R) -> Result<PairedSample> {
    cross_sample(p, q, rho, n, rng, |_| 1.0)
}

fn cross_sample<R: Rng + ?Sized>(
    p: usize,
    q: usize,
    rho: f64,
    n: usize,
    rng: &mut R,
    mut mix: impl FnMut(&mut R) -> f64,
) -> Result<PairedSample> {
    let dim = p + q;
    let l = cholesky(&sigma_rho(p, q, rho), dim)?;
    let mut z = vec![0.0; dim];
    let mut row = vec![0.0; dim];
    let mut xs = Vec::with_capacity(n * p);
    let mut ys = Vec::with_capacity(n * q);
    for _ in 0..n {
        standard_normals(rng, &mut z);
        lower_mul(&l, &z, &mut row);
        let w = mix(rng);
        xs.extend(row[..p].iter().map(|v| v * w));
        ys.extend(row[p..].iter().map(|v| v * w));
    }
    PairedSample::new(SampleMatrix::new(n, p, xs)?, SampleMatrix::new(n, q, ys)?)
}

/// Equal mixture of `N_p(0, I)` and `N_p(δ, I)`.
pub fn sample_gauss_mixture_shift<R: Rng + ?Sized>(p: usize, delta: &[f64], n: usize, rng: &mut R) -> Result<SampleMatrix> {
    if delta.len() != p {
        return Err(Error::Shape(format!("shift has length {}, expected {p}", delta.len())));
    }
    let mut values = vec![0.0; n * p];
    for row in values.chunks_exact_mut(p) {
        let shifted: bool = rng.gen();
        standard_normals(rng, row);
        if shifted {
            row.iter_mut().zip(delta).for_each(|(v, d)| *v += d);
        }
    }
    SampleMatrix::new(n, p, values)
}

fn default_gamma_shape() -> f64 {
    5.0
}

fn default_nu() -> f64 {
    5.0
}

/// A named data-generating scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum BenchmarkSpec {
    /// Symmetry: `SN_p(0, I, θ 1_p)`.
    SkewNormal { p: usize, theta: f64 },
    /// Symmetry: `SC_p(0, I, θ 1_p)`.
    SkewCauchy { p: usize, theta: f64 },
    /// Homogeneity: `X ~ N_p(0, I)` against `Y ~ N_p(μ 1_p, I)`.
    GaussShift { p: usize, mu: f64 },
    /// Homogeneity: iid `G(a, 1)` coordinates against iid `G(a, μ)` coordinates.
    GammaScale {
        p: usize,
        #[serde(default = "default_gamma_shape")]
        shape: f64,
        scale: f64,
    },
    /// Independence: `N_{p+q}(0, Σ_ρ)`.
    MvnCross { p: usize, q: usize, rho: f64 },
    /// Independence: `MT(0, Σ_ρ, ν)`.
    MvtCross {
        p: usize,
        q: usize,
        rho: f64,
        #[serde(default = "default_nu")]
        nu: f64,
    },
    /// Symmetry: equal mixture of `N_p(0, I)` and `N_p(δ, I)`.
    GaussMixtureShift { p: usize, delta: Vec<f64> },
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<()> {
        let dims_ok = match self {
            BenchmarkSpec::SkewNormal { p, .. }
            | BenchmarkSpec::SkewCauchy { p, .. }
            | BenchmarkSpec::GaussShift { p, .. }
            | BenchmarkSpec::GammaScale { p, .. }
            | BenchmarkSpec::GaussMixtureShift { p, .. } => *p >= 1,
            BenchmarkSpec::MvnCross { p, q, .. } | BenchmarkSpec::MvtCross { p, q, .. } => *p >= 1 && *q >= 1,
        };
        if !dims_ok {
            return Err(Error::Config("dimensions must be at least 1".into()));
        }
        match self {
            BenchmarkSpec::SkewNormal { theta, .. } | BenchmarkSpec::SkewCauchy { theta, .. } if !(*theta >= 0.0) => {
                Err(Error::Config(format!("theta must be >= 0, got {theta}")))
            }
            BenchmarkSpec::GammaScale { shape, scale, .. } if !(*shape > 0.0 && *scale > 0.0) => {
                Err(Error::Config(format!("gamma shape and scale must be positive, got {shape}, {scale}")))
            }
            BenchmarkSpec::MvtCross { nu, .. } if !(*nu > 0.0) => {
                Err(Error::Config(format!("degrees of freedom must be positive, got {nu}")))
            }
            BenchmarkSpec::MvnCross { p, q, rho } | BenchmarkSpec::MvtCross { p, q, rho, .. } => {
                cholesky(&sigma_rho(*p, *q, *rho), p + q).map(|_| ())
            }
            BenchmarkSpec::GaussMixtureShift { p, delta } if delta.len() != *p => {
                Err(Error::Shape(format!("shift has length {}, expected {p}", delta.len())))
            }
            _ => Ok(()),
        }
    }

    /// Draws `n` observations (pairs for the two-sample and independence scenarios).
    pub fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<TestData> {
        Ok(match self {
            BenchmarkSpec::SkewNormal { p, theta } => TestData::Symmetry(sample_skew_normal(*p, *theta, n, rng)?),
            BenchmarkSpec::SkewCauchy { p, theta } => TestData::Symmetry(sample_skew_cauchy(*p, *theta, n, rng)?),
            BenchmarkSpec::GaussShift { p, mu } => {
                let identity = identity(*p);
                let x = sample_mvn(*p, &vec![0.0; *p], &identity, n, rng)?;
                let y = sample_mvn(*p, &vec![*mu; *p], &identity, n, rng)?;
                TestData::Homogeneity(TwoSample::new(x, y)?)
            }
            BenchmarkSpec::GammaScale { p, shape, scale } => {
                let x = sample_gamma_iid(*p, *shape, 1.0, n, rng)?;
                let y = sample_gamma_iid(*p, *shape, *scale, n, rng)?;
                TestData::Homogeneity(TwoSample::new(x, y)?)
            }
            BenchmarkSpec::MvnCross { p, q, rho } => TestData::Independence(sample_mvn_cross(*p, *q, *rho, n, rng)?),
            BenchmarkSpec::MvtCross { p, q, rho, nu } => {
                TestData::Independence(sample_mvt_cross(*p, *q, *rho, *nu, n, rng)?)
            }
            BenchmarkSpec::GaussMixtureShift { p, delta } => {
                TestData::Symmetry(sample_gauss_mixture_shift(*p, delta, n, rng)?)
            }
        })
    }

    /// Heavy-tailed scenarios in which energy statistics lack the moments they need.
    pub fn is_heavy_tailed(&self) -> bool {
        matches!(self, BenchmarkSpec::SkewCauchy { .. } | BenchmarkSpec::MvtCross { .. })
    }
}

pub fn identity(p: usize) -> Vec<f64> {
    let mut m = vec![0.0; p * p];
    for i in 0..p {
        m[i * p + i] = 1.0;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::homogeneity_stat;
    use crate::kernels::KernelSpec;
    use crate::variance::homogeneity_var;
    use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

    fn rng(id: u64) -> ChaCha8Rng {
        RngStream::new(20240601, id).rng()
    }

    fn column(m: &SampleMatrix, c: usize) -> Vec<f64> {
        m.rows().map(|r| r[c]).collect()
    }

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    fn skewness(v: &[f64]) -> f64 {
        let m = mean(v);
        let m2 = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64;
        let m3 = v.iter().map(|x| (x - m).powi(3)).sum::<f64>() / v.len() as f64;
        m3 / m2.powf(1.5)
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| RngStream::new(1, 5).rng().gen()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let x1 = sample_skew_normal(3, 2.0, 50, &mut RngStream::new(1, 5).rng()).unwrap();
        let x2 = sample_skew_normal(3, 2.0, 50, &mut RngStream::new(1, 5).rng()).unwrap();
        assert_eq!(x1, x2);
        let x3 = sample_skew_normal(3, 2.0, 50, &mut RngStream::new(1, 6).rng()).unwrap();
        assert_ne!(x1, x3);
        assert_ne!(RngStream::derive(1, &[0, 1]).stream_id, RngStream::derive(1, &[1, 0]).stream_id);
    }

    #[test]
    fn distinct_streams_are_uncorrelated() {
        let n = 20_000;
        let a = sample_mvn(1, &[0.0], &[1.0], n, &mut rng(100)).unwrap();
        let b = sample_mvn(1, &[0.0], &[1.0], n, &mut rng(101)).unwrap();
        let r: f64 = a.values().iter().zip(b.values()).map(|(u, v)| u * v).sum::<f64>() / n as f64;
        assert!(r.abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn mvn_moments() {
        let n = 10_000;
        let x = sample_mvn(3, &[0.0; 3], &identity(3), n, &mut rng(1)).unwrap();
        for m in x.column_means() {
            assert!(m.abs() < 4.0 / (n as f64).sqrt());
        }
        let cross = sample_mvn_cross(2, 2, 0.0, n, &mut rng(2)).unwrap();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let c: f64 = cross.x.rows().zip(cross.y.rows()).map(|(a, b)| a[i] * b[j]).sum::<f64>() / n as f64;
            assert!(c.abs() < 4.0 / (n as f64).sqrt());
        }
        assert!(matches!(
            sample_mvn(2, &[0.0; 2], &[1.0, 2.0, 2.0, 1.0], 5, &mut rng(0)),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn sigma_rho_layout() {
        let s = sigma_rho(2, 3, 0.5);
        let dim = 5;
        assert_eq!(s[2], 0.5); // (0, 2)
        assert_eq!(s[dim + 3], 0.5); // (1, 3)
        assert_eq!(s[4], 0.0); // (0, 4)
        assert_eq!(s[2 * dim], 0.5);
        assert!(cholesky(&sigma_rho(2, 2, 1.0), 4).is_err());
    }

    #[test]
    fn skew_normal_theta_zero_is_gaussian() {
        let n = 20_000;
        let x = sample_skew_normal(2, 0.0, n, &mut rng(3)).unwrap();
        for c in 0..2 {
            let col = column(&x, c);
            assert!(skewness(&col).abs() < 4.0 * (6.0 / n as f64).sqrt());
            assert!(mean(&col).abs() < 4.0 / (n as f64).sqrt());
        }
    }

    #[test]
    fn skew_normal_mean_matches_theory_and_density_oracle() {
        let n = 40_000;
        let p = 2;
        let theta = 3.0;
        let d = skew_delta(p, theta);
        assert!((d - 3.0 / 19f64.sqrt()).abs() < 1e-15);
        let expected = d * (2.0 / std::f64::consts::PI).sqrt();

        let x = sample_skew_normal(p, theta, n, &mut rng(4)).unwrap();
        // Accept-reject from the density 2 φ_p(x) Φ(αᵀx) with a standard normal proposal.
        let std = Normal::new(0.0, 1.0).unwrap();
        let mut r = rng(5);
        let mut oracle = Vec::new();
        while oracle.len() < n * p {
            let z: [f64; 2] = [r.sample(StandardNormal), r.sample(StandardNormal)];
            if r.gen::<f64>() < std.cdf(theta * (z[0] + z[1])) {
                oracle.extend_from_slice(&z);
            }
        }
        let oracle = SampleMatrix::new(n, p, oracle).unwrap();
        let band = 4.0 * (1.0 / n as f64).sqrt();
        for c in 0..p {
            assert!((mean(&column(&x, c)) - expected).abs() < band);
            assert!((mean(&column(&oracle, c)) - expected).abs() < band);
            let (a, b) = (skewness(&column(&x, c)), skewness(&column(&oracle, c)));
            assert!((a - b).abs() < 8.0 * (6.0 / n as f64).sqrt(), "skewness {a} vs {b}");
        }
    }

    fn ecf(x: &SampleMatrix, t: &[f64]) -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        for r in x.rows() {
            let a: f64 = r.iter().zip(t).map(|(u, v)| u * v).sum();
            re += a.cos();
            im += a.sin();
        }
        (re / x.n() as f64, im / x.n() as f64)
    }

    #[test]
    fn skew_cauchy_matches_density_oracle() {
        let n = 40_000;
        let p = 2;
        let theta = 3.0;
        let x = sample_skew_cauchy(p, theta, n, &mut rng(6)).unwrap();
        // Skew-t(ν=1) density: 2 t_p(x) T_{p+1}(αᵀx √((p+1)/(xᵀx+1))); proposal is the
        // spherical Cauchy t_p(x), so the acceptance probability is the T factor.
        let t_cdf = StudentsT::new(0.0, 1.0, (p + 1) as f64).unwrap();
        let mut r = rng(7);
        let mut oracle = Vec::new();
        while oracle.len() < n * p {
            let z: [f64; 2] = [r.sample(StandardNormal), r.sample(StandardNormal)];
            let g: f64 = r.sample(StandardNormal);
            let w = [z[0] / g.abs(), z[1] / g.abs()];
            let q = w[0] * w[0] + w[1] * w[1];
            let arg = theta * (w[0] + w[1]) * ((p as f64 + 1.0) / (q + 1.0)).sqrt();
            if r.gen::<f64>() < t_cdf.cdf(arg) {
                oracle.extend_from_slice(&w);
            }
        }
        let oracle = SampleMatrix::new(n, p, oracle).unwrap();
        let band = 6.0 / (n as f64).sqrt();
        for t in [[0.5, 0.0], [0.3, 0.4], [1.0, -0.2]] {
            let (a, b) = (ecf(&x, &t), ecf(&oracle, &t));
            assert!((a.0 - b.0).abs() < band && (a.1 - b.1).abs() < band, "t={t:?}: {a:?} vs {b:?}");
        }
        assert!(ecf(&x, &[0.5, 0.5]).1 > 0.1, "positive slant should give positive imaginary part");
    }

    #[test]
    fn spherical_cauchy_medians_and_tails() {
        let x = sample_skew_cauchy(2, 0.0, 20_001, &mut rng(8)).unwrap();
        for c in 0..2 {
            let mut col = column(&x, c);
            col.sort_by(f64::total_cmp);
            assert!(col[10_000].abs() < 0.05);
        }
        let sq: Vec<f64> = column(&x, 0).iter().map(|v| v * v).collect();
        let small = mean(&sq[..200]);
        let large = mean(&sq);
        assert!(large > small, "second moment should grow with n: {small} vs {large}");
    }

    #[test]
    fn gamma_moments() {
        let n = 20_000;
        let x = sample_gamma_iid(2, 5.0, 2.0, n, &mut rng(9)).unwrap();
        let col = column(&x, 1);
        let m = mean(&col);
        let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((m - 10.0).abs() < 4.0 * (20.0 / n as f64).sqrt());
        assert!((var - 20.0).abs() < 0.05 * 20.0);
        assert!(sample_gamma_iid(2, -1.0, 1.0, 3, &mut rng(0)).is_err());
    }

    #[test]
    fn mvt_cross_uncorrelated_at_rho_zero() {
        let n = 20_000;
        let s = sample_mvt_cross(2, 2, 0.0, 5.0, n, &mut rng(10)).unwrap();
        let c: f64 = s.x.rows().zip(s.y.rows()).map(|(a, b)| a[0] * b[0]).sum::<f64>() / n as f64;
        // Var(X Y) = E[W⁴] = ν²/((ν-2)(ν-4)) = 25/3 for ν = 5.
        assert!(c.abs() < 4.0 * (25.0 / 3.0 / n as f64).sqrt());
    }

    #[test]
    fn mvt_with_huge_nu_matches_gaussian() {
        let n = 800;
        let t = sample_mvt_cross(2, 2, 0.6, 1e6, n, &mut rng(11)).unwrap();
        let g = sample_mvn_cross(2, 2, 0.6, n, &mut rng(12)).unwrap();
        let join = |s: &PairedSample| {
            let rows: Vec<Vec<f64>> = s.x.rows().zip(s.y.rows()).map(|(a, b)| [a, b].concat()).collect();
            SampleMatrix::from_rows(&rows).unwrap()
        };
        let two = TwoSample::new(join(&t), join(&g)).unwrap();
        let k = KernelSpec::stable(1.0).unwrap();
        let stat = homogeneity_stat(&k, &two).unwrap();
        let sd = homogeneity_var(&k, &two).unwrap().sqrt();
        // Under equal laws the statistic is degenerate (O(1/n)); allow a generous band.
        assert!(stat.abs() < 4.0 * sd.max(0.5) / (n as f64).sqrt(), "stat {stat}");
    }

    #[test]
    fn mixture_mean_and_zero_shift() {
        let n = 20_000;
        let x = sample_gauss_mixture_shift(2, &[2.0, -1.0], n, &mut rng(13)).unwrap();
        let m = x.column_means();
        assert!((m[0] - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt());
        assert!((m[1] + 0.5).abs() < 4.0 * (1.25 / n as f64).sqrt());
        let z = sample_gauss_mixture_shift(1, &[0.0], n, &mut rng(14)).unwrap();
        assert!(skewness(z.values()).abs() < 4.0 * (6.0 / n as f64).sqrt());
    }

    #[test]
    fn benchmark_validation_and_draw_shapes() {
        assert!(BenchmarkSpec::MvnCross { p: 2, q: 2, rho: 1.2 }.validate().is_err());
        assert!(BenchmarkSpec::SkewNormal { p: 2, theta: -1.0 }.validate().is_err());
        let spec: BenchmarkSpec = serde_json::from_str(r#"{"scenario":"gamma_scale","p":3,"scale":2.0}"#).unwrap();
        assert_eq!(spec, BenchmarkSpec::GammaScale { p: 3, shape: 5.0, scale: 2.0 });
        match (BenchmarkSpec::MvtCross { p: 2, q: 3, rho: 0.5, nu: 5.0 }).draw(7, &mut rng(0)).unwrap() {
            TestData::Independence(s) => assert_eq!((s.n(), s.x.d(), s.y.d()), (7, 2, 3)),
            _ => panic!("expected paired data"),
        }
    }
}
