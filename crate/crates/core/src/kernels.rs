//! Weight-kernel characteristic functions and pairwise Gram structures.
//!
//! Three families are supported, all radial in their argument:
//!
//! * `Stable`:  `C(u) = exp(-(s‖u‖)^γ)`, `γ ∈ (0, 2]`
//! * `Laplace`: `C(u) = (1 + s²‖u‖²)^(-γ)`, `γ > 0`
//! * `Energy`:  `C(u) = -(s‖u‖)^γ`, `γ ∈ (0, 2]`
//!
//! The first two are characteristic functions of spherical weight densities, so every
//! value lies in `(0, 1]`. The energy "kernel" is the substitution used by the energy
//! statistics and is non-positive.
//!
//! Every kernel is evaluated from the squared norm. Frequently used exponents get a
//! closed-form path (square roots and integer powers instead of `powf`), which matters
//! when millions of pairs are evaluated for a threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SampleMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Stable,
    Laplace,
    Energy,
}

impl KernelFamily {
    /// True for the families that are characteristic functions of a weight density.
    pub fn is_characteristic_function(self) -> bool {
        !matches!(self, KernelFamily::Energy)
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Stable => "stable",
            KernelFamily::Laplace => "laplace",
            KernelFamily::Energy => "energy",
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stable" => Ok(KernelFamily::Stable),
            "laplace" => Ok(KernelFamily::Laplace),
            "energy" => Ok(KernelFamily::Energy),
            other => Err(Error::Config(format!("unknown kernel family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Form {
    StableGauss,
    StableExp,
    StableQuarter,
    StableThreeQuarter,
    StablePow(f64),
    LaplaceInt(i32),
    LaplaceHalf,
    LaplaceQuarter,
    LaplacePow(f64),
    EnergySq,
    EnergyNorm,
    EnergyQuarter,
    EnergyThreeQuarter,
    EnergyPow(f64),
}

impl Form {
    fn select(family: KernelFamily, gamma: f64) -> Self {
        let half = 0.5 * gamma;
        match family {
            KernelFamily::Stable => match gamma {
                g if g == 2.0 => Form::StableGauss,
                g if g == 1.0 => Form::StableExp,
                g if g == 0.5 => Form::StableQuarter,
                g if g == 1.5 => Form::StableThreeQuarter,
                _ => Form::StablePow(half),
            },
            KernelFamily::Laplace => match gamma {
                g if g.fract() == 0.0 && g <= 16.0 => Form::LaplaceInt(g as i32),
                g if g == 0.5 => Form::LaplaceHalf,
                g if g == 0.25 => Form::LaplaceQuarter,
                _ => Form::LaplacePow(gamma),
            },
            KernelFamily::Energy => match gamma {
                g if g == 2.0 => Form::EnergySq,
                g if g == 1.0 => Form::EnergyNorm,
                g if g == 0.5 => Form::EnergyQuarter,
                g if g == 1.5 => Form::EnergyThreeQuarter,
                _ => Form::EnergyPow(half),
            },
        }
    }

    /// Kernel value at scaled squared norm `t`.
    #[inline(always)]
    fn value(self, t: f64) -> f64 {
        self.post(self.pre(t))
    }

    /// Everything up to the final transcendental call. Split from `post` so slice
    /// evaluation can run the cheap part as its own vectorizable loop.
    #[inline(always)]
    fn pre(self, t: f64) -> f64 {
        match self {
            Form::StableGauss => -t,
            Form::StableExp => -t.sqrt(),
            Form::StableQuarter => -t.sqrt().sqrt(),
            Form::StableThreeQuarter => {
                let r = t.sqrt();
                -(r * r.sqrt())
            }
            Form::StablePow(h) => -t.powf(h),
            Form::LaplaceInt(k) => {
                let b = 1.0 + t;
                match k {
                    1 => 1.0 / b,
                    2 => 1.0 / (b * b),
                    4 => {
                        let b2 = b * b;
                        1.0 / (b2 * b2)
                    }
                    _ => b.powi(-k),
                }
            }
            Form::LaplaceHalf => 1.0 / (1.0 + t).sqrt(),
            Form::LaplaceQuarter => 1.0 / (1.0 + t).sqrt().sqrt(),
            Form::LaplacePow(_) => (1.0 + t).ln(),
            Form::EnergySq => -t,
            Form::EnergyNorm => -t.sqrt(),
            Form::EnergyQuarter => -t.sqrt().sqrt(),
            Form::EnergyThreeQuarter => {
                let r = t.sqrt();
                -(r * r.sqrt())
            }
            Form::EnergyPow(h) => -t.powf(h),
        }
    }

    #[inline(always)]
    fn post(self, a: f64) -> f64 {
        match self {
            Form::StableGauss
            | Form::StableExp
            | Form::StableQuarter
            | Form::StableThreeQuarter
            | Form::StablePow(_) => a.exp(),
            Form::LaplacePow(g) => (-g * a).exp(),
            _ => a,
        }
    }

    fn has_post(self) -> bool {
        matches!(
            self,
            Form::StableGauss
                | Form::StableExp
                | Form::StableQuarter
                | Form::StableThreeQuarter
                | Form::StablePow(_)
                | Form::LaplacePow(_)
        )
    }
}

#[derive(Serialize, Deserialize)]
struct RawKernelSpec {
    family: KernelFamily,
    gamma: f64,
    #[serde(default = "default_scale")]
    scale: f64,
}

fn default_scale() -> f64 {
    1.0
}

/// Weight-kernel family, characteristic exponent `γ` and argument scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernelSpec", into = "RawKernelSpec")]
pub struct KernelSpec {
    family: KernelFamily,
    gamma: f64,
    scale: f64,
    scale_sq: f64,
    form: Form,
}

impl TryFrom<RawKernelSpec> for KernelSpec {
    type Error = Error;

    fn try_from(raw: RawKernelSpec) -> Result<Self> {
        KernelSpec::with_scale(raw.family, raw.gamma, raw.scale)
    }
}

impl From<KernelSpec> for RawKernelSpec {
    fn from(k: KernelSpec) -> Self {
        RawKernelSpec {
            family: k.family,
            gamma: k.gamma,
            scale: k.scale,
        }
    }
}

impl KernelSpec {
    pub fn new(family: KernelFamily, gamma: f64) -> Result<Self> {
        Self::with_scale(family, gamma, 1.0)
    }

    pub fn with_scale(family: KernelFamily, gamma: f64, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Config(format!("kernel scale must be positive and finite, got {scale}")));
        }
        let ok = gamma.is_finite()
            && gamma > 0.0
            && match family {
                KernelFamily::Stable | KernelFamily::Energy => gamma <= 2.0,
                KernelFamily::Laplace => true,
            };
        if !ok {
            let range = match family {
                KernelFamily::Laplace => "(0, inf)",
                _ => "(0, 2]",
            };
            return Err(Error::Config(format!(
                "{} kernel needs gamma in {range}, got {gamma}",
                family.name()
            )));
        }
        Ok(Self {
            family,
            gamma,
            scale,
            scale_sq: scale * scale,
            form: Form::select(family, gamma),
        })
    }

    pub fn stable(gamma: f64) -> Result<Self> {
        Self::new(KernelFamily::Stable, gamma)
    }

    pub fn laplace(gamma: f64) -> Result<Self> {
        Self::new(KernelFamily::Laplace, gamma)
    }

    pub fn energy(gamma: f64) -> Result<Self> {
        Self::new(KernelFamily::Energy, gamma)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Energy with `γ = 2` lies outside the range where the energy distance characterizes
    /// equality of laws; it is accepted but callers should surface this.
    pub fn is_energy_boundary(&self) -> bool {
        self.family == KernelFamily::Energy && self.gamma == 2.0
    }

    /// Kernel value at a point whose squared Euclidean norm is `sq`.
    #[inline]
    pub fn eval_sq(&self, sq: f64) -> f64 {
        self.form.value(self.scale_sq * sq)
    }

    /// `out[j] = eval_sq(sq[j])`, with the form dispatch hoisted out of the loop.
    pub fn eval_sq_slice(&self, sq: &[f64], out: &mut [f64]) {
        assert_eq!(sq.len(), out.len());
        let s2 = self.scale_sq;
        macro_rules! sweep {
            ($($pat:pat),* $(,)?) => {
                match self.form {
                    $(f @ $pat => {
                        for (o, &v) in out.iter_mut().zip(sq) {
                            *o = f.pre(s2 * v);
                        }
                        if f.has_post() {
                            for o in out.iter_mut() {
                                *o = f.post(*o);
                            }
                        }
                    })*
                }
            };
        }
        sweep!(
            Form::StableGauss,
            Form::StableExp,
            Form::StableQuarter,
            Form::StableThreeQuarter,
            Form::StablePow(_),
            Form::LaplaceInt(_),
            Form::LaplaceHalf,
            Form::LaplaceQuarter,
            Form::LaplacePow(_),
            Form::EnergySq,
            Form::EnergyNorm,
            Form::EnergyQuarter,
            Form::EnergyThreeQuarter,
            Form::EnergyPow(_),
        );
    }

    /// Kernel value at a radius `r = ‖u‖ >= 0`.
    #[inline]
    pub fn eval_radius(&self, r: f64) -> f64 {
        self.eval_sq(r * r)
    }
}

/// Squared Euclidean norm. From six coordinates on, Neumaier-compensated.
#[inline]
pub fn squared_norm(u: &[f64]) -> f64 {
    if u.len() < 6 {
        u.iter().map(|v| v * v).sum()
    } else {
        compensated(u.iter().map(|v| v * v))
    }
}

/// Squared norm of `a - b` without allocating the difference.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() < 6 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    } else {
        compensated(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)))
    }
}

/// Squared norm of `a + b`.
#[inline]
pub fn squared_sum_norm(a: &[f64], b: &[f64]) -> f64 {
    if a.len() < 6 {
        a.iter().zip(b).map(|(x, y)| (x + y) * (x + y)).sum()
    } else {
        compensated(a.iter().zip(b).map(|(x, y)| (x + y) * (x + y)))
    }
}

// Neumaier-style compensation using the branch-free two-sum error term.
#[inline]
fn compensated(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for t in terms {
        let s = sum + t;
        let bb = s - sum;
        c += (sum - (s - bb)) + (t - bb);
        sum = s;
    }
    sum + c
}

/// Column-major copy of a sample for distance sweeps against one fixed point.
pub(crate) struct Columns {
    n: usize,
    d: usize,
    data: Vec<f64>,
    comp: Vec<f64>,
}

impl Columns {
    pub fn new(x: &SampleMatrix) -> Self {
        let (n, d) = (x.n(), x.d());
        let mut data = vec![0.0; n * d];
        for (i, row) in x.rows().enumerate() {
            for (k, v) in row.iter().enumerate() {
                data[k * n + i] = *v;
            }
        }
        Self {
            n,
            d,
            data,
            comp: Vec::new(),
        }
    }

    /// `out[j - from] = ‖x_j - center‖²` for `j >= from`. Same arithmetic, term order
    /// and compensation rule as [`squared_distance`], so results agree bitwise.
    pub fn sweep(&mut self, center: &[f64], from: usize, out: &mut Vec<f64>) {
        let m = self.n - from;
        out.clear();
        out.resize(m, 0.0);
        let compensate = self.d >= 6;
        if compensate {
            self.comp.clear();
            self.comp.resize(m, 0.0);
        }
        for (k, &c) in center.iter().enumerate().take(self.d) {
            let col = &self.data[k * self.n + from..(k + 1) * self.n];
            if compensate {
                for ((o, e), &v) in out.iter_mut().zip(self.comp.iter_mut()).zip(col) {
                    let t = (v - c) * (v - c);
                    let s = *o + t;
                    let bb = s - *o;
                    *e += (*o - (s - bb)) + (t - bb);
                    *o = s;
                }
            } else {
                for (o, &v) in out.iter_mut().zip(col) {
                    *o += (v - c) * (v - c);
                }
            }
        }
        if compensate {
            out.iter_mut().zip(&self.comp).for_each(|(o, e)| *o += e);
        }
    }
}

/// Evaluates the kernel at `u`.
pub fn eval_kernel(spec: &KernelSpec, u: &[f64]) -> Result<f64> {
    if let Some(v) = u.iter().find(|v| !v.is_finite()) {
        return Err(Error::InputDomain(format!("kernel argument has non-finite entry {v}")));
    }
    Ok(spec.eval_sq(squared_norm(u)))
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j).to_bits() == self.get(j, i).to_bits()))
    }

    /// Builds a symmetric matrix from `entry(i, j)` evaluated for `i <= j` only.
    fn symmetric_from(n: usize, entry: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let upper: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (i..n).map(|j| entry(i, j)).collect())
            .collect();
        let mut data = vec![0.0; n * n];
        for (i, row) in upper.iter().enumerate() {
            for (off, &v) in row.iter().enumerate() {
                let j = i + off;
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    fn full_from(n: usize, entry: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let data = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| entry(i, j))
            .collect();
        Self { n, data }
    }
}

/// Cached pairwise kernel evaluations for one sample.
#[derive(Debug, Clone)]
pub struct GramPair {
    /// `C(x_i - x_j)`.
    pub diff: SquareMatrix,
    /// `C(x_i + x_j)`, present when built with [`gram_pair`].
    pub sum: Option<SquareMatrix>,
    pub kernel: KernelSpec,
}

/// Gram matrix of differences: entry `(i, j)` is `C(x_i - x_j)`.
pub fn gram_diff(spec: &KernelSpec, x: &SampleMatrix) -> GramPair {
    let diff = SquareMatrix::symmetric_from(x.n(), |i, j| {
        if i == j {
            spec.eval_sq(0.0)
        } else {
            spec.eval_sq(squared_distance(x.row(i), x.row(j)))
        }
    });
    GramPair {
        diff,
        sum: None,
        kernel: *spec,
    }
}

/// Gram matrix of sums: entry `(i, j)` is `C(x_i + x_j)`; the diagonal is `C(2 x_i)`.
pub fn gram_sum(spec: &KernelSpec, x: &SampleMatrix) -> SquareMatrix {
    SquareMatrix::symmetric_from(x.n(), |i, j| spec.eval_sq(squared_sum_norm(x.row(i), x.row(j))))
}

/// Both difference and sum Gram matrices.
pub fn gram_pair(spec: &KernelSpec, x: &SampleMatrix) -> GramPair {
    let mut g = gram_diff(spec, x);
    g.sum = Some(gram_sum(spec, x));
    g
}

/// Cross Gram matrix between two equally sized samples: entry `(i, j)` is `C(x_i - y_j)`.
/// Not symmetric in general.
pub fn gram_cross(spec: &KernelSpec, x: &SampleMatrix, y: &SampleMatrix) -> Result<SquareMatrix> {
    if x.n() != y.n() || x.d() != y.d() {
        return Err(Error::Shape("cross Gram needs samples of equal shape".into()));
    }
    Ok(SquareMatrix::full_from(x.n(), |i, j| {
        spec.eval_sq(squared_distance(x.row(i), y.row(j)))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stable(g: f64) -> KernelSpec {
        KernelSpec::stable(g).unwrap()
    }

    #[test]
    fn column_sweep_is_bitwise_scalar() {
        for d in [1, 3, 6, 9] {
            let n = 13;
            let vals: Vec<f64> = (0..n * d).map(|k| ((k * 7919) % 101) as f64 / 17.0 - 2.9).collect();
            let x = SampleMatrix::new(n, d, vals).unwrap();
            let mut cols = Columns::new(&x);
            let mut out = Vec::new();
            for i in 0..n {
                let c = x.row(i);
                cols.sweep(c, 4, &mut out);
                for (k, v) in out.iter().enumerate() {
                    assert_eq!(v.to_bits(), squared_distance(c, x.row(4 + k)).to_bits());
                }
                let neg: Vec<f64> = c.iter().map(|v| -v).collect();
                cols.sweep(&neg, 0, &mut out);
                for (k, v) in out.iter().enumerate() {
                    assert_eq!(v.to_bits(), squared_sum_norm(c, x.row(k)).to_bits());
                }
            }
        }
    }

    #[test]
    fn slice_eval_matches_scalar() {
        let sq: Vec<f64> = (0..50).map(|k| k as f64 * 0.37).collect();
        let mut out = vec![0.0; sq.len()];
        for fam in [KernelFamily::Stable, KernelFamily::Laplace, KernelFamily::Energy] {
            for g in [0.25, 0.5, 0.7, 1.0, 1.5, 2.0, 3.0] {
                let Ok(k) = KernelSpec::with_scale(fam, g, 0.8) else { continue };
                k.eval_sq_slice(&sq, &mut out);
                for (a, b) in sq.iter().zip(&out) {
                    assert_eq!(b.to_bits(), k.eval_sq(*a).to_bits());
                }
            }
        }
    }

    #[test]
    fn scalar_examples() {
        assert_eq!(eval_kernel(&stable(2.0), &[0.0]).unwrap(), 1.0);
        assert_eq!(eval_kernel(&KernelSpec::laplace(1.0).unwrap(), &[1.0]).unwrap(), 0.5);
        let v = eval_kernel(&stable(1.0), &[0.6, 0.8]).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.3678794).abs() < 1e-7);
        assert_eq!(eval_kernel(&KernelSpec::energy(1.0).unwrap(), &[2.0]).unwrap(), -2.0);
    }

    #[test]
    fn non_finite_argument_is_rejected() {
        assert!(matches!(
            eval_kernel(&stable(1.0), &[f64::INFINITY]),
            Err(Error::InputDomain(_))
        ));
    }

    #[test]
    fn gamma_ranges_are_enforced() {
        assert!(KernelSpec::stable(2.5).is_err());
        assert!(KernelSpec::stable(0.0).is_err());
        assert!(KernelSpec::energy(2.0).unwrap().is_energy_boundary());
        assert!(KernelSpec::energy(2.1).is_err());
        assert!(KernelSpec::laplace(4.0).is_ok());
        assert!(KernelSpec::with_scale(KernelFamily::Stable, 1.0, 0.0).is_err());
        assert!(KernelSpec::with_scale(KernelFamily::Stable, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn fast_paths_agree_with_powf() {
        let cases = [
            (KernelFamily::Stable, [0.5, 1.0, 1.5, 2.0, 0.7]),
            (KernelFamily::Laplace, [0.1, 0.25, 0.5, 1.0, 4.0]),
            (KernelFamily::Energy, [0.5, 1.0, 1.5, 2.0, 1.3]),
        ];
        for (fam, gammas) in cases {
            for g in gammas {
                let k = KernelSpec::with_scale(fam, g, 0.7).unwrap();
                for &r in &[0.0, 0.1, 0.9, 1.0, 2.5, 13.0] {
                    let t: f64 = 0.7 * r;
                    let reference = match fam {
                        KernelFamily::Stable => (-t.powf(g)).exp(),
                        KernelFamily::Laplace => (1.0 + t * t).powf(-g),
                        KernelFamily::Energy => -t.powf(g),
                    };
                    let got = k.eval_radius(r);
                    assert!(
                        (got - reference).abs() <= 1e-14 * reference.abs().max(1.0),
                        "{fam:?} {g} r={r}: {got} vs {reference}"
                    );
                }
            }
        }
    }

    #[test]
    fn gram_examples() {
        let x = SampleMatrix::from_column(&[0.0, 1.0]).unwrap();
        let g = gram_diff(&stable(2.0), &x);
        let e1 = (-1.0f64).exp();
        assert_eq!(g.diff.get(0, 0), 1.0);
        assert_eq!(g.diff.get(1, 1), 1.0);
        assert!((g.diff.get(0, 1) - e1).abs() < 1e-15);
        assert_eq!(g.diff.get(0, 1), g.diff.get(1, 0));

        let x = SampleMatrix::from_column(&[1.0, -1.0]).unwrap();
        let s = gram_sum(&stable(2.0), &x);
        assert_eq!(s.get(0, 1), 1.0);
        assert!((s.get(0, 0) - (-4.0f64).exp()).abs() < 1e-15);
        assert!((s.get(1, 1) - (-4.0f64).exp()).abs() < 1e-15);

        let zeros = SampleMatrix::new(3, 2, vec![0.0; 6]).unwrap();
        for spec in [stable(0.5), KernelSpec::laplace(1.0).unwrap()] {
            let s = gram_sum(&spec, &zeros);
            assert!((0..3).all(|i| (0..3).all(|j| s.get(i, j) == 1.0)));
        }
    }

    #[test]
    fn energy_gram_diagonal_is_zero() {
        let x = SampleMatrix::from_rows(&[vec![0.0, 1.0], vec![3.0, -1.0], vec![2.0, 2.0]]).unwrap();
        let g = gram_diff(&KernelSpec::energy(1.5).unwrap(), &x);
        for i in 0..3 {
            assert_eq!(g.diff.get(i, i), 0.0);
            for j in 0..3 {
                assert!(g.diff.get(i, j) <= 0.0);
            }
        }
    }

    #[test]
    fn spec_round_trips_through_json() {
        let k = KernelSpec::with_scale(KernelFamily::Laplace, 0.25, 0.5).unwrap();
        let json = serde_json::to_string(&k).unwrap();
        assert_eq!(json, r#"{"family":"laplace","gamma":0.25,"scale":0.5}"#);
        let back: KernelSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, k);
        let defaulted: KernelSpec = serde_json::from_str(r#"{"family":"stable","gamma":1.0}"#).unwrap();
        assert_eq!(defaulted.scale(), 1.0);
        assert!(serde_json::from_str::<KernelSpec>(r#"{"family":"stable","gamma":3.0}"#).is_err());
    }

    fn any_spec() -> impl Strategy<Value = KernelSpec> {
        prop_oneof![
            (0.05f64..=2.0).prop_map(|g| KernelSpec::stable(g).unwrap()),
            (0.05f64..6.0).prop_map(|g| KernelSpec::laplace(g).unwrap()),
            (0.05f64..=2.0).prop_map(|g| KernelSpec::energy(g).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn cf_kernels_bounded_and_even(g in 0.05f64..=2.0, u in prop::collection::vec(-5.0f64..5.0, 1..8)) {
            for spec in [KernelSpec::stable(g).unwrap(), KernelSpec::laplace(g).unwrap()] {
                let v = eval_kernel(&spec, &u).unwrap();
                let neg: Vec<f64> = u.iter().map(|x| -x).collect();
                prop_assert!(v > 0.0 && v <= 1.0);
                prop_assert_eq!(v, eval_kernel(&spec, &neg).unwrap());
            }
        }

        #[test]
        fn kernels_non_increasing_in_radius(spec in any_spec(), r1 in 0.0f64..20.0, r2 in 0.0f64..20.0) {
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            prop_assert!(spec.eval_radius(hi) <= spec.eval_radius(lo));
        }

        #[test]
        fn gram_symmetric_and_permutation_equivariant(
            spec in any_spec(),
            vals in prop::collection::vec(-3.0f64..3.0, 4 * 7),
            seed in 0u64..1000,
        ) {
            let x = SampleMatrix::new(4, 7, vals).unwrap();
            let g = gram_pair(&spec, &x);
            prop_assert!(g.diff.is_symmetric());
            prop_assert!(g.sum.as_ref().unwrap().is_symmetric());
            let mut perm: Vec<usize> = (0..4).collect();
            perm.rotate_left((seed % 4) as usize);
            perm.swap(0, (seed as usize / 4) % 4);
            let gp = gram_diff(&spec, &x.permuted(&perm));
            for a in 0..4 {
                for b in 0..4 {
                    prop_assert_eq!(gp.diff.get(a, b), g.diff.get(perm[a], perm[b]));
                }
            }
            let neg = gram_sum(&spec, &x.negated());
            prop_assert_eq!(&neg, g.sum.as_ref().unwrap());
        }
    }
}
