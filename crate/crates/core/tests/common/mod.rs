#![allow(dead_code)]

use cfequiv::estimators::{independence_stat, independence_stat_bruteforce};
use cfequiv::kernels::{eval_kernel, KernelFamily, KernelSpec};
use cfequiv::variance::{homogeneity_var, independence_var_jackknife, symmetry_var};
use cfequiv::{run_test, EquivalenceConfig, PairedSample, SampleMatrix, TwoSample};
use cfequiv::decision::{TestData, ThresholdProvenance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative tolerance for the exact-numerics oracles.
pub const ORACLE_REL_TOL: f64 = 1e-10;
pub const ORACLE_INSTANCES: usize = 100;
pub const ORACLE_MAX_N: usize = 30;

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> SampleMatrix {
    let spread = rng.gen_range(0.3..3.0);
    let values = (0..n * d).map(|_| spread * rng.gen_range(-1.0..1.0) + rng.gen_range(-0.5..0.5)).collect();
    SampleMatrix::new(n, d, values).unwrap()
}

pub fn random_kernel(rng: &mut ChaCha8Rng) -> KernelSpec {
    let scale = rng.gen_range(0.4..2.0);
    match rng.gen_range(0..3) {
        0 => KernelSpec::with_scale(KernelFamily::Stable, rng.gen_range(0.2..=2.0), scale),
        1 => KernelSpec::with_scale(KernelFamily::Laplace, rng.gen_range(0.1..5.0), scale),
        _ => KernelSpec::with_scale(KernelFamily::Energy, rng.gen_range(0.2..=2.0), scale),
    }
    .unwrap()
}

fn kernel(spec: &KernelSpec, a: &[f64], b: &[f64], sign: f64) -> f64 {
    let u: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + sign * y).collect();
    eval_kernel(spec, &u).unwrap()
}

/// Plug-in variance `4/(n(n-1)(n-2)) Σ_{i,j,k distinct} ψ_ij ψ_ik - 4 U²` by explicit
/// triple loops, clamped at zero.
fn quadratic_form_cubic(n: usize, psi: impl Fn(usize, usize) -> f64) -> f64 {
    let nf = n as f64;
    let mut pairs = 0.0;
    let mut triple = 0.0;
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let pij = psi(i, j);
            pairs += pij;
            for k in 0..n {
                if k != i && k != j {
                    triple += pij * psi(i, k);
                }
            }
        }
    }
    let u = pairs / (nf * (nf - 1.0));
    (4.0 * triple / (nf * (nf - 1.0) * (nf - 2.0)) - 4.0 * u * u).max(0.0)
}

pub fn symmetry_var_cubic(spec: &KernelSpec, x: &SampleMatrix) -> f64 {
    quadratic_form_cubic(x.n(), |i, j| {
        0.5 * (kernel(spec, x.row(i), x.row(j), -1.0) - kernel(spec, x.row(i), x.row(j), 1.0))
    })
}

pub fn homogeneity_var_cubic(spec: &KernelSpec, s: &TwoSample) -> f64 {
    let (x, y) = (&s.x, &s.y);
    quadratic_form_cubic(s.n(), |i, j| {
        kernel(spec, x.row(i), x.row(j), -1.0) + kernel(spec, y.row(i), y.row(j), -1.0)
            - kernel(spec, x.row(i), y.row(j), -1.0)
            - kernel(spec, x.row(j), y.row(i), -1.0)
    })
}

/// Jackknife from `n` full recomputations of the statistic on the leave-one-out samples.
pub fn jackknife_recomputed(kp: &KernelSpec, kq: &KernelSpec, s: &PairedSample) -> f64 {
    let n = s.n();
    let loo: Vec<f64> = (0..n)
        .map(|k| independence_stat(kp, kq, &s.without_row(k)).unwrap().stat)
        .collect();
    let mean = loo.iter().sum::<f64>() / n as f64;
    (n as f64 - 1.0) * loo.iter().map(|h| (h - mean) * (h - mean)).sum::<f64>()
}

/// Worst relative error found by one oracle family. `max_value_rel_err` divides by the
/// value itself even where the value is a cancelling difference; it is reported only.
#[derive(Debug, Clone, Copy)]
pub struct OracleOutcome {
    pub instances: usize,
    pub max_rel_err: f64,
    pub max_value_rel_err: f64,
}

impl OracleOutcome {
    pub fn passed(&self) -> bool {
        self.max_rel_err <= ORACLE_REL_TOL
    }
}

fn instances(seed: u64, mut check: impl FnMut(&mut ChaCha8Rng, usize) -> (f64, f64)) -> OracleOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut worst_value): (f64, f64) = (0.0, 0.0);
    for _ in 0..ORACLE_INSTANCES {
        let n = rng.gen_range(5..=ORACLE_MAX_N);
        let (e, v) = check(&mut rng, n);
        worst = worst.max(e);
        worst_value = worst_value.max(v);
    }
    OracleOutcome {
        instances: ORACLE_INSTANCES,
        max_rel_err: worst,
        max_value_rel_err: worst_value,
    }
}

fn same(e: f64) -> (f64, f64) {
    (e, e)
}

pub fn independence_stat_oracle(seed: u64) -> OracleOutcome {
    instances(seed, |rng, n| {
        let (p, q) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let s = PairedSample::new(random_matrix(rng, n, p), random_matrix(rng, n, q)).unwrap();
        let (kp, kq) = (random_kernel(rng), random_kernel(rng));
        let fast = independence_stat(&kp, &kq, &s).unwrap();
        let brute = independence_stat_bruteforce(&kp, &kq, &s).unwrap();
        let components = [
            rel_err(fast.u1, brute.u1),
            rel_err(fast.u2, brute.u2),
            rel_err(fast.u3, brute.u3),
            rel_err(fast.u4, brute.u4),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        // h = u1 + u2 u3 - 2 u4 nearly cancels under independence, so its error is
        // measured against the size of its terms.
        let terms = brute.u1.abs().max((brute.u2 * brute.u3).abs()).max(2.0 * brute.u4.abs());
        let stat = (fast.stat - brute.stat).abs() / terms;
        (components.max(stat), components.max(rel_err(fast.stat, brute.stat)))
    })
}

pub fn symmetry_var_oracle(seed: u64) -> OracleOutcome {
    instances(seed, |rng, n| {
        let d = rng.gen_range(1..=7);
        let x = random_matrix(rng, n, d);
        let k = random_kernel(rng);
        same(rel_err(symmetry_var(&k, &x).unwrap(), symmetry_var_cubic(&k, &x)))
    })
}

pub fn homogeneity_var_oracle(seed: u64) -> OracleOutcome {
    instances(seed, |rng, n| {
        let d = rng.gen_range(1..=7);
        let s = TwoSample::new(random_matrix(rng, n, d), random_matrix(rng, n, d)).unwrap();
        let k = random_kernel(rng);
        same(rel_err(homogeneity_var(&k, &s).unwrap(), homogeneity_var_cubic(&k, &s)))
    })
}

/// Both downdated paths (cached Gram matrices and the streaming one behind `run_test`)
/// against the recomputed jackknife.
pub fn jackknife_oracle(seed: u64) -> OracleOutcome {
    instances(seed, |rng, n| {
        let (p, q) = (rng.gen_range(1..=4), rng.gen_range(1..=7));
        let s = PairedSample::new(random_matrix(rng, n, p), random_matrix(rng, n, q)).unwrap();
        let (kp, kq) = (random_kernel(rng), random_kernel(rng));
        let reference = jackknife_recomputed(&kp, &kq, &s);
        let gram = independence_var_jackknife(&kp, &kq, &s).unwrap();
        let cfg = EquivalenceConfig::new(1.0, 0.05).unwrap();
        let report = run_test(
            &TestData::Independence(s),
            &kp,
            Some(&kq),
            &cfg,
            ThresholdProvenance::UserSupplied,
        )
        .unwrap();
        let streamed = report.decision.sigma_n * report.decision.sigma_n;
        same(rel_err(gram, reference).max(rel_err(streamed, reference)))
    })
}
