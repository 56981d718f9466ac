//! Estimators of the limit variance `σ²` entering the critical region.
//!
//! Symmetry and homogeneity use the plug-in quadratic form
//! `4/(n(n-1)(n-2)) Σ_{i≠j≠k} ψ_ij ψ_ik - 4 (Σ_{i≠j} ψ_ij / (n(n-1)))²`, computed from the
//! kernel row sums via `Σ_{i≠j≠k} ψ_ij ψ_ik = Σ_i (r_i² - Σ_{j≠i} ψ_ij²)`.
//!
//! Independence uses the jackknife `σ² = (n-1) Σ_i (h_(-i) - mean h)²` over the
//! leave-one-out statistics, each obtained by downdating the full-sample row sums in
//! `O(n)`.

use crate::data::{PairedSample, SampleMatrix, TwoSample};
use crate::error::{Error, Result};
use crate::decision::TestData;
use crate::estimators::{
    combine, homogeneity_rows, independence_rows, symmetry_rows, IndependenceComponents, IndependenceRows,
    KernelRows,
};
use crate::kernels::{gram_diff, Columns, KernelSpec};
use crate::sum::pairwise_sum;

fn require(n: usize, needed: usize) -> Result<()> {
    if n < needed {
        Err(Error::insufficient(needed, n))
    } else {
        Ok(())
    }
}

/// Raw (possibly slightly negative) quadratic-form variance from kernel row sums.
pub(crate) fn quadratic_form_var(rows: &KernelRows) -> f64 {
    let n = rows.rows.len() as f64;
    let squares: Vec<f64> = rows.rows.iter().map(|r| r * r).collect();
    let triple = pairwise_sum(&squares) - rows.sum_sq;
    let mean = rows.mean();
    4.0 * triple / (n * (n - 1.0) * (n - 2.0)) - 4.0 * mean * mean
}

pub fn symmetry_var(spec: &KernelSpec, x: &SampleMatrix) -> Result<f64> {
    require(x.n(), 3)?;
    let rows = &symmetry_rows(std::slice::from_ref(spec), x)[0];
    Ok(quadratic_form_var(rows).max(0.0))
}

pub fn homogeneity_var(spec: &KernelSpec, s: &TwoSample) -> Result<f64> {
    require(s.n(), 3)?;
    let rows = &homogeneity_rows(std::slice::from_ref(spec), s)[0];
    Ok(quadratic_form_var(rows).max(0.0))
}

/// Statistic and jackknife variance from a pairwise source `pq(i, j) = (P_ij, Q_ij)`,
/// queried for `i < j` only and twice per pair.
pub(crate) fn jackknife_with(n: usize, pq: impl Fn(usize, usize) -> (f64, f64)) -> (IndependenceComponents, f64) {
    let mut rows = IndependenceRows {
        a: vec![0.0; n],
        b: vec![0.0; n],
        c: vec![0.0; n],
    };
    for i in 0..n {
        for j in (i + 1)..n {
            let (p, q) = pq(i, j);
            rows.a[i] += p;
            rows.a[j] += p;
            rows.b[i] += q;
            rows.b[j] += q;
            rows.c[i] += p * q;
            rows.c[j] += p * q;
        }
    }
    // qa[m] = Σ_{i≠m} Q_im a_i and pb[m] = Σ_{i≠m} P_im b_i.
    let mut qa = vec![0.0; n];
    let mut pb = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (p, q) = pq(i, j);
            qa[i] += q * rows.a[j];
            qa[j] += q * rows.a[i];
            pb[i] += p * rows.b[j];
            pb[j] += p * rows.b[i];
        }
    }
    let full = rows.components();
    (full, downdated_jackknife(&rows, &qa, &pb))
}

fn downdated_jackknife(rows: &IndependenceRows, qa: &[f64], pb: &[f64]) -> f64 {
    let n = rows.a.len();
    let s1 = pairwise_sum(&rows.c);
    let s2 = pairwise_sum(&rows.a);
    let s3 = pairwise_sum(&rows.b);
    let per_i: Vec<f64> = (0..n).map(|i| rows.a[i] * rows.b[i] - rows.c[i]).collect();
    let s4 = pairwise_sum(&per_i);

    let m = (n - 1) as f64;
    let pairs = m * (m - 1.0);
    let triples = pairs * (m - 2.0);
    let loo: Vec<f64> = (0..n)
        .map(|k| {
            let u1 = (s1 - 2.0 * rows.c[k]) / pairs;
            let u2 = (s2 - 2.0 * rows.a[k]) / pairs;
            let u3 = (s3 - 2.0 * rows.b[k]) / pairs;
            let t4 = s4 - per_i[k] - qa[k] - pb[k] + 2.0 * rows.c[k];
            combine(u1, u2, u3, t4 / triples)
        })
        .collect();
    jackknife_spread(&loo)
}

/// `(n-1) Σ (h_i - mean h)²` for leave-one-out values `h_i`.
pub(crate) fn jackknife_spread(loo: &[f64]) -> f64 {
    let n = loo.len() as f64;
    let mean = pairwise_sum(loo) / n;
    let dev: Vec<f64> = loo.iter().map(|h| (h - mean) * (h - mean)).collect();
    (n - 1.0) * pairwise_sum(&dev)
}

/// Jackknife variance of the independence statistic, in `O(n²)` via downdating.
pub fn independence_var_jackknife(spec_p: &KernelSpec, spec_q: &KernelSpec, s: &PairedSample) -> Result<f64> {
    Ok(independence_stat_and_var(spec_p, spec_q, s)?.1)
}

/// Statistic and jackknife variance from one pair of cached Gram matrices.
pub fn independence_stat_and_var(
    spec_p: &KernelSpec,
    spec_q: &KernelSpec,
    s: &PairedSample,
) -> Result<(IndependenceComponents, f64)> {
    require(s.n(), 4)?;
    let gp = gram_diff(spec_p, &s.x);
    let gq = gram_diff(spec_q, &s.y);
    Ok(jackknife_with(s.n(), |i, j| (gp.diff.get(i, j), gq.diff.get(i, j))))
}

/// Statistic, raw variance estimate and (for independence) the U-components.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Estimate {
    pub statistic: f64,
    pub variance: f64,
    pub components: Option<IndependenceComponents>,
}

/// Statistics and variance estimates for several kernels from one pass over the pairs
/// (two passes for independence). Only the first kernel of each pair is used for the
/// symmetry and homogeneity hypotheses.
pub(crate) fn estimate_many(kernels: &[(KernelSpec, KernelSpec)], data: &TestData) -> Result<Vec<Estimate>> {
    let firsts = || kernels.iter().map(|k| k.0).collect::<Vec<_>>();
    let from_rows = |rows: Vec<KernelRows>| {
        rows.iter()
            .map(|r| Estimate {
                statistic: r.mean(),
                variance: quadratic_form_var(r),
                components: None,
            })
            .collect()
    };
    match data {
        TestData::Symmetry(x) => {
            require(x.n(), 3)?;
            Ok(from_rows(symmetry_rows(&firsts(), x)))
        }
        TestData::Homogeneity(s) => {
            require(s.n(), 3)?;
            Ok(from_rows(homogeneity_rows(&firsts(), s)))
        }
        TestData::Independence(s) => {
            require(s.n(), 4)?;
            Ok(independence_many(kernels, s))
        }
    }
}

fn independence_many(kernels: &[(KernelSpec, KernelSpec)], s: &PairedSample) -> Vec<Estimate> {
    let n = s.n();
    let rows = independence_rows(kernels, s);
    let mut qa = vec![vec![0.0; n]; kernels.len()];
    let mut pb = vec![vec![0.0; n]; kernels.len()];
    let (mut cx, mut cy) = (Columns::new(&s.x), Columns::new(&s.y));
    let (mut dx, mut dy) = (Vec::new(), Vec::new());
    let (mut kp, mut kq) = (vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        cx.sweep(s.x.row(i), i + 1, &mut dx);
        cy.sweep(s.y.row(i), i + 1, &mut dy);
        let m = dx.len();
        for (k, (sp, sq)) in kernels.iter().enumerate() {
            sp.eval_sq_slice(&dx, &mut kp[..m]);
            sq.eval_sq_slice(&dy, &mut kq[..m]);
            let r = &rows[k];
            let (qa, pb) = (&mut qa[k], &mut pb[k]);
            for j in 0..m {
                let (p, q) = (kp[j], kq[j]);
                let jj = i + 1 + j;
                qa[i] += q * r.a[jj];
                qa[jj] += q * r.a[i];
                pb[i] += p * r.b[jj];
                pb[jj] += p * r.b[i];
            }
        }
    }
    rows.iter()
        .zip(qa.iter().zip(&pb))
        .map(|(r, (qa, pb))| {
            let c = r.components();
            Estimate {
                statistic: c.stat,
                variance: downdated_jackknife(r, qa, pb),
                components: Some(c),
            }
        })
        .collect()
}
