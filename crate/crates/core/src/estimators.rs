//! U-statistic estimators of the symmetry, homogeneity and independence distances.
//!
//! Each statistic is assembled from per-observation row sums of its kernel matrix. The
//! row sums are produced in a single pass over the upper triangle of pairs and are shared
//! with the variance estimators, so a full test costs one `O(n²)` sweep.

use crate::data::{PairedSample, SampleMatrix, TwoSample};
use crate::error::{Error, Result};
use crate::kernels::{eval_kernel, Columns, KernelSpec};
use crate::sum::pairwise_sum;
use serde::Serialize;

/// The four U-statistics behind the independence distance and `h(u) = u1 + u2 u3 - 2 u4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndependenceComponents {
    /// Mean over `i != j` of `Cp(x_i - x_j) Cq(y_i - y_j)`.
    pub u1: f64,
    /// Mean over `i != j` of `Cp(x_i - x_j)`.
    pub u2: f64,
    /// Mean over `i != j` of `Cq(y_i - y_j)`.
    pub u3: f64,
    /// Mean over pairwise-distinct `(i, j, k)` of `Cp(x_i - x_j) Cq(y_i - y_k)`.
    pub u4: f64,
    pub stat: f64,
}

impl IndependenceComponents {
    pub fn from_u(u1: f64, u2: f64, u3: f64, u4: f64) -> Self {
        Self {
            u1,
            u2,
            u3,
            u4,
            stat: combine(u1, u2, u3, u4),
        }
    }
}

#[inline]
pub(crate) fn combine(u1: f64, u2: f64, u3: f64, u4: f64) -> f64 {
    u1 + u2 * u3 - 2.0 * u4
}

/// Row sums `r_i = Σ_{j≠i} ψ(z_i, z_j)` of a symmetric degree-2 kernel and `Σ_{i≠j} ψ²`.
#[derive(Debug, Clone)]
pub(crate) struct KernelRows {
    pub rows: Vec<f64>,
    pub sum_sq: f64,
}

impl KernelRows {
    fn zeros(n: usize) -> Self {
        Self {
            rows: vec![0.0; n],
            sum_sq: 0.0,
        }
    }

    /// The U-statistic `Σ_{i≠j} ψ / (n(n-1))`.
    pub fn mean(&self) -> f64 {
        let n = self.rows.len() as f64;
        pairwise_sum(&self.rows) / (n * (n - 1.0))
    }
}

/// Per-observation sums for the independence statistic:
/// `a_i = Σ_{j≠i} P_ij`, `b_i = Σ_{j≠i} Q_ij`, `c_i = Σ_{j≠i} P_ij Q_ij`.
#[derive(Debug, Clone)]
pub(crate) struct IndependenceRows {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl IndependenceRows {
    fn zeros(n: usize) -> Self {
        Self {
            a: vec![0.0; n],
            b: vec![0.0; n],
            c: vec![0.0; n],
        }
    }

    pub fn components(&self) -> IndependenceComponents {
        let n = self.a.len() as f64;
        let pairs = n * (n - 1.0);
        let s1 = pairwise_sum(&self.c);
        let s2 = pairwise_sum(&self.a);
        let s3 = pairwise_sum(&self.b);
        let triple: Vec<f64> = (0..self.a.len())
            .map(|i| self.a[i] * self.b[i] - self.c[i])
            .collect();
        let s4 = pairwise_sum(&triple);
        IndependenceComponents::from_u(s1 / pairs, s2 / pairs, s3 / pairs, s4 / (pairs * (n - 2.0)))
    }
}

fn require(n: usize, needed: usize) -> Result<()> {
    if n < needed {
        Err(Error::insufficient(needed, n))
    } else {
        Ok(())
    }
}

/// Row sums of `ψ^S(x, x') = {C(x - x') - C(x + x')}/2` for several kernels at once.
pub(crate) fn symmetry_rows(specs: &[KernelSpec], x: &SampleMatrix) -> Vec<KernelRows> {
    let n = x.n();
    let mut out: Vec<KernelRows> = specs.iter().map(|_| KernelRows::zeros(n)).collect();
    let mut cols = Columns::new(x);
    let (mut dd, mut ds) = (Vec::new(), Vec::new());
    let (mut kd, mut ks) = (vec![0.0; n], vec![0.0; n]);
    let mut neg = vec![0.0; x.d()];
    for i in 0..n {
        let xi = x.row(i);
        neg.iter_mut().zip(xi).for_each(|(m, v)| *m = -v);
        cols.sweep(xi, i + 1, &mut dd);
        cols.sweep(&neg, i + 1, &mut ds);
        let m = dd.len();
        for (spec, acc) in specs.iter().zip(out.iter_mut()) {
            spec.eval_sq_slice(&dd, &mut kd[..m]);
            spec.eval_sq_slice(&ds, &mut ks[..m]);
            let (head, tail) = acc.rows.split_at_mut(i + 1);
            let ri = &mut head[i];
            for ((rj, &a), &b) in tail.iter_mut().zip(&kd[..m]).zip(&ks[..m]) {
                let psi = 0.5 * (a - b);
                *ri += psi;
                *rj += psi;
                acc.sum_sq += 2.0 * psi * psi;
            }
        }
    }
    out
}

/// Row sums of `ψ^H(z, z') = C(x - x') + C(y - y') - C(x - y') - C(x' - y)`.
pub(crate) fn homogeneity_rows(specs: &[KernelSpec], s: &TwoSample) -> Vec<KernelRows> {
    let n = s.n();
    let (x, y) = (&s.x, &s.y);
    let mut out: Vec<KernelRows> = specs.iter().map(|_| KernelRows::zeros(n)).collect();
    let (mut cx, mut cy) = (Columns::new(x), Columns::new(y));
    let mut d = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let (xi, yi) = (x.row(i), y.row(i));
        cx.sweep(xi, i + 1, &mut d[0]);
        cy.sweep(yi, i + 1, &mut d[1]);
        cy.sweep(xi, i + 1, &mut d[2]);
        cx.sweep(yi, i + 1, &mut d[3]);
        let m = d[0].len();
        for (spec, acc) in specs.iter().zip(out.iter_mut()) {
            for (dv, kv) in d.iter().zip(k.iter_mut()) {
                spec.eval_sq_slice(dv, &mut kv[..m]);
            }
            let (head, tail) = acc.rows.split_at_mut(i + 1);
            let ri = &mut head[i];
            for (j, rj) in tail.iter_mut().enumerate() {
                let psi = k[0][j] + k[1][j] - k[2][j] - k[3][j];
                *ri += psi;
                *rj += psi;
                acc.sum_sq += 2.0 * psi * psi;
            }
        }
    }
    out
}

/// Independence row sums for several `(Cp, Cq)` kernel pairs at once.
pub(crate) fn independence_rows(specs: &[(KernelSpec, KernelSpec)], s: &PairedSample) -> Vec<IndependenceRows> {
    let n = s.n();
    let mut out: Vec<IndependenceRows> = specs.iter().map(|_| IndependenceRows::zeros(n)).collect();
    let (mut cx, mut cy) = (Columns::new(&s.x), Columns::new(&s.y));
    let (mut dx, mut dy) = (Vec::new(), Vec::new());
    let (mut kp, mut kq) = (vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        cx.sweep(s.x.row(i), i + 1, &mut dx);
        cy.sweep(s.y.row(i), i + 1, &mut dy);
        let m = dx.len();
        for ((sp, sq), acc) in specs.iter().zip(out.iter_mut()) {
            sp.eval_sq_slice(&dx, &mut kp[..m]);
            sq.eval_sq_slice(&dy, &mut kq[..m]);
            for j in 0..m {
                let (p, q) = (kp[j], kq[j]);
                let pq = p * q;
                let jj = i + 1 + j;
                acc.a[i] += p;
                acc.a[jj] += p;
                acc.b[i] += q;
                acc.b[jj] += q;
                acc.c[i] += pq;
                acc.c[jj] += pq;
            }
        }
    }
    out
}

/// Symmetry distance estimate
/// `(1/(2n(n-1))) Σ_{i≠j} {C(x_i - x_j) - C(x_i + x_j)}`.
///
/// Unbiased, hence possibly negative for nearly symmetric data.
pub fn symmetry_stat(spec: &KernelSpec, x: &SampleMatrix) -> Result<f64> {
    require(x.n(), 2)?;
    Ok(symmetry_rows(std::slice::from_ref(spec), x)[0].mean())
}

/// Homogeneity distance estimate
/// `(1/(n(n-1))) Σ_{i≠j} {C(x_i - x_j) + C(y_i - y_j) - 2 C(x_i - y_j)}`.
pub fn homogeneity_stat(spec: &KernelSpec, s: &TwoSample) -> Result<f64> {
    require(s.n(), 2)?;
    Ok(homogeneity_rows(std::slice::from_ref(spec), s)[0].mean())
}

/// Independence distance estimate `h(U_n) = U_1 + U_2 U_3 - 2 U_4`, in `O(n²)`.
///
/// The degree-3 term uses the identity
/// `Σ_{i,j,k distinct} P_ij Q_ik = Σ_i (a_i b_i - c_i)` with the row sums of
/// [`IndependenceRows`].
pub fn independence_stat(
    spec_p: &KernelSpec,
    spec_q: &KernelSpec,
    s: &PairedSample,
) -> Result<IndependenceComponents> {
    require(s.n(), 3)?;
    Ok(independence_rows(&[(*spec_p, *spec_q)], s)[0].components())
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(u, v)| u - v).collect()
}

/// Cubic-time reference for [`independence_stat`]: explicit loops over all ordered
/// pairs and pairwise-distinct triples. Meant for `n` up to a few hundred.
pub fn independence_stat_bruteforce(
    spec_p: &KernelSpec,
    spec_q: &KernelSpec,
    s: &PairedSample,
) -> Result<IndependenceComponents> {
    let n = s.n();
    require(n, 3)?;
    let cp = |i: usize, j: usize| eval_kernel(spec_p, &diff(s.x.row(i), s.x.row(j)));
    let cq = |i: usize, j: usize| eval_kernel(spec_q, &diff(s.y.row(i), s.y.row(j)));

    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let p = cp(i, j)?;
            let q = cq(i, j)?;
            s1 += p * q;
            s2 += p;
            s3 += q;
            for k in 0..n {
                if k != i && k != j {
                    s4 += p * cq(i, k)?;
                }
            }
        }
    }
    let nf = n as f64;
    let pairs = nf * (nf - 1.0);
    Ok(IndependenceComponents::from_u(
        s1 / pairs,
        s2 / pairs,
        s3 / pairs,
        s4 / (pairs * (nf - 2.0)),
    ))
}
