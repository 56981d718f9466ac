//! Observation containers shared by every estimator.

use crate::error::{Error, Result};

/// An `n x d` block of finite observations stored row-major; rows are observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl SampleMatrix {
    /// Builds a sample from row-major values. Requires `n >= 2`, `d >= 1` and finite entries.
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Shape("sample must have at least one column".into()));
        }
        if values.len() != n * d {
            return Err(Error::Shape(format!(
                "expected {} values for a {n}x{d} sample, got {}",
                n * d,
                values.len()
            )));
        }
        if n < 2 {
            return Err(Error::insufficient(2, n));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InputDomain(format!(
                "non-finite entry {} at row {}, column {}",
                values[pos],
                pos / d,
                pos % d
            )));
        }
        Ok(Self { n, d, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::Shape(format!(
                "row {bad} has {} columns, expected {d}",
                rows[bad].len()
            )));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    /// Univariate convenience constructor.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    /// Every entry negated (reflection through the origin).
    pub fn negated(&self) -> Self {
        Self {
            n: self.n,
            d: self.d,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// Rows reordered so that row `k` of the result is row `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n, "permutation length must equal n");
        let mut values = Vec::with_capacity(self.values.len());
        for &i in perm {
            values.extend_from_slice(self.row(i));
        }
        Self {
            n: self.n,
            d: self.d,
            values,
        }
    }

    /// Rows with index `skip` removed. Panics if that would leave fewer than two rows.
    pub fn without_row(&self, skip: usize) -> Self {
        assert!(self.n > 2, "cannot drop a row from a two-row sample");
        let values = self
            .rows()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .flat_map(|(_, r)| r.iter().copied())
            .collect();
        Self {
            n: self.n - 1,
            d: self.d,
            values,
        }
    }

    /// Splits columns at `p`: the first `p` columns and the remainder.
    pub fn split_columns(&self, p: usize) -> Result<(Self, Self)> {
        if p == 0 || p >= self.d {
            return Err(Error::Shape(format!(
                "split point {p} must lie strictly between 0 and {}",
                self.d
            )));
        }
        let q = self.d - p;
        let mut left = Vec::with_capacity(self.n * p);
        let mut right = Vec::with_capacity(self.n * q);
        for r in self.rows() {
            left.extend_from_slice(&r[..p]);
            right.extend_from_slice(&r[p..]);
        }
        Ok((
            Self {
                n: self.n,
                d: p,
                values: left,
            },
            Self {
                n: self.n,
                d: q,
                values: right,
            },
        ))
    }

    /// Column means, mostly for diagnostics and sampler checks.
    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for r in self.rows() {
            for (acc, v) in m.iter_mut().zip(r) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.n as f64);
        m
    }
}

/// Two independent samples of equal size and dimension (balanced design).
#[derive(Debug, Clone)]
pub struct TwoSample {
    pub x: SampleMatrix,
    pub y: SampleMatrix,
}

impl TwoSample {
    pub fn new(x: SampleMatrix, y: SampleMatrix) -> Result<Self> {
        if x.n() != y.n() || x.d() != y.d() {
            return Err(Error::Shape(format!(
                "two-sample design needs equal shapes, got {}x{} and {}x{}",
                x.n(),
                x.d(),
                y.n(),
                y.d()
            )));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

/// Paired observations `(x_i, y_i)`; the blocks may differ in dimension.
#[derive(Debug, Clone)]
pub struct PairedSample {
    pub x: SampleMatrix,
    pub y: SampleMatrix,
}

impl PairedSample {
    pub fn new(x: SampleMatrix, y: SampleMatrix) -> Result<Self> {
        if x.n() != y.n() {
            return Err(Error::Shape(format!(
                "paired sample needs equal row counts, got {} and {}",
                x.n(),
                y.n()
            )));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    /// Joint row permutation, keeping pairs intact.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            x: self.x.permuted(perm),
            y: self.y.permuted(perm),
        }
    }

    pub fn without_row(&self, skip: usize) -> Self {
        Self {
            x: self.x.without_row(skip),
            y: self.y.without_row(skip),
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}
