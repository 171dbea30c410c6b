//! Dense symmetric matrices, their eigendecomposition, and every quantity
//! derived from the spectrum: gaps, best low-rank inverses, the signed window
//! of smallest magnitudes, doubling distance, interaction parameter.
//!
//! Index conventions: eigenvalues are stored in descending order. Methods
//! named after spectral quantities (`lambda`, `gap`, `sigma`) take 1-based
//! indices so that `lambda(n)` is the smallest eigenvalue and `lambda(0)` is
//! `+inf`. Raw slices and column accessors are 0-based.

use std::ops::RangeInclusive;

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Relative tolerance under which two adjacent eigenvalues count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Dense real symmetric matrix. Symmetry is exact: `a[i][j] == a[j][i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    data: Mat<f64>,
}

impl SymMatrix {
    /// Validates `data` as square, finite and exactly symmetric.
    pub fn new(data: Mat<f64>) -> Result<Self> {
        let n = data.nrows();
        if n == 0 {
            return Err(Error::Empty);
        }
        if data.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "matrix is {}x{}, expected square",
                n,
                data.ncols()
            )));
        }
        for j in 0..n {
            for i in 0..n {
                let v = data.read(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if i > j && v != data.read(j, i) {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { data })
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle
    /// (`i <= j`) and mirrored.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(n > 0, "dimension must be positive");
        let mut data = Mat::<f64>::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = f(i, j);
                data.write(i, j, v);
                data.write(j, i, v);
            }
        }
        Self { data }
    }

    /// Symmetrizes an almost-symmetric product as `(m + m^T) / 2`.
    pub fn symmetrized(m: MatRef<'_, f64>) -> Self {
        let n = m.nrows();
        Self::from_upper(n, |i, j| 0.5 * (m.read(i, j) + m.read(j, i)))
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_upper(n, |_, _| 0.0)
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(values: &[f64]) -> Self {
        Self::from_upper(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data.read(i, j)
    }

    pub fn as_mat(&self) -> MatRef<'_, f64> {
        self.data.as_ref()
    }

    pub fn into_mat(self) -> Mat<f64> {
        self.data
    }

    /// Entrywise sum; symmetric because addition commutes.
    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n(), other.n(), "dimension mismatch");
        Self {
            data: &self.data + &other.data,
        }
    }

    pub fn scaled(&self, c: f64) -> SymMatrix {
        Self::from_upper(self.n(), |i, j| c * self.get(i, j))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(x.len(), n, "dimension mismatch");
        (0..n)
            .map(|i| (0..n).map(|j| self.data.read(i, j) * x[j]).sum())
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        let n = self.n();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.get(i, j).abs());
            }
        }
        m
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.n();
        (0..n).all(|j| (0..n).all(|i| i == j || self.get(i, j) == 0.0))
    }
}

/// Eigendecomposition `A = U diag(lambda) U^T` with eigenvalues descending,
/// plus the permutation that sorts them by magnitude.
#[derive(Clone, Debug)]
pub struct SpectralData {
    values: Vec<f64>,
    vectors: Mat<f64>,
    // by_magnitude[q] is the 0-based eigen index of the (q+1)-th smallest |lambda|.
    by_magnitude: Vec<usize>,
}

/// Decomposes a symmetric matrix with the dense solver.
pub fn decompose(a: &SymMatrix) -> Result<SpectralData> {
    let n = a.n();
    for j in 0..n {
        for i in 0..n {
            if !a.get(i, j).is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    let evd = a.as_mat().selfadjoint_eigendecomposition(Side::Lower);
    let s = evd.s().column_vector();
    let u = evd.u();
    let values: Vec<f64> = (0..n).rev().map(|i| s.read(i)).collect();
    let vectors = Mat::from_fn(n, n, |i, c| u.read(i, n - 1 - c));
    Ok(SpectralData::from_parts(values, vectors))
}

/// Eigenvalues only, descending.
pub fn eigenvalues(a: &SymMatrix) -> Result<Vec<f64>> {
    let n = a.n();
    for j in 0..n {
        for i in 0..n {
            if !a.get(i, j).is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    let mut v = a.as_mat().selfadjoint_eigenvalues(Side::Lower);
    v.reverse();
    Ok(v)
}

impl SpectralData {
    /// Assembles from descending eigenvalues and matching eigenvector columns.
    pub fn from_parts(values: Vec<f64>, vectors: Mat<f64>) -> Self {
        assert_eq!(values.len(), vectors.ncols());
        let mut by_magnitude: Vec<usize> = (0..values.len()).collect();
        by_magnitude.sort_by(|&x, &y| values[x].abs().total_cmp(&values[y].abs()));
        Self {
            values,
            vectors,
            by_magnitude,
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Eigenvalues in descending order, 0-based.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvector matrix; column `c` pairs with `eigenvalues()[c]`.
    pub fn vectors(&self) -> MatRef<'_, f64> {
        self.vectors.as_ref()
    }

    /// `lambda_i` for 1-based `i`; `lambda(0)` is `+inf`.
    pub fn lambda(&self, i: usize) -> f64 {
        if i == 0 {
            f64::INFINITY
        } else {
            self.values[i - 1]
        }
    }

    /// Largest eigenvalue magnitude.
    pub fn norm(&self) -> f64 {
        self.values
            .first()
            .map(|&a| a.abs())
            .unwrap_or(0.0)
            .max(self.values.last().map(|&b| b.abs()).unwrap_or(0.0))
    }

    /// Eigengap `lambda_k - lambda_{k+1}` for 1-based `k` in `0..n`.
    /// `gap(0)` is `+inf`; adjacent values equal to relative 1e-12 give 0.
    pub fn gap(&self, k: usize) -> Result<f64> {
        let n = self.n();
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, n });
        }
        if k == 0 {
            return Ok(f64::INFINITY);
        }
        Ok(tied_difference(self.values[k - 1], self.values[k]))
    }

    /// Like [`gap`](Self::gap) but also returns `+inf` at `k = n`.
    pub(crate) fn gap_or_inf(&self, k: usize) -> f64 {
        if k == 0 || k >= self.n() {
            f64::INFINITY
        } else {
            tied_difference(self.values[k - 1], self.values[k])
        }
    }

    /// `sigma_j` for 1-based `j`: singular values with `sigma_1` largest and
    /// `sigma_n` smallest.
    pub fn sigma(&self, j: usize) -> f64 {
        let n = self.n();
        assert!((1..=n).contains(&j), "singular index out of range");
        self.values[self.by_magnitude[n - j]].abs()
    }

    /// The magnitude permutation: `magnitude_order()[q]` is the 0-based index of
    /// the eigenvalue with the `(q+1)`-th smallest magnitude.
    pub fn magnitude_order(&self) -> &[usize] {
        &self.by_magnitude
    }

    /// 0-based eigen indices of the `p` smallest magnitudes.
    pub fn smallest_magnitudes(&self, p: usize) -> &[usize] {
        &self.by_magnitude[..p]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.values.last().is_some_and(|&v| v > 0.0)
    }

    pub(crate) fn require_positive_definite(&self) -> Result<()> {
        if self.is_positive_definite() {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite {
                min: self.values.last().copied().unwrap_or(f64::NAN),
            })
        }
    }

    fn check_rank(&self, p: usize) -> Result<()> {
        if p == 0 || p > self.n() {
            Err(Error::InvalidRank { p, n: self.n() })
        } else {
            Ok(())
        }
    }

    /// Reconstructs `U diag(lambda) U^T`.
    pub fn reconstruct(&self) -> SymMatrix {
        let all: Vec<usize> = (0..self.n()).collect();
        let vals = self.values.clone();
        outer_sum(self.vectors(), &all, &vals)
    }

    /// Best rank-`p` approximation of the inverse: sum over the `p` smallest
    /// magnitudes of `u u^T / lambda`.
    pub fn low_rank_inverse(&self, p: usize) -> Result<SymMatrix> {
        self.check_rank(p)?;
        let sel = self.smallest_magnitudes(p);
        let w = inverse_weights(&self.values, sel)?;
        Ok(outer_sum(self.vectors(), sel, &w))
    }

    /// Best rank-`p` approximation of the matrix itself (largest magnitudes).
    pub fn low_rank_approx(&self, p: usize) -> Result<SymMatrix> {
        self.check_rank(p)?;
        let n = self.n();
        let sel = &self.by_magnitude[n - p..];
        let w: Vec<f64> = sel.iter().map(|&i| self.values[i]).collect();
        Ok(outer_sum(self.vectors(), sel, &w))
    }

    /// Bookkeeping of the smallest-magnitude window for indefinite spectra.
    pub fn signed_indexing(&self, p: usize) -> Result<SignedIndexing> {
        self.check_rank(p)?;
        let n = self.n();
        if let Some(i) = self.values.iter().position(|&v| v == 0.0) {
            return Err(Error::Singular { index: i + 1 });
        }
        let k = self.values.iter().filter(|&&v| v > 0.0).count();
        if p < n {
            let inside = self.values[self.by_magnitude[p - 1]];
            let outside = self.values[self.by_magnitude[p]];
            if inside.signum() != outside.signum() && tied_difference(inside.abs(), outside.abs()) == 0.0 {
                return Err(Error::AmbiguousIndexing { p });
            }
        }
        let sel = self.smallest_magnitudes(p);
        let k1 = sel.iter().filter(|&&i| self.values[i] > 0.0).count();
        // 0-based window [k - k1, k + p - k1).
        let lo = k - k1;
        let mut sorted = sel.to_vec();
        sorted.sort_unstable();
        if sorted.iter().enumerate().any(|(q, &i)| i != lo + q) {
            return Err(Error::AmbiguousIndexing { p });
        }
        Ok(SignedIndexing { k, k1, p })
    }

    /// Doubling distance of the spectrum relative to rank `p`.
    pub fn doubling_distance(&self, p: usize) -> Result<DoublingDistance> {
        let idx = self.signed_indexing(p)?;
        let n = self.n();
        let (k, k1) = (idx.k, idx.k1);
        let abs_lambda = |i: usize| -> f64 {
            if i == 0 || i > n {
                f64::INFINITY
            } else {
                self.values[i - 1].abs()
            }
        };
        // Smallest r in start..=cap with 2 * reference <= |lambda(at(r))|, and
        // whether only the infinite sentinel past the spectrum satisfied it.
        let scan = |start: usize, cap: usize, reference: f64, at: &dyn Fn(usize) -> usize| {
            let r = (start..=cap)
                .find(|&r| 2.0 * reference <= abs_lambda(at(r)))
                .unwrap_or(cap);
            let i = at(r);
            (r, i == 0 || i > n)
        };
        let (r1, r2, r, saturated) = if k == n {
            let (r, sat) = scan(p, n, self.lambda(n - p + 1), &|r| n - r);
            (r, 0, r, sat && p < n)
        } else if k == 0 {
            let (r, sat) = scan(p, n, abs_lambda(p), &|r| r + 1);
            (0, r, r, sat && p < n)
        } else {
            let ref_pos = if k1 > 0 {
                self.lambda(k - k1 + 1)
            } else {
                self.lambda(k)
            };
            let (r1, sat1) = scan(k1.max(1), k, ref_pos, &|r| k - r);
            let m = p - k1;
            let ref_neg = if m > 0 { abs_lambda(k + m) } else { abs_lambda(k + 1) };
            let (r2, sat2) = scan(m.max(1), n - k, ref_neg, &|r| k + r + 1);
            (r1, r2, r1.min(r2), sat1 && sat2)
        };
        let window = (k + 1 - r1, k + r2);
        Ok(DoublingDistance {
            r,
            r1,
            r2,
            window,
            saturated,
        })
    }

    /// `max |u_i^T E u_j|` over the 1-based index window.
    pub fn interaction_param(&self, e: &SymMatrix, window: RangeInclusive<usize>) -> Result<f64> {
        let n = self.n();
        if e.n() != n {
            return Err(Error::InvalidArgument("dimension mismatch".into()));
        }
        if window.is_empty() {
            return Err(Error::InvalidArgument("empty window".into()));
        }
        if *window.start() == 0 || *window.end() > n {
            return Err(Error::IndexOutOfRange {
                index: *window.end(),
                n,
            });
        }
        let cols: Vec<usize> = window.map(|i| i - 1).collect();
        let v = Mat::from_fn(n, cols.len(), |i, c| self.vectors.read(i, cols[c]));
        let ev = e.as_mat() * &v;
        let proj = v.transpose() * &ev;
        let mut m = 0.0f64;
        for j in 0..cols.len() {
            for i in 0..cols.len() {
                m = m.max(proj.read(i, j).abs());
            }
        }
        Ok(m)
    }

    /// Soft effective rank of the inverse: `sum_i lambda_n / lambda_i`.
    pub fn stable_rank(&self) -> Result<f64> {
        self.require_positive_definite()?;
        let ln = self.lambda(self.n());
        Ok(self.values.iter().map(|&l| ln / l).sum())
    }

    /// Smallest `p` with `lambda_n / lambda_{n-p} < threshold`, or `n`.
    pub fn select_p(&self, threshold: f64) -> Result<usize> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "threshold {threshold} must lie in (0, 1)"
            )));
        }
        self.require_positive_definite()?;
        let n = self.n();
        let ln = self.lambda(n);
        Ok((1..n).find(|&p| ln / self.lambda(n - p) < threshold).unwrap_or(n))
    }
}

/// Signed bookkeeping of the `p` smallest-magnitude eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedIndexing {
    /// Number of strictly positive eigenvalues.
    pub k: usize,
    /// Number of positive eigenvalues among the selected ones.
    pub k1: usize,
    pub p: usize,
}

impl SignedIndexing {
    /// 1-based eigen indices of the selected window.
    pub fn window(&self) -> RangeInclusive<usize> {
        (self.k - self.k1 + 1)..=(self.k + self.p - self.k1)
    }

    pub fn has_positive_side(&self) -> bool {
        self.k1 > 0
    }

    pub fn has_negative_side(&self) -> bool {
        self.k1 < self.p
    }
}

/// Doubling distance and the index window it induces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DoublingDistance {
    pub r: usize,
    /// Positive-side offset (equals `r` for positive definite spectra).
    pub r1: usize,
    /// Negative-side offset (0 for positive definite spectra).
    pub r2: usize,
    /// 1-based inclusive index window `(k - r1 + 1, k + r2)`.
    pub window: (usize, usize),
    /// No index satisfied the doubling condition before the end of the spectrum.
    pub saturated: bool,
}

impl DoublingDistance {
    pub fn window_range(&self) -> RangeInclusive<usize> {
        self.window.0..=self.window.1
    }

    pub fn window_len(&self) -> usize {
        self.window.1 + 1 - self.window.0
    }
}

fn tied_difference(a: f64, b: f64) -> f64 {
    let d = a - b;
    if d.abs() <= TIE_TOLERANCE * a.abs().max(b.abs()) {
        0.0
    } else {
        d
    }
}

fn inverse_weights(values: &[f64], sel: &[usize]) -> Result<Vec<f64>> {
    sel.iter()
        .map(|&i| {
            if values[i] == 0.0 {
                Err(Error::Singular { index: i + 1 })
            } else {
                Ok(1.0 / values[i])
            }
        })
        .collect()
}

/// `sum_c w[c] u_{sel[c]} u_{sel[c]}^T`, symmetrized.
fn outer_sum(u: MatRef<'_, f64>, sel: &[usize], w: &[f64]) -> SymMatrix {
    let n = u.nrows();
    let v = Mat::from_fn(n, sel.len(), |i, c| u.read(i, sel[c]));
    let vw = Mat::from_fn(n, sel.len(), |i, c| v.read(i, c) * w[c]);
    let x = &vw * v.transpose();
    SymMatrix::symmetrized(x.as_ref())
}

/// Spectral norm of `U diag(du) U^T - V diag(dv) V^T` without forming the
/// n x n difference: both terms live in the column span of `[U V]`.
pub fn factored_difference_norm(u: MatRef<'_, f64>, du: &[f64], v: MatRef<'_, f64>, dv: &[f64]) -> f64 {
    let n = u.nrows();
    let (p, q) = (u.ncols(), v.ncols());
    if p + q == 0 {
        return 0.0;
    }
    let b = Mat::from_fn(n, p + q, |i, c| if c < p { u.read(i, c) } else { v.read(i, c - p) });
    let r = b.qr().compute_thin_r();
    let w: Vec<f64> = du.iter().copied().chain(dv.iter().map(|&x| -x)).collect();
    let rw = Mat::from_fn(r.nrows(), p + q, |i, c| r.read(i, c) * w[c]);
    let core = &rw * r.transpose();
    let core = SymMatrix::symmetrized(core.as_ref());
    core.as_mat()
        .selfadjoint_eigenvalues(Side::Lower)
        .into_iter()
        .fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `||(B^-1)_p - (A^-1)_p||` from the two decompositions.
pub fn low_rank_inverse_distance(a: &SpectralData, b: &SpectralData, p: usize) -> Result<f64> {
    a.check_rank(p)?;
    b.check_rank(p)?;
    let pick = |s: &SpectralData| -> Result<(Mat<f64>, Vec<f64>)> {
        let sel = s.smallest_magnitudes(p);
        let w = inverse_weights(&s.values, sel)?;
        let m = Mat::from_fn(s.n(), p, |i, c| s.vectors.read(i, sel[c]));
        Ok((m, w))
    };
    let (ub, wb) = pick(b)?;
    let (ua, wa) = pick(a)?;
    Ok(factored_difference_norm(ub.as_ref(), &wb, ua.as_ref(), &wa))
}
