//! Deterministic test matrices: the discretized harmonic oscillator,
//! prescribed spectra in a random basis, and two diagonal constructions where
//! low-rank inverse errors behave badly.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SymMatrix;

/// Grid and scaling of the discretized 1-D harmonic oscillator with
/// `hbar = m = 1`, truncated to `(-L, L)` with Dirichlet ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub n: usize,
    pub omega: f64,
    /// Natural length `sqrt(1 / omega)`.
    pub ell: f64,
    /// Domain half-width `L = 8 ell`.
    pub half_width: f64,
    /// Dimensionless mesh `dx / ell` with `dx = 2L / (n + 1)`.
    pub h: f64,
    /// `A = amplitude * sqrt(n) * H`.
    pub amplitude: f64,
}

impl HamiltonianParams {
    pub const DEFAULT_OMEGA: f64 = 4.0;
    pub const DEFAULT_AMPLITUDE: f64 = 4.0;

    pub fn new(n: usize) -> Self {
        Self::with_omega(n, Self::DEFAULT_OMEGA)
    }

    pub fn with_omega(n: usize, omega: f64) -> Self {
        let ell = (1.0 / omega).sqrt();
        let half_width = 8.0 * ell;
        let dx = 2.0 * half_width / (n as f64 + 1.0);
        Self {
            n,
            omega,
            ell,
            half_width,
            h: dx / ell,
            amplitude: Self::DEFAULT_AMPLITUDE,
        }
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        Self { amplitude, ..self }
    }

    /// Dimensionless interior grid point `xi_i = x_i / ell`, `i = 1..=n`.
    pub fn xi(&self, i: usize) -> f64 {
        let dx = self.h * self.ell;
        (-self.half_width + i as f64 * dx) / self.ell
    }
}

/// The oscillator Hamiltonian in units of `omega`: `(omega / 2)` times the
/// dimensionless stencil `diag(2/h^2 + xi^2)`, off-diagonal `-1/h^2`.
/// Its low eigenvalues approach `omega (i + 1/2)`, i.e. `4i + 2` at `omega = 4`.
pub fn hamiltonian_h(params: &HamiltonianParams) -> Result<SymMatrix> {
    let n = params.n;
    if n < 2 {
        return Err(Error::InvalidArgument("hamiltonian needs n >= 2".into()));
    }
    let unit = params.omega / 2.0;
    let inv_h2 = 1.0 / (params.h * params.h);
    Ok(SymMatrix::from_upper(n, |i, j| {
        if i == j {
            let xi = params.xi(i + 1);
            unit * (2.0 * inv_h2 + xi * xi)
        } else if j == i + 1 {
            -unit * inv_h2
        } else {
            0.0
        }
    }))
}

/// `A = amplitude * sqrt(n) * H`.
pub fn hamiltonian(params: &HamiltonianParams) -> Result<SymMatrix> {
    let h = hamiltonian_h(params)?;
    Ok(h.scaled(params.amplitude * (params.n as f64).sqrt()))
}

/// `Q diag(evals) Q^T` for a seeded random orthogonal `Q`; `Q = I` at seed 0.
pub fn synthetic_spectrum(evals: &[f64], seed: u64) -> Result<SymMatrix> {
    if evals.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(i) = evals.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col: i });
    }
    if seed == 0 {
        return Ok(SymMatrix::diag(evals));
    }
    let n = evals.len();
    let q = random_orthogonal(n, seed);
    let qd = Mat::from_fn(n, n, |i, j| q.read(i, j) * evals[j]);
    let a = &qd * q.transpose();
    Ok(SymMatrix::symmetrized(a.as_ref()))
}

/// Haar-like orthogonal matrix: QR of a seeded Gaussian matrix with the
/// signs of R's diagonal folded into Q.
pub fn random_orthogonal(n: usize, seed: u64) -> Mat<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g.write(i, j, rng.sample(StandardNormal));
        }
    }
    let qr = g.qr();
    let q = qr.compute_q();
    let r = qr.compute_r();
    Mat::from_fn(n, n, |i, j| {
        let s = if r.read(j, j) < 0.0 { -1.0 } else { 1.0 };
        q.read(i, j) * s
    })
}

/// A diagonal pair `(A, E)` stored as vectors so that large `n` stays cheap.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalPair {
    pub a: Vec<f64>,
    pub e: Vec<f64>,
}

impl DiagonalPair {
    pub fn perturbed(&self) -> Vec<f64> {
        self.a.iter().zip(&self.e).map(|(a, e)| a + e).collect()
    }

    pub fn a_matrix(&self) -> SymMatrix {
        SymMatrix::diag(&self.a)
    }

    pub fn e_matrix(&self) -> SymMatrix {
        SymMatrix::diag(&self.e)
    }

    /// `||(A+E)^-1_p - A^-1_p||`.
    pub fn low_rank_inverse_error(&self, p: usize) -> f64 {
        max_abs_diff(&truncate_inverse(&self.perturbed(), p), &truncate_inverse(&self.a, p))
    }

    /// `||(A+E)^-1 - A^-1||`.
    pub fn inverse_error(&self) -> f64 {
        let inv = |v: &[f64]| v.iter().map(|x| 1.0 / x).collect::<Vec<_>>();
        max_abs_diff(&inv(&self.perturbed()), &inv(&self.a))
    }

    /// `||(A+E)_p - A_p||` for the best rank-`p` approximations themselves.
    pub fn low_rank_error(&self, p: usize) -> f64 {
        max_abs_diff(&truncate(&self.perturbed(), p), &truncate(&self.a, p))
    }
}

fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}

/// Keep the `p` largest magnitudes.
fn truncate(d: &[f64], p: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&i, &j| d[j].abs().total_cmp(&d[i].abs()));
    let mut out = vec![0.0; d.len()];
    for &i in order.iter().take(p) {
        out[i] = d[i];
    }
    out
}

/// Inverse restricted to the `p` smallest magnitudes.
fn truncate_inverse(d: &[f64], p: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&i, &j| d[i].abs().total_cmp(&d[j].abs()));
    let mut out = vec![0.0; d.len()];
    for &i in order.iter().take(p) {
        out[i] = 1.0 / d[i];
    }
    out
}

/// Eigenvalue swap under a small gap.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapCounterexample {
    pub pair: DiagonalPair,
    /// `K = ceil(n^eps)`.
    pub k: f64,
    /// `||(A+E)^-1_1 - A^-1_1|| / ||(A+E)^-1 - A^-1||`, in closed form `(4K + 3) / 3`.
    pub expected_ratio: f64,
}

/// `A = diag((4K+1) sqrt n, 4K sqrt n, f, ..., f)`, `E = diag(sqrt n, 3 sqrt n, 0, ...)`
/// with `K = ceil(n^eps)`. The two perturbed entries swap order, so the
/// rank-1 inverse jumps to the other axis while the full inverse barely moves.
/// The filler `f = max(n, (4K+4) sqrt n)` keeps both small entries below it.
pub fn counterexample_swap(n: usize, eps: f64) -> Result<SwapCounterexample> {
    if n < 3 {
        return Err(Error::InvalidArgument("swap counterexample needs n >= 3".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps {eps} must lie in (0, 1)")));
    }
    let nf = n as f64;
    let s = nf.sqrt();
    let k = nf.powf(eps).ceil();
    let filler = nf.max((4.0 * k + 4.0) * s);
    let mut a = vec![filler; n];
    a[0] = (4.0 * k + 1.0) * s;
    a[1] = 4.0 * k * s;
    let mut e = vec![0.0; n];
    e[0] = s;
    e[1] = 3.0 * s;
    Ok(SwapCounterexample {
        pair: DiagonalPair { a, e },
        k,
        expected_ratio: (4.0 * k + 3.0) / 3.0,
    })
}

/// `A = diag(n, 1/(2 sqrt n), 1/sqrt n, ...)`, `E = diag(0, 1/(2 sqrt n), 1/sqrt n, ...)`:
/// the best rank-1 approximations agree exactly while the rank-1 inverses
/// differ by `sqrt n`.
pub fn counterexample_decouple(n: usize) -> Result<DiagonalPair> {
    if n < 3 {
        return Err(Error::InvalidArgument("decoupling counterexample needs n >= 3".into()));
    }
    let s = (n as f64).sqrt();
    let mut a = vec![1.0 / s; n];
    let mut e = vec![1.0 / s; n];
    a[0] = n as f64;
    e[0] = 0.0;
    a[1] = 0.5 / s;
    e[1] = 0.5 / s;
    Ok(DiagonalPair { a, e })
}
