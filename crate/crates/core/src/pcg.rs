//! Preconditioned conjugate gradient with a low-rank inverse preconditioner
//! `M = (A~^-1)_p + tau (I - V V^T)` built from the noisy matrix, and the
//! condition-number and iteration-count predictions that go with it.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::bounds::{eymn_bound_for, main_bound_for};
use crate::error::{Error, Result};
use crate::spectral::{SpectralData, SymMatrix};

/// `sum mu_i v_i v_i^T + tau (I - V V^T)` over the `p` smallest eigenpairs
/// of a positive definite matrix, with `mu_i = 1 / lambda_i`.
#[derive(Clone, Debug)]
pub struct LowRankPreconditioner {
    values: Vec<f64>,
    vectors: Mat<f64>,
    tau: f64,
}

impl LowRankPreconditioner {
    /// `tau = None` selects `1 / lambda_1`.
    pub fn new(spec: &SpectralData, p: usize, tau: Option<f64>) -> Result<Self> {
        spec.require_positive_definite()?;
        let n = spec.n();
        if p == 0 || p > n {
            return Err(Error::InvalidRank { p, n });
        }
        let tau = tau.unwrap_or(1.0 / spec.lambda(1));
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
        }
        // Descending order: the p smallest are the last p columns.
        let values = (n - p..n).map(|c| 1.0 / spec.eigenvalues()[c]).collect();
        let u = spec.vectors();
        let vectors = Mat::from_fn(n, p, |i, c| u.read(i, n - p + c));
        Ok(Self { values, vectors, tau })
    }

    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.len()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `M v` in `O(n p)`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.apply_with(v, &self.values, self.tau)
    }

    fn apply_with(&self, v: &[f64], weights: &[f64], tau: f64) -> Vec<f64> {
        let (n, p) = (self.n(), self.p());
        let mut out: Vec<f64> = v.iter().map(|x| tau * x).collect();
        for (c, &weight) in weights.iter().enumerate().take(p) {
            let col = self.vectors.col(c);
            let dot: f64 = (0..n).map(|i| col.read(i) * v[i]).sum();
            let w = (weight - tau) * dot;
            for (i, o) in out.iter_mut().enumerate() {
                *o += w * col.read(i);
            }
        }
        out
    }

    /// Dense `M^(1/2)`.
    pub fn sqrt_matrix(&self) -> SymMatrix {
        let n = self.n();
        let roots: Vec<f64> = self.values.iter().map(|m| m.sqrt()).collect();
        let st = self.tau.sqrt();
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                self.apply_with(&e, &roots, st)
            })
            .collect();
        let m = Mat::from_fn(n, n, |i, j| cols[j][i]);
        SymMatrix::symmetrized(m.as_ref())
    }

    /// Dense `M`.
    pub fn to_matrix(&self) -> SymMatrix {
        let n = self.n();
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                self.apply(&e)
            })
            .collect();
        let m = Mat::from_fn(n, n, |i, j| cols[j][i]);
        SymMatrix::symmetrized(m.as_ref())
    }
}

/// When to stop iterating.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StoppingRule {
    /// `||r_k|| / ||r_0|| <= eps`.
    #[default]
    RelativeResidual,
    /// `||x_k - x*||_A / ||x_0 - x*||_A <= eps`; needs the exact solution.
    RelativeANormError,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PcgOptions {
    pub eps: f64,
    pub max_iter: usize,
    pub stopping: StoppingRule,
    /// Exact solution, when known; enables A-norm error reporting.
    pub exact: Option<Vec<f64>>,
}

impl PcgOptions {
    pub fn new(eps: f64, max_iter: usize) -> Self {
        Self {
            eps,
            max_iter,
            stopping: StoppingRule::RelativeResidual,
            exact: None,
        }
    }

    pub fn with_exact(self, exact: Vec<f64>, stopping: StoppingRule) -> Self {
        Self {
            exact: Some(exact),
            stopping,
            ..self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PcgResult {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `||r_k|| / ||r_0||` for `k = 0..=iterations`.
    pub residual_history: Vec<f64>,
    /// `||x_k - x*||_A / ||x*||_A`, when the exact solution was given.
    pub a_norm_error_history: Option<Vec<f64>>,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned CG from `x0 = 0`; `m = None` runs plain CG.
pub fn pcg_solve(
    a: &SymMatrix,
    b: &[f64],
    m: Option<&LowRankPreconditioner>,
    eps: f64,
    max_iter: usize,
) -> Result<PcgResult> {
    pcg_solve_with(a, b, m, &PcgOptions::new(eps, max_iter))
}

/// Preconditioned CG with explicit options.
pub fn pcg_solve_with(
    a: &SymMatrix,
    b: &[f64],
    m: Option<&LowRankPreconditioner>,
    opts: &PcgOptions,
) -> Result<PcgResult> {
    let n = a.n();
    if b.len() != n || m.is_some_and(|m| m.n() != n) {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    if !(opts.eps > 0.0 && opts.eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0, 1), got {}",
            opts.eps
        )));
    }
    if opts.stopping == StoppingRule::RelativeANormError && opts.exact.is_none() {
        return Err(Error::InvalidArgument(
            "A-norm stopping needs the exact solution".into(),
        ));
    }
    let precondition = |r: &[f64]| m.map_or_else(|| r.to_vec(), |m| m.apply(r));
    let a_norm = |v: &[f64]| dot(v, &a.matvec(v)).max(0.0).sqrt();
    let exact = opts.exact.as_deref();
    let err_a = |x: &[f64]| -> Option<f64> {
        exact.map(|xs| {
            let d: Vec<f64> = x.iter().zip(xs).map(|(a, b)| a - b).collect();
            a_norm(&d)
        })
    };

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = dot(&r, &r).sqrt();
    let e0 = err_a(&x);
    let rel_err = |e: Option<f64>| -> Option<f64> {
        match (e, e0) {
            (Some(e), Some(e0)) if e0 > 0.0 => Some(e / e0),
            (Some(_), Some(_)) => Some(0.0),
            _ => None,
        }
    };
    let mut residual_history = vec![if r0 > 0.0 { 1.0 } else { 0.0 }];
    let mut err_history = e0.map(|_| vec![rel_err(e0).unwrap_or(0.0)]);
    let done = |res: f64, err: Option<f64>| match opts.stopping {
        StoppingRule::RelativeResidual => res <= opts.eps,
        StoppingRule::RelativeANormError => err.unwrap_or(0.0) <= opts.eps,
    };
    if r0 == 0.0 {
        return Ok(PcgResult {
            solution: x,
            iterations: 0,
            residual_history,
            a_norm_error_history: err_history,
            converged: true,
        });
    }

    let mut z = precondition(&r);
    let mut rz = dot(&r, &z);
    let mut p = z.clone();
    for it in 1..=opts.max_iter {
        if !(rz > 0.0) {
            return Err(Error::Breakdown { iteration: it });
        }
        let ap = a.matvec(&p);
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(Error::Breakdown { iteration: it });
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = dot(&r, &r).sqrt() / r0;
        residual_history.push(res);
        let err = rel_err(err_a(&x));
        if let (Some(h), Some(e)) = (err_history.as_mut(), err) {
            h.push(e);
        }
        if done(res, err) {
            return Ok(PcgResult {
                solution: x,
                iterations: it,
                residual_history,
                a_norm_error_history: err_history,
                converged: true,
            });
        }
        z = precondition(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(PcgResult {
        solution: x,
        iterations: opts.max_iter,
        residual_history,
        a_norm_error_history: err_history,
        converged: false,
    })
}

/// `ceil(sqrt(kappa) / 2 * ln(2 / eps))`, at least 1.
pub fn predicted_iterations(kappa: f64, eps: f64) -> usize {
    let k = (kappa.sqrt() / 2.0 * (2.0 / eps).ln()).ceil();
    (k as usize).max(1)
}

/// Which perturbation bound feeds the condition-number estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Main,
    Eymn,
}

/// `(1 + bound * lambda_1) / (tau * lambda_n)`.
pub fn kappa_bound(spec: &SpectralData, p: usize, e_norm: f64, tau: f64, which: BoundKind) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
    }
    let bound = match which {
        BoundKind::Main => main_bound_for(spec, p, e_norm)?,
        BoundKind::Eymn => eymn_bound_for(spec, p, e_norm)?,
    };
    let n = spec.n();
    Ok((1.0 + bound * spec.lambda(1)) / (tau * spec.lambda(n)))
}

/// `kappa(M A)` from the extreme eigenvalues of `M^(1/2) A M^(1/2)`.
pub fn kappa_measure(a: &SymMatrix, m: &LowRankPreconditioner) -> Result<f64> {
    if a.n() != m.n() {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    let s = m.sqrt_matrix();
    let prod = s.as_mat() * a.as_mat() * s.as_mat();
    let sym = SymMatrix::symmetrized(prod.as_ref());
    let ev = sym.as_mat().selfadjoint_eigenvalues(Side::Lower);
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if !(lo > 0.0) {
        return Err(Error::NotPositiveDefinite { min: lo });
    }
    Ok(hi / lo)
}
