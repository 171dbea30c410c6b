//! Closed-form error certificates for `||(A+E)^-1_p - A^-1_p||` and the gap
//! conditions under which they hold.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{DoublingDistance, SignedIndexing, SpectralData};

/// Gaps below this fraction of the spectral norm are treated as degenerate.
pub const DEGENERATE_GAP_REL: f64 = 1e-9;

/// Which gap condition to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    PositiveDefinite,
    Symmetric,
}

/// Gap-condition record for one `(A, ||E||, p)` instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Admissibility {
    pub e_norm: f64,
    /// Smallest eigenvalue (positive definite) or smallest magnitude (symmetric).
    pub lambda_n: f64,
    /// Eigengap at the truncation, or the smaller of the two signed gaps.
    pub gap: f64,
    /// Singular-value gap at the truncation; symmetric variant only.
    pub sv_gap: Option<f64>,
    pub satisfied: bool,
    /// `min(lambda_n, gap) / (4 ||E||)`; `+inf` for zero noise.
    pub margin: f64,
}

/// All bound values for one instance, with the measured error when known.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub eymn: Option<f64>,
    pub main: f64,
    pub refined: Option<f64>,
    pub admissibility: Admissibility,
    pub actual_error: Option<f64>,
    pub ratio_eymn_main: Option<f64>,
    pub ratio_actual_main: Option<f64>,
}

impl BoundReport {
    pub fn new(
        eymn: Option<f64>,
        main: f64,
        refined: Option<f64>,
        admissibility: Admissibility,
        actual_error: Option<f64>,
    ) -> Self {
        Self {
            ratio_eymn_main: eymn.map(|v| v / main),
            ratio_actual_main: actual_error.map(|v| v / main),
            eymn,
            main,
            refined,
            admissibility,
            actual_error,
        }
    }
}

fn margin(limit: f64, e_norm: f64) -> f64 {
    if e_norm == 0.0 {
        f64::INFINITY
    } else {
        limit / (4.0 * e_norm)
    }
}

fn check_norm(e_norm: f64) -> Result<()> {
    if e_norm >= 0.0 && !e_norm.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("noise norm {e_norm} must be >= 0")))
    }
}

/// Truncation-plus-Neumann baseline: `8||E||/(3 lambda_n^2) + 2/lambda_{n-p}`.
pub fn eymn_bound(lambda_n: f64, lambda_np: f64, e_norm: f64) -> Result<f64> {
    check_norm(e_norm)?;
    if 4.0 * e_norm > lambda_n {
        return Err(Error::Inadmissible {
            margin: margin(lambda_n, e_norm),
        });
    }
    Ok(8.0 * e_norm / (3.0 * lambda_n * lambda_n) + 2.0 / lambda_np)
}

/// Positive definite bound `4||E||/lambda_n^2 + 5||E||/(lambda_{n-p} delta_{n-p})`.
/// An infinite gap (`p = n`) drops the second term.
pub fn main_bound_pd(lambda_n: f64, lambda_np: f64, delta_np: f64, e_norm: f64) -> Result<f64> {
    check_norm(e_norm)?;
    if delta_np <= 0.0 {
        return Err(Error::DegenerateGap {
            index: 0,
            gap: delta_np,
        });
    }
    let limit = lambda_n.min(delta_np);
    if 4.0 * e_norm > limit {
        return Err(Error::Inadmissible {
            margin: margin(limit, e_norm),
        });
    }
    let tail = if delta_np.is_infinite() {
        0.0
    } else {
        5.0 * e_norm / (lambda_np * delta_np)
    };
    Ok(4.0 * e_norm / (lambda_n * lambda_n) + tail)
}

/// `delta_{n-p}` of a positive definite spectrum, `+inf` when `p = n`.
/// Fails on gaps below [`DEGENERATE_GAP_REL`] times the norm.
pub fn truncation_gap(spec: &SpectralData, p: usize) -> Result<f64> {
    let n = spec.n();
    if p == 0 || p > n {
        return Err(Error::InvalidRank { p, n });
    }
    let gap = spec.gap_or_inf(n - p);
    check_degenerate(spec, n - p, gap)?;
    Ok(gap)
}

fn check_degenerate(spec: &SpectralData, index: usize, gap: f64) -> Result<()> {
    if gap < DEGENERATE_GAP_REL * spec.norm() {
        Err(Error::DegenerateGap { index, gap })
    } else {
        Ok(())
    }
}

/// Is `delta_{n-p}` numerically degenerate?
pub fn is_degenerate_gap(spec: &SpectralData, p: usize) -> bool {
    let n = spec.n();
    spec.gap_or_inf(n - p) < DEGENERATE_GAP_REL * spec.norm()
}

/// [`main_bound_pd`] evaluated from a decomposition.
pub fn main_bound_for(spec: &SpectralData, p: usize, e_norm: f64) -> Result<f64> {
    spec.require_positive_definite()?;
    let n = spec.n();
    let gap = truncation_gap(spec, p)?;
    main_bound_pd(spec.lambda(n), spec.lambda(n - p), gap, e_norm)
}

/// [`eymn_bound`] evaluated from a decomposition.
pub fn eymn_bound_for(spec: &SpectralData, p: usize, e_norm: f64) -> Result<f64> {
    spec.require_positive_definite()?;
    let n = spec.n();
    if p == 0 || p > n {
        return Err(Error::InvalidRank { p, n });
    }
    eymn_bound(spec.lambda(n), spec.lambda(n - p), e_norm)
}

/// Gap conditions for the positive definite or general symmetric bound.
pub fn check_admissibility(spec: &SpectralData, p: usize, e_norm: f64, variant: Variant) -> Admissibility {
    let n = spec.n();
    let p = p.clamp(1, n);
    match variant {
        Variant::PositiveDefinite => {
            let lambda_n = spec.lambda(n);
            let gap = spec.gap_or_inf(n - p);
            let limit = lambda_n.min(gap);
            Admissibility {
                e_norm,
                lambda_n,
                gap,
                sv_gap: None,
                satisfied: 4.0 * e_norm <= limit,
                margin: margin(limit, e_norm),
            }
        }
        Variant::Symmetric => {
            let sigma_n = spec.sigma(n);
            let sv_gap = if p == n {
                f64::INFINITY
            } else {
                spec.sigma(n - p) - spec.sigma(n - p + 1)
            };
            let gap = match spec.signed_indexing(p) {
                Ok(idx) => symmetric_gaps(spec, &idx).0,
                Err(_) => 0.0,
            };
            let limit = sigma_n.min(gap);
            Admissibility {
                e_norm,
                lambda_n: sigma_n,
                gap,
                sv_gap: Some(sv_gap),
                satisfied: 4.0 * e_norm < limit && sv_gap > 2.0 * e_norm,
                margin: margin(limit, e_norm),
            }
        }
    }
}

/// `(min gap, positive-side gap, negative-side gap)`; an absent side counts as `+inf`.
fn symmetric_gaps(spec: &SpectralData, idx: &SignedIndexing) -> (f64, f64, f64) {
    let (k, k1, p) = (idx.k, idx.k1, idx.p);
    let pos = if idx.has_positive_side() {
        spec.gap_or_inf(k - k1)
    } else {
        f64::INFINITY
    };
    let neg = if idx.has_negative_side() {
        spec.gap_or_inf(k + p - k1)
    } else {
        f64::INFINITY
    };
    (pos.min(neg), pos, neg)
}

fn require_symmetric_admissible(spec: &SpectralData, idx: &SignedIndexing, e_norm: f64) -> Result<(f64, f64)> {
    check_norm(e_norm)?;
    let (_, pos, neg) = symmetric_gaps(spec, idx);
    let (k, k1, p) = (idx.k, idx.k1, idx.p);
    check_degenerate(spec, k - k1, pos)?;
    check_degenerate(spec, k + p - k1, neg)?;
    let adm = check_admissibility(spec, p, e_norm, Variant::Symmetric);
    if !adm.satisfied {
        return Err(Error::Inadmissible { margin: adm.margin });
    }
    Ok((pos, neg))
}

/// General symmetric bound: one two-term block per side of the sign
/// boundary. A side with no selected eigenvalues contributes nothing.
pub fn bound_symmetric(spec: &SpectralData, idx: &SignedIndexing, e_norm: f64) -> Result<f64> {
    let (pos_gap, neg_gap) = require_symmetric_admissible(spec, idx, e_norm)?;
    let (k, k1, p) = (idx.k, idx.k1, idx.p);
    let n = spec.n();
    let mut total = 0.0;
    if idx.has_positive_side() {
        total += 4.0 * e_norm / spec.lambda(k).powi(2);
        if k - k1 > 0 {
            total += 5.0 * e_norm / (spec.lambda(k - k1) * pos_gap);
        }
    }
    if idx.has_negative_side() {
        total += 4.0 * e_norm / spec.lambda(k + 1).powi(2);
        if k + p - k1 < n {
            total += 5.0 * e_norm / (spec.lambda(k + p - k1 + 1).abs() * neg_gap);
        }
    }
    Ok(total)
}

/// One rectangle's vertical-plus-horizontal contribution with explicit
/// constants: left edge, right edge, and the two horizontal edges.
#[allow(clippy::too_many_arguments)]
fn rectangle_refined(
    inner: f64,
    edge: f64,
    gap: f64,
    outside: f64,
    window: usize,
    x: f64,
    e_norm: f64,
    height: f64,
) -> f64 {
    let w2x = (window * window) as f64 * x;
    let outside_inv = if outside.is_finite() { 1.0 / outside } else { 0.0 };
    let left = 4.0 * PI * w2x / (inner * inner) + 12.0 * PI * e_norm * outside_inv / inner;
    let right = if gap.is_finite() {
        let a1 = edge + gap / 2.0;
        2.0 * PI * w2x / (a1 * gap) + 6.0 * PI * e_norm * outside_inv / a1
    } else {
        0.0
    };
    left + right + 2.0 * e_norm / (height * height)
}

/// Refined positive definite bound using the doubling distance `r` and the
/// interaction parameter `x`.
pub fn refined_bound_pd(spec: &SpectralData, p: usize, e_norm: f64, r: usize, x: f64) -> Result<f64> {
    check_norm(e_norm)?;
    spec.require_positive_definite()?;
    let n = spec.n();
    if r < p || r > n {
        return Err(Error::InvalidArgument(format!(
            "doubling distance {r} outside [{p}, {n}]"
        )));
    }
    let gap = truncation_gap(spec, p)?;
    let limit = spec.lambda(n).min(gap);
    if 4.0 * e_norm > limit {
        return Err(Error::Inadmissible {
            margin: margin(limit, e_norm),
        });
    }
    let rect = rectangle_refined(
        spec.lambda(n),
        spec.lambda(n - p + 1),
        gap,
        spec.lambda(n - r),
        r,
        x,
        e_norm,
        2.0 * spec.lambda(1),
    );
    Ok(rect / PI)
}

/// Refined general symmetric bound: a rectangle per present side plus the
/// connecting horizontal segment when both sides are present.
pub fn refined_bound_symmetric(
    spec: &SpectralData,
    idx: &SignedIndexing,
    e_norm: f64,
    dd: &DoublingDistance,
    x: f64,
) -> Result<f64> {
    let (pos_gap, neg_gap) = require_symmetric_admissible(spec, idx, e_norm)?;
    let n = spec.n();
    let (k, k1, p) = (idx.k, idx.k1, idx.p);
    let abs_lambda = |i: usize| {
        if i == 0 || i > n {
            f64::INFINITY
        } else {
            spec.lambda(i).abs()
        }
    };
    let outside = abs_lambda(k - dd.r1).min(abs_lambda(k + dd.r2 + 1));
    let height = 2.0 * spec.sigma(1);
    let w = dd.window_len();
    let mut total = 0.0;
    if idx.has_positive_side() {
        total += rectangle_refined(
            spec.lambda(k),
            spec.lambda(k - k1 + 1),
            pos_gap,
            outside,
            w,
            x,
            e_norm,
            height,
        );
    }
    if idx.has_negative_side() {
        total += rectangle_refined(
            abs_lambda(k + 1),
            abs_lambda(k + p - k1),
            neg_gap,
            outside,
            w,
            x,
            e_norm,
            height,
        );
    }
    total /= PI;
    if idx.has_positive_side() && idx.has_negative_side() {
        let link = (spec.lambda(k) - spec.lambda(k + 1)) / 2.0;
        total += link * e_norm / (PI * height.powi(3));
    }
    Ok(total)
}

/// Largest admissible variance proxy: `min(lambda_n, delta_{n-p}) / (8 sqrt n)`.
pub fn delta_max(lambda_n: f64, delta_np: f64, n: usize) -> Result<f64> {
    if !(lambda_n > 0.0 && delta_np > 0.0 && n > 0) {
        return Err(Error::InvalidArgument(format!(
            "delta_max needs positive inputs, got lambda_n={lambda_n}, gap={delta_np}, n={n}"
        )));
    }
    Ok(lambda_n.min(delta_np) / (8.0 * (n as f64).sqrt()))
}
