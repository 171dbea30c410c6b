//! Rectangular contours around the selected eigenvalues and quadrature of
//! the first-order and exact resolvent-difference integrals along them.
//!
//! `F1 = (1/2pi) int |z|^-1 ||R(z) E R(z)|| |dz|` with `R(z) = (zI - A)^-1`,
//! `F  = (1/2pi) int |z|^-1 ||R~(z) - R(z)|| |dz|` with `R~` for `A + E`.
//! `F` dominates the low-rank inverse error and, under the gap condition,
//! is at most `2 F1`.

use std::f64::consts::PI;
use std::fmt;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::bounds::{check_admissibility, Variant};
use crate::error::{Error, Result};
use crate::noise::spectral_norm;
use crate::spectral::{decompose, low_rank_inverse_distance, SignedIndexing, SpectralData, SymMatrix};
use crate::util::{map_indices, pairwise_sum};

/// Default relative tolerance between successive node doublings.
pub const DEFAULT_TOL: f64 = 1e-3;
/// Initial trapezoid intervals per segment.
pub const INITIAL_NODES: usize = 256;
/// Maximum trapezoid intervals per segment.
pub const MAX_NODES: usize = 1 << 16;

/// Which rectangle a segment belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Around the selected positive eigenvalues (the only one when positive definite).
    Positive,
    /// Around the selected negative eigenvalues.
    Negative,
}

/// Segment tag. Rectangle edges are numbered 1 (inner vertical, nearer 0),
/// 2 (top), 3 (outer vertical), 4 (bottom).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentLabel {
    Edge {
        side: Side,
        edge: u8,
    },
    /// Horizontal link joining the two inner top corners.
    Link,
}

impl SegmentLabel {
    pub fn is_horizontal(&self) -> bool {
        match self {
            Self::Edge { edge, .. } => edge % 2 == 0,
            Self::Link => true,
        }
    }
}

impl fmt::Display for SegmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Edge {
                side: Side::Positive,
                edge,
            } => write!(f, "G{edge}"),
            Self::Edge {
                side: Side::Negative,
                edge,
            } => write!(f, "G{edge}'"),
            Self::Link => write!(f, "L"),
        }
    }
}

/// Oriented straight segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Segment {
    #[serde(serialize_with = "ser_complex")]
    pub start: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub end: Complex64,
    pub label: SegmentLabel,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    fn is_vertical(&self) -> bool {
        self.start.re == self.end.re
    }

    /// Euclidean distance from the real point `x` to the segment.
    pub fn distance_to(&self, x: f64) -> f64 {
        let d = self.end - self.start;
        let len2 = d.norm_sqr();
        let w = Complex64::new(x, 0.0) - self.start;
        let t = if len2 == 0.0 {
            0.0
        } else {
            ((w.re * d.re + w.im * d.im) / len2).clamp(0.0, 1.0)
        };
        (w - d * t).norm()
    }
}

/// Geometry parameters of a contour.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ContourParams {
    /// Rectangle `[x0, x1] x [-t, t]`.
    PositiveDefinite { x0: f64, x1: f64, t: f64 },
    /// Rectangles `[a0, a1] x [-t, t]` and `[b1, b0] x [-t, t]`, either may be absent.
    Symmetric {
        a0: Option<f64>,
        a1: Option<f64>,
        b0: Option<f64>,
        b1: Option<f64>,
        t: f64,
    },
}

impl ContourParams {
    pub fn height(&self) -> f64 {
        match *self {
            Self::PositiveDefinite { t, .. } | Self::Symmetric { t, .. } => t,
        }
    }
}

/// Closed contour made of labeled segments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourPath {
    pub segments: Vec<Segment>,
    pub params: ContourParams,
    /// Initial trapezoid intervals per segment.
    pub quad_points: usize,
    /// Guaranteed distance from the contour to the spectrum it was built for.
    pub separation: f64,
}

impl ContourPath {
    /// Does a rectangle of the contour strictly contain the real point `x`?
    pub fn encloses(&self, x: f64) -> bool {
        self.rectangles().iter().any(|&(lo, hi)| lo < x && x < hi)
    }

    /// Real intervals spanned by the rectangles.
    pub fn rectangles(&self) -> Vec<(f64, f64)> {
        match self.params {
            ContourParams::PositiveDefinite { x0, x1, .. } => vec![(x0, x1)],
            ContourParams::Symmetric { a0, a1, b0, b1, .. } => {
                let mut out = Vec::new();
                if let (Some(a0), Some(a1)) = (a0, a1) {
                    out.push((a0, a1));
                }
                if let (Some(b0), Some(b1)) = (b0, b1) {
                    out.push((b1, b0));
                }
                out
            }
        }
    }

    /// Smallest distance from the contour to any of the real `points`.
    pub fn distance_to_points(&self, points: &[f64]) -> f64 {
        self.segments
            .iter()
            .flat_map(|s| points.iter().map(move |&x| s.distance_to(x)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Total length of the contour.
    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }
}

fn rectangle(lo: f64, hi: f64, t: f64, side: Side) -> Vec<Segment> {
    // Inner edge is the one nearer 0.
    let (inner, outer) = match side {
        Side::Positive => (lo, hi),
        Side::Negative => (hi, lo),
    };
    let c = |x: f64, y: f64| Complex64::new(x, y);
    let seg = |start, end, edge| Segment {
        start,
        end,
        label: SegmentLabel::Edge { side, edge },
    };
    vec![
        seg(c(inner, t), c(inner, -t), 1),
        seg(c(outer, t), c(inner, t), 2),
        seg(c(outer, -t), c(outer, t), 3),
        seg(c(inner, -t), c(outer, -t), 4),
    ]
}

/// Offset from the outermost selected eigenvalue: half the gap, or half the
/// spectral norm when the selection reaches the end of the spectrum.
fn half_gap(gap: f64, norm: f64) -> f64 {
    if gap.is_finite() {
        gap / 2.0
    } else {
        norm / 2.0
    }
}

/// Rectangle around the `p` smallest eigenvalues of a positive definite
/// spectrum: left edge at `lambda_n / 2`, right edge half way into the
/// truncation gap, half-height `2 lambda_1`.
pub fn build_contour_pd(spec: &SpectralData, p: usize) -> Result<ContourPath> {
    spec.require_positive_definite()?;
    let n = spec.n();
    let gap = crate::bounds::truncation_gap(spec, p)?;
    let x0 = spec.lambda(n) / 2.0;
    let x1 = spec.lambda(n - p + 1) + half_gap(gap, spec.lambda(1));
    let t = 2.0 * spec.lambda(1);
    let separation = x0.min(half_gap(gap, spec.lambda(1)));
    Ok(ContourPath {
        segments: rectangle(x0, x1, t, Side::Positive),
        params: ContourParams::PositiveDefinite { x0, x1, t },
        quad_points: INITIAL_NODES,
        separation,
    })
}

/// Two rectangles, one per sign of the selected window, joined by a link
/// along the top. A positive definite spectrum gives the single rectangle of
/// [`build_contour_pd`].
pub fn build_contour_symmetric(spec: &SpectralData, idx: &SignedIndexing) -> Result<ContourPath> {
    let n = spec.n();
    let (k, k1, p) = (idx.k, idx.k1, idx.p);
    if k == n {
        return build_contour_pd(spec, p);
    }
    let sigma1 = spec.sigma(1);
    let t = 2.0 * sigma1;
    let check = |index: usize, gap: f64| -> Result<()> {
        if gap < crate::bounds::DEGENERATE_GAP_REL * sigma1 {
            Err(Error::DegenerateGap { index, gap })
        } else {
            Ok(())
        }
    };
    let mut segments = Vec::new();
    let mut separation = spec.sigma(n) / 2.0;
    let (mut a0, mut a1, mut b0, mut b1) = (None, None, None, None);
    if idx.has_positive_side() {
        let gap = spec.gap_or_inf(k - k1);
        check(k - k1, gap)?;
        let lo = spec.lambda(k) / 2.0;
        let hi = spec.lambda(k - k1 + 1) + half_gap(gap, sigma1);
        separation = separation.min(half_gap(gap, sigma1));
        segments.extend(rectangle(lo, hi, t, Side::Positive));
        a0 = Some(lo);
        a1 = Some(hi);
    }
    if idx.has_negative_side() {
        let gap = spec.gap_or_inf(k + p - k1);
        check(k + p - k1, gap)?;
        let hi = spec.lambda(k + 1) / 2.0;
        let lo = spec.lambda(k + p - k1) - half_gap(gap, sigma1);
        separation = separation.min(half_gap(gap, sigma1));
        segments.extend(rectangle(lo, hi, t, Side::Negative));
        b0 = Some(hi);
        b1 = Some(lo);
    }
    if let (Some(a), Some(b)) = (a0, b0) {
        segments.push(Segment {
            start: Complex64::new(b, t),
            end: Complex64::new(a, t),
            label: SegmentLabel::Link,
        });
    }
    Ok(ContourPath {
        segments,
        params: ContourParams::Symmetric { a0, a1, b0, b1, t },
        quad_points: INITIAL_NODES,
        separation,
    })
}

/// `||(zI - A)^-1|| = 1 / min_i |z - lambda_i|`.
pub fn resolvent_norm(spec: &SpectralData, z: Complex64) -> Result<f64> {
    let d = min_distance(spec.eigenvalues(), z);
    if d == 0.0 {
        Err(Error::OnSpectrum { re: z.re, im: z.im })
    } else {
        Ok(1.0 / d)
    }
}

fn min_distance(values: &[f64], z: Complex64) -> f64 {
    values.iter().map(|&l| (z - l).norm()).fold(f64::INFINITY, f64::min)
}

/// Result of an adaptive trapezoid rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: f64,
    /// Trapezoid intervals in the final pass.
    pub nodes: usize,
    /// `|I_2N - I_N| / |I_2N|` at the final doubling (0 when both vanish).
    pub rel_change: f64,
}

/// Composite trapezoid on `[lo, hi]` with node doubling from
/// [`INITIAL_NODES`] until successive values agree to `tol` relatively.
pub fn adaptive_trapezoid<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Quadrature>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let width = hi - lo;
    let eval = |xs: Vec<f64>| -> Result<Vec<f64>> { map_indices(xs.len(), |i| f(xs[i])).into_iter().collect() };

    let mut intervals = INITIAL_NODES;
    let first = eval(
        (0..=intervals)
            .map(|i| lo + width * i as f64 / intervals as f64)
            .collect(),
    )?;
    let ends_half = 0.5 * (first[0] + first[intervals]);
    let mut interior = pairwise_sum(&first[1..intervals]);
    let mut value = (ends_half + interior) * width / intervals as f64;
    loop {
        let fine = 2 * intervals;
        let mids = eval(
            (0..intervals)
                .map(|i| lo + width * (2 * i + 1) as f64 / fine as f64)
                .collect(),
        )?;
        interior += pairwise_sum(&mids);
        intervals = fine;
        let next = (ends_half + interior) * width / intervals as f64;
        let change = (next - value).abs();
        let rel = if next == 0.0 {
            if change == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            change / next.abs()
        };
        value = next;
        if rel <= tol {
            return Ok(Quadrature {
                value,
                nodes: intervals,
                rel_change: rel,
            });
        }
        if intervals >= MAX_NODES {
            return Err(Error::QuadratureTolerance { tol, value, change });
        }
    }
}

/// `int_lo^hi f(t) dt` through the substitution `t = w sinh(u)`, which
/// resolves peaks of width about `w` centred at 0.
pub fn integrate_peaked<F>(f: F, lo: f64, hi: f64, w: f64, tol: f64) -> Result<Quadrature>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    let (u0, u1) = ((lo / w).asinh(), (hi / w).asinh());
    adaptive_trapezoid(
        |u| {
            let t = w * u.sinh();
            Ok(f(t)? * w * u.cosh())
        },
        u0,
        u1,
        tol,
    )
}

/// Raw `int |dz|` of a scalar integrand along one segment; vertical
/// segments concentrate nodes near the real axis at the scale of the
/// nearest pole.
fn integrate_segment<F>(seg: &Segment, poles: &[f64], f: &F, tol: f64) -> Result<Quadrature>
where
    F: Fn(Complex64) -> Result<f64> + Sync + Send,
{
    if seg.is_vertical() {
        let x = seg.start.re;
        let (y0, y1) = (seg.start.im.min(seg.end.im), seg.start.im.max(seg.end.im));
        let reach = y1.abs().max(y0.abs());
        let nearest = poles.iter().map(|&l| (x - l).abs()).fold(x.abs(), f64::min);
        let w = nearest.clamp(reach * 1e-6, reach);
        integrate_peaked(|y| f(Complex64::new(x, y)), y0, y1, w, tol)
    } else {
        let (a, b) = (seg.start, seg.end);
        let len = seg.length();
        adaptive_trapezoid(|s| Ok(f(a + (b - a) * s)? * len), 0.0, 1.0, tol)
    }
}

/// Per-segment integrals of a contour integrand.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourIntegral {
    /// `(1 / 2pi) * sum of segment integrals`.
    pub value: f64,
    /// Raw `int |dz|` per segment, in path order.
    pub segments: Vec<SegmentIntegral>,
    /// Largest relative change among segments at their final doubling.
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentIntegral {
    pub label: SegmentLabel,
    pub raw: f64,
    pub nodes: usize,
}

fn integrate_path<F>(path: &ContourPath, poles: &[f64], f: F, tol: f64) -> Result<ContourIntegral>
where
    F: Fn(Complex64) -> Result<f64> + Sync + Send,
{
    let mut segments = Vec::with_capacity(path.segments.len());
    let mut rel_err = 0.0f64;
    for seg in &path.segments {
        let q = integrate_segment(seg, poles, &f, tol)?;
        rel_err = rel_err.max(q.rel_change);
        segments.push(SegmentIntegral {
            label: seg.label,
            raw: q.value,
            nodes: q.nodes,
        });
    }
    let raw: Vec<f64> = segments.iter().map(|s| s.raw).collect();
    Ok(ContourIntegral {
        value: pairwise_sum(&raw) / (2.0 * PI),
        segments,
        rel_err,
    })
}

/// Dense complex `n x n` matrix, row-major.
struct CMat {
    n: usize,
    data: Vec<Complex64>,
}

impl CMat {
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    fn apply(&self, v: &[Complex64], adjoint: bool) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if adjoint { self.at(j, i).conj() } else { self.at(i, j) } * v[j])
                    .sum()
            })
            .collect()
    }

    fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm by power iteration on `K^H K` (residual below 1e-6
/// relative), falling back to the singular values of the real embedding
/// `[[X, -Y], [Y, X]]` of `K = X + iY`.
fn complex_spectral_norm(k: &CMat) -> f64 {
    const TOL: f64 = 1e-6;
    const MAX_ITER: usize = 300;
    if k.is_zero() {
        return 0.0;
    }
    let n = k.n;
    let mut v: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + i as f64 / n as f64, 0.0)).collect();
    let s = vec_norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    for _ in 0..MAX_ITER {
        let kv = k.apply(&v, false);
        let theta = vec_norm(&kv).powi(2);
        let y = k.apply(&kv, true);
        if theta == 0.0 {
            break;
        }
        let resid = y
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * theta).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if resid <= TOL * theta {
            return theta.sqrt();
        }
        let ny = vec_norm(&y);
        v = y.into_iter().map(|x| x / ny).collect();
    }
    let m = Mat::from_fn(2 * n, 2 * n, |i, j| {
        let z = k.at(i % n, j % n);
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    m.singular_values().into_iter().fold(0.0, f64::max)
}

fn resolvent_diag(values: &[f64], z: Complex64) -> Result<Vec<Complex64>> {
    values
        .iter()
        .map(|&l| {
            let d = z - l;
            if d.norm() == 0.0 {
                Err(Error::OnSpectrum { re: z.re, im: z.im })
            } else {
                Ok(d.inv())
            }
        })
        .collect()
}

fn check_node(z: Complex64) -> Result<()> {
    if z.norm() == 0.0 {
        Err(Error::OnSpectrum { re: 0.0, im: 0.0 })
    } else {
        Ok(())
    }
}

/// First-order integral: integrand `|z|^-1 ||D(z) E' D(z)||` with
/// `E' = U^T E U` and `D(z) = diag(1 / (z - lambda_i))`.
pub fn quad_f1(spec: &SpectralData, e: &SymMatrix, path: &ContourPath, tol: f64) -> Result<ContourIntegral> {
    let n = spec.n();
    if e.n() != n {
        return Err(Error::InvalidArgument(format!(
            "noise is {}x{}, matrix is {n}x{n}",
            e.n(),
            e.n()
        )));
    }
    let u = spec.vectors();
    let rotated = u.transpose() * e.as_mat() * u;
    let values = spec.eigenvalues();
    let integrand = |z: Complex64| -> Result<f64> {
        check_node(z)?;
        let d = resolvent_diag(values, z)?;
        let k = CMat {
            n,
            data: (0..n * n)
                .map(|ij| {
                    let (i, j) = (ij / n, ij % n);
                    d[i] * rotated.read(i, j) * d[j]
                })
                .collect(),
        };
        Ok(complex_spectral_norm(&k) / z.norm())
    };
    integrate_path(path, values, integrand, tol)
}

/// Exact integral: integrand `|z|^-1 ||W D~(z) W^T - D(z)||` with
/// `W = U^T U~`, both resolvents in the eigenbasis of `A`.
pub fn quad_f(spec: &SpectralData, perturbed: &SpectralData, path: &ContourPath, tol: f64) -> Result<ContourIntegral> {
    let n = spec.n();
    if perturbed.n() != n {
        return Err(Error::InvalidArgument("decompositions differ in dimension".into()));
    }
    let w = spec.vectors().transpose() * perturbed.vectors();
    let values = spec.eigenvalues();
    let tilde = perturbed.eigenvalues();
    let integrand = |z: Complex64| -> Result<f64> {
        check_node(z)?;
        let d = resolvent_diag(values, z)?;
        let dt = resolvent_diag(tilde, z)?;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, dc) in dt.iter().enumerate() {
                    acc += dc * (w.read(i, c) * w.read(j, c));
                }
                if i == j {
                    acc -= d[i];
                }
                data[i * n + j] = acc;
                data[j * n + i] = acc;
            }
        }
        Ok(complex_spectral_norm(&CMat { n, data }) / z.norm())
    };
    let mut poles = values.to_vec();
    poles.extend_from_slice(tilde);
    integrate_path(path, &poles, integrand, tol)
}

/// Outcome of a bootstrapping check on one instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BootstrapReport {
    pub variant: Variant,
    pub p: usize,
    pub e_norm: f64,
    pub f: f64,
    pub f1: f64,
    /// `F / F1` (0 when both vanish).
    pub ratio: f64,
    /// Closed-form upper bound on `F1`.
    pub closed_form_f1_bound: f64,
    /// Largest relative change of any segment at its final doubling.
    pub quadrature_rel_err: f64,
    /// `||(A~^-1)_p - (A^-1)_p||`.
    pub actual_error: f64,
    pub f1_segments: Vec<SegmentIntegral>,
    pub f_segments: Vec<SegmentIntegral>,
    pub contour: ContourPath,
}

/// Closed-form bound on `F1` for a positive definite spectrum:
/// `2e / lambda_n^2 + 2.5e / (lambda_{n-p} delta_{n-p})`. When `p = n` the
/// right edge sits `lambda_1 / 2` past the spectrum and contributes at most
/// `e / (x1 * lambda_1)` instead.
pub fn closed_form_f1_pd(spec: &SpectralData, p: usize, e_norm: f64) -> Result<f64> {
    let n = spec.n();
    let gap = crate::bounds::truncation_gap(spec, p)?;
    let lambda_n = spec.lambda(n);
    let head = 2.0 * e_norm / (lambda_n * lambda_n);
    if gap.is_finite() {
        Ok(head + 2.5 * e_norm / (spec.lambda(n - p) * gap))
    } else {
        let l1 = spec.lambda(1);
        Ok(head + e_norm / (1.5 * l1 * l1) + e_norm / (4.0 * PI * l1 * l1))
    }
}

/// Closed-form bound on `F1` for the two-rectangle contour: per present side
/// `2e/lambda_edge^2 + 2e/(|lambda_out| delta) + e/(4 pi sigma_1^2)`, plus
/// `|a0 - b0| e / (2 pi T^3)` for the link.
pub fn closed_form_f1_symmetric(spec: &SpectralData, idx: &SignedIndexing, e_norm: f64) -> Result<f64> {
    let n = spec.n();
    if idx.k == n {
        return closed_form_f1_pd(spec, idx.p, e_norm);
    }
    let (k, k1, p) = (idx.k, idx.k1, idx.p);
    let sigma1 = spec.sigma(1);
    let t = 2.0 * sigma1;
    let side = |edge: f64, out_index: usize, gap: f64, outer_edge: f64| -> f64 {
        let tail = if gap.is_finite() {
            2.0 * e_norm / (spec.lambda(out_index).abs() * gap)
        } else {
            e_norm / (outer_edge.abs() * sigma1)
        };
        2.0 * e_norm / (edge * edge) + tail + e_norm / (4.0 * PI * sigma1 * sigma1)
    };
    let mut total = 0.0;
    let (mut a0, mut b0) = (None, None);
    if idx.has_positive_side() {
        let gap = spec.gap_or_inf(k - k1);
        let outer = spec.lambda(k - k1 + 1) + half_gap(gap, sigma1);
        total += side(spec.lambda(k), k - k1, gap, outer);
        a0 = Some(spec.lambda(k) / 2.0);
    }
    if idx.has_negative_side() {
        let gap = spec.gap_or_inf(k + p - k1);
        let outer = spec.lambda(k + p - k1) - half_gap(gap, sigma1);
        total += side(spec.lambda(k + 1), k + p - k1 + 1, gap, outer);
        b0 = Some(spec.lambda(k + 1) / 2.0);
    }
    if let (Some(a), Some(b)) = (a0, b0) {
        total += (a - b).abs() * e_norm / (2.0 * PI * t.powi(3));
    }
    Ok(total)
}

/// Builds the contour for `A`, integrates `F1` and `F`, and measures the
/// actual low-rank inverse error. Requires the gap condition.
pub fn verify_bootstrap(a: &SymMatrix, e: &SymMatrix, p: usize, tol: f64) -> Result<BootstrapReport> {
    let spec = decompose(a)?;
    let e_norm = spectral_norm(e)?;
    let perturbed = decompose(&a.add(e))?;
    let (variant, path, closed) = if spec.is_positive_definite() {
        let path = build_contour_pd(&spec, p)?;
        (Variant::PositiveDefinite, path, closed_form_f1_pd(&spec, p, e_norm)?)
    } else {
        let idx = spec.signed_indexing(p)?;
        let path = build_contour_symmetric(&spec, &idx)?;
        (Variant::Symmetric, path, closed_form_f1_symmetric(&spec, &idx, e_norm)?)
    };
    let adm = check_admissibility(&spec, p, e_norm, variant);
    let enclosed = perturbed.eigenvalues().iter().filter(|&&x| path.encloses(x)).count();
    if !adm.satisfied || enclosed != p {
        return Err(Error::Inadmissible { margin: adm.margin });
    }
    let f1 = quad_f1(&spec, e, &path, tol)?;
    let f = quad_f(&spec, &perturbed, &path, tol)?;
    let actual_error = low_rank_inverse_distance(&spec, &perturbed, p)?;
    let ratio = if f1.value > 0.0 { f.value / f1.value } else { 0.0 };
    Ok(BootstrapReport {
        variant,
        p,
        e_norm,
        f: f.value,
        f1: f1.value,
        ratio,
        closed_form_f1_bound: closed,
        quadrature_rel_err: f1.rel_err.max(f.rel_err),
        actual_error,
        f1_segments: f1.segments,
        f_segments: f.segments,
        contour: path,
    })
}
