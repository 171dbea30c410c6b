//! Experiment orchestration: sharpness sweeps over noise scales,
//! admissibility tables, matrix summaries, PCG benchmarks, and CSV/SVG
//! emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::bounds::{
    self, bound_symmetric, check_admissibility, delta_max, eymn_bound_for, is_degenerate_gap, main_bound_for,
    BoundReport, Variant,
};
use crate::error::{Error, Result};
use crate::ingest::{census_covariance, read_matrix_market_with, MatrixFormat};
use crate::matgen::{hamiltonian, synthetic_spectrum, HamiltonianParams};
use crate::noise::{sample_noise, spectral_norm, NoiseSpec};
use crate::pcg::{
    kappa_bound, kappa_measure, pcg_solve_with, predicted_iterations, BoundKind, LowRankPreconditioner, PcgOptions,
    StoppingRule,
};
use crate::spectral::{decompose, low_rank_inverse_distance, SpectralData, SymMatrix};
use crate::util::{map_indices, mean_std};

/// Threshold used by `p = "auto"`.
pub const AUTO_P_THRESHOLD: f64 = 0.05;

/// Where the matrix of an experiment comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum MatrixSpec {
    /// Scaled discretized Hamiltonian of dimension `n`.
    Hamiltonian {
        n: usize,
        #[serde(default)]
        omega: Option<f64>,
        #[serde(default)]
        amplitude: Option<f64>,
    },
    /// Matrix Market file.
    File {
        path: PathBuf,
        #[serde(default)]
        symmetrize: bool,
    },
    /// Covariance of a CSV table.
    Census { path: PathBuf },
    /// `Q diag(evals) Q^T` with a seeded random orthogonal `Q` (diagonal for seed 0).
    Synthetic {
        evals: Vec<f64>,
        #[serde(default)]
        seed: u64,
    },
}

impl MatrixSpec {
    pub fn load(&self) -> Result<SymMatrix> {
        match self {
            Self::Hamiltonian { n, omega, amplitude } => {
                let mut params = match omega {
                    Some(w) => HamiltonianParams::with_omega(*n, *w),
                    None => HamiltonianParams::new(*n),
                };
                if let Some(a) = amplitude {
                    params = params.with_amplitude(*a);
                }
                hamiltonian(&params)
            }
            Self::File { path, symmetrize } => read_matrix_market_with(path, *symmetrize),
            Self::Census { path } => census_covariance(path),
            Self::Synthetic { evals, seed } => synthetic_spectrum(evals, *seed),
        }
    }

    /// Matrix source for a file path, by extension.
    pub fn from_path(path: impl Into<PathBuf>) -> Self {
        let src = crate::ingest::MatrixSource::from_path(path);
        match src.format {
            MatrixFormat::CensusCsv => Self::Census { path: src.path },
            _ => Self::File {
                path: src.path,
                symmetrize: false,
            },
        }
    }
}

/// Truncation rank: fixed, or chosen by [`SpectralData::select_p`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum RankChoice {
    Fixed(usize),
    #[serde(serialize_with = "ser_auto")]
    Auto,
}

fn ser_auto<S: serde::Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str("auto")
}

impl<'de> Deserialize<'de> for RankChoice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(usize),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(p) => Ok(Self::Fixed(p)),
            Raw::Str(s) if s == "auto" => Ok(Self::Auto),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "p must be an integer or \"auto\", got {s:?}"
            ))),
        }
    }
}

impl RankChoice {
    pub fn resolve(&self, spec: &SpectralData) -> Result<usize> {
        match *self {
            Self::Fixed(p) => Ok(p),
            Self::Auto => spec.select_p(AUTO_P_THRESHOLD),
        }
    }
}

/// Named noise-scale grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 1.0, 1.5, ..., 6.0.
    Census,
    /// 1.2, 1.4, ..., 3.0.
    Bcsstk09,
    /// `10^(-4 + k/3)`, `k = 0..=9`.
    Hamiltonian,
}

impl Preset {
    pub fn scales(self) -> Vec<f64> {
        match self {
            Self::Census => (0..=10).map(|k| 1.0 + 0.5 * k as f64).collect(),
            Self::Bcsstk09 => (0..=9).map(|k| (12 + 2 * k) as f64 / 10.0).collect(),
            Self::Hamiltonian => (0..=9).map(|k| 10f64.powf(-4.0 + k as f64 / 3.0)).collect(),
        }
    }
}

/// Explicit scale list or a preset name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScaleGrid {
    List(Vec<f64>),
    Preset(Preset),
}

impl ScaleGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::List(v) => v.clone(),
            Self::Preset(p) => p.scales(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub plot: Option<PathBuf>,
}

/// A sharpness experiment: for every scale `c` and trial `t`, the noise is
/// `c * E_t` where `E_t` is drawn from `noise` with seed `base_seed + t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub matrix: MatrixSpec,
    pub p: RankChoice,
    pub noise: NoiseSpec,
    pub scales: ScaleGrid,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub outputs: OutputPaths,
}

fn default_trials() -> usize {
    100
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let scales = self.scales.values();
        if scales.is_empty() {
            return Err(Error::InvalidArgument("scales must be nonempty".into()));
        }
        if scales.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::InvalidArgument("scales must be finite and >= 0".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if !(self.noise.delta.is_finite() && self.noise.delta >= 0.0) {
            return Err(Error::InvalidArgument("noise delta must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Aggregated outcome at one noise scale. Means and deviations are over
/// admissible trials only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub scale: f64,
    pub actual_mean: f64,
    pub actual_std: f64,
    pub our_bound_mean: f64,
    pub our_bound_std: f64,
    pub eymn_bound_mean: f64,
    pub eymn_bound_std: f64,
    pub ratio_eymn_ours: f64,
    pub ratio_emp_ours: f64,
    pub admissible_fraction: f64,
}

/// CSV column names, in order.
pub const CSV_HEADER: [&str; 10] = [
    "scale",
    "actual_mean",
    "actual_std",
    "our_bound_mean",
    "our_bound_std",
    "eymn_bound_mean",
    "eymn_bound_std",
    "ratio_eymn_ours",
    "ratio_emp_ours",
    "admissible_fraction",
];

impl ExperimentRecord {
    fn fields(&self) -> [f64; 10] {
        [
            self.scale,
            self.actual_mean,
            self.actual_std,
            self.our_bound_mean,
            self.our_bound_std,
            self.eymn_bound_mean,
            self.eymn_bound_std,
            self.ratio_eymn_ours,
            self.ratio_emp_ours,
            self.admissible_fraction,
        ]
    }
}

/// Result of [`run_sharpness`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessRun {
    pub n: usize,
    pub p: usize,
    pub variant: Variant,
    pub records: Vec<ExperimentRecord>,
}

#[derive(Clone, Copy)]
struct TrialPoint {
    actual: f64,
    ours: f64,
    eymn: f64,
    admissible: bool,
}

/// Per-trial bound and error for one scaled noise draw.
fn evaluate_trial(
    a: &SymMatrix,
    spec: &SpectralData,
    unit: &SymMatrix,
    unit_norm: f64,
    scale: f64,
    p: usize,
    variant: Variant,
) -> Result<TrialPoint> {
    let e_norm = scale * unit_norm;
    let adm = check_admissibility(spec, p, e_norm, variant);
    if !adm.satisfied {
        return Ok(TrialPoint {
            actual: f64::NAN,
            ours: f64::NAN,
            eymn: f64::NAN,
            admissible: false,
        });
    }
    let (ours, eymn) = match variant {
        Variant::PositiveDefinite => (main_bound_for(spec, p, e_norm)?, eymn_bound_for(spec, p, e_norm)?),
        Variant::Symmetric => (bound_symmetric(spec, &spec.signed_indexing(p)?, e_norm)?, f64::NAN),
    };
    let actual = if scale == 0.0 {
        0.0
    } else {
        let perturbed = decompose(&a.add(&unit.scaled(scale)))?;
        low_rank_inverse_distance(spec, &perturbed, p)?
    };
    Ok(TrialPoint {
        actual,
        ours,
        eymn,
        admissible: true,
    })
}

/// Runs the sweep described by `config`. Output is deterministic in the
/// config, independent of thread count.
pub fn run_sharpness(config: &ExperimentConfig) -> Result<SharpnessRun> {
    config.validate()?;
    let a = config.matrix.load()?;
    run_sharpness_on(&a, config)
}

/// [`run_sharpness`] on an already loaded matrix (the config's matrix
/// field is ignored).
pub fn run_sharpness_on(a: &SymMatrix, config: &ExperimentConfig) -> Result<SharpnessRun> {
    config.validate()?;
    let spec = decompose(a)?;
    let n = spec.n();
    let p = config.p.resolve(&spec)?;
    if p == 0 || p > n {
        return Err(Error::InvalidRank { p, n });
    }
    let variant = if spec.is_positive_definite() {
        Variant::PositiveDefinite
    } else {
        spec.signed_indexing(p)?;
        Variant::Symmetric
    };
    if variant == Variant::PositiveDefinite {
        bounds::truncation_gap(&spec, p)?;
    }
    let scales = config.scales.values();
    let template = config.noise.with_scale(1.0).with_seed(config.base_seed);
    let per_trial: Vec<Result<Vec<TrialPoint>>> = map_indices(config.trials, |t| {
        let unit = sample_noise(&template.for_trial(t as u64), n);
        let unit_norm = spectral_norm(&unit)?;
        scales
            .iter()
            .map(|&c| evaluate_trial(a, &spec, &unit, unit_norm, c, p, variant))
            .collect()
    });
    let per_trial: Vec<Vec<TrialPoint>> = per_trial.into_iter().collect::<Result<_>>()?;

    let records = scales
        .iter()
        .enumerate()
        .map(|(s, &scale)| {
            let points: Vec<TrialPoint> = per_trial.iter().map(|v| v[s]).filter(|t| t.admissible).collect();
            let pick = |f: fn(&TrialPoint) -> f64| mean_std(&points.iter().map(f).collect::<Vec<_>>());
            let (actual_mean, actual_std) = pick(|t| t.actual);
            let (our_bound_mean, our_bound_std) = pick(|t| t.ours);
            let (eymn_bound_mean, eymn_bound_std) = pick(|t| t.eymn);
            ExperimentRecord {
                scale,
                actual_mean,
                actual_std,
                our_bound_mean,
                our_bound_std,
                eymn_bound_mean,
                eymn_bound_std,
                ratio_eymn_ours: eymn_bound_mean / our_bound_mean,
                ratio_emp_ours: actual_mean / our_bound_mean,
                admissible_fraction: points.len() as f64 / config.trials as f64,
            }
        })
        .collect();
    Ok(SharpnessRun { n, p, variant, records })
}

/// Scientific notation with four decimals and a signed, at least two-digit
/// exponent: `1.3340e+03`, `-2.5000e-05`, `nan`, `inf`.
pub fn format_4e(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.4e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// CSV text: header plus one row per record.
pub fn csv_string(records: &[ExperimentRecord]) -> String {
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for r in records {
        let row: Vec<String> = r.fields().iter().map(|&v| format_4e(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_csv(records: &[ExperimentRecord], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, csv_string(records))?;
    Ok(())
}

const PLOT_W: f64 = 640.0;
const PLOT_H: f64 = 420.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 60.0;
const CAP_HALF: f64 = 1.5;

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    from: f64,
    to: f64,
}

impl Axis {
    fn map(&self, v: f64) -> f64 {
        let (a, b, x) = if self.log {
            (self.lo.log10(), self.hi.log10(), v.log10())
        } else {
            (self.lo, self.hi, v)
        };
        let t = if b > a { (x - a) / (b - a) } else { 0.5 };
        self.from + t * (self.to - self.from)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Self-contained SVG with the actual error and both bounds against scale:
/// logarithmic y axis, logarithmic x axis when the scales span more than a
/// factor 20, error bars of one standard deviation.
pub fn plot_svg(records: &[ExperimentRecord], title: &str) -> Result<String> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("cannot plot zero records".into()));
    }
    type Series = (&'static str, &'static str, fn(&ExperimentRecord) -> (f64, f64));
    let series: [Series; 3] = [
        ("Actual Error", "#1f77b4", |r| (r.actual_mean, r.actual_std)),
        ("Our Bound", "#d62728", |r| (r.our_bound_mean, r.our_bound_std)),
        ("EYM-N Bound", "#2ca02c", |r| (r.eymn_bound_mean, r.eymn_bound_std)),
    ];
    let positives: Vec<f64> = records
        .iter()
        .flat_map(|r| series.iter().map(move |s| (s.2)(r)))
        .flat_map(|(m, sd)| [m, m + sd, m - sd])
        .filter(|v| v.is_finite() && *v > 0.0)
        .collect();
    let (ymin, ymax) = if positives.is_empty() {
        (1e-1, 1e1)
    } else {
        let lo = positives.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = positives.iter().copied().fold(0.0, f64::max);
        (
            10f64.powf(lo.log10().floor()),
            10f64.powf(hi.log10().ceil().max(lo.log10().floor() + 1.0)),
        )
    };
    let xs: Vec<f64> = records.iter().map(|r| r.scale).collect();
    let xmin = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let xmax = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let xlog = xmin > 0.0 && xmax / xmin > 20.0;
    let (xlo, xhi) = if xmax > xmin {
        let pad = if xlog { 1.0 } else { 0.05 * (xmax - xmin) };
        if xlog {
            (xmin / 1.5 * pad, xmax * 1.5)
        } else {
            (xmin - pad, xmax + pad)
        }
    } else {
        (xmin - 0.5 * xmin.abs().max(1.0), xmax + 0.5 * xmax.abs().max(1.0))
    };
    let xa = Axis {
        lo: xlo,
        hi: xhi,
        log: xlog,
        from: MARGIN_L,
        to: PLOT_W - MARGIN_R,
    };
    let ya = Axis {
        lo: ymin,
        hi: ymax,
        log: true,
        from: PLOT_H - MARGIN_B,
        to: MARGIN_T,
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PLOT_W}" height="{PLOT_H}" viewBox="0 0 {PLOT_W} {PLOT_H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
        (MARGIN_L + PLOT_W - MARGIN_R) / 2.0,
        xml_escape(title)
    );
    let (x0, x1, y0, y1) = (xa.from, xa.to, ya.from, ya.to);
    let _ = writeln!(
        svg,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    // y decades
    let mut e = ymin.log10().round() as i32;
    while 10f64.powi(e) <= ymax * (1.0 + 1e-12) {
        let y = ya.map(10f64.powi(e));
        let _ = writeln!(
            svg,
            r##"<line x1="{x0:.2}" y1="{y:.2}" x2="{x1:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"##,
            x0 - 6.0,
            y + 4.0
        );
        e += 1;
    }
    // x ticks at the data scales
    for &x in &xs {
        let px = xa.map(x);
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="end" transform="rotate(-45 {px:.2} {:.2})">{}</text>"#,
            y0 + 4.0,
            y0 + 16.0,
            y0 + 16.0,
            format_4e(x)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">noise scale{}</text>"#,
        (x0 + x1) / 2.0,
        PLOT_H - 8.0,
        if xlog { " (log)" } else { "" }
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">spectral-norm error (log)</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    let mut clipped = 0usize;
    let clip = |v: f64, clipped: &mut usize| -> f64 {
        if v.is_finite() && v > 0.0 {
            v.clamp(ymin, ymax)
        } else {
            *clipped += 1;
            ymin
        }
    };
    for (si, (name, color, get)) in series.iter().enumerate() {
        let mut pts = Vec::new();
        let _ = writeln!(
            svg,
            r#"<g class="series" data-series="{}" stroke="{color}" fill="{color}">"#,
            xml_escape(name)
        );
        for r in records {
            let (m, sd) = get(r);
            if m.is_nan() {
                continue;
            }
            let px = xa.map(r.scale);
            let py = ya.map(clip(m, &mut clipped));
            if sd.is_finite() && sd > 0.0 {
                let top = ya.map((m + sd).clamp(ymin, ymax));
                let lower = m - sd;
                let bot = ya.map(if lower > 0.0 { lower.clamp(ymin, ymax) } else { ymin });
                let _ = writeln!(
                    svg,
                    r#"<path class="errorbar" d="M{px:.2},{top:.2}V{bot:.2}M{:.2},{top:.2}H{:.2}M{:.2},{bot:.2}H{:.2}" fill="none"/>"#,
                    px - CAP_HALF,
                    px + CAP_HALF,
                    px - CAP_HALF,
                    px + CAP_HALF
                );
            }
            let _ = writeln!(svg, r#"<circle class="marker" cx="{px:.2}" cy="{py:.2}" r="3"/>"#);
            pts.push(format!("{px:.2},{py:.2}"));
        }
        if pts.len() > 1 {
            let _ = writeln!(svg, r#"<polyline points="{}" fill="none"/>"#, pts.join(" "));
        }
        let ly = MARGIN_T + 14.0 + 18.0 * si as f64;
        let lx = PLOT_W - MARGIN_R + 14.0;
        let _ = writeln!(
            svg,
            r#"<circle cx="{lx:.2}" cy="{ly:.2}" r="3"/><text x="{:.2}" y="{:.2}" stroke="none" fill="black">{}</text>"#,
            lx + 10.0,
            ly + 4.0,
            xml_escape(name)
        );
        let _ = writeln!(svg, "</g>");
    }
    if clipped > 0 {
        let _ = writeln!(
            svg,
            r##"<text class="warning" x="{:.2}" y="{:.2}" fill="#b00000">warning: {clipped} non-positive value(s) clipped to the axis minimum</text>"##,
            x0 + 4.0,
            y0 - 6.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(records: &[ExperimentRecord], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, plot_svg(records, "Low-rank inverse perturbation")?)?;
    Ok(())
}

/// One row of an admissibility table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityRow {
    pub p: usize,
    pub gap: f64,
    /// `None` when the gap is degenerate.
    pub delta_max: Option<f64>,
    pub degenerate: bool,
}

/// Truncation gap and largest admissible variance proxy for each rank.
pub fn run_admissibility(spec: &SpectralData, ps: impl IntoIterator<Item = usize>) -> Result<Vec<AdmissibilityRow>> {
    spec.require_positive_definite()?;
    let n = spec.n();
    let lambda_n = spec.lambda(n);
    ps.into_iter()
        .map(|p| {
            if p == 0 || p > n {
                return Err(Error::InvalidRank { p, n });
            }
            let gap = spec.gap_or_inf(n - p);
            let degenerate = is_degenerate_gap(spec, p);
            let delta_max = if degenerate {
                None
            } else {
                Some(delta_max(lambda_n, gap, n)?)
            };
            Ok(AdmissibilityRow {
                p,
                gap,
                delta_max,
                degenerate,
            })
        })
        .collect()
}

/// Spectral summary of a matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Analysis {
    pub n: usize,
    pub positive_definite: bool,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub norm: f64,
    pub stable_rank: Option<f64>,
    pub select_p: Option<usize>,
    pub threshold: f64,
    pub table: Vec<AdmissibilityRow>,
}

pub fn analyze(a: &SymMatrix, threshold: f64, p_max: Option<usize>) -> Result<Analysis> {
    let spec = decompose(a)?;
    let n = spec.n();
    let pd = spec.is_positive_definite();
    let p_max = p_max.unwrap_or(n.min(20)).min(n);
    let table = if pd {
        run_admissibility(&spec, 1..=p_max)?
    } else {
        Vec::new()
    };
    Ok(Analysis {
        n,
        positive_definite: pd,
        lambda_max: spec.lambda(1),
        lambda_min: spec.lambda(n),
        norm: spec.norm(),
        stable_rank: if pd { Some(spec.stable_rank()?) } else { None },
        select_p: if pd { Some(spec.select_p(threshold)?) } else { None },
        threshold,
        table,
    })
}

impl Analysis {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n                  {}", self.n);
        let _ = writeln!(s, "positive definite  {}", self.positive_definite);
        let _ = writeln!(s, "lambda_max         {}", format_4e(self.lambda_max));
        let _ = writeln!(s, "lambda_min         {}", format_4e(self.lambda_min));
        if let Some(sr) = self.stable_rank {
            let _ = writeln!(s, "stable rank        {}", format_4e(sr));
        }
        if let Some(p) = self.select_p {
            let _ = writeln!(s, "select_p({})     {p}", self.threshold);
        }
        if !self.table.is_empty() {
            let _ = writeln!(s, "{:>4}  {:>12}  {:>12}", "p", "gap", "delta_max");
            for r in &self.table {
                let dm = r.delta_max.map_or("degenerate".to_string(), format_4e);
                let _ = writeln!(s, "{:>4}  {:>12}  {:>12}", r.p, format_4e(r.gap), dm);
            }
        }
        s
    }
}

/// All bounds for `A` and one noise draw, plus the measured error.
pub fn bound_instance(a: &SymMatrix, p: usize, noise: &NoiseSpec, refined: bool) -> Result<BoundReport> {
    let spec = decompose(a)?;
    let n = spec.n();
    let e = sample_noise(noise, n);
    let e_norm = spectral_norm(&e)?;
    let perturbed = decompose(&a.add(&e))?;
    let actual = low_rank_inverse_distance(&spec, &perturbed, p)?;
    if spec.is_positive_definite() {
        let adm = check_admissibility(&spec, p, e_norm, Variant::PositiveDefinite);
        let main = main_bound_for(&spec, p, e_norm)?;
        let eymn = eymn_bound_for(&spec, p, e_norm)?;
        let refined = if refined {
            let dd = spec.doubling_distance(p)?;
            let x = spec.interaction_param(&e, dd.window_range())?;
            Some(bounds::refined_bound_pd(&spec, p, e_norm, dd.r, x)?)
        } else {
            None
        };
        Ok(BoundReport::new(Some(eymn), main, refined, adm, Some(actual)))
    } else {
        let idx = spec.signed_indexing(p)?;
        let adm = check_admissibility(&spec, p, e_norm, Variant::Symmetric);
        let main = bound_symmetric(&spec, &idx, e_norm)?;
        let refined = if refined {
            let dd = spec.doubling_distance(p)?;
            let x = spec.interaction_param(&e, dd.window_range())?;
            Some(bounds::refined_bound_symmetric(&spec, &idx, e_norm, &dd, x)?)
        } else {
            None
        };
        Ok(BoundReport::new(None, main, refined, adm, Some(actual)))
    }
}

/// Plain versus preconditioned CG on one noisy instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PcgReport {
    pub n: usize,
    pub p: usize,
    pub tau: f64,
    pub eps: f64,
    pub e_norm: f64,
    pub iterations_plain: usize,
    pub iterations_preconditioned: usize,
    pub converged: bool,
    pub kappa_plain: f64,
    pub kappa_measured: f64,
    pub kappa_bound_main: Option<f64>,
    pub kappa_bound_eymn: Option<f64>,
    pub predicted_iterations: usize,
    pub stopping: StoppingRule,
}

/// Builds the preconditioner from `A + E`, solves `A x = b` for a fixed
/// right-hand side with known solution, and compares with the predictions.
/// `tau = None` selects `1 / lambda_1(A + E)`.
pub fn pcg_benchmark(
    a: &SymMatrix,
    noise: &NoiseSpec,
    p: usize,
    tau: Option<f64>,
    eps: f64,
    stopping: StoppingRule,
) -> Result<PcgReport> {
    let spec = decompose(a)?;
    spec.require_positive_definite()?;
    let n = spec.n();
    let e = sample_noise(noise, n);
    let e_norm = spectral_norm(&e)?;
    let noisy = decompose(&a.add(&e))?;
    let m = LowRankPreconditioner::new(&noisy, p, tau)?;
    let exact: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64).sqrt()).collect();
    let b = a.matvec(&exact);
    let max_iter = 20 * n + 100;
    let opts = PcgOptions::new(eps, max_iter).with_exact(exact, stopping);
    let plain = pcg_solve_with(a, &b, None, &opts)?;
    let pre = pcg_solve_with(a, &b, Some(&m), &opts)?;
    let kappa_measured = kappa_measure(a, &m)?;
    let kappa_plain = spec.lambda(1) / spec.lambda(n);
    Ok(PcgReport {
        n,
        p,
        tau: m.tau(),
        eps,
        e_norm,
        iterations_plain: plain.iterations,
        iterations_preconditioned: pre.iterations,
        converged: plain.converged && pre.converged,
        kappa_plain,
        kappa_measured,
        kappa_bound_main: kappa_bound(&spec, p, e_norm, m.tau(), BoundKind::Main).ok(),
        kappa_bound_eymn: kappa_bound(&spec, p, e_norm, m.tau(), BoundKind::Eymn).ok(),
        predicted_iterations: predicted_iterations(kappa_measured, eps),
        stopping,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseKind;

    #[test]
    fn format_4e_examples() {
        assert_eq!(format_4e(1334.0), "1.3340e+03");
        assert_eq!(format_4e(0.000_025), "2.5000e-05");
        assert_eq!(format_4e(-7.0), "-7.0000e+00");
        assert_eq!(format_4e(0.0), "0.0000e+00");
        assert_eq!(format_4e(1e-123), "1.0000e-123");
        assert_eq!(format_4e(f64::NAN), "nan");
        assert_eq!(format_4e(f64::INFINITY), "inf");
    }

    #[test]
    fn presets() {
        let c = Preset::Census.scales();
        assert_eq!(c.len(), 11);
        assert_eq!((c[0], c[10]), (1.0, 6.0));
        let b = Preset::Bcsstk09.scales();
        assert_eq!(b.len(), 10);
        assert_eq!((b[0], b[9]), (1.2, 3.0));
        let h = Preset::Hamiltonian.scales();
        assert_eq!(h.len(), 10);
        assert!((h[0] - 1e-4).abs() < 1e-18 && (h[9] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn config_parses_with_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"matrix": {"source": "hamiltonian", "n": 50}, "p": "auto",
                "noise": {"kind": "goe", "delta": 1.0}, "scales": "hamiltonian"}"#,
        )
        .unwrap();
        assert_eq!(cfg.trials, 100);
        assert_eq!(cfg.p, RankChoice::Auto);
        assert_eq!(cfg.scales.values().len(), 10);
        let cfg = ExperimentConfig::from_json(
            r#"{"matrix": {"source": "synthetic", "evals": [3, 2, 1]}, "p": 1,
                "noise": {"kind": "rademacher", "delta": 0.01}, "scales": [0.5, 1.0], "trials": 3}"#,
        )
        .unwrap();
        assert_eq!(cfg.p, RankChoice::Fixed(1));
        assert!(ExperimentConfig::from_json(
            r#"{"matrix": {"source": "synthetic", "evals": [1]}, "p": 1,
                "noise": {"kind": "goe", "delta": 1}, "scales": []}"#
        )
        .is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"matrix": {"source": "synthetic", "evals": [1]}, "p": "most",
                "noise": {"kind": "goe", "delta": 1}, "scales": [1]}"#
        )
        .is_err());
    }

    fn small_config(scales: Vec<f64>) -> ExperimentConfig {
        ExperimentConfig {
            matrix: MatrixSpec::Synthetic {
                evals: vec![20.0, 15.0, 10.0, 8.0, 4.0, 2.0, 1.0],
                seed: 3,
            },
            p: RankChoice::Fixed(2),
            noise: NoiseSpec::new(NoiseKind::Goe, 0.01),
            scales: ScaleGrid::List(scales),
            trials: 6,
            base_seed: 42,
            outputs: OutputPaths::default(),
        }
    }

    #[test]
    fn zero_scale_gives_zero_error_and_bound() {
        let run = run_sharpness(&small_config(vec![0.0, 1.0])).unwrap();
        let r0 = &run.records[0];
        assert_eq!(r0.actual_mean, 0.0);
        assert_eq!(r0.our_bound_mean, 0.0);
        assert_eq!(r0.admissible_fraction, 1.0);
        let r1 = &run.records[1];
        assert!(r1.actual_mean > 0.0 && r1.actual_mean < r1.our_bound_mean);
        assert!(r1.ratio_eymn_ours > 1.0);
    }

    #[test]
    fn inadmissible_scales_are_counted() {
        let run = run_sharpness(&small_config(vec![1e4])).unwrap();
        assert_eq!(run.records[0].admissible_fraction, 0.0);
        assert!(run.records[0].actual_mean.is_nan());
        assert!(csv_string(&run.records).contains("nan"));
    }

    #[test]
    fn csv_is_deterministic() {
        let cfg = small_config(vec![0.5, 1.0, 2.0]);
        let a = csv_string(&run_sharpness(&cfg).unwrap().records);
        let b = csv_string(&run_sharpness(&cfg).unwrap().records);
        assert_eq!(a, b);
        assert!(a.starts_with(&CSV_HEADER.join(",")));
        assert_eq!(a.lines().count(), 4);
    }

    #[test]
    fn empty_records_give_header_only() {
        assert_eq!(csv_string(&[]), format!("{}\n", CSV_HEADER.join(",")));
        assert!(plot_svg(&[], "x").is_err());
    }

    #[test]
    fn admissibility_table_flags_degenerate_gaps() {
        let s = decompose(&SymMatrix::diag(&[9.0, 4.0, 4.0, 1.0])).unwrap();
        let rows = run_admissibility(&s, 1..=3).unwrap();
        assert!(!rows[0].degenerate);
        assert_eq!(rows[0].delta_max, Some(1.0 / 16.0));
        assert!(rows[1].degenerate && rows[1].delta_max.is_none());
        assert!(!rows[2].degenerate);
        assert!(run_admissibility(&decompose(&SymMatrix::diag(&[1.0, -1.0])).unwrap(), [1]).is_err());
    }

    #[test]
    fn bound_instance_reports_all_values() {
        let a = SymMatrix::diag(&[10.0, 6.0, 3.0, 1.0]);
        let rep = bound_instance(&a, 2, &NoiseSpec::new(NoiseKind::Goe, 0.01).with_seed(1), true).unwrap();
        assert!(rep.admissibility.satisfied);
        assert!(rep.actual_error.unwrap() <= rep.main);
        assert!(rep.eymn.unwrap() > rep.main);
        assert!(rep.refined.is_some());
    }

    #[test]
    fn pcg_benchmark_runs() {
        let evals: Vec<f64> = (1..=30).map(|i| (i * i) as f64).collect();
        let a = synthetic_spectrum(&evals, 9).unwrap();
        let rep = pcg_benchmark(
            &a,
            &NoiseSpec::new(NoiseKind::Goe, 1e-3).with_seed(2),
            5,
            None,
            1e-8,
            StoppingRule::RelativeANormError,
        )
        .unwrap();
        assert!(rep.converged);
        assert!(rep.iterations_preconditioned <= rep.predicted_iterations);
        assert!(rep.kappa_measured < rep.kappa_plain);
    }
}
