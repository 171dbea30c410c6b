//! Browser bindings for the perturbation-bound toolkit.
//!
//! Each exported function returns a JSON string. The logic lives in plain
//! Rust functions so it can be tested natively.

use invpert::bounds::{check_admissibility, Variant};
use invpert::contour::build_contour_pd;
use invpert::harness::{plot_svg, run_sharpness_on, ExperimentConfig, MatrixSpec, OutputPaths, RankChoice, ScaleGrid};
use invpert::matgen::{
    counterexample_decouple, counterexample_swap, hamiltonian, synthetic_spectrum, HamiltonianParams,
};
use invpert::noise::{NoiseKind, NoiseSpec};
use invpert::{decompose, Error, Result};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest dimension the page accepts; dense work grows like `n^3`.
pub const MAX_N: usize = 200;

fn parse_kind(kind: &str) -> Result<NoiseKind> {
    kind.parse().map_err(Error::InvalidArgument)
}

fn check_n(n: usize) -> Result<()> {
    if !(2..=MAX_N).contains(&n) {
        return Err(Error::InvalidArgument(format!("n must be in 2..={MAX_N}, got {n}")));
    }
    Ok(())
}

/// Sharpness sweep on the scaled Hamiltonian: records plus an SVG plot.
pub fn sharpness_curve_json(
    n: usize,
    p: usize,
    kind: &str,
    scales: &[f64],
    trials: usize,
    seed: u64,
) -> Result<String> {
    check_n(n)?;
    let a = hamiltonian(&HamiltonianParams::new(n))?;
    let cfg = ExperimentConfig {
        matrix: MatrixSpec::Hamiltonian {
            n,
            omega: None,
            amplitude: None,
        },
        p: RankChoice::Fixed(p),
        noise: NoiseSpec::new(parse_kind(kind)?, 1.0),
        scales: ScaleGrid::List(scales.to_vec()),
        trials,
        base_seed: seed,
        outputs: OutputPaths::default(),
    };
    cfg.validate()?;
    let run = run_sharpness_on(&a, &cfg)?;
    let svg = plot_svg(&run.records, &format!("Hamiltonian n = {n}, p = {p}, {kind} noise"))?;
    Ok(json!({ "n": run.n, "p": run.p, "records": run.records, "svg": svg }).to_string())
}

/// Integration contour around the `p` smallest eigenvalues of a positive spectrum.
pub fn contour_geometry_json(evals: &[f64], p: usize) -> Result<String> {
    let a = synthetic_spectrum(evals, 0)?;
    let spec = decompose(&a)?;
    let path = build_contour_pd(&spec, p)?;
    let adm = check_admissibility(&spec, p, 0.0, Variant::PositiveDefinite);
    let segments: Vec<_> = path
        .segments
        .iter()
        .map(
            |s| json!({ "start": [s.start.re, s.start.im], "end": [s.end.re, s.end.im], "label": s.label.to_string() }),
        )
        .collect();
    Ok(json!({
        "eigenvalues": spec.eigenvalues(),
        "params": path.params,
        "segments": segments,
        "separation": path.separation,
        "noise_limit": adm.gap.min(adm.lambda_n) / 4.0,
    })
    .to_string())
}

/// Swap and decoupling counterexamples at dimension `n`.
pub fn counterexample_ratio_json(n: usize, eps: f64) -> Result<String> {
    let swap = counterexample_swap(n, eps)?;
    let decouple = counterexample_decouple(n)?;
    Ok(json!({
        "n": n,
        "eps": eps,
        "k": swap.k,
        "ratio": swap.pair.low_rank_inverse_error(1) / swap.pair.inverse_error(),
        "expected_ratio": swap.expected_ratio,
        "decouple_low_rank_error": decouple.low_rank_error(1),
        "decouple_inverse_error": decouple.low_rank_inverse_error(1),
    })
    .to_string())
}

fn to_js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn sharpness_curve(
    n: usize,
    p: usize,
    kind: &str,
    scales: Vec<f64>,
    trials: usize,
    seed: u64,
) -> std::result::Result<String, JsError> {
    to_js(sharpness_curve_json(n, p, kind, &scales, trials, seed))
}

#[wasm_bindgen]
pub fn contour_geometry(evals: Vec<f64>, p: usize) -> std::result::Result<String, JsError> {
    to_js(contour_geometry_json(&evals, p))
}

#[wasm_bindgen]
pub fn counterexample_ratio(n: usize, eps: f64) -> std::result::Result<String, JsError> {
    to_js(counterexample_ratio_json(n, eps))
}
