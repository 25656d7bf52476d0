//! Browser bindings: one fOU path, a mollifier derivative curve and a
//! regularized local-time profile.

use foult::fbm::{FbmMethod, HurstParam, TimeGrid};
use foult::fou::{FouGenerator, FouParams, Generator};
use foult::localtime::{local_time_reg, LocalTimeQuery};
use foult::mollifier::{Bandwidth, MollifierKernel, MultiIndex};
use foult::rng::Domain;
use wasm_bindgen::prelude::*;

fn js(e: foult::FoultError) -> JsError {
    JsError::new(&e.to_string())
}

fn abscissae(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, JsError> {
    if points < 2 || !(hi > lo) {
        return Err(JsError::new("need hi > lo and at least 2 points"));
    }
    let dx = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + i as f64 * dx).collect())
}

fn path(
    h: f64,
    v: f64,
    x0: f64,
    steps: usize,
    seed: u64,
    volterra: bool,
) -> Result<foult::SamplePath, JsError> {
    let grid = TimeGrid::new(1.0, steps).map_err(js)?;
    let params = FouParams::new(HurstParam::new(h).map_err(js)?, v, vec![x0]).map_err(js)?;
    let generator = if volterra {
        Generator::Volterra
    } else {
        Generator::FromFbm(FbmMethod::Circulant)
    };
    FouGenerator::new(grid, params, generator)
        .and_then(|g| g.path(seed, Domain::ProcessA, 0))
        .map_err(js)
}

/// Values of one fOU path on `steps + 1` equispaced times in `[0, 1]`.
#[wasm_bindgen]
pub fn sample_path(
    h: f64,
    v: f64,
    x0: f64,
    steps: usize,
    seed: u64,
    volterra: bool,
) -> Result<Vec<f64>, JsError> {
    Ok(path(h, v, x0, steps, seed, volterra)?.component(0).to_vec())
}

/// `f_ε^{(k)}` on `points` equispaced abscissae in `[lo, hi]`.
#[wasm_bindgen]
pub fn mollifier_curve(
    eps: f64,
    k: usize,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    let kernel = Bandwidth::new(eps)
        .and_then(|e| MollifierKernel::new(e, MultiIndex::new(vec![k])?))
        .map_err(js)?;
    Ok(abscissae(lo, hi, points)?
        .into_iter()
        .map(|x| kernel.eval1(x))
        .collect())
}

/// Regularized derivative local time `α̃_ε^{(k)}(x, 1)` of the path drawn
/// by [`sample_path`] with the same arguments, over a level sweep.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn local_time_profile(
    h: f64,
    v: f64,
    x0: f64,
    steps: usize,
    seed: u64,
    volterra: bool,
    eps: f64,
    k: usize,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    let p = path(h, v, x0, steps, seed, volterra)?;
    let eps = Bandwidth::new(eps).map_err(js)?;
    let q = LocalTimeQuery::new(vec![0.0], 1.0, eps, MultiIndex::new(vec![k]).map_err(js)?)
        .map_err(js)?;
    abscissae(lo, hi, points)?
        .into_iter()
        .map(|x| local_time_reg(&p, &q.with_x(vec![x])).map_err(js))
        .collect()
}
