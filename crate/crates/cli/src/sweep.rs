//! Batch runs of the normal flow over a grid of invariants and initial
//! covectors.

use std::collections::BTreeMap;

use engel_core::algebra::EngelConstants;
use engel_core::classify::{build_family, Family};
use engel_core::flow::{conservation_report, integrate, VerticalState};
use engel_core::ode::{IntegratorConfig, Method};
use engel_core::{EngelError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::args::parse_param_key;
use crate::error::{error_object, CliError};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    family: Option<Family>,
    /// Values per free parameter; the grid is their cartesian product.
    #[serde(default)]
    params: BTreeMap<String, Vec<f64>>,
    /// Explicit invariant vectors, run before the family grid.
    #[serde(default)]
    t: Vec<[f64; 6]>,
    #[serde(default)]
    h0: Vec<[f64; 4]>,
    random_h0: Option<RandomH0>,
    #[serde(default = "default_t_max")]
    t_max: f64,
    #[serde(default = "default_step")]
    step: f64,
    #[serde(default)]
    method: Method,
    #[serde(default = "default_rel_tol")]
    rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    abs_tol: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomH0 {
    count: usize,
    /// Defaults to the global `--seed`.
    seed: Option<u64>,
    /// Components are uniform in `[-scale, scale]`.
    #[serde(default = "default_scale")]
    scale: f64,
}

fn default_t_max() -> f64 {
    10.0
}

fn default_step() -> f64 {
    1e-3
}

fn default_rel_tol() -> f64 {
    1e-10
}

fn default_abs_tol() -> f64 {
    1e-12
}

fn default_scale() -> f64 {
    1.0
}

/// One point of the invariant grid, before building.
#[derive(Debug, Clone)]
enum Point {
    Explicit([f64; 6]),
    Family(Family, BTreeMap<usize, f64>),
}

impl Point {
    fn constants(&self) -> Result<EngelConstants> {
        match self {
            Point::Explicit(t) => Ok(EngelConstants(*t)),
            Point::Family(f, p) => build_family(*f, p),
        }
    }

    fn describe(&self) -> Value {
        match self {
            Point::Explicit(t) => json!({ "source": "explicit", "t": t }),
            Point::Family(f, p) => {
                let params: BTreeMap<String, f64> =
                    p.iter().map(|(i, v)| (format!("T{i}"), *v)).collect();
                json!({ "source": "family", "family": f, "params": params })
            }
        }
    }
}

fn family_points(family: Family, params: &BTreeMap<String, Vec<f64>>) -> Result<Vec<Point>> {
    let mut axes: BTreeMap<usize, &Vec<f64>> = BTreeMap::new();
    for (key, values) in params {
        let i = parse_param_key(key).map_err(EngelError::InvalidInput)?;
        axes.insert(i, values);
    }
    let mut grid = vec![BTreeMap::new()];
    for (i, values) in axes {
        grid = grid
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.insert(i, v);
                    q
                })
            })
            .collect();
    }
    Ok(grid.into_iter().map(|p| Point::Family(family, p)).collect())
}

pub fn run(text: &str, seed: u64) -> std::result::Result<Value, CliError> {
    let cfg: SweepConfig = serde_json::from_str(text)
        .map_err(|e| EngelError::InvalidInput(format!("sweep config: {e}")))?;
    let integrator = IntegratorConfig {
        method: cfg.method,
        step: cfg.step,
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        t_max: cfg.t_max,
    };
    integrator.validate()?;

    let mut points: Vec<Point> = cfg.t.iter().copied().map(Point::Explicit).collect();
    match cfg.family {
        Some(f) => points.extend(family_points(f, &cfg.params)?),
        None if !cfg.params.is_empty() => {
            return Err(EngelError::InvalidInput("sweep params need a family".into()).into());
        }
        None => {}
    }

    let mut h0s = cfg.h0.clone();
    if let Some(r) = &cfg.random_h0 {
        let mut rng = ChaCha8Rng::seed_from_u64(r.seed.unwrap_or(seed));
        h0s.extend(
            (0..r.count).map(|_| std::array::from_fn(|_| rng.gen_range(-r.scale..=r.scale))),
        );
    }

    let jobs: Vec<(&Point, [f64; 4])> = points
        .iter()
        .flat_map(|p| h0s.iter().map(move |h| (p, *h)))
        .collect();
    let rows: Vec<Value> = jobs
        .par_iter()
        .enumerate()
        .map(|(index, (point, h0))| run_point(index, point, h0, &integrator))
        .collect();
    let failed = rows.iter().filter(|r| r.get("error").is_some()).count();
    Ok(json!({ "count": rows.len(), "failed": failed, "rows": rows }))
}

fn run_point(index: usize, point: &Point, h0: &[f64; 4], cfg: &IntegratorConfig) -> Value {
    let mut row = json!({ "index": index, "point": point.describe(), "h0": h0 });
    let outcome = point.constants().and_then(|t| {
        let traj = integrate(&t, &VerticalState::from(*h0), cfg)?;
        Ok((t, conservation_report(&t, &traj)))
    });
    let fields = match outcome {
        Ok((t, report)) => json!({
            "t": t,
            "type3": Family::III.contains(&t),
            "drift": report,
            "max_drift": report.max_drift(),
        }),
        Err(e) => json!({ "error": error_object(&e) }),
    };
    if let (Some(r), Value::Object(f)) = (row.as_object_mut(), fields) {
        r.extend(f);
    }
    row
}
