//! Explicit Runge-Kutta integrators on fixed-size states.
//!
//! Classical RK4 with a fixed step, and the Fehlberg 4(5) pair with
//! step-size control (the fifth-order solution is propagated).

use serde::{Deserialize, Serialize};

use crate::{EngelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Rk4,
    #[serde(alias = "rk45_adaptive", alias = "rkf45")]
    Rk45,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for RK4, initial step for RK45.
    pub step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_max: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            step: 1e-3,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            t_max: 10.0,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64, t_max: f64) -> Self {
        IntegratorConfig {
            step,
            t_max,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(EngelError::InvalidParams(msg.into()));
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return bad("t_max must be positive");
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return bad("step must be positive");
        }
        if self.step >= self.t_max {
            return bad("step must be smaller than t_max");
        }
        if self.method == Method::Rk45 && !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }
}

/// Sampled solution: strictly increasing times with one state per time.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

/// One classical RK4 step of size `h` from `(t, y)`.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = f(t + h, &axpy(y, h, &k3));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Advances `y` from `t` by `span` using RK4 sub-steps no longer than
/// `max_step`.
pub fn rk4_advance<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; N],
    span: f64,
    max_step: f64,
) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if span == 0.0 {
        return *y;
    }
    let n = (span.abs() / max_step).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let mut state = *y;
    for i in 0..n {
        state = rk4_step(f, t + i as f64 * h, &state, h);
    }
    state
}

/// Fixed-step RK4 on `[0, t_max]`. Grid times are `k·step`; the last step
/// is shortened to land on `t_max`.
pub fn integrate_rk4<const N: usize, F>(f: F, y0: [f64; N], step: f64, t_max: f64) -> Solution<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let full = (t_max / step * (1.0 - 1e-12)).floor() as usize;
    let mut times = Vec::with_capacity(full + 2);
    let mut states = Vec::with_capacity(full + 2);
    times.push(0.0);
    states.push(y0);
    let mut y = y0;
    for k in 0..full {
        let t = k as f64 * step;
        y = rk4_step(&f, t, &y, step);
        times.push((k + 1) as f64 * step);
        states.push(y);
    }
    let t_last = full as f64 * step;
    if t_max - t_last > 0.0 {
        y = rk4_step(&f, t_last, &y, t_max - t_last);
        times.push(t_max);
        states.push(y);
    }
    Solution { times, states }
}

const FEHLBERG_C: [f64; 6] = [0.0, 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5];
const FEHLBERG_A: [[f64; 5]; 6] = [
    [0.0; 5],
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [
        -8.0 / 27.0,
        2.0,
        -3544.0 / 2565.0,
        1859.0 / 4104.0,
        -11.0 / 40.0,
    ],
];
const FEHLBERG_B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];
const FEHLBERG_B4: [f64; 6] = [
    25.0 / 216.0,
    0.0,
    1408.0 / 2565.0,
    2197.0 / 4104.0,
    -0.2,
    0.0,
];

fn rkf45_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut k = [[0.0; N]; 6];
    for s in 0..6 {
        let ys: [f64; N] = std::array::from_fn(|i| {
            y[i] + h * (0..s).map(|j| FEHLBERG_A[s][j] * k[j][i]).sum::<f64>()
        });
        k[s] = f(t + FEHLBERG_C[s] * h, &ys);
    }
    let y5 =
        std::array::from_fn(|i| y[i] + h * (0..6).map(|s| FEHLBERG_B5[s] * k[s][i]).sum::<f64>());
    let err = std::array::from_fn(|i| {
        h * (0..6)
            .map(|s| (FEHLBERG_B5[s] - FEHLBERG_B4[s]) * k[s][i])
            .sum::<f64>()
    });
    (y5, err)
}

/// Adaptive Fehlberg 4(5) on `[0, t_max]`, recording every accepted step.
pub fn integrate_rkf45<const N: usize, F>(
    f: F,
    y0: [f64; N],
    h0: f64,
    t_max: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Solution<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut times = vec![0.0];
    let mut states = vec![y0];
    let mut t = 0.0;
    let mut y = y0;
    let mut h = h0.min(t_max);
    while t < t_max {
        let min_step = 1e-14 * t.abs().max(1.0);
        if h < min_step {
            return Err(EngelError::StepRejected { t, step: h });
        }
        let last = t + h >= t_max;
        let h_try = if last { t_max - t } else { h };
        let (y_new, err) = rkf45_step(&f, t, &y, h_try);
        let norm = (0..N)
            .map(|i| err[i].abs() / (abs_tol + rel_tol * y[i].abs().max(y_new[i].abs())))
            .fold(0.0, f64::max);
        if !norm.is_finite() {
            h = 0.2 * h_try;
            continue;
        }
        if norm <= 1.0 {
            t = if last { t_max } else { t + h_try };
            y = y_new;
            times.push(t);
            states.push(y);
        }
        let factor = if norm == 0.0 {
            5.0
        } else {
            (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = h_try * factor;
    }
    Ok(Solution { times, states })
}

/// Integrates on `[0, cfg.t_max]` with the configured method.
pub fn solve<const N: usize, F>(f: F, y0: [f64; N], cfg: &IntegratorConfig) -> Result<Solution<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    cfg.validate()?;
    match cfg.method {
        Method::Rk4 => Ok(integrate_rk4(f, y0, cfg.step, cfg.t_max)),
        Method::Rk45 => integrate_rkf45(f, y0, cfg.step, cfg.t_max, cfg.rel_tol, cfg.abs_tol),
    }
}
