//! Derivative-free minimizers used for TFD angles and noise fits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    NelderMead,
    CoordinateDescent,
}

impl std::str::FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "nelder-mead" | "nelder_mead" | "nm" => Ok(Method::NelderMead),
            "coordinate-descent" | "coordinate_descent" | "cd" => Ok(Method::CoordinateDescent),
            _ => Err(crate::Error::Parse(format!("unknown optimizer `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best objective after each iteration; non-increasing.
    pub history: Vec<f64>,
}

/// Nelder-Mead with dimension-adaptive coefficients.
///
/// Stops when the spread of simplex values is below `ftol` and the simplex
/// diameter is below `xtol`, or after `max_iters` iterations.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: f64, max_iters: usize, ftol: f64, xtol: f64) -> OptimResult
where
    F: Fn(&[f64]) -> f64,
{
    let d = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if d == 0 {
        let fx = eval(x0);
        return OptimResult { x: Vec::new(), fx, iterations: 0, evaluations, converged: true, history: vec![fx] };
    }
    let df = d as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / df, 0.75 - 1.0 / (2.0 * df), 1.0 - 1.0 / df);

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = eval(&x);
        simplex.push((x, fx));
    }
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        history.push(simplex[0].1);
        let f_spread = simplex[d].1 - simplex[0].1;
        let x_spread = simplex[1..].iter().flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max);
        if f_spread <= ftol && x_spread <= xtol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..d).map(|k| simplex[..d].iter().map(|(x, _)| x[k]).sum::<f64>() / df).collect();
        let toward = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[d].0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = toward(alpha);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = toward(alpha * gamma);
            let fe = eval(&xe);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[d].1 {
                let xc = toward(alpha * rho);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = toward(-rho);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < simplex[d].1.min(fr) {
                simplex[d] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + sigma * (v - b)).collect();
                    let fx = eval(&x);
                    *vertex = (x, fx);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    if history.last() != Some(&simplex[0].1) {
        history.push(simplex[0].1);
    }
    let (x, fx) = simplex.swap_remove(0);
    OptimResult { x, fx, iterations, evaluations, converged, history }
}

/// Cyclic coordinate descent with a shrinking pattern step per coordinate.
pub fn coordinate_descent<F>(f: F, x0: &[f64], step: f64, max_iters: usize, ftol: f64, xtol: f64) -> OptimResult
where
    F: Fn(&[f64]) -> f64,
{
    let d = x0.len();
    let mut evaluations = 1;
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut steps = vec![step; d];
    let mut history = vec![fx];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let start = fx;
        for k in 0..d {
            loop {
                let mut improved = false;
                for dir in [1.0, -1.0] {
                    let mut trial = x.clone();
                    trial[k] += dir * steps[k];
                    let ft = f(&trial);
                    evaluations += 1;
                    if ft < fx {
                        x = trial;
                        fx = ft;
                        improved = true;
                        steps[k] *= 1.5;
                        break;
                    }
                }
                if !improved {
                    steps[k] *= 0.5;
                    break;
                }
            }
        }
        history.push(fx);
        if start - fx <= ftol && steps.iter().all(|&s| s <= xtol) {
            converged = true;
            break;
        }
    }
    OptimResult { x, fx, iterations, evaluations, converged, history }
}

/// Settings shared by the multi-start drivers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_iters: usize,
    pub tolerance: f64,
    pub restarts: usize,
    pub rng_seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { method: Method::NelderMead, max_iters: 4000, tolerance: 1e-10, restarts: 8, rng_seed: 0 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(crate::Error::InvalidModel(format!("optimizer tolerance must be positive, got {}", self.tolerance)));
        }
        if self.restarts == 0 {
            return Err(crate::Error::InvalidModel("optimizer needs at least one restart".into()));
        }
        Ok(())
    }

    pub fn minimize<F>(&self, f: F, x0: &[f64], step: f64) -> OptimResult
    where
        F: Fn(&[f64]) -> f64,
    {
        let xtol = self.tolerance.sqrt();
        match self.method {
            Method::NelderMead => nelder_mead(f, x0, step, self.max_iters, self.tolerance, xtol),
            Method::CoordinateDescent => coordinate_descent(f, x0, step, self.max_iters, self.tolerance, xtol),
        }
    }
}

/// Independent restarts from `start(restart, rng)`, run in parallel.
///
/// Each restart draws from its own ChaCha stream, so results do not depend on
/// scheduling. Returns every run in restart order and the index of the best
/// (lowest objective, earliest on ties).
pub fn multistart<F, S>(config: &OptimizerConfig, f: F, start: S, step: f64) -> (Vec<OptimResult>, usize)
where
    F: Fn(&[f64]) -> f64 + Sync,
    S: Fn(usize, &mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    let runs = par::map_range(config.restarts, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        rng.set_stream(r as u64);
        let x0 = start(r, &mut rng);
        config.minimize(&f, &x0, step)
    });
    let best = (0..runs.len()).fold(0, |b, i| if runs[i].fx < runs[b].fx { i } else { b });
    (runs, best)
}

/// Uniform random point in `[lo, hi)^d`.
pub fn uniform_point(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(lo..hi)).collect()
}
