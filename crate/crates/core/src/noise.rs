//! Systematic "linear shift" distortion of XX gates and its fit to data.
//!
//! An XX rotation by `t` is first trimmed to `t_trim ∈ (−π/4, π/4]` with
//! `t = t_trim + nπ/2`; the distorted gate is then
//! `[Z(b·t_trim) ⊗ Z(b·t_trim)] · XX(a·t_trim) · (σ^x⊗σ^x)^n`
//! with `Z(θ) = exp(−iθ/2 σ^z)`. `(a, b) = (1, 0)` is the ideal gate.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::leeyang::CoherenceTrace;
use crate::optim::{multistart, OptimizerConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearShiftParams {
    pub a: f64,
    pub b: f64,
}

impl LinearShiftParams {
    pub const IDEAL: Self = Self { a: 1.0, b: 0.0 };

    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn is_ideal(&self) -> bool {
        *self == Self::IDEAL
    }
}

impl std::str::FromStr for LinearShiftParams {
    type Err = Error;

    /// Parses `a,b`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once(',').ok_or_else(|| Error::Parse(format!("noise parameters must be `a,b`, got `{s}`")))?;
        Ok(Self { a: crate::io::parse_f64(a.trim())?, b: crate::io::parse_f64(b.trim())? })
    }
}

/// Reference parameters for the two-site pipeline, `(J, params)`.
pub const REFERENCE_PARAMS: [(f64, LinearShiftParams); 3] = [
    (0.9, LinearShiftParams { a: 0.99121641, b: -0.47829858 }),
    (0.96, LinearShiftParams { a: 1.12953451, b: 0.042765 }),
    (1.20, LinearShiftParams { a: 0.99011104, b: -0.36491532 }),
];

/// `(t_trim, n)` with `t = t_trim + n·π/2` and `t_trim ∈ (−π/4, π/4]`.
pub fn trim_angle(t: f64) -> (f64, i64) {
    let mut n = (t / FRAC_PI_2 - 0.5).ceil() as i64;
    let mut trimmed = t - n as f64 * FRAC_PI_2;
    // guard rounding at the interval ends
    if trimmed <= -FRAC_PI_4 {
        n -= 1;
        trimmed += FRAC_PI_2;
    } else if trimmed > FRAC_PI_4 + 1e-15 {
        n += 1;
        trimmed -= FRAC_PI_2;
    }
    (trimmed, n)
}

/// The distorted XX gate as a gate sequence, in application order.
pub fn noisy_xx(i: usize, j: usize, t: f64, params: LinearShiftParams) -> Vec<Gate> {
    let (t_trim, n) = trim_angle(t);
    let mut gates = Vec::with_capacity(5);
    if n.rem_euclid(2) == 1 {
        gates.push(Gate::X(i));
        gates.push(Gate::X(j));
    }
    gates.push(Gate::XX(i, j, params.a * t_trim));
    if params.b != 0.0 {
        gates.push(Gate::Rz(i, params.b * t_trim));
        gates.push(Gate::Rz(j, params.b * t_trim));
    }
    gates
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseOptions {
    /// Also distort YY and ZZ, realized as basis-rotated XX. On by default.
    pub rotated_gates: bool,
}

impl Default for NoiseOptions {
    fn default() -> Self {
        Self { rotated_gates: true }
    }
}

/// Replaces every XX gate, and unless disabled every YY/ZZ, with its
/// distorted form.
pub fn apply_noise_model(circuit: &Circuit, params: LinearShiftParams, options: NoiseOptions) -> Circuit {
    let mut out = Circuit::new(circuit.n_qubits());
    let mut push_all = |gates: Vec<Gate>| {
        out.extend(gates).expect("gates of a valid circuit stay valid");
    };
    for g in circuit.gates() {
        match *g {
            Gate::XX(i, j, t) => push_all(noisy_xx(i, j, t, params)),
            Gate::YY(i, j, t) if options.rotated_gates => {
                let mut seq = vec![Gate::Rz(i, -FRAC_PI_2), Gate::Rz(j, -FRAC_PI_2)];
                seq.extend(noisy_xx(i, j, t, params));
                seq.extend([Gate::Rz(i, FRAC_PI_2), Gate::Rz(j, FRAC_PI_2)]);
                push_all(seq);
            }
            Gate::ZZ(i, j, t) if options.rotated_gates => {
                let mut seq = vec![Gate::Ry(i, FRAC_PI_2), Gate::Ry(j, FRAC_PI_2)];
                seq.extend(noisy_xx(i, j, t, params));
                seq.extend([Gate::Ry(i, -FRAC_PI_2), Gate::Ry(j, -FRAC_PI_2)]);
                push_all(seq);
            }
            _ => push_all(vec![g.clone()]),
        }
    }
    out
}

/// `Σ |L_a − L_b|²` over a shared θ grid.
pub fn trace_residual(a: &CoherenceTrace, b: &CoherenceTrace) -> Result<f64> {
    if a.points.len() != b.points.len() || a.points.iter().zip(&b.points).any(|(p, q)| (p.theta - q.theta).abs() > 1e-12) {
        return Err(Error::InvalidModel("traces do not share a θ grid".into()));
    }
    Ok(a.points.iter().zip(&b.points).map(|(p, q)| (p.l - q.l).norm_sqr()).sum())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseFit {
    pub params: LinearShiftParams,
    pub residual: f64,
    pub converged: bool,
    /// `(start, fitted params, residual)` per start.
    pub starts: Vec<(LinearShiftParams, LinearShiftParams, f64)>,
}

/// Least-squares fit of `(a, b)` so that `model(params)` reproduces
/// `observed`, started at `(1, 0)` and `config.restarts − 1` perturbations.
pub fn fit_noise_params<M>(observed: &CoherenceTrace, model: M, config: &OptimizerConfig) -> Result<NoiseFit>
where
    M: Fn(LinearShiftParams) -> Result<CoherenceTrace> + Sync,
{
    config.validate()?;
    trace_residual(observed, &model(LinearShiftParams::IDEAL)?)?;
    let objective = |x: &[f64]| match model(LinearShiftParams::new(x[0], x[1])) {
        Ok(trace) => trace_residual(observed, &trace).unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    };
    let start = |r: usize, rng: &mut ChaCha8Rng| {
        use rand::Rng;
        if r == 0 {
            vec![1.0, 0.0]
        } else {
            vec![1.0 + rng.random_range(-0.1..0.1), rng.random_range(-0.5..0.5)]
        }
    };
    let (runs, best) = multistart(config, objective, start, 0.05);
    let starts = runs
        .iter()
        .enumerate()
        .map(|(r, run)| {
            use rand::SeedableRng;
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            rng.set_stream(r as u64);
            let s = start(r, &mut rng);
            (LinearShiftParams::new(s[0], s[1]), LinearShiftParams::new(run.x[0], run.x[1]), run.fx)
        })
        .collect();
    let fit = NoiseFit {
        params: LinearShiftParams::new(runs[best].x[0], runs[best].x[1]),
        residual: runs[best].fx,
        converged: runs[best].converged,
        starts,
    };
    if !fit.converged {
        return Err(Error::DidNotConverge { iterations: runs[best].iterations });
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::distance_up_to_phase;
    use proptest::prelude::*;

    fn unitary(gates: Vec<Gate>) -> crate::linalg::OperatorMatrix {
        let mut c = Circuit::new(2);
        c.extend(gates).unwrap();
        c.unitary().unwrap()
    }

    #[test]
    fn trim_examples() {
        assert_eq!(trim_angle(0.1), (0.1, 0));
        let (t, n) = trim_angle(FRAC_PI_2);
        assert!(t.abs() < 1e-15 && n == 1);
        let (t, n) = trim_angle(0.9);
        assert!((t - (0.9 - FRAC_PI_2)).abs() < 1e-15 && n == 1);
        assert!((t + 0.6708).abs() < 1e-4);
        assert_eq!(trim_angle(FRAC_PI_4), (FRAC_PI_4, 0));
        let (t, n) = trim_angle(-FRAC_PI_4);
        assert!((t - FRAC_PI_4).abs() < 1e-15 && n == -1);
    }

    #[test]
    fn ideal_parameters_reproduce_xx() {
        for t in [0.3, 0.9, -2.2, 4.0, FRAC_PI_2] {
            let d = distance_up_to_phase(&unitary(noisy_xx(0, 1, t, LinearShiftParams::IDEAL)), &Gate::XX(0, 1, t).matrix());
            assert!(d < 1e-12, "t = {t}: {d}");
        }
    }

    #[test]
    fn reference_params_regression() {
        // XX(0.3) under the J = 0.9 parameters: diagonal-blocked 4×4 unitary
        let u = unitary(noisy_xx(0, 1, 0.3, REFERENCE_PARAMS[0].1));
        let (a, b) = (0.99121641, -0.47829858);
        let (c, s) = ((a * 0.3f64).cos(), (a * 0.3f64).sin());
        let phase = |m: f64| crate::C64::from_polar(1.0, -m * b * 0.3 / 2.0);
        // Rz⊗Rz phases: |00⟩ → e^{−iφ}, |11⟩ → e^{+iφ}, |01⟩,|10⟩ → 1
        let expected = [
            (0, 0, phase(2.0) * c),
            (0, 3, phase(2.0) * crate::C64::new(0.0, -s)),
            (3, 3, phase(-2.0) * c),
            (1, 1, crate::C64::new(c, 0.0)),
            (1, 2, crate::C64::new(0.0, -s)),
        ];
        for (r, col, v) in expected {
            assert!((u[(r, col)] - v).norm() < 1e-12, "({r},{col})");
        }
    }

    #[test]
    fn rotated_variants_match_ideal_yy_zz() {
        let opts = NoiseOptions::default();
        for g in [Gate::YY(0, 1, 0.7), Gate::ZZ(0, 1, -1.3), Gate::YY(1, 0, 2.0)] {
            let mut c = Circuit::new(2);
            c.push(g.clone()).unwrap();
            let noisy = apply_noise_model(&c, LinearShiftParams::IDEAL, opts);
            assert!(noisy.len() > 1);
            assert!(distance_up_to_phase(&noisy.unitary().unwrap(), &c.unitary().unwrap()) < 1e-12, "{g}");
        }
    }

    #[test]
    fn noise_can_leave_yy_zz_alone() {
        let mut c = Circuit::new(3);
        c.extend([Gate::H(0), Gate::XX(0, 1, 0.9), Gate::YY(1, 2, 0.2), Gate::ZZ(0, 2, 0.3), Gate::XX(1, 2, 0.1)]).unwrap();
        let noisy = apply_noise_model(&c, LinearShiftParams::new(1.05, 0.2), NoiseOptions { rotated_gates: false });
        // XX(0.9) → X, X, XX, Rz, Rz; XX(0.1) → XX, Rz, Rz
        assert_eq!(noisy.len(), c.len() + 4 + 2);
        assert_eq!(noisy.count("YY"), 1);
        assert_eq!(noisy.count("ZZ"), 1);
        let full = apply_noise_model(&c, LinearShiftParams::new(1.05, 0.2), NoiseOptions::default());
        assert_eq!((full.count("YY"), full.count("ZZ"), full.count("XX")), (0, 0, 4));
        assert_eq!("0.99,-0.4".parse::<LinearShiftParams>().unwrap(), LinearShiftParams::new(0.99, -0.4));
    }

    proptest! {
        #[test]
        fn trim_identity(t in -20.0f64..20.0) {
            let (tt, n) = trim_angle(t);
            prop_assert!(tt > -FRAC_PI_4 && tt <= FRAC_PI_4 + 1e-15);
            prop_assert!((tt + n as f64 * FRAC_PI_2 - t).abs() < 1e-12);
            let mut gates = vec![Gate::XX(0, 1, tt)];
            if n.rem_euclid(2) == 1 { gates.insert(0, Gate::X(1)); gates.insert(0, Gate::X(0)); }
            prop_assert!(distance_up_to_phase(&unitary(gates), &Gate::XX(0, 1, t).matrix()) < 1e-12);
        }

        #[test]
        fn ideal_noise_preserves_random_circuits(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 3 + (seed % 2) as usize;
            let mut c = Circuit::new(n);
            for _ in 0..12 {
                let a = rng.random_range(0..n);
                let b = (a + rng.random_range(1..n)) % n;
                let t = rng.random_range(-4.0..4.0);
                let g = match rng.random_range(0..5) {
                    0 => Gate::XX(a, b, t),
                    1 => Gate::YY(a, b, t),
                    2 => Gate::ZZ(a, b, t),
                    3 => Gate::Rz(a, t),
                    _ => Gate::H(a),
                };
                c.push(g).unwrap();
            }
            for opts in [NoiseOptions::default(), NoiseOptions { rotated_gates: false }] {
                let noisy = apply_noise_model(&c, LinearShiftParams::IDEAL, opts);
                prop_assert!(distance_up_to_phase(&noisy.unitary().unwrap(), &c.unitary().unwrap()) < 1e-10);
            }
        }
    }
}
