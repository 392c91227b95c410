//! Variational thermofield-double preparation.
//!
//! Register layout: system A on qubits `0..N`, its copy B on `N..2N`. The
//! circuit starts from Bell pairs `(a_i, b_i)`, the infinite-temperature
//! TFD, and applies `n_layers` of
//!
//! 1. `XX(θa)` and `YY(θa)` on every bond of A and of B,
//! 2. `Rz(θb)` on every qubit,
//! 3. `ZZ(θc)` and `XX(θd)` on every inter-system pair `(a_i, b_i)`.
//!
//! For two sites the inter-system step is wrapped in `SWAP(1, 2)` so that
//! all two-qubit gates act on neighbouring qubits, as on a linear trap.

use std::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, DensityMatrix, Gate, StateVector};
use crate::hamiltonian::{build_hamiltonian, SpinChainSpec};
use crate::linalg::{Eigh, OperatorMatrix};
use crate::optim::{multistart, uniform_point, OptimResult, OptimizerConfig};
use crate::{Error, Result, C64};

pub const ANGLES_PER_LAYER: usize = 4;

/// Reference two-site angles for `J_z = −1` at `β = 10`, one row per `J`,
/// in the stored column convention `(−θ1, −θ2/2, −θ3, −θ4, −θ5, −θ6/2, −θ7, −θ8)`.
pub const REFERENCE_ANGLES: [(f64, [f64; 8]); 6] = [
    (0.9, [0.409, 0.785, 0.480, 1.660, 0.395, 0.785, 0.739, 1.178]),
    (0.96, [1.178, 0.392, 0.555, 1.427, 1.092, 0.392, 0.694, -0.360]),
    (1.03, [0.993, 0.785, 1.014, 1.210, 1.060, 0.785, 0.933, 0.392]),
    (1.06, [0.922, 1.486, 0.438, 0.887, 0.678, 1.446, 0.624, 1.165]),
    (1.15, [0.958, 0.948, 1.008, 1.133, 0.752, 0.753, 0.590, 1.187]),
    (1.20, [0.972, 0.968, 0.990, 1.163, 0.772, 0.772, 0.589, 1.182]),
];

/// Two-layer ansatz with the reference angles for `J_z = −1`, `β = 10`.
pub fn reference_ansatz(j: f64) -> Result<TfdAnsatz> {
    let (_, stored) = REFERENCE_ANGLES
        .iter()
        .find(|(rj, _)| (rj - j).abs() < 1e-9)
        .ok_or_else(|| Error::InvalidModel(format!("no reference angles for J = {j}")))?;
    TfdAnsatz::new(SpinChainSpec::xxz(2, j, -1.0), 2, stored_to_angles(stored))
}

/// Column transform of the stored convention: `θb` columns hold `−θb/2`,
/// every other column holds `−θ`.
pub fn stored_to_angles(stored: &[f64]) -> Vec<f64> {
    stored.iter().enumerate().map(|(i, v)| if i % ANGLES_PER_LAYER == 1 { -2.0 * v } else { -v }).collect()
}

pub fn angles_to_stored(angles: &[f64]) -> Vec<f64> {
    angles.iter().enumerate().map(|(i, v)| if i % ANGLES_PER_LAYER == 1 { -v / 2.0 } else { -v }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfdAnsatz {
    pub spec: SpinChainSpec,
    pub n_layers: usize,
    /// `(θa, θb, θc, θd)` per layer, flattened.
    pub angles: Vec<f64>,
}

impl TfdAnsatz {
    pub fn new(spec: SpinChainSpec, n_layers: usize, angles: Vec<f64>) -> Result<Self> {
        let expected = ANGLES_PER_LAYER * n_layers;
        if angles.len() != expected {
            return Err(Error::AngleCountMismatch { expected, got: angles.len() });
        }
        Ok(Self { spec, n_layers, angles })
    }

    pub fn zeros(spec: SpinChainSpec, n_layers: usize) -> Self {
        Self { spec, n_layers, angles: vec![0.0; ANGLES_PER_LAYER * n_layers] }
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.spec.n_sites
    }
}

/// `(e^{−βH/2}/√Z)_{ab}` as amplitudes of `|a⟩_A|b⟩_B`, which is
/// `Σ_n e^{−βE_n/2}|n⟩|n̄⟩/√Z`.
pub fn exact_tfd_state(h: &OperatorMatrix, beta: f64) -> StateVector {
    let eig = Eigh::new(h);
    let e0 = crate::linalg::boltzmann_shift(&eig.values, beta);
    let root = eig.apply_fn(|e| C64::new((-beta * (e - e0) / 2.0).exp(), 0.0));
    let d = h.nrows();
    let amps = (0..d * d).map(|i| root[(i / d, i % d)]).collect();
    StateVector::from_amplitudes(amps).expect("nonzero TFD amplitudes")
}

/// Bell pairs `(|00⟩+|11⟩)/√2` on every `(a_i, b_i)`.
pub fn bell_prep(n_sites: usize) -> Circuit {
    let mut c = Circuit::new(2 * n_sites);
    for i in 0..n_sites {
        c.push(Gate::H(i)).expect("valid");
        c.push(Gate::Cnot { control: i, target: n_sites + i }).expect("valid");
    }
    c
}

pub fn build_tfd_circuit(ansatz: &TfdAnsatz) -> Result<Circuit> {
    let expected = ANGLES_PER_LAYER * ansatz.n_layers;
    if ansatz.angles.len() != expected {
        return Err(Error::AngleCountMismatch { expected, got: ansatz.angles.len() });
    }
    ansatz.spec.validate()?;
    let n = ansatz.spec.n_sites;
    let mut c = bell_prep(n);
    let bonds = intra_bonds_ordered(&ansatz.spec);
    for layer in ansatz.angles.chunks(ANGLES_PER_LAYER) {
        let (ta, tb, tc, td) = (layer[0], layer[1], layer[2], layer[3]);
        for offset in [0, n] {
            for &(i, j) in &bonds {
                c.push(Gate::XX(offset + i, offset + j, ta))?;
            }
        }
        for offset in [0, n] {
            for &(i, j) in &bonds {
                c.push(Gate::YY(offset + i, offset + j, ta))?;
            }
        }
        for q in 0..2 * n {
            c.push(Gate::Rz(q, tb))?;
        }
        if n == 2 {
            c.push(Gate::Swap(1, 2))?;
            for (p, q) in [(0, 1), (2, 3)] {
                c.push(Gate::ZZ(p, q, tc))?;
            }
            for (p, q) in [(0, 1), (2, 3)] {
                c.push(Gate::XX(p, q, td))?;
            }
            c.push(Gate::Swap(1, 2))?;
        } else {
            for i in 0..n {
                c.push(Gate::ZZ(i, n + i, tc))?;
            }
            for i in 0..n {
                c.push(Gate::XX(i, n + i, td))?;
            }
        }
    }
    Ok(c)
}

/// Chain bonds, even bonds first, then odd, then the closing bond.
fn intra_bonds_ordered(spec: &SpinChainSpec) -> Vec<(usize, usize)> {
    let bonds = spec.bonds();
    let (mut even, mut rest): (Vec<_>, Vec<_>) = bonds.into_iter().partition(|&(i, j)| j == i + 1 && i % 2 == 0);
    let (odd, closing): (Vec<_>, Vec<_>) = rest.drain(..).partition(|&(i, j)| j == i + 1);
    even.extend(odd);
    even.extend(closing);
    even
}

/// Overlap target held fixed across many fidelity evaluations.
#[derive(Debug, Clone)]
pub struct TfdTarget {
    pub spec: SpinChainSpec,
    pub beta: f64,
    pub state: StateVector,
}

impl TfdTarget {
    pub fn new(spec: &SpinChainSpec, beta: f64) -> Result<Self> {
        let h = build_hamiltonian(spec)?;
        Ok(Self { spec: spec.clone(), beta, state: exact_tfd_state(&h, beta) })
    }

    pub fn prepared(&self, n_layers: usize, angles: &[f64]) -> Result<StateVector> {
        let circuit = build_tfd_circuit(&TfdAnsatz::new(self.spec.clone(), n_layers, angles.to_vec())?)?;
        circuit.run(&StateVector::zero(2 * self.spec.n_sites))
    }

    pub fn fidelity(&self, n_layers: usize, angles: &[f64]) -> Result<f64> {
        Ok(self.state.fidelity(&self.prepared(n_layers, angles)?))
    }
}

/// `|⟨TFD(β)|ψ(angles)⟩|²`.
pub fn tfd_fidelity(angles: &[f64], spec: &SpinChainSpec, beta: f64) -> Result<f64> {
    if angles.len() % ANGLES_PER_LAYER != 0 {
        return Err(Error::AngleCountMismatch { expected: ANGLES_PER_LAYER * (angles.len() / ANGLES_PER_LAYER + 1), got: angles.len() });
    }
    TfdTarget::new(spec, beta)?.fidelity(angles.len() / ANGLES_PER_LAYER, angles)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestartLog {
    pub restart: usize,
    pub start: Vec<f64>,
    pub fidelity: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best fidelity after each iteration.
    pub fidelity_history: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfdOptimization {
    pub ansatz: TfdAnsatz,
    pub beta: f64,
    pub fidelity: f64,
    /// False when the best restart hit the iteration cap; the angles are
    /// still the best seen.
    pub converged: bool,
    pub seed: u64,
    pub restarts: Vec<RestartLog>,
}

impl TfdOptimization {
    pub fn check_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            let iterations = self.restarts.iter().map(|r| r.iterations).max().unwrap_or(0);
            Err(Error::DidNotConverge { iterations })
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Maximizes TFD fidelity over the ansatz angles.
///
/// Restart 0 starts from all-zero angles (the exact `β = 0` state); the rest
/// start uniformly in `[−π, π)`.
pub fn optimize_tfd(spec: &SpinChainSpec, beta: f64, n_layers: usize, config: &OptimizerConfig) -> Result<TfdOptimization> {
    config.validate()?;
    let target = TfdTarget::new(spec, beta)?;
    let dim = ANGLES_PER_LAYER * n_layers;
    let objective = |x: &[f64]| 1.0 - target.fidelity(n_layers, x).unwrap_or(0.0);
    let start = |r: usize, rng: &mut ChaCha8Rng| if r == 0 { vec![0.0; dim] } else { uniform_point(rng, dim, -PI, PI) };
    let (runs, best) = multistart(config, objective, start, 0.3);
    let logs = runs
        .iter()
        .enumerate()
        .map(|(r, run): (usize, &OptimResult)| {
            let mut rng = {
                use rand::SeedableRng;
                ChaCha8Rng::seed_from_u64(config.rng_seed)
            };
            rng.set_stream(r as u64);
            RestartLog {
                restart: r,
                start: start(r, &mut rng),
                fidelity: 1.0 - run.fx,
                iterations: run.iterations,
                evaluations: run.evaluations,
                converged: run.converged,
                fidelity_history: run.history.iter().map(|f| 1.0 - f).collect(),
            }
        })
        .collect();
    let angles = runs[best].x.clone();
    let fidelity = target.fidelity(n_layers, &angles)?;
    Ok(TfdOptimization {
        ansatz: TfdAnsatz::new(spec.clone(), n_layers, angles)?,
        beta,
        fidelity,
        converged: runs[best].converged,
        seed: config.rng_seed,
        restarts: logs,
    })
}

/// Reduced state of system A after running `circuit` from `|0…0⟩`.
pub fn thermal_state_from_circuit(circuit: &Circuit, n_sites: usize) -> Result<DensityMatrix> {
    if circuit.n_qubits() != 2 * n_sites {
        return Err(Error::LayoutMismatch(format!("TFD circuit has {} qubits, expected {}", circuit.n_qubits(), 2 * n_sites)));
    }
    let keep: Vec<usize> = (0..n_sites).collect();
    circuit.run(&StateVector::zero(2 * n_sites))?.partial_trace(&keep)
}

/// Angle table as CSV in the stored column convention, one row per `J`.
pub fn angles_to_csv(rows: &[(f64, Vec<f64>)]) -> String {
    let n_layers = rows.first().map_or(0, |(_, a)| a.len() / ANGLES_PER_LAYER);
    let mut out = String::from("j");
    for l in 0..n_layers {
        let b = ANGLES_PER_LAYER * l;
        out.push_str(&format!(",neg_theta{},neg_half_theta{},neg_theta{},neg_theta{}", b + 1, b + 2, b + 3, b + 4));
    }
    out.push('\n');
    for (j, angles) in rows {
        out.push_str(&j.to_string());
        for v in angles_to_stored(angles) {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn angles_from_csv(text: &str) -> Result<Vec<(f64, Vec<f64>)>> {
    let (header, rows) = crate::io::read_csv(text)?;
    if header.len() < 2 || (header.len() - 1) % ANGLES_PER_LAYER != 0 {
        return Err(Error::AngleCountMismatch { expected: ANGLES_PER_LAYER * ((header.len().max(1) - 1) / ANGLES_PER_LAYER).max(1), got: header.len().saturating_sub(1) });
    }
    rows.iter()
        .map(|row| {
            let vals = row.iter().map(|s| crate::io::parse_f64(s)).collect::<Result<Vec<f64>>>()?;
            Ok((vals[0], stored_to_angles(&vals[1..])))
        })
        .collect()
}
