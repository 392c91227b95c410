//! Fisher protocol: the ancilla controls evolution under `H0` itself, so the
//! coherence traces `Tr e^{−(β_r+iβ_i)H0} / Tr e^{−β_r H0}` over complex `β`.
//!
//! The fragment realizes `exp(−i(β_i/2) σ^z_anc ⊗ H0)`, either exactly from
//! the eigendecomposition of `H0` or as a Trotter product of Pauli gadgets.

use std::f64::consts::FRAC_PI_2;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::exact::{ComplexField, CoherenceGrid, ZeroPlane};
use crate::hamiltonian::{pauli_terms, terms_matrix, Pauli, PauliTerm, SpinChainSpec};
use crate::leeyang::{run_protocol, CoherenceTrace, Mode, Prep};
use crate::linalg::Eigh;
use crate::postselect::PostSelect;
use crate::{par, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrotterOrder {
    FirstOrder,
    SecondOrderSymmetric,
}

impl FromStr for TrotterOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "first" | "first_order" => Ok(Self::FirstOrder),
            "2" | "second" | "second_order" | "symmetric" => Ok(Self::SecondOrderSymmetric),
            _ => Err(Error::Parse(format!("unknown Trotter order {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrotterConfig {
    pub n_steps: usize,
    pub ordering: TrotterOrder,
}

impl TrotterConfig {
    pub fn new(n_steps: usize, ordering: TrotterOrder) -> Result<Self> {
        let c = Self { n_steps, ordering };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::InvalidModel("Trotter n_steps must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Prepared generator for repeated fragments at different `β_i`.
#[derive(Debug, Clone)]
pub struct FisherCoupling {
    n_sites: usize,
    terms: Vec<PauliTerm>,
    eig: Option<Eigh>,
    trotter: Option<TrotterConfig>,
}

impl FisherCoupling {
    pub fn new(terms: &[PauliTerm], n_sites: usize, trotter: Option<TrotterConfig>) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidModel("Fisher coupling needs at least one site".into()));
        }
        for t in terms {
            if let Some(&(q, _)) = t.ops.iter().find(|(q, _)| *q >= n_sites) {
                return Err(Error::IndexOutOfRange { index: q, n_qubits: n_sites });
            }
        }
        let eig = match trotter {
            None => Some(Eigh::new(&terms_matrix(n_sites, terms))),
            Some(cfg) => {
                cfg.validate()?;
                if let Some(t) = terms.iter().find(|t| t.locality() > 2) {
                    let ops: String = t.ops.iter().map(|(q, p)| format!("{}{q}", p.symbol())).collect::<Vec<_>>().join(" ");
                    return Err(Error::UnsupportedTerm(format!("{}-local term {ops} cannot be Trotterized", t.locality())));
                }
                None
            }
        };
        Ok(Self { n_sites, terms: terms.to_vec(), eig, trotter })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Appends the fragment with `H0` on `system` (site `i` → `system[i]`).
    pub fn append(&self, circuit: &mut Circuit, system: &[usize], ancilla: usize, beta_i: f64) -> Result<()> {
        if system.len() != self.n_sites {
            return Err(Error::LayoutMismatch(format!("{} system qubits for {} sites", system.len(), self.n_sites)));
        }
        circuit.push(Gate::H(ancilla))?;
        match (&self.eig, self.trotter) {
            (Some(eig), _) => {
                let forward = eig.apply_fn(|e| C64::from_polar(1.0, beta_i * e));
                let half_back = eig.apply_fn(|e| C64::from_polar(1.0, -0.5 * beta_i * e));
                circuit.push(Gate::Dense { control: Some(ancilla), targets: system.to_vec(), matrix: Arc::new(forward) })?;
                circuit.push(Gate::Dense { control: None, targets: system.to_vec(), matrix: Arc::new(half_back) })?;
            }
            (None, Some(cfg)) => {
                let phi = 0.5 * beta_i / cfg.n_steps as f64;
                for _ in 0..cfg.n_steps {
                    match cfg.ordering {
                        TrotterOrder::FirstOrder => {
                            for t in &self.terms {
                                push_gadget(circuit, t, system, ancilla, phi * t.coeff)?;
                            }
                        }
                        TrotterOrder::SecondOrderSymmetric => {
                            for t in &self.terms {
                                push_gadget(circuit, t, system, ancilla, 0.5 * phi * t.coeff)?;
                            }
                            for t in self.terms.iter().rev() {
                                push_gadget(circuit, t, system, ancilla, 0.5 * phi * t.coeff)?;
                            }
                        }
                    }
                }
            }
            (None, None) => unreachable!("constructor fills one of the two"),
        }
        Ok(())
    }
}

/// `exp(−iφ Z_anc ⊗ P)` for a Pauli string `P` of locality ≤ 2.
fn push_gadget(circuit: &mut Circuit, term: &PauliTerm, system: &[usize], ancilla: usize, phi: f64) -> Result<()> {
    let qubits: Vec<(usize, Pauli)> = term.ops.iter().map(|&(q, p)| (system[q], p)).collect();
    let into_z = |q: usize, p: Pauli| match p {
        Pauli::X => vec![Gate::H(q)],
        Pauli::Y => vec![Gate::Rx(q, FRAC_PI_2)],
        _ => vec![],
    };
    let mut pre = Vec::new();
    for &(q, p) in &qubits {
        pre.extend(into_z(q, p));
    }
    let target = match qubits.as_slice() {
        [] => {
            // constant term: a relative phase on the ancilla
            circuit.push(Gate::Rz(ancilla, 2.0 * phi))?;
            return Ok(());
        }
        [(q, _)] => *q,
        [(a, _), (b, _)] => {
            pre.push(Gate::Cnot { control: *a, target: *b });
            *b
        }
        _ => return Err(Error::UnsupportedTerm(format!("{}-local term", qubits.len()))),
    };
    let post: Vec<Gate> = pre.iter().rev().map(|g| g.inverse()).collect();
    circuit.extend(pre)?;
    circuit.push(Gate::CRz { control: ancilla, target, theta: -4.0 * phi })?;
    circuit.push(Gate::Rz(target, 2.0 * phi))?;
    circuit.extend(post)?;
    Ok(())
}

/// Fragment on `n_sites + 1` qubits, ancilla last.
pub fn build_fisher_coupling(terms: &[PauliTerm], n_sites: usize, beta_i: f64, trotter: Option<TrotterConfig>) -> Result<Circuit> {
    let coupling = FisherCoupling::new(terms, n_sites, trotter)?;
    let mut c = Circuit::new(n_sites + 1);
    coupling.append(&mut c, &(0..n_sites).collect::<Vec<_>>(), n_sites, beta_i)?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherSweep {
    pub beta_r: f64,
    pub beta_i_values: Vec<f64>,
    pub mode: Mode,
    pub trotter: Option<TrotterConfig>,
    #[serde(default)]
    pub postselect: PostSelect,
}

impl FisherSweep {
    pub fn exact(beta_r: f64, beta_i_values: Vec<f64>) -> Self {
        Self { beta_r, beta_i_values, mode: Mode::ExactExpectation, trotter: None, postselect: PostSelect::None }
    }
}

/// `L(β_r + iβ_i)` along `β_i` for a thermal preparation at `β_r`.
pub fn measure_fisher_coherence(prep: &Prep, spec: &SpinChainSpec, sweep: &FisherSweep) -> Result<CoherenceTrace> {
    if sweep.beta_i_values.is_empty() || sweep.beta_i_values.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidModel("sweep needs a nonempty list of finite β_i values".into()));
    }
    spec.validate()?;
    let n = spec.n_sites;
    let coupling = FisherCoupling::new(&pauli_terms(spec), n, sweep.trotter)?;
    let state = prep.state(None)?;
    let system: Vec<usize> = (0..n).collect();
    let build = |beta_i: f64| {
        let mut c = Circuit::new(2 * n + 1);
        coupling.append(&mut c, &system, 2 * n, beta_i)?;
        Ok(c)
    };
    let mut points = run_protocol(&state, n, &sweep.beta_i_values, build, sweep.mode, sweep.postselect)?;
    for p in &mut points {
        p.h = ComplexField::new(sweep.beta_r, p.theta);
    }
    Ok(CoherenceTrace { plane: ZeroPlane::InverseTemperature, beta: sweep.beta_r, points })
}

/// Grid of `L` over `β_r ∈ beta_r_values`, `β_i ∈ beta_i_values` with the
/// exact thermal preparation at each `β_r`.
pub fn fisher_scan(spec: &SpinChainSpec, beta_r_values: &[f64], beta_i_values: &[f64], mode: Mode, trotter: Option<TrotterConfig>) -> Result<CoherenceGrid> {
    let columns = par::map_range(beta_r_values.len(), |ix| -> Result<Vec<C64>> {
        let beta_r = beta_r_values[ix];
        let prep = Prep::exact(spec, beta_r)?;
        let mode = match mode {
            Mode::Shots { n_shots, seed } => Mode::Shots { n_shots, seed: seed.wrapping_add(ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) },
            m => m,
        };
        let sweep = FisherSweep { mode, trotter, ..FisherSweep::exact(beta_r, beta_i_values.to_vec()) };
        Ok(measure_fisher_coherence(&prep, spec, &sweep)?.values())
    });
    let mut values = Vec::with_capacity(beta_r_values.len() * beta_i_values.len());
    for col in columns {
        values.extend(col?);
    }
    Ok(CoherenceGrid { plane: ZeroPlane::InverseTemperature, xs: beta_r_values.to_vec(), ys: beta_i_values.to_vec(), values })
}
