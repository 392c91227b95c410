//! Statevector simulator with the gate set used by the zero protocols.

mod gate;
pub mod kernel;
mod shots;
mod state;

use std::fmt::Write as _;

pub use gate::Gate;
pub use shots::{mean_sign, records_from_text, records_to_text, sample_shots, Basis, ShotRecord};
pub use state::{DensityMatrix, StateVector};

use crate::linalg::OperatorMatrix;
use crate::{Error, Result, C64};

/// Ordered gate list on a fixed register.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> Result<&mut Self> {
        for g in gates {
            self.push(g)?;
        }
        Ok(self)
    }

    /// Appends `other`, widening the register if needed.
    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        self.n_qubits = self.n_qubits.max(other.n_qubits);
        self.extend(other.gates.iter().cloned())
    }

    /// Same gates on a register of `n_qubits ≥ self.n_qubits()`.
    pub fn widened(&self, n_qubits: usize) -> Circuit {
        assert!(n_qubits >= self.n_qubits);
        Circuit { n_qubits, gates: self.gates.clone() }
    }

    pub fn inverse(&self) -> Circuit {
        Circuit { n_qubits: self.n_qubits, gates: self.gates.iter().rev().map(Gate::inverse).collect() }
    }

    pub fn count(&self, name: &str) -> usize {
        self.gates.iter().filter(|g| g.name() == name).count()
    }

    pub fn run(&self, initial: &StateVector) -> Result<StateVector> {
        let mut s = initial.clone();
        s.run(self)?;
        Ok(s)
    }

    /// Full `2^n × 2^n` unitary, column by column. Meant for small registers.
    pub fn unitary(&self) -> Result<OperatorMatrix> {
        let dim = 1usize << self.n_qubits;
        let mut u = OperatorMatrix::zeros(dim, dim);
        for col in 0..dim {
            let out = self.run(&StateVector::basis(self.n_qubits, col))?;
            for (row, a) in out.amplitudes().iter().enumerate() {
                u[(row, col)] = *a;
            }
        }
        Ok(u)
    }

    /// One gate per line, `NAME q0 [q1] [theta]`, after a `QUBITS n` line.
    /// Dense gates have no text form.
    pub fn to_text(&self) -> Result<String> {
        let mut out = format!("QUBITS {}\n", self.n_qubits);
        for g in &self.gates {
            if matches!(g, Gate::Dense { .. }) {
                return Err(Error::Parse("dense gates cannot be written as text".into()));
            }
            writeln!(out, "{g}").expect("string write");
        }
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty circuit text".into()))?;
        let n_qubits = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["QUBITS", n] => n.parse().map_err(|_| Error::Parse(format!("bad qubit count `{n}`")))?,
            _ => return Err(Error::Parse(format!("expected `QUBITS n`, got `{header}`"))),
        };
        let mut circuit = Circuit::new(n_qubits);
        for line in lines {
            circuit.push(parse_gate(line)?)?;
        }
        Ok(circuit)
    }
}

fn parse_gate(line: &str) -> Result<Gate> {
    let words: Vec<&str> = line.split_whitespace().collect();
    let bad = || Error::Parse(format!("cannot parse gate line `{line}`"));
    let q = |i: usize| -> Result<usize> { words.get(i).ok_or_else(bad)?.parse().map_err(|_| bad()) };
    let t = |i: usize| -> Result<f64> { words.get(i).ok_or_else(bad)?.parse().map_err(|_| bad()) };
    let expect_len = |n: usize| if words.len() == n { Ok(()) } else { Err(bad()) };
    let gate = match words.first().copied().ok_or_else(bad)? {
        "H" => expect_len(2).and(Ok(Gate::H(q(1)?)))?,
        "X" => expect_len(2).and(Ok(Gate::X(q(1)?)))?,
        "RX" => expect_len(3).and(Ok(Gate::Rx(q(1)?, t(2)?)))?,
        "RY" => expect_len(3).and(Ok(Gate::Ry(q(1)?, t(2)?)))?,
        "RZ" => expect_len(3).and(Ok(Gate::Rz(q(1)?, t(2)?)))?,
        "XX" => expect_len(4).and(Ok(Gate::XX(q(1)?, q(2)?, t(3)?)))?,
        "YY" => expect_len(4).and(Ok(Gate::YY(q(1)?, q(2)?, t(3)?)))?,
        "ZZ" => expect_len(4).and(Ok(Gate::ZZ(q(1)?, q(2)?, t(3)?)))?,
        "CNOT" => expect_len(3).and(Ok(Gate::Cnot { control: q(1)?, target: q(2)? }))?,
        "SWAP" => expect_len(3).and(Ok(Gate::Swap(q(1)?, q(2)?)))?,
        "CRZ" => expect_len(4).and(Ok(Gate::CRz { control: q(1)?, target: q(2)?, theta: t(3)? }))?,
        _ => return Err(bad()),
    };
    Ok(gate)
}

/// Embeds a gate's local matrix into the full register (test oracle path).
pub fn embed(gate: &Gate, n_qubits: usize) -> OperatorMatrix {
    let qubits = gate.qubits();
    let local = gate.matrix();
    let k = qubits.len();
    let dim = 1usize << n_qubits;
    let pos: Vec<usize> = qubits.iter().map(|&q| n_qubits - 1 - q).collect();
    let mask: usize = pos.iter().map(|p| 1usize << p).sum();
    let local_of = |idx: usize| pos.iter().fold(0usize, |acc, &p| (acc << 1) | ((idx >> p) & 1));
    OperatorMatrix::from_fn(dim, dim, |r, c| {
        if r & !mask != c & !mask {
            C64::new(0.0, 0.0)
        } else {
            let _ = k;
            local[(local_of(r), local_of(c))]
        }
    })
}
