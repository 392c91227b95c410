use crate::hamiltonian::{Pauli, PauliTerm};
use crate::linalg::{Eigh, OperatorMatrix};
use crate::{Error, Result, C64};

use super::gate::{Gate, LocalMatrix};
use super::kernel;
use super::Circuit;

/// Pure state of `n_qubits`, amplitudes indexed with qubit 0 as the MSB.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = C64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Wraps amplitudes, normalizing them. Length must be a power of two.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidModel(format!("amplitude count {len} is not a power of two")));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidModel("state has zero or non-finite norm".into()));
        }
        Ok(Self { n_qubits: len.trailing_zeros() as usize, amps: amps.into_iter().map(|a| a / norm).collect() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        assert_eq!(self.n_qubits, other.n_qubits);
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `self ⊗ other`; `other`'s qubits are appended after this state's.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        StateVector { n_qubits: self.n_qubits + other.n_qubits, amps }
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        let n = self.n_qubits;
        match (gate.local_matrix(), gate) {
            (Some(LocalMatrix::One(m)), _) => kernel::apply_single(&mut self.amps, n, gate.qubits()[0], &m),
            (Some(LocalMatrix::Two(m)), _) => {
                let q = gate.qubits();
                kernel::apply_two(&mut self.amps, n, q[0], q[1], &m);
            }
            (None, Gate::Dense { control, targets, matrix }) => kernel::apply_dense(&mut self.amps, n, *control, targets, matrix),
            _ => unreachable!(),
        }
        Ok(())
    }

    pub fn run(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() > self.n_qubits {
            return Err(Error::IndexOutOfRange { index: circuit.n_qubits() - 1, n_qubits: self.n_qubits });
        }
        for g in circuit.gates() {
            self.apply(g)?;
        }
        Ok(())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨ψ| P |ψ⟩` for a Pauli string (coefficient included).
    pub fn expectation_pauli(&self, term: &PauliTerm) -> f64 {
        let n = self.n_qubits;
        let mut acc = C64::new(0.0, 0.0);
        for (b, amp) in self.amps.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let (img, phase) = term.act(n, b);
            acc += self.amps[img].conj() * phase * amp;
        }
        acc.re * term.coeff
    }

    /// `⟨σ^z_q⟩`.
    pub fn expectation_z(&self, q: usize) -> f64 {
        self.expectation_pauli(&PauliTerm::new(1.0, vec![(q, Pauli::Z)]))
    }

    /// `⟨ψ| O |ψ⟩` for a full-register operator.
    pub fn expectation_operator(&self, op: &OperatorMatrix) -> C64 {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        (v.adjoint() * op * &v)[(0, 0)]
    }

    /// Reduced state on `keep` (any order; the reduced register lists the
    /// kept qubits in ascending order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        for &q in &keep {
            if q >= self.n_qubits {
                return Err(Error::IndexOutOfRange { index: q, n_qubits: self.n_qubits });
            }
        }
        let n = self.n_qubits;
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let gather = |idx: usize, qs: &[usize]| -> usize {
            qs.iter().fold(0usize, |acc, &q| (acc << 1) | ((idx >> kernel::bit_position(n, q)) & 1))
        };
        let (dk, dt) = (1usize << keep.len(), 1usize << traced.len());
        let mut psi = OperatorMatrix::zeros(dk, dt);
        for (idx, amp) in self.amps.iter().enumerate() {
            psi[(gather(idx, &keep), gather(idx, &traced))] = *amp;
        }
        Ok(DensityMatrix { n_qubits: keep.len(), matrix: &psi * psi.adjoint() })
    }

    pub fn to_density(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        DensityMatrix { n_qubits: self.n_qubits, matrix: &v * v.adjoint() }
    }
}

/// Mixed state; Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: OperatorMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix after checking it is a valid state within `tol`.
    pub fn new(matrix: OperatorMatrix, tol: f64) -> Result<Self> {
        let dim = matrix.nrows();
        if !matrix.is_square() || dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidModel("density matrix must be square with power-of-two dimension".into()));
        }
        let rho = Self { n_qubits: dim.trailing_zeros() as usize, matrix };
        rho.check(tol)?;
        Ok(rho)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        Self { n_qubits, matrix: OperatorMatrix::identity(d, d).map(|z| z / d as f64) }
    }

    pub(crate) fn from_matrix_unchecked(matrix: OperatorMatrix) -> Self {
        Self { n_qubits: matrix.nrows().trailing_zeros() as usize, matrix }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        Eigh::new(&self.matrix).values
    }

    /// Hermiticity, trace and positivity within `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let herm = crate::linalg::hermiticity_error(&self.matrix);
        if herm > tol {
            return Err(Error::InvalidModel(format!("density matrix not Hermitian ({herm:.2e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > tol {
            return Err(Error::InvalidModel(format!("density matrix trace {tr}")));
        }
        let min = self.eigenvalues()[0];
        if min < -tol {
            return Err(Error::InvalidModel(format!("density matrix eigenvalue {min:.2e}")));
        }
        Ok(())
    }

    pub fn expectation(&self, op: &OperatorMatrix) -> C64 {
        (&self.matrix * op).trace()
    }
}
