use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::sync::Arc;

use crate::linalg::OperatorMatrix;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Gate set of the simulator.
///
/// Angle conventions: `Rz(θ) = exp(−i θ/2 σ^z)` (same for `Rx`, `Ry`), while
/// the two-qubit rotations carry no half: `XX(θ) = exp(−i θ σ^x⊗σ^x)`.
/// `CRz(θ) = |0⟩⟨0|⊗I + |1⟩⟨1|⊗Rz(θ)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    XX(usize, usize, f64),
    YY(usize, usize, f64),
    ZZ(usize, usize, f64),
    Cnot { control: usize, target: usize },
    Swap(usize, usize),
    CRz { control: usize, target: usize, theta: f64 },
    /// Arbitrary unitary on `targets` (first target = most significant
    /// local bit), optionally controlled on `control` being `|1⟩`.
    Dense { control: Option<usize>, targets: Vec<usize>, matrix: Arc<OperatorMatrix> },
}

pub(crate) enum LocalMatrix {
    One([[C64; 2]; 2]),
    Two([[C64; 4]; 4]),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::X(_) => "X",
            Gate::Rx(..) => "RX",
            Gate::Ry(..) => "RY",
            Gate::Rz(..) => "RZ",
            Gate::XX(..) => "XX",
            Gate::YY(..) => "YY",
            Gate::ZZ(..) => "ZZ",
            Gate::Cnot { .. } => "CNOT",
            Gate::Swap(..) => "SWAP",
            Gate::CRz { .. } => "CRZ",
            Gate::Dense { .. } => "DENSE",
        }
    }

    /// Qubits touched, control first where there is one.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => vec![q],
            Gate::XX(a, b, _) | Gate::YY(a, b, _) | Gate::ZZ(a, b, _) | Gate::Swap(a, b) => vec![a, b],
            Gate::Cnot { control, target } | Gate::CRz { control, target, .. } => vec![control, target],
            Gate::Dense { control, ref targets, .. } => control.into_iter().chain(targets.iter().copied()).collect(),
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx(_, t) | Gate::Ry(_, t) | Gate::Rz(_, t) | Gate::XX(_, _, t) | Gate::YY(_, _, t) | Gate::ZZ(_, _, t) => Some(t),
            Gate::CRz { theta, .. } => Some(theta),
            _ => None,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n_qubits {
                return Err(Error::IndexOutOfRange { index: q, n_qubits });
            }
        }
        for (i, a) in qs.iter().enumerate() {
            if qs[i + 1..].contains(a) {
                return Err(Error::RepeatedTarget(*a));
            }
        }
        if let Gate::Dense { targets, matrix, .. } = self {
            let dim = 1usize << targets.len();
            if matrix.shape() != (dim, dim) {
                return Err(Error::InvalidModel(format!("dense gate on {} qubits needs a {dim}x{dim} matrix", targets.len())));
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::H(_) | Gate::X(_) | Gate::Cnot { .. } | Gate::Swap(..) => self.clone(),
            Gate::Rx(q, t) => Gate::Rx(*q, -t),
            Gate::Ry(q, t) => Gate::Ry(*q, -t),
            Gate::Rz(q, t) => Gate::Rz(*q, -t),
            Gate::XX(a, b, t) => Gate::XX(*a, *b, -t),
            Gate::YY(a, b, t) => Gate::YY(*a, *b, -t),
            Gate::ZZ(a, b, t) => Gate::ZZ(*a, *b, -t),
            Gate::CRz { control, target, theta } => Gate::CRz { control: *control, target: *target, theta: -theta },
            Gate::Dense { control, targets, matrix } => {
                Gate::Dense { control: *control, targets: targets.clone(), matrix: Arc::new(matrix.adjoint()) }
            }
        }
    }

    pub(crate) fn local_matrix(&self) -> Option<LocalMatrix> {
        let i = C64::new(0.0, 1.0);
        Some(match *self {
            Gate::H(_) => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                LocalMatrix::One([[h, h], [h, -h]])
            }
            Gate::X(_) => LocalMatrix::One([[ZERO, ONE], [ONE, ZERO]]),
            Gate::Rx(_, t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                LocalMatrix::One([[C64::new(c, 0.0), -i * s], [-i * s, C64::new(c, 0.0)]])
            }
            Gate::Ry(_, t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                LocalMatrix::One([[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]])
            }
            Gate::Rz(_, t) => LocalMatrix::One([[C64::from_polar(1.0, -t / 2.0), ZERO], [ZERO, C64::from_polar(1.0, t / 2.0)]]),
            Gate::XX(_, _, t) => {
                let (c, s) = (C64::new(t.cos(), 0.0), -i * t.sin());
                LocalMatrix::Two([[c, ZERO, ZERO, s], [ZERO, c, s, ZERO], [ZERO, s, c, ZERO], [s, ZERO, ZERO, c]])
            }
            Gate::YY(_, _, t) => {
                // σ^y⊗σ^y = antidiag(−1, 1, 1, −1)
                let (c, s) = (C64::new(t.cos(), 0.0), -i * t.sin());
                LocalMatrix::Two([[c, ZERO, ZERO, -s], [ZERO, c, s, ZERO], [ZERO, s, c, ZERO], [-s, ZERO, ZERO, c]])
            }
            Gate::ZZ(_, _, t) => {
                let (m, p) = (C64::from_polar(1.0, -t), C64::from_polar(1.0, t));
                LocalMatrix::Two([[m, ZERO, ZERO, ZERO], [ZERO, p, ZERO, ZERO], [ZERO, ZERO, p, ZERO], [ZERO, ZERO, ZERO, m]])
            }
            Gate::Cnot { .. } => {
                LocalMatrix::Two([[ONE, ZERO, ZERO, ZERO], [ZERO, ONE, ZERO, ZERO], [ZERO, ZERO, ZERO, ONE], [ZERO, ZERO, ONE, ZERO]])
            }
            Gate::Swap(..) => {
                LocalMatrix::Two([[ONE, ZERO, ZERO, ZERO], [ZERO, ZERO, ONE, ZERO], [ZERO, ONE, ZERO, ZERO], [ZERO, ZERO, ZERO, ONE]])
            }
            Gate::CRz { theta, .. } => {
                let (m, p) = (C64::from_polar(1.0, -theta / 2.0), C64::from_polar(1.0, theta / 2.0));
                LocalMatrix::Two([[ONE, ZERO, ZERO, ZERO], [ZERO, ONE, ZERO, ZERO], [ZERO, ZERO, m, ZERO], [ZERO, ZERO, ZERO, p]])
            }
            Gate::Dense { .. } => return None,
        })
    }

    /// Matrix on the gate's own qubits, ordered as [`Gate::qubits`].
    pub fn matrix(&self) -> OperatorMatrix {
        match self.local_matrix() {
            Some(LocalMatrix::One(m)) => OperatorMatrix::from_fn(2, 2, |r, c| m[r][c]),
            Some(LocalMatrix::Two(m)) => OperatorMatrix::from_fn(4, 4, |r, c| m[r][c]),
            None => match self {
                Gate::Dense { control: None, matrix, .. } => (**matrix).clone(),
                Gate::Dense { control: Some(_), matrix, .. } => {
                    let d = matrix.nrows();
                    let mut full = OperatorMatrix::identity(2 * d, 2 * d);
                    full.view_mut((d, d), (d, d)).copy_from(matrix);
                    full
                }
                _ => unreachable!(),
            },
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        for q in self.qubits() {
            write!(f, " {q}")?;
        }
        if let Some(t) = self.angle() {
            write!(f, " {t:?}")?;
        }
        Ok(())
    }
}
