//! Dense complex matrix helpers shared by the oracle and simulator modules.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::C64;

/// Dense complex operator over the `2^n` spin basis (row index = bra).
pub type OperatorMatrix = DMatrix<C64>;

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: OperatorMatrix,
}

impl Eigh {
    pub fn new(m: &OperatorMatrix) -> Self {
        assert!(m.is_square(), "eigh needs a square matrix");
        let (values, vectors) = if m.iter().all(|z| z.im == 0.0) {
            let re = m.map(|z| z.re);
            let eig = SymmetricEigen::new(re);
            (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors.map(|x| C64::new(x, 0.0)))
        } else {
            let eig = SymmetricEigen::new(m.clone());
            (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors)
        };
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let dim = values.len();
        let sorted_values = order.iter().map(|&k| values[k]).collect();
        let sorted_vectors = OperatorMatrix::from_fn(dim, dim, |r, c| vectors[(r, order[c])]);
        Self { values: sorted_values, vectors: sorted_vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(Λ) V†` for a scalar function of the eigenvalues.
    pub fn apply_fn<F: Fn(f64) -> C64>(&self, f: F) -> OperatorMatrix {
        let d = self.dim();
        let weights: Vec<C64> = self.values.iter().map(|&e| f(e)).collect();
        let mut scaled = self.vectors.clone();
        for (c, w) in weights.iter().enumerate() {
            for r in 0..d {
                scaled[(r, c)] *= *w;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &OperatorMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = if m.iter().all(|z| z.im == 0.0) {
        m.map(|z| z.re).symmetric_eigenvalues().as_slice().to_vec()
    } else {
        m.clone().symmetric_eigenvalues().as_slice().to_vec()
    };
    values.sort_by(f64::total_cmp);
    values
}

/// `exp(factor · H)` for Hermitian `H`.
pub fn expm_hermitian(h: &OperatorMatrix, factor: C64) -> OperatorMatrix {
    Eigh::new(h).apply_fn(|e| (factor * e).exp())
}

pub fn max_abs(m: &OperatorMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |A − A†|`.
pub fn hermiticity_error(m: &OperatorMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// `max |AB − BA|`.
pub fn commutator_norm(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    max_abs(&(a * b - b * a))
}

/// Max-entry distance between `u` and `e^{iφ} v`, minimized over the phase.
pub fn distance_up_to_phase(u: &OperatorMatrix, v: &OperatorMatrix) -> f64 {
    let overlap: C64 = v.iter().zip(u.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
    max_abs_diff(u, &v.map(|z| z * phase))
}

pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    a.kronecker(b)
}

pub fn identity(dim: usize) -> OperatorMatrix {
    OperatorMatrix::identity(dim, dim)
}

/// Energy that maximizes `e^{−βE}` over `values` (ascending), used as the
/// shift that keeps Boltzmann factors at most one for either sign of `β`.
pub fn boltzmann_shift(values: &[f64], beta: f64) -> f64 {
    if beta >= 0.0 {
        values[0]
    } else {
        values[values.len() - 1]
    }
}

/// `Σ c_k z^k` (coefficients ascending) by Horner's rule.
pub fn poly_eval(coeffs: &[f64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn poly_eval_with_derivative(coeffs: &[f64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Similarity scaling by powers of two that equalizes row and column norms,
/// so eigenvalues of widely different magnitude keep their relative accuracy.
fn balance(a: &mut nalgebra::DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c: f64 = (0..n).filter(|&j| j != i).map(|j| a[(j, i)].abs()).sum();
            let r: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            while c < r / RADIX {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            while c > r * RADIX {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Roots of a real polynomial (coefficients ascending, nonzero leading term).
///
/// Eigenvalues of the companion matrix, each refined by a few Newton steps
/// that are kept only when they reduce the residual.
pub fn poly_roots(coeffs: &[f64]) -> Vec<C64> {
    let degree = match coeffs.iter().rposition(|&c| c != 0.0) {
        Some(d) => d,
        None => return Vec::new(),
    };
    if degree == 0 {
        return Vec::new();
    }
    let lead = coeffs[degree];
    let monic: Vec<f64> = coeffs[..degree].iter().map(|c| c / lead).collect();
    let mut companion = nalgebra::DMatrix::<f64>::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    for (i, a) in monic.iter().enumerate() {
        companion[(i, degree - 1)] = -a;
    }
    balance(&mut companion);
    let coeffs = &coeffs[..=degree];
    companion
        .complex_eigenvalues()
        .iter()
        .map(|&z0| {
            let mut z = z0;
            let mut best = poly_eval(coeffs, z).norm();
            for _ in 0..8 {
                let (p, dp) = poly_eval_with_derivative(coeffs, z);
                if dp.norm() == 0.0 {
                    break;
                }
                let candidate = z - p / dp;
                let r = poly_eval(coeffs, candidate).norm();
                if r < best {
                    best = r;
                    z = candidate;
                } else {
                    break;
                }
            }
            z
        })
        .collect()
}
