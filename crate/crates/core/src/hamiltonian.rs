//! Spin-chain Hamiltonians as dense Hermitian matrices.
//!
//! Every operator is assembled from [`PauliTerm`]s, so the same term list
//! feeds both the dense matrices used by the oracles and the Trotterized
//! circuits in [`crate::fisher`].

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::linalg::OperatorMatrix;
use crate::{Error, Result, C64};

/// Largest chain handled by the dense builders (matrix dimension 16384).
pub const DEFAULT_MAX_SITES: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
    /// XY chain closed by the string-carrying term that makes the
    /// Jordan-Wigner fermions exactly periodic.
    #[serde(rename = "jw")]
    JwBoundary,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
            Boundary::JwBoundary => "jw",
        })
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "open" => Ok(Boundary::Open),
            "jw" | "jw-boundary" => Ok(Boundary::JwBoundary),
            other => Err(Error::Parse(format!("unknown boundary `{other}`"))),
        }
    }
}

/// `H = J Σ (XX + YY) + J_z Σ ZZ + h_r Σ Z` on a chain.
///
/// Config-file keys are `n_sites`, `j`, `jz`, `hr` and `boundary`
/// (`"periodic"`, `"open"` or `"jw"`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinChainSpec {
    pub n_sites: usize,
    #[serde(rename = "j")]
    pub coupling_xy: f64,
    #[serde(rename = "jz")]
    pub coupling_z: f64,
    #[serde(rename = "hr", default)]
    pub field_real: f64,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
}

fn default_boundary() -> Boundary {
    Boundary::Periodic
}

impl SpinChainSpec {
    pub fn xxz(n_sites: usize, j: f64, jz: f64) -> Self {
        Self { n_sites, coupling_xy: j, coupling_z: jz, field_real: 0.0, boundary: Boundary::Periodic }
    }

    pub fn with_field(mut self, hr: f64) -> Self {
        self.field_real = hr;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::InvalidModel("n_sites must be at least 1".into()));
        }
        if self.boundary == Boundary::JwBoundary && self.n_sites < 2 {
            return Err(Error::InvalidModel("the JW boundary needs at least 2 sites".into()));
        }
        for (name, v) in [("j", self.coupling_xy), ("jz", self.coupling_z), ("hr", self.field_real)] {
            if !v.is_finite() {
                return Err(Error::InvalidModel(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Nearest-neighbour bonds. A periodic pair of sites has one bond.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        let mut bonds: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && n > 2 {
            bonds.push((n - 1, 0));
        }
        bonds
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: Self = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// `coeff · ⊗_q P_q` with identities elsewhere. Qubits are listed ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub ops: Vec<(usize, Pauli)>,
}

impl PauliTerm {
    pub fn new(coeff: f64, mut ops: Vec<(usize, Pauli)>) -> Self {
        ops.sort_by_key(|&(q, _)| q);
        Self { coeff, ops }
    }

    pub fn locality(&self) -> usize {
        self.ops.len()
    }

    /// Image of a basis state and the amplitude picked up.
    pub(crate) fn act(&self, n_qubits: usize, basis: usize) -> (usize, C64) {
        let mut out = basis;
        let mut phase = C64::new(1.0, 0.0);
        for &(q, p) in &self.ops {
            let bit = 1usize << (n_qubits - 1 - q);
            let down = basis & bit != 0;
            match p {
                Pauli::X => out ^= bit,
                Pauli::Y => {
                    out ^= bit;
                    phase *= if down { C64::new(0.0, -1.0) } else { C64::new(0.0, 1.0) };
                }
                Pauli::Z => {
                    if down {
                        phase = -phase;
                    }
                }
            }
        }
        (out, phase)
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.coeff)?;
        for (q, p) in &self.ops {
            write!(f, " {}{}", p.symbol(), q)?;
        }
        Ok(())
    }
}

/// Dense matrix of `Σ terms` on `n_qubits`.
pub fn terms_matrix(n_qubits: usize, terms: &[PauliTerm]) -> OperatorMatrix {
    let dim = 1usize << n_qubits;
    let mut m = OperatorMatrix::zeros(dim, dim);
    for term in terms {
        if term.coeff == 0.0 {
            continue;
        }
        for col in 0..dim {
            let (row, phase) = term.act(n_qubits, col);
            m[(row, col)] += phase * term.coeff;
        }
    }
    m
}

/// Pauli decomposition of the chain Hamiltonian, field included.
pub fn pauli_terms(spec: &SpinChainSpec) -> Vec<PauliTerm> {
    use Pauli::*;
    let mut terms = Vec::new();
    for (a, b) in spec.bonds() {
        if spec.coupling_xy != 0.0 {
            terms.push(PauliTerm::new(spec.coupling_xy, vec![(a, X), (b, X)]));
            terms.push(PauliTerm::new(spec.coupling_xy, vec![(a, Y), (b, Y)]));
        }
        if spec.coupling_z != 0.0 {
            terms.push(PauliTerm::new(spec.coupling_z, vec![(a, Z), (b, Z)]));
        }
    }
    if spec.boundary == Boundary::JwBoundary && spec.n_sites > 2 && spec.coupling_xy != 0.0 {
        // 2J(σ⁺ Z…Z σ⁻ + h.c.) = J(X Z…Z X + Y Z…Z Y)
        let n = spec.n_sites;
        for p in [X, Y] {
            let mut ops = vec![(0, p)];
            ops.extend((1..n - 1).map(|q| (q, Z)));
            ops.push((n - 1, p));
            terms.push(PauliTerm::new(spec.coupling_xy, ops));
        }
    }
    if spec.boundary == Boundary::JwBoundary && spec.n_sites == 2 && spec.coupling_xy != 0.0 {
        // No string between the two ends: the boundary term repeats the bond.
        terms.push(PauliTerm::new(spec.coupling_xy, vec![(0, X), (1, X)]));
        terms.push(PauliTerm::new(spec.coupling_xy, vec![(0, Y), (1, Y)]));
    }
    if spec.field_real != 0.0 {
        terms.extend((0..spec.n_sites).map(|q| PauliTerm::new(spec.field_real, vec![(q, Z)])));
    }
    terms
}

fn check_size(n_sites: usize, max_sites: usize) -> Result<()> {
    if n_sites > max_sites {
        return Err(Error::DimensionOverflow { n_sites, max: max_sites });
    }
    Ok(())
}

/// `H_s + h_r Σ σ^z` for a periodic or open XXZ chain.
pub fn build_xxz(spec: &SpinChainSpec) -> Result<OperatorMatrix> {
    build_xxz_capped(spec, DEFAULT_MAX_SITES)
}

pub fn build_xxz_capped(spec: &SpinChainSpec, max_sites: usize) -> Result<OperatorMatrix> {
    spec.validate()?;
    if spec.boundary == Boundary::JwBoundary {
        return Err(Error::InvalidModel("build_xxz takes periodic or open chains; use build_xy_jw_boundary".into()));
    }
    check_size(spec.n_sites, max_sites)?;
    Ok(terms_matrix(spec.n_sites, &pauli_terms(spec)))
}

/// XY chain with the Jordan-Wigner boundary term (plus `h_r Σ σ^z`).
pub fn build_xy_jw_boundary(spec: &SpinChainSpec) -> Result<OperatorMatrix> {
    spec.validate()?;
    if spec.boundary != Boundary::JwBoundary {
        return Err(Error::InvalidModel("build_xy_jw_boundary needs boundary = jw".into()));
    }
    if spec.coupling_z != 0.0 {
        return Err(Error::InvalidModel("the JW-boundary chain is pure XY (jz must be 0)".into()));
    }
    check_size(spec.n_sites, DEFAULT_MAX_SITES)?;
    Ok(terms_matrix(spec.n_sites, &pauli_terms(spec)))
}

/// Dispatch on the boundary convention.
pub fn build_hamiltonian(spec: &SpinChainSpec) -> Result<OperatorMatrix> {
    match spec.boundary {
        Boundary::JwBoundary => build_xy_jw_boundary(spec),
        _ => build_xxz(spec),
    }
}

/// Magnetization `Σ_i σ^z_i` (diagonal: `n_up − n_down`).
pub fn build_magnetization(n_sites: usize) -> OperatorMatrix {
    let dim = 1usize << n_sites;
    OperatorMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |b, _| C64::new(magnetization_of(n_sites, b) as f64, 0.0)))
}

/// `n_up − n_down` of a basis index.
pub fn magnetization_of(n_sites: usize, basis: usize) -> i64 {
    let downs = (basis & ((1usize << n_sites) - 1)).count_ones() as i64;
    n_sites as i64 - 2 * downs
}

/// Classical ferromagnetic Ising ring `−J Σ σ^z σ^z` written as an XXZ spec.
///
/// A two-site ring has two bonds between the same pair of sites; since
/// [`SpinChainSpec::bonds`] counts that pair once, the coupling is doubled
/// for `n_sites = 2` so the result matches the transfer-matrix ring.
pub fn ising_ring(n_sites: usize, j: f64) -> SpinChainSpec {
    let jz = if n_sites == 2 { -2.0 * j } else { -j };
    SpinChainSpec::xxz(n_sites, 0.0, jz)
}
