use std::f64::consts::FRAC_PI_2;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

use super::{Gate, StateVector};

/// Measurement basis of one qubit.
///
/// `X` appends `Ry(−π/2)` and `Y` appends `Rx(π/2)` before a computational
/// readout, so a `0` outcome means eigenvalue `+1` of `σ^x` or `σ^y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub fn tag(self) -> char {
        match self {
            Basis::Z => 'Z',
            Basis::X => 'X',
            Basis::Y => 'Y',
        }
    }

    pub fn from_tag(c: char) -> Result<Self> {
        match c {
            'Z' | 'z' => Ok(Basis::Z),
            'X' | 'x' => Ok(Basis::X),
            'Y' | 'y' => Ok(Basis::Y),
            other => Err(Error::Parse(format!("unknown basis tag `{other}`"))),
        }
    }

    pub fn rotation(self, q: usize) -> Option<Gate> {
        match self {
            Basis::Z => None,
            Basis::X => Some(Gate::Ry(q, -FRAC_PI_2)),
            Basis::Y => Some(Gate::Rx(q, FRAC_PI_2)),
        }
    }
}

/// One measured run: a bit and a basis per measured qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecord {
    pub bases: Vec<Basis>,
    pub bits: Vec<u8>,
}

impl ShotRecord {
    pub fn new(bases: Vec<Basis>, bits: Vec<u8>) -> Result<Self> {
        if bases.len() != bits.len() {
            return Err(Error::LayoutMismatch(format!("{} basis tags for {} bits", bases.len(), bits.len())));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Parse("bits must be 0 or 1".into()));
        }
        Ok(Self { bases, bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `+1` for outcome 0, `−1` for outcome 1.
    pub fn sign(&self, q: usize) -> f64 {
        if self.bits[q] == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn bitstring(&self) -> String {
        self.bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect()
    }

    /// Text form `<tags> <bits>`, e.g. `ZZZZX 01100`.
    pub fn to_line(&self) -> String {
        format!("{} {}", self.bases.iter().map(|b| b.tag()).collect::<String>(), self.bitstring())
    }

    pub fn from_line(line: &str) -> Result<Self> {
        let mut parts = line.split_whitespace();
        let (Some(tags), Some(bits), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse(format!("record line `{line}` is not `<tags> <bits>`")));
        };
        let bases = tags.chars().map(Basis::from_tag).collect::<Result<Vec<_>>>()?;
        let bits = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::Parse(format!("bad bit `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bases, bits)
    }
}

impl fmt::Display for ShotRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

pub fn records_to_text(records: &[ShotRecord]) -> String {
    records.iter().map(|r| r.to_line() + "\n").collect()
}

pub fn records_from_text(text: &str) -> Result<Vec<ShotRecord>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(ShotRecord::from_line)
        .collect()
}

/// Draws `n_shots` records from the Born distribution after the per-qubit
/// basis rotations. All qubits are measured, in register order.
pub fn sample_shots(state: &StateVector, bases: &[Basis], n_shots: usize, seed: u64) -> Result<Vec<ShotRecord>> {
    let n = state.n_qubits();
    if bases.len() != n {
        return Err(Error::LayoutMismatch(format!("{} basis tags for {n} qubits", bases.len())));
    }
    if n_shots == 0 {
        return Err(Error::InvalidModel("n_shots must be at least 1".into()));
    }
    let mut rotated = state.clone();
    for (q, b) in bases.iter().enumerate() {
        if let Some(g) = b.rotation(q) {
            rotated.apply(&g)?;
        }
    }
    let mut cdf = Vec::with_capacity(1 << n);
    let mut acc = 0.0;
    for p in rotated.probabilities() {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_shots)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            let bits = (0..n).map(|q| ((idx >> (n - 1 - q)) & 1) as u8).collect();
            ShotRecord { bases: bases.to_vec(), bits }
        })
        .collect())
}

/// Mean of the `±1` outcome of qubit `q` and its binomial standard error.
pub fn mean_sign(records: &[ShotRecord], q: usize) -> Option<(f64, f64)> {
    if records.is_empty() {
        return None;
    }
    let n = records.len() as f64;
    let mean = records.iter().map(|r| r.sign(q)).sum::<f64>() / n;
    let stderr = ((1.0 - mean * mean).max(0.0) / n).sqrt();
    Some((mean, stderr))
}
