//! Shot-record filters based on conserved magnetization, and coherence
//! estimation from the retained shots.

use serde::{Deserialize, Serialize};

use crate::circuit::{Basis, ShotRecord};
use crate::{Error, Result, C64};

/// Which qubits of a record play which role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub system_a: Vec<usize>,
    pub system_b: Vec<usize>,
    pub ancilla: Option<usize>,
}

impl Layout {
    /// A on `0..N`, B on `N..2N`, ancilla on `2N`.
    pub fn protocol(n_sites: usize) -> Self {
        Self { system_a: (0..n_sites).collect(), system_b: (n_sites..2 * n_sites).collect(), ancilla: Some(2 * n_sites) }
    }

    fn max_qubit(&self) -> usize {
        self.system_a.iter().chain(&self.system_b).chain(self.ancilla.iter()).copied().max().unwrap_or(0)
    }

    fn check(&self, record: &ShotRecord, need_b: bool, need_ancilla: bool) -> Result<()> {
        if record.len() <= self.max_qubit() {
            return Err(Error::LayoutMismatch(format!("record has {} qubits, layout needs {}", record.len(), self.max_qubit() + 1)));
        }
        if need_ancilla && self.ancilla.is_none() {
            return Err(Error::LayoutMismatch("layout has no ancilla".into()));
        }
        let systems = self.system_a.iter().chain(need_b.then_some(&self.system_b).into_iter().flatten());
        for &q in systems {
            if record.bases[q] != Basis::Z {
                return Err(Error::LayoutMismatch(format!("system qubit {q} measured in {:?}, need Z", record.bases[q])));
            }
        }
        Ok(())
    }
}

fn magnetization(record: &ShotRecord, qubits: &[usize]) -> i64 {
    qubits.iter().map(|&q| if record.bits[q] == 0 { 1 } else { -1 }).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub input: usize,
    pub retained: usize,
    pub fraction: f64,
}

impl FilterReport {
    fn new(input: usize, retained: usize) -> Self {
        let fraction = if input == 0 { 1.0 } else { retained as f64 / input as f64 };
        Self { input, retained, fraction }
    }
}

/// Keeps records whose A and B magnetizations agree.
pub fn filter_method1(records: &[ShotRecord], layout: &Layout) -> Result<(Vec<ShotRecord>, FilterReport)> {
    let mut kept = Vec::with_capacity(records.len());
    for r in records {
        layout.check(r, true, false)?;
        if magnetization(r, &layout.system_a) == magnetization(r, &layout.system_b) {
            kept.push(r.clone());
        }
    }
    let report = FilterReport::new(records.len(), kept.len());
    Ok((kept, report))
}

/// Drops real-part records with ancilla 1 and zero A-magnetization, where the
/// controlled phases cancel and the ancilla must return to 0. Records read
/// in other ancilla bases pass through.
pub fn filter_method2(records: &[ShotRecord], layout: &Layout) -> Result<(Vec<ShotRecord>, FilterReport)> {
    let mut kept = Vec::with_capacity(records.len());
    for r in records {
        layout.check(r, false, true)?;
        let anc = layout.ancilla.expect("checked");
        let forbidden = r.bases[anc] == Basis::X && r.bits[anc] == 1 && magnetization(r, &layout.system_a) == 0;
        if !forbidden {
            kept.push(r.clone());
        }
    }
    let report = FilterReport::new(records.len(), kept.len());
    Ok((kept, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostSelect {
    #[default]
    None,
    M1,
    M2,
    /// Method 1 then Method 2.
    M1M2,
}

impl std::str::FromStr for PostSelect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PostSelect::None),
            "m1" => Ok(PostSelect::M1),
            "m2" => Ok(PostSelect::M2),
            "m1m2" => Ok(PostSelect::M1M2),
            _ => Err(Error::Parse(format!("unknown post-selection `{s}` (none|m1|m2|m1m2)"))),
        }
    }
}

impl PostSelect {
    pub fn apply(self, records: &[ShotRecord], layout: &Layout) -> Result<(Vec<ShotRecord>, FilterReport)> {
        match self {
            PostSelect::None => Ok((records.to_vec(), FilterReport::new(records.len(), records.len()))),
            PostSelect::M1 => filter_method1(records, layout),
            PostSelect::M2 => filter_method2(records, layout),
            PostSelect::M1M2 => {
                let (first, _) = filter_method1(records, layout)?;
                let (second, _) = filter_method2(&first, layout)?;
                let report = FilterReport::new(records.len(), second.len());
                Ok((second, report))
            }
        }
    }
}

/// Coherence estimate with binomial standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceEstimate {
    pub l: C64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub retained_re: usize,
    pub retained_im: usize,
}

/// `Re L = ⟨σ^x_anc⟩` from X-basis records, `Im L = −⟨σ^y_anc⟩` from Y-basis
/// records.
pub fn estimate_coherence(real_records: &[ShotRecord], imag_records: &[ShotRecord], ancilla: usize) -> Result<CoherenceEstimate> {
    let (re, se_re) = crate::circuit::mean_sign(real_records, ancilla).ok_or(Error::EmptyAfterFiltering)?;
    let (im, se_im) = crate::circuit::mean_sign(imag_records, ancilla).ok_or(Error::EmptyAfterFiltering)?;
    Ok(CoherenceEstimate { l: C64::new(re, -im), stderr_re: se_re, stderr_im: se_im, retained_re: real_records.len(), retained_im: imag_records.len() })
}
