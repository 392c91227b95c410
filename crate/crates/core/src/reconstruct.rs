//! Partition function and free energy rebuilt from Lee-Yang zeros,
//! `Z(β, h) = e^{−βNh} p_N Π_j (z̃ − z̃_j)` with `z̃ = e^{2βh}` and `p_N` the
//! trace over the all-down sector.

use serde::{Deserialize, Serialize};

use crate::exact::{sector_traces, FugacityConvention, ZeroPlane, ZeroSet};
use crate::linalg::OperatorMatrix;
use crate::{Error, Result, C64};

/// Largest `|Im Z| / |Re Z|` accepted at real field.
pub const REALITY_TOL: f64 = 1e-6;

/// Default relative distance under which completed zeros are merged.
pub const MERGE_TOL: f64 = 0.1;

/// `ln p_N`, the log trace of `e^{−βH_s}` over the all-down sector.
pub fn log_prefactor(h_s: &OperatorMatrix, beta: f64, n_sites: usize) -> Result<f64> {
    Ok(sector_traces(h_s, beta, n_sites)?.ln_p(n_sites))
}

pub fn prefactor(h_s: &OperatorMatrix, beta: f64, n_sites: usize) -> Result<f64> {
    Ok(log_prefactor(h_s, beta, n_sites)?.exp())
}

/// Plus-convention fugacities of a zero set in the fugacity plane.
fn plus_fugacities(zeros: &ZeroSet) -> Result<Vec<C64>> {
    zeros.expect_plane(ZeroPlane::FugacityZ)?;
    Ok(match zeros.convention {
        Some(FugacityConvention::MinusField) => zeros.zeros.iter().map(|z| z.inv()).collect(),
        _ => zeros.zeros.clone(),
    })
}

/// `ln Z` on the principal branch of each factor; the imaginary part is the
/// phase of `Z` up to multiples of `2π`.
pub fn log_partition_from_zeros(zeros: &ZeroSet, log_p: f64, beta: f64, h: C64) -> Result<C64> {
    let fug = plus_fugacities(zeros)?;
    let n = fug.len() as f64;
    let z = (2.0 * beta * h).exp();
    Ok(-beta * n * h + log_p + fug.iter().map(|zj| (z - zj).ln()).sum::<C64>())
}

pub fn partition_from_zeros(zeros: &ZeroSet, p: f64, beta: f64, h: C64) -> Result<C64> {
    if p <= 0.0 {
        return Err(Error::NonPositivePartition(format!("prefactor {p} must be positive")));
    }
    Ok(log_partition_from_zeros(zeros, p.ln(), beta, h)?.exp())
}

/// `−ln Z(β, 0) / β`, rejecting a reconstruction that is not real positive.
pub fn free_energy_from_zeros(zeros: &ZeroSet, p: f64, beta: f64) -> Result<f64> {
    if p <= 0.0 {
        return Err(Error::NonPositivePartition(format!("prefactor {p} must be positive")));
    }
    free_energy_from_log(zeros, p.ln(), beta)
}

pub fn free_energy_from_log(zeros: &ZeroSet, log_p: f64, beta: f64) -> Result<f64> {
    let log_z = log_partition_from_zeros(zeros, log_p, beta, C64::new(0.0, 0.0))?;
    let (s, c) = log_z.im.sin_cos();
    if c <= 0.0 || s.abs() > REALITY_TOL * c.abs() {
        return Err(Error::NonPositivePartition(format!("Z(h=0) has phase {:.3e}", log_z.im.rem_euclid(std::f64::consts::TAU))));
    }
    Ok(-log_z.re / beta)
}

/// Prefactor chosen so the reconstruction reproduces a known `ln Z` at a
/// real reference field.
pub fn fit_log_prefactor(zeros: &ZeroSet, beta: f64, h_ref: f64, log_z_ref: f64) -> Result<f64> {
    let bare = log_partition_from_zeros(zeros, 0.0, beta, C64::new(h_ref, 0.0))?;
    Ok(log_z_ref - bare.re)
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm())
}

/// Fills in the `{z, z̄, 1/z, 1/z̄}` orbit of every field-plane zero and
/// merges near duplicates (relative distance `merge_tol`), keeping the
/// first representative. The result must hold exactly `n_sites` zeros.
///
/// Conjugation holds for any real `H_s`; the reciprocal partner needs a
/// spin-flip symmetric `H_s`, which covers the XXZ family.
pub fn complete_by_symmetry(field_zeros: &ZeroSet, beta: f64, n_sites: usize, merge_tol: f64) -> Result<ZeroSet> {
    field_zeros.expect_plane(ZeroPlane::FieldH)?;
    let mut out: Vec<C64> = Vec::new();
    for h in &field_zeros.zeros {
        let z = (2.0 * beta * h).exp();
        for w in [z, z.conj(), z.inv(), z.conj().inv()] {
            if !out.iter().any(|o| close(*o, w, merge_tol)) {
                out.push(w);
            }
        }
    }
    if out.len() != n_sites {
        return Err(Error::ZeroCountMismatch { expected: n_sites, got: out.len() });
    }
    Ok(ZeroSet::new(out, ZeroPlane::FugacityZ, field_zeros.provenance).with_convention(FugacityConvention::PlusField))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrefactorSource {
    /// Exact all-down sector trace of the known `H_s`.
    SectorTrace,
    /// Match a known `ln Z` at real `h_ref`.
    Reference { h_ref: f64, log_z: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    pub complete_symmetry: bool,
    pub merge_tol: f64,
    pub prefactor: PrefactorSource,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self { complete_symmetry: true, merge_tol: MERGE_TOL, prefactor: PrefactorSource::SectorTrace }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub zeros: ZeroSet,
    pub log_prefactor: f64,
    pub free_energy: f64,
}

/// Field-plane zeros (from sweeps or the analytic formulas) to `F(β, h=0)`.
pub fn reconstruct(field_zeros: &ZeroSet, h_s: &OperatorMatrix, beta: f64, n_sites: usize, options: &ReconstructOptions) -> Result<Reconstruction> {
    let zeros = if options.complete_symmetry {
        complete_by_symmetry(field_zeros, beta, n_sites, options.merge_tol)?
    } else {
        let z = field_zeros.field_to_fugacity(beta)?;
        if z.len() != n_sites {
            return Err(Error::ZeroCountMismatch { expected: n_sites, got: z.len() });
        }
        z
    };
    let log_p = match options.prefactor {
        PrefactorSource::SectorTrace => log_prefactor(h_s, beta, n_sites)?,
        PrefactorSource::Reference { h_ref, log_z } => fit_log_prefactor(&zeros, beta, h_ref, log_z)?,
    };
    let free_energy = free_energy_from_log(&zeros, log_p, beta)?;
    Ok(Reconstruction { zeros, log_prefactor: log_p, free_energy })
}

/// One row of an `F` versus `J` curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyPoint {
    pub j: f64,
    pub exact: f64,
    pub reconstructed: Option<f64>,
}

pub fn free_energy_curve_csv(points: &[FreeEnergyPoint]) -> String {
    let mut out = String::from("J,F_exact,F_reconstructed,abs_error\n");
    for p in points {
        let (r, e) = match p.reconstructed {
            Some(r) => (format!("{r:.12e}"), format!("{:.3e}", (r - p.exact).abs())),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!("{:.6},{:.12e},{r},{e}\n", p.j, p.exact));
    }
    out
}

/// Zeros in whichever plane, as field-plane points for reconstruction.
pub fn to_field_plane(zeros: &ZeroSet, beta: f64) -> Result<ZeroSet> {
    match zeros.plane {
        ZeroPlane::FieldH => Ok(zeros.clone()),
        ZeroPlane::FugacityZ => zeros.fugacity_to_field(beta),
        ZeroPlane::InverseTemperature => Err(Error::PlaneMismatch { expected: "field_h".into(), found: zeros.plane.to_string() }),
    }
}
