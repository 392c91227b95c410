//! Exact-diagonalization oracles: partition functions, ancilla coherences and
//! closed-form zero locations.

use std::f64::consts::PI;
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::circuit::DensityMatrix;
use crate::linalg::{commutator_norm, eigvalsh, poly_eval, poly_roots, Eigh, OperatorMatrix};
use crate::{par, Error, Result, C64};

/// Commutator norm above which two operators are treated as non-commuting.
pub const COMMUTE_TOL: f64 = 1e-10;

/// Largest accepted root residual of the sector polynomial.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-6;

/// Complex field `h = h_r + i h_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexField {
    pub h_r: f64,
    pub h_i: f64,
}

impl ComplexField {
    pub fn new(h_r: f64, h_i: f64) -> Self {
        Self { h_r, h_i }
    }

    pub fn to_c64(self) -> C64 {
        C64::new(self.h_r, self.h_i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPlane {
    /// Complex field `h`.
    FieldH,
    /// Fugacity per flipped spin.
    FugacityZ,
    /// Complex inverse temperature `β`.
    InverseTemperature,
}

impl ZeroPlane {
    pub fn tag(self) -> &'static str {
        match self {
            ZeroPlane::FieldH => "field_h",
            ZeroPlane::FugacityZ => "fugacity_z",
            ZeroPlane::InverseTemperature => "inverse_temperature",
        }
    }

    pub fn from_tag(s: &str) -> Result<Self> {
        match s {
            "field_h" => Ok(ZeroPlane::FieldH),
            "fugacity_z" => Ok(ZeroPlane::FugacityZ),
            "inverse_temperature" => Ok(ZeroPlane::InverseTemperature),
            _ => Err(Error::Parse(format!("unknown zero plane `{s}`"))),
        }
    }
}

impl fmt::Display for ZeroPlane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    PolynomialOracle,
    CircuitSweep,
}

impl Provenance {
    pub fn tag(self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::PolynomialOracle => "polynomial_oracle",
            Provenance::CircuitSweep => "circuit_sweep",
        }
    }

    pub fn from_tag(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Provenance::Analytic),
            "polynomial_oracle" => Ok(Provenance::PolynomialOracle),
            "circuit_sweep" => Ok(Provenance::CircuitSweep),
            _ => Err(Error::Parse(format!("unknown provenance `{s}`"))),
        }
    }
}

/// Sign convention linking a fugacity to the field.
///
/// Both describe the Boltzmann factor of one flipped spin, so the numeric
/// zeros agree; they differ in how `h` enters the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FugacityConvention {
    /// `H = H_s + h Σσ^z`, `z̃ = e^{2βh}`.
    PlusField,
    /// `H = H_s − h Σσ^z`, `z̃ = e^{−2βh}`.
    MinusField,
}

/// A set of partition-function zeros in one complex plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub zeros: Vec<C64>,
    pub plane: ZeroPlane,
    pub provenance: Provenance,
    /// Only meaningful in the fugacity plane.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<FugacityConvention>,
}

impl ZeroSet {
    pub fn new(zeros: Vec<C64>, plane: ZeroPlane, provenance: Provenance) -> Self {
        let convention = (plane == ZeroPlane::FugacityZ).then_some(FugacityConvention::PlusField);
        Self { zeros, plane, provenance, convention }
    }

    pub fn with_convention(mut self, convention: FugacityConvention) -> Self {
        self.convention = Some(convention);
        self
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Fugacity zeros mapped to the field plane, `Im(βh)` taken in `[0, π)`.
    pub fn fugacity_to_field(&self, beta: f64) -> Result<ZeroSet> {
        self.expect_plane(ZeroPlane::FugacityZ)?;
        let sign = match self.convention.unwrap_or(FugacityConvention::PlusField) {
            FugacityConvention::PlusField => 1.0,
            FugacityConvention::MinusField => -1.0,
        };
        let zeros = self.zeros.iter().map(|z| normalize_field(sign * z.ln() / (2.0 * beta), beta)).collect();
        Ok(ZeroSet::new(zeros, ZeroPlane::FieldH, self.provenance))
    }

    /// Field zeros mapped to fugacities under `z̃ = e^{2βh}`.
    pub fn field_to_fugacity(&self, beta: f64) -> Result<ZeroSet> {
        self.expect_plane(ZeroPlane::FieldH)?;
        let zeros = self.zeros.iter().map(|h| (2.0 * beta * h).exp()).collect();
        Ok(ZeroSet::new(zeros, ZeroPlane::FugacityZ, self.provenance))
    }

    pub fn expect_plane(&self, plane: ZeroPlane) -> Result<()> {
        if self.plane == plane {
            Ok(())
        } else {
            Err(Error::PlaneMismatch { expected: plane.to_string(), found: self.plane.to_string() })
        }
    }

    /// Largest distance from a zero to its nearest conjugate partner.
    pub fn conjugation_defect(&self) -> f64 {
        let conj: Vec<C64> = self.zeros.iter().map(|z| z.conj()).collect();
        directed_hausdorff(&self.zeros, &conj)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,plane,provenance\n");
        for z in &self.zeros {
            out.push_str(&format!("{:.15e},{:.15e},{},{}\n", z.re, z.im, self.plane.tag(), self.provenance.tag()));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<ZeroSet> {
        let (header, rows) = crate::io::read_csv(text)?;
        let (ire, iim) = (crate::io::column(&header, "re")?, crate::io::column(&header, "im")?);
        let iplane = crate::io::column(&header, "plane").ok();
        let iprov = crate::io::column(&header, "provenance").ok();
        let mut plane = ZeroPlane::FieldH;
        let mut provenance = Provenance::CircuitSweep;
        let mut zeros = Vec::with_capacity(rows.len());
        for row in &rows {
            zeros.push(C64::new(crate::io::parse_f64(&row[ire])?, crate::io::parse_f64(&row[iim])?));
            if let Some(i) = iplane {
                plane = ZeroPlane::from_tag(&row[i])?;
            }
            if let Some(i) = iprov {
                provenance = Provenance::from_tag(&row[i])?;
            }
        }
        Ok(ZeroSet::new(zeros, plane, provenance))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Folds `Im(βh)` into `[0, π)`; `e^{2βh}` is unchanged.
pub fn normalize_field(h: C64, beta: f64) -> C64 {
    let t = (beta * h.im).rem_euclid(PI);
    C64::new(h.re, if (PI - t) < 1e-12 { 0.0 } else { t / beta })
}

/// `max_{a∈A} min_{b∈B} |a − b|`.
pub fn directed_hausdorff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two point sets.
pub fn hausdorff(a: &[C64], b: &[C64]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// `Σ_n e^{−β E_n}`.
pub fn partition_function(h: &OperatorMatrix, beta: C64) -> C64 {
    eigvalsh(h).iter().map(|&e| (-beta * e).exp()).sum()
}

/// `ln Z` for real `β`, stable at large `β`.
pub fn log_partition_function(h: &OperatorMatrix, beta: f64) -> f64 {
    let values = eigvalsh(h);
    let e0 = crate::linalg::boltzmann_shift(&values, beta);
    -beta * e0 + values.iter().map(|&e| (-beta * (e - e0)).exp()).sum::<f64>().ln()
}

/// `−ln Z / β`.
pub fn free_energy(h: &OperatorMatrix, beta: f64) -> f64 {
    -log_partition_function(h, beta) / beta
}

/// `e^{−βH} / Z`.
pub fn thermal_density_matrix(h: &OperatorMatrix, beta: f64) -> DensityMatrix {
    let eig = Eigh::new(h);
    let e0 = crate::linalg::boltzmann_shift(&eig.values, beta);
    let z: f64 = eig.values.iter().map(|&e| (-beta * (e - e0)).exp()).sum();
    DensityMatrix::from_matrix_unchecked(eig.apply_fn(|e| C64::new((-beta * (e - e0)).exp() / z, 0.0)))
}

/// Thermal weights resolved over the eigenvalues of a conserved operator.
///
/// Holds `w_i = ⟨i|e^{−β(H0−E0)}|i⟩` in an eigenbasis `{|i⟩}` of `M` with
/// eigenvalues `m_i`, which is all that is needed to evaluate
/// `Tr e^{−βH0 − (x + iy)M} / Tr e^{−βH0 − xM}` for real `x, y`.
#[derive(Debug, Clone)]
pub struct SpectralWeights {
    pub m: Vec<f64>,
    pub w: Vec<f64>,
}

impl SpectralWeights {
    pub fn new(h0: &OperatorMatrix, m: &OperatorMatrix, beta: f64) -> Result<Self> {
        let norm = commutator_norm(h0, m);
        if norm > COMMUTE_TOL {
            return Err(Error::NonCommutingOperators { norm });
        }
        let eig_h = Eigh::new(h0);
        let e0 = crate::linalg::boltzmann_shift(&eig_h.values, beta);
        let a = eig_h.apply_fn(|e| C64::new((-beta * (e - e0)).exp(), 0.0));
        let diagonal = m.iter().enumerate().all(|(k, z)| k % (m.nrows() + 1) == 0 || *z == C64::new(0.0, 0.0));
        if diagonal {
            let mvals = (0..m.nrows()).map(|i| m[(i, i)].re).collect();
            let w = (0..a.nrows()).map(|i| a[(i, i)].re.max(0.0)).collect();
            return Ok(Self { m: mvals, w });
        }
        let eig_m = Eigh::new(m);
        let rotated = eig_m.vectors.adjoint() * a * &eig_m.vectors;
        let w = (0..rotated.nrows()).map(|i| rotated[(i, i)].re.max(0.0)).collect();
        Ok(Self { m: eig_m.values, w })
    }

    /// Unit weights over the spectrum of `H`, for the Fisher plane.
    pub fn spectrum(h: &OperatorMatrix) -> Self {
        let m = eigvalsh(h);
        let w = vec![1.0; m.len()];
        Self { m, w }
    }

    /// `Σ w e^{−(x+iy)m} / Σ w e^{−xm}`.
    pub fn eval(&self, x: f64, y: f64) -> C64 {
        let shift = self.m.iter().zip(&self.w).filter(|(_, &w)| w > 0.0).map(|(&m, _)| -x * m).fold(f64::NEG_INFINITY, f64::max);
        let mut num = C64::new(0.0, 0.0);
        let mut den = 0.0;
        for (&m, &w) in self.m.iter().zip(&self.w) {
            let mag = w * (-x * m - shift).exp();
            num += mag * C64::from_polar(1.0, -y * m);
            den += mag;
        }
        num / den
    }
}

/// `Tr e^{−βH0 − iθM} / Tr e^{−βH0}` for commuting `H0`, `M`.
pub fn coherence_exact(h0: &OperatorMatrix, m: &OperatorMatrix, beta: f64, theta: f64) -> Result<C64> {
    Ok(SpectralWeights::new(h0, m, beta)?.eval(0.0, theta))
}

/// Magnetization-sector traces `p_k = Tr_{k down spins} e^{−βH_s}`.
///
/// Stored as `p_k = e^{log_scale} · coeffs[k]` to stay finite at large `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorTraces {
    pub log_scale: f64,
    pub coeffs: Vec<f64>,
}

impl SectorTraces {
    pub fn n_sites(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn ln_p(&self, k: usize) -> f64 {
        self.log_scale + self.coeffs[k].ln()
    }

    /// `ln Z` at real field `h` under `H = H_s + hΣσ^z`.
    pub fn log_partition(&self, beta: f64, h: f64) -> f64 {
        let n = self.n_sites() as f64;
        let terms: Vec<f64> = (0..=self.n_sites()).map(|k| self.ln_p(k) - beta * h * (n - 2.0 * k as f64)).collect();
        let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
    }
}

/// Works block by block over magnetization sectors, so only eigenvalues of
/// blocks of size at most `C(N, N/2)` are needed.
pub fn sector_traces(h_s: &OperatorMatrix, beta: f64, n_sites: usize) -> Result<SectorTraces> {
    let dim = h_s.nrows();
    if dim != 1 << n_sites || !h_s.is_square() {
        return Err(Error::InvalidModel(format!("{}×{} operator does not act on {n_sites} sites", h_s.nrows(), h_s.ncols())));
    }
    // M is diagonal, so [H, M]_rc = 2 (k_r − k_c) H_rc
    let mut norm: f64 = 0.0;
    for c in 0..dim {
        for r in 0..dim {
            let dk = (r.count_ones() as f64 - c.count_ones() as f64).abs();
            if dk > 0.0 {
                norm = norm.max(2.0 * dk * h_s[(r, c)].norm());
            }
        }
    }
    if norm > COMMUTE_TOL {
        return Err(Error::NonCommutingOperators { norm });
    }
    let sectors: Vec<Vec<f64>> = crate::par::map_range(n_sites + 1, |k| {
        let idx: Vec<usize> = (0..dim).filter(|i| i.count_ones() as usize == k).collect();
        let block = OperatorMatrix::from_fn(idx.len(), idx.len(), |r, c| h_s[(idx[r], idx[c])]);
        eigvalsh(&block)
    });
    let mut all: Vec<f64> = sectors.iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    let e0 = crate::linalg::boltzmann_shift(&all, beta);
    let coeffs = sectors.iter().map(|vals| vals.iter().map(|e| (-beta * (e - e0)).exp()).sum()).collect();
    Ok(SectorTraces { log_scale: -beta * e0, coeffs })
}

/// Roots of `Σ_k p_k z̃^k` in the fugacity plane.
pub fn leeyang_zeros_polynomial(h_s: &OperatorMatrix, beta: f64, n_sites: usize) -> Result<ZeroSet> {
    let traces = sector_traces(h_s, beta, n_sites)?;
    if let Some(k) = traces.coeffs.iter().position(|&p| p <= 0.0) {
        return Err(Error::IllConditionedPolynomial { residual: traces.coeffs[k] });
    }
    let roots = poly_roots(&traces.coeffs);
    let scale_at = |z: C64| traces.coeffs.iter().enumerate().map(|(k, p)| p * z.norm().powi(k as i32)).sum::<f64>();
    let residual = roots.iter().map(|&z| poly_eval(&traces.coeffs, z).norm() / scale_at(z)).fold(0.0, f64::max);
    if residual > ROOT_RESIDUAL_TOL {
        return Err(Error::IllConditionedPolynomial { residual });
    }
    Ok(ZeroSet::new(roots, ZeroPlane::FugacityZ, Provenance::PolynomialOracle))
}

/// Transfer-matrix zeros of the ferromagnetic Ising ring `−J Σ σ^z σ^z`.
pub fn ising_zeros_analytic(n_sites: usize, j: f64, beta: f64) -> ZeroSet {
    let u = (-4.0 * beta * j).exp();
    let zeros = (1..=n_sites)
        .map(|n| {
            let k = PI * (2 * n - 1) as f64 / n_sites as f64;
            let (s, c) = k.sin_cos();
            let re = -u * (1.0 + c) + c;
            let im = ((1.0 - u) * (s * s + u * (1.0 + c).powi(2))).max(0.0).sqrt();
            C64::new(re, if s > 1e-12 { im } else if s < -1e-12 { -im } else { 0.0 })
        })
        .collect();
    ZeroSet::new(zeros, ZeroPlane::FugacityZ, Provenance::Analytic).with_convention(FugacityConvention::MinusField)
}

/// Free-fermion zeros of the XY chain with the fermion-parity boundary term:
/// `h = −2J cos(q) + i(2m+1)π/(2β)`.
///
/// The hole quasi-momenta `q = 2πk/N + π` are the ones for which `H = H_s +
/// hΣσ^z` has this sign; they coincide with `2πk/N` as a set for even `N`.
pub fn xy_zeros_analytic(n_sites: usize, j: f64, beta: f64, m_range: RangeInclusive<i64>) -> ZeroSet {
    let mut zeros = Vec::new();
    for m in m_range {
        for k in 0..n_sites {
            let re = -2.0 * j * (2.0 * PI * k as f64 / n_sites as f64 + PI).cos();
            zeros.push(C64::new(re, (2 * m + 1) as f64 * PI / (2.0 * beta)));
        }
    }
    ZeroSet::new(zeros, ZeroPlane::FieldH, Provenance::Analytic)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    IsingLike,
    XYLike,
}

/// `ln cosh x` without overflow.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Zeros of the two-site XXZ model in the field plane, `Im(βh) ∈ [0, π)`.
///
/// With `c = e^{2βJ_z} cosh(2βJ)` the zeros solve `cosh(2βh) = −c`. For
/// `c < 1` they sit at `h_r = 0`; otherwise on `2βh_i = π`.
pub fn xxz2_zeros_analytic(j: f64, jz: f64, beta: f64) -> (ZeroSet, Regime) {
    let ln_c = 2.0 * beta * jz + ln_cosh(2.0 * beta * j);
    if ln_c < 0.0 {
        let t = (-ln_c.exp()).acos() / 2.0;
        let zeros = vec![C64::new(0.0, t / beta), C64::new(0.0, (PI - t) / beta)];
        (ZeroSet::new(zeros, ZeroPlane::FieldH, Provenance::Analytic), Regime::IsingLike)
    } else {
        let c = ln_c.exp();
        let acosh = ln_c + (1.0 + (1.0 - 1.0 / (c * c)).max(0.0).sqrt()).ln();
        let hr = acosh / (2.0 * beta);
        let hi = PI / (2.0 * beta);
        let zeros = vec![C64::new(-hr, hi), C64::new(hr, hi)];
        (ZeroSet::new(zeros, ZeroPlane::FieldH, Provenance::Analytic), Regime::XYLike)
    }
}

fn push_unique(zeros: &mut Vec<C64>, z: C64) {
    if !zeros.iter().any(|w| (w - z).norm() < 1e-12 * (1.0 + z.norm())) {
        zeros.push(z);
    }
}

/// Fisher zeros of the Ising ring
/// `β = −ln tan²(π(k+½)/N)/(4J) ± i(2m+1)π/(4J)`.
pub fn fisher_zeros_ising_analytic(n_sites: usize, j: f64, k_range: RangeInclusive<i64>, m_range: RangeInclusive<i64>) -> Result<ZeroSet> {
    if j == 0.0 {
        return Err(Error::InvalidModel("Fisher zeros need J ≠ 0".into()));
    }
    let mut zeros = Vec::new();
    for k in k_range {
        let (s, c) = (PI * (k as f64 + 0.5) / n_sites as f64).sin_cos();
        if c.abs() < 1e-12 {
            // tanh(βJ)^N = −1 has no finite solution on this branch
            continue;
        }
        let t = s / c;
        let re = -(t * t).ln() / (4.0 * j);
        for m in m_range.clone() {
            let im = (2 * m + 1) as f64 * PI / (4.0 * j);
            push_unique(&mut zeros, C64::new(re, im));
            push_unique(&mut zeros, C64::new(re, -im));
        }
    }
    Ok(ZeroSet::new(zeros, ZeroPlane::InverseTemperature, Provenance::Analytic))
}

/// Fisher zeros of the XY chain with the fermion-parity boundary term,
/// `β = −i(2m+1)π/(4J cos(2πk/N))`.
pub fn fisher_zeros_xy_analytic(n_sites: usize, j: f64, k_range: RangeInclusive<i64>, m_range: RangeInclusive<i64>) -> Result<ZeroSet> {
    if j == 0.0 {
        return Err(Error::InvalidModel("Fisher zeros need J ≠ 0".into()));
    }
    let mut zeros = Vec::new();
    for k in k_range {
        let c = (2.0 * PI * k as f64 / n_sites as f64).cos();
        if c.abs() < 1e-12 {
            return Err(Error::SingularMode { k, n_sites });
        }
        for m in m_range.clone() {
            push_unique(&mut zeros, C64::new(0.0, -((2 * m + 1) as f64) * PI / (4.0 * j * c)));
        }
    }
    Ok(ZeroSet::new(zeros, ZeroPlane::InverseTemperature, Provenance::Analytic))
}

/// Coherence on a rectangular grid, `values[ix * ys.len() + iy]`.
#[derive(Debug, Clone)]
pub struct CoherenceGrid {
    pub plane: ZeroPlane,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<C64>,
}

impl CoherenceGrid {
    pub fn at(&self, ix: usize, iy: usize) -> C64 {
        self.values[ix * self.ys.len() + iy]
    }

    pub fn log_abs(&self, ix: usize, iy: usize) -> f64 {
        self.at(ix, iy).norm().ln()
    }

    /// Interior cells strictly below all eight neighbours in `|L|`.
    pub fn local_minima(&self) -> Vec<(usize, usize)> {
        let (nx, ny) = (self.xs.len(), self.ys.len());
        let mut out = Vec::new();
        for ix in 1..nx.saturating_sub(1) {
            for iy in 1..ny.saturating_sub(1) {
                let v = self.at(ix, iy).norm();
                let lower = (-1i64..=1).all(|dx| {
                    (-1i64..=1).all(|dy| (dx == 0 && dy == 0) || v < self.at((ix as i64 + dx) as usize, (iy as i64 + dy) as usize).norm())
                });
                if lower {
                    out.push((ix, iy));
                }
            }
        }
        out
    }

    /// Minima as points `x + iy`.
    pub fn minima_points(&self) -> Vec<C64> {
        self.local_minima().into_iter().map(|(ix, iy)| C64::new(self.xs[ix], self.ys[iy])).collect()
    }

    pub fn to_csv(&self) -> String {
        let (xn, yn) = match self.plane {
            ZeroPlane::InverseTemperature => ("beta_r", "beta_i"),
            _ => ("h_r", "h_i"),
        };
        let mut out = format!("{xn},{yn},log_abs_l,re_l,im_l\n");
        for (ix, x) in self.xs.iter().enumerate() {
            for (iy, y) in self.ys.iter().enumerate() {
                let l = self.at(ix, iy);
                out.push_str(&format!("{x:.10e},{y:.10e},{:.10e},{:.10e},{:.10e}\n", l.norm().ln(), l.re, l.im));
            }
        }
        out
    }
}

/// `L(h) = Z(β, h)/Z(β, h_r)` over `h_r ∈ xs`, `h_i ∈ ys` for `H = H_s + hM`.
pub fn coherence_map_field(h_s: &OperatorMatrix, m: &OperatorMatrix, beta: f64, xs: &[f64], ys: &[f64]) -> Result<CoherenceGrid> {
    let weights = SpectralWeights::new(h_s, m, beta)?;
    let ny = ys.len();
    let values = par::map_range(xs.len() * ny, |i| weights.eval(beta * xs[i / ny], beta * ys[i % ny]));
    Ok(CoherenceGrid { plane: ZeroPlane::FieldH, xs: xs.to_vec(), ys: ys.to_vec(), values })
}

/// `L(β) = Z(β_r + iβ_i)/Z(β_r)` over `β_r ∈ xs`, `β_i ∈ ys`.
pub fn coherence_map_fisher(h: &OperatorMatrix, xs: &[f64], ys: &[f64]) -> CoherenceGrid {
    let weights = SpectralWeights::spectrum(h);
    let ny = ys.len();
    let values = par::map_range(xs.len() * ny, |i| weights.eval(xs[i / ny], ys[i % ny]));
    CoherenceGrid { plane: ZeroPlane::InverseTemperature, xs: xs.to_vec(), ys: ys.to_vec(), values }
}
