//! Lee-Yang protocol: ancilla coupled to system A through
//! `exp(−i(θ/2) σ^z_anc ⊗ Σσ^z_i)` with `θ = βh_i`, read out as the ancilla
//! coherence `L = Tr[ρ e^{−iθΣσ^z}]`.
//!
//! Register layout: A on `0..N`, B on `N..2N`, ancilla on `2N` (the least
//! significant bit).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{sample_shots, Basis, Circuit, Gate, StateVector};
use crate::exact::{ComplexField, CoherenceGrid, Provenance, ZeroPlane, ZeroSet};
use crate::hamiltonian::{build_hamiltonian, SpinChainSpec};
use crate::noise::{apply_noise_model, LinearShiftParams, NoiseOptions};
use crate::postselect::{estimate_coherence, Layout, PostSelect};
use crate::tfd::exact_tfd_state;
use crate::{par, Error, Result, C64};

/// Default `|L|` below which an interpolated point counts as a zero.
pub const ZERO_THRESHOLD: f64 = 0.05;

pub const DEFAULT_POINTS: usize = 41;

pub const DEFAULT_SHOTS: usize = 1000;

/// `n` uniform `θ` values on `[0, π]`.
pub fn default_thetas(n: usize) -> Vec<f64> {
    crate::io::linspace(0.0, PI, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ExactExpectation,
    Shots { n_shots: usize, seed: u64 },
}

/// State preparation on the `2N` system qubits.
#[derive(Debug, Clone)]
pub enum Prep {
    /// The exact TFD statevector.
    Exact(StateVector),
    /// A preparation circuit run from `|0…0⟩`.
    Circuit(Circuit),
}

impl Prep {
    pub fn exact(spec: &SpinChainSpec, beta: f64) -> Result<Self> {
        Ok(Prep::Exact(exact_tfd_state(&build_hamiltonian(spec)?, beta)))
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Prep::Exact(s) => s.n_qubits(),
            Prep::Circuit(c) => c.n_qubits(),
        }
    }

    /// Prepared state, with the XX distortion applied to circuit preps.
    pub fn state(&self, noise: Option<(LinearShiftParams, NoiseOptions)>) -> Result<StateVector> {
        match (self, noise) {
            (Prep::Exact(s), None) => Ok(s.clone()),
            (Prep::Exact(_), Some(_)) => Err(Error::InvalidModel("gate noise needs a circuit preparation".into())),
            (Prep::Circuit(c), None) => c.run(&StateVector::zero(c.n_qubits())),
            (Prep::Circuit(c), Some((p, o))) => {
                let noisy = apply_noise_model(c, p, o);
                noisy.run(&StateVector::zero(c.n_qubits()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Real field, already included in the thermal preparation.
    pub h_r: f64,
    /// `θ = βh_i` points.
    pub theta_values: Vec<f64>,
    pub mode: Mode,
    pub noise: Option<LinearShiftParams>,
    #[serde(default)]
    pub noise_options: NoiseOptions,
    #[serde(default)]
    pub postselect: PostSelect,
}

impl SweepSpec {
    pub fn exact(h_r: f64, theta_values: Vec<f64>) -> Self {
        Self { h_r, theta_values, mode: Mode::ExactExpectation, noise: None, noise_options: NoiseOptions::default(), postselect: PostSelect::None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta_values.is_empty() || self.theta_values.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidModel("sweep needs a nonempty list of finite θ values".into()));
        }
        if let Mode::Shots { n_shots: 0, .. } = self.mode {
            return Err(Error::InvalidModel("shots mode needs n_shots ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// `(h_r, h_i)`, or `(β_r, β_i)` in the Fisher plane.
    pub h: ComplexField,
    /// Swept phase `βh_i`, or `β_i`.
    pub theta: f64,
    pub l: C64,
    pub stderr_re: Option<f64>,
    pub stderr_im: Option<f64>,
    pub retained_shots: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceTrace {
    pub plane: ZeroPlane,
    pub beta: f64,
    pub points: Vec<TracePoint>,
}

impl CoherenceTrace {
    pub fn thetas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.theta).collect()
    }

    pub fn values(&self) -> Vec<C64> {
        self.points.iter().map(|p| p.l).collect()
    }

    pub fn to_csv(&self) -> String {
        let (t, x) = match self.plane {
            ZeroPlane::InverseTemperature => ("beta_i", "beta_r"),
            _ => ("theta", "hr"),
        };
        let mut out = format!("{t},{x},re_L,im_L,stderr_re,stderr_im,retained_shots\n");
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:e}"));
        for p in &self.points {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{},{},{}\n",
                p.theta,
                p.h.h_r,
                p.l.re,
                p.l.im,
                opt(p.stderr_re),
                opt(p.stderr_im),
                p.retained_shots.map_or(String::new(), |n| n.to_string())
            ));
        }
        out
    }

    /// Reads the layout written by [`CoherenceTrace::to_csv`]; `beta` is not
    /// stored in the rows and must be supplied.
    pub fn from_csv(text: &str, beta: f64) -> Result<Self> {
        use crate::io::{column, parse_f64, read_csv};
        let (header, rows) = read_csv(text)?;
        let (plane, it, ix) = match column(&header, "theta") {
            Ok(i) => (ZeroPlane::FieldH, i, column(&header, "hr")?),
            Err(_) => (ZeroPlane::InverseTemperature, column(&header, "beta_i")?, column(&header, "beta_r")?),
        };
        let (ire, iim) = (column(&header, "re_L")?, column(&header, "im_L")?);
        let optional = |row: &[String], name: &str| -> Result<Option<String>> {
            Ok(column(&header, name).ok().map(|i| row[i].clone()).filter(|v| !v.is_empty()))
        };
        let mut points = Vec::with_capacity(rows.len());
        for row in &rows {
            let theta = parse_f64(&row[it])?;
            let x = parse_f64(&row[ix])?;
            let h = match plane {
                ZeroPlane::InverseTemperature => ComplexField::new(x, theta),
                _ => ComplexField::new(x, theta / beta),
            };
            points.push(TracePoint {
                h,
                theta,
                l: C64::new(parse_f64(&row[ire])?, parse_f64(&row[iim])?),
                stderr_re: optional(row, "stderr_re")?.map(|v| parse_f64(&v)).transpose()?,
                stderr_im: optional(row, "stderr_im")?.map(|v| parse_f64(&v)).transpose()?,
                retained_shots: optional(row, "retained_shots")?
                    .map(|v| v.parse().map_err(|_| Error::Parse(format!("`{v}` is not a shot count"))))
                    .transpose()?,
            });
        }
        Ok(Self { plane, beta, points })
    }
}

/// Appends `H(anc)`, `CRz(anc → q, −2θ)` and `Rz(q, θ)` for every system
/// qubit: `exp(−i(θ/2) σ^z_anc ⊗ Σ_q σ^z_q)` on an ancilla prepared in `|+⟩`.
pub fn append_coupling(circuit: &mut Circuit, system: &[usize], ancilla: usize, theta: f64) -> Result<()> {
    circuit.push(Gate::H(ancilla))?;
    for &q in system {
        circuit.push(Gate::CRz { control: ancilla, target: q, theta: -2.0 * theta })?;
    }
    for &q in system {
        circuit.push(Gate::Rz(q, theta))?;
    }
    Ok(())
}

/// Coupling fragment on `n_sites + 1` qubits, ancilla last.
pub fn build_coupling_circuit(n_sites: usize, theta: f64) -> Result<Circuit> {
    if n_sites == 0 {
        return Err(Error::InvalidModel("coupling needs at least one site".into()));
    }
    let mut c = Circuit::new(n_sites + 1);
    append_coupling(&mut c, &(0..n_sites).collect::<Vec<_>>(), n_sites, theta)?;
    Ok(c)
}

/// `2ρ_01` of the least significant qubit. Equals `⟨σ^z⟩` after `Ry(−π/2)`
/// in the real part and minus `⟨σ^z⟩` after `Rx(π/2)` in the imaginary part.
pub fn ancilla_coherence(state: &StateVector) -> C64 {
    state.amplitudes().chunks_exact(2).map(|p| p[0] * p[1].conj()).sum::<C64>() * 2.0
}

fn mix_seed(seed: u64, point: usize, basis: u64) -> u64 {
    // splitmix64 finalizer over the combined key
    let mut z = seed ^ (point as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ basis.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `prep ⊗ |0⟩_anc`, then `coupling(θ)`, and reads the ancilla for
/// every `θ`. `coupling` must act on `2N + 1` qubits.
pub(crate) fn run_protocol<C>(prep: &StateVector, n_sites: usize, thetas: &[f64], coupling: C, mode: Mode, postselect: PostSelect) -> Result<Vec<TracePoint>>
where
    C: Fn(f64) -> Result<Circuit> + Sync,
{
    if prep.n_qubits() != 2 * n_sites {
        return Err(Error::LayoutMismatch(format!("preparation has {} qubits, expected {}", prep.n_qubits(), 2 * n_sites)));
    }
    let start = prep.tensor(&StateVector::zero(1));
    let layout = Layout::protocol(n_sites);
    let n_total = 2 * n_sites + 1;
    let results = par::map_range(thetas.len(), |i| -> Result<TracePoint> {
        let theta = thetas[i];
        let out = coupling(theta)?.run(&start)?;
        let blank = TracePoint { h: ComplexField::new(0.0, 0.0), theta, l: C64::new(0.0, 0.0), stderr_re: None, stderr_im: None, retained_shots: None };
        match mode {
            Mode::ExactExpectation => Ok(TracePoint { l: ancilla_coherence(&out), ..blank }),
            Mode::Shots { n_shots, seed } => {
                let mut bases = vec![Basis::Z; n_total];
                bases[n_total - 1] = Basis::X;
                let real = sample_shots(&out, &bases, n_shots, mix_seed(seed, i, 0))?;
                bases[n_total - 1] = Basis::Y;
                let imag = sample_shots(&out, &bases, n_shots, mix_seed(seed, i, 1))?;
                let (real, _) = postselect.apply(&real, &layout)?;
                let (imag, _) = postselect.apply(&imag, &layout)?;
                let e = estimate_coherence(&real, &imag, n_total - 1)?;
                Ok(TracePoint {
                    l: e.l,
                    stderr_re: Some(e.stderr_re),
                    stderr_im: Some(e.stderr_im),
                    retained_shots: Some(e.retained_re + e.retained_im),
                    ..blank
                })
            }
        }
    });
    results.into_iter().collect()
}

/// Sweeps `θ = βh_i` at the fixed `h_r` baked into `prep`.
pub fn measure_coherence(prep: &Prep, n_sites: usize, beta: f64, sweep: &SweepSpec) -> Result<CoherenceTrace> {
    sweep.validate()?;
    let state = prep.state(sweep.noise.map(|p| (p, sweep.noise_options)))?;
    let system: Vec<usize> = (0..n_sites).collect();
    let coupling = |theta: f64| {
        let mut c = Circuit::new(2 * n_sites + 1);
        append_coupling(&mut c, &system, 2 * n_sites, theta)?;
        Ok(c)
    };
    let mut points = run_protocol(&state, n_sites, &sweep.theta_values, coupling, sweep.mode, sweep.postselect)?;
    for p in &mut points {
        p.h = ComplexField::new(sweep.h_r, p.theta / beta);
    }
    Ok(CoherenceTrace { plane: ZeroPlane::FieldH, beta, points })
}

/// Zero candidates along a trace, as interpolated `θ*` values.
///
/// A candidate is a sign change of `Re L` or `Im L` between neighbouring
/// samples, located by linear interpolation, or a sampled local minimum of
/// `|L|` refined by a parabola through `|L|²`. It is kept when the
/// interpolated `|L|` is below `threshold`; candidates closer than one sample
/// spacing are merged, keeping the smallest `|L|`.
pub fn find_zero_thetas(thetas: &[f64], values: &[C64], threshold: f64) -> Vec<f64> {
    let n = thetas.len().min(values.len());
    if n < 2 {
        return Vec::new();
    }
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    let lerp = |i: usize, t: f64| values[i] + (values[i + 1] - values[i]) * t;
    for i in 0..n - 1 {
        for part in [|z: C64| z.re, |z: C64| z.im] {
            let (a, b) = (part(values[i]), part(values[i + 1]));
            // an exact zero counts once, and only when the part is not flat
            let touches = a == 0.0 && b != 0.0 && (i == 0 || part(values[i - 1]) != 0.0);
            if (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) || touches {
                let t = if a == b { 0.0 } else { a / (a - b) };
                let m = lerp(i, t).norm();
                if m < threshold {
                    candidates.push((thetas[i] + t * (thetas[i + 1] - thetas[i]), m));
                }
            }
        }
    }
    if part_is_zero(values[n - 1]) {
        candidates.push((thetas[n - 1], 0.0));
    }
    for i in 1..n - 1 {
        let (l, c, r) = (values[i - 1].norm_sqr(), values[i].norm_sqr(), values[i + 1].norm_sqr());
        if c < l && c < r && c.sqrt() < threshold {
            let denom = l - 2.0 * c + r;
            let shift = if denom > 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
            let h = thetas[i + 1] - thetas[i];
            let theta = thetas[i] + shift.clamp(-1.0, 1.0) * h;
            let m = (c - 0.25 * (l - r) * shift).max(0.0).sqrt();
            candidates.push((theta, m));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let step = thetas.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for c in candidates {
        match merged.last_mut() {
            Some(last) if (c.0 - last.0).abs() <= step => {
                if c.1 < last.1 {
                    *last = c;
                }
            }
            _ => merged.push(c),
        }
    }
    merged.into_iter().map(|(t, _)| t).collect()
}

fn part_is_zero(z: C64) -> bool {
    z.re == 0.0 && z.im == 0.0
}

/// Zeros of a trace in its own plane; empty when none qualify.
pub fn find_zeros(trace: &CoherenceTrace) -> ZeroSet {
    find_zeros_with(trace, ZERO_THRESHOLD)
}

pub fn find_zeros_with(trace: &CoherenceTrace, threshold: f64) -> ZeroSet {
    let h_r = trace.points.first().map_or(0.0, |p| p.h.h_r);
    let thetas = find_zero_thetas(&trace.thetas(), &trace.values(), threshold);
    let zeros = thetas
        .into_iter()
        .map(|t| match trace.plane {
            ZeroPlane::InverseTemperature => C64::new(h_r, t),
            _ => C64::new(h_r, t / trace.beta),
        })
        .collect();
    ZeroSet::new(zeros, trace.plane, Provenance::CircuitSweep)
}

/// Grid of `L` over `h_r ∈ hr_values`, `θ ∈ theta_values`; `make_prep`
/// builds the thermal preparation for each `h_r`.
pub fn scan_plane<P>(spec: &SpinChainSpec, beta: f64, hr_values: &[f64], theta_values: &[f64], mode: Mode, make_prep: P) -> Result<CoherenceGrid>
where
    P: Fn(&SpinChainSpec) -> Result<Prep> + Sync,
{
    let columns = par::map_range(hr_values.len(), |ix| -> Result<Vec<C64>> {
        let s = spec.clone().with_field(hr_values[ix]);
        let prep = make_prep(&s)?;
        let mode = match mode {
            Mode::Shots { n_shots, seed } => Mode::Shots { n_shots, seed: mix_seed(seed, ix, 2) },
            m => m,
        };
        let sweep = SweepSpec { mode, ..SweepSpec::exact(hr_values[ix], theta_values.to_vec()) };
        Ok(measure_coherence(&prep, spec.n_sites, beta, &sweep)?.values())
    });
    let mut values = Vec::with_capacity(hr_values.len() * theta_values.len());
    for col in columns {
        values.extend(col?);
    }
    let ys = theta_values.iter().map(|t| t / beta).collect();
    Ok(CoherenceGrid { plane: ZeroPlane::FieldH, xs: hr_values.to_vec(), ys, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{coherence_exact, xxz2_zeros_analytic};
    use crate::hamiltonian::{build_magnetization, build_xxz, terms_matrix, Pauli, PauliTerm};
    use crate::linalg::{distance_up_to_phase, expm_hermitian};

    fn two_site(j: f64, hr: f64) -> SpinChainSpec {
        SpinChainSpec::xxz(2, j, -1.0).with_field(hr)
    }

    #[test]
    fn coupling_fragment_matches_exponential() {
        for n in 1..=3 {
            let theta = 0.83;
            let mut frag = build_coupling_circuit(n, theta).unwrap();
            // drop the ancilla H to compare the bare controlled phase
            let bare = Circuit::from_text(&frag.to_text().unwrap().replacen(&format!("H {n}\n"), "", 1)).unwrap();
            let terms: Vec<PauliTerm> = (0..n).map(|q| PauliTerm::new(1.0, vec![(q, Pauli::Z), (n, Pauli::Z)])).collect();
            let gen = terms_matrix(n + 1, &terms);
            let target = expm_hermitian(&gen, C64::new(0.0, -theta / 2.0));
            assert!(distance_up_to_phase(&bare.unitary().unwrap(), &target) < 1e-10, "n = {n}");
            frag = build_coupling_circuit(n, 0.0).unwrap();
            let h_only = Circuit::from_text(&format!("QUBITS {}\nH {n}\n", n + 1)).unwrap();
            assert!(distance_up_to_phase(&frag.unitary().unwrap(), &h_only.unitary().unwrap()) < 1e-12);
        }
        let two = build_coupling_circuit(2, 0.4).unwrap();
        let names: Vec<&str> = two.gates().iter().map(|g| g.name()).collect();
        assert_eq!(names, ["H", "CRZ", "CRZ", "RZ", "RZ"]);
        assert_eq!(two.gates()[1], Gate::CRz { control: 2, target: 0, theta: -0.8 });
    }

    #[test]
    fn ancilla_readout_matches_basis_rotations() {
        let spec = two_site(0.9, 0.1);
        let prep = Prep::exact(&spec, 1.5).unwrap().state(None).unwrap().tensor(&StateVector::zero(1));
        let mut c = Circuit::new(5);
        append_coupling(&mut c, &[0, 1], 4, 0.7).unwrap();
        let out = c.run(&prep).unwrap();
        let l = ancilla_coherence(&out);
        let mut re = out.clone();
        re.apply(&Basis::X.rotation(4).unwrap()).unwrap();
        let mut im = out;
        im.apply(&Basis::Y.rotation(4).unwrap()).unwrap();
        assert!((l.re - re.expectation_z(4)).abs() < 1e-12);
        assert!((l.im + im.expectation_z(4)).abs() < 1e-12);
    }

    #[test]
    fn exact_protocol_matches_trace_formula() {
        for (n, j, jz, hr, beta) in [(2usize, 0.9, -1.0, 0.0, 10.0), (3, 0.5, 0.7, 0.2, 1.0), (4, 1.2, -1.0, -0.3, 2.0)] {
            let spec = SpinChainSpec::xxz(n, j, jz).with_field(hr);
            let h = build_xxz(&spec).unwrap();
            let m = build_magnetization(n);
            let thetas = default_thetas(13);
            let trace = measure_coherence(&Prep::exact(&spec, beta).unwrap(), n, beta, &SweepSpec::exact(hr, thetas.clone())).unwrap();
            for p in &trace.points {
                assert!((p.l - coherence_exact(&h, &m, beta, p.theta).unwrap()).norm() < 1e-8);
            }
            assert!((trace.points[0].l - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn ising_like_trace_shape() {
        let spec = two_site(0.9, 0.0);
        let trace = measure_coherence(&Prep::exact(&spec, 10.0).unwrap(), 2, 10.0, &SweepSpec::exact(0.0, default_thetas(41))).unwrap();
        let values = trace.values();
        assert!(values.iter().all(|l| l.im.abs() < 1e-10));
        let first_half = &values[..21];
        assert_eq!(first_half.windows(2).filter(|w| w[0].re * w[1].re < 0.0).count(), 1);
        for i in 0..41 {
            assert!((values[i].re - values[40 - i].re).abs() < 1e-8);
        }
        let zeros = find_zeros(&trace);
        assert_eq!(zeros.len(), 2);
        assert!((zeros.zeros[0].im + zeros.zeros[1].im - PI / 10.0).abs() < 1e-3);
    }

    #[test]
    fn xy_like_trace_touches_zero_at_half_pi() {
        let beta = 10.0;
        let (analytic, _) = xxz2_zeros_analytic(1.2, -1.0, beta);
        let hr = analytic.zeros[1].re;
        let spec = two_site(1.2, hr);
        let trace = measure_coherence(&Prep::exact(&spec, beta).unwrap(), 2, beta, &SweepSpec::exact(hr, default_thetas(41))).unwrap();
        let values = trace.values();
        assert!(values[20].norm() < 1e-8);
        assert!(values.iter().all(|l| l.re >= -1e-12));
        assert!(values.iter().enumerate().filter(|(i, _)| *i != 0 && *i != 20 && *i != 40).all(|(_, l)| l.im.abs() > 1e-6));
        let zeros = find_zeros(&trace);
        assert_eq!(zeros.len(), 1);
        assert!((zeros.zeros[0] - analytic.zeros[1]).norm() < 1e-6);
    }

    #[test]
    fn periodicity_in_theta() {
        for n in [2usize, 3] {
            let spec = SpinChainSpec::xxz(n, 0.7, -0.4).with_field(0.1);
            let prep = Prep::exact(&spec, 1.0).unwrap();
            let thetas = vec![0.3, 0.3 + PI, 0.3 + 2.0 * PI];
            let t = measure_coherence(&prep, n, 1.0, &SweepSpec::exact(0.1, thetas)).unwrap().values();
            assert!((t[0] - t[2]).norm() < 1e-10);
            if n % 2 == 0 {
                assert!((t[0] - t[1]).norm() < 1e-10);
            } else {
                assert!((t[0] + t[1]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn find_zeros_edge_cases() {
        let thetas = default_thetas(11);
        let ones = vec![C64::new(1.0, 0.0); 11];
        assert!(find_zero_thetas(&thetas, &ones, ZERO_THRESHOLD).is_empty());
        // linear trace with a sign change at a known point
        let t0 = 1.234;
        let linear: Vec<C64> = thetas.iter().map(|t| C64::new(0.02 * (t - t0), 0.0)).collect();
        let found = find_zero_thetas(&thetas, &linear, ZERO_THRESHOLD);
        assert_eq!(found.len(), 1);
        assert!((found[0] - t0).abs() < 1e-12);
        // large-|L| sign change is rejected
        let steep: Vec<C64> = thetas.iter().map(|t| C64::new(5.0 * (t - t0), 3.0)).collect();
        assert!(find_zero_thetas(&thetas, &steep, ZERO_THRESHOLD).is_empty());
        assert!(find_zero_thetas(&thetas[..1], &ones[..1], ZERO_THRESHOLD).is_empty());
    }

    #[test]
    fn shots_mode_statistics() {
        let spec = two_site(0.9, 0.0);
        let prep = Prep::exact(&spec, 2.0).unwrap();
        let thetas = default_thetas(9);
        let exact = measure_coherence(&prep, 2, 2.0, &SweepSpec::exact(0.0, thetas.clone())).unwrap();
        let mut within = 0;
        let mut total = 0;
        for seed in 0..10 {
            let sweep = SweepSpec { mode: Mode::Shots { n_shots: 1000, seed }, ..SweepSpec::exact(0.0, thetas.clone()) };
            let shots = measure_coherence(&prep, 2, 2.0, &sweep).unwrap();
            for (e, s) in exact.points.iter().zip(&shots.points) {
                total += 2;
                within += ((s.l.re - e.l.re).abs() <= 3.0 * s.stderr_re.unwrap().max(1e-3)) as usize;
                within += ((s.l.im - e.l.im).abs() <= 3.0 * s.stderr_im.unwrap().max(1e-3)) as usize;
                assert_eq!(s.retained_shots, Some(2000));
            }
        }
        assert!(within as f64 >= 0.95 * total as f64, "{within}/{total}");
        let sweep = SweepSpec { mode: Mode::Shots { n_shots: 100, seed: 4 }, ..SweepSpec::exact(0.0, thetas) };
        assert_eq!(measure_coherence(&prep, 2, 2.0, &sweep).unwrap(), measure_coherence(&prep, 2, 2.0, &sweep).unwrap());
    }

    #[test]
    fn sweep_validation() {
        let prep = Prep::exact(&two_site(0.9, 0.0), 1.0).unwrap();
        assert!(measure_coherence(&prep, 2, 1.0, &SweepSpec::exact(0.0, vec![])).is_err());
        assert!(measure_coherence(&prep, 2, 1.0, &SweepSpec::exact(0.0, vec![f64::NAN])).is_err());
        let noisy = SweepSpec { noise: Some(LinearShiftParams::new(1.0, 0.1)), ..SweepSpec::exact(0.0, vec![0.1]) };
        assert!(measure_coherence(&prep, 2, 1.0, &noisy).is_err());
        assert!(matches!(measure_coherence(&prep, 3, 1.0, &SweepSpec::exact(0.0, vec![0.1])), Err(Error::LayoutMismatch(_))));
    }

    #[test]
    fn scan_matches_exact_grid() {
        let spec = SpinChainSpec::xxz(2, 1.2, -1.0);
        let beta = 10.0;
        let hrs = crate::io::linspace(-0.3, 0.3, 5);
        let thetas = default_thetas(7);
        let grid = scan_plane(&spec, beta, &hrs, &thetas, Mode::ExactExpectation, |s| Prep::exact(s, beta)).unwrap();
        let h = build_xxz(&spec).unwrap();
        let m = build_magnetization(2);
        let hi: Vec<f64> = thetas.iter().map(|t| t / beta).collect();
        let oracle = crate::exact::coherence_map_field(&h, &m, beta, &hrs, &hi).unwrap();
        for (a, b) in grid.values.iter().zip(&oracle.values) {
            assert!((a - b).norm() < 1e-8);
        }
        for ix in 0..hrs.len() {
            assert!((grid.at(ix, 0) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn trace_csv_layout() {
        let prep = Prep::exact(&two_site(0.9, 0.0), 1.0).unwrap();
        let csv = measure_coherence(&prep, 2, 1.0, &SweepSpec::exact(0.0, vec![0.0, 0.5])).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("theta,hr,re_L,im_L,stderr_re,stderr_im,retained_shots"));
        assert!(lines.next().unwrap().ends_with(",,,"));
        let sweep = SweepSpec { mode: Mode::Shots { n_shots: 50, seed: 1 }, ..SweepSpec::exact(0.0, vec![0.0, 0.5, 1.0]) };
        let trace = measure_coherence(&prep, 2, 1.0, &sweep).unwrap();
        let back = CoherenceTrace::from_csv(&trace.to_csv(), 1.0).unwrap();
        assert_eq!(back.points.len(), 3);
        for (a, b) in trace.points.iter().zip(&back.points) {
            assert!((a.l - b.l).norm() < 1e-11 && a.retained_shots == b.retained_shots);
            assert!((a.stderr_re.unwrap() - b.stderr_re.unwrap()).abs() < 1e-9);
        }
        assert!(CoherenceTrace::from_csv("x,y\n1,2\n", 1.0).is_err());
    }
}
