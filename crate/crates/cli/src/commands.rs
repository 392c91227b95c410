//! One function per subcommand. Each resolves its settings, runs the
//! library pipeline and writes its data files.

use std::f64::consts::PI;

use pfzeros::circuit::Circuit;
use pfzeros::exact::{
    fisher_zeros_ising_analytic, fisher_zeros_xy_analytic, free_energy, ising_zeros_analytic, leeyang_zeros_polynomial, xxz2_zeros_analytic,
    xy_zeros_analytic, Provenance, ZeroPlane, ZeroSet,
};
use pfzeros::fisher::{fisher_scan, TrotterConfig, TrotterOrder};
use pfzeros::hamiltonian::{build_hamiltonian, ising_ring, Boundary, SpinChainSpec};
use pfzeros::io::{linspace, Metadata};
use pfzeros::leeyang::{default_thetas, find_zeros, find_zeros_with, measure_coherence, scan_plane, CoherenceTrace, Mode, Prep, SweepSpec, ZERO_THRESHOLD};
use pfzeros::noise::{fit_noise_params, LinearShiftParams};
use pfzeros::optim::{Method, OptimizerConfig};
use pfzeros::postselect::PostSelect;
use pfzeros::reconstruct::{free_energy_curve_csv, reconstruct, to_field_plane, FreeEnergyPoint, ReconstructOptions};
use pfzeros::tfd::{angles_from_csv, angles_to_csv, build_tfd_circuit, optimize_tfd, reference_ansatz, TfdAnsatz, ANGLES_PER_LAYER};
use pfzeros::C64;

use crate::args::{parse_choice, parse_list, Command, Config, FisherArgs, ModelArgs, NoiseFitArgs, PrepArgs, ReconstructArgs, ScanArgs, SweepArgs, TfdArgs, ZerosArgs};
use crate::output::Output;
use crate::CliError;

type CliResult<T> = Result<T, CliError>;

pub fn dispatch(command: &Command, cfg: &Config, out: &Output) -> CliResult<()> {
    match command {
        Command::Zeros(a) => cmd_zeros(a, cfg, out),
        Command::Sweep(a) => cmd_sweep(a, cfg, out),
        Command::Scan(a) => cmd_scan(a, cfg, out),
        Command::Fisher(a) => cmd_fisher(a, cfg, out),
        Command::Reconstruct(a) => cmd_reconstruct(a, cfg, out),
        Command::TfdOptimize(a) => cmd_tfd_optimize(a, cfg, out),
        Command::NoiseFit(a) => cmd_noise_fit(a, cfg, out),
    }
}

fn warn(msg: impl std::fmt::Display) {
    eprintln!("pfzeros: warning: {msg}");
}

struct ModelDefaults {
    kind: &'static str,
    n: usize,
    j: f64,
    beta: f64,
}

const LEE_YANG: ModelDefaults = ModelDefaults { kind: "xxz", n: 2, j: 0.9, beta: 10.0 };

struct Model {
    kind: String,
    /// Coupling as given; the Ising ring stores it as `jz`.
    j: f64,
    spec: SpinChainSpec,
    beta: f64,
}

impl Model {
    fn resolve(m: &ModelArgs, cfg: &Config, d: &ModelDefaults) -> CliResult<Self> {
        let kind: String = cfg.pick(m.model.clone(), "model", d.kind.to_string())?;
        let n = cfg.pick(m.n, "n", d.n)?;
        let j = cfg.pick(m.j, "j", d.j)?;
        let hr = cfg.pick(m.hr, "hr", 0.0)?;
        let beta = cfg.pick(m.beta, "beta", d.beta)?;
        let default_boundary = if kind == "xy-jw" { "jw" } else { "periodic" };
        let boundary: Boundary = parse_choice(&cfg.pick(m.boundary.clone(), "boundary", default_boundary.to_string())?, "boundary")?;
        let jz = cfg.pick(m.jz, "jz", -1.0)?;
        let spec = chain(&kind, n, j, jz, boundary)?.with_field(hr);
        spec.validate()?;
        if !beta.is_finite() {
            return Err(CliError::Usage("beta must be finite".into()));
        }
        Ok(Self { kind, j, spec, beta })
    }

    /// Same model at coupling `j` and zero field.
    fn at_coupling(&self, j: f64) -> CliResult<SpinChainSpec> {
        chain(&self.kind, self.spec.n_sites, j, self.spec.coupling_z, self.spec.boundary)
    }

    fn n(&self) -> usize {
        self.spec.n_sites
    }

    fn hr(&self) -> f64 {
        self.spec.field_real
    }

    fn without_field(&self) -> SpinChainSpec {
        self.spec.clone().with_field(0.0)
    }

    fn metadata(&self, command: &str) -> Metadata {
        let mut meta = Metadata::new(command).with("model", &self.kind).with("n", self.spec.n_sites).with("j", self.j);
        if self.kind == "xxz" {
            meta.push("jz", self.spec.coupling_z);
        }
        meta.with("hr", self.spec.field_real)
            .with("beta", self.beta)
            .with("boundary", self.spec.boundary)
    }
}

fn chain(kind: &str, n: usize, j: f64, jz: f64, boundary: Boundary) -> CliResult<SpinChainSpec> {
    match kind {
        "xxz" => Ok(SpinChainSpec::xxz(n, j, jz).with_boundary(boundary)),
        "ising" => Ok(ising_ring(n, j).with_boundary(boundary)),
        "xy" | "xy-jw" => Ok(SpinChainSpec::xxz(n, j, 0.0).with_boundary(boundary)),
        other => Err(CliError::Usage(format!("unknown model `{other}` (xxz|ising|xy|xy-jw)"))),
    }
}

fn resolve_mode(mode: Option<String>, shots: Option<usize>, seed: u64, cfg: &Config, meta: &mut Metadata) -> CliResult<Mode> {
    let mode = cfg.pick(mode, "mode", "exact".to_string())?;
    meta.push("mode", &mode).push("seed", seed);
    match mode.as_str() {
        "exact" => Ok(Mode::ExactExpectation),
        "shots" => {
            let n_shots = cfg.pick(shots, "shots", pfzeros::leeyang::DEFAULT_SHOTS)?;
            if n_shots == 0 {
                return Err(CliError::Usage("--shots must be ≥ 1".into()));
            }
            meta.push("shots", n_shots);
            Ok(Mode::Shots { n_shots, seed })
        }
        other => Err(CliError::Usage(format!("unknown mode `{other}` (exact|shots)"))),
    }
}

fn thetas_for_resolution(step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(CliError::Usage(format!("resolution {step} must be in (0, 1]")));
    }
    Ok(default_thetas((PI / step).round() as usize + 1))
}

fn optimizer(restarts: usize, seed: u64) -> OptimizerConfig {
    OptimizerConfig { restarts, rng_seed: seed, ..OptimizerConfig::default() }
}

/// Thermal preparation for sweeps and fits.
fn resolve_prep(model: &Model, p: &PrepArgs, cfg: &Config, seed: u64, default: &str, meta: &mut Metadata) -> CliResult<Prep> {
    let kind = cfg.pick(p.prep.clone(), "prep", default.to_string())?;
    meta.push("prep", &kind);
    let circuit = |ansatz: &TfdAnsatz| -> CliResult<Prep> { Ok(Prep::Circuit(build_tfd_circuit(ansatz)?)) };
    match kind.as_str() {
        "exact" => Ok(Prep::exact(&model.spec, model.beta)?),
        "reference" => {
            let reference = reference_ansatz(model.j)?;
            if model.spec != reference.spec || (model.beta - 10.0).abs() > 1e-12 {
                return Err(CliError::Usage("reference angles exist only for the 2-site chain with jz = −1, hr = 0, beta = 10".into()));
            }
            circuit(&reference)
        }
        "optimize" => {
            let layers = cfg.pick(p.layers, "layers", 2usize)?;
            let restarts = cfg.pick(p.restarts, "restarts", 8usize)?;
            meta.push("layers", layers).push("restarts", restarts);
            let opt = optimize_tfd(&model.spec, model.beta, layers, &optimizer(restarts, seed))?;
            meta.push("tfd_fidelity", format!("{:.9}", opt.fidelity));
            if !opt.converged {
                warn(format!("TFD optimizer stopped before converging; continuing with fidelity {:.6}", opt.fidelity));
            }
            if opt.fidelity < 0.99 {
                warn(format!("TFD fidelity {:.6} is below 0.99", opt.fidelity));
            }
            circuit(&opt.ansatz)
        }
        "angles" => {
            let path = cfg.maybe(p.angles.clone(), "angles")?.ok_or_else(|| CliError::Usage("--prep angles needs --angles FILE".into()))?;
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let rows = angles_from_csv(&text)?;
            let j = model.j;
            let (_, angles) = match rows.as_slice() {
                [only] => only,
                _ => rows.iter().find(|(rj, _)| (rj - j).abs() < 1e-9).ok_or_else(|| CliError::Usage(format!("no angle row for J = {j} in {}", path.display())))?,
            };
            meta.push("angles", path.display());
            circuit(&TfdAnsatz::new(model.spec.clone(), angles.len() / ANGLES_PER_LAYER, angles.clone())?)
        }
        other => Err(CliError::Usage(format!("unknown prep `{other}` (exact|reference|optimize|angles)"))),
    }
}

fn cmd_zeros(a: &ZerosArgs, cfg: &Config, out: &Output) -> CliResult<()> {
    let model = Model::resolve(&a.model, cfg, &LEE_YANG)?;
    let method = cfg.pick(a.method.clone(), "method", "polynomial".to_string())?;
    let plane = cfg.pick(a.plane.clone(), "plane", "native".to_string())?;
    let mut meta = model.metadata("zeros").with("method", &method).with("plane", &plane);
    let (n, j, beta) = (model.n(), model.j, model.beta);
    let zeros = match method.as_str() {
        "analytic" => match model.kind.as_str() {
            "ising" => ising_zeros_analytic(n, j, beta),
            "xy-jw" => xy_zeros_analytic(n, j, beta, 0..=0),
            "xxz" if n == 2 && model.spec.bonds().len() == 1 => xxz2_zeros_analytic(j, model.spec.coupling_z, beta).0,
            _ => return Err(CliError::Usage("closed forms exist for --model ising, xy-jw, and 2-site xxz".into())),
        },
        "polynomial" => leeyang_zeros_polynomial(&build_hamiltonian(&model.without_field())?, beta, n)?,
        "circuit" => {
            let resolution = cfg.pick(a.resolution, "resolution", 0.01)?;
            meta.push("resolution", resolution);
            let prep = Prep::exact(&model.spec, beta)?;
            let trace = measure_coherence(&prep, n, beta, &SweepSpec::exact(model.hr(), thetas_for_resolution(resolution)?))?;
            find_zeros(&trace)
        }
        other => return Err(CliError::Usage(format!("unknown method `{other}` (analytic|polynomial|circuit)"))),
    };
    let zeros = match (plane.as_str(), zeros.plane) {
        ("native", _) | ("field", ZeroPlane::FieldH) | ("fugacity", ZeroPlane::FugacityZ) => zeros,
        ("field", ZeroPlane::FugacityZ) => zeros.fugacity_to_field(beta)?,
        ("fugacity", ZeroPlane::FieldH) => zeros.field_to_fugacity(beta)?,
        (other, _) => return Err(CliError::Usage(format!("unknown plane `{other}` (native|field|fugacity)"))),
    };
    meta.push("count", zeros.len());
    out.csv("zeros.csv", &meta, &zeros.to_csv())?;
    out.sidecar("zeros.json", &meta, &zeros)?;
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, cfg: &Config, out: &Output) -> CliResult<()> {
    let model = Model::resolve(&a.model, cfg, &LEE_YANG)?;
    let seed = cfg.pick(a.seed, "seed", 0u64)?;
    let mut meta = model.metadata("sweep");
    let noise = cfg.maybe(a.noise.clone(), "noise")?.map(|s| parse_choice::<LinearShiftParams>(&s, "noise")).transpose()?;
    let prep_default = if noise.is_some() { "optimize" } else { "exact" };
    let prep = resolve_prep(&model, &a.prep, cfg, seed, prep_default, &mut meta)?;
    let mode = resolve_mode(a.mode.clone(), a.shots, seed, cfg, &mut meta)?;
    let postselect: PostSelect = parse_choice(&cfg.pick(a.postselect.clone(), "postselect", "none".to_string())?, "postselect")?;
    if postselect != PostSelect::None && mode == Mode::ExactExpectation {
        warn("post-selection only acts on shots; ignored in exact mode");
    }
    let points = cfg.pick(a.points, "points", pfzeros::leeyang::DEFAULT_POINTS)?;
    if points < 2 {
        return Err(CliError::Usage("--points must be ≥ 2".into()));
    }
    if let Some(p) = noise {
        meta.push("noise", format!("{},{}", p.a, p.b));
    }
    meta.push("postselect", format!("{postselect:?}").to_lowercase()).push("points", points);
    let sweep = SweepSpec { mode, noise, postselect, ..SweepSpec::exact(model.hr(), default_thetas(points)) };
    let trace = measure_coherence(&prep, model.n(), model.beta, &sweep)?;
    let zeros = find_zeros_with(&trace, ZERO_THRESHOLD);
    out.csv("sweep_trace.csv", &meta, &trace.to_csv())?;
    out.csv("sweep_zeros.csv", &meta.clone().with("count", zeros.len()), &zeros.to_csv())?;
    out.sidecar("sweep_trace.json", &meta, &trace)?;
    Ok(())
}

fn minima_set(grid: &pfzeros::exact::CoherenceGrid) -> ZeroSet {
    ZeroSet::new(grid.minima_points(), grid.plane, Provenance::CircuitSweep)
}

fn cmd_scan(a: &ScanArgs, cfg: &Config, out: &Output) -> CliResult<()> {
    let model = Model::resolve(&a.model, cfg, &ModelDefaults { n: 8, ..LEE_YANG })?;
    let seed = cfg.pick(a.seed, "seed", 0u64)?;
    let mut meta = model.metadata("scan");
    let mode = resolve_mode(a.mode.clone(), a.shots, seed, cfg, &mut meta)?;
    let (lo, hi, nh) = (cfg.pick(a.hr_min, "hr_min", -0.5)?, cfg.pick(a.hr_max, "hr_max", 0.5)?, cfg.pick(a.hr_points, "hr_points", 41usize)?);
    let points = cfg.pick(a.points, "points", 41usize)?;
    if nh == 0 || points < 2 {
        return Err(CliError::Usage("scan needs --hr-points ≥ 1 and --points ≥ 2".into()));
    }
    meta.push("hr_min", lo).push("hr_max", hi).push("hr_points", nh).push("points", points);
    let beta = model.beta;
    let base = model.without_field();
    let grid = scan_plane(&base, beta, &linspace(lo, hi, nh), &default_thetas(points), mode, |s| Prep::exact(s, beta))?;
    out.csv("scan_grid.csv", &meta, &grid.to_csv())?;
    let minima = minima_set(&grid);
    out.csv("scan_minima.csv", &meta.clone().with("count", minima.len()), &minima.to_csv())?;
    Ok(())
}

fn cmd_fisher(a: &FisherArgs, cfg: &Config, out: &Output) -> CliResult<()> {
    let model = Model::resolve(&a.model, cfg, &ModelDefaults { kind: "ising", n: 4, j: 1.0, beta: 0.0 })?;
    let seed = cfg.pick(a.seed, "seed", 0u64)?;
    let mut meta = model.metadata("fisher");
    let mode = resolve_mode(a.mode.clone(), a.shots, seed, cfg, &mut meta)?;
    let xs = linspace(cfg.pick(a.br_min, "br_min", -1.0)?, cfg.pick(a.br_max, "br_max", 1.0)?, cfg.pick(a.br_points, "br_points", 41usize)?);
    let ys = linspace(cfg.pick(a.bi_min, "bi_min", 0.0)?, cfg.pick(a.bi_max, "bi_max", 3.0)?, cfg.pick(a.bi_points, "bi_points", 61usize)?);
    if xs.is_empty() || ys.len() < 2 {
        return Err(CliError::Usage("fisher needs --br-points ≥ 1 and --bi-points ≥ 2".into()));
    }
    let trotter = match cfg.maybe(a.trotter_steps, "trotter_steps")? {
        Some(steps) => {
            let order: TrotterOrder = parse_choice(&cfg.pick(a.trotter_order.clone(), "trotter_order", "1".to_string())?, "trotter-order")?;
            meta.push("trotter_steps", steps).push("trotter_order", format!("{order:?}"));
            Some(TrotterConfig::new(steps, order)?)
        }
        None => None,
    };
    meta.push("br_range", format!("{}..{}x{}", xs[0], xs[xs.len() - 1], xs.len()));
    meta.push("bi_range", format!("{}..{}x{}", ys[0], ys[ys.len() - 1], ys.len()));
    let grid = fisher_scan(&model.spec, &xs, &ys, mode, trotter)?;
    out.csv("fisher_grid.csv", &meta, &grid.to_csv())?;
    let minima = minima_set(&grid);
    out.csv("fisher_minima.csv", &meta.clone().with("count", minima.len()), &minima.to_csv())?;
    let (n, j) = (model.n(), model.j);
    let m_max = (ys[ys.len() - 1].abs() * 4.0 * j.abs() / PI).ceil() as i64 + 1;
    let analytic = match model.kind.as_str() {
        "ising" if model.hr() == 0.0 => Some(fisher_zeros_ising_analytic(n, j, 0..=n as i64 - 1, 0..=m_max)?),
        "xy-jw" if model.hr() == 0.0 => {
            let mut zeros = Vec::new();
            for k in 0..n as i64 {
                match fisher_zeros_xy_analytic(n, j, k..=k, -m_max..=m_max) {
                    Ok(z) => zeros.extend(z.zeros),
                    Err(pfzeros::Error::SingularMode { .. }) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            Some(ZeroSet::new(zeros, ZeroPlane::InverseTemperature, Provenance::Analytic))
        }
        _ => None,
    };
    if let Some(z) = analytic {
        out.csv("fisher_analytic.csv", &meta.clone().with("count", z.len()), &z.to_csv())?;
    }
    Ok(())
}

/// Field-plane zeros of `H_s` at `beta` from the chosen source.
fn zeros_from_source(source: &str, spec: &SpinChainSpec, beta: f64, resolution: f64) -> CliResult<ZeroSet> {
    let n = spec.n_sites;
    let hs = build_hamiltonian(spec)?;
    match source {
        "analytic" if n == 2 && spec.bonds().len() == 1 => Ok(xxz2_zeros_analytic(spec.coupling_xy, spec.coupling_z, beta).0),
        "analytic" => Err(CliError::Usage("analytic zeros for reconstruction need the 2-site xxz chain".into())),
        "polynomial" => Ok(leeyang_zeros_polynomial(&hs, beta, n)?.fugacity_to_field(beta)?),
        "sweep" => {
            // one sweep per distinct h_r carrying a zero, as set by the preparation
            let oracle = leeyang_zeros_polynomial(&hs, beta, n)?.fugacity_to_field(beta)?;
            let mut hrs: Vec<f64> = oracle.zeros.iter().map(|z| z.re).filter(|hr| *hr >= -1e-9).collect();
            hrs.sort_by(f64::total_cmp);
            hrs.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            let mut found: Vec<C64> = Vec::new();
            for hr in hrs {
                let s = spec.clone().with_field(hr);
                let trace = measure_coherence(&Prep::exact(&s, beta)?, n, beta, &SweepSpec::exact(hr, thetas_for_resolution(resolution)?))?;
                found.extend(find_zeros(&trace).zeros);
            }
            Ok(ZeroSet::new(found, ZeroPlane::FieldH, Provenance::CircuitSweep))
        }
        other => Err(CliError::Usage(format!("unknown source `{other}` (analytic|polynomial|sweep)"))),
    }
}

fn cmd_reconstruct(a: &ReconstructArgs, cfg: &Config, out: &Output) -> CliResult<()> {
    let model = Model::resolve(&a.model, cfg, &LEE_YANG)?;
    let source = cfg.pick(a.source.clone(), "source", "analytic".to_string())?;
    let resolution = cfg.pick(a.resolution, "resolution", 0.01)?;
    let options = ReconstructOptions { complete_symmetry: !cfg.flag(a.no_symmetry, "no_symmetry")?, ..ReconstructOptions::default() };
    let beta = model.beta;
    let mut meta = model.metadata("reconstruct").with("source", &source).with("resolution", resolution).with("symmetry", options.complete_symmetry);
    let mut rows = Vec::new();
    if let Some(path) = cfg.maybe(a.zeros.clone(), "zeros")? {
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let zeros = to_field_plane(&ZeroSet::from_csv(&text)?, beta)?;
        let spec = model.without_field();
        let hs = build_hamiltonian(&spec)?;
        let r = reconstruct(&zeros, &hs, beta, spec.n_sites, &options)?;
        meta.push("zeros", path.display());
        rows.push(FreeEnergyPoint { j: model.j, exact: free_energy(&hs, beta), reconstructed: Some(r.free_energy) });
    } else {
        let j_values = parse_list(&cfg.pick(a.j_values.clone(), "j_values", "0.9,0.96,1.03,1.06,1.15,1.2".to_string())?, "j-values")?;
        meta.push("j_values", j_values.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(";"));
        for j in j_values {
            let spec = model.at_coupling(j)?;
            let hs = build_hamiltonian(&spec)?;
            let exact = free_energy(&hs, beta);
            let reconstructed = match zeros_from_source(&source, &spec, beta, resolution).and_then(|z| Ok(reconstruct(&z, &hs, beta, spec.n_sites, &options)?)) {
                Ok(r) => Some(r.free_energy),
                Err(CliError::Runtime(e)) => {
                    warn(format!("J = {j}: {e}"));
                    None
                }
                Err(e) => return Err(e),
            };
            rows.push(FreeEnergyPoint { j, exact, reconstructed });
        }
    }
    out.csv("reconstruct_free_energy.csv", &meta, &free_energy_curve_csv(&rows))?;
    out.sidecar("reconstruct_free_energy.json", &meta, &rows)?;
    Ok(())
}

fn cmd_tfd_optimize(a: &TfdArgs, cfg: &Config, out: &Output) -> CliResult<()> {
    let model = Model::resolve(&a.model, cfg, &LEE_YANG)?;
    let seed = cfg.pick(a.seed, "seed", 0u64)?;
    let layers = cfg.pick(a.layers, "layers", 2usize)?;
    let method: Method = parse_choice(&cfg.pick(a.method.clone(), "method", "nm".to_string())?, "method")?;
    let config = OptimizerConfig {
        method,
        restarts: cfg.pick(a.restarts, "restarts", 8usize)?,
        max_iters: cfg.pick(a.max_iters, "max_iters", OptimizerConfig::default().max_iters)?,
        rng_seed: seed,
        ..OptimizerConfig::default()
    };
    let opt = optimize_tfd(&model.spec, model.beta, layers, &config)?;
    if !opt.converged {
        warn("optimizer stopped before converging; writing the best angles found");
    }
    let meta = model
        .metadata("tfd-optimize")
        .with("layers", layers)
        .with("restarts", config.restarts)
        .with("method", format!("{method:?}"))
        .with("seed", seed)
        .with("fidelity", format!("{:.12}", opt.fidelity));
    eprintln!("fidelity {:.9}", opt.fidelity);
    out.csv("tfd_angles.csv", &meta, &angles_to_csv(&[(model.j, opt.ansatz.angles.clone())]))?;
    out.always_json("tfd_optimization.json", &meta, &opt)?;
    Ok(())
}

fn cmd_noise_fit(a: &NoiseFitArgs, cfg: &Config, out: &Output) -> CliResult<()> {
    let model = Model::resolve(&a.model, cfg, &LEE_YANG)?;
    let seed = cfg.pick(a.seed, "seed", 0u64)?;
    let mut meta = model.metadata("noise-fit").with("seed", seed);
    let prep = resolve_prep(&model, &a.prep, cfg, seed, "reference", &mut meta)?;
    let circuit: Circuit = match &prep {
        Prep::Circuit(c) => c.clone(),
        Prep::Exact(_) => return Err(CliError::Usage("noise fitting needs a circuit prep (reference|optimize|angles)".into())),
    };
    let prep = Prep::Circuit(circuit);
    let (n, beta) = (model.n(), model.beta);
    let observed = match (cfg.maybe(a.observed.clone(), "observed")?, cfg.maybe(a.planted.clone(), "planted")?) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let file_beta = Metadata::parse(&text).get("beta").and_then(|b| b.parse().ok()).unwrap_or(beta);
            meta.push("observed", path.display());
            CoherenceTrace::from_csv(&text, file_beta)?
        }
        (None, Some(planted)) => {
            let p: LinearShiftParams = parse_choice(&planted, "planted")?;
            let points = cfg.pick(a.points, "points", pfzeros::leeyang::DEFAULT_POINTS)?;
            meta.push("planted", format!("{},{}", p.a, p.b)).push("points", points);
            measure_coherence(&prep, n, beta, &SweepSpec { noise: Some(p), ..SweepSpec::exact(model.hr(), default_thetas(points)) })?
        }
        _ => return Err(CliError::Usage("noise-fit needs exactly one of --observed FILE or --planted a,b".into())),
    };
    let hr = observed.points.first().map_or(0.0, |p| p.h.h_r);
    let thetas = observed.thetas();
    let model_fn = |p: LinearShiftParams| measure_coherence(&prep, n, beta, &SweepSpec { noise: Some(p), ..SweepSpec::exact(hr, thetas.clone()) });
    let restarts = cfg.pick(a.fit_restarts, "fit_restarts", 8usize)?;
    let fit = fit_noise_params(&observed, model_fn, &optimizer(restarts, seed))?;
    meta.push("a", fit.params.a).push("b", fit.params.b).push("residual", format!("{:.6e}", fit.residual));
    eprintln!("fitted a = {:.6}, b = {:.6}, residual {:.3e}", fit.params.a, fit.params.b, fit.residual);
    let fitted = model_fn(fit.params)?;
    out.csv("noise_fit_trace.csv", &meta, &fitted.to_csv())?;
    out.always_json("noise_fit.json", &meta, &fit)?;
    Ok(())
}
