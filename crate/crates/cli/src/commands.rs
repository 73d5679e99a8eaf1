//! Subcommand implementations. Each returns the process exit code.

use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use mprep::bases::{clock_basis, from_projective_rep, pauli_basis, quaternion_transversal, UnitaryErrorBasis};
use mprep::diagnostics::{certify_preparable, CertifyOptions, PreparabilityCertificate, SearchOptions, Verdict};
use mprep::incomplete::{incomplete_protocol, ising_bond, IncompleteReport};
use mprep::io::{csv_row, read_tensor_file, to_json, write_atomic};
use mprep::mpo::{mpo_apply, MpoReport};
use mprep::mps::{
    aklt_deformed_tensor, clock_tensor, correlation_lengths, default_basis, entanglement_data, grid_to_pauli,
    nice_basis_tensor, pauli_to_grid, spectrum_to_weights, tetrahedron_tensor, transfer_matrix, weights_to_spectrum,
    Boundary, Cut, MPSTensor, NamedPoint, SimplexWeights, Trajectory, UniformMPS,
};
use mprep::peps::{parity_statistics, simulate_peps_protocol, Example, Lattice, ParityReport, PepsNetwork, PepsReport, Topology};
use mprep::protocol::{run_protocol, ProtocolReport};
use mprep::selftest::{run_all, run_criterion, SelftestReport};
use mprep::{CTensor, Error, Result, C64};

use crate::{Cli, Command, Descriptor, DiagnoseArgs, FamilyArgs, Format, PepsArgs, PrepareArgs, SelftestArgs};

pub const PREPARE_THRESHOLD: f64 = 1e-8;
pub const PEPS_THRESHOLD: f64 = 1e-7;

/// Fully resolved inputs, echoed into every output.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub descriptor: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<usize>,
    pub incomplete: bool,
    pub mpo: bool,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub format: String,
    pub version: String,
}

impl RunConfig {
    fn new(command: &str, seed: u64, output: &Option<String>) -> Self {
        Self {
            command: command.into(),
            seed,
            output: output.clone(),
            format: "json".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            ..Default::default()
        }
    }
}

pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Family(a) => cmd_family(a),
        Command::Prepare(a) => cmd_prepare(a),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Peps(a) => cmd_peps(a),
        Command::Selftest(a) => cmd_selftest(a),
    }
}

fn emit(output: &Option<String>, text: &str) -> Result<()> {
    match output {
        Some(p) => write_atomic(Path::new(p), text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn input(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn parse_complex(s: &str) -> Result<C64> {
    let t = s.trim().replace(' ', "");
    C64::from_str(&t).map_err(|_| input(format!("'{s}' is not a complex number")))
}

fn require_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(input(format!("--{name} must be finite, got {v}")))
    }
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || input(format!("--beta-grid expects start:stop:step, got '{s}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let (start, stop, step) = (v[0], v[1], v[2]);
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || stop < start {
        return Err(input(format!("--beta-grid needs finite start <= stop and step > 0, got '{s}'")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    if count > 1_000_000 {
        return Err(input("--beta-grid has more than 10^6 points"));
    }
    Ok((0..=count).map(|k| start + step * k as f64).collect())
}

/// `4x4-torus`, `3x3-open`.
pub fn parse_lattice(s: &str) -> Result<Lattice> {
    let bad = || input(format!("--lattice expects LXxLY-torus or LXxLY-open, got '{s}'"));
    let (dims, topo) = s.split_once('-').ok_or_else(bad)?;
    let (x, y) = dims.split_once(['x', 'X']).ok_or_else(bad)?;
    let lx = x.parse::<usize>().map_err(|_| bad())?;
    let ly = y.parse::<usize>().map_err(|_| bad())?;
    Lattice::new(lx, ly, Topology::parse(topo)?)
}

pub fn parse_nice_basis(name: &str) -> Result<UnitaryErrorBasis> {
    let lower = name.to_ascii_lowercase();
    match lower.as_str() {
        "pauli" => Ok(pauli_basis()),
        "quaternion" => {
            let (table, rep) = quaternion_transversal();
            from_projective_rep(&table, &rep)
        }
        _ => match lower.strip_prefix("clock").map(str::parse::<usize>) {
            Some(Ok(chi)) => clock_basis(chi),
            _ => Err(input(format!("unknown basis '{name}' (pauli, quaternion, clockN)"))),
        },
    }
}

fn chi_from_len(len: usize, what: &str) -> Result<usize> {
    let chi = (len as f64).sqrt().round() as usize;
    if chi < 2 || chi * chi != len {
        return Err(input(format!("--{what} needs χ² ≥ 4 entries, got {len}")));
    }
    Ok(chi)
}

/// Weights from user order: Pauli order for χ=2, row-major grid otherwise.
fn weights_from_user(chi: usize, v: &[f64]) -> Result<SimplexWeights> {
    if chi == 2 {
        SimplexWeights::from_pauli([v[0], v[1], v[2], v[3]])
    } else {
        SimplexWeights::from_flat(chi, v)
    }
}

fn spectrum_from_user(chi: usize, mu: Vec<C64>) -> Vec<C64> {
    if chi == 2 {
        pauli_to_grid([mu[0], mu[1], mu[2], mu[3]])
    } else {
        mu
    }
}

fn spectrum_to_user(chi: usize, mu: &[C64]) -> Vec<C64> {
    if chi == 2 {
        grid_to_pauli(mu).to_vec()
    } else {
        mu.to_vec()
    }
}

fn tensor_for_weights(w: &SimplexWeights) -> Result<MPSTensor> {
    if w.chi == 2 {
        tetrahedron_tensor(w)
    } else {
        clock_tensor(w)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyData {
    pub chi: usize,
    /// Weights in user order: (𝟙, X, Y, Z) for χ=2, row-major grid otherwise.
    pub lambda: Vec<f64>,
    /// Spectrum in the same order, μ₀ = 1.
    pub mu: Vec<C64>,
}

/// A resolved descriptor.
pub struct Resolved {
    pub label: String,
    pub tensor: MPSTensor,
    pub basis: Option<UnitaryErrorBasis>,
    pub family: Option<FamilyData>,
    pub frame_imaginary_residual: Option<f64>,
}

fn simplex(label: String, w: SimplexWeights) -> Result<Resolved> {
    let chi = w.chi;
    let mu = weights_to_spectrum(&w);
    let lambda = if chi == 2 { w.pauli()?.to_vec() } else { w.flat() };
    Ok(Resolved {
        label,
        tensor: tensor_for_weights(&w)?,
        basis: Some(default_basis(chi)?),
        family: Some(FamilyData {
            chi,
            lambda,
            mu: spectrum_to_user(chi, &mu),
        }),
        frame_imaginary_residual: None,
    })
}

fn fmt_list<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn resolve(d: &Descriptor, seed: u64) -> Result<Resolved> {
    let sources = [
        d.point.is_some(),
        d.trajectory.is_some(),
        d.lambda.is_some(),
        d.spectrum.is_some(),
        d.nice_basis.is_some(),
        d.aklt_deformed,
        d.tensor.is_some(),
    ];
    match sources.iter().filter(|&&s| s).count() {
        1 => {}
        0 => return Err(input("no tensor given: use one of --point, --trajectory, --lambda, --spectrum, --nice-basis, --aklt-deformed, --tensor")),
        _ => return Err(input("give exactly one of --point, --trajectory, --lambda, --spectrum, --nice-basis, --aklt-deformed, --tensor")),
    }
    if let Some(p) = &d.point {
        return simplex(format!("point={p}"), NamedPoint::parse(p)?.weights());
    }
    if let Some(t) = &d.trajectory {
        let beta = d.beta.ok_or_else(|| input("--trajectory needs --beta (or --beta-grid for family sweeps)"))?;
        require_finite("beta", beta)?;
        return simplex(format!("trajectory={t} beta={beta}"), Trajectory::parse(t)?.weights(beta)?);
    }
    if let Some(l) = &d.lambda {
        let chi = chi_from_len(l.len(), "lambda")?;
        return simplex(format!("lambda={}", fmt_list(l)), weights_from_user(chi, l)?);
    }
    if let Some(s) = &d.spectrum {
        let chi = chi_from_len(s.len(), "spectrum")?;
        let mu: Vec<C64> = s.iter().map(|x| parse_complex(x)).collect::<Result<_>>()?;
        let w = spectrum_to_weights(&spectrum_from_user(chi, mu), chi)?;
        return simplex(format!("spectrum={}", fmt_list(s)), w);
    }
    if let Some(name) = &d.nice_basis {
        let basis = parse_nice_basis(name)?;
        let weights = d.class_weights.as_ref().ok_or_else(|| input("--nice-basis needs --class-weights"))?;
        return Ok(Resolved {
            label: format!("nice-basis={name} class-weights={}", fmt_list(weights)),
            tensor: nice_basis_tensor(&basis, weights)?,
            basis: Some(basis),
            family: None,
            frame_imaginary_residual: None,
        });
    }
    if d.aklt_deformed {
        let (m, label) = match &d.m {
            Some(entries) => {
                if entries.len() != 9 {
                    return Err(input(format!("--m needs 9 entries, got {}", entries.len())));
                }
                let data: Vec<C64> = entries.iter().map(|x| parse_complex(x)).collect::<Result<_>>()?;
                (CTensor::matrix(3, 3, data)?, format!("aklt-deformed m={}", fmt_list(entries)))
            }
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = CTensor::from_fn(&[3, 3], |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                (m, format!("aklt-deformed random-m seed={seed}"))
            }
        };
        let a = aklt_deformed_tensor(&m)?;
        return Ok(Resolved {
            label,
            tensor: a.tensor,
            basis: Some(a.basis),
            family: None,
            frame_imaginary_residual: Some(a.frame_imaginary_residual),
        });
    }
    let path = d.tensor.as_ref().expect("one source present");
    let file = read_tensor_file(Path::new(path))?;
    Ok(Resolved {
        label: format!("tensor={path}"),
        tensor: file.tensor,
        basis: file.basis,
        family: None,
        frame_imaginary_residual: None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Entanglement {
    pub sites: usize,
    pub boundary: Boundary,
    pub bond_cut: usize,
    pub schmidt_spectrum: Vec<f64>,
    pub site_spectrum: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    /// Eigenvalues of the transfer matrix, by decreasing modulus.
    pub transfer_spectrum: Vec<C64>,
    /// ξ = 1/|ln|μ_k/μ_0|| for each subleading eigenvalue; null when the ratio has modulus 1.
    pub correlation_lengths: Vec<f64>,
    pub xi_max: f64,
    pub entanglement: Option<Entanglement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entanglement_skipped: Option<String>,
}

fn entanglement(a: &MPSTensor, n: usize) -> Result<Entanglement> {
    let s = UniformMPS::new(a.clone(), n, Boundary::Dangling)?;
    let cut = n / 2;
    Ok(Entanglement {
        sites: n,
        boundary: Boundary::Dangling,
        bond_cut: cut,
        schmidt_spectrum: entanglement_data(&s, Cut::Bond(cut))?,
        site_spectrum: entanglement_data(&s, Cut::Site(cut))?,
    })
}

pub fn analyse(a: &MPSTensor, n: usize) -> Result<Analysis> {
    let ev = transfer_matrix(a)?.eigenvalues()?;
    if ev[0].norm() < 1e-300 {
        return Err(Error::Domain("transfer matrix is nilpotent".into()));
    }
    let ratios: Vec<C64> = ev[1..].iter().map(|e| e / ev[0].norm()).collect();
    let xi = correlation_lengths(&ratios)?;
    let xi_max = xi.iter().copied().fold(0.0, f64::max);
    let (ent, skipped) = match entanglement(a, n) {
        Ok(e) => (Some(e), None),
        Err(e @ Error::Resource { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(Analysis {
        transfer_spectrum: ev,
        correlation_lengths: xi,
        xi_max,
        entanglement: ent,
        entanglement_skipped: skipped,
    })
}

#[derive(Serialize)]
struct FamilyOutput<'a> {
    config: &'a RunConfig,
    tensor: &'a MPSTensor,
    #[serde(skip_serializing_if = "Option::is_none")]
    basis: &'a Option<UnitaryErrorBasis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: &'a Option<FamilyData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frame_imaginary_residual: Option<f64>,
    analysis: Analysis,
}

#[derive(Serialize)]
struct SweepRow {
    beta: f64,
    lambda: [f64; 4],
    mu: [f64; 3],
    xi_max: f64,
    schmidt: [f64; 2],
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    config: &'a RunConfig,
    columns: Vec<&'static str>,
    rows: Vec<SweepRow>,
}

pub const SWEEP_COLUMNS: [&str; 11] = [
    "beta", "lambda_1", "lambda_2", "lambda_3", "lambda_4", "mu_2", "mu_3", "mu_4", "xi_max", "schmidt_1", "schmidt_2",
];

fn sweep_row(t: Trajectory, beta: f64, n: usize) -> Result<SweepRow> {
    let w = t.weights(beta)?;
    let a = tetrahedron_tensor(&w)?;
    let mu = grid_to_pauli(&weights_to_spectrum(&w));
    let xi_max = correlation_lengths(&mu[1..])?.into_iter().fold(0.0, f64::max);
    let s = UniformMPS::new(a, n, Boundary::Dangling)?;
    let sch = entanglement_data(&s, Cut::Bond(n / 2))?;
    Ok(SweepRow {
        beta,
        lambda: w.pauli()?,
        mu: [mu[1].re, mu[2].re, mu[3].re],
        xi_max,
        schmidt: [sch.first().copied().unwrap_or(0.0), sch.get(1).copied().unwrap_or(0.0)],
    })
}

fn cmd_family(a: FamilyArgs) -> Result<u8> {
    if a.n < 2 {
        return Err(input(format!("--n must be at least 2, got {}", a.n)));
    }
    let mut cfg = RunConfig::new("family", a.seed, &a.output);
    cfg.n = Some(a.n);
    cfg.beta = a.descriptor.beta;
    if let Some(grid) = &a.beta_grid {
        let t = a
            .descriptor
            .trajectory
            .as_ref()
            .ok_or_else(|| input("--beta-grid needs --trajectory"))?;
        if a.descriptor.beta.is_some() {
            return Err(input("give --beta or --beta-grid, not both"));
        }
        let traj = Trajectory::parse(t)?;
        let betas = parse_grid(grid)?;
        let format = a.format.unwrap_or(Format::Csv);
        cfg.descriptor = Some(format!("trajectory={t}"));
        cfg.beta_grid = Some(grid.clone());
        cfg.format = format_name(format).into();
        let rows: Vec<SweepRow> = betas.iter().map(|&b| sweep_row(traj, b, a.n)).collect::<Result<_>>()?;
        let text = match format {
            Format::Csv => {
                let mut out = format!("# config: {}\n{}\n", serde_json::to_string(&cfg).map_err(|e| input(e.to_string()))?, SWEEP_COLUMNS.join(","));
                for r in &rows {
                    let mut v = vec![r.beta];
                    v.extend(r.lambda);
                    v.extend(r.mu);
                    v.push(r.xi_max);
                    v.extend(r.schmidt);
                    out.push_str(&csv_row(&v));
                    out.push('\n');
                }
                out
            }
            Format::Json => to_json(&SweepOutput {
                config: &cfg,
                columns: SWEEP_COLUMNS.to_vec(),
                rows,
            })?,
        };
        emit(&a.output, &text)?;
        return Ok(0);
    }
    if a.format == Some(Format::Csv) {
        return Err(input("csv output is for trajectory sweeps (--beta-grid)"));
    }
    let r = resolve(&a.descriptor, a.seed)?;
    cfg.descriptor = Some(r.label.clone());
    let analysis = analyse(&r.tensor, a.n)?;
    let text = to_json(&FamilyOutput {
        config: &cfg,
        tensor: &r.tensor,
        basis: &r.basis,
        family: &r.family,
        frame_imaginary_residual: r.frame_imaginary_residual,
        analysis,
    })?;
    emit(&a.output, &text)?;
    Ok(0)
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum PrepareReport {
    Protocol(ProtocolReport),
    Incomplete(IncompleteReport),
    Mpo(MpoReport),
}

#[derive(Serialize)]
struct PrepareOutput<'a> {
    config: &'a RunConfig,
    min_fidelity: f64,
    threshold: f64,
    pass: bool,
    report: PrepareReport,
}

fn cmd_prepare(a: PrepareArgs) -> Result<u8> {
    if a.n < 2 {
        return Err(input(format!("--n must be at least 2, got {}", a.n)));
    }
    if a.trials == 0 {
        return Err(input("--trials must be at least 1"));
    }
    let mut cfg = RunConfig::new("prepare", a.seed, &a.output);
    cfg.n = Some(a.n);
    cfg.trials = Some(a.trials);
    cfg.incomplete = a.incomplete || a.ising;
    cfg.mpo = a.mpo;
    cfg.beta = a.descriptor.beta;
    cfg.basis = a.basis.clone();
    if a.incomplete && !a.ising {
        return Err(input("--incomplete runs on the Ising family; add --ising --beta B"));
    }
    if a.ising && a.mpo {
        return Err(input("--ising and --mpo are exclusive"));
    }
    let report = if a.ising {
        let beta = a.descriptor.beta.ok_or_else(|| input("--ising needs --beta"))?;
        require_finite("beta", beta)?;
        cfg.descriptor = Some(format!("ising beta={beta}"));
        PrepareReport::Incomplete(incomplete_protocol(&ising_bond(beta)?, a.n, a.trials, a.seed)?)
    } else if a.mpo {
        let tensor = if a.descriptor.tensor.is_some() || a.descriptor.point.is_some() || a.descriptor.lambda.is_some() {
            let r = resolve(&a.descriptor, a.seed)?;
            cfg.descriptor = Some(format!("mpo input {}", r.label));
            r.tensor
        } else {
            cfg.descriptor = Some(format!("mpo input random d=2 chi=2 seed={}", a.seed));
            MPSTensor::random(2, 2, &mut ChaCha8Rng::seed_from_u64(a.seed))
        };
        if tensor.d != 2 {
            return Err(input(format!("--mpo needs a qubit input tensor (d = 2), got d = {}", tensor.d)));
        }
        PrepareReport::Mpo(mpo_apply(&UniformMPS::new(tensor, a.n, Boundary::Periodic)?, a.trials, a.seed)?)
    } else {
        let r = resolve(&a.descriptor, a.seed)?;
        cfg.descriptor = Some(r.label.clone());
        let basis = match a.basis.as_deref() {
            None | Some("default") => match r.basis {
                Some(b) => b,
                None => default_basis(r.tensor.chi())?,
            },
            Some(name) => parse_nice_basis(name)?,
        };
        cfg.basis.get_or_insert_with(|| "default".into());
        PrepareReport::Protocol(run_protocol(&r.tensor, a.n, &basis, a.trials, a.seed)?)
    };
    let min_fidelity = match &report {
        PrepareReport::Protocol(r) => r.min_fidelity,
        PrepareReport::Incomplete(r) => r.min_fidelity,
        PrepareReport::Mpo(r) => r.min_fidelity,
    };
    let pass = min_fidelity >= 1.0 - PREPARE_THRESHOLD;
    let text = to_json(&PrepareOutput {
        config: &cfg,
        min_fidelity,
        threshold: 1.0 - PREPARE_THRESHOLD,
        pass,
        report,
    })?;
    emit(&a.output, &text)?;
    if a.output.is_some() {
        println!("min fidelity {min_fidelity:.17e} ({})", if pass { "pass" } else { "below threshold" });
    }
    Ok(if pass { 0 } else { 3 })
}

#[derive(Serialize)]
struct DiagnoseOutput<'a> {
    config: &'a RunConfig,
    certificate: &'a PreparabilityCertificate,
}

fn cmd_diagnose(a: DiagnoseArgs) -> Result<u8> {
    let mut cfg = RunConfig::new("diagnose", a.seed, &a.output);
    cfg.restarts = Some(a.restarts);
    cfg.block = a.block;
    if a.block == Some(0) {
        return Err(input("--block must be at least 1"));
    }
    let r = resolve(&a.descriptor, a.seed)?;
    cfg.descriptor = Some(r.label.clone());
    let opts = CertifyOptions {
        search: SearchOptions {
            restarts: a.restarts,
            seed: a.seed,
            ..SearchOptions::default()
        },
        block: a.block,
    };
    let cert = certify_preparable(&r.tensor, &opts)?;
    emit(&a.output, &to_json(&DiagnoseOutput { config: &cfg, certificate: &cert })?)?;
    if a.output.is_some() {
        println!("{:?}", cert.verdict);
    }
    Ok(match cert.verdict {
        Verdict::Certified => 0,
        Verdict::Unknown => 4,
    })
}

#[derive(Serialize)]
struct PepsOutput<'a> {
    config: &'a RunConfig,
    min_fidelity: f64,
    threshold: f64,
    /// Whether the parity constraints are a law (GHZ plaquettes) rather than bookkeeping for the
    /// escape leg (toric total parity); only a law counts toward the exit status.
    parity_law: bool,
    parity_violations: usize,
    pass: bool,
    protocol: PepsReport,
    parity: ParityReport,
}

fn cmd_peps(a: PepsArgs) -> Result<u8> {
    require_finite("beta", a.beta)?;
    if a.trials == 0 || a.samples == 0 {
        return Err(input("--trials and --samples must be at least 1"));
    }
    let mut cfg = RunConfig::new("peps", a.seed, &a.output);
    cfg.descriptor = Some(format!("example={}", a.example));
    cfg.lattice = Some(a.lattice.clone());
    cfg.beta = Some(a.beta);
    cfg.trials = Some(a.trials);
    cfg.samples = Some(a.samples);
    cfg.incomplete = a.incomplete;
    let example = Example::parse(&a.example)?;
    let lattice = parse_lattice(&a.lattice)?;
    let net = PepsNetwork::build(example, lattice, a.beta, true)?;
    let protocol = simulate_peps_protocol(&net, a.trials, a.seed, a.incomplete)?;
    let parity = parity_statistics(&net, a.samples, a.seed)?;
    let parity_law = example == Example::Ghz;
    let violations: usize = if parity_law { parity.violations.iter().sum() } else { 0 };
    let pass = protocol.min_fidelity >= 1.0 - PEPS_THRESHOLD && violations == 0;
    let out = PepsOutput {
        config: &cfg,
        min_fidelity: protocol.min_fidelity,
        threshold: 1.0 - PEPS_THRESHOLD,
        parity_law,
        parity_violations: violations,
        pass,
        protocol,
        parity,
    };
    emit(&a.output, &to_json(&out)?)?;
    if a.output.is_some() {
        println!("min fidelity {:.17e}, parity violations {violations}", out.min_fidelity);
    }
    Ok(if pass { 0 } else { 3 })
}

#[derive(Serialize)]
struct SelftestOutput<'a> {
    config: &'a RunConfig,
    all_pass: bool,
    report: &'a SelftestReport,
}

fn cmd_selftest(a: SelftestArgs) -> Result<u8> {
    let mut cfg = RunConfig::new("selftest", a.seed, &a.output);
    cfg.criterion = a.criterion;
    let report = match a.criterion {
        Some(id) => {
            let c = run_criterion(id, a.seed)?;
            SelftestReport {
                seed: a.seed,
                total_seconds: c.seconds,
                criteria: vec![c],
            }
        }
        None => run_all(a.seed, |_| {}),
    };
    for line in report.lines() {
        println!("{line}");
    }
    if let Some(p) = &a.output {
        write_atomic(
            Path::new(p),
            to_json(&SelftestOutput {
                config: &cfg,
                all_pass: report.all_pass(),
                report: &report,
            })?
            .as_bytes(),
        )?;
    }
    Ok(if report.all_pass() { 0 } else { 1 })
}
