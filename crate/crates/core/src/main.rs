#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use kicked_rotor::dynamics::{growth_exponent, propagate, Trajectory, WaveState};
use kicked_rotor::edge::{cubic_decay_rate, EdgeSolution};
use kicked_rotor::spectral::{assign_wavenumber, detect_edge_state, eigendecompose, EdgeDetection, Spectrum, EDGE_CELL_L};
use kicked_rotor::tightbinding::band_energies;
use kicked_rotor::verify::{full_suite, CheckOutcome, Status, Verifier, VerifyOptions};
use kicked_rotor::{build_floquet, BuildMode, Error, FloquetMatrix, RotorParams, TauFrac};

const DEFAULT_L_MAX: usize = 150;

#[derive(Parser)]
#[command(name = "kicked-rotor", version, about = "Floquet spectra, bands and edge states of the 3D kicked rotor")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Kick strength P
    #[arg(long = "p", global = true, default_value_t = 0.3, allow_negative_numbers = true)]
    kick: f64,

    /// Kick period as a/b, meaning tau = 4*pi*a/b
    #[arg(long, global = true, default_value = "1/3")]
    tau_frac: TauFrac,

    /// Angular momentum cutoff [default: 150; verify uses each check's own]
    #[arg(long = "lmax", global = true)]
    l_max: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,

    /// Gauss-Legendre order [default: max(64, lmax + 16)]
    #[arg(long, global = true)]
    quad_order: Option<usize>,

    /// Number of k points for bands
    #[arg(long, global = true, default_value_t = 200)]
    kgrid: usize,

    /// Number of kicks for propagate
    #[arg(long, global = true, default_value_t = 100)]
    kicks: usize,

    /// Initial state: delta:L, gaussian:CENTER,WIDTH or edge
    #[arg(long, global = true, default_value = "delta:0")]
    init: String,

    /// Output file [default: stdout]
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format [default: json for edge, csv otherwise]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Eigenvalues and per-state diagnostics of the Floquet matrix
    Spectrum,
    /// Perturbative band energies on a k grid
    Bands,
    /// Analytic edge state compared with the numerical one
    Edge,
    /// Kick-by-kick propagation of an initial state
    Propagate,
    /// Run the acceptance and invariant suite
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Bands => "bands",
            Command::Edge => "edge",
            Command::Propagate => "propagate",
            Command::Verify => "verify",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Exact,
    Perturbative,
}

impl From<ModeArg> for BuildMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => BuildMode::Exact,
            ModeArg::Perturbative => BuildMode::Perturbative,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

enum Init {
    Delta(usize),
    Gaussian(f64, f64),
    Edge,
}

impl FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidParams(format!("unknown initial state '{s}', expected delta:L, gaussian:C,W or edge"));
        if s == "edge" {
            return Ok(Init::Edge);
        }
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "delta" => arg.trim().parse().map(Init::Delta).map_err(|_| bad()),
            "gaussian" => {
                let (c, w) = arg.split_once(',').ok_or_else(bad)?;
                let c: f64 = c.trim().parse().map_err(|_| bad())?;
                let w: f64 = w.trim().parse().map_err(|_| bad())?;
                Ok(Init::Gaussian(c, w))
            }
            _ => Err(bad()),
        }
    }
}

/// Resolved configuration, written at the top of every output.
#[derive(Serialize)]
struct RunConfig {
    command: &'static str,
    p: f64,
    tau_frac: String,
    l_max: Option<usize>,
    mode: ModeArg,
    quad_order: Option<usize>,
    kgrid: usize,
    kicks: usize,
    init: String,
    out: String,
    format: Format,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Self {
        let l_max = match cli.command {
            Command::Verify => cli.l_max,
            _ => Some(cli.l_max.unwrap_or(DEFAULT_L_MAX)),
        };
        let quad_order = match (cli.command, l_max) {
            (Command::Verify, _) => cli.quad_order,
            (_, Some(l)) => Some(RotorParams { quad_order: cli.quad_order, ..RotorParams::new(cli.kick, l) }.quad_order()),
            (_, None) => cli.quad_order,
        };
        let format = cli.format.unwrap_or(if cli.command == Command::Edge { Format::Json } else { Format::Csv });
        RunConfig {
            command: cli.command.name(),
            p: cli.kick,
            tau_frac: cli.tau_frac.to_string(),
            l_max,
            mode: cli.mode,
            quad_order,
            kgrid: cli.kgrid,
            kicks: cli.kicks,
            init: cli.init.clone(),
            out: cli.out.as_ref().map_or("-".into(), |p| p.display().to_string()),
            format,
        }
    }

    fn header(&self) -> String {
        let opt = |v: Option<usize>| v.map_or("default".to_string(), |x| x.to_string());
        let mode = match self.mode {
            ModeArg::Exact => "exact",
            ModeArg::Perturbative => "perturbative",
        };
        let format = match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        format!(
            "# kicked-rotor {}\n# command={}\n# p={:?}\n# tau_frac={}\n# l_max={}\n# mode={}\n# quad_order={}\n# kgrid={}\n# kicks={}\n# init={}\n# out={}\n# format={}\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.p,
            self.tau_frac,
            opt(self.l_max),
            mode,
            opt(self.quad_order),
            self.kgrid,
            self.kicks,
            self.init,
            self.out,
            format
        )
    }
}

/// A command failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParams(_) | Error::Domain(_) | Error::DimensionMismatch { .. } => 2,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 3, message: format!("i/o error: {e}") }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure { code: 3, message: format!("serialization error: {e}") }
    }
}

fn config_error(message: String) -> Failure {
    Failure { code: 2, message }
}

#[derive(Serialize, Clone, Copy)]
struct C {
    re: f64,
    im: f64,
}

impl From<Complex64> for C {
    fn from(z: Complex64) -> Self {
        C { re: z.re, im: z.im }
    }
}

fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(w: &mut dyn Write, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

fn rotor_params(cli: &Cli, cfg: &RunConfig) -> RotorParams {
    RotorParams {
        kick: cli.kick,
        tau: cli.tau_frac,
        l_max: cfg.l_max.unwrap_or(DEFAULT_L_MAX),
        quad_order: cli.quad_order,
    }
}

fn solve(cli: &Cli, cfg: &RunConfig) -> Result<(FloquetMatrix, Spectrum), Failure> {
    let t = build_floquet(&rotor_params(cli, cfg), cli.mode.into())?;
    let s = eigendecompose(&t)?;
    Ok((t, s))
}

#[derive(Serialize)]
struct SpectrumRow {
    index: usize,
    re_e: f64,
    im_e: f64,
    omega: f64,
    k_est: Option<f64>,
    centroid_l: f64,
    weight_l_le_2: f64,
    residual: f64,
}

fn cmd_spectrum(cli: &Cli, cfg: &RunConfig) -> Result<(), Failure> {
    let (_, s) = solve(cli, cfg)?;
    let rows: Vec<SpectrumRow> = (0..s.len())
        .map(|i| SpectrumRow {
            index: i,
            re_e: s.eigenvalues[i].re,
            im_e: s.eigenvalues[i].im,
            omega: s.phases[i],
            k_est: assign_wavenumber(&s.eigenvectors[i]).ok(),
            centroid_l: s.centroid(i),
            weight_l_le_2: s.low_weight(i, EDGE_CELL_L),
            residual: s.residuals[i],
        })
        .collect();
    let mut w = open_output(&cli.out)?;
    match cfg.format {
        Format::Csv => {
            write!(w, "{}", cfg.header())?;
            writeln!(w, "index,re_E,im_E,omega,k_est,centroid_l,weight_l_le_2,residual")?;
            for r in &rows {
                let k = r.k_est.map_or(String::new(), |k| format!("{k:?}"));
                writeln!(
                    w,
                    "{},{:?},{:?},{:?},{},{:?},{:?},{:?}",
                    r.index, r.re_e, r.im_e, r.omega, k, r.centroid_l, r.weight_l_le_2, r.residual
                )?;
            }
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                config: &'a RunConfig,
                rows: Vec<serde_json::Value>,
            }
            let rows = rows
                .iter()
                .map(|r| {
                    let v: Vec<C> = s.eigenvectors[r.index].iter().map(|&z| z.into()).collect();
                    serde_json::json!({
                        "index": r.index, "re_E": r.re_e, "im_E": r.im_e, "omega": r.omega,
                        "k_est": r.k_est, "centroid_l": r.centroid_l,
                        "weight_l_le_2": r.weight_l_le_2, "residual": r.residual,
                        "eigenvector": v,
                    })
                })
                .collect();
            write_json(&mut *w, &Out { config: cfg, rows })?;
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_bands(cli: &Cli, cfg: &RunConfig) -> Result<(), Failure> {
    if !(cli.kick > 0.0) || !cli.kick.is_finite() {
        return Err(config_error(format!("bands need P > 0, got {}", cli.kick)));
    }
    if cli.kgrid == 0 {
        return Err(config_error("kgrid must be positive".into()));
    }
    let ks: Vec<f64> = (0..cli.kgrid)
        .map(|i| if cli.kgrid == 1 { 0.0 } else { std::f64::consts::PI / 3.0 * i as f64 / (cli.kgrid - 1) as f64 })
        .collect();
    let mut w = open_output(&cli.out)?;
    match cfg.format {
        Format::Csv => {
            write!(w, "{}", cfg.header())?;
            writeln!(w, "k,re_E1_plus,im_E1_plus,re_E1_minus,im_E1_minus,re_E20,im_E20")?;
            for &k in &ks {
                let b = band_energies(k, cli.kick);
                writeln!(
                    w,
                    "{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                    k, b.e1_plus.re, b.e1_plus.im, b.e1_minus.re, b.e1_minus.im, b.e20.re, b.e20.im
                )?;
            }
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                k: f64,
                #[serde(rename = "E1_plus")]
                e1_plus: C,
                #[serde(rename = "E1_minus")]
                e1_minus: C,
                #[serde(rename = "E20")]
                e20: C,
            }
            #[derive(Serialize)]
            struct Out<'a> {
                config: &'a RunConfig,
                rows: Vec<Row>,
            }
            let rows = ks
                .iter()
                .map(|&k| {
                    let b = band_energies(k, cli.kick);
                    Row { k, e1_plus: b.e1_plus.into(), e1_minus: b.e1_minus.into(), e20: b.e20.into() }
                })
                .collect();
            write_json(&mut *w, &Out { config: cfg, rows })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Analytic {
    #[serde(rename = "E_edge")]
    energy: C,
    gamma_edge: C,
    k_edge: C,
    decay_rate: f64,
}

#[derive(Serialize)]
struct Numeric {
    index: usize,
    eigenvalue: C,
    weight_low: f64,
    fitted_slope: f64,
    /// Decay rate implied by the characteristic cubic at the numerical energy.
    cubic_decay_rate: Option<f64>,
}

#[derive(Serialize)]
struct Deltas {
    energy: f64,
    slope_relative: f64,
}

#[derive(Serialize)]
struct ProfileRow {
    l: usize,
    numeric_abs: Option<f64>,
    model_abs: f64,
}

#[derive(Serialize)]
struct EdgeReport<'a> {
    config: &'a RunConfig,
    status: &'static str,
    outside_perturbative_validity: bool,
    analytic: Analytic,
    numeric: Option<Numeric>,
    deltas: Option<Deltas>,
    profile: Vec<ProfileRow>,
}

fn cmd_edge(cli: &Cli, cfg: &RunConfig) -> Result<(), Failure> {
    if !(cli.kick > 0.0) || !cli.kick.is_finite() {
        return Err(config_error(format!("edge needs P > 0, got {}", cli.kick)));
    }
    let theory = EdgeSolution::new(cli.kick)?;
    let (_, s) = solve(cli, cfg)?;
    let found: Option<EdgeDetection> = match detect_edge_state(&s) {
        Ok(d) => Some(d),
        Err(Error::NoEdgeState { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let l_max = s.eigenvectors.first().map_or(0, |v| v.len() - 1);
    let model = theory.profile(l_max)?;
    let profile = (0..=l_max)
        .map(|l| ProfileRow {
            l,
            numeric_abs: found.map(|d| s.eigenvectors[d.index][l].norm()),
            model_abs: model[l],
        })
        .collect();
    let report = EdgeReport {
        config: cfg,
        status: if found.is_some() { "ok" } else { "no edge state" },
        outside_perturbative_validity: theory.outside_perturbative_validity,
        analytic: Analytic {
            energy: theory.energy.into(),
            gamma_edge: theory.gamma.into(),
            k_edge: theory.k.into(),
            decay_rate: theory.decay_rate,
        },
        numeric: found.map(|d| Numeric {
            index: d.index,
            eigenvalue: d.eigenvalue.into(),
            weight_low: d.weight_low,
            fitted_slope: d.fitted_slope,
            cubic_decay_rate: cubic_decay_rate(d.eigenvalue, cli.kick).ok(),
        }),
        deltas: found.map(|d| Deltas {
            energy: (d.eigenvalue - theory.energy).norm(),
            slope_relative: (d.fitted_slope + theory.decay_rate).abs() / theory.decay_rate,
        }),
        profile,
    };
    let mut w = open_output(&cli.out)?;
    match cfg.format {
        Format::Json => write_json(&mut *w, &report)?,
        Format::Csv => {
            write!(w, "{}", cfg.header())?;
            let a = &report.analytic;
            writeln!(w, "# status={}", report.status)?;
            writeln!(w, "# outside_perturbative_validity={}", report.outside_perturbative_validity)?;
            writeln!(w, "# E_edge={:?},{:?}", a.energy.re, a.energy.im)?;
            writeln!(w, "# gamma_edge={:?},{:?}", a.gamma_edge.re, a.gamma_edge.im)?;
            writeln!(w, "# k_edge={:?},{:?}", a.k_edge.re, a.k_edge.im)?;
            writeln!(w, "# decay_rate={:?}", a.decay_rate)?;
            if let (Some(n), Some(d)) = (&report.numeric, &report.deltas) {
                writeln!(w, "# eigenvalue={:?},{:?}", n.eigenvalue.re, n.eigenvalue.im)?;
                writeln!(w, "# weight_low={:?}", n.weight_low)?;
                writeln!(w, "# fitted_slope={:?}", n.fitted_slope)?;
                if let Some(r) = n.cubic_decay_rate {
                    writeln!(w, "# cubic_decay_rate={r:?}")?;
                }
                writeln!(w, "# delta_energy={:?}", d.energy)?;
                writeln!(w, "# delta_slope_relative={:?}", d.slope_relative)?;
            }
            writeln!(w, "l,numeric_abs,model_abs")?;
            for r in &report.profile {
                let n = r.numeric_abs.map_or(String::new(), |x| format!("{x:?}"));
                writeln!(w, "{},{},{:?}", r.l, n, r.model_abs)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_propagate(cli: &Cli, cfg: &RunConfig) -> Result<(), Failure> {
    let init: Init = cli.init.parse().map_err(|e: Error| config_error(e.to_string()))?;
    if cli.kicks == 0 {
        return Err(config_error("kicks must be positive".into()));
    }
    let params = rotor_params(cli, cfg);
    let dim = params.dim();
    let (t, state) = match init {
        Init::Delta(l) => {
            let t = build_floquet(&params, cli.mode.into())?;
            (t, WaveState::delta(dim, l)?)
        }
        Init::Gaussian(c, w) => {
            let t = build_floquet(&params, cli.mode.into())?;
            (t, WaveState::gaussian(dim, c, w)?)
        }
        Init::Edge => {
            let (t, s) = solve(cli, cfg)?;
            let d = detect_edge_state(&s)?;
            (t, WaveState::new(s.eigenvectors[d.index].clone()))
        }
    };
    let (traj, _) = propagate(&state, &t, cli.kicks)?;
    let exponent = growth_exponent(&traj, 5, 40).ok();
    write_trajectory(cli, cfg, &traj, exponent)
}

fn write_trajectory(cli: &Cli, cfg: &RunConfig, traj: &Trajectory, exponent: Option<f64>) -> Result<(), Failure> {
    let mut w = open_output(&cli.out)?;
    match cfg.format {
        Format::Csv => {
            write!(w, "{}", cfg.header())?;
            writeln!(w, "n,energy,norm,p_l0,centroid")?;
            for r in &traj.records {
                writeln!(w, "{},{:?},{:?},{:?},{:?}", r.kick, r.energy, r.norm, r.p_l0, r.centroid)?;
            }
            if let Some(e) = exponent {
                writeln!(w, "# growth_exponent_5_40={e:?}")?;
            }
            if let Some(n) = traj.truncation_warning {
                writeln!(w, "# truncation_warning_kick={n}")?;
            }
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                n: usize,
                energy: f64,
                norm: f64,
                p_l0: f64,
                centroid: f64,
            }
            #[derive(Serialize)]
            struct Out<'a> {
                config: &'a RunConfig,
                rows: Vec<Row>,
                growth_exponent_5_40: Option<f64>,
                truncation_warning_kick: Option<usize>,
            }
            let rows = traj
                .records
                .iter()
                .map(|r| Row { n: r.kick, energy: r.energy, norm: r.norm, p_l0: r.p_l0, centroid: r.centroid })
                .collect();
            let out = Out { config: cfg, rows, growth_exponent_5_40: exponent, truncation_warning_kick: traj.truncation_warning };
            write_json(&mut *w, &out)?;
        }
    }
    w.flush()?;
    if let Some(n) = traj.truncation_warning {
        eprintln!("warning: centroid within 20 of l_max from kick {n}; truncation reflection likely");
    }
    Ok(())
}

fn cmd_verify(cli: &Cli, cfg: &RunConfig) -> Result<bool, Failure> {
    let opts = VerifyOptions { l_max: cli.l_max, quad_order: cli.quad_order };
    opts.validate()?;
    let verifier = Verifier::new(opts);
    let mut outcomes: Vec<CheckOutcome> = Vec::new();
    let mut w = open_output(&cli.out)?;
    if cfg.format == Format::Csv {
        write!(w, "{}", cfg.header())?;
    }
    for check in full_suite() {
        let outcome = verifier.run(&check);
        if cfg.format == Format::Csv {
            writeln!(w, "{outcome}")?;
            w.flush()?;
        }
        outcomes.push(outcome);
    }
    let failed = outcomes.iter().filter(|o| o.status == Status::Fail).count();
    let skipped = outcomes.iter().filter(|o| o.status == Status::Skip).count();
    match cfg.format {
        Format::Csv => writeln!(w, "# {} checks: {} failed, {} skipped", outcomes.len(), failed, skipped)?,
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                config: &'a RunConfig,
                checks: &'a [CheckOutcome],
                failed: usize,
                skipped: usize,
            }
            write_json(&mut *w, &Out { config: cfg, checks: &outcomes, failed, skipped })?;
        }
    }
    w.flush()?;
    Ok(failed == 0)
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let cfg = RunConfig::from_cli(cli);
    if cli.command != Command::Verify {
        rotor_params(cli, &cfg).validate()?;
    }
    match cli.command {
        Command::Spectrum => cmd_spectrum(cli, &cfg)?,
        Command::Bands => cmd_bands(cli, &cfg)?,
        Command::Edge => cmd_edge(cli, &cfg)?,
        Command::Propagate => cmd_propagate(cli, &cfg)?,
        Command::Verify => return Ok(if cmd_verify(cli, &cfg)? { 0 } else { 1 }),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
