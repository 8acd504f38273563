//! The `llgeo` command line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::algebra::EuclideanAlgebraElement;
use crate::cocycle::{check_px_py_bracket, cocycle_direct, cocycle_via_pairing, CocycleInput};
use crate::config::{Command, Format, Kind, RunConfig, Settings};
use crate::error::{Error, Result};
use crate::field::SpinField;
use crate::integrator::{simulate, Scheme, Sink};
use crate::io::{format_row, read_snapshot, write_snapshot, CsvSink, Snapshot};
use crate::momenta::{
    check_lift_identity, degree, momentum_jh_of_lift, reduced_momentum_lift, EuclideanMomentum,
    MomentumReport,
};

#[derive(Parser, Debug)]
#[command(
    name = "llgeo",
    version,
    about = "Landau-Lifshitz spin fields: simulation, momenta, cocycle and bracket checks",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Generate an initial field and write it as a snapshot.
    Init(Flags),
    /// Integrate the Landau-Lifshitz equation, writing a time series and the final state.
    Simulate(Flags),
    /// Print the momentum report of a snapshot.
    Diagnose(Flags),
    /// Compare {P_x, P_y} with 4π·deg n.
    BracketCheck(Flags),
    /// Evaluate the cocycle along both computational paths.
    Cocycle(Flags),
    /// Compare the lift-based and closed-form reduced momenta.
    LiftCheck(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// TOML file with default values; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
    /// Cell counts, e.g. 128x128.
    #[arg(long)]
    grid: Option<String>,
    /// Box edge length (centred at the origin).
    #[arg(long = "box", allow_hyphen_values = true)]
    box_len: Option<f64>,
    /// Generator: constant, bp, radial or random.
    #[arg(long)]
    kind: Option<Kind>,
    /// Soliton degree for --kind bp
    #[arg(long, allow_hyphen_values = true)]
    m: Option<i32>,
    /// Soliton scale for --kind bp
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Radius beyond which generated fields are blended to −k
    #[arg(long, allow_hyphen_values = true)]
    cutoff: Option<f64>,
    /// Peak tilt angle for radial and random fields
    #[arg(long, allow_hyphen_values = true)]
    amplitude: Option<f64>,
    /// Direction for --kind constant, as x,y,z.
    #[arg(long, allow_hyphen_values = true)]
    value: Option<String>,
    /// Anisotropy coupling.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Time step
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<f64>,
    /// Number of time steps
    #[arg(long)]
    steps: Option<usize>,
    /// rk4 or midpoint.
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Seed for --kind random
    #[arg(long)]
    seed: Option<u64>,
    /// PASS/FAIL tolerance.
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
    /// Output path (snapshot for init, CSV for simulate)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Read the field from a snapshot instead of generating it
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Steps between report rows
    #[arg(long)]
    report_every: Option<usize>,
    /// Algebra element as `Ω upper triangle;ȧ`, e.g. `0;1,0`.
    #[arg(long, allow_hyphen_values = true)]
    e1: Option<String>,
    /// Second algebra element, same form as --e1
    #[arg(long, allow_hyphen_values = true)]
    e2: Option<String>,
    /// text or csv.
    #[arg(long)]
    format: Option<Format>,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Config(format!("format: unknown format `{s}`"))),
        }
    }
}

impl Flags {
    fn settings(&self) -> Settings {
        Settings {
            grid: self.grid.clone(),
            box_len: self.box_len,
            kind: self.kind,
            m: self.m,
            lambda: self.lambda,
            cutoff: self.cutoff,
            amplitude: self.amplitude,
            value: self.value.clone(),
            a: self.a,
            dt: self.dt,
            steps: self.steps,
            scheme: self.scheme,
            seed: self.seed,
            tol: self.tol,
            out: self.out.clone(),
            input: self.input.clone(),
            report_every: self.report_every,
            e1: self.e1.clone(),
            e2: self.e2.clone(),
            format: self.format,
        }
    }
}

/// Parsed command line: the resolved configuration, or a request to echo it.
pub struct Invocation {
    pub config: RunConfig,
    pub print_config: bool,
}

/// Parses argv and an optional config file into a [`RunConfig`]. Clap
/// handles usage errors and `--help` itself.
pub fn parse_config<I, T>(argv: I) -> std::result::Result<Invocation, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(ParseOutcome::Clap)?;
    let (command, flags) = match cli.command {
        Sub::Init(f) => (Command::Init, f),
        Sub::Simulate(f) => (Command::Simulate, f),
        Sub::Diagnose(f) => (Command::Diagnose, f),
        Sub::BracketCheck(f) => (Command::BracketCheck, f),
        Sub::Cocycle(f) => (Command::Cocycle, f),
        Sub::LiftCheck(f) => (Command::LiftCheck, f),
    };
    let file = match &flags.config {
        Some(p) => Settings::from_file(p).map_err(ParseOutcome::Config)?,
        None => Settings::default(),
    };
    let config = RunConfig::resolve(command, file.merge(flags.settings())).map_err(ParseOutcome::Config)?;
    Ok(Invocation {
        config,
        print_config: flags.print_config,
    })
}

#[derive(Debug)]
pub enum ParseOutcome {
    Clap(clap::Error),
    Config(Error),
}

fn kv(out: &mut dyn Write, key: &str, value: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{key}={value}")?;
    Ok(())
}

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

fn verdict(out: &mut dyn Write, pass: bool) -> Result<bool> {
    kv(out, "VERDICT", if pass { "PASS" } else { "FAIL" })?;
    Ok(pass)
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-12 {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

fn load_spin(cfg: &RunConfig) -> Result<SpinField> {
    match &cfg.input {
        Some(p) => read_snapshot(p)?.into_spin(),
        None => cfg.generate(),
    }
}

fn need_out(cfg: &RunConfig) -> Result<&Path> {
    cfg.out
        .as_deref()
        .ok_or_else(|| Error::Config("out: an output path is required".into()))
}

fn write_momentum(out: &mut dyn Write, prefix: &str, m: &EuclideanMomentum, p: usize) -> Result<()> {
    for i in 0..p {
        kv(out, &format!("{prefix}_T{}", i + 1), f(m.translation[i]))?;
    }
    for (v, (i, j)) in m.rotation.upper().iter().zip(crate::algebra::upper_pairs(p)) {
        kv(out, &format!("{prefix}_R{}{}", i + 1, j + 1), f(*v))?;
    }
    Ok(())
}

/// Executes a resolved configuration, writing KEY=VALUE lines to `out`.
/// Returns the verdict for checking subcommands and `true` otherwise.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    match cfg.command {
        Command::Init => {
            let n = cfg.generate()?;
            let path = need_out(cfg)?;
            write_snapshot(&Snapshot::Spin(n.clone()), path)?;
            kv(out, "OUT", path.display())?;
            kv(out, "CELLS", n.grid().len())?;
            kv(out, "N", f(crate::momenta::momentum_n(&n)))?;
            if n.p() == 2 {
                kv(out, "DEG", f(degree(&n)?))?;
            }
            Ok(true)
        }
        Command::Simulate => {
            let n0 = load_spin(cfg)?;
            let csv_path = need_out(cfg)?.to_path_buf();
            let snap_path = csv_path.with_extension("llgf");
            if cfg.input.as_deref() == Some(snap_path.as_path()) {
                return Err(Error::Config(format!(
                    "out: final snapshot `{}` would overwrite the input",
                    snap_path.display()
                )));
            }
            cfg.sim.validate_for(n0.grid())?;
            let file = BufWriter::new(File::create(&csv_path).map_err(crate::io::with_path(&csv_path))?);
            let mut csv = CsvSink::new(file, n0.p())?;
            let mut snap = crate::io::SnapshotSink {
                path: snap_path.clone(),
            };
            let mut sinks: [&mut dyn Sink; 2] = [&mut csv, &mut snap];
            let n = simulate(&n0, &cfg.sim, &mut sinks)?;
            kv(out, "STEPS", cfg.sim.steps)?;
            kv(out, "CSV", csv_path.display())?;
            kv(out, "SNAPSHOT", snap_path.display())?;
            kv(out, "NORM_DEV", f(n.norm_deviation()))?;
            Ok(true)
        }
        Command::Diagnose => {
            let n = load_spin(cfg)?;
            let r = MomentumReport::compute(&n, &cfg.sim.params, 0.0);
            let header = MomentumReport::header(n.p());
            match cfg.format {
                Format::Csv => {
                    writeln!(out, "{}", header.join(","))?;
                    writeln!(out, "{}", format_row(&r.values()))?;
                }
                Format::Text => {
                    for (h, v) in header.iter().zip(r.values()) {
                        kv(out, &h.to_uppercase(), f(v))?;
                    }
                    kv(out, "DECAYING", n.is_decaying())?;
                }
            }
            Ok(true)
        }
        Command::BracketCheck => {
            let n = load_spin(cfg)?;
            let (b, fd) = check_px_py_bracket(&n)?;
            let rel = rel_gap(b, fd);
            kv(out, "BRACKET", f(b))?;
            kv(out, "FOURPI_DEG", f(fd))?;
            kv(out, "REL_ERR", f(rel))?;
            kv(out, "TOL", f(cfg.tol))?;
            verdict(out, rel <= cfg.tol)
        }
        Command::Cocycle => {
            let mu = load_spin(cfg)?;
            let p = mu.p();
            let default = |axis: usize| EuclideanAlgebraElement::translation(p, axis.min(p - 1));
            let parse = |s: &Option<String>, axis| -> Result<EuclideanAlgebraElement> {
                s.as_deref().map(str::parse).unwrap_or(Ok(default(axis)))
            };
            let inp = CocycleInput::new(mu, parse(&cfg.e1, 0)?, parse(&cfg.e2, 1)?)?;
            let d = cocycle_direct(&inp);
            let q = cocycle_via_pairing(&inp);
            let rel = rel_gap(d, q);
            kv(out, "E1", inp.e1)?;
            kv(out, "E2", inp.e2)?;
            kv(out, "SIGMA_DIRECT", f(d))?;
            kv(out, "SIGMA_PAIRING", f(q))?;
            kv(out, "REL_GAP", f(rel))?;
            kv(out, "TOL", f(cfg.tol))?;
            verdict(out, rel <= cfg.tol)
        }
        Command::LiftCheck => {
            let n = load_spin(cfg)?;
            let p = n.p();
            let id = check_lift_identity(&n)?;
            let (closed, singular) = reduced_momentum_lift(&n)?;
            let (lifted, _) = momentum_jh_of_lift(&n)?;
            kv(out, "RESIDUAL", f(id.residual))?;
            kv(out, "NEAR_SINGULAR_RESIDUAL", f(id.near_singular_residual))?;
            kv(out, "NEAR_SINGULAR_CELLS", id.near_singular)?;
            kv(out, "SINGULAR_CELLS", singular)?;
            write_momentum(out, "JBAR", &closed, p)?;
            write_momentum(out, "JH_LIFT", &lifted, p)?;
            let scale = closed.norm().max(lifted.norm());
            let gap = closed.sub(&lifted).norm();
            let rel = if scale < 1e-12 { gap } else { gap / scale };
            kv(out, "REL_GAP", f(rel))?;
            kv(out, "TOL", f(cfg.tol))?;
            verdict(out, rel <= cfg.tol)
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("LLGEO_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("LLGEO_THREADS: `{v}` is not a positive integer")))?;
        // A pool that is already initialised keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Entry point shared by the binary and tests. Returns the process exit
/// code: 0 on success, 1 on a FAIL verdict, 2/3/4 for config, io and
/// numeric errors.
pub fn main_with_args<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let report = |e: &Error, err: &mut dyn Write| {
        let _ = writeln!(err, "error: {e}");
        e.exit_code()
    };
    let inv = match parse_config(argv) {
        Ok(inv) => inv,
        Err(ParseOutcome::Clap(e)) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
        Err(ParseOutcome::Config(e)) => return report(&e, err),
    };
    if inv.print_config {
        let _ = write!(out, "{}", inv.config.to_toml());
        return 0;
    }
    if let Err(e) = configure_threads() {
        return report(&e, err);
    }
    match run(&inv.config, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => report(&e, err),
    }
}
