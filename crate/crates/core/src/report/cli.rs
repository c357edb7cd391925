//! The `ghostfree` command line.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{data, emit, run_suite, RunConfig, Suite};
use crate::classical::{integrate_pu, invert_xi, map_to_xi, write_trajectory_csv, TrajectorySpec};
use crate::complex_oscillator::ComplexOscParams;
use crate::error::{Error, Result};
use crate::pais_uhlenbeck::{Branch, TransformCoefficients};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_CHECK_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "ghostfree", version, about = "Numerical verification of ghost-free higher-derivative oscillators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verification suites and write a report.
    Verify,
    /// Write level tables for the two-mode and complex oscillators.
    Spectrum,
    /// Write propagator coefficient functions on a time grid ending at `--t`.
    Propagator,
    /// Integrate a trajectory and write it with its two oscillator channels.
    Classical,
    /// Write the frequencies and coefficients of field modes up to wavenumber `k`.
    Field,
}

#[derive(Debug, Args, Default)]
pub struct Options {
    /// JSON file with the fields of a run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub suite: Option<String>,
    #[arg(long, global = true)]
    pub omega1: Option<f64>,
    #[arg(long, global = true)]
    pub omega2: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub t: Option<f64>,
    /// Complex-oscillator basis size.
    #[arg(long, global = true)]
    pub basis: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Override a check tolerance, e.g. `pu.decoupling=1e-9`.
    #[arg(long = "tolerance", value_name = "NAME=VALUE", global = true)]
    pub tolerances: Vec<String>,
    /// Override any other parameter, e.g. `m1=3`.
    #[arg(long = "param", value_name = "NAME=VALUE", global = true)]
    pub params: Vec<String>,
}

fn parse_pair(s: &str) -> Result<(String, f64)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::Config(format!("expected NAME=VALUE, got {s:?}")))?;
    let v: f64 = v.trim().parse().map_err(|_| Error::Config(format!("not a number in {s:?}")))?;
    Ok((k.trim().to_string(), v))
}

impl Options {
    /// The config file, if any, with flag values applied on top.
    pub fn to_config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(s) = &self.suite {
            c.suite = s.parse()?;
        }
        if let Some(f) = &self.format {
            c.format = f.parse()?;
        }
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        if let Some(out) = &self.out {
            c.output_dir = out.clone();
        }
        let named = [("omega1", self.omega1), ("omega2", self.omega2), ("epsilon", self.epsilon), ("t", self.t), ("basis", self.basis)];
        for (k, v) in named {
            if let Some(v) = v {
                c.parameters.insert(k.to_string(), v);
            }
        }
        for p in &self.params {
            let (k, v) = parse_pair(p)?;
            c.parameters.insert(k, v);
        }
        for p in &self.tolerances {
            let (k, v) = parse_pair(p)?;
            c.tolerances.insert(k, v);
        }
        Ok(c)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

/// Parses the process arguments and runs the command.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS });
        }
    };
    ExitCode::from(run(&cli))
}

pub fn run(cli: &Cli) -> u8 {
    let result = cli.options.to_config().and_then(|config| match cli.command {
        Command::Verify => verify(&config),
        Command::Spectrum => spectrum(&config).map(|_| EXIT_PASS),
        Command::Propagator => propagator(&config).map(|_| EXIT_PASS),
        Command::Classical => classical(&config).map(|_| EXIT_PASS),
        Command::Field => field(&config).map(|_| EXIT_PASS),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn verify(config: &RunConfig) -> Result<u8> {
    let reports = run_suite(config)?;
    let path = emit(&reports, config)?;
    for r in &reports {
        println!("{} {} residual={:e} tolerance={:e}", if r.passed { "PASS" } else { "FAIL" }, r.check_name, r.residual, r.tolerance);
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} checks, {failed} failed; report written to {}", reports.len(), path.display());
    Ok(if failed == 0 { EXIT_PASS } else { EXIT_CHECK_FAILURE })
}

fn write_file(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn with_suite(config: &RunConfig, suites: &[Suite]) -> Result<super::Context> {
    let mut ctx = None;
    for &suite in suites {
        ctx = Some(RunConfig { suite, ..config.clone() }.validate()?);
    }
    Ok(ctx.expect("at least one suite"))
}

fn spectrum(config: &RunConfig) -> Result<()> {
    let ctx = with_suite(config, &[Suite::ComplexHo, Suite::PuQuantum])?;
    let pu = ctx.pu()?;
    let basis = ctx.pu_basis()?;
    let count = 10.min(basis.dim() / 4);
    write_file(&config.output_dir, "spectrum.csv", |w| data::write_pu_spectrum_csv(&pu, &basis, count, w))?;
    let co = ComplexOscParams::with_basis(ctx.epsilon(), ctx.basis()?)?;
    let count = 10.min(co.basis_size / 4);
    write_file(&config.output_dir, "complex_spectrum.csv", |w| data::write_complex_spectrum_csv(&co, count, w))
}

fn propagator(config: &RunConfig) -> Result<()> {
    let ctx = with_suite(config, &[Suite::ComplexHo, Suite::PuQuantum])?;
    let times = data::time_grid(ctx.t(), 201);
    let pu = ctx.pu()?;
    write_file(&config.output_dir, "pu_propagator.csv", |w| data::write_pu_propagator_csv(&pu, &times, w))?;
    write_file(&config.output_dir, "complex_propagator.csv", |w| data::write_complex_propagator_csv(ctx.epsilon(), &times, w))
}

fn classical(config: &RunConfig) -> Result<()> {
    let ctx = with_suite(config, &[Suite::PuClassical])?;
    let p = ctx.pu()?;
    let k = TransformCoefficients::closed_form(&p, Branch::Plus);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut r = || rng.gen_range(-1.0..1.0);
    let init = invert_xi(&p, &k, r(), r(), r(), r());
    let spec = TrajectorySpec::new(ctx.get("duration"), ctx.get("step"), init)?;
    let traj = map_to_xi(&k, &integrate_pu(&p, &spec)?);
    write_file(&config.output_dir, "trajectory.csv", |w| write_trajectory_csv(&p, &traj, w))
}

fn field(config: &RunConfig) -> Result<()> {
    let ctx = with_suite(config, &[Suite::Field])?;
    let f = ctx.field()?;
    let ks = data::time_grid(ctx.get("k"), 41);
    write_file(&config.output_dir, "field_modes.csv", |w| data::write_field_modes_csv(&f, &ks, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"suite": "pu-quantum", "parameters": {"omega1": 3.0, "omega2": 0.5}, "seed": 4}"#).unwrap();
        let cli = Cli::try_parse_from(["ghostfree", "verify", "--config", path.to_str().unwrap(), "--omega1", "2.5", "--seed", "8"]).unwrap();
        let c = cli.options.to_config().unwrap();
        assert_eq!(c.suite, Suite::PuQuantum);
        assert_eq!(c.parameters["omega1"], 2.5);
        assert_eq!(c.parameters["omega2"], 0.5);
        assert_eq!(c.seed, 8);
    }

    #[test]
    fn pairs() {
        assert_eq!(parse_pair("pu.decoupling=1e-9").unwrap(), ("pu.decoupling".to_string(), 1e-9));
        assert!(parse_pair("novalue").is_err());
        assert!(parse_pair("x=abc").is_err());
        let cli = Cli::try_parse_from(["ghostfree", "verify", "--tolerance", "pu.spectrum=0", "--param", "m1=3"]).unwrap();
        let c = cli.options.to_config().unwrap();
        assert_eq!(c.tolerances["pu.spectrum"], 0.0);
        assert_eq!(c.parameters["m1"], 3.0);
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::Io("x".into())), EXIT_IO);
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
    }
}
