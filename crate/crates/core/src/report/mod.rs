//! Verification suites, run configuration and report emission.

mod checks;
pub mod cli;
pub mod data;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::complex_oscillator::GridSpec;
use crate::error::{Error, Result};
use crate::field::FieldParams;
use crate::pais_uhlenbeck::{PUParams, PUPropagatorCoeffs, TwoModeBasis};

pub use checks::{registry, CheckSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    ComplexHo,
    PuQuantum,
    PuClassical,
    Field,
    #[default]
    All,
}

impl Suite {
    pub const CONCRETE: [Suite; 4] = [Suite::ComplexHo, Suite::PuQuantum, Suite::PuClassical, Suite::Field];

    pub fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::ComplexHo => "complex-ho",
            Suite::PuQuantum => "pu-quantum",
            Suite::PuClassical => "pu-classical",
            Suite::Field => "field",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Suite::All, Suite::ComplexHo, Suite::PuQuantum, Suite::PuClassical, Suite::Field]
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Config(format!("unknown format {s:?}"))),
        }
    }
}

/// Recognized parameters and their defaults.
pub const PARAMETERS: [(&str, f64); 13] = [
    ("epsilon", 0.3),
    ("basis", 40.0),
    ("grid_half_width", 8.0),
    ("grid_spacing", 1e-2),
    ("t", 0.7),
    ("omega1", 2.0),
    ("omega2", 1.0),
    ("pu_basis", 16.0),
    ("duration", 10.0),
    ("step", 1e-3),
    ("m1", 2.0),
    ("m2", 1.0),
    ("k", 2.0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub suite: Suite,
    /// Overrides of [`PARAMETERS`].
    pub parameters: BTreeMap<String, f64>,
    /// Overrides of per-check tolerances, keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: PathBuf,
    pub format: Format,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            parameters: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            output_dir: PathBuf::from("out"),
            format: Format::Json,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Defaults merged with the configured overrides.
    pub fn resolved_parameters(&self) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> = PARAMETERS.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        out.extend(self.parameters.iter().map(|(k, v)| (k.clone(), *v)));
        out
    }

    pub fn validate(&self) -> Result<Context> {
        for name in self.parameters.keys() {
            if !PARAMETERS.iter().any(|(k, _)| k == name) {
                return Err(Error::Config(format!("unknown parameter {name:?}")));
            }
        }
        for (name, &tol) in &self.tolerances {
            if !registry().iter().any(|c| c.name == name) {
                return Err(Error::Config(format!("unknown tolerance {name:?}")));
            }
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(Error::Config(format!("tolerance {name} must be a finite non-negative number, got {tol}")));
            }
        }
        let ctx = Context { values: self.resolved_parameters() };
        if let Some((name, v)) = ctx.values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Config(format!("parameter {name} is not finite: {v}")));
        }
        for suite in Suite::CONCRETE {
            if self.suite.includes(suite) {
                ctx.validate_for(suite)?;
            }
        }
        Ok(ctx)
    }

    pub fn tolerance(&self, check: &CheckSpec) -> f64 {
        self.tolerances.get(check.name).copied().unwrap_or(check.tolerance)
    }
}

/// Validated parameter values handed to every check.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    values: BTreeMap<String, f64>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl Context {
    pub fn get(&self, name: &str) -> f64 {
        self.values[name]
    }

    pub fn parameters(&self) -> &BTreeMap<String, f64> {
        &self.values
    }

    fn size(&self, name: &str, min: usize) -> Result<usize> {
        let v = self.get(name);
        if v.fract() != 0.0 || v < min as f64 || v > 400.0 {
            return Err(config_err(format!("{name} must be an integer in [{min}, 400], got {v}")));
        }
        Ok(v as usize)
    }

    pub fn epsilon(&self) -> f64 {
        self.get("epsilon")
    }

    pub fn t(&self) -> f64 {
        self.get("t")
    }

    pub fn basis(&self) -> Result<usize> {
        self.size("basis", 8)
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec { half_width: self.get("grid_half_width"), spacing: self.get("grid_spacing") }
    }

    pub fn pu(&self) -> Result<PUParams> {
        PUParams::new(self.get("omega1"), self.get("omega2"))
    }

    pub fn pu_basis(&self) -> Result<TwoModeBasis> {
        let n = self.size("pu_basis", 6)?;
        TwoModeBasis::new(n, n)
    }

    pub fn field(&self) -> Result<FieldParams> {
        FieldParams::new(self.get("m1"), self.get("m2"))
    }

    fn validate_for(&self, suite: Suite) -> Result<()> {
        match suite {
            Suite::ComplexHo => {
                let eps = self.epsilon();
                if !(eps > 0.0 && eps < 1.0) {
                    return Err(config_err(format!("epsilon out of range (0, 1): {eps}")));
                }
                self.basis()?;
                let t = self.t();
                if t <= 0.0 || (t / std::f64::consts::PI).fract().min(1.0 - (t / std::f64::consts::PI).fract()) < 1e-6 {
                    return Err(config_err(format!("t must be positive and away from multiples of pi, got {t}")));
                }
                let g = self.grid();
                if !(g.half_width > 0.0 && g.spacing > 0.0 && g.spacing < g.half_width) {
                    return Err(config_err(format!("invalid grid: half width {}, spacing {}", g.half_width, g.spacing)));
                }
            }
            Suite::PuQuantum => {
                let p = self.pu().map_err(|e| config_err(e.to_string()))?;
                self.pu_basis()?;
                let t = self.t();
                if t <= 0.0 || PUPropagatorCoeffs::canonical(&p, t).d.abs() < 1e-8 {
                    return Err(config_err(format!("t must be positive and away from caustics, got {t}")));
                }
            }
            Suite::PuClassical => {
                self.pu().map_err(|e| config_err(e.to_string()))?;
                let (duration, step) = (self.get("duration"), self.get("step"));
                if !(duration > 0.0 && step > 0.0 && step <= duration / 100.0) {
                    return Err(config_err(format!("need duration > 0 and 0 < step <= duration/100, got ({duration}, {step})")));
                }
                if duration / step > 1e7 {
                    return Err(config_err(format!("too many steps: {}", duration / step)));
                }
            }
            Suite::Field => {
                self.field().map_err(|e| config_err(e.to_string()))?;
                self.pu_basis()?;
                if self.get("k") < 0.0 {
                    return Err(config_err(format!("k must be non-negative, got {}", self.get("k"))));
                }
            }
            Suite::All => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub metadata: Map<String, Value>,
}

impl VerificationReport {
    /// Residuals that are not finite are stored as `f64::MAX` so the report
    /// stays valid JSON.
    pub fn new(check_name: &str, residual: f64, tolerance: f64, metadata: Map<String, Value>) -> Self {
        let residual = if residual.is_finite() { residual } else { f64::MAX };
        Self { check_name: check_name.to_string(), residual, tolerance, passed: residual <= tolerance, metadata }
    }
}

/// What a check returns before tolerances are applied.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub residual: f64,
    pub metadata: Map<String, Value>,
}

impl Outcome {
    pub fn new(residual: f64) -> Self {
        Self { residual, metadata: Map::new() }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }
}

/// Runs every check of the selected suite in registry order.
///
/// Each check draws from its own ChaCha8 stream of the configured seed, so
/// results do not depend on which other checks ran.
pub fn run_suite(config: &RunConfig) -> Result<Vec<VerificationReport>> {
    let ctx = config.validate()?;
    let params: Map<String, Value> = ctx.parameters().iter().map(|(k, v)| (k.clone(), Value::from(*v))).collect();
    let selected: Vec<(usize, &CheckSpec)> =
        registry().iter().enumerate().filter(|(_, c)| config.suite.includes(c.suite)).collect();
    let reports = std::thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|&(stream, check)| {
                let ctx = &ctx;
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                    rng.set_stream(stream as u64);
                    let start = Instant::now();
                    let outcome = (check.run)(ctx, &mut rng);
                    (outcome, start.elapsed())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("check thread panicked")).collect::<Vec<_>>()
    });
    Ok(selected
        .iter()
        .zip(reports)
        .map(|(&(_, check), (outcome, elapsed))| {
            let (residual, mut meta) = match outcome {
                Ok(o) => (o.residual, o.metadata),
                Err(e) => (f64::INFINITY, Map::from_iter([("error".to_string(), Value::from(e.to_string()))])),
            };
            meta.insert("suite".into(), check.suite.as_str().into());
            meta.insert("seed".into(), config.seed.into());
            meta.insert("parameters".into(), Value::Object(params.clone()));
            meta.insert("elapsed_ms".into(), Value::from(elapsed.as_secs_f64() * 1e3));
            VerificationReport::new(check.name, residual, config.tolerance(check), meta)
        })
        .collect())
}

pub const REPORT_CSV_HEADER: [&str; 4] = ["check_name", "residual", "tolerance", "passed"];

/// Writes `report.json` or `report.csv` into the output directory and
/// returns the path written.
pub fn emit(reports: &[VerificationReport], config: &RunConfig) -> Result<PathBuf> {
    fs::create_dir_all(&config.output_dir).map_err(|e| io_error(&config.output_dir, e))?;
    let (path, bytes) = match config.format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(reports).map_err(|e| Error::Io(e.to_string()))?;
            text.push('\n');
            (config.output_dir.join("report.json"), text.into_bytes())
        }
        Format::Csv => {
            let mut w = data::csv_writer(Vec::new());
            w.write_record(REPORT_CSV_HEADER).map_err(data::csv_error)?;
            for r in reports {
                w.write_record([r.check_name.clone(), r.residual.to_string(), r.tolerance.to_string(), r.passed.to_string()])
                    .map_err(data::csv_error)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
            (config.output_dir.join("report.csv"), bytes)
        }
    };
    fs::write(&path, bytes).map_err(|e| io_error(&path, e))?;
    Ok(path)
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}
