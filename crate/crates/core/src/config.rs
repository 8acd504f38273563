//! Run configuration: TOML file values overridden by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algebra::EuclideanAlgebraElement;
use crate::energy::EnergyParams;
use crate::error::{Error, Result};
use crate::field::{k_axis, SpinField, DEFAULT_LAYER};
use crate::generators::{
    gaussian_profile, make_bp_soliton, make_constant, make_radial_profile, make_random, max_cutoff,
};
use crate::grid::Grid;
use crate::integrator::{Scheme, SimConfig};
use crate::so3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Init,
    Simulate,
    Diagnose,
    BracketCheck,
    Cocycle,
    LiftCheck,
}

impl Command {
    /// Default PASS/FAIL tolerance of the checking subcommands.
    pub fn default_tol(self) -> f64 {
        match self {
            Command::BracketCheck => 0.03,
            Command::Cocycle => 0.01,
            Command::LiftCheck => 0.02,
            _ => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Constant,
    Bp,
    Radial,
    Random,
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Kind::Constant),
            "bp" => Ok(Kind::Bp),
            "radial" => Ok(Kind::Radial),
            "random" => Ok(Kind::Random),
            _ => Err(Error::Config(format!("kind: unknown generator `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
}

/// Every settable key. Used both for the TOML file and for flag overrides.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    pub grid: Option<String>,
    #[serde(rename = "box")]
    pub box_len: Option<f64>,
    pub kind: Option<Kind>,
    pub m: Option<i32>,
    pub lambda: Option<f64>,
    pub cutoff: Option<f64>,
    pub amplitude: Option<f64>,
    pub value: Option<String>,
    pub a: Option<f64>,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub scheme: Option<Scheme>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    pub report_every: Option<usize>,
    pub e1: Option<String>,
    pub e2: Option<String>,
    pub format: Option<Format>,
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().replace('\n', " ")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("config `{}`: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Values set in `over` replace those in `self`.
    pub fn merge(self, over: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            grid, box_len, kind, m, lambda, cutoff, amplitude, value, a, dt, steps, scheme, seed, tol,
            out, input, report_every, e1, e2, format
        )
    }
}

/// Which initial field to build.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorSpec {
    pub kind: Kind,
    pub m: i32,
    pub lambda: f64,
    pub cutoff: f64,
    pub amplitude: f64,
    pub seed: u64,
    pub value: [f64; 3],
}

/// Fully resolved configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub dims: Vec<usize>,
    #[serde(rename = "box")]
    pub box_len: f64,
    pub generator: GeneratorSpec,
    pub sim: SimConfig,
    pub tol: f64,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub e1: Option<String>,
    pub e2: Option<String>,
    pub format: Format,
}

fn parse_grid(s: &str) -> Result<Vec<usize>> {
    let dims: Vec<usize> = s
        .split('x')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("grid: `{s}` is not of the form NxN[xN]")))?;
    if !(1..=3).contains(&dims.len()) {
        return Err(Error::Config(format!("grid: `{s}` must have 1 to 3 axes")));
    }
    Ok(dims)
}

fn parse_vec3(s: &str) -> Result<[f64; 3]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("value: `{s}` is not x,y,z")))?;
    match v.as_slice() {
        [x, y, z] => Ok([*x, *y, *z]),
        _ => Err(Error::Config(format!("value: `{s}` needs three components"))),
    }
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("{key}: {v} must be positive")))
    }
}

impl RunConfig {
    /// Applies defaults and validates ranges. Each error names its key.
    pub fn resolve(command: Command, s: Settings) -> Result<Self> {
        let dims = parse_grid(s.grid.as_deref().unwrap_or("96x96"))?;
        let box_len = positive("box", s.box_len.unwrap_or(16.0))?;
        let grid = Grid::centered(&dims, &vec![box_len; dims.len()])
            .map_err(|e| Error::Config(format!("grid: {e}")))?;
        let limit = max_cutoff(&grid, DEFAULT_LAYER);
        let cutoff = match s.cutoff {
            Some(c) => positive("cutoff", c)?,
            None => limit,
        };
        if cutoff > limit {
            return Err(Error::Config(format!(
                "cutoff: {cutoff} exceeds {limit:.6} for this grid and box"
            )));
        }
        let lambda = positive("lambda", s.lambda.unwrap_or(1.5))?;
        let amplitude = s.amplitude.unwrap_or(2.0);
        if !(0.0..std::f64::consts::PI).contains(&amplitude) {
            return Err(Error::Config(format!("amplitude: {amplitude} not in [0, π)")));
        }
        let value = match &s.value {
            Some(v) => parse_vec3(v)?,
            None => [0.0, 0.0, -1.0],
        };
        let a = s.a.unwrap_or(0.0);
        let params = EnergyParams::new(a).map_err(|e| Error::Config(format!("a: {e}")))?;
        let sim = SimConfig {
            dt: positive("dt", s.dt.unwrap_or(1e-3))?,
            steps: s.steps.unwrap_or(1000),
            scheme: s.scheme.unwrap_or_default(),
            report_every: s.report_every.unwrap_or(100),
            params,
        };
        if sim.report_every == 0 {
            return Err(Error::Config("report-every: must be at least 1".into()));
        }
        let tol = match s.tol {
            Some(t) => positive("tol", t)?,
            None => command.default_tol(),
        };
        if let (Some(i), Some(o)) = (&s.input, &s.out) {
            if i == o {
                return Err(Error::Config(format!(
                    "out: `{}` is also the input path",
                    o.display()
                )));
            }
        }
        for (key, e) in [("e1", &s.e1), ("e2", &s.e2)] {
            if let Some(t) = e {
                t.parse::<EuclideanAlgebraElement>()
                    .map_err(|err| Error::Config(format!("{key}: {err}")))?;
            }
        }
        Ok(Self {
            command,
            dims,
            box_len,
            generator: GeneratorSpec {
                kind: s.kind.unwrap_or(Kind::Bp),
                m: s.m.unwrap_or(1),
                lambda,
                cutoff,
                amplitude,
                seed: s.seed.unwrap_or(0),
                value,
            },
            sim,
            tol,
            input: s.input,
            out: s.out,
            e1: s.e1,
            e2: s.e2,
            format: s.format.unwrap_or(Format::Text),
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::centered(&self.dims, &vec![self.box_len; self.dims.len()])
    }

    /// Builds the configured initial field.
    pub fn generate(&self) -> Result<SpinField> {
        let grid = self.grid()?;
        let g = &self.generator;
        match g.kind {
            Kind::Constant => {
                let v = Vec3::new(g.value[0], g.value[1], g.value[2]);
                if v == -k_axis() {
                    make_constant(&grid, v)
                } else {
                    make_constant(&grid, v.normalize())
                }
            }
            Kind::Bp => make_bp_soliton(&grid, g.m, g.lambda, g.cutoff),
            Kind::Radial => make_radial_profile(&grid, gaussian_profile(g.amplitude, g.lambda, g.cutoff)),
            Kind::Random => make_random(&grid, g.seed, g.amplitude, g.cutoff),
        }
    }

    /// Deterministic TOML rendering of the resolved configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("resolved configuration serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let e = Settings::from_toml("grid = \"32x32\"\nfoo = 1\n").unwrap_err();
        assert!(e.to_string().contains("foo"), "{e}");
    }

    #[test]
    fn flags_override_file() {
        let file = Settings::from_toml("grid = \"32x32\"\ndt = 0.01\nm = 2\n").unwrap();
        let flags = Settings {
            dt: Some(0.002),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Command::Simulate, file.merge(flags)).unwrap();
        assert_eq!(cfg.sim.dt, 0.002);
        assert_eq!(cfg.generator.m, 2);
        assert_eq!(cfg.dims, vec![32, 32]);
        assert!(cfg.to_toml().contains("dt = 0.002"));
    }

    #[test]
    fn range_errors_name_the_key() {
        let bad = |s: Settings| RunConfig::resolve(Command::Init, s).unwrap_err().to_string();
        assert!(bad(Settings { dt: Some(-1.0), ..Default::default() }).contains("dt"));
        assert!(bad(Settings { grid: Some("12y12".into()), ..Default::default() }).contains("grid"));
        assert!(bad(Settings { cutoff: Some(100.0), ..Default::default() }).contains("cutoff"));
        assert!(bad(Settings { e1: Some("1;2".into()), ..Default::default() }).contains("e1"));
        let same = Settings {
            input: Some("a.llgf".into()),
            out: Some("a.llgf".into()),
            ..Default::default()
        };
        assert!(bad(same).contains("out"));
    }

    #[test]
    fn toml_is_deterministic() {
        let a = RunConfig::resolve(Command::Init, Settings::default()).unwrap();
        let b = RunConfig::resolve(Command::Init, Settings::default()).unwrap();
        assert_eq!(a.to_toml(), b.to_toml());
    }
}
