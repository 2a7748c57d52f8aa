//! JSON experiment configs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funclib::{FunctionSpec, SampledFunction, TanhAtom};
use crate::grid::{Grid, DEFAULT_HALF_WIDTH, DEFAULT_NODES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionDescriptor {
    TanhMixture {
        atoms: Vec<TanhAtom>,
        #[serde(default)]
        offset: f64,
    },
    /// CSV with header `x,value,derivative`; relative paths resolve against the config file.
    Sampled { path: PathBuf },
}

impl FunctionDescriptor {
    pub fn mixture(atoms: Vec<TanhAtom>) -> Self {
        FunctionDescriptor::TanhMixture { atoms, offset: 0.0 }
    }

    pub fn build(&self, base_dir: &Path) -> Result<FunctionSpec> {
        match self {
            FunctionDescriptor::TanhMixture { atoms, offset } => Ok(FunctionSpec::mixture(atoms.clone(), *offset)),
            FunctionDescriptor::Sampled { path } => {
                let path = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                SampledFunction::read_csv(&path)
                    .map(FunctionSpec::sampled)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { half_width: DEFAULT_HALF_WIDTH, n: DEFAULT_NODES }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.half_width, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    F,
    G,
}

fn default_tol() -> f64 {
    1e-6
}

fn default_strip_tol() -> f64 {
    0.05
}

fn default_moment_tol() -> f64 {
    1e-8
}

fn default_levels() -> usize {
    crate::katoclass::DEFAULT_HERGLOTZ_LEVELS
}

fn default_f() -> Which {
    Which::F
}

/// One analysis. Parameterless ops may be written as bare strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Op {
    Spectrum,
    AssertRank {
        rank: usize,
    },
    AssertPositive,
    AssertTopEigenvalue {
        value: f64,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    AssertMinEigenvalue {
        value: f64,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    DiagonalIdentity {
        #[serde(default = "default_tol")]
        tol: f64,
    },
    Duality {
        #[serde(default = "default_tol")]
        tol: f64,
    },
    StripProduct {
        #[serde(default)]
        target: Option<f64>,
        #[serde(default = "default_strip_tol")]
        tol: f64,
    },
    ExpMoment {
        s: f64,
        #[serde(default = "default_f")]
        of: Which,
        #[serde(default)]
        expect: Option<f64>,
        #[serde(default = "default_moment_tol")]
        tol: f64,
    },
    Herglotz {
        r: f64,
        #[serde(default = "default_levels")]
        levels: usize,
    },
    MeasureFit {
        r_hat: f64,
        #[serde(default)]
        max_residual: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub f: FunctionDescriptor,
    pub g: FunctionDescriptor,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_ops")]
    pub ops: Vec<Op>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Directory that relative sampled-data paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_ops() -> Vec<Op> {
    vec![Op::Spectrum]
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_json(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }
}

/// One swept parameter: `"f.atoms.1.weight"`, `"g.atoms.0.scale"`, `"f.offset"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub f: FunctionDescriptor,
    pub g: FunctionDescriptor,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub axes: Vec<SweepAxis>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ScanConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }

    /// `g = tanh`, `f = tanh(a·) + β tanh(π·)` over a grid of `a` and `β`.
    pub fn default_sweep() -> Self {
        let atom = |scale, weight| TanhAtom::new(scale, 0.0, weight).expect("valid atom");
        ScanConfig {
            f: FunctionDescriptor::mixture(vec![atom(std::f64::consts::FRAC_PI_2, 1.0), atom(std::f64::consts::PI, 0.1)]),
            g: FunctionDescriptor::mixture(vec![atom(1.0, 1.0)]),
            grid: GridConfig { half_width: 20.0, n: 401 },
            axes: vec![
                SweepAxis { param: "f.atoms.0.scale".into(), values: vec![1.2, 1.4, std::f64::consts::FRAC_PI_2, 1.8, 2.0] },
                SweepAxis { param: "f.atoms.1.weight".into(), values: vec![0.01, 0.05, 0.1] },
            ],
            out_dir: None,
        }
    }
}
