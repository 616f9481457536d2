//! Run configuration shared by the command line and the examples: a JSON
//! file whose keys mirror [`RunConfig`], with every key optional.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coupling::min_lambda_nonneg;
use crate::error::{Error, Result};
use crate::factor::{blue_share, FactorConfig, FactorMode};
use crate::geometry::{unit_ball_volume, Cuboid, Point};
use crate::randomness::UnitValue;
use crate::selection::SelectionConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Desk,
    Paper,
}

/// Selection parameters: a preset name, a preset with an explicit globe
/// radius, or every field spelled out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SelectionChoice {
    Preset(Preset),
    Scaled { preset: Preset, radius: f64 },
    Explicit(SelectionConfig),
}

/// Axis-parallel window `[lo, hi]`; a single pair stands for the cube
/// `[lo, hi]^dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowSpec {
    Cube([f64; 2]),
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub points: Option<PathBuf>,
    pub red: Option<PathBuf>,
    pub blue: Option<PathBuf>,
    pub globes: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub lambda: f64,
    pub lambda_prime: f64,
    pub window: WindowSpec,
    pub selection: SelectionChoice,
    pub mode: FactorMode,
    pub margin: f64,
    pub master_seed: UnitValue,
    pub outputs: OutputPaths,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 1,
            lambda: 6.0,
            lambda_prime: 3.0,
            window: WindowSpec::Cube([-1000.0, 1000.0]),
            selection: SelectionChoice::Preset(Preset::Desk),
            mode: FactorMode::SplitFactor,
            margin: 200.0,
            master_seed: UnitValue::from_f64(0.5),
            outputs: OutputPaths::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn window(&self) -> Result<Cuboid> {
        let (lo, hi) = match &self.window {
            WindowSpec::Cube([a, b]) => (vec![*a; self.dim], vec![*b; self.dim]),
            WindowSpec::Box { lo, hi } => (lo.clone(), hi.clone()),
        };
        if lo.len() != self.dim || hi.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: lo.len().max(hi.len()) });
        }
        if !lo.iter().zip(&hi).all(|(a, b)| a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidConfig("window needs finite lo < hi in every coordinate".into()));
        }
        Ok(Cuboid::new(Point::new(lo), Point::new(hi)))
    }

    /// Default paper radius for splitting: the globe mean exceeds the
    /// nonnegativity threshold by one.
    fn paper_radius(&self) -> Result<f64> {
        if self.mode != FactorMode::SplitFactor || self.lambda_prime >= self.lambda {
            return Ok(1.0);
        }
        let k = min_lambda_nonneg(blue_share(self.lambda, self.lambda_prime))?;
        Ok(((k + 1.0) / (self.lambda * unit_ball_volume(self.dim))).powf(1.0 / self.dim as f64))
    }

    pub fn selection(&self) -> Result<SelectionConfig> {
        Ok(match &self.selection {
            SelectionChoice::Preset(Preset::Desk) => SelectionConfig::desk(),
            SelectionChoice::Preset(Preset::Paper) => SelectionConfig::paper(self.dim, self.paper_radius()?),
            SelectionChoice::Scaled { preset: Preset::Desk, radius } => SelectionConfig::desk_with_radius(*radius),
            SelectionChoice::Scaled { preset: Preset::Paper, radius } => SelectionConfig::paper(self.dim, *radius),
            SelectionChoice::Explicit(s) => s.clone(),
        })
    }

    pub fn factor(&self) -> Result<FactorConfig> {
        let mut f = FactorConfig::new(self.lambda, self.lambda_prime, self.selection()?, self.mode);
        f.margin = self.margin;
        Ok(f)
    }

    /// Checks the window and the factor configuration.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidConfig("dim must be at least 1".into()));
        }
        self.window()?;
        self.factor()?.validate(self.dim)
    }

    /// Basic checks only, for commands that never run a factor map.
    pub fn validate_sampling(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidConfig("dim must be at least 1".into()));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig("lambda must be positive and finite".into()));
        }
        self.window().map(|_| ())
    }
}
