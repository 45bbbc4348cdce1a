//! The `chisini-model/1` JSON model file and name resolution.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::audit::{AuditConfig, Caps, Status};
use crate::error::Error;
use crate::functional::{Choquet, GridTable, PreferenceFunctional};
use crate::measure::{Act, FiniteSpace, PartitionAlgebra};
use crate::utility::{AdditiveRepresentation, Curve, KnotTable, StateUtility};

pub const MODEL_VERSION: &str = "chisini-model/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: String,
    pub space: SpaceSpec,
    #[serde(default)]
    pub utilities: BTreeMap<String, UtilitySpec>,
    #[serde(default)]
    pub partitions: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default)]
    pub acts: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub functionals: BTreeMap<String, FunctionalSpec>,
    #[serde(default)]
    pub settings: Settings,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub outcomes: Vec<String>,
    /// Decimal strings, e.g. "0.25".
    pub weights: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum UtilitySpec {
    /// The same curve in every state.
    Curve(CurveSpec),
    /// One curve per outcome, in outcome order.
    PerOutcome(Vec<CurveSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    Linear,
    Exponential { gamma: f64 },
    PowerOdd { p: f64 },
    Table { knots: Vec<(f64, f64)>, left_slope: f64, right_slope: f64 },
}

impl CurveSpec {
    pub fn to_curve(&self) -> Result<Curve, Error> {
        Ok(match self {
            CurveSpec::Linear => Curve::Linear,
            CurveSpec::Exponential { gamma } => Curve::Exponential { gamma: *gamma },
            CurveSpec::PowerOdd { p } => Curve::PowerOdd { p: *p },
            CurveSpec::Table { knots, left_slope, right_slope } => {
                Curve::Table(KnotTable::new(knots.clone(), *left_slope, *right_slope).map_err(resolution)?)
            }
        })
    }

    /// Inverse of `to_curve`; mixtures have no file form.
    pub fn from_curve(c: &Curve) -> Option<CurveSpec> {
        Some(match c {
            Curve::Linear => CurveSpec::Linear,
            Curve::Exponential { gamma } => CurveSpec::Exponential { gamma: *gamma },
            Curve::PowerOdd { p } => CurveSpec::PowerOdd { p: *p },
            Curve::Table(t) => {
                CurveSpec::Table { knots: t.knots().to_vec(), left_slope: t.left_slope(), right_slope: t.right_slope() }
            }
            Curve::Mixture { .. } => return None,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionalSpec {
    ExpectedUtility {
        utility: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Profile>,
    },
    Choquet {
        exponent: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        utility: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Profile>,
    },
    /// Values on grid acts in lexicographic order, outcome 0 most significant.
    GridTable {
        grid: Vec<f64>,
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Profile>,
    },
}

impl FunctionalSpec {
    pub fn expect(&self) -> Option<&Profile> {
        match self {
            FunctionalSpec::ExpectedUtility { expect, .. }
            | FunctionalSpec::Choquet { expect, .. }
            | FunctionalSpec::GridTable { expect, .. } => expect.as_ref(),
        }
    }
}

/// Expected audit verdicts; omitted entries are not compared.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict_monotonicity: Option<Status>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sure_thing: Option<Status>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditionable: Option<Status>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Settings {
    pub grid: Vec<f64>,
    pub tol: f64,
    pub margin: f64,
    pub max_outcomes: usize,
    pub max_grid: usize,
    pub epsilon: f64,
    pub bound: f64,
}

impl Default for Settings {
    fn default() -> Self {
        let caps = Caps::default();
        Settings {
            grid: vec![-1.0, 0.0, 1.0],
            tol: 1e-9,
            margin: 1e-9,
            max_outcomes: caps.max_outcomes,
            max_grid: caps.max_grid,
            epsilon: 0.5,
            bound: crate::forge::DEFAULT_BOUND,
        }
    }
}

impl Settings {
    pub fn audit_config(&self) -> AuditConfig {
        AuditConfig {
            grid: self.grid.clone(),
            margin: self.margin,
            tol: self.tol,
            caps: Caps { max_outcomes: self.max_outcomes, max_grid: self.max_grid },
            ..AuditConfig::default()
        }
    }
}

fn resolution(msg: impl Into<String>) -> Error {
    Error::PreconditionFailed(msg.into())
}

/// A parsed model with the probability space built.
pub struct Model {
    pub file: ModelFile,
    pub space: Arc<FiniteSpace>,
}

#[derive(Debug)]
pub enum LoadError {
    Io(String),
    Schema { path: String, message: String },
    Invalid(String),
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadError::Io(m) => write!(f, "cannot read model: {m}"),
            LoadError::Schema { path, message } => write!(f, "schema error at {path}: {message}"),
            LoadError::Invalid(m) => write!(f, "invalid model: {m}"),
        }
    }
}

impl Model {
    pub fn parse(text: &str) -> Result<Model, LoadError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ModelFile = serde_path_to_error::deserialize(de)
            .map_err(|e| LoadError::Schema { path: e.path().to_string(), message: e.inner().to_string() })?;
        if file.version != MODEL_VERSION {
            return Err(LoadError::Schema {
                path: "version".into(),
                message: format!("expected \"{MODEL_VERSION}\", found \"{}\"", file.version),
            });
        }
        let weights = file
            .space
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                w.trim().parse::<f64>().map_err(|_| LoadError::Schema {
                    path: format!("space.weights[{i}]"),
                    message: format!("\"{w}\" is not a decimal number"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let space =
            FiniteSpace::new(file.space.outcomes.clone(), weights).map_err(|e| LoadError::Invalid(e.to_string()))?;
        Ok(Model { file, space })
    }

    pub fn load(path: &std::path::Path) -> Result<Model, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
        Model::parse(&text)
    }

    pub fn utility(&self, name: &str) -> Result<StateUtility, Error> {
        let spec = self.file.utilities.get(name).ok_or_else(|| resolution(format!("unknown utility \"{name}\"")))?;
        match spec {
            UtilitySpec::Curve(c) => Ok(StateUtility::state_independent(&self.space, c.to_curve()?)),
            UtilitySpec::PerOutcome(cs) => {
                if cs.len() != self.space.len() {
                    return Err(resolution(format!(
                        "utility \"{name}\" has {} curves for {} outcomes",
                        cs.len(),
                        self.space.len()
                    )));
                }
                StateUtility::new(&self.space, cs.iter().map(CurveSpec::to_curve).collect::<Result<_, _>>()?)
            }
        }
    }

    /// Named partition; "trivial" and "finest" are built in unless defined.
    pub fn partition(&self, name: &str) -> Result<PartitionAlgebra, Error> {
        match self.file.partitions.get(name) {
            Some(atoms) => PartitionAlgebra::from_labels(&self.space, atoms),
            None if name == "trivial" => Ok(PartitionAlgebra::trivial(&self.space)),
            None if name == "finest" => Ok(PartitionAlgebra::finest(&self.space)),
            None => Err(resolution(format!("unknown partition \"{name}\""))),
        }
    }

    pub fn act(&self, name: &str) -> Result<Act, Error> {
        let values = self.file.acts.get(name).ok_or_else(|| resolution(format!("unknown act \"{name}\"")))?;
        Act::new(&self.space, values.clone())
    }

    pub fn functional(&self, name: &str) -> Result<Box<dyn PreferenceFunctional>, Error> {
        let spec =
            self.file.functionals.get(name).ok_or_else(|| resolution(format!("unknown functional \"{name}\"")))?;
        Ok(match spec {
            FunctionalSpec::ExpectedUtility { utility, .. } => {
                Box::new(AdditiveRepresentation::new(self.utility(utility)?))
            }
            FunctionalSpec::Choquet { exponent, utility, .. } => {
                let c = Choquet::new(&self.space, *exponent)?;
                match utility {
                    Some(u) => Box::new(c.with_utility(self.utility(u)?)?),
                    None => Box::new(c),
                }
            }
            FunctionalSpec::GridTable { grid, values, .. } => {
                Box::new(GridTable::new(&self.space, grid.clone(), values.clone())?)
            }
        })
    }

    /// Resolves every reference in the file.
    pub fn check_references(&self) -> Result<(), Error> {
        for name in self.file.utilities.keys() {
            self.utility(name)?;
        }
        for name in self.file.partitions.keys() {
            self.partition(name)?;
        }
        for name in self.file.acts.keys() {
            self.act(name)?;
        }
        for name in self.file.functionals.keys() {
            self.functional(name)?;
        }
        Ok(())
    }
}
