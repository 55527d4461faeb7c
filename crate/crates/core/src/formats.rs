//! JSON file schemas shared between the library and the command-line
//! front end.
//!
//! Each schema is a plain serde struct plus a checked conversion into the
//! corresponding domain type, so malformed files fail at the boundary
//! with a parse or shape error instead of deep inside a computation.

use serde::{Deserialize, Serialize};

use crate::alpha::AlphaModel;
use crate::error::{Error, Result};
use crate::game::{BimatrixGame, MixedStrategy, PayoffMatrix, Profile};

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        message: e.to_string(),
    }
}

/// On-disk bimatrix game: row-major payoff grids for both players, plus
/// optional strategy labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameFile {
    #[serde(rename = "payoff_A")]
    pub payoff_a: PayoffMatrix,
    #[serde(rename = "payoff_B")]
    pub payoff_b: PayoffMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub col_labels: Option<Vec<String>>,
}

impl GameFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GameFile = serde_json::from_str(text).map_err(json_err)?;
        file.to_game()?;
        if let Some(labels) = &file.row_labels
            && labels.len() != file.payoff_a.n_rows()
        {
            return Err(Error::Shape(format!(
                "{} row labels for {} rows",
                labels.len(),
                file.payoff_a.n_rows()
            )));
        }
        if let Some(labels) = &file.col_labels
            && labels.len() != file.payoff_a.n_cols()
        {
            return Err(Error::Shape(format!(
                "{} column labels for {} columns",
                labels.len(),
                file.payoff_a.n_cols()
            )));
        }
        Ok(file)
    }

    pub fn to_game(&self) -> Result<BimatrixGame> {
        BimatrixGame::new(self.payoff_a.clone(), self.payoff_b.clone())
    }
}

/// On-disk bonus model. `budget` and `labels` serialize as explicit
/// nulls when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub budget: Option<f64>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(json_err)?;
        file.to_model()?;
        if let Some(labels) = &file.labels
            && labels.len() != file.a.len()
        {
            return Err(Error::Shape(format!(
                "{} labels for {} strategies",
                labels.len(),
                file.a.len()
            )));
        }
        Ok(file)
    }

    pub fn to_model(&self) -> Result<AlphaModel> {
        match self.budget {
            Some(budget) => AlphaModel::with_budget(self.a.clone(), self.b.clone(), budget),
            None => AlphaModel::new(self.a.clone(), self.b.clone()),
        }
    }

    pub fn from_model(model: &AlphaModel, labels: Option<Vec<String>>) -> Self {
        Self {
            a: model.a().to_vec(),
            b: model.b().to_vec(),
            budget: model.budget(),
            labels,
        }
    }
}

/// On-disk strategy profile: `p` over rows, `q` over columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl ProfileFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProfileFile = serde_json::from_str(text).map_err(json_err)?;
        file.to_profile()?;
        Ok(file)
    }

    pub fn to_profile(&self) -> Result<Profile> {
        Ok(Profile::new(
            MixedStrategy::new(self.p.clone())?,
            MixedStrategy::new(self.q.clone())?,
        ))
    }
}

/// One row of a shift run report: the bonus move, the exact gain
/// accounting, and both first-order estimates. `step` counts from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftStepRecord {
    pub step: usize,
    pub b_before: Vec<f64>,
    pub b_after: Vec<f64>,
    pub gain_before: f64,
    pub gain_after: f64,
    pub predicted_delta: f64,
    pub actual_delta: f64,
    pub threshold_w: f64,
    pub q_weighted_estimate: f64,
}
