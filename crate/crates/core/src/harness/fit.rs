//! Least-squares scaling fits of samples-to-convergence against S.

use std::collections::BTreeMap;

use serde::Serialize;

use super::aggregate::SummaryRow;
use super::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ScalingModel {
    /// `c · S · A · ln A`
    #[serde(rename = "SAlogA")]
    SALogA,
    /// `c · S · A · ln(S · A)`
    #[serde(rename = "SAlogSA")]
    SALogSA,
}

impl ScalingModel {
    pub const ALL: [ScalingModel; 2] = [ScalingModel::SALogA, ScalingModel::SALogSA];

    pub fn feature(self, states: usize, actions: usize) -> f64 {
        let (s, a) = (states as f64, actions as f64);
        match self {
            ScalingModel::SALogA => s * a * a.ln(),
            ScalingModel::SALogSA => s * a * (s * a).ln(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScalingModel::SALogA => "SAlogA",
            ScalingModel::SALogSA => "SAlogSA",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelFit {
    pub model: ScalingModel,
    /// Least-squares coefficient of the through-origin fit.
    pub coefficient: f64,
    /// Euclidean norm of the residuals.
    pub residual_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnerFit {
    pub learner: String,
    pub sizes: Vec<usize>,
    pub fits: Vec<ModelFit>,
    /// Model with the lower residual norm; ties to `SAlogA`.
    pub better: ScalingModel,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub actions: usize,
    pub learners: Vec<LearnerFit>,
}

/// Fits `y ≈ c · feature(S, A)` over `(S, y)` points.
pub fn fit_model(points: &[(usize, f64)], actions: usize, model: ScalingModel) -> ModelFit {
    let xs: Vec<f64> = points
        .iter()
        .map(|&(s, _)| model.feature(s, actions))
        .collect();
    let sxy: f64 = xs.iter().zip(points).map(|(x, (_, y))| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let coefficient = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let residual_norm = xs
        .iter()
        .zip(points)
        .map(|(x, (_, y))| (y - coefficient * x).powi(2))
        .sum::<f64>()
        .sqrt();
    ModelFit {
        model,
        coefficient,
        residual_norm,
    }
}

/// Fits both models per learner over its converged sizes. A learner with
/// fewer than 3 sizes is an [`HarnessError::InsufficientData`].
pub fn fit_scaling(summary: &[SummaryRow], actions: usize) -> Result<FitReport, HarnessError> {
    let mut by_learner: BTreeMap<&str, Vec<(usize, f64)>> = BTreeMap::new();
    for row in summary {
        let entry = by_learner.entry(row.learner.as_str()).or_default();
        if let Some(m) = row.mean_samples {
            entry.push((row.states, m));
        }
    }
    let mut learners = Vec::new();
    for (learner, mut points) in by_learner {
        points.sort_by_key(|p| p.0);
        points.dedup_by_key(|p| p.0);
        if points.len() < 3 {
            return Err(HarnessError::InsufficientData {
                learner: learner.to_string(),
                sizes: points.len(),
            });
        }
        let fits: Vec<ModelFit> = ScalingModel::ALL
            .iter()
            .map(|&m| fit_model(&points, actions, m))
            .collect();
        let better = if fits[1].residual_norm < fits[0].residual_norm {
            ScalingModel::SALogSA
        } else {
            ScalingModel::SALogA
        };
        learners.push(LearnerFit {
            learner: learner.to_string(),
            sizes: points.iter().map(|p| p.0).collect(),
            fits,
            better,
        });
    }
    Ok(FitReport { actions, learners })
}
