//! Budget-preserving bonus reallocation.
//!
//! At the interior equilibrium the answering side's gain `H(b) = 1 /
//! sum_k (1/b_k)` has the remarkably simple gradient `dH/db_k = p_k^2`,
//! the squared asking-side frequencies. Projecting the gradient onto the
//! fixed-budget plane gives the steepest admissible direction
//!
//! ```text
//! delta_b_k = p_k^2 - w,    w = mean_j (p_j^2)
//! ```
//!
//! which sums to zero, moves bonus mass toward the heavily-asked topics
//! (`delta_b_k > 0` exactly when `p_k^2 > w`), and improves the gain to
//! first order by `epsilon * sum_k p_k^2 * delta_b_k`, an inner product
//! that equals `epsilon * ||delta_b||^2` and is therefore never negative.
//! [`apply`] takes one guarded step along the direction and recomputes
//! the model exactly; [`iterate`] chains steps until they stop paying.

use crate::alpha::AlphaModel;
use crate::error::{Error, Result};
use crate::game::MixedStrategy;

/// Fraction of the per-topic budget share `budget / n` kept as the hard
/// positivity floor during a step.
pub const FLOOR_FRACTION: f64 = 1e-9;

/// A proposed reallocation: the zero-sum direction, the squared-frequency
/// threshold separating gainers from losers, and the first-order gain
/// prediction for step size `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPlan {
    pub epsilon: f64,
    pub delta_b: Vec<f64>,
    pub threshold: f64,
    pub predicted_gain_delta: f64,
}

/// One applied step: the models on both ends, the plan that produced it,
/// and the exact gain accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftOutcome {
    pub model_before: AlphaModel,
    pub model_after: AlphaModel,
    pub plan: ShiftPlan,
    pub gain_before: f64,
    pub gain_after: f64,
    pub actual_delta: f64,
}

impl ShiftOutcome {
    pub fn predicted_delta(&self) -> f64 {
        self.plan.predicted_gain_delta
    }
}

/// Why [`iterate`] stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    /// All requested steps ran.
    Completed,
    /// The last step moved the gain by less than the stop tolerance.
    Converged,
    /// The next step would push a bonus to the positivity floor;
    /// `max_epsilon` is the largest step size that direction admits.
    StepTooLarge { max_epsilon: f64 },
}

/// The steps actually taken, plus why the loop ended.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTrace {
    pub outcomes: Vec<ShiftOutcome>,
    pub stop: StopReason,
}

impl ShiftTrace {
    /// Model after the last applied step, if any step ran.
    pub fn final_model(&self) -> Option<&AlphaModel> {
        self.outcomes.last().map(|o| &o.model_after)
    }
}

/// Gradient of the equilibrium gain with respect to each bonus: the
/// squared asking-side equilibrium frequencies.
pub fn gain_gradient(model: &AlphaModel) -> Vec<f64> {
    model
        .equilibrium()
        .p()
        .probs()
        .iter()
        .map(|&p| p * p)
        .collect()
}

/// Budget-neutral steepest direction for `model`, with the first-order
/// gain prediction at step size `epsilon`.
pub fn direction(model: &AlphaModel, epsilon: f64) -> Result<ShiftPlan> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::Parameter(format!(
            "epsilon must be finite and positive, got {epsilon}"
        )));
    }
    let psq = gain_gradient(model);
    // When every squared frequency is the same value the mean is that
    // value; taking this branch keeps the stationary direction exactly
    // zero instead of within rounding of it.
    let first = psq[0];
    let threshold = if psq.iter().all(|&x| x == first) {
        first
    } else {
        psq.iter().sum::<f64>() / psq.len() as f64
    };
    let delta_b: Vec<f64> = psq.iter().map(|&x| x - threshold).collect();
    let predicted_gain_delta =
        epsilon * psq.iter().zip(&delta_b).map(|(&g, &d)| g * d).sum::<f64>();
    Ok(ShiftPlan {
        epsilon,
        delta_b,
        threshold,
        predicted_gain_delta,
    })
}

/// Take one step of size `epsilon` along the model's shift direction.
///
/// The step keeps every bonus at or above `FLOOR_FRACTION * budget / n`
/// — a step that cannot honor the floor fails with
/// [`Error::StepTooLarge`] carrying the largest admissible `epsilon` —
/// and renormalizes the result to the budget exactly. The model's
/// declared budget is used when present; otherwise the current bonus
/// total is adopted.
pub fn apply(model: &AlphaModel, epsilon: f64) -> Result<ShiftOutcome> {
    let plan = direction(model, epsilon)?;
    let budget = model.effective_budget();
    let floor = FLOOR_FRACTION * budget / model.n() as f64;

    let mut max_epsilon = f64::INFINITY;
    for (&b, &d) in model.b().iter().zip(&plan.delta_b) {
        if d < 0.0 {
            max_epsilon = max_epsilon.min((b - floor) / -d);
        }
    }
    if epsilon > max_epsilon {
        return Err(Error::StepTooLarge {
            requested: epsilon,
            max_epsilon,
        });
    }

    let stepped: Vec<f64> = model
        .b()
        .iter()
        .zip(&plan.delta_b)
        .map(|(&b, &d)| b + epsilon * d)
        .collect();
    let model_after = AlphaModel::new(model.a().to_vec(), stepped)?.normalize_to_budget(budget)?;

    let gain_before = model.provider_gain();
    let gain_after = model_after.provider_gain();
    Ok(ShiftOutcome {
        model_before: model.clone(),
        model_after,
        plan,
        gain_before,
        gain_after,
        actual_delta: gain_after - gain_before,
    })
}

/// Run up to `steps` shift steps of size `epsilon`, recomputing the
/// equilibrium after each one.
///
/// The loop stops early (without error) when a step moves the gain by
/// less than `stop_tolerance` in absolute value, or when the next step
/// would cross the positivity floor; [`ShiftTrace::stop`] records which.
/// Parameter errors — a non-positive `epsilon`, zero `steps`, a negative
/// tolerance — are real failures.
pub fn iterate(
    model: &AlphaModel,
    epsilon: f64,
    steps: usize,
    stop_tolerance: f64,
) -> Result<ShiftTrace> {
    if steps == 0 {
        return Err(Error::Parameter("steps must be at least 1".into()));
    }
    if !stop_tolerance.is_finite() || stop_tolerance < 0.0 {
        return Err(Error::Parameter(format!(
            "stop tolerance must be finite and non-negative, got {stop_tolerance}"
        )));
    }
    let mut outcomes = Vec::new();
    let mut current = model.clone();
    for _ in 0..steps {
        match apply(&current, epsilon) {
            Ok(outcome) => {
                current = outcome.model_after.clone();
                let delta = outcome.actual_delta;
                outcomes.push(outcome);
                if delta.abs() < stop_tolerance {
                    return Ok(ShiftTrace {
                        outcomes,
                        stop: StopReason::Converged,
                    });
                }
            }
            Err(Error::StepTooLarge { max_epsilon, .. }) => {
                return Ok(ShiftTrace {
                    outcomes,
                    stop: StopReason::StepTooLarge { max_epsilon },
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ShiftTrace {
        outcomes,
        stop: StopReason::Completed,
    })
}

/// First-order gain estimate that weights the direction by the
/// answering-side frequencies `q` instead of the squared asking-side
/// frequencies: `epsilon * sum_j delta_b_j * q_j`.
///
/// Reported alongside the gradient-based prediction for comparison. On
/// symmetric instances (uniform `q`) it evaluates to zero even when the
/// exact gain strictly increases, which is why the control loop trusts
/// the gradient-based prediction instead.
pub fn q_weighted_estimate(plan: &ShiftPlan, q: &MixedStrategy) -> Result<f64> {
    if q.len() != plan.delta_b.len() {
        return Err(Error::Shape(format!(
            "direction has {} entries, q has {}",
            plan.delta_b.len(),
            q.len()
        )));
    }
    Ok(plan.epsilon
        * plan
            .delta_b
            .iter()
            .zip(q.probs())
            .map(|(&d, &qj)| d * qj)
            .sum::<f64>())
}
