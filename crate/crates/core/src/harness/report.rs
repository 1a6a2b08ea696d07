use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Target};
use super::HarnessResult;
use crate::math::Direction;
use crate::search::{transfer_direction, transfer_frame, DirectionTransfer, TrialRecord};

/// Outcome of one axis transfer, compared with the known truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisReport {
    pub truth: Direction,
    pub estimate: Direction,
    /// `(theta, phi)` of the estimate.
    pub estimate_polar: (f64, f64),
    pub mi_score: f64,
    pub sign_resolved: bool,
    /// Angle between estimate and truth, radians.
    pub angular_error: f64,
    /// Angle between estimate and the nearer of ±truth, radians.
    pub axis_error: f64,
    /// Radius of the last refinement ring, radians.
    pub final_cap: f64,
    pub coarse_best: Direction,
    pub singlets_consumed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse_trials: Option<Vec<TrialRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement_trials: Option<Vec<TrialRecord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub package_version: String,
    pub config: ExperimentConfig,
    pub axes: Vec<AxisReport>,
    /// Set when the frame estimate was projected onto an orthonormal triad;
    /// the axis estimates are then the projected ones.
    pub orthonormalized: bool,
    pub singlet_budget: u64,
}

fn axis_report(
    truth: Direction,
    estimate: Direction,
    transfer: DirectionTransfer,
    final_cap: f64,
    include_trials: bool,
) -> AxisReport {
    let (coarse, refinement) = if include_trials {
        (Some(transfer.coarse_trials), Some(transfer.refinement_trials))
    } else {
        (None, None)
    };
    AxisReport {
        truth,
        estimate,
        estimate_polar: estimate.to_polar(),
        mi_score: transfer.mi_score,
        sign_resolved: transfer.sign_resolved,
        angular_error: estimate.angle_to(&truth),
        axis_error: estimate.axis_angle_to(&truth),
        final_cap,
        coarse_best: transfer.coarse_best,
        singlets_consumed: transfer.singlets_consumed,
        coarse_trials: coarse,
        refinement_trials: refinement,
    }
}

/// Runs the transfer a validated config describes.
pub fn run_experiment(config: &ExperimentConfig) -> HarnessResult<RunReport> {
    config.validate()?;
    let params = config.search_params();
    let final_cap = params.final_cap();
    let (axes, orthonormalized) = match config.target() {
        Target::Direction(truth) => {
            let t = transfer_direction(truth, &params)?;
            let estimate = t.estimate;
            (vec![axis_report(truth, estimate, t, final_cap, config.include_trials)], false)
        }
        Target::Frame(truth) => {
            let priors = [config.prior_for(0), config.prior_for(1), config.prior_for(2)];
            let frame = transfer_frame(&truth, &params, &priors, config.orthonormalize)?;
            let axes = frame
                .transfers
                .into_iter()
                .enumerate()
                .map(|(i, t)| axis_report(truth[i], frame.axes[i], t, final_cap, config.include_trials))
                .collect();
            (axes, frame.orthonormalized)
        }
    };
    let singlet_budget = axes.iter().map(|a: &AxisReport| a.singlets_consumed).sum();
    Ok(RunReport {
        package_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        axes,
        orthonormalized,
        singlet_budget,
    })
}
