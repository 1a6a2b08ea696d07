//! Direction transfer by mutual-information search.
//!
//! Alice holds a fixed setting. Bob proposes trial settings, scores each by
//! the plug-in mutual information of a fresh batch of outcome pairs, keeps
//! the best, and sharpens it with a shrinking ring search. The score is even
//! in `x·y`, so the search recovers Alice's axis only up to sign; a
//! hemisphere prior picks the sign.
//!
//! Stream layout: evaluation `k` of axis `a` draws from stream
//! `(a << 32) + k`, where coarse trials take `k = 0..N` and refinement round
//! `r` (from 0) takes `k = N + 9r .. N + 9r + 9`. Every batch is therefore
//! independent of evaluation order.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{estimate_mutual_information, tally_pairs, CountTable};
use crate::math::{analytic_mutual_information, cos_angle, Direction};
use crate::sampler::{run_measurement_batch, OutcomeRecord, SamplerConfig};

/// Candidates on each refinement ring.
pub const RING_SIZE: usize = 8;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653_3;
const JITTER_STREAM: u64 = u64::MAX;

/// Side information placing Alice's axis in the half-space `v·pole ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HemispherePrior {
    pub pole: Direction,
    pub enabled: bool,
}

impl HemispherePrior {
    pub fn new(pole: Direction) -> Self {
        HemispherePrior { pole, enabled: true }
    }

    pub fn disabled() -> Self {
        HemispherePrior {
            pole: Direction::Z,
            enabled: false,
        }
    }

    pub fn contains(&self, v: &Direction) -> bool {
        !self.enabled || v.dot(&self.pole) >= 0.0
    }

    /// `v` or `-v`, whichever lies in the hemisphere.
    fn fold(&self, v: Direction) -> Direction {
        if self.contains(&v) {
            v
        } else {
            -v
        }
    }

    /// Solid angle searched: 2π with the prior, 4π without.
    fn search_area(&self) -> f64 {
        if self.enabled {
            TAU
        } else {
            2.0 * TAU
        }
    }
}

/// Fibonacci-spiral trial directions covering the prior hemisphere, or the
/// whole sphere when the prior is disabled.
///
/// With `jitter = Some(seed)` the spiral gets a random azimuthal offset and
/// each point a random shift within its own height band. A single direction
/// under an enabled prior is the pole itself.
pub fn generate_trial_directions(
    count: usize,
    prior: &HemispherePrior,
    jitter: Option<u64>,
) -> Result<Vec<Direction>> {
    if count == 0 {
        return Err(Error::param("N", "at least one trial direction is required"));
    }
    if prior.enabled && count == 1 {
        return Ok(vec![prior.pole]);
    }
    let (z_top, z_span) = if prior.enabled { (1.0, 1.0) } else { (1.0, 2.0) };
    let band = z_span / count as f64;
    let mut rng = jitter.map(|seed| SamplerConfig::new(seed, JITTER_STREAM).rng());
    let offset = rng.as_mut().map_or(0.0, |r| TAU * r.uniform());

    let directions = (0..count)
        .map(|i| {
            let shift = rng.as_mut().map_or(0.5, |r| r.uniform());
            let z: f64 = (z_top - (i as f64 + shift) * band).clamp(z_top - z_span, 1.0);
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = offset + GOLDEN_ANGLE * i as f64;
            let local = Direction::new(rho * phi.cos(), rho * phi.sin(), z)
                .expect("spiral point lies on the sphere");
            if prior.enabled {
                local.rotate_z_to(&prior.pole)
            } else {
                local
            }
        })
        .map(|v| prior.fold(v))
        .collect();
    Ok(directions)
}

/// Typical spacing (radians) of `count` spiral points over the search area;
/// the first refinement ring uses this as its radius.
pub fn coarse_spacing(count: usize, prior: &HemispherePrior) -> f64 {
    (prior.search_area() / count.max(1) as f64).sqrt().min(PI / 2.0)
}

/// The simulated singlet source plus classical channel. Alice's setting
/// stays inside; Bob only sees outcome sequences.
#[derive(Debug, Clone)]
pub struct SingletChannel {
    alice: Direction,
}

impl SingletChannel {
    pub fn new(alice: Direction) -> Self {
        SingletChannel { alice }
    }

    /// Alice and Bob measure `m` fresh pairs; Alice sends her outcomes along.
    pub fn measure(&self, bob: Direction, m: usize, config: SamplerConfig) -> Result<OutcomeRecord> {
        run_measurement_batch(self.alice, bob, m, config)
    }

    /// Noiseless score: the closed-form mutual information at Bob's setting.
    pub fn exact_information(&self, bob: &Direction) -> f64 {
        analytic_mutual_information(cos_angle(&self.alice, bob)).expect("clamped cosine")
    }
}

/// How trial directions are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EvaluationMode {
    /// Closed-form mutual information; no sampling.
    Exact,
    /// Plug-in estimate from `batch` simulated pairs per trial.
    Sampled { batch: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub direction: Direction,
    pub mi_estimate: f64,
    /// Absent in exact mode.
    pub counts: Option<CountTable>,
}

/// Scores trial directions against one channel.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    channel: &'a SingletChannel,
    mode: EvaluationMode,
    stream_base: u64,
}

impl<'a> Evaluator<'a> {
    pub fn new(channel: &'a SingletChannel, mode: EvaluationMode, stream_base: u64) -> Self {
        Evaluator {
            channel,
            mode,
            stream_base,
        }
    }

    pub fn evaluate(&self, trial_index: usize, direction: Direction) -> Result<TrialRecord> {
        match self.mode {
            EvaluationMode::Exact => Ok(TrialRecord {
                trial_index,
                direction,
                mi_estimate: self.channel.exact_information(&direction),
                counts: None,
            }),
            EvaluationMode::Sampled { batch, seed } => {
                let config = SamplerConfig::new(seed, self.stream_base.wrapping_add(trial_index as u64));
                evaluate_trial(self.channel, trial_index, direction, batch, config)
            }
        }
    }

    /// Scores a list in parallel; output order follows input order.
    pub fn evaluate_all(&self, first_index: usize, directions: &[Direction]) -> Result<Vec<TrialRecord>> {
        directions
            .par_iter()
            .enumerate()
            .map(|(i, &d)| self.evaluate(first_index + i, d))
            .collect()
    }

    pub fn singlets_per_trial(&self) -> usize {
        match self.mode {
            EvaluationMode::Exact => 0,
            EvaluationMode::Sampled { batch, .. } => batch,
        }
    }
}

/// Runs one batch at `(alice, trial_direction)` and scores it Bob-side.
pub fn evaluate_trial(
    channel: &SingletChannel,
    trial_index: usize,
    trial_direction: Direction,
    m: usize,
    config: SamplerConfig,
) -> Result<TrialRecord> {
    let record = channel.measure(trial_direction, m, config)?;
    let counts = tally_pairs(&record.pairs);
    Ok(TrialRecord {
        trial_index,
        direction: trial_direction,
        mi_estimate: estimate_mutual_information(&counts)?,
        counts: Some(counts),
    })
}

/// The trial with the largest score; ties go to the lowest `trial_index`.
pub fn select_best_record(trials: &[TrialRecord]) -> Result<&TrialRecord> {
    let mut iter = trials.iter();
    let mut best = iter.next().ok_or(Error::Empty("trial list"))?;
    for t in iter {
        if t.mi_estimate > best.mi_estimate
            || (t.mi_estimate == best.mi_estimate && t.trial_index < best.trial_index)
        {
            best = t;
        }
    }
    Ok(best)
}

pub fn select_best(trials: &[TrialRecord]) -> Result<(Direction, f64)> {
    select_best_record(trials).map(|t| (t.direction, t.mi_estimate))
}

/// Ring search around `coarse_best`.
///
/// Round `r` scores the current center and [`RING_SIZE`] points at angular
/// radius `initial_cap / 2^r`, each from a fresh batch, and moves to the
/// best. Candidates outside the prior hemisphere are replaced by their
/// antipodes, which carry the same expected score.
pub fn refine(
    evaluator: &Evaluator<'_>,
    coarse_best: Direction,
    rounds: u32,
    initial_cap: f64,
    prior: &HemispherePrior,
    first_index: usize,
) -> Result<(Direction, f64, Vec<TrialRecord>)> {
    let mut center = prior.fold(coarse_best);
    let mut score = f64::NAN;
    let mut records = Vec::with_capacity(rounds as usize * (RING_SIZE + 1));
    for round in 0..rounds {
        let cap = initial_cap / 2f64.powi(round as i32);
        let candidates: Vec<Direction> = std::iter::once(center)
            .chain((0..RING_SIZE).map(|k| prior.fold(center.offset(cap, TAU * k as f64 / RING_SIZE as f64))))
            .collect();
        let base = first_index + round as usize * (RING_SIZE + 1);
        let scored = evaluator.evaluate_all(base, &candidates)?;
        let best = select_best_record(&scored)?;
        center = best.direction;
        score = best.mi_estimate;
        records.extend(scored);
    }
    Ok((center, score, records))
}

/// Flips `estimate` into the prior hemisphere. Without a prior the sign
/// stays ambiguous and `resolved` is false.
pub fn resolve_sign(estimate: Direction, prior: &HemispherePrior) -> (Direction, bool) {
    if !prior.enabled {
        return (estimate, false);
    }
    if estimate.dot(&prior.pole) < 0.0 {
        (-estimate, true)
    } else {
        (estimate, true)
    }
}

/// Parameters of a single-axis transfer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Coarse trial directions, `N`.
    pub trials: usize,
    pub rounds: u32,
    pub prior: HemispherePrior,
    pub mode: EvaluationMode,
    pub jitter: Option<u64>,
}

impl SearchParams {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("N", "at least one trial direction is required"));
        }
        if let EvaluationMode::Sampled { batch: 0, .. } = self.mode {
            return Err(Error::param("M", "batch size must be at least 1"));
        }
        Ok(())
    }

    /// Radius of the last refinement ring; the exact-mode error bound.
    pub fn final_cap(&self) -> f64 {
        let initial = coarse_spacing(self.trials, &self.prior);
        if self.rounds == 0 {
            initial
        } else {
            initial / 2f64.powi(self.rounds as i32 - 1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionTransfer {
    pub estimate: Direction,
    pub mi_score: f64,
    pub sign_resolved: bool,
    pub coarse_best: Direction,
    pub coarse_trials: Vec<TrialRecord>,
    pub refinement_trials: Vec<TrialRecord>,
    pub singlets_consumed: u64,
}

/// Generate, evaluate, select, refine, resolve: one axis end to end.
pub fn transfer_direction(alice: Direction, params: &SearchParams) -> Result<DirectionTransfer> {
    transfer_on_stream(alice, params, 0)
}

fn transfer_on_stream(alice: Direction, params: &SearchParams, stream_base: u64) -> Result<DirectionTransfer> {
    params.validate()?;
    let channel = SingletChannel::new(alice);
    let evaluator = Evaluator::new(&channel, params.mode, stream_base);

    let directions = generate_trial_directions(params.trials, &params.prior, params.jitter)?;
    let coarse_trials = evaluator.evaluate_all(0, &directions)?;
    let (coarse_best, coarse_score) = select_best(&coarse_trials)?;

    let (refined, refined_score, refinement_trials) = refine(
        &evaluator,
        coarse_best,
        params.rounds,
        coarse_spacing(params.trials, &params.prior),
        &params.prior,
        params.trials,
    )?;
    let mi_score = if params.rounds == 0 { coarse_score } else { refined_score };
    let (estimate, sign_resolved) = resolve_sign(refined, &params.prior);
    let evaluations = (coarse_trials.len() + refinement_trials.len()) as u64;
    Ok(DirectionTransfer {
        estimate,
        mi_score,
        sign_resolved,
        coarse_best,
        coarse_trials,
        refinement_trials,
        singlets_consumed: evaluations * evaluator.singlets_per_trial() as u64,
    })
}

/// Three estimated axes of Alice's frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEstimate {
    pub axes: [Direction; 3],
    pub sign_resolved: [bool; 3],
    pub mi_scores: [f64; 3],
    pub orthonormalized: bool,
    pub transfers: Vec<DirectionTransfer>,
}

impl FrameEstimate {
    pub fn singlets_consumed(&self) -> u64 {
        self.transfers.iter().map(|t| t.singlets_consumed).sum()
    }
}

/// Transfers each axis of `alice_frame` independently, with its own prior
/// and its own block of streams, then optionally replaces the three
/// estimates by the nearest orthonormal triad.
pub fn transfer_frame(
    alice_frame: &[Direction; 3],
    params: &SearchParams,
    priors: &[HemispherePrior; 3],
    orthonormalize: bool,
) -> Result<FrameEstimate> {
    for i in 0..3 {
        for j in i + 1..3 {
            let d = alice_frame[i].dot(&alice_frame[j]);
            if d.abs() > 1e-10 {
                return Err(Error::param(
                    "alice_frame",
                    format!("axes {i} and {j} are not orthogonal (dot = {d:e})"),
                ));
            }
        }
    }
    let transfers = (0..3)
        .map(|axis| {
            let p = SearchParams {
                prior: priors[axis],
                ..*params
            };
            transfer_on_stream(alice_frame[axis], &p, (axis as u64) << 32)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut axes = [transfers[0].estimate, transfers[1].estimate, transfers[2].estimate];
    if orthonormalize {
        axes = nearest_orthonormal(&axes)?;
    }
    Ok(FrameEstimate {
        axes,
        sign_resolved: [0, 1, 2].map(|i| transfers[i].sign_resolved),
        mi_scores: [0, 1, 2].map(|i| transfers[i].mi_score),
        orthonormalized: orthonormalize,
        transfers,
    })
}

type Mat3 = [[f64; 3]; 3];

fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse transpose via the cofactor matrix.
fn inverse_transpose(m: &Mat3) -> Mat3 {
    let d = det(m);
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
            let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
            *cell = (m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1]) / d;
        }
    }
    out
}

/// Orthogonal factor of the polar decomposition of the matrix whose rows are
/// `axes`, by Newton iteration `Q ← (Q + Q⁻ᵀ)/2`. Handedness is preserved.
pub fn nearest_orthonormal(axes: &[Direction; 3]) -> Result<[Direction; 3]> {
    let mut q: Mat3 = axes.map(|a| a.to_array());
    if det(&q).abs() < 1e-8 {
        return Err(Error::param("axes", "estimated axes are linearly dependent"));
    }
    for _ in 0..100 {
        let inv_t = inverse_transpose(&q);
        let mut delta = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let next = 0.5 * (q[i][j] + inv_t[i][j]);
                delta = delta.max((next - q[i][j]).abs());
                q[i][j] = next;
            }
        }
        if delta < 1e-15 {
            break;
        }
    }
    let [r0, r1, r2] = q.map(|r| Direction::new(r[0], r[1], r[2]));
    Ok([r0?, r1?, r2?])
}
