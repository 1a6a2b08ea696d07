//! Posterior over the relative angle between two settings given a sequence
//! of outcome pairs, under a flat prior on both settings.
//!
//! The data enter only through the sign tally `(n₊, n₋)`. With `c = x·y`,
//! the posterior per double solid angle is
//!
//! ```text
//! p(x, y | data) = (1 − c)^n₊ (1 + c)^n₋ / (8π² d(n₊, n₋))
//! d(n₊, n₋)      = ∫₋₁¹ (1 − γ)^n₊ (1 + γ)^n₋ dγ = 2^(N+1) B(n₊ + 1, n₋ + 1)
//! ```
//!
//! All arithmetic runs in log space; `(1 ± c)^n` underflows quickly.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{checked_cos, cos_angle, Direction, Outcome};
use crate::quadrature::integrate;
use crate::sampler::OutcomeRecord;

/// Counts of outcome products `a·b = +1` and `a·b = −1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignTally {
    pub n_plus: u64,
    pub n_minus: u64,
}

impl SignTally {
    pub fn new(n_plus: u64, n_minus: u64) -> Self {
        SignTally { n_plus, n_minus }
    }

    pub fn n_total(&self) -> u64 {
        self.n_plus + self.n_minus
    }
}

pub fn sign_tally(record: &OutcomeRecord) -> Result<SignTally> {
    sign_tally_of_pairs(&record.pairs)
}

pub fn sign_tally_of_pairs(pairs: &[(Outcome, Outcome)]) -> Result<SignTally> {
    if pairs.is_empty() {
        return Err(Error::Empty("outcome record"));
    }
    let n_plus = pairs.iter().filter(|(a, b)| a == b).count() as u64;
    Ok(SignTally::new(n_plus, pairs.len() as u64 - n_plus))
}

/// `n·ln(v)` with `0·ln 0 = 0`.
fn xlogy(n: u64, v: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * v.ln()
    }
}

/// `ln[(1 − c)^n₊ (1 + c)^n₋]`, `−∞` where a factor vanishes.
fn log_kernel(c: f64, tally: &SignTally) -> f64 {
    xlogy(tally.n_plus, 1.0 - c) + xlogy(tally.n_minus, 1.0 + c)
}

/// Natural-log likelihood of the outcome sequence at relative cosine `c`.
///
/// Returns `f64::NEG_INFINITY` when the data contain an outcome that has
/// probability zero at `c`.
pub fn log_likelihood(tally: &SignTally, cos_gamma: f64) -> Result<f64> {
    let c = checked_cos(cos_gamma)?;
    Ok(xlogy(tally.n_plus, (1.0 - c) / 4.0) + xlogy(tally.n_minus, (1.0 + c) / 4.0))
}

/// `ln d(n₊, n₋)` from `d = 2^(N+1) B(n₊ + 1, n₋ + 1)`.
pub fn normalization_d(tally: &SignTally) -> f64 {
    let (p, m) = (tally.n_plus as f64, tally.n_minus as f64);
    (p + m + 1.0) * LN_2 + libm::lgamma(p + 1.0) + libm::lgamma(m + 1.0) - libm::lgamma(p + m + 2.0)
}

/// Posterior density per double solid angle at relative cosine `c`.
pub fn posterior_density(cos_gamma: f64, tally: &SignTally) -> Result<f64> {
    let c = checked_cos(cos_gamma)?;
    Ok(posterior_density_unchecked(c, tally, normalization_d(tally)))
}

fn posterior_density_unchecked(c: f64, tally: &SignTally, log_d: f64) -> f64 {
    (log_kernel(c, tally) - log_d).exp() / (8.0 * PI * PI)
}

/// The same density written in the relative angle `θ`:
/// `2^N sin^(2n₊)(θ/2) cos^(2n₋)(θ/2) / (8π² d)`. Even in `θ`.
pub fn posterior_density_theta(theta: f64, tally: &SignTally) -> f64 {
    posterior_density_theta_with(theta, tally, normalization_d(tally))
}

pub(crate) fn posterior_density_theta_with(theta: f64, tally: &SignTally, log_d: f64) -> f64 {
    let half = 0.5 * theta;
    let log = tally.n_total() as f64 * LN_2
        + 2.0 * xlogy(tally.n_plus, half.sin().abs())
        + 2.0 * xlogy(tally.n_minus, half.cos().abs())
        - log_d;
    log.exp() / (8.0 * PI * PI)
}

/// Maximum a posteriori cosine `(n₋ − n₊) / N`.
pub fn posterior_peak(tally: &SignTally) -> Result<f64> {
    if tally.n_total() == 0 {
        return Err(Error::param("tally", "an empty tally gives a flat posterior with no peak"));
    }
    Ok((tally.n_minus as f64 - tally.n_plus as f64) / tally.n_total() as f64)
}

/// Density of one party's setting `x` given the other's `y`, per solid
/// angle of `x`; integrates to 1 over the sphere.
pub fn conditional_direction_density(x: &Direction, tally: &SignTally, y: &Direction) -> f64 {
    4.0 * PI * posterior_density_unchecked(cos_angle(x, y), tally, normalization_d(tally))
}

/// Highest-density interval in `c` holding mass `level` of the density
/// proportional to `(1 − c)^n₊ (1 + c)^n₋` on `[−1, 1]`.
pub fn credible_interval(tally: &SignTally, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param("level", format!("{level} is not in (0, 1)")));
    }
    let peak = posterior_peak(tally)?;
    let log_d = normalization_d(tally);
    let log_density = |c: f64| log_kernel(c, tally) - log_d;
    let log_top = log_density(peak);

    // Endpoints of the superlevel set {log g ≥ cut}. The density is
    // unimodal, increasing on [−1, peak] and decreasing on [peak, 1].
    let endpoints = |cut: f64| {
        let lo = if log_density(-1.0) >= cut {
            -1.0
        } else {
            bisect(-1.0, peak, |c| log_density(c) >= cut)
        };
        let hi = if log_density(1.0) >= cut {
            1.0
        } else {
            // Flip the predicate: points left of the crossing are inside.
            let mut a = peak;
            let mut b = 1.0;
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if log_density(mid) >= cut {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        };
        (lo, hi)
    };
    let mass = |lo: f64, hi: f64| {
        if hi <= lo {
            return 0.0;
        }
        integrate(|c| log_density(c).exp(), lo, hi, 1e-15, 1e-12)
    };

    // Bisect on the cut height; the enclosed mass falls as the cut rises.
    let mut cut_low = log_top - 1500.0;
    let mut cut_high = log_top;
    for _ in 0..100 {
        let cut = 0.5 * (cut_low + cut_high);
        let (lo, hi) = endpoints(cut);
        if mass(lo, hi) >= level {
            cut_low = cut;
        } else {
            cut_high = cut;
        }
    }
    let (lo, hi) = endpoints(cut_low);
    Ok((lo.min(peak), hi.max(peak)))
}

/// Finds the crossing in `[a, b]` of a predicate that is false at `a` and
/// true at `b`; returns the leftmost point judged true.
fn bisect(mut a: f64, mut b: f64, inside: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        if inside(mid) {
            b = mid;
        } else {
            a = mid;
        }
    }
    b
}

/// Summary of the posterior for one tally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub n_plus: u64,
    pub n_minus: u64,
    pub map_cos_theta: f64,
    /// `(θ*, −θ*)` in radians.
    pub map_theta_pair: (f64, f64),
    pub credible_level: f64,
    pub credible_interval_cos: (f64, f64),
    /// `ln d(n₊, n₋)`.
    pub log_normalization: f64,
}

pub fn summarize(tally: &SignTally, level: f64) -> Result<PosteriorSummary> {
    let map = posterior_peak(tally)?;
    let theta = map.acos();
    Ok(PosteriorSummary {
        n_plus: tally.n_plus,
        n_minus: tally.n_minus,
        map_cos_theta: map,
        map_theta_pair: (theta, -theta),
        credible_level: level,
        credible_interval_cos: credible_interval(tally, level)?,
        log_normalization: normalization_d(tally),
    })
}
