//! Transfer of a spatial direction, and of a full reference frame, between
//! two observers who share singlet pairs and a classical channel.
//!
//! - [`math`]: closed-form singlet correlations and mutual information.
//! - [`sampler`]: seeded simulation of correlated outcome pairs.
//! - [`estimator`]: count tables and the plug-in mutual-information estimate.
//! - [`search`]: the trial-direction search, sign resolution, frame transfer.
//! - [`bayes`]: posterior over the relative angle from sign tallies.
//! - [`harness`]: experiment configs, reports, and figure-data commands.

pub mod bayes;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod math;
pub mod quadrature;
pub mod sampler;
pub mod search;

pub use bayes::{PosteriorSummary, SignTally};
pub use error::{Error, Result};
pub use estimator::CountTable;
pub use math::{Direction, JointDistribution2x2, Outcome};
pub use sampler::{OutcomeRecord, SamplerConfig};
pub use search::{EvaluationMode, FrameEstimate, HemispherePrior, SearchParams, TrialRecord};
