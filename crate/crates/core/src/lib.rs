//! Locally adaptive nonparametric online learning.
//!
//! An online learner grows a hierarchical epsilon-net over the instances it
//! sees, keeps a local learner at every ball, and combines the balls on the
//! active root-to-leaf path with a sleeping-experts aggregator. The result
//! competes with every pruning of the net at once, so it adapts to regions
//! where the target is smoother, lower dimensional or easier to predict.
//!
//! ```
//! use locadapt::bench::{gen_stream, run_la, LaConfig, StreamSpec, TargetFunction, TargetPreset};
//! use locadapt::domain::LossKind;
//! use locadapt::net::RadiusSchedule;
//!
//! let f = TargetFunction::preset(TargetPreset::MostlyFlat, 2.0, 8.0).unwrap();
//! let stream = gen_stream(&StreamSpec::new(200, 1, 7), &f).unwrap();
//! let schedule = RadiusSchedule::lipschitz(vec![2.0, 4.0, 8.0], 1).unwrap();
//! let log = run_la(&stream.examples, &LaConfig::new(schedule, LossKind::Square)).unwrap();
//! assert_eq!(log.horizon(), 200);
//! ```

pub mod aggregate;
pub mod bench;
pub mod domain;
pub mod error;
pub mod format;
pub mod learners;
pub mod net;
pub mod pruning;

pub use error::{Error, Result};
