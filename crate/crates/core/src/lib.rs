//! Participatory budgeting toolkit: approval instances, exact and heuristic
//! aggregation rules, seeded synthetic generators, evaluation metrics and
//! file formats.
//!
//! ```
//! use pbkit::model::{PBInstance, social_welfare};
//! use pbkit::rules::{solve_exact, Objective};
//!
//! let inst = PBInstance::new(vec![vec![0, 1, 2], vec![0, 1], vec![0]], vec![1.0; 3], 2.0).unwrap();
//! let best = solve_exact(&inst, Objective::Av).unwrap();
//! assert_eq!(best.bundle.projects(), &[0, 1]);
//! assert_eq!(social_welfare(&inst, &best.bundle).unwrap(), 5);
//! ```

pub mod generators;
pub mod io;
pub mod metrics;
pub mod model;
pub mod rules;

pub use model::{Bundle, PBInstance, ScoreVector};
pub use rules::{Objective, Rule};
