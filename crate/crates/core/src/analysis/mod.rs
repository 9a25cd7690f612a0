//! Bound evaluators, class geometry (disagreement coefficient, low-noise
//! fit), regression helpers and Monte Carlo validation suites.

mod bounds;
mod disagreement;
mod fit;
mod tsybakov;
pub mod validation;

pub use bounds::*;
pub use disagreement::{disagreement_coefficient, log_grid, DisagreementProfile};
pub use fit::{fit_two_term, loglog_slope, median};
pub use tsybakov::{fit_tsybakov, kappa_for, tsybakov_holds, NoiseModel, TsybakovFit, TsybakovOptions};
