//! Photon-number statistics for telling genuinely thermal light apart from
//! pair-produced (two-mode squeezed) light.
//!
//! * [`states`]: exact number-basis laws, temperature ↔ squeeze maps and
//!   the analytic Var(N_a − N_b) predictions.
//! * [`bogolubov`]: pair production by a time-dependent refractive index.
//! * [`kinematics`]: finite-bubble form factor and back-to-back angular
//!   spread.
//! * [`montecarlo`]: reproducible flash-by-flash simulation of two
//!   back-to-back detectors.

pub mod bogolubov;
pub mod error;
pub mod kinematics;
pub mod montecarlo;
pub mod numeric;
pub mod states;
pub mod stream;
pub mod units;

pub use error::{Error, Result};
pub use units::Units;
