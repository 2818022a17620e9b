//! Outage and throughput analysis of two-user uplink rate-splitting multiple
//! access (RSMA) over Nakagami-m fading, with imperfect channel estimates at
//! the receiver and imperfect successive interference cancellation.
//!
//! * [`analytic`] — closed-form and high-SNR outage expressions.
//! * [`montecarlo`] — a deterministic, parallel simulator used as an oracle.
//! * [`sweep`] — parameter sweeps, config files and CSV/JSON output.

pub mod analytic;
pub mod channel;
pub mod montecarlo;
pub mod specfun;
pub mod sweep;
pub mod system;

pub use analytic::{closed_form_report, Method, OutageReport, Target};
pub use channel::CsirQuality;
pub use montecarlo::{estimate_outage, McOptions, Scheme, StageCoupling};
pub use system::{ConfigError, OperatingPoint, SystemConfig};
