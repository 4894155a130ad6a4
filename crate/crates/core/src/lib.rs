//! Siting a portable station inside a polygonal district.
//!
//! The station goes where the weighted sum of squared distances to the
//! district's boundary lines is smallest. Weights come from per-segment
//! congestion in a time window, so each window gets its own placement. Every
//! closed-form solve can be checked against a brute-force grid search.
//!
//! ```
//! use stationfit::{fixtures, traffic};
//!
//! let region = traffic::load_region(fixtures::POWER_AND_LIGHT_JSON).unwrap();
//! let records = traffic::load_congestion(fixtures::RUSH_HOUR_CSV).unwrap();
//! let reports = traffic::plan_stations(&region, &records).unwrap();
//! assert_eq!(reports.len(), 3);
//! ```

pub mod cli;
pub mod fixtures;
pub mod geometry;
pub mod oracle;
pub mod projection;
pub mod traffic;
pub mod wls;

pub use geometry::{HesseLine, LineCoefficients, Point2, PolygonRegion, Vertex};
pub use oracle::{OracleResult, SearchBox};
pub use traffic::{CongestionRecord, PlacementReport, WeightSchedule};
pub use wls::{LineSystem, Solution, WeightVector};
