//! Bundled inputs: the Power and Light district outline, its rush-hour
//! congestion table, and the hand-computed systems published alongside them.
//!
//! The published systems are kept verbatim, rounding and transcription slips
//! included, so that the printed results can be replayed. They are not used by
//! the main pipeline, which derives every line from the vertex coordinates.

use crate::geometry::{hesse_normalize, LineCoefficients, Point2};
use crate::wls::{assemble, LineSystem};

/// Region document for the seven-vertex district A–G.
pub const POWER_AND_LIGHT_JSON: &str = include_str!("../data/power_and_light.json");

/// Morning and afternoon rush-hour congestion percentages per segment.
pub const RUSH_HOUR_CSV: &str = include_str!("../data/rush_hour.csv");

pub const UNIT_SQUARE_JSON: &str = include_str!("../data/unit_square.json");

/// Segment order shared by all published matrices.
pub const SEGMENTS: [&str; 7] = ["AB", "BC", "CD", "DE", "EF", "FG", "GA"];

/// Morning congestion as fractions, in [`SEGMENTS`] order.
pub const MORNING_WEIGHTS: [f64; 7] = [0.02, 0.09, 0.03, 0.25, 0.45, 0.15, 0.01];

/// Afternoon congestion as fractions, in [`SEGMENTS`] order.
pub const AFTERNOON_WEIGHTS: [f64; 7] = [0.17, 0.10, 0.30, 0.15, 0.06, 0.10, 0.12];

/// Normalized edge lines as printed (three to four significant digits).
pub const PUBLISHED_A: [[f64; 2]; 7] = [
    [-0.977, 0.212],
    [-0.652, 0.761],
    [0.0307, 1.0],
    [0.932, -0.362],
    [0.977, -0.0665],
    [0.0, 1.0],
    [0.868, 0.4961],
];

/// Printed right-hand side. Entry 5 repeats entry 1; the EF edge actually
/// normalizes to an offset of about 16.962.
pub const PUBLISHED_B: [f64; 7] = [1.115, 7.56, 12.586, 13.59, 1.115, 0.0, 2.604];

/// Printed right-hand side used with the weighted systems (`b₃` rounded to 12.58).
pub const PUBLISHED_WEIGHTED_B: [f64; 7] = [1.115, 7.56, 12.58, 13.59, 1.115, 0.0, 2.604];

/// Printed morning weight diagonal; several entries are ten times the table value.
pub const PUBLISHED_MORNING_W: [f64; 7] = [0.2, 0.9, 0.3, 0.25, 0.45, 0.15, 0.1];

/// Printed afternoon weight diagonal; the EF entry is ten times the table value.
pub const PUBLISHED_AFTERNOON_W: [f64; 7] = [0.17, 0.10, 0.30, 0.15, 0.6, 0.10, 0.12];

/// Results as printed.
pub const PUBLISHED_THREE_LINE: Point2 = Point2::new(0.9753, 1.219);
pub const PUBLISHED_UNWEIGHTED: Point2 = Point2::new(3.55, 5.71);
pub const PUBLISHED_MORNING: Point2 = Point2::new(3.3, 3.7);
pub const PUBLISHED_AFTERNOON: Point2 = Point2::new(15.9608, 7.857);

/// `x = 0`, `4x + 5y = 20`, `y = 0`.
///
/// The triangle is printed with `0.75x + y = 4` but solved as `4x + 5y = 20`
/// (that is, `0.8x + y = 4`); the printed answer follows the latter.
pub fn three_line_example() -> LineSystem {
    let lines = [
        LineCoefficients::new(1.0, 0.0, 0.0),
        LineCoefficients::new(4.0, 5.0, 20.0),
        LineCoefficients::new(0.0, 1.0, 0.0),
    ]
    .into_iter()
    .map(|l| hesse_normalize(l).expect("nonzero lines"))
    .collect();
    assemble(lines).expect("three lines")
}

/// Exact minimizer of [`three_line_example`]: `(1640/1681, 2050/1681)`.
pub const THREE_LINE_EXACT: Point2 = Point2::new(1640.0 / 1681.0, 2050.0 / 1681.0);

/// Published rows `(a, b, c)` pairing [`PUBLISHED_A`] with a right-hand side.
pub fn published_rows(b: &[f64; 7]) -> Vec<LineCoefficients> {
    PUBLISHED_A
        .iter()
        .zip(b)
        .map(|(&[a, bb], &c)| LineCoefficients::new(a, bb, c))
        .collect()
}
