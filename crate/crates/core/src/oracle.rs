//! Brute-force verification of placements.
//!
//! [`grid_minimize`] never looks at lines, weights or normal equations: it only
//! evaluates an objective on successively finer grids. Agreement between it and
//! the closed-form solver is what certifies a placement.

use thiserror::Error;

use crate::geometry::Point2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid search box: {0}")]
    InvalidBox(String),
}

/// Rectangle searched by [`grid_minimize`] plus the refinement schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub levels: u32,
    pub points_per_axis: usize,
}

impl SearchBox {
    pub fn new(
        (xmin, xmax): (f64, f64),
        (ymin, ymax): (f64, f64),
        levels: u32,
        points_per_axis: usize,
    ) -> Result<Self, OracleError> {
        let b = SearchBox {
            xmin,
            xmax,
            ymin,
            ymax,
            levels,
            points_per_axis,
        };
        b.validate()?;
        Ok(b)
    }

    fn validate(&self) -> Result<(), OracleError> {
        let finite = [self.xmin, self.xmax, self.ymin, self.ymax]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(OracleError::InvalidBox("bounds must be finite".into()));
        }
        if !(self.xmin < self.xmax && self.ymin < self.ymax) {
            return Err(OracleError::InvalidBox(format!(
                "need xmin < xmax and ymin < ymax, got [{}, {}] x [{}, {}]",
                self.xmin, self.xmax, self.ymin, self.ymax
            )));
        }
        if self.levels < 1 {
            return Err(OracleError::InvalidBox("levels must be at least 1".into()));
        }
        if self.points_per_axis < 10 {
            return Err(OracleError::InvalidBox(format!(
                "points_per_axis must be at least 10, got {}",
                self.points_per_axis
            )));
        }
        Ok(())
    }

    /// Grid spacing after the last level.
    pub fn final_resolution(&self) -> f64 {
        let steps = (self.points_per_axis - 1) as f64;
        let first = ((self.xmax - self.xmin) / steps).max((self.ymax - self.ymin) / steps);
        // Each level spans 4 spacings of the previous one.
        first * (4.0 / steps).powi(self.levels as i32 - 1)
    }
}

impl Default for SearchBox {
    /// `[-5, 25]²`, 5 levels of 101×101 points.
    fn default() -> Self {
        SearchBox {
            xmin: -5.0,
            xmax: 25.0,
            ymin: -5.0,
            ymax: 25.0,
            levels: 5,
            points_per_axis: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub point: Point2,
    pub value: f64,
    /// Grid spacing of the last level.
    pub resolution: f64,
    /// Best value after each level.
    pub level_values: Vec<f64>,
}

fn better(candidate: (Point2, f64), best: (Point2, f64)) -> bool {
    let (p, v) = candidate;
    let (q, w) = best;
    v < w || (v == w && (p.x, p.y) < (q.x, q.y))
}

/// Coarse-to-fine grid search.
///
/// Each level evaluates a `points_per_axis²` grid over the current box and
/// recentres a box four grid spacings wide on the best point. Ties go to the
/// smallest `x`, then the smallest `y`. NaN values never win.
pub fn grid_minimize<F>(f: F, search: &SearchBox) -> Result<OracleResult, OracleError>
where
    F: Fn(Point2) -> f64,
{
    search.validate()?;
    let n = search.points_per_axis;
    let steps = (n - 1) as f64;
    let (mut x0, mut x1, mut y0, mut y1) = (search.xmin, search.xmax, search.ymin, search.ymax);
    let mut best: Option<(Point2, f64)> = None;
    let mut level_values = Vec::with_capacity(search.levels as usize);
    let mut resolution = f64::NAN;

    for _ in 0..search.levels {
        let (hx, hy) = ((x1 - x0) / steps, (y1 - y0) / steps);
        for i in 0..n {
            let x = x0 + (x1 - x0) * (i as f64 / steps);
            for j in 0..n {
                let y = y0 + (y1 - y0) * (j as f64 / steps);
                let p = Point2::new(x, y);
                let v = f(p);
                if v.is_nan() {
                    continue;
                }
                if best.is_none_or(|b| better((p, v), b)) {
                    best = Some((p, v));
                }
            }
        }
        let Some((centre, value)) = best else {
            return Err(OracleError::InvalidBox(
                "objective is NaN everywhere on the grid".into(),
            ));
        };
        level_values.push(value);
        resolution = hx.max(hy);
        (x0, x1) = (centre.x - 2.0 * hx, centre.x + 2.0 * hx);
        (y0, y1) = (centre.y - 2.0 * hy, centre.y + 2.0 * hy);
    }

    let (point, value) = best.expect("levels >= 1");
    Ok(OracleResult {
        point,
        value,
        resolution,
        level_values,
    })
}

/// Central-difference gradient with step `h`.
///
/// # Panics
///
/// If `h` is not positive.
pub fn fd_gradient<F>(f: F, p: Point2, h: f64) -> (f64, f64)
where
    F: Fn(Point2) -> f64,
{
    assert!(h > 0.0, "finite-difference step must be positive, got {h}");
    let dx = (f(Point2::new(p.x + h, p.y)) - f(Point2::new(p.x - h, p.y))) / (2.0 * h);
    let dy = (f(Point2::new(p.x, p.y + h)) - f(Point2::new(p.x, p.y - h))) / (2.0 * h);
    (dx, dy)
}
