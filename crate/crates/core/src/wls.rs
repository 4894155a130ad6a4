//! Ordinary and weighted least squares over a set of boundary lines.
//!
//! A system of `n` lines `nx_i * x + ny_i * y = d_i` is the overdetermined
//! problem `A X = b`. Weighting scales row `i` of both `A` and `b` by `w_i`, so
//! the minimized quantity is
//!
//! ```text
//! D(p) = Σ w_i² (nx_i * p.x + ny_i * p.y - d_i)²
//! ```
//!
//! The 2×2 normal equations `(WA)ᵀ(WA) X = (WA)ᵀ(Wb)` are solved in closed form.
//! Sums are accumulated with compensated summation so that the result does not
//! depend on row order beyond the last bit.

// Negated comparisons below are deliberate: NaN must fail every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{HesseLine, LineCoefficients, Point2};

/// `det / (trace² / 4)` below this means the normal matrix is singular.
pub const RELATIVE_DET_EPS: f64 = 1e-12;

/// Smallest eigenvalue at or below `EIGEN_EPS * largest` is treated as zero.
pub const EIGEN_EPS: f64 = 1e-15;

/// Certification bound: `|∇D| < GRADIENT_EPS * max(1, D)` at every solution.
pub const GRADIENT_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WlsError {
    #[error("a line system needs at least 2 lines, got {0}")]
    TooFewLines(usize),
    #[error("normal matrix is singular (relative determinant {relative_det:e}); effective lines are parallel or missing")]
    SingularNormalMatrix { relative_det: f64 },
    #[error("{weights} weights supplied for {rows} rows")]
    LengthMismatch { weights: usize, rows: usize },
    #[error("weight {index} is {value}; weights must be finite and nonnegative")]
    InvalidWeight { index: usize, value: f64 },
    #[error(
        "solution failed certification: gradient norm {gradient_norm:e} at objective {objective:e}"
    )]
    Uncertified { gradient_norm: f64, objective: f64 },
}

/// The overdetermined system `A X = b`, one unit-normal row per line.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSystem {
    rows: Vec<HesseLine>,
}

impl LineSystem {
    pub fn rows(&self) -> &[HesseLine] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Right-hand side `b`.
    pub fn offsets(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.d).collect()
    }
}

pub fn assemble(lines: Vec<HesseLine>) -> Result<LineSystem, WlsError> {
    if lines.len() < 2 {
        return Err(WlsError::TooFewLines(lines.len()));
    }
    Ok(LineSystem { rows: lines })
}

/// Nonnegative per-row weights, optionally labelled with segment ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    w: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self, WlsError> {
        if let Some((index, &value)) = w
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(WlsError::InvalidWeight { index, value });
        }
        Ok(WeightVector { w, labels: None })
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self, WlsError> {
        Self::new(vec![value; n])
    }

    /// Attaches labels; the label count must match the weight count.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, WlsError> {
        if labels.len() != self.w.len() {
            return Err(WlsError::LengthMismatch {
                weights: self.w.len(),
                rows: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self, WlsError> {
        let mut out = Self::new(self.w.iter().map(|v| v * alpha).collect())?;
        out.labels = self.labels.clone();
        Ok(out)
    }

    fn check_len(&self, rows: usize) -> Result<(), WlsError> {
        if self.w.len() != rows {
            return Err(WlsError::LengthMismatch {
                weights: self.w.len(),
                rows,
            });
        }
        Ok(())
    }
}

/// A solved placement with its certification diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub point: Point2,
    /// Weighted objective `D` at `point`.
    pub objective: f64,
    pub gradient_norm: f64,
    /// Eigenvalue ratio of the weighted normal matrix.
    pub condition: f64,
    /// Per-row residual `a_i · point - b_i` (a signed distance for unit rows).
    pub residuals: Vec<f64>,
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Entries of the symmetric normal matrix `[[p, q], [q, r]]` and right-hand side `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalEquations {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub u: f64,
    pub v: f64,
}

impl NormalEquations {
    /// Accumulates `Σ w² a aᵀ` and `Σ w² c a` over rows `(a, b, c, w)`.
    pub fn accumulate(rows: impl IntoIterator<Item = (f64, f64, f64, f64)>) -> Self {
        let mut sums = [CompensatedSum::default(); 5];
        for (a, b, c, w) in rows {
            // Scale the row first, as in (WA)ᵀ(WA).
            let (wa, wb, wc) = (w * a, w * b, w * c);
            for (sum, term) in sums
                .iter_mut()
                .zip([wa * wa, wa * wb, wb * wb, wa * wc, wb * wc])
            {
                sum.add(term);
            }
        }
        let [p, q, r, u, v] = sums.map(|s| s.value());
        NormalEquations { p, q, r, u, v }
    }

    pub fn det(&self) -> f64 {
        self.p * self.r - self.q * self.q
    }

    /// `det / (trace² / 4)`; 1 for a multiple of the identity, 0 for rank one.
    pub fn relative_det(&self) -> f64 {
        let half_trace = 0.5 * (self.p + self.r);
        if !(half_trace > 0.0) {
            return 0.0;
        }
        self.det() / (half_trace * half_trace)
    }

    /// Eigenvalues `(largest, smallest)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.p + self.r);
        let radius = (0.5 * (self.p - self.r)).hypot(self.q);
        let largest = mean + radius;
        let smallest = if largest > 0.0 {
            self.det() / largest
        } else {
            mean - radius
        };
        (largest, smallest)
    }

    pub fn condition(&self) -> Result<f64, WlsError> {
        let (largest, smallest) = self.eigenvalues();
        if !(largest > 0.0) || smallest <= EIGEN_EPS * largest {
            return Err(WlsError::SingularNormalMatrix {
                relative_det: self.relative_det(),
            });
        }
        Ok((largest / smallest).max(1.0))
    }

    /// Closed-form inverse applied to the right-hand side, followed by one step
    /// of iterative refinement on the normal-equation residual.
    pub fn solve(&self) -> Result<Point2, WlsError> {
        let relative_det = self.relative_det();
        if !(relative_det >= RELATIVE_DET_EPS) {
            return Err(WlsError::SingularNormalMatrix { relative_det });
        }
        let det = self.det();
        let apply_inverse = |u: f64, v: f64| {
            (
                (self.r * u - self.q * v) / det,
                (self.p * v - self.q * u) / det,
            )
        };
        let (x, y) = apply_inverse(self.u, self.v);
        let ru = self.u - (self.p * x + self.q * y);
        let rv = self.v - (self.q * x + self.r * y);
        let (dx, dy) = apply_inverse(ru, rv);
        Ok(Point2::new(x + dx, y + dy))
    }
}

fn unit_rows<'a>(
    s: &'a LineSystem,
    w: &'a [f64],
) -> impl Iterator<Item = (f64, f64, f64, f64)> + 'a {
    s.rows.iter().zip(w).map(|(l, &w)| (l.nx, l.ny, l.d, w))
}

fn finish(rows: &[(f64, f64, f64, f64)], normal: &NormalEquations) -> Result<Solution, WlsError> {
    let point = normal.solve()?;
    let condition = normal.condition()?;
    let residuals: Vec<f64> = rows
        .iter()
        .map(|&(a, b, c, _)| a * point.x + b * point.y - c)
        .collect();
    let (objective, (gx, gy)) = objective_and_gradient(rows, point);
    let gradient_norm = gx.hypot(gy);
    if !(gradient_norm < GRADIENT_EPS * objective.max(1.0)) {
        return Err(WlsError::Uncertified {
            gradient_norm,
            objective,
        });
    }
    Ok(Solution {
        point,
        objective,
        gradient_norm,
        condition,
        residuals,
    })
}

fn objective_and_gradient(rows: &[(f64, f64, f64, f64)], p: Point2) -> (f64, (f64, f64)) {
    let (mut f, mut gx, mut gy) = (
        CompensatedSum::default(),
        CompensatedSum::default(),
        CompensatedSum::default(),
    );
    for &(a, b, c, w) in rows {
        let d = a * p.x + b * p.y - c;
        let w2 = w * w;
        f.add(w2 * d * d);
        gx.add(2.0 * w2 * d * a);
        gy.add(2.0 * w2 * d * b);
    }
    (f.value(), (gx.value(), gy.value()))
}

/// Unweighted least squares: minimizes the sum of squared distances to all lines.
pub fn solve_ls(s: &LineSystem) -> Result<Solution, WlsError> {
    let ones = vec![1.0; s.len()];
    let rows: Vec<_> = unit_rows(s, &ones).collect();
    finish(&rows, &NormalEquations::accumulate(rows.iter().copied()))
}

/// Weighted least squares: minimizes `Σ w_i² d_i(p)²`.
pub fn solve_wls(s: &LineSystem, w: &WeightVector) -> Result<Solution, WlsError> {
    w.check_len(s.len())?;
    let rows: Vec<_> = unit_rows(s, &w.w).collect();
    finish(&rows, &NormalEquations::accumulate(rows.iter().copied()))
}

/// Weighted least squares on rows that are not unit-normalized.
///
/// Used to replay hand-computed systems whose coefficients were rounded before
/// solving; residuals are `a x + b y - c` rather than distances.
pub fn solve_coefficients(
    rows: &[LineCoefficients],
    w: &WeightVector,
) -> Result<Solution, WlsError> {
    if rows.len() < 2 {
        return Err(WlsError::TooFewLines(rows.len()));
    }
    w.check_len(rows.len())?;
    let rows: Vec<_> = rows
        .iter()
        .zip(&w.w)
        .map(|(l, &w)| (l.a, l.b, l.c, w))
        .collect();
    finish(&rows, &NormalEquations::accumulate(rows.iter().copied()))
}

/// `D(p) = Σ w_i² d_i(p)²`.
pub fn objective(s: &LineSystem, w: &WeightVector, p: Point2) -> Result<f64, WlsError> {
    w.check_len(s.len())?;
    let rows: Vec<_> = unit_rows(s, &w.w).collect();
    Ok(objective_and_gradient(&rows, p).0)
}

/// Analytic gradient `(Σ 2 w² d nx, Σ 2 w² d ny)` of [`objective`].
pub fn objective_gradient(
    s: &LineSystem,
    w: &WeightVector,
    p: Point2,
) -> Result<(f64, f64), WlsError> {
    w.check_len(s.len())?;
    let rows: Vec<_> = unit_rows(s, &w.w).collect();
    Ok(objective_and_gradient(&rows, p).1)
}

pub fn normal_equations(s: &LineSystem, w: &WeightVector) -> Result<NormalEquations, WlsError> {
    w.check_len(s.len())?;
    Ok(NormalEquations::accumulate(unit_rows(s, &w.w)))
}

/// Ratio of the larger to the smaller eigenvalue of the weighted normal matrix.
pub fn condition_number(s: &LineSystem, w: &WeightVector) -> Result<f64, WlsError> {
    normal_equations(s, w)?.condition()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hesse_normalize, LineCoefficients};

    fn line(a: f64, b: f64, c: f64) -> HesseLine {
        hesse_normalize(LineCoefficients::new(a, b, c)).unwrap()
    }

    fn three_line_example() -> LineSystem {
        assemble(vec![
            line(1.0, 0.0, 0.0),
            line(4.0, 5.0, 20.0),
            line(0.0, 1.0, 0.0),
        ])
        .unwrap()
    }

    fn ones(n: usize) -> WeightVector {
        WeightVector::uniform(n, 1.0).unwrap()
    }

    #[test]
    fn assemble_keeps_order_and_offsets() {
        let s = assemble(vec![line(1.0, 0.0, 0.0), line(0.0, 1.0, 2.0)]).unwrap();
        assert_eq!(s.offsets(), vec![0.0, 2.0]);
        assert_eq!(s.rows()[0].nx, 1.0);
        assert_eq!(s.rows()[1].ny, 1.0);
    }

    #[test]
    fn assemble_needs_two_lines() {
        assert_eq!(
            assemble(vec![line(1.0, 0.0, 0.0)]),
            Err(WlsError::TooFewLines(1))
        );
    }

    #[test]
    fn three_line_example_matches_rationals() {
        let sol = solve_ls(&three_line_example()).unwrap();
        assert!((sol.point.x - 1640.0 / 1681.0).abs() < 1e-12);
        assert!((sol.point.y - 2050.0 / 1681.0).abs() < 1e-12);
        assert_eq!(sol.residuals.len(), 3);
    }

    #[test]
    fn consistent_system_has_zero_objective() {
        let s = assemble(vec![line(1.0, 0.0, 0.0), line(0.0, 1.0, 0.0)]).unwrap();
        let sol = solve_ls(&s).unwrap();
        assert_eq!(sol.point, Point2::new(0.0, 0.0));
        assert_eq!(sol.objective, 0.0);
        assert_eq!(sol.condition, 1.0);
    }

    #[test]
    fn parallel_lines_are_singular() {
        let s = assemble(vec![
            line(0.0, 1.0, 0.0),
            line(0.0, 1.0, 1.0),
            line(0.0, 1.0, 2.0),
        ])
        .unwrap();
        assert!(matches!(
            solve_ls(&s),
            Err(WlsError::SingularNormalMatrix { .. })
        ));
        assert!(matches!(
            condition_number(&s, &ones(3)),
            Err(WlsError::SingularNormalMatrix { .. })
        ));
    }

    #[test]
    fn single_effective_line_is_singular() {
        let s = three_line_example();
        let w = WeightVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            solve_wls(&s, &w),
            Err(WlsError::SingularNormalMatrix { .. })
        ));
        let w = WeightVector::new(vec![0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            solve_wls(&s, &w),
            Err(WlsError::SingularNormalMatrix { .. })
        ));
    }

    #[test]
    fn uniform_weights_match_unweighted() {
        let s = three_line_example();
        let base = solve_ls(&s).unwrap();
        for c in [1e-3, 0.37, 1.0, 12.5] {
            let sol = solve_wls(&s, &WeightVector::uniform(3, c).unwrap()).unwrap();
            assert!(sol.point.distance(base.point) < 1e-10, "c = {c}");
        }
    }

    #[test]
    fn weight_length_is_checked() {
        let s = three_line_example();
        let w = ones(2);
        assert_eq!(
            solve_wls(&s, &w),
            Err(WlsError::LengthMismatch {
                weights: 2,
                rows: 3
            })
        );
        assert!(objective(&s, &w, Point2::default()).is_err());
        assert!(objective_gradient(&s, &w, Point2::default()).is_err());
    }

    #[test]
    fn weights_reject_negative_and_nan() {
        assert_eq!(
            WeightVector::new(vec![1.0, -0.5]),
            Err(WlsError::InvalidWeight {
                index: 1,
                value: -0.5
            })
        );
        assert!(WeightVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn objective_at_origin() {
        let s = three_line_example();
        let f = objective(&s, &ones(3), Point2::new(0.0, 0.0)).unwrap();
        assert!((f - 400.0 / 41.0).abs() < 1e-12);
    }

    #[test]
    fn objective_vanishes_on_common_point() {
        let s = assemble(vec![
            line(1.0, 1.0, 2.0),
            line(1.0, -1.0, 0.0),
            line(0.0, 1.0, 1.0),
        ])
        .unwrap();
        let f = objective(&s, &ones(3), Point2::new(1.0, 1.0)).unwrap();
        assert!(f.abs() < 1e-15);
    }

    #[test]
    fn doubling_a_weight_quadruples_its_term() {
        let s = assemble(vec![line(0.0, 1.0, 0.0), line(1.0, 0.0, 0.0)]).unwrap();
        let p = Point2::new(0.0, 3.0);
        let w1 = WeightVector::new(vec![1.0, 0.0]).unwrap();
        let w2 = WeightVector::new(vec![2.0, 0.0]).unwrap();
        assert_eq!(
            objective(&s, &w2, p).unwrap(),
            4.0 * objective(&s, &w1, p).unwrap()
        );
    }

    #[test]
    fn gradient_examples() {
        let s = assemble(vec![line(0.0, 1.0, 0.0), line(1.0, 0.0, 0.0)]).unwrap();
        let w = WeightVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(
            objective_gradient(&s, &w, Point2::new(0.0, 3.0)).unwrap(),
            (0.0, 6.0)
        );

        let s = three_line_example();
        let (gx, gy) = objective_gradient(&s, &ones(3), Point2::new(0.0, 0.0)).unwrap();
        assert!((gx - -160.0 / 41.0).abs() < 1e-12);
        assert!((gy - -200.0 / 41.0).abs() < 1e-12);

        let sol = solve_ls(&s).unwrap();
        let (gx, gy) = objective_gradient(&s, &ones(3), sol.point).unwrap();
        assert!(gx.hypot(gy) < 1e-8);
    }

    #[test]
    fn condition_of_perpendicular_lines_is_one() {
        let s = assemble(vec![line(1.0, 0.0, 3.0), line(0.0, 1.0, -2.0)]).unwrap();
        assert_eq!(condition_number(&s, &ones(2)).unwrap(), 1.0);
    }

    #[test]
    fn condition_grows_as_lines_become_parallel() {
        let mut last = 1.0;
        for angle in [1.0f64, 0.5, 0.1, 0.01, 1e-3] {
            let s = assemble(vec![
                line(0.0, 1.0, 0.0),
                line(angle.sin(), angle.cos(), 1.0),
            ])
            .unwrap();
            let k = condition_number(&s, &ones(2)).unwrap();
            assert!(k > last, "angle {angle}: {k} <= {last}");
            last = k;
        }
        assert!(last > 1e6);
    }

    #[test]
    fn condition_of_three_line_example() {
        // Eigenvalues of (1/41)·[[57, 20], [20, 66]] from the characteristic
        // polynomial λ² - 123λ + 3362 = 0 (scaled by 41).
        let disc = (123.0f64 * 123.0 - 4.0 * 3362.0).sqrt();
        let expected = (123.0 + disc) / (123.0 - disc);
        let k = condition_number(&three_line_example(), &ones(3)).unwrap();
        assert!((k - expected).abs() < 1e-12, "{k} vs {expected}");
    }

    #[test]
    fn normal_matrix_of_three_line_example() {
        let n = normal_equations(&three_line_example(), &ones(3)).unwrap();
        assert!((n.p - 57.0 / 41.0).abs() < 1e-15);
        assert!((n.q - 20.0 / 41.0).abs() < 1e-15);
        assert!((n.r - 66.0 / 41.0).abs() < 1e-15);
    }

    #[test]
    fn coefficient_rows_match_unit_rows_after_normalization() {
        let raw = [
            LineCoefficients::new(1.0, 0.0, 0.0),
            LineCoefficients::new(0.8, 1.0, 4.0),
            LineCoefficients::new(0.0, 1.0, 0.0),
        ];
        // 0.8x + y = 4 is 4x + 5y = 20 with a different row scale, so the
        // unnormalized solve differs from the distance-based one.
        let raw_sol = solve_coefficients(&raw, &ones(3)).unwrap();
        let unit_sol = solve_ls(&three_line_example()).unwrap();
        assert!(raw_sol.point.distance(unit_sol.point) > 1e-3);
        assert!(matches!(
            solve_coefficients(&raw[..1], &ones(1)),
            Err(WlsError::TooFewLines(1))
        ));
    }
}
