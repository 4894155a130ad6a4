//! Orthogonal projection of a vector onto the span of an orthogonal basis.
//!
//! Any `y` splits uniquely as `y = ŷ + z` with `ŷ` in the span and `z`
//! orthogonal to it, where `ŷ = Σ (y·u_j)/(u_j·u_j) u_j`. The least-squares
//! placement is this projection for the column space of the line system.

use thiserror::Error;

/// Basis vectors whose pairwise dot product exceeds this are rejected.
pub const ORTHOGONALITY_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjectionError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("basis vector {0} is zero")]
    ZeroBasisVector(usize),
    #[error("basis vectors {0} and {1} are not orthogonal (dot product {2:e})")]
    NotOrthogonal(usize, usize, f64),
    #[error("basis is empty")]
    EmptyBasis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorN(pub Vec<f64>);

impl VectorN {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &VectorN) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for VectorN {
    fn from(v: Vec<f64>) -> Self {
        VectorN(v)
    }
}

/// Mutually orthogonal nonzero vectors of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalBasis {
    vectors: Vec<VectorN>,
}

impl OrthogonalBasis {
    pub fn new(vectors: Vec<VectorN>) -> Result<Self, ProjectionError> {
        let dim = vectors.first().ok_or(ProjectionError::EmptyBasis)?.dim();
        for (i, u) in vectors.iter().enumerate() {
            if u.dim() != dim {
                return Err(ProjectionError::DimensionMismatch {
                    expected: dim,
                    found: u.dim(),
                });
            }
            if u.0.iter().all(|&c| c == 0.0) {
                return Err(ProjectionError::ZeroBasisVector(i));
            }
        }
        for i in 0..vectors.len() {
            for j in i + 1..vectors.len() {
                let dot = vectors[i].dot(&vectors[j]);
                if dot.abs() >= ORTHOGONALITY_EPS {
                    return Err(ProjectionError::NotOrthogonal(i, j, dot));
                }
            }
        }
        Ok(OrthogonalBasis { vectors })
    }

    /// Modified Gram-Schmidt; vectors that are (numerically) dependent on the
    /// earlier ones are dropped. Output vectors are unit length.
    pub fn orthonormalize(vectors: &[VectorN]) -> Result<Self, ProjectionError> {
        let mut out: Vec<VectorN> = Vec::with_capacity(vectors.len());
        for v in vectors {
            let mut w = v.clone();
            // Two passes keep the result orthogonal to working precision.
            for _ in 0..2 {
                for u in &out {
                    let c = w.dot(u);
                    w.0.iter_mut().zip(&u.0).for_each(|(wi, ui)| *wi -= c * ui);
                }
            }
            let n = w.norm();
            if n > 1e-10 * v.norm().max(f64::MIN_POSITIVE) {
                w.0.iter_mut().for_each(|c| *c /= n);
                out.push(w);
            }
        }
        Self::new(out)
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn vectors(&self) -> &[VectorN] {
        &self.vectors
    }
}

/// Returns `(ŷ, z)` with `ŷ` the projection of `y` onto the span of `basis`
/// and `z = y - ŷ`.
pub fn project_onto_basis(
    y: &VectorN,
    basis: &OrthogonalBasis,
) -> Result<(VectorN, VectorN), ProjectionError> {
    if y.dim() != basis.dim() {
        return Err(ProjectionError::DimensionMismatch {
            expected: basis.dim(),
            found: y.dim(),
        });
    }
    let mut yhat = vec![0.0; y.dim()];
    for u in &basis.vectors {
        let coeff = y.dot(u) / u.dot(u);
        yhat.iter_mut()
            .zip(&u.0)
            .for_each(|(h, ui)| *h += coeff * ui);
    }
    let z = y.0.iter().zip(&yhat).map(|(a, b)| a - b).collect();
    Ok((VectorN(yhat), VectorN(z)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> VectorN {
        VectorN(xs.to_vec())
    }

    #[test]
    fn axis_projection() {
        let basis = OrthogonalBasis::new(vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])]).unwrap();
        let (yhat, z) = project_onto_basis(&v(&[3.0, 4.0, 5.0]), &basis).unwrap();
        assert_eq!(yhat, v(&[3.0, 4.0, 0.0]));
        assert_eq!(z, v(&[0.0, 0.0, 5.0]));
    }

    #[test]
    fn vector_in_span_has_zero_remainder() {
        let basis = OrthogonalBasis::new(vec![v(&[1.0, 1.0, 0.0]), v(&[1.0, -1.0, 2.0])]).unwrap();
        let y = v(&[3.0, -1.0, 4.0]);
        let (yhat, z) = project_onto_basis(&y, &basis).unwrap();
        assert!(z.0.iter().all(|c| c.abs() < 1e-14), "{z:?}");
        assert!(yhat.0.iter().zip(&y.0).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn projection_onto_diagonal() {
        let basis = OrthogonalBasis::new(vec![v(&[1.0, 1.0])]).unwrap();
        let (yhat, z) = project_onto_basis(&v(&[1.0, 2.0]), &basis).unwrap();
        assert_eq!(yhat, v(&[1.5, 1.5]));
        assert_eq!(z, v(&[-0.5, 0.5]));
    }

    #[test]
    fn basis_validation() {
        assert_eq!(
            OrthogonalBasis::new(vec![v(&[1.0, 0.0]), v(&[0.0, 0.0])]),
            Err(ProjectionError::ZeroBasisVector(1))
        );
        assert!(matches!(
            OrthogonalBasis::new(vec![v(&[1.0, 0.0]), v(&[1.0, 1.0])]),
            Err(ProjectionError::NotOrthogonal(0, 1, _))
        ));
        assert_eq!(
            OrthogonalBasis::new(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0, 0.0])]),
            Err(ProjectionError::DimensionMismatch {
                expected: 2,
                found: 3
            })
        );
        assert_eq!(
            OrthogonalBasis::new(vec![]),
            Err(ProjectionError::EmptyBasis)
        );
    }

    #[test]
    fn projection_checks_dimension() {
        let basis = OrthogonalBasis::new(vec![v(&[1.0, 0.0])]).unwrap();
        assert_eq!(
            project_onto_basis(&v(&[1.0, 2.0, 3.0]), &basis),
            Err(ProjectionError::DimensionMismatch {
                expected: 2,
                found: 3
            })
        );
    }

    #[test]
    fn orthonormalize_drops_dependent_vectors() {
        let basis = OrthogonalBasis::orthonormalize(&[
            v(&[1.0, 1.0, 0.0]),
            v(&[2.0, 2.0, 0.0]),
            v(&[0.0, 1.0, 1.0]),
        ])
        .unwrap();
        assert_eq!(basis.vectors().len(), 2);
        for u in basis.vectors() {
            assert!((u.norm() - 1.0).abs() < 1e-15);
        }
    }
}
