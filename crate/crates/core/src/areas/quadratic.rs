use crate::geom::{sym_eigenvalues, sym_eigenvector, Mat2, Vec2};
use crate::{Error, Result};

/// Eigenvalues in `[-PSD_CLAMP, 0)` are treated as rounding noise.
pub const PSD_CLAMP: f64 = 1e-12;

/// Determinants below this are degenerate for area purposes.
pub const DEGENERATE_DET: f64 = 1e-14;

/// A Euclidean-type seminorm `s(v) = sqrt(vᵀ G v)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticSeminorm {
    gram: Mat2,
}

impl QuadraticSeminorm {
    /// Builds a seminorm from a Gram matrix, symmetrizing it and clamping
    /// eigenvalues within `PSD_CLAMP` of zero.
    pub fn new(gram: Mat2) -> Result<Self> {
        if gram.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidNorm("non-finite gram entry".into()));
        }
        let off = 0.5 * (gram[(0, 1)] + gram[(1, 0)]);
        let sym = Mat2::new(gram[(0, 0)], off, off, gram[(1, 1)]);
        let (lo, hi) = sym_eigenvalues(&sym);
        if lo < -PSD_CLAMP {
            return Err(Error::NotPsd(lo));
        }
        if lo >= 0.0 {
            return Ok(Self { gram: sym });
        }
        // rebuild with the negative eigenvalue removed
        let hi = hi.max(0.0);
        let v = sym_eigenvector(&sym, hi);
        Ok(Self {
            gram: v * v.transpose() * hi,
        })
    }

    pub fn identity() -> Self {
        Self {
            gram: Mat2::identity(),
        }
    }

    pub fn zero() -> Self {
        Self { gram: Mat2::zeros() }
    }

    /// `v ↦ |L v|` for a linear map with columns `L e1`, `L e2` in any
    /// Euclidean space, given as the 2×2 matrix `Lᵀ L`.
    pub fn from_pullback_gram(gram: Mat2) -> Result<Self> {
        Self::new(gram)
    }

    pub fn gram(&self) -> &Mat2 {
        &self.gram
    }

    pub fn eval(&self, v: &Vec2) -> f64 {
        v.dot(&(self.gram * v)).max(0.0).sqrt()
    }

    pub fn det(&self) -> f64 {
        self.gram.determinant()
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        let (lo, hi) = sym_eigenvalues(&self.gram);
        (lo.max(0.0), hi.max(0.0))
    }

    pub fn is_degenerate(&self) -> bool {
        self.det() < DEGENERATE_DET
    }

    /// Square of the largest stretch over unit vectors.
    pub fn max_stretch_sq(&self) -> f64 {
        self.eigenvalues().1
    }

    /// `s ∘ L`.
    pub fn compose(&self, l: &Mat2) -> Self {
        Self {
            gram: l.transpose() * self.gram * l,
        }
    }
}
