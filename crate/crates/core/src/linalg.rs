//! Fixed-size 2x2 complex matrices for the covariance algebra.

use crate::C64;

/// Row-major 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[C64::new(0.0, 0.0); 2]; 2]);

    pub fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn diag(a: C64, b: C64) -> Self {
        Mat2::new(a, C64::new(0.0, 0.0), C64::new(0.0, 0.0), b)
    }

    pub fn identity() -> Self {
        Mat2::diag(C64::new(1.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0], m[1][0], m[0][1], m[1][1])
    }

    pub fn mul(&self, o: &Mat2) -> Self {
        let (a, b) = (&self.0, &o.0);
        let mut out = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    pub fn add(&self, o: &Mat2) -> Self {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += o.0[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn is_diagonal(&self) -> bool {
        self.0[0][1] == C64::new(0.0, 0.0) && self.0[1][0] == C64::new(0.0, 0.0)
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        let mut m = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - o.0[i][j]).norm());
            }
        }
        m
    }

    /// Eigenvalues `(tr/2 + r, tr/2 - r)`, `r` the principal root of `(tr/2)^2 - det`.
    pub fn eigenvalues(&self) -> (C64, C64) {
        let half = (self.0[0][0] + self.0[1][1]) * 0.5;
        let r = (half * half - self.det()).sqrt();
        (half + r, half - r)
    }
}
