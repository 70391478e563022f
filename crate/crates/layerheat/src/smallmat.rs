//! Real 2×2 matrices: rotations, hyperbolic rotations, stretches and their
//! ordered products.
//!
//! Ordered products follow the "lowest index on the right" convention:
//! the product over the index range `a..b` is `A_{b-1} · … · A_{a+1} · A_a`.

use std::ops::{Add, Mul, Neg, Range, Sub};

use crate::error::{Error, Result};

/// Largest |φ| accepted by [`hyper`]; cosh overflows shortly after 710.
pub const HYPER_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    /// Entry at zero-based row `r` and column `c`.
    pub fn at(&self, r: usize, c: usize) -> f64 {
        match (r, c) {
            (0, 0) => self.a11,
            (0, 1) => self.a12,
            (1, 0) => self.a21,
            (1, 1) => self.a22,
            _ => panic!("index ({r}, {c}) outside a 2x2 matrix"),
        }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn inverse(&self) -> Result<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return Err(Error::Singular(format!("2x2 inverse, det = {d}")));
        }
        Ok(Mat2::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d))
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    pub fn scale(&self, c: f64) -> Mat2 {
        Mat2::new(c * self.a11, c * self.a12, c * self.a21, c * self.a22)
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    /// Largest absolute entry difference.
    pub fn max_diff(&self, other: &Mat2) -> f64 {
        (self.a11 - other.a11)
            .abs()
            .max((self.a12 - other.a12).abs())
            .max((self.a21 - other.a21).abs())
            .max((self.a22 - other.a22).abs())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * r.a11 + self.a12 * r.a21,
            self.a11 * r.a12 + self.a12 * r.a22,
            self.a21 * r.a11 + self.a22 * r.a21,
            self.a21 * r.a12 + self.a22 * r.a22,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a11 + r.a11, self.a12 + r.a12, self.a21 + r.a21, self.a22 + r.a22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a11 - r.a11, self.a12 - r.a12, self.a21 - r.a21, self.a22 - r.a22)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

fn finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} must be finite, got {x}")))
    }
}

/// Rotation by `phi` radians: `[[cos, -sin], [sin, cos]]`.
pub fn rotation(phi: f64) -> Result<Mat2> {
    finite(phi, "rotation angle")?;
    let (s, c) = phi.sin_cos();
    Ok(Mat2::new(c, -s, s, c))
}

/// Hyperbolic rotation `[[cosh, sinh], [sinh, cosh]]`.
pub fn hyper(phi: f64) -> Result<Mat2> {
    finite(phi, "hyperbolic angle")?;
    if phi.abs() > HYPER_LIMIT {
        return Err(Error::Overflow(format!("cosh({phi}) exceeds the representable range")));
    }
    let (c, s) = (phi.cosh(), phi.sinh());
    Ok(Mat2::new(c, s, s, c))
}

/// `diag(alpha, beta)`; `stretch(1, beta)` is the one-parameter shorthand.
pub fn stretch(alpha: f64, beta: f64) -> Result<Mat2> {
    finite(alpha, "stretch alpha")?;
    finite(beta, "stretch beta")?;
    Ok(Mat2::new(alpha, 0.0, 0.0, beta))
}

/// `A_{b-1} · … · A_a` for the half-open range `a..b`; an empty range gives the identity.
pub fn ordered_product(factors: &[Mat2], range: Range<usize>) -> Mat2 {
    if range.is_empty() {
        return Mat2::IDENTITY;
    }
    factors[range].iter().fold(Mat2::IDENTITY, |acc, m| *m * acc)
}

/// Product of all factors with the first element rightmost.
pub fn product_all(factors: &[Mat2]) -> Mat2 {
    factors.iter().fold(Mat2::IDENTITY, |acc, m| *m * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn rotation_examples() {
        assert_eq!(rotation(0.0).unwrap(), Mat2::IDENTITY);
        let q = rotation(PI / 2.0).unwrap();
        assert!(q.max_diff(&Mat2::new(0.0, -1.0, 1.0, 0.0)) < 1e-15);
        let p = rotation(0.3).unwrap() * rotation(0.4).unwrap();
        assert!(p.max_diff(&rotation(0.7).unwrap()) < 1e-14);
        assert!(rotation(f64::NAN).is_err());
    }

    #[test]
    fn hyper_examples() {
        assert_eq!(hyper(0.0).unwrap(), Mat2::IDENTITY);
        let p = hyper(0.2).unwrap() * hyper(0.5).unwrap();
        assert!(p.max_diff(&hyper(0.7).unwrap()) < 1e-13);
        assert!((hyper(1.3).unwrap().det() - 1.0).abs() < 1e-14);
        assert!(matches!(hyper(701.0), Err(Error::Overflow(_))));
        assert!(hyper(-700.0).is_ok());
    }

    #[test]
    fn stretch_examples() {
        assert_eq!(stretch(1.0, 1.0).unwrap(), Mat2::IDENTITY);
        assert_eq!(stretch(1.0, 0.5).unwrap(), Mat2::new(1.0, 0.0, 0.0, 0.5));
        let p = stretch(2.0, 3.0).unwrap() * stretch(0.5, 1.0 / 3.0).unwrap();
        assert!(p.max_diff(&Mat2::IDENTITY) < 1e-15);
    }

    #[test]
    fn ordered_product_examples() {
        let f = [stretch(2.0, 1.0).unwrap(), rotation(PI / 2.0).unwrap()];
        assert_eq!(ordered_product(&f, 0..0), Mat2::IDENTITY);
        assert_eq!(ordered_product(&f, 1..1), Mat2::IDENTITY);
        assert_eq!(ordered_product(&f, 0..1), f[0]);
        let p = ordered_product(&f, 0..2);
        assert!(p.max_diff(&Mat2::new(0.0, -1.0, 2.0, 0.0)) < 1e-15);
        let r = f[0] * f[1];
        assert!(r.max_diff(&Mat2::new(0.0, -2.0, 1.0, 0.0)) < 1e-15);
    }

    proptest! {
        #[test]
        fn unit_determinants(phi in -50.0f64..50.0) {
            prop_assert!((rotation(phi).unwrap().det() - 1.0).abs() < 1e-13);
            let h = hyper(phi / 10.0).unwrap();
            prop_assert!((h.det() - 1.0).abs() < 1e-13 * h.a11 * h.a11);
        }

        #[test]
        fn rotation_inverse_is_negative_angle(phi in -50.0f64..50.0) {
            let inv = rotation(phi).unwrap().inverse().unwrap();
            prop_assert!(inv.max_diff(&rotation(-phi).unwrap()) < 1e-13);
        }

        #[test]
        fn triple_product_order(a in -3.0f64..3.0, b in 0.1f64..3.0, c in -3.0f64..3.0) {
            let f = [rotation(a).unwrap(), stretch(1.0, b).unwrap(), hyper(c).unwrap()];
            let explicit = f[2] * (f[1] * f[0]);
            prop_assert!(ordered_product(&f, 0..3).max_diff(&explicit) < 1e-12 * (1.0 + c.cosh()));
        }
    }
}
