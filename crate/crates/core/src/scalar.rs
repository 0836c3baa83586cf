//! Minimal field interface shared by exact (cyclotomic) and floating-point values,
//! so the discrete complex-analysis checks run unchanged on both.

use crate::exact::Cyclo16;
use crate::lattice::{lambda_pow, Line};
use num_complex::Complex64;
use std::fmt::Debug;

pub trait Scalar: Clone + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn from_i64(n: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    fn re(&self) -> Self;
    fn im(&self) -> Self;
    fn half(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn lambda_pow(k: i32) -> Self;
    fn i() -> Self;
    fn to_c64(&self) -> Complex64;
    /// Size of a residual; exactly zero only for an exact zero.
    fn residual(&self) -> f64;

    /// Unit vector spanning a line.
    fn line_unit(l: Line) -> Self {
        Self::lambda_pow(-(l.eighths() as i32))
    }

    fn norm_sqr(&self) -> Self {
        self.mul(&self.conj()).re()
    }

    /// Orthogonal projection onto a line.
    fn project(&self, l: Line) -> Self {
        let u = Self::line_unit(l);
        u.mul(&u.conj().mul(self).re())
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn re(&self) -> Self {
        Complex64::new(self.re, 0.0)
    }
    fn im(&self) -> Self {
        Complex64::new(self.im, 0.0)
    }
    fn half(&self) -> Self {
        self * 0.5
    }
    fn inv(&self) -> Option<Self> {
        (self.norm_sqr() > 0.0).then(|| Complex64::inv(self))
    }
    fn lambda_pow(k: i32) -> Self {
        lambda_pow(k)
    }
    fn i() -> Self {
        Complex64::i()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn residual(&self) -> f64 {
        self.norm()
    }
}

impl Scalar for Cyclo16 {
    fn zero() -> Self {
        Cyclo16::zero()
    }
    fn from_i64(n: i64) -> Self {
        Cyclo16::from_int(n)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        Cyclo16::conj(self)
    }
    fn re(&self) -> Self {
        Cyclo16::re(self)
    }
    fn im(&self) -> Self {
        Cyclo16::im(self)
    }
    fn half(&self) -> Self {
        self.scale_int(1, 2)
    }
    fn inv(&self) -> Option<Self> {
        Cyclo16::inv(self)
    }
    fn lambda_pow(k: i32) -> Self {
        Cyclo16::zeta_pow(k)
    }
    fn i() -> Self {
        Cyclo16::i()
    }
    fn to_c64(&self) -> Complex64 {
        Cyclo16::to_c64(self)
    }
    fn residual(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.to_c64().norm().max(f64::MIN_POSITIVE)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_agrees_between_scalars() {
        let z = Cyclo16::from_int_coeffs([1, 2, -1, 0, 3, 0, 1, -2]);
        for j in 0..8 {
            let l = Line::from_eighths(j);
            let pe = Scalar::project(&z, l).to_c64();
            let pf = Scalar::project(&z.to_c64(), l);
            assert!((pe - pf).norm() < 1e-12);
            assert!((pf - l.project(z.to_c64())).norm() < 1e-12);
        }
    }
}
