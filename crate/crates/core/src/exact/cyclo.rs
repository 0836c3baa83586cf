//! Exact arithmetic in the cyclotomic field Q(zeta), zeta = exp(-i pi / 8).
//!
//! Elements are stored on the power basis 1, zeta, ..., zeta^7 with
//! zeta^8 = -1. This field contains lambda = zeta, i = -zeta^4 and
//! sqrt(2) = zeta^2 - zeta^6, so every observable of the loop model at
//! q = 2 is an element of it.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cyclo16 {
    c: [BigRational; 8],
}

impl Default for Cyclo16 {
    fn default() -> Self {
        Cyclo16::zero()
    }
}

impl Cyclo16 {
    pub fn zero() -> Cyclo16 {
        Cyclo16 { c: std::array::from_fn(|_| BigRational::zero()) }
    }

    pub fn one() -> Cyclo16 {
        Cyclo16::from_int(1)
    }

    pub fn from_int(n: i64) -> Cyclo16 {
        let mut z = Cyclo16::zero();
        z.c[0] = BigRational::from_integer(BigInt::from(n));
        z
    }

    pub fn from_rational(r: BigRational) -> Cyclo16 {
        let mut z = Cyclo16::zero();
        z.c[0] = r;
        z
    }

    /// Element with integer coefficients on the power basis.
    pub fn from_int_coeffs(k: [i64; 8]) -> Cyclo16 {
        Cyclo16 { c: k.map(|x| BigRational::from_integer(BigInt::from(x))) }
    }

    pub fn from_big_coeffs(k: [BigInt; 8]) -> Cyclo16 {
        Cyclo16 { c: k.map(BigRational::from_integer) }
    }

    pub fn coeffs(&self) -> &[BigRational; 8] {
        &self.c
    }

    /// zeta^k = lambda^k = exp(-i pi k / 8).
    pub fn zeta_pow(k: i32) -> Cyclo16 {
        let r = k.rem_euclid(16) as usize;
        let mut z = Cyclo16::zero();
        if r < 8 {
            z.c[r] = BigRational::one();
        } else {
            z.c[r - 8] = -BigRational::one();
        }
        z
    }

    pub fn i() -> Cyclo16 {
        -Cyclo16::zeta_pow(4)
    }

    pub fn sqrt2() -> Cyclo16 {
        Cyclo16::zeta_pow(2) - Cyclo16::zeta_pow(6)
    }

    /// 2 cos(pi / 8) = zeta + zeta^-1.
    pub fn two_cos_pi8() -> Cyclo16 {
        Cyclo16::zeta_pow(1) + Cyclo16::zeta_pow(15)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    /// Galois automorphism zeta -> zeta^j for odd j.
    pub fn galois(&self, j: i32) -> Cyclo16 {
        debug_assert!(j % 2 != 0);
        let mut z = Cyclo16::zero();
        for (k, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let r = (j * k as i32).rem_euclid(16) as usize;
            if r < 8 {
                z.c[r] += a;
            } else {
                z.c[r - 8] -= a;
            }
        }
        z
    }

    /// Complex conjugate, zeta -> zeta^15.
    pub fn conj(&self) -> Cyclo16 {
        self.galois(15)
    }

    pub fn re(&self) -> Cyclo16 {
        (self + &self.conj()).scale_int(1, 2)
    }

    /// Imaginary part, (z - conj z) / (2i); note 1/i = zeta^4.
    pub fn im(&self) -> Cyclo16 {
        ((self - &self.conj()) * Cyclo16::zeta_pow(4)).scale_int(1, 2)
    }

    pub fn is_real(&self) -> bool {
        *self == self.conj()
    }

    pub fn scale(&self, r: &BigRational) -> Cyclo16 {
        Cyclo16 { c: std::array::from_fn(|k| &self.c[k] * r) }
    }

    pub fn scale_int(&self, num: i64, den: i64) -> Cyclo16 {
        self.scale(&BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Field norm down to Q: product of all eight conjugates.
    pub fn norm(&self) -> BigRational {
        let mut p = self.clone();
        for j in [3, 5, 7, 9, 11, 13, 15] {
            p = &p * &self.galois(j);
        }
        debug_assert!(p.c[1..].iter().all(|x| x.is_zero()));
        p.c[0].clone()
    }

    pub fn inv(&self) -> Option<Cyclo16> {
        if self.is_zero() {
            return None;
        }
        let mut p = Cyclo16::one();
        for j in [3, 5, 7, 9, 11, 13, 15] {
            p = &p * &self.galois(j);
        }
        let n = (&p * self).c[0].clone();
        Some(p.scale(&n.recip()))
    }

    pub fn to_c64(&self) -> Complex64 {
        let mut z = Complex64::new(0.0, 0.0);
        for (k, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            z += crate::lattice::lambda_pow(k as i32) * ratio_to_f64(a);
        }
        z
    }

    /// Largest numerator or denominator bit length, a size diagnostic.
    pub fn height_bits(&self) -> u64 {
        self.c.iter().map(|x| x.numer().bits().max(x.denom().bits())).max().unwrap_or(0)
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // scale down huge numerators and denominators together
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000) as usize;
    let n = (r.numer().abs() >> shift).to_f64().unwrap_or(f64::MAX);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::MAX);
    let v = n / d;
    if r.is_negative() {
        -v
    } else {
        v
    }
}

impl<'a> Add<&'a Cyclo16> for &'a Cyclo16 {
    type Output = Cyclo16;
    fn add(self, o: &Cyclo16) -> Cyclo16 {
        Cyclo16 { c: std::array::from_fn(|k| &self.c[k] + &o.c[k]) }
    }
}

impl<'a> Sub<&'a Cyclo16> for &'a Cyclo16 {
    type Output = Cyclo16;
    fn sub(self, o: &Cyclo16) -> Cyclo16 {
        Cyclo16 { c: std::array::from_fn(|k| &self.c[k] - &o.c[k]) }
    }
}

impl<'a> Mul<&'a Cyclo16> for &'a Cyclo16 {
    type Output = Cyclo16;
    fn mul(self, o: &Cyclo16) -> Cyclo16 {
        let mut z = Cyclo16::zero();
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let p = a * b;
                let r = i + j;
                if r < 8 {
                    z.c[r] += p;
                } else {
                    z.c[r - 8] -= p;
                }
            }
        }
        z
    }
}

impl Neg for &Cyclo16 {
    type Output = Cyclo16;
    fn neg(self) -> Cyclo16 {
        Cyclo16 { c: std::array::from_fn(|k| -&self.c[k]) }
    }
}

macro_rules! by_value {
    ($tr:ident, $f:ident) => {
        impl $tr<Cyclo16> for Cyclo16 {
            type Output = Cyclo16;
            fn $f(self, o: Cyclo16) -> Cyclo16 {
                (&self).$f(&o)
            }
        }
    };
}
by_value!(Add, add);
by_value!(Sub, sub);
by_value!(Mul, mul);

impl Neg for Cyclo16 {
    type Output = Cyclo16;
    fn neg(self) -> Cyclo16 {
        -&self
    }
}

impl AddAssign<&Cyclo16> for Cyclo16 {
    fn add_assign(&mut self, o: &Cyclo16) {
        for k in 0..8 {
            self.c[k] += &o.c[k];
        }
    }
}

impl fmt::Debug for Cyclo16 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cyclo16 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{a}")?,
                _ => write!(f, "({a})z^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
