//! Exact arithmetic in Q(zeta_3), the field each Hesse-pencil base point
//! lives in. Elements are x + y*zeta with zeta^2 + zeta + 1 = 0.

use crate::scalar::Field;
use num_rational::BigRational;
use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct Cyclo {
    pub x: BigRational,
    pub y: BigRational,
}

impl fmt::Debug for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.y.is_zero() {
            write!(f, "{}", self.x)
        } else {
            write!(f, "{} + ({})z", self.x, self.y)
        }
    }
}

impl Cyclo {
    pub fn new(x: BigRational, y: BigRational) -> Self {
        Cyclo { x, y }
    }

    pub fn rational(x: BigRational) -> Self {
        Cyclo {
            x,
            y: BigRational::zero(),
        }
    }

    /// zeta_3 itself.
    pub fn zeta() -> Self {
        Cyclo {
            x: BigRational::zero(),
            y: Field::one(),
        }
    }

    pub fn is_rational(&self) -> bool {
        self.y.is_zero()
    }

    /// Complex conjugate: zeta -> zeta^2 = -1 - zeta.
    pub fn conj(&self) -> Self {
        Cyclo {
            x: &self.x - &self.y,
            y: -self.y.clone(),
        }
    }

    /// Field norm x^2 - x*y + y^2 (= |self|^2, non-negative).
    pub fn norm(&self) -> BigRational {
        &self.x * &self.x - &self.x * &self.y + &self.y * &self.y
    }

    pub fn inv(&self) -> Self {
        let n = self.norm();
        let c = self.conj();
        Cyclo {
            x: c.x / &n,
            y: c.y / n,
        }
    }
}

impl Field for Cyclo {
    fn zero() -> Self {
        Cyclo::rational(BigRational::zero())
    }
    fn one() -> Self {
        Cyclo::rational(Field::one())
    }
    fn from_i64(n: i64) -> Self {
        Cyclo::rational(Field::from_i64(n))
    }
    fn add(&self, rhs: &Self) -> Self {
        Cyclo {
            x: &self.x + &rhs.x,
            y: &self.y + &rhs.y,
        }
    }
    fn sub(&self, rhs: &Self) -> Self {
        Cyclo {
            x: &self.x - &rhs.x,
            y: &self.y - &rhs.y,
        }
    }
    fn mul(&self, rhs: &Self) -> Self {
        // (x1 + y1 z)(x2 + y2 z) with z^2 = -1 - z
        let x1x2 = &self.x * &rhs.x;
        let y1y2 = &self.y * &rhs.y;
        let cross = &self.x * &rhs.y + &self.y * &rhs.x;
        Cyclo {
            x: x1x2 - &y1y2,
            y: cross - y1y2,
        }
    }
    fn div(&self, rhs: &Self) -> Self {
        self.mul(&rhs.inv())
    }
    fn neg(&self) -> Self {
        Cyclo {
            x: -self.x.clone(),
            y: -self.y.clone(),
        }
    }
    fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_relations_hold_identically() {
        let z = Cyclo::zeta();
        let z2 = z.mul(&z);
        let z3 = z2.mul(&z);
        assert_eq!(z3, Field::one());
        // 1 + z + z^2 = 0
        let sum = Cyclo::one().add(&z).add(&z2);
        assert!(Field::is_zero(&sum));
        // conj(z) = z^2
        assert_eq!(z.conj(), z2);
    }

    #[test]
    fn inverse_and_norm() {
        let v = Cyclo::new(Field::from_i64(3), Field::from_i64(-2));
        assert_eq!(v.norm(), Field::from_i64(19));
        let prod = v.mul(&v.inv());
        assert_eq!(prod, Cyclo::one());
    }
}
