use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{ExactError, Poly, Rat};

/// Behaviour of a rational function as `n -> infinity`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AtInfinity {
    /// Nonzero finite limit (numerator and denominator of equal degree).
    Finite(#[serde(with = "super::serde_rat")] Rat),
    Zero,
    Divergent,
}

impl AtInfinity {
    /// The limit as a rational, `None` when divergent.
    pub fn value(&self) -> Option<Rat> {
        match self {
            AtInfinity::Finite(v) => Some(v.clone()),
            AtInfinity::Zero => Some(Rat::zero()),
            AtInfinity::Divergent => None,
        }
    }
}

/// Element of Q(n) in canonical form: `gcd(num, den) = 1`, `den` monic.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<Self, ExactError> {
        if den.is_zero() {
            return Err(ExactError::DivisionByZero { pos: 0 });
        }
        Ok(Self::canonical(num, den))
    }

    fn canonical(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let g = Poly::gcd(&num, &den);
        let (num, den) = if g.degree() == Some(0) {
            (num, den)
        } else {
            (num.divrem(&g).0, den.divrem(&g).0)
        };
        let lc = den.leading().expect("nonzero denominator").recip();
        RatFunc {
            num: num.scale(&lc),
            den: den.scale(&lc),
        }
    }

    pub fn zero() -> Self {
        RatFunc {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        RatFunc {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    /// The limit variable `n`.
    pub fn var() -> Self {
        Self::from_poly(Poly::var())
    }

    /// `n^e` for any integer exponent.
    pub fn var_pow(e: i32) -> Self {
        let m = Poly::monomial(Rat::one(), e.unsigned_abs() as usize);
        if e >= 0 {
            Self::from_poly(m)
        } else {
            RatFunc {
                num: Poly::one(),
                den: m,
            }
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn constant_value(&self) -> Option<Rat> {
        if self.den.degree() == Some(0) {
            self.num.constant_value()
        } else {
            None
        }
    }

    /// `deg num - deg den`; `None` for zero.
    pub fn degree(&self) -> Option<i64> {
        let dn = self.num.degree()? as i64;
        Some(dn - self.den.degree().unwrap_or(0) as i64)
    }

    pub fn value_at_infinity(&self) -> AtInfinity {
        match self.degree() {
            None => AtInfinity::Zero,
            Some(d) if d < 0 => AtInfinity::Zero,
            Some(0) => {
                AtInfinity::Finite(self.num.leading().unwrap() / self.den.leading().unwrap())
            }
            Some(_) => AtInfinity::Divergent,
        }
    }

    pub fn eval_at(&self, n0: &Rat) -> Result<Rat, ExactError> {
        let d = self.den.eval(n0);
        if d.is_zero() {
            return Err(ExactError::Pole(n0.to_string()));
        }
        Ok(self.num.eval(n0) / d)
    }

    pub fn recip(&self) -> Result<Self, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero { pos: 0 });
        }
        Ok(Self::canonical(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ExactError> {
        Ok(self * &other.recip()?)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        RatFunc {
            num: self.num.scale(c),
            den: if c.is_zero() {
                Poly::one()
            } else {
                self.den.clone()
            },
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        RatFunc {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }

    /// Multiplies by `n^e`.
    pub fn shift(&self, e: i64) -> Self {
        if e == 0 || self.is_zero() {
            return self.clone();
        }
        self * &Self::var_pow(e as i32)
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RatFunc::canonical(&self.num + &rhs.num, self.den.clone());
        }
        RatFunc::canonical(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        if self.den.degree() == Some(0) && rhs.den.degree() == Some(0) {
            return RatFunc::from_poly(&self.num * &rhs.num);
        }
        RatFunc::canonical(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            if self.num.degree().unwrap_or(0) == 0 {
                write!(f, "{}", self.num)
            } else {
                write!(f, "({})", self.num)
            }
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    fn poly(c: &[i64]) -> Poly {
        Poly::from_coeffs(c.iter().map(|&v| int(v)).collect())
    }

    #[test]
    fn at_infinity_cases() {
        let f = RatFunc::new(poly(&[0, 3]), poly(&[1, 1])).unwrap();
        assert_eq!(f.value_at_infinity(), AtInfinity::Finite(int(3)));
        assert_eq!(RatFunc::var_pow(-3).value_at_infinity(), AtInfinity::Zero);
        let g = RatFunc::from_poly(Poly::monomial(rat(1, 20), 2));
        assert_eq!(g.value_at_infinity(), AtInfinity::Divergent);
        assert_eq!(RatFunc::zero().value_at_infinity(), AtInfinity::Zero);
    }

    #[test]
    fn eval_cancels_removable_pole() {
        let f = RatFunc::new(poly(&[-1, 0, 1]), poly(&[-1, 1])).unwrap();
        assert_eq!(f, RatFunc::from_poly(poly(&[1, 1])));
        assert_eq!(f.eval_at(&int(1)).unwrap(), int(2));
        let g = RatFunc::new(poly(&[9]), poly(&[1, 0, 0, -1])).unwrap();
        assert!(matches!(g.eval_at(&int(1)), Err(ExactError::Pole(_))));
        let h = RatFunc::from_poly(Poly::monomial(rat(1, 20), 2));
        assert_eq!(h.eval_at(&int(10)).unwrap(), int(5));
    }

    #[test]
    fn denominator_is_monic() {
        let g = RatFunc::new(poly(&[9]), poly(&[1, 0, 0, -1])).unwrap();
        assert_eq!(g.den().leading().unwrap(), &int(1));
        assert_eq!(g.num(), &poly(&[-9]));
        assert_eq!(g.eval_at(&int(2)).unwrap(), rat(-9, 7));
    }

    #[test]
    fn zero_has_unit_denominator() {
        let z = RatFunc::new(Poly::zero(), poly(&[0, 5])).unwrap();
        assert_eq!(z, RatFunc::zero());
        assert!(RatFunc::new(poly(&[1]), Poly::zero()).is_err());
    }
}
