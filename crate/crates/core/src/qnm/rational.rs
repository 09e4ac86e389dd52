//! Exact rational polynomials, enough to expand the eigenvalue equation about `y = 1`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    num: i128,
    den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Rational {
    pub const ZERO: Self = Self { num: 0, den: 1 };
    pub const ONE: Self = Self { num: 1, den: 1 };

    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Self { num: s * num / g, den: s * den / g }
    }

    pub fn int(n: i128) -> Self {
        Self { num: n, den: 1 }
    }

    pub fn num(self) -> i128 {
        self.num
    }

    pub fn den(self) -> i128 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Add for Rational {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.num * o.den + o.num * self.den, self.den * o.den)
    }
}

impl Sub for Rational {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for Rational {
    type Output = Self;
    fn neg(self) -> Self {
        Self { num: -self.num, den: self.den }
    }
}

impl Mul for Rational {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.num * o.num, self.den * o.den)
    }
}

/// Polynomial with rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly(pub Vec<Rational>);

impl Poly {
    pub fn from_ints(c: &[i128]) -> Self {
        Self(c.iter().map(|&v| Rational::int(v)).collect()).trimmed()
    }

    pub fn constant(c: Rational) -> Self {
        Self(vec![c]).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.len() > 1 && self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        if self.0.is_empty() {
            self.0.push(Rational::ZERO);
        }
        self
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.0.get(k).copied().unwrap_or(Rational::ZERO)
    }

    pub fn scale(&self, c: Rational) -> Self {
        Self(self.0.iter().map(|&a| a * c).collect()).trimmed()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64())
    }

    /// `p(1 - t)` as a polynomial in `t`.
    pub fn reflect_about_one(&self) -> Self {
        let mut out = Poly::constant(Rational::ZERO);
        let one_minus_t = Poly::from_ints(&[1, -1]);
        let mut power = Poly::constant(Rational::ONE);
        for &c in &self.0 {
            out = &out + &power.scale(c);
            power = &power * &one_minus_t;
        }
        out
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect()).trimmed()
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        self + &o.scale(-Rational::ONE)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut c = vec![Rational::ZERO; self.0.len() + o.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in o.0.iter().enumerate() {
                c[i + j] = c[i + j] + a * b;
            }
        }
        Poly(c).trimmed()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_arithmetic() {
        let a = Rational::new(15, 4);
        let b = Rational::new(-6, 8);
        assert_eq!(a + b, Rational::int(3));
        assert_eq!(a * b, Rational::new(-45, 16));
        assert_eq!(Rational::new(2, -4), Rational::new(-1, 2));
    }

    #[test]
    fn reflection() {
        // y^2 at y = 1 - t is 1 - 2t + t^2
        let p = Poly::from_ints(&[0, 0, 1]).reflect_about_one();
        assert_eq!(p, Poly::from_ints(&[1, -2, 1]));
        let q = Poly::from_ints(&[3, -1, 4, 1, -5]);
        for t in [0.0, 0.3, -1.7] {
            assert!((q.reflect_about_one().eval(t) - q.eval(1.0 - t)).abs() < 1e-12);
        }
    }
}
