//! Truncated real power-series arithmetic.
//!
//! Series are plain coefficient vectors around a fixed expansion point;
//! binary operations truncate to the shorter operand, and differentiation
//! drops one order, so the length of a result is exactly the number of
//! trustworthy coefficients when the inputs were exact to their lengths.

/// Truncated power series `c[0] + c[1] z + c[2] z^2 + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub c: Vec<f64>,
}

impl Series {
    pub fn constant(value: f64, len: usize) -> Self {
        let mut c = vec![0.0; len];
        c[0] = value;
        Self { c }
    }

    /// The affine series `c0 + c1 z`.
    pub fn affine(c0: f64, c1: f64, len: usize) -> Self {
        let mut c = vec![0.0; len];
        c[0] = c0;
        if len > 1 {
            c[1] = c1;
        }
        Self { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.len().min(other.len());
        Self {
            c: (0..n).map(|i| self.c[i] + other.c[i]).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.len().min(other.len());
        Self {
            c: (0..n).map(|i| self.c[i] - other.c[i]).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            c: self.c.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.len().min(other.len());
        let mut c = vec![0.0; n];
        for i in 0..n {
            for j in 0..=i {
                c[i] += self.c[j] * other.c[i - j];
            }
        }
        Self { c }
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn recip(&self) -> Self {
        assert!(
            self.c[0] != 0.0,
            "series reciprocal needs a nonzero constant term"
        );
        let n = self.len();
        let mut b = vec![0.0; n];
        b[0] = 1.0 / self.c[0];
        for i in 1..n {
            let mut acc = 0.0;
            for j in 1..=i {
                acc += self.c[j] * b[i - j];
            }
            b[i] = -acc / self.c[0];
        }
        Self { c: b }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.recip())
    }

    /// Exponential of the series.
    pub fn exp(&self) -> Self {
        let n = self.len();
        let mut g = vec![0.0; n];
        g[0] = self.c[0].exp();
        for i in 1..n {
            // g' = f' g, coefficient i-1 of both sides
            let mut acc = 0.0;
            for j in 1..=i {
                acc += j as f64 * self.c[j] * g[i - j];
            }
            g[i] = acc / i as f64;
        }
        Self { c: g }
    }

    /// Term-by-term derivative; one order shorter.
    pub fn derivative(&self) -> Self {
        let n = self.len();
        if n <= 1 {
            return Self { c: vec![0.0] };
        }
        Self {
            c: (1..n).map(|i| i as f64 * self.c[i]).collect(),
        }
    }

    /// Multiply by `z` (shift up), keeping the length.
    pub fn shift_up(&self) -> Self {
        let mut c = vec![0.0; self.len()];
        for i in 1..self.len() {
            c[i] = self.c[i - 1];
        }
        Self { c }
    }

    /// Divide by `z`; panics if the constant term is not (numerically) zero.
    pub fn shift_down(&self, tol: f64) -> Self {
        assert!(
            self.c[0].abs() <= tol,
            "cannot divide by z: constant term {} exceeds {}",
            self.c[0],
            tol
        );
        let mut c: Vec<f64> = self.c[1..].to_vec();
        if c.is_empty() {
            c.push(0.0);
        }
        Self { c }
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn eval(&self, z: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &v| acc * z + v)
    }

    pub fn truncate(&self, len: usize) -> Self {
        Self {
            c: self.c[..len.min(self.len())].to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_against_binomial() {
        // (1+z)^2 = 1 + 2z + z^2
        let a = Series::affine(1.0, 1.0, 6);
        let sq = a.mul(&a);
        assert_eq!(&sq.c[..3], &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn reciprocal_of_one_plus_z() {
        let a = Series::affine(1.0, 1.0, 8);
        let r = a.recip();
        for (i, &v) in r.c.iter().enumerate() {
            let expect = if i % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn exponential_series() {
        // e^{2z}: coefficients 2^n/n!
        let a = Series::affine(0.0, 2.0, 10);
        let e = a.exp();
        let mut factorial = 1.0;
        for (i, &v) in e.c.iter().enumerate() {
            if i > 0 {
                factorial *= i as f64;
            }
            assert!((v - 2f64.powi(i as i32) / factorial).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_and_shift() {
        let a = Series {
            c: vec![1.0, 2.0, 3.0, 4.0],
        };
        assert_eq!(a.derivative().c, vec![2.0, 6.0, 12.0]);
        assert_eq!(a.shift_up().c, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn exp_of_negative_square() {
        // e^{-(1+z)^2} around z=0: check against finite differences of the function
        let rbar = 1.0;
        let minus_sq = Series::affine(rbar, 1.0, 12)
            .mul(&Series::affine(rbar, 1.0, 12))
            .scale(-1.0);
        let e = minus_sq.exp();
        let f = |z: f64| (-(rbar + z) * (rbar + z)).exp();
        for &z in &[-0.1, 0.05, 0.2] {
            assert!((e.eval(z) - f(z)).abs() < 1e-10);
        }
    }
}
