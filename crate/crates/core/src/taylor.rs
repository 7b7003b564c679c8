//! Truncated Taylor polynomials ("jets") for exact higher derivatives.
//!
//! A jet of degree `d` stores `f(x0), f'(x0), f''(x0)/2!, ..., f^(d)(x0)/d!`.
//! Arithmetic on jets propagates all coefficients through the rational
//! functions used by the moment formulas.

use std::ops::{Add, Div, Mul, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, degree: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[0] = value;
        Jet { coeffs }
    }

    /// The independent variable expanded around `x0`.
    pub fn variable(x0: f64, degree: usize) -> Self {
        let mut j = Self::constant(x0, degree);
        if degree >= 1 {
            j.coeffs[1] = 1.0;
        }
        j
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Normalized coefficient `f^(i)(x0) / i!`.
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `i`-th derivative at the expansion point.
    pub fn derivative(&self, i: usize) -> f64 {
        let fact: f64 = (1..=i).map(|v| v as f64).product();
        self.coeff(i) * fact
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut out = Jet::constant(1.0, self.degree());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    fn check(&self, other: &Jet) {
        assert_eq!(self.degree(), other.degree(), "jet degree mismatch");
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.check(rhs);
        Jet {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.check(rhs);
        Jet {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &Jet) -> Jet {
        self.check(rhs);
        let d = self.degree();
        let mut coeffs = vec![0.0; d + 1];
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c = (0..=i).map(|j| self.coeffs[j] * rhs.coeffs[i - j]).sum();
        }
        Jet { coeffs }
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self.check(rhs);
        let d = self.degree();
        let b0 = rhs.coeffs[0];
        let mut q = vec![0.0; d + 1];
        for i in 0..=d {
            let acc: f64 = (1..=i).map(|j| rhs.coeffs[j] * q[i - j]).sum();
            q[i] = (self.coeffs[i] - acc) / b0;
        }
        Jet { coeffs: q }
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
    )*};
}

forward_owned!(Add::add, Sub::sub, Mul::mul, Div::div);
