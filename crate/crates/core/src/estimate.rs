//! Values carrying an absolute error bar.
//!
//! Arithmetic propagates errors to first order, summing absolute
//! contributions.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: 0.0, error: 0.0 };

    pub fn new(value: f64, error: f64) -> Self {
        Estimate { value, error: error.abs() }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }

    pub fn scale(self, c: f64) -> Self {
        Estimate { value: self.value * c, error: self.error * c.abs() }
    }

    pub fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        Estimate { value: s, error: 0.5 * self.error / s }
    }
}

impl Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate { value: self.value + o.value, error: self.error + o.error }
    }
}

impl Sub for Estimate {
    type Output = Estimate;
    fn sub(self, o: Estimate) -> Estimate {
        Estimate { value: self.value - o.value, error: self.error + o.error }
    }
}

impl Neg for Estimate {
    type Output = Estimate;
    fn neg(self) -> Estimate {
        Estimate { value: -self.value, error: self.error }
    }
}

impl Mul for Estimate {
    type Output = Estimate;
    fn mul(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value * o.value,
            error: self.value.abs() * o.error + o.value.abs() * self.error,
        }
    }
}

impl Div for Estimate {
    type Output = Estimate;
    fn div(self, o: Estimate) -> Estimate {
        let v = self.value / o.value;
        Estimate { value: v, error: (self.error + v.abs() * o.error) / o.value.abs() }
    }
}

impl Mul<f64> for Estimate {
    type Output = Estimate;
    fn mul(self, c: f64) -> Estimate {
        self.scale(c)
    }
}

impl From<f64> for Estimate {
    fn from(v: f64) -> Self {
        Estimate::exact(v)
    }
}
