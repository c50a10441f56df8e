//! Second-order Taylor jets: a value with its first and second time derivative.
//!
//! Evaluating the flat map on jets yields `q`, `dq/dt` and `d2q/dt2` exactly
//! (up to rounding) without finite differences.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: f64,
    pub dd: f64,
}

impl Jet {
    pub const fn new(v: f64, d: f64, dd: f64) -> Self {
        Self { v, d, dd }
    }

    pub const fn constant(v: f64) -> Self {
        Self { v, d: 0.0, dd: 0.0 }
    }

    pub fn sqrt(self) -> Self {
        let v = self.v.sqrt();
        let d = self.d / (2.0 * v);
        let dd = (self.dd - 2.0 * d * d) / (2.0 * v);
        Self { v, d, dd }
    }

    /// `atan2(self, x)` with derivatives.
    pub fn atan2(self, x: Jet) -> Self {
        let y = self;
        let den = x.v * x.v + y.v * y.v;
        let num = x.v * y.d - y.v * x.d;
        let d = num / den;
        let num_d = x.v * y.dd - y.v * x.dd;
        let den_d = 2.0 * (x.v * x.d + y.v * y.d);
        let dd = (num_d * den - num * den_d) / (den * den);
        Self {
            v: y.v.atan2(x.v),
            d,
            dd,
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d + o.d, self.dd + o.dd)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d - o.d, self.dd - o.dd)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d, -self.dd)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.v * o.v,
            self.d * o.v + self.v * o.d,
            self.dd * o.v + 2.0 * self.d * o.d + self.v * o.dd,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let v = self.v / o.v;
        let d = (self.d - v * o.d) / o.v;
        let dd = (self.dd - 2.0 * d * o.d - v * o.dd) / o.v;
        Jet::new(v, d, dd)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, k: f64) -> Jet {
        Jet::new(self.v * k, self.d * k, self.dd * k)
    }
}
