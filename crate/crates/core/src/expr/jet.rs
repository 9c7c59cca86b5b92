//! Second-order jets: value, gradient and symmetric Hessian carried through
//! arithmetic so that every expression yields exact first and second
//! derivatives at a point.
//!
//! A jet also records how many derivative orders it still holds (`depth`).
//! Jets produced from expressions have depth 2. Taking a partial derivative
//! of a jet shifts gradient into value and Hessian rows into the gradient,
//! dropping one order. Arithmetic on jets of unequal depth keeps the smaller
//! depth, so derived fields can be differentiated at most twice in total.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Largest supported chart dimension.
pub const MAX_DIM: usize = 8;
const TRI: usize = MAX_DIM * (MAX_DIM + 1) / 2;

#[inline]
fn tri(i: usize, j: usize) -> usize {
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    hi * (hi + 1) / 2 + lo
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    dim: u8,
    depth: u8,
    value: f64,
    grad: [f64; MAX_DIM],
    // upper triangle, packed column-wise
    hess: [f64; TRI],
}

impl Jet2 {
    pub fn constant(dim: usize, value: f64) -> Self {
        assert!(dim <= MAX_DIM, "chart dimension {dim} exceeds {MAX_DIM}");
        Jet2 {
            dim: dim as u8,
            depth: 2,
            value,
            grad: [0.0; MAX_DIM],
            hess: [0.0; TRI],
        }
    }

    /// The coordinate function `x^index` evaluated at `value`.
    pub fn variable(dim: usize, index: usize, value: f64) -> Self {
        let mut j = Self::constant(dim, value);
        j.grad[index] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn depth(&self) -> u8 {
        self.depth
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn gradient(&self) -> &[f64] {
        &self.grad[..self.dim as usize]
    }

    pub fn hessian(&self, i: usize, j: usize) -> f64 {
        self.hess[tri(i, j)]
    }

    /// Dense copy of the Hessian.
    pub fn hessian_matrix(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.hessian(i, j)).collect())
            .collect()
    }

    /// Partial derivative along coordinate `i`; `None` once no derivative
    /// order is left.
    pub fn partial(&self, i: usize) -> Option<Jet2> {
        if self.depth == 0 {
            return None;
        }
        let d = self.dim();
        let mut out = Jet2::constant(d, self.grad[i]);
        for j in 0..d {
            out.grad[j] = self.hess[tri(i, j)];
        }
        out.depth = self.depth - 1;
        Some(out)
    }

    pub fn scale(&self, s: f64) -> Jet2 {
        let mut out = *self;
        out.value *= s;
        out.grad.iter_mut().for_each(|g| *g *= s);
        out.hess.iter_mut().for_each(|h| *h *= s);
        out
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value()`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let d = self.dim();
        let mut out = Jet2::constant(d, f0);
        out.depth = self.depth;
        for i in 0..d {
            out.grad[i] = f1 * self.grad[i];
        }
        for j in 0..d {
            for i in 0..=j {
                let k = tri(i, j);
                out.hess[k] = f2 * self.grad[i] * self.grad[j] + f1 * self.hess[k];
            }
        }
        out
    }

    pub fn recip(&self) -> Jet2 {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn powi(&self, n: i32) -> Jet2 {
        let v = self.value;
        let nf = n as f64;
        let f1 = if n == 0 { 0.0 } else { nf * v.powi(n - 1) };
        let f2 = if n == 0 || n == 1 {
            0.0
        } else {
            nf * (nf - 1.0) * v.powi(n - 2)
        };
        self.chain(v.powi(n), f1, f2)
    }

    pub fn powf(&self, c: f64) -> Jet2 {
        let v = self.value;
        self.chain(v.powf(c), c * v.powf(c - 1.0), c * (c - 1.0) * v.powf(c - 2.0))
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(&self) -> Jet2 {
        let t = self.value.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(&self) -> Jet2 {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn sqrt(&self) -> Jet2 {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }

    pub fn tanh(&self) -> Jet2 {
        let t = self.value.tanh();
        let s = 1.0 - t * t;
        self.chain(t, s, -2.0 * t * s)
    }

    pub fn abs(&self) -> Jet2 {
        let sg = if self.value > 0.0 {
            1.0
        } else if self.value < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.chain(self.value.abs(), sg, 0.0)
    }

    fn zip(&self, other: &Jet2, value: f64) -> Jet2 {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = Jet2::constant(self.dim(), value);
        out.depth = self.depth.min(other.depth);
        out
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        let mut out = self.zip(&rhs, self.value + rhs.value);
        for i in 0..MAX_DIM {
            out.grad[i] = self.grad[i] + rhs.grad[i];
        }
        for k in 0..TRI {
            out.hess[k] = self.hess[k] + rhs.hess[k];
        }
        out
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        let mut out = self.zip(&rhs, self.value - rhs.value);
        for i in 0..MAX_DIM {
            out.grad[i] = self.grad[i] - rhs.grad[i];
        }
        for k in 0..TRI {
            out.hess[k] = self.hess[k] - rhs.hess[k];
        }
        out
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let (a, b) = (self.value, rhs.value);
        let mut out = self.zip(&rhs, a * b);
        let d = self.dim();
        for i in 0..d {
            out.grad[i] = a * rhs.grad[i] + self.grad[i] * b;
        }
        for j in 0..d {
            for i in 0..=j {
                let k = tri(i, j);
                out.hess[k] = a * rhs.hess[k]
                    + self.grad[i] * rhs.grad[j]
                    + self.grad[j] * rhs.grad[i]
                    + self.hess[k] * b;
            }
        }
        out
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: Jet2) -> Jet2 {
        self * rhs.recip()
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_second_order() {
        // f = x^2 * y at (2, 3)
        let x = Jet2::variable(2, 0, 2.0);
        let y = Jet2::variable(2, 1, 3.0);
        let f = x * x * y;
        assert_eq!(f.value(), 12.0);
        assert_eq!(f.gradient(), &[12.0, 4.0]);
        assert_eq!(f.hessian_matrix(), vec![vec![6.0, 4.0], vec![4.0, 0.0]]);
    }

    #[test]
    fn partial_drops_one_order() {
        let x = Jet2::variable(1, 0, 1.5);
        let f = x.powi(3);
        let fx = f.partial(0).unwrap();
        assert_eq!(fx.depth(), 1);
        assert!((fx.value() - 3.0 * 1.5 * 1.5).abs() < 1e-15);
        assert!((fx.gradient()[0] - 6.0 * 1.5).abs() < 1e-15);
        let fxx = fx.partial(0).unwrap();
        assert_eq!(fxx.depth(), 0);
        assert!(fxx.partial(0).is_none());
    }

    #[test]
    fn mixed_depth_keeps_minimum() {
        let x = Jet2::variable(2, 0, 1.0);
        let y = Jet2::variable(2, 1, 1.0);
        let p = (x * y).partial(0).unwrap();
        assert_eq!((p + x).depth(), 1);
    }
}
