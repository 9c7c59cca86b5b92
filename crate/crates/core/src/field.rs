//! Lazily evaluated scalar fields on a chart.
//!
//! A [`ScalarField`] is a shared tree whose leaves are parsed expressions and
//! constants and whose inner nodes are arithmetic, partial derivatives and
//! entries of pointwise matrix inverses. Evaluation at a point produces a
//! [`Jet2`]; partial-derivative nodes consume one jet order, so any field
//! may be differentiated twice in total relative to its expression leaves.
//! Constant zeros and ones are folded at construction so that sparse tensor
//! algebra does not grow trees for vanishing components.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::EvalError;
use crate::expr::{Expr, Jet2};

#[derive(Clone)]
pub struct ScalarField(Arc<Node>);

enum Node {
    Const(f64),
    Expr(Arc<Expr>),
    Add(ScalarField, ScalarField),
    Sub(ScalarField, ScalarField),
    Mul(ScalarField, ScalarField),
    Div(ScalarField, ScalarField),
    Neg(ScalarField),
    Partial(ScalarField, usize),
    Inverse {
        matrix: Arc<Vec<ScalarField>>,
        n: usize,
        row: usize,
        col: usize,
    },
}

impl ScalarField {
    pub fn constant(v: f64) -> Self {
        ScalarField(Arc::new(Node::Const(v)))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn from_expr(e: Expr) -> Self {
        match e {
            Expr::Num(v) => Self::constant(v),
            e => ScalarField(Arc::new(Node::Expr(Arc::new(e)))),
        }
    }

    /// The coordinate function `x^i`.
    pub fn coordinate(i: usize) -> Self {
        Self::from_expr(Expr::Var(i))
    }

    pub fn as_constant(&self) -> Option<f64> {
        match &*self.0 {
            Node::Const(v) => Some(*v),
            _ => None,
        }
    }

    /// Structurally zero. A field may still vanish numerically when this
    /// returns false.
    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    /// True when the field does not depend on the coordinates.
    pub fn is_constant(&self) -> bool {
        match &*self.0 {
            Node::Const(_) => true,
            Node::Expr(e) => e.is_constant(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
            Node::Neg(a) => a.is_constant(),
            Node::Partial(..) => false,
            Node::Inverse { matrix, .. } => matrix.iter().all(|m| m.is_constant()),
        }
    }

    pub fn partial(&self, i: usize) -> Self {
        if self.as_constant().is_some() {
            return Self::zero();
        }
        ScalarField(Arc::new(Node::Partial(self.clone(), i)))
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero();
        }
        if s == 1.0 {
            return self.clone();
        }
        if s == -1.0 {
            return -self;
        }
        Self::constant(s) * self
    }

    /// Entry `(row, col)` of the pointwise inverse of the row-major
    /// `n x n` matrix of fields.
    pub fn inverse_entry(matrix: Arc<Vec<ScalarField>>, n: usize, row: usize, col: usize) -> Self {
        assert_eq!(matrix.len(), n * n);
        ScalarField(Arc::new(Node::Inverse { matrix, n, row, col }))
    }

    pub fn eval(&self, point: &[f64]) -> Result<Jet2, EvalError> {
        let d = point.len();
        Ok(match &*self.0 {
            Node::Const(v) => Jet2::constant(d, *v),
            Node::Expr(e) => e.eval_jet(point)?,
            Node::Add(a, b) => a.eval(point)? + b.eval(point)?,
            Node::Sub(a, b) => a.eval(point)? - b.eval(point)?,
            Node::Mul(a, b) => a.eval(point)? * b.eval(point)?,
            Node::Div(a, b) => {
                let den = b.eval(point)?;
                if den.value() == 0.0 {
                    return Err(EvalError::Domain {
                        expr: format!("{self:?}"),
                        reason: "division by zero".into(),
                    });
                }
                a.eval(point)? / den
            }
            Node::Neg(a) => -a.eval(point)?,
            Node::Partial(a, i) => a.eval(point)?.partial(*i).ok_or(EvalError::DerivativeOrder)?,
            Node::Inverse { matrix, n, row, col } => {
                let m = matrix
                    .iter()
                    .map(|f| f.eval(point))
                    .collect::<Result<Vec<_>, _>>()?;
                invert_jets(m, *n, d)?[row * n + col]
            }
        })
    }

    pub fn value(&self, point: &[f64]) -> Result<f64, EvalError> {
        Ok(self.eval(point)?.value())
    }
}

/// Gauss-Jordan elimination with partial pivoting on jet entries.
fn invert_jets(mut a: Vec<Jet2>, n: usize, dim: usize) -> Result<Vec<Jet2>, EvalError> {
    let mut inv: Vec<Jet2> = (0..n * n)
        .map(|k| Jet2::constant(dim, if k / n == k % n { 1.0 } else { 0.0 }))
        .collect();
    let scale = a.iter().map(|j| j.value().abs()).fold(0.0, f64::max);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r * n + col].value().abs().total_cmp(&a[s * n + col].value().abs()))
            .unwrap();
        if a[pivot * n + col].value().abs() <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            return Err(EvalError::Singular);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
        }
        let p = a[col * n + col].recip();
        for k in 0..n {
            a[col * n + k] = a[col * n + k] * p;
            inv[col * n + k] = inv[col * n + k] * p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col];
            for k in 0..n {
                a[r * n + k] = a[r * n + k] - f * a[col * n + k];
                inv[r * n + k] = inv[r * n + k] - f * inv[col * n + k];
            }
        }
    }
    Ok(inv)
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(v) => write!(f, "{v}"),
            Node::Expr(e) => write!(f, "{}", e.display_indexed()),
            Node::Add(a, b) => write!(f, "({a:?} + {b:?})"),
            Node::Sub(a, b) => write!(f, "({a:?} - {b:?})"),
            Node::Mul(a, b) => write!(f, "({a:?} * {b:?})"),
            Node::Div(a, b) => write!(f, "({a:?} / {b:?})"),
            Node::Neg(a) => write!(f, "(-{a:?})"),
            Node::Partial(a, i) => write!(f, "d{i}[{a:?}]"),
            Node::Inverse { row, col, .. } => write!(f, "inv[{row},{col}]"),
        }
    }
}

impl From<f64> for ScalarField {
    fn from(v: f64) -> Self {
        ScalarField::constant(v)
    }
}

impl From<Expr> for ScalarField {
    fn from(e: Expr) -> Self {
        ScalarField::from_expr(e)
    }
}

fn add(a: &ScalarField, b: &ScalarField) -> ScalarField {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => ScalarField::constant(x + y),
        (Some(x), _) if x == 0.0 => b.clone(),
        (_, Some(y)) if y == 0.0 => a.clone(),
        _ => ScalarField(Arc::new(Node::Add(a.clone(), b.clone()))),
    }
}

fn sub(a: &ScalarField, b: &ScalarField) -> ScalarField {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => ScalarField::constant(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a.clone(),
        _ => ScalarField(Arc::new(Node::Sub(a.clone(), b.clone()))),
    }
}

fn mul(a: &ScalarField, b: &ScalarField) -> ScalarField {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => ScalarField::constant(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => ScalarField::zero(),
        (Some(x), _) if x == 1.0 => b.clone(),
        (_, Some(y)) if y == 1.0 => a.clone(),
        _ => ScalarField(Arc::new(Node::Mul(a.clone(), b.clone()))),
    }
}

fn div(a: &ScalarField, b: &ScalarField) -> ScalarField {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), _) if x == 0.0 => ScalarField::zero(),
        (_, Some(y)) if y == 1.0 => a.clone(),
        (Some(x), Some(y)) if y != 0.0 => ScalarField::constant(x / y),
        _ => ScalarField(Arc::new(Node::Div(a.clone(), b.clone()))),
    }
}

fn neg(a: &ScalarField) -> ScalarField {
    match &*a.0 {
        Node::Const(v) => ScalarField::constant(-v),
        Node::Neg(inner) => inner.clone(),
        _ => ScalarField(Arc::new(Node::Neg(a.clone()))),
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: &ScalarField) -> ScalarField {
                $f(self, rhs)
            }
        }
        impl $tr<ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: ScalarField) -> ScalarField {
                $f(&self, &rhs)
            }
        }
        impl $tr<&ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: &ScalarField) -> ScalarField {
                $f(&self, rhs)
            }
        }
        impl $tr<ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: ScalarField) -> ScalarField {
                $f(self, &rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        neg(&self)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        neg(self)
    }
}

impl Sum for ScalarField {
    fn sum<I: Iterator<Item = ScalarField>>(iter: I) -> ScalarField {
        iter.fold(ScalarField::zero(), |acc, f| acc + f)
    }
}

impl<'a> Sum<&'a ScalarField> for ScalarField {
    fn sum<I: Iterator<Item = &'a ScalarField>>(iter: I) -> ScalarField {
        iter.fold(ScalarField::zero(), |acc, f| acc + f)
    }
}
