//! The model expression language.
//!
//! Expressions are real-valued functions of the chart coordinates built
//! from decimal literals, coordinate names, `+ - * / ^`, unary minus and
//! the functions `sin cos tan exp log sqrt tanh abs`. Precedence from
//! tightest: function application, `^` (right-associative), unary `-`,
//! `* /`, `+ -`. See `docs/grammar.md` for the full grammar.

mod jet;
mod parser;

use std::fmt;

pub use jet::{Jet2, MAX_DIM};

use crate::error::{EvalError, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Tanh,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }
}

/// Expression tree. Coordinates are referenced by chart index.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
}

/// Parses `source` against the declared chart coordinates.
pub fn parse(source: &str, coords: &[String]) -> Result<Expr, ParseError> {
    parser::parse(source, coords)
}

impl Expr {
    /// True when no coordinate occurs in the tree.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var(_) => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
            Expr::Neg(a) | Expr::Func(_, a) => a.is_constant(),
        }
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.max_var().max(b.max_var())
            }
            Expr::Neg(a) | Expr::Func(_, a) => a.max_var(),
        }
    }

    /// Evaluates value, gradient and Hessian at `point`.
    pub fn eval_jet(&self, point: &[f64]) -> Result<Jet2, EvalError> {
        if point.len() > MAX_DIM {
            return Err(EvalError::Dimension {
                expected: MAX_DIM,
                got: point.len(),
            });
        }
        if let Some(m) = self.max_var() {
            if m >= point.len() {
                return Err(EvalError::Dimension {
                    expected: m + 1,
                    got: point.len(),
                });
            }
        }
        self.jet(point)
    }

    /// Plain value, without derivatives.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        self.eval_jet(point).map(|j| j.value())
    }

    fn jet(&self, p: &[f64]) -> Result<Jet2, EvalError> {
        let d = p.len();
        Ok(match self {
            Expr::Num(v) => Jet2::constant(d, *v),
            Expr::Var(i) => Jet2::variable(d, *i, p[*i]),
            Expr::Add(a, b) => a.jet(p)? + b.jet(p)?,
            Expr::Sub(a, b) => a.jet(p)? - b.jet(p)?,
            Expr::Mul(a, b) => a.jet(p)? * b.jet(p)?,
            Expr::Div(a, b) => {
                let den = b.jet(p)?;
                if den.value() == 0.0 {
                    return Err(self.domain("division by zero"));
                }
                a.jet(p)? / den
            }
            Expr::Neg(a) => -a.jet(p)?,
            Expr::Pow(a, b) => {
                let base = a.jet(p)?;
                if b.is_constant() {
                    let c = b.jet(p)?.value();
                    if c.fract() == 0.0 && c.abs() < i32::MAX as f64 {
                        if base.value() == 0.0 && c < 0.0 {
                            return Err(self.domain("zero raised to a negative power"));
                        }
                        base.powi(c as i32)
                    } else {
                        if base.value() <= 0.0 {
                            return Err(self.domain("non-integer power of a non-positive base"));
                        }
                        base.powf(c)
                    }
                } else {
                    if base.value() <= 0.0 {
                        return Err(self.domain("variable power of a non-positive base"));
                    }
                    (b.jet(p)? * base.ln()).exp()
                }
            }
            Expr::Func(f, a) => {
                let u = a.jet(p)?;
                match f {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Tan => {
                        if u.value().cos() == 0.0 {
                            return Err(self.domain("tan at a pole"));
                        }
                        u.tan()
                    }
                    Func::Exp => u.exp(),
                    Func::Log => {
                        if u.value() <= 0.0 {
                            return Err(self.domain("log of a non-positive value"));
                        }
                        u.ln()
                    }
                    Func::Sqrt => {
                        if u.value() <= 0.0 {
                            return Err(self.domain("sqrt of a non-positive value"));
                        }
                        u.sqrt()
                    }
                    Func::Tanh => u.tanh(),
                    Func::Abs => u.abs(),
                }
            }
        })
    }

    fn domain(&self, reason: &str) -> EvalError {
        EvalError::Domain {
            expr: format!("{}", self.display_indexed()),
            reason: reason.to_string(),
        }
    }

    /// Renders with coordinate names; the output re-parses to the same tree.
    pub fn display<'a>(&'a self, coords: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay {
            expr: self,
            coords: Some(coords),
        }
    }

    pub fn display_indexed(&self) -> ExprDisplay<'_> {
        ExprDisplay {
            expr: self,
            coords: None,
        }
    }

    /// Max absolute gap between jet derivatives and central finite
    /// differences with the given step: the gradient against differences of
    /// values, the Hessian against differences of the gradient. Test support.
    pub fn fd_cross_check(&self, point: &[f64], step: f64) -> Result<f64, EvalError> {
        assert!(step > 0.0, "finite-difference step must be positive");
        let jet = self.eval_jet(point)?;
        let mut worst: f64 = 0.0;
        let mut q = point.to_vec();
        for i in 0..point.len() {
            q[i] = point[i] + step;
            let plus = self.eval_jet(&q)?;
            q[i] = point[i] - step;
            let minus = self.eval_jet(&q)?;
            q[i] = point[i];
            let g = (plus.value() - minus.value()) / (2.0 * step);
            worst = worst.max((g - jet.gradient()[i]).abs());
            for j in 0..point.len() {
                let h = (plus.gradient()[j] - minus.gradient()[j]) / (2.0 * step);
                worst = worst.max((h - jet.hessian(i, j)).abs());
            }
        }
        Ok(worst)
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    coords: Option<&'a [String]>,
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords = self.coords;
        let sub = |e| ExprDisplay { expr: e, coords };
        match self.expr {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => match self.coords {
                Some(c) => write!(f, "{}", c[*i]),
                None => write!(f, "x{i}"),
            },
            Expr::Add(a, b) => write!(f, "({} + {})", sub(a), sub(b)),
            Expr::Sub(a, b) => write!(f, "({} - {})", sub(a), sub(b)),
            Expr::Mul(a, b) => write!(f, "({} * {})", sub(a), sub(b)),
            Expr::Div(a, b) => write!(f, "({} / {})", sub(a), sub(b)),
            Expr::Pow(a, b) => write!(f, "({} ^ {})", sub(a), sub(b)),
            Expr::Neg(a) => write!(f, "(-{})", sub(a)),
            Expr::Func(func, a) => write!(f, "{}({})", func.name(), sub(a)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn grammar_shapes() {
        let c = names(&["x", "y"]);
        assert_eq!(
            parse("x^2 + 3*y", &c).unwrap(),
            Expr::Add(
                Box::new(Expr::Pow(Box::new(Expr::Var(0)), Box::new(Expr::Num(2.0)))),
                Box::new(Expr::Mul(Box::new(Expr::Num(3.0)), Box::new(Expr::Var(1))))
            )
        );
        assert_eq!(parse("-y", &c).unwrap(), Expr::Neg(Box::new(Expr::Var(1))));
        // ^ binds tighter than unary minus
        assert_eq!(
            parse("-x^2", &c).unwrap(),
            Expr::Neg(Box::new(Expr::Pow(Box::new(Expr::Var(0)), Box::new(Expr::Num(2.0)))))
        );
        // right associative
        assert_eq!(
            parse("x^2^3", &c).unwrap(),
            Expr::Pow(
                Box::new(Expr::Var(0)),
                Box::new(Expr::Pow(Box::new(Expr::Num(2.0)), Box::new(Expr::Num(3.0))))
            )
        );
        assert_eq!(
            parse("sin(x)^2", &c).unwrap(),
            Expr::Pow(
                Box::new(Expr::Func(Func::Sin, Box::new(Expr::Var(0)))),
                Box::new(Expr::Num(2.0))
            )
        );
    }

    #[test]
    fn parse_errors() {
        let c = names(&["x"]);
        match parse("x +", &c) {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("x # 2", &c), Err(ParseError::Lexical { offset: 2, ch: '#' })));
        assert!(matches!(parse("z + 1", &c), Err(ParseError::UnknownIdentifier { offset: 0, .. })));
        assert!(matches!(parse("foo(x)", &c), Err(ParseError::UnknownIdentifier { .. })));
        assert!(matches!(parse("(x", &c), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("x x", &c), Err(ParseError::Syntax { offset: 2, .. })));
    }

    #[test]
    fn scientific_literals() {
        let c = names(&["x"]);
        assert_eq!(parse("1e-3", &c).unwrap(), Expr::Num(1e-3));
        assert_eq!(parse("2.5E2", &c).unwrap(), Expr::Num(250.0));
    }

    #[test]
    fn constant_jet() {
        let e = parse("5", &names(&["x", "y"])).unwrap();
        let j = e.eval_jet(&[0.3, -1.0]).unwrap();
        assert_eq!(j.value(), 5.0);
        assert_eq!(j.gradient(), &[0.0, 0.0]);
        assert_eq!(j.hessian_matrix(), vec![vec![0.0; 2]; 2]);
    }

    #[test]
    fn domain_errors_name_subexpression() {
        let c = names(&["x"]);
        let e = parse("1 + log(x - 2)", &c).unwrap();
        match e.eval_jet(&[1.0]) {
            Err(EvalError::Domain { expr, .. }) => assert!(expr.starts_with("log(")),
            other => panic!("{other:?}"),
        }
        assert!(parse("1/x", &c).unwrap().eval(&[0.0]).is_err());
        assert!(parse("x^0.5", &c).unwrap().eval(&[-1.0]).is_err());
        assert_eq!(parse("x^3", &c).unwrap().eval(&[-2.0]).unwrap(), -8.0);
    }

    #[test]
    fn display_reparses() {
        let c = names(&["x", "y"]);
        for src in ["x^2 + 3*y", "-x^-2", "sin(x)*cos(y)/(1+x^2)", "2^x^y - -y", "0.1*exp(-x)"] {
            let e = parse(src, &c).unwrap();
            let printed = e.display(&c).to_string();
            assert_eq!(parse(&printed, &c).unwrap(), e, "{printed}");
        }
    }
}
