//! Small closed-form expression language used for all tensor component
//! functions: parsing, exact symbolic differentiation and IEEE-754 evaluation.
//!
//! Expressions are immutable trees behind `Arc`, so clones are cheap and
//! evaluation is safe from any thread. There is no algebraic simplifier;
//! correctness is defined by evaluation semantics alone. Smart constructors
//! perform only structural constant folding (`0*x -> 0`, `x+0 -> x`, ...)
//! so that flat-metric pipelines collapse to constants.

mod parse;

pub use parse::{parse, ParseError};

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Builtin scalar functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
        }
    }
}

#[derive(Debug)]
enum Node {
    Num(f64),
    Var(Arc<str>),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    /// Base and exponent; the exponent must be a constant subtree.
    Pow(Expr, Expr),
    Call(Func, Expr),
}

/// Immutable expression tree over named real variables.
#[derive(Debug, Clone)]
pub struct Expr {
    node: Arc<Node>,
}

/// Evaluation failure: a subexpression left the domain of a builtin
/// operation. Carries the printed offending subexpression.
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("division by zero in `{0}`")]
    DivByZero(String),
    #[error("log of non-positive value in `{0}`")]
    LogDomain(String),
    #[error("sqrt of negative value in `{0}`")]
    SqrtDomain(String),
    #[error("non-integer power of negative base in `{0}`")]
    PowDomain(String),
}

/// Variable binding environment: ordered names with matching values.
#[derive(Debug, Clone, Copy)]
pub struct Env<'a> {
    names: &'a [Arc<str>],
    values: &'a [f64],
}

impl<'a> Env<'a> {
    pub fn new(names: &'a [Arc<str>], values: &'a [f64]) -> Self {
        debug_assert_eq!(names.len(), values.len());
        Env { names, values }
    }

    fn lookup(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n.as_ref() == name)
            .map(|i| self.values[i])
    }
}

impl Expr {
    fn new(node: Node) -> Expr {
        Expr { node: Arc::new(node) }
    }

    pub fn num(v: f64) -> Expr {
        Expr::new(Node::Num(v))
    }

    pub fn zero() -> Expr {
        Expr::num(0.0)
    }

    pub fn one() -> Expr {
        Expr::num(1.0)
    }

    pub fn var(name: impl Into<Arc<str>>) -> Expr {
        Expr::new(Node::Var(name.into()))
    }

    pub fn as_const(&self) -> Option<f64> {
        match &*self.node {
            Node::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            return Expr::num(x + y);
        }
        Expr::new(Node::Add(a, b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            return Expr::num(x - y);
        }
        Expr::new(Node::Sub(a, b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            return Expr::zero();
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            return Expr::num(x * y);
        }
        Expr::new(Node::Mul(a, b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if a.is_zero() && !b.is_zero() {
            return Expr::zero();
        }
        if b.is_one() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if y != 0.0 {
                return Expr::num(x / y);
            }
        }
        Expr::new(Node::Div(a, b))
    }

    pub fn neg(a: Expr) -> Expr {
        if let Some(x) = a.as_const() {
            return Expr::num(-x);
        }
        if let Node::Neg(inner) = &*a.node {
            return inner.clone();
        }
        Expr::new(Node::Neg(a))
    }

    /// `base^exp`. The exponent must be a constant subtree; callers going
    /// through the parser have this enforced at parse time.
    pub fn pow(base: Expr, exp: Expr) -> Expr {
        debug_assert!(exp.is_constant(), "pow exponent must be constant");
        if let Some(e) = exp.as_const() {
            if e == 0.0 {
                return Expr::one();
            }
            if e == 1.0 {
                return base;
            }
            if let Some(b) = base.as_const() {
                return Expr::num(pow_f64(b, e).unwrap_or(f64::NAN));
            }
        }
        Expr::new(Node::Pow(base, exp))
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        if let Some(x) = arg.as_const() {
            let v = f.apply(x);
            if v.is_finite() {
                return Expr::num(v);
            }
        }
        Expr::new(Node::Call(f, arg))
    }

    /// True when the tree contains no variables.
    pub fn is_constant(&self) -> bool {
        match &*self.node {
            Node::Num(_) => true,
            Node::Var(_) => false,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
            Node::Neg(a) | Node::Call(_, a) => a.is_constant(),
        }
    }

    /// Set of variable names appearing in the tree.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match &*self.node {
            Node::Num(_) => {}
            Node::Var(v) => {
                out.insert(v.to_string());
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Node::Neg(a) | Node::Call(_, a) => a.collect_vars(out),
        }
    }

    /// Exact partial derivative with respect to `var`. Total on valid
    /// expressions; the result is unsimplified beyond constant folding.
    pub fn diff(&self, var: &str) -> Expr {
        match &*self.node {
            Node::Num(_) => Expr::zero(),
            Node::Var(v) => {
                if v.as_ref() == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(a, b) => Expr::add(a.diff(var), b.diff(var)),
            Node::Sub(a, b) => Expr::sub(a.diff(var), b.diff(var)),
            Node::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(var), b.clone()),
                Expr::mul(a.clone(), b.diff(var)),
            ),
            Node::Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.diff(var), b.clone()),
                    Expr::mul(a.clone(), b.diff(var)),
                ),
                Expr::mul(b.clone(), b.clone()),
            ),
            Node::Neg(a) => Expr::neg(a.diff(var)),
            Node::Pow(base, exp) => {
                // d(b^c) = c * b^(c-1) * b'     (c constant)
                let c = exp.clone();
                let cm1 = Expr::sub(exp.clone(), Expr::one());
                Expr::mul(
                    Expr::mul(c, Expr::pow(base.clone(), cm1)),
                    base.diff(var),
                )
            }
            Node::Call(f, arg) => {
                let da = arg.diff(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, arg.clone()),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, arg.clone())),
                    Func::Tan => Expr::add(
                        Expr::one(),
                        Expr::mul(
                            Expr::call(Func::Tan, arg.clone()),
                            Expr::call(Func::Tan, arg.clone()),
                        ),
                    ),
                    Func::Exp => Expr::call(Func::Exp, arg.clone()),
                    Func::Log => Expr::div(Expr::one(), arg.clone()),
                    Func::Sqrt => Expr::div(
                        Expr::one(),
                        Expr::mul(Expr::num(2.0), Expr::call(Func::Sqrt, arg.clone())),
                    ),
                    Func::Sinh => Expr::call(Func::Cosh, arg.clone()),
                    Func::Cosh => Expr::call(Func::Sinh, arg.clone()),
                    Func::Tanh => Expr::sub(
                        Expr::one(),
                        Expr::mul(
                            Expr::call(Func::Tanh, arg.clone()),
                            Expr::call(Func::Tanh, arg.clone()),
                        ),
                    ),
                };
                Expr::mul(outer, da)
            }
        }
    }

    /// Deterministic IEEE-754 double evaluation.
    pub fn eval(&self, env: Env<'_>) -> Result<f64, EvalError> {
        match &*self.node {
            Node::Num(v) => Ok(*v),
            Node::Var(v) => env
                .lookup(v)
                .ok_or_else(|| EvalError::UnboundVar(v.to_string())),
            Node::Add(a, b) => Ok(a.eval(env)? + b.eval(env)?),
            Node::Sub(a, b) => Ok(a.eval(env)? - b.eval(env)?),
            Node::Mul(a, b) => Ok(a.eval(env)? * b.eval(env)?),
            Node::Div(a, b) => {
                let den = b.eval(env)?;
                if den == 0.0 {
                    return Err(EvalError::DivByZero(self.to_string()));
                }
                Ok(a.eval(env)? / den)
            }
            Node::Neg(a) => Ok(-a.eval(env)?),
            Node::Pow(base, exp) => {
                let b = base.eval(env)?;
                let e = exp.eval(env)?;
                pow_f64(b, e).ok_or_else(|| {
                    if b == 0.0 {
                        EvalError::DivByZero(self.to_string())
                    } else {
                        EvalError::PowDomain(self.to_string())
                    }
                })
            }
            Node::Call(f, arg) => {
                let x = arg.eval(env)?;
                match f {
                    Func::Log if x <= 0.0 => Err(EvalError::LogDomain(self.to_string())),
                    Func::Sqrt if x < 0.0 => Err(EvalError::SqrtDomain(self.to_string())),
                    _ => Ok(f.apply(x)),
                }
            }
        }
    }

    /// Replace every occurrence of `var` by `replacement`.
    pub fn substitute(&self, var: &str, replacement: &Expr) -> Expr {
        match &*self.node {
            Node::Num(_) => self.clone(),
            Node::Var(v) => {
                if v.as_ref() == var {
                    replacement.clone()
                } else {
                    self.clone()
                }
            }
            Node::Add(a, b) => Expr::add(a.substitute(var, replacement), b.substitute(var, replacement)),
            Node::Sub(a, b) => Expr::sub(a.substitute(var, replacement), b.substitute(var, replacement)),
            Node::Mul(a, b) => Expr::mul(a.substitute(var, replacement), b.substitute(var, replacement)),
            Node::Div(a, b) => Expr::div(a.substitute(var, replacement), b.substitute(var, replacement)),
            Node::Neg(a) => Expr::neg(a.substitute(var, replacement)),
            Node::Pow(a, b) => Expr::pow(a.substitute(var, replacement), b.clone()),
            Node::Call(f, a) => Expr::call(*f, a.substitute(var, replacement)),
        }
    }
}

fn pow_f64(base: f64, exp: f64) -> Option<f64> {
    if exp.fract() == 0.0 && exp.abs() < i32::MAX as f64 {
        let v = base.powi(exp as i32);
        if base == 0.0 && exp < 0.0 {
            return None;
        }
        return Some(v);
    }
    if base < 0.0 {
        return None;
    }
    Some(base.powf(exp))
}

// Precedence levels used by the printer; mirror the parser.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match &*self.node {
            Node::Num(v) if *v < 0.0 => PREC_NEG,
            Node::Num(_) | Node::Var(_) | Node::Call(_, _) => PREC_ATOM,
            Node::Add(_, _) | Node::Sub(_, _) => PREC_ADD,
            Node::Mul(_, _) | Node::Div(_, _) => PREC_MUL,
            Node::Neg(_) => PREC_NEG,
            Node::Pow(_, _) => PREC_POW,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = self.precedence();
        let parens = p < min;
        if parens {
            write!(f, "(")?;
        }
        match &*self.node {
            Node::Num(v) => write!(f, "{v:?}")?,
            Node::Var(v) => write!(f, "{v}")?,
            Node::Add(a, b) => {
                a.fmt_prec(f, PREC_ADD)?;
                write!(f, " + ")?;
                b.fmt_prec(f, PREC_ADD + 1)?;
            }
            Node::Sub(a, b) => {
                a.fmt_prec(f, PREC_ADD)?;
                write!(f, " - ")?;
                b.fmt_prec(f, PREC_ADD + 1)?;
            }
            Node::Mul(a, b) => {
                a.fmt_prec(f, PREC_MUL)?;
                write!(f, "*")?;
                b.fmt_prec(f, PREC_MUL + 1)?;
            }
            Node::Div(a, b) => {
                a.fmt_prec(f, PREC_MUL)?;
                write!(f, "/")?;
                b.fmt_prec(f, PREC_MUL + 1)?;
            }
            Node::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, PREC_NEG)?;
            }
            Node::Pow(a, b) => {
                a.fmt_prec(f, PREC_ATOM)?;
                write!(f, "^")?;
                b.fmt_prec(f, PREC_NEG)?;
            }
            Node::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
