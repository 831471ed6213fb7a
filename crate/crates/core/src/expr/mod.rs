//! Closed-form expressions in the two plane coordinates `x1`, `x2`.
//!
//! Expressions are immutable trees. Every other part of the crate obtains
//! exact derivatives of the midsurface `f` and the load `p` through
//! [`Expr::diff`]; nothing downstream differentiates numerically unless it is
//! explicitly a finite-difference oracle.
//!
//! The smart constructors ([`Expr::sum`], [`Expr::product`], [`Expr::pow`], ...)
//! fold constants and drop literal-zero summands and literal-one factors.
//! [`Expr::simplify`] additionally collects like terms.

mod parse;
mod simplify;

use std::fmt;

use thiserror::Error;

pub use parse::{parse, ParseError};

/// One of the two in-plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X1,
    X2,
}

impl Var {
    pub const BOTH: [Var; 2] = [Var::X1, Var::X2];

    /// Zero-based index (0 for `x1`, 1 for `x2`).
    pub fn index(self) -> usize {
        match self {
            Var::X1 => 0,
            Var::X2 => 1,
        }
    }

    pub fn from_index(i: usize) -> Var {
        match i {
            0 => Var::X1,
            1 => Var::X2,
            _ => panic!("coordinate index {i} out of range"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    /// Base raised to a real constant exponent.
    Pow(Box<Expr>, f64),
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("log of nonpositive argument {0}")]
    LogDomain(f64),
    #[error("non-integer power {exponent} of nonpositive base {base}")]
    PowDomain { base: f64, exponent: f64 },
    #[error("non-finite value produced")]
    NonFinite,
}

/// A point of the plane.
pub type Point = [f64; 2];

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn x1() -> Expr {
        Expr::Var(Var::X1)
    }

    pub fn x2() -> Expr {
        Expr::Var(Var::X2)
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    /// Sum with nested sums flattened, constants folded and zeros dropped.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out = Vec::new();
        let mut constant = 0.0;
        for t in terms {
            match t {
                Expr::Const(c) => constant += c,
                Expr::Sum(inner) => {
                    for s in inner {
                        match s {
                            Expr::Const(c) => constant += c,
                            other => out.push(other),
                        }
                    }
                }
                other => out.push(other),
            }
        }
        if constant != 0.0 {
            out.push(Expr::Const(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Sum(out),
        }
    }

    /// Product with nested products flattened, constants folded, ones dropped.
    /// A literal zero factor collapses the product to zero.
    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out = Vec::new();
        let mut constant = 1.0;
        for f in factors {
            match f {
                Expr::Const(c) => constant *= c,
                Expr::Product(inner) => {
                    for g in inner {
                        match g {
                            Expr::Const(c) => constant *= c,
                            other => out.push(other),
                        }
                    }
                }
                other => out.push(other),
            }
        }
        if constant == 0.0 {
            return Expr::zero();
        }
        if out.is_empty() {
            return Expr::Const(constant);
        }
        if constant != 1.0 {
            out.insert(0, Expr::Const(constant));
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expr::Product(out)
        }
    }

    pub fn pow(base: Expr, exponent: f64) -> Expr {
        if exponent == 0.0 {
            return Expr::one();
        }
        if exponent == 1.0 {
            return base;
        }
        match base {
            Expr::Const(c) => Expr::Const(c.powf(exponent)),
            b => Expr::Pow(Box::new(b), exponent),
        }
    }

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::sum([a, Expr::neg(b)])
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::product([a, Expr::pow(b, -1.0)])
    }

    pub fn scale(c: f64, e: Expr) -> Expr {
        Expr::product([Expr::Const(c), e])
    }

    pub fn sin(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(c.sin()),
            a => Expr::Sin(Box::new(a)),
        }
    }

    pub fn cos(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(c.cos()),
            a => Expr::Cos(Box::new(a)),
        }
    }

    pub fn exp(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(c.exp()),
            a => Expr::Exp(Box::new(a)),
        }
    }

    /// Natural logarithm. A constant argument is folded only when positive so
    /// that the domain error surfaces at evaluation time.
    pub fn log(e: Expr) -> Expr {
        match e {
            Expr::Const(c) if c > 0.0 => Expr::Const(c.ln()),
            a => Expr::Log(Box::new(a)),
        }
    }

    /// Exact partial derivative with respect to `var`.
    pub fn diff(&self, var: Var) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(v) => {
                if *v == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Sum(terms) => Expr::sum(terms.iter().map(|t| t.diff(var))),
            Expr::Product(factors) => {
                let mut terms = Vec::with_capacity(factors.len());
                for (k, fk) in factors.iter().enumerate() {
                    let dk = fk.diff(var);
                    if dk.is_zero() {
                        continue;
                    }
                    terms.push(Expr::product(factors.iter().enumerate().map(|(m, fm)| {
                        if m == k {
                            dk.clone()
                        } else {
                            fm.clone()
                        }
                    })));
                }
                Expr::sum(terms)
            }
            Expr::Pow(base, n) => {
                let db = base.diff(var);
                if db.is_zero() {
                    return Expr::zero();
                }
                Expr::product([
                    Expr::Const(*n),
                    Expr::pow((**base).clone(), n - 1.0),
                    db,
                ])
            }
            Expr::Neg(a) => Expr::neg(a.diff(var)),
            Expr::Sin(a) => chain(a, var, Expr::cos((**a).clone())),
            Expr::Cos(a) => chain(a, var, Expr::neg(Expr::sin((**a).clone()))),
            Expr::Exp(a) => chain(a, var, Expr::exp((**a).clone())),
            Expr::Log(a) => chain(a, var, Expr::pow((**a).clone(), -1.0)),
        }
    }

    /// Derivative along a sequence of coordinates, e.g. `[X1, X1, X2]` for
    /// the third partial `∂³/∂x1²∂x2`.
    pub fn diff_n(&self, vars: &[Var]) -> Expr {
        vars.iter().fold(self.clone(), |e, v| e.diff(*v))
    }

    /// Flat Laplacian.
    pub fn laplacian(&self) -> Expr {
        Expr::sum([self.diff_n(&[Var::X1, Var::X1]), self.diff_n(&[Var::X2, Var::X2])])
    }

    /// Flat biharmonic `Δ²`.
    pub fn biharmonic(&self) -> Expr {
        self.laplacian().laplacian()
    }

    pub fn eval(&self, x: Point) -> Result<f64, EvalError> {
        let v = self.eval_raw(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    fn eval_raw(&self, x: Point) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => x[v.index()],
            Expr::Sum(terms) => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.eval_raw(x)?;
                }
                acc
            }
            Expr::Product(factors) => {
                let mut acc = 1.0;
                for f in factors {
                    acc *= f.eval_raw(x)?;
                }
                acc
            }
            Expr::Pow(base, n) => {
                let b = base.eval_raw(x)?;
                if n.fract() == 0.0 && n.abs() <= i32::MAX as f64 {
                    b.powi(*n as i32)
                } else if b > 0.0 {
                    b.powf(*n)
                } else {
                    return Err(EvalError::PowDomain {
                        base: b,
                        exponent: *n,
                    });
                }
            }
            Expr::Neg(a) => -a.eval_raw(x)?,
            Expr::Sin(a) => a.eval_raw(x)?.sin(),
            Expr::Cos(a) => a.eval_raw(x)?.cos(),
            Expr::Exp(a) => a.eval_raw(x)?.exp(),
            Expr::Log(a) => {
                let v = a.eval_raw(x)?;
                if v <= 0.0 {
                    return Err(EvalError::LogDomain(v));
                }
                v.ln()
            }
        })
    }

    fn is_atom(&self) -> bool {
        match self {
            Expr::Var(_) | Expr::Sin(_) | Expr::Cos(_) | Expr::Exp(_) | Expr::Log(_) => true,
            Expr::Const(c) => *c >= 0.0,
            _ => false,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Sum(v) | Expr::Product(v) => v.iter().map(Expr::size).sum(),
            Expr::Pow(a, _)
            | Expr::Neg(a)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Exp(a)
            | Expr::Log(a) => a.size(),
        }
    }
}

fn chain(inner: &Expr, var: Var, outer_derivative: Expr) -> Expr {
    let d = inner.diff(var);
    if d.is_zero() {
        Expr::zero()
    } else {
        Expr::product([outer_derivative, d])
    }
}

fn number(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        format!("{c:?}")
    }
}

/// Binding context of a subexpression: a summand, a factor, or the operand
/// of `^` or unary minus.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Ctx {
    Term,
    Factor,
    Operand,
}

impl Expr {
    fn fmt_in(&self, f: &mut fmt::Formatter<'_>, ctx: Ctx) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => {
                if ctx == Ctx::Term {
                    write!(f, "-{}", number(-c))
                } else {
                    write!(f, "(-{})", number(-c))
                }
            }
            Expr::Const(c) => f.write_str(&number(*c)),
            Expr::Var(Var::X1) => f.write_str("x1"),
            Expr::Var(Var::X2) => f.write_str("x2"),
            Expr::Sum(terms) => {
                if ctx > Ctx::Term {
                    f.write_str("(")?;
                }
                for (k, t) in terms.iter().enumerate() {
                    match t {
                        Expr::Neg(a) if k > 0 => {
                            f.write_str(" - ")?;
                            a.fmt_in(f, Ctx::Factor)?;
                        }
                        Expr::Const(c) if k > 0 && *c < 0.0 => write!(f, " - {}", number(-c))?,
                        _ => {
                            if k > 0 {
                                f.write_str(" + ")?;
                            }
                            t.fmt_in(f, Ctx::Term)?;
                        }
                    }
                }
                if ctx > Ctx::Term {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Product(factors) => {
                if ctx == Ctx::Operand {
                    f.write_str("(")?;
                }
                for (k, t) in factors.iter().enumerate() {
                    if k > 0 {
                        f.write_str("*")?;
                    }
                    t.fmt_in(f, Ctx::Factor)?;
                }
                if ctx == Ctx::Operand {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Pow(base, n) => {
                if ctx == Ctx::Operand {
                    f.write_str("(")?;
                }
                base.fmt_in(f, Ctx::Operand)?;
                f.write_str("^")?;
                Expr::Const(*n).fmt_in(f, Ctx::Factor)?;
                if ctx == Ctx::Operand {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Neg(a) => {
                if ctx > Ctx::Term {
                    f.write_str("(")?;
                }
                f.write_str("-")?;
                match **a {
                    Expr::Var(_) | Expr::Sin(_) | Expr::Cos(_) | Expr::Exp(_) | Expr::Log(_) => {
                        a.fmt_in(f, Ctx::Operand)?
                    }
                    Expr::Const(c) if c >= 0.0 => a.fmt_in(f, Ctx::Operand)?,
                    Expr::Product(ref fs) if fs.first().is_some_and(Expr::is_atom) => a.fmt_in(f, Ctx::Factor)?,
                    _ => {
                        f.write_str("(")?;
                        a.fmt_in(f, Ctx::Term)?;
                        f.write_str(")")?;
                    }
                }
                if ctx > Ctx::Term {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
        }
    }
}

/// Prints in the input grammar with the fewest parentheses that keep the
/// meaning; the output parses back to a pointwise-equal tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_in(f, Ctx::Term)
    }
}
