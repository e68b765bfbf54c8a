//! Guard and update expressions: 64-bit checked integers and booleans.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        }
    }

    fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

/// Abstract syntax. Names refer to registers or to values carried on input ports.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Type {
    Int,
    Bool,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Type::Int => "int",
            Type::Bool => "bool",
        })
    }
}

/// Runtime values. `Unit` is what a control-only port carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Unit,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Unit => f.write_str("()"),
        }
    }
}

pub type Env = BTreeMap<String, Value>;

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Expr::Bool(true))
    }

    pub fn parse(text: &str) -> Result<Expr> {
        crate::format::parse_expr(text)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Neg(e) | Expr::Not(e) => e.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Int(_) | Expr::Bool(_) => {}
        }
    }

    /// Integer literals appearing in the expression.
    pub fn literals(&self) -> Vec<i64> {
        let mut out = Vec::new();
        self.collect_literals(&mut out);
        out
    }

    fn collect_literals(&self, out: &mut Vec<i64>) {
        match self {
            Expr::Int(v) => out.push(*v),
            Expr::Neg(e) | Expr::Not(e) => e.collect_literals(out),
            Expr::Bin(_, a, b) => {
                a.collect_literals(out);
                b.collect_literals(out);
            }
            Expr::Bool(_) | Expr::Var(_) => {}
        }
    }

    /// Type of the expression; `bound` decides which names may be referenced. All names are
    /// integer-typed.
    pub fn type_of(&self, bound: &dyn Fn(&str) -> bool) -> Result<Type> {
        let expect = |e: &Expr, want: Type| -> Result<()> {
            let got = e.type_of(bound)?;
            if got == want {
                Ok(())
            } else {
                Err(Error::Type(format!("`{e}` is {got}, expected {want}")))
            }
        };
        match self {
            Expr::Int(_) => Ok(Type::Int),
            Expr::Bool(_) => Ok(Type::Bool),
            Expr::Var(v) if bound(v) => Ok(Type::Int),
            Expr::Var(v) => Err(Error::UnboundReference(v.clone())),
            Expr::Neg(e) => expect(e, Type::Int).map(|_| Type::Int),
            Expr::Not(e) => expect(e, Type::Bool).map(|_| Type::Bool),
            Expr::Bin(op, a, b) => match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul => {
                    expect(a, Type::Int)?;
                    expect(b, Type::Int)?;
                    Ok(Type::Int)
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    expect(a, Type::Int)?;
                    expect(b, Type::Int)?;
                    Ok(Type::Bool)
                }
                BinOp::Eq => {
                    let ta = a.type_of(bound)?;
                    expect(b, ta)?;
                    Ok(Type::Bool)
                }
                BinOp::And | BinOp::Or => {
                    expect(a, Type::Bool)?;
                    expect(b, Type::Bool)?;
                    Ok(Type::Bool)
                }
            },
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.precedence(),
            Expr::Not(_) => 3,
            Expr::Neg(_) => 7,
            Expr::Int(v) if *v < 0 => 7,
            _ => 8,
        }
    }
}

/// Strict evaluation with checked arithmetic.
pub fn eval(e: &Expr, env: &Env) -> Result<Value> {
    let int = |x: &Expr| -> Result<i64> {
        match eval(x, env)? {
            Value::Int(v) => Ok(v),
            other => Err(Error::Type(format!("`{x}` evaluated to {other}, expected int"))),
        }
    };
    let boolean = |x: &Expr| -> Result<bool> {
        match eval(x, env)? {
            Value::Bool(v) => Ok(v),
            other => Err(Error::Type(format!("`{x}` evaluated to {other}, expected bool"))),
        }
    };
    let overflow = || Error::Overflow(e.to_string());
    Ok(match e {
        Expr::Int(v) => Value::Int(*v),
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Var(v) => *env
            .get(v)
            .ok_or_else(|| Error::UnboundReference(v.clone()))?,
        Expr::Neg(x) => Value::Int(int(x)?.checked_neg().ok_or_else(overflow)?),
        Expr::Not(x) => Value::Bool(!boolean(x)?),
        Expr::Bin(op, a, b) => match op {
            BinOp::Add => Value::Int(int(a)?.checked_add(int(b)?).ok_or_else(overflow)?),
            BinOp::Sub => Value::Int(int(a)?.checked_sub(int(b)?).ok_or_else(overflow)?),
            BinOp::Mul => Value::Int(int(a)?.checked_mul(int(b)?).ok_or_else(overflow)?),
            BinOp::Lt => Value::Bool(int(a)? < int(b)?),
            BinOp::Le => Value::Bool(int(a)? <= int(b)?),
            BinOp::Gt => Value::Bool(int(a)? > int(b)?),
            BinOp::Ge => Value::Bool(int(a)? >= int(b)?),
            BinOp::Eq => {
                let (x, y) = (eval(a, env)?, eval(b, env)?);
                match (x, y) {
                    (Value::Int(_), Value::Int(_)) | (Value::Bool(_), Value::Bool(_)) => {
                        Value::Bool(x == y)
                    }
                    _ => return Err(Error::Type(format!("cannot compare {x} with {y}"))),
                }
            }
            BinOp::And => {
                let (x, y) = (boolean(a)?, boolean(b)?);
                Value::Bool(x && y)
            }
            BinOp::Or => {
                let (x, y) = (boolean(a)?, boolean(b)?);
                Value::Bool(x || y)
            }
        },
    })
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Var(v) => f.write_str(v),
            Expr::Neg(e) => match **e {
                Expr::Int(_) => write!(f, "-({e})"),
                _ => {
                    f.write_str("-")?;
                    write_operand(f, e, 7)
                }
            },
            Expr::Not(e) => {
                f.write_str("not ")?;
                write_operand(f, e, 3)
            }
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                let left_min = if op.is_comparison() { p + 1 } else { p };
                write_operand(f, a, left_min)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, b, p + 1)
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.precedence() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Canonical form used by structural equivalence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Norm {
    Int(i64),
    Bool(bool),
    Var(String),
    Neg(Box<Norm>),
    Not(Box<Norm>),
    Sum(Vec<Norm>),
    Prod(Vec<Norm>),
    Sub(Box<Norm>, Box<Norm>),
    All(Vec<Norm>),
    Any(Vec<Norm>),
    Eq(Box<Norm>, Box<Norm>),
    Lt(Box<Norm>, Box<Norm>),
    Le(Box<Norm>, Box<Norm>),
}

/// Flattens `+ * and or`, sorts commutative operands, folds constants and rewrites `>`/`>=`
/// as `<`/`<=` with swapped operands.
pub fn normalize(e: &Expr) -> Norm {
    match e {
        Expr::Int(v) => Norm::Int(*v),
        Expr::Bool(b) => Norm::Bool(*b),
        Expr::Var(v) => Norm::Var(v.clone()),
        Expr::Neg(x) => match normalize(x) {
            Norm::Int(v) => v.checked_neg().map_or(Norm::Neg(Box::new(Norm::Int(v))), Norm::Int),
            Norm::Neg(inner) => *inner,
            n => Norm::Neg(Box::new(n)),
        },
        Expr::Not(x) => match normalize(x) {
            Norm::Bool(b) => Norm::Bool(!b),
            Norm::Not(inner) => *inner,
            n => Norm::Not(Box::new(n)),
        },
        Expr::Bin(op, a, b) => {
            let (na, nb) = (normalize(a), normalize(b));
            match op {
                BinOp::Add => arith(na, nb, true),
                BinOp::Mul => arith(na, nb, false),
                BinOp::Sub => match (&na, &nb) {
                    (Norm::Int(x), Norm::Int(y)) => x
                        .checked_sub(*y)
                        .map_or_else(|| Norm::Sub(Box::new(na.clone()), Box::new(nb.clone())), Norm::Int),
                    (_, Norm::Int(0)) => na,
                    _ => Norm::Sub(Box::new(na), Box::new(nb)),
                },
                BinOp::And => logic(na, nb, true),
                BinOp::Or => logic(na, nb, false),
                BinOp::Eq => match (&na, &nb) {
                    (Norm::Int(x), Norm::Int(y)) => Norm::Bool(x == y),
                    (Norm::Bool(x), Norm::Bool(y)) => Norm::Bool(x == y),
                    _ if na <= nb => Norm::Eq(Box::new(na), Box::new(nb)),
                    _ => Norm::Eq(Box::new(nb), Box::new(na)),
                },
                BinOp::Lt => compare(na, nb, false),
                BinOp::Le => compare(na, nb, true),
                BinOp::Gt => compare(nb, na, false),
                BinOp::Ge => compare(nb, na, true),
            }
        }
    }
}

fn arith(a: Norm, b: Norm, add: bool) -> Norm {
    let mut terms = Vec::new();
    for n in [a, b] {
        match n {
            Norm::Sum(ts) if add => terms.extend(ts),
            Norm::Prod(ts) if !add => terms.extend(ts),
            other => terms.push(other),
        }
    }
    let unit = if add { 0 } else { 1 };
    let mut folded: Option<i64> = None;
    let mut rest = Vec::new();
    for t in terms {
        match t {
            Norm::Int(v) => {
                let next = match folded {
                    None => Some(v),
                    Some(acc) if add => acc.checked_add(v),
                    Some(acc) => acc.checked_mul(v),
                };
                match next {
                    Some(x) => folded = Some(x),
                    None => rest.push(Norm::Int(v)),
                }
            }
            other => rest.push(other),
        }
    }
    match folded {
        Some(v) if v == unit && !rest.is_empty() => {}
        Some(v) => rest.push(Norm::Int(v)),
        None => {}
    }
    if rest.len() == 1 {
        return rest.pop().unwrap();
    }
    rest.sort();
    if add {
        Norm::Sum(rest)
    } else {
        Norm::Prod(rest)
    }
}

fn logic(a: Norm, b: Norm, all: bool) -> Norm {
    let mut terms = Vec::new();
    for n in [a, b] {
        match n {
            Norm::All(ts) if all => terms.extend(ts),
            Norm::Any(ts) if !all => terms.extend(ts),
            other => terms.push(other),
        }
    }
    let mut rest = BTreeSet::new();
    for t in terms {
        match t {
            Norm::Bool(b) if b == all => {}
            Norm::Bool(b) => return Norm::Bool(b),
            other => {
                rest.insert(other);
            }
        }
    }
    let mut rest: Vec<Norm> = rest.into_iter().collect();
    match rest.len() {
        0 => Norm::Bool(all),
        1 => rest.pop().unwrap(),
        _ if all => Norm::All(rest),
        _ => Norm::Any(rest),
    }
}

fn compare(a: Norm, b: Norm, or_equal: bool) -> Norm {
    if let (Norm::Int(x), Norm::Int(y)) = (&a, &b) {
        return Norm::Bool(if or_equal { x <= y } else { x < y });
    }
    if or_equal {
        Norm::Le(Box::new(a), Box::new(b))
    } else {
        Norm::Lt(Box::new(a), Box::new(b))
    }
}

/// How guards and update right-hand sides are compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GuardMode {
    /// Equal normal forms.
    #[default]
    Structural,
    /// Equal values on every assignment of the free names drawn from `lo..=hi`.
    BoundedSemantic { lo: i64, hi: i64 },
}

impl GuardMode {
    pub const DEFAULT_SEMANTIC: GuardMode = GuardMode::BoundedSemantic { lo: -4, hi: 4 };
}

impl fmt::Display for GuardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuardMode::Structural => f.write_str("structural"),
            GuardMode::BoundedSemantic { lo, hi } => write!(f, "bounded-semantic [{lo}..{hi}]"),
        }
    }
}

/// Cap on assignments tried by bounded-semantic comparison.
pub const SEMANTIC_ASSIGNMENT_CAP: usize = 1_000_000;

/// Equivalence of two expressions under `mode`. Expressions of different types are never
/// equivalent; ill-typed ones are an error.
pub fn guard_equiv(a: &Expr, b: &Expr, mode: GuardMode) -> Result<bool> {
    let any = |_: &str| true;
    if a.type_of(&any)? != b.type_of(&any)? {
        return Ok(false);
    }
    match mode {
        GuardMode::Structural => Ok(normalize(a) == normalize(b)),
        GuardMode::BoundedSemantic { lo, hi } => semantic_equiv(a, b, lo, hi),
    }
}

fn semantic_equiv(a: &Expr, b: &Expr, lo: i64, hi: i64) -> Result<bool> {
    if a == b {
        return Ok(true);
    }
    let vars: Vec<String> = a.free_vars().union(&b.free_vars()).cloned().collect();
    let width = usize::try_from(hi.saturating_sub(lo).saturating_add(1)).unwrap_or(0);
    let total = (0..vars.len()).try_fold(1usize, |acc, _| acc.checked_mul(width.max(1)));
    if total.is_none_or(|t| t > SEMANTIC_ASSIGNMENT_CAP) {
        return Err(Error::ResourceLimit {
            what: "bounded-semantic comparison",
            limit: SEMANTIC_ASSIGNMENT_CAP,
        });
    }
    if width == 0 {
        return Ok(true);
    }
    let mut digits = vec![lo; vars.len()];
    loop {
        let env: Env = vars
            .iter()
            .cloned()
            .zip(digits.iter().map(|v| Value::Int(*v)))
            .collect();
        if eval(a, &env).ok() != eval(b, &env).ok() {
            return Ok(false);
        }
        let mut i = 0;
        loop {
            if i == digits.len() {
                return Ok(true);
            }
            if digits[i] < hi {
                digits[i] += 1;
                break;
            }
            digits[i] = lo;
            i += 1;
        }
    }
}
