use std::collections::BTreeSet;

use super::LogicError;

/// Largest excess of `|s| + |t|` over 1 tolerated in a subscript, so that
/// decimal renderings of rationals such as `1/3, 2/3` are accepted.
pub const SUBSCRIPT_SLACK: f64 = 1e-12;

/// A scalar as written: a reduced fraction or a decimal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Ratio(i64, u64),
    Decimal(f64),
}

impl Scalar {
    pub const ZERO: Scalar = Scalar::Ratio(0, 1);
    pub const ONE: Scalar = Scalar::Ratio(1, 1);

    /// `num / den` in lowest terms.
    pub fn ratio(num: i64, den: u64) -> Result<Self, LogicError> {
        if den == 0 {
            return Err(LogicError::Constraint("zero denominator".into()));
        }
        let g = gcd(num.unsigned_abs(), den).max(1);
        Ok(Scalar::Ratio(num / g as i64, den / g))
    }

    pub fn integer(n: i64) -> Self {
        Scalar::Ratio(n, 1)
    }

    pub fn decimal(x: f64) -> Result<Self, LogicError> {
        if !x.is_finite() {
            return Err(LogicError::Constraint(format!("non-finite scalar {x}")));
        }
        Ok(Scalar::Decimal(x))
    }

    pub fn value(self) -> f64 {
        match self {
            Scalar::Ratio(n, d) => n as f64 / d as f64,
            Scalar::Decimal(x) => x,
        }
    }

    pub fn neg(self) -> Self {
        match self {
            Scalar::Ratio(n, d) => Scalar::Ratio(-n, d),
            Scalar::Decimal(x) => Scalar::Decimal(-x),
        }
    }

    pub fn abs(self) -> Self {
        match self {
            Scalar::Ratio(n, d) => Scalar::Ratio(n.abs(), d),
            Scalar::Decimal(x) => Scalar::Decimal(x.abs()),
        }
    }

    pub fn is_zero(self) -> bool {
        self.value() == 0.0
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `|s| + |t| <= 1`, the constraint on the subscripts of `⊕` and `∧`.
pub fn subscripts_ok(s: Scalar, t: Scalar) -> bool {
    s.value().abs() + t.value().abs() <= 1.0 + SUBSCRIPT_SLACK
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Var(String),
    Const(String),
    Zero,
    /// `⊕_{s,t}(a, b) = s a + t b`.
    Combine {
        s: Scalar,
        t: Scalar,
        a: Box<Term>,
        b: Box<Term>,
    },
    /// `∧_{s,t}(a, b) = (s a) ∧ (t b)`.
    Meet {
        s: Scalar,
        t: Scalar,
        a: Box<Term>,
        b: Box<Term>,
    },
    Abs(Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Self {
        Term::Const(name.to_string())
    }

    pub fn combine(s: Scalar, a: Term, t: Scalar, b: Term) -> Result<Self, LogicError> {
        if !subscripts_ok(s, t) {
            return Err(LogicError::Constraint(format!("subscripts {s}, {t} have |s| + |t| > 1")));
        }
        Ok(Term::Combine { s, t, a: Box::new(a), b: Box::new(b) })
    }

    pub fn meet(s: Scalar, a: Term, t: Scalar, b: Term) -> Result<Self, LogicError> {
        if !subscripts_ok(s, t) {
            return Err(LogicError::Constraint(format!("subscripts {s}, {t} have |s| + |t| > 1")));
        }
        Ok(Term::Meet { s, t, a: Box::new(a), b: Box::new(b) })
    }

    /// `s a`, stored as `⊕_{s,0}(a, 0)` so that the subscript constraint
    /// holds for every `|s| <= 1`.
    pub fn scaled(s: Scalar, a: Term) -> Result<Self, LogicError> {
        Term::combine(s, a, Scalar::ZERO, Term::Zero)
    }

    /// Recognizes the shape built by [`Term::scaled`].
    pub(crate) fn as_scaled(&self) -> Option<(Scalar, &Term)> {
        match self {
            Term::Combine { s, t, a, b } if *t == Scalar::ZERO && **b == Term::Zero => Some((*s, a)),
            _ => None,
        }
    }

    /// `(s a) ∨ (t b) = -((-s) a ∧ (-t) b)`.
    pub fn join(s: Scalar, a: Term, t: Scalar, b: Term) -> Result<Self, LogicError> {
        let inner = Term::meet(s.neg(), a, t.neg(), b)?;
        Term::scaled(Scalar::integer(-1), inner)
    }

    /// `a⁺ = (1 a) ∨ (0 a)`.
    pub fn pos(a: Term) -> Self {
        Term::join(Scalar::ONE, a.clone(), Scalar::ZERO, a).expect("1 + 0 <= 1")
    }

    pub fn abs(a: Term) -> Self {
        Term::Abs(Box::new(a))
    }

    /// Recognizes the expansion produced by [`Term::join`].
    pub(crate) fn as_join(&self) -> Option<(Scalar, &Term, Scalar, &Term)> {
        match self.as_scaled() {
            Some((s, Term::Meet { s: s1, t: t1, a, b })) if s == Scalar::integer(-1) => {
                Some((s1.neg(), a, t1.neg(), b))
            }
            _ => None,
        }
    }

    fn collect(&self, vars: &mut BTreeSet<String>, consts: &mut BTreeSet<String>, bound: &[String]) {
        match self {
            Term::Var(v) => {
                if !bound.contains(v) {
                    vars.insert(v.clone());
                }
            }
            Term::Const(c) => {
                consts.insert(c.clone());
            }
            Term::Zero => {}
            Term::Combine { a, b, .. } | Term::Meet { a, b, .. } => {
                a.collect(vars, consts, bound);
                b.collect(vars, consts, bound);
            }
            Term::Abs(a) => a.collect(vars, consts, bound),
        }
    }

    /// Lipschitz constant of the term, in the metric `d`, with respect to
    /// simultaneous moves of `vars`.
    pub fn lipschitz(&self, vars: &[String]) -> f64 {
        match self {
            Term::Var(v) => {
                if vars.contains(v) {
                    1.0
                } else {
                    0.0
                }
            }
            Term::Const(_) | Term::Zero => 0.0,
            Term::Combine { s, t, a, b } | Term::Meet { s, t, a, b } => {
                s.value().abs() * a.lipschitz(vars) + t.value().abs() * b.lipschitz(vars)
            }
            Term::Abs(a) => a.lipschitz(vars),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    Sup,
    Inf,
}

/// The finite connective registry.
#[derive(Debug, Clone, PartialEq)]
pub enum Connective {
    /// `|x - y|`
    AbsDiff,
    Max,
    Min,
    /// `x ∸ y = max(x - y, 0)`
    TSub,
    /// `≤(s, t) = |t - max(s, t)|`
    Leq,
    /// `x ↦ max(x, 0)^r`, `r > 0`.
    Pow(Scalar),
    /// `b + Σ c_i x_i`
    Affine {
        bias: Scalar,
        coeffs: Vec<Scalar>,
    },
}

impl Connective {
    pub fn name(&self) -> &'static str {
        match self {
            Connective::AbsDiff => "absdiff",
            Connective::Max => "max",
            Connective::Min => "min",
            Connective::TSub => "tsub",
            Connective::Leq => "leq",
            Connective::Pow(_) => "pow",
            Connective::Affine { .. } => "affine",
        }
    }

    /// `None` for the variadic `max` and `min` (at least one argument).
    pub fn arity(&self) -> Option<usize> {
        match self {
            Connective::AbsDiff | Connective::TSub | Connective::Leq => Some(2),
            Connective::Max | Connective::Min => None,
            Connective::Pow(_) => Some(1),
            Connective::Affine { coeffs, .. } => Some(coeffs.len()),
        }
    }

    pub fn apply(&self, xs: &[f64]) -> f64 {
        match self {
            Connective::AbsDiff => (xs[0] - xs[1]).abs(),
            Connective::Max => xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Connective::Min => xs.iter().copied().fold(f64::INFINITY, f64::min),
            Connective::TSub => (xs[0] - xs[1]).max(0.0),
            Connective::Leq => (xs[1] - xs[0].max(xs[1])).abs(),
            Connective::Pow(r) => xs[0].max(0.0).powf(r.value()),
            Connective::Affine { bias, coeffs } => {
                bias.value() + coeffs.iter().zip(xs).map(|(c, x)| c.value() * x).sum::<f64>()
            }
        }
    }

    /// Lipschitz constant from the argument constants, assuming arguments in `[0, 1]`.
    pub fn lipschitz(&self, ls: &[f64]) -> f64 {
        match self {
            Connective::AbsDiff | Connective::TSub | Connective::Leq => ls[0] + ls[1],
            Connective::Max | Connective::Min => ls.iter().copied().fold(0.0, f64::max),
            Connective::Pow(r) => {
                let r = r.value();
                if r >= 1.0 {
                    r * ls[0]
                } else if ls[0] == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Connective::Affine { coeffs, .. } => coeffs.iter().zip(ls).map(|(c, l)| c.value().abs() * l).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    /// `d(a, b) = ½ ||a - b||`
    Dist(Term, Term),
    Norm(Term),
    /// `||u, v||₊`, the norm of `u + i v` in the complexification.
    NormPlus(Term, Term),
    Num(Scalar),
    Apply(Connective, Vec<Formula>),
    Quant {
        q: Quantifier,
        var: String,
        body: Box<Formula>,
    },
}

impl Formula {
    pub fn apply(c: Connective, args: Vec<Formula>) -> Result<Self, LogicError> {
        let ok = match c.arity() {
            Some(k) => args.len() == k,
            None => !args.is_empty(),
        };
        if !ok {
            return Err(LogicError::Arity { name: c.name().to_string(), got: args.len() });
        }
        if let Connective::Pow(r) = &c {
            if !(r.value() > 0.0) {
                return Err(LogicError::Constraint(format!("pow exponent {r} must be positive")));
            }
        }
        Ok(Formula::Apply(c, args))
    }

    pub fn sup(var: &str, body: Formula) -> Self {
        Formula::Quant { q: Quantifier::Sup, var: var.to_string(), body: Box::new(body) }
    }

    pub fn inf(var: &str, body: Formula) -> Self {
        Formula::Quant { q: Quantifier::Inf, var: var.to_string(), body: Box::new(body) }
    }

    fn collect(&self, vars: &mut BTreeSet<String>, consts: &mut BTreeSet<String>, bound: &mut Vec<String>) {
        match self {
            Formula::Dist(a, b) | Formula::NormPlus(a, b) => {
                a.collect(vars, consts, bound);
                b.collect(vars, consts, bound);
            }
            Formula::Norm(a) => a.collect(vars, consts, bound),
            Formula::Num(_) => {}
            Formula::Apply(_, args) => {
                for f in args {
                    f.collect(vars, consts, bound);
                }
            }
            Formula::Quant { var, body, .. } => {
                bound.push(var.clone());
                body.collect(vars, consts, bound);
                bound.pop();
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let (mut vars, mut consts) = (BTreeSet::new(), BTreeSet::new());
        self.collect(&mut vars, &mut consts, &mut Vec::new());
        vars
    }

    pub fn constants(&self) -> BTreeSet<String> {
        let (mut vars, mut consts) = (BTreeSet::new(), BTreeSet::new());
        self.collect(&mut vars, &mut consts, &mut Vec::new());
        consts
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Quant { .. } => false,
            Formula::Apply(_, args) => args.iter().all(Formula::is_quantifier_free),
            _ => true,
        }
    }

    /// Lipschitz constant with respect to simultaneous moves of `vars` in the
    /// metric `d`, assuming every connective argument lies in `[0, 1]`.
    pub fn lipschitz(&self, vars: &[String]) -> f64 {
        match self {
            Formula::Dist(a, b) => a.lipschitz(vars) + b.lipschitz(vars),
            Formula::Norm(a) => 2.0 * a.lipschitz(vars),
            Formula::NormPlus(a, b) => 2.0 * (a.lipschitz(vars) + b.lipschitz(vars)),
            Formula::Num(_) => 0.0,
            Formula::Apply(c, args) => {
                let ls: Vec<f64> = args.iter().map(|f| f.lipschitz(vars)).collect();
                c.lipschitz(&ls)
            }
            Formula::Quant { var, body, .. } => {
                let inner: Vec<String> = vars.iter().filter(|v| *v != var).cloned().collect();
                body.lipschitz(&inner)
            }
        }
    }
}
