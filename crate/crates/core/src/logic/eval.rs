use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ast::{Connective, Formula, Quantifier, Term};
use super::model::{Interpretation, LatticeModel};
use super::LogicError;

/// A truth value with a bracket `[lower, upper]` containing the exact value.
///
/// Quantifier-free formulas are exact. For quantifiers the sampled side is a
/// certified bound (the best value found); the other side adds the body's
/// Lipschitz constant times the dispersion of the sample set, measured on a
/// fixed set of reference points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruthValue {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl TruthValue {
    pub fn exact(value: f64) -> Self {
        Self { value, lower: value, upper: value }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// How hard quantifiers are searched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantifierBudget {
    /// Halton points per quantifier block.
    pub samples: usize,
    /// Best sample points refined by pattern search.
    pub refine_starts: usize,
    /// Pattern-search sweeps per start.
    pub refine_rounds: usize,
    /// Reference points for the dispersion estimate.
    pub probes: usize,
    /// Models of larger dimension are searched over block-constant vectors
    /// with this many blocks.
    pub max_search_dim: usize,
    /// Largest number of signed-basis-vector combinations tried exhaustively.
    pub vertex_cap: usize,
    pub seed: u64,
}

impl Default for QuantifierBudget {
    fn default() -> Self {
        Self {
            samples: 256,
            refine_starts: 3,
            refine_rounds: 24,
            probes: 64,
            max_search_dim: 16,
            vertex_cap: 2048,
            seed: 0,
        }
    }
}

/// Evaluates a sentence.
pub fn eval(f: &Formula, interp: &Interpretation, budget: &QuantifierBudget) -> Result<TruthValue, LogicError> {
    eval_with(f, interp, &[], budget)
}

/// Evaluates a formula whose free variables are assigned by `env`.
pub fn eval_with(
    f: &Formula,
    interp: &Interpretation,
    env: &[(String, Vec<f64>)],
    budget: &QuantifierBudget,
) -> Result<TruthValue, LogicError> {
    for c in f.constants() {
        if !interp.has_constant(&c) {
            return Err(LogicError::UnknownSymbol(c));
        }
    }
    for v in f.free_vars() {
        if !env.iter().any(|(n, _)| *n == v) {
            return Err(LogicError::UnboundVariable(v));
        }
    }
    for (_, x) in env {
        if x.len() != interp.dim() {
            return Err(LogicError::Dimension { expected: interp.dim(), got: x.len() });
        }
    }
    let ctx = Ctx { interp, model: interp.model(), budget, consts: true };
    let mut env = env.to_vec();
    ctx.formula(f, &mut env)
}

/// A term value; zero is kept symbolic so that zero constants cost nothing.
enum Val<'a> {
    Zero,
    Ref(&'a [f64]),
    Own(Vec<f64>),
}

impl Val<'_> {
    fn slice(&self) -> Option<&[f64]> {
        match self {
            Val::Zero => None,
            Val::Ref(x) => Some(x),
            Val::Own(x) => Some(x),
        }
    }
}

type Env = Vec<(String, Vec<f64>)>;

struct Ctx<'a> {
    interp: &'a Interpretation,
    model: &'a LatticeModel,
    budget: &'a QuantifierBudget,
    /// Constants live in this model (false inside a coarsened search).
    consts: bool,
}

impl<'a> Ctx<'a> {
    fn lookup<'s>(&'s self, env: &'s Env, v: &str) -> Result<&'s [f64], LogicError> {
        env.iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, x)| x.as_slice())
            .ok_or_else(|| LogicError::UnboundVariable(v.to_string()))
    }

    fn term<'s>(&'s self, t: &Term, env: &'s Env) -> Result<Val<'s>, LogicError> {
        let d = self.model.dim();
        Ok(match t {
            Term::Zero => Val::Zero,
            Term::Var(v) => Val::Ref(self.lookup(env, v)?),
            Term::Const(c) => {
                if !self.consts {
                    return Err(LogicError::UnknownSymbol(c.clone()));
                }
                match self.interp.constant_ref(c) {
                    Some(Some(x)) => Val::Ref(x),
                    Some(None) => Val::Zero,
                    None => return Err(LogicError::UnknownSymbol(c.clone())),
                }
            }
            Term::Combine { s, t, a, b } => {
                let (s, t) = (s.value(), t.value());
                let va = if s == 0.0 { Val::Zero } else { self.term(a, env)? };
                let vb = if t == 0.0 { Val::Zero } else { self.term(b, env)? };
                match (va.slice(), vb.slice()) {
                    (None, None) => Val::Zero,
                    (Some(x), None) => Val::Own(x.iter().map(|x| s * x).collect()),
                    (None, Some(y)) => Val::Own(y.iter().map(|y| t * y).collect()),
                    (Some(x), Some(y)) => Val::Own(x.iter().zip(y).map(|(x, y)| s * x + t * y).collect()),
                }
            }
            Term::Meet { s, t, a, b } => {
                let (s, t) = (s.value(), t.value());
                let va = self.term(a, env)?;
                let vb = self.term(b, env)?;
                let at = |v: &Val, i: usize| v.slice().map_or(0.0, |x| x[i]);
                Val::Own((0..d).map(|i| (s * at(&va, i)).min(t * at(&vb, i))).collect())
            }
            Term::Abs(a) => match self.term(a, env)? {
                Val::Zero => Val::Zero,
                v => Val::Own(v.slice().expect("non-zero").iter().map(|x| x.abs()).collect()),
            },
        })
    }

    fn norm(&self, t: &Term, env: &Env) -> Result<f64, LogicError> {
        if let (Term::Const(c), true) = (t, self.consts) {
            if let Some(n) = self.interp.constant_norm(c) {
                return Ok(n);
            }
        }
        Ok(match self.term(t, env)? {
            Val::Zero => 0.0,
            v => self.model.norm(v.slice().expect("non-zero")),
        })
    }

    fn formula(&self, f: &Formula, env: &mut Env) -> Result<TruthValue, LogicError> {
        match f {
            Formula::Num(s) => Ok(TruthValue::exact(s.value())),
            Formula::Norm(t) => Ok(TruthValue::exact(self.norm(t, env)?)),
            Formula::Dist(a, b) => {
                let (va, vb) = (self.term(a, env)?, self.term(b, env)?);
                let v = match (va.slice(), vb.slice()) {
                    (None, None) => 0.0,
                    (Some(x), None) | (None, Some(x)) => 0.5 * self.model.norm(x),
                    (Some(x), Some(y)) => self.model.dist(x, y),
                };
                Ok(TruthValue::exact(v))
            }
            Formula::NormPlus(a, b) => {
                let d = self.model.dim();
                let zeros = vec![0.0; d];
                let (va, vb) = (self.term(a, env)?, self.term(b, env)?);
                let u = va.slice().unwrap_or(&zeros);
                let v = vb.slice().unwrap_or(&zeros);
                Ok(TruthValue::exact(self.interp.pair_norm(self.model, u, v)))
            }
            Formula::Apply(c, args) => {
                let vals = args.iter().map(|a| self.formula(a, env)).collect::<Result<Vec<_>, _>>()?;
                Ok(apply_interval(c, &vals))
            }
            Formula::Quant { .. } => self.quantifier(f, env),
        }
    }

    fn quantifier(&self, f: &Formula, env: &mut Env) -> Result<TruthValue, LogicError> {
        let (q, vars, body) = quantifier_block(f);
        let d = self.model.dim();
        let budget = self.budget;
        let lip = body.lipschitz(&vars);

        let blocks = (d > budget.max_search_dim).then(|| self.model.blocks(budget.max_search_dim));
        let coarse_model = blocks.as_ref().map(|b| self.model.coarsen(b));
        let search = coarse_model.as_ref().unwrap_or(self.model);
        let self_contained = body.constants().is_empty() && body.free_vars().iter().all(|v| vars.contains(v));
        let coarse_ctx = coarse_model.as_ref().filter(|_| self_contained).map(|m| Ctx {
            interp: self.interp,
            model: m,
            budget,
            consts: false,
        });

        let mut evaluate = |ys: &[Vec<f64>]| -> Result<TruthValue, LogicError> {
            if let Some(ctx) = &coarse_ctx {
                let mut inner: Env = vars.iter().cloned().zip(ys.iter().cloned()).collect();
                return ctx.formula(body, &mut inner);
            }
            let depth = env.len();
            for (v, y) in vars.iter().zip(ys) {
                let x = match &blocks {
                    Some(bs) => expand(y, bs, d),
                    None => y.clone(),
                };
                env.push((v.clone(), x));
            }
            let out = self.formula(body, env);
            env.truncate(depth);
            out
        };

        let better = |a: f64, b: f64| match q {
            Quantifier::Sup => a > b,
            Quantifier::Inf => a < b,
        };
        let k = search.dim();
        let m = vars.len();
        let mut best = Best::new(q);

        let mut points = vertex_points(search, m, budget.vertex_cap);
        points.extend(halton_points(search, m, budget.samples));
        let mut scored = Vec::with_capacity(points.len());
        for ys in &points {
            let tv = evaluate(ys)?;
            best.add(tv);
            scored.push(tv.value);
        }
        let dispersion = dispersion(search, &points, m, budget.probes, budget.seed);

        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&i, &j| match q {
            Quantifier::Sup => scored[j].total_cmp(&scored[i]),
            Quantifier::Inf => scored[i].total_cmp(&scored[j]),
        });
        let scales: Vec<f64> = search.weights().iter().map(|w| w.powf(-1.0 / search.p().get())).collect();
        for &start in order.iter().take(budget.refine_starts) {
            let mut y = points[start].clone();
            let mut current = scored[start];
            let mut h = 0.5;
            for _ in 0..budget.refine_rounds {
                let mut moved = false;
                for j in 0..m {
                    for i in 0..k {
                        for sign in [1.0, -1.0] {
                            let mut cand = y.clone();
                            cand[j][i] += sign * h * scales[i];
                            search.clamp_to_ball(&mut cand[j]);
                            let tv = evaluate(&cand)?;
                            best.add(tv);
                            if better(tv.value, current) {
                                current = tv.value;
                                y = cand;
                                moved = true;
                            }
                        }
                    }
                }
                if !moved {
                    h *= 0.5;
                    if h < 1e-6 {
                        break;
                    }
                }
            }
        }
        Ok(best.finish(lip * dispersion))
    }
}

/// Collects `Q x1 . Q x2 . ... body` with one quantifier kind into a joint search.
fn quantifier_block(f: &Formula) -> (Quantifier, Vec<String>, &Formula) {
    let Formula::Quant { q, .. } = f else { unreachable!("called on a quantifier") };
    let mut vars = Vec::new();
    let mut cur = f;
    while let Formula::Quant { q: q2, var, body } = cur {
        if q2 != q {
            break;
        }
        vars.push(var.clone());
        cur = body;
    }
    (*q, vars, cur)
}

struct Best {
    q: Quantifier,
    value: f64,
    lower: f64,
    upper: f64,
}

impl Best {
    fn new(q: Quantifier) -> Self {
        let start = match q {
            Quantifier::Sup => f64::NEG_INFINITY,
            Quantifier::Inf => f64::INFINITY,
        };
        Self { q, value: start, lower: start, upper: start }
    }

    fn add(&mut self, tv: TruthValue) {
        let pick = match self.q {
            Quantifier::Sup => f64::max,
            Quantifier::Inf => f64::min,
        };
        self.value = pick(self.value, tv.value);
        self.lower = pick(self.lower, tv.lower);
        self.upper = pick(self.upper, tv.upper);
    }

    fn finish(self, slack: f64) -> TruthValue {
        match self.q {
            Quantifier::Sup => TruthValue { value: self.value, lower: self.lower, upper: self.upper + slack },
            Quantifier::Inf => TruthValue { value: self.value, lower: self.lower - slack, upper: self.upper },
        }
    }
}

fn expand(y: &[f64], blocks: &[std::ops::Range<usize>], d: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    for (b, v) in blocks.iter().zip(y) {
        x[b.clone()].fill(*v);
    }
    x
}

/// Interval extension of a connective.
fn apply_interval(c: &Connective, args: &[TruthValue]) -> TruthValue {
    let value = c.apply(&args.iter().map(|a| a.value).collect::<Vec<_>>());
    if args.iter().all(TruthValue::is_exact) {
        return TruthValue::exact(value);
    }
    let (lower, upper) = match c {
        Connective::AbsDiff => {
            let lo = args[0].lower - args[1].upper;
            let hi = args[0].upper - args[1].lower;
            if lo >= 0.0 {
                (lo, hi)
            } else if hi <= 0.0 {
                (-hi, -lo)
            } else {
                (0.0, hi.max(-lo))
            }
        }
        Connective::TSub | Connective::Leq => {
            ((args[0].lower - args[1].upper).max(0.0), (args[0].upper - args[1].lower).max(0.0))
        }
        Connective::Max | Connective::Min => {
            let los: Vec<f64> = args.iter().map(|a| a.lower).collect();
            let his: Vec<f64> = args.iter().map(|a| a.upper).collect();
            (c.apply(&los), c.apply(&his))
        }
        Connective::Pow(_) => (c.apply(&[args[0].lower]), c.apply(&[args[0].upper])),
        Connective::Affine { bias, coeffs } => {
            let mut lo = bias.value();
            let mut hi = bias.value();
            for (c, a) in coeffs.iter().zip(args) {
                let c = c.value();
                if c >= 0.0 {
                    lo += c * a.lower;
                    hi += c * a.upper;
                } else {
                    lo += c * a.upper;
                    hi += c * a.lower;
                }
            }
            (lo, hi)
        }
    };
    TruthValue { value, lower: lower.min(value), upper: upper.max(value) }
}

/// Maps a point of the cube `[-1, 1]^k` radially onto the unit ball.
fn cube_to_ball(model: &LatticeModel, v: &[f64]) -> Vec<f64> {
    let sup = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let n = model.norm(v);
    if n == 0.0 {
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| x * sup / n).collect()
}

/// All tuples of `0` and signed normalized basis vectors, if there are at
/// most `cap` of them.
fn vertex_points(model: &LatticeModel, m: usize, cap: usize) -> Vec<Vec<Vec<f64>>> {
    let k = model.dim();
    let mut single = vec![vec![0.0; k]];
    for i in 0..k {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; k];
            e[i] = sign;
            let n = model.norm(&e);
            e[i] /= n;
            single.push(e);
        }
    }
    let total = (single.len() as f64).powi(m as i32);
    if total > cap as f64 {
        return Vec::new();
    }
    let mut out: Vec<Vec<Vec<f64>>> = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                single.iter().map(move |e| {
                    let mut p = prefix.clone();
                    p.push(e.clone());
                    p
                })
            })
            .collect();
    }
    out
}

fn primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if out.iter().take_while(|&&p| p * p <= c).all(|p| !c.is_multiple_of(*p)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

fn radical_inverse(base: u64, mut i: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut x = 0.0;
    while i > 0 {
        x += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    x
}

/// The first `n` points of the Halton sequence in `m · dim` coordinates,
/// mapped onto `m` copies of the ball. A prefix of a longer run.
fn halton_points(model: &LatticeModel, m: usize, n: usize) -> Vec<Vec<Vec<f64>>> {
    let k = model.dim();
    let ps = primes(k * m);
    (1..=n as u64)
        .map(|idx| {
            (0..m)
                .map(|j| {
                    let v: Vec<f64> = (0..k).map(|i| 2.0 * radical_inverse(ps[j * k + i], idx) - 1.0).collect();
                    cube_to_ball(model, &v)
                })
                .collect()
        })
        .collect()
}

/// Largest distance from a reference point to the nearest candidate, in the
/// max-over-variables metric `d`.
fn dispersion(model: &LatticeModel, points: &[Vec<Vec<f64>>], m: usize, probes: usize, seed: u64) -> f64 {
    if points.is_empty() {
        return 1.0;
    }
    let k = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let probe: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let v: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..=1.0)).collect();
                cube_to_ball(model, &v)
            })
            .collect();
        let nearest = points
            .iter()
            .map(|p| p.iter().zip(&probe).map(|(a, b)| model.dist(a, b)).fold(0.0f64, f64::max))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest);
    }
    worst
}
