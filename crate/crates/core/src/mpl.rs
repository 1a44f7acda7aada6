//! Cross-ratios, multiple polylogarithms `I_{s1,...,sk}(x1,...,xk)` and the
//! conversion of hyperlog terms to coupled cross-ratio form.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{fmt_q, parse_q, LinComb, Q};
use crate::error::{Error, Result};
use crate::hyperlog::{HExpr, HTerm, Point};

/// `c · Π (q - p)^e` over formal differences of points, keyed by `(p, q)`
/// with `p < q`. Differences involving infinity are dropped.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiffMonomial {
    pub constant: Q,
    pub factors: BTreeMap<(Point, Point), i32>,
}

impl DiffMonomial {
    pub fn constant(c: Q) -> DiffMonomial {
        DiffMonomial { constant: c, factors: BTreeMap::new() }
    }

    pub fn one() -> DiffMonomial {
        DiffMonomial::constant(Q::one())
    }

    /// `(p - q)^e`.
    pub fn diff_pow(p: &Point, q: &Point, e: i32) -> DiffMonomial {
        let mut m = DiffMonomial::one();
        m.mul_diff(p, q, e);
        m
    }

    pub fn diff(p: &Point, q: &Point) -> DiffMonomial {
        DiffMonomial::diff_pow(p, q, 1)
    }

    /// The point itself, as the difference `p - 0`.
    pub fn point(p: &Point) -> DiffMonomial {
        DiffMonomial::diff(p, &Point::Zero)
    }

    pub fn mul_diff(&mut self, p: &Point, q: &Point, e: i32) {
        if e == 0 || p.is_infinity() || q.is_infinity() {
            return;
        }
        if p == q {
            self.constant = Q::zero();
            return;
        }
        // the key (lo, hi) stands for hi - lo
        let key = if p < q {
            if e % 2 != 0 {
                self.constant = -self.constant.clone();
            }
            (p.clone(), q.clone())
        } else {
            (q.clone(), p.clone())
        };
        // 1 - 0 is a number
        if matches!(key, (Point::Zero, Point::One)) {
            return;
        }
        let slot = self.factors.entry(key.clone()).or_insert(0);
        *slot += e;
        if *slot == 0 {
            self.factors.remove(&key);
        }
    }

    pub fn mul(&self, other: &DiffMonomial) -> DiffMonomial {
        let mut out = self.clone();
        out.constant *= &other.constant;
        for ((p, q), e) in &other.factors {
            let slot = out.factors.entry((p.clone(), q.clone())).or_insert(0);
            *slot += e;
            if *slot == 0 {
                out.factors.remove(&(p.clone(), q.clone()));
            }
        }
        out
    }

    pub fn inv(&self) -> Result<DiffMonomial> {
        if self.constant.is_zero() {
            return Err(Error::ZeroArgument(self.to_string()));
        }
        Ok(DiffMonomial {
            constant: self.constant.recip(),
            factors: self.factors.iter().map(|(k, e)| (k.clone(), -e)).collect(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero()
    }

    /// Names of the variables the monomial depends on.
    pub fn points(&self) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        for (p, q) in self.factors.keys() {
            for x in [p, q] {
                if matches!(x, Point::Var(_)) && !out.contains(x) {
                    out.push(x.clone());
                }
            }
        }
        out
    }

    pub fn eval(&self, value: &dyn Fn(&Point) -> Result<Q>) -> Result<Q> {
        let mut out = self.constant.clone();
        for ((p, q), e) in &self.factors {
            let d = value(q)? - value(p)?;
            if d.is_zero() {
                return Err(Error::RedrawRequired(format!("{q} - {p} vanishes")));
            }
            out *= pow_q(&d, *e);
        }
        Ok(out)
    }
}

pub fn pow_q(x: &Q, e: i32) -> Q {
    let base = if e < 0 { x.recip() } else { x.clone() };
    num_traits::pow(base, e.unsigned_abs() as usize)
}

fn point_value(p: &Point) -> String {
    p.to_string()
}

impl fmt::Display for DiffMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut num = Vec::new();
        let mut den = Vec::new();
        for ((p, q), e) in &self.factors {
            let base = if *p == Point::Zero { point_value(q) } else { format!("({q}-{p})") };
            let s = if e.abs() == 1 { base } else { format!("{base}^{}", e.abs()) };
            if *e > 0 {
                num.push(s);
            } else {
                den.push(s);
            }
        }
        let c = &self.constant;
        let mut out = String::new();
        if c.is_negative() {
            out.push('-');
        }
        let c_abs = c.abs();
        let c_num = Q::from_integer(c_abs.numer().clone());
        let c_den = c_abs.denom().clone();
        if !c_num.is_one() || num.is_empty() {
            out.push_str(&fmt_q(&c_num));
        }
        out.push_str(&num.join(""));
        if !den.is_empty() || !c_den.is_one() {
            out.push('/');
            if !c_den.is_one() {
                out.push_str(&c_den.to_string());
            }
            out.push_str(&den.join(""));
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for DiffMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `CR(a,b,c,d) = ((a-c)/(a-d)) / ((b-c)/(b-d))`, stored as given.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CrossRatio {
    pub a: Point,
    pub b: Point,
    pub c: Point,
    pub d: Point,
}

/// Checks the four points are pairwise distinct; coinciding points give the
/// degenerate values 0, 1 or infinity.
pub fn cross_ratio(a: &Point, b: &Point, c: &Point, d: &Point) -> Result<CrossRatio> {
    let pts = [a, b, c, d];
    for i in 0..4 {
        for j in i + 1..4 {
            if pts[i] == pts[j] {
                return Err(Error::DegenerateCrossRatio(format!("CR({a},{b},{c},{d})")));
            }
        }
    }
    Ok(CrossRatio { a: a.clone(), b: b.clone(), c: c.clone(), d: d.clone() })
}

impl CrossRatio {
    pub fn points(&self) -> [&Point; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    /// The value-preserving images `abcd, badc, cdab, dcba`.
    pub fn images(&self) -> [CrossRatio; 4] {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let mk = |w: &Point, x: &Point, y: &Point, z: &Point| CrossRatio {
            a: w.clone(),
            b: x.clone(),
            c: y.clone(),
            d: z.clone(),
        };
        [mk(a, b, c, d), mk(b, a, d, c), mk(c, d, a, b), mk(d, c, b, a)]
    }

    /// The least image under the point order; it starts with the least
    /// point.
    pub fn canonical(&self) -> CrossRatio {
        self.images().into_iter().min().expect("four images")
    }

    /// `CR(a,b,d,c) = 1 / CR(a,b,c,d)`.
    pub fn inverse(&self) -> CrossRatio {
        CrossRatio { a: self.a.clone(), b: self.b.clone(), c: self.d.clone(), d: self.c.clone() }
    }

    pub fn monomial(&self) -> DiffMonomial {
        let mut m = DiffMonomial::one();
        m.mul_diff(&self.a, &self.c, 1);
        m.mul_diff(&self.b, &self.d, 1);
        m.mul_diff(&self.a, &self.d, -1);
        m.mul_diff(&self.b, &self.c, -1);
        m
    }

    /// `1 - CR(a,b,c,d) = (a-b)(d-c) / ((a-d)(b-c))`.
    pub fn one_minus(&self) -> DiffMonomial {
        let mut m = DiffMonomial::one();
        m.mul_diff(&self.a, &self.b, 1);
        m.mul_diff(&self.d, &self.c, 1);
        m.mul_diff(&self.a, &self.d, -1);
        m.mul_diff(&self.b, &self.c, -1);
        m
    }

    pub fn eval(&self, value: &dyn Fn(&Point) -> Result<Q>) -> Result<Q> {
        self.monomial().eval(value)
    }
}

fn all_single_char(points: &[&Point]) -> bool {
    points.iter().all(|p| match p {
        Point::Var(n) => n.chars().count() == 1,
        Point::Infinity => true,
        _ => true,
    })
}

fn join_points(points: &[&Point]) -> String {
    if all_single_char(points) {
        points
            .iter()
            .map(|p| if p.is_infinity() { "∞".to_string() } else { p.to_string() })
            .collect()
    } else {
        points.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
    }
}

impl fmt::Display for CrossRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join_points(&self.points()))
    }
}

impl fmt::Debug for CrossRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CR({self})")
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arg {
    Cr(CrossRatio),
    Mono(DiffMonomial),
}

impl Arg {
    pub fn monomial(&self) -> DiffMonomial {
        match self {
            Arg::Cr(c) => c.monomial(),
            Arg::Mono(m) => m.clone(),
        }
    }

    pub fn variables(&self) -> Vec<Point> {
        match self {
            Arg::Cr(c) => c.points().into_iter().filter(|p| matches!(p, Point::Var(_))).cloned().collect(),
            Arg::Mono(m) => m.points(),
        }
    }

    /// The same function with a canonical representation.
    pub fn canonical(&self) -> Arg {
        match self {
            Arg::Cr(c) => Arg::Cr(c.canonical()),
            Arg::Mono(m) => Arg::Mono(m.clone()),
        }
    }

    pub fn inverse(&self) -> Result<Arg> {
        match self {
            Arg::Cr(c) => Ok(Arg::Cr(c.inverse())),
            Arg::Mono(m) => Ok(Arg::Mono(m.inv()?)),
        }
    }

    pub fn eval(&self, value: &dyn Fn(&Point) -> Result<Q>) -> Result<Q> {
        self.monomial().eval(value)
    }

    pub fn var(name: &str) -> Arg {
        Arg::Mono(DiffMonomial::point(&Point::var(name)))
    }
}

impl Arg {
    /// The argument with every point replaced by its image under `f`.
    pub fn map_points(&self, f: &dyn Fn(&Point) -> Point) -> Result<Arg> {
        match self {
            Arg::Cr(c) => Ok(Arg::Cr(cross_ratio(&f(&c.a), &f(&c.b), &f(&c.c), &f(&c.d))?)),
            Arg::Mono(m) => {
                let mut out = DiffMonomial::constant(m.constant.clone());
                for ((lo, hi), e) in &m.factors {
                    out.mul_diff(&f(hi), &f(lo), *e);
                }
                if out.is_zero() {
                    return Err(Error::ZeroArgument(format!("{m}")));
                }
                Ok(Arg::Mono(out))
            }
        }
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Cr(c) => write!(f, "{c}"),
            Arg::Mono(m) => write!(f, "{m}"),
        }
    }
}

impl fmt::Debug for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `I_{s1,...,sk}(x1,...,xk) = I(0 | x1, 0^{s1-1}, ..., xk, 0^{sk-1} | 1)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MplTerm {
    pub indices: Vec<u32>,
    pub args: Vec<Arg>,
}

pub type MplExpr = LinComb<MplTerm>;

impl MplTerm {
    pub fn new(indices: Vec<u32>, args: Vec<Arg>) -> Result<MplTerm> {
        if indices.is_empty() || indices.len() != args.len() || indices.contains(&0) {
            return Err(Error::Precondition(format!(
                "{} indices for {} arguments",
                indices.len(),
                args.len()
            )));
        }
        Ok(MplTerm { indices, args })
    }

    /// Coupled term `I_s(p q r d1, p q r d2, ...)`.
    pub fn coupled(indices: Vec<u32>, prefix: [&Point; 3], tails: &[Point]) -> Result<MplTerm> {
        let args = tails
            .iter()
            .map(|d| cross_ratio(prefix[0], prefix[1], prefix[2], d).map(Arg::Cr))
            .collect::<Result<Vec<_>>>()?;
        MplTerm::new(indices, args)
    }

    pub fn weight(&self) -> u32 {
        self.indices.iter().sum()
    }

    pub fn depth(&self) -> usize {
        self.indices.len()
    }

    /// True if every argument is a cross-ratio with the same first three
    /// points.
    pub fn is_coupled(&self) -> bool {
        let mut prefix = None;
        for a in &self.args {
            let Arg::Cr(c) = a else { return false };
            let p = (&c.a, &c.b, &c.c);
            match prefix {
                None => prefix = Some(p),
                Some(q) if q == p => {}
                Some(_) => return false,
            }
        }
        true
    }

    pub fn variables(&self) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        for a in &self.args {
            for p in a.variables() {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out.sort();
        out
    }

    /// The point sequence `(0, x1, 0, .., xk, 0, .., 1)` of the underlying
    /// iterated integral, with `None` standing for a zero entry.
    pub fn word(&self) -> Vec<Option<&Arg>> {
        let mut out = Vec::with_capacity(self.weight() as usize);
        for (s, a) in self.indices.iter().zip(&self.args) {
            out.push(Some(a));
            for _ in 1..*s {
                out.push(None);
            }
        }
        out
    }

    fn index_string(&self) -> String {
        self.indices.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
    }

    /// `[abcd_1d_2...]_{s}` for coupled terms, the full form otherwise.
    pub fn coupled_render(&self) -> String {
        if !self.is_coupled() {
            return self.to_string();
        }
        let Arg::Cr(first) = &self.args[0] else { unreachable!() };
        let mut pts = vec![&first.a, &first.b, &first.c];
        for a in &self.args {
            let Arg::Cr(c) = a else { unreachable!() };
            pts.push(&c.d);
        }
        format!("[{}]_{{{}}}", join_points(&pts), self.index_string())
    }

    pub fn map_points(&self, f: &dyn Fn(&Point) -> Point) -> Result<MplTerm> {
        let args = self.args.iter().map(|a| a.map_points(f)).collect::<Result<Vec<_>>>()?;
        MplTerm::new(self.indices.clone(), args)
    }

    /// The points `p q r d1 d2 ..` of a coupled term.
    pub fn coupled_points(&self) -> Option<Vec<Point>> {
        if !self.is_coupled() {
            return None;
        }
        let mut out = Vec::with_capacity(self.args.len() + 3);
        for (k, a) in self.args.iter().enumerate() {
            let Arg::Cr(c) = a else { return None };
            if k == 0 {
                out.extend([c.a.clone(), c.b.clone(), c.c.clone()]);
            }
            out.push(c.d.clone());
        }
        Some(out)
    }

    /// Parses `I_{3,1}(abcde)`, `I_{3,2}(abce,acbd)`, `[abcde]_{3,1}` or
    /// `I_{3,1}(x a0 a6 a1 a4)`. `∞` or `inf` denotes infinity.
    pub fn parse(s: &str) -> Result<MplTerm> {
        let bad = || Error::Parse(format!("bad MPL term `{s}`"));
        let s = s.trim();
        let (indices, body) = if let Some(rest) = s.strip_prefix('[') {
            let (body, tail) = rest.split_once(']').ok_or_else(bad)?;
            let idx = tail.trim().strip_prefix('_').ok_or_else(bad)?;
            (idx, body)
        } else {
            let rest = s.strip_prefix("I_").ok_or_else(bad)?;
            let (idx, body) = rest.split_once('(').ok_or_else(bad)?;
            (idx, body.strip_suffix(')').ok_or_else(bad)?)
        };
        let idx = indices.trim().trim_start_matches('{').trim_end_matches('}');
        let indices = idx
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let groups: Vec<Vec<Point>> =
            body.split(',').map(parse_point_run).collect::<Result<Vec<_>>>()?;
        let args = if groups.len() == 1 && indices.len() + 3 == groups[0].len() {
            let g = &groups[0];
            g[3..]
                .iter()
                .map(|d| cross_ratio(&g[0], &g[1], &g[2], d).map(Arg::Cr))
                .collect::<Result<Vec<_>>>()?
        } else {
            groups
                .iter()
                .map(|g| {
                    if g.len() != 4 {
                        return Err(bad());
                    }
                    cross_ratio(&g[0], &g[1], &g[2], &g[3]).map(Arg::Cr)
                })
                .collect::<Result<Vec<_>>>()?
        };
        MplTerm::new(indices, args)
    }
}

/// Parses a signed sum such as `I_{3,1}(abcde) - 1/2 I_4(abcd) + 3 [abde]_4`.
/// Terms may not contain spaces.
pub fn parse_sum(s: &str) -> Result<MplExpr> {
    let mut out = MplExpr::new();
    let mut sign = Q::one();
    let mut coef: Option<Q> = None;
    for tok in s.split_whitespace() {
        match tok {
            "+" => {}
            "-" => sign = -sign,
            _ if tok.starts_with("I_") || tok.starts_with('[') => {
                let c = coef.take().unwrap_or_else(Q::one) * &sign;
                out.add_term(MplTerm::parse(tok)?, c);
                sign = Q::one();
            }
            _ => coef = Some(parse_q(tok)?),
        }
    }
    if coef.is_some() || sign != Q::one() {
        return Err(Error::Parse(format!("dangling coefficient in `{s}`")));
    }
    Ok(out)
}

fn parse_point_run(s: &str) -> Result<Vec<Point>> {
    let s = s.trim();
    if s.contains(' ') {
        return s.split_whitespace().map(Point::parse).collect();
    }
    s.chars()
        .map(|c| if c == '∞' { Ok(Point::Infinity) } else { Point::parse(&c.to_string()) })
        .collect()
}

impl fmt::Display for MplTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = if self.is_coupled() && self.args.len() > 0 {
            let r = self.coupled_render();
            let inner = r.trim_start_matches('[');
            inner.split_once(']').map(|(b, _)| b.to_string()).unwrap_or_default()
        } else {
            self.args.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
        };
        write!(f, "I_{{{}}}({})", self.index_string(), body)
    }
}

impl fmt::Debug for MplTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `[a0 | a1..an // x | a_{n+1}] = [0 | CR(x,a0,a_{n+1},a1), ... | 1]`, with
/// letters equal to `a0` absorbed into the indices.
pub fn to_mpl(t: &HTerm) -> Result<MplTerm> {
    if t.lower == t.upper || t.letters.iter().any(|p| *p == t.xslot) {
        return Err(Error::DegenerateTerm(format!("{t} vanishes")));
    }
    if t.letters.first() == Some(&t.lower) {
        return Err(Error::Divergent(t.to_string()));
    }
    let mut indices: Vec<u32> = Vec::new();
    let mut args = Vec::new();
    for p in &t.letters {
        if *p == t.lower {
            *indices.last_mut().expect("first letter differs from lower") += 1;
        } else {
            indices.push(1);
            args.push(Arg::Cr(cross_ratio(&t.xslot, &t.lower, &t.upper, p)?));
        }
    }
    MplTerm::new(indices, args)
}

pub fn hexpr_to_mpl(e: &HExpr) -> Result<MplExpr> {
    let mut out = MplExpr::new();
    for (t, c) in e.iter() {
        out.add_term(to_mpl(t)?, c.clone());
    }
    Ok(out)
}

/// The values `b_p` such that the term equals `I(b_0 | b_1..b_n | b_{n+1})`:
/// `b_p = 1/(p - x)`, with `b_inf = 0`; the identity when `x` is infinite.
pub fn h_to_i(t: &HTerm, value: &dyn Fn(&Point) -> Result<Q>) -> Result<Vec<Q>> {
    let pts = std::iter::once(&t.lower).chain(&t.letters).chain(std::iter::once(&t.upper));
    if t.xslot.is_infinity() {
        return pts
            .map(|p| {
                if p.is_infinity() {
                    Err(Error::Domain(format!("{t}: infinite point with infinite x-slot")))
                } else {
                    value(p)
                }
            })
            .collect();
    }
    let x = value(&t.xslot)?;
    pts.map(|p| {
        if p.is_infinity() {
            return Ok(Q::zero());
        }
        let d = value(p)? - &x;
        if d.is_zero() {
            return Err(Error::RedrawRequired(format!("{p} coincides with {}", t.xslot)));
        }
        Ok(d.recip())
    })
    .collect()
}

/// `Li_s(z1..zk) = (-1)^k I_s(1/(z1...zk), 1/(z2...zk), ..., 1/zk)`.
pub fn li_to_i(indices: &[u32], z: &[Arg]) -> Result<MplExpr> {
    let k = z.len();
    if k != indices.len() || k == 0 {
        return Err(Error::Precondition("index and argument counts differ".into()));
    }
    for a in z {
        if let Arg::Mono(m) = a {
            if m.is_zero() {
                return Err(Error::ZeroArgument(a.to_string()));
            }
        }
    }
    let args = if k == 1 {
        vec![z[0].inverse()?]
    } else {
        let mut out = Vec::with_capacity(k);
        let mut acc = DiffMonomial::one();
        for a in z.iter().rev() {
            let Arg::Mono(m) = a else {
                return Err(Error::Precondition("products of cross-ratios are not representable".into()));
            };
            acc = acc.mul(m);
            out.push(Arg::Mono(acc.inv()?));
        }
        out.reverse();
        out
    };
    let sign = if k % 2 == 0 { Q::one() } else { -Q::one() };
    Ok(MplExpr::from_term(MplTerm::new(indices.to_vec(), args)?, sign))
}

// JSON encoding

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ArgJson {
    Cr([String; 4]),
    Mono {
        #[serde(rename = "const")]
        constant: String,
        diffs: Vec<(String, String, i32)>,
    },
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    indices: Vec<u32>,
    args: Vec<ArgJson>,
}

#[derive(Serialize, Deserialize)]
pub struct CoeffTermJson {
    pub coef: String,
    #[serde(default)]
    pub li: bool,
    pub indices: Vec<u32>,
    pub args: Vec<serde_json::Value>,
}

fn arg_to_json(a: &Arg) -> ArgJson {
    match a {
        Arg::Cr(c) => ArgJson::Cr(c.points().map(|p| p.to_string())),
        Arg::Mono(m) => ArgJson::Mono {
            constant: fmt_q(&m.constant),
            // stored as (q, p, e) meaning (q - p)^e
            diffs: m.factors.iter().map(|((p, q), e)| (q.to_string(), p.to_string(), *e)).collect(),
        },
    }
}

fn arg_from_json(a: ArgJson) -> Result<Arg> {
    match a {
        ArgJson::Cr(pts) => {
            let p = pts.iter().map(|s| Point::parse(s)).collect::<Result<Vec<_>>>()?;
            Ok(Arg::Cr(cross_ratio(&p[0], &p[1], &p[2], &p[3])?))
        }
        ArgJson::Mono { constant, diffs } => {
            let mut m = DiffMonomial::constant(parse_q(&constant)?);
            for (p, q, e) in diffs {
                m.mul_diff(&Point::parse(&p)?, &Point::parse(&q)?, e);
            }
            Ok(Arg::Mono(m))
        }
    }
}

impl MplTerm {
    pub fn to_json(&self) -> serde_json::Value {
        let t = TermJson { indices: self.indices.clone(), args: self.args.iter().map(arg_to_json).collect() };
        serde_json::to_value(t).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<MplTerm> {
        let t: TermJson = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        MplTerm::new(t.indices, t.args.into_iter().map(arg_from_json).collect::<Result<Vec<_>>>()?)
    }
}

/// `[{"coef": "3/2", "indices": [...], "args": [...]}, ...]`; entries with
/// `"li": true` are `Li` terms and are converted to the `I` form.
pub fn expr_from_json(v: &serde_json::Value) -> Result<MplExpr> {
    let rows: Vec<CoeffTermJson> =
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
    let mut out = MplExpr::new();
    for row in rows {
        let c = parse_q(&row.coef)?;
        let term = MplTerm::from_json(&serde_json::json!({"indices": row.indices, "args": row.args}))?;
        if row.li {
            out.add_scaled(&li_to_i(&term.indices, &term.args)?, &c);
        } else {
            out.add_term(term, c);
        }
    }
    Ok(out)
}

pub fn expr_to_json(e: &MplExpr) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = e
        .iter()
        .map(|(t, c)| {
            let mut v = t.to_json();
            v.as_object_mut().expect("object").insert("coef".into(), fmt_q(c).into());
            v
        })
        .collect();
    serde_json::Value::Array(rows)
}

/// Coefficient-weighted text rendering, one term per line.
pub fn render_expr(e: &MplExpr, coupled: bool) -> String {
    let mut out = String::new();
    for (t, c) in e.iter() {
        let body = if coupled { t.coupled_render() } else { t.to_string() };
        out.push_str(&format!("{:>8} {}\n", fmt_q(c), body));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, q_frac};

    fn p(s: &str) -> Point {
        Point::parse(s).unwrap()
    }

    fn values<'a>(v: &'a [(&'a str, Q)]) -> impl Fn(&Point) -> Result<Q> + 'a {
        move |pt: &Point| match pt {
            Point::Zero => Ok(q(0)),
            Point::One => Ok(q(1)),
            Point::Var(n) => Ok(v.iter().find(|(k, _)| *k == &**n).expect("assigned").1.clone()),
            Point::Infinity => Err(Error::Domain("inf".into())),
        }
    }

    #[test]
    fn cross_ratio_values_and_limits() {
        let v = [("a", q(3)), ("b", q(5)), ("c", q(7)), ("d", q(11))];
        let f = values(&v);
        let cr = cross_ratio(&p("a"), &p("b"), &p("c"), &p("d")).unwrap();
        // ((3-7)/(3-11)) / ((5-7)/(5-11))
        assert_eq!(cr.eval(&f).unwrap(), q_frac(3, 2));
        let one_minus = q(1) - cr.eval(&f).unwrap();
        assert_eq!(cr.one_minus().eval(&f).unwrap(), one_minus);
        let inf = cross_ratio(&p("a"), &p("b"), &p("c"), &Point::Infinity).unwrap();
        assert_eq!(inf.eval(&f).unwrap(), q_frac(-4, -2));
        let a_inf = cross_ratio(&Point::Infinity, &p("b"), &p("c"), &p("d")).unwrap();
        assert_eq!(a_inf.eval(&f).unwrap(), q_frac(5 - 11, 5 - 7));
        for img in cr.images() {
            assert_eq!(img.eval(&f).unwrap(), q_frac(3, 2));
            assert_eq!(img.canonical(), cr.canonical());
        }
        assert!(cross_ratio(&p("a"), &p("a"), &p("c"), &p("d")).is_err());
        assert_eq!(cr.inverse().eval(&f).unwrap(), q_frac(2, 3));
    }

    #[test]
    fn conversion_absorbs_lower_letters() {
        let t = HTerm::parse("[a0|a1,a0,a0,a4//x|a5]").unwrap();
        let m = to_mpl(&t).unwrap();
        assert_eq!(m.indices, vec![3, 1]);
        assert_eq!(m.to_string(), "I_{3,1}(x a0 a5 a1 a4)");
        assert!(m.is_coupled());
        let all = to_mpl(&HTerm::generic(4)).unwrap();
        assert_eq!(all.indices, vec![1, 1, 1, 1]);
        assert!(to_mpl(&HTerm::parse("[a0|a0,a1//x|a5]").unwrap()).is_err());
    }

    #[test]
    fn rendering_and_parsing() {
        let m = MplTerm::parse("I_{3,1}(abcde)").unwrap();
        assert_eq!(m.coupled_render(), "[abcde]_{3,1}");
        assert_eq!(m.to_string(), "I_{3,1}(abcde)");
        assert_eq!(MplTerm::parse("[abcde]_{3,1}").unwrap(), m);
        let d1 = MplTerm::parse("I_{4}(ad∞c)").unwrap();
        assert_eq!(d1.coupled_render(), "[ad∞c]_{4}");
        let nc = MplTerm::parse("I_{3,2}(abcd,abef)").unwrap();
        assert!(!nc.is_coupled());
        assert_eq!(nc.coupled_render(), "I_{3,2}(abcd,abef)");
        let json = m.to_json();
        assert_eq!(json, serde_json::json!({"indices":[3,1],"args":[["a","b","c","d"],["a","b","c","e"]]}));
        assert_eq!(MplTerm::from_json(&json).unwrap(), m);
    }

    #[test]
    fn li_conversion() {
        let z = Arg::var("z");
        let e = li_to_i(&[5], &[z.clone()]).unwrap();
        let t = e.terms().next().unwrap().clone();
        assert_eq!(e.coeff(&t), q(-1));
        assert_eq!(t.args[0], z.inverse().unwrap());
        let w = Arg::var("w");
        let e2 = li_to_i(&[2, 3], &[z.clone(), w.clone()]).unwrap();
        let (t2, c2) = e2.iter().next().unwrap();
        assert_eq!(*c2, q(1));
        let zw = DiffMonomial::point(&p("z")).mul(&DiffMonomial::point(&p("w")));
        assert_eq!(t2.args[0], Arg::Mono(zw.inv().unwrap()));
        assert_eq!(t2.args[1], w.inverse().unwrap());
        // inverting back recovers the arguments
        assert_eq!(t2.args[1].inverse().unwrap(), w);
        let zero = Arg::Mono(DiffMonomial::constant(q(0)));
        assert!(li_to_i(&[5], &[zero]).is_err());
    }

    #[test]
    fn monomial_signs() {
        let x = p("x");
        let one_minus_x = DiffMonomial::diff(&Point::One, &x);
        let v = [("x", q_frac(2, 7))];
        assert_eq!(one_minus_x.eval(&values(&v)).unwrap(), q_frac(5, 7));
        let json = serde_json::to_value(arg_to_json(&Arg::Mono(one_minus_x.clone()))).unwrap();
        let back = arg_from_json(serde_json::from_value(json).unwrap()).unwrap();
        assert_eq!(back, Arg::Mono(one_minus_x));
    }

    #[test]
    fn b_values() {
        let t = HTerm::parse("[a|b,inf//x|c]").unwrap();
        let v = [("a", q(2)), ("b", q(3)), ("c", q(5)), ("x", q(7))];
        let b = h_to_i(&t, &values(&v)).unwrap();
        assert_eq!(b, vec![q_frac(-1, 5), q_frac(-1, 4), q(0), q_frac(-1, 2)]);
        let plain = HTerm::parse("[a|b|c]").unwrap();
        assert_eq!(h_to_i(&plain, &values(&v)).unwrap(), vec![q(2), q(3), q(5)]);
    }
}
