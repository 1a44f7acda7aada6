//! Exact symbol comparison at rational specializations.
//!
//! Every term is turned into an iterated integral over rational points. Its
//! letters are factored exactly and rewritten over a basis of the group they
//! span, chosen greedily with the specialized point differences first so that
//! most letters have only a handful of coordinates. The tensor is expanded in
//! these coordinates and projected with `Π_w` (or the cobracket), and the
//! result is tested for zero exactly.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rustc_hash::{FxHashMap, FxHashSet as HashSet};
use serde::Serialize;

use crate::algebra::{fmt_q, LinComb, Q};
use crate::error::{Error, Result};
use crate::hyperlog::{HExpr, HTerm, Point};
use crate::mpl::{h_to_i, Arg, DiffMonomial, MplExpr, MplTerm};
use crate::symbolic::factor::{abs_q, ExpVec, Factorizer};
use crate::symbolic::lie;
use crate::symbolic::tensor::{iterint_words, Atom, Step, Tensor};

/// A combination of hyperlog terms and multiple polylogarithms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Expr {
    pub h: HExpr,
    pub m: MplExpr,
}

impl Expr {
    pub fn is_empty(&self) -> bool {
        self.h.is_empty() && self.m.is_empty()
    }

    pub fn scaled(&self, c: &Q) -> Expr {
        Expr { h: self.h.scaled(c), m: self.m.scaled(c) }
    }

    pub fn len(&self) -> usize {
        self.h.len() + self.m.len()
    }

    /// Every variable name occurring in the expression, sorted.
    pub fn variables(&self) -> Vec<Point> {
        let mut set = BTreeSet::new();
        for t in self.h.terms() {
            for p in std::iter::once(&t.lower).chain(&t.letters).chain([&t.xslot, &t.upper]) {
                if matches!(p, Point::Var(_)) {
                    set.insert(p.clone());
                }
            }
        }
        for t in self.m.terms() {
            set.extend(t.variables());
        }
        set.into_iter().collect()
    }
}

impl From<HExpr> for Expr {
    fn from(h: HExpr) -> Expr {
        Expr { h, m: MplExpr::new() }
    }
}

impl From<MplExpr> for Expr {
    fn from(m: MplExpr) -> Expr {
        Expr { h: HExpr::new(), m }
    }
}

impl From<HTerm> for Expr {
    fn from(t: HTerm) -> Expr {
        Expr::from(HExpr::term(t))
    }
}

impl From<MplTerm> for Expr {
    fn from(t: MplTerm) -> Expr {
        Expr::from(MplExpr::term(t))
    }
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, o: &Expr) -> Expr {
        Expr { h: &self.h + &o.h, m: &self.m + &o.m }
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, o: &Expr) -> Expr {
        Expr { h: &self.h - &o.h, m: &self.m - &o.m }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Level {
    #[serde(rename = "sh")]
    Sh,
    #[serde(rename = "delta")]
    Delta,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Sh => "sh",
            Level::Delta => "delta",
        })
    }
}

impl FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Level> {
        match s {
            "sh" | "mod_sh" => Ok(Level::Sh),
            "delta" | "mod_delta" => Ok(Level::Delta),
            _ => Err(Error::Parse(format!("unknown level `{s}`"))),
        }
    }
}

/// Rational values for the variables. Values are distinct and avoid 0 and 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Specialization {
    pub values: BTreeMap<Point, Q>,
}

pub const VALUE_RANGE: std::ops::RangeInclusive<i64> = 2..=97;

impl Specialization {
    pub fn new(values: BTreeMap<Point, Q>) -> Result<Specialization> {
        let mut seen: Vec<&Q> = Vec::new();
        for (p, v) in &values {
            if !matches!(p, Point::Var(_)) {
                return Err(Error::Precondition(format!("cannot assign a value to {p}")));
            }
            if v.is_zero() || v.is_one() || seen.contains(&v) {
                return Err(Error::RedrawRequired(format!("value {v} for {p}")));
            }
            seen.push(v);
        }
        Ok(Specialization { values })
    }

    /// Distinct `p/q` with `p != q` drawn from [`VALUE_RANGE`].
    pub fn draw(vars: &[Point], rng: &mut impl Rng) -> Specialization {
        loop {
            let mut values = BTreeMap::new();
            for v in vars {
                let (a, b) = loop {
                    let a = rng.gen_range(VALUE_RANGE);
                    let b = rng.gen_range(VALUE_RANGE);
                    if a != b {
                        break (a, b);
                    }
                };
                values.insert(v.clone(), Q::new(a.into(), b.into()));
            }
            if let Ok(s) = Specialization::new(values) {
                return s;
            }
        }
    }

    pub fn value(&self, p: &Point) -> Result<Q> {
        match p {
            Point::Zero => Ok(Q::zero()),
            Point::One => Ok(Q::one()),
            Point::Var(_) => self
                .values
                .get(p)
                .cloned()
                .ok_or_else(|| Error::Precondition(format!("no value for {p}"))),
            Point::Infinity => Err(Error::Domain("infinity has no finite value".into())),
        }
    }

    pub fn to_strings(&self) -> BTreeMap<String, String> {
        self.values.iter().map(|(p, v)| (p.to_string(), fmt_q(v))).collect()
    }
}

/// The value sequence of the iterated integral behind an MPL.
fn mpl_points(t: &MplTerm, s: &Specialization) -> Result<Vec<Q>> {
    let value = |p: &Point| s.value(p);
    let mut monos: Vec<DiffMonomial> = Vec::with_capacity(t.args.len());
    let mut vals: Vec<Q> = Vec::with_capacity(t.args.len());
    for a in &t.args {
        let m = a.monomial();
        if m.is_zero() {
            return Err(Error::ZeroArgument(t.to_string()));
        }
        let v = m.eval(&value)?;
        let formal_one = m == DiffMonomial::one();
        if v.is_one() && !formal_one {
            return Err(Error::RedrawRequired(format!("argument {a} of {t} specializes to 1")));
        }
        for (m2, v2) in monos.iter().zip(&vals) {
            if *v2 == v && *m2 != m {
                return Err(Error::RedrawRequired(format!("two arguments of {t} coincide")));
            }
        }
        monos.push(m);
        vals.push(v);
    }
    let mut pts = Vec::with_capacity(t.weight() as usize + 2);
    pts.push(Q::zero());
    for (s_k, v) in t.indices.iter().zip(vals) {
        pts.push(v);
        for _ in 1..*s_k {
            pts.push(Q::zero());
        }
    }
    pts.push(Q::one());
    Ok(pts)
}

/// Formal point differences the expression's letters are built from.
fn formal_differences(e: &Expr) -> BTreeSet<(Point, Point)> {
    let mut out = BTreeSet::new();
    for t in e.h.terms() {
        let mut pts: Vec<&Point> = std::iter::once(&t.lower)
            .chain(&t.letters)
            .chain([&t.upper, &t.xslot])
            .filter(|p| !p.is_infinity())
            .collect();
        pts.sort();
        pts.dedup();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                // 1 - 0 is not a variable quantity
                if !matches!(pts[i], Point::Var(_)) && !matches!(pts[j], Point::Var(_)) {
                    continue;
                }
                out.insert((pts[i].clone(), pts[j].clone()));
            }
        }
    }
    for t in e.m.terms() {
        for a in &t.args {
            out.extend(a.monomial().factors.keys().cloned());
        }
        // the letters of monomial arguments also involve 1 - x and x - y
        let mut pts: Vec<Point> = t.variables().into_iter().filter(|p| matches!(p, Point::Var(_))).collect();
        if t.args.iter().any(|a| matches!(a, Arg::Mono(_))) {
            pts.extend([Point::Zero, Point::One]);
        }
        pts.sort();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if matches!(pts[i], Point::Var(_)) || matches!(pts[j], Point::Var(_)) {
                    out.insert((pts[i].clone(), pts[j].clone()));
                }
            }
        }
    }
    out
}

/// Whether the absolute values generate a free abelian group of rank
/// `values.len()`.
pub fn multiplicatively_independent(values: &[Q]) -> bool {
    if values.iter().any(|v| v.is_zero()) {
        return false;
    }
    let abs: Vec<Q> = values.iter().map(abs_q).collect();
    let factorizer = Factorizer::new(abs.iter());
    let mut basis = Basis::default();
    abs.iter().all(|v| basis.insert(factorizer.factor(v).expect("registered")).is_some())
}

/// Summary of one exact check.
#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckStats {
    /// Nonzero entries left after the projection.
    pub residue: usize,
    pub letters: usize,
    pub basis: usize,
    pub entries: usize,
}

struct Prepared {
    weight: usize,
    /// letter-level tensor: packed letter ids → integer coefficient
    tensor: FxHashMap<u128, i128>,
    coords: Vec<Vec<(u16, i64)>>,
    basis: usize,
    letter_count: usize,
    letter_vectors: Vec<ExpVec>,
    factorizer: Factorizer,
}

const SLOT_BITS: u32 = 15;
const SLOT_MASK: u128 = (1 << SLOT_BITS) - 1;
const MAX_WEIGHT: usize = 8;

fn slot(key: u128, k: usize) -> usize {
    ((key >> (SLOT_BITS * k as u32)) & SLOT_MASK) as usize
}

fn lcm_denominators<'a>(coefs: impl Iterator<Item = &'a Q>) -> BigInt {
    coefs.fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
}

/// Symbol letters of every term, interned, plus the exact letter basis.
fn prepare(e: &Expr, s: &Specialization) -> Result<Prepared> {
    let mut iterints: Vec<(&Q, Vec<Q>)> = Vec::with_capacity(e.len());
    for (t, c) in e.h.iter() {
        iterints.push((c, h_to_i(t, &|p| s.value(p))?));
    }
    for (t, c) in e.m.iter() {
        iterints.push((c, mpl_points(t, s)?));
    }
    let mut weight = None;
    for (_, pts) in &iterints {
        let w = pts.len() - 2;
        match weight {
            None => weight = Some(w),
            Some(v) if v != w => return Err(Error::MixedWeights(v, w)),
            _ => {}
        }
    }
    let weight = weight.unwrap_or(0);
    if weight > MAX_WEIGHT {
        return Err(Error::Precondition(format!("weight {weight} above {MAX_WEIGHT}")));
    }

    // independence of the specialized point differences
    let diffs = formal_differences(e);
    let mut diff_values = Vec::with_capacity(diffs.len());
    for (p, q) in &diffs {
        let v = s.value(q)? - s.value(p)?;
        if v.is_zero() {
            return Err(Error::RedrawRequired(format!("{q} - {p} vanishes")));
        }
        diff_values.push(abs_q(&v));
    }

    let scale = lcm_denominators(iterints.iter().map(|(c, _)| *c));
    let words = iterint_words(weight);
    let mut letter_ids: HashMap<Q, u32> = HashMap::new();
    let mut letter_parts: Vec<(Q, Q)> = Vec::new();
    let mut tensor: FxHashMap<u128, i128> = FxHashMap::default();
    for (c, pts) in &iterints {
        let coef = (*c * Q::from_integer(scale.clone())).to_integer();
        let coef = coef
            .to_i128()
            .ok_or_else(|| Error::Precondition("coefficient too large".into()))?;
        let mut step_letter: HashMap<Step, Option<u32>> = HashMap::new();
        'words: for word in words.iter() {
            let mut key: u128 = 0;
            for (k, st) in word.iter().enumerate() {
                let id = *step_letter.entry(*st).or_insert_with(|| {
                    let (i, nx, pv) = (st.0 as usize, st.1 as usize, st.2 as usize);
                    let num = &pts[i] - &pts[nx];
                    let den = &pts[i] - &pts[pv];
                    let num = if num.is_zero() { Q::one() } else { abs_q(&num) };
                    let den = if den.is_zero() { Q::one() } else { abs_q(&den) };
                    let v = &num / &den;
                    if v.is_one() {
                        return None;
                    }
                    let next = letter_ids.len() as u32;
                    Some(*letter_ids.entry(v).or_insert_with(|| {
                        letter_parts.push((num, den));
                        next
                    }))
                });
                let Some(id) = id else { continue 'words };
                key |= (id as u128) << (SLOT_BITS * k as u32);
            }
            let slot = tensor.entry(key).or_insert(0);
            *slot = slot.checked_add(coef).ok_or_else(|| Error::Precondition("coefficient overflow".into()))?;
        }
    }
    tensor.retain(|_, c| *c != 0);
    if letter_parts.len() as u128 > SLOT_MASK {
        return Err(Error::Precondition(format!("{} distinct letters", letter_parts.len())));
    }

    let factorizer =
        Factorizer::new(diff_values.iter().chain(letter_parts.iter().flat_map(|(a, b)| [a, b])));
    let fac = |v: &Q| factorizer.factor(v).cloned().expect("registered");
    let diff_vectors: Vec<ExpVec> = diff_values.iter().map(fac).collect();
    let letter_vectors: Vec<ExpVec> =
        letter_parts.iter().map(|(a, b)| sub_vec(&fac(a), &fac(b))).collect();

    let mut basis = Basis::default();
    for v in &diff_vectors {
        if basis.insert(v).is_none() {
            return Err(Error::RedrawRequired("specialized point differences are dependent".into()));
        }
    }
    // remaining letters, fewest atoms first
    let mut order: Vec<usize> = (0..letter_vectors.len()).collect();
    order.sort_by_key(|&i| (letter_vectors[i].len(), i));
    for &i in &order {
        basis.insert(&letter_vectors[i]);
    }
    let mut rat_coords = Vec::with_capacity(letter_vectors.len());
    let mut den = BigInt::one();
    for v in &letter_vectors {
        let c = basis.coordinates(v).expect("letter lies in its own span");
        for (_, q) in &c {
            den = den.lcm(q.denom());
        }
        rat_coords.push(c);
    }
    if basis.size() as u128 > SLOT_MASK {
        return Err(Error::Precondition(format!("basis of {} letters", basis.size())));
    }
    let coords = rat_coords
        .into_iter()
        .map(|c| {
            c.into_iter()
                .map(|(b, q)| {
                    let v = (q * Q::from_integer(den.clone())).to_integer();
                    Ok((b as u16, v.to_i64().ok_or_else(|| Error::Precondition("coordinate overflow".into()))?))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Prepared {
        weight,
        tensor,
        coords,
        basis: basis.size(),
        letter_count: letter_parts.len(),
        letter_vectors,
        factorizer,
    })
}

fn sub_vec(a: &ExpVec, b: &ExpVec) -> ExpVec {
    let mut m: BTreeMap<u32, i64> = a.iter().cloned().collect();
    for (i, e) in b {
        *m.entry(*i).or_insert(0) -= e;
    }
    m.into_iter().filter(|(_, e)| *e != 0).collect()
}

/// Greedy basis of a Q-span of integer vectors, kept in reduced row echelon
/// form so that one pass over the pivots reduces a vector.
#[derive(Default)]
struct Basis {
    // (row, row as a combination of basis ids)
    rows: Vec<(BTreeMap<u32, Q>, BTreeMap<usize, Q>)>,
    pivots: HashMap<u32, usize>,
    count: usize,
}

fn axpy<K: Ord + Copy>(acc: &mut BTreeMap<K, Q>, f: &Q, v: &BTreeMap<K, Q>) {
    for (i, x) in v {
        let slot = acc.entry(*i).or_insert_with(Q::zero);
        *slot += f * x;
        if slot.is_zero() {
            acc.remove(i);
        }
    }
}

impl Basis {
    fn size(&self) -> usize {
        self.count
    }

    fn reduce(&self, v: &ExpVec) -> (BTreeMap<u32, Q>, BTreeMap<usize, Q>) {
        let mut cur: BTreeMap<u32, Q> = v.iter().map(|(i, e)| (*i, Q::from_integer((*e).into()))).collect();
        let mut used: BTreeMap<usize, Q> = BTreeMap::new();
        let hits: Vec<(u32, usize)> =
            v.iter().filter_map(|(a, _)| self.pivots.get(a).map(|&r| (*a, r))).collect();
        for (a, r) in hits {
            let (row, expr) = &self.rows[r];
            let f = &cur[&a] / &row[&a];
            axpy(&mut cur, &-f.clone(), row);
            axpy(&mut used, &f, expr);
        }
        (cur, used)
    }

    /// Adds `v` if independent and returns its basis id.
    fn insert(&mut self, v: &ExpVec) -> Option<usize> {
        let (rest, used) = self.reduce(v);
        let (&piv, _) = rest.iter().next()?;
        let id = self.count;
        self.count += 1;
        // rest = v - Σ used_b b
        let mut expr: BTreeMap<usize, Q> = used.into_iter().map(|(b, x)| (b, -x)).collect();
        expr.insert(id, Q::one());
        for (row, rexpr) in &mut self.rows {
            if let Some(x) = row.get(&piv) {
                let f = -(x / &rest[&piv]);
                axpy(row, &f, &rest);
                axpy(rexpr, &f, &expr);
            }
        }
        self.pivots.insert(piv, self.rows.len());
        self.rows.push((rest, expr));
        Some(id)
    }

    fn coordinates(&self, v: &ExpVec) -> Option<Vec<(usize, Q)>> {
        let (rest, used) = self.reduce(v);
        rest.is_empty().then(|| used.into_iter().collect())
    }
}

trait Coef: Clone + Zero {
    fn from_i128(v: i128) -> Self;
    fn mul_i64(&self, k: i64) -> Option<Self>;
    fn add_to(&mut self, v: &Self) -> Option<()>;
}

impl Coef for i128 {
    fn from_i128(v: i128) -> Self {
        v
    }
    fn mul_i64(&self, k: i64) -> Option<Self> {
        self.checked_mul(k as i128)
    }
    fn add_to(&mut self, v: &Self) -> Option<()> {
        *self = self.checked_add(*v)?;
        Some(())
    }
}

impl Coef for BigInt {
    fn from_i128(v: i128) -> Self {
        BigInt::from(v)
    }
    fn mul_i64(&self, k: i64) -> Option<Self> {
        Some(self * k)
    }
    fn add_to(&mut self, v: &Self) -> Option<()> {
        *self += v;
        Some(())
    }
}

fn pack(word: &[usize]) -> u128 {
    pack_with(word.iter().copied())
}

fn pack_with(word: impl Iterator<Item = usize>) -> u128 {
    word.enumerate().fold(0, |acc, (k, b)| acc | (b as u128) << (SLOT_BITS * k as u32))
}

/// Rewrites the letters into basis coordinates one slot at a time, merging
/// after each slot.
fn expand<C: Coef>(p: &Prepared) -> Option<FxHashMap<u128, C>> {
    let mut cur: FxHashMap<u128, C> = p.tensor.iter().map(|(k, c)| (*k, C::from_i128(*c))).collect();
    for k in 0..p.weight {
        let shift = SLOT_BITS * k as u32;
        let mut next: FxHashMap<u128, C> = FxHashMap::default();
        next.reserve(cur.len() * 2);
        for (key, c) in &cur {
            let rest = key & !(SLOT_MASK << shift);
            for &(b, x) in &p.coords[slot(*key, k)] {
                next.entry(rest | (b as u128) << shift).or_insert_with(C::zero).add_to(&c.mul_i64(x)?)?;
            }
        }
        next.retain(|_, c| !c.is_zero());
        cur = next;
    }
    Some(cur)
}

/// Number of nonzero test pairings; `None` on coefficient overflow.
fn residue<C: Coef>(p: &Prepared, level: Level) -> Option<usize> {
    let w = p.weight;
    let expanded = expand::<C>(p)?;
    let mut total = 0;
    let mut done: HashSet<u128> = HashSet::default();
    let mut tests: HashMap<Vec<u8>, std::sync::Arc<Vec<lie::Poly>>> = HashMap::new();
    for key in expanded.keys() {
        let word: Vec<usize> = (0..w).map(|k| slot(*key, k)).collect();
        let mut sorted = word.clone();
        sorted.sort_unstable();
        if !done.insert(pack(&sorted)) {
            continue;
        }
        let (letters, ranks) = lie::shape(&word);
        let polys = tests.entry(ranks).or_insert_with_key(|r| lie::tests_for(r, level == Level::Delta));
        for poly in polys.iter() {
            let mut acc = C::zero();
            for (rw, c) in poly {
                let k = pack_with(rw.iter().map(|&r| letters[r as usize]));
                if let Some(x) = expanded.get(&k) {
                    acc.add_to(&x.mul_i64(*c)?)?;
                }
            }
            if !acc.is_zero() {
                total += 1;
            }
        }
    }
    Some(total)
}

/// Exact zero test of `Π_w` (or the cobracket) of the expression's symbol at
/// one specialization.
pub fn check_at(e: &Expr, s: &Specialization, level: Level) -> Result<CheckStats> {
    let p = prepare(e, s)?;
    if level == Level::Delta && p.weight < 2 && !p.tensor.is_empty() {
        return Err(Error::WeightTooSmall(p.weight));
    }
    let residue = match residue::<i128>(&p, level) {
        Some(r) => r,
        None => residue::<BigInt>(&p, level).expect("big integers do not overflow"),
    };
    Ok(CheckStats { residue, letters: p.letter_count, basis: p.basis, entries: p.tensor.len() })
}

/// The symbol at a specialization as a tensor over pairwise coprime integer
/// atoms (primes below the trial bound, coprime cofactors above).
pub fn specialize(e: &Expr, s: &Specialization) -> Result<Tensor> {
    let p = prepare(e, s)?;
    let mut out = Tensor::new();
    for (&key, &c) in &p.tensor {
        let letters: Vec<crate::symbolic::tensor::Letter> = (0..p.weight)
            .map(|k| {
                let mut l = crate::symbolic::tensor::Letter::unit();
                for (a, x) in &p.letter_vectors[slot(key, k)] {
                    l.add_atom(Atom::Prime(p.factorizer.atom_value(*a)), *x);
                }
                l
            })
            .collect();
        out.add_assign(&crate::symbolic::tensor::tensor_of_letters(&letters, &Q::from_integer(c.into())));
    }
    // undo the integer scaling of the coefficients
    let scale = lcm_denominators(e.h.iter().map(|(_, c)| c).chain(e.m.iter().map(|(_, c)| c)));
    Ok(out.scaled(&Q::new(BigInt::one(), scale)))
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub pass: bool,
    pub residue: usize,
    pub redraws: usize,
    pub values: BTreeMap<String, String>,
    pub letters: usize,
    pub basis: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub level: Level,
    pub trials: usize,
    pub seed: u64,
    pub pass: bool,
    pub results: Vec<TrialReport>,
}

impl Verdict {
    pub fn first_failure(&self) -> Option<&TrialReport> {
        self.results.iter().find(|r| !r.pass)
    }
}

pub const MAX_REDRAWS: usize = 200;

pub const DEFAULT_SEED: u64 = 42;

/// Checks `e1 ≡ e2` at `trials` independent specializations. Trial `k` draws
/// from stream `k` of a ChaCha generator seeded by `seed`.
pub fn verify(name: &str, e1: &Expr, e2: &Expr, level: Level, trials: usize, seed: u64) -> Result<Verdict> {
    let diff = e1 - e2;
    let vars = diff.variables();
    let mut results = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64 + 1);
        let mut redraws = 0;
        let (s, stats) = loop {
            let s = Specialization::draw(&vars, &mut rng);
            match check_at(&diff, &s, level) {
                Ok(stats) => break (s, stats),
                Err(Error::RedrawRequired(msg)) => {
                    redraws += 1;
                    if redraws > MAX_REDRAWS {
                        return Err(Error::RedrawRequired(format!("{name}: {msg}")));
                    }
                }
                Err(e) => return Err(e),
            }
        };
        results.push(TrialReport {
            trial,
            pass: stats.residue == 0,
            residue: stats.residue,
            redraws,
            values: s.to_strings(),
            letters: stats.letters,
            basis: stats.basis,
        });
    }
    Ok(Verdict {
        name: name.to_string(),
        level,
        trials,
        seed,
        pass: results.iter().all(|r| r.pass),
        results,
    })
}

pub fn equals_mod_sh(e1: &Expr, e2: &Expr, trials: usize, seed: u64) -> Result<Verdict> {
    verify("mod_sh", e1, e2, Level::Sh, trials, seed)
}

pub fn equals_mod_delta(e1: &Expr, e2: &Expr, trials: usize, seed: u64) -> Result<Verdict> {
    verify("mod_delta", e1, e2, Level::Delta, trials, seed)
}

/// Expression from a linear combination, for convenience in tests.
pub fn mpl_expr(terms: &[(&str, i64)]) -> Result<MplExpr> {
    let mut out = LinComb::new();
    for (t, c) in terms {
        out.add_term(MplTerm::parse(t)?, Q::from_integer((*c).into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpl::{li_to_i, Arg};
    use crate::reduction::{reduce, Scheme};
    use crate::symbolic::tensor::pi_project;

    fn x() -> Point {
        Point::var("x")
    }

    fn mono(m: DiffMonomial) -> Arg {
        Arg::Mono(m)
    }

    fn li(s: u32, a: DiffMonomial) -> Expr {
        Expr::from(li_to_i(&[s], &[mono(a)]).unwrap())
    }

    fn inv_x() -> DiffMonomial {
        DiffMonomial::point(&x()).inv().unwrap()
    }

    #[test]
    fn dilog_inversion() {
        let e = &li(2, DiffMonomial::point(&x())) + &li(2, inv_x());
        let v = equals_mod_sh(&e, &Expr::default(), 3, 7).unwrap();
        assert!(v.pass, "{v:?}");
        let v = equals_mod_sh(&li(2, DiffMonomial::point(&x())), &Expr::default(), 2, 7).unwrap();
        assert!(!v.pass);
        assert!(v.results.iter().all(|r| r.residue > 0));
    }

    #[test]
    fn trilog_three_terms() {
        let one_minus = DiffMonomial::diff(&Point::One, &x());
        let third = DiffMonomial::diff(&x(), &Point::One).mul(&inv_x());
        let e = &(&li(3, DiffMonomial::point(&x())) + &li(3, one_minus)) + &li(3, third);
        assert!(equals_mod_sh(&e, &Expr::default(), 3, 11).unwrap().pass);
    }

    #[test]
    fn classical_polylogs_vanish_mod_delta_only() {
        let e = li(4, DiffMonomial::point(&x()));
        assert!(equals_mod_delta(&e, &Expr::default(), 2, 3).unwrap().pass);
        assert!(!equals_mod_sh(&e, &Expr::default(), 2, 3).unwrap().pass);
    }

    #[test]
    fn reductions_hold_mod_products() {
        for n in 3..=5 {
            let t = HTerm::generic(n);
            for scheme in [Scheme::Efficient, Scheme::Naive] {
                let r = Expr::from(reduce(&t, scheme).unwrap());
                let v = equals_mod_sh(&Expr::from(t.clone()), &r, 2, 1).unwrap();
                assert!(v.pass, "n={n} {scheme:?}: {v:?}");
            }
        }
        // dropping one term breaks it
        let t = HTerm::generic(4);
        let r = reduce(&t, Scheme::Efficient).unwrap();
        let (first, c) = r.iter().next().map(|(t, c)| (t.clone(), c.clone())).unwrap();
        let mut broken = r.clone();
        broken.add_term(first, -c);
        assert!(!equals_mod_sh(&Expr::from(t), &Expr::from(broken), 1, 1).unwrap().pass);
    }

    #[test]
    fn verdicts_are_reproducible() {
        let e = li(2, DiffMonomial::point(&x()));
        let a = equals_mod_sh(&e, &Expr::default(), 3, 42).unwrap();
        let b = equals_mod_sh(&e, &Expr::default(), 3, 42).unwrap();
        let va: Vec<_> = a.results.iter().map(|r| r.values.clone()).collect();
        let vb: Vec<_> = b.results.iter().map(|r| r.values.clone()).collect();
        assert_eq!(va, vb);
        assert_ne!(va[0], va[1]);
    }

    #[test]
    fn specialized_tensor_agrees_with_check() {
        let e = &li(2, DiffMonomial::point(&x())) + &li(2, inv_x());
        let s = Specialization::new([(x(), Q::new(5.into(), 3.into()))].into_iter().collect()).unwrap();
        assert!(pi_project(&specialize(&e, &s).unwrap()).unwrap().is_empty());
        let t = specialize(&li(2, DiffMonomial::point(&x())), &s).unwrap();
        assert!(!pi_project(&t).unwrap().is_empty());
        assert_eq!(check_at(&li(2, DiffMonomial::point(&x())), &s, Level::Sh).unwrap().residue > 0, true);
    }

    #[test]
    fn specializations_avoid_degenerate_values() {
        let s = Specialization::new([(x(), Q::one())].into_iter().collect());
        assert!(matches!(s, Err(Error::RedrawRequired(_))));
    }
}
