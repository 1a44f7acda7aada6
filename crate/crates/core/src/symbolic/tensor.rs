//! Formal symbols: tensors of multiplicative letters, the `Π_w` projectors,
//! the cobracket and the coproduct of iterated integrals.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::algebra::{LinComb, Q};
use crate::error::{Error, Result};
use crate::hyperlog::{HExpr, HTerm, Point};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// `q - p` for points `p < q`, up to sign.
    Diff(Point, Point),
    Prime(BigUint),
    Token(String),
}

impl Atom {
    /// The difference of two finite distinct points; `None` otherwise.
    pub fn diff(p: &Point, q: &Point) -> Option<Atom> {
        if p == q || p.is_infinity() || q.is_infinity() {
            return None;
        }
        // 1 - 0 is a unit
        if matches!((p, q), (Point::Zero, Point::One) | (Point::One, Point::Zero)) {
            return None;
        }
        Some(if p < q { Atom::Diff(p.clone(), q.clone()) } else { Atom::Diff(q.clone(), p.clone()) })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Diff(Point::Zero, q) => write!(f, "{q}"),
            Atom::Diff(p, q) => write!(f, "({q}-{p})"),
            Atom::Prime(p) => write!(f, "{p}"),
            Atom::Token(t) => write!(f, "{t}"),
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A multiplicative letter `Π atom^e`; signs are torsion and are not kept.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Letter(pub BTreeMap<Atom, i64>);

impl Letter {
    pub fn unit() -> Letter {
        Letter::default()
    }

    pub fn atom(a: Atom) -> Letter {
        let mut l = Letter::unit();
        l.0.insert(a, 1);
        l
    }

    pub fn add_atom(&mut self, a: Atom, e: i64) {
        let slot = self.0.entry(a.clone()).or_insert(0);
        *slot += e;
        if *slot == 0 {
            self.0.remove(&a);
        }
    }

    pub fn mul(&self, other: &Letter) -> Letter {
        let mut out = self.clone();
        for (a, e) in &other.0 {
            out.add_atom(a.clone(), *e);
        }
        out
    }

    pub fn div(&self, other: &Letter) -> Letter {
        let mut out = self.clone();
        for (a, e) in &other.0 {
            out.add_atom(a.clone(), -*e);
        }
        out
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }
}

pub type Tensor = LinComb<Vec<Atom>>;

/// Multilinear expansion of `c · l_1 ⊗ ... ⊗ l_w` into atom tuples.
pub fn tensor_of_letters(letters: &[Letter], c: &Q) -> Tensor {
    let mut out = Tensor::new();
    let mut word = Vec::with_capacity(letters.len());
    fn rec(letters: &[Letter], c: Q, word: &mut Vec<Atom>, out: &mut Tensor) {
        match letters.split_first() {
            None => out.add_term(word.clone(), c),
            Some((l, rest)) => {
                for (a, e) in &l.0 {
                    word.push(a.clone());
                    rec(rest, &c * Q::from_integer((*e).into()), word, out);
                    word.pop();
                }
            }
        }
    }
    rec(letters, c.clone(), &mut word, &mut out);
    out
}

/// The common tuple length of a tensor, `None` for the zero tensor.
pub fn tensor_weight(t: &Tensor) -> Result<Option<usize>> {
    let mut w = None;
    for word in t.terms() {
        match w {
            None => w = Some(word.len()),
            Some(v) if v != word.len() => return Err(Error::MixedWeights(v, word.len())),
            _ => {}
        }
    }
    Ok(w)
}

/// `(i, next, prev)` positions in the point sequence `b_0..b_{n+1}`: removing
/// `b_i` between neighbours `b_prev`, `b_next` contributes the letter
/// `(b_i - b_next) / (b_i - b_prev)`.
pub type Step = (u8, u8, u8);

/// All removal orders of `n` interior points, each giving one tensor word
/// whose `k`-th entry is the `k`-th last removal.
pub fn iterint_words(n: usize) -> std::sync::Arc<Vec<Vec<Step>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, std::sync::Arc<Vec<Vec<Step>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(w) = cache.lock().expect("cache").get(&n) {
        return w.clone();
    }
    assert!(n < 250, "weight too large");
    let mut memo: HashMap<u64, Vec<Vec<Step>>> = HashMap::new();
    fn rec(mask: u64, n: usize, memo: &mut HashMap<u64, Vec<Vec<Step>>>) -> Vec<Vec<Step>> {
        if mask == 0 {
            return vec![vec![]];
        }
        if let Some(v) = memo.get(&mask) {
            return v.clone();
        }
        let present: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        let mut out = Vec::new();
        for (pos, &k) in present.iter().enumerate() {
            let prev = if pos == 0 { 0 } else { present[pos - 1] + 1 };
            let next = if pos + 1 == present.len() { n + 1 } else { present[pos + 1] + 1 };
            for mut w in rec(mask & !(1 << k), n, memo) {
                w.push(((k + 1) as u8, next as u8, prev as u8));
                out.push(w);
            }
        }
        memo.insert(mask, out.clone());
        out
    }
    let words = std::sync::Arc::new(rec((1u64 << n) - 1, n, &mut memo));
    cache.lock().expect("cache").insert(n, words.clone());
    words
}

/// Symbol of `I(b_0 | b_1..b_n | b_{n+1})` given the letter of each
/// difference `b_i - b_j` (`None` when the difference vanishes).
pub fn symbol_with(n: usize, diff: &dyn Fn(usize, usize) -> Option<Letter>) -> Tensor {
    let mut letters: HashMap<Step, Letter> = HashMap::new();
    let mut out = Tensor::new();
    for word in iterint_words(n).iter() {
        let mut ls = Vec::with_capacity(n);
        for &s in word {
            let l = letters.entry(s).or_insert_with(|| {
                let (i, nx, pv) = (s.0 as usize, s.1 as usize, s.2 as usize);
                let num = diff(i, nx).unwrap_or_default();
                let den = diff(i, pv).unwrap_or_default();
                num.div(&den)
            });
            if l.is_unit() {
                ls.clear();
                break;
            }
            ls.push(l.clone());
        }
        if ls.len() == n {
            out.add_assign(&tensor_of_letters(&ls, &Q::one()));
        }
    }
    out
}

/// Symbol of the classical iterated integral `I(lower | letters | upper)` on
/// formal points.
pub fn symbol_of_iterint(lower: &Point, letters: &[Point], upper: &Point) -> Tensor {
    let pts: Vec<&Point> = std::iter::once(lower).chain(letters).chain(std::iter::once(upper)).collect();
    symbol_with(letters.len(), &|i, j| Atom::diff(pts[i], pts[j]).map(Letter::atom).or_else(|| {
        (pts[i] != pts[j]).then(Letter::unit)
    }))
}

/// Letter of `b_p - b_q` with `b_p = 1/(p - x)`:
/// `(q - p) / ((p - x)(q - x))`. `None` if `p = q`.
pub fn hyperlog_diff(p: &Point, q: &Point, x: &Point) -> Option<Letter> {
    if p == q {
        return None;
    }
    let mut l = Letter::unit();
    if let Some(a) = Atom::diff(p, q) {
        l.add_atom(a, 1);
    }
    if !x.is_infinity() {
        for r in [p, q] {
            if let Some(a) = Atom::diff(r, x) {
                l.add_atom(a, -1);
            }
        }
    }
    Some(l)
}

/// Symbol of a generalized hyperlog on formal points.
pub fn symbol_of_hterm(t: &HTerm) -> Tensor {
    let pts: Vec<&Point> =
        std::iter::once(&t.lower).chain(&t.letters).chain(std::iter::once(&t.upper)).collect();
    symbol_with(t.letters.len(), &|i, j| hyperlog_diff(pts[i], pts[j], &t.xslot))
}

pub fn symbol_of_hexpr(e: &HExpr) -> Tensor {
    let mut out = Tensor::new();
    for (t, c) in e.iter() {
        out.add_scaled(&symbol_of_hterm(t), c);
    }
    out
}

/// `w Π_w` as signed permutations of positions: entry `(perm, c)` stands
/// for `c · a_{perm[0]} ⊗ ... ⊗ a_{perm[w-1]}`.
pub fn scaled_pi_perms(w: usize) -> std::sync::Arc<Vec<(Vec<u8>, i64)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, std::sync::Arc<Vec<(Vec<u8>, i64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().expect("cache").get(&w) {
        return p.clone();
    }
    // P_w(s) = P_{w-1}(s[..w-1]) ⊗ s[w-1] - P_{w-1}(s[1..]) ⊗ s[0]
    fn rec(s: &[u8]) -> LinComb<Vec<u8>> {
        if s.len() <= 1 {
            return LinComb::term(s.to_vec());
        }
        let w = s.len();
        let mut out = LinComb::new();
        for (mut word, c) in rec(&s[..w - 1]) {
            word.push(s[w - 1]);
            out.add_term(word, c);
        }
        for (mut word, c) in rec(&s[1..]) {
            word.push(s[0]);
            out.add_term(word, -c);
        }
        out
    }
    let idx: Vec<u8> = (0..w as u8).collect();
    let perms: Vec<(Vec<u8>, i64)> = rec(&idx)
        .into_iter()
        .map(|(p, c)| (p, i64::try_from(c.to_integer()).expect("small coefficient")))
        .collect();
    let perms = std::sync::Arc::new(perms);
    cache.lock().expect("cache").insert(w, perms.clone());
    perms
}

fn apply_pi<T: Clone>(word: &[T], scale: &Q) -> Vec<(Vec<T>, Q)> {
    let w = word.len();
    scaled_pi_perms(w)
        .iter()
        .map(|(perm, c)| {
            (perm.iter().map(|&k| word[k as usize].clone()).collect(), scale * Q::from_integer((*c).into()))
        })
        .collect()
}

/// `Π_w`, applied to every tuple; it kills shuffle products.
pub fn pi_project(t: &Tensor) -> Result<Tensor> {
    let Some(w) = tensor_weight(t)? else { return Ok(Tensor::new()) };
    let inv_w = Q::new(1.into(), (w as i64).into());
    let mut out = Tensor::new();
    for (word, c) in t.iter() {
        for (p, pc) in apply_pi(word, &(c * &inv_w)) {
            out.add_term(p, pc);
        }
    }
    Ok(out)
}

/// An element of `⊕ L_k ⊗ L_{w-k}` (`k ≤ w - k`), as pairs of tuples.
pub type Wedge = LinComb<(Vec<Atom>, Vec<Atom>)>;

/// `Σ_{k=2}^{w-2} Π_k(a_1..a_k) ∧ Π_{w-k}(a_{k+1}..a_w)`, with `x ∧ y`
/// written as `x ⊗ y` for the shorter factor first (`x ⊗ y - y ⊗ x` when both
/// have the same weight).
pub fn delta_cobracket(t: &Tensor) -> Result<Wedge> {
    let Some(w) = tensor_weight(t)? else { return Ok(Wedge::new()) };
    if w < 2 {
        return Err(Error::WeightTooSmall(w));
    }
    let mut out = Wedge::new();
    for (word, c) in t.iter() {
        for k in 2..=w.saturating_sub(2) {
            let (pre, suf) = word.split_at(k);
            add_wedge(&mut out, pre, suf, c);
        }
    }
    Ok(out)
}

fn add_wedge(out: &mut Wedge, x: &[Atom], y: &[Atom], c: &Q) {
    let sx = Q::new(1.into(), (x.len() as i64).into());
    let sy = Q::new(1.into(), (y.len() as i64).into());
    for (px, cx) in apply_pi(x, &sx) {
        for (py, cy) in apply_pi(y, &sy) {
            let coef = c * &cx * &cy;
            if x.len() < y.len() {
                out.add_term((px.clone(), py), coef);
            } else if x.len() > y.len() {
                out.add_term((py, px.clone()), -coef);
            } else {
                out.add_term((px.clone(), py.clone()), coef.clone());
                out.add_term((py, px.clone()), -coef);
            }
        }
    }
}

/// `Π(x) ∧ Π(y)` for homogeneous tensors `x`, `y`, in the layout of
/// [`delta_cobracket`].
pub fn wedge(x: &Tensor, y: &Tensor) -> Wedge {
    let mut out = Wedge::new();
    for (wx, cx) in x.iter() {
        for (wy, cy) in y.iter() {
            add_wedge(&mut out, wx, wy, &(cx * cy));
        }
    }
    out
}

/// A classical iterated integral `I(lower | letters | upper)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct IterInt {
    pub lower: Point,
    pub letters: Vec<Point>,
    pub upper: Point,
}

impl IterInt {
    pub fn weight(&self) -> usize {
        self.letters.len()
    }

    pub fn symbol(&self) -> Tensor {
        symbol_of_iterint(&self.lower, &self.letters, &self.upper)
    }
}

impl fmt::Display for IterInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l: Vec<String> = self.letters.iter().map(|p| p.to_string()).collect();
        write!(f, "I({} | {} | {})", self.lower, l.join(","), self.upper)
    }
}

/// One summand `left ⊗ Π right` of the coproduct.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoproductTerm {
    pub left: IterInt,
    pub right: Vec<IterInt>,
}

/// `Δ I(a_0 | a_1..a_n | a_{n+1}) = Σ I(a_0 | a_{i_1}..a_{i_k} | a_{n+1}) ⊗
/// Π_p I(a_{i_p} | a_{i_p+1}..a_{i_{p+1}-1} | a_{i_{p+1}})` over
/// `0 = i_0 < i_1 < ... < i_k < i_{k+1} = n+1`. The x-slot must be infinite.
pub fn goncharov_coproduct(t: &HTerm) -> Result<Vec<CoproductTerm>> {
    if !t.xslot.is_infinity() {
        return Err(Error::Precondition(format!("{t}: coproduct needs an infinite x-slot")));
    }
    let n = t.letters.len();
    let pts: Vec<&Point> =
        std::iter::once(&t.lower).chain(&t.letters).chain(std::iter::once(&t.upper)).collect();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u64..(1u64 << n) {
        let mut cuts = vec![0usize];
        cuts.extend((1..=n).filter(|i| mask >> (i - 1) & 1 == 1));
        cuts.push(n + 1);
        let left = IterInt {
            lower: t.lower.clone(),
            letters: cuts[1..cuts.len() - 1].iter().map(|&i| pts[i].clone()).collect(),
            upper: t.upper.clone(),
        };
        let right = cuts
            .windows(2)
            .filter(|w| w[1] > w[0] + 1)
            .map(|w| IterInt {
                lower: pts[w[0]].clone(),
                letters: (w[0] + 1..w[1]).map(|i| pts[i].clone()).collect(),
                upper: pts[w[1]].clone(),
            })
            .collect();
        out.push(CoproductTerm { left, right });
    }
    Ok(out)
}

/// Shuffle product of two tensors.
pub fn shuffle_tensors(x: &Tensor, y: &Tensor) -> Tensor {
    let mut out = Tensor::new();
    for (u, cu) in x.iter() {
        for (v, cv) in y.iter() {
            let c = cu * cv;
            for (w, k) in crate::algebra::shuffle_words(u, v) {
                out.add_term(w, &c * k);
            }
        }
    }
    out
}

pub fn is_zero_wedge(w: &Wedge) -> bool {
    w.iter().all(|(_, c)| c.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q;

    fn p(s: &str) -> Point {
        Point::parse(s).unwrap()
    }

    fn d(a: &str, b: &str) -> Atom {
        Atom::diff(&p(a), &p(b)).unwrap()
    }

    #[test]
    fn weight_one_symbol_is_log_ratio() {
        let s = symbol_of_iterint(&p("a"), &[p("z")], &p("b"));
        let mut want = Tensor::new();
        want.add_term(vec![d("z", "b")], q(1));
        want.add_term(vec![d("z", "a")], q(-1));
        assert_eq!(s, want);
    }

    #[test]
    fn dilog_like_example() {
        // S(I(0; x, 0; 1)) = -(x-1) ⊗ x + x ⊗ x
        let s = symbol_of_iterint(&Point::Zero, &[p("x"), Point::Zero], &Point::One);
        let mut want = Tensor::new();
        want.add_term(vec![d("x", "1"), d("x", "0")], q(-1));
        want.add_term(vec![d("x", "0"), d("x", "0")], q(1));
        assert_eq!(s, want);
    }

    #[test]
    fn pi_examples() {
        let (a, b) = (Atom::Token("a".into()), Atom::Token("b".into()));
        let t = Tensor::term(vec![a.clone(), b.clone()]);
        let mut want = Tensor::new();
        want.add_term(vec![a.clone(), b.clone()], crate::algebra::q_frac(1, 2));
        want.add_term(vec![b.clone(), a.clone()], crate::algebra::q_frac(-1, 2));
        assert_eq!(pi_project(&t).unwrap(), want);
        let sym = &t + &Tensor::term(vec![b.clone(), a.clone()]);
        assert!(pi_project(&sym).unwrap().is_empty());
        for w in 2..=6 {
            assert!(pi_project(&Tensor::term(vec![a.clone(); w])).unwrap().is_empty());
        }
        let mixed = &t + &Tensor::term(vec![a.clone()]);
        assert!(matches!(pi_project(&mixed), Err(Error::MixedWeights(_, _))));
    }

    #[test]
    fn pi_is_idempotent() {
        let word: Vec<Atom> = ["a", "b", "c", "a"].iter().map(|s| Atom::Token(s.to_string())).collect();
        let once = pi_project(&Tensor::term(word)).unwrap();
        assert_eq!(pi_project(&once).unwrap(), once);
    }

    #[test]
    fn weight_four_cobracket_shape() {
        let word: Vec<Atom> = ["a", "b", "c", "d"].iter().map(|s| Atom::Token(s.to_string())).collect();
        let w = delta_cobracket(&Tensor::term(word)).unwrap();
        // Π2(ab) ∧ Π2(cd) has 8 entries
        assert_eq!(w.len(), 8);
        for ((x, y), _) in w.iter() {
            assert_eq!(x.len(), 2);
            assert_eq!(y.len(), 2);
        }
        assert_eq!(delta_cobracket(&Tensor::term(vec![Atom::Token("a".into())])), Err(Error::WeightTooSmall(1)));
    }

    #[test]
    fn cobracket_kills_classical_polylogs() {
        for n in 2..=5 {
            let mut letters = vec![p("x")];
            letters.extend(std::iter::repeat(Point::Zero).take(n - 1));
            let s = symbol_of_iterint(&Point::Zero, &letters, &Point::One);
            assert!(!s.is_empty());
            assert!(is_zero_wedge(&delta_cobracket(&s).unwrap()), "n = {n}");
        }
    }

    #[test]
    fn symbol_of_product_is_shuffle() {
        let a = symbol_of_iterint(&p("a"), &[p("b"), p("c")], &p("d"));
        let b = symbol_of_iterint(&p("e"), &[p("f"), p("g")], &p("h"));
        let prod = shuffle_tensors(&a, &b);
        assert!(!prod.is_empty());
        assert!(pi_project(&prod).unwrap().is_empty());
    }

    #[test]
    fn coproduct_strata() {
        let t = HTerm::parse("[a0|a1|a2]").unwrap();
        let cop = goncharov_coproduct(&t).unwrap();
        assert_eq!(cop.len(), 2);
        assert!(cop.iter().any(|c| c.left.weight() == 0 && c.right.len() == 1));
        assert!(cop.iter().any(|c| c.left.weight() == 1 && c.right.is_empty()));
    }

    #[test]
    fn coproduct_cut_segments() {
        let t = HTerm::generic(8);
        let t = HTerm { xslot: Point::Infinity, ..t };
        let cop = goncharov_coproduct(&t).unwrap();
        let term = cop
            .iter()
            .find(|c| c.left.letters == vec![p("a1"), p("a3"), p("a6")])
            .unwrap();
        let rendered: Vec<String> = term.right.iter().map(|r| r.to_string()).collect();
        assert_eq!(rendered, vec!["I(a1 | a2 | a3)", "I(a3 | a4,a5 | a6)", "I(a6 | a7,a8 | a9)"]);
    }

    // The maximal iteration of Δ_{n-1,1} rebuilds the symbol.
    fn symbol_by_coproduct(i: &IterInt) -> Tensor {
        if i.weight() == 0 {
            return Tensor::term(vec![]);
        }
        let t = HTerm::new(i.lower.clone(), i.letters.clone(), Point::Infinity, i.upper.clone());
        let mut out = Tensor::new();
        for term in goncharov_coproduct(&t).unwrap() {
            if term.left.weight() + 1 != i.weight() {
                continue;
            }
            let right = &term.right[0];
            let last = symbol_of_iterint(&right.lower, &right.letters, &right.upper);
            for (u, cu) in symbol_by_coproduct(&term.left).iter() {
                for (v, cv) in last.iter() {
                    let mut w = u.clone();
                    w.extend(v.iter().cloned());
                    out.add_term(w, cu * cv);
                }
            }
        }
        out
    }

    #[test]
    fn coproduct_iteration_matches_recursion() {
        let cases = [
            ("a", vec!["b", "c", "d"], "e"),
            ("0", vec!["x", "0", "y"], "1"),
            ("a", vec!["b", "b", "c"], "d"),
            ("a", vec!["b", "a"], "c"),
        ];
        for (lo, ls, up) in cases {
            let i = IterInt { lower: p(lo), letters: ls.iter().map(|s| p(s)).collect(), upper: p(up) };
            assert_eq!(symbol_by_coproduct(&i), i.symbol(), "{i}");
        }
    }

    #[test]
    fn hyperlog_at_infinity_is_classical() {
        let t = HTerm::parse("[a|b,c,d|e]").unwrap();
        let i = symbol_of_iterint(&p("a"), &[p("b"), p("c"), p("d")], &p("e"));
        assert_eq!(symbol_of_hterm(&t), i);
    }
}
