//! Generalized hyperlogarithm symbols `[a0 | a1,...,an // x | a_{n+1}]` and
//! the operators that rewrite them in fewer variables modulo products.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::One;

use crate::algebra::{permutation_sign, shuffle_list, LinComb, Q};
use crate::error::{Error, Result};

/// A point of the projective line: a named variable, `0`, `1` or infinity.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Point {
    Zero,
    One,
    Var(Arc<str>),
    Infinity,
}

impl Point {
    pub fn var(name: &str) -> Point {
        Point::Var(Arc::from(name))
    }

    pub fn parse(s: &str) -> Result<Point> {
        let s = s.trim();
        match s {
            "" => Err(Error::Parse("empty point".into())),
            "inf" | "∞" | "\\infty" | "oo" => Ok(Point::Infinity),
            "0" => Ok(Point::Zero),
            "1" => Ok(Point::One),
            _ if s.chars().all(|c| c.is_alphanumeric() || c == '_') => Ok(Point::var(s)),
            _ => Err(Error::Parse(format!("bad point `{s}`"))),
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    fn rank(&self) -> u8 {
        match self {
            Point::Zero => 0,
            Point::One => 1,
            Point::Var(_) => 2,
            Point::Infinity => 3,
        }
    }
}

/// Compares names so that `a2 < a10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut x, mut y) = (a.as_bytes(), b.as_bytes());
    loop {
        match (x.first(), y.first()) {
            (None, None) => return a.cmp(b),
            (None, _) => return Ordering::Less,
            (_, None) => return Ordering::Greater,
            (Some(c), Some(d)) if c.is_ascii_digit() && d.is_ascii_digit() => {
                let i = x.iter().take_while(|c| c.is_ascii_digit()).count();
                let j = y.iter().take_while(|c| c.is_ascii_digit()).count();
                let (nx, ny) = (&x[..i], &y[..j]);
                let tx = nx.iter().skip_while(|&&c| c == b'0').count();
                let ty = ny.iter().skip_while(|&&c| c == b'0').count();
                let ord = tx.cmp(&ty).then_with(|| nx[i - tx..].cmp(&ny[j - ty..]));
                if ord != Ordering::Equal {
                    return ord;
                }
                x = &x[i..];
                y = &y[j..];
            }
            (Some(c), Some(d)) => {
                if c != d {
                    return c.cmp(d);
                }
                x = &x[1..];
                y = &y[1..];
            }
        }
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Point::Var(a), Point::Var(b)) => natural_cmp(a, b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Zero => write!(f, "0"),
            Point::One => write!(f, "1"),
            Point::Var(n) => write!(f, "{n}"),
            Point::Infinity => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `[lower | letters // xslot | upper]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HTerm {
    pub lower: Point,
    pub letters: Vec<Point>,
    pub xslot: Point,
    pub upper: Point,
}

pub type HExpr = LinComb<HTerm>;

impl HTerm {
    pub fn new(lower: Point, letters: Vec<Point>, xslot: Point, upper: Point) -> HTerm {
        HTerm { lower, letters, xslot, upper }
    }

    /// `[a0 | a1,...,an // x | a_{n+1}]` on the named points `a0..a_{n+1}`, `x`.
    pub fn generic(n: usize) -> HTerm {
        HTerm {
            lower: Point::var("a0"),
            letters: (1..=n).map(|k| Point::var(&format!("a{k}"))).collect(),
            xslot: Point::var("x"),
            upper: Point::var(&format!("a{}", n + 1)),
        }
    }

    /// Parses `[a0 | a1,a2 // x | a3]`; `||` is accepted for `//` and an
    /// omitted slot means `inf`.
    pub fn parse(s: &str) -> Result<HTerm> {
        let bad = || Error::Parse(format!("bad hyperlog term `{s}`"));
        let body = s.trim().strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
        let body = body.replace("||", "//");
        let (lower, rest) = body.split_once('|').ok_or_else(bad)?;
        let (mid, upper) = rest.rsplit_once('|').ok_or_else(bad)?;
        let (letters, xslot) = match mid.split_once("//") {
            Some((l, x)) => (l, Point::parse(x)?),
            None => (mid, Point::Infinity),
        };
        let letters = letters.split(',').map(Point::parse).collect::<Result<Vec<_>>>()?;
        Ok(HTerm { lower: Point::parse(lower)?, letters, xslot, upper: Point::parse(upper)? })
    }

    pub fn weight(&self) -> usize {
        self.letters.len()
    }

    /// True if the term is zero for structural reasons: coinciding bounds or a
    /// letter equal to the x-slot.
    pub fn is_vanishing(&self) -> bool {
        self.lower == self.upper || self.letters.iter().any(|p| *p == self.xslot)
    }

    pub fn convergence_violation(&self) -> Option<String> {
        let n = self.letters.len();
        if n == 0 {
            return None;
        }
        if self.lower == self.letters[0] {
            Some(format!("{self}: lower bound equals first letter"))
        } else if self.letters[n - 1] == self.upper {
            Some(format!("{self}: last letter equals upper bound"))
        } else if self.lower == self.xslot {
            Some(format!("{self}: lower bound equals x-slot"))
        } else if self.xslot == self.upper {
            Some(format!("{self}: x-slot equals upper bound"))
        } else {
            None
        }
    }

    /// Distinct letters other than the lower bound: the number of
    /// cross-ratio variables the term depends on after conversion.
    pub fn variable_count(&self) -> usize {
        let mut seen: Vec<&Point> = Vec::new();
        for p in &self.letters {
            if *p != self.lower && !seen.contains(&p) {
                seen.push(p);
            }
        }
        seen.len()
    }

    /// Letters different from the lower bound, counted with multiplicity.
    pub fn depth(&self) -> usize {
        self.letters.iter().filter(|p| **p != self.lower).count()
    }

    /// The term with positions `i` and `j` (1-based) exchanged.
    pub fn swapped(&self, i: usize, j: usize) -> HTerm {
        let mut t = self.clone();
        t.letters.swap(i - 1, j - 1);
        t
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.letters.len() {
            Err(Error::IndexOutOfRange { index: i, len: self.letters.len() })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for HTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} | ", self.lower)?;
        for (k, p) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, " // {} | {}]", self.xslot, self.upper)
    }
}

impl fmt::Debug for HTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Zero for structurally vanishing terms, an error for divergent ones, and
/// the term itself otherwise.
pub fn normalize_hterm(t: &HTerm) -> Result<HExpr> {
    if t.is_vanishing() {
        return Ok(HExpr::new());
    }
    if let Some(msg) = t.convergence_violation() {
        return Err(Error::DegenerateTerm(msg));
    }
    Ok(HExpr::term(t.clone()))
}

fn push_normalized(out: &mut HExpr, t: HTerm, c: Q) -> Result<()> {
    if t.is_vanishing() {
        return Ok(());
    }
    if let Some(msg) = t.convergence_violation() {
        return Err(Error::DegenerateTerm(msg));
    }
    out.add_term(t, c);
    Ok(())
}

/// Replaces the letters at the given 1-based positions by `y`.
pub fn substitute_x(t: &HTerm, positions: &[usize], y: &Point) -> Result<HTerm> {
    let mut out = t.clone();
    for &p in positions {
        t.check_index(p)?;
        out.letters[p - 1] = y.clone();
    }
    Ok(out)
}

/// Replaces the letters at the positions `set` by the letter at position `i`.
pub fn operator_a(t: &HTerm, i: usize, set: &[usize]) -> Result<HTerm> {
    t.check_index(i)?;
    if !set.contains(&i) {
        return Err(Error::Precondition(format!("position {i} not in {set:?}")));
    }
    let y = t.letters[i - 1].clone();
    substitute_x(t, set, &y)
}

/// Subsets of `1..=n` containing `i` with at least two elements, in
/// increasing size and then lexicographic order.
pub fn b_subsets(n: usize, i: usize) -> Vec<Vec<usize>> {
    let others: Vec<usize> = (1..=n).filter(|&k| k != i).collect();
    let mut out = Vec::new();
    for size in 1..=others.len() {
        for combo in combinations(&others, size) {
            let mut set = combo;
            set.push(i);
            set.sort_unstable();
            out.push(set);
        }
    }
    out
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (idx, &x) in items.iter().enumerate() {
        for mut rest in combinations(&items[idx + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

/// `B(t, i) = Σ (-1)^|I| A(t, i, I)` over `I ∋ i` with `|I| ≥ 2`.
pub fn operator_b(t: &HTerm, i: usize) -> Result<HExpr> {
    t.check_index(i)?;
    let mut out = HExpr::new();
    for set in b_subsets(t.letters.len(), i) {
        let sign = if set.len() % 2 == 0 { Q::one() } else { -Q::one() };
        push_normalized(&mut out, operator_a(t, i, &set)?, sign)?;
    }
    Ok(out)
}

/// Moves a leading run `y^s` behind the first other letter, modulo products:
/// `[a0 | y^s, b, w // x | c] = (-1)^s [a0 | b, (y^s ⧢ w) // x | c]`.
pub fn shuffle_out_front(t: &HTerm, y: &Point) -> Result<HExpr> {
    let s = t.letters.iter().take_while(|p| *p == y).count();
    let n = t.letters.len();
    if s == n {
        return Err(Error::NotReducible(t.to_string()));
    }
    let mut out = HExpr::new();
    if s == 0 {
        push_normalized(&mut out, t.clone(), Q::one())?;
        return Ok(out);
    }
    let sign = if s % 2 == 0 { Q::one() } else { -Q::one() };
    let head = t.letters[s].clone();
    let run = vec![y.clone(); s];
    for tail in shuffle_list(&run, &t.letters[s + 1..]) {
        let mut letters = Vec::with_capacity(n);
        letters.push(head.clone());
        letters.extend(tail);
        let term = HTerm { letters, ..t.clone() };
        push_normalized(&mut out, term, sign.clone())?;
    }
    Ok(out)
}

/// `[a0 | w // x | a_{n+1}] = [c | w // x | a_{n+1}] - [c | w // x | a0]`
/// modulo products.
pub fn split_basepoint(t: &HTerm, c: &Point) -> Result<HExpr> {
    if t.letters.first() == Some(c) || *c == t.xslot {
        return Err(Error::DegenerateSplit(format!("cannot split {t} at {c}")));
    }
    let mut out = HExpr::new();
    let up = HTerm { lower: c.clone(), ..t.clone() };
    let down = HTerm { lower: c.clone(), upper: t.lower.clone(), ..t.clone() };
    push_normalized(&mut out, up, Q::one())?;
    push_normalized(&mut out, down, -Q::one())?;
    Ok(out)
}

/// `B(t, i)` with every term shuffled out by `a_i` and split at `a_i`;
/// pure powers of `a_i` are products and are dropped.
pub fn operator_d(t: &HTerm, i: usize) -> Result<HExpr> {
    t.check_index(i)?;
    let y = t.letters[i - 1].clone();
    let b = operator_b(t, i)?;
    let mut out = HExpr::new();
    for (term, c) in b.iter() {
        if term.letters.iter().all(|p| *p == y) {
            continue;
        }
        let shuffled = shuffle_out_front(term, &y)?;
        for (s, sc) in shuffled.iter() {
            out.add_scaled(&split_basepoint(s, &y)?, &(c * sc));
        }
    }
    Ok(out)
}

/// The three-`D` expression for `t + swap_{ij}(t)` in at most `n - 2`
/// variables.
pub fn transposition_reduce(t: &HTerm, i: usize, j: usize) -> Result<HExpr> {
    if i == j {
        return Err(Error::Precondition(format!("transposition needs i != j, got {i}")));
    }
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    t.check_index(i)?;
    t.check_index(j)?;
    let ai = t.letters[i - 1].clone();
    let aj = t.letters[j - 1].clone();
    let x = t.xslot.clone();

    let mut second = t.clone();
    second.letters[i - 1] = x.clone();
    second.xslot = ai.clone();

    let mut third = t.clone();
    third.letters[i - 1] = x;
    third.letters[j - 1] = ai;
    third.xslot = aj;

    let mut out = operator_d(t, i)?;
    out.sub_assign(&operator_d(&second, j)?);
    out.add_assign(&operator_d(&third, i)?);
    Ok(out)
}

/// `σ·t - sgn(σ) t` in at most `n - 2` variables, where `σ·t` has the letter
/// `a_{σ(k)}` at position `k`. Built by a chain of transpositions.
pub fn permutation_reduce(t: &HTerm, sigma: &[usize]) -> Result<HExpr> {
    let n = t.letters.len();
    if sigma.len() != n {
        return Err(Error::Precondition(format!("permutation {sigma:?} does not act on {n} letters")));
    }
    permutation_sign(sigma)?;
    // labels[k] = index of the original letter now sitting at position k
    let mut labels: Vec<usize> = (1..=n).collect();
    let mut current = t.clone();
    let mut steps: Vec<HExpr> = Vec::new();
    for p in 1..=n {
        let want = sigma[p - 1];
        if labels[p - 1] == want {
            continue;
        }
        let q = (p + 1..=n).find(|&q| labels[q - 1] == want).expect("bijection");
        steps.push(transposition_reduce(&current, p, q)?);
        labels.swap(p - 1, q - 1);
        current = current.swapped(p, q);
    }
    // t_m = T_m - t_{m-1}, so σ·t - (-1)^k t = Σ_m (-1)^(k-m) T_m
    let k = steps.len();
    let mut out = HExpr::new();
    for (m, step) in steps.iter().enumerate() {
        let sign = if (k - (m + 1)) % 2 == 0 { Q::one() } else { -Q::one() };
        out.add_scaled(step, &sign);
    }
    Ok(out)
}

/// Letters of `t` rearranged so that position `k` holds `a_{σ(k)}`.
pub fn permuted(t: &HTerm, sigma: &[usize]) -> HTerm {
    HTerm { letters: sigma.iter().map(|&s| t.letters[s - 1].clone()).collect(), ..t.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{binomial, q};

    fn h(s: &str) -> HTerm {
        HTerm::parse(s).unwrap()
    }

    #[test]
    fn parse_and_render() {
        let t = h("[a0 | a1,a2 // x | a3]");
        assert_eq!(t.to_string(), "[a0 | a1,a2 // x | a3]");
        assert_eq!(h("[a|b,c|d]").xslot, Point::Infinity);
    }

    #[test]
    fn natural_order() {
        assert!(Point::var("a2") < Point::var("a10"));
        assert!(Point::var("a") < Point::var("b"));
        assert!(Point::var("z") < Point::Infinity);
        assert!(Point::Zero < Point::var("a"));
    }

    #[test]
    fn normalization() {
        assert!(normalize_hterm(&h("[a0 | a1,a2 // x | a0]")).unwrap().is_empty());
        assert!(normalize_hterm(&h("[a0 | a1,x // x | a5]")).unwrap().is_empty());
        let t = h("[a0 | a1,a2 // x | a3]");
        assert_eq!(normalize_hterm(&t).unwrap(), HExpr::term(t.clone()));
        assert!(normalize_hterm(&h("[a0 | a0,a2 // x | a3]")).is_err());
        // idempotent
        let once = normalize_hterm(&t).unwrap();
        let twice = once.try_flat_map(normalize_hterm).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn x_operator_examples() {
        let t = h("[a0|a1,a2,a3,a4//x|a5]");
        let y = Point::var("y");
        assert_eq!(substitute_x(&t, &[1, 3], &y).unwrap(), h("[a0|y,a2,y,a4//x|a5]"));
        assert_eq!(substitute_x(&t, &[], &y).unwrap(), t);
        let t7 = HTerm::generic(6);
        assert_eq!(
            substitute_x(&t7, &[3, 4, 5, 6], &y).unwrap(),
            h("[a0|a1,a2,y,y,y,y//x|a7]")
        );
        assert!(substitute_x(&t, &[5], &y).is_err());
    }

    #[test]
    fn a_operator_examples() {
        let t = h("[a0|a1,a2,a3,a4//x|a5]");
        assert_eq!(operator_a(&t, 3, &[1, 3]).unwrap(), h("[a0|a3,a2,a3,a4//x|a5]"));
        assert_eq!(operator_a(&t, 2, &[2]).unwrap(), t);
        assert_eq!(
            operator_a(&HTerm::generic(6), 4, &[3, 4, 5, 6]).unwrap(),
            h("[a0|a1,a2,a4,a4,a4,a4//x|a7]")
        );
        assert!(operator_a(&t, 2, &[1, 3]).is_err());
    }

    #[test]
    fn b_operator_example() {
        let b = operator_b(&HTerm::generic(3), 2).unwrap();
        let mut want = HExpr::new();
        want.add_term(h("[a0|a2,a2,a3//x|a4]"), q(1));
        want.add_term(h("[a0|a1,a2,a2//x|a4]"), q(1));
        want.add_term(h("[a0|a2,a2,a2//x|a4]"), q(-1));
        assert_eq!(b, want);
        assert!(operator_b(&HTerm::generic(1), 1).unwrap().is_empty());
        assert_eq!(b_subsets(4, 2).len(), 7);
        for n in 1..=7 {
            let count: usize = (2..=n).map(|k| binomial(n - 1, k - 1)).sum();
            assert_eq!(b_subsets(n, 1).len(), count);
        }
    }

    #[test]
    fn shuffle_out_examples() {
        let t = h("[a0|a2,a2,a3,a4,a5//x|a6]");
        let out = shuffle_out_front(&t, &Point::var("a2")).unwrap();
        assert_eq!(out.len(), 6);
        assert!(out.terms().all(|s| s.letters[0] == Point::var("a3")));
        assert_eq!(out.coeff(&h("[a0|a3,a2,a2,a4,a5//x|a6]")), q(1));
        let y = Point::var("y");
        let small = shuffle_out_front(&h("[a0|y,b//x|c]"), &y).unwrap();
        assert_eq!(small, HExpr::from_term(h("[a0|b,y//x|c]"), q(-1)));
        let s0 = h("[a0|b,y//x|c]");
        assert_eq!(shuffle_out_front(&s0, &y).unwrap(), HExpr::term(s0.clone()));
        assert!(shuffle_out_front(&h("[a0|y,y//x|c]"), &y).is_err());
    }

    #[test]
    fn split_examples() {
        let t = h("[a0|a3,a2,a2,a4,a5//x|a6]");
        let out = split_basepoint(&t, &Point::var("a2")).unwrap();
        let mut want = HExpr::new();
        want.add_term(h("[a2|a3,a2,a2,a4,a5//x|a6]"), q(1));
        want.add_term(h("[a2|a3,a2,a2,a4,a5//x|a0]"), q(-1));
        assert_eq!(out, want);
        let same = split_basepoint(&t, &Point::var("a0")).unwrap();
        assert_eq!(same, HExpr::term(t.clone()));
        assert!(split_basepoint(&t, &Point::var("a3")).is_err());
        assert!(split_basepoint(&t, &Point::var("x")).is_err());
    }

    #[test]
    fn d_operator_psi_display() {
        let d = operator_d(&HTerm::generic(4), 2).unwrap();
        // D = ψ(a0) - ψ(a5)
        let psi = |c: &str| {
            let rows: [(&str, i64); 8] = [
                ("a1,a2,a2,a2", 1),
                ("a1,a2,a2,a4", -1),
                ("a1,a2,a3,a2", -1),
                ("a3,a2,a2,a2", 3),
                ("a3,a2,a2,a4", -1),
                ("a3,a2,a4,a2", -1),
                ("a3,a4,a2,a2", -1),
                ("a4,a2,a2,a2", -1),
            ];
            rows.iter()
                .map(|(w, k)| (h(&format!("[a2|{w}//x|{c}]")), q(*k)))
                .collect::<HExpr>()
        };
        assert_eq!(d, &psi("a0") - &psi("a5"));
        assert!(operator_d(&HTerm::generic(1), 1).unwrap().is_empty());
    }

    #[test]
    fn transposition_arguments() {
        // the second and third D arguments for n = 4, (i, j) = (2, 3)
        let t = HTerm::generic(4);
        let direct = &(&operator_d(&t, 2).unwrap()
            - &operator_d(&h("[a0|a1,x,a3,a4//a2|a5]"), 3).unwrap())
            + &operator_d(&h("[a0|a1,x,a2,a4//a3|a5]"), 2).unwrap();
        assert_eq!(transposition_reduce(&t, 2, 3).unwrap(), direct);
        assert!(transposition_reduce(&t, 2, 2).is_err());
    }

    #[test]
    fn variable_bound() {
        for n in 3..=5 {
            let t = HTerm::generic(n);
            for i in 1..=n {
                for term in operator_d(&t, i).unwrap().terms() {
                    assert!(term.variable_count() <= n - 2, "{term}");
                    assert!(term.depth() <= n - 2, "{term}");
                }
            }
        }
    }

    #[test]
    fn identity_permutation_is_zero() {
        let t = HTerm::generic(4);
        assert!(permutation_reduce(&t, &[1, 2, 3, 4]).unwrap().is_empty());
        assert_eq!(
            permutation_reduce(&t, &[1, 3, 2, 4]).unwrap(),
            transposition_reduce(&t, 2, 3).unwrap()
        );
    }
}
