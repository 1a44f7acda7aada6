//! Exact rational linear combinations, words, shuffle products and shuffle
//! permutations.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3"`, `"-1/3"` or `"103/54"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn fmt_q(c: &Q) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// A formal sum of terms with nonzero rational coefficients, kept in the
/// canonical order of `T`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LinComb<T: Ord> {
    terms: BTreeMap<T, Q>,
}

impl<T: Ord> Default for LinComb<T> {
    fn default() -> Self {
        LinComb { terms: BTreeMap::new() }
    }
}

impl<T: Ord + Clone> LinComb<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(t: T) -> Self {
        Self::from_term(t, Q::one())
    }

    pub fn from_term(t: T, c: Q) -> Self {
        let mut lc = Self::new();
        lc.add_term(t, c);
        lc
    }

    pub fn add_term(&mut self, t: T, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(t) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &LinComb<T>, c: &Q) {
        if c.is_zero() {
            return;
        }
        for (t, v) in &other.terms {
            self.add_term(t.clone(), v * c);
        }
    }

    pub fn add_assign(&mut self, other: &LinComb<T>) {
        self.add_scaled(other, &Q::one());
    }

    pub fn sub_assign(&mut self, other: &LinComb<T>) {
        self.add_scaled(other, &-Q::one());
    }

    pub fn scaled(&self, c: &Q) -> Self {
        let mut out = Self::new();
        out.add_scaled(self, c);
        out
    }

    pub fn neg(&self) -> Self {
        self.scaled(&-Q::one())
    }

    pub fn coeff(&self, t: &T) -> Q {
        self.terms.get(t).cloned().unwrap_or_else(Q::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &Q)> {
        self.terms.iter()
    }

    pub fn terms(&self) -> impl Iterator<Item = &T> {
        self.terms.keys()
    }

    /// Applies a linear map given on basis terms.
    pub fn flat_map<U: Ord + Clone, F>(&self, mut f: F) -> LinComb<U>
    where
        F: FnMut(&T) -> LinComb<U>,
    {
        let mut out = LinComb::new();
        for (t, c) in &self.terms {
            out.add_scaled(&f(t), c);
        }
        out
    }

    pub fn try_flat_map<U: Ord + Clone, F>(&self, mut f: F) -> Result<LinComb<U>>
    where
        F: FnMut(&T) -> Result<LinComb<U>>,
    {
        let mut out = LinComb::new();
        for (t, c) in &self.terms {
            out.add_scaled(&f(t)?, c);
        }
        Ok(out)
    }

    pub fn map_terms<U: Ord + Clone, F>(&self, mut f: F) -> LinComb<U>
    where
        F: FnMut(&T) -> U,
    {
        let mut out = LinComb::new();
        for (t, c) in &self.terms {
            out.add_term(f(t), c.clone());
        }
        out
    }

    pub fn filter<F: FnMut(&T) -> bool>(&self, mut keep: F) -> Self {
        let mut out = Self::new();
        for (t, c) in &self.terms {
            if keep(t) {
                out.add_term(t.clone(), c.clone());
            }
        }
        out
    }
}

impl<T: Ord + Clone> std::ops::Add for &LinComb<T> {
    type Output = LinComb<T>;
    fn add(self, rhs: Self) -> LinComb<T> {
        let mut out = self.clone();
        out.add_assign(rhs);
        out
    }
}

impl<T: Ord + Clone> std::ops::Sub for &LinComb<T> {
    type Output = LinComb<T>;
    fn sub(self, rhs: Self) -> LinComb<T> {
        let mut out = self.clone();
        out.sub_assign(rhs);
        out
    }
}

impl<T: Ord + Clone> FromIterator<(T, Q)> for LinComb<T> {
    fn from_iter<I: IntoIterator<Item = (T, Q)>>(iter: I) -> Self {
        let mut out = Self::new();
        for (t, c) in iter {
            out.add_term(t, c);
        }
        out
    }
}

impl<T: Ord + Clone> IntoIterator for LinComb<T> {
    type Item = (T, Q);
    type IntoIter = std::collections::btree_map::IntoIter<T, Q>;
    fn into_iter(self) -> Self::IntoIter {
        self.terms.into_iter()
    }
}

impl<T: Ord + fmt::Display> fmt::Display for LinComb<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (t, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else if k == 0 { "" } else { "+" };
            if k > 0 {
                write!(f, " ")?;
            }
            let a = c.abs();
            if a.is_one() {
                write!(f, "{sign}{t}")?;
            } else {
                write!(f, "{sign}{} {t}", fmt_q(&a))?;
            }
        }
        Ok(())
    }
}

impl<T: Ord + fmt::Debug> fmt::Debug for LinComb<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter().map(|(t, c)| (t, fmt_q(c)))).finish()
    }
}

/// Shuffle product of two words, by the recursion
/// `au ⧢ bv = a(u ⧢ bv) + b(au ⧢ v)` with the empty word as unit.
pub fn shuffle_words<A: Ord + Clone>(u: &[A], v: &[A]) -> LinComb<Vec<A>> {
    let mut out = LinComb::new();
    for w in shuffle_list(u, v) {
        out.add_term(w, Q::one());
    }
    out
}

/// All interleavings of `u` and `v` with multiplicity, in recursion order.
pub fn shuffle_list<A: Clone>(u: &[A], v: &[A]) -> Vec<Vec<A>> {
    if u.is_empty() {
        return vec![v.to_vec()];
    }
    if v.is_empty() {
        return vec![u.to_vec()];
    }
    let mut out = Vec::new();
    for mut w in shuffle_list(&u[1..], v) {
        w.insert(0, u[0].clone());
        out.push(w);
    }
    for mut w in shuffle_list(u, &v[1..]) {
        w.insert(0, v[0].clone());
        out.push(w);
    }
    out
}

/// An `(r, s)`-shuffle: `sigma[k-1] = σ(k)` for `k = 1..=r+s`, increasing on
/// `1..=r` and on `r+1..=r+s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShufflePermutation {
    pub sigma: Vec<usize>,
    pub r: usize,
    pub s: usize,
}

impl ShufflePermutation {
    /// Places the `k`-th letter of `word` at position `σ(k)`.
    pub fn apply<A: Clone>(&self, word: &[A]) -> Vec<A> {
        assert_eq!(word.len(), self.sigma.len());
        let mut out: Vec<Option<A>> = vec![None; word.len()];
        for (k, &p) in self.sigma.iter().enumerate() {
            out[p - 1] = Some(word[k].clone());
        }
        out.into_iter().map(|a| a.expect("sigma is a bijection")).collect()
    }

    pub fn sign(&self) -> i64 {
        permutation_sign(&self.sigma).expect("shuffles are bijections")
    }
}

/// Every `(r, s)`-shuffle, ordered lexicographically by the positions of the
/// first block.
pub fn enumerate_shuffles(r: usize, s: usize) -> Vec<ShufflePermutation> {
    let n = r + s;
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(r);
    fn rec(
        start: usize,
        n: usize,
        r: usize,
        s: usize,
        chosen: &mut Vec<usize>,
        out: &mut Vec<ShufflePermutation>,
    ) {
        if chosen.len() == r {
            let mut sigma = chosen.clone();
            sigma.extend((1..=n).filter(|p| !chosen.contains(p)));
            out.push(ShufflePermutation { sigma, r, s });
            return;
        }
        for p in start..=n {
            chosen.push(p);
            rec(p + 1, n, r, s, chosen, out);
            chosen.pop();
        }
    }
    rec(1, n, r, s, &mut chosen, &mut out);
    out
}

/// Sign of a permutation of `1..=n` given as its list of images.
pub fn permutation_sign(sigma: &[usize]) -> Result<i64> {
    let n = sigma.len();
    let mut seen = vec![false; n];
    for &p in sigma {
        if p == 0 || p > n || seen[p - 1] {
            return Err(Error::Precondition(format!("{sigma:?} is not a permutation of 1..={n}")));
        }
        seen[p - 1] = true;
    }
    let mut visited = vec![false; n];
    let mut sign = 1;
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !visited[k] {
            visited[k] = true;
            k = sigma[k] - 1;
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    Ok(sign)
}

/// Sum of signs over all `(r, n - r)`-shuffles.
pub fn shuffle_sign_sum(r: usize, n: usize) -> Result<i64> {
    if n < 2 {
        return Err(Error::Domain(format!("shuffle sign sum needs n >= 2, got {n}")));
    }
    if r > n {
        return Err(Error::Domain(format!("block size {r} exceeds n = {n}")));
    }
    Ok(enumerate_shuffles(r, n - r).iter().map(ShufflePermutation::sign).sum())
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_word_is_unit() {
        let w = vec!['a', 'b', 'c'];
        let s = shuffle_words(&[], &w);
        assert_eq!(s, LinComb::term(w));
    }

    #[test]
    fn two_letters() {
        let s = shuffle_words(&['a'], &['b']);
        assert_eq!(s.len(), 2);
        assert_eq!(s.coeff(&vec!['a', 'b']), q(1));
        assert_eq!(s.coeff(&vec!['b', 'a']), q(1));
    }

    #[test]
    fn repeated_letters_accumulate() {
        let s = shuffle_words(&['a'], &['a']);
        assert_eq!(s.coeff(&vec!['a', 'a']), q(2));
    }

    #[test]
    fn shuffle_counts() {
        assert_eq!(enumerate_shuffles(1, 1).len(), 2);
        assert_eq!(enumerate_shuffles(2, 2).len(), 6);
        assert_eq!(enumerate_shuffles(2, 3).len(), 10);
        let total: usize = shuffle_list(&[1, 2], &[3, 4, 5]).len();
        assert_eq!(total, 10);
    }

    #[test]
    fn shuffle_matches_bruteforce_filter_of_s4() {
        // all permutations of 1..=4 that increase on {1,2} and on {3,4}
        let mut brute = Vec::new();
        for a in 1..=4usize {
            for b in 1..=4 {
                for c in 1..=4 {
                    for d in 1..=4 {
                        let p = vec![a, b, c, d];
                        if permutation_sign(&p).is_ok() && a < b && c < d {
                            brute.push(p);
                        }
                    }
                }
            }
        }
        let mut ours: Vec<_> = enumerate_shuffles(2, 2).into_iter().map(|s| s.sigma).collect();
        ours.sort();
        brute.sort();
        assert_eq!(ours, brute);
    }

    #[test]
    fn signs() {
        assert_eq!(permutation_sign(&[1, 2, 3]).unwrap(), 1);
        assert_eq!(permutation_sign(&[2, 1, 3]).unwrap(), -1);
        assert_eq!(permutation_sign(&[2, 3, 1]).unwrap(), 1);
        assert!(permutation_sign(&[1, 1, 2]).is_err());
    }

    #[test]
    fn sign_sums() {
        assert_eq!(shuffle_sign_sum(2, 4).unwrap(), 2);
        assert_eq!(shuffle_sign_sum(2, 5).unwrap(), 2);
        assert_eq!(shuffle_sign_sum(1, 7).unwrap(), 1);
        assert!(shuffle_sign_sum(2, 1).is_err());
    }

    #[test]
    fn shuffle_apply_realizes_the_product() {
        let word = ['a', 'b', 'c', 'd'];
        let via_perms: LinComb<Vec<char>> = enumerate_shuffles(2, 2)
            .iter()
            .map(|s| (s.apply(&word), q(1)))
            .collect();
        assert_eq!(via_perms, shuffle_words(&word[..2], &word[2..]));
    }

    #[test]
    fn normal_form_drops_zeros() {
        let mut lc = LinComb::term("x");
        lc.add_term("x", q(-1));
        assert!(lc.is_empty());
        lc.add_term("y", q(0));
        assert!(lc.is_empty());
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("-103/54").unwrap(), q_frac(-103, 54));
        assert_eq!(fmt_q(&q_frac(4, 2)), "2");
        assert!(parse_q("1/0").is_err());
    }
}
