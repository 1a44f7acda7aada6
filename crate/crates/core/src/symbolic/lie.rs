//! Lie polynomials used as test functionals.
//!
//! A tensor lies in the shuffle ideal iff it pairs to zero with every Lie
//! polynomial, and `Π_w` is the adjoint of the Dynkin operator, so
//! `⟨Π_w T, L⟩ = ⟨T, L⟩` for Lie `L`. The standard bracketings of Lyndon
//! words form a basis, which turns the zero test of `Π_w T` into a set of
//! pairings. Likewise the cobracket is dual to the bracket, so `δ T = 0` iff
//! `⟨T, [[u], [v]]⟩ = 0` for Lyndon `u`, `v` of weights `k`, `w - k` with
//! `2 ≤ k ≤ w - 2`.
//!
//! Everything here works on words over ranks `0..m` of a sorted multiset.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// A Lie polynomial as signed words.
pub type Poly = Vec<(Vec<u8>, i64)>;

/// Whether `w` is strictly smaller than each of its proper suffixes.
pub fn is_lyndon(w: &[u8]) -> bool {
    !w.is_empty() && (1..w.len()).all(|i| w < &w[i..])
}

/// The standard bracketing `[w]` expanded into words.
pub fn bracket(w: &[u8]) -> Poly {
    if w.len() == 1 {
        return vec![(w.to_vec(), 1)];
    }
    // split at the longest proper Lyndon suffix
    let i = (1..w.len()).find(|&i| is_lyndon(&w[i..])).expect("a single letter is Lyndon");
    commutator(&bracket(&w[..i]), &bracket(&w[i..]))
}

pub fn commutator(a: &Poly, b: &Poly) -> Poly {
    let mut out: HashMap<Vec<u8>, i64> = HashMap::new();
    for (x, cx) in a {
        for (y, cy) in b {
            *out.entry([x.as_slice(), y].concat()).or_insert(0) += cx * cy;
            *out.entry([y.as_slice(), x].concat()).or_insert(0) -= cx * cy;
        }
    }
    let mut v: Poly = out.into_iter().filter(|(_, c)| *c != 0).collect();
    v.sort();
    v
}

/// Distinct arrangements of a sorted multiset, in lexicographic order.
pub fn arrangements(sorted: &[u8]) -> Vec<Vec<u8>> {
    let mut cur = sorted.to_vec();
    let mut out = vec![cur.clone()];
    loop {
        // next permutation
        let Some(i) = (0..cur.len().saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..cur.len()).rev().find(|&j| cur[j] > cur[i]).expect("successor");
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
}

pub fn lyndon_words(sorted: &[u8]) -> Vec<Vec<u8>> {
    arrangements(sorted).into_iter().filter(|w| is_lyndon(w)).collect()
}

fn sub_multisets(sorted: &[u8], k: usize) -> Vec<(Vec<u8>, Vec<u8>)> {
    let n = sorted.len();
    let mut out: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let (a, b): (Vec<(usize, &u8)>, Vec<(usize, &u8)>) =
            sorted.iter().enumerate().partition(|(i, _)| mask >> i & 1 == 1);
        let pair = (a.into_iter().map(|(_, x)| *x).collect(), b.into_iter().map(|(_, x)| *x).collect());
        if !out.contains(&pair) {
            out.push(pair);
        }
    }
    out
}

/// Test polynomials for `Π_w T = 0` on one orbit of shape `sorted`.
pub fn shuffle_tests(sorted: &[u8]) -> Vec<Poly> {
    lyndon_words(sorted).iter().map(|w| bracket(w)).collect()
}

/// Test polynomials for `δ T = 0` on one orbit of shape `sorted`.
pub fn delta_tests(sorted: &[u8]) -> Vec<Poly> {
    let w = sorted.len();
    let mut out = Vec::new();
    for k in 2..=w.saturating_sub(2) {
        if 2 * k > w {
            break;
        }
        for (m1, m2) in sub_multisets(sorted, k) {
            for u in lyndon_words(&m1) {
                for v in lyndon_words(&m2) {
                    if 2 * k == w && u >= v {
                        continue;
                    }
                    let p = commutator(&bracket(&u), &bracket(&v));
                    if !p.is_empty() {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Cached tests for an orbit shape; `delta` selects the cobracket.
pub fn tests_for(sorted: &[u8], delta: bool) -> Arc<Vec<Poly>> {
    type Cache = Mutex<HashMap<(Vec<u8>, bool), Arc<Vec<Poly>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (sorted.to_vec(), delta);
    if let Some(t) = cache.lock().expect("cache").get(&key) {
        return t.clone();
    }
    let t = Arc::new(if delta { delta_tests(sorted) } else { shuffle_tests(sorted) });
    cache.lock().expect("cache").insert(key, t.clone());
    t
}

/// Rank pattern of a word: the sorted distinct letters and the word's shape.
pub fn shape<T: Ord + Clone>(word: &[T]) -> (Vec<T>, Vec<u8>) {
    let mut letters = word.to_vec();
    letters.sort();
    letters.dedup();
    let mut ranks: Vec<u8> =
        word.iter().map(|x| letters.binary_search(x).expect("present") as u8).collect();
    ranks.sort();
    (letters, ranks)
}
