//! Exact multiplicative decomposition of positive rationals: trial division by
//! small primes, then a pairwise coprime base for whatever is left.

use std::collections::HashMap;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::algebra::Q;

pub const TRIAL_BOUND: u32 = 1 << 15;

pub fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_BOUND as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (0..=n).filter(|&k| sieve[k]).map(|k| k as u32).collect()
    })
}

/// Sparse integer exponent vector over atom indices, sorted by index.
pub type ExpVec = Vec<(u32, i64)>;

fn trial_divide_u128(mut n: u128, out: &mut Vec<(u32, i64)>) -> u128 {
    for (idx, &p) in small_primes().iter().enumerate() {
        let p = p as u128;
        if p * p > n {
            break;
        }
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((idx as u32, e));
        }
    }
    if n > 1 && n <= TRIAL_BOUND as u128 {
        let idx = small_primes().binary_search(&(n as u32)).expect("prime below bound");
        out.push((idx as u32, 1));
        n = 1;
    }
    n
}

/// Splits `n` into small-prime exponents and a cofactor free of small primes.
pub fn trial_divide(n: &BigUint) -> (Vec<(u32, i64)>, BigUint) {
    let mut out = Vec::new();
    if let Some(v) = n.to_u128() {
        let rest = trial_divide_u128(v, &mut out);
        return (out, BigUint::from(rest));
    }
    let mut n = n.clone();
    for (idx, &p) in small_primes().iter().enumerate() {
        if let Some(v) = n.to_u128() {
            let rest = trial_divide_u128(v, &mut out);
            return (out, BigUint::from(rest));
        }
        let pb = BigUint::from(p);
        let mut e = 0;
        loop {
            let (quot, rem) = n.div_rem(&pb);
            if !rem.is_zero() {
                break;
            }
            n = quot;
            e += 1;
        }
        if e > 0 {
            out.push((idx as u32, e));
        }
    }
    (out, n)
}

/// Refines a set of integers into pairwise coprime elements, each input
/// being a product of them.
pub fn coprime_base(inputs: &[BigUint]) -> Vec<BigUint> {
    let mut set: Vec<BigUint> = Vec::new();
    let mut work: Vec<BigUint> = inputs.iter().filter(|x| !x.is_one() && !x.is_zero()).cloned().collect();
    work.sort();
    work.dedup();
    // invariant: `set` is pairwise coprime and every input divides a product
    // of elements of `set` and `work`
    while let Some(y) = work.pop() {
        if y.is_one() {
            continue;
        }
        let hit = set.iter().enumerate().find_map(|(k, b)| {
            let g = y.gcd(b);
            (!g.is_one()).then_some((k, g))
        });
        match hit {
            None => set.push(y),
            Some((k, g)) => {
                let b = set.swap_remove(k);
                if g == b && g == y {
                    set.push(g);
                    continue;
                }
                work.push(&b / &g);
                work.push(&y / &g);
                work.push(g);
            }
        }
    }
    set.sort();
    set
}

/// Factors positive rationals over small primes and a shared coprime base.
/// Atom indices below `small_primes().len()` are primes, the rest index
/// `base`.
pub struct Factorizer {
    pub base: Vec<BigUint>,
    cache: HashMap<Q, ExpVec>,
}

impl Factorizer {
    /// `values` must contain every rational that will be factored later.
    pub fn new<'a>(values: impl IntoIterator<Item = &'a Q>) -> Factorizer {
        let mut partial: HashMap<Q, (Vec<(u32, i64)>, BigUint, Vec<(u32, i64)>, BigUint)> = HashMap::new();
        let mut cofactors = Vec::new();
        for v in values {
            let v = abs_q(v);
            if partial.contains_key(&v) || v.is_zero() {
                continue;
            }
            let (pn, cn) = trial_divide(&to_biguint(v.numer()));
            let (pd, cd) = trial_divide(&to_biguint(v.denom()));
            cofactors.push(cn.clone());
            cofactors.push(cd.clone());
            partial.insert(v, (pn, cn, pd, cd));
        }
        let base = coprime_base(&cofactors);
        let offset = small_primes().len() as u32;
        let mut f = Factorizer { base, cache: HashMap::new() };
        for (v, (pn, cn, pd, cd)) in partial {
            let mut acc: Vec<(u32, i64)> = pn;
            acc.extend(pd.into_iter().map(|(i, e)| (i, -e)));
            acc.extend(f.over_base(&cn, offset, 1));
            acc.extend(f.over_base(&cd, offset, -1));
            f.cache.insert(v, normalize(acc));
        }
        f
    }

    fn over_base(&self, n: &BigUint, offset: u32, sign: i64) -> Vec<(u32, i64)> {
        let mut out = Vec::new();
        if n.is_one() {
            return out;
        }
        let mut n = n.clone();
        for (k, b) in self.base.iter().enumerate() {
            let mut e = 0;
            loop {
                let (quot, rem) = n.div_rem(b);
                if !rem.is_zero() {
                    break;
                }
                n = quot;
                e += 1;
            }
            if e > 0 {
                out.push((offset + k as u32, sign * e));
            }
            if n.is_one() {
                break;
            }
        }
        debug_assert!(n.is_one(), "cofactor not covered by the coprime base");
        out
    }

    /// Exponent vector of `|v|`; `None` if `v` was not registered.
    pub fn factor(&self, v: &Q) -> Option<&ExpVec> {
        self.cache.get(&abs_q(v))
    }

    pub fn atom_value(&self, idx: u32) -> BigUint {
        let np = small_primes().len() as u32;
        if idx < np {
            BigUint::from(small_primes()[idx as usize])
        } else {
            self.base[(idx - np) as usize].clone()
        }
    }
}

fn normalize(mut v: Vec<(u32, i64)>) -> ExpVec {
    v.sort_unstable();
    let mut out: ExpVec = Vec::with_capacity(v.len());
    for (i, e) in v {
        match out.last_mut() {
            Some((j, f)) if *j == i => *f += e,
            _ => out.push((i, e)),
        }
    }
    out.retain(|(_, e)| *e != 0);
    out
}

pub fn abs_q(v: &Q) -> Q {
    if v < &Q::zero() {
        -v.clone()
    } else {
        v.clone()
    }
}

fn to_biguint(n: &num_bigint::BigInt) -> BigUint {
    n.magnitude().clone()
}
