//! Reduction of `[a0 | a1,...,an // x | a_{n+1}]` to hyperlogs in at most
//! `n - 2` variables, modulo products.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::algebra::{enumerate_shuffles, shuffle_sign_sum, Q};
use crate::error::{Error, Result};
use crate::hyperlog::{permutation_reduce, transposition_reduce, HExpr, HTerm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Naive,
    Efficient,
    Odd,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Naive => "naive",
            Scheme::Efficient => "efficient",
            Scheme::Odd => "odd",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Scheme> {
        match s {
            "naive" => Ok(Scheme::Naive),
            "efficient" | "all" | "all_n" => Ok(Scheme::Efficient),
            "odd" | "odd_n" => Ok(Scheme::Odd),
            _ => Err(Error::Parse(format!("unknown scheme `{s}`"))),
        }
    }
}

/// Which pair of rearranged terms a relation connects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationKind {
    /// `R(i-1, j | i, j)`: `A_{i-1,j} + A_{i,j}`.
    PairLeft { i: usize, j: usize },
    /// `R(i, j | i, j+1)`: `A_{i,j} + A_{i,j+1}`.
    PairRight { i: usize, j: usize },
    /// `R_i`: `A_i + A_{i+1}`.
    Single { i: usize },
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RelationKind::PairLeft { i, j } => write!(f, "R({},{}|{},{})", i - 1, j, i, j),
            RelationKind::PairRight { i, j } => write!(f, "R({},{}|{},{})", i, j, i, j + 1),
            RelationKind::Single { i } => write!(f, "R_{i}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReductionRelation {
    pub kind: RelationKind,
    pub context: HTerm,
    pub expansion: HExpr,
}

fn need_weight(t: &HTerm, min: usize) -> Result<usize> {
    let n = t.weight();
    if n < min {
        return Err(Error::WeightTooSmall(n));
    }
    Ok(n)
}

/// `A_{i,j}`: the first letter at position `i`, the second at `j`, the rest in
/// order.
pub fn a_grid_term(t: &HTerm, i: usize, j: usize) -> Result<HTerm> {
    let n = t.weight();
    if !(1 <= i && i < j && j <= n) {
        return Err(Error::Precondition(format!("need 1 <= i < j <= {n}, got ({i}, {j})")));
    }
    let mut rest = t.letters[2..].iter();
    let letters = (1..=n)
        .map(|p| match p {
            _ if p == i => t.letters[0].clone(),
            _ if p == j => t.letters[1].clone(),
            _ => rest.next().expect("n - 2 remaining letters").clone(),
        })
        .collect();
    Ok(HTerm { letters, ..t.clone() })
}

/// `A_i`: the first letter moved to position `i`.
pub fn a_single_term(t: &HTerm, i: usize) -> Result<HTerm> {
    let n = t.weight();
    if !(1..=n).contains(&i) {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let mut letters = t.letters[1..].to_vec();
    letters.insert(i - 1, t.letters[0].clone());
    Ok(HTerm { letters, ..t.clone() })
}

/// The coefficient of a relation in the all-`n` scheme.
pub fn coeff_c(n: usize, kind: RelationKind) -> Q {
    match kind {
        RelationKind::PairLeft { i, j } => {
            if (i as i64 - j as i64).rem_euclid(2) == 1 {
                Q::one()
            } else {
                Q::zero()
            }
        }
        RelationKind::PairRight { j, .. } => {
            let v = (n / 2) as i64 - (j / 2) as i64;
            Q::from_integer(if j % 2 == 0 { v } else { -v }.into())
        }
        RelationKind::Single { .. } => Q::one(),
    }
}

pub fn relation(t: &HTerm, kind: RelationKind) -> Result<ReductionRelation> {
    let expansion = match kind {
        RelationKind::PairLeft { i, j } => {
            if i < 2 {
                return Err(Error::Precondition(format!("{kind:?} needs i >= 2")));
            }
            transposition_reduce(&a_grid_term(t, i - 1, j)?, i - 1, i)?
        }
        RelationKind::PairRight { i, j } => transposition_reduce(&a_grid_term(t, i, j)?, j, j + 1)?,
        RelationKind::Single { i } => transposition_reduce(&a_single_term(t, i)?, i, i + 1)?,
    };
    Ok(ReductionRelation { kind, context: t.clone(), expansion })
}

/// The signed relations of the all-`n` scheme, summing to `⌊n/2⌋ t` modulo
/// products. Relations with zero coefficient are omitted.
pub fn efficient_relations(n: usize) -> Vec<(RelationKind, Q)> {
    let mut out = Vec::new();
    for j in 2..n {
        let kind = RelationKind::PairRight { i: 1, j };
        let c = coeff_c(n, kind);
        if !c.is_zero() {
            out.push((kind, c));
        }
    }
    for i in 2..=n {
        for j in i + 1..=n {
            let kind = RelationKind::PairLeft { i, j };
            let c = coeff_c(n, kind);
            if !c.is_zero() {
                out.push((kind, -c));
            }
        }
    }
    out
}

/// The signed relations of the odd-`n` scheme, summing to `t` modulo products.
pub fn odd_relations(n: usize) -> Vec<(RelationKind, Q)> {
    (1..=n / 2).map(|j| (RelationKind::Single { i: 2 * j }, -Q::one())).collect()
}

/// Sums signed permutation reductions over the `(2, n-2)`-shuffles.
pub fn reduce_naive(t: &HTerm) -> Result<HExpr> {
    let n = need_weight(t, 3)?;
    let mut total = HExpr::new();
    let mut sign_sum = 0;
    for s in enumerate_shuffles(2, n - 2) {
        // s sends letter k to position s(k); the permutation acting on
        // positions is its inverse
        let mut inverse = vec![0; n];
        for (k, &p) in s.sigma.iter().enumerate() {
            inverse[p - 1] = k + 1;
        }
        total.add_assign(&permutation_reduce(t, &inverse)?);
        sign_sum += s.sign();
    }
    debug_assert_eq!(sign_sum, shuffle_sign_sum(2, n)?);
    // Σ σ·t is a product, so Σ (σ·t - sgn σ t) = -(Σ sgn σ) t
    Ok(total.scaled(&Q::new((-1).into(), sign_sum.into())))
}

fn sum_relations(t: &HTerm, rels: &[(RelationKind, Q)], scale: &Q) -> Result<HExpr> {
    let mut total = HExpr::new();
    for (kind, c) in rels {
        total.add_scaled(&relation(t, *kind)?.expansion, c);
    }
    Ok(total.scaled(scale))
}

pub fn reduce_efficient(t: &HTerm) -> Result<HExpr> {
    let n = need_weight(t, 3)?;
    let scale = Q::new(1.into(), ((n / 2) as i64).into());
    sum_relations(t, &efficient_relations(n), &scale)
}

pub fn reduce_odd(t: &HTerm) -> Result<HExpr> {
    let n = need_weight(t, 3)?;
    if n % 2 == 0 {
        return Err(Error::Precondition(format!("odd scheme needs odd weight, got {n}")));
    }
    sum_relations(t, &odd_relations(n), &Q::one())
}

pub fn reduce(t: &HTerm, scheme: Scheme) -> Result<HExpr> {
    match scheme {
        Scheme::Naive => reduce_naive(t),
        Scheme::Efficient => reduce_efficient(t),
        Scheme::Odd => reduce_odd(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, LinComb};

    fn h(s: &str) -> HTerm {
        HTerm::parse(s).unwrap()
    }

    #[test]
    fn grid_terms() {
        let t = HTerm::generic(7);
        assert_eq!(a_grid_term(&t, 2, 5).unwrap(), h("[a0|a3,a1,a4,a5,a2,a6,a7//x|a8]"));
        assert_eq!(a_grid_term(&t, 1, 2).unwrap(), t);
        assert_eq!(a_grid_term(&HTerm::generic(4), 1, 3).unwrap(), h("[a0|a1,a3,a2,a4//x|a5]"));
        assert!(a_grid_term(&t, 3, 3).is_err());
        assert_eq!(a_single_term(&HTerm::generic(3), 2).unwrap(), h("[a0|a2,a1,a3//x|a4]"));
    }

    #[test]
    fn coefficients() {
        assert_eq!(coeff_c(4, RelationKind::PairLeft { i: 2, j: 3 }), q(1));
        assert_eq!(coeff_c(4, RelationKind::PairRight { i: 1, j: 2 }), q(1));
        assert_eq!(coeff_c(4, RelationKind::PairLeft { i: 2, j: 4 }), q(0));
    }

    #[test]
    fn weight_four_relation_list() {
        let names: Vec<(String, Q)> =
            efficient_relations(4).into_iter().map(|(k, c)| (k.to_string(), c)).collect();
        assert_eq!(
            names,
            vec![
                ("R(1,2|1,3)".to_string(), q(1)),
                ("R(1,3|1,4)".to_string(), q(-1)),
                ("R(1,3|2,3)".to_string(), q(-1)),
                ("R(2,4|3,4)".to_string(), q(-1)),
            ]
        );
    }

    // Each relation is the sum of its two rearranged terms; together with the
    // shuffle term the schedules must add up to a multiple of the original.
    fn grid_pairs(kind: RelationKind) -> [(usize, usize); 2] {
        match kind {
            RelationKind::PairLeft { i, j } => [(i - 1, j), (i, j)],
            RelationKind::PairRight { i, j } => [(i, j), (i, j + 1)],
            RelationKind::Single { .. } => unreachable!(),
        }
    }

    #[test]
    fn efficient_schedule_telescopes() {
        for n in 3..=9 {
            let mut sum: LinComb<(usize, usize)> = LinComb::new();
            for (kind, c) in efficient_relations(n) {
                for p in grid_pairs(kind) {
                    sum.add_term(p, c.clone());
                }
            }
            for i in 1..=n {
                for j in i + 1..=n {
                    sum.add_term((i, j), q(1));
                }
            }
            assert_eq!(sum, LinComb::from_term((1, 2), q((n / 2) as i64)), "n = {n}");
        }
    }

    #[test]
    fn odd_schedule_telescopes() {
        for n in (3..=11).step_by(2) {
            let mut sum: LinComb<usize> = (1..=n).map(|i| (i, q(1))).collect();
            for (kind, c) in odd_relations(n) {
                let RelationKind::Single { i } = kind else { unreachable!() };
                sum.add_term(i, c.clone());
                sum.add_term(i + 1, c);
            }
            assert_eq!(sum, LinComb::term(1), "n = {n}");
        }
    }

    #[test]
    fn relation_contexts_swap_into_each_other() {
        let t = HTerm::generic(5);
        let pl = RelationKind::PairLeft { i: 3, j: 5 };
        let rel = relation(&t, pl).unwrap();
        assert_eq!(rel.context, t);
        assert_eq!(a_grid_term(&t, 2, 5).unwrap().swapped(2, 3), a_grid_term(&t, 3, 5).unwrap());
        assert_eq!(a_grid_term(&t, 1, 3).unwrap().swapped(3, 4), a_grid_term(&t, 1, 4).unwrap());
        assert_eq!(a_single_term(&t, 2).unwrap().swapped(2, 3), a_single_term(&t, 3).unwrap());
    }

    #[test]
    fn output_variable_bound() {
        for n in 3..=5 {
            let t = HTerm::generic(n);
            let mut outs = vec![reduce_naive(&t).unwrap(), reduce_efficient(&t).unwrap()];
            if n % 2 == 1 {
                outs.push(reduce_odd(&t).unwrap());
            }
            for out in outs {
                assert!(!out.is_empty());
                for term in out.terms() {
                    assert!(term.variable_count() <= n - 2, "{term}");
                }
            }
        }
    }

    #[test]
    fn preconditions() {
        assert!(reduce_naive(&HTerm::generic(2)).is_err());
        assert!(reduce_efficient(&HTerm::generic(2)).is_err());
        assert!(reduce_odd(&HTerm::generic(4)).is_err());
    }

    #[test]
    fn sizes_at_weight_five() {
        let t = HTerm::generic(5);
        let odd = reduce_odd(&t).unwrap().len();
        let eff = reduce_efficient(&t).unwrap().len();
        let naive = reduce_naive(&t).unwrap().len();
        assert!(odd < eff && eff < naive, "{odd} {eff} {naive}");
    }
}
