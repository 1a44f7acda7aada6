use proptest::prelude::*;

use mplred::algebra::{binomial, permutation_sign, shuffle_list, shuffle_words};
use mplred::hyperlog::{operator_d, permutation_reduce, permuted, transposition_reduce, HExpr, HTerm};
use mplred::symbolic::tensor::{is_zero_wedge, shuffle_tensors};
use mplred::symbolic::{delta_cobracket, equals_mod_sh, pi_project, Atom, Expr, Tensor};

fn word(max_len: usize) -> impl Strategy<Value = Vec<Atom>> {
    prop::collection::vec((0u8..4).prop_map(|k| Atom::Token(format!("t{k}"))), 1..=max_len)
}

fn small_tensor(w: usize) -> impl Strategy<Value = Tensor> {
    prop::collection::vec((prop::collection::vec(0u8..3, w), -3i64..=3), 1..4).prop_map(|terms| {
        let mut t = Tensor::new();
        for (letters, c) in terms {
            let word = letters.into_iter().map(|k| Atom::Token(format!("s{k}"))).collect();
            t.add_term(word, mplred::algebra::q(c));
        }
        t
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shuffle_list_has_binomial_size(u in word(4), v in word(4)) {
        prop_assert_eq!(shuffle_list(&u, &v).len(), binomial(u.len() + v.len(), u.len()));
    }

    #[test]
    fn shuffle_is_commutative(u in word(4), v in word(4)) {
        prop_assert_eq!(shuffle_words(&u, &v), shuffle_words(&v, &u));
    }

    #[test]
    fn projection_kills_shuffles(u in word(3), v in word(3)) {
        prop_assert!(pi_project(&shuffle_words(&u, &v)).unwrap().is_empty());
    }

    #[test]
    fn projection_is_idempotent(t in small_tensor(4)) {
        let p = pi_project(&t).unwrap();
        prop_assert_eq!(pi_project(&p).unwrap(), p);
    }

    #[test]
    fn cobracket_kills_products(x in small_tensor(2), y in small_tensor(3)) {
        prop_assert!(is_zero_wedge(&delta_cobracket(&shuffle_tensors(&x, &y)).unwrap()));
    }
}

proptest! {
    // each case runs exact symbol checks, so keep the count low
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn d_operator_swaps_letter_and_slot(n in 3usize..=5, i in 1usize..=5, seed in any::<u64>()) {
        let i = 1 + (i - 1) % n;
        let t = HTerm::generic(n);
        let mut swapped = t.clone();
        swapped.letters[i - 1] = t.xslot.clone();
        swapped.xslot = t.letters[i - 1].clone();
        let d = operator_d(&t, i).unwrap();
        let rhs = &HExpr::term(t) + &HExpr::term(swapped);
        prop_assert!(equals_mod_sh(&Expr::from(d), &Expr::from(rhs), 1, seed).unwrap().pass);
    }

    #[test]
    fn transposition_reduces(n in 3usize..=5, i in 1usize..=5, j in 1usize..=5, seed in any::<u64>()) {
        let (i, j) = (1 + (i - 1) % n, 1 + (j - 1) % n);
        prop_assume!(i != j);
        let t = HTerm::generic(n);
        let r = transposition_reduce(&t, i, j).unwrap();
        prop_assert!(r.terms().all(|s| s.variable_count() <= n - 2));
        let rhs = &HExpr::term(t.clone()) + &HExpr::term(t.swapped(i, j));
        prop_assert!(equals_mod_sh(&Expr::from(r), &Expr::from(rhs), 1, seed).unwrap().pass);
    }

    #[test]
    fn permutation_reduces(sigma in Just(vec![1usize, 2, 3, 4]).prop_shuffle(), seed in any::<u64>()) {
        let t = HTerm::generic(4);
        let r = permutation_reduce(&t, &sigma).unwrap();
        let sign = permutation_sign(&sigma).unwrap();
        let mut rhs = HExpr::term(permuted(&t, &sigma));
        rhs.add_scaled(&HExpr::term(t), &mplred::algebra::q(-sign));
        prop_assert!(equals_mod_sh(&Expr::from(r), &Expr::from(rhs), 1, seed).unwrap().pass);
    }
}
