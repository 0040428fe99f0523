//! Property-based invariants: module axioms of elements, Koszul-sign
//! confluence of word normalization, superdegree additivity of products,
//! and weight bookkeeping of mode application.

use bvkernel::algebra::{multiply, Superalgebra};
use bvkernel::element::{Element, Word};
use bvkernel::poly::make_polynomial_superalgebra;
use bvkernel::scalar;
use bvkernel::structconst::random_superalgebra;
use bvkernel::vosa::{make_bc_system, Gen};
use proptest::prelude::*;

fn coeffs() -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-5i64..=5, 1..6)
}

fn element_from(alg: &bvkernel::poly::PolyAlgebra, picks: &[i64]) -> Element<bvkernel::poly::GradedWord> {
    let basis = alg.basis();
    Element::from_terms(picks.iter().enumerate().map(|(i, &c)| {
        (
            basis[(i * 7 + c.unsigned_abs() as usize) % basis.len()].clone(),
            scalar::int(c),
        )
    }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn element_module_axioms(a in coeffs(), b in coeffs(), c in coeffs(), s in -7i64..=7) {
        let alg = make_polynomial_superalgebra(2, 2, 4).unwrap();
        let (a, b, c) = (
            element_from(&alg, &a),
            element_from(&alg, &b),
            element_from(&alg, &c),
        );
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert!(a.sub(&a).is_zero());
        let s = scalar::int(s);
        prop_assert_eq!(a.add(&b).scale(&s), a.scale(&s).add(&b.scale(&s)));
    }

    #[test]
    fn koszul_sign_confluence_exterior(perm in proptest::sample::subsequence(vec![0usize,1,2,3,4], 2..=5).prop_shuffle()) {
        // multiplying distinct odd generators in any order yields the
        // canonical word times the permutation parity
        let alg = make_polynomial_superalgebra(0, 5, 1).unwrap();
        let mut sorted = perm.clone();
        sorted.sort();
        let mut shuffled = alg.unit().unwrap();
        for &i in &perm {
            shuffled = multiply(&*alg, &shuffled, &alg.odd_gen(i));
        }
        let mut canonical = alg.unit().unwrap();
        for &i in &sorted {
            canonical = multiply(&*alg, &canonical, &alg.odd_gen(i));
        }
        // parity of the permutation by inversion count
        let mut inversions = 0i64;
        for i in 0..perm.len() {
            for j in (i + 1)..perm.len() {
                if perm[i] > perm[j] {
                    inversions += 1;
                }
            }
        }
        prop_assert_eq!(shuffled, canonical.scale(&scalar::parity_sign(inversions)));
    }

    #[test]
    fn koszul_sign_confluence_fock(perm in proptest::sample::subsequence(vec![0usize,1,2,3], 2..=4).prop_shuffle()) {
        let alg = make_bc_system(8);
        let modes = [
            (Gen::B, -2i64),
            (Gen::B, -3),
            (Gen::C, 1),
            (Gen::C, 0),
        ];
        let picked: Vec<(Gen, i64)> = perm.iter().map(|&i| modes[i]).collect();
        let mut sorted_idx = perm.clone();
        sorted_idx.sort();
        let canonical: Vec<(Gen, i64)> = sorted_idx.iter().map(|&i| modes[i]).collect();
        let shuffled_state = alg.state_from_modes(&picked);
        let canonical_state = alg.state_from_modes(&canonical);
        let mut inversions = 0i64;
        for i in 0..perm.len() {
            for j in (i + 1)..perm.len() {
                if perm[i] > perm[j] {
                    inversions += 1;
                }
            }
        }
        prop_assert_eq!(
            shuffled_state,
            canonical_state.scale(&scalar::parity_sign(inversions))
        );
    }

    #[test]
    fn superdegree_additivity_random_algebras(seed in 0u64..32, i in 0usize..5, j in 0usize..5) {
        let alg = random_superalgebra(5, seed);
        let basis = alg.basis();
        let prod = alg.mul_words(&basis[i], &basis[j]);
        for w in prod.words() {
            prop_assert_eq!(
                w.superdegree(),
                basis[i].superdegree() + basis[j].superdegree()
            );
        }
    }

    #[test]
    fn mode_application_weight_rule(n in -3i64..=3, ui in 0usize..4, vi in 0usize..4) {
        let alg = make_bc_system(6);
        let states = [
            alg.b_state(),
            alg.c_state(),
            alg.wick(&alg.b_state(), &alg.c_state()),
            alg.stress_state(),
        ];
        let u = &states[ui];
        let v = &states[vi];
        let r = alg.mode_apply(u, n, v);
        if !r.is_zero() {
            let expected = u.weight().unwrap() + v.weight().unwrap() - scalar::int(n + 1);
            prop_assert_eq!(r.weight(), Some(expected));
        }
    }
}
