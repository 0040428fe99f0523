//! Deterministic randomness for sampling-based verification.
//!
//! Everything is driven by ChaCha8 seeded from a `u64`; forking by label
//! hashes the label into the parent seed so suites stay reproducible no
//! matter which subset of checks runs.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::Superalgebra;
use crate::element::{Element, Word};
use crate::linop::LinOp;
use crate::scalar::{self};

pub struct SuiteRng {
    seed: u64,
    rng: ChaCha8Rng,
}

impl SuiteRng {
    pub fn new(seed: u64) -> Self {
        SuiteRng {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream derived from this seed and a label.
    pub fn fork(&self, label: &str) -> SuiteRng {
        let mut h: u64 = 0xcbf29ce484222325 ^ self.seed;
        for b in label.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        SuiteRng::new(h)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Deterministic pseudo-random element: at most 6 terms, integer
/// coefficients in [-5, 5], words drawn from the basis with budget at most
/// `degree_bound`.
pub fn random_element<A: Superalgebra + ?Sized>(
    alg: &A,
    seed: u64,
    degree_bound: i64,
) -> Element<A::W> {
    let mut rng = SuiteRng::new(seed).fork("element");
    let pool: Vec<A::W> = alg
        .basis()
        .into_iter()
        .filter(|w| w.budget() <= degree_bound)
        .collect();
    random_element_from_pool(&pool, rng.rng())
}

fn random_element_from_pool<W: Word, R: Rng>(pool: &[W], rng: &mut R) -> Element<W> {
    if pool.is_empty() {
        return Element::zero();
    }
    let n_terms = rng.gen_range(1..=6usize);
    let mut out = Element::zero();
    for _ in 0..n_terms {
        let w = pool[rng.gen_range(0..pool.len())].clone();
        let c = rng.gen_range(-5i64..=5);
        out.add_term(w, scalar::int(c));
    }
    out
}

/// Random nonzero homogeneous element whose words all share one superdegree
/// and fit in `budget`. Returns zero only when no candidate words exist.
pub fn random_homogeneous<A, R>(alg: &A, budget: i64, rng: &mut R) -> Element<A::W>
where
    A: Superalgebra + ?Sized,
    R: Rng,
{
    let pool: Vec<A::W> = alg
        .basis()
        .into_iter()
        .filter(|w| w.budget() <= budget)
        .collect();
    if pool.is_empty() {
        return Element::zero();
    }
    for _ in 0..32 {
        let anchor = &pool[rng.gen_range(0..pool.len())];
        let deg = anchor.superdegree();
        let same: Vec<A::W> = pool
            .iter()
            .filter(|w| w.superdegree() == deg)
            .cloned()
            .collect();
        let e = random_element_from_pool(&same, rng);
        if !e.is_zero() {
            return e;
        }
    }
    Element::basis(pool[0].clone())
}

/// Random homogeneous operator of the given superdegree shift: each basis
/// word maps to a random element of the shifted degree (empty target degrees
/// map to zero). `kill_unit` zeroes the action on the unit word.
pub fn random_linop<A>(
    alg: &Arc<A>,
    seed: u64,
    shift: i64,
    kill_unit: bool,
    label: impl Into<String>,
) -> LinOp<A::W>
where
    A: Superalgebra + 'static,
{
    let mut rng = SuiteRng::new(seed).fork("linop");
    let basis = alg.basis();
    let unit = alg.unit_word();
    let mut images: std::collections::HashMap<A::W, Element<A::W>> =
        std::collections::HashMap::new();
    for w in &basis {
        if kill_unit && Some(w) == unit.as_ref() {
            images.insert(w.clone(), Element::zero());
            continue;
        }
        let target = w.superdegree() + shift;
        let pool: Vec<A::W> = basis
            .iter()
            .filter(|v| v.superdegree() == target)
            .cloned()
            .collect();
        let img = if pool.is_empty() {
            Element::zero()
        } else {
            let n = rng.rng().gen_range(0..=3usize);
            let mut e = Element::zero();
            for _ in 0..n {
                let v = pool[rng.rng().gen_range(0..pool.len())].clone();
                let c = rng.rng().gen_range(-3i64..=3);
                e.add_term(v, scalar::int(c));
            }
            e
        };
        images.insert(w.clone(), img);
    }
    LinOp::new(label, shift, move |w: &A::W| {
        images.get(w).cloned().unwrap_or_else(Element::zero)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::make_polynomial_superalgebra;

    #[test]
    fn random_element_is_deterministic() {
        let alg = make_polynomial_superalgebra(1, 1, 4).unwrap();
        let a = random_element(&*alg, 0, 4);
        let b = random_element(&*alg, 0, 4);
        assert_eq!(a, b);
        let c = random_element(&*alg, 1, 4);
        assert_ne!(a, c);
    }

    #[test]
    fn degree_bound_zero_scalar_or_unit() {
        let alg = make_polynomial_superalgebra(2, 0, 3).unwrap();
        let e = random_element(&*alg, 3, 0);
        for w in e.words() {
            assert_eq!(w.budget(), 0);
        }
    }

    #[test]
    fn homogeneous_samples_are_homogeneous() {
        let alg = make_polynomial_superalgebra(2, 2, 4).unwrap();
        let mut rng = SuiteRng::new(9);
        for _ in 0..20 {
            let e = random_homogeneous(&*alg, 2, rng.rng());
            assert!(e.is_homogeneous());
        }
    }
}
