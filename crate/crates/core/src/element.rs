//! Graded elements: finite linear combinations of canonical basis words.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;

use num_traits::Zero;

use crate::scalar::{self, Scalar};

/// A canonical basis word of some graded superalgebra.
///
/// A word knows its own superdegree (the integer grading whose parity drives
/// all Koszul signs), its optional weight (an extra diagonalizable grading,
/// used by the vertex-operator instances), and its cap budget (the additive
/// quantity a truncated algebra caps, e.g. total even-variable degree).
pub trait Word: Clone + Eq + Ord + Hash + fmt::Debug + Send + Sync + 'static {
    fn superdegree(&self) -> i64;

    fn weight(&self) -> Option<Scalar> {
        None
    }

    /// Additive quantity subject to the algebra's truncation cap; `0` for
    /// words of uncapped algebras.
    fn budget(&self) -> i64 {
        0
    }
}

/// A finite formal linear combination of basis words with rational
/// coefficients. Zero coefficients are never stored, so structural equality
/// is semantic equality.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Element<W: Word> {
    terms: BTreeMap<W, Scalar>,
}

impl<W: Word> Default for Element<W> {
    fn default() -> Self {
        Element {
            terms: BTreeMap::new(),
        }
    }
}

impl<W: Word> Element<W> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(word: W, coeff: Scalar) -> Self {
        let mut e = Self::zero();
        e.add_term(word, coeff);
        e
    }

    pub fn basis(word: W) -> Self {
        Self::single(word, scalar::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (W, Scalar)>>(it: I) -> Self {
        let mut e = Self::zero();
        for (w, c) in it {
            e.add_term(w, c);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&W, &Scalar)> {
        self.terms.iter()
    }

    pub fn words(&self) -> impl Iterator<Item = &W> {
        self.terms.keys()
    }

    pub fn coeff(&self, w: &W) -> Scalar {
        self.terms.get(w).cloned().unwrap_or_else(scalar::zero)
    }

    pub fn add_term(&mut self, word: W, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(word);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in other.iter() {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in other.iter() {
            out.add_term(w.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-scalar::one())
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Element {
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), c.clone() * s))
                .collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Self, s: &Scalar) {
        if s.is_zero() {
            return;
        }
        for (w, c) in other.iter() {
            self.add_term(w.clone(), c.clone() * s);
        }
    }

    /// The common superdegree of all words, if the element is homogeneous.
    /// `Some(0)` by convention for the zero element.
    pub fn superdegree(&self) -> Option<i64> {
        let mut deg = None;
        for w in self.words() {
            match deg {
                None => deg = Some(w.superdegree()),
                Some(d) if d == w.superdegree() => {}
                Some(_) => return None,
            }
        }
        Some(deg.unwrap_or(0))
    }

    pub fn is_homogeneous(&self) -> bool {
        self.superdegree().is_some()
    }

    /// The common weight of all words, if weight-homogeneous.
    pub fn weight(&self) -> Option<Scalar> {
        let mut wt: Option<Scalar> = None;
        for w in self.words() {
            let this = w.weight()?;
            match &wt {
                None => wt = Some(this),
                Some(prev) if *prev == this => {}
                Some(_) => return None,
            }
        }
        wt
    }

    /// Splits into superdegree-homogeneous components, keyed by degree.
    pub fn homogeneous_components(&self) -> BTreeMap<i64, Self> {
        let mut out: BTreeMap<i64, Self> = BTreeMap::new();
        for (w, c) in self.iter() {
            out.entry(w.superdegree())
                .or_default()
                .add_term(w.clone(), c.clone());
        }
        out
    }

    /// Splits into weight-homogeneous components; words without a weight
    /// grading collect under `None`.
    pub fn weight_components(&self) -> BTreeMap<Option<Scalar>, Self> {
        let mut out: BTreeMap<Option<Scalar>, Self> = BTreeMap::new();
        for (w, c) in self.iter() {
            out.entry(w.weight())
                .or_default()
                .add_term(w.clone(), c.clone());
        }
        out
    }

    /// Largest cap budget among the words (0 for the zero element).
    pub fn max_budget(&self) -> i64 {
        self.words().map(|w| w.budget()).max().unwrap_or(0)
    }
}

impl<W: Word> FromIterator<(W, Scalar)> for Element<W> {
    fn from_iter<I: IntoIterator<Item = (W, Scalar)>>(it: I) -> Self {
        Self::from_terms(it)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
    struct TestWord(i64);

    impl Word for TestWord {
        fn superdegree(&self) -> i64 {
            self.0
        }
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let mut e = Element::single(TestWord(1), scalar::int(2));
        e.add_term(TestWord(1), scalar::int(-2));
        assert!(e.is_zero());
        assert_eq!(e, Element::zero());
    }

    #[test]
    fn homogeneity_detection() {
        let e = Element::from_terms([
            (TestWord(1), scalar::int(1)),
            (TestWord(3), scalar::int(2)),
        ]);
        assert_eq!(e.superdegree(), None);
        let parts = e.homogeneous_components();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[&1].superdegree(), Some(1));
        assert_eq!(Element::<TestWord>::zero().superdegree(), Some(0));
    }
}
