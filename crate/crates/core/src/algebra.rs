//! The superalgebra abstraction: a bilinear product on canonical basis words
//! with sign bookkeeping, plus the generic operations every checker uses.

use serde::Serialize;

use crate::element::{Element, Word};
use crate::error::{KernelError, Result};
use crate::scalar::{fmt_scalar, Scalar};

/// Which algebra laws are known (and mechanically validated) to hold.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize)]
pub struct AlgebraFlags {
    pub supercommutative: bool,
    pub associative: bool,
    pub unital: bool,
}

impl AlgebraFlags {
    pub fn classical() -> Self {
        AlgebraFlags {
            supercommutative: true,
            associative: true,
            unital: true,
        }
    }

    pub fn is_classical(&self) -> bool {
        self.supercommutative && self.associative
    }
}

/// A superalgebra presented through its canonical basis words.
///
/// The product is only assumed bilinear and superdegree-additive; flags
/// record which further laws hold. `basis` enumerates the truncation that
/// sweeps run over, and `budget_cap` is the truncation bound used to guard
/// sweeps against cap artifacts (tuples whose products would overflow the
/// truncation are skipped, so every asserted identity is cap-free exact).
pub trait Superalgebra: Send + Sync {
    type W: Word;

    fn name(&self) -> &str;

    fn mul_words(&self, u: &Self::W, v: &Self::W) -> Element<Self::W>;

    fn unit_word(&self) -> Option<Self::W>;

    fn flags(&self) -> AlgebraFlags;

    /// All basis words of the truncation, in a fixed deterministic order.
    fn basis(&self) -> Vec<Self::W>;

    fn budget_cap(&self) -> Option<i64> {
        None
    }

    fn format_word(&self, w: &Self::W) -> String;

    fn generators(&self) -> Vec<Element<Self::W>>;

    fn unit(&self) -> Option<Element<Self::W>> {
        self.unit_word().map(Element::basis)
    }

    fn format_element(&self, e: &Element<Self::W>) -> String {
        if e.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (w, c) in e.iter() {
            parts.push(format!("{} * {}", fmt_scalar(c), self.format_word(w)));
        }
        parts.join(" + ")
    }
}

/// Bilinear extension of the basis product.
pub fn multiply<A: Superalgebra + ?Sized>(
    alg: &A,
    a: &Element<A::W>,
    b: &Element<A::W>,
) -> Element<A::W> {
    let mut out = Element::zero();
    for (u, cu) in a.iter() {
        for (v, cv) in b.iter() {
            let c = cu.clone() * cv;
            out.add_scaled(&alg.mul_words(u, v), &c);
        }
    }
    out
}

/// Supercommutator `[a, b] = ab - (-1)^{|a||b|} ba` for homogeneous `a`, `b`,
/// extended bilinearly over homogeneous components.
pub fn commutator<A: Superalgebra + ?Sized>(
    alg: &A,
    a: &Element<A::W>,
    b: &Element<A::W>,
) -> Element<A::W> {
    let mut out = Element::zero();
    for (da, pa) in a.homogeneous_components() {
        for (db, pb) in b.homogeneous_components() {
            let ab = multiply(alg, &pa, &pb);
            let ba = multiply(alg, &pb, &pa);
            let sign = crate::scalar::parity_sign(da * db);
            out = out.add(&ab.sub(&ba.scale(&sign)));
        }
    }
    out
}

/// Checks that a tuple of words fits under the algebra's truncation cap, so
/// that all products formed from it are exact.
pub fn tuple_in_budget<A: Superalgebra + ?Sized>(alg: &A, words: &[&A::W]) -> bool {
    match alg.budget_cap() {
        None => true,
        Some(cap) => words.iter().map(|w| w.budget()).sum::<i64>() <= cap,
    }
}

/// Validates the algebra's declared flags by exhaustive sweeps over the
/// truncated basis (pairs for supercommutativity, budget-guarded triples for
/// associativity, singletons for unitality). Returns the first violation.
pub fn validate_flags<A: Superalgebra + ?Sized>(alg: &A) -> Result<()> {
    let basis = alg.basis();
    let flags = alg.flags();

    for u in &basis {
        for v in &basis {
            if !tuple_in_budget(alg, &[u, v]) {
                continue;
            }
            let uv = alg.mul_words(u, v);
            let expected = u.superdegree() + v.superdegree();
            for w in uv.words() {
                if w.superdegree() != expected {
                    return Err(KernelError::Construction(format!(
                        "superdegree additivity fails in {}: |{}|+|{}| = {}, term {} has {}",
                        alg.name(),
                        alg.format_word(u),
                        alg.format_word(v),
                        expected,
                        alg.format_word(w),
                        w.superdegree()
                    )));
                }
            }
            if flags.supercommutative {
                let vu = alg.mul_words(v, u);
                let sign =
                    crate::scalar::parity_sign(u.superdegree() * v.superdegree());
                if uv != vu.scale(&sign) {
                    return Err(KernelError::Construction(format!(
                        "supercommutativity fails on ({}, {})",
                        alg.format_word(u),
                        alg.format_word(v)
                    )));
                }
            }
        }
    }

    if flags.associative {
        for u in &basis {
            for v in &basis {
                for w in &basis {
                    if !tuple_in_budget(alg, &[u, v, w]) {
                        continue;
                    }
                    let left = multiply(alg, &alg.mul_words(u, v), &Element::basis(w.clone()));
                    let right = multiply(alg, &Element::basis(u.clone()), &alg.mul_words(v, w));
                    if left != right {
                        return Err(KernelError::Construction(format!(
                            "associativity fails on ({}, {}, {})",
                            alg.format_word(u),
                            alg.format_word(v),
                            alg.format_word(w)
                        )));
                    }
                }
            }
        }
    }

    if flags.unital {
        let unit = alg
            .unit()
            .ok_or_else(|| KernelError::Construction("unital flag without unit".into()))?;
        for w in &basis {
            let e = Element::basis(w.clone());
            if multiply(alg, &unit, &e) != e || multiply(alg, &e, &unit) != e {
                return Err(KernelError::Construction(format!(
                    "unit law fails on {}",
                    alg.format_word(w)
                )));
            }
        }
    }

    Ok(())
}

/// Scalar-formatted term list, used when reports need an element without an
/// algebra handle (pure word Display is algebra-specific).
pub fn raw_terms<W: Word>(e: &Element<W>) -> Vec<(String, String)> {
    e.iter()
        .map(|(w, c)| (fmt_scalar(c), format!("{:?}", w)))
        .collect()
}

/// Convenience: scalar multiple of the unit, or zero for non-unital algebras.
pub fn scalar_element<A: Superalgebra + ?Sized>(alg: &A, s: &Scalar) -> Element<A::W> {
    match alg.unit_word() {
        Some(w) => Element::single(w, s.clone()),
        None => Element::zero(),
    }
}
