//! Homogeneous linear operators given by their action on basis words.

use std::sync::Arc;

use crate::algebra::{multiply, Superalgebra};
use crate::element::{Element, Word};
use crate::error::{KernelError, Result};
use crate::scalar::{parity_sign, Scalar};

type Action<W> = Arc<dyn Fn(&W) -> Element<W> + Send + Sync>;

/// A linear operator with a declared superdegree shift (whose parity enters
/// all Koszul signs) and an optional weight shift.
impl<W: Word> std::fmt::Debug for LinOp<W> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinOp")
            .field("label", &self.label)
            .field("superdegree", &self.superdegree)
            .field("weight_shift", &self.weight_shift)
            .finish()
    }
}

#[derive(Clone)]
pub struct LinOp<W: Word> {
    label: String,
    superdegree: i64,
    weight_shift: Option<Scalar>,
    /// Upper bound on how much one application can raise a word's cap
    /// budget; sweeps use it to keep guarded tuples truncation-free.
    budget_raise: i64,
    action: Action<W>,
}

impl<W: Word> LinOp<W> {
    pub fn new<F>(label: impl Into<String>, superdegree: i64, action: F) -> Self
    where
        F: Fn(&W) -> Element<W> + Send + Sync + 'static,
    {
        LinOp {
            label: label.into(),
            superdegree,
            weight_shift: None,
            budget_raise: 0,
            action: Arc::new(action),
        }
    }

    pub fn with_weight_shift(mut self, shift: Scalar) -> Self {
        self.weight_shift = Some(shift);
        self
    }

    pub fn with_budget_raise(mut self, raise: i64) -> Self {
        self.budget_raise = raise;
        self
    }

    pub fn budget_raise(&self) -> i64 {
        self.budget_raise
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn superdegree(&self) -> i64 {
        self.superdegree
    }

    pub fn is_odd(&self) -> bool {
        crate::scalar::is_odd(self.superdegree)
    }

    pub fn weight_shift(&self) -> Option<&Scalar> {
        self.weight_shift.as_ref()
    }

    /// Raw action on a single word.
    pub fn apply_word(&self, w: &W) -> Element<W> {
        (self.action)(w)
    }

    /// Linear extension to elements, without consistency checks.
    pub fn apply(&self, e: &Element<W>) -> Element<W> {
        let mut out = Element::zero();
        for (w, c) in e.iter() {
            out.add_scaled(&(self.action)(w), c);
        }
        out
    }

    /// Linear extension that verifies the declared superdegree shift on every
    /// term of the image.
    pub fn apply_checked(&self, e: &Element<W>) -> Result<Element<W>> {
        let mut out = Element::zero();
        for (w, c) in e.iter() {
            let img = (self.action)(w);
            let expected = w.superdegree() + self.superdegree;
            for iw in img.words() {
                if iw.superdegree() != expected {
                    return Err(KernelError::ShiftViolation {
                        label: self.label.clone(),
                        word: format!("{:?}", w),
                        expected,
                        found: iw.superdegree(),
                    });
                }
            }
            out.add_scaled(&img, c);
        }
        Ok(out)
    }

    pub fn zero(label: impl Into<String>, superdegree: i64) -> Self {
        Self::new(label, superdegree, |_| Element::zero())
    }

    pub fn identity(label: impl Into<String>) -> Self {
        Self::new(label, 0, |w: &W| Element::basis(w.clone()))
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        let f = self.action.clone();
        let g = other.action.clone();
        let wshift = match (&self.weight_shift, &other.weight_shift) {
            (Some(a), Some(b)) => Some(a.clone() + b.clone()),
            _ => None,
        };
        let mut op = LinOp::new(
            format!("{}∘{}", self.label, other.label),
            self.superdegree + other.superdegree,
            move |w: &W| {
                let mid = g(w);
                let mut out = Element::zero();
                for (u, c) in mid.iter() {
                    out.add_scaled(&f(u), c);
                }
                out
            },
        );
        op.weight_shift = wshift;
        op.budget_raise = self.budget_raise + other.budget_raise;
        op
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.superdegree != other.superdegree {
            return Err(KernelError::Construction(format!(
                "cannot add operators of superdegrees {} and {}",
                self.superdegree, other.superdegree
            )));
        }
        let f = self.action.clone();
        let g = other.action.clone();
        let wshift = match (&self.weight_shift, &other.weight_shift) {
            (Some(a), Some(b)) if a == b => Some(a.clone()),
            _ => None,
        };
        let raise = self.budget_raise.max(other.budget_raise);
        let mut op = LinOp::new(
            format!("{}+{}", self.label, other.label),
            self.superdegree,
            move |w: &W| f(w).add(&g(w)),
        );
        op.weight_shift = wshift;
        op.budget_raise = raise;
        Ok(op)
    }

    pub fn scale(&self, s: Scalar) -> Self {
        let f = self.action.clone();
        let mut op = LinOp::new(
            format!("{}·{}", crate::scalar::fmt_scalar(&s), self.label),
            self.superdegree,
            move |w: &W| f(w).scale(&s),
        );
        op.weight_shift = self.weight_shift.clone();
        op.budget_raise = self.budget_raise;
        op
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Supercommutator `[A, B] = AB - (-1)^{|A||B|} BA`.
    pub fn supercommutator(&self, other: &Self) -> Self {
        let ab = self.compose(other);
        let ba = other
            .compose(self)
            .scale(-parity_sign(self.superdegree * other.superdegree));
        let mut op = ab
            .add(&ba)
            .expect("composites share the same superdegree shift");
        op.label = format!("[{},{}]", self.label, other.label);
        op
    }
}

/// Left multiplication by a fixed element.
pub fn left_mult<A>(alg: &Arc<A>, e: Element<A::W>, label: impl Into<String>) -> LinOp<A::W>
where
    A: Superalgebra + 'static,
{
    let deg = e
        .superdegree()
        .expect("left multiplication requires a homogeneous multiplier");
    let raise = e.max_budget();
    let alg = Arc::clone(alg);
    LinOp::new(label, deg, move |w: &A::W| {
        multiply(&*alg, &e, &Element::basis(w.clone()))
    })
    .with_budget_raise(raise)
}

/// Operator equality on the swept basis (budget-guarded by `margin`: words
/// whose budget exceeds `cap - margin` are skipped so the composites being
/// compared never overflow the truncation). Returns the first witness word
/// where the two differ.
pub fn ops_equal_on_basis<A: Superalgebra + ?Sized>(
    alg: &A,
    lhs: &LinOp<A::W>,
    rhs: &LinOp<A::W>,
    margin: i64,
) -> Option<(A::W, Element<A::W>, Element<A::W>)> {
    let cap = alg.budget_cap();
    for w in alg.basis() {
        if let Some(cap) = cap {
            if w.budget() > cap - margin {
                continue;
            }
        }
        let l = lhs.apply_word(&w);
        let r = rhs.apply_word(&w);
        if l != r {
            return Some((w, l, r));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
    struct P(u32); // x^n

    impl Word for P {
        fn superdegree(&self) -> i64 {
            0
        }
    }

    fn ddx() -> LinOp<P> {
        LinOp::new("d/dx", 0, |w: &P| {
            if w.0 == 0 {
                Element::zero()
            } else {
                Element::single(P(w.0 - 1), crate::scalar::int(w.0 as i64))
            }
        })
    }

    #[test]
    fn composition_and_commutator() {
        let d = ddx();
        let d2 = d.compose(&d);
        assert_eq!(
            d2.apply(&Element::basis(P(3))),
            Element::single(P(1), crate::scalar::int(6))
        );
        let bracket = d.supercommutator(&d);
        assert!(bracket.apply(&Element::basis(P(4))).is_zero());
    }

    #[test]
    fn shift_check_catches_bad_declarations() {
        let bogus = LinOp::new("bogus", 5, |w: &P| Element::basis(w.clone()));
        let err = bogus.apply_checked(&Element::basis(P(1))).unwrap_err();
        assert!(matches!(err, KernelError::ShiftViolation { .. }));
    }
}
