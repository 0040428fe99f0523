//! The Φ-form engine: recursively defined multilinear forms whose vanishing
//! classifies operator order, the classical tensor-product forms they agree
//! with on supercommutative associative algebras, and the order-composition
//! laws.
//!
//! The recursion is
//!
//! ```text
//! Φ¹(a)            = Δ(a)                      (or Δ(a) - Δ(1)a, adjusted)
//! Φ^{r+1}(a₁..a_{r+1}) = Φ^r(a₁,..,a_r a_{r+1})
//!                      - Φ^r(a₁,..,a_r) a_{r+1}
//!                      - (-1)^{|a_r|(|a₁|+..+|a_{r-1}|+|Δ|)} a_r Φ^r(a₁,..,a_{r-1},a_{r+1})
//! ```
//!
//! and an operator has order ≤ r exactly when `Φ^{r+1}` vanishes identically.
//! Sweeps are budget-guarded: tuples whose products (plus the operator's own
//! degree raise) would overflow a truncation cap are skipped, so every
//! asserted vanishing is truncation-free exact.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::algebra::{multiply, Superalgebra};
use crate::element::{Element, Word};
use crate::error::{KernelError, Result};
use crate::linop::LinOp;
use crate::report::{OrderReport, OrderWitness};
use crate::scalar::{self, parity_sign, Scalar};

/// Single-sign mutations of the Φ recursion and the bracket prefactor.
/// Only the verification harness uses anything but `None`; the mutation
/// acceptance check asserts each flip is caught by the identity suites.
#[doc(hidden)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SignFlip {
    None,
    /// Sign of the `Φ^r(a₁..a_r) a_{r+1}` term.
    PhiMiddle,
    /// Sign of the `a_r Φ^r(a₁..a_{r-1},a_{r+1})` term.
    PhiLast,
    /// Drop `|Δ|` from the Koszul exponent.
    PhiDropDelta,
    /// Ignore the Koszul exponent entirely.
    PhiDropSign,
    /// Flip the `(-1)^{|a|}` prefactor of the generalized BV bracket.
    BracketPrefactor,
}

fn homogeneous_degree<W: Word>(e: &Element<W>, index: usize) -> Result<i64> {
    e.superdegree().ok_or_else(|| KernelError::NonHomogeneous {
        index,
        detail: "argument mixes superdegrees; split it into homogeneous parts".into(),
    })
}

fn koszul_sign(flip: SignFlip, last_deg: i64, head_sum: i64, delta_deg: i64) -> Scalar {
    match flip {
        SignFlip::PhiDropSign => scalar::one(),
        SignFlip::PhiDropDelta => parity_sign(last_deg * head_sum),
        _ => parity_sign(last_deg * (head_sum + delta_deg)),
    }
}

fn term_signs(flip: SignFlip) -> (Scalar, Scalar) {
    let minus = -scalar::one();
    match flip {
        SignFlip::PhiMiddle => (scalar::one(), minus),
        SignFlip::PhiLast => (minus, scalar::one()),
        _ => (minus.clone(), minus),
    }
}

pub(crate) fn phi2_term_signs(flip: SignFlip) -> (Scalar, Scalar) {
    term_signs(flip)
}

pub(crate) fn phi2_koszul_sign(flip: SignFlip, a_parity: i64, delta_deg: i64) -> Scalar {
    koszul_sign(flip, a_parity, 0, delta_deg)
}

pub(crate) fn phi_form_impl<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    args: &[Element<A::W>],
    unital_adjust: bool,
    flip: SignFlip,
) -> Result<Element<A::W>> {
    if args.is_empty() {
        return Err(KernelError::Precondition(
            "Φ-form needs at least one argument".into(),
        ));
    }
    for (i, a) in args.iter().enumerate() {
        homogeneous_degree(a, i)?;
    }
    if unital_adjust && alg.unit_word().is_none() {
        return Err(KernelError::Precondition(
            "unital adjustment requires a unital algebra".into(),
        ));
    }
    Ok(phi_rec(alg, delta, args, unital_adjust, flip))
}

fn phi_rec<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    args: &[Element<A::W>],
    unital_adjust: bool,
    flip: SignFlip,
) -> Element<A::W> {
    if args.len() == 1 {
        let mut v = delta.apply(&args[0]);
        if unital_adjust {
            let unit = alg.unit().expect("checked unital");
            v = v.sub(&multiply(alg, &delta.apply(&unit), &args[0]));
        }
        return v;
    }
    let (last, init) = args.split_last().unwrap();
    let (prev, head) = init.split_last().unwrap();

    let mut merged: Vec<Element<A::W>> = head.to_vec();
    merged.push(multiply(alg, prev, last));
    let t1 = phi_rec(alg, delta, &merged, unital_adjust, flip);

    let t2 = multiply(alg, &phi_rec(alg, delta, init, unital_adjust, flip), last);

    let mut swapped: Vec<Element<A::W>> = head.to_vec();
    swapped.push(last.clone());
    let t3 = multiply(
        alg,
        prev,
        &phi_rec(alg, delta, &swapped, unital_adjust, flip),
    );

    let head_sum: i64 = head.iter().map(|a| a.superdegree().unwrap_or(0)).sum();
    let last_deg = prev.superdegree().unwrap_or(0);
    let sign = koszul_sign(flip, last_deg, head_sum, delta.superdegree());
    let (s2, s3) = term_signs(flip);

    let mut out = t1;
    out.add_scaled(&t2, &s2);
    out.add_scaled(&t3, &(s3 * sign));
    out
}

/// `Φ_Δ^r(a₁,…,a_r)` for homogeneous arguments. With `unital_adjust` the
/// base case becomes `Δ(a) - Δ(1)a`, which classifies left multiplications
/// as order-zero operators.
pub fn phi_form<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    args: &[Element<A::W>],
    unital_adjust: bool,
) -> Result<Element<A::W>> {
    phi_form_impl(alg, delta, args, unital_adjust, SignFlip::None)
}

/// Convenience wrapper accepting non-homogeneous arguments: decomposes each
/// argument into homogeneous parts and sums multilinearly.
pub fn phi_form_any<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    args: &[Element<A::W>],
    unital_adjust: bool,
) -> Result<Element<A::W>> {
    let mut out = Element::zero();
    let mut current: Vec<Element<A::W>> = Vec::with_capacity(args.len());
    expand_multilinear(alg, delta, args, unital_adjust, &mut current, &mut out)?;
    Ok(out)
}

fn expand_multilinear<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    rest: &[Element<A::W>],
    unital_adjust: bool,
    current: &mut Vec<Element<A::W>>,
    out: &mut Element<A::W>,
) -> Result<()> {
    match rest.split_first() {
        None => {
            let v = phi_form(alg, delta, current, unital_adjust)?;
            *out = out.add(&v);
            Ok(())
        }
        Some((first, tail)) => {
            for (_, part) in first.homogeneous_components() {
                current.push(part);
                expand_multilinear(alg, delta, tail, unital_adjust, current, out)?;
                current.pop();
            }
            Ok(())
        }
    }
}

/// Koszul's classical forms `m ∘ (Δ ⊗ id) λ^r` on a supercommutative
/// associative algebra, expanded at word level in `A ⊗ A` with the tensor
/// Koszul sign. Serves as the independent oracle for the recursion.
pub fn phi_form_koszul<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    args: &[Element<A::W>],
) -> Result<Element<A::W>> {
    if !alg.flags().is_classical() {
        return Err(KernelError::NotClassical(alg.name().to_string()));
    }
    let unit = alg.unit_word().ok_or_else(|| {
        KernelError::Precondition("Koszul forms need a unital algebra".into())
    })?;
    if args.is_empty() {
        return Err(KernelError::Precondition(
            "Φ-form needs at least one argument".into(),
        ));
    }

    // tensor accumulator: (left word, right word) -> coefficient
    let mut tensor: HashMap<(A::W, A::W), Scalar> = HashMap::new();
    tensor.insert((unit.clone(), unit.clone()), scalar::one());

    for a in args {
        let mut next: HashMap<(A::W, A::W), Scalar> = HashMap::new();
        for ((lu, ru), c) in &tensor {
            // multiply by (a ⊗ 1 - 1 ⊗ a) on the right
            for (aw, ac) in a.iter() {
                // (lu ⊗ ru)(aw ⊗ 1) = (-1)^{|ru||aw|} lu·aw ⊗ ru
                let sign = parity_sign(ru.superdegree() * aw.superdegree());
                let lprod = alg.mul_words(lu, aw);
                for (lw, lc) in lprod.iter() {
                    let coeff = c.clone() * ac * lc * sign.clone();
                    add_tensor(&mut next, lw.clone(), ru.clone(), coeff);
                }
                // -(lu ⊗ ru)(1 ⊗ aw) = - lu ⊗ ru·aw
                let rprod = alg.mul_words(ru, aw);
                for (rw, rc) in rprod.iter() {
                    let coeff = -(c.clone() * ac * rc);
                    add_tensor(&mut next, lu.clone(), rw.clone(), coeff);
                }
            }
        }
        tensor = next;
    }

    let mut out = Element::zero();
    for ((lw, rw), c) in tensor {
        let dl = delta.apply_word(&lw);
        let prod = multiply(alg, &dl, &Element::basis(rw));
        out.add_scaled(&prod, &c);
    }
    Ok(out)
}

fn add_tensor<W: Word>(t: &mut HashMap<(W, W), Scalar>, l: W, r: W, c: Scalar) {
    use num_traits::Zero;
    use std::collections::hash_map::Entry;
    if c.is_zero() {
        return;
    }
    match t.entry((l, r)) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// The explicit fifteen-term `Φ⁴` formula for classical algebras: Δ applied
/// to every subset of the four entries, each term signed by `(-1)^{4-k}` and
/// the permutation parity of the symbols `Δ, a, b, c, d`.
pub fn phi4_explicit<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    a: &Element<A::W>,
    b: &Element<A::W>,
    c: &Element<A::W>,
    d: &Element<A::W>,
) -> Result<Element<A::W>> {
    if !alg.flags().is_classical() {
        return Err(KernelError::NotClassical(alg.name().to_string()));
    }
    let da = homogeneous_degree(a, 0)?;
    let db = homogeneous_degree(b, 1)?;
    let dc = homogeneous_degree(c, 2)?;
    homogeneous_degree(d, 3)?;
    let dd_op = delta.superdegree();

    let mul = |x: &Element<A::W>, y: &Element<A::W>| multiply(alg, x, y);
    let dl = |x: &Element<A::W>| delta.apply(x);

    let ab = mul(a, b);
    let ac = mul(a, c);
    let ad = mul(a, d);
    let bc = mul(b, c);
    let bd = mul(b, d);
    let cd = mul(c, d);
    let abc = mul(&ab, c);
    let abd = mul(&ab, d);
    let acd = mul(&ac, d);
    let bcd = mul(&bc, d);
    let abcd = mul(&abc, d);

    let mut out = dl(&abcd);
    out.add_scaled(&mul(a, &dl(&bcd)), &-parity_sign(dd_op * da));
    out.add_scaled(&mul(b, &dl(&acd)), &-parity_sign(db * (da + dd_op)));
    out.add_scaled(&mul(c, &dl(&abd)), &-parity_sign(dc * (da + db + dd_op)));
    out.add_scaled(&mul(&dl(&abc), d), &-scalar::one());

    out.add_scaled(&mul(&ab, &dl(&cd)), &parity_sign(dd_op * (da + db)));
    out.add_scaled(&mul(&mul(a, &dl(&bc)), d), &parity_sign(dd_op * da));
    out.add_scaled(&mul(&mul(b, &dl(&ac)), d), &parity_sign(db * (da + dd_op)));
    out.add_scaled(&mul(&ac, &dl(&bd)), &parity_sign(dc * (dd_op + db) + dd_op * da));
    out.add_scaled(&mul(&bc, &dl(&ad)), &parity_sign((db + dc) * (dd_op + da)));
    out.add_scaled(&mul(&dl(&ab), &cd), &scalar::one());

    out.add_scaled(&mul(&dl(a), &bcd), &-scalar::one());
    out.add_scaled(&mul(&mul(a, &dl(b)), &cd), &-parity_sign(dd_op * da));
    out.add_scaled(&mul(&mul(&ab, &dl(c)), d), &-parity_sign(dd_op * (da + db)));
    out.add_scaled(&mul(&abc, &dl(d)), &-parity_sign(dd_op * (da + db + dc)));
    Ok(out)
}

/// Memoized sweep machinery: fixes a tuple prefix and evaluates
/// `Φ^{d}(prefix, ·)` as a cached function of the final word.
struct PhiSweep<'a, A: Superalgebra + ?Sized> {
    alg: &'a A,
    delta: &'a LinOp<A::W>,
    unital_adjust: bool,
    flip: SignFlip,
    levels: Vec<Level<A::W>>,
}

struct Level<W: Word> {
    fixed_word: Option<W>,
    fixed_phi: Element<W>,
    sign: Scalar,
    memo: RefCell<HashMap<W, Element<W>>>,
}

impl<W: Word> Level<W> {
    fn empty() -> Self {
        Level {
            fixed_word: None,
            fixed_phi: Element::zero(),
            sign: scalar::one(),
            memo: RefCell::new(HashMap::new()),
        }
    }
}

impl<'a, A: Superalgebra + ?Sized> PhiSweep<'a, A> {
    fn new(alg: &'a A, delta: &'a LinOp<A::W>, unital_adjust: bool, flip: SignFlip, r: usize) -> Self {
        PhiSweep {
            alg,
            delta,
            unital_adjust,
            flip,
            levels: (0..r).map(|_| Level::empty()).collect(),
        }
    }

    /// Φ^{d+1}(a₁..a_d, w) with the current prefix (levels 1..=d fixed).
    fn eval(&self, d: usize, w: &A::W) -> Element<A::W> {
        if let Some(hit) = self.levels[d].memo.borrow().get(w) {
            return hit.clone();
        }
        let value = if d == 0 {
            let base = self.delta.apply_word(w);
            if self.unital_adjust {
                let unit = self.alg.unit().expect("unital checked by caller");
                let du = self.delta.apply(&unit);
                base.sub(&multiply(self.alg, &du, &Element::basis(w.clone())))
            } else {
                base
            }
        } else {
            let level = &self.levels[d];
            let a = level.fixed_word.as_ref().expect("prefix fixed");
            let prod = self.alg.mul_words(a, w);
            let t1 = self.eval_elem(d - 1, &prod);
            let t2 = multiply(self.alg, &level.fixed_phi, &Element::basis(w.clone()));
            let t3 = multiply(
                self.alg,
                &Element::basis(a.clone()),
                &self.eval(d - 1, w),
            );
            let (s2, s3) = term_signs(self.flip);
            let mut out = t1;
            out.add_scaled(&t2, &s2);
            out.add_scaled(&t3, &(s3 * level.sign.clone()));
            out
        };
        self.levels[d]
            .memo
            .borrow_mut()
            .insert(w.clone(), value.clone());
        value
    }

    fn eval_elem(&self, d: usize, e: &Element<A::W>) -> Element<A::W> {
        let mut out = Element::zero();
        for (w, c) in e.iter() {
            out.add_scaled(&self.eval(d, w), c);
        }
        out
    }

    fn fix(&mut self, d: usize, word: A::W, head_sum: i64) {
        let phi = self.eval(d - 1, &word);
        let sign = koszul_sign(
            self.flip,
            word.superdegree(),
            head_sum,
            self.delta.superdegree(),
        );
        let level = &mut self.levels[d];
        level.fixed_word = Some(word);
        level.fixed_phi = phi;
        level.sign = sign;
        level.memo.get_mut().clear();
    }
}

/// A nonvanishing tuple and the value the form takes on it.
pub type PhiWitness<W> = Option<(Vec<W>, Element<W>)>;

/// Sweeps `Φ^r` over all `r`-tuples from `domain` (budget-guarded) and
/// returns the first nonvanishing tuple with its value, or `None` if the
/// form vanishes identically there.
pub fn phi_witness<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    r: usize,
    domain: &[A::W],
    unital_adjust: bool,
) -> Result<PhiWitness<A::W>> {
    phi_witness_impl(alg, delta, r, domain, unital_adjust, SignFlip::None)
}

pub(crate) fn phi_witness_impl<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    r: usize,
    domain: &[A::W],
    unital_adjust: bool,
    flip: SignFlip,
) -> Result<PhiWitness<A::W>> {
    if r == 0 {
        return Err(KernelError::Precondition("Φ⁰ is not defined".into()));
    }
    if unital_adjust && alg.unit_word().is_none() {
        return Err(KernelError::Precondition(
            "unital adjustment requires a unital algebra".into(),
        ));
    }
    let raise = delta.budget_raise().max(0);
    let cap = alg.budget_cap();
    let min_budget = domain.iter().map(|w| w.budget()).min().unwrap_or(0).min(0);
    let mut sweep = PhiSweep::new(alg, delta, unital_adjust, flip, r);
    let mut prefix: Vec<A::W> = Vec::with_capacity(r);
    let found = sweep_rec(
        &mut sweep,
        domain,
        r,
        cap,
        raise,
        min_budget,
        &mut prefix,
        0,
        0,
    );
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn sweep_rec<'a, A: Superalgebra + ?Sized>(
    sweep: &mut PhiSweep<'a, A>,
    domain: &[A::W],
    r: usize,
    cap: Option<i64>,
    raise: i64,
    min_budget: i64,
    prefix: &mut Vec<A::W>,
    budget_used: i64,
    deg_sum: i64,
) -> PhiWitness<A::W> {
    let depth = prefix.len();
    if depth == r - 1 {
        for w in domain {
            if let Some(cap) = cap {
                if budget_used + w.budget() + raise > cap {
                    continue;
                }
            }
            let v = sweep.eval(r - 1, w);
            if !v.is_zero() {
                let mut tuple = prefix.clone();
                tuple.push(w.clone());
                return Some((tuple, v));
            }
        }
        return None;
    }
    // prune with the minimal possible completion of the remaining slots
    let slots_after = (r - depth - 1) as i64;
    for w in domain {
        if let Some(cap) = cap {
            if budget_used + w.budget() + raise + min_budget * slots_after > cap {
                continue;
            }
        }
        sweep.fix(depth + 1, w.clone(), deg_sum);
        prefix.push(w.clone());
        let found = sweep_rec(
            sweep,
            domain,
            r,
            cap,
            raise,
            min_budget,
            prefix,
            budget_used + w.budget(),
            deg_sum + w.superdegree(),
        );
        prefix.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Classifies the least `r` with `Φ^{r+1} ≡ 0` on the domain, storing one
/// witness tuple for each nonvanishing form below it.
pub fn classify_order<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    r_max: usize,
    domain: &[A::W],
    unital_adjust: bool,
) -> Result<OrderReport> {
    if r_max < 1 {
        return Err(KernelError::Precondition("r_max must be at least 1".into()));
    }
    let domain_desc = format!(
        "{} basis words, tuples budget-guarded (cap {:?}, op raise {})",
        domain.len(),
        alg.budget_cap(),
        delta.budget_raise().max(0)
    );
    let mut witnesses = Vec::new();
    for r in 0..=r_max {
        match phi_witness(alg, delta, r + 1, domain, unital_adjust)? {
            None => {
                return Ok(OrderReport {
                    label: delta.label().to_string(),
                    r_max,
                    domain: domain_desc,
                    order: Some(r),
                    witnesses,
                });
            }
            Some((tuple, value)) => {
                witnesses.push(OrderWitness {
                    r: r + 1,
                    args: tuple.iter().map(|w| alg.format_word(w)).collect(),
                    value: alg.format_element(&value),
                });
            }
        }
    }
    Ok(OrderReport {
        label: delta.label().to_string(),
        r_max,
        domain: domain_desc,
        order: None,
        witnesses,
    })
}

/// Observed order of composites and supercommutators of classified
/// operators, against the subspace laws `D_r D_s ⊆ D_{r+s}` and
/// `[D_r, D_s] ⊆ D_{r+s-1}`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct OrderLawReport {
    pub left: String,
    pub right: String,
    pub claimed: (usize, usize),
    pub composite_order: Option<usize>,
    pub composite_bound: usize,
    pub bracket_order: Option<usize>,
    /// `None` encodes the bound "order ≤ -1", i.e. the bracket must vanish.
    pub bracket_bound: Option<usize>,
    pub pass: bool,
}

pub fn check_order_laws<A: Superalgebra + ?Sized>(
    alg: &A,
    ops: &[(LinOp<A::W>, usize)],
    domain: &[A::W],
) -> Result<Vec<OrderLawReport>> {
    let unital_adjust = alg.flags().unital;
    let mut out = Vec::new();
    for (a, ra) in ops {
        // validate the claimed order first
        let cls = classify_order(alg, a, (*ra).max(1), domain, unital_adjust)?;
        if cls.order.map(|o| o > *ra).unwrap_or(true) {
            return Err(KernelError::Precondition(format!(
                "operator {} claimed order {} but classified {:?}",
                a.label(),
                ra,
                cls.order
            )));
        }
    }
    for (a, ra) in ops {
        for (b, rb) in ops {
            let comp = a.compose(b);
            let comp_bound = ra + rb;
            let comp_cls = classify_order(alg, &comp, comp_bound.max(1), domain, unital_adjust)?;

            let br = a.supercommutator(b);
            let (bracket_order, bracket_bound, bracket_ok) = if ra + rb == 0 {
                // bound is "≤ -1": the bracket must be the zero operator
                let vanishes = domain.iter().all(|w| br.apply_word(w).is_zero());
                (if vanishes { Some(0) } else { None }, None, vanishes)
            } else {
                let bound = ra + rb - 1;
                let cls = classify_order(alg, &br, bound.max(1), domain, unital_adjust)?;
                let ok = cls.order.map(|o| o <= bound).unwrap_or(false);
                (cls.order, Some(bound), ok)
            };

            let pass = comp_cls.order.map(|o| o <= comp_bound).unwrap_or(false) && bracket_ok;
            out.push(OrderLawReport {
                left: a.label().to_string(),
                right: b.label().to_string(),
                claimed: (*ra, *rb),
                composite_order: comp_cls.order,
                composite_bound: comp_bound,
                bracket_order,
                bracket_bound,
                pass,
            });
        }
    }
    Ok(out)
}

#[doc(hidden)]
pub mod mutation {
    //! Flipped-sign evaluators for the mutation-sensitivity harness.
    pub use super::SignFlip;
    use super::*;

    pub const ALL_PHI_FLIPS: [SignFlip; 4] = [
        SignFlip::PhiMiddle,
        SignFlip::PhiLast,
        SignFlip::PhiDropDelta,
        SignFlip::PhiDropSign,
    ];

    pub fn phi_form_flipped<A: Superalgebra + ?Sized>(
        alg: &A,
        delta: &LinOp<A::W>,
        args: &[Element<A::W>],
        unital_adjust: bool,
        flip: SignFlip,
    ) -> Result<Element<A::W>> {
        phi_form_impl(alg, delta, args, unital_adjust, flip)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{classical_bv_delta, make_polynomial_superalgebra, partial_even};

    #[test]
    fn derivation_has_vanishing_phi2() {
        let alg = make_polynomial_superalgebra(1, 0, 6).unwrap();
        let d = partial_even(&alg, 0);
        let x = alg.even_gen(0);
        let x2 = alg.monomial(&[2], &[]);
        let phi2 = phi_form(&*alg, &d, &[x, x2], false).unwrap();
        assert!(phi2.is_zero());
    }

    #[test]
    fn second_derivative_phi2_is_two() {
        let alg = make_polynomial_superalgebra(1, 0, 6).unwrap();
        let d = partial_even(&alg, 0);
        let d2 = d.compose(&d);
        let x = alg.even_gen(0);
        let phi2 = phi_form(&*alg, &d2, &[x.clone(), x], false).unwrap();
        assert_eq!(phi2, crate::algebra::scalar_element(&*alg, &scalar::int(2)));
    }

    #[test]
    fn left_multiplication_is_order_zero_adjusted() {
        let alg = make_polynomial_superalgebra(1, 0, 6).unwrap();
        let x = alg.even_gen(0);
        let mult = crate::linop::left_mult(&alg, x.clone(), "x·");
        for w in alg.basis() {
            let a = Element::basis(w);
            let phi1 = phi_form(&*alg, &mult, &[a], true).unwrap();
            assert!(phi1.is_zero());
        }
    }

    #[test]
    fn koszul_matches_recursive_on_small_case() {
        let alg = make_polynomial_superalgebra(1, 0, 6).unwrap();
        let d = partial_even(&alg, 0);
        let d2 = d.compose(&d);
        let x = alg.even_gen(0);
        // Φ¹ with Δ = d/dx at x: Δ(x) - Δ(1)x = 1
        let k1 = phi_form_koszul(&*alg, &d, &[x.clone()]).unwrap();
        assert_eq!(k1, alg.unit().unwrap());
        // Φ² with d²/dx² at (x, x) = 2, both routes
        let k2 = phi_form_koszul(&*alg, &d2, &[x.clone(), x.clone()]).unwrap();
        let r2 = phi_form(&*alg, &d2, &[x.clone(), x.clone()], true).unwrap();
        assert_eq!(k2, r2);
        // Φ³ of an order-2 operator vanishes
        let k3 = phi_form_koszul(&*alg, &d2, &[x.clone(), x.clone(), x]).unwrap();
        assert!(k3.is_zero());
    }

    #[test]
    fn phi4_explicit_on_low_order_operators() {
        let alg = make_polynomial_superalgebra(1, 0, 8).unwrap();
        let d = partial_even(&alg, 0);
        let d2 = d.compose(&d);
        let d3 = d2.compose(&d);
        let x = alg.even_gen(0);
        for op in [&d, &d2, &d3] {
            let v = phi4_explicit(&*alg, op, &x, &x, &x, &x).unwrap();
            let r = phi_form(&*alg, op, &[x.clone(), x.clone(), x.clone(), x.clone()], false)
                .unwrap();
            assert_eq!(v, r);
            // order ≤ 3 in all three cases, so Φ⁴ ≡ 0
            assert!(v.is_zero());
        }
        // d⁴/dx⁴ has a genuinely nonzero Φ⁴
        let d4 = d3.compose(&d);
        let v = phi4_explicit(&*alg, &d4, &x, &x, &x, &x).unwrap();
        assert_eq!(v, crate::algebra::scalar_element(&*alg, &scalar::int(24)));
    }

    #[test]
    fn classify_orders_on_q_x() {
        let alg = make_polynomial_superalgebra(1, 0, 8).unwrap();
        let basis = alg.basis();
        let d = partial_even(&alg, 0);
        let rep = classify_order(&*alg, &d, 3, &basis, true).unwrap();
        assert_eq!(rep.order, Some(1));

        let d2 = d.compose(&d);
        let rep = classify_order(&*alg, &d2, 3, &basis, true).unwrap();
        assert_eq!(rep.order, Some(2));
        let w2 = &rep.witnesses[rep.witnesses.len() - 1];
        assert_eq!(w2.args, vec!["x1", "x1"]);
        assert_eq!(w2.value, "2 * 1");

        let x = alg.even_gen(0);
        let mult = crate::linop::left_mult(&alg, x, "x·");
        let rep = classify_order(&*alg, &mult, 2, &basis, true).unwrap();
        assert_eq!(rep.order, Some(0));
    }

    #[test]
    fn classify_rejects_zero_r_max() {
        let alg = make_polynomial_superalgebra(1, 0, 4).unwrap();
        let d = partial_even(&alg, 0);
        let err = classify_order(&*alg, &d, 0, &alg.basis(), false).unwrap_err();
        assert!(matches!(err, KernelError::Precondition(_)));
    }

    #[test]
    fn order_monotonicity_after_vanishing() {
        let alg = make_polynomial_superalgebra(1, 0, 6).unwrap();
        let basis = alg.basis();
        let d = partial_even(&alg, 0);
        let d2 = d.compose(&d);
        // Φ³ ≡ 0 and Φ⁴ ≡ 0 as well
        assert!(phi_witness(&*alg, &d2, 3, &basis, false).unwrap().is_none());
        assert!(phi_witness(&*alg, &d2, 4, &basis, false).unwrap().is_none());
    }

    #[test]
    fn nesting_statement_unrolls() {
        // Φ^{r+1}(a₁..a_{r+1}) is the deviation of Φ^r(a₁..a_{r-1}, ·) from
        // being a derivation; assert the unrolled statement for r = 1, 2.
        let alg = make_polynomial_superalgebra(2, 2, 6).unwrap();
        let mut rng = crate::random::SuiteRng::new(5);
        let delta = crate::random::random_linop(&alg, 11, -1, false, "rand");
        for _ in 0..10 {
            let a = crate::random::random_homogeneous(&*alg, 2, rng.rng());
            let b = crate::random::random_homogeneous(&*alg, 2, rng.rng());
            let c = crate::random::random_homogeneous(&*alg, 2, rng.rng());
            let da = a.superdegree().unwrap();
            let db = b.superdegree().unwrap();

            // r = 1: Φ²(a,b) = Δ(ab) - Δ(a)b - (-1)^{|a||Δ|} a Δ(b)
            let lhs = phi_form(&*alg, &delta, &[a.clone(), b.clone()], false).unwrap();
            let mut rhs = delta.apply(&multiply(&*alg, &a, &b));
            rhs.add_scaled(&multiply(&*alg, &delta.apply(&a), &b), &-scalar::one());
            rhs.add_scaled(
                &multiply(&*alg, &a, &delta.apply(&b)),
                &-parity_sign(da * delta.superdegree()),
            );
            assert_eq!(lhs, rhs);

            // r = 2: T = Φ²(a,·) has operator degree |Δ|+|a|;
            // Φ³(a,b,c) = T(bc) - T(b)c - (-1)^{|b|(|a|+|Δ|)} b T(c)
            let t = |x: &Element<_>| phi_form(&*alg, &delta, &[a.clone(), x.clone()], false).unwrap();
            let lhs = phi_form(&*alg, &delta, &[a.clone(), b.clone(), c.clone()], false).unwrap();
            let mut rhs = t(&multiply(&*alg, &b, &c));
            rhs.add_scaled(&multiply(&*alg, &t(&b), &c), &-scalar::one());
            rhs.add_scaled(
                &multiply(&*alg, &b, &t(&c)),
                &-parity_sign(db * (da + delta.superdegree())),
            );
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn order_laws_on_q_x() {
        let alg = make_polynomial_superalgebra(1, 0, 8).unwrap();
        let basis = alg.basis();
        let d = partial_even(&alg, 0);
        let d2 = d.compose(&d).relabel("d²/dx²");
        let mult = crate::linop::left_mult(&alg, alg.even_gen(0), "x·");
        let ops = vec![(d, 1usize), (d2, 2usize), (mult, 0usize)];
        let reports = check_order_laws(&*alg, &ops, &basis).unwrap();
        assert_eq!(reports.len(), 9);
        for rep in &reports {
            assert!(rep.pass, "{rep:#?}");
        }
        // the bracket [d/dx, x·] is the identity, order 0 ≤ 1+0-1
        let lhs = reports
            .iter()
            .find(|r| r.left == "d/dx1" && r.right == "x·")
            .unwrap();
        assert_eq!(lhs.bracket_order, Some(0));
        assert_eq!(lhs.composite_order, Some(1));
    }

    #[test]
    fn heterogeneous_args_rejected_and_wrapped() {
        let alg = make_polynomial_superalgebra(1, 1, 4).unwrap();
        let delta = classical_bv_delta(&alg);
        let mixed = alg.even_gen(0).add(&alg.odd_gen(0));
        let err = phi_form(&*alg, &delta, &[mixed.clone(), mixed.clone()], false).unwrap_err();
        assert!(matches!(err, KernelError::NonHomogeneous { .. }));
        // the wrapper splits and sums
        let v = phi_form_any(&*alg, &delta, &[mixed.clone(), mixed], false).unwrap();
        let mut expect = Element::zero();
        for a in [alg.even_gen(0), alg.odd_gen(0)] {
            for b in [alg.even_gen(0), alg.odd_gen(0)] {
                expect = expect.add(&phi_form(&*alg, &delta, &[a.clone(), b], false).unwrap());
            }
        }
        assert_eq!(v, expect);
    }
}
