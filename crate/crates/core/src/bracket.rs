//! The generalized BV bracket `{a,b} = (-1)^{|a|} Φ_Δ²(a,b)` and mechanical
//! verifiers for its identity suites: the four GBVA identities (modified
//! skew-symmetry, Leibniz, Poisson, Δ-derivation), their fully general
//! versions for an arbitrary odd operator, the D-derivation property of
//! differential BV algebras, Leibniz-algebra checks for user brackets, and
//! the weight-graded cohomology assertions of a DBVA.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{commutator, multiply, Superalgebra};
use crate::diffops::{phi_form_impl, phi_witness, SignFlip};
use crate::element::{Element, Word};
use crate::error::{KernelError, Result};
use crate::linalg::{Matrix, Span, WordIndex};
use crate::linop::{ops_equal_on_basis, LinOp};
use crate::random::{random_homogeneous, SuiteRng};
use crate::report::{IdentityChecker, IdentityReport};
use crate::scalar::{parity_sign, Scalar};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GbvaFlags {
    pub delta_odd: bool,
    pub delta_square_zero: bool,
    pub delta_order_le_2: bool,
    pub kills_unit: bool,
}

impl GbvaFlags {
    pub fn all(&self) -> bool {
        self.delta_odd && self.delta_square_zero && self.delta_order_le_2 && self.kills_unit
    }

    fn first_failure(&self) -> Option<&'static str> {
        if !self.delta_odd {
            Some("delta_odd")
        } else if !self.delta_square_zero {
            Some("delta_square_zero")
        } else if !self.delta_order_le_2 {
            Some("delta_order_le_2")
        } else if !self.kills_unit {
            Some("kills_unit")
        } else {
            None
        }
    }
}

/// A superalgebra with a candidate BV operator; the flags record which GBVA
/// axioms were mechanically verified on the truncation at construction.
pub struct GbvaInstance<A: Superalgebra> {
    alg: Arc<A>,
    delta: LinOp<A::W>,
    pub checked: GbvaFlags,
}

impl<A: Superalgebra> GbvaInstance<A> {
    /// Validates all four flags by sweeps over the (budget-guarded) basis.
    pub fn validate(alg: Arc<A>, delta: LinOp<A::W>) -> Result<Self> {
        let delta_odd = delta.is_odd();
        let basis = alg.basis();
        let cap = alg.budget_cap();
        let raise = delta.budget_raise().max(0);

        let mut delta_square_zero = true;
        for w in &basis {
            if let Some(cap) = cap {
                if w.budget() + 2 * raise > cap {
                    continue;
                }
            }
            if !delta.apply(&delta.apply_word(w)).is_zero() {
                delta_square_zero = false;
                break;
            }
        }

        let delta_order_le_2 = phi_witness(&*alg, &delta, 3, &basis, false)?.is_none();

        let kills_unit = match alg.unit() {
            None => true,
            Some(u) => delta.apply(&u).is_zero(),
        };

        Ok(GbvaInstance {
            alg,
            delta,
            checked: GbvaFlags {
                delta_odd,
                delta_square_zero,
                delta_order_le_2,
                kills_unit,
            },
        })
    }

    pub fn algebra(&self) -> &Arc<A> {
        &self.alg
    }

    pub fn delta(&self) -> &LinOp<A::W> {
        &self.delta
    }

    pub fn require_genuine(&self) -> Result<()> {
        match self.checked.first_failure() {
            None => Ok(()),
            Some(flag) => Err(KernelError::Precondition(format!(
                "not a generalized BV algebra: flag {flag} failed"
            ))),
        }
    }

    /// `{a, b} = (-1)^{|a|} Φ_Δ²(a, b)` for homogeneous `a`; bilinear in `b`.
    pub fn bracket(&self, a: &Element<A::W>, b: &Element<A::W>) -> Result<Element<A::W>> {
        bracket_impl(&*self.alg, &self.delta, a, b, SignFlip::None)
    }

    /// `Φ̃²(a,b)`: the second form taken with the supercommutator product
    /// `[x, y] = xy - (-1)^{|x||y|} yx` in place of the multiplication.
    pub fn tilde_phi2(&self, a: &Element<A::W>, b: &Element<A::W>) -> Result<Element<A::W>> {
        tilde_phi2(&*self.alg, &self.delta, a, b)
    }
}

/// `Φ²(a, b) = Δ(ab) - Δ(a)b - (-1)^{|a||Δ|} aΔ(b)` for a parity-homogeneous
/// `a` (only the parity of `|a|` enters), bilinear in `b`.
fn phi2_impl<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    a: &Element<A::W>,
    a_parity: i64,
    b: &Element<A::W>,
    flip: SignFlip,
) -> Element<A::W> {
    let ab = multiply(alg, a, b);
    let t1 = delta.apply(&ab);
    let t2 = multiply(alg, &delta.apply(a), b);
    let t3 = multiply(alg, a, &delta.apply(b));
    let (s2, s3) = crate::diffops::phi2_term_signs(flip);
    let sign = crate::diffops::phi2_koszul_sign(flip, a_parity, delta.superdegree());
    let mut out = t1;
    out.add_scaled(&t2, &s2);
    out.add_scaled(&t3, &(s3 * sign));
    out
}

pub(crate) fn bracket_impl<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    a: &Element<A::W>,
    b: &Element<A::W>,
    flip: SignFlip,
) -> Result<Element<A::W>> {
    // decompose the first argument by parity; the prefactor and the Φ² sign
    // only see |a| mod 2
    let mut parts: [Element<A::W>; 2] = [Element::zero(), Element::zero()];
    for (w, c) in a.iter() {
        parts[w.superdegree().rem_euclid(2) as usize].add_term(w.clone(), c.clone());
    }
    let mut out = Element::zero();
    for (parity, part) in parts.iter().enumerate() {
        if part.is_zero() {
            continue;
        }
        let mut sign = parity_sign(parity as i64);
        if flip == SignFlip::BracketPrefactor {
            sign = -sign;
        }
        let phi = phi2_impl(alg, delta, part, parity as i64, b, flip);
        out.add_scaled(&phi, &sign);
    }
    Ok(out)
}

/// The generalized BV bracket `{a,b} = (-1)^{|a|} Φ_Δ²(a,b)` without an
/// instance wrapper; `a` must be parity-homogeneous per component (it is
/// decomposed internally), `b` is arbitrary.
pub fn bracket_of<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    a: &Element<A::W>,
    b: &Element<A::W>,
) -> Result<Element<A::W>> {
    bracket_impl(alg, delta, a, b, SignFlip::None)
}

pub fn tilde_phi2<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    a: &Element<A::W>,
    b: &Element<A::W>,
) -> Result<Element<A::W>> {
    let da = a.superdegree().ok_or(KernelError::NonHomogeneous {
        index: 0,
        detail: "Φ̃² requires homogeneous arguments".into(),
    })?;
    b.superdegree().ok_or(KernelError::NonHomogeneous {
        index: 1,
        detail: "Φ̃² requires homogeneous arguments".into(),
    })?;
    let ab = commutator(alg, a, b);
    let t1 = delta.apply(&ab);
    let t2 = commutator(alg, &delta.apply(a), b);
    let t3 = commutator(alg, a, &delta.apply(b));
    let mut out = t1.sub(&t2);
    out.add_scaled(&t3, &-parity_sign(da * delta.superdegree()));
    Ok(out)
}

/// Homogeneous sample tuples: exhaustive guarded basis tuples when few
/// enough, otherwise seeded random homogeneous elements.
fn sample_tuples<A: Superalgebra + ?Sized>(
    alg: &A,
    arity: usize,
    budget_slack: i64,
    samples: usize,
    seed: u64,
) -> (Vec<Vec<Element<A::W>>>, String) {
    const EXHAUSTIVE_LIMIT: usize = 20_000;
    let basis = alg.basis();
    let cap = alg.budget_cap();

    let min_budget = basis.iter().map(|w| w.budget()).min().unwrap_or(0).min(0);
    let mut exhaustive: Option<Vec<Vec<A::W>>> = None;
    'outer: {
        let mut acc: Vec<(Vec<A::W>, i64)> = vec![(Vec::new(), 0)];
        for level in 0..arity {
            let slots_after = (arity - level - 1) as i64;
            let mut next = Vec::new();
            for (tuple, used) in &acc {
                for w in &basis {
                    let b = used + w.budget();
                    if let Some(cap) = cap {
                        if b + budget_slack + min_budget * slots_after > cap {
                            continue;
                        }
                    }
                    let mut t = tuple.clone();
                    t.push(w.clone());
                    next.push((t, b));
                    if next.len() > EXHAUSTIVE_LIMIT {
                        break 'outer;
                    }
                }
            }
            acc = next;
        }
        exhaustive = Some(acc.into_iter().map(|(t, _)| t).collect());
    }

    if let Some(all) = exhaustive {
        let n = all.len();
        let elems = all
            .into_iter()
            .map(|t| t.into_iter().map(Element::basis).collect())
            .collect();
        return (elems, format!("exhaustive sweep, {n} guarded basis tuples"));
    }

    let per_elem = cap
        .map(|c| (c - budget_slack).max(0) / arity as i64)
        .unwrap_or(i64::MAX);
    let mut rng = SuiteRng::new(seed).fork("tuples");
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let tuple: Vec<Element<A::W>> = (0..arity)
            .map(|_| random_homogeneous(alg, per_elem, rng.rng()))
            .collect();
        out.push(tuple);
    }
    (
        out,
        format!("{samples} random homogeneous tuples (seed {seed}, per-element budget {per_elem})"),
    )
}

/// The four identities of a generalized BV algebra, verified exactly on
/// sampled (or exhaustively swept) homogeneous triples.
pub fn check_gbva_identities<A: Superalgebra>(
    inst: &GbvaInstance<A>,
    samples: usize,
    seed: u64,
) -> Result<Vec<IdentityReport>> {
    check_gbva_identities_impl(inst, samples, seed, SignFlip::None)
}

pub(crate) fn check_gbva_identities_impl<A: Superalgebra>(
    inst: &GbvaInstance<A>,
    samples: usize,
    seed: u64,
    flip: SignFlip,
) -> Result<Vec<IdentityReport>> {
    inst.require_genuine()?;
    let alg = &*inst.alg;
    let delta = &inst.delta;
    let raise = delta.budget_raise().max(0);
    let (tuples, domain) = sample_tuples(alg, 3, 2 * raise, samples, seed);

    let br = |a: &Element<A::W>, b: &Element<A::W>| bracket_impl(alg, delta, a, b, flip);

    let mut skew = IdentityChecker::new("gbva (i) modified skew-symmetry", domain.clone());
    let mut leibniz = IdentityChecker::new("gbva (ii) Leibniz rule", domain.clone());
    let mut poisson = IdentityChecker::new("gbva (iii) Poisson rule", domain.clone());
    let mut deriv = IdentityChecker::new("gbva (iv) derivation rule for Δ", domain.clone());

    for tuple in &tuples {
        let (x, a, b) = (&tuple[0], &tuple[1], &tuple[2]);
        let (dx, da, db) = (
            x.superdegree().unwrap(),
            a.superdegree().unwrap(),
            b.superdegree().unwrap(),
        );

        // (i) {a,b} + (-1)^{(|a|+1)(|b|+1)} {b,a} = (-1)^{|a|} Φ̃²(a,b)
        let mut lhs = br(a, b)?;
        lhs.add_scaled(&br(b, a)?, &parity_sign((da + 1) * (db + 1)));
        let rhs = inst.tilde_phi2(a, b)?.scale(&parity_sign(da));
        skew.case(alg, &[a, b], &lhs, &rhs);

        // (ii) {x,{a,b}} = {{x,a},b} + (-1)^{(|x|+1)(|a|+1)} {a,{x,b}}
        let lhs = br(x, &br(a, b)?)?;
        let mut rhs = br(&br(x, a)?, b)?;
        rhs.add_scaled(&br(a, &br(x, b)?)?, &parity_sign((dx + 1) * (da + 1)));
        leibniz.case(alg, &[x, a, b], &lhs, &rhs);

        // (iii) {x,ab} - {x,a}b - (-1)^{(|x|+1)|a|} a{x,b} = (-1)^{|x|} Φ³(x,a,b) = 0
        let ab_prod = multiply(alg, a, b);
        let mut lhs = br(x, &ab_prod)?;
        lhs.add_scaled(&multiply(alg, &br(x, a)?, b), &-crate::scalar::one());
        lhs.add_scaled(
            &multiply(alg, a, &br(x, b)?),
            &-parity_sign((dx + 1) * da),
        );
        let phi3 = phi_form_impl(alg, delta, &[x.clone(), a.clone(), b.clone()], false, flip)?;
        let rhs = phi3.scale(&parity_sign(dx));
        poisson.case(alg, &[x, a, b], &lhs, &rhs);
        poisson.case(alg, &[x, a, b], &rhs, &Element::zero());

        // (iv) Δ{a,b} = {Δa,b} + (-1)^{|a|+1} {a,Δb}
        let lhs = delta.apply(&br(a, b)?);
        let mut rhs = br(&delta.apply(a), b)?;
        rhs.add_scaled(&br(a, &delta.apply(b))?, &parity_sign(da + 1));
        deriv.case(alg, &[a, b], &lhs, &rhs);
    }

    Ok(vec![
        skew.finish(),
        leibniz.finish(),
        poisson.finish(),
        deriv.finish(),
    ])
}

/// Fully general bracket identities for a plain odd operator: no square-zero or
/// order condition. Every right side is computed independently, so this is
/// the strongest oracle for the sign calculus.
pub fn check_general_identities<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    samples: usize,
    seed: u64,
) -> Result<Vec<IdentityReport>> {
    check_general_identities_impl(alg, delta, samples, seed, SignFlip::None)
}

pub(crate) fn check_general_identities_impl<A: Superalgebra + ?Sized>(
    alg: &A,
    delta: &LinOp<A::W>,
    samples: usize,
    seed: u64,
    flip: SignFlip,
) -> Result<Vec<IdentityReport>> {
    if !delta.is_odd() {
        return Err(KernelError::NotOdd {
            label: delta.label().to_string(),
            degree: delta.superdegree(),
        });
    }
    let delta2 = delta.compose(delta);
    let raise = delta.budget_raise().max(0);
    let (tuples, domain) = sample_tuples(alg, 3, 2 * raise, samples, seed);

    let br = |a: &Element<A::W>, b: &Element<A::W>| bracket_impl(alg, delta, a, b, flip);
    let phi = |args: &[Element<A::W>]| phi_form_impl(alg, delta, args, false, flip);
    let phi2sq = |args: &[Element<A::W>]| phi_form_impl(alg, &delta2, args, false, flip);

    let mut skew = IdentityChecker::new("general (i) modified skew-symmetry", domain.clone());
    let mut leibniz = IdentityChecker::new("general (ii) modified Leibniz rule", domain.clone());
    let mut poisson = IdentityChecker::new("general (iii) modified Poisson rule", domain.clone());
    let mut deriv = IdentityChecker::new("general (iv) modified derivation rule", domain.clone());

    for tuple in &tuples {
        let (x, a, b) = (&tuple[0], &tuple[1], &tuple[2]);
        let (dx, da, db) = (
            x.superdegree().unwrap(),
            a.superdegree().unwrap(),
            b.superdegree().unwrap(),
        );

        // (i)
        let mut lhs = br(a, b)?;
        lhs.add_scaled(&br(b, a)?, &parity_sign((da + 1) * (db + 1)));
        let rhs = tilde_phi2(alg, delta, a, b)?.scale(&parity_sign(da));
        skew.case(alg, &[a, b], &lhs, &rhs);

        // (ii) {{x,a},b} + (-1)^{(|x|+1)(|a|+1)}{a,{x,b}} - {x,{a,b}}
        //      = (-1)^{|a|}( Δ(Φ³(x,a,b)) - Φ_{Δ²}³(x,a,b) + Φ³(Δx,a,b)
        //        + (-1)^{|x|} Φ³(x,Δa,b) + (-1)^{|x|+|a|} Φ³(x,a,Δb) )
        let mut lhs = br(&br(x, a)?, b)?;
        lhs.add_scaled(&br(a, &br(x, b)?)?, &parity_sign((dx + 1) * (da + 1)));
        lhs.add_scaled(&br(x, &br(a, b)?)?, &-crate::scalar::one());
        let mut rhs = delta.apply(&phi(&[x.clone(), a.clone(), b.clone()])?);
        rhs.add_scaled(
            &phi2sq(&[x.clone(), a.clone(), b.clone()])?,
            &-crate::scalar::one(),
        );
        rhs = rhs.add(&phi(&[delta.apply(x), a.clone(), b.clone()])?);
        rhs.add_scaled(
            &phi(&[x.clone(), delta.apply(a), b.clone()])?,
            &parity_sign(dx),
        );
        rhs.add_scaled(
            &phi(&[x.clone(), a.clone(), delta.apply(b)])?,
            &parity_sign(dx + da),
        );
        let rhs = rhs.scale(&parity_sign(da));
        leibniz.case(alg, &[x, a, b], &lhs, &rhs);

        // (iii)
        let ab_prod = multiply(alg, a, b);
        let mut lhs = br(x, &ab_prod)?;
        lhs.add_scaled(&multiply(alg, &br(x, a)?, b), &-crate::scalar::one());
        lhs.add_scaled(
            &multiply(alg, a, &br(x, b)?),
            &-parity_sign((dx + 1) * da),
        );
        let rhs = phi(&[x.clone(), a.clone(), b.clone()])?.scale(&parity_sign(dx));
        poisson.case(alg, &[x, a, b], &lhs, &rhs);

        // (iv) Δ{a,b} - {Δa,b} - (-1)^{|a|+1}{a,Δb} = (-1)^{|a|} Φ_{Δ²}²(a,b)
        let mut lhs = delta.apply(&br(a, b)?);
        lhs.add_scaled(&br(&delta.apply(a), b)?, &-crate::scalar::one());
        lhs.add_scaled(&br(a, &delta.apply(b))?, &-parity_sign(da + 1));
        let rhs = phi2sq(&[a.clone(), b.clone()])?.scale(&parity_sign(da));
        deriv.case(alg, &[a, b], &lhs, &rhs);
    }

    Ok(vec![
        skew.finish(),
        leibniz.finish(),
        poisson.finish(),
        deriv.finish(),
    ])
}

/// If `D` and `L` are derivations with `DΔ + ΔD = L`, then `D` is
/// a derivation of the bracket. Preconditions are verified by sweeps and
/// named on failure.
pub fn check_d_derivation<A: Superalgebra>(
    inst: &GbvaInstance<A>,
    d: &LinOp<A::W>,
    l: &LinOp<A::W>,
    samples: usize,
    seed: u64,
) -> Result<IdentityReport> {
    let alg = &*inst.alg;
    let basis = alg.basis();
    if let Some((w, _v)) = phi_witness(alg, d, 2, &basis, false)? {
        return Err(KernelError::Precondition(format!(
            "D = {} is not a derivation (Φ² ≠ 0 at {:?})",
            d.label(),
            w.iter().map(|u| alg.format_word(u)).collect::<Vec<_>>()
        )));
    }
    if let Some((w, _v)) = phi_witness(alg, l, 2, &basis, false)? {
        return Err(KernelError::Precondition(format!(
            "L = {} is not a derivation (Φ² ≠ 0 at {:?})",
            l.label(),
            w.iter().map(|u| alg.format_word(u)).collect::<Vec<_>>()
        )));
    }
    let anti = inst.delta.compose(d).add(&d.compose(&inst.delta))?;
    let margin = inst.delta.budget_raise().max(0) + d.budget_raise().max(0);
    if let Some((w, lv, rv)) = ops_equal_on_basis(alg, &anti, l, margin) {
        return Err(KernelError::Precondition(format!(
            "DΔ + ΔD ≠ L at {}: {} vs {}",
            alg.format_word(&w),
            alg.format_element(&lv),
            alg.format_element(&rv)
        )));
    }

    let raise = inst.delta.budget_raise().max(0) + d.budget_raise().max(0);
    let (tuples, domain) = sample_tuples(alg, 2, 2 * raise, samples, seed);
    let mut checker = IdentityChecker::new("D is a derivation of the bracket", domain);
    for tuple in &tuples {
        let (a, b) = (&tuple[0], &tuple[1]);
        let da = a.superdegree().unwrap();
        let lhs = d.apply(&inst.bracket(a, b)?);
        let mut rhs = inst.bracket(&d.apply(a), b)?;
        rhs.add_scaled(&inst.bracket(a, &d.apply(b))?, &parity_sign(da + 1));
        checker.case(alg, &[a, b], &lhs, &rhs);
    }
    Ok(checker.finish())
}

/// Leibniz-algebra check for an arbitrary bilinear bracket with a caller
/// supplied (shifted) grading: `[x,[y,z]] = [[x,y],z] + (-1)^{d(x)d(y)}[y,[x,z]]`.
pub fn check_leibniz<A, F, G>(
    alg: &A,
    bracket: F,
    shifted_degree: G,
    samples: usize,
    seed: u64,
) -> Result<IdentityReport>
where
    A: Superalgebra + ?Sized,
    F: Fn(&Element<A::W>, &Element<A::W>) -> Result<Element<A::W>>,
    G: Fn(&Element<A::W>) -> i64,
{
    let (tuples, domain) = sample_tuples(alg, 3, 0, samples, seed);
    let mut checker = IdentityChecker::new("Leibniz identity (shifted grading)", domain);
    for tuple in &tuples {
        let (x, y, z) = (&tuple[0], &tuple[1], &tuple[2]);
        let (dx, dy) = (shifted_degree(x), shifted_degree(y));
        let lhs = bracket(x, &bracket(y, z)?)?;
        let mut rhs = bracket(&bracket(x, y)?, z)?;
        rhs.add_scaled(&bracket(y, &bracket(x, z)?)?, &parity_sign(dx * dy));
        checker.case(alg, &[x, y, z], &lhs, &rhs);
        if checker.has_failed() {
            break;
        }
    }
    Ok(checker.finish())
}

#[derive(Debug, Serialize)]
pub struct DbvaReport {
    pub identities: Vec<IdentityReport>,
    /// (weight, kernel dim, image dim, cohomology dim) per L-eigenvalue.
    pub cohomology: Vec<(String, usize, usize, usize)>,
}

impl DbvaReport {
    pub fn pass(&self) -> bool {
        self.identities.iter().all(|r| r.pass)
    }
}

/// Verifies the differential BV structure `(A, Δ, D, L)`: the commutation
/// identities, that basis words diagonalize `L`, that cohomology lives in
/// weight zero (computed by exact rank per eigenspace), and that `Δ` and the
/// product descend to classes.
pub fn verify_dbva<A: Superalgebra>(
    inst: &GbvaInstance<A>,
    d: &LinOp<A::W>,
    l: &LinOp<A::W>,
    max_weight: Option<i64>,
) -> Result<DbvaReport> {
    let alg = &*inst.alg;
    let delta = &inst.delta;
    let full_basis = alg.basis();

    // basis words must be L-eigenvectors
    let mut eigen: BTreeMap<Scalar, Vec<A::W>> = BTreeMap::new();
    for w in &full_basis {
        let img = l.apply_word(w);
        let lambda = if img.is_zero() {
            crate::scalar::zero()
        } else if img.len() == 1 && img.words().next() == Some(w) {
            img.coeff(w)
        } else {
            return Err(KernelError::Precondition(format!(
                "basis word {} is not an L-eigenvector",
                alg.format_word(w)
            )));
        };
        if let Some(max) = max_weight {
            if lambda > crate::scalar::int(max) {
                continue;
            }
        }
        eigen.entry(lambda).or_default().push(w.clone());
    }

    let margin = 2 * (delta.budget_raise().max(0) + d.budget_raise().max(0));
    let mut identities = Vec::new();

    // operator identities on the swept basis
    let sweep_words: Vec<A::W> = eigen.values().flatten().cloned().collect();
    let mut comm = IdentityChecker::new("DΔ + ΔD = L", "guarded basis sweep".to_string());
    let mut dsq = IdentityChecker::new("D² = 0", "guarded basis sweep".to_string());
    let mut ld = IdentityChecker::new("[L,D] = 0", "guarded basis sweep".to_string());
    let mut ldelta = IdentityChecker::new("[L,Δ] = 0", "guarded basis sweep".to_string());
    let cap = alg.budget_cap();
    for w in &sweep_words {
        if let Some(cap) = cap {
            if w.budget() + margin > cap {
                continue;
            }
        }
        let e = Element::basis(w.clone());
        let lhs = d.apply(&delta.apply(&e)).add(&delta.apply(&d.apply(&e)));
        comm.case(alg, &[&e], &lhs, &l.apply(&e));
        dsq.case(alg, &[&e], &d.apply(&d.apply(&e)), &Element::zero());
        let lhs = l.apply(&d.apply(&e)).sub(&d.apply(&l.apply(&e)));
        ld.case(alg, &[&e], &lhs, &Element::zero());
        let lhs = l.apply(&delta.apply(&e)).sub(&delta.apply(&l.apply(&e)));
        ldelta.case(alg, &[&e], &lhs, &Element::zero());
    }
    let mut dunit = IdentityChecker::new("D(1) = 0", "unit".to_string());
    if let Some(u) = alg.unit() {
        dunit.case(alg, &[&u], &d.apply(&u), &Element::zero());
    }
    identities.extend([
        comm.finish(),
        dsq.finish(),
        ld.finish(),
        ldelta.finish(),
        dunit.finish(),
    ]);

    // cohomology per eigenvalue, by exact rank
    let mut cohomology = Vec::new();
    let mut nonzero_weight = IdentityChecker::new(
        "nonzero-weight eigenspaces have zero cohomology",
        "rank computation per L-eigenvalue".to_string(),
    );
    let mut prop47 = IdentityChecker::new(
        "D(Δa) = λa for closed a of weight λ",
        "kernel representatives".to_string(),
    );
    let mut descend = IdentityChecker::new(
        "Δ descends to weight-zero cohomology",
        "kernel and boundary representatives".to_string(),
    );

    for (lambda, words) in &eigen {
        let slice = Slice::new(words.clone());
        let dim = slice.words.len();

        // matrix of D restricted to the eigenspace ([L,D]=0 checked above)
        let mut dmat = Matrix::zero(dim, dim);
        let mut in_space = true;
        for (j, w) in slice.words.iter().enumerate() {
            let img = d.apply_word(w);
            match slice.to_vec(&img) {
                Some(col) => {
                    for (i, v) in col.into_iter().enumerate() {
                        dmat.set(i, j, v);
                    }
                }
                None => {
                    in_space = false;
                    break;
                }
            }
        }
        if !in_space {
            // D leaves the truncated eigenspace; skip rank bookkeeping here
            continue;
        }
        let rank = dmat.rank();
        let kernel = dmat.nullspace();
        let hdim = kernel.len() - rank;
        cohomology.push((crate::scalar::fmt_scalar(lambda), kernel.len(), rank, hdim));

        let image_span = image_of(&dmat, dim);
        if !lambda.eq(&crate::scalar::zero()) {
            // closed elements of nonzero weight are exact: D(Δa) = λa
            let zero_el: Element<A::W> = Element::zero();
            if hdim != 0 {
                nonzero_weight.fail_raw(
                    vec![format!("weight {}", crate::scalar::fmt_scalar(lambda))],
                    format!("cohomology dim {hdim}"),
                    "0".to_string(),
                    format!("{hdim}"),
                );
            } else {
                nonzero_weight.case(alg, &[], &zero_el, &zero_el);
            }
            for kv in &kernel {
                let v = slice.from_vec(kv);
                let lhs = d.apply(&delta.apply(&v));
                prop47.case(alg, &[&v], &lhs, &v.scale(lambda));
                let vec = slice.to_vec(&v).unwrap();
                if !image_span.contains(&vec) {
                    prop47.fail_raw(
                        vec![alg.format_element(&v)],
                        "closed, nonzero weight".into(),
                        "exact".into(),
                        alg.format_element(&v),
                    );
                }
            }
        } else {
            // weight zero: Δ maps kernel into kernel, boundaries to boundaries
            for kv in &kernel {
                let v = slice.from_vec(kv);
                let dv = delta.apply(&v);
                descend.case(alg, &[&v], &d.apply(&dv), &Element::zero());
            }
            for w in &slice.words {
                let bd = d.apply_word(w);
                if bd.is_zero() {
                    continue;
                }
                let img = delta.apply(&bd);
                match slice.to_vec(&img) {
                    Some(vec) => {
                        if !image_span.contains(&vec) {
                            descend.fail_raw(
                                vec![alg.format_element(&bd)],
                                format!("Δ({})", alg.format_element(&bd)),
                                "a boundary".into(),
                                alg.format_element(&img),
                            );
                        } else {
                            descend.case(alg, &[], &Element::zero(), &Element::zero());
                        }
                    }
                    None => descend.fail_raw(
                        vec![alg.format_element(&bd)],
                        "Δ(boundary)".into(),
                        "inside the weight-zero slice".into(),
                        alg.format_element(&img),
                    ),
                }
            }
        }
    }

    identities.extend([nonzero_weight.finish(), prop47.finish(), descend.finish()]);
    Ok(DbvaReport {
        identities,
        cohomology,
    })
}

type Slice<W> = WordIndex<W>;

fn image_of(m: &Matrix, dim: usize) -> Span {
    let mut cols = Vec::new();
    for j in 0..dim {
        let col: Vec<Scalar> = (0..dim).map(|i| m.get(i, j).clone()).collect();
        if col.iter().any(|c| !num_traits::Zero::is_zero(c)) {
            cols.push(col);
        }
    }
    Span::new(&cols, dim)
}

#[doc(hidden)]
pub mod mutation {
    pub use crate::diffops::mutation::*;
    use super::*;

    pub fn bracket_flipped<A: Superalgebra + ?Sized>(
        alg: &A,
        delta: &LinOp<A::W>,
        a: &Element<A::W>,
        b: &Element<A::W>,
        flip: SignFlip,
    ) -> Result<Element<A::W>> {
        bracket_impl(alg, delta, a, b, flip)
    }

    pub fn check_gbva_identities_flipped<A: Superalgebra>(
        inst: &GbvaInstance<A>,
        samples: usize,
        seed: u64,
        flip: SignFlip,
    ) -> Result<Vec<IdentityReport>> {
        check_gbva_identities_impl(inst, samples, seed, flip)
    }

    pub fn check_general_identities_flipped<A: Superalgebra + ?Sized>(
        alg: &A,
        delta: &LinOp<A::W>,
        samples: usize,
        seed: u64,
        flip: SignFlip,
    ) -> Result<Vec<IdentityReport>> {
        check_general_identities_impl(alg, delta, samples, seed, flip)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{classical_bv_delta, make_polynomial_superalgebra, partial_odd};
    use crate::report::all_pass;

    #[test]
    fn classical_bracket_of_x_and_t() {
        let alg = make_polynomial_superalgebra(1, 1, 4).unwrap();
        let delta = classical_bv_delta(&alg);
        let inst = GbvaInstance::validate(alg.clone(), delta).unwrap();
        assert!(inst.checked.all());
        let x = alg.even_gen(0);
        let t = alg.odd_gen(0);
        assert_eq!(inst.bracket(&x, &t).unwrap(), alg.unit().unwrap());
        assert!(inst.bracket(&x, &alg.unit().unwrap()).unwrap().is_zero());
    }

    #[test]
    fn tilde_phi2_vanishes_on_supercommutative() {
        let alg = make_polynomial_superalgebra(2, 2, 4).unwrap();
        let delta = classical_bv_delta(&alg);
        let inst = GbvaInstance::validate(alg.clone(), delta).unwrap();
        let mut rng = SuiteRng::new(3);
        for _ in 0..20 {
            let a = random_homogeneous(&*alg, 2, rng.rng());
            let b = random_homogeneous(&*alg, 2, rng.rng());
            assert!(inst.tilde_phi2(&a, &b).unwrap().is_zero());
        }
    }

    #[test]
    fn gbva_identities_pass_on_classical_instance() {
        let alg = make_polynomial_superalgebra(2, 2, 6).unwrap();
        let delta = classical_bv_delta(&alg);
        let inst = GbvaInstance::validate(alg, delta).unwrap();
        let reports = check_gbva_identities(&inst, 60, 0).unwrap();
        assert!(all_pass(&reports), "{reports:#?}");
    }

    #[test]
    fn general_identities_on_random_nonassociative_algebra() {
        // the strongest sign-calculus oracle: random odd operators on a
        // random noncommutative, nonassociative superalgebra
        for seed in 0..4u64 {
            let alg = crate::structconst::random_superalgebra(5, seed);
            let delta = crate::random::random_linop(&alg, seed.wrapping_add(100), 1, false, "Δ");
            let reports = check_general_identities(&*alg, &delta, 40, seed).unwrap();
            assert!(all_pass(&reports), "seed {seed}: {reports:#?}");
        }
    }

    #[test]
    fn general_reduces_to_gbva_on_genuine_instance() {
        let alg = make_polynomial_superalgebra(2, 2, 4).unwrap();
        let delta = classical_bv_delta(&alg);
        let general = check_general_identities(&*alg, &delta, 40, 1).unwrap();
        assert!(all_pass(&general));
        let inst = GbvaInstance::validate(alg, delta).unwrap();
        let gbva = check_gbva_identities(&inst, 40, 1).unwrap();
        assert!(all_pass(&gbva));
    }

    #[test]
    fn derivation_delta_gives_zero_bracket() {
        let alg = make_polynomial_superalgebra(1, 1, 4).unwrap();
        let delta = partial_odd(&alg, 0);
        let inst = GbvaInstance::validate(alg.clone(), delta).unwrap();
        assert!(inst.checked.all());
        let mut rng = SuiteRng::new(5);
        for _ in 0..10 {
            let a = random_homogeneous(&*alg, 2, rng.rng());
            let b = random_homogeneous(&*alg, 2, rng.rng());
            assert!(inst.bracket(&a, &b).unwrap().is_zero());
        }
    }

    #[test]
    fn d_derivation_on_classical_instance() {
        let alg = make_polynomial_superalgebra(1, 1, 4).unwrap();
        let delta = classical_bv_delta(&alg);
        let inst = GbvaInstance::validate(alg.clone(), delta).unwrap();
        let d = partial_odd(&alg, 0);
        let l = LinOp::zero("0", 0);
        let rep = check_d_derivation(&inst, &d, &l, 40, 0).unwrap();
        assert!(rep.pass, "{rep:#?}");
    }

    #[test]
    fn d_derivation_rejects_non_derivation() {
        let alg = make_polynomial_superalgebra(1, 1, 4).unwrap();
        let delta = classical_bv_delta(&alg);
        let inst = GbvaInstance::validate(alg.clone(), delta).unwrap();
        let not_deriv = classical_bv_delta(&alg);
        let l = LinOp::zero("0", 0);
        let err = check_d_derivation(&inst, &not_deriv, &l, 10, 0).unwrap_err();
        assert!(matches!(err, KernelError::Precondition(_)));
    }

    #[test]
    fn leibniz_for_gbva_bracket_and_corruption() {
        let alg = make_polynomial_superalgebra(2, 2, 6).unwrap();
        let delta = classical_bv_delta(&alg);
        let inst = GbvaInstance::validate(alg.clone(), delta).unwrap();
        let good = check_leibniz(
            &*alg,
            |a, b| inst.bracket(a, b),
            |e| e.superdegree().unwrap_or(0) + 1,
            60,
            0,
        )
        .unwrap();
        assert!(good.pass);

        // corrupt one sign in the defining recursion: Leibniz must fail
        let bad = check_leibniz(
            &*alg,
            |a, b| mutation::bracket_flipped(&*alg, inst.delta(), a, b, SignFlip::PhiLast),
            |e| e.superdegree().unwrap_or(0) + 1,
            60,
            0,
        )
        .unwrap();
        assert!(!bad.pass);
        assert!(bad.counterexample.is_some());
    }

    #[test]
    fn dbva_euler_fixture_has_weight_zero_cohomology() {
        // Δ = t∂x (odd derivation), D = x∂t, L = DΔ + ΔD = total degree
        let alg = make_polynomial_superalgebra(1, 1, 6).unwrap();
        let t_dx = {
            let d = crate::poly::partial_even(&alg, 0);
            crate::linop::left_mult(&alg, alg.odd_gen(0), "t·").compose(&d)
        }
        .relabel("t∂x");
        let x_dt = {
            let d = partial_odd(&alg, 0);
            crate::linop::left_mult(&alg, alg.even_gen(0), "x·").compose(&d)
        }
        .relabel("x∂t");
        let euler = crate::poly::euler_operator(&alg);

        let inst = GbvaInstance::validate(alg.clone(), t_dx).unwrap();
        assert!(inst.checked.all());
        let report = verify_dbva(&inst, &x_dt, &euler, Some(5)).unwrap();
        assert!(report.pass(), "{report:#?}");
        // weight 0 cohomology is spanned by 1; all positive weights die
        let h0 = report
            .cohomology
            .iter()
            .find(|(w, _, _, _)| w == "0")
            .unwrap();
        assert_eq!(h0.3, 1);
        for (w, _, _, h) in &report.cohomology {
            if w != "0" {
                assert_eq!(*h, 0, "weight {w} should have no cohomology");
            }
        }
    }

    #[test]
    fn bracket_degree_is_additive_with_delta() {
        // |{a,b}| = |a| + |b| + |Δ| termwise on homogeneous inputs
        let alg = make_polynomial_superalgebra(2, 2, 6).unwrap();
        let delta = classical_bv_delta(&alg);
        let shift = delta.superdegree();
        let inst = GbvaInstance::validate(alg.clone(), delta).unwrap();
        let mut rng = SuiteRng::new(21);
        let mut nonzero = 0;
        for _ in 0..40 {
            let a = random_homogeneous(&*alg, 2, rng.rng());
            let b = random_homogeneous(&*alg, 2, rng.rng());
            let v = inst.bracket(&a, &b).unwrap();
            if v.is_zero() {
                continue;
            }
            nonzero += 1;
            let expected = a.superdegree().unwrap() + b.superdegree().unwrap() + shift;
            assert_eq!(v.superdegree(), Some(expected));
        }
        assert!(nonzero > 0);
    }

    #[test]
    fn dbva_classic_contraction_example() {
        // (Q[x]⊗Λt, Δ = ∂x∂t, D = ∂t, L = 0): identities pass and the
        // rank-computed cohomology of D vanishes entirely
        let alg = make_polynomial_superalgebra(1, 1, 5).unwrap();
        let delta = classical_bv_delta(&alg);
        let inst = GbvaInstance::validate(alg.clone(), delta).unwrap();
        let d = partial_odd(&alg, 0);
        let l = LinOp::zero("0", 0);
        let report = verify_dbva(&inst, &d, &l, None).unwrap();
        assert!(report.pass(), "{report:#?}");
        let total: usize = report.cohomology.iter().map(|(_, _, _, h)| h).sum();
        assert_eq!(total, 0);
    }

    #[test]
    fn dbva_zero_d_full_cohomology() {
        let alg = make_polynomial_superalgebra(1, 1, 3).unwrap();
        let delta = classical_bv_delta(&alg);
        let inst = GbvaInstance::validate(alg.clone(), delta).unwrap();
        let d = LinOp::zero("0", 1);
        let l = LinOp::zero("0", 0);
        let report = verify_dbva(&inst, &d, &l, None).unwrap();
        assert!(report.pass());
        let total: usize = report.cohomology.iter().map(|(_, _, _, h)| h).sum();
        assert_eq!(total, alg.basis().len());
    }
}
