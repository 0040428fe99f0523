//! The bc ghost system as a concrete vertex operator superalgebra.
//!
//! States are signed sums of words of fermionic creation modes applied to
//! the vacuum, written in the weight-indexed conventions
//! `b(z) = Σ b_n z^{-n-2}`, `c(z) = Σ c_n z^{-n+1}`; creation modes are
//! `b_m (m ≤ -2)` and `c_m (m ≤ 1)`, with `b_n|0> = 0 (n ≥ -1)` and
//! `c_m|0> = 0 (m ≥ 2)`, and the contraction `{b_m, c_n} = δ_{m+n,0}`.
//!
//! Mode application `u_(n) v` is in standard indexing `u(z) = Σ u_(n) z^{-n-1}`
//! (translation: `R_(n) = R_{n - wt(R) + 1}` weight-indexed). Generator modes
//! act by anticommutation through a word; composite states decompose through
//! the recursion
//!
//! ```text
//! (u_(m) v)_(n) = Σ_{i≥0} (-1)^i C(m,i) ( u_(m-i) v_(n+i)
//!                  - (-1)^{m+|u||v|} v_(m+n-i) u_(i) )
//! ```
//!
//! whose sums terminate exactly: every nonzero state has weight at least -1
//! (one `c_1` at most, `c_0` contributes 0, everything else is positive), so
//! `s_(k) y = 0` whenever `wt(s) + wt(y) - k - 1 < -1`. The weight cap only
//! bounds which states the sweeps enumerate; single applications are exact.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::algebra::{AlgebraFlags, Superalgebra};
use crate::diffops::{classify_order, phi_form, phi_witness};
use crate::element::{Element, Word};
use crate::error::{KernelError, Result};
use crate::linop::LinOp;
use crate::report::{IdentityChecker, IdentityReport, OrderReport};
use crate::scalar::{self, binomial, parity_sign, Scalar};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Gen {
    B,
    C,
}

impl Gen {
    /// L0-weight of the generating field.
    pub fn field_weight(self) -> i64 {
        match self {
            Gen::B => 2,
            Gen::C => -1,
        }
    }

    /// Weight-indexed mode of the state representing the field itself.
    fn default_index(self) -> i64 {
        match self {
            Gen::B => -2,
            Gen::C => 1,
        }
    }

    fn is_creation(self, index: i64) -> bool {
        match self {
            Gen::B => index <= -2,
            Gen::C => index <= 1,
        }
    }

    fn symbol(self) -> char {
        match self {
            Gen::B => 'b',
            Gen::C => 'c',
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Mode {
    pub gen: Gen,
    pub index: i64,
}

impl Mode {
    pub fn weight(&self) -> i64 {
        -self.index
    }
}

/// Normal-ordered word of distinct creation modes applied to the vacuum,
/// sorted in a fixed total order with reorder signs absorbed upstream.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct FockWord {
    pub modes: Vec<Mode>,
}

impl FockWord {
    pub fn vacuum() -> Self {
        FockWord::default()
    }

    pub fn is_vacuum(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn weight_i64(&self) -> i64 {
        self.modes.iter().map(|m| m.weight()).sum()
    }

    pub fn ghost_number(&self) -> i64 {
        self.modes
            .iter()
            .map(|m| match m.gen {
                Gen::B => -1,
                Gen::C => 1,
            })
            .sum()
    }
}

impl Word for FockWord {
    fn superdegree(&self) -> i64 {
        self.ghost_number()
    }

    fn weight(&self) -> Option<Scalar> {
        Some(scalar::int(self.weight_i64()))
    }

    fn budget(&self) -> i64 {
        self.weight_i64()
    }
}

pub type FockState = Element<FockWord>;

type ModeKey = (FockWord, i64, FockWord);

/// The bc system truncated (for sweep enumeration only) at a weight cap.
pub struct VosaBc {
    name: String,
    weight_cap: i64,
    mode_cache: Mutex<HashMap<ModeKey, FockState>>,
}

impl std::fmt::Debug for VosaBc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "VosaBc(cap {})", self.weight_cap)
    }
}

pub fn make_bc_system(weight_cap: i64) -> Arc<VosaBc> {
    Arc::new(VosaBc {
        name: format!("bc ghost system (sweep weight cap {weight_cap})"),
        weight_cap,
        mode_cache: Mutex::new(HashMap::new()),
    })
}

impl VosaBc {
    pub fn weight_cap(&self) -> i64 {
        self.weight_cap
    }

    pub fn vacuum(&self) -> FockState {
        Element::basis(FockWord::vacuum())
    }

    /// The state of the field `b`: `b_{-2}|0>`.
    pub fn b_state(&self) -> FockState {
        Element::basis(FockWord {
            modes: vec![Mode {
                gen: Gen::B,
                index: -2,
            }],
        })
    }

    /// The state of the field `c`: `c_1|0>`.
    pub fn c_state(&self) -> FockState {
        Element::basis(FockWord {
            modes: vec![Mode {
                gen: Gen::C,
                index: 1,
            }],
        })
    }

    /// Builds a state by applying the listed weight-indexed modes (leftmost
    /// outermost) to the vacuum, normalizing as it goes. Annihilation modes
    /// are legal and act accordingly.
    pub fn state_from_modes(&self, modes: &[(Gen, i64)]) -> FockState {
        let mut state = self.vacuum();
        for &(gen, index) in modes.iter().rev() {
            state = self.apply_weight_mode(Mode { gen, index }, &state);
        }
        state
    }

    /// Applies the weight-indexed generator mode `g_m` to a state.
    pub fn apply_weight_mode(&self, mode: Mode, state: &FockState) -> FockState {
        let mut out = Element::zero();
        for (w, c) in state.iter() {
            out.add_scaled(&self.gen_mode_on_word(mode, w), c);
        }
        out
    }

    fn gen_mode_on_word(&self, mode: Mode, w: &FockWord) -> FockState {
        if mode.gen.is_creation(mode.index) {
            // insert into the canonical slot; fermionic repeats vanish
            let pos = w.modes.partition_point(|m| *m < mode);
            if w.modes.get(pos) == Some(&mode) {
                return Element::zero();
            }
            let mut modes = w.modes.clone();
            modes.insert(pos, mode);
            Element::single(FockWord { modes }, parity_sign(pos as i64))
        } else {
            // anticommute rightward, contracting against opposite modes
            let mut out = Element::zero();
            for (pos, m) in w.modes.iter().enumerate() {
                if m.gen != mode.gen && m.index + mode.index == 0 {
                    let mut modes = w.modes.clone();
                    modes.remove(pos);
                    out.add_term(FockWord { modes }, parity_sign(pos as i64));
                }
            }
            out
        }
    }

    /// `u_(n) v` in standard indexing, exact. Termination of the recursion
    /// sums is certified by the weight floor: any state of weight < -1 is
    /// zero (checked structurally on every normalized word).
    pub fn mode_apply(&self, u: &FockState, n: i64, v: &FockState) -> FockState {
        let mut out = Element::zero();
        for (uw, cu) in u.iter() {
            for (vw, cv) in v.iter() {
                let c = cu.clone() * cv;
                out.add_scaled(&self.word_mode_apply(uw, n, vw), &c);
            }
        }
        out
    }

    fn word_mode_apply(&self, uw: &FockWord, n: i64, vw: &FockWord) -> FockState {
        // weight floor: the result lives in weight wt(u)+wt(v)-n-1
        if uw.weight_i64() + vw.weight_i64() - n - 1 < -1 {
            return Element::zero();
        }
        if uw.is_vacuum() {
            return if n == -1 {
                Element::basis(vw.clone())
            } else {
                Element::zero()
            };
        }
        let key = (uw.clone(), n, vw.clone());
        if let Some(hit) = self.mode_cache.lock().unwrap().get(&key) {
            return hit.clone();
        }

        let head = uw.modes[0];
        let value = if uw.modes.len() == 1 && head.index == head.gen.default_index() {
            // a generating field: standard mode g_(n) = g_{n - wt + 1}
            let target = Mode {
                gen: head.gen,
                index: standard_to_weight_index(head.gen.field_weight(), n),
            };
            self.gen_mode_on_word(target, vw)
        } else {
            // u = g_(a) u' with a = m + wt(g) - 1; recurse through the mode
            // composition identity
            let rest = FockWord {
                modes: uw.modes[1..].to_vec(),
            };
            let a = weight_to_standard_index(head.gen.field_weight(), head.index);
            let gen_state_parity = 1i64; // b and c are both odd
            let rest_parity = rest.modes.len() as i64;
            let cross_sign = parity_sign(a + gen_state_parity * rest_parity);

            let mut acc = Element::zero();
            // series 1: g_(a-i) ( u'_(n+i) v )
            let max_i1 = rest.weight_i64() + vw.weight_i64() - n;
            for i in 0..=max_i1.max(-1) {
                if i > max_i1 {
                    break;
                }
                let coeff = parity_sign(i) * binomial(a, i as u32);
                if num_traits::Zero::is_zero(&coeff) {
                    continue;
                }
                let inner = self.word_mode_apply(&rest, n + i, vw);
                if inner.is_zero() {
                    continue;
                }
                let g_word = FockWord {
                    modes: vec![head_default(head.gen)],
                };
                let mut outer = Element::zero();
                for (w, c) in inner.iter() {
                    outer.add_scaled(&self.word_mode_apply(&g_word, a - i, w), c);
                }
                acc.add_scaled(&outer, &coeff);
            }
            // series 2: - (-1)^{a+|g||u'|} u'_(a+n-i) ( g_(i) v )
            let g_word = FockWord {
                modes: vec![head_default(head.gen)],
            };
            let max_i2 = head.gen.field_weight() + vw.weight_i64();
            for i in 0..=max_i2.max(-1) {
                if i > max_i2 {
                    break;
                }
                let coeff = parity_sign(i) * binomial(a, i as u32);
                if num_traits::Zero::is_zero(&coeff) {
                    continue;
                }
                let inner = self.word_mode_apply(&g_word, i, vw);
                if inner.is_zero() {
                    continue;
                }
                let mut outer = Element::zero();
                for (w, c) in inner.iter() {
                    outer.add_scaled(&self.word_mode_apply(&rest, a + n - i, w), c);
                }
                acc.add_scaled(&outer, &(-(coeff * cross_sign.clone())));
            }
            acc
        };

        // structural invariant: nothing lives below weight -1
        debug_assert!(value
            .words()
            .all(|w| w.weight_i64() >= -1));
        self.mode_cache
            .lock()
            .unwrap()
            .insert(key, value.clone());
        value
    }

    /// The Wick product `u ×_{-1} v`.
    pub fn wick(&self, u: &FockState, v: &FockState) -> FockState {
        self.mode_apply(u, -1, v)
    }

    /// The bc stress state, from `L(z) = -:(db)c: - 2:b(dc):` with the
    /// formal derivative acting on mode indices.
    pub fn stress_state(&self) -> FockState {
        let db = self.state_from_modes(&[(Gen::B, -3)]); // state of d/dz b
        let dc = self.state_from_modes(&[(Gen::C, 0)]); // state of d/dz c
        let t1 = self.wick(&db, &self.c_state());
        let t2 = self.wick(&self.b_state(), &dc);
        t1.neg().sub(&t2.scale(&scalar::int(2)))
    }

    /// Standard-indexed mode operator `x ↦ u_(n) x` for a superdegree- and
    /// weight-homogeneous state `u`.
    pub fn mode_op(self: &Arc<Self>, u: FockState, n: i64, label: impl Into<String>) -> LinOp<FockWord> {
        let ghost = u.superdegree().expect("state must be ghost-homogeneous");
        let wt = u
            .weight()
            .map(|w| w - scalar::int(n + 1))
            .unwrap_or_else(scalar::zero);
        let alg = Arc::clone(self);
        LinOp::new(label, ghost, move |w: &FockWord| {
            alg.mode_apply(&u, n, &Element::basis(w.clone()))
        })
        .with_weight_shift(wt)
    }

    /// The BV operator `Δ = b_0` (weight-indexed), i.e. `b_(1)`.
    pub fn delta_b0(self: &Arc<Self>) -> LinOp<FockWord> {
        self.mode_op(self.b_state(), 1, "b0")
    }

    /// The residue `b_(0)`.
    pub fn residue_b(self: &Arc<Self>) -> LinOp<FockWord> {
        self.mode_op(self.b_state(), 0, "b_(0)")
    }

    /// The weight-reading operator `L0`.
    pub fn l0_op(&self) -> LinOp<FockWord> {
        LinOp::new("L0", 0, |w: &FockWord| {
            Element::single(w.clone(), scalar::int(w.weight_i64()))
        })
        .with_weight_shift(scalar::zero())
    }
}

/// Weight-indexed mode `R_m` of a weight-`wt` field as a standard index:
/// `R_m = R_(m + wt - 1)`.
pub fn weight_to_standard_index(field_weight: i64, m: i64) -> i64 {
    m + field_weight - 1
}

/// Standard-indexed mode `R_(n)` in the weight-indexed convention:
/// `R_(n) = R_{n - wt + 1}`.
pub fn standard_to_weight_index(field_weight: i64, n: i64) -> i64 {
    n - field_weight + 1
}

fn head_default(gen: Gen) -> Mode {
    Mode {
        gen,
        index: gen.default_index(),
    }
}

impl Superalgebra for VosaBc {
    type W = FockWord;

    fn name(&self) -> &str {
        &self.name
    }

    fn mul_words(&self, u: &FockWord, v: &FockWord) -> FockState {
        self.word_mode_apply(u, -1, v)
    }

    fn unit_word(&self) -> Option<FockWord> {
        Some(FockWord::vacuum())
    }

    fn flags(&self) -> AlgebraFlags {
        AlgebraFlags {
            supercommutative: false,
            associative: false,
            unital: true,
        }
    }

    fn basis(&self) -> Vec<FockWord> {
        let mut candidates = Vec::new();
        for i in 2..=self.weight_cap.max(0) {
            candidates.push(Mode {
                gen: Gen::B,
                index: -i,
            });
        }
        for i in -1..=self.weight_cap.max(0) {
            candidates.push(Mode {
                gen: Gen::C,
                index: -i,
            });
        }
        let mut words = Vec::new();
        let mut current = Vec::new();
        collect_subsets(&candidates, 0, &mut current, self.weight_cap, &mut words);
        words.sort();
        words
    }

    fn budget_cap(&self) -> Option<i64> {
        Some(self.weight_cap)
    }

    fn format_word(&self, w: &FockWord) -> String {
        let mut s = String::new();
        for m in &w.modes {
            s.push(m.gen.symbol());
            s.push_str(&format!("({})", m.index));
        }
        s.push_str("|0>");
        s
    }

    fn generators(&self) -> Vec<FockState> {
        vec![self.b_state(), self.c_state()]
    }
}

fn collect_subsets(
    candidates: &[Mode],
    start: usize,
    current: &mut Vec<Mode>,
    cap: i64,
    out: &mut Vec<FockWord>,
) {
    let weight: i64 = current.iter().map(|m| m.weight()).sum();
    if weight <= cap {
        let mut modes = current.clone();
        modes.sort();
        out.push(FockWord { modes });
    }
    for (k, m) in candidates.iter().enumerate().skip(start) {
        // all remaining candidates have weight ≥ -1; prune hard overflows
        if weight + m.weight() > cap + 1 {
            continue;
        }
        current.push(*m);
        collect_subsets(candidates, k + 1, current, cap, out);
        current.pop();
    }
}

/// Verifies the mode-commutator identity
/// `[u_(m), v_(n)] = Σ_{i≥0} C(m,i) (u_(i) v)_(m+n-i)` as an operator
/// identity on the weight-capped basis.
pub fn commutator_check(
    alg: &Arc<VosaBc>,
    u: &FockState,
    m: i64,
    v: &FockState,
    n: i64,
) -> Result<IdentityReport> {
    let du = u.superdegree().ok_or(KernelError::NonHomogeneous {
        index: 0,
        detail: "u must be ghost-homogeneous".into(),
    })?;
    let dv = v.superdegree().ok_or(KernelError::NonHomogeneous {
        index: 1,
        detail: "v must be ghost-homogeneous".into(),
    })?;
    let sign = parity_sign(du * dv);

    // the inner products u_(i) v vanish for i > wt(u) + wt(v)
    let iu = u.weight().map(|w| w).unwrap_or_else(scalar::zero);
    let iv = v.weight().map(|w| w).unwrap_or_else(scalar::zero);
    let bound = (iu + iv)
        .to_integer()
        .try_into()
        .unwrap_or(0i64)
        .max(-1);

    let mut checker = IdentityChecker::new(
        format!("[u_({m}), v_({n})] = Σ C({m},i) (u_(i)v)_({m}+{n}-i)"),
        format!("basis sweep, weight cap {}", alg.weight_cap()),
    );
    for w in alg.basis() {
        let x = Element::basis(w.clone());
        let lhs = alg
            .mode_apply(u, m, &alg.mode_apply(v, n, &x))
            .sub(&alg.mode_apply(v, n, &alg.mode_apply(u, m, &x)).scale(&sign));
        let mut rhs = Element::zero();
        for i in 0..=bound {
            let coeff = binomial(m, i as u32);
            if num_traits::Zero::is_zero(&coeff) {
                continue;
            }
            let uiv = alg.mode_apply(u, i, v);
            if uiv.is_zero() {
                continue;
            }
            rhs.add_scaled(&alg.mode_apply(&uiv, m + n - i, &x), &coeff);
        }
        checker.case(&**alg, &[&x], &lhs, &rhs);
    }
    Ok(checker.finish())
}

/// Primary-field law `[L_m, G_n] = (m - n) G_{m+n}` (weight-indexed) as an
/// operator identity on the capped basis, for `m, n` in a window.
pub fn check_primary(
    alg: &Arc<VosaBc>,
    l_state: &FockState,
    g_state: &FockState,
    g_weight: i64,
    window: std::ops::RangeInclusive<i64>,
) -> Result<IdentityReport> {
    let mut checker = IdentityChecker::new(
        "primary field: [L_m, G_n] = (m-n) G_{m+n}",
        format!(
            "m,n in {:?}, basis sweep at weight cap {}",
            window,
            alg.weight_cap()
        ),
    );
    let basis = alg.basis();
    for m in window.clone() {
        for n in window.clone() {
            // translate weight-indexed L_m, G_n to standard indices
            let lm = weight_to_standard_index(2, m);
            let gn = weight_to_standard_index(g_weight, n);
            let gmn = weight_to_standard_index(g_weight, m + n);
            for w in &basis {
                let x = Element::basis(w.clone());
                // L is ghost-even: supercommutator is the plain commutator
                let lhs = alg
                    .mode_apply(l_state, lm, &alg.mode_apply(g_state, gn, &x))
                    .sub(&alg.mode_apply(g_state, gn, &alg.mode_apply(l_state, lm, &x)));
                let rhs = alg
                    .mode_apply(g_state, gmn, &x)
                    .scale(&scalar::int(m - n));
                checker.case(&**alg, &[&x], &lhs, &rhs);
                if checker.has_failed() {
                    return Ok(checker.finish());
                }
            }
        }
    }
    Ok(checker.finish())
}

#[derive(Debug, serde::Serialize)]
pub struct Theorem22Report {
    pub mode: i64,
    pub vanishing: Option<IdentityReport>,
    pub order_witness: Option<crate::report::OrderWitness>,
    pub left_mult: Option<IdentityReport>,
    pub pass: bool,
}

/// The mode-order theorem: for `n ≥ 0`, `Φ_{u_(n)}^{n+2} ≡ 0` with respect
/// to the Wick product on all capped tuples (with a witness that `Φ^{n+1}`
/// does not vanish, when one exists in the cap); for `n ≤ -1`, the mode is
/// left Wick multiplication by `u_(n)|0>`.
pub fn check_theorem22(alg: &Arc<VosaBc>, u: &FockState, n: i64) -> Result<Theorem22Report> {
    let basis = alg.basis();
    if n >= 0 {
        let op = alg.mode_op(u.clone(), n, format!("u_({n})"));
        let r = (n + 2) as usize;
        let witness = phi_witness(&**alg, &op, r, &basis, false)?;
        let mut checker = IdentityChecker::new(
            format!("Φ^{r} of u_({n}) vanishes (Wick product)"),
            format!("all capped tuples, weight cap {}", alg.weight_cap()),
        );
        match &witness {
            None => {
                let z: FockState = Element::zero();
                checker.case(&**alg, &[], &z, &z);
            }
            Some((tuple, value)) => {
                checker.fail_raw(
                    tuple.iter().map(|w| alg.format_word(w)).collect(),
                    alg.format_element(value),
                    "0".to_string(),
                    alg.format_element(value),
                );
            }
        }
        let vanish_report = checker.finish();
        // a witness that the order is not lower, when the cap affords one
        let lower = phi_witness(&**alg, &op, r - 1, &basis, false)?;
        let order_witness = lower.map(|(tuple, value)| crate::report::OrderWitness {
            r: r - 1,
            args: tuple.iter().map(|w| alg.format_word(w)).collect(),
            value: alg.format_element(&value),
        });
        let pass = vanish_report.pass;
        Ok(Theorem22Report {
            mode: n,
            vanishing: Some(vanish_report),
            order_witness,
            left_mult: None,
            pass,
        })
    } else {
        // left multiplication: u_(n) a = (u_(n)|0>) ×_{-1} a
        let s = alg.mode_apply(u, n, &alg.vacuum());
        let mut checker = IdentityChecker::new(
            format!("u_({n}) is left Wick multiplication (adjusted Φ¹ ≡ 0)"),
            format!("basis sweep, weight cap {}", alg.weight_cap()),
        );
        for w in &basis {
            let a = Element::basis(w.clone());
            let lhs = alg.mode_apply(u, n, &a);
            let rhs = alg.wick(&s, &a);
            checker.case(&**alg, &[&a], &lhs, &rhs);
        }
        let rep = checker.finish();
        let pass = rep.pass;
        Ok(Theorem22Report {
            mode: n,
            vanishing: None,
            order_witness: None,
            left_mult: Some(rep),
            pass,
        })
    }
}

/// The proof-step expansion `Φ_{u_(r)}²(a,b) = Σ_{i=1}^r C(r,i) (u_(r-i)a)_(i-1) b`
/// verified exactly on capped basis pairs.
pub fn check_phi2_expansion(alg: &Arc<VosaBc>, u: &FockState, r: i64) -> Result<IdentityReport> {
    if r < 1 {
        return Err(KernelError::Precondition("r must be ≥ 1".into()));
    }
    let op = alg.mode_op(u.clone(), r, format!("u_({r})"));
    let mut checker = IdentityChecker::new(
        format!("Φ² expansion for u_({r})"),
        format!("basis pairs, weight cap {}", alg.weight_cap()),
    );
    let basis = alg.basis();
    for wa in &basis {
        for wb in &basis {
            if wa.budget() + wb.budget() > alg.weight_cap() {
                continue;
            }
            let a = Element::basis(wa.clone());
            let b = Element::basis(wb.clone());
            let lhs = phi_form(&**alg, &op, &[a.clone(), b.clone()], false)?;
            let mut rhs = Element::zero();
            for i in 1..=r {
                let coeff = binomial(r, i as u32);
                let ua = alg.mode_apply(u, r - i, &a);
                if ua.is_zero() {
                    continue;
                }
                rhs.add_scaled(&alg.mode_apply(&ua, i - 1, &b), &coeff);
            }
            checker.case(&**alg, &[&a, &b], &lhs, &rhs);
            if checker.has_failed() {
                return Ok(checker.finish());
            }
        }
    }
    Ok(checker.finish())
}

/// `L0 - (n+1)·id` is a derivation of the product `×_n`; checked exactly on
/// capped basis pairs for the weight-reading `L0`.
pub fn check_l0_derivation(alg: &Arc<VosaBc>, n: i64) -> Result<IdentityReport> {
    let mut checker = IdentityChecker::new(
        format!("L0 - ({}) id is a derivation of ×_({n})", n + 1),
        format!("basis pairs, weight cap {}", alg.weight_cap()),
    );
    let l0 = alg.l0_op();
    let shift = scalar::int(n + 1);
    let basis = alg.basis();
    for wa in &basis {
        for wb in &basis {
            if wa.budget() + wb.budget() > alg.weight_cap() {
                continue;
            }
            let a = Element::basis(wa.clone());
            let b = Element::basis(wb.clone());
            let prod = alg.mode_apply(&a, n, &b);
            let lhs = l0.apply(&prod).sub(&prod.scale(&shift));
            let da = l0.apply(&a).sub(&a.scale(&shift));
            let db = l0.apply(&b).sub(&b.scale(&shift));
            let rhs = alg.mode_apply(&da, n, &b).add(&alg.mode_apply(&a, n, &db));
            checker.case(&**alg, &[&a, &b], &lhs, &rhs);
        }
    }
    Ok(checker.finish())
}

/// Residues `u_(0)` are derivations of every product `×_n`; swept on capped
/// basis pairs.
pub fn check_residue_derivation(
    alg: &Arc<VosaBc>,
    u: &FockState,
    n: i64,
) -> Result<IdentityReport> {
    let du = u.superdegree().ok_or(KernelError::NonHomogeneous {
        index: 0,
        detail: "u must be ghost-homogeneous".into(),
    })?;
    let mut checker = IdentityChecker::new(
        format!("residue u_(0) is a derivation of ×_({n})"),
        format!("basis pairs, weight cap {}", alg.weight_cap()),
    );
    let basis = alg.basis();
    for wa in &basis {
        for wb in &basis {
            if wa.budget() + wb.budget() > alg.weight_cap() {
                continue;
            }
            let a = Element::basis(wa.clone());
            let b = Element::basis(wb.clone());
            let lhs = alg.mode_apply(u, 0, &alg.mode_apply(&a, n, &b));
            let mut rhs = alg.mode_apply(&alg.mode_apply(u, 0, &a), n, &b);
            rhs.add_scaled(
                &alg.mode_apply(&a, n, &alg.mode_apply(u, 0, &b)),
                &parity_sign(du * wa.superdegree()),
            );
            checker.case(&**alg, &[&a, &b], &lhs, &rhs);
        }
    }
    Ok(checker.finish())
}

#[derive(Debug, serde::Serialize)]
pub struct G0SquareReport {
    pub identities: Vec<IdentityReport>,
    pub pass: bool,
}

/// The mode identities behind the `G_0²`-vanishing argument, with `G := b`:
/// `(G_{-2}G)_0 = -G_0² - [G_1, G_{-1}]` and
/// `(G_1 G)_0 = 2(-2 G_0² + [G_1, G_{-1}])` as exact operator identities,
/// plus `L_3 (G_{-2})²|0> = 5 G_1 G_{-2}|0>` and the weight bookkeeping of
/// the two states involved.
pub fn check_g0_square_identity(alg: &Arc<VosaBc>) -> Result<G0SquareReport> {
    let g = alg.b_state();
    let g_wt = 2i64;
    let basis = alg.basis();

    // weight-indexed G_k as a standard-indexed application
    let g_mode = |k: i64, x: &FockState| alg.mode_apply(&g, weight_to_standard_index(g_wt, k), x);

    let mut identities = Vec::new();

    // (G_{-2} G) = wick(G, G); its weight-zero mode is (·)_(wt-1) = (·)_(3)
    let gg = alg.wick(&g, &g);
    let mut first = IdentityChecker::new(
        "(G_{-2}G)_0 = -G_0² - [G_1,G_{-1}]",
        format!("basis sweep, weight cap {}", alg.weight_cap()),
    );
    for w in &basis {
        let x = Element::basis(w.clone());
        let lhs = if gg.is_zero() {
            Element::zero()
        } else {
            alg.mode_apply(&gg, 3, &x)
        };
        // [G_1, G_{-1}] is an anticommutator: both modes are odd
        let mut rhs = g_mode(0, &g_mode(0, &x)).neg();
        rhs = rhs.sub(&g_mode(1, &g_mode(-1, &x))).sub(&g_mode(-1, &g_mode(1, &x)));
        first.case(&**alg, &[&x], &lhs, &rhs);
    }
    identities.push(first.finish());

    // (G_1 G): weight 0 state? wt = 2 + 2 - (1) - ... use standard index 2
    let g1g = alg.mode_apply(&g, 2, &g);
    let mut second = IdentityChecker::new(
        "(G_1G)_0 = 2(-2G_0² + [G_1,G_{-1}])",
        format!("basis sweep, weight cap {}", alg.weight_cap()),
    );
    for w in &basis {
        let x = Element::basis(w.clone());
        // (G_1 G) has weight 1; its weight-zero mode is (·)_(0)
        let lhs = if g1g.is_zero() {
            Element::zero()
        } else {
            alg.mode_apply(&g1g, 0, &x)
        };
        let mut rhs = g_mode(0, &g_mode(0, &x)).scale(&scalar::int(-4));
        rhs.add_scaled(&g_mode(1, &g_mode(-1, &x)), &scalar::int(2));
        rhs.add_scaled(&g_mode(-1, &g_mode(1, &x)), &scalar::int(2));
        second.case(&**alg, &[&x], &lhs, &rhs);
    }
    identities.push(second.finish());

    // L_3 (G_{-2})²|0> = 5 G_1 G_{-2}|0> (both sides vanish for G = b)
    let l = alg.stress_state();
    let gm2_sq = alg.state_from_modes(&[(Gen::B, -2), (Gen::B, -2)]);
    let lhs = alg.mode_apply(&l, 3 + 1, &gm2_sq);
    let rhs = alg
        .state_from_modes(&[(Gen::B, 1), (Gen::B, -2)])
        .scale(&scalar::int(5));
    let mut third = IdentityChecker::new(
        "L_3 (G_{-2})²|0> = 5 G_1 G_{-2}|0>",
        "single state".to_string(),
    );
    third.case(&**alg, &[&gm2_sq], &lhs, &rhs);
    identities.push(third.finish());

    // weight bookkeeping: applying L_3 = L_(4) shifts weight by -3
    let mut fourth = IdentityChecker::new(
        "L_3 shifts weight by -3 (states of weight 4 map to weight 1)",
        format!("weight-4 basis states, cap {}", alg.weight_cap()),
    );
    for w in &basis {
        if w.weight_i64() != 4 {
            continue;
        }
        let x = Element::basis(w.clone());
        let y = alg.mode_apply(&l, 4, &x);
        if y.is_zero() {
            fourth.case(&**alg, &[&x], &Element::zero(), &Element::zero());
            continue;
        }
        match y.weight() {
            Some(wt) if wt == scalar::int(1) => {
                fourth.case(&**alg, &[&x], &y, &y);
            }
            _ => fourth.fail_raw(
                vec![alg.format_word(w)],
                alg.format_element(&y),
                "a weight-1 state".into(),
                alg.format_element(&y),
            ),
        }
    }
    identities.push(fourth.finish());

    let pass = identities.iter().all(|r| r.pass);
    Ok(G0SquareReport { identities, pass })
}

/// Order classification of a mode operator over the capped basis.
pub fn classify_mode_order(alg: &Arc<VosaBc>, u: &FockState, n: i64, r_max: usize) -> Result<OrderReport> {
    let op = alg.mode_op(u.clone(), n, format!("u_({n})"));
    let basis = alg.basis();
    classify_order(&**alg, &op, r_max, &basis, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::validate_flags;

    fn bc(cap: i64) -> Arc<VosaBc> {
        make_bc_system(cap)
    }

    #[test]
    fn vacuum_conditions() {
        let alg = bc(4);
        // b_n|0> = 0 for n ≥ -1, i.e. b_(n)|0> = 0 for n ≥ 0
        for n in 0..4 {
            assert!(alg.mode_apply(&alg.b_state(), n, &alg.vacuum()).is_zero());
        }
        // c_m|0> = 0 for m ≥ 2, i.e. c_(n)|0> = 0 for n ≥ 0
        for n in 0..4 {
            assert!(alg.mode_apply(&alg.c_state(), n, &alg.vacuum()).is_zero());
        }
        // creation states
        assert_eq!(alg.wick(&alg.b_state(), &alg.vacuum()), alg.b_state());
        assert_eq!(alg.wick(&alg.c_state(), &alg.vacuum()), alg.c_state());
    }

    #[test]
    fn anticommutators_of_generator_modes() {
        let alg = bc(4);
        // {b_m, c_n} = δ_{m+n,0} on a sweep of weight-indexed modes
        for m in -3..=3i64 {
            for n in -3..=3i64 {
                for w in alg.basis() {
                    let x = Element::basis(w.clone());
                    let bm = |s: &FockState| {
                        alg.apply_weight_mode(
                            Mode {
                                gen: Gen::B,
                                index: m,
                            },
                            s,
                        )
                    };
                    let cn = |s: &FockState| {
                        alg.apply_weight_mode(
                            Mode {
                                gen: Gen::C,
                                index: n,
                            },
                            s,
                        )
                    };
                    let anti = bm(&cn(&x)).add(&cn(&bm(&x)));
                    let expected = if m + n == 0 { x.clone() } else { Element::zero() };
                    assert_eq!(anti, expected, "m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn wick_square_of_b_vanishes() {
        let alg = bc(4);
        assert!(alg.wick(&alg.b_state(), &alg.b_state()).is_zero());
        let bc_state = alg.wick(&alg.b_state(), &alg.c_state());
        assert!(!bc_state.is_zero());
        assert_eq!(bc_state.superdegree(), Some(0));
        assert_eq!(bc_state.weight(), Some(scalar::int(1)));
    }

    #[test]
    fn vacuum_is_wick_identity() {
        let alg = bc(3);
        validate_flags(&*alg).unwrap();
    }

    #[test]
    fn stress_state_reads_weights() {
        let alg = bc(5);
        let l = alg.stress_state();
        assert_eq!(l.weight(), Some(scalar::int(2)));
        assert_eq!(l.superdegree(), Some(0));
        // L_(1) = L_0 reads the weight on every capped basis state
        for w in alg.basis() {
            let x = Element::basis(w.clone());
            let lx = alg.mode_apply(&l, 1, &x);
            assert_eq!(
                lx,
                x.scale(&scalar::int(w.weight_i64())),
                "L_0 failed on {}",
                alg.format_word(&w)
            );
        }
    }

    #[test]
    fn l_is_primary_window() {
        let alg = bc(4);
        let rep = check_primary(&alg, &alg.stress_state(), &alg.b_state(), 2, -2..=2).unwrap();
        assert!(rep.pass, "{rep:#?}");
    }

    #[test]
    fn geb2_commutator_identity_on_bc() {
        let alg = bc(3);
        for (m, n) in [(-1, -1), (0, 2), (1, -2), (2, 1)] {
            let r = commutator_check(&alg, &alg.b_state(), m, &alg.b_state(), n).unwrap();
            assert!(r.pass, "bb ({m},{n}): {r:#?}");
            let r = commutator_check(&alg, &alg.b_state(), m, &alg.c_state(), n).unwrap();
            assert!(r.pass, "bc ({m},{n}): {r:#?}");
        }
        let l = alg.stress_state();
        let r = commutator_check(&alg, &l, 1, &alg.b_state(), 0).unwrap();
        assert!(r.pass, "Lb: {r:#?}");
    }

    #[test]
    fn weight_bookkeeping_of_mode_application() {
        let alg = bc(4);
        let states = [
            alg.b_state(),
            alg.c_state(),
            alg.stress_state(),
            alg.wick(&alg.b_state(), &alg.c_state()),
        ];
        for u in &states {
            let wu = u.weight().unwrap();
            for v in &states {
                let wv = v.weight().unwrap();
                for n in -3..=3i64 {
                    let r = alg.mode_apply(u, n, v);
                    if r.is_zero() {
                        continue;
                    }
                    let expected = wu.clone() + wv.clone() - scalar::int(n + 1);
                    assert_eq!(r.weight(), Some(expected));
                }
            }
        }
    }

    #[test]
    fn theorem22_residue_is_derivation() {
        let alg = bc(3);
        let rep = check_theorem22(&alg, &alg.b_state(), 0).unwrap();
        assert!(rep.pass, "{rep:#?}");
    }

    #[test]
    fn theorem22_left_multiplication_modes() {
        let alg = bc(3);
        for n in [-1, -2] {
            let rep = check_theorem22(&alg, &alg.b_state(), n).unwrap();
            assert!(rep.pass, "n={n}: {rep:#?}");
        }
    }

    #[test]
    fn phi2_expansion_small() {
        let alg = bc(3);
        let rep = check_phi2_expansion(&alg, &alg.b_state(), 1).unwrap();
        assert!(rep.pass, "{rep:#?}");
    }

    #[test]
    fn l0_derivation_of_wick() {
        let alg = bc(3);
        let rep = check_l0_derivation(&alg, -1).unwrap();
        assert!(rep.pass, "{rep:#?}");
    }

    #[test]
    fn b0_is_a_gbva_operator() {
        let alg = bc(3);
        let inst =
            crate::bracket::GbvaInstance::validate(alg.clone(), alg.delta_b0()).unwrap();
        assert!(inst.checked.all(), "{:?}", inst.checked);
    }

    #[test]
    fn index_conversions_are_mutually_inverse() {
        for wt in [-1i64, 0, 2] {
            for n in -5..=5i64 {
                assert_eq!(
                    standard_to_weight_index(wt, weight_to_standard_index(wt, n)),
                    n
                );
                assert_eq!(
                    weight_to_standard_index(wt, standard_to_weight_index(wt, n)),
                    n
                );
            }
        }
        // the b-field state b_{-2}|0> is b_(-1)|0>, and its BV mode b_0 = b_(1)
        assert_eq!(weight_to_standard_index(2, -2), -1);
        assert_eq!(weight_to_standard_index(2, 0), 1);
        // the c-field state c_1|0> is c_(-1)|0>
        assert_eq!(weight_to_standard_index(-1, 1), -1);
    }

    #[test]
    fn weight_component_extraction_is_exact() {
        let alg = bc(4);
        let mixed = alg
            .b_state()
            .add(&alg.c_state().scale(&scalar::int(3)))
            .add(&alg.wick(&alg.b_state(), &alg.c_state()));
        let parts = mixed.weight_components();
        assert_eq!(parts.len(), 3);
        let mut total = Element::zero();
        for (wt, part) in &parts {
            assert_eq!(&part.weight(), wt);
            total = total.add(part);
        }
        assert_eq!(total, mixed);
        assert_eq!(parts[&Some(scalar::int(2))], alg.b_state());
    }

    #[test]
    fn g0_square_mode_identities() {
        let alg = bc(4);
        let rep = check_g0_square_identity(&alg).unwrap();
        assert!(rep.pass, "{rep:#?}");
    }

    #[test]
    fn residues_are_derivations_of_every_product() {
        let alg = bc(3);
        for n in [-2i64, 0, 1] {
            let rep = check_residue_derivation(&alg, &alg.b_state(), n).unwrap();
            assert!(rep.pass, "n={n}: {rep:#?}");
        }
    }

    #[test]
    fn l0_shifted_derivations_of_other_products() {
        let alg = bc(3);
        for n in [-2i64, 0, 1] {
            let rep = check_l0_derivation(&alg, n).unwrap();
            assert!(rep.pass, "n={n}: {rep:#?}");
        }
    }

    #[test]
    fn mode_order_classification() {
        // b_(1) is a genuine second-order operator for the Wick product
        let alg = bc(3);
        let rep = classify_mode_order(&alg, &alg.b_state(), 1, 3).unwrap();
        assert_eq!(rep.order, Some(2), "{rep:#?}");
    }
}
