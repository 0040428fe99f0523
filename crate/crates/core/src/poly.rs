//! `Q[x_1..x_m] ⊗ Λ(t_1..t_k)`: the free supercommutative algebra on even
//! and odd generators, truncated above a total even-variable degree cap.
//!
//! Words are (exponent vector, odd-generator bitmask) pairs; the odd part is
//! kept with strictly increasing indices and the Koszul sign of any reorder
//! is absorbed into the coefficient. Products whose even degree exceeds the
//! cap map to zero, which turns the algebra into a finite-dimensional
//! quotient where operator equality is decidable. Sweeps guard against the
//! cap so asserted identities never see truncation artifacts.

use std::sync::Arc;

use crate::algebra::{AlgebraFlags, Superalgebra};
use crate::element::{Element, Word};
use crate::error::{KernelError, Result};
use crate::linop::LinOp;
use crate::scalar::{self};

/// Basis word: `x^e * t_S` with `e` the exponent vector and `S` the set of
/// odd indices (bitmask, ascending order).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct GradedWord {
    pub evens: Vec<u16>,
    pub odds: u32,
}

impl GradedWord {
    pub fn one(n_even: usize) -> Self {
        GradedWord {
            evens: vec![0; n_even],
            odds: 0,
        }
    }

    pub fn even_degree(&self) -> i64 {
        self.evens.iter().map(|&e| e as i64).sum()
    }

    pub fn odd_count(&self) -> u32 {
        self.odds.count_ones()
    }

    pub fn odd_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..32).filter(move |i| self.odds & (1 << i) != 0)
    }
}

impl Word for GradedWord {
    fn superdegree(&self) -> i64 {
        self.odd_count() as i64
    }

    fn budget(&self) -> i64 {
        self.even_degree()
    }
}

/// Sign of merging two ascending odd-index sets, or `None` when they share a
/// generator (the product is zero). The sign counts the transpositions that
/// interleave the second set past the first.
fn merge_odds(a: u32, b: u32) -> Option<(u32, bool)> {
    if a & b != 0 {
        return None;
    }
    let mut transpositions = 0u32;
    for i in 0..32 {
        if b & (1 << i) != 0 {
            // pass this b-generator left past all a-generators above index i
            transpositions += (a >> (i + 1)).count_ones();
        }
    }
    Some((a | b, transpositions % 2 == 1))
}

pub struct PolyAlgebra {
    name: String,
    n_even: usize,
    n_odd: usize,
    cap: i64,
    even_names: Vec<String>,
    odd_names: Vec<String>,
}

impl PolyAlgebra {
    pub fn n_even(&self) -> usize {
        self.n_even
    }

    pub fn n_odd(&self) -> usize {
        self.n_odd
    }

    pub fn cap(&self) -> i64 {
        self.cap
    }

    pub fn with_names(mut self, even: &str, odd: &str) -> Self {
        self.even_names = (1..=self.n_even).map(|i| format!("{even}{i}")).collect();
        self.odd_names = (1..=self.n_odd).map(|i| format!("{odd}{i}")).collect();
        self
    }

    pub fn with_name_lists(mut self, even: Vec<String>, odd: Vec<String>) -> Self {
        assert_eq!(even.len(), self.n_even);
        assert_eq!(odd.len(), self.n_odd);
        self.even_names = even;
        self.odd_names = odd;
        self
    }

    pub fn rename(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn even_gen(&self, i: usize) -> Element<GradedWord> {
        assert!(i < self.n_even, "even generator index out of range");
        let mut w = GradedWord::one(self.n_even);
        w.evens[i] = 1;
        Element::basis(w)
    }

    pub fn odd_gen(&self, i: usize) -> Element<GradedWord> {
        assert!(i < self.n_odd, "odd generator index out of range");
        let mut w = GradedWord::one(self.n_even);
        w.odds = 1 << i;
        Element::basis(w)
    }

    /// Monomial `x^exps * t_S` as an element.
    pub fn monomial(&self, exps: &[u16], odds: &[usize]) -> Element<GradedWord> {
        let mut w = GradedWord::one(self.n_even);
        w.evens[..exps.len()].copy_from_slice(exps);
        for &i in odds {
            assert!(w.odds & (1 << i) == 0, "repeated odd generator");
            w.odds |= 1 << i;
        }
        Element::basis(w)
    }
}

/// `Q[x_1..x_{n_even}] ⊗ Λ(t_1..t_{n_odd})` truncated above even degree
/// `cap`. Flags are classical and mechanically validated in tests.
pub fn make_polynomial_superalgebra(n_even: usize, n_odd: usize, cap: i64) -> Result<Arc<PolyAlgebra>> {
    if cap < 1 {
        return Err(KernelError::Construction(
            "degree cap must be at least 1".into(),
        ));
    }
    if n_odd > 32 {
        return Err(KernelError::Construction(
            "at most 32 odd generators supported".into(),
        ));
    }
    Ok(Arc::new(PolyAlgebra {
        name: format!("Q[x;{n_even}]⊗Λ(t;{n_odd}) cap {cap}"),
        n_even,
        n_odd,
        cap,
        even_names: (1..=n_even).map(|i| format!("x{i}")).collect(),
        odd_names: (1..=n_odd).map(|i| format!("t{i}")).collect(),
    }))
}

impl Superalgebra for PolyAlgebra {
    type W = GradedWord;

    fn name(&self) -> &str {
        &self.name
    }

    fn mul_words(&self, u: &GradedWord, v: &GradedWord) -> Element<GradedWord> {
        assert_eq!(
            u.evens.len(),
            v.evens.len(),
            "words from different ambient dimensions"
        );
        let total: i64 = u.even_degree() + v.even_degree();
        if total > self.cap {
            return Element::zero();
        }
        let (odds, neg) = match merge_odds(u.odds, v.odds) {
            None => return Element::zero(),
            Some(m) => m,
        };
        let evens = u
            .evens
            .iter()
            .zip(v.evens.iter())
            .map(|(a, b)| a + b)
            .collect();
        let coeff = if neg { -scalar::one() } else { scalar::one() };
        Element::single(GradedWord { evens, odds }, coeff)
    }

    fn unit_word(&self) -> Option<GradedWord> {
        Some(GradedWord::one(self.n_even))
    }

    fn flags(&self) -> AlgebraFlags {
        AlgebraFlags::classical()
    }

    fn basis(&self) -> Vec<GradedWord> {
        let mut exps = Vec::new();
        enumerate_exponents(self.n_even, self.cap, &mut vec![0; self.n_even], 0, &mut exps);
        let mut words = Vec::new();
        for mask in 0u32..(1 << self.n_odd) {
            for e in &exps {
                words.push(GradedWord {
                    evens: e.clone(),
                    odds: mask,
                });
            }
        }
        words.sort();
        words
    }

    fn budget_cap(&self) -> Option<i64> {
        Some(self.cap)
    }

    fn format_word(&self, w: &GradedWord) -> String {
        let mut parts = Vec::new();
        for (i, &e) in w.evens.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(self.even_names[i].clone()),
                _ => parts.push(format!("{}^{}", self.even_names[i], e)),
            }
        }
        for i in w.odd_indices() {
            parts.push(self.odd_names[i].clone());
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    fn generators(&self) -> Vec<Element<GradedWord>> {
        let mut gens = Vec::new();
        for i in 0..self.n_even {
            gens.push(self.even_gen(i));
        }
        for i in 0..self.n_odd {
            gens.push(self.odd_gen(i));
        }
        gens
    }
}

fn enumerate_exponents(
    n: usize,
    cap: i64,
    current: &mut Vec<u16>,
    pos: usize,
    out: &mut Vec<Vec<u16>>,
) {
    if pos == n {
        out.push(current.clone());
        return;
    }
    let used: i64 = current[..pos].iter().map(|&e| e as i64).sum();
    for e in 0..=(cap - used) as u16 {
        current[pos] = e;
        enumerate_exponents(n, cap, current, pos + 1, out);
    }
    current[pos] = 0;
}

/// `∂/∂x_i`: an even derivation.
pub fn partial_even(alg: &Arc<PolyAlgebra>, i: usize) -> LinOp<GradedWord> {
    assert!(i < alg.n_even);
    let label = format!("d/d{}", alg.even_names[i]);
    LinOp::new(label, 0, move |w: &GradedWord| {
        let e = w.evens[i];
        if e == 0 {
            return Element::zero();
        }
        let mut out = w.clone();
        out.evens[i] = e - 1;
        Element::single(out, scalar::int(e as i64))
    })
}

/// `∂/∂t_i`: an odd derivation; the Koszul sign counts the odd generators
/// standing left of `t_i` in the canonical word.
pub fn partial_odd(alg: &Arc<PolyAlgebra>, i: usize) -> LinOp<GradedWord> {
    assert!(i < alg.n_odd);
    let label = format!("d/d{}", alg.odd_names[i]);
    LinOp::new(label, -1, move |w: &GradedWord| {
        if w.odds & (1 << i) == 0 {
            return Element::zero();
        }
        let before = (w.odds & ((1u32 << i) - 1)).count_ones();
        let mut out = w.clone();
        out.odds &= !(1 << i);
        Element::single(out, scalar::parity_sign(before as i64))
    })
}

/// The classical BV operator `Δ = Σ_i ∂/∂x_i ∂/∂t_i` over the first
/// `min(n_even, n_odd)` matched pairs.
pub fn classical_bv_delta(alg: &Arc<PolyAlgebra>) -> LinOp<GradedWord> {
    let pairs = alg.n_even.min(alg.n_odd);
    assert!(pairs > 0, "need at least one (x, t) pair");
    let mut op: Option<LinOp<GradedWord>> = None;
    for i in 0..pairs {
        let term = partial_even(alg, i).compose(&partial_odd(alg, i));
        op = Some(match op {
            None => term,
            Some(prev) => prev.add(&term).expect("matched superdegrees"),
        });
    }
    op.unwrap().relabel("Δ=Σ d/dx_i d/dt_i")
}

/// Euler-type degree operator reading total (even + odd) degree.
pub fn euler_operator(_alg: &Arc<PolyAlgebra>) -> LinOp<GradedWord> {
    LinOp::new("euler", 0, |w: &GradedWord| {
        let deg = w.even_degree() + w.odd_count() as i64;
        Element::single(w.clone(), scalar::int(deg))
    })
}
