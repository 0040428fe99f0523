//! Identity and order reports. Every verification is residual-style: an
//! identity is checked as "LHS - RHS = 0 as an element", so a failure always
//! carries a re-checkable counterexample.

use serde::Serialize;

use crate::algebra::Superalgebra;
use crate::element::Element;

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub inputs: Vec<String>,
    pub lhs: String,
    pub rhs: String,
    pub residual: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub domain: String,
    pub cases: usize,
    /// How many cases had a nonzero side; guards against vacuous passes.
    pub nonzero_cases: usize,
    pub pass: bool,
    pub counterexample: Option<Counterexample>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.pass
    }
}

/// Accumulates residual checks for one named identity. Records the first
/// counterexample and keeps counting cases (cheap, and the counts make
/// reports comparable across runs).
pub struct IdentityChecker {
    name: String,
    domain: String,
    cases: usize,
    nonzero_cases: usize,
    counterexample: Option<Counterexample>,
}

impl IdentityChecker {
    pub fn new(name: impl Into<String>, domain: impl Into<String>) -> Self {
        IdentityChecker {
            name: name.into(),
            domain: domain.into(),
            cases: 0,
            nonzero_cases: 0,
            counterexample: None,
        }
    }

    pub fn case<A: Superalgebra + ?Sized>(
        &mut self,
        alg: &A,
        inputs: &[&Element<A::W>],
        lhs: &Element<A::W>,
        rhs: &Element<A::W>,
    ) {
        self.cases += 1;
        if !lhs.is_zero() || !rhs.is_zero() {
            self.nonzero_cases += 1;
        }
        if lhs != rhs && self.counterexample.is_none() {
            self.counterexample = Some(Counterexample {
                inputs: inputs.iter().map(|e| alg.format_element(e)).collect(),
                lhs: alg.format_element(lhs),
                rhs: alg.format_element(rhs),
                residual: alg.format_element(&lhs.sub(rhs)),
            });
        }
    }

    /// Records an already-diagnosed failure with preformatted data.
    pub fn fail_raw(&mut self, inputs: Vec<String>, lhs: String, rhs: String, residual: String) {
        self.cases += 1;
        self.nonzero_cases += 1;
        if self.counterexample.is_none() {
            self.counterexample = Some(Counterexample {
                inputs,
                lhs,
                rhs,
                residual,
            });
        }
    }

    pub fn has_failed(&self) -> bool {
        self.counterexample.is_some()
    }

    pub fn finish(self) -> IdentityReport {
        IdentityReport {
            name: self.name,
            domain: self.domain,
            cases: self.cases,
            nonzero_cases: self.nonzero_cases,
            pass: self.counterexample.is_none(),
            counterexample: self.counterexample,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderWitness {
    pub r: usize,
    pub args: Vec<String>,
    pub value: String,
}

/// Result of classifying a differential operator's order on a swept domain.
#[derive(Clone, Debug, Serialize)]
pub struct OrderReport {
    pub label: String,
    pub r_max: usize,
    pub domain: String,
    /// Least `r` with `Φ^{r+1} ≡ 0` on the domain; `None` if every tested
    /// form up to `Φ^{r_max+1}` had a nonvanishing tuple.
    pub order: Option<usize>,
    /// One witness per nonvanishing form `Φ^r`, `r = 1..=order`.
    pub witnesses: Vec<OrderWitness>,
}

impl OrderReport {
    pub fn order_is(&self, r: usize) -> bool {
        self.order == Some(r)
    }
}

pub fn all_pass(reports: &[IdentityReport]) -> bool {
    reports.iter().all(|r| r.pass)
}
