//! Finite-dimensional superalgebras given by an explicit multiplication
//! table on generators. No commutativity or associativity is assumed, which
//! is exactly what the strongest bracket-identity oracles need.

use std::sync::Arc;

use rand::Rng;

use crate::algebra::{AlgebraFlags, Superalgebra};
use crate::element::{Element, Word};
use crate::error::{KernelError, Result};
use crate::random::SuiteRng;
use crate::scalar::{self};

/// Generator word: index plus its declared superdegree (words carry their
/// degree so signs never need the algebra handle).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ScWord {
    pub index: u8,
    pub degree: i64,
}

impl Word for ScWord {
    fn superdegree(&self) -> i64 {
        self.degree
    }
}

#[derive(Debug)]
pub struct ScAlgebra {
    name: String,
    degrees: Vec<i64>,
    table: Vec<Vec<Element<ScWord>>>,
    flags: AlgebraFlags,
    unit: Option<usize>,
}

impl ScAlgebra {
    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn gen(&self, i: usize) -> Element<ScWord> {
        Element::basis(ScWord {
            index: i as u8,
            degree: self.degrees[i],
        })
    }
}

/// Builds the algebra from a full generator-pair table. Every entry must be
/// superdegree-additive; violations are rejected at construction.
pub fn make_structure_constant_algebra(
    name: impl Into<String>,
    degrees: Vec<i64>,
    table: Vec<Vec<Element<ScWord>>>,
    flags: AlgebraFlags,
    unit: Option<usize>,
) -> Result<Arc<ScAlgebra>> {
    let n = degrees.len();
    if table.len() != n || table.iter().any(|row| row.len() != n) {
        return Err(KernelError::Construction(format!(
            "table must be {n}x{n}"
        )));
    }
    for (i, row) in table.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            let expected = degrees[i] + degrees[j];
            for w in entry.words() {
                if w.degree != degrees[w.index as usize] {
                    return Err(KernelError::Construction(format!(
                        "entry ({i},{j}) names generator {} with wrong degree",
                        w.index
                    )));
                }
                if w.superdegree() != expected {
                    return Err(KernelError::Construction(format!(
                        "entry ({i},{j}) has superdegree {}, expected {expected}",
                        w.superdegree()
                    )));
                }
            }
        }
    }
    let alg = Arc::new(ScAlgebra {
        name: name.into(),
        degrees,
        table,
        flags,
        unit,
    });
    crate::algebra::validate_flags(&*alg)?;
    Ok(alg)
}

impl Superalgebra for ScAlgebra {
    type W = ScWord;

    fn name(&self) -> &str {
        &self.name
    }

    fn mul_words(&self, u: &ScWord, v: &ScWord) -> Element<ScWord> {
        self.table[u.index as usize][v.index as usize].clone()
    }

    fn unit_word(&self) -> Option<ScWord> {
        self.unit.map(|i| ScWord {
            index: i as u8,
            degree: self.degrees[i],
        })
    }

    fn flags(&self) -> AlgebraFlags {
        self.flags
    }

    fn basis(&self) -> Vec<ScWord> {
        (0..self.dim())
            .map(|i| ScWord {
                index: i as u8,
                degree: self.degrees[i],
            })
            .collect()
    }

    fn format_word(&self, w: &ScWord) -> String {
        format!("g{}", w.index + 1)
    }

    fn generators(&self) -> Vec<Element<ScWord>> {
        (0..self.dim()).map(|i| self.gen(i)).collect()
    }
}

/// A pseudo-random noncommutative, nonassociative superalgebra: degrees are
/// drawn from `{0, 1, 2}` and each table entry is a random combination of
/// the generators in the matching degree (possibly zero). Deterministic in
/// the seed.
pub fn random_superalgebra(dim: usize, seed: u64) -> Arc<ScAlgebra> {
    assert!((1..=16).contains(&dim));
    let mut rng = SuiteRng::new(seed).fork("structconst");
    let degrees: Vec<i64> = (0..dim).map(|_| rng.rng().gen_range(0..=2)).collect();
    let mut table = vec![vec![Element::zero(); dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            let target = degrees[i] + degrees[j];
            let mut entry = Element::zero();
            for (k, &dk) in degrees.iter().enumerate() {
                if dk == target {
                    let c = rng.rng().gen_range(-3i64..=3);
                    if c != 0 {
                        entry.add_term(
                            ScWord {
                                index: k as u8,
                                degree: dk,
                            },
                            scalar::int(c),
                        );
                    }
                }
            }
            table[i][j] = entry;
        }
    }
    make_structure_constant_algebra(
        format!("random-sc-{dim}-seed{seed}"),
        degrees,
        table,
        AlgebraFlags::default(),
        None,
    )
    .expect("random table is degree-additive by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::multiply;

    #[test]
    fn one_dimensional_idempotent() {
        let e = Element::basis(ScWord {
            index: 0,
            degree: 0,
        });
        let alg = make_structure_constant_algebra(
            "idem",
            vec![0],
            vec![vec![e.clone()]],
            AlgebraFlags {
                supercommutative: true,
                associative: true,
                unital: true,
            },
            Some(0),
        )
        .unwrap();
        assert_eq!(multiply(&*alg, &alg.gen(0), &alg.gen(0)), alg.gen(0));
    }

    #[test]
    fn degree_violations_rejected() {
        let bad = Element::basis(ScWord {
            index: 0,
            degree: 1,
        });
        let err = make_structure_constant_algebra(
            "bad",
            vec![1],
            vec![vec![bad]],
            AlgebraFlags::default(),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, KernelError::Construction(_)));
    }

    #[test]
    fn random_tables_are_degree_additive() {
        for seed in 0..4 {
            let alg = random_superalgebra(5, seed);
            for u in alg.basis() {
                for v in alg.basis() {
                    let prod = alg.mul_words(&u, &v);
                    for w in prod.words() {
                        assert_eq!(w.superdegree(), u.superdegree() + v.superdegree());
                    }
                }
            }
        }
    }

    #[test]
    fn same_seed_same_algebra() {
        let a = random_superalgebra(4, 7);
        let b = random_superalgebra(4, 7);
        for u in a.basis() {
            for v in a.basis() {
                assert_eq!(a.mul_words(&u, &v), b.mul_words(&u, &v));
            }
        }
    }
}
