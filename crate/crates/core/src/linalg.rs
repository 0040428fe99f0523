//! Exact linear algebra over the rationals: rank, kernels, span membership.
//! Matrices here are small (complex truncations), so straightforward
//! fraction-free style elimination with rational pivots is plenty.

use num_traits::Zero;

use crate::element::{Element, Word};
use crate::scalar::Scalar;

/// Indexes a finite list of basis words so elements convert to coordinate
/// vectors and back.
pub struct WordIndex<W: Word> {
    pub words: Vec<W>,
    index: std::collections::HashMap<W, usize>,
}

impl<W: Word> WordIndex<W> {
    pub fn new(words: Vec<W>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        WordIndex { words, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// `None` when the element has support outside the indexed words.
    pub fn to_vec(&self, e: &Element<W>) -> Option<Vec<Scalar>> {
        let mut v = vec![Scalar::zero(); self.words.len()];
        for (w, c) in e.iter() {
            let i = self.index.get(w)?;
            v[*i] = c.clone();
        }
        Some(v)
    }

    pub fn from_vec(&self, v: &[Scalar]) -> Element<W> {
        Element::from_terms(
            v.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (self.words[i].clone(), c.clone())),
        )
    }

    /// Matrix of a word-action restricted to this slice; `None` if the
    /// action leaves it.
    pub fn operator_matrix<F>(&self, mut action: F) -> Option<Matrix>
    where
        F: FnMut(&W) -> Element<W>,
    {
        let n = self.len();
        let mut m = Matrix::zero(n, n);
        for (j, w) in self.words.iter().enumerate() {
            let img = action(w);
            let col = self.to_vec(&img)?;
            for (i, v) in col.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Some(m)
    }
}

#[derive(Clone, Debug)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Vec<Scalar>>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![vec![Scalar::zero(); cols]; rows],
        }
    }

    pub fn from_rows(data: Vec<Vec<Scalar>>) -> Self {
        let rows = data.len();
        let cols = data.first().map(|r| r.len()).unwrap_or(0);
        assert!(data.iter().all(|r| r.len() == cols));
        Matrix { rows, cols, data }
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i][j] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i][j]
    }

    /// Reduced row echelon form; returns the pivot column list.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.data[r][col].is_zero()) else {
                continue;
            };
            self.data.swap(row, p);
            let inv = self.data[row][col].clone();
            for j in col..self.cols {
                let v = self.data[row][j].clone() / inv.clone();
                self.data[row][j] = v;
            }
            for r in 0..self.rows {
                if r != row && !self.data[r][col].is_zero() {
                    let factor = self.data[r][col].clone();
                    for j in col..self.cols {
                        let v = self.data[r][j].clone()
                            - factor.clone() * self.data[row][j].clone();
                        self.data[r][j] = v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// A basis of the right null space (vectors of length `cols`).
    pub fn nullspace(&self) -> Vec<Vec<Scalar>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = Vec::new();
        for &fc in &free {
            let mut v = vec![Scalar::zero(); self.cols];
            v[fc] = crate::scalar::one();
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = -m.data[ri][fc].clone();
            }
            basis.push(v);
        }
        basis
    }
}

/// The column span of a set of vectors, supporting repeated membership
/// queries. Stored as the rref of the transposed stack (row space).
pub struct Span {
    dim: usize,
    rref_rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl Span {
    pub fn new(vectors: &[Vec<Scalar>], dim: usize) -> Self {
        let mut m = Matrix::from_rows(
            vectors
                .iter()
                .map(|v| {
                    assert_eq!(v.len(), dim);
                    v.clone()
                })
                .collect(),
        );
        if vectors.is_empty() {
            return Span {
                dim,
                rref_rows: Vec::new(),
                pivots: Vec::new(),
            };
        }
        let pivots = m.rref();
        let rref_rows = m.data.into_iter().take(pivots.len()).collect();
        Span {
            dim,
            rref_rows,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Exact membership: reduce `v` against the rref rows and test for zero.
    pub fn contains(&self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.dim);
        let mut r = v.to_vec();
        for (row, &pc) in self.rref_rows.iter().zip(self.pivots.iter()) {
            if !r[pc].is_zero() {
                let factor = r[pc].clone();
                for j in 0..self.dim {
                    let val = r[j].clone() - factor.clone() * row[j].clone();
                    r[j] = val;
                }
            }
        }
        r.iter().all(|x| x.is_zero())
    }
}
