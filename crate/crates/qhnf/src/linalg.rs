//! Exact elimination over a [`Scalar`] ring.
//!
//! [`Echelon`] incrementally row-reduces a list of vectors, choosing as pivot
//! the highest-priority coordinate that holds a unit.  With full reduction
//! the pivot set over a field is the greedy one for the priority order, so
//! the complement spanned by the remaining coordinates depends only on the
//! span and the order.  Only units are ever divided by, so no fraction-free
//! scheme is needed: over `Q` every division is exact.

use crate::scalar::Scalar;

/// Relative cut below which an entry is not preferred as pivot.
const RELATIVE_PIVOT_CUT: f64 = 1e-6;

#[derive(Clone, Debug)]
struct Row<S> {
    pivot: usize,
    vec: Vec<S>,
    /// Expresses `vec` in the inserted vectors.
    combo: Vec<S>,
}

/// Result of reducing a target vector against an [`Echelon`].
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction<S> {
    /// Coefficients on the inserted vectors; dependent ones stay zero.
    pub coeffs: Vec<S>,
    /// Remainder, supported on non-pivot coordinates only.
    pub residual: Vec<S>,
}

impl<S: Scalar> Reduction<S> {
    pub fn in_span(&self) -> bool {
        self.residual.iter().all(|c| c.negligible())
    }
}

/// Incremental Gauss-Jordan reduction with a coordinate priority order.
#[derive(Clone, Debug)]
pub struct Echelon<S> {
    dim: usize,
    /// `rank_of[c]` is the position of coordinate `c` in the scan order.
    rank_of: Vec<usize>,
    rows: Vec<Row<S>>,
    inserted: usize,
    kernel: Vec<Vec<S>>,
}

impl<S: Scalar> Echelon<S> {
    /// `scan` lists every coordinate once, highest priority first.
    pub fn new(dim: usize, scan: &[usize]) -> Self {
        assert_eq!(scan.len(), dim, "scan order must list every coordinate");
        let mut rank_of = vec![usize::MAX; dim];
        for (r, &c) in scan.iter().enumerate() {
            assert!(rank_of[c] == usize::MAX, "duplicate coordinate in scan order");
            rank_of[c] = r;
        }
        Echelon {
            dim,
            rank_of,
            rows: Vec::new(),
            inserted: 0,
            kernel: Vec::new(),
        }
    }

    /// Scan order that prefers the last coordinate.
    pub fn last_first(dim: usize) -> Self {
        let scan: Vec<usize> = (0..dim).rev().collect();
        Self::new(dim, &scan)
    }

    pub fn from_vectors(dim: usize, scan: &[usize], vectors: &[Vec<S>]) -> Self {
        let mut e = Self::new(dim, scan);
        for v in vectors {
            e.insert(v);
        }
        e
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn inserted(&self) -> usize {
        self.inserted
    }

    /// Pivot coordinates in insertion order.
    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.pivot).collect()
    }

    /// Coordinates that carry no pivot, ascending.
    pub fn non_pivots(&self) -> Vec<usize> {
        let mut used = vec![false; self.dim];
        for r in &self.rows {
            used[r.pivot] = true;
        }
        (0..self.dim).filter(|&c| !used[c]).collect()
    }

    /// Kernel vectors over the inserted vectors, one per dependent insert.
    pub fn kernel(&self) -> Vec<Vec<S>> {
        self.kernel
            .iter()
            .map(|k| {
                let mut k = k.clone();
                self.pad(&mut k);
                k
            })
            .collect()
    }

    fn pad(&self, combo: &mut Vec<S>) {
        combo.resize(self.inserted, S::zero());
    }

    fn eliminate(&self, v: &mut [S], combo: &mut [S]) {
        for row in &self.rows {
            let c = v[row.pivot].clone();
            if c.is_zero() {
                continue;
            }
            for (x, y) in v.iter_mut().zip(&row.vec) {
                if !y.is_zero() {
                    *x = x.clone() - c.clone() * y.clone();
                }
            }
            v[row.pivot] = S::zero();
            for (x, y) in combo.iter_mut().zip(&row.combo) {
                if !y.is_zero() {
                    *x = x.clone() - c.clone() * y.clone();
                }
            }
        }
    }

    fn choose_pivot(&self, v: &[S]) -> Option<usize> {
        let weights: Vec<Option<f64>> = v
            .iter()
            .map(|c| if c.negligible() { None } else { c.pivot_weight() })
            .collect();
        let best = weights.iter().flatten().cloned().fold(0.0, f64::max);
        if best == 0.0 {
            return None;
        }
        (0..self.dim)
            .filter(|&c| matches!(weights[c], Some(w) if w >= best * RELATIVE_PIVOT_CUT))
            .min_by_key(|&c| self.rank_of[c])
    }

    /// Adds a vector; returns whether it raised the rank.
    pub fn insert(&mut self, v: &[S]) -> bool {
        assert_eq!(v.len(), self.dim, "vector length must match dimension");
        let idx = self.inserted;
        self.inserted += 1;
        for r in &mut self.rows {
            r.combo.push(S::zero());
        }
        let mut vec = v.to_vec();
        let mut combo = vec![S::zero(); self.inserted];
        combo[idx] = S::one();
        self.eliminate(&mut vec, &mut combo);
        let Some(p) = self.choose_pivot(&vec) else {
            // v_idx minus its expansion is a kernel element.
            self.kernel.push(combo);
            return false;
        };
        let inv = vec[p].inverse().expect("pivot is a unit");
        for x in vec.iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for x in combo.iter_mut() {
            *x = x.clone() * inv.clone();
        }
        vec[p] = S::one();
        for (c, x) in vec.iter_mut().enumerate() {
            if c != p && x.negligible() {
                *x = S::zero();
            }
        }
        for row in &mut self.rows {
            let c = row.vec[p].clone();
            if c.is_zero() {
                continue;
            }
            for (x, y) in row.vec.iter_mut().zip(&vec) {
                *x = x.clone() - c.clone() * y.clone();
            }
            row.vec[p] = S::zero();
            for (x, y) in row.combo.iter_mut().zip(&combo) {
                *x = x.clone() - c.clone() * y.clone();
            }
        }
        self.rows.push(Row { pivot: p, vec, combo });
        true
    }

    /// Splits `b` into a span part (as coefficients) and a residual on the
    /// non-pivot coordinates.
    pub fn reduce(&self, b: &[S]) -> Reduction<S> {
        assert_eq!(b.len(), self.dim, "target length must match dimension");
        let mut residual = b.to_vec();
        let mut neg = Vec::new();
        self.pad(&mut neg);
        self.eliminate(&mut residual, &mut neg);
        Reduction {
            coeffs: neg.into_iter().map(|c| -c).collect(),
            residual,
        }
    }
}

/// Dense matrix stored by columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: Vec<Vec<S>>,
}

impl<S: Scalar> Matrix<S> {
    pub fn from_columns(rows: usize, cols: Vec<Vec<S>>) -> Self {
        assert!(cols.iter().all(|c| c.len() == rows), "ragged columns");
        Matrix { rows, cols }
    }

    pub fn identity(n: usize) -> Self {
        let cols = (0..n)
            .map(|j| (0..n).map(|i| if i == j { S::one() } else { S::zero() }).collect())
            .collect();
        Matrix { rows: n, cols }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &[S] {
        &self.cols[j]
    }

    pub fn columns(&self) -> &[Vec<S>] {
        &self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &S {
        &self.cols[j][i]
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.ncols(), "argument length must match columns");
        let mut out = vec![S::zero(); self.rows];
        for (c, xj) in self.cols.iter().zip(x) {
            if xj.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(c) {
                *o = o.clone() + a.clone() * xj.clone();
            }
        }
        out
    }

    /// Column echelon with the given codomain priority.
    pub fn echelon(&self, scan: &[usize]) -> Echelon<S> {
        Echelon::from_vectors(self.rows, scan, &self.cols)
    }

    pub fn rank(&self) -> usize {
        self.echelon(&(0..self.rows).rev().collect::<Vec<_>>()).rank()
    }
}
