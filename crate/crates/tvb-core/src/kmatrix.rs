//! Dense matrices over the function field Q(t): exact solving and inversion
//! for frame changes, and Smith reduction over the local ring at a point of
//! the curve (pivoting on minimal valuation, eliminating with quotients that
//! stay regular at the point).

use num_traits::Zero;

use crate::curve::{PointP1, RatFunc};
use crate::error::{Result, TvbError};
use crate::qq::QQ;

#[derive(Clone, PartialEq, Eq)]
pub struct KMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<RatFunc>,
}

impl KMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        KMat {
            rows,
            cols,
            data: vec![RatFunc::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = KMat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = RatFunc::one();
        }
        m
    }

    pub fn from_cols(cols: &[Vec<RatFunc>]) -> Self {
        let nr = cols.first().map_or(0, |c| c.len());
        let mut m = KMat::zero(nr, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn col(&self, j: usize) -> Vec<RatFunc> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn mul(&self, other: &KMat) -> KMat {
        assert_eq!(self.cols, other.rows);
        let mut out = KMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = RatFunc::zero();
                for k in 0..self.cols {
                    acc = acc.add(&self[(i, k)].mul(&other[(k, j)]));
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[RatFunc]) -> Vec<RatFunc> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = RatFunc::zero();
                for k in 0..self.cols {
                    acc = acc.add(&self[(i, k)].mul(&v[k]));
                }
                acc
            })
            .collect()
    }

    /// Gauss-Jordan inverse; errors on singular matrices.
    pub fn inverse(&self) -> Result<KMat> {
        if self.rows != self.cols {
            return Err(TvbError::Invalid("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = KMat::identity(n);
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !a[(i, c)].is_zero()) else {
                return Err(TvbError::Invalid("singular matrix".into()));
            };
            for j in 0..n {
                let t = a[(c, j)].clone();
                a[(c, j)] = a[(p, j)].clone();
                a[(p, j)] = t;
                let t = inv[(c, j)].clone();
                inv[(c, j)] = inv[(p, j)].clone();
                inv[(p, j)] = t;
            }
            let d = a[(c, c)].inv()?;
            for j in 0..n {
                a[(c, j)] = a[(c, j)].mul(&d);
                inv[(c, j)] = inv[(c, j)].mul(&d);
            }
            for i in 0..n {
                if i != c && !a[(i, c)].is_zero() {
                    let f = a[(i, c)].clone();
                    for j in 0..n {
                        let ta = a[(c, j)].mul(&f);
                        a[(i, j)] = a[(i, j)].sub(&ta);
                        let ti = inv[(c, j)].mul(&f);
                        inv[(i, j)] = inv[(i, j)].sub(&ti);
                    }
                }
            }
        }
        Ok(inv)
    }

    /// Solves `self * x = b` by augmented elimination.
    pub fn solve_vec(&self, b: &[RatFunc]) -> Result<Vec<RatFunc>> {
        if self.rows != self.cols || b.len() != self.rows {
            return Err(TvbError::Invalid("solve needs a square system".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut rhs = b.to_vec();
        // Forward elimination with partial (first nonzero) pivoting.
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !a[(i, c)].is_zero()) else {
                return Err(TvbError::Invalid("singular matrix".into()));
            };
            if p != c {
                for j in c..n {
                    let t = a[(c, j)].clone();
                    a[(c, j)] = a[(p, j)].clone();
                    a[(p, j)] = t;
                }
                rhs.swap(c, p);
            }
            for i in c + 1..n {
                if !a[(i, c)].is_zero() {
                    let f = a[(i, c)].div(&a[(c, c)])?;
                    for j in c + 1..n {
                        let t = a[(c, j)].mul(&f);
                        a[(i, j)] = a[(i, j)].sub(&t);
                    }
                    let t = rhs[c].mul(&f);
                    rhs[i] = rhs[i].sub(&t);
                    a[(i, c)] = RatFunc::zero();
                }
            }
        }
        // Back substitution.
        let mut x = vec![RatFunc::zero(); n];
        for c in (0..n).rev() {
            let mut acc = rhs[c].clone();
            for j in c + 1..n {
                let t = a[(c, j)].mul(&x[j]);
                acc = acc.sub(&t);
            }
            x[c] = acc.div(&a[(c, c)])?;
        }
        Ok(x)
    }

    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for c in 0..a.cols {
            let Some(p) = (rank..a.rows).find(|&i| !a[(i, c)].is_zero()) else {
                continue;
            };
            for j in 0..a.cols {
                let t = a[(rank, j)].clone();
                a[(rank, j)] = a[(p, j)].clone();
                a[(p, j)] = t;
            }
            let d = a[(rank, c)].inv().expect("nonzero pivot");
            for j in 0..a.cols {
                a[(rank, j)] = a[(rank, j)].mul(&d);
            }
            for i in 0..a.rows {
                if i != rank && !a[(i, c)].is_zero() {
                    let f = a[(i, c)].clone();
                    for j in 0..a.cols {
                        let t = a[(rank, j)].mul(&f);
                        a[(i, j)] = a[(i, j)].sub(&t);
                    }
                }
            }
            rank += 1;
            if rank == a.rows {
                break;
            }
        }
        rank
    }

    /// Basis of the right kernel over K.
    pub fn kernel(&self) -> Vec<Vec<RatFunc>> {
        let mut a = self.clone();
        let mut pivots: Vec<usize> = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            let Some(p) = (r..a.rows).find(|&i| !a[(i, c)].is_zero()) else {
                continue;
            };
            for j in 0..a.cols {
                let t = a[(r, j)].clone();
                a[(r, j)] = a[(p, j)].clone();
                a[(p, j)] = t;
            }
            let d = a[(r, c)].inv().expect("nonzero pivot");
            for j in 0..a.cols {
                a[(r, j)] = a[(r, j)].mul(&d);
            }
            for i in 0..a.rows {
                if i != r && !a[(i, c)].is_zero() {
                    let f = a[(i, c)].clone();
                    for j in 0..a.cols {
                        let t = a[(r, j)].mul(&f);
                        a[(i, j)] = a[(i, j)].sub(&t);
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == a.rows {
                break;
            }
        }
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..a.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![RatFunc::zero(); a.cols];
            v[free] = RatFunc::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = a[(row, free)].neg();
            }
            basis.push(v);
        }
        basis
    }

    pub fn det(&self) -> RatFunc {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = RatFunc::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !a[(i, c)].is_zero()) else {
                return RatFunc::zero();
            };
            if p != c {
                for j in 0..n {
                    let t = a[(c, j)].clone();
                    a[(c, j)] = a[(p, j)].clone();
                    a[(p, j)] = t;
                }
                det = det.neg();
            }
            det = det.mul(&a[(c, c)]);
            let d = a[(c, c)].inv().expect("nonzero pivot");
            for i in c + 1..n {
                if !a[(i, c)].is_zero() {
                    let f = a[(i, c)].mul(&d);
                    for j in c..n {
                        let t = a[(c, j)].mul(&f);
                        a[(i, j)] = a[(i, j)].sub(&t);
                    }
                }
            }
        }
        det
    }

    /// Minimal valuation at `point` over all entries; `None` for the zero
    /// matrix.
    pub fn min_val(&self, point: &PointP1) -> Option<i64> {
        self.data
            .iter()
            .filter_map(|f| f.val_at(point))
            .min()
    }
}

impl std::ops::Index<(usize, usize)> for KMat {
    type Output = RatFunc;
    fn index(&self, (i, j): (usize, usize)) -> &RatFunc {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for KMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut RatFunc {
        &mut self.data[i * self.cols + j]
    }
}

impl std::fmt::Debug for KMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "KMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?}  ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Smith reduction of a matrix over the local ring at `point`: returns
/// (U, diag, V) with `self = U * D * V`, where U and V are invertible over
/// the local ring (every entry and the inverse determinants have
/// nonnegative valuation at the point) and D has diagonal entries that are
/// powers of the uniformizer given by `diag` exponents.
pub struct LocalSmith {
    pub u: KMat,
    pub exponents: Vec<i64>,
    pub v: KMat,
}

pub fn local_smith(m: &KMat, point: &PointP1) -> LocalSmith {
    let rows = m.rows;
    let cols = m.cols;
    let mut a = m.clone();
    let mut u = KMat::identity(rows);
    let mut v = KMat::identity(cols);
    let n = rows.min(cols);
    let mut exponents = Vec::new();
    for k in 0..n {
        // Pivot: entry of minimal valuation in the remaining block.
        let mut best: Option<(usize, usize, i64)> = None;
        for i in k..rows {
            for j in k..cols {
                if let Some(val) = a[(i, j)].val_at(point) {
                    match best {
                        Some((_, _, bv)) if bv <= val => {}
                        _ => best = Some((i, j, val)),
                    }
                }
            }
        }
        let Some((pi, pj, pval)) = best else {
            break; // remaining block is zero
        };
        // Move pivot to (k, k).
        if pi != k {
            for j in 0..cols {
                let t = a[(k, j)].clone();
                a[(k, j)] = a[(pi, j)].clone();
                a[(pi, j)] = t;
            }
            for j in 0..rows {
                let t = u[(j, k)].clone();
                u[(j, k)] = u[(j, pi)].clone();
                u[(j, pi)] = t;
            }
        }
        if pj != k {
            for i in 0..rows {
                let t = a[(i, k)].clone();
                a[(i, k)] = a[(i, pj)].clone();
                a[(i, pj)] = t;
            }
            for i in 0..cols {
                let t = v[(k, i)].clone();
                v[(k, i)] = v[(pj, i)].clone();
                v[(pj, i)] = t;
            }
        }
        // Normalize the pivot to a pure uniformizer power: pivot = w^e * unit.
        let unit = a[(k, k)].mul(&RatFunc::uniformizer_pow(point, -pval));
        let unit_inv = unit.inv().expect("pivot unit");
        // Divide the pivot row by the unit (a row operation absorbed into U).
        for j in k..cols {
            a[(k, j)] = a[(k, j)].mul(&unit_inv);
        }
        for i in 0..rows {
            u[(i, k)] = u[(i, k)].mul(&unit);
        }
        // Eliminate column k below and row k to the right; quotients are
        // regular at the point because the pivot has minimal valuation.
        for i in k + 1..rows {
            if !a[(i, k)].is_zero() {
                let q = a[(i, k)].mul(&RatFunc::uniformizer_pow(point, -pval));
                for j in k..cols {
                    let t = a[(k, j)].mul(&q);
                    a[(i, j)] = a[(i, j)].sub(&t);
                }
                // u column update: col_k += q * col_i each... row op on A is
                // compensated on U by the inverse column op.
                for r in 0..rows {
                    let t = u[(r, i)].mul(&q);
                    u[(r, k)] = u[(r, k)].add(&t);
                }
            }
        }
        for j in k + 1..cols {
            if !a[(k, j)].is_zero() {
                let q = a[(k, j)].mul(&RatFunc::uniformizer_pow(point, -pval));
                for i in k..rows {
                    let t = a[(i, k)].mul(&q);
                    a[(i, j)] = a[(i, j)].sub(&t);
                }
                for c in 0..cols {
                    let t = v[(j, c)].mul(&q);
                    v[(k, c)] = v[(k, c)].add(&t);
                }
            }
        }
        exponents.push(pval);
    }
    LocalSmith { u, exponents, v }
}

/// Expresses `target` in the span of `cols` when possible.
pub fn solve_in_span(cols: &[Vec<RatFunc>], target: &[RatFunc]) -> Option<Vec<RatFunc>> {
    let rows = target.len();
    let s = cols.len();
    // Augmented elimination over K.
    let mut a = KMat::zero(rows, s + 1);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..rows {
            a[(i, j)] = c[i].clone();
        }
    }
    for i in 0..rows {
        a[(i, s)] = target[i].clone();
    }
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..s {
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        for j in 0..=s {
            let t = a[(r, j)].clone();
            a[(r, j)] = a[(p, j)].clone();
            a[(p, j)] = t;
        }
        let d = a[(r, c)].inv().expect("nonzero pivot");
        for j in 0..=s {
            a[(r, j)] = a[(r, j)].mul(&d);
        }
        for i in 0..rows {
            if i != r && !a[(i, c)].is_zero() {
                let f = a[(i, c)].clone();
                for j in 0..=s {
                    let t = a[(r, j)].mul(&f);
                    a[(i, j)] = a[(i, j)].sub(&t);
                }
            }
        }
        pivots.push((r, c));
        r += 1;
    }
    // Inconsistent iff a nonzero entry of the last column sits in a zero row.
    for i in r..rows {
        if !a[(i, s)].is_zero() {
            return None;
        }
    }
    let mut x = vec![RatFunc::zero(); s];
    for (row, col) in pivots {
        x[col] = a[(row, s)].clone();
    }
    Some(x)
}

/// Rank of the column span of the union of two column families.
pub fn joint_rank(a: &[Vec<RatFunc>], b: &[Vec<RatFunc>]) -> usize {
    let mut cols: Vec<Vec<RatFunc>> = a.to_vec();
    cols.extend(b.iter().cloned());
    if cols.is_empty() {
        return 0;
    }
    KMat::from_cols(&cols).rank()
}

/// Evaluates a matrix of functions regular at `point`, producing the residue
/// matrix over Q.
pub fn residue_matrix(m: &KMat, point: &PointP1) -> Result<Vec<Vec<QQ>>> {
    let mut out = vec![vec![QQ::zero(); m.cols]; m.rows];
    for i in 0..m.rows {
        for j in 0..m.cols {
            out[i][j] = m[(i, j)].eval_point(point)?;
        }
    }
    Ok(out)
}
