//! Exact rational scalars, vectors and dense matrices over Q, plus the
//! integer lattice helpers (Smith form, unimodular completion) used by the
//! smoothness test and the downgrade coordinate change.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::str::FromStr;

use crate::error::TvbError;

/// Exact rational scalar used everywhere in the kernel.
pub type QQ = BigRational;

pub fn qq(n: i64) -> QQ {
    BigRational::from_integer(BigInt::from(n))
}

pub fn qq_ratio(n: i64, d: i64) -> QQ {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses "3/2", "-7", "0" into an exact rational. No floats are accepted.
pub fn parse_qq(s: &str) -> Result<QQ, TvbError> {
    let s = s.trim();
    let mk_err = || TvbError::Parse(format!("invalid rational `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| mk_err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| mk_err())?;
        if d.is_zero() {
            return Err(TvbError::Parse(format!("zero denominator in `{s}`")));
        }
        Ok(BigRational::new(n, d))
    } else {
        let n = BigInt::from_str(s).map_err(|_| mk_err())?;
        Ok(BigRational::from_integer(n))
    }
}

/// Formats a rational as "n" or "n/d" with d > 0.
pub fn fmt_qq(q: &QQ) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn qq_floor(q: &QQ) -> QQ {
    BigRational::from_integer(q.floor().to_integer())
}

pub fn qq_ceil(q: &QQ) -> QQ {
    BigRational::from_integer(q.ceil().to_integer())
}

pub fn qq_is_integer(q: &QQ) -> bool {
    q.denom().is_one()
}

/// A point of N_Q or M_Q with a fixed ambient dimension.
///
/// The coordinates are exact rationals; the zero-dimensional vector is
/// allowed so that rank-one downgrades along the identity projection stay in
/// scope.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatVec {
    pub coords: Vec<QQ>,
}

impl RatVec {
    pub fn new(coords: Vec<QQ>) -> Self {
        RatVec { coords }
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        RatVec {
            coords: coords.iter().map(|&c| qq(c)).collect(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        RatVec {
            coords: vec![QQ::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn dot(&self, other: &RatVec) -> QQ {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn add(&self, other: &RatVec) -> RatVec {
        RatVec::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &RatVec) -> RatVec {
        RatVec::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, s: &QQ) -> RatVec {
        RatVec::new(self.coords.iter().map(|a| a * s).collect())
    }

    pub fn neg(&self) -> RatVec {
        RatVec::new(self.coords.iter().map(|a| -a).collect())
    }

    /// Appends one coordinate, lifting N_Q into N_Q x Q.
    pub fn extended(&self, last: QQ) -> RatVec {
        let mut coords = self.coords.clone();
        coords.push(last);
        RatVec::new(coords)
    }

    /// Drops the last coordinate.
    pub fn truncated(&self) -> RatVec {
        let mut coords = self.coords.clone();
        coords.pop();
        RatVec::new(coords)
    }

    pub fn last(&self) -> &QQ {
        self.coords.last().expect("nonempty vector")
    }

    /// Clears denominators and divides by the content, giving the primitive
    /// integer vector on the same ray. The zero vector is returned unchanged.
    pub fn primitive(&self) -> RatVec {
        if self.is_zero() {
            return self.clone();
        }
        let lcm_den = self
            .coords
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coords
            .iter()
            .map(|c| (c * BigRational::from_integer(lcm_den.clone())).to_integer())
            .collect();
        let gcd = ints
            .iter()
            .fold(BigInt::zero(), |acc, v| acc.gcd(v));
        RatVec::new(
            ints.iter()
                .map(|v| BigRational::from_integer(v / &gcd))
                .collect(),
        )
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(qq_is_integer)
    }
}

impl fmt::Debug for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", fmt_qq(c))?;
        }
        write!(f, ")")
    }
}

/// Dense matrix over Q, row major. Sized for desk-scale exact linear algebra.
#[derive(Clone, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<QQ>,
}

impl QMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMat {
            rows,
            cols,
            data: vec![QQ::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = QQ::one();
        }
        m
    }

    pub fn from_rows(rows: &[RatVec]) -> Self {
        let nc = rows.first().map_or(0, |r| r.dim());
        let mut m = QMat::zero(rows.len(), nc);
        for (i, r) in rows.iter().enumerate() {
            for (j, c) in r.coords.iter().enumerate() {
                m[(i, j)] = c.clone();
            }
        }
        m
    }

    pub fn from_cols(cols: &[RatVec]) -> Self {
        let nr = cols.first().map_or(0, |c| c.dim());
        let mut m = QMat::zero(nr, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, v) in c.coords.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn col(&self, j: usize) -> RatVec {
        RatVec::new((0..self.rows).map(|i| self[(i, j)].clone()).collect())
    }

    pub fn row(&self, i: usize) -> RatVec {
        RatVec::new((0..self.cols).map(|j| self[(i, j)].clone()).collect())
    }

    /// Row echelon reduction in place; returns the pivot columns.
    fn echelonize(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            for j in 0..self.cols {
                let tmp = self[(r, j)].clone();
                self[(r, j)] = self[(p, j)].clone();
                self[(p, j)] = tmp;
            }
            let inv = self[(r, c)].clone();
            for j in 0..self.cols {
                self[(r, j)] = &self[(r, j)] / &inv;
            }
            for i in 0..self.rows {
                if i != r && !self[(i, c)].is_zero() {
                    let f = self[(i, c)].clone();
                    for j in 0..self.cols {
                        self[(i, j)] = &self[(i, j)] - &(&f * &self[(r, j)]);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.echelonize().len()
    }

    /// Basis of the right kernel.
    pub fn kernel(&self) -> Vec<RatVec> {
        let mut m = self.clone();
        let pivots = m.echelonize();
        let mut basis = Vec::new();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![QQ::zero(); self.cols];
            v[free] = QQ::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[(r, free)].clone();
            }
            basis.push(RatVec::new(v));
        }
        basis
    }

    /// Solves `self * x = b`; `None` when inconsistent.
    pub fn solve(&self, b: &RatVec) -> Option<RatVec> {
        let mut aug = QMat::zero(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b.coords[i].clone();
        }
        let pivots = aug.echelonize();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![QQ::zero(); self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = aug[(r, self.cols)].clone();
        }
        Some(RatVec::new(x))
    }
}

impl std::fmt::Debug for QMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "QMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{}  ", fmt_qq(&self[(i, j)]))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = QQ;
    fn index(&self, (i, j): (usize, usize)) -> &QQ {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut QQ {
        &mut self.data[i * self.cols + j]
    }
}

/// Smith normal form diagonal of an integer matrix. Only the invariant
/// factors are needed by the callers.
pub fn smith_diagonal(mat: &[Vec<BigInt>]) -> Vec<BigInt> {
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    let mut a: Vec<Vec<BigInt>> = mat.to_vec();
    let n = rows.min(cols);
    let mut diag = Vec::new();
    for k in 0..n {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in k..rows {
                for j in k..cols {
                    if !a[i][j].is_zero() {
                        match &pivot {
                            Some((pi, pj)) if a[*pi][*pj].abs() <= a[i][j].abs() => {}
                            _ => pivot = Some((i, j)),
                        }
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return diag;
            };
            a.swap(k, pi);
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            let mut clean = true;
            for i in k + 1..rows {
                if !a[i][k].is_zero() {
                    let q = a[i][k].div_floor(&a[k][k]);
                    let pivot_row = a[k].clone();
                    for (j, p) in pivot_row.iter().enumerate().take(cols).skip(k) {
                        let t = p * &q;
                        a[i][j] -= t;
                    }
                    if !a[i][k].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in k + 1..cols {
                if !a[k][j].is_zero() {
                    let q = a[k][j].div_floor(&a[k][k]);
                    for row in a.iter_mut().take(rows).skip(k) {
                        let t = &row[k] * &q;
                        row[j] -= t;
                    }
                    if !a[k][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        diag.push(a[k][k].abs());
    }
    diag
}

/// Completes a primitive integer covector `p` (gcd of entries 1) to a
/// unimodular matrix: returns `B` in GL_n(Z) whose last row is `p` and whose
/// first n-1 rows span ker(p) over Z.
///
/// Used to split N as N' x Z along a corank-one projection.
pub fn unimodular_completion(p: &[BigInt]) -> Result<Vec<Vec<BigInt>>, TvbError> {
    let n = p.len();
    let g = p.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if !g.is_one() {
        return Err(TvbError::Invalid(format!(
            "projection {p:?} has torsion quotient (gcd {g})"
        )));
    }
    // Column reduce p to (0, ..., 0, 1) while tracking the inverse operations.
    let mut v = p.to_vec();
    let mut b = vec![vec![BigInt::zero(); n]; n];
    for (i, row) in b.iter_mut().enumerate() {
        row[i] = BigInt::one();
    }
    // Invariant: v = p * B^T-ops applied; we reduce with Euclid over entries.
    loop {
        let mut nz: Vec<usize> = (0..n).filter(|&i| !v[i].is_zero()).collect();
        nz.sort_by(|&i, &j| v[i].abs().cmp(&v[j].abs()));
        if nz.len() == 1 {
            let k = nz[0];
            if v[k].is_negative() {
                v[k] = -v[k].clone();
                for e in b[k].iter_mut() {
                    *e = -e.clone();
                }
            }
            // Move the pivot column to the end.
            v.swap(k, n - 1);
            b.swap(k, n - 1);
            debug_assert!(v[n - 1].is_one());
            return Ok(b);
        }
        let k = nz[0];
        for &j in &nz[1..] {
            let q = v[j].div_floor(&v[k]);
            v[j] = &v[j] - &(&q * &v[k]);
            let bk = b[k].clone();
            for (e, s) in b[j].iter_mut().zip(bk.iter()) {
                *e -= &q * s;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/2", "-7", "0", "22/7"] {
            let q = parse_qq(s).unwrap();
            assert_eq!(fmt_qq(&q), s);
        }
        assert!(parse_qq("1.5").is_err());
        assert!(parse_qq("1/0").is_err());
    }

    #[test]
    fn primitive_vector() {
        let v = RatVec::new(vec![qq_ratio(1, 2), qq_ratio(3, 2)]);
        assert_eq!(v.primitive(), RatVec::from_ints(&[1, 3]));
        let z = RatVec::zero(2);
        assert_eq!(z.primitive(), z);
    }

    #[test]
    fn solve_and_kernel() {
        let m = QMat::from_rows(&[RatVec::from_ints(&[1, 2]), RatVec::from_ints(&[3, 4])]);
        let x = m.solve(&RatVec::from_ints(&[5, 6])).unwrap();
        assert_eq!(x, RatVec::new(vec![qq(-4), qq_ratio(9, 2)]));
        let sing = QMat::from_rows(&[RatVec::from_ints(&[1, 2]), RatVec::from_ints(&[2, 4])]);
        assert_eq!(sing.rank(), 1);
        assert_eq!(sing.kernel().len(), 1);
    }

    #[test]
    fn smith_diagonal_small() {
        let m = vec![
            vec![BigInt::from(2), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(4)],
        ];
        assert_eq!(smith_diagonal(&m), vec![BigInt::from(2), BigInt::from(4)]);
        let m2 = vec![vec![BigInt::from(1), BigInt::from(0)], vec![BigInt::from(1), BigInt::from(2)]];
        assert_eq!(smith_diagonal(&m2), vec![BigInt::from(1), BigInt::from(2)]);
    }

    #[test]
    fn unimodular_completion_basic() {
        let p = [BigInt::from(0), BigInt::from(1)];
        let b = unimodular_completion(&p).unwrap();
        // Last row is the projection itself.
        assert_eq!(b[1], vec![BigInt::from(0), BigInt::from(1)]);
        // First row spans the kernel.
        assert!( (&b[0][0] * &p[0] + &b[0][1] * &p[1]).is_zero());
        assert!(unimodular_completion(&[BigInt::from(2), BigInt::from(4)]).is_err());
    }
}
