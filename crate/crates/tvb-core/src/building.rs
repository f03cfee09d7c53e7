//! Points of the extended affine and spherical buildings of GL(E), E a
//! vector space over Q(t), presented as frame-adapted additive norms; the
//! lattice/norm correspondence at a point of the curve; intersections; and
//! the residue-space reduction at an integral vertex.
//!
//! A norm is only ever held in adapted form: an invertible frame matrix over
//! K together with the values on the frame columns. Two norms are compared
//! semantically through the finite frame test, never syntactically.

use num_traits::{One, Signed, Zero};

use crate::curve::{PointP1, RatFunc};
use crate::error::{Result, TvbError};
use crate::kmatrix::{local_smith, residue_matrix, KMat};
use crate::qq::{qq, qq_is_integer, QMat, QQ, RatVec};

/// A level-m additive norm adapted to a frame: on e = sum lambda_i b_i the
/// value is min_i (m val_P(lambda_i) + c_i). Level 0 is a valuation (the
/// place is then irrelevant), level 1 an additive norm.
#[derive(Clone, PartialEq, Eq)]
pub struct AdaptedNorm {
    pub level: QQ,
    pub place: PointP1,
    /// Columns are the frame vectors; invertible over K.
    pub frame: KMat,
    pub values: Vec<QQ>,
}

impl AdaptedNorm {
    pub fn new(level: QQ, place: PointP1, frame: KMat, values: Vec<QQ>) -> Result<Self> {
        if level.is_negative() {
            return Err(TvbError::Invalid("negative norm level".into()));
        }
        if frame.rows != frame.cols || frame.rows == 0 {
            return Err(TvbError::Invalid("frame must be square and nonempty".into()));
        }
        if values.len() != frame.cols {
            return Err(TvbError::Invalid("one value per frame vector".into()));
        }
        if frame.rank() != frame.cols {
            return Err(TvbError::Invalid("frame vectors are linearly dependent".into()));
        }
        Ok(AdaptedNorm {
            level,
            place,
            frame,
            values,
        })
    }

    pub fn rank(&self) -> usize {
        self.frame.cols
    }

    /// Norm of a vector; `None` encodes +infinity (the zero vector).
    pub fn eval(&self, e: &[RatFunc]) -> Option<QQ> {
        let coords = self
            .frame
            .solve_vec(e)
            .expect("frame is invertible");
        let mut best: Option<QQ> = None;
        for (i, lam) in coords.iter().enumerate() {
            if lam.is_zero() {
                continue;
            }
            let val = if self.level.is_zero() {
                self.values[i].clone()
            } else {
                let v = lam.val_at(&self.place).expect("nonzero coordinate");
                &self.level * qq(v) + &self.values[i]
            };
            best = Some(match best {
                Some(b) if b <= val => b,
                _ => val,
            });
        }
        best
    }

    fn compatible(&self, other: &AdaptedNorm) -> Result<()> {
        if self.level != other.level {
            return Err(TvbError::NormMismatch(format!(
                "levels {} vs {}",
                self.level, other.level
            )));
        }
        if !self.level.is_zero() && self.place != other.place {
            return Err(TvbError::NormMismatch(format!(
                "places {} vs {}",
                self.place, other.place
            )));
        }
        if self.rank() != other.rank() {
            return Err(TvbError::NormMismatch("ranks differ".into()));
        }
        Ok(())
    }

    /// Pointwise comparison `self <= other`, decided on self's frame: if
    /// self(b) <= other(b) on every frame vector b of self, then for any
    /// e = sum lambda_i b_i the ultrametric inequality gives
    /// other(e) >= min_i (m val lambda_i + other(b_i)) >= self(e).
    pub fn leq(&self, other: &AdaptedNorm) -> Result<bool> {
        self.compatible(other)?;
        for i in 0..self.rank() {
            let b = self.frame.col(i);
            let rhs = other.eval(&b).expect("frame vector is nonzero");
            if self.values[i] > rhs {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn eq(&self, other: &AdaptedNorm) -> Result<bool> {
        Ok(self.leq(other)? && other.leq(self)?)
    }

    /// Whether this norm is adapted to another frame, by the determinant
    /// equality: a basis is adapted iff the sum of its norm values equals
    /// the induced norm of its wedge, i.e.
    /// sum_i w(g_i) = m val(det(F^{-1} G)) + sum_i c_i.
    pub fn is_adapted_to(&self, candidate: &KMat) -> Result<bool> {
        if candidate.rows != self.rank() || candidate.cols != self.rank() {
            return Err(TvbError::NormMismatch("candidate frame shape".into()));
        }
        let rel = self.frame.inverse()?.mul(candidate);
        let det = rel.det();
        if det.is_zero() {
            return Ok(false);
        }
        let det_part = if self.level.is_zero() {
            QQ::zero()
        } else {
            &self.level * qq(det.val_at(&self.place).expect("nonzero det"))
        };
        let wedge: QQ = det_part + self.values.iter().cloned().sum::<QQ>();
        let mut total = QQ::zero();
        for j in 0..candidate.cols {
            match self.eval(&candidate.col(j)) {
                Some(v) => total += v,
                None => return Ok(false),
            }
        }
        Ok(total == wedge)
    }

    /// Re-expresses the norm as adapted to `frame` when possible.
    pub fn readapt(&self, frame: &KMat) -> Result<Option<AdaptedNorm>> {
        if !self.is_adapted_to(frame)? {
            return Ok(None);
        }
        let values: Vec<QQ> = (0..frame.cols)
            .map(|j| self.eval(&frame.col(j)).expect("frame vector nonzero"))
            .collect();
        Ok(Some(AdaptedNorm::new(
            self.level.clone(),
            self.place.clone(),
            frame.clone(),
            values,
        )?))
    }

    pub fn is_integral(&self) -> bool {
        self.values.iter().all(qq_is_integer)
    }
}

impl std::fmt::Debug for AdaptedNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "norm(level {}, place {}, values {:?})",
            self.level, self.place, self.values
        )
    }
}

/// An O_P-lattice in K^r given by a column-span generator matrix.
#[derive(Clone)]
pub struct LatticeRep {
    pub place: PointP1,
    pub generators: KMat,
}

impl LatticeRep {
    pub fn new(place: PointP1, generators: KMat) -> Result<Self> {
        if generators.rank() != generators.cols || generators.rows != generators.cols {
            return Err(TvbError::Invalid("lattice generators must be a basis".into()));
        }
        Ok(LatticeRep { place, generators })
    }

    pub fn rank(&self) -> usize {
        self.generators.cols
    }

    /// The norm of the lattice, adapted to the generator columns with value
    /// zero: max{j : e in w^j Lambda} equals the minimal coordinate
    /// valuation.
    pub fn norm(&self) -> AdaptedNorm {
        AdaptedNorm::new(
            QQ::from_integer(1.into()),
            self.place.clone(),
            self.generators.clone(),
            vec![QQ::zero(); self.rank()],
        )
        .expect("lattice basis is a frame")
    }

    pub fn contains(&self, e: &[RatFunc]) -> bool {
        match self.norm().eval(e) {
            None => true,
            Some(v) => !v.is_negative(),
        }
    }

    pub fn eq(&self, other: &LatticeRep) -> Result<bool> {
        self.norm().eq(&other.norm())
    }
}

impl std::fmt::Debug for LatticeRep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "lattice(place {}, {:?})", self.place, self.generators)
    }
}

/// Lattice of an integer-valued additive norm: generated by w^{-c_i} b_i.
pub fn lattice_from_norm(w: &AdaptedNorm) -> Result<LatticeRep> {
    if !w.level.is_one() {
        return Err(TvbError::NormMismatch(format!(
            "lattice requires level 1, got {}",
            w.level
        )));
    }
    if !w.is_integral() {
        return Err(TvbError::NonIntegerNorm(format!("{:?}", w.values)));
    }
    let mut gens = w.frame.clone();
    for (i, c) in w.values.iter().enumerate() {
        let e: i64 = c.to_integer().to_string().parse().expect("small exponent");
        let scale = RatFunc::uniformizer_pow(&w.place, -e);
        for r in 0..gens.rows {
            gens[(r, i)] = gens[(r, i)].mul(&scale);
        }
    }
    LatticeRep::new(w.place.clone(), gens)
}

pub fn norm_from_lattice(l: &LatticeRep) -> AdaptedNorm {
    l.norm()
}

/// Intersection of two lattices at the same place, through the relative
/// Smith reduction: with M1^{-1} M2 = U D V over O_P, the columns of M1 U
/// form a common adapted basis and the intersection is spanned by
/// w^{max(d_i, 0)} times those columns.
pub fn lattice_intersect(l1: &LatticeRep, l2: &LatticeRep) -> Result<LatticeRep> {
    if l1.place != l2.place {
        return Err(TvbError::NormMismatch(format!(
            "lattice places {} vs {}",
            l1.place, l2.place
        )));
    }
    let rel = l1.generators.inverse()?.mul(&l2.generators);
    let smith = local_smith(&rel, &l1.place);
    let common = l1.generators.mul(&smith.u);
    let mut gens = common;
    for (i, d) in smith.exponents.iter().enumerate() {
        let e = (*d).max(0);
        if e != 0 {
            let scale = RatFunc::uniformizer_pow(&l1.place, e);
            for r in 0..gens.rows {
                gens[(r, i)] = gens[(r, i)].mul(&scale);
            }
        }
    }
    LatticeRep::new(l1.place.clone(), gens)
}

/// A common adapted frame of two integer-valued norms at one place, with
/// the values each norm takes on it.
pub fn common_frame(
    w1: &AdaptedNorm,
    w2: &AdaptedNorm,
) -> Result<(KMat, Vec<QQ>, Vec<QQ>)> {
    w1.compatible(w2)?;
    let l1 = lattice_from_norm(w1)?;
    let l2 = lattice_from_norm(w2)?;
    let rel = l1.generators.inverse()?.mul(&l2.generators);
    let smith = local_smith(&rel, &w1.place);
    let frame = l1.generators.mul(&smith.u);
    let v1 = vec![QQ::zero(); w1.rank()];
    let v2: Vec<QQ> = smith.exponents.iter().map(|d| qq(-*d)).collect();
    Ok((frame, v1, v2))
}

/// A level-0 norm on the residue space E_Lambda, a Q-vector space.
#[derive(Clone, PartialEq, Eq)]
pub struct ResidueNorm {
    /// Columns are the residue frame vectors; invertible over Q.
    pub frame: QMat,
    pub values: Vec<QQ>,
}

impl ResidueNorm {
    pub fn new(frame: QMat, values: Vec<QQ>) -> Result<Self> {
        if frame.rank() != frame.cols {
            return Err(TvbError::Invalid("residue frame is degenerate".into()));
        }
        if values.len() != frame.cols {
            return Err(TvbError::Invalid("one value per residue frame vector".into()));
        }
        Ok(ResidueNorm { frame, values })
    }

    pub fn eval(&self, e: &RatVec) -> Option<QQ> {
        let coords = self.frame.solve(e)?;
        let mut best: Option<QQ> = None;
        for (i, c) in coords.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = self.values[i].clone();
            best = Some(match best {
                Some(b) if b <= v => b,
                _ => v,
            });
        }
        best
    }

    pub fn leq(&self, other: &ResidueNorm) -> bool {
        (0..self.frame.cols).all(|i| {
            let b = self.frame.col(i);
            match other.eval(&b) {
                Some(v) => self.values[i] <= v,
                None => false,
            }
        })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn eq(&self, other: &ResidueNorm) -> bool {
        self.leq(other) && other.leq(self)
    }
}

impl std::fmt::Debug for ResidueNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "residue-norm(values {:?})", self.values)
    }
}

/// The link-of-vertex reduction: given an integer-valued base norm w with
/// lattice Lambda and a nearby norm w2 adapted to the same frame, produces
/// the level-0 norm on E_Lambda = Lambda tensor Q whose values on the
/// residue frame are w2(b_i) - w(b_i).
pub fn residue_link(base: &AdaptedNorm, other: &AdaptedNorm) -> Result<ResidueNorm> {
    let lattice = lattice_from_norm(base)?;
    let Some(readapted) = other.readapt(&base.frame)? else {
        return Err(TvbError::NormMismatch(
            "norms are not adapted to a common frame".into(),
        ));
    };
    // Residue frame: images of the lattice generators in Lambda tensor Q.
    let res = residue_matrix(&lattice.generators, &base.place)?;
    let mut frame = QMat::zero(res.len(), res.len());
    for (i, row) in res.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            frame[(i, j)] = v.clone();
        }
    }
    let values: Vec<QQ> = readapted
        .values
        .iter()
        .zip(base.values.iter())
        .map(|(a, b)| a - b)
        .collect();
    ResidueNorm::new(frame, values)
}
