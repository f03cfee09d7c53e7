//! Toric bundle data on a complete fan, the downgrade to a corank-one
//! subtorus, and the cotangent presentation over a point of the curve.
//!
//! A toric bundle is given per maximal cone by a frame of the special fiber
//! over Q together with one character per frame vector, the weights of the
//! trivializing sections on that chart. The downgrade turns this into a
//! divisorial fan on P^1 (slices of the fan at heights +1, -1, 0 along the
//! chosen projection) plus a support map whose frame vectors are the
//! trivializing sections, rescaled by the height power of the coordinate.

use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::BTreeMap;

use crate::curve::{PointP1, RatFunc};
use crate::divfan::{DivisorialFan, PPDivisor};
use crate::error::{Result, TvbError};
use crate::kmatrix::KMat;
use crate::polyhedral::{Cone, Fan, Polyhedron};
use crate::qq::{unimodular_completion, QMat, QQ, RatVec};
use crate::support::{Piece, SupportMap};

/// Per-maximal-cone bundle data.
#[derive(Clone, Debug)]
pub struct KlyachkoCone {
    pub cone: Cone,
    /// Columns span the special fiber over Q.
    pub frame: QMat,
    pub characters: Vec<RatVec>,
}

/// A toric vector bundle on a complete fan, plus the corank-one projection
/// along which it is downgraded.
#[derive(Clone, Debug)]
pub struct KlyachkoInput {
    pub dim: usize,
    pub rank: usize,
    pub fan: Fan,
    pub cones: Vec<KlyachkoCone>,
    /// Primitive covector N -> Z; its kernel is the sublattice N'.
    pub projection: Vec<i64>,
}

impl KlyachkoInput {
    /// Level-0 norm of the bundle data at a point of the fan, through the
    /// first maximal cone containing it.
    pub fn norm_at(&self, x: &RatVec) -> Result<crate::building::ResidueNorm> {
        let kc = self
            .cones
            .iter()
            .find(|kc| kc.cone.contains(x))
            .ok_or_else(|| TvbError::OutsideSupport(format!("{x:?} outside the fan")))?;
        let values: Vec<QQ> = kc.characters.iter().map(|u| -u.dot(x)).collect();
        crate::building::ResidueNorm::new(kc.frame.clone(), values)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fan.validate().is_err() || !self.fan.is_complete() {
            return Err(TvbError::Validation("fan must be valid and complete".into()));
        }
        if self.projection.len() != self.dim {
            return Err(TvbError::Dimension("projection covector length".into()));
        }
        let maximal = self.fan.maximal_cones();
        if self.cones.len() != maximal.len() {
            return Err(TvbError::Validation(format!(
                "expected data on {} maximal cones, got {}",
                maximal.len(),
                self.cones.len()
            )));
        }
        for kc in &self.cones {
            if !maximal.iter().any(|m| **m == kc.cone) {
                return Err(TvbError::Validation(format!(
                    "data attached to a non-maximal cone {:?}",
                    kc.cone
                )));
            }
            if kc.frame.rank() != self.rank || kc.characters.len() != self.rank {
                return Err(TvbError::Validation(
                    "each cone needs an invertible frame and one character per vector".into(),
                ));
            }
        }
        // Cross-cone continuity of the level-0 norms on shared faces.
        for (i, a) in self.cones.iter().enumerate() {
            for b in self.cones.iter().skip(i + 1) {
                let meet = a.cone.intersect(&b.cone)?;
                let mut test_ws = meet.generators.clone();
                let mut interior = RatVec::zero(self.dim);
                for g in &meet.generators {
                    interior = interior.add(g);
                }
                if !interior.is_zero() {
                    test_ws.push(interior);
                }
                for w in &test_ws {
                    let na = crate::building::ResidueNorm::new(
                        a.frame.clone(),
                        a.characters.iter().map(|u| -u.dot(w)).collect(),
                    )?;
                    let nb = crate::building::ResidueNorm::new(
                        b.frame.clone(),
                        b.characters.iter().map(|u| -u.dot(w)).collect(),
                    )?;
                    if !na.eq(&nb) {
                        return Err(TvbError::Validation(format!(
                            "bundle data of {:?} and {:?} disagree at {w:?}",
                            a.cone, b.cone
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Bundle data of the line bundle attached to ray coefficients: on each
/// maximal cone the unique character pairing to minus the coefficient on its
/// rays. Errors when the data is not integral on some cone.
pub fn line_bundle_input(
    fan: &Fan,
    coeffs: &[(RatVec, i64)],
    projection: &[i64],
) -> Result<KlyachkoInput> {
    let dim = fan.dim;
    let a_of = |ray: &RatVec| -> i64 {
        coeffs
            .iter()
            .find(|(r, _)| r == ray)
            .map(|(_, a)| *a)
            .unwrap_or(0)
    };
    let mut cones = Vec::new();
    for cone in fan.maximal_cones() {
        let mat = QMat::from_rows(&cone.generators);
        let rhs = RatVec::new(
            cone.generators
                .iter()
                .map(|r| crate::qq::qq(-a_of(r)))
                .collect(),
        );
        let u = mat
            .solve(&rhs)
            .ok_or_else(|| TvbError::Invalid(format!("no Cartier data on {cone:?}")))?;
        if !u.is_integral() {
            return Err(TvbError::Invalid(format!(
                "bundle is not Cartier on {cone:?}"
            )));
        }
        cones.push(KlyachkoCone {
            cone: cone.clone(),
            frame: QMat::identity(1),
            characters: vec![u],
        });
    }
    Ok(KlyachkoInput {
        dim,
        rank: 1,
        fan: fan.clone(),
        cones,
        projection: projection.to_vec(),
    })
}

/// Bundle data of the cotangent sheaf of a smooth complete fan: per maximal
/// cone, the dual basis of its primitive rays serves as both the frame of
/// the special fiber and the character list.
pub fn cotangent_input(fan: &Fan, projection: &[i64]) -> Result<KlyachkoInput> {
    let dim = fan.dim;
    let mut cones = Vec::new();
    for cone in fan.maximal_cones() {
        if !cone.is_smooth() || cone.cone_dim() != dim {
            return Err(TvbError::NotSmooth(format!("{cone:?}")));
        }
        let mat = QMat::from_rows(&cone.generators);
        let mut duals: Vec<RatVec> = Vec::new();
        for i in 0..dim {
            let mut unit = vec![QQ::zero(); dim];
            unit[i] = crate::qq::qq(1);
            duals.push(
                mat.solve(&RatVec::new(unit))
                    .ok_or_else(|| TvbError::NotSmooth(format!("{cone:?} duals")))?,
            );
        }
        let frame = QMat::from_cols(&duals);
        cones.push(KlyachkoCone {
            cone: cone.clone(),
            frame,
            characters: duals,
        });
    }
    Ok(KlyachkoInput {
        dim,
        rank: dim,
        fan: fan.clone(),
        cones,
        projection: projection.to_vec(),
    })
}

/// Coordinates adapted to the projection: a unimodular change of basis under
/// which the projection becomes the last coordinate.
struct DowngradeCoords {
    /// x_new = change * x_old; the last row of `change` is the projection.
    forward: QMat,
}

impl DowngradeCoords {
    fn new(projection: &[i64]) -> Result<Self> {
        let p: Vec<BigInt> = projection.iter().map(|&x| BigInt::from(x)).collect();
        let rows = unimodular_completion(&p)?;
        // rows = basis b_0..b_{n-1} with b_last pairing to 1. A point
        // x = sum c_j b_j has new coordinates c; c = (B^T)^{-1} x, and the
        // last coordinate of c is <p, x>.
        let n = projection.len();
        let mut bt = QMat::zero(n, n);
        for (j, row) in rows.iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                bt[(i, j)] = QQ::from_integer(e.clone());
            }
        }
        // Invert B^T over Q.
        let mut aug_cols: Vec<RatVec> = Vec::new();
        for k in 0..n {
            let mut unit = vec![QQ::zero(); n];
            unit[k] = QQ::from_integer(1.into());
            let sol = bt
                .solve(&RatVec::new(unit))
                .ok_or_else(|| TvbError::Invalid("completion not invertible".into()))?;
            aug_cols.push(sol);
        }
        let mut forward = QMat::zero(n, n);
        for (k, col) in aug_cols.iter().enumerate() {
            for i in 0..n {
                forward[(i, k)] = col.coords[i].clone();
            }
        }
        Ok(DowngradeCoords { forward })
    }

    fn point(&self, x: &RatVec) -> RatVec {
        let n = x.dim();
        RatVec::new(
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| &self.forward[(i, j)] * &x.coords[j])
                        .sum::<QQ>()
                })
                .collect(),
        )
    }

    /// Characters transform by the transpose inverse of the point map, i.e.
    /// by pairing-preservation: u_new = B u_old where B's rows are the basis.
    fn character(&self, u: &RatVec, rows: &QMat) -> RatVec {
        let n = u.dim();
        RatVec::new(
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| &rows[(i, j)] * &u.coords[j])
                        .sum::<QQ>()
                })
                .collect(),
        )
    }
}

/// Output of a downgrade: the divisorial fan, the support map, and the
/// bookkeeping that ties fan divisors back to cones of the input fan.
pub struct Downgrade {
    pub fan: DivisorialFan,
    pub support: SupportMap,
    /// (divisor name, cone of the input fan) pairs.
    pub cone_of_divisor: Vec<(String, Cone)>,
    /// Rows of the unimodular basis splitting N as N' x Z.
    pub basis_rows: QMat,
}

impl Downgrade {
    /// Lifts a point of N'_Q at a given height back to the input lattice.
    pub fn lift(&self, w: &RatVec, height: i64) -> RatVec {
        let n = self.basis_rows.rows;
        let mut coords = w.coords.clone();
        coords.push(crate::qq::qq(height));
        let mut out = vec![QQ::zero(); n];
        for (j, c) in coords.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o = o.clone() + c * &self.basis_rows[(j, i)];
            }
        }
        RatVec::new(out)
    }
}

/// Blockwise direct sum of two bundles on the same fan.
pub fn direct_sum_input(k1: &KlyachkoInput, k2: &KlyachkoInput) -> Result<KlyachkoInput> {
    if k1.dim != k2.dim || k1.fan.cones.len() != k2.fan.cones.len() || k1.projection != k2.projection
    {
        return Err(TvbError::Invalid("direct sum requires a common fan".into()));
    }
    let rank = k1.rank + k2.rank;
    let mut cones = Vec::new();
    for a in &k1.cones {
        let b = k2
            .cones
            .iter()
            .find(|c| c.cone == a.cone)
            .ok_or_else(|| TvbError::Invalid("mismatched cone data".into()))?;
        let mut frame = QMat::zero(rank, rank);
        for i in 0..k1.rank {
            for j in 0..k1.rank {
                frame[(i, j)] = a.frame[(i, j)].clone();
            }
        }
        for i in 0..k2.rank {
            for j in 0..k2.rank {
                frame[(k1.rank + i, k1.rank + j)] = b.frame[(i, j)].clone();
            }
        }
        let mut characters = a.characters.clone();
        characters.extend(b.characters.iter().cloned());
        cones.push(KlyachkoCone {
            cone: a.cone.clone(),
            frame,
            characters,
        });
    }
    Ok(KlyachkoInput {
        dim: k1.dim,
        rank,
        fan: k1.fan.clone(),
        cones,
        projection: k1.projection.clone(),
    })
}

/// Views a toric bundle on a complete fan as an equivariant bundle for the
/// corank-one subtorus: slices the fan along the projection into
/// coefficients at p_plus, p_minus and a common tail, and rescales each
/// trivializing frame vector by the height power of the coordinate function.
pub fn toric_downgrade(k: &KlyachkoInput) -> Result<Downgrade> {
    toric_downgrade_at(k, &PointP1::finite(0), &PointP1::Infinity)
}

pub fn toric_downgrade_at(
    k: &KlyachkoInput,
    p_plus: &PointP1,
    p_minus: &PointP1,
) -> Result<Downgrade> {
    k.validate()?;
    if p_plus == p_minus {
        return Err(TvbError::Invalid("the two marked points must differ".into()));
    }
    if k.dim == 0 {
        return Err(TvbError::Dimension("projection needs a positive rank lattice".into()));
    }
    let coords = DowngradeCoords::new(&k.projection)?;
    let n = k.dim;
    let nprime = n - 1;
    // The coordinate function with divisor [p_plus] - [p_minus].
    let coordinate = match (p_plus, p_minus) {
        (PointP1::Finite(a), PointP1::Finite(b)) => RatFunc::new(
            crate::curve::Poly::t_minus(a),
            crate::curve::Poly::t_minus(b),
        )?,
        (PointP1::Finite(a), PointP1::Infinity) => {
            RatFunc::from_poly(crate::curve::Poly::t_minus(a))
        }
        (PointP1::Infinity, PointP1::Finite(b)) => {
            RatFunc::new(crate::curve::Poly::one(), crate::curve::Poly::t_minus(b))?
        }
        (PointP1::Infinity, PointP1::Infinity) => unreachable!(),
    };

    // Basis rows of the unimodular completion, used for character transport.
    let p: Vec<BigInt> = k.projection.iter().map(|&x| BigInt::from(x)).collect();
    let rows_int = unimodular_completion(&p)?;
    let mut rows = QMat::zero(n, n);
    for (i, r) in rows_int.iter().enumerate() {
        for (j, e) in r.iter().enumerate() {
            rows[(i, j)] = QQ::from_integer(e.clone());
        }
    }

    // Slice a transformed cone at a given height.
    let slice = |cone_new: &Cone, height: i64| -> Result<Option<Polyhedron>> {
        let h = crate::qq::qq(height);
        let ineqs: Vec<(RatVec, QQ)> = cone_new
            .halfspaces
            .iter()
            .map(|nrm| {
                let last = nrm.last().clone();
                (nrm.truncated(), -(last * &h))
            })
            .collect();
        Polyhedron::from_inequalities(nprime, &ineqs)
    };
    let tail_of = |cone_new: &Cone| -> Result<Cone> {
        let normals: Vec<RatVec> = cone_new
            .halfspaces
            .iter()
            .map(|nrm| nrm.truncated())
            .collect();
        let mut with_zero = normals;
        // The sliced tail also satisfies the height-zero section of every
        // halfspace; truncation already encodes that.
        with_zero.retain(|v| !v.is_zero());
        Cone::from_halfspaces(nprime, &with_zero)
    };

    // Transform every cone of the face-closed fan.
    let mut divisors: Vec<PPDivisor> = Vec::new();
    let mut pieces: BTreeMap<String, Piece> = BTreeMap::new();
    let mut cone_of_divisor: Vec<(String, Cone)> = Vec::new();
    let maximal = k.fan.maximal_cones();
    for (idx, cone) in k.fan.cones.iter().enumerate() {
        let gens_new: Vec<RatVec> = cone.generators.iter().map(|g| coords.point(g)).collect();
        let cone_new = Cone::from_generators(n, &gens_new)?;
        let tail = tail_of(&cone_new)?;
        let plus = slice(&cone_new, 1)?;
        let minus = slice(&cone_new, -1)?;
        let mut coefficients = BTreeMap::new();
        let tail_poly = Polyhedron::from_cone(&tail);
        match plus {
            Some(pp) if pp == tail_poly => {}
            other => {
                coefficients.insert(p_plus.clone(), other);
            }
        }
        match minus {
            Some(mm) if mm == tail_poly => {}
            other => {
                coefficients.insert(p_minus.clone(), other);
            }
        }
        let name = format!("D{idx}");
        divisors.push(PPDivisor::new(name.clone(), tail, coefficients)?);
        cone_of_divisor.push((name.clone(), cone.clone()));

        // Bundle data: inherited from the first maximal cone containing this
        // cone (continuity makes the choice immaterial).
        let parent = maximal
            .iter()
            .enumerate()
            .find(|(_, m)| cone.is_face_of(m))
            .map(|(i, _)| i)
            .ok_or_else(|| TvbError::Validation("cone outside every maximal cone".into()))?;
        let kc = k
            .cones
            .iter()
            .find(|kc| kc.cone == *maximal[parent])
            .expect("validated data");
        let mut cols: Vec<Vec<RatFunc>> = Vec::new();
        let mut chars: Vec<RatVec> = Vec::new();
        for i in 0..k.rank {
            let u_new = coords.character(&kc.characters[i], &rows);
            let ell = u_new.last().clone();
            if !crate::qq::qq_is_integer(&ell) {
                return Err(TvbError::Invalid("character has a fractional height".into()));
            }
            let e: i64 = ell.to_integer().to_string().parse().expect("small height");
            let scale = coordinate.pow_int(e);
            cols.push(
                (0..k.rank)
                    .map(|r| RatFunc::constant(kc.frame[(r, i)].clone()).mul(&scale))
                    .collect(),
            );
            chars.push(u_new.truncated());
        }
        pieces.insert(name, Piece::new(KMat::from_cols(&cols), chars)?);
    }

    let fan = DivisorialFan::new(nprime, divisors);
    let support = SupportMap::new(fan.clone(), k.rank, pieces, BTreeMap::new())?;
    Ok(Downgrade {
        fan,
        support,
        cone_of_divisor,
        basis_rows: rows,
    })
}

/// One cotangent presentation: the cone of the local model it lives on, the
/// slice cell it covers (None for a tail cone), and the piece itself.
pub struct CotangentPiece {
    pub cone: Cone,
    pub cell: Option<Polyhedron>,
    pub piece: Piece,
}

/// The vector dlog(uniformizer at P) inside (M' x Z) tensor K.
fn dlog_uniformizer(dim_m: usize, point: &PointP1) -> Vec<RatFunc> {
    let mut v = vec![RatFunc::zero(); dim_m + 1];
    match point {
        PointP1::Finite(p) => {
            // dlog(t - p) = (t / (t - p)) dlog t.
            v[dim_m] = RatFunc::new(
                crate::curve::Poly::t(),
                crate::curve::Poly::t_minus(p),
            )
            .expect("nonzero denominator");
        }
        PointP1::Infinity => {
            // dlog(1/t) = -dlog t.
            v[dim_m] = RatFunc::constant(crate::qq::qq(-1));
        }
    }
    v
}

/// Pieces of the cotangent bundle over the local model at one point: one per
/// maximal cone of the cone fan of the slice, each required to be smooth.
/// The frame vectors are the uniformizer-power rescalings of the dual basis
/// realized in E = (M' x Z) tensor K, the characters the M'-parts.
pub fn cotangent_slice_map(
    fan: &DivisorialFan,
    point: &PointP1,
) -> Result<Vec<CotangentPiece>> {
    let cone_fan = fan.slice_cone_fan(point)?;
    let nprime = fan.dim;
    let rank = nprime + 1;
    let mut out = Vec::new();
    for cone in cone_fan.maximal_cones() {
        if cone.cone_dim() != rank {
            return Err(TvbError::NotSmooth(format!(
                "cone {cone:?} of the local model at {point} is not full-dimensional"
            )));
        }
        if !cone.is_smooth() {
            return Err(TvbError::NotSmooth(format!(
                "cone {cone:?} of the local model at {point}"
            )));
        }
        // Dual basis of the primitive ray generators.
        let ray_mat = QMat::from_rows(&cone.generators);
        let mut duals: Vec<RatVec> = Vec::new();
        for i in 0..rank {
            let mut unit = vec![QQ::zero(); rank];
            unit[i] = QQ::from_integer(1.into());
            let m = ray_mat
                .solve(&RatVec::new(unit))
                .ok_or_else(|| TvbError::NotSmooth(format!("{cone:?} duals")))?;
            duals.push(m);
        }
        let dlog = dlog_uniformizer(nprime, point);
        let mut cols: Vec<Vec<RatFunc>> = Vec::new();
        let mut chars: Vec<RatVec> = Vec::new();
        for m in &duals {
            let ell = m.last().clone();
            if !crate::qq::qq_is_integer(&ell) {
                return Err(TvbError::NotSmooth(format!(
                    "dual basis of {cone:?} is not integral"
                )));
            }
            let e: i64 = ell.to_integer().to_string().parse().expect("small exponent");
            // real(m) = (M'-part as constants) + ell * dlog(uniformizer).
            let mut vec: Vec<RatFunc> = (0..nprime)
                .map(|j| RatFunc::constant(m.coords[j].clone()))
                .collect();
            vec.push(RatFunc::zero());
            for (r, d) in dlog.iter().enumerate() {
                let add = d.mul(&RatFunc::constant(ell.clone()));
                vec[r] = vec[r].add(&add);
            }
            let scale = RatFunc::uniformizer_pow(point, e);
            let col: Vec<RatFunc> = vec.iter().map(|f| f.mul(&scale)).collect();
            cols.push(col);
            chars.push(m.truncated());
        }
        let piece = Piece::new(KMat::from_cols(&cols), chars)?;
        // The slice cell this cone covers, if it meets height one.
        let slice = fan.slice_at(point);
        let cell = slice
            .maximal_cells()
            .into_iter()
            .find(|c| {
                crate::polyhedral::cone_over(c, 1)
                    .map(|cc| cc == *cone)
                    .unwrap_or(false)
            })
            .cloned();
        out.push(CotangentPiece {
            cone: cone.clone(),
            cell,
            piece,
        });
    }
    Ok(out)
}

/// The uniform presentation of the cotangent over a complete-locus divisor:
/// its coefficients at the two marked points assemble, at heights one and
/// minus one, into a cone whose dual basis gives the frame, rescaled by
/// powers of the rational function vanishing at the first marked point and
/// polar at the second.
fn cotangent_complete_piece(
    fan: &DivisorialFan,
    divisor: &PPDivisor,
    p_plus: &PointP1,
    p_minus: &PointP1,
) -> Result<Piece> {
    let nprime = fan.dim;
    let rank = nprime + 1;
    let plus = divisor
        .coefficient(p_plus)
        .expect("complete locus has every coefficient");
    let minus = divisor
        .coefficient(p_minus)
        .expect("complete locus has every coefficient");
    let mut gens: Vec<RatVec> = Vec::new();
    for v in &plus.vertices {
        gens.push(v.extended(crate::qq::qq(1)));
    }
    for r in &plus.rays {
        gens.push(r.extended(QQ::zero()));
    }
    for v in &minus.vertices {
        gens.push(v.extended(crate::qq::qq(-1)));
    }
    for r in &minus.rays {
        gens.push(r.extended(QQ::zero()));
    }
    for g in &divisor.tail.generators {
        gens.push(g.extended(QQ::zero()));
    }
    let cone = Cone::from_generators(rank, &gens)?;
    if cone.cone_dim() != rank || !cone.is_smooth() {
        return Err(TvbError::NotSmooth(format!(
            "assembled cone {cone:?} of the complete-locus divisor {}",
            divisor.name
        )));
    }
    let ray_mat = QMat::from_rows(&cone.generators);
    // The coordinate with divisor [p_plus] - [p_minus], and its logarithmic
    // differential inside E. A marked point at infinity contributes nothing
    // to the finite product.
    let zero_vec = vec![RatFunc::zero(); nprime + 1];
    let term = |p: &PointP1| -> (RatFunc, Vec<RatFunc>) {
        match p {
            PointP1::Finite(_) => (RatFunc::uniformizer(p), dlog_uniformizer(nprime, p)),
            PointP1::Infinity => (RatFunc::one(), zero_vec.clone()),
        }
    };
    let (num, dlog_num) = term(p_plus);
    let (den, dlog_den) = term(p_minus);
    let z = num.div(&den).expect("distinct marked points");
    let dlog_z: Vec<RatFunc> = dlog_num
        .iter()
        .zip(&dlog_den)
        .map(|(a, b)| a.sub(b))
        .collect();
    let mut cols: Vec<Vec<RatFunc>> = Vec::new();
    let mut chars: Vec<RatVec> = Vec::new();
    for i in 0..rank {
        let mut unit = vec![QQ::zero(); rank];
        unit[i] = crate::qq::qq(1);
        let m = ray_mat
            .solve(&RatVec::new(unit))
            .ok_or_else(|| TvbError::NotSmooth(format!("{cone:?} duals")))?;
        let ell = m.last().clone();
        if !crate::qq::qq_is_integer(&ell) {
            return Err(TvbError::NotSmooth(format!(
                "dual basis of {cone:?} is not integral"
            )));
        }
        let e: i64 = ell.to_integer().to_string().parse().expect("small exponent");
        let mut vec: Vec<RatFunc> = (0..nprime)
            .map(|j| RatFunc::constant(m.coords[j].clone()))
            .collect();
        vec.push(RatFunc::zero());
        for (r, d) in dlog_z.iter().enumerate() {
            let add = d.mul(&RatFunc::constant(ell.clone()));
            vec[r] = vec[r].add(&add);
        }
        let scale = z.pow_int(e);
        cols.push(vec.iter().map(|f| f.mul(&scale)).collect());
        chars.push(m.truncated());
    }
    Piece::new(KMat::from_cols(&cols), chars)
}

/// Assembles the full cotangent support map of the variety of a divisorial
/// fan: affine-locus divisors get the designated piece from the cone over
/// their tail at a finite unmarked point (where dlog of the uniformizer
/// realizes the uniform differential), with exceptional presentations at
/// every explicit point; complete-locus divisors get the single uniform
/// presentation assembled from their two marked coefficients.
pub fn cotangent_support_map(fan: &DivisorialFan) -> Result<SupportMap> {
    let rank = fan.dim + 1;
    let fresh = fan.fresh_point();
    let explicit = fan.explicit_points();
    let generic_pieces = cotangent_slice_map(fan, &fresh)?;
    let mut generic: BTreeMap<String, Piece> = BTreeMap::new();
    for d in &fan.divisors {
        if d.locus() == crate::divfan::Locus::Complete {
            if explicit.len() != 2 {
                return Err(TvbError::Invalid(format!(
                    "complete-locus divisor {} needs exactly two marked points, the fan has {}",
                    d.name,
                    explicit.len()
                )));
            }
            let piece = cotangent_complete_piece(fan, d, &explicit[0], &explicit[1])?;
            generic.insert(d.name.clone(), piece);
            continue;
        }
        // The cone over the tail coefficient at a generic point.
        let tail_poly = Polyhedron::from_cone(&d.tail);
        let cone = crate::polyhedral::cone_over(&tail_poly, 1)?;
        let piece = generic_pieces
            .iter()
            .find(|cp| cone.is_face_of(&cp.cone))
            .map(|cp| cp.piece.clone())
            .ok_or_else(|| {
                TvbError::NotSmooth(format!(
                    "no smooth maximal cone over the tail of {}",
                    d.name
                ))
            })?;
        generic.insert(d.name.clone(), piece);
    }
    let mut overrides: BTreeMap<(String, PointP1), Piece> = BTreeMap::new();
    for p in &explicit {
        let local = cotangent_slice_map(fan, p)?;
        for d in &fan.divisors {
            if d.locus() == crate::divfan::Locus::Complete {
                continue;
            }
            let Some(cell) = d.coefficient(p) else {
                continue;
            };
            let cone = crate::polyhedral::cone_over(&cell, 1)?;
            let piece = local
                .iter()
                .find(|cp| cone.is_face_of(&cp.cone))
                .map(|cp| cp.piece.clone())
                .ok_or_else(|| {
                    TvbError::NotSmooth(format!(
                        "no smooth maximal cone over the coefficient of {} at {p}",
                        d.name
                    ))
                })?;
            overrides.insert((d.name.clone(), p.clone()), piece);
        }
    }
    SupportMap::new(fan.clone(), rank, generic, overrides)
}
