//! Support maps: the classifying data of an equivariant vector bundle on
//! the complexity-one variety of a divisorial fan. Each divisor carries a
//! designated frame over K and a character per frame vector; the induced
//! additive norm at a slice point x is adapted to the frame with values
//! -<u_i, x>. Affine-locus divisors may override the designated data at
//! finitely many points.
//!
//! Character convention: the characters stored here are the weights of the
//! trivializing sections, so the weight-u module over a chart selects the
//! indices with u - u_i in the dual tail cone, and the vertex lattice at
//! (P, v) is spanned by the frame vectors scaled by the ceiling powers
//! w_P^{ceil(<u_i - u, v>)}.

use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

use crate::building::{lattice_from_norm, AdaptedNorm, ResidueNorm};
use crate::curve::{DivisorOnY, PointP1, RatFunc};
use crate::divfan::{DivisorialFan, Locus, PPDivisor};
use crate::error::{Result, TvbError};
use crate::kmatrix::{joint_rank, residue_matrix, solve_in_span, KMat};
use crate::polyhedral::Cone;
use crate::qq::{fmt_qq, qq, qq_ceil, QMat, QQ, RatVec};

/// Frame-and-characters data attached to one divisor (or to one divisor at
/// one exceptional point).
#[derive(Clone, PartialEq, Eq)]
pub struct Piece {
    /// Columns are frame vectors of E = K^r; invertible.
    pub frame: KMat,
    /// One character in M per frame vector.
    pub characters: Vec<RatVec>,
}

impl Piece {
    pub fn new(frame: KMat, characters: Vec<RatVec>) -> Result<Self> {
        if frame.rows != frame.cols || frame.rank() != frame.cols {
            return Err(TvbError::Invalid("piece frame must be invertible".into()));
        }
        if characters.len() != frame.cols {
            return Err(TvbError::Invalid(
                "piece needs one character per frame vector".into(),
            ));
        }
        Ok(Piece { frame, characters })
    }

    pub fn rank(&self) -> usize {
        self.frame.cols
    }

    /// The additive norm at a slice point.
    pub fn norm_at(&self, place: &PointP1, x: &RatVec) -> Result<AdaptedNorm> {
        let values: Vec<QQ> = self.characters.iter().map(|u| -u.dot(x)).collect();
        AdaptedNorm::new(qq(1), place.clone(), self.frame.clone(), values)
    }

    /// The level-0 norm of the linear part in a tail direction.
    pub fn linear_norm_at(&self, w: &RatVec) -> Result<AdaptedNorm> {
        let values: Vec<QQ> = self.characters.iter().map(|u| -u.dot(w)).collect();
        AdaptedNorm::new(qq(0), PointP1::Infinity, self.frame.clone(), values)
    }
}

impl std::fmt::Debug for Piece {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "piece(chars {:?})", self.characters)
    }
}

/// A support map on a divisorial fan.
#[derive(Clone)]
pub struct SupportMap {
    pub fan: DivisorialFan,
    pub rank: usize,
    /// Designated piece per divisor name (the uniform presentation).
    pub generic: BTreeMap<String, Piece>,
    /// Exceptional pieces for affine-locus divisors, keyed by
    /// (divisor name, point).
    pub overrides: BTreeMap<(String, PointP1), Piece>,
}

/// Validation report for a support map.
#[derive(Clone, Debug, Default)]
pub struct SupportReport {
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl SupportReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

impl SupportMap {
    pub fn new(
        fan: DivisorialFan,
        rank: usize,
        generic: BTreeMap<String, Piece>,
        overrides: BTreeMap<(String, PointP1), Piece>,
    ) -> Result<Self> {
        let map = SupportMap {
            fan,
            rank,
            generic,
            overrides,
        };
        map.check_structure()?;
        Ok(map)
    }

    fn check_structure(&self) -> Result<()> {
        for d in &self.fan.divisors {
            let Some(p) = self.generic.get(&d.name) else {
                return Err(TvbError::Invalid(format!(
                    "divisor {} has no designated piece",
                    d.name
                )));
            };
            if p.rank() != self.rank {
                return Err(TvbError::Invalid(format!(
                    "piece for {} has rank {}, expected {}",
                    d.name,
                    p.rank(),
                    self.rank
                )));
            }
            for u in &p.characters {
                if u.dim() != self.fan.dim {
                    return Err(TvbError::Dimension(format!(
                        "character dimension for divisor {}",
                        d.name
                    )));
                }
            }
        }
        for ((name, point), p) in &self.overrides {
            let Some(d) = self.fan.divisor_by_name(name) else {
                return Err(TvbError::Invalid(format!(
                    "override for unknown divisor {name}"
                )));
            };
            if d.locus() == Locus::Complete {
                return Err(TvbError::Invalid(format!(
                    "divisor {name} has complete locus; its presentation cannot vary at {point}"
                )));
            }
            if d.coefficient(point).is_none() {
                return Err(TvbError::Invalid(format!(
                    "override for {name} at {point} lies outside the locus"
                )));
            }
            if p.rank() != self.rank {
                return Err(TvbError::Invalid(format!(
                    "override for {name} at {point} has wrong rank"
                )));
            }
        }
        Ok(())
    }

    /// The presentation in force for a divisor at a point.
    pub fn piece_at(&self, divisor: &str, point: &PointP1) -> &Piece {
        self.overrides
            .get(&(divisor.to_string(), point.clone()))
            .unwrap_or_else(|| &self.generic[divisor])
    }

    /// The norm at a point x of the slice at P, through any divisor whose
    /// coefficient contains x. Cell-choice independence holds on valid maps.
    pub fn norm(&self, place: &PointP1, x: &RatVec) -> Result<AdaptedNorm> {
        for d in &self.fan.divisors {
            if let Some(cell) = d.coefficient(place) {
                if cell.contains(x) {
                    return self.piece_at(&d.name, place).norm_at(place, x);
                }
            }
        }
        Err(TvbError::OutsideSupport(format!(
            "{x:?} is outside the slice at {place}"
        )))
    }

    /// Norm evaluation at (P, x) on a vector; `None` is +infinity.
    pub fn evaluate(&self, place: &PointP1, x: &RatVec, e: &[RatFunc]) -> Result<Option<QQ>> {
        Ok(self.norm(place, x)?.eval(e))
    }

    /// Explicit points of the fan together with all override points.
    pub fn explicit_points(&self) -> Vec<PointP1> {
        let mut pts = self.fan.explicit_points();
        for (_, p) in self.overrides.keys() {
            if !pts.contains(p) {
                pts.push(p.clone());
            }
        }
        pts.sort();
        pts
    }

    /// The common linear part: one designated (cone, piece) per maximal tail
    /// cone, taken from the lexicographically first divisor with that tail.
    pub fn linear_part(&self) -> Vec<(Cone, Piece)> {
        let tail_fan = self.fan.tail_fan();
        let mut out = Vec::new();
        for tau in tail_fan.maximal_cones() {
            let mut names: Vec<&PPDivisor> = self
                .fan
                .divisors
                .iter()
                .filter(|d| &d.tail == tau)
                .collect();
            names.sort_by(|a, b| a.name.cmp(&b.name));
            if let Some(d) = names.first() {
                out.push(((*tau).clone(), self.generic[&d.name].clone()));
            }
        }
        out
    }

    /// Test points for one divisor's coefficient at one place: the vertices
    /// plus one interior sample.
    fn cell_test_points(cell: &crate::polyhedral::Polyhedron) -> Vec<RatVec> {
        let mut pts = cell.vertices.clone();
        let sample = cell.sample_point();
        if !pts.contains(&sample) {
            pts.push(sample);
        }
        pts
    }

    /// Axiom checks; failures carry witnesses.
    pub fn validate(&self) -> SupportReport {
        let mut report = SupportReport::default();
        if let Err(e) = self.check_structure() {
            report.failures.push(e.to_string());
            return report;
        }
        let fan_report = self.fan.validate();
        report
            .failures
            .extend(fan_report.failures.iter().map(|f| format!("fan: {f}")));
        report.warnings.extend(fan_report.warnings);
        if !report.failures.is_empty() {
            return report;
        }

        let mut points = self.explicit_points();
        points.push(self.fan.fresh_point());

        // Continuity across cells: at every shared point of two coefficients
        // the norms agree (checked at vertices and one interior sample of the
        // intersection), and the level-0 parts agree on shared tail rays.
        for p in &points {
            for (i, d1) in self.fan.divisors.iter().enumerate() {
                for d2 in self.fan.divisors.iter().skip(i + 1) {
                    let (Some(c1), Some(c2)) = (d1.coefficient(p), d2.coefficient(p)) else {
                        continue;
                    };
                    let Ok(Some(meet)) = c1.intersect(&c2) else {
                        continue;
                    };
                    let p1 = self.piece_at(&d1.name, p);
                    let p2 = self.piece_at(&d2.name, p);
                    for x in Self::cell_test_points(&meet) {
                        match (p1.norm_at(p, &x), p2.norm_at(p, &x)) {
                            (Ok(n1), Ok(n2)) => match n1.eq(&n2) {
                                Ok(true) => {}
                                _ => report.failures.push(format!(
                                    "continuity: norms of {} and {} differ at P={p}, x={x:?}",
                                    d1.name, d2.name
                                )),
                            },
                            _ => report
                                .failures
                                .push(format!("degenerate piece on {} or {}", d1.name, d2.name)),
                        }
                    }
                    let shared_tail = meet.tail_cone();
                    for w in &shared_tail.generators {
                        match (p1.linear_norm_at(w), p2.linear_norm_at(w)) {
                            (Ok(n1), Ok(n2)) => match n1.eq(&n2) {
                                Ok(true) => {}
                                _ => report.failures.push(format!(
                                    "continuity: linear parts of {} and {} differ on ray {w:?} (P={p})",
                                    d1.name, d2.name
                                )),
                            },
                            _ => report.failures.push(format!(
                                "degenerate linear part on {} or {}",
                                d1.name, d2.name
                            )),
                        }
                    }
                }
            }
        }

        // Common linear part: every exceptional presentation agrees with the
        // designated one at level 0 on its tail cone.
        for ((name, point), piece) in &self.overrides {
            let generic = &self.generic[name];
            let d = self.fan.divisor_by_name(name).expect("checked");
            let mut test_ws = d.tail.generators.clone();
            if !d.tail.generators.is_empty() {
                let mut interior = RatVec::zero(self.fan.dim);
                for g in &d.tail.generators {
                    interior = interior.add(g);
                }
                if !test_ws.contains(&interior) {
                    test_ws.push(interior);
                }
            }
            for w in &test_ws {
                match (piece.linear_norm_at(w), generic.linear_norm_at(w)) {
                    (Ok(a), Ok(b)) => match a.eq(&b) {
                        Ok(true) => {}
                        _ => report.failures.push(format!(
                            "linear part of the override for {name} at {point} differs on {w:?}"
                        )),
                    },
                    _ => report
                        .failures
                        .push(format!("degenerate override for {name} at {point}")),
                }
            }
        }

        report
    }

    /// The restriction to the fiber over a point where the slice is the tail
    /// fan: per maximal tail cone, the residue frame at the lattice h_P(0)
    /// and the characters of the level-0 map on the residue space.
    pub fn special_fiber_map(&self, place: &PointP1) -> Result<Vec<(Cone, QMat, Vec<RatVec>)>> {
        let tail_fan = self.fan.tail_fan();
        let slice = self.fan.slice_at(place);
        // The slice must equal the tail fan: same cells as polyhedra.
        let tail_cells: Vec<crate::polyhedral::Polyhedron> = tail_fan
            .cones
            .iter()
            .map(crate::polyhedral::Polyhedron::from_cone)
            .collect();
        for cell in &slice.cells {
            if !tail_cells.contains(cell) {
                return Err(TvbError::Invalid(format!(
                    "slice at {place} is not the tail fan (cell {cell:?})"
                )));
            }
        }
        let base = self.norm(place, &RatVec::zero(self.fan.dim))?;
        if !base.is_integral() {
            return Err(TvbError::NonIntegerNorm(format!(
                "h_{place}(0) has values {:?}",
                base.values
            )));
        }
        let lattice = lattice_from_norm(&base)?;
        let res = residue_matrix(&lattice.generators, place)?;
        let mut out = Vec::new();
        for tau in tail_fan.maximal_cones() {
            // Piece of some divisor whose tail is tau.
            let mut candidates: Vec<&PPDivisor> = self
                .fan
                .divisors
                .iter()
                .filter(|d| &d.tail == tau)
                .collect();
            candidates.sort_by(|a, b| a.name.cmp(&b.name));
            let Some(d) = candidates.first() else {
                continue;
            };
            let piece = self.piece_at(&d.name, place);
            // Express the residue of the piece frame (scaled into the
            // lattice) over Q: the level-0 residue map has the same
            // characters as the piece.
            let rel = lattice.generators.inverse()?.mul(&piece.frame);
            let rel_res = residue_matrix(&rel, place)?;
            let mut frame = QMat::zero(self.rank, self.rank);
            for i in 0..self.rank {
                for j in 0..self.rank {
                    // residue of frame vector j in lattice coordinates,
                    // pushed to the ambient residue coordinates.
                    let mut acc = QQ::zero();
                    for k in 0..self.rank {
                        acc += &res[i][k] * &rel_res[k][j];
                    }
                    frame[(i, j)] = acc;
                }
            }
            if frame.rank() != self.rank {
                return Err(TvbError::Invalid(format!(
                    "piece frame of {} degenerates in the special fiber at {place}",
                    d.name
                )));
            }
            out.push(((*tau).clone(), frame, piece.characters.clone()));
        }
        Ok(out)
    }

    /// The weight-u module over the chart of one divisor: for each admissible
    /// frame index, the coefficient space basis (a Riemann-Roch space of the
    /// floored evaluation divisor supported on the explicit points).
    pub fn weight_module(
        &self,
        divisor: &str,
        u: &RatVec,
    ) -> Result<Vec<(usize, DivisorOnY, Vec<RatFunc>)>> {
        let d = self
            .fan
            .divisor_by_name(divisor)
            .ok_or_else(|| TvbError::Invalid(format!("unknown divisor {divisor}")))?;
        let piece = &self.generic[divisor];
        let dual = d.tail.dual();
        let mut out = Vec::new();
        for (i, ui) in piece.characters.iter().enumerate() {
            let shifted = u.sub(ui);
            if !dual.contains(&shifted) {
                continue;
            }
            let div = d.eval(&shifted)?;
            let floored = div.floor();
            let basis = crate::curve::rr_space(&floored);
            out.push((i, floored, basis));
        }
        Ok(out)
    }

    /// The gluing identity at one point and one weight: over every vertex of
    /// the shared coefficient the two ceiling-scaled frame lattices agree,
    /// and over every shared tail ray the two admissible spans agree.
    pub fn check_transition(
        &self,
        d1: &str,
        d2: &str,
        u: &RatVec,
        place: &PointP1,
    ) -> Result<bool> {
        let div1 = self
            .fan
            .divisor_by_name(d1)
            .ok_or_else(|| TvbError::Invalid(format!("unknown divisor {d1}")))?;
        let div2 = self
            .fan
            .divisor_by_name(d2)
            .ok_or_else(|| TvbError::Invalid(format!("unknown divisor {d2}")))?;
        let (Some(c1), Some(c2)) = (div1.coefficient(place), div2.coefficient(place)) else {
            return Ok(true);
        };
        let Some(meet) = c1.intersect(&c2)? else {
            return Ok(true);
        };
        let tail_meet = div1.tail.intersect(&div2.tail)?;
        let dual = tail_meet.dual();
        let p1 = self.piece_at(d1, place);
        let p2 = self.piece_at(d2, place);
        let adm = |piece: &Piece| -> Vec<usize> {
            (0..piece.rank())
                .filter(|&i| dual.contains(&u.sub(&piece.characters[i])))
                .collect()
        };
        let a1 = adm(p1);
        let a2 = adm(p2);
        let cols1: Vec<Vec<RatFunc>> = a1.iter().map(|&i| p1.frame.col(i)).collect();
        let cols2: Vec<Vec<RatFunc>> = a2.iter().map(|&i| p2.frame.col(i)).collect();
        // Span identity over the whole dual tail, and per shared ray.
        let r1 = joint_rank(&cols1, &[]);
        let r2 = joint_rank(&cols2, &[]);
        if r1 != r2 || joint_rank(&cols1, &cols2) != r1 {
            return Ok(false);
        }
        for w in &tail_meet.generators {
            let ray1: Vec<Vec<RatFunc>> = (0..p1.rank())
                .filter(|&i| !u.sub(&p1.characters[i]).dot(w).is_negative())
                .map(|i| p1.frame.col(i))
                .collect();
            let ray2: Vec<Vec<RatFunc>> = (0..p2.rank())
                .filter(|&i| !u.sub(&p2.characters[i]).dot(w).is_negative())
                .map(|i| p2.frame.col(i))
                .collect();
            let rr1 = joint_rank(&ray1, &[]);
            let rr2 = joint_rank(&ray2, &[]);
            if rr1 != rr2 || joint_rank(&ray1, &ray2) != rr1 {
                return Ok(false);
            }
        }
        if a1.is_empty() {
            return Ok(true);
        }
        // Vertex lattices inside the common span, in coordinates given by
        // the first admissible family.
        for v in &meet.vertices {
            let scale = |piece: &Piece, idx: &[usize]| -> Vec<Vec<RatFunc>> {
                idx.iter()
                    .map(|&i| {
                        let e = qq_ceil(&piece.characters[i].sub(u).dot(v));
                        let k: i64 = e.to_integer().to_string().parse().expect("small exponent");
                        let w = RatFunc::uniformizer_pow(place, k);
                        piece.frame.col(i).iter().map(|f| f.mul(&w)).collect()
                    })
                    .collect()
            };
            let gens1 = scale(p1, &a1);
            let gens2 = scale(p2, &a2);
            // Coordinates of both generator families in the basis cols1.
            let coords = |gens: &[Vec<RatFunc>]| -> Result<KMat> {
                let mut cols = Vec::new();
                for g in gens {
                    let Some(c) = solve_in_span(&cols1, g) else {
                        return Err(TvbError::Invalid(
                            "transition generators leave the common span".into(),
                        ));
                    };
                    cols.push(c);
                }
                Ok(KMat::from_cols(&cols))
            };
            let m1 = coords(&gens1)?;
            let m2 = coords(&gens2)?;
            let l1 = crate::building::LatticeRep::new(place.clone(), m1)?;
            let l2 = crate::building::LatticeRep::new(place.clone(), m2)?;
            if !l1.eq(&l2)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Morphism test: at every vertex and interior sample of every cell, and
    /// at level 0 on every tail ray, the image of each source frame vector
    /// under phi has norm at least the source value.
    pub fn is_morphism(&self, phi: &KMat, target: &SupportMap) -> Result<bool> {
        if phi.cols != self.rank || phi.rows != target.rank {
            return Err(TvbError::Dimension("morphism matrix shape".into()));
        }
        if self.fan.dim != target.fan.dim
            || self.fan.divisors.len() != target.fan.divisors.len()
        {
            return Err(TvbError::Invalid("morphism requires a common fan".into()));
        }
        let mut points = self.explicit_points();
        for p in target.explicit_points() {
            if !points.contains(&p) {
                points.push(p);
            }
        }
        points.push(self.fan.fresh_point());
        for p in &points {
            for d in &self.fan.divisors {
                let Some(cell) = d.coefficient(p) else {
                    continue;
                };
                let src = self.piece_at(&d.name, p);
                let tgt_norm_at = |x: &RatVec| -> Result<AdaptedNorm> {
                    target.piece_at(&d.name, p).norm_at(p, x)
                };
                for x in Self::cell_test_points(&cell) {
                    let tgt = tgt_norm_at(&x)?;
                    for i in 0..src.rank() {
                        let src_val = -src.characters[i].dot(&x);
                        let image = phi.mul_vec(&src.frame.col(i));
                        match tgt.eval(&image) {
                            None => {} // +infinity dominates
                            Some(v) if v < src_val => return Ok(false),
                            Some(_) => {}
                        }
                    }
                }
                for w in &d.tail.generators {
                    let tgt_piece = target.piece_at(&d.name, p);
                    let tgt = tgt_piece.linear_norm_at(w)?;
                    for i in 0..src.rank() {
                        let src_val = -src.characters[i].dot(w);
                        let image = phi.mul_vec(&src.frame.col(i));
                        match tgt.eval(&image) {
                            None => {}
                            Some(v) if v < src_val => return Ok(false),
                            Some(_) => {}
                        }
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Compares the special-fiber data against level-0 reference data given by
/// (cone, frame over Q, characters): equality of the induced residue norms
/// at every ray generator and an interior sample of each cone.
pub fn residue_maps_equal(
    got: &[(Cone, QMat, Vec<RatVec>)],
    expected: &[(Cone, QMat, Vec<RatVec>)],
) -> bool {
    if got.len() != expected.len() {
        return false;
    }
    for (cone, frame, chars) in got {
        let Some((_, eframe, echars)) = expected.iter().find(|(c, _, _)| c == cone) else {
            return false;
        };
        let mut test_ws = cone.generators.clone();
        let mut interior = RatVec::zero(cone.dim);
        for g in &cone.generators {
            interior = interior.add(g);
        }
        if !interior.is_zero() {
            test_ws.push(interior);
        }
        for w in &test_ws {
            let mk = |fr: &QMat, ch: &[RatVec]| -> Option<ResidueNorm> {
                let values: Vec<QQ> = ch.iter().map(|u| -u.dot(w)).collect();
                ResidueNorm::new(fr.clone(), values).ok()
            };
            match (mk(frame, chars), mk(eframe, echars)) {
                (Some(a), Some(b)) => {
                    if !a.eq(&b) {
                        return false;
                    }
                }
                _ => return false,
            }
        }
    }
    true
}

/// Pretty-printer for weight vectors in reports.
pub fn fmt_weight(u: &RatVec) -> String {
    u.coords
        .iter()
        .map(fmt_qq)
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::parse_ratfunc;
    use crate::polyhedral::Polyhedron;

    fn v(coords: &[i64]) -> RatVec {
        RatVec::from_ints(coords)
    }

    fn rf(s: &str) -> RatFunc {
        parse_ratfunc(s).unwrap()
    }

    /// A complete 1-d tail fan with three affine-locus divisors: positive
    /// cone away from infinity, negative cone away from zero, the origin
    /// divisor away from both.
    fn simple_fan() -> DivisorialFan {
        let pos = Cone::from_generators(1, &[v(&[1])]).unwrap();
        let neg = Cone::from_generators(1, &[v(&[-1])]).unwrap();
        let zero = Cone::zero(1);
        let dpos = PPDivisor::new(
            "pos",
            pos,
            BTreeMap::from([(PointP1::Infinity, None)]),
        )
        .unwrap();
        let dneg = PPDivisor::new(
            "neg",
            neg,
            BTreeMap::from([(PointP1::finite(0), None)]),
        )
        .unwrap();
        let dzero = PPDivisor::new(
            "zero",
            zero,
            BTreeMap::from([(PointP1::finite(0), None), (PointP1::Infinity, None)]),
        )
        .unwrap();
        DivisorialFan::new(1, vec![dpos, dneg, dzero])
    }

    /// The character bundle: one character on every divisor, trivial frame.
    fn character_bundle(u0: i64) -> SupportMap {
        let fan = simple_fan();
        let mut generic = BTreeMap::new();
        for d in &fan.divisors {
            generic.insert(
                d.name.clone(),
                Piece::new(KMat::identity(1), vec![v(&[u0])]).unwrap(),
            );
        }
        SupportMap::new(fan, 1, generic, BTreeMap::new()).unwrap()
    }

    #[test]
    fn character_bundle_is_valid() {
        let h = character_bundle(2);
        let report = h.validate();
        assert!(report.is_valid(), "{report:?}");
    }

    #[test]
    fn evaluate_character_bundle() {
        // The norm of lambda at x is val_P(lambda) - <u0, x>.
        let h = character_bundle(1);
        let p = PointP1::finite(0);
        let val = h
            .evaluate(&p, &v(&[2]), &[rf("t^3")])
            .unwrap()
            .unwrap();
        assert_eq!(val, qq(3 - 2));
        // At 0 the slice only covers the positive axis in this fan.
        assert!(h.evaluate(&p, &v(&[-2]), &[rf("1")]).is_err());
        // Trivial bundle at u0 = 0 evaluates to 0 on the unit, everywhere on
        // the slice at a generic point.
        let triv = character_bundle(0);
        let fresh = triv.fan.fresh_point();
        for x in [v(&[0]), v(&[1]), v(&[-2])] {
            assert_eq!(
                triv.evaluate(&fresh, &x, &[rf("1")]).unwrap().unwrap(),
                qq(0)
            );
        }
    }

    #[test]
    fn kinked_character_change_stays_valid() {
        // Changing the character on one maximal cone keeps continuity at the
        // shared vertex: the result is a different, still valid, bundle.
        let mut h = character_bundle(1);
        h.generic.insert(
            "pos".into(),
            Piece::new(KMat::identity(1), vec![v(&[2])]).unwrap(),
        );
        assert!(h.validate().is_valid());
    }

    #[test]
    fn override_linear_part_violation_detected() {
        // An exceptional presentation must share the designated linear part.
        let mut h = character_bundle(1);
        h.overrides.insert(
            ("pos".into(), PointP1::finite(0)),
            Piece::new(KMat::identity(1), vec![v(&[2])]).unwrap(),
        );
        let report = h.validate();
        assert!(!report.is_valid());
        assert!(report
            .failures
            .iter()
            .any(|f| f.contains("linear part")), "{report:?}");
    }

    #[test]
    fn weight_module_character_bundle() {
        let h = character_bundle(1);
        // Admissible weight must satisfy u - u0 in the dual of each tail.
        let m_pos = h.weight_module("pos", &v(&[1])).unwrap();
        assert_eq!(m_pos.len(), 1);
        // u = 0 is not admissible for the positive divisor (u - u0 = -1).
        assert!(h.weight_module("pos", &v(&[0])).unwrap().is_empty());
        // For the zero-tail divisor every weight is admissible; the
        // coefficient space is the ambient Riemann-Roch space of the zero
        // divisor.
        let m_zero = h.weight_module("zero", &v(&[5])).unwrap();
        assert_eq!(m_zero.len(), 1);
        assert_eq!(m_zero[0].2.len(), 1);
    }

    #[test]
    fn transition_trivial_cases() {
        let h = character_bundle(0);
        assert!(h
            .check_transition("pos", "pos", &v(&[0]), &PointP1::finite(0))
            .unwrap());
        assert!(h
            .check_transition("pos", "neg", &v(&[0]), &PointP1::finite(0))
            .unwrap());
        // Corrupting one side's frame breaks the vertex lattice equality at
        // a point where both coefficients meet.
        let fresh = h.fan.fresh_point();
        let mut bad = h.clone();
        bad.generic.insert(
            "pos".into(),
            Piece::new(
                KMat::from_cols(&[vec![rf("t-1")]]),
                vec![v(&[0])],
            )
            .unwrap(),
        );
        assert!(!bad
            .check_transition("pos", "neg", &v(&[0]), &fresh)
            .unwrap());
    }

    #[test]
    fn morphism_identity_zero_and_scaling() {
        let h = character_bundle(0);
        let id = KMat::identity(1);
        assert!(h.is_morphism(&id, &h).unwrap());
        let zero = KMat::zero(1, 1);
        assert!(h.is_morphism(&zero, &h).unwrap());
        // Multiplication by 1/t drops norms at 0; multiplication by t drops
        // them at infinity. Neither is an endomorphism of the bundle.
        let tinv = KMat::from_cols(&[vec![rf("1/t")]]);
        assert!(!h.is_morphism(&tinv, &h).unwrap());
        let tmul = KMat::from_cols(&[vec![rf("t")]]);
        assert!(!h.is_morphism(&tmul, &h).unwrap());
        // Constant scalings are.
        let half = KMat::from_cols(&[vec![rf("1/2")]]);
        assert!(h.is_morphism(&half, &h).unwrap());
    }

    #[test]
    fn special_fiber_at_generic_point() {
        let h = character_bundle(3);
        let fresh = h.fan.fresh_point();
        let fiber = h.special_fiber_map(&fresh).unwrap();
        // Two maximal tail cones, each carrying the character 3.
        assert_eq!(fiber.len(), 2);
        for (_, frame, chars) in &fiber {
            assert_eq!(frame.rank(), 1);
            assert_eq!(chars, &vec![v(&[3])]);
        }
        // At a point with a non-tail slice the reduction is refused: give
        // the positive divisor a shifted coefficient at 0.
        let pos = Cone::from_generators(1, &[v(&[1])]).unwrap();
        let shifted = Polyhedron::from_vertices_rays(1, &[v(&[1])], &[v(&[1])]).unwrap();
        let dpos = PPDivisor::new(
            "pos",
            pos,
            BTreeMap::from([
                (PointP1::Infinity, None),
                (PointP1::finite(0), Some(shifted)),
            ]),
        )
        .unwrap();
        let mut fan = simple_fan();
        fan.divisors[0] = dpos;
        let mut generic = BTreeMap::new();
        for d in &fan.divisors {
            generic.insert(
                d.name.clone(),
                Piece::new(KMat::identity(1), vec![v(&[0])]).unwrap(),
            );
        }
        let h2 = SupportMap::new(fan, 1, generic, BTreeMap::new()).unwrap();
        assert!(h2.special_fiber_map(&PointP1::finite(0)).is_err());
    }
}
