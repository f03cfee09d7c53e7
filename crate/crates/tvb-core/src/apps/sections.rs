//! Graded global sections of the bundle of a support map, and the induced
//! bundle on the curve that computes the same spaces.
//!
//! A weight-u section is a vector e over K satisfying, chart by chart: its
//! coordinates in the chart frame are supported on the indices whose shifted
//! character lies in the dual tail cone, and at every point of the curve and
//! every vertex v of the local slice the coordinate valuations respect the
//! ceiling bounds ceil(<u_i - u, v>). The solver turns these into exact
//! linear conditions on Laurent coefficients and reads the space off a
//! kernel computation over Q.

use num_traits::{Signed, Zero};

use crate::building::{lattice_intersect, norm_from_lattice, LatticeRep};
use crate::curve::{PointP1, Poly, RatFunc};
use crate::error::{Result, TvbError};
use crate::kmatrix::{local_smith, KMat};
use crate::qq::{qq_ceil, QMat, QQ, RatVec};
use crate::support::SupportMap;

/// One graded piece of the section space.
pub struct SectionSpace {
    pub weight: RatVec,
    /// Basis vectors of E in ambient coordinates.
    pub basis: Vec<Vec<RatFunc>>,
}

impl SectionSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// The curve-side data of the weight-u pushforward: the admissible subspace
/// with a lattice at every constrained point of the curve.
pub struct SectionsOnY {
    pub weight: RatVec,
    /// Columns span the admissible subspace E_u inside K^r.
    pub space: Option<KMat>,
    /// Lattices in E_u-coordinates at the constrained points.
    pub lattices: Vec<(PointP1, LatticeRep)>,
    /// Dimension of the global sections of the induced bundle on the curve.
    pub dim: usize,
}

/// A single exact condition: val_point(sum_j row[j] * g_j) >= bound.
#[derive(Clone, Debug)]
struct ValCondition {
    point: PointP1,
    row: Vec<RatFunc>,
    bound: i64,
}

fn to_i64(q: &QQ) -> i64 {
    q.to_integer().to_string().parse().expect("small integer")
}

/// Rational points where an entry of the matrix degenerates (zeros or poles
/// of entries, zeros of the determinant for square matrices). Irrational
/// singularities are rejected: all frame data must split over Q.
fn singular_points(m: &KMat, square: bool) -> Result<Vec<PointP1>> {
    let mut pts: Vec<PointP1> = Vec::new();
    let mut add_poly = |p: &Poly| -> Result<()> {
        if p.is_zero() {
            return Ok(());
        }
        let (roots, rest) = p.rational_roots();
        if rest.degree() > 0 {
            return Err(TvbError::IrrationalLocus(crate::curve::fmt_poly(&rest)));
        }
        for (r, _) in roots {
            let pt = PointP1::Finite(r);
            if !pts.contains(&pt) {
                pts.push(pt);
            }
        }
        Ok(())
    };
    for f in &m.data {
        if !f.is_zero() {
            add_poly(f.numerator())?;
            add_poly(f.denominator())?;
        }
    }
    if square && m.rows == m.cols {
        let d = m.det();
        if !d.is_zero() {
            add_poly(d.numerator())?;
            add_poly(d.denominator())?;
        }
    }
    Ok(pts)
}

/// Intersection of the column spans of `a` and `b`.
fn intersect_spans(a: &[Vec<RatFunc>], b: &[Vec<RatFunc>]) -> Vec<Vec<RatFunc>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let rows = a[0].len();
    let mut stacked = KMat::zero(rows, a.len() + b.len());
    for (j, col) in a.iter().enumerate() {
        for i in 0..rows {
            stacked[(i, j)] = col[i].clone();
        }
    }
    for (j, col) in b.iter().enumerate() {
        for i in 0..rows {
            stacked[(i, a.len() + j)] = col[i].neg();
        }
    }
    let kernel = stacked.kernel();
    let mut out = Vec::new();
    for k in kernel {
        let mut v = vec![RatFunc::zero(); rows];
        for (j, col) in a.iter().enumerate() {
            for i in 0..rows {
                let t = col[i].mul(&k[j]);
                v[i] = v[i].add(&t);
            }
        }
        if v.iter().any(|x| !x.is_zero()) {
            out.push(v);
        }
    }
    // Reduce to an independent family.
    let mut basis: Vec<Vec<RatFunc>> = Vec::new();
    for v in out {
        let mut trial = basis.clone();
        trial.push(v.clone());
        if KMat::from_cols(&trial).rank() == trial.len() {
            basis.push(v);
        }
    }
    basis
}

/// The admissible indices of a piece for a weight: those whose shifted
/// character lies in the dual of the given tail cone.
fn admissible(piece: &crate::support::Piece, tail: &crate::polyhedral::Cone, u: &RatVec) -> Vec<usize> {
    let dual = tail.dual();
    (0..piece.rank())
        .filter(|&i| dual.contains(&u.sub(&piece.characters[i])))
        .collect()
}

/// Basis of the subspace of E cut out by all ray conditions at weight u.
fn weight_space(h: &SupportMap, u: &RatVec) -> Vec<Vec<RatFunc>> {
    let mut basis: Vec<Vec<RatFunc>> = (0..h.rank)
        .map(|i| {
            let mut v = vec![RatFunc::zero(); h.rank];
            v[i] = RatFunc::one();
            v
        })
        .collect();
    for d in &h.fan.divisors {
        let piece = &h.generic[&d.name];
        let adm = admissible(piece, &d.tail, u);
        let span: Vec<Vec<RatFunc>> = adm.iter().map(|&i| piece.frame.col(i)).collect();
        basis = intersect_spans(&basis, &span);
        if basis.is_empty() {
            return basis;
        }
    }
    basis
}

/// All constraint points: explicit data points, singular points of every
/// frame in play, and infinity.
fn constraint_points(h: &SupportMap, space: &KMat) -> Result<Vec<PointP1>> {
    let mut pts = h.explicit_points();
    let mut add = |more: Vec<PointP1>| {
        for p in more {
            if !pts.contains(&p) {
                pts.push(p.clone());
            }
        }
    };
    for d in &h.fan.divisors {
        let f = &h.generic[&d.name].frame;
        add(singular_points(f, true)?);
        add(singular_points(&f.inverse()?, true)?);
    }
    for piece in h.overrides.values() {
        add(singular_points(&piece.frame, true)?);
        add(singular_points(&piece.frame.inverse()?, true)?);
    }
    add(singular_points(space, false)?);
    if !pts.contains(&PointP1::Infinity) {
        pts.push(PointP1::Infinity);
    }
    pts.sort();
    Ok(pts)
}

/// The vertex conditions at one constraint point, on the coordinates gamma
/// of e = space * gamma.
fn vertex_conditions(
    h: &SupportMap,
    space: &KMat,
    u: &RatVec,
    point: &PointP1,
) -> Result<Vec<ValCondition>> {
    let mut out = Vec::new();
    for d in &h.fan.divisors {
        let Some(cell) = d.coefficient(point) else {
            continue;
        };
        let piece = h.piece_at(&d.name, point);
        let relation = piece.frame.inverse()?.mul(space);
        for v in &cell.vertices {
            for i in 0..h.rank {
                let bound = to_i64(&qq_ceil(&piece.characters[i].sub(u).dot(v)));
                out.push(ValCondition {
                    point: point.clone(),
                    row: (0..space.cols).map(|j| relation[(i, j)].clone()).collect(),
                    bound,
                });
            }
        }
    }
    Ok(out)
}

/// Solves a system of valuation conditions for a vector of s unknown
/// rational functions, with poles confined to the condition points. Returns
/// a Q-basis of the solution space.
fn solve_val_system(s: usize, conditions: &[ValCondition]) -> Vec<Vec<RatFunc>> {
    // Pole bounds per point: a condition val(sum row_j g_j) >= b with some
    // row entry nonzero forces val(g) >= min(b, min val row) - max val-gap;
    // we use the conservative bound below and rely on the final
    // re-verification.
    let mut points: Vec<PointP1> = Vec::new();
    for c in conditions {
        if !points.contains(&c.point) {
            points.push(c.point.clone());
        }
    }
    if !points.contains(&PointP1::Infinity) {
        points.push(PointP1::Infinity);
    }
    points.sort();
    let mut pole_bound: std::collections::BTreeMap<PointP1, i64> = points
        .iter()
        .map(|p| (p.clone(), 0i64))
        .collect();
    for c in conditions {
        let row_min = c
            .row
            .iter()
            .filter_map(|f| f.val_at(&c.point))
            .min()
            .unwrap_or(0);
        let need = -(c.bound - row_min).min(0);
        let e = pole_bound.get_mut(&c.point).expect("known point");
        *e = (*e).max(need.max(0)).max(-(c.bound.min(0)) + row_min.abs());
    }
    // Jet depth slack so the ansatz can match arbitrary local jets.
    let mut depth_slack: i64 = 2;
    for c in conditions {
        let row_min = c
            .row
            .iter()
            .filter_map(|f| f.val_at(&c.point))
            .min()
            .unwrap_or(0);
        depth_slack += (c.bound - row_min).abs().min(12) + 1;
    }
    let n_inf = pole_bound[&PointP1::Infinity];
    let finite_total: i64 = pole_bound
        .iter()
        .filter(|(p, _)| **p != PointP1::Infinity)
        .map(|(_, n)| *n)
        .sum();
    let dmax = (n_inf + finite_total + depth_slack) as usize;

    // Common denominator.
    let mut den = Poly::one();
    for (p, n) in &pole_bound {
        if let PointP1::Finite(q) = p {
            den = den.mul(&Poly::t_minus(q).pow(*n as u32));
        }
    }
    let mono_count = dmax + 1;
    let unknowns = s * mono_count;
    // Basis functions phi_{j,d} = t^d / den in slot j.
    let phi = |d: usize| -> RatFunc {
        RatFunc::new(Poly::t().pow(d as u32), den.clone()).expect("nonzero denominator")
    };

    // Degree condition at infinity: val_inf(g_j) >= -n_inf automatically
    // needs deg(numerator) <= deg(den) + n_inf; larger monomials get pinned
    // by explicit conditions.
    let mut rows: Vec<Vec<QQ>> = Vec::new();
    let deg_cap = den.degree() + n_inf;
    for d in 0..mono_count {
        if (d as i64) > deg_cap {
            for j in 0..s {
                let mut row = vec![QQ::zero(); unknowns];
                row[j * mono_count + d] = QQ::from_integer(1.into());
                rows.push(row);
            }
        }
    }

    for c in conditions {
        // Laurent data of row[j] * phi_d at the condition point.
        let mut funcs: Vec<(usize, usize, RatFunc)> = Vec::new();
        for (j, r) in c.row.iter().enumerate() {
            if r.is_zero() {
                continue;
            }
            for d in 0..mono_count {
                funcs.push((j, d, r.mul(&phi(d))));
            }
        }
        if funcs.is_empty() {
            continue;
        }
        let vmin = funcs
            .iter()
            .filter_map(|(_, _, f)| f.val_at(&c.point))
            .min()
            .unwrap_or(c.bound);
        if vmin >= c.bound {
            continue;
        }
        let depth = (c.bound - vmin) as usize;
        // One linear equation per Laurent exponent in [vmin, bound).
        let mut eqs = vec![vec![QQ::zero(); unknowns]; depth];
        for (j, d, f) in &funcs {
            if f.is_zero() {
                continue;
            }
            let (v0, coeffs) = f.laurent_at(&c.point, depth);
            for (k, coeff) in coeffs.iter().enumerate() {
                let exp = v0 + k as i64;
                if exp < c.bound && exp >= vmin {
                    eqs[(exp - vmin) as usize][j * mono_count + d] =
                        eqs[(exp - vmin) as usize][j * mono_count + d].clone() + coeff;
                }
            }
        }
        rows.extend(eqs);
    }

    let mat = if rows.is_empty() {
        QMat::zero(1, unknowns)
    } else {
        let mut m = QMat::zero(rows.len(), unknowns);
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    };
    let kernel = mat.kernel();
    kernel
        .into_iter()
        .map(|k| {
            (0..s)
                .map(|j| {
                    let num: Vec<QQ> = (0..mono_count)
                        .map(|d| k.coords[j * mono_count + d].clone())
                        .collect();
                    RatFunc::new(Poly::new(num), den.clone()).expect("nonzero denominator")
                })
                .collect()
        })
        .collect()
}

/// Exact verification that a vector satisfies every stated condition.
fn verify_conditions(gamma: &[RatFunc], conditions: &[ValCondition]) -> bool {
    for c in conditions {
        let mut acc = RatFunc::zero();
        for (j, r) in c.row.iter().enumerate() {
            acc = acc.add(&r.mul(&gamma[j]));
        }
        if let Some(v) = acc.val_at(&c.point) {
            if v < c.bound {
                return false;
            }
        }
    }
    true
}

/// Integral weights of the bounding box of all characters, inflated by one.
pub fn weight_box(h: &SupportMap) -> Vec<RatVec> {
    let dim = h.fan.dim;
    if dim == 0 {
        return vec![RatVec::zero(0)];
    }
    let mut lo = vec![i64::MAX; dim];
    let mut hi = vec![i64::MIN; dim];
    let mut consider = |u: &RatVec| {
        for (k, c) in u.coords.iter().enumerate() {
            let f = to_i64(&crate::qq::qq_floor(c));
            let cl = to_i64(&qq_ceil(c));
            lo[k] = lo[k].min(f - 1);
            hi[k] = hi[k].max(cl + 1);
        }
    };
    for piece in h.generic.values() {
        for u in &piece.characters {
            consider(u);
        }
    }
    for piece in h.overrides.values() {
        for u in &piece.characters {
            consider(u);
        }
    }
    let mut out = Vec::new();
    let mut cur = lo.clone();
    'outer: loop {
        out.push(RatVec::from_ints(&cur));
        for k in 0..dim {
            if cur[k] < hi[k] {
                cur[k] += 1;
                for (kk, c) in cur.iter_mut().enumerate().take(k) {
                    *c = lo[kk];
                }
                continue 'outer;
            }
        }
        break;
    }
    out
}

/// The weight-u global sections, by the ray/vertex condition solver.
pub fn global_sections(h: &SupportMap, u: &RatVec) -> Result<SectionSpace> {
    if !h.fan.tail_fan().is_complete() {
        return Err(TvbError::Unbounded(
            "tail fan is not complete; sections need explicit truncation".into(),
        ));
    }
    let basis = weight_space(h, u);
    if basis.is_empty() {
        return Ok(SectionSpace {
            weight: u.clone(),
            basis: vec![],
        });
    }
    let space = KMat::from_cols(&basis);
    let points = constraint_points(h, &space)?;
    let mut conditions = Vec::new();
    for p in &points {
        conditions.extend(vertex_conditions(h, &space, u, p)?);
    }
    let gammas = solve_val_system(space.cols, &conditions);
    let mut out = Vec::new();
    for gamma in gammas {
        if !verify_conditions(&gamma, &conditions) {
            return Err(TvbError::Invalid(
                "internal: solved section violates a condition".into(),
            ));
        }
        let e = space.mul_vec(&gamma);
        // Ray re-verification, one tail ray at a time.
        for d in &h.fan.divisors {
            let piece = &h.generic[&d.name];
            let coords = piece.frame.solve_vec(&e)?;
            for w in &d.tail.generators {
                for (i, lam) in coords.iter().enumerate() {
                    if !lam.is_zero()
                        && u.sub(&piece.characters[i]).dot(w).is_negative()
                    {
                        return Err(TvbError::Invalid(
                            "internal: section violates a ray constraint".into(),
                        ));
                    }
                }
            }
        }
        out.push(e);
    }
    Ok(SectionSpace {
        weight: u.clone(),
        basis: out,
    })
}

/// The curve-side bundle at weight u: admissible subspace, one intersected
/// lattice per constrained point, and the dimension of its global sections,
/// computed along the curve rather than vertex by vertex.
pub fn sections_bundle_on_y(h: &SupportMap, u: &RatVec) -> Result<SectionsOnY> {
    if !h.fan.tail_fan().is_complete() {
        return Err(TvbError::Unbounded(
            "tail fan is not complete; sections need explicit truncation".into(),
        ));
    }
    let basis = weight_space(h, u);
    if basis.is_empty() {
        return Ok(SectionsOnY {
            weight: u.clone(),
            space: None,
            lattices: vec![],
            dim: 0,
        });
    }
    let space = KMat::from_cols(&basis);
    let s = space.cols;
    let points = constraint_points(h, &space)?;
    let mut lattices: Vec<(PointP1, LatticeRep)> = Vec::new();
    for p in &points {
        let mut current: Option<LatticeRep> = None;
        for d in &h.fan.divisors {
            let Some(cell) = d.coefficient(p) else {
                continue;
            };
            let piece = h.piece_at(&d.name, p);
            let relation = piece.frame.inverse()?.mul(&space);
            for v in &cell.vertices {
                // The lattice {gamma : w^{-b_i} (relation gamma)_i regular}.
                let mut scaled = KMat::zero(h.rank, s);
                for i in 0..h.rank {
                    let b = to_i64(&qq_ceil(&piece.characters[i].sub(u).dot(v)));
                    let w = RatFunc::uniformizer_pow(p, -b);
                    for j in 0..s {
                        scaled[(i, j)] = relation[(i, j)].mul(&w);
                    }
                }
                let smith = local_smith(&scaled, p);
                if smith.exponents.len() < s {
                    return Err(TvbError::Invalid(
                        "vertex condition matrix lost rank".into(),
                    ));
                }
                // {gamma : scaled * gamma integral} = V^{-1} diag(w^{-d_i}).
                let vinv = smith.v.inverse()?;
                let mut gens = KMat::zero(s, s);
                for j in 0..s {
                    let w = RatFunc::uniformizer_pow(p, -smith.exponents[j]);
                    for i in 0..s {
                        gens[(i, j)] = vinv[(i, j)].mul(&w);
                    }
                }
                let lat = LatticeRep::new(p.clone(), gens)?;
                current = Some(match current {
                    None => lat,
                    Some(acc) => lattice_intersect(&acc, &lat)?,
                });
            }
        }
        if let Some(lat) = current {
            lattices.push((p.clone(), lat));
        }
    }
    // Global sections of the induced bundle: gamma regular in every lattice
    // chart and regular elsewhere.
    let mut conditions: Vec<ValCondition> = Vec::new();
    for (p, lat) in &lattices {
        let minv = lat.generators.inverse()?;
        for i in 0..s {
            conditions.push(ValCondition {
                point: p.clone(),
                row: (0..s).map(|j| minv[(i, j)].clone()).collect(),
                bound: 0,
            });
        }
    }
    let gammas = solve_val_system(s, &conditions);
    for gamma in &gammas {
        if !verify_conditions(gamma, &conditions) {
            return Err(TvbError::Invalid(
                "internal: curve-side section violates a condition".into(),
            ));
        }
    }
    Ok(SectionsOnY {
        weight: u.clone(),
        space: Some(space),
        lattices,
        dim: gammas.len(),
    })
}

/// The norms g^u_P of the curve-side bundle, one per constrained point.
pub fn curve_norms(bundle: &SectionsOnY) -> Vec<(PointP1, crate::building::AdaptedNorm)> {
    bundle
        .lattices
        .iter()
        .map(|(p, l)| (p.clone(), norm_from_lattice(l)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmatrix::KMat;
    use crate::support::Piece;
    use std::collections::BTreeMap;

    fn v(coords: &[i64]) -> RatVec {
        RatVec::from_ints(coords)
    }

    fn character_map(u0: i64) -> SupportMap {
        use crate::divfan::{DivisorialFan, PPDivisor};
        use crate::polyhedral::Cone;
        let pos = Cone::from_generators(1, &[v(&[1])]).unwrap();
        let neg = Cone::from_generators(1, &[v(&[-1])]).unwrap();
        let zero = Cone::zero(1);
        let dpos = PPDivisor::new("pos", pos, BTreeMap::from([(PointP1::Infinity, None)])).unwrap();
        let dneg =
            PPDivisor::new("neg", neg, BTreeMap::from([(PointP1::finite(0), None)])).unwrap();
        let dzero = PPDivisor::new(
            "zero",
            zero,
            BTreeMap::from([(PointP1::finite(0), None), (PointP1::Infinity, None)]),
        )
        .unwrap();
        let fan = DivisorialFan::new(1, vec![dpos, dneg, dzero]);
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
    fn trivial_bundle_sections() {
        let h = character_map(0);
        let s = global_sections(&h, &v(&[0])).unwrap();
        assert_eq!(s.dim(), 1);
        // No other weight contributes.
        for u in [-2i64, -1, 1, 2] {
            assert_eq!(global_sections(&h, &v(&[u])).unwrap().dim(), 0);
        }
    }

    #[test]
    fn character_bundle_single_weight() {
        let h = character_map(3);
        assert_eq!(global_sections(&h, &v(&[3])).unwrap().dim(), 1);
        assert_eq!(global_sections(&h, &v(&[2])).unwrap().dim(), 0);
        assert_eq!(global_sections(&h, &v(&[4])).unwrap().dim(), 0);
    }

    #[test]
    fn curve_side_matches_direct_solver() {
        let h = character_map(1);
        for u in -1..=3i64 {
            let a = global_sections(&h, &v(&[u])).unwrap().dim();
            let b = sections_bundle_on_y(&h, &v(&[u])).unwrap().dim;
            assert_eq!(a, b, "weight {u}");
        }
    }

    #[test]
    fn trivial_bundle_curve_lattices_are_units() {
        let h = character_map(0);
        let b = sections_bundle_on_y(&h, &v(&[0])).unwrap();
        for (p, lat) in &b.lattices {
            let unit = LatticeRep::new(p.clone(), KMat::identity(1)).unwrap();
            assert!(lat.eq(&unit).unwrap(), "lattice at {p} is not the unit");
        }
    }

    #[test]
    fn weight_box_covers_characters() {
        let h = character_map(2);
        let box_ = weight_box(&h);
        assert!(box_.contains(&v(&[2])));
        assert!(box_.contains(&v(&[1])));
        assert!(box_.contains(&v(&[3])));
    }
}
