//! Proper polyhedral divisors and divisorial fans on (P^1, N): loci,
//! evaluations into Q-divisors on the curve, slices, tail fans, and the fan
//! of the associated local model over each point of the curve.

use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

use crate::curve::{DivisorOnY, PointP1};
use crate::error::{Result, TvbError};
use crate::polyhedral::{cone_over, Cone, EvalResult, Fan, Polyhedron, PolyhedralComplex};
use crate::qq::{QQ, RatVec};

/// A polyhedral divisor: a tail cone, plus finitely many explicit
/// coefficients. An absent point has the tail cone itself as its
/// coefficient; an explicit `None` marks an empty coefficient (the point is
/// removed from the locus).
#[derive(Clone)]
pub struct PPDivisor {
    pub name: String,
    pub tail: Cone,
    pub coefficients: BTreeMap<PointP1, Option<Polyhedron>>,
}

/// Locus of a polyhedral divisor: the whole curve, or the curve minus a
/// finite nonempty set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Locus {
    Complete,
    Affine(Vec<PointP1>),
}

impl PPDivisor {
    pub fn new(
        name: impl Into<String>,
        tail: Cone,
        coefficients: BTreeMap<PointP1, Option<Polyhedron>>,
    ) -> Result<Self> {
        let d = PPDivisor {
            name: name.into(),
            tail,
            coefficients,
        };
        d.check_structure()?;
        Ok(d)
    }

    pub fn dim(&self) -> usize {
        self.tail.dim
    }

    fn check_structure(&self) -> Result<()> {
        if !self.tail.is_strongly_convex() {
            return Err(TvbError::Validation(format!(
                "divisor {}: tail cone is not strongly convex",
                self.name
            )));
        }
        for (p, c) in &self.coefficients {
            if let Some(poly) = c {
                if poly.dim != self.tail.dim {
                    return Err(TvbError::Dimension(format!(
                        "divisor {}: coefficient at {p} has wrong dimension",
                        self.name
                    )));
                }
                if poly.tail_cone() != self.tail {
                    return Err(TvbError::Validation(format!(
                        "divisor {}: coefficient at {p} has tail {:?}, expected {:?}",
                        self.name,
                        poly.tail_cone(),
                        self.tail
                    )));
                }
            }
        }
        Ok(())
    }

    /// The coefficient at a point, applying the default-to-tail convention.
    pub fn coefficient(&self, p: &PointP1) -> Option<Polyhedron> {
        match self.coefficients.get(p) {
            Some(c) => c.clone(),
            None => Some(Polyhedron::from_cone(&self.tail)),
        }
    }

    pub fn locus(&self) -> Locus {
        let removed: Vec<PointP1> = self
            .coefficients
            .iter()
            .filter(|(_, c)| c.is_none())
            .map(|(p, _)| p.clone())
            .collect();
        if removed.is_empty() {
            Locus::Complete
        } else {
            Locus::Affine(removed)
        }
    }

    /// Explicit points mentioned by this divisor.
    pub fn explicit_points(&self) -> Vec<PointP1> {
        self.coefficients.keys().cloned().collect()
    }

    /// The divisor of evaluations: sum over points of min <u, .> over the
    /// coefficient. Requires u in the dual of the tail cone; only
    /// non-default coefficients contribute (the tail cone evaluates to 0).
    pub fn eval(&self, u: &RatVec) -> Result<DivisorOnY> {
        if !self.tail.dual().contains(u) {
            return Err(TvbError::WeightOutsideDual(format!(
                "{u:?} against tail {:?}",
                self.tail
            )));
        }
        let mut out = DivisorOnY::zero();
        for (p, c) in &self.coefficients {
            if let Some(poly) = c {
                match poly.eval_u(u) {
                    EvalResult::Finite(v) => out.add_point(p.clone(), v),
                    EvalResult::MinusInfinity => {
                        return Err(TvbError::WeightOutsideDual(format!(
                            "{u:?} unbounded on coefficient at {p}"
                        )))
                    }
                }
            }
        }
        Ok(out)
    }

    /// Intersection, coefficient by coefficient. Empty coefficients are
    /// absorbing. `None` overall when some slice-level intersection is
    /// empty... the result may legitimately carry empty coefficients, so
    /// the return is always a divisor (with empties marked).
    pub fn intersect(&self, other: &PPDivisor, name: impl Into<String>) -> Result<PPDivisor> {
        if self.dim() != other.dim() {
            return Err(TvbError::Dimension("divisor intersection".into()));
        }
        let tail = self.tail.intersect(&other.tail)?;
        let mut points: Vec<PointP1> = self.explicit_points();
        for p in other.explicit_points() {
            if !points.contains(&p) {
                points.push(p);
            }
        }
        points.sort();
        let mut coefficients = BTreeMap::new();
        for p in points {
            let meet = match (self.coefficient(&p), other.coefficient(&p)) {
                (Some(a), Some(b)) => a.intersect(&b)?,
                _ => None,
            };
            coefficients.insert(p, meet);
        }
        PPDivisor::new(name, tail, coefficients)
    }

    /// Structural equality after canonicalization (names ignored).
    pub fn same_divisor(&self, other: &PPDivisor) -> bool {
        if self.tail != other.tail {
            return false;
        }
        let mut points = self.explicit_points();
        for p in other.explicit_points() {
            if !points.contains(&p) {
                points.push(p);
            }
        }
        points
            .iter()
            .all(|p| self.coefficient(p) == other.coefficient(p))
    }

    /// Coefficientwise face test plus the tail-cone face condition. This is
    /// the combinatorial part of the face relation; borderline cases beyond
    /// it are flagged, not decided.
    pub fn is_face_of(&self, other: &PPDivisor) -> bool {
        if !self.tail.is_face_of(&other.tail) {
            return false;
        }
        let mut points = self.explicit_points();
        for p in other.explicit_points() {
            if !points.contains(&p) {
                points.push(p);
            }
        }
        points.iter().all(|p| {
            match (self.coefficient(p), other.coefficient(p)) {
                (None, _) => true, // the empty face
                (Some(_), None) => false,
                (Some(a), Some(b)) => a.is_face_of(&b),
            }
        })
    }

    /// Proper-ness report over P^1. Q-Cartier holds automatically on a
    /// smooth curve. On a complete locus, semiampleness reduces to
    /// nonnegative degree of every evaluation at the dual-cone generators
    /// (degree is concave in the weight, so generator checks suffice);
    /// failing that is a hard failure. A vanishing degree at an interior
    /// weight is reported as a bigness warning, not a failure. On an affine
    /// locus both conditions are automatic.
    pub fn validate_pp(&self) -> PPReport {
        let mut report = PPReport::default();
        if let Err(e) = self.check_structure() {
            report.failures.push(e.to_string());
            return report;
        }
        if self.locus() != Locus::Complete {
            return report;
        }
        let dual = self.tail.dual();
        for u in &dual.generators {
            match self.eval(u) {
                Ok(d) => {
                    if d.degree().is_negative() {
                        report.failures.push(format!(
                            "divisor {}: deg D({u:?}) = {} < 0 (not semiample)",
                            self.name,
                            crate::qq::fmt_qq(&d.degree())
                        ));
                    }
                }
                Err(e) => report.failures.push(format!("divisor {}: {e}", self.name)),
            }
        }
        // Bigness at one interior weight of the dual cone: the sum of the
        // generators is interior whenever the dual is full-dimensional.
        if self.dim() > 0 && !dual.generators.is_empty() && dual.cone_dim() == self.dim() {
            let mut interior = RatVec::zero(self.dim());
            for g in &dual.generators {
                interior = interior.add(g);
            }
            if !interior.is_zero() {
                if let Ok(d) = self.eval(&interior) {
                    if !d.degree().is_positive() {
                        report.warnings.push(format!(
                            "divisor {}: deg D({interior:?}) = {} on the interior (not big)",
                            self.name,
                            crate::qq::fmt_qq(&d.degree())
                        ));
                    }
                }
            }
        }
        report
    }
}

/// Outcome of the properness checks: failures block, warnings inform.
#[derive(Clone, Debug, Default)]
pub struct PPReport {
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl PPReport {
    pub fn is_proper(&self) -> bool {
        self.failures.is_empty()
    }
}

impl std::fmt::Debug for PPDivisor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: tail {:?}", self.name, self.tail)?;
        for (p, c) in &self.coefficients {
            match c {
                Some(poly) => write!(f, ", {p} -> {poly:?}")?,
                None => write!(f, ", {p} -> empty")?,
            }
        }
        Ok(())
    }
}

/// A divisorial fan: finitely many polyhedral divisors whose pairwise
/// intersections are faces of both and members of the list.
#[derive(Clone, Debug)]
pub struct DivisorialFan {
    pub dim: usize,
    pub divisors: Vec<PPDivisor>,
}

impl DivisorialFan {
    pub fn new(dim: usize, divisors: Vec<PPDivisor>) -> Self {
        DivisorialFan { dim, divisors }
    }

    /// Every point that some divisor mentions explicitly.
    pub fn explicit_points(&self) -> Vec<PointP1> {
        let mut out: Vec<PointP1> = Vec::new();
        for d in &self.divisors {
            for p in d.explicit_points() {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out.sort();
        out
    }

    /// A rational point not mentioned anywhere, for generic-behavior tests.
    pub fn fresh_point(&self) -> PointP1 {
        let used = self.explicit_points();
        let mut k = 0i64;
        loop {
            let cand = PointP1::finite(k);
            if !used.contains(&cand) {
                return cand;
            }
            k += 1;
        }
    }

    pub fn divisor_by_name(&self, name: &str) -> Option<&PPDivisor> {
        self.divisors.iter().find(|d| d.name == name)
    }

    /// The slice at a point: the polyhedral complex of all nonempty
    /// coefficients, closed under faces. For points outside every explicit
    /// support this is the tail fan.
    pub fn slice_at(&self, p: &PointP1) -> PolyhedralComplex {
        let cells: Vec<Polyhedron> = self
            .divisors
            .iter()
            .filter_map(|d| d.coefficient(p))
            .collect();
        PolyhedralComplex::from_cells(self.dim, &cells)
    }

    pub fn tail_fan(&self) -> Fan {
        let tails: Vec<Cone> = self.divisors.iter().map(|d| d.tail.clone()).collect();
        Fan::from_cones(self.dim, &tails)
    }

    /// The fan of cones over the slice at `p`: cones over the slice cells at
    /// height one together with the tail fan at height zero.
    pub fn slice_cone_fan(&self, p: &PointP1) -> Result<Fan> {
        let slice = self.slice_at(p);
        let mut cones: Vec<Cone> = Vec::new();
        for cell in &slice.cells {
            cones.push(cone_over(cell, 1)?);
        }
        for tail in self.tail_fan().cones {
            let gens: Vec<RatVec> = tail
                .generators
                .iter()
                .map(|g| g.extended(QQ::zero()))
                .collect();
            cones.push(Cone::from_generators(self.dim + 1, &gens)?);
        }
        Ok(Fan::from_cones(self.dim + 1, &cones))
    }

    /// Full validation report: face conditions, membership of intersections,
    /// slice complexes, and properness of each member.
    pub fn validate(&self) -> FanReport {
        let mut failures = Vec::new();
        let mut warnings = Vec::new();
        for d in &self.divisors {
            let pp = d.validate_pp();
            failures.extend(pp.failures);
            warnings.extend(pp.warnings);
        }
        for (i, a) in self.divisors.iter().enumerate() {
            for b in self.divisors.iter().skip(i + 1) {
                let meet = match a.intersect(b, format!("{}&{}", a.name, b.name)) {
                    Ok(m) => m,
                    Err(e) => {
                        failures.push(format!(
                            "divisors {} and {}: intersection failed: {e}",
                            a.name, b.name
                        ));
                        continue;
                    }
                };
                if !meet.is_face_of(a) || !meet.is_face_of(b) {
                    failures.push(format!(
                        "divisors {} and {}: intersection is not a common face (combinatorial face check)",
                        a.name, b.name
                    ));
                }
                if !self.divisors.iter().any(|d| d.same_divisor(&meet)) {
                    failures.push(format!(
                        "divisors {} and {}: intersection is not a member of the fan",
                        a.name, b.name
                    ));
                }
            }
        }
        let mut points = self.explicit_points();
        points.push(self.fresh_point());
        for p in &points {
            if let Err(e) = self.slice_at(p).validate() {
                failures.push(format!("slice at {p}: {e}"));
            }
        }
        if let Err(e) = self.tail_fan().validate() {
            failures.push(format!("tail fan: {e}"));
        }
        FanReport { failures, warnings }
    }
}

/// Validation outcome for a divisorial fan.
#[derive(Clone, Debug, Default)]
pub struct FanReport {
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl FanReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qq::qq;

    fn v(coords: &[i64]) -> RatVec {
        RatVec::from_ints(coords)
    }

    fn seg(a: i64, b: i64) -> Polyhedron {
        Polyhedron::from_vertices_rays(1, &[v(&[a]), v(&[b])], &[]).unwrap()
    }

    fn zero_tail() -> Cone {
        Cone::zero(1)
    }

    #[test]
    fn locus_variants() {
        let d =
            PPDivisor::new("d", zero_tail(), BTreeMap::new()).unwrap();
        assert_eq!(d.locus(), Locus::Complete);

        let mut coeffs = BTreeMap::new();
        coeffs.insert(PointP1::Infinity, None);
        let d2 = PPDivisor::new("d2", zero_tail(), coeffs).unwrap();
        assert_eq!(d2.locus(), Locus::Affine(vec![PointP1::Infinity]));

        let mut coeffs3 = BTreeMap::new();
        coeffs3.insert(PointP1::finite(0), None);
        coeffs3.insert(PointP1::finite(1), None);
        let d3 = PPDivisor::new("d3", zero_tail(), coeffs3).unwrap();
        assert_eq!(
            d3.locus(),
            Locus::Affine(vec![PointP1::finite(0), PointP1::finite(1)])
        );
    }

    #[test]
    fn eval_divisor_examples() {
        // D with D_0 = conv{1} + tail Q>=0, evaluated at u = 1: 1*[0].
        let tail = Cone::from_generators(1, &[v(&[1])]).unwrap();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(
            PointP1::finite(0),
            Some(Polyhedron::from_vertices_rays(1, &[v(&[1])], &[v(&[1])]).unwrap()),
        );
        let d = PPDivisor::new("d", tail, coeffs).unwrap();
        let u0 = d.eval(&v(&[0])).unwrap();
        assert!(u0.degree().is_zero());
        let u1 = d.eval(&v(&[1])).unwrap();
        assert_eq!(u1.coefficient(&PointP1::finite(0)), qq(1));
        // u outside the dual tail cone errors.
        assert!(d.eval(&v(&[-1])).is_err());
    }

    #[test]
    fn validate_pp_examples() {
        // All coefficients default: proper (evaluations vanish identically).
        let d = PPDivisor::new("d", zero_tail(), BTreeMap::new()).unwrap();
        assert!(d.validate_pp().is_proper());

        // conv{1} at [0] plus conv{-1} at [inf]: deg D(u) = 0 for both
        // generators of the dual: semiample.
        let mut coeffs = BTreeMap::new();
        coeffs.insert(PointP1::finite(0), Some(seg(1, 1)));
        coeffs.insert(PointP1::Infinity, Some(seg(-1, -1)));
        let d2 = PPDivisor::new("d2", zero_tail(), coeffs).unwrap();
        assert!(d2.validate_pp().is_proper());

        // Segment coefficients make some evaluation degree negative: the
        // min over conv{0,1} at u = -1 is -1 while conv{-1,0} contributes 0.
        let mut coeffs_seg = BTreeMap::new();
        coeffs_seg.insert(PointP1::finite(0), Some(seg(0, 1)));
        coeffs_seg.insert(PointP1::Infinity, Some(seg(-1, 0)));
        let dseg = PPDivisor::new("dseg", zero_tail(), coeffs_seg).unwrap();
        let dm1 = dseg.eval(&v(&[-1])).unwrap();
        assert_eq!(dm1.degree(), qq(-1));
        assert!(!dseg.validate_pp().is_proper());

        // conv{-1} at [0] with complete locus: deg D(1) = -1, not semiample.
        let mut coeffs3 = BTreeMap::new();
        coeffs3.insert(PointP1::finite(0), Some(seg(-1, -1)));
        let d3 = PPDivisor::new("d3", zero_tail(), coeffs3).unwrap();
        let report = d3.validate_pp();
        assert!(report.failures.iter().any(|f| f.contains("not semiample")), "{report:?}");
    }

    #[test]
    fn slice_default_is_tail_fan() {
        let tail = Cone::from_generators(1, &[v(&[1])]).unwrap();
        let d = PPDivisor::new("d", tail.clone(), BTreeMap::new()).unwrap();
        let fan = DivisorialFan::new(1, vec![d]);
        let slice = fan.slice_at(&PointP1::finite(7));
        // The slice is the tail cone viewed as a complex with its faces.
        assert!(slice
            .cells
            .contains(&Polyhedron::from_cone(&tail)));
        assert_eq!(slice.tail_fan().cones.len(), fan.tail_fan().cones.len());
    }

    #[test]
    fn single_divisor_fan_validates() {
        let d = PPDivisor::new("d", zero_tail(), BTreeMap::new()).unwrap();
        let fan = DivisorialFan::new(1, vec![d]);
        assert!(fan.validate().is_valid());
    }

    #[test]
    fn overlapping_coefficients_rejected() {
        // Two divisors with the same tail whose coefficients overlap in a
        // non-face: [0,2] and [1,3] meet in [1,2].
        let d1 = PPDivisor::new(
            "a",
            zero_tail(),
            BTreeMap::from([(PointP1::finite(0), Some(seg(0, 2)))]),
        )
        .unwrap();
        let d2 = PPDivisor::new(
            "b",
            zero_tail(),
            BTreeMap::from([(PointP1::finite(0), Some(seg(1, 3)))]),
        )
        .unwrap();
        let fan = DivisorialFan::new(1, vec![d1, d2]);
        let report = fan.validate();
        assert!(report.failures.iter().any(|f| f.contains("not a common face")), "{report:?}");
    }

    #[test]
    fn slice_cone_fan_structure() {
        // One divisor with a bounded coefficient at 0 inside the zero tail.
        let d = PPDivisor::new(
            "d",
            zero_tail(),
            BTreeMap::from([(PointP1::finite(0), Some(seg(0, 1)))]),
        )
        .unwrap();
        let fan = DivisorialFan::new(1, vec![d]);
        let cf = fan.slice_cone_fan(&PointP1::finite(0)).unwrap();
        cf.validate().unwrap();
        // Cones over the segment and its vertices plus the origin.
        assert!(cf
            .cones
            .iter()
            .any(|c| c.generators == vec![v(&[0, 1]), v(&[1, 1])]));
        // Height-one slice of the cone fan recovers the slice cells: the
        // vertex count of the slice matches the rays at positive height.
        let slice = fan.slice_at(&PointP1::finite(0));
        let vertex_count = slice.vertices().len();
        let positive_rays: Vec<_> = cf
            .rays()
            .into_iter()
            .filter(|r| r.last().is_positive())
            .collect();
        assert_eq!(vertex_count, positive_rays.len());
    }
}
