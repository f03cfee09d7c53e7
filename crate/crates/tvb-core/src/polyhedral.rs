//! Exact rational polyhedral geometry in ambient dimension at most 4:
//! cones, polyhedra, fans and polyhedral complexes, with the specific
//! constructions the rest of the library needs (tail cones, Minkowski sums,
//! support evaluation, duals, cones over polyhedra).
//!
//! Representation conversions use brute-force facet/ray enumeration over
//! subsets, which is exact and fast at this scale. All values are immutable
//! after construction and every operation is pure.

use num_traits::{Signed, Zero};

use crate::error::{Result, TvbError};
use crate::qq::{QMat, QQ, RatVec};

pub const MAX_DIM: usize = 4;

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        Err(TvbError::DimensionTooLarge(dim))
    } else {
        Ok(())
    }
}

/// Kernel of the row system, with the ambient dimension kept explicit so an
/// empty row list yields the full standard basis.
fn kernel_of_rows(rows: &[RatVec], dim: usize) -> Vec<RatVec> {
    if rows.is_empty() {
        return (0..dim)
            .map(|i| {
                let mut v = vec![QQ::zero(); dim];
                v[i] = QQ::from_integer(1.into());
                RatVec::new(v)
            })
            .collect();
    }
    QMat::from_rows(rows).kernel()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Facet normals of cone(gens) inside Q^dim. Returns inequalities
/// `<n, x> >= 0`; a non-full-dimensional span contributes opposite pairs.
fn cone_vrep_to_hrep(gens: &[RatVec], dim: usize) -> Vec<RatVec> {
    let mut hs: Vec<RatVec> = Vec::new();
    let ortho = kernel_of_rows(gens, dim);
    for n in &ortho {
        let p = n.primitive();
        hs.push(p.neg());
        hs.push(p);
    }
    let span_dim = dim - ortho.len();
    if span_dim == 0 {
        return canonical_normals(hs);
    }
    // A facet hyperplane is spanned by span_dim - 1 generators together with
    // the orthogonal complement of the span.
    for subset in combinations(gens.len(), span_dim - 1) {
        let mut rows: Vec<RatVec> = subset.iter().map(|&i| gens[i].clone()).collect();
        rows.extend(ortho.iter().cloned());
        let ker = kernel_of_rows(&rows, dim);
        if ker.len() != 1 {
            continue;
        }
        let n = ker[0].primitive();
        let mut pos = false;
        let mut neg = false;
        for g in gens {
            let d = n.dot(g);
            if d.is_positive() {
                pos = true;
            } else if d.is_negative() {
                neg = true;
            }
        }
        if pos && neg {
            continue;
        }
        if !pos && !neg {
            // All generators on the hyperplane: handled by ortho pairs.
            continue;
        }
        hs.push(if pos { n } else { n.neg() });
    }
    canonical_normals(hs)
}

/// Extremal rays (plus a lineality basis as opposite pairs) of
/// `{x : <n_i, x> >= 0}`.
fn cone_hrep_to_vrep(normals: &[RatVec], dim: usize) -> Vec<RatVec> {
    let lineality = kernel_of_rows(normals, dim);
    let rank = dim - lineality.len();
    let mut gens: Vec<RatVec> = Vec::new();
    for l in &lineality {
        let p = l.primitive();
        gens.push(p.neg());
        gens.push(p);
    }
    if rank == 0 {
        return canonical_generators(gens);
    }
    let lin_mat = QMat::from_rows(&lineality);
    for subset in combinations(normals.len(), rank - 1) {
        let rows: Vec<RatVec> = subset.iter().map(|&i| normals[i].clone()).collect();
        let ker = kernel_of_rows(&rows, dim);
        // Looking for directions spanning exactly one ray modulo lineality.
        let extra: Vec<RatVec> = ker
            .into_iter()
            .filter(|v| {
                if lineality.is_empty() {
                    return true;
                }
                lin_mat.solve(v).is_none() || {
                    // solve() may fail for non-square systems; check rank.
                    let mut rows = lineality.clone();
                    rows.push(v.clone());
                    QMat::from_rows(&rows).rank() > lineality.len()
                }
            })
            .collect();
        // The kernel of the subset must be lineality + one extra direction.
        let mut rows_all: Vec<RatVec> = lineality.clone();
        rows_all.extend(extra.iter().cloned());
        if QMat::from_rows(&rows_all).rank() != lineality.len() + 1 {
            continue;
        }
        let mut r = extra[0].clone();
        // Deterministic representative: reduce modulo lineality by Gram
        // projection.
        for l in &lineality {
            let denom = l.dot(l);
            let coef = r.dot(l) / denom;
            r = r.sub(&l.scale(&coef));
        }
        if r.is_zero() {
            continue;
        }
        let r = r.primitive();
        let mut pos = false;
        let mut neg = false;
        for n in normals {
            let d = n.dot(&r);
            if d.is_positive() {
                pos = true;
            } else if d.is_negative() {
                neg = true;
            }
        }
        if pos && neg {
            continue;
        }
        gens.push(if neg { r.neg() } else { r });
    }
    canonical_generators(gens)
}

fn canonical_normals(mut hs: Vec<RatVec>) -> Vec<RatVec> {
    hs = hs.into_iter().map(|n| n.primitive()).collect();
    hs.sort();
    hs.dedup();
    hs.retain(|n| !n.is_zero());
    hs
}

fn canonical_generators(mut gens: Vec<RatVec>) -> Vec<RatVec> {
    gens = gens.into_iter().map(|g| g.primitive()).collect();
    gens.sort();
    gens.dedup();
    gens.retain(|g| !g.is_zero());
    gens
}

/// A rational polyhedral cone, kept simultaneously in V- and H-form.
///
/// Cones appearing in fans are strongly convex; duals of lower-dimensional
/// cones legitimately contain lines, represented by opposite generator
/// pairs.
#[derive(Clone, PartialEq, Eq)]
pub struct Cone {
    pub dim: usize,
    /// Primitive extremal generators, sorted; lineality as opposite pairs.
    pub generators: Vec<RatVec>,
    /// Primitive inner normals of `<n, x> >= 0`, sorted.
    pub halfspaces: Vec<RatVec>,
}

impl Cone {
    pub fn from_generators(dim: usize, gens: &[RatVec]) -> Result<Cone> {
        check_dim(dim)?;
        for g in gens {
            if g.dim() != dim {
                return Err(TvbError::Dimension(format!(
                    "generator has dimension {} in ambient {dim}",
                    g.dim()
                )));
            }
        }
        let gens: Vec<RatVec> = gens
            .iter()
            .filter(|g| !g.is_zero())
            .map(|g| g.primitive())
            .collect();
        let halfspaces = cone_vrep_to_hrep(&gens, dim);
        let generators = cone_hrep_to_vrep(&halfspaces, dim);
        Ok(Cone {
            dim,
            generators,
            halfspaces,
        })
    }

    pub fn from_halfspaces(dim: usize, normals: &[RatVec]) -> Result<Cone> {
        check_dim(dim)?;
        let normals = canonical_normals(normals.to_vec());
        let generators = cone_hrep_to_vrep(&normals, dim);
        let halfspaces = cone_vrep_to_hrep(&generators, dim);
        Ok(Cone {
            dim,
            generators,
            halfspaces,
        })
    }

    pub fn zero(dim: usize) -> Cone {
        Cone::from_generators(dim, &[]).expect("zero cone")
    }

    pub fn contains(&self, v: &RatVec) -> bool {
        self.halfspaces.iter().all(|n| !n.dot(v).is_negative())
    }

    pub fn is_strongly_convex(&self) -> bool {
        if self.halfspaces.is_empty() {
            return self.dim == 0;
        }
        QMat::from_rows(&self.halfspaces).rank() == self.dim
    }

    pub fn cone_dim(&self) -> usize {
        if self.generators.is_empty() {
            0
        } else {
            QMat::from_rows(&self.generators).rank()
        }
    }

    /// Extremal ray generators (excluding lineality pairs); for strongly
    /// convex cones this is all generators.
    pub fn rays(&self) -> &[RatVec] {
        &self.generators
    }

    pub fn dual(&self) -> Cone {
        // u is in the dual iff it pairs nonnegatively with every generator.
        Cone::from_halfspaces(self.dim, &self.generators).expect("dual cone")
    }

    pub fn intersect(&self, other: &Cone) -> Result<Cone> {
        if self.dim != other.dim {
            return Err(TvbError::Dimension("cone intersection".into()));
        }
        let mut hs = self.halfspaces.clone();
        hs.extend(other.halfspaces.iter().cloned());
        Cone::from_halfspaces(self.dim, &hs)
    }

    /// All faces, including {0}-if-pointed and the cone itself.
    pub fn faces(&self) -> Vec<Cone> {
        let mut out: Vec<Cone> = Vec::new();
        let n = self.halfspaces.len();
        for subset in (0..=n).flat_map(|k| combinations(n, k)) {
            let mut hs = self.halfspaces.clone();
            for &i in &subset {
                hs.push(self.halfspaces[i].neg());
            }
            let f = Cone::from_halfspaces(self.dim, &hs).expect("face cone");
            if !out.contains(&f) {
                out.push(f);
            }
        }
        out
    }

    pub fn is_face_of(&self, other: &Cone) -> bool {
        if self.dim != other.dim {
            return false;
        }
        if !self.generators.iter().all(|g| other.contains(g)) {
            return false;
        }
        // Active constraints of `other` on all of `self`.
        let mut hs = other.halfspaces.clone();
        for n in &other.halfspaces {
            if self.generators.iter().all(|g| n.dot(g).is_zero()) {
                hs.push(n.neg());
            }
        }
        let face = Cone::from_halfspaces(other.dim, &hs).expect("face");
        face == *self
    }

    /// True iff the primitive ray generators extend to a basis of Z^dim.
    pub fn is_smooth(&self) -> bool {
        let gens = &self.generators;
        if gens.is_empty() {
            return true;
        }
        let k = gens.len();
        if QMat::from_rows(gens).rank() != k {
            return false; // not simplicial
        }
        let int_rows: Vec<Vec<num_bigint::BigInt>> = gens
            .iter()
            .map(|g| g.coords.iter().map(|c| c.to_integer()).collect())
            .collect();
        let diag = crate::qq::smith_diagonal(&int_rows);
        diag.len() == k && diag.iter().all(|d| d == &num_bigint::BigInt::from(1))
    }
}

impl std::fmt::Debug for Cone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "cone{:?}", self.generators)
    }
}

/// Result of evaluating a linear functional over a polyhedron: finite, or
/// divergent in a recession direction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EvalResult {
    Finite(QQ),
    MinusInfinity,
}

impl EvalResult {
    pub fn finite(&self) -> Option<&QQ> {
        match self {
            EvalResult::Finite(q) => Some(q),
            EvalResult::MinusInfinity => None,
        }
    }
}

/// A nonempty pointed rational polyhedron: convex hull of its vertices plus
/// conic hull of its recession rays. Canonical form has sorted vertices,
/// primitive sorted rays and the irredundant facet list.
#[derive(Clone)]
pub struct Polyhedron {
    pub dim: usize,
    pub vertices: Vec<RatVec>,
    pub rays: Vec<RatVec>,
    /// Inequalities `<n, x> >= c`.
    pub inequalities: Vec<(RatVec, QQ)>,
}

impl PartialEq for Polyhedron {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.vertices == other.vertices && self.rays == other.rays
    }
}

impl Eq for Polyhedron {}

impl Polyhedron {
    pub fn from_vertices_rays(dim: usize, vertices: &[RatVec], rays: &[RatVec]) -> Result<Polyhedron> {
        check_dim(dim)?;
        if vertices.is_empty() {
            return Err(TvbError::Invalid("polyhedron needs at least one vertex".into()));
        }
        let mut gens: Vec<RatVec> = Vec::new();
        for v in vertices {
            if v.dim() != dim {
                return Err(TvbError::Dimension("vertex dimension".into()));
            }
            gens.push(v.extended(QQ::from_integer(1.into())));
        }
        for r in rays {
            if r.dim() != dim {
                return Err(TvbError::Dimension("ray dimension".into()));
            }
            if r.is_zero() {
                continue;
            }
            gens.push(r.extended(QQ::zero()));
        }
        let hom = Cone::from_generators(dim + 1, &gens)?;
        if !hom.is_strongly_convex() {
            return Err(TvbError::Invalid("polyhedron is not pointed".into()));
        }
        Ok(Self::from_homogenization(dim, &hom).expect("nonempty by construction"))
    }

    /// Rebuilds the polyhedron from its homogenization cone in Q^{dim+1};
    /// `None` when the height-one slice is empty.
    fn from_homogenization(dim: usize, hom: &Cone) -> Option<Polyhedron> {
        let mut vertices = Vec::new();
        let mut rays = Vec::new();
        for g in &hom.generators {
            let h = g.last().clone();
            if h.is_zero() {
                rays.push(g.truncated().primitive());
            } else if h.is_positive() {
                let inv = QQ::from_integer(1.into()) / h;
                vertices.push(g.truncated().scale(&inv));
            } else {
                // Opposite lineality pair in the homogenization: not pointed.
                return None;
            }
        }
        if vertices.is_empty() {
            return None;
        }
        vertices.sort();
        vertices.dedup();
        rays.sort();
        rays.dedup();
        let mut inequalities: Vec<(RatVec, QQ)> = Vec::new();
        for n in &hom.halfspaces {
            let normal = n.truncated();
            let offset = -n.last().clone();
            if normal.is_zero() {
                continue; // the lambda >= 0 facet
            }
            inequalities.push((normal, offset));
        }
        inequalities.sort();
        inequalities.dedup();
        Some(Polyhedron {
            dim,
            vertices,
            rays,
            inequalities,
        })
    }

    /// Intersection of halfspaces; `None` when empty. Errors when the input
    /// describes an unpointed polyhedron.
    pub fn from_inequalities(dim: usize, ineqs: &[(RatVec, QQ)]) -> Result<Option<Polyhedron>> {
        check_dim(dim)?;
        let mut normals: Vec<RatVec> = Vec::new();
        for (n, c) in ineqs {
            if n.dim() != dim {
                return Err(TvbError::Dimension("inequality dimension".into()));
            }
            if n.is_zero() {
                if c.is_positive() {
                    return Ok(None);
                }
                continue;
            }
            normals.push(n.extended(-c.clone()));
        }
        // lambda >= 0
        normals.push(RatVec::zero(dim).extended(QQ::from_integer(1.into())));
        let hom = Cone::from_halfspaces(dim + 1, &normals)?;
        if !hom.is_strongly_convex() {
            // Lineality at height zero means an unpointed or empty slice;
            // distinguish by checking for a height-positive generator.
            let has_point = hom
                .generators
                .iter()
                .any(|g| g.last().is_positive());
            if has_point {
                return Err(TvbError::Invalid("polyhedron is not pointed".into()));
            }
            return Ok(None);
        }
        Ok(Self::from_homogenization(dim, &hom))
    }

    pub fn single_point(v: &RatVec) -> Polyhedron {
        Polyhedron::from_vertices_rays(v.dim(), std::slice::from_ref(v), &[])
            .expect("point polyhedron")
    }

    /// The polyhedron `cone` viewed with vertex at the origin.
    pub fn from_cone(cone: &Cone) -> Polyhedron {
        Polyhedron::from_vertices_rays(cone.dim, &[RatVec::zero(cone.dim)], &cone.generators)
            .expect("cone as polyhedron")
    }

    pub fn contains(&self, x: &RatVec) -> bool {
        self.inequalities.iter().all(|(n, c)| n.dot(x) >= *c)
    }

    /// Recession cone, computed from the homogeneous parts of the facets.
    pub fn tail_cone(&self) -> Cone {
        let normals: Vec<RatVec> = self.inequalities.iter().map(|(n, _)| n.clone()).collect();
        // The span of the polyhedron also bounds the recession: equalities
        // are already present as opposite inequality pairs.
        Cone::from_halfspaces(self.dim, &normals).expect("tail cone")
    }

    pub fn minkowski_sum(&self, other: &Polyhedron) -> Result<Polyhedron> {
        if self.dim != other.dim {
            return Err(TvbError::Dimension("minkowski sum".into()));
        }
        let mut verts = Vec::new();
        for a in &self.vertices {
            for b in &other.vertices {
                verts.push(a.add(b));
            }
        }
        let mut rays = self.rays.clone();
        rays.extend(other.rays.iter().cloned());
        Polyhedron::from_vertices_rays(self.dim, &verts, &rays)
    }

    pub fn translate(&self, v: &RatVec) -> Polyhedron {
        let verts: Vec<RatVec> = self.vertices.iter().map(|w| w.add(v)).collect();
        Polyhedron::from_vertices_rays(self.dim, &verts, &self.rays).expect("translate")
    }

    /// min over the polyhedron of `<u, .>`, or minus infinity when some
    /// recession ray pairs negatively.
    pub fn eval_u(&self, u: &RatVec) -> EvalResult {
        if self.rays.iter().any(|r| u.dot(r).is_negative()) {
            return EvalResult::MinusInfinity;
        }
        let m = self
            .vertices
            .iter()
            .map(|v| u.dot(v))
            .min()
            .expect("nonempty vertex set");
        EvalResult::Finite(m)
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Option<Polyhedron>> {
        if self.dim != other.dim {
            return Err(TvbError::Dimension("polyhedron intersection".into()));
        }
        let mut ineqs = self.inequalities.clone();
        ineqs.extend(other.inequalities.iter().cloned());
        Polyhedron::from_inequalities(self.dim, &ineqs)
    }

    /// All nonempty faces, the polyhedron itself included.
    pub fn faces(&self) -> Vec<Polyhedron> {
        let n = self.inequalities.len();
        let mut out: Vec<Polyhedron> = Vec::new();
        for subset in (0..=n).flat_map(|k| combinations(n, k)) {
            let mut ineqs = self.inequalities.clone();
            for &i in &subset {
                let (nrm, c) = &self.inequalities[i];
                ineqs.push((nrm.neg(), -c.clone()));
            }
            if let Ok(Some(f)) = Polyhedron::from_inequalities(self.dim, &ineqs) {
                if !out.contains(&f) {
                    out.push(f);
                }
            }
        }
        out
    }

    /// True iff `self` equals `other` cut by some subset of active facets
    /// (the improper face included).
    pub fn is_face_of(&self, other: &Polyhedron) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let inside = self.vertices.iter().all(|v| other.contains(v))
            && self
                .rays
                .iter()
                .all(|r| other.tail_cone().contains(r));
        if !inside {
            return false;
        }
        let mut ineqs = other.inequalities.clone();
        for (n, c) in &other.inequalities {
            let tight = self.vertices.iter().all(|v| n.dot(v) == *c)
                && self.rays.iter().all(|r| n.dot(r).is_zero());
            if tight {
                ineqs.push((n.neg(), -c.clone()));
            }
        }
        match Polyhedron::from_inequalities(other.dim, &ineqs) {
            Ok(Some(face)) => face == *self,
            _ => false,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.rays.is_empty()
    }

    /// An interior-ish rational sample point: the vertex barycenter pushed
    /// one step along the ray sum.
    pub fn sample_point(&self) -> RatVec {
        let n = QQ::from_integer((self.vertices.len() as i64).into());
        let mut acc = RatVec::zero(self.dim);
        for v in &self.vertices {
            acc = acc.add(v);
        }
        let mut p = acc.scale(&(QQ::from_integer(1.into()) / n));
        for r in &self.rays {
            p = p.add(r);
        }
        p
    }
}

impl std::fmt::Debug for Polyhedron {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "conv{:?}", self.vertices)?;
        if !self.rays.is_empty() {
            write!(f, "+rays{:?}", self.rays)?;
        }
        Ok(())
    }
}

/// Builds the cone over a polyhedron at the given height (+1 or -1):
/// generators (v, h) for vertices and (r, 0) for rays.
pub fn cone_over(poly: &Polyhedron, height: i64) -> Result<Cone> {
    if height != 1 && height != -1 {
        return Err(TvbError::Invalid("cone_over height must be +1 or -1".into()));
    }
    let h = QQ::from_integer(height.into());
    let mut gens: Vec<RatVec> = poly
        .vertices
        .iter()
        .map(|v| v.extended(h.clone()))
        .collect();
    gens.extend(poly.rays.iter().map(|r| r.extended(QQ::zero())));
    Cone::from_generators(poly.dim + 1, &gens)
}

/// A finite collection of strongly convex cones, closed under faces, whose
/// pairwise intersections are faces of both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    pub dim: usize,
    pub cones: Vec<Cone>,
}

impl Fan {
    /// Face closure plus deduplication; does not check the fan axioms.
    pub fn from_cones(dim: usize, cones: &[Cone]) -> Fan {
        let mut all: Vec<Cone> = Vec::new();
        for c in cones {
            for f in c.faces() {
                if !all.contains(&f) {
                    all.push(f);
                }
            }
        }
        all.sort_by(|a, b| {
            (a.cone_dim(), &a.generators).cmp(&(b.cone_dim(), &b.generators))
        });
        Fan { dim, cones: all }
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.cones {
            if c.dim != self.dim {
                return Err(TvbError::Validation("fan cone dimension mismatch".into()));
            }
            if !c.is_strongly_convex() {
                return Err(TvbError::Validation(format!(
                    "fan cone {c:?} is not strongly convex"
                )));
            }
            for f in c.faces() {
                if !self.cones.contains(&f) {
                    return Err(TvbError::Validation(format!(
                        "fan is missing a face of {c:?}"
                    )));
                }
            }
        }
        for (i, a) in self.cones.iter().enumerate() {
            for b in self.cones.iter().skip(i + 1) {
                let meet = a.intersect(b)?;
                if !meet.is_face_of(a) || !meet.is_face_of(b) {
                    return Err(TvbError::Validation(format!(
                        "cones {a:?} and {b:?} do not meet in a common face"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn maximal_cones(&self) -> Vec<&Cone> {
        self.cones
            .iter()
            .filter(|c| {
                !self
                    .cones
                    .iter()
                    .any(|d| d != *c && c.is_face_of(d))
            })
            .collect()
    }

    pub fn contains_cone(&self, c: &Cone) -> bool {
        self.cones.contains(c)
    }

    pub fn find_containing(&self, v: &RatVec) -> Option<&Cone> {
        self.maximal_cones().into_iter().find(|c| c.contains(v))
    }

    /// Completeness via the facet-pairing criterion: the fan is pure of full
    /// dimension and every facet of a maximal cone is shared by exactly two
    /// maximal cones.
    pub fn is_complete(&self) -> bool {
        let maxs = self.maximal_cones();
        if maxs.is_empty() {
            return false;
        }
        if self.dim == 0 {
            return true;
        }
        for m in &maxs {
            if m.cone_dim() != self.dim {
                return false;
            }
            for f in m.faces() {
                if f.cone_dim() + 1 != self.dim {
                    continue;
                }
                let count = maxs.iter().filter(|c| f.is_face_of(c)).count();
                if count != 2 {
                    return false;
                }
            }
        }
        true
    }

    pub fn rays(&self) -> Vec<RatVec> {
        let mut out: Vec<RatVec> = Vec::new();
        for c in &self.cones {
            for g in &c.generators {
                if !out.contains(g) {
                    out.push(g.clone());
                }
            }
        }
        out.sort();
        out
    }
}

/// A polyhedral complex: cells closed under faces, pairwise meeting in
/// common faces, with a common tail fan.
#[derive(Clone, Debug)]
pub struct PolyhedralComplex {
    pub dim: usize,
    pub cells: Vec<Polyhedron>,
}

impl PolyhedralComplex {
    pub fn from_cells(dim: usize, cells: &[Polyhedron]) -> PolyhedralComplex {
        let mut all: Vec<Polyhedron> = Vec::new();
        for c in cells {
            for f in c.faces() {
                if !all.contains(&f) {
                    all.push(f);
                }
            }
        }
        all.sort_by(|a, b| (&a.vertices, &a.rays).cmp(&(&b.vertices, &b.rays)));
        PolyhedralComplex { dim, cells: all }
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.cells {
            for f in c.faces() {
                if !self.cells.contains(&f) {
                    return Err(TvbError::Validation(format!(
                        "complex is missing a face of {c:?}"
                    )));
                }
            }
        }
        for (i, a) in self.cells.iter().enumerate() {
            for b in self.cells.iter().skip(i + 1) {
                if let Some(meet) = a.intersect(b)? {
                    if !meet.is_face_of(a) || !meet.is_face_of(b) {
                        return Err(TvbError::Validation(format!(
                            "cells {a:?} and {b:?} do not meet in a common face"
                        )));
                    }
                }
            }
        }
        // Common tail fan.
        let tails: Vec<Cone> = self.cells.iter().map(|c| c.tail_cone()).collect();
        Fan::from_cones(self.dim, &tails).validate()?;
        Ok(())
    }

    pub fn maximal_cells(&self) -> Vec<&Polyhedron> {
        self.cells
            .iter()
            .filter(|c| {
                !self
                    .cells
                    .iter()
                    .any(|d| !std::ptr::eq(*c, d) && *c != d && c.is_face_of(d))
            })
            .collect()
    }

    pub fn vertices(&self) -> Vec<RatVec> {
        let mut out: Vec<RatVec> = Vec::new();
        for c in &self.cells {
            for v in &c.vertices {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out.sort();
        out
    }

    pub fn find_containing(&self, x: &RatVec) -> Option<&Polyhedron> {
        self.maximal_cells().into_iter().find(|c| c.contains(x))
    }

    pub fn tail_fan(&self) -> Fan {
        let tails: Vec<Cone> = self.cells.iter().map(|c| c.tail_cone()).collect();
        Fan::from_cones(self.dim, &tails)
    }
}
