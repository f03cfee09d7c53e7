//! Equivariant splitting: a bundle splits into line bundles exactly when one
//! frame of E adapts every norm the support map takes. The search runs over
//! candidate lines drawn from the presentation frames (enriched by common
//! frames of vertex pairs), and for rank two it is completed by an exact
//! one-free-line analysis driven by the level-0 forcing of the linear part.

use num_traits::Zero;

use crate::building::{common_frame, AdaptedNorm};
use crate::curve::{PointP1, Poly, RatFunc};
use crate::error::{Result, TvbError};
use crate::kmatrix::KMat;
use crate::qq::{qq, qq_floor, QQ, RatVec};
use crate::support::SupportMap;

#[derive(Debug)]
pub enum SplitResult {
    Split { witness: KMat },
    NotSplit { reason: String },
    Unknown { candidates_tried: usize },
}

/// All norms a candidate frame must adapt: the level-one norms at every
/// vertex and interior sample of every coefficient at every explicit point
/// plus one generic point, and the level-zero norms of the linear part at
/// every tail ray and interior direction.
struct TestNorms {
    level1: Vec<AdaptedNorm>,
    level0: Vec<AdaptedNorm>,
}

fn collect_test_norms(h: &SupportMap, extra_points: &[PointP1]) -> Result<TestNorms> {
    let mut level1 = Vec::new();
    let mut points = h.explicit_points();
    points.push(h.fan.fresh_point());
    for p in extra_points {
        if !points.contains(p) {
            points.push(p.clone());
        }
    }
    for p in &points {
        for d in &h.fan.divisors {
            let Some(cell) = d.coefficient(p) else {
                continue;
            };
            let piece = h.piece_at(&d.name, p);
            let mut xs = cell.vertices.clone();
            let sample = cell.sample_point();
            if !xs.contains(&sample) {
                xs.push(sample);
            }
            for x in xs {
                level1.push(piece.norm_at(p, &x)?);
            }
        }
    }
    let mut level0 = Vec::new();
    for (cone, piece) in h.linear_part() {
        let mut ws = cone.generators.clone();
        let mut interior = RatVec::zero(h.fan.dim);
        for g in &cone.generators {
            interior = interior.add(g);
        }
        if !interior.is_zero() && !ws.contains(&interior) {
            ws.push(interior);
        }
        for w in &ws {
            level0.push(piece.linear_norm_at(w)?);
        }
    }
    Ok(TestNorms { level1, level0 })
}

fn frame_adapts_all(frame: &KMat, norms: &TestNorms) -> Result<bool> {
    for w in norms.level1.iter().chain(norms.level0.iter()) {
        if !w.is_adapted_to(frame)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Canonical projective representative: scale so the first nonzero entry is
/// one.
fn normalize_line(col: &[RatFunc]) -> Option<Vec<RatFunc>> {
    let lead = col.iter().find(|f| !f.is_zero())?;
    let inv = lead.inv().ok()?;
    Some(col.iter().map(|f| f.mul(&inv)).collect())
}

fn push_line(lines: &mut Vec<Vec<RatFunc>>, col: Vec<RatFunc>) {
    if let Some(n) = normalize_line(&col) {
        if !lines.contains(&n) {
            lines.push(n);
        }
    }
}

fn candidate_lines(h: &SupportMap, norms: &TestNorms) -> Vec<Vec<RatFunc>> {
    let mut lines: Vec<Vec<RatFunc>> = Vec::new();
    for piece in h.generic.values() {
        for j in 0..piece.rank() {
            push_line(&mut lines, piece.frame.col(j));
        }
    }
    for piece in h.overrides.values() {
        for j in 0..piece.rank() {
            push_line(&mut lines, piece.frame.col(j));
        }
    }
    // Common adapted frames of same-place integral vertex pairs.
    for (i, a) in norms.level1.iter().enumerate() {
        if !a.is_integral() {
            continue;
        }
        for b in norms.level1.iter().skip(i + 1) {
            if !b.is_integral() || a.place != b.place {
                continue;
            }
            if let Ok((frame, _, _)) = common_frame(a, b) {
                for j in 0..frame.cols {
                    push_line(&mut lines, frame.col(j));
                }
            }
            if lines.len() > 40 {
                return lines;
            }
        }
    }
    lines
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
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
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Points where candidate-frame verification could differ from the generic
/// pattern: singularities of all relative determinants.
fn extra_verification_points(h: &SupportMap, frame: &KMat) -> Result<Vec<PointP1>> {
    let mut pts = Vec::new();
    let mut add_poly = |p: &Poly| -> Result<()> {
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
    for piece in h.generic.values() {
        let rel = piece.frame.inverse()?.mul(frame);
        for f in &rel.data {
            if !f.is_zero() {
                add_poly(f.numerator())?;
                add_poly(f.denominator())?;
            }
        }
    }
    Ok(pts)
}

/// Full verification of a witness frame: all collected norms, plus the norms
/// at every point where some relative determinant degenerates.
fn verify_witness(h: &SupportMap, frame: &KMat) -> Result<bool> {
    let extra = extra_verification_points(h, frame)?;
    let norms = collect_test_norms(h, &extra)?;
    frame_adapts_all(frame, &norms)
}

/// Lines forced by non-constant level-0 norms: in rank two, a valuation with
/// distinct values on its frame forces the higher-valued frame line to be a
/// member of any adapting frame.
fn forced_lines(norms: &TestNorms) -> Vec<Vec<RatFunc>> {
    let mut out: Vec<Vec<RatFunc>> = Vec::new();
    for w in &norms.level0 {
        if w.rank() != 2 || w.values[0] == w.values[1] {
            continue;
        }
        let idx = if w.values[0] > w.values[1] { 0 } else { 1 };
        if let Some(n) = normalize_line(&w.frame.col(idx)) {
            if !out.contains(&n) {
                out.push(n);
            }
        }
    }
    out
}

/// One linear condition on the unknown function g: val_point of
/// (a + g*b) at least `bound`; `strict` marks the attainment-failure variant.
#[derive(Clone)]
struct GCondition {
    point: PointP1,
    a: RatFunc,
    b: RatFunc,
    bound: i64,
}

/// The rank-two one-free-line system: with the forced line x1 and a
/// parametrization x(g) = beta1 + g beta2 (beta2 spanning x1), each test
/// norm w imposes min_i(val(p_i + g q_i) + c_i) = T_w with T_w independent
/// of g. Feasibility of the lower bounds is a linear system on the Laurent
/// coefficients of g; attainment failure is a proper affine subspace per
/// norm.
struct FreeLineSystem {
    /// Lower-bound conditions (conjunction).
    bounds: Vec<GCondition>,
    /// Per original norm: the attainment-failure conditions (a solution is
    /// bad for that norm when it satisfies all of them).
    attainment: Vec<Vec<GCondition>>,
}

fn to_i64(q: &QQ) -> i64 {
    q.to_integer().to_string().parse().expect("small integer")
}

fn build_free_line_system(
    norms: &TestNorms,
    x1: &[RatFunc],
    beta1: &[RatFunc],
) -> Result<Option<FreeLineSystem>> {
    let mut bounds = Vec::new();
    let mut attainment = Vec::new();
    for w in &norms.level1 {
        let a = w.frame.solve_vec(x1)?;
        let p = w.frame.solve_vec(beta1)?;
        let q = w.frame.solve_vec(x1)?; // beta2 = x1 spans the forced line
        // T = val(det(a, p)) + c1 + c2 - w(x1); the determinant is constant
        // in g because x1 wedge x1 vanishes.
        let det = a[0].mul(&p[1]).sub(&a[1].mul(&p[0]));
        if det.is_zero() {
            // beta1 happens to lie on the forced line; caller picks another.
            return Ok(None);
        }
        let wx1 = match w.eval(x1) {
            Some(v) => v,
            None => return Ok(None),
        };
        let t = qq(det.val_at(&w.place).expect("nonzero det"))
            + &w.values[0]
            + &w.values[1]
            - wx1;
        let mut fail = Vec::new();
        for i in 0..2 {
            let shift = &t - &w.values[i];
            bounds.push(GCondition {
                point: w.place.clone(),
                a: p[i].clone(),
                b: q[i].clone(),
                bound: to_i64(&crate::qq::qq_ceil(&shift)),
            });
            fail.push(GCondition {
                point: w.place.clone(),
                a: p[i].clone(),
                b: q[i].clone(),
                bound: to_i64(&qq_floor(&shift)) + 1,
            });
        }
        attainment.push(fail);
    }
    Ok(Some(FreeLineSystem { bounds, attainment }))
}

/// Affine solution set of a G-condition system inside a pole-bounded ansatz:
/// (particular solution, kernel basis), or `None` when infeasible.
struct AffineSolutions {
    den: Poly,
    particular: Vec<QQ>,
    kernel: Vec<Vec<QQ>>,
}

impl AffineSolutions {
    fn realize(&self, coeffs: &[QQ]) -> RatFunc {
        let num = Poly::new(coeffs.to_vec());
        RatFunc::new(num, self.den.clone()).expect("nonzero denominator")
    }

    fn element(&self, weights: &[i64]) -> Vec<QQ> {
        let mut c = self.particular.clone();
        for (k, basis) in self.kernel.iter().enumerate() {
            let w = qq(weights.get(k).copied().unwrap_or(0));
            for (i, b) in basis.iter().enumerate() {
                c[i] = c[i].clone() + b * &w;
            }
        }
        c
    }
}

fn solve_g_system(conditions: &[GCondition]) -> Option<AffineSolutions> {
    // Constraint places and pole bounds.
    let mut points: Vec<PointP1> = vec![PointP1::Infinity];
    for c in conditions {
        if !points.contains(&c.point) {
            points.push(c.point.clone());
        }
    }
    points.sort();
    let mut pole: std::collections::BTreeMap<PointP1, i64> =
        points.iter().map(|p| (p.clone(), 0i64)).collect();
    let mut depth_slack = 2i64;
    for c in conditions {
        if c.b.is_zero() {
            continue;
        }
        let va = c.a.val_at(&c.point).unwrap_or(c.bound);
        let vb = c.b.val_at(&c.point).expect("nonzero");
        let implied = c.bound.min(va) - vb;
        let e = pole.get_mut(&c.point).expect("known");
        *e = (*e).max(-implied.min(0));
        depth_slack += (c.bound - va.min(vb)).abs().min(12) + 1;
    }
    let n_inf = pole[&PointP1::Infinity];
    let finite_total: i64 = pole
        .iter()
        .filter(|(p, _)| **p != PointP1::Infinity)
        .map(|(_, n)| *n)
        .sum();
    let dmax = (n_inf + finite_total + depth_slack) as usize;
    let mut den = Poly::one();
    for (p, n) in &pole {
        if let PointP1::Finite(q) = p {
            den = den.mul(&Poly::t_minus(q).pow(*n as u32));
        }
    }
    let mono_count = dmax + 1;
    let phi = |d: usize| -> RatFunc {
        RatFunc::new(Poly::t().pow(d as u32), den.clone()).expect("nonzero den")
    };
    // Rows: linear equations; rhs entries.
    let mut rows: Vec<Vec<QQ>> = Vec::new();
    let mut rhs: Vec<QQ> = Vec::new();
    let deg_cap = den.degree() + n_inf;
    for d in 0..mono_count {
        if (d as i64) > deg_cap {
            let mut row = vec![QQ::zero(); mono_count];
            row[d] = QQ::from_integer(1.into());
            rows.push(row);
            rhs.push(QQ::zero());
        }
    }
    for c in conditions {
        // val(a + g b) >= bound: Laurent coefficients of a + sum c_d b phi_d
        // must vanish below the bound.
        let funcs: Vec<RatFunc> = (0..mono_count).map(|d| c.b.mul(&phi(d))).collect();
        let mut vmin = c.a.val_at(&c.point).unwrap_or(c.bound);
        for f in &funcs {
            if let Some(v) = f.val_at(&c.point) {
                vmin = vmin.min(v);
            }
        }
        if vmin >= c.bound {
            continue;
        }
        let depth = (c.bound - vmin) as usize;
        let mut eqs = vec![vec![QQ::zero(); mono_count]; depth];
        let mut rvec = vec![QQ::zero(); depth];
        let (va, acoef) = c.a.laurent_at(&c.point, depth);
        if !c.a.is_zero() {
            for (k, coeff) in acoef.iter().enumerate() {
                let exp = va + k as i64;
                if exp < c.bound && exp >= vmin {
                    rvec[(exp - vmin) as usize] = rvec[(exp - vmin) as usize].clone() - coeff;
                }
            }
        }
        for (d, f) in funcs.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            let (v0, coeffs) = f.laurent_at(&c.point, depth);
            for (k, coeff) in coeffs.iter().enumerate() {
                let exp = v0 + k as i64;
                if exp < c.bound && exp >= vmin {
                    eqs[(exp - vmin) as usize][d] =
                        eqs[(exp - vmin) as usize][d].clone() + coeff;
                }
            }
        }
        rows.extend(eqs);
        rhs.extend(rvec);
    }
    // Solve rows * c = rhs.
    let nrows = rows.len().max(1);
    let mut mat = crate::qq::QMat::zero(nrows, mono_count);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            mat[(i, j)] = v.clone();
        }
    }
    let particular = solve_affine(&mat, &rhs)?;
    let kernel = mat
        .kernel()
        .into_iter()
        .map(|k| k.coords)
        .collect::<Vec<_>>();
    Some(AffineSolutions {
        den,
        particular,
        kernel,
    })
}

/// Least-structure affine solve of M x = b over Q; `None` if inconsistent.
fn solve_affine(m: &crate::qq::QMat, b: &[QQ]) -> Option<Vec<QQ>> {
    let rows = m.rows;
    let cols = m.cols;
    let mut aug = crate::qq::QMat::zero(rows, cols + 1);
    for i in 0..rows {
        for j in 0..cols {
            aug[(i, j)] = m[(i, j)].clone();
        }
        aug[(i, cols)] = b.get(i).cloned().unwrap_or_else(QQ::zero);
    }
    // Gaussian elimination.
    let mut r = 0;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !aug[(i, c)].is_zero()) else {
            continue;
        };
        for j in 0..=cols {
            let t = aug[(r, j)].clone();
            aug[(r, j)] = aug[(p, j)].clone();
            aug[(p, j)] = t;
        }
        let inv = QQ::from_integer(1.into()) / aug[(r, c)].clone();
        for j in 0..=cols {
            aug[(r, j)] = aug[(r, j)].clone() * &inv;
        }
        for i in 0..rows {
            if i != r && !aug[(i, c)].is_zero() {
                let f = aug[(i, c)].clone();
                for j in 0..=cols {
                    let t = aug[(r, j)].clone() * &f;
                    aug[(i, j)] = aug[(i, j)].clone() - t;
                }
            }
        }
        pivots.push((r, c));
        r += 1;
        if r == rows {
            break;
        }
    }
    for i in r..rows {
        if !aug[(i, cols)].is_zero() {
            return None;
        }
    }
    let mut x = vec![QQ::zero(); cols];
    for (row, col) in pivots {
        x[col] = aug[(row, cols)].clone();
    }
    Some(x)
}

fn g_satisfies(g: &RatFunc, c: &GCondition) -> bool {
    let e = c.a.add(&g.mul(&c.b));
    match e.val_at(&c.point) {
        None => true,
        Some(v) => v >= c.bound,
    }
}

/// Decides splitting.
pub fn split_check(h: &SupportMap) -> Result<SplitResult> {
    if h.rank == 1 {
        let name = &h.fan.divisors[0].name;
        return Ok(SplitResult::Split {
            witness: h.generic[name].frame.clone(),
        });
    }
    let norms = collect_test_norms(h, &[])?;
    let lines = candidate_lines(h, &norms);
    let mut tried = 0usize;
    for subset in combinations(lines.len(), h.rank) {
        let cols: Vec<Vec<RatFunc>> = subset.iter().map(|&i| lines[i].clone()).collect();
        let frame = KMat::from_cols(&cols);
        if frame.rank() != h.rank {
            continue;
        }
        tried += 1;
        if frame_adapts_all(&frame, &norms)? && verify_witness(h, &frame)? {
            return Ok(SplitResult::Split { witness: frame });
        }
    }
    if h.rank != 2 {
        return Ok(SplitResult::Unknown {
            candidates_tried: tried,
        });
    }

    // Rank-two exact analysis, driven by the level-0 forcing.
    let forced = forced_lines(&norms);
    match forced.len() {
        0 => Ok(SplitResult::Unknown {
            candidates_tried: tried,
        }),
        1 => {
            let x1 = &forced[0];
            // A complement beta1 from the standard basis.
            let mut beta1 = None;
            for k in 0..h.rank {
                let mut e = vec![RatFunc::zero(); h.rank];
                e[k] = RatFunc::one();
                let m = KMat::from_cols(&[x1.clone(), e.clone()]);
                if m.rank() == 2 {
                    beta1 = Some(e);
                    break;
                }
            }
            let beta1 = beta1.expect("a complement exists");
            let Some(system) = build_free_line_system(&norms, x1, &beta1)? else {
                return Ok(SplitResult::Unknown {
                    candidates_tried: tried,
                });
            };
            let Some(solutions) = solve_g_system(&system.bounds) else {
                return Ok(SplitResult::NotSplit {
                    reason: format!(
                        "one frame line is forced to {:?} by the linear part, and the \
                         lower-bound system for its complement is infeasible",
                        x1
                    ),
                });
            };
            // Attainment: a norm whose failure subspace swallows the whole
            // solution set can never be adapted.
            for (widx, fail) in system.attainment.iter().enumerate() {
                let all_fail = |coeffs: &[QQ]| -> bool {
                    let g = solutions.realize(coeffs);
                    fail.iter().all(|c| g_satisfies(&g, c))
                };
                // The failure set is an affine subspace; it contains the
                // whole solution space iff it contains the particular
                // solution and every kernel direction stays inside.
                let mut covers = all_fail(&solutions.particular);
                if covers {
                    for k in 0..solutions.kernel.len() {
                        let mut w = vec![0i64; solutions.kernel.len()];
                        w[k] = 1;
                        if !all_fail(&solutions.element(&w)) {
                            covers = false;
                            break;
                        }
                    }
                }
                if covers {
                    return Ok(SplitResult::NotSplit {
                        reason: format!(
                            "norm {:?} can never attain its forced value on the free line",
                            norms.level1[widx]
                        ),
                    });
                }
            }
            // Search for a witness avoiding every failure subspace.
            let kdim = solutions.kernel.len();
            let mut trial_weights: Vec<Vec<i64>> = vec![vec![0; kdim]];
            for k in 0..kdim {
                for s in [1i64, -1, 2, 3] {
                    let mut w = vec![0; kdim];
                    w[k] = s;
                    trial_weights.push(w);
                }
            }
            for step in 1..6i64 {
                trial_weights.push((0..kdim).map(|k| step + k as i64).collect());
            }
            for w in trial_weights {
                let coeffs = solutions.element(&w);
                let g = solutions.realize(&coeffs);
                if !system.bounds.iter().all(|c| g_satisfies(&g, c)) {
                    continue;
                }
                let bad = system
                    .attainment
                    .iter()
                    .any(|fail| fail.iter().all(|c| g_satisfies(&g, c)));
                if bad {
                    continue;
                }
                // Candidate witness: (beta1 + g x1, x1).
                let free: Vec<RatFunc> = beta1
                    .iter()
                    .zip(x1.iter())
                    .map(|(b, x)| b.add(&g.mul(x)))
                    .collect();
                let frame = KMat::from_cols(&[free, x1.clone()]);
                if verify_witness(h, &frame)? {
                    return Ok(SplitResult::Split { witness: frame });
                }
            }
            Ok(SplitResult::Unknown {
                candidates_tried: tried,
            })
        }
        2 => {
            let frame = KMat::from_cols(&[forced[0].clone(), forced[1].clone()]);
            if frame.rank() == 2 && verify_witness(h, &frame)? {
                Ok(SplitResult::Split { witness: frame })
            } else {
                Ok(SplitResult::NotSplit {
                    reason: "both frame lines are forced by the linear part, and the forced \
                             frame does not adapt every norm"
                        .into(),
                })
            }
        }
        _ => Ok(SplitResult::NotSplit {
            reason: format!(
                "the linear part forces {} pairwise distinct lines into a rank-2 frame",
                forced.len()
            ),
        }),
    }
}
