//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line. Everything is exact; there are no tolerances anywhere.
//! Run with `cargo test -p tvb-cli --test acceptance -- --nocapture` to see
//! the lines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use tvb_core::apps::klyachko::{
    cotangent_input, direct_sum_input, line_bundle_input, toric_downgrade, KlyachkoInput,
};
use tvb_core::apps::sections::{global_sections, sections_bundle_on_y, weight_box};
use tvb_core::apps::split::{split_check, SplitResult};
use tvb_core::building::{lattice_from_norm, lattice_intersect, norm_from_lattice, AdaptedNorm};
use tvb_core::curve::{PointP1, Poly, RatFunc};
use tvb_core::kmatrix::KMat;
use tvb_core::polyhedral::{Cone, Fan};
use tvb_core::qq::{qq, qq_ratio, QMat, QQ, RatVec};
use tvb_core::support::residue_maps_equal;

fn v(coords: &[i64]) -> RatVec {
    RatVec::from_ints(coords)
}

fn fan_from_rays(rays: &[[i64; 2]]) -> Fan {
    let n = rays.len();
    let cones: Vec<Cone> = (0..n)
        .map(|i| Cone::from_generators(2, &[v(&rays[i]), v(&rays[(i + 1) % n])]).unwrap())
        .collect();
    let fan = Fan::from_cones(2, &cones);
    fan.validate().unwrap();
    assert!(fan.is_complete());
    fan
}

fn surfaces() -> Vec<(&'static str, Fan)> {
    vec![
        ("P2", fan_from_rays(&[[1, 0], [0, 1], [-1, -1]])),
        ("P1xP1", fan_from_rays(&[[1, 0], [0, 1], [-1, 0], [0, -1]])),
        ("F1", fan_from_rays(&[[1, 0], [0, 1], [-1, 1], [0, -1]])),
        ("F2", fan_from_rays(&[[1, 0], [0, 1], [-1, 2], [0, -1]])),
        ("Bl1P2", fan_from_rays(&[[1, 0], [1, 1], [0, 1], [-1, -1]])),
    ]
}

fn proj() -> Vec<i64> {
    vec![0, 1]
}

// ---------------------------------------------------------------- criterion 1

fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize) -> Poly {
    let deg = rng.gen_range(0..=max_deg);
    let coeffs: Vec<QQ> = (0..=deg).map(|_| qq(rng.gen_range(-2..=2))).collect();
    Poly::new(coeffs)
}

fn random_nonzero(rng: &mut ChaCha8Rng) -> RatFunc {
    loop {
        let num = random_poly(rng, 2);
        if num.is_zero() {
            continue;
        }
        let shift = rng.gen_range(-1..=1i64);
        let den = Poly::t_minus(&qq(shift)).pow(rng.gen_range(0..=1));
        return RatFunc::new(num, den).unwrap();
    }
}

fn random_place(rng: &mut ChaCha8Rng) -> PointP1 {
    match rng.gen_range(0..4) {
        0 => PointP1::finite(0),
        1 => PointP1::finite(1),
        2 => PointP1::finite(-1),
        _ => PointP1::Infinity,
    }
}

fn random_norm(rng: &mut ChaCha8Rng, rank: usize, level: QQ, place: PointP1) -> AdaptedNorm {
    // Triangular frame with valuation-bearing diagonal: always invertible.
    let mut frame = KMat::identity(rank);
    for i in 0..rank {
        let c = *[1i64, -1, 2].get(rng.gen_range(0..3)).unwrap();
        let k = rng.gen_range(-1..=1i64);
        let u = RatFunc::uniformizer_pow(&place, k);
        frame[(i, i)] = RatFunc::constant(qq(c)).mul(&u);
        for j in 0..i {
            if rng.gen_bool(0.5) {
                frame[(i, j)] = RatFunc::from_poly(random_poly(rng, 1));
            }
        }
    }
    let values: Vec<QQ> = (0..rank)
        .map(|_| qq_ratio(rng.gen_range(-6..=6), if rng.gen_bool(0.5) { 1 } else { 2 }))
        .collect();
    AdaptedNorm::new(level, place, frame, values).unwrap()
}

fn random_vector(rng: &mut ChaCha8Rng, rank: usize, place: &PointP1) -> Vec<RatFunc> {
    (0..rank)
        .map(|_| {
            if rng.gen_bool(0.25) {
                RatFunc::zero()
            } else {
                let c = qq(rng.gen_range(1..=2i64) * if rng.gen_bool(0.5) { 1 } else { -1 });
                let k = rng.gen_range(-3..=3i64);
                RatFunc::constant(c).mul(&RatFunc::uniformizer_pow(place, k))
            }
        })
        .collect()
}

#[test]
fn acceptance_1_norm_axioms_and_comparison() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // Axioms on 1000 randomized norms.
    for _ in 0..1000 {
        let rank = rng.gen_range(1..=3);
        let level = qq(rng.gen_range(0..=2));
        let place = random_place(&mut rng);
        let w = random_norm(&mut rng, rank, level.clone(), place.clone());
        // (3) the zero vector, and only it, evaluates to infinity.
        assert_eq!(w.eval(&vec![RatFunc::zero(); rank]), None);
        let e1 = random_vector(&mut rng, rank, &place);
        let e2 = random_vector(&mut rng, rank, &place);
        let v1 = w.eval(&e1);
        let v2 = w.eval(&e2);
        if e1.iter().any(|f| !f.is_zero()) {
            let val = v1.clone().expect("nonzero vector has finite norm");
            // (1) scaling by lambda shifts by level times the valuation.
            let lam = random_nonzero(&mut rng);
            let scaled: Vec<RatFunc> = e1.iter().map(|f| f.mul(&lam)).collect();
            let got = w.eval(&scaled).expect("still nonzero");
            let expect = &level * qq(lam.val_at(&w.place).unwrap()) + &val;
            assert_eq!(got, expect, "homogeneity fails for {w:?}");
        }
        // (2) the ultrametric inequality, with equality at distinct values.
        let sum: Vec<RatFunc> = e1.iter().zip(&e2).map(|(a, b)| a.add(b)).collect();
        let vs = w.eval(&sum);
        match (v1, v2) {
            (Some(a), Some(b)) => {
                let min = a.clone().min(b.clone());
                let got = vs.unwrap_or_else(|| min.clone() + qq(1));
                assert!(got >= min, "ultrametric fails");
                if a != b {
                    assert_eq!(got, min, "equality at distinct values fails");
                }
            }
            (None, other) | (other, None) => assert_eq!(vs, other),
        }
    }
    // Comparison oracle on 10000 pairs.
    let mut pool: BTreeMap<(usize, u8), Vec<AdaptedNorm>> = BTreeMap::new();
    let places = [PointP1::finite(0), PointP1::Infinity];
    for rank in 1..=3usize {
        for (pi, place) in places.iter().enumerate() {
            let list: Vec<AdaptedNorm> = (0..20)
                .map(|_| random_norm(&mut rng, rank, qq(1), place.clone()))
                .collect();
            pool.insert((rank, pi as u8), list);
        }
    }
    let mut comparisons = 0usize;
    'outer: loop {
        for list in pool.values() {
            for a in list {
                for b in list {
                    let leq = a.leq(b).unwrap();
                    if leq {
                        // Sampling can only refute: check two random vectors.
                        for _ in 0..2 {
                            let e = random_vector(&mut rng, a.rank(), &a.place);
                            match (a.eval(&e), b.eval(&e)) {
                                (Some(x), Some(y)) => assert!(x <= y, "leq lied"),
                                (Some(_), None) => panic!("leq lied at infinity"),
                                _ => {}
                            }
                        }
                    } else {
                        // A frame vector witnesses the failure.
                        let witness = (0..a.rank()).any(|i| {
                            let col = a.frame.col(i);
                            match (a.eval(&col), b.eval(&col)) {
                                (Some(x), Some(y)) => x > y,
                                (Some(_), None) => false,
                                _ => false,
                            }
                        });
                        assert!(witness, "no witness for a failed comparison");
                    }
                    comparisons += 1;
                    if comparisons >= 10000 {
                        break 'outer;
                    }
                }
            }
        }
    }
    println!("acceptance 1 (norm axioms, {comparisons} comparisons): PASS");
}

// ---------------------------------------------------------------- criterion 2

#[test]
fn acceptance_2_lattice_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let places = [PointP1::finite(0), PointP1::finite(1), PointP1::Infinity];
    let mut norms: Vec<AdaptedNorm> = Vec::new();
    for i in 0..500 {
        let rank = rng.gen_range(1..=3);
        let place = places[i % places.len()].clone();
        let mut w = random_norm(&mut rng, rank, qq(1), place);
        w.values = (0..rank).map(|_| qq(rng.gen_range(-3..=3))).collect();
        let lattice = lattice_from_norm(&w).unwrap();
        let back = norm_from_lattice(&lattice);
        assert!(w.eq(&back).unwrap(), "round trip fails for {w:?}");
        norms.push(w);
    }
    // Intersection membership against brute force on bounded samples,
    // pairing norms of equal rank at equal places.
    let mut groups: BTreeMap<(usize, String), Vec<&AdaptedNorm>> = BTreeMap::new();
    for w in &norms {
        groups
            .entry((w.rank(), w.place.to_string()))
            .or_default()
            .push(w);
    }
    let mut checked = 0usize;
    for list in groups.values() {
        for pair in list.chunks(2) {
            if pair.len() < 2 {
                continue;
            }
            let l1 = lattice_from_norm(pair[0]).unwrap();
            let l2 = lattice_from_norm(pair[1]).unwrap();
            let meet = lattice_intersect(&l1, &l2).unwrap();
            for _ in 0..20 {
                let e = random_vector(&mut rng, pair[0].rank(), &pair[0].place);
                assert_eq!(
                    meet.contains(&e),
                    l1.contains(&e) && l2.contains(&e),
                    "membership mismatch"
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 1000);
    println!("acceptance 2 (lattice round trip, {checked} membership samples): PASS");
}

// ---------------------------------------------------------------- criterion 3

fn rank2_bundle(fan: &Fan) -> KlyachkoInput {
    let rays = fan.rays();
    let l1 = line_bundle_input(fan, &[(rays[0].clone(), 1)], &proj()).unwrap();
    let l2 = line_bundle_input(fan, &[(rays[rays.len() - 1].clone(), 1)], &proj()).unwrap();
    direct_sum_input(&l1, &l2).unwrap()
}

#[test]
fn acceptance_3_gluing_identity() {
    let mut total = 0usize;
    for (name, fan) in surfaces() {
        let rays = fan.rays();
        let bundles = vec![
            line_bundle_input(&fan, &[(rays[0].clone(), 1)], &proj()).unwrap(),
            rank2_bundle(&fan),
        ];
        for k in bundles {
            let dg = toric_downgrade(&k).unwrap();
            assert!(dg.support.validate().is_valid(), "{name}");
            let mut points = dg.support.explicit_points();
            points.push(dg.fan.fresh_point());
            let names: Vec<String> =
                dg.fan.divisors.iter().map(|d| d.name.clone()).collect();
            for u in weight_box(&dg.support) {
                for (i, d1) in names.iter().enumerate() {
                    for d2 in names.iter().skip(i) {
                        for p in &points {
                            assert!(
                                dg.support.check_transition(d1, d2, &u, p).unwrap(),
                                "{name}: transition {d1} vs {d2} at {p}, weight {u:?}"
                            );
                            total += 1;
                        }
                    }
                }
            }
        }
    }
    println!("acceptance 3 (gluing identity on 5 surfaces, {total} checks): PASS");
}

// ------------------------------------------------------- criteria 4 and 5

#[test]
fn acceptance_4_and_5_sections_vs_oracle_and_curve_side() {
    let fan = fan_from_rays(&[[1, 0], [0, 1], [-1, 0], [0, -1]]);
    let mut cross_checked = 0usize;
    for a in 0..=3i64 {
        for b in 0..=3i64 {
            let coeffs = vec![(v(&[-1, 0]), a), (v(&[0, -1]), b)];
            let k = line_bundle_input(&fan, &coeffs, &proj()).unwrap();
            let dg = toric_downgrade(&k).unwrap();
            // Toric oracle: lattice points of the section polytope, graded
            // by the subtorus weight.
            let rays = fan.rays();
            let a_of = |ray: &RatVec| -> i64 {
                coeffs
                    .iter()
                    .find(|(r, _)| r == ray)
                    .map(|(_, c)| *c)
                    .unwrap_or(0)
            };
            let mut points_in_polytope: Vec<RatVec> = Vec::new();
            for x in -6..=6i64 {
                for y in -6..=6i64 {
                    let u = v(&[x, y]);
                    if rays.iter().all(|r| u.dot(r) + qq(a_of(r)) >= qq(0)) {
                        points_in_polytope.push(u);
                    }
                }
            }
            assert_eq!(points_in_polytope.len() as i64, (a + 1) * (b + 1));
            let mut total = 0usize;
            for u in weight_box(&dg.support) {
                let s = global_sections(&dg.support, &u).unwrap();
                let oracle = points_in_polytope
                    .iter()
                    .filter(|pt| {
                        // Weight is the kernel coordinate of the transformed
                        // character; the projection is the last coordinate.
                        let n = pt.dim();
                        let transformed: Vec<QQ> = (0..n)
                            .map(|i| {
                                (0..n)
                                    .map(|j| &dg.basis_rows[(i, j)] * &pt.coords[j])
                                    .sum::<QQ>()
                            })
                            .collect();
                        transformed[..n - 1] == u.coords[..]
                    })
                    .count();
                assert_eq!(s.dim(), oracle, "O({a},{b}) at weight {u:?}");
                // Criterion 5: the curve-side dimension agrees.
                let curve = sections_bundle_on_y(&dg.support, &u).unwrap();
                assert_eq!(s.dim(), curve.dim, "curve side at weight {u:?}");
                cross_checked += 1;
                total += s.dim();
            }
            assert_eq!(total as i64, (a + 1) * (b + 1), "O({a},{b}) total");
        }
    }
    println!("acceptance 4 (sections equal the monomial oracle for O(a,b), a,b <= 3): PASS");
    println!("acceptance 5 (curve-side dimensions agree on {cross_checked} weights): PASS");
}

// ---------------------------------------------------------------- criterion 6

#[test]
fn acceptance_6_splitting() {
    // Direct sums of line bundles split, with a verifying witness.
    let fan = fan_from_rays(&[[1, 0], [0, 1], [-1, 0], [0, -1]]);
    let sum = rank2_bundle(&fan);
    let dg = toric_downgrade(&sum).unwrap();
    let witness = match split_check(&dg.support).unwrap() {
        SplitResult::Split { witness } => witness,
        other => panic!("direct sum must split, got {other:?}"),
    };
    // The witness adapts every vertex norm of every piece.
    let mut points = dg.support.explicit_points();
    points.push(dg.fan.fresh_point());
    for p in &points {
        for d in &dg.fan.divisors {
            let Some(cell) = d.coefficient(p) else { continue };
            for x in &cell.vertices {
                let norm = dg.support.norm(p, x).unwrap();
                assert!(norm.is_adapted_to(&witness).unwrap());
            }
        }
    }

    // The cotangent downgrade of P2 is definitively not split.
    let p2 = fan_from_rays(&[[1, 0], [0, 1], [-1, -1]]);
    let cot = cotangent_input(&p2, &proj()).unwrap();
    let dg2 = toric_downgrade(&cot).unwrap();
    match split_check(&dg2.support).unwrap() {
        SplitResult::NotSplit { .. } => {}
        other => panic!("P2 cotangent must be not split, got {other:?}"),
    }

    // The cotangent of the P1 x P1 downgrade has no sections in any weight.
    let cot11 = cotangent_input(&fan, &proj()).unwrap();
    let dg3 = toric_downgrade(&cot11).unwrap();
    for u in weight_box(&dg3.support) {
        assert_eq!(
            global_sections(&dg3.support, &u).unwrap().dim(),
            0,
            "cotangent section appeared at weight {u:?}"
        );
    }
    println!("acceptance 6 (splitting: sums split, P2 cotangent does not, h0(Omega) = 0): PASS");
}

// ---------------------------------------------------------------- criterion 7

#[test]
fn acceptance_7_linear_part_and_special_fiber() {
    for (name, fan) in surfaces() {
        let rays = fan.rays();
        let k = line_bundle_input(&fan, &[(rays[0].clone(), 1)], &proj()).unwrap();
        let dg = toric_downgrade(&k).unwrap();
        // Linear part equals the input data restricted to the kernel lattice.
        for (cone, piece) in dg.support.linear_part() {
            let mut ws = cone.generators.clone();
            let mut interior = RatVec::zero(1);
            for g in &cone.generators {
                interior = interior.add(g);
            }
            if !interior.is_zero() && !ws.contains(&interior) {
                ws.push(interior);
            }
            for w in &ws {
                let got = piece.linear_norm_at(w).unwrap();
                let x = dg.lift(w, 0);
                let reference = k.norm_at(&x).unwrap();
                let val_got = got.eval(&[RatFunc::one()]).unwrap();
                let val_ref = reference.eval(&RatVec::new(vec![qq(1)])).unwrap();
                assert_eq!(val_got, val_ref, "{name}: linear part at {w:?}");
            }
        }
        // The special fiber at a generic point reproduces the input data on
        // the tail fan, through the residue reduction.
        let fresh = dg.fan.fresh_point();
        let fiber = dg.support.special_fiber_map(&fresh).unwrap();
        let expected: Vec<_> = dg
            .support
            .linear_part()
            .into_iter()
            .map(|(cone, piece)| (cone, QMat::identity(piece.rank()), piece.characters.clone()))
            .collect();
        assert!(residue_maps_equal(&fiber, &expected), "{name}: special fiber");
    }
    println!("acceptance 7 (linear part and special fiber match the input data): PASS");
}

// ---------------------------------------------------------------- criterion 8

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_tvb"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(bin()).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

#[test]
fn acceptance_8_cli_round_trip_and_determinism() {
    // Load/serialize/load fixpoint on every bundled example.
    let mut count = 0;
    for entry in std::fs::read_dir(fixtures()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().map(|e| e != "json").unwrap_or(true) {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let once =
            tvb_core::project::save_string(&tvb_core::project::load_str(&text).unwrap()).unwrap();
        let twice =
            tvb_core::project::save_string(&tvb_core::project::load_str(&once).unwrap()).unwrap();
        assert_eq!(once, twice, "fixpoint for {}", path.display());
        count += 1;
    }
    assert!(count >= 5);

    // Generated files re-validate with exit 0.
    let dir = std::env::temp_dir().join(format!("tvb-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let dg_out = dir.join("downgrade.json");
    let (code, _) = run(&[
        "downgrade",
        fixtures().join("p1xp1_o11.json").to_str().unwrap(),
        "--out",
        dg_out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (code, _) = run(&["validate", dg_out.to_str().unwrap()]);
    assert_eq!(code, 0, "generated downgrade must validate");
    let cot_out = dir.join("cotangent.json");
    let (code, _) = run(&[
        "cotangent",
        dg_out.to_str().unwrap(),
        "--out",
        cot_out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (code, _) = run(&["validate", cot_out.to_str().unwrap()]);
    assert_eq!(code, 0, "generated cotangent must validate");

    // Byte-stable rendering.
    let svg_a = dir.join("a.svg");
    let svg_b = dir.join("b.svg");
    for out in [&svg_a, &svg_b] {
        let (code, _) = run(&[
            "render",
            dg_out.to_str().unwrap(),
            "--point",
            "0",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    assert_eq!(
        std::fs::read(&svg_a).unwrap(),
        std::fs::read(&svg_b).unwrap(),
        "SVG bytes differ between runs"
    );
    println!("acceptance 8 (round trips, generated files validate, SVG byte-stable): PASS");
}
