#![allow(dead_code)]

//! Shared constructors for the integration suites: standard smooth complete
//! surface fans, Cartier line bundle data, cotangent data, and the toric
//! monomial-counting oracles.


use tvb_core::apps::klyachko::KlyachkoInput;
use tvb_core::polyhedral::{Cone, Fan};
use tvb_core::qq::{QMat, QQ, RatVec};

pub fn v(coords: &[i64]) -> RatVec {
    RatVec::from_ints(coords)
}

fn fan_from_rays(rays: &[[i64; 2]]) -> Fan {
    // Consecutive rays span the maximal cones (rays given in rotation order).
    let n = rays.len();
    let cones: Vec<Cone> = (0..n)
        .map(|i| {
            Cone::from_generators(2, &[v(&rays[i]), v(&rays[(i + 1) % n])]).unwrap()
        })
        .collect();
    let fan = Fan::from_cones(2, &cones);
    fan.validate().unwrap();
    assert!(fan.is_complete());
    fan
}

pub fn p2_fan() -> Fan {
    fan_from_rays(&[[1, 0], [0, 1], [-1, -1]])
}

pub fn p1xp1_fan() -> Fan {
    fan_from_rays(&[[1, 0], [0, 1], [-1, 0], [0, -1]])
}

pub fn hirzebruch_fan(a: i64) -> Fan {
    fan_from_rays(&[[1, 0], [0, 1], [-1, a], [0, -1]])
}

pub fn blowup_p2_fan() -> Fan {
    fan_from_rays(&[[1, 0], [1, 1], [0, 1], [-1, -1]])
}

/// Cartier data of the line bundle O(sum a_rho D_rho).
pub fn line_bundle(fan: &Fan, coeffs: &[(RatVec, i64)], projection: &[i64]) -> KlyachkoInput {
    tvb_core::apps::klyachko::line_bundle_input(fan, coeffs, projection).unwrap()
}

pub fn qqi(n: i64) -> QQ {
    QQ::from_integer(n.into())
}

/// The cotangent bundle data: per maximal cone, the dual basis of its rays
/// as both the frame of M tensor k and the characters.
pub fn cotangent_bundle(fan: &Fan, projection: &[i64]) -> KlyachkoInput {
    tvb_core::apps::klyachko::cotangent_input(fan, projection).unwrap()
}

use num_traits::Zero;

/// Lattice points of the section polytope {u : <u, ray> >= -a_rho}.
pub fn polytope_points(fan: &Fan, coeffs: &[(RatVec, i64)]) -> Vec<RatVec> {
    let rays = fan.rays();
    let a_of = |ray: &RatVec| -> i64 {
        coeffs
            .iter()
            .find(|(r, _)| r == ray)
            .map(|(_, a)| *a)
            .unwrap_or(0)
    };
    let mut out = Vec::new();
    for x in -8..=8i64 {
        for y in -8..=8i64 {
            let u = v(&[x, y]);
            if rays
                .iter()
                .all(|r| u.dot(r) + qqi(a_of(r)) >= QQ::zero())
            {
                out.push(u);
            }
        }
    }
    out
}

/// The monomial count of the line bundle at one weight of the subtorus: the
/// weight of a lattice point u is its pairing with the kernel part of the
/// coordinate split, i.e. the first coordinate of the transformed character.
pub fn monomial_count_at_weight(
    points: &[RatVec],
    basis_rows: &QMat,
    weight: &RatVec,
) -> usize {
    points
        .iter()
        .filter(|u| {
            // Transformed character: B * u; its truncation is the weight.
            let n = u.dim();
            let transformed: Vec<QQ> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| &basis_rows[(i, j)] * &u.coords[j])
                        .sum::<QQ>()
                })
                .collect();
            transformed[..n - 1] == weight.coords[..]
        })
        .count()
}

/// Standard projection along the second coordinate.
pub fn proj_last() -> Vec<i64> {
    vec![0, 1]
}
