//! Executable forms of the structure theorems: direct sums, the splitting
//! test, graded global sections with their curve-side cross-check, toric
//! downgrades, and cotangent presentations.

pub mod klyachko;
pub mod sections;
pub mod split;

use std::collections::BTreeMap;

use crate::curve::RatFunc;
use crate::error::{Result, TvbError};
use crate::kmatrix::KMat;
use crate::qq::RatVec;
use crate::support::{Piece, SupportMap};

/// Block direct sum of two support maps on the same fan.
pub fn direct_sum(h1: &SupportMap, h2: &SupportMap) -> Result<SupportMap> {
    if h1.fan.dim != h2.fan.dim
        || h1.fan.divisors.len() != h2.fan.divisors.len()
        || h1
            .fan
            .divisors
            .iter()
            .zip(&h2.fan.divisors)
            .any(|(a, b)| a.name != b.name || !a.same_divisor(b))
    {
        return Err(TvbError::Invalid("direct sum requires a common fan".into()));
    }
    let rank = h1.rank + h2.rank;
    let block = |a: &Piece, b: &Piece| -> Result<Piece> {
        let mut frame = KMat::zero(rank, rank);
        for i in 0..h1.rank {
            for j in 0..h1.rank {
                frame[(i, j)] = a.frame[(i, j)].clone();
            }
        }
        for i in 0..h2.rank {
            for j in 0..h2.rank {
                frame[(h1.rank + i, h1.rank + j)] = b.frame[(i, j)].clone();
            }
        }
        let mut characters: Vec<RatVec> = a.characters.clone();
        characters.extend(b.characters.iter().cloned());
        Piece::new(frame, characters)
    };
    let mut generic = BTreeMap::new();
    for d in &h1.fan.divisors {
        generic.insert(
            d.name.clone(),
            block(&h1.generic[&d.name], &h2.generic[&d.name])?,
        );
    }
    let mut overrides = BTreeMap::new();
    let mut keys: Vec<(String, crate::curve::PointP1)> = h1.overrides.keys().cloned().collect();
    for k in h2.overrides.keys() {
        if !keys.contains(k) {
            keys.push(k.clone());
        }
    }
    for (name, point) in keys {
        let a = h1.piece_at(&name, &point);
        let b = h2.piece_at(&name, &point);
        overrides.insert((name.clone(), point.clone()), block(a, b)?);
    }
    SupportMap::new(h1.fan.clone(), rank, generic, overrides)
}

/// Embeds a vector over Q as a constant vector over K.
pub fn constant_vector(v: &RatVec) -> Vec<RatFunc> {
    v.coords
        .iter()
        .map(|c| RatFunc::constant(c.clone()))
        .collect()
}
