//! The on-disk project format: a JSON document holding a divisorial fan, a
//! support map, and optionally toric bundle data for downgrades. All numbers
//! are exact rational strings ("3/2"), never floats; rational functions are
//! integer-coefficient polynomial fractions in t; infinity is spelled "inf".

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::apps::klyachko::{KlyachkoCone, KlyachkoInput};
use crate::curve::{fmt_ratfunc, parse_ratfunc, PointP1, RatFunc};
use crate::divfan::{DivisorialFan, PPDivisor};
use crate::error::{Result, TvbError};
use crate::kmatrix::KMat;
use crate::polyhedral::{Cone, Fan, Polyhedron};
use crate::qq::{fmt_qq, parse_qq, RatVec};
use crate::support::{Piece, SupportMap};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectFile {
    pub version: String,
    pub lattice_rank: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curve_points: Vec<String>,
    pub fan: FanDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<BundleDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub klyachko: Option<KlyachkoDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FanDoc {
    pub divisors: Vec<DivisorDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DivisorDoc {
    pub name: String,
    /// Ray generators of the tail cone.
    pub tail: Vec<Vec<String>>,
    /// Point label to coefficient; absent points default to the tail cone.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub coefficients: BTreeMap<String, CoefficientDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientDoc {
    /// The point is removed from the locus.
    Empty(String),
    Polyhedron {
        vertices: Vec<Vec<String>>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        rays: Vec<Vec<String>>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BundleDoc {
    pub rank: usize,
    pub pieces: Vec<PieceDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<OverrideDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceDoc {
    pub divisor: String,
    /// Frame vectors, each a column of length `rank` of rational functions.
    pub frame: Vec<Vec<String>>,
    pub characters: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OverrideDoc {
    pub divisor: String,
    pub point: String,
    pub frame: Vec<Vec<String>>,
    pub characters: Vec<Vec<String>>,
    /// Integer offsets absorbed into the frame as uniformizer powers.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub offsets: Vec<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KlyachkoDoc {
    pub lattice_rank: usize,
    pub rank: usize,
    pub projection: Vec<i64>,
    pub cones: Vec<KlyachkoConeDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KlyachkoConeDoc {
    pub rays: Vec<Vec<String>>,
    pub frame: Vec<Vec<String>>,
    pub characters: Vec<Vec<String>>,
}

fn parse_vec(coords: &[String], dim: usize) -> Result<RatVec> {
    if coords.len() != dim {
        return Err(TvbError::Parse(format!(
            "vector {coords:?} has length {}, expected {dim}",
            coords.len()
        )));
    }
    Ok(RatVec::new(
        coords.iter().map(|c| parse_qq(c)).collect::<Result<_>>()?,
    ))
}

fn fmt_vec(v: &RatVec) -> Vec<String> {
    v.coords.iter().map(fmt_qq).collect()
}

fn parse_frame(cols: &[Vec<String>], rank: usize) -> Result<KMat> {
    if cols.len() != rank {
        return Err(TvbError::Parse(format!(
            "frame has {} vectors, expected {rank}",
            cols.len()
        )));
    }
    let mut parsed: Vec<Vec<RatFunc>> = Vec::new();
    for col in cols {
        if col.len() != rank {
            return Err(TvbError::Parse("frame vector has wrong length".into()));
        }
        parsed.push(col.iter().map(|s| parse_ratfunc(s)).collect::<Result<_>>()?);
    }
    Ok(KMat::from_cols(&parsed))
}

fn fmt_frame(m: &KMat) -> Vec<Vec<String>> {
    (0..m.cols)
        .map(|j| (0..m.rows).map(|i| fmt_ratfunc(&m[(i, j)])).collect())
        .collect()
}

/// The in-memory model of a loaded project.
pub struct Project {
    pub fan: DivisorialFan,
    pub support: Option<SupportMap>,
    pub klyachko: Option<KlyachkoInput>,
}

pub fn from_doc(doc: &ProjectFile) -> Result<Project> {
    if doc.version != "1" {
        return Err(TvbError::Parse(format!(
            "unsupported version {}",
            doc.version
        )));
    }
    let dim = doc.lattice_rank;
    let mut divisors = Vec::new();
    for d in &doc.fan.divisors {
        let tail_gens: Vec<RatVec> = d
            .tail
            .iter()
            .map(|g| parse_vec(g, dim))
            .collect::<Result<_>>()?;
        let tail = Cone::from_generators(dim, &tail_gens)?;
        let mut coefficients = BTreeMap::new();
        for (label, coeff) in &d.coefficients {
            let point = PointP1::parse(label)?;
            let value = match coeff {
                CoefficientDoc::Empty(tag) => {
                    if tag != "empty" {
                        return Err(TvbError::Parse(format!(
                            "coefficient tag must be \"empty\", got {tag:?}"
                        )));
                    }
                    None
                }
                CoefficientDoc::Polyhedron { vertices, rays } => {
                    let vs: Vec<RatVec> = vertices
                        .iter()
                        .map(|c| parse_vec(c, dim))
                        .collect::<Result<_>>()?;
                    let rs: Vec<RatVec> =
                        rays.iter().map(|c| parse_vec(c, dim)).collect::<Result<_>>()?;
                    Some(Polyhedron::from_vertices_rays(dim, &vs, &rs)?)
                }
            };
            coefficients.insert(point, value);
        }
        divisors.push(PPDivisor::new(d.name.clone(), tail, coefficients)?);
    }
    let fan = DivisorialFan::new(dim, divisors);

    let support = match &doc.bundle {
        None => None,
        Some(b) => {
            let mut generic = BTreeMap::new();
            for p in &b.pieces {
                let frame = parse_frame(&p.frame, b.rank)?;
                let characters: Vec<RatVec> = p
                    .characters
                    .iter()
                    .map(|c| parse_vec(c, dim))
                    .collect::<Result<_>>()?;
                generic.insert(p.divisor.clone(), Piece::new(frame, characters)?);
            }
            let mut overrides = BTreeMap::new();
            for o in &b.overrides {
                let point = PointP1::parse(&o.point)?;
                let mut frame = parse_frame(&o.frame, b.rank)?;
                if !o.offsets.is_empty() {
                    if o.offsets.len() != b.rank {
                        return Err(TvbError::Parse("one offset per frame vector".into()));
                    }
                    for (j, off) in o.offsets.iter().enumerate() {
                        let w = RatFunc::uniformizer_pow(&point, *off);
                        for i in 0..frame.rows {
                            frame[(i, j)] = frame[(i, j)].mul(&w);
                        }
                    }
                }
                let characters: Vec<RatVec> = o
                    .characters
                    .iter()
                    .map(|c| parse_vec(c, dim))
                    .collect::<Result<_>>()?;
                overrides.insert(
                    (o.divisor.clone(), point),
                    Piece::new(frame, characters)?,
                );
            }
            Some(SupportMap::new(fan.clone(), b.rank, generic, overrides)?)
        }
    };

    let klyachko = match &doc.klyachko {
        None => None,
        Some(k) => {
            let mut cones = Vec::new();
            let mut all: Vec<Cone> = Vec::new();
            for c in &k.cones {
                let gens: Vec<RatVec> = c
                    .rays
                    .iter()
                    .map(|g| parse_vec(g, k.lattice_rank))
                    .collect::<Result<_>>()?;
                let cone = Cone::from_generators(k.lattice_rank, &gens)?;
                let frame_cols: Vec<RatVec> = c
                    .frame
                    .iter()
                    .map(|col| parse_vec(col, k.rank))
                    .collect::<Result<_>>()?;
                let frame = crate::qq::QMat::from_cols(&frame_cols);
                let characters: Vec<RatVec> = c
                    .characters
                    .iter()
                    .map(|u| parse_vec(u, k.lattice_rank))
                    .collect::<Result<_>>()?;
                all.push(cone.clone());
                cones.push(KlyachkoCone {
                    cone,
                    frame,
                    characters,
                });
            }
            let fan = Fan::from_cones(k.lattice_rank, &all);
            Some(KlyachkoInput {
                dim: k.lattice_rank,
                rank: k.rank,
                fan,
                cones,
                projection: k.projection.clone(),
            })
        }
    };

    Ok(Project {
        fan,
        support,
        klyachko,
    })
}

pub fn to_doc(project: &Project) -> ProjectFile {
    let dim = project.fan.dim;
    let divisors: Vec<DivisorDoc> = project
        .fan
        .divisors
        .iter()
        .map(|d| {
            let mut coefficients = BTreeMap::new();
            for (p, c) in &d.coefficients {
                let doc = match c {
                    None => CoefficientDoc::Empty("empty".into()),
                    Some(poly) => CoefficientDoc::Polyhedron {
                        vertices: poly.vertices.iter().map(fmt_vec).collect(),
                        rays: poly.rays.iter().map(fmt_vec).collect(),
                    },
                };
                coefficients.insert(p.to_string(), doc);
            }
            DivisorDoc {
                name: d.name.clone(),
                tail: d.tail.generators.iter().map(fmt_vec).collect(),
                coefficients,
            }
        })
        .collect();
    let bundle = project.support.as_ref().map(|h| BundleDoc {
        rank: h.rank,
        pieces: h
            .generic
            .iter()
            .map(|(name, piece)| PieceDoc {
                divisor: name.clone(),
                frame: fmt_frame(&piece.frame),
                characters: piece.characters.iter().map(fmt_vec).collect(),
            })
            .collect(),
        overrides: h
            .overrides
            .iter()
            .map(|((name, point), piece)| OverrideDoc {
                divisor: name.clone(),
                point: point.to_string(),
                frame: fmt_frame(&piece.frame),
                characters: piece.characters.iter().map(fmt_vec).collect(),
                offsets: vec![],
            })
            .collect(),
    });
    let klyachko = project.klyachko.as_ref().map(|k| KlyachkoDoc {
        lattice_rank: k.dim,
        rank: k.rank,
        projection: k.projection.clone(),
        cones: k
            .cones
            .iter()
            .map(|c| KlyachkoConeDoc {
                rays: c.cone.generators.iter().map(fmt_vec).collect(),
                frame: (0..c.frame.cols)
                    .map(|j| fmt_vec(&c.frame.col(j)))
                    .collect(),
                characters: c.characters.iter().map(fmt_vec).collect(),
            })
            .collect(),
    });
    let mut curve_points: Vec<String> = project
        .fan
        .explicit_points()
        .iter()
        .map(|p| p.to_string())
        .collect();
    if let Some(h) = &project.support {
        for p in h.explicit_points() {
            let s = p.to_string();
            if !curve_points.contains(&s) {
                curve_points.push(s);
            }
        }
    }
    ProjectFile {
        version: "1".into(),
        lattice_rank: dim,
        curve_points,
        fan: FanDoc { divisors },
        bundle,
        klyachko,
    }
}

pub fn load_str(json: &str) -> Result<Project> {
    let doc: ProjectFile = serde_json::from_str(json)?;
    from_doc(&doc)
}

pub fn save_string(project: &Project) -> Result<String> {
    let doc = to_doc(project);
    Ok(serde_json::to_string_pretty(&doc)?)
}
