//! Exact combinatorial models of torus-equivariant vector bundles on
//! complexity-one T-varieties: divisorial fans on the projective line,
//! building-valued support maps, their validation, equivariant splitting,
//! and graded global sections. All arithmetic is exact over Q and Q(t);
//! there are no tolerances anywhere.
//!
//! The quickest road in is a toric downgrade: describe a toric bundle on a
//! complete fan, pick a corank-one projection, and slice.
//!
//! ```
//! use tvb_core::apps::klyachko::{line_bundle_input, toric_downgrade};
//! use tvb_core::apps::sections::{global_sections, weight_box};
//! use tvb_core::polyhedral::{Cone, Fan};
//! use tvb_core::qq::RatVec;
//!
//! // The product of two projective lines, as a complete fan in the plane.
//! let rays = [[1, 0], [0, 1], [-1, 0], [0, -1]];
//! let cones: Vec<Cone> = (0..4)
//!     .map(|i| {
//!         Cone::from_generators(
//!             2,
//!             &[
//!                 RatVec::from_ints(&rays[i]),
//!                 RatVec::from_ints(&rays[(i + 1) % 4]),
//!             ],
//!         )
//!         .unwrap()
//!     })
//!     .collect();
//! let fan = Fan::from_cones(2, &cones);
//!
//! // O(1,1), downgraded along the second coordinate.
//! let bundle = line_bundle_input(
//!     &fan,
//!     &[(RatVec::from_ints(&[-1, 0]), 1), (RatVec::from_ints(&[0, -1]), 1)],
//!     &[0, 1],
//! )
//! .unwrap();
//! let dg = toric_downgrade(&bundle).unwrap();
//! assert!(dg.support.validate().is_valid());
//!
//! let total: usize = weight_box(&dg.support)
//!     .iter()
//!     .map(|u| global_sections(&dg.support, u).unwrap().dim())
//!     .sum();
//! assert_eq!(total, 4);
//! ```

pub mod building;
pub mod curve;
pub mod divfan;
pub mod error;
pub mod kmatrix;
pub mod polyhedral;
pub mod project;
pub mod qq;
pub mod render;

pub mod apps;
pub mod support;

pub use error::{Result, TvbError};
