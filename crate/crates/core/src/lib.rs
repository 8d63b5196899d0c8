//! Exact enumeration and invariants of Bazaikin spaces.
//!
//! A Bazaikin space is a 13-dimensional biquotient determined by six odd
//! integers summing to zero. This crate canonicalizes such tuples, decides
//! whether they define a manifold and whether it carries positive curvature,
//! computes the invariants `s`, `lk`, `p1`, `p2`, enumerates all spaces
//! below a bound, and finds collections of spaces sharing invariants.

pub mod admissibility;
pub mod collide;
pub mod enumerate;
pub mod error;
pub mod invariants;
pub mod records;
pub mod stats;
pub mod tuples;

pub use admissibility::{AdmissibilityFlags, CurvatureBase, Manifold, Orientation, Split};
pub use collide::{CollisionGroup, CollisionKeySpec, CollisionReport, InvariantTarget, KeyComponent};
pub use enumerate::{EnumConfig, ManifoldRecord, Mode, Shard};
pub use error::{Error, Result};
pub use invariants::{InvariantRecord, Mod3Class, SymmetricProfile};
pub use stats::StatsSummary;
pub use tuples::{BazaikinPrimeTuple, Presentation, QTuple, RawTuple5, RawTuple6};
