//! Qualitative spatial reasoning over oriented points.
//!
//! The crate implements four related qualitative calculi over points in the
//! plane — oriented-point relative direction (`opra`), its elevated variant
//! with qualitative distance classes (`eopra`), and absolute-frame star
//! variants (`star`, `estar`) — together with:
//!
//! - relation computation from metric configurations ([`relations::relate`]),
//! - converse operations and full relation enumeration,
//! - composition-table generation by condensed semantics
//!   ([`compose::CompositionTable`]) with Monte-Carlo soundness verification,
//! - algebraic closure (path consistency) over constraint networks
//!   ([`csp::algebraic_closure`]),
//! - plain-text formats for relations, tables, and networks.

pub mod compose;
pub mod csp;
pub mod eopra;
pub mod error;
pub mod geometry;
pub mod opra;
pub mod relations;
pub mod star;

pub use compose::{CompositionTable, SamplingPlan};
pub use csp::{algebraic_closure, parse_network, serialize_network, ConstraintNetwork};
pub use error::{QsrError, Result};
pub use geometry::{EOPoint, Point, TolerancePolicy};
pub use relations::{BaseRelation, CalculusId, RelationSet};
