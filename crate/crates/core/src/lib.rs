//! Exhaustive verification of non-singular zeros of reduced quintic forms
//! over small finite fields, with a Hensel lifter to the p-adic integers.

pub mod assemble;
mod cover;
pub mod forms;
pub mod gf;
pub mod kernel;
pub mod lift;
pub mod report;
pub mod search;
pub mod shapes;

pub use forms::{Form, FormError, Monomial, ProjectivePoint, ZeroCensus};
pub use gf::{Fe, FieldSpec, GfError};
pub use shapes::{ShapeTemplate, Slot, SlotStatus, Tournament, TripleShape};
