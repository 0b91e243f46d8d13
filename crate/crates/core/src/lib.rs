//! Formal concept analysis over document metadata.

pub mod bitset;
pub mod browse;
pub mod classify;
pub mod composition;
pub mod context;
pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod lattice;
pub mod layout;
pub mod scales;

pub use bitset::BitSet;
pub use context::FormalContext;
pub use error::{Error, Result};
pub use lattice::{all_concepts, Concept, ConceptLattice};
pub use composition::{apposition, nest, nest_many, restrict_attributes, NestedDiagram};
pub use scales::{HierarchyLevel, RawValue, Scale, ScaleKind};
