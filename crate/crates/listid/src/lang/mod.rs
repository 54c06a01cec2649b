//! Languages, collections, enumerations and valid distributions.

pub mod collection;
pub mod distribution;
pub mod enumeration;
pub mod language;
pub mod rng;
pub mod spiral;

pub use collection::{Collection, CollectionKind};
pub use distribution::ValidDistribution;
pub use enumeration::Enumeration;
pub use language::{is_proper_subset, is_subset, Element, Language};
pub use rng::RngState;
