pub mod alphabet;
pub mod canon;
pub mod dot;
pub mod expr;
pub mod json;
pub mod setsys;
pub mod ts;
pub mod validate;

pub use alphabet::RankedAlphabet;
pub use setsys::{Adjacency, Edge, Ranked, SetSystem, Sym, Target, Vertex, HOLE};
pub use ts::TransitionSystem;

/// A set-system whose vertices are labelled by set-systems.
pub type Nested<L> = SetSystem<SetSystem<L>>;
