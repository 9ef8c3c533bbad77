//! Finite frames, non-archimedean bases, branch spaces of trees and exact
//! p-adic balls, with exhaustive checkers for their structural laws.

pub mod branch;
pub mod corpus;
pub mod frame;
pub mod mask;
pub mod nonarch;
pub mod nuclei;
pub mod order;
pub mod padic;
pub mod tree;
pub mod verify;

pub use branch::{BranchFrames, BranchSet};
pub use frame::points::Point;
pub use frame::{FiniteFrame, FrameError, SetFrame};
pub use mask::Mask;
pub use nonarch::{NonArchBase, NonArchError, TreeBase};
pub use nuclei::{ClosureMap, NucleusError};
pub use order::{EnumerationBound, OrderError, Poset};
pub use padic::{PAdicBall, PAdicNumber, PadicError};
pub use tree::{Tree, TreeError};
pub use verify::{Record, Report, Status};
