//! The hierarchical epsilon-net: radius schedules, the online tree and the
//! routines that map an instance to its root-to-leaf path.

mod audit;
mod schedule;
mod tree;

pub use audit::{covering_audit, AuditReport, Visit};
pub use schedule::{Mode, Profile, RadiusSchedule, Tau};
pub use tree::{Node, NodeId, NodeIdx, Path, Tree};
