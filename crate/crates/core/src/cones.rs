//! Dependency cones over modules, read off the `DependsOn` index.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::abox::{FactIndex, RelName};
use crate::uri::MmtUri;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConeError {
    #[error("unknown module {0}")]
    UnknownModule(MmtUri),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Modules `M` depends on.
    Backward,
    /// Modules depending on `M`.
    Forward,
}

/// `M` plus everything it needs (transitively or in one step).
pub fn backward_cone(index: &FactIndex, m: &MmtUri, transitive: bool) -> Result<BTreeSet<MmtUri>, ConeError> {
    cone(index, m, Direction::Backward, transitive)
}

/// `M` plus everything that needs it.
pub fn forward_cone(index: &FactIndex, m: &MmtUri, transitive: bool) -> Result<BTreeSet<MmtUri>, ConeError> {
    cone(index, m, Direction::Forward, transitive)
}

pub fn cone(index: &FactIndex, m: &MmtUri, dir: Direction, transitive: bool) -> Result<BTreeSet<MmtUri>, ConeError> {
    if !index.is_module(m) {
        return Err(ConeError::UnknownModule(m.clone()));
    }
    let step = |u: &MmtUri| match dir {
        Direction::Backward => index.objects(RelName::DependsOn, u),
        Direction::Forward => index.subjects(RelName::DependsOn, u),
    };
    let mut out = BTreeSet::from([m.clone()]);
    let mut frontier = vec![m.clone()];
    while let Some(u) = frontier.pop() {
        for n in step(&u) {
            if out.insert(n.clone()) && transitive {
                frontier.push(n);
            }
        }
    }
    Ok(out)
}
