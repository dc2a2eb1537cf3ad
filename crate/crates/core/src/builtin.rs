//! Networks shipped with the crate.

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeChangeSet, Network, NodePair};
use crate::matpower::{dc_laplacian_with, parse_case, DcNetwork, NegativeSusceptance};

pub const CASE57: &str = include_str!("../data/case57.m");
pub const CASE118: &str = include_str!("../data/case118.m");
pub const CASE145: &str = include_str!("../data/case145.m");

pub const BUILTIN_NAMES: [&str; 4] = ["synthetic8", "ieee57", "ieee118", "ieee145"];

/// Eight-node ring with four chords, unit weights.
pub fn synthetic8() -> Network {
    let pairs = [
        (1, 2),
        (2, 3),
        (3, 4),
        (4, 5),
        (5, 6),
        (6, 7),
        (7, 8),
        (8, 1),
        (1, 4),
        (5, 7),
        (2, 6),
        (3, 8),
    ];
    let edges = pairs.iter().map(|&(a, b)| Edge::new(a - 1, b - 1, 1.0)).collect();
    Network::new(8, edges).expect("synthetic8 is valid")
}

/// Lines (2,3), (4,1) and (7,5) removed.
pub fn synthetic8_changes() -> EdgeChangeSet {
    EdgeChangeSet::removals([(2, 3), (4, 1), (7, 5)].map(|(a, b)| NodePair::new(a - 1, b - 1)))
}

pub fn ieee_case(name: &str) -> Result<DcNetwork> {
    let (text, policy) = match name {
        "ieee57" => (CASE57, NegativeSusceptance::Reject),
        "ieee118" => (CASE118, NegativeSusceptance::Reject),
        "ieee145" => (CASE145, NegativeSusceptance::Magnitude),
        _ => return Err(Error::InvalidArgument(format!("unknown case `{name}`"))),
    };
    Ok(dc_laplacian_with(&parse_case(text)?, policy)?.0)
}

pub fn builtin(name: &str) -> Result<Network> {
    match name {
        "synthetic8" => Ok(synthetic8()),
        _ => ieee_case(name).map(|dc| dc.network).map_err(|e| match e {
            Error::InvalidArgument(_) => Error::InvalidArgument(format!(
                "unknown network `{name}`; builtins are {}",
                BUILTIN_NAMES.join(", ")
            )),
            e => e,
        }),
    }
}
