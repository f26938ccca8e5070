//! Landscape I/O: file ingestion, truncation, lumping into disjoint eigenvector
//! supports, disconnectivity graphs, and table exports.

mod dendrogram;
mod export;
mod lump;
mod native;
mod pathsample;

pub use dendrogram::{dendrogram, Dendrogram, DendrogramNode, LeafOrdering};
pub use export::{
    write_cycle_size_histogram, write_delta_csv, write_dendrogram_dot, write_dendrogram_json,
    write_lumped_csv, write_set_size_histogram, write_sets_txt, write_sinks_csv, write_vk_csv,
};
pub use lump::{lump, LumpedNetwork, LumpedSet};
pub use native::{read_native, read_native_from, write_native, write_native_to, NativeNetwork};
pub use pathsample::{
    read_pathsample, read_pathsample_from, ColumnMap, PathsampleOptions, PathsampleStats,
};

use crate::network::{IdRemap, Network, NetworkError, StateId};
use crate::spectrum::SpectrumError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("leaf ordering unavailable: {0}")]
    OrderingUnavailable(String),
    #[error("lump reference {0} must be the first sink of the spectrum run")]
    BadReference(StateId),
}

/// Remove all edges with saddle above `cap` and return the connected component of
/// `anchor` (possibly a single state) with its id remap.
pub fn truncate(net: &Network, cap: f64, anchor: StateId) -> Result<(Network, IdRemap), IoError> {
    net.check_state(anchor)?;
    let states = net.states().to_vec();
    let edges = net
        .edges()
        .iter()
        .filter(|e| e.saddle <= cap)
        .copied()
        .collect();
    let data = crate::network::NetworkData::new(states, edges)?;
    Ok(data.connected_component(anchor)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::three_chain;

    #[test]
    fn truncate_cases() {
        let net = three_chain();
        // cap below the (2,3) saddle: chain {1,2} remains
        let (cut, remap) = truncate(&net, 4.0, StateId(1)).unwrap();
        assert_eq!(cut.n(), 2);
        assert_eq!(cut.m(), 1);
        assert_eq!(remap.new_to_old, vec![StateId(1), StateId(2)]);

        // infinite cap: identity
        let (same, remap) = truncate(&net, f64::INFINITY, StateId(2)).unwrap();
        assert_eq!(same.n(), 3);
        assert!(remap.is_identity());

        // anchor isolated: singleton
        let (single, _) = truncate(&net, 2.5, StateId(3)).unwrap();
        assert_eq!(single.n(), 1);
    }

    #[test]
    fn truncate_then_spectrum_equals_direct_build() {
        let net = crate::fixtures::seven_well();
        let (cut, _) = truncate(&net, 6.6, StateId(1)).unwrap();
        let direct = Network::new(cut.states().to_vec(), cut.edges().to_vec()).unwrap();
        let opts = crate::spectrum::SpectrumOptions::capturing();
        let a = crate::spectrum::run(&cut, &opts).unwrap();
        let b = crate::spectrum::run(&direct, &opts).unwrap();
        assert_eq!(a.sink_sequence(), b.sink_sequence());
        assert_eq!(a.deltas(), b.deltas());
    }
}
