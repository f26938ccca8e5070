//! Lumping: select the maximal disjoint eigenvector supports S_k separated from the
//! reference state by a cut saddle below a cap, producing the factored view of the
//! network (reference singleton + selected super-states).

use super::IoError;
use crate::network::{Network, StateId};
use crate::spectrum::SpectrumResult;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct LumpedSet {
    /// Record index k of the selected S_k.
    pub k: usize,
    pub sink: StateId,
    /// Saddle potential at the cut edge (the barrier toward the rest of the network).
    pub cut_saddle: f64,
    pub delta: f64,
    pub c_size: usize,
    pub s_size: usize,
    pub states: Vec<StateId>,
}

#[derive(Clone, Debug)]
pub struct LumpedNetwork {
    pub reference: StateId,
    /// Selected sets ordered by k.
    pub sets: Vec<LumpedSet>,
    /// States belonging to neither the reference nor any selected set.
    pub unassigned: usize,
    /// Minimal direct connecting saddle between super-states; indices are 0 for the
    /// reference singleton and i+1 for `sets[i]`.
    pub inter_set_saddles: Vec<(usize, usize, f64)>,
}

/// Select the maximal disjoint S_k with cut saddle strictly below `barrier_cap`
/// (absolute energy; pass `V_reference + height` for a relative cap). Requires a full
/// run and `reference` equal to the run's first sink.
pub fn lump(
    res: &SpectrumResult,
    net: &Network,
    barrier_cap: f64,
    reference: StateId,
) -> Result<LumpedNetwork, IoError> {
    if !res.is_complete() {
        return Err(crate::spectrum::SpectrumError::IncompleteRun.into());
    }
    if reference != res.first_sink() {
        return Err(IoError::BadReference(reference));
    }

    let records = res.records();
    let qualifies: Vec<bool> = records
        .iter()
        .map(|r| net.saddle(r.cut_edge) < barrier_cap)
        .collect();
    // A record is selected when it qualifies and no ancestor in the laminar hierarchy
    // does; parents always have smaller indices, so one forward pass suffices.
    let mut covered = vec![false; records.len()];
    for (i, r) in records.iter().enumerate() {
        if let Some(p) = r.parent {
            covered[i] = covered[p] || qualifies[p];
        }
    }
    let selected: Vec<usize> = (0..records.len())
        .filter(|&i| qualifies[i] && !covered[i])
        .collect();

    // nearest selected ancestor-or-self per record
    let mut owner_set: Vec<Option<usize>> = vec![None; records.len()];
    let mut set_index = vec![usize::MAX; records.len()];
    for (si, &rec) in selected.iter().enumerate() {
        set_index[rec] = si;
    }
    for (i, r) in records.iter().enumerate() {
        owner_set[i] = if set_index[i] != usize::MAX {
            Some(set_index[i])
        } else {
            r.parent.and_then(|p| owner_set[p])
        };
    }

    // membership per state: 0 = reference, si + 1 = sets[si], MAX = unassigned
    let mut membership = vec![usize::MAX; net.n()];
    membership[reference.index()] = 0;
    let mut members: Vec<Vec<StateId>> = vec![Vec::new(); selected.len()];
    let mut unassigned = 0usize;
    for (i, slot) in membership.iter_mut().enumerate() {
        let s = StateId::from_index(i);
        if s == reference {
            continue;
        }
        match res.final_owner_record(s).and_then(|r| owner_set[r]) {
            Some(si) => {
                *slot = si + 1;
                members[si].push(s);
            }
            None => unassigned += 1,
        }
    }

    let sets: Vec<LumpedSet> = selected
        .iter()
        .zip(members)
        .map(|(&rec_idx, mut states)| {
            let r = &records[rec_idx];
            states.sort_unstable();
            debug_assert_eq!(states.len(), r.s_size);
            LumpedSet {
                k: r.k,
                sink: r.sink,
                cut_saddle: net.saddle(r.cut_edge),
                delta: r.delta,
                c_size: r.c_size,
                s_size: r.s_size,
                states,
            }
        })
        .collect();

    let mut saddles: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in net.edges() {
        let (ma, mb) = (membership[e.a.index()], membership[e.b.index()]);
        if ma == usize::MAX || mb == usize::MAX || ma == mb {
            continue;
        }
        let key = (ma.min(mb), ma.max(mb));
        saddles
            .entry(key)
            .and_modify(|v| *v = v.min(e.saddle))
            .or_insert(e.saddle);
    }
    let inter_set_saddles = saddles.into_iter().map(|((a, b), v)| (a, b, v)).collect();

    Ok(LumpedNetwork {
        reference,
        sets,
        unassigned,
        inter_set_saddles,
    })
}
