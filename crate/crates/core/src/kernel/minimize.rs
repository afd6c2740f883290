//! Strong bisimulation minimization by signature-based partition refinement.

use std::collections::HashMap;

use super::lts::{Lts, LtsBuilder};

/// Block index of every state under the coarsest strong bisimulation.
///
/// Blocks are numbered in order of their smallest member, so the partition is
/// canonical for a given LTS.
pub fn bisimulation_partition(lts: &Lts) -> Vec<usize> {
    let n = lts.num_states();
    let mut block = vec![0usize; n];
    let mut num_blocks = 1;
    loop {
        let mut ids: HashMap<(usize, Vec<(usize, usize)>), usize> = HashMap::new();
        let mut next = Vec::with_capacity(n);
        for s in 0..n {
            let mut sig: Vec<(usize, usize)> =
                lts.outgoing(s).iter().map(|&(_, l, t)| (l, block[t])).collect();
            sig.sort_unstable();
            sig.dedup();
            let fresh = ids.len();
            next.push(*ids.entry((block[s], sig)).or_insert(fresh));
        }
        let refined = ids.len();
        block = next;
        // each round only splits blocks, so an unchanged count is the fixpoint
        if refined == num_blocks {
            return block;
        }
        num_blocks = refined;
    }
}

/// Quotient of `lts` by its coarsest strong bisimulation.
pub fn minimize(lts: &Lts) -> Lts {
    let block = bisimulation_partition(lts);
    let num_blocks = block.iter().copied().max().map_or(0, |m| m + 1);
    let mut b = LtsBuilder::new();
    for &(s, l, t) in lts.raw_transitions() {
        b.add(block[s], lts.label(l), block[t]);
    }
    b.build(num_blocks, block[lts.initial()], None)
        .expect("blocks cover all states")
}
