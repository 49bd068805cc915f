use crate::crypto::{sha256, Hash32};

/// Binary merkle root over transaction digests.
///
/// Parent nodes are `H(left || right)`; a level with an odd number of nodes
/// pairs its last node with itself. An empty list has the all-zero root.
pub fn merkle_root(leaves: &[Hash32]) -> Hash32 {
    if leaves.is_empty() {
        return Hash32::ZERO;
    }
    let mut level = leaves.to_vec();
    loop {
        level = level
            .chunks(2)
            .map(|pair| {
                let left = &pair[0];
                let right = pair.get(1).unwrap_or(left);
                sha256(&[&left.0, &right.0])
            })
            .collect();
        if level.len() == 1 {
            return level[0];
        }
    }
}
