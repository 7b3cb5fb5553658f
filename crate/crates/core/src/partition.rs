use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::StateId;

/// An equivalence relation on a finite state set, stored as its blocks.
///
/// Blocks are sorted internally and ordered by their least member, so two
/// partitions of the same relation compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<StateId>>,
}

impl Partition {
    /// Validates that `blocks` are nonempty, pairwise disjoint and cover `states`.
    pub fn new(states: &[StateId], blocks: Vec<Vec<StateId>>) -> Result<Self> {
        let universe: BTreeSet<&StateId> = states.iter().collect();
        let mut seen = BTreeSet::new();
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for s in block {
                if !universe.contains(s) {
                    return Err(Error::InvalidPartition(format!("unknown state `{s}`")));
                }
                if !seen.insert(s.clone()) {
                    return Err(Error::InvalidPartition(format!(
                        "state `{s}` occurs in two blocks"
                    )));
                }
            }
        }
        if let Some(missing) = universe.iter().find(|s| !seen.contains(**s)) {
            return Err(Error::InvalidPartition(format!(
                "state `{missing}` is not covered"
            )));
        }
        Ok(Self::normalized(blocks))
    }

    pub(crate) fn normalized(mut blocks: Vec<Vec<StateId>>) -> Self {
        for b in &mut blocks {
            b.sort();
        }
        blocks.sort_by(|a, b| a[0].cmp(&b[0]));
        Partition { blocks }
    }

    /// One block per state.
    pub fn discrete(states: &[StateId]) -> Self {
        Self::normalized(states.iter().map(|s| vec![s.clone()]).collect())
    }

    /// Everything in one block (no blocks at all for an empty state set).
    pub fn single_block(states: &[StateId]) -> Self {
        if states.is_empty() {
            return Partition { blocks: Vec::new() };
        }
        Self::normalized(vec![states.to_vec()])
    }

    /// Groups states by the value of `key`.
    pub fn from_key<K: Ord, F: FnMut(&StateId) -> K>(states: &[StateId], mut key: F) -> Self {
        let mut groups: BTreeMap<K, Vec<StateId>> = BTreeMap::new();
        for s in states {
            groups.entry(key(s)).or_default().push(s.clone());
        }
        Self::normalized(groups.into_values().collect())
    }

    pub fn blocks(&self) -> &[Vec<StateId>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Index of the block containing `state`.
    pub fn block_of(&self, state: &str) -> Option<usize> {
        self.blocks
            .iter()
            .position(|b| b.binary_search_by(|s| s.as_str().cmp(state)).is_ok())
    }

    /// Map from each state to the index of its block.
    pub fn block_index(&self) -> BTreeMap<StateId, usize> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.iter().map(move |s| (s.clone(), i)))
            .collect()
    }

    pub fn same_block(&self, x: &str, y: &str) -> bool {
        matches!((self.block_of(x), self.block_of(y)), (Some(a), Some(b)) if a == b)
    }

    /// Least member of each block, used as the block's name.
    pub fn representative(&self, block: usize) -> &StateId {
        &self.blocks[block][0]
    }

    /// True if every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.blocks.iter().all(|b| {
            let target = other.block_of(b[0].as_str());
            target.is_some() && b.iter().all(|s| other.block_of(s.as_str()) == target)
        })
    }

    /// Serializes as a JSON list of lists of state ids.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.blocks).expect("strings serialize")
    }

    pub fn from_json(states: &[StateId], text: &str) -> Result<Self> {
        let blocks: Vec<Vec<StateId>> = serde_json::from_str(text)?;
        Self::new(states, blocks)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("{")?;
            for (j, s) in b.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{s}")?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}
