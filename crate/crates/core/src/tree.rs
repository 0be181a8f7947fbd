//! Head/label arrays and the reference well-formedness check.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// A (possibly partial during construction) dependency analysis of an
/// `n`-word sentence.
///
/// `heads[i]` is the head of word `i + 1`; position `0` is the artificial
/// root. Labels are kept as strings so that trees from different label
/// inventories can be compared and written without a vocabulary at hand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyTree {
    pub heads: Vec<usize>,
    pub labels: Vec<String>,
}

impl DependencyTree {
    pub fn new(heads: Vec<usize>, labels: Vec<String>) -> Self {
        DependencyTree { heads, labels }
    }

    /// Unlabeled tree; every label is the empty string.
    pub fn unlabeled(heads: Vec<usize>) -> Self {
        let labels = vec![String::new(); heads.len()];
        DependencyTree { heads, labels }
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    /// Head of the 1-based word `dep`.
    pub fn head(&self, dep: usize) -> usize {
        self.heads[dep - 1]
    }

    pub fn is_valid(&self) -> bool {
        validate_tree(&self.heads)
    }

    /// Number of words attached directly to the root.
    pub fn root_count(&self) -> usize {
        self.heads.iter().filter(|&&h| h == 0).count()
    }

    /// Valid and exactly one word attached to the root.
    pub fn is_single_rooted(&self) -> bool {
        self.is_valid() && self.root_count() == 1
    }

    /// Dependents of each node `0..=n`, in increasing order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        children_of(&self.heads)
    }

    /// True if some pair of arcs crosses when drawn above the sentence.
    pub fn is_projective(&self) -> bool {
        let arcs: Vec<(usize, usize)> = self
            .heads
            .iter()
            .enumerate()
            .map(|(i, &h)| if h < i + 1 { (h, i + 1) } else { (i + 1, h) })
            .collect();
        for (a, &(l1, r1)) in arcs.iter().enumerate() {
            for &(l2, r2) in &arcs[a + 1..] {
                if (l1 < l2 && l2 < r1 && r1 < r2) || (l2 < l1 && l1 < r2 && r2 < r1) {
                    return false;
                }
            }
        }
        true
    }
}

pub(crate) fn children_of(heads: &[usize]) -> Vec<Vec<usize>> {
    let mut children = vec![Vec::new(); heads.len() + 1];
    for (i, &h) in heads.iter().enumerate() {
        if h <= heads.len() {
            children[h].push(i + 1);
        }
    }
    children
}

/// Checks that `heads` describes a forest under root `0`: every head is in
/// range, no word heads itself, and every word reaches the root.
///
/// Works by a depth-first traversal from the root over the child lists and
/// does not share any code with the union-find tracker.
pub fn validate_tree(heads: &[usize]) -> bool {
    let n = heads.len();
    if heads.iter().enumerate().any(|(i, &h)| h > n || h == i + 1) {
        return false;
    }
    let children = children_of(heads);
    let mut seen = vec![false; n + 1];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut reached = 0;
    while let Some(node) = stack.pop() {
        for &child in &children[node] {
            if !seen[child] {
                seen[child] = true;
                reached += 1;
                stack.push(child);
            }
        }
    }
    reached == n
}

/// Returns the words on one directed cycle of `heads`, if any, in the order
/// obtained by following heads from the first word found on it.
///
/// Out-of-range heads are treated as attachments to the root.
pub fn find_cycle(heads: &[usize]) -> Option<Vec<usize>> {
    let n = heads.len();
    // 0 = unvisited, 1 = on current walk, 2 = done
    let mut color = vec![0u8; n + 1];
    color[0] = 2;
    for start in 1..=n {
        if color[start] != 0 {
            continue;
        }
        let mut walk = Vec::new();
        let mut node = start;
        while color[node] == 0 {
            color[node] = 1;
            walk.push(node);
            let h = heads[node - 1];
            node = if h > n { 0 } else { h };
        }
        if color[node] == 1 {
            let pos = walk.iter().position(|&w| w == node).unwrap_or(0);
            return Some(walk[pos..].to_vec());
        }
        for w in walk {
            color[w] = 2;
        }
    }
    None
}
