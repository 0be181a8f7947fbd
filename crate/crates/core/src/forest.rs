//! Incremental acyclicity tracking for a partial parse.
//!
//! Nodes `0..=n` start as singletons. Every attached arc merges the
//! components of its two ends. When arcs are only ever added to headless
//! dependents (as in left-to-right parsing), the components are exactly the
//! weakly connected trees of the partial graph, each rooted at its unique
//! headless node. Adding `head -> dep` to a headless `dep` closes a directed
//! cycle iff `head` already lies in `dep`'s tree, i.e. iff both are in the
//! same component.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ForestError {
    Empty,
    OutOfRange { node: usize, size: usize },
    SelfLoop(usize),
    WouldCycle { head: usize, dep: usize },
}

impl fmt::Display for ForestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForestError::Empty => write!(f, "forest needs at least one word"),
            ForestError::OutOfRange { node, size } => {
                write!(f, "node {} outside forest of {} nodes", node, size)
            }
            ForestError::SelfLoop(n) => write!(f, "node {} cannot head itself", n),
            ForestError::WouldCycle { head, dep } => {
                write!(f, "arc {} -> {} closes a cycle", head, dep)
            }
        }
    }
}

/// Disjoint-set forest with path compression and union by rank.
#[derive(Clone, Debug)]
pub struct DisjointForest {
    parent: Vec<usize>,
    rank: Vec<u8>,
    chase_steps: u64,
}

impl DisjointForest {
    /// Forest over the root and `n` words.
    pub fn new(n: usize) -> Result<Self, ForestError> {
        if n == 0 {
            return Err(ForestError::Empty);
        }
        Ok(DisjointForest {
            parent: (0..=n).collect(),
            rank: alloc::vec![0; n + 1],
            chase_steps: 0,
        })
    }

    /// Number of nodes, root included.
    pub fn size(&self) -> usize {
        self.parent.len()
    }

    /// Total parent links followed by `find` so far (compression passes
    /// included); used to check the amortized bound.
    pub fn chase_steps(&self) -> u64 {
        self.chase_steps
    }

    pub fn find(&mut self, node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
            self.chase_steps += 1;
        }
        let mut cur = node;
        while self.parent[cur] != root && cur != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
            self.chase_steps += 1;
        }
        root
    }

    /// Representative lookup without compression.
    pub fn find_const(&self, mut node: usize) -> usize {
        while self.parent[node] != node {
            node = self.parent[node];
        }
        node
    }

    pub fn same_component(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Whether attaching the currently headless `dep` under `head` would
    /// close a directed cycle.
    pub fn would_cycle(&mut self, head: usize, dep: usize) -> bool {
        self.same_component(head, dep)
    }

    fn check(&self, node: usize) -> Result<(), ForestError> {
        if node < self.parent.len() {
            Ok(())
        } else {
            Err(ForestError::OutOfRange {
                node,
                size: self.parent.len(),
            })
        }
    }

    /// Records `head -> dep`, merging the two components.
    pub fn record_attach(&mut self, head: usize, dep: usize) -> Result<(), ForestError> {
        self.check(head)?;
        self.check(dep)?;
        if head == dep {
            return Err(ForestError::SelfLoop(dep));
        }
        let a = self.find(head);
        let b = self.find(dep);
        if a == b {
            return Err(ForestError::WouldCycle { head, dep });
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        match self.rank[lo].cmp(&self.rank[hi]) {
            Ordering::Greater => self.parent[hi] = lo,
            Ordering::Less => self.parent[lo] = hi,
            Ordering::Equal => {
                self.parent[hi] = lo;
                self.rank[lo] += 1;
            }
        }
        Ok(())
    }

    /// Number of distinct components.
    pub fn component_count(&self) -> usize {
        (0..self.parent.len()).filter(|&i| self.parent[i] == i).count()
    }
}
