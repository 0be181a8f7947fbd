//! Random tree generation for tests and synthetic data.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use rand::Rng;

/// Uniformly random valid head array over `n` words.
///
/// Decodes a random Prüfer sequence into a labelled tree on `{0, ..., n}`
/// and orients it away from node `0`. Every one of the `(n + 1)^(n - 1)`
/// valid head arrays is equally likely.
pub fn uniform_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let nodes = n + 1;
    let mut adjacency = vec![Vec::new(); nodes];
    if nodes == 2 {
        adjacency[0].push(1);
        adjacency[1].push(0);
    } else {
        let code: Vec<usize> = (0..nodes - 2).map(|_| rng.gen_range(0..nodes)).collect();
        let mut degree = vec![1usize; nodes];
        for &c in &code {
            degree[c] += 1;
        }
        let mut leaves: BinaryHeap<Reverse<usize>> =
            (0..nodes).filter(|&v| degree[v] == 1).map(Reverse).collect();
        for &c in &code {
            let Reverse(leaf) = leaves.pop().expect("a Prüfer code always leaves a leaf");
            adjacency[leaf].push(c);
            adjacency[c].push(leaf);
            degree[c] -= 1;
            if degree[c] == 1 {
                leaves.push(Reverse(c));
            }
        }
        let Reverse(u) = leaves.pop().expect("two leaves remain");
        let Reverse(v) = leaves.pop().expect("two leaves remain");
        adjacency[u].push(v);
        adjacency[v].push(u);
    }
    let mut heads = vec![0usize; n];
    let mut seen = vec![false; nodes];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(node) = stack.pop() {
        for &next in &adjacency[node] {
            if !seen[next] {
                seen[next] = true;
                heads[next - 1] = node;
                stack.push(next);
            }
        }
    }
    heads
}

/// Random head array that may contain cycles but no self-loops.
pub fn random_heads<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    (1..=n)
        .map(|dep| loop {
            let h = rng.gen_range(0..=n);
            if h != dep {
                break h;
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::validate_tree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    #[test]
    fn always_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..40 {
            for _ in 0..20 {
                assert!(validate_tree(&uniform_tree(n, &mut rng)));
            }
        }
    }

    #[test]
    fn roughly_uniform_for_three_words() {
        // 4^2 = 16 trees, 16000 draws: each count should be near 1000
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for _ in 0..16000 {
            *counts.entry(uniform_tree(3, &mut rng)).or_default() += 1;
        }
        assert_eq!(counts.len(), 16);
        for (tree, c) in counts {
            assert!((850..1150).contains(&c), "{:?} drawn {} times", tree, c);
        }
    }
}
