//! Top-down stack-pointer baseline.
//!
//! With word `i` on top of the stack, pointing at a buffered word `p`
//! performs Shift-Attach-p (arc `i -> p`, `p` pushed); pointing at `i`
//! itself performs Reduce. The parse is complete once the buffer is empty
//! and a single word remains above the root: the pop that would follow is
//! forced, so it is not counted. Every sentence of `n` words therefore
//! takes `n` attachments and `n - 1` reductions.

use alloc::vec;
use alloc::vec::Vec;

use crate::transition::{TransitionError, TransitionState};
use crate::tree::{children_of, validate_tree};

#[derive(Clone, Debug)]
pub struct TopDownState {
    stack: Vec<usize>,
    in_buffer: Vec<bool>,
    buffered: usize,
    heads: Vec<Option<usize>>,
    step_count: usize,
}

impl TopDownState {
    pub fn new(n: usize) -> Result<Self, TransitionError> {
        if n == 0 {
            return Err(TransitionError::EmptySentence);
        }
        let mut in_buffer = vec![true; n + 1];
        in_buffer[0] = false;
        Ok(TopDownState {
            stack: vec![0],
            in_buffer,
            buffered: n,
            heads: vec![None; n],
            step_count: 0,
        })
    }

    pub fn stack(&self) -> &[usize] {
        &self.stack
    }

    pub fn top(&self) -> usize {
        *self.stack.last().unwrap_or(&0)
    }

    pub fn in_buffer(&self, word: usize) -> bool {
        self.in_buffer.get(word).copied().unwrap_or(false)
    }

    /// Buffered words in increasing order.
    pub fn buffer(&self) -> Vec<usize> {
        (1..self.in_buffer.len()).filter(|&w| self.in_buffer[w]).collect()
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    /// Buffered words plus the stack top (Reduce). The root is never
    /// reducible: the parse ends before it would be.
    pub fn legal_targets(&self) -> Vec<usize> {
        if self.is_terminal() {
            return Vec::new();
        }
        let top = self.top();
        let mut targets = self.buffer();
        if top != 0 {
            let at = targets.partition_point(|&w| w < top);
            targets.insert(at, top);
        }
        targets
    }

    pub fn apply_pointer(&mut self, target: usize) -> Result<(), TransitionError> {
        if self.is_terminal() {
            return Err(TransitionError::Terminal);
        }
        let n = self.heads.len();
        if target > n {
            return Err(TransitionError::OutOfRange { target, len: n });
        }
        let top = self.top();
        if target == top {
            if top == 0 {
                return Err(TransitionError::RootReduce);
            }
            self.stack.pop();
        } else if self.in_buffer[target] {
            self.in_buffer[target] = false;
            self.buffered -= 1;
            self.heads[target - 1] = Some(top);
            self.stack.push(target);
        } else {
            return Err(TransitionError::NotInBuffer { target });
        }
        self.step_count += 1;
        Ok(())
    }
}

impl TransitionState for TopDownState {
    fn len(&self) -> usize {
        self.heads.len()
    }

    fn is_terminal(&self) -> bool {
        self.buffered == 0 && self.stack.len() <= 2
    }

    fn decoder_position(&self) -> usize {
        self.top()
    }

    fn candidates(&mut self) -> Vec<usize> {
        self.legal_targets()
    }

    fn apply(&mut self, target: usize) -> Result<(), TransitionError> {
        self.apply_pointer(target)
    }

    fn partial_heads(&self) -> &[Option<usize>] {
        &self.heads
    }
}

/// Children of each node ordered inside-out: nearest first, left before
/// right at equal distance.
pub fn inside_out_children(heads: &[usize]) -> Vec<Vec<usize>> {
    let mut children = children_of(heads);
    for (head, kids) in children.iter_mut().enumerate() {
        kids.sort_by_key(|&c| (c.abs_diff(head), c));
    }
    children
}

/// Static oracle: depth-first top-down pointer sequence of length `2n - 1`.
pub fn td_oracle(gold_heads: &[usize]) -> Result<Vec<usize>, TransitionError> {
    if gold_heads.is_empty() {
        return Err(TransitionError::EmptySentence);
    }
    if !validate_tree(gold_heads) {
        return Err(TransitionError::InvalidGold);
    }
    let children = inside_out_children(gold_heads);
    let mut next_child = vec![0usize; gold_heads.len() + 1];
    let mut state = TopDownState::new(gold_heads.len())?;
    let mut actions = Vec::with_capacity(2 * gold_heads.len() - 1);
    while !state.is_terminal() {
        let top = state.top();
        let target = match children[top].get(next_child[top]) {
            Some(&child) => {
                next_child[top] += 1;
                child
            }
            None => top,
        };
        state.apply_pointer(target)?;
        actions.push(target);
    }
    Ok(actions)
}
