//! Snake-ordered readout chain.
//!
//! The read enable visits the grid row by row, alternating direction, so each
//! hop joins physical neighbours. When the enable is asserted every chain
//! register captures its MAC's result; from the next cycle on the chain
//! shifts one position towards the output port per cycle, so values arrive in
//! the reverse of the traversal order.

use std::collections::VecDeque;

/// Row-major boustrophedon traversal starting at `(0, 0)`. It ends at
/// `(rows-1, cols-1)` when `rows` is odd and at `(rows-1, 0)` otherwise.
pub fn snake_path(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut path = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        if r % 2 == 0 {
            path.extend((0..cols).map(|c| (r, c)));
        } else {
            path.extend((0..cols).rev().map(|c| (r, c)));
        }
    }
    path
}

/// One value leaving the output port.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadoutBeat {
    pub cycle: u64,
    pub row: usize,
    pub col: usize,
    pub value: i128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnakeReadout {
    path: Vec<(usize, usize)>,
    /// Captured `(position, value)` pairs; the back is next at the port.
    chain: VecDeque<((usize, usize), i128)>,
}

impl SnakeReadout {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            path: snake_path(rows, cols),
            chain: VecDeque::new(),
        }
    }

    pub fn path(&self) -> &[(usize, usize)] {
        &self.path
    }

    pub fn draining(&self) -> bool {
        !self.chain.is_empty()
    }

    /// Values still in the chain.
    pub fn pending(&self) -> usize {
        self.chain.len()
    }

    /// Captures every MAC result in traversal order.
    pub fn capture(&mut self, mut result: impl FnMut(usize, usize) -> i128) {
        self.chain = self
            .path
            .iter()
            .map(|&(r, c)| ((r, c), result(r, c)))
            .collect();
    }

    /// Shifts the chain by one position; returns the value at the port.
    pub fn shift(&mut self, cycle: u64) -> Option<ReadoutBeat> {
        self.chain
            .pop_back()
            .map(|((row, col), value)| ReadoutBeat {
                cycle,
                row,
                col,
                value,
            })
    }

    pub fn clear(&mut self) {
        self.chain.clear();
    }
}
