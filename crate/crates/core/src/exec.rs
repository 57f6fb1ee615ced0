// Copyright 2026 The newton-unlearn Authors
// SPDX-License-Identifier: Apache-2.0

//! Data-parallel execution helpers.
//!
//! Every reduction splits its index range into fixed-size chunks, folds each
//! chunk sequentially and then combines the partial results left to right.
//! The chunk boundaries do not depend on the thread count, so the parallel
//! and sequential paths return bitwise-identical results.

use std::ops::Range;

/// Number of items folded by one task in chunked reductions.
pub const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

fn chunks(len: usize, chunk: usize) -> Vec<Range<usize>> {
    let chunk = chunk.max(1);
    (0..len.div_ceil(chunk))
        .map(|c| c * chunk..((c + 1) * chunk).min(len))
        .collect()
}

/// Folds `0..len` chunk by chunk with `fold` and merges the partial results
/// in chunk order with `merge`. Returns `None` when `len == 0`.
pub fn chunked_reduce<T, F, M>(exec: Execution, len: usize, fold: F, merge: M) -> Option<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
    M: Fn(T, T) -> T,
{
    let parts = map_ranges(exec, chunks(len, CHUNK), fold);
    parts.into_iter().reduce(merge)
}

/// Evaluates `f(i)` for every `i in 0..len`, preserving order.
pub fn map_indexed<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(f).collect()
        }
        _ => (0..len).map(f).collect(),
    }
}

fn map_ranges<T, F>(exec: Execution, ranges: Vec<Range<usize>>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel if ranges.len() > 1 => {
            use rayon::prelude::*;
            ranges.into_par_iter().map(f).collect()
        }
        _ => ranges.into_iter().map(f).collect(),
    }
}
