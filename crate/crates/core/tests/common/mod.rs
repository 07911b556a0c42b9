#![allow(dead_code)]

use voa_core::{FockState, Model};

/// Partitions of `n` into parts of size at most `max`, largest part first.
pub fn partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=max.min(n)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn partition_count(n: usize) -> usize {
    partitions(n, n).len()
}

pub fn even_part_count(n: usize) -> usize {
    partitions(n, n).iter().filter(|p| p.len() % 2 == 0).count()
}

/// Coefficients of `P(q)^k` through `q^top`.
pub fn partition_power(k: usize, top: usize) -> Vec<usize> {
    let p: Vec<usize> = (0..=top).map(partition_count).collect();
    let mut acc = vec![0; top + 1];
    acc[0] = 1;
    for _ in 0..k {
        let mut next = vec![0; top + 1];
        for (i, a) in acc.iter().enumerate() {
            for (j, b) in p.iter().enumerate().take(top + 1 - i) {
                next[i + j] += a * b;
            }
        }
        acc = next;
    }
    acc
}

/// Every basis state of degree at most `max`.
pub fn basis_up_to(model: &Model, max: usize) -> Vec<FockState> {
    (0..=max).flat_map(|m| model.basis_states(m).unwrap()).collect()
}
