//! Linear systems over GF(2).

use serde::{Deserialize, Serialize};

/// Outcome of solving A·c = b over GF(2).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gf2Solution {
    Solved(Vec<bool>),
    /// A row combination y with yᵀA = 0 and yᵀb = 1.
    Infeasible { certificate: Vec<bool> },
}

/// Solves A·c = b where `columns[j]` lists the rows set in column j.
pub fn solve(rows: usize, columns: &[Vec<usize>], b: &[bool]) -> Gf2Solution {
    let cols = columns.len();
    let width = cols + 1 + rows;
    // Augmented rows: [A | b | I].
    let mut m = vec![vec![false; width]; rows];
    for (j, col) in columns.iter().enumerate() {
        for &r in col {
            m[r][j] ^= true;
        }
    }
    for (r, row) in m.iter_mut().enumerate() {
        row[cols] = b[r];
        row[cols + 1 + r] = true;
    }
    let mut pivots = Vec::new();
    let mut rank = 0;
    for j in 0..cols {
        let Some(p) = (rank..rows).find(|&r| m[r][j]) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..rows {
            if r != rank && m[r][j] {
                let (src, dst) = if r < rank {
                    let (lo, hi) = m.split_at_mut(rank);
                    (&hi[0], &mut lo[r])
                } else {
                    let (lo, hi) = m.split_at_mut(r);
                    (&lo[rank], &mut hi[0])
                };
                for k in 0..width {
                    dst[k] ^= src[k];
                }
            }
        }
        pivots.push(j);
        rank += 1;
    }
    if let Some(r) = (rank..rows).find(|&r| m[r][cols]) {
        return Gf2Solution::Infeasible {
            certificate: m[r][cols + 1..].to_vec(),
        };
    }
    let mut c = vec![false; cols];
    for (r, &j) in pivots.iter().enumerate() {
        c[j] = m[r][cols];
    }
    Gf2Solution::Solved(c)
}

/// A·c over GF(2).
pub fn apply(rows: usize, columns: &[Vec<usize>], c: &[bool]) -> Vec<bool> {
    let mut out = vec![false; rows];
    for (col, &on) in columns.iter().zip(c) {
        if on {
            for &r in col {
                out[r] ^= true;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn infeasible_certificate() {
        // Columns flip pairs of a 3-cycle; odd targets are unreachable.
        let cols = vec![vec![0, 1], vec![1, 2]];
        let b = vec![true, false, false];
        match solve(3, &cols, &b) {
            Gf2Solution::Infeasible { certificate } => {
                let y: Vec<usize> = (0..3).filter(|&r| certificate[r]).collect();
                for col in &cols {
                    assert_eq!(col.iter().filter(|r| y.contains(r)).count() % 2, 0);
                }
                assert_eq!(y.iter().filter(|&&r| b[r]).count() % 2, 1);
            }
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn solves_reachable_targets(cols in prop::collection::vec(prop::collection::btree_set(0usize..8, 0..5), 1..10),
                                    pick in prop::collection::vec(any::<bool>(), 10)) {
            let columns: Vec<Vec<usize>> = cols.into_iter().map(|s| s.into_iter().collect()).collect();
            let c0: Vec<bool> = pick[..columns.len()].to_vec();
            let b = apply(8, &columns, &c0);
            match solve(8, &columns, &b) {
                Gf2Solution::Solved(c) => prop_assert_eq!(apply(8, &columns, &c), b),
                Gf2Solution::Infeasible { .. } => prop_assert!(false, "reachable target reported infeasible"),
            }
        }
    }
}
