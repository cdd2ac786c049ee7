//! Permutations with their signs.

/// All permutations of `0..n` with parity (`true` = odd), in lexicographic order.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, bool)> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push((cur.clone(), parity(&cur)));
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { return out };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("exists by choice of i");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

pub fn parity(p: &[usize]) -> bool {
    let mut odd = false;
    for i in 0..p.len() {
        for j in (i + 1)..p.len() {
            if p[i] > p[j] {
                odd = !odd;
            }
        }
    }
    odd
}
