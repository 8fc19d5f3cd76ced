//! Fixtures and brute-force reference implementations used by the test
//! suites of the workspace. Nothing here is used by the library code.

pub mod fixtures;
pub mod ltl_oracle;
pub mod taxonomy;

/// Every bijection between two sets of size `n`, as permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every `k`-subset of `0..m` as a bitmask.
pub fn subsets(m: usize, k: usize) -> Vec<u32> {
    (0u32..1 << m).filter(|s| s.count_ones() as usize == k).collect()
}
