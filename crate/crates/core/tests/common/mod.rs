//! Naive reference implementations. Nothing here goes through the library's
//! bitsets, profiles or Gödel decoding, so the tests below compare two
//! independent computations.

#![allow(dead_code)]

use std::collections::BTreeSet;

/// `(i, j)` for a comparator code, by walking the triangle.
pub fn decode(code: usize) -> (usize, usize) {
    let mut rest = code;
    let mut j = 1;
    while rest >= j {
        rest -= j;
        j += 1;
    }
    (rest, j)
}

pub fn run(codes: &[usize], input: &[u32]) -> Vec<u32> {
    let mut v = input.to_vec();
    for &c in codes {
        let (i, j) = decode(c);
        if v[i] > v[j] {
            v.swap(i, j);
        }
    }
    v
}

pub fn zero_one_inputs(n: usize) -> Vec<Vec<u32>> {
    (0..1u32 << n)
        .map(|m| (0..n).map(|c| (m >> c) & 1).collect())
        .collect()
}

pub fn outputs(n: usize, codes: &[usize]) -> BTreeSet<Vec<u32>> {
    zero_one_inputs(n).iter().map(|x| run(codes, x)).collect()
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = vec![];
    go(&mut vec![], &mut vec![false; n], &mut out);
    out
}

/// Sorts every arrangement of `n` distinct values, no zero-one shortcut.
pub fn sorts(n: usize, codes: &[usize]) -> bool {
    permutations(n).iter().all(|p| {
        let input: Vec<u32> = p.iter().map(|&v| v as u32).collect();
        run(codes, &input).windows(2).all(|w| w[0] <= w[1])
    })
}

/// `result[perm[i]] = x[i]`.
pub fn permute(perm: &[usize], x: &[u32]) -> Vec<u32> {
    let mut out = vec![0; x.len()];
    for (i, &p) in perm.iter().enumerate() {
        out[p] = x[i];
    }
    out
}

pub fn subsumes_by(n: usize, a: &[usize], b: &[usize], perm: &[usize]) -> bool {
    let ob = outputs(n, b);
    outputs(n, a).iter().all(|x| ob.contains(&permute(perm, x)))
}

pub fn least_witness(n: usize, a: &[usize], b: &[usize]) -> Option<Vec<usize>> {
    let oa = outputs(n, a);
    let ob = outputs(n, b);
    permutations(n)
        .into_iter()
        .find(|p| oa.iter().all(|x| ob.contains(&permute(p, x))))
}

/// Every code sequence of length `k` over `n` channels, lexicographically.
pub fn all_networks(n: usize, k: usize) -> Vec<Vec<usize>> {
    let m = n * (n - 1) / 2;
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..m).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out
}
