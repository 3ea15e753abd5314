//! Brute-force reference classification of small symmetric designs.
//!
//! Shares nothing with the library beyond the matrix type used to hand
//! results over. Blocks are point bitmasks; designs are sorted block lists.

#![allow(dead_code)]

use orbitforge::design::{DesignParams, Incidence, IncidenceMatrix};

pub type Design = Vec<u32>;

/// Every symmetric `(v, k, λ)` design on points `0..v` whose first block is
/// `{0, …, k−1}`, as a sorted list of blocks. Every isomorphism class has a
/// member of this form.
pub fn all_designs(v: usize, k: usize, lambda: usize) -> Vec<Design> {
    let subsets: Vec<u32> = (0u32..1 << v).filter(|s| s.count_ones() as usize == k).collect();
    let first = (1u32 << k) - 1;
    let mut out = Vec::new();
    let mut cur = vec![first];
    extend(&subsets, v, lambda, &mut cur, &mut out);
    out
}

fn extend(subsets: &[u32], v: usize, lambda: usize, cur: &mut Vec<u32>, out: &mut Vec<Design>) {
    if cur.len() == v {
        let mut d = cur.clone();
        d.sort_unstable();
        out.push(d);
        return;
    }
    // Blocks after the first are added in increasing order.
    let last = if cur.len() == 1 { 0 } else { *cur.last().unwrap() };
    for &s in subsets {
        if s <= last || s == cur[0] {
            continue;
        }
        if cur.iter().all(|&b| (b & s).count_ones() as usize == lambda) {
            cur.push(s);
            extend(subsets, v, lambda, cur, out);
            cur.pop();
        }
    }
}

fn image(block: u32, perm: &[usize]) -> u32 {
    let mut out = 0;
    for (x, &y) in perm.iter().enumerate() {
        if block >> x & 1 == 1 {
            out |= 1 << y;
        }
    }
    out
}

/// Point permutations (as images) mapping the blocks of `a` onto the blocks
/// of `b`, found by assigning images one point at a time. Stops after
/// `limit` maps.
pub fn isomorphisms(a: &Design, b: &Design, v: usize, limit: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm = vec![usize::MAX; v];
    let mut used = vec![false; v];
    iso_rec(a, b, v, 0, &mut perm, &mut used, &mut out, limit);
    out
}

#[allow(clippy::too_many_arguments)]
fn iso_rec(
    a: &Design,
    b: &Design,
    v: usize,
    x: usize,
    perm: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<usize>>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if x == v {
        let mut img: Vec<u32> = a.iter().map(|&blk| image(blk, perm)).collect();
        img.sort_unstable();
        if &img == b {
            out.push(perm.clone());
        }
        return;
    }
    for y in 0..v {
        if used[y] {
            continue;
        }
        perm[x] = y;
        used[y] = true;
        let mapped: u32 = (0..=x).fold(0, |m, q| m | 1 << perm[q]);
        // The part of each block on the assigned points must be the part of
        // some block of `b` on their images.
        let ok = a.iter().all(|&blk| {
            let img = (0..=x).filter(|&q| blk >> q & 1 == 1).fold(0u32, |m, q| m | 1 << perm[q]);
            b.iter().any(|&c| c & mapped == img)
        });
        if ok {
            iso_rec(a, b, v, x + 1, perm, used, out, limit);
        }
        used[y] = false;
        perm[x] = usize::MAX;
    }
}

/// Isomorphism classes of `designs` by pairwise comparison with the
/// representatives found so far.
pub fn classify(designs: &[Design], v: usize) -> Vec<Design> {
    let mut reps: Vec<Design> = Vec::new();
    for d in designs {
        if !reps.iter().any(|r| !isomorphisms(d, r, v, 1).is_empty()) {
            reps.push(d.clone());
        }
    }
    reps
}

pub fn aut_order(d: &Design, v: usize) -> usize {
    isomorphisms(d, d, v, usize::MAX).len()
}

/// Fixed-point counts of the automorphisms of order two.
pub fn involution_fixed_points(d: &Design, v: usize) -> Vec<usize> {
    isomorphisms(d, d, v, usize::MAX)
        .into_iter()
        .filter(|g| g.iter().enumerate().any(|(x, &y)| x != y) && g.iter().enumerate().all(|(x, &y)| g[y] == x))
        .map(|g| g.iter().enumerate().filter(|&(x, &y)| x == y).count())
        .collect()
}

pub fn to_matrix(d: &Design, params: DesignParams) -> IncidenceMatrix {
    let v = params.v;
    let mut inc = Incidence::zeros(v, v);
    for (i, &blk) in d.iter().enumerate() {
        for x in 0..v {
            inc.set(i, x, blk >> x & 1 == 1);
        }
    }
    IncidenceMatrix::new(params, inc).unwrap()
}
