//! Canonical forms and automorphism groups of incidence structures.
//!
//! The engine works on the bipartite block/point incidence graph with the
//! two sides as colour classes. It refines an ordered partition to an
//! equitable one, individualizes a vertex of the first smallest non-trivial
//! cell, and backtracks. Leaves are compared by their refinement traces and
//! then by the relabelled incidence bits; the smallest leaf gives the
//! canonical key. Leaves that reproduce the first or best leaf yield
//! automorphisms, which prune sibling subtrees. The group order is the
//! product of the orbit lengths along the first path.

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};

use crate::design::{words_for, Incidence, IncidenceMatrix, PermutationAction};
use crate::error::{Error, Result};

/// Canonical key plus automorphism group data of one structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalRecord {
    /// Canonical incidence bits, row-major, most significant bit first.
    pub key: Vec<u8>,
    pub aut_order: u128,
    pub aut_generators: Vec<PermutationAction>,
}

impl CanonicalRecord {
    pub fn key_hex(&self) -> String {
        hex::encode(&self.key)
    }
}

/// Canonical form together with the labelling that produced it.
#[derive(Clone, Debug)]
pub struct CanonicalLabeling {
    pub record: CanonicalRecord,
    /// `block_order[i]` is the original block placed at canonical row `i`.
    pub block_order: Vec<usize>,
    /// `point_order[j]` is the original point placed at canonical column `j`.
    pub point_order: Vec<usize>,
}

impl CanonicalLabeling {
    /// The relabelling taking the input structure to its canonical form.
    pub fn to_canonical(&self) -> PermutationAction {
        let mut point_perm = vec![0; self.point_order.len()];
        for (j, &p) in self.point_order.iter().enumerate() {
            point_perm[p] = j;
        }
        let mut block_perm = vec![0; self.block_order.len()];
        for (i, &b) in self.block_order.iter().enumerate() {
            block_perm[b] = i;
        }
        PermutationAction { point_perm, block_perm }
    }
}

pub fn canonical_form(m: &IncidenceMatrix) -> CanonicalRecord {
    canonical_labeling(m.incidence()).record
}

pub fn are_isomorphic(a: &IncidenceMatrix, b: &IncidenceMatrix) -> Result<bool> {
    if a.params() != b.params() {
        return Err(Error::ParamMismatch(format!("{} vs {}", a.params(), b.params())));
    }
    Ok(canonical_form(a).key == canonical_form(b).key)
}

/// Canonical labelling of an arbitrary `blocks × points` incidence structure.
pub fn canonical_labeling(inc: &Incidence) -> CanonicalLabeling {
    let graph = Graph::new(inc);
    let mut search = Search::new(&graph);
    search.run();
    search.finish()
}

// ---------------------------------------------------------------------------

struct Graph<'a> {
    inc: &'a Incidence,
    b: usize,
    n: usize,
    /// Words per adjacency row (enough for either side).
    w: usize,
    /// Vertex `v < b` is block `v`; vertex `b + j` is point `j`. Each row is a
    /// bitset over the opposite side.
    adj: Vec<u64>,
}

impl<'a> Graph<'a> {
    fn new(inc: &'a Incidence) -> Self {
        let b = inc.rows();
        let n = inc.cols();
        let w = words_for(b.max(n)).max(1);
        let mut adj = vec![0u64; (b + n) * w];
        for i in 0..b {
            for j in 0..n {
                if inc.get(i, j) {
                    adj[i * w + j / 64] |= 1 << (j % 64);
                    adj[(b + j) * w + i / 64] |= 1 << (i % 64);
                }
            }
        }
        Graph { inc, b, n, w, adj }
    }

    fn nv(&self) -> usize {
        self.b + self.n
    }

    #[inline]
    fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.w..(v + 1) * self.w]
    }

    /// Index of `v` within its own side.
    #[inline]
    fn side_index(&self, v: usize) -> usize {
        if v < self.b {
            v
        } else {
            v - self.b
        }
    }

    /// Histogram of common-neighbour counts over unordered pairs of other
    /// vertices on the same side, for every vertex of that side.
    fn triple_invariant(&self, side_start: usize, side_len: usize, max_count: usize) -> Vec<Vec<u32>> {
        let mut hist = vec![vec![0u32; max_count + 1]; side_len];
        let mut tmp = vec![0u64; self.w];
        for x in 0..side_len {
            let rx = self.row(side_start + x);
            for y in x + 1..side_len {
                let ry = self.row(side_start + y);
                for (t, (a, b)) in tmp.iter_mut().zip(rx.iter().zip(ry)) {
                    *t = a & b;
                }
                for z in y + 1..side_len {
                    let rz = self.row(side_start + z);
                    let c: u32 = tmp.iter().zip(rz).map(|(a, b)| (a & b).count_ones()).sum();
                    let c = (c as usize).min(max_count);
                    hist[x][c] += 1;
                    hist[y][c] += 1;
                    hist[z][c] += 1;
                }
            }
        }
        hist
    }
}

#[derive(Clone)]
struct Partition {
    lab: Vec<u32>,
    pos: Vec<u32>,
    /// Start position of the cell containing each position.
    cell: Vec<u32>,
    /// Cell length, valid at cell starts.
    len: Vec<u32>,
    ncells: usize,
}

impl Partition {
    fn unit(b: usize, n: usize) -> Self {
        let nv = b + n;
        let mut cell = vec![0u32; nv];
        let mut len = vec![0u32; nv];
        let mut ncells = 0;
        if b > 0 {
            len[0] = b as u32;
            ncells += 1;
        }
        if n > 0 {
            for c in cell.iter_mut().skip(b) {
                *c = b as u32;
            }
            len[b] = n as u32;
            ncells += 1;
        }
        Partition {
            lab: (0..nv as u32).collect(),
            pos: (0..nv as u32).collect(),
            cell,
            len,
            ncells,
        }
    }

    /// First smallest cell of size at least two.
    fn target_cell(&self) -> Option<usize> {
        let mut best: Option<(u32, usize)> = None;
        let mut s = 0;
        while s < self.lab.len() {
            let l = self.len[s];
            if l > 1 && best.is_none_or(|(bl, _)| l < bl) {
                best = Some((l, s));
                if l == 2 {
                    break;
                }
            }
            s += l as usize;
        }
        best.map(|(_, s)| s)
    }

    fn cell_vertices(&self, start: usize) -> Vec<u32> {
        self.lab[start..start + self.len[start] as usize].to_vec()
    }

    /// Rearranges the cell at `start` by `keys` (one per position in the
    /// cell, stable ascending) and splits it into runs of equal keys.
    /// Returns the starts of the new cells in order.
    fn split_by<K: Ord + Clone>(&mut self, start: usize, keys: &[K]) -> Vec<usize> {
        let l = self.len[start] as usize;
        let mut idx: Vec<usize> = (0..l).collect();
        idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        let verts: Vec<u32> = idx.iter().map(|&i| self.lab[start + i]).collect();
        let sorted_keys: Vec<&K> = idx.iter().map(|&i| &keys[i]).collect();
        let mut starts = vec![start];
        for (off, &v) in verts.iter().enumerate() {
            self.lab[start + off] = v;
            self.pos[v as usize] = (start + off) as u32;
            if off > 0 && sorted_keys[off] != sorted_keys[off - 1] {
                starts.push(start + off);
            }
        }
        for (q, &s) in starts.iter().enumerate() {
            let e = starts.get(q + 1).copied().unwrap_or(start + l);
            self.len[s] = (e - s) as u32;
            for p in s..e {
                self.cell[p] = s as u32;
            }
        }
        self.ncells += starts.len() - 1;
        starts
    }

    fn individualize(&mut self, v: u32) -> usize {
        let p = self.pos[v as usize] as usize;
        let s = self.cell[p] as usize;
        let l = self.len[s] as usize;
        let other = self.lab[s];
        self.lab.swap(s, p);
        self.pos[v as usize] = s as u32;
        self.pos[other as usize] = p as u32;
        self.len[s] = 1;
        self.len[s + 1] = (l - 1) as u32;
        for q in s + 1..s + l {
            self.cell[q] = (s + 1) as u32;
        }
        self.ncells += 1;
        s
    }
}

/// Equitable refinement driven by a queue of splitter cells. Returns the
/// trace of split events.
fn refine(g: &Graph, part: &mut Partition, queue: &mut VecDeque<usize>, in_queue: &mut [bool]) -> Vec<u32> {
    let mut trace = Vec::new();
    let nv = g.nv();
    let mut mask = vec![0u64; g.w];
    let mut counts: Vec<u32> = Vec::with_capacity(nv);
    while let Some(wstart) = queue.pop_front() {
        in_queue[wstart] = false;
        let wlen = part.len[wstart] as usize;
        mask.iter_mut().for_each(|x| *x = 0);
        for &v in &part.lab[wstart..wstart + wlen] {
            let i = g.side_index(v as usize);
            mask[i / 64] |= 1 << (i % 64);
        }
        // Cells on the opposite side.
        let (lo, hi) = if wstart < g.b { (g.b, nv) } else { (0, g.b) };
        let mut s = lo;
        while s < hi {
            let l = part.len[s] as usize;
            if l == 1 {
                s += 1;
                continue;
            }
            counts.clear();
            for &v in &part.lab[s..s + l] {
                let r = g.row(v as usize);
                counts.push(r.iter().zip(&mask).map(|(a, b)| (a & b).count_ones()).sum());
            }
            let first = counts[0];
            if counts.iter().all(|&c| c == first) {
                trace.push(s as u32);
                trace.push(first);
                s += l;
                continue;
            }
            let keys = counts.clone();
            let starts = part.split_by(s, &keys);
            trace.push(s as u32 | 0x8000_0000);
            trace.push(starts.len() as u32);
            for &ns in &starts {
                trace.push(part.len[ns]);
                trace.push(counts_at(g, part, ns, &mask));
            }
            if in_queue[s] {
                for &ns in &starts[1..] {
                    in_queue[ns] = true;
                    queue.push_back(ns);
                }
            } else {
                let largest = *starts
                    .iter()
                    .max_by(|a, b| part.len[**a].cmp(&part.len[**b]).then(b.cmp(a)))
                    .expect("non-empty split");
                for &ns in &starts {
                    if ns != largest {
                        in_queue[ns] = true;
                        queue.push_back(ns);
                    }
                }
            }
            s += l;
        }
    }
    trace
}

fn counts_at(g: &Graph, part: &Partition, start: usize, mask: &[u64]) -> u32 {
    let v = part.lab[start] as usize;
    g.row(v).iter().zip(mask).map(|(a, b)| (a & b).count_ones()).sum()
}

struct Leaf {
    lab: Vec<u32>,
    key: Vec<u8>,
    traces: Vec<Vec<u32>>,
}

struct Search<'a> {
    g: &'a Graph<'a>,
    root: Partition,
    first: Option<Leaf>,
    first_path: Vec<u32>,
    best: Option<Leaf>,
    /// Automorphisms as vertex permutations.
    gens: Vec<Vec<u32>>,
    aut_order: u128,
    path: Vec<u32>,
    traces: Vec<Vec<u32>>,
}

/// Result of exploring a subtree: keep going, or unwind to a first-path level.
enum Flow {
    Continue,
    Unwind(usize),
}

impl<'a> Search<'a> {
    fn new(g: &'a Graph<'a>) -> Self {
        let mut part = Partition::unit(g.b, g.n);
        // Vertex invariant at the root.
        let mut queue = VecDeque::new();
        let mut in_queue = vec![false; g.nv()];
        if g.b > 2 {
            let inv = g.triple_invariant(0, g.b, g.n);
            part.split_by(0, &inv);
        }
        if g.n > 2 {
            let inv = g.triple_invariant(g.b, g.n, g.b);
            part.split_by(g.b, &inv);
        }
        let mut s = 0;
        while s < g.nv() {
            in_queue[s] = true;
            queue.push_back(s);
            s += part.len[s] as usize;
        }
        refine(g, &mut part, &mut queue, &mut in_queue);
        Search {
            g,
            root: part,
            first: None,
            first_path: Vec::new(),
            best: None,
            gens: Vec::new(),
            aut_order: 1,
            path: Vec::new(),
            traces: Vec::new(),
        }
    }

    fn child(&self, part: &Partition, v: u32) -> (Partition, Vec<u32>) {
        let mut p = part.clone();
        let s = p.individualize(v);
        let mut queue = VecDeque::from([s]);
        let mut in_queue = vec![false; self.g.nv()];
        in_queue[s] = true;
        let trace = refine(self.g, &mut p, &mut queue, &mut in_queue);
        (p, trace)
    }

    fn leaf_key(&self, part: &Partition) -> Vec<u8> {
        let g = self.g;
        let (b, n) = (g.b, g.n);
        let mut key = vec![0u8; (b * n).div_ceil(8)];
        for i in 0..b {
            let blk = part.lab[i] as usize;
            for j in 0..n {
                let pt = part.lab[b + j] as usize - b;
                if g.inc.get(blk, pt) {
                    let q = i * n + j;
                    key[q / 8] |= 0x80 >> (q % 8);
                }
            }
        }
        key
    }

    fn run(&mut self) {
        // First path.
        let mut levels: Vec<(Partition, u32)> = Vec::new();
        let mut part = self.root.clone();
        while let Some(s) = part.target_cell() {
            let v = part.lab[s];
            let (next, trace) = self.child(&part, v);
            levels.push((part, v));
            self.first_path.push(v);
            self.traces.push(trace);
            part = next;
        }
        let leaf = Leaf { lab: part.lab.clone(), key: self.leaf_key(&part), traces: self.traces.clone() };
        self.first = Some(Leaf { lab: leaf.lab.clone(), key: leaf.key.clone(), traces: leaf.traces.clone() });
        self.best = Some(leaf);
        // Remaining children of first-path nodes, deepest level first.
        for level in (0..levels.len()).rev() {
            let (node, v) = (&levels[level].0, levels[level].1);
            let s = node.cell[node.pos[v as usize] as usize] as usize;
            let cell = node.cell_vertices(s);
            let prefix: Vec<u32> = self.first_path[..level].to_vec();
            let mut explored = vec![v];
            for &w in &cell {
                if w == v || self.same_orbit(&prefix, &explored, w) {
                    continue;
                }
                self.path = prefix.clone();
                self.traces.truncate(level);
                self.path.push(w);
                let (p, trace) = self.child(node, w);
                self.traces.push(trace);
                let _ = self.explore(&p, level);
                explored.push(w);
            }
            let orbit = self.orbit_size(&prefix, v);
            self.aut_order *= orbit as u128;
        }
    }

    /// Explores the node reached by `self.path`. `top` is the first-path
    /// level whose child roots this subtree.
    fn explore(&mut self, part: &Partition, top: usize) -> Flow {
        let depth = self.path.len();
        let first = self.first.as_ref().expect("first leaf");
        let eq_first = self.traces[..depth] == first.traces[..depth.min(first.traces.len())];
        let cmp_best = cmp_traces(&self.traces, &self.best.as_ref().expect("best leaf").traces);
        if !eq_first && cmp_best == Ordering::Greater {
            return Flow::Continue;
        }
        match part.target_cell() {
            None => self.at_leaf(part, eq_first, top),
            Some(s) => {
                let cell = part.cell_vertices(s);
                let mut explored: Vec<u32> = Vec::new();
                for &w in &cell {
                    if !explored.is_empty() && self.same_orbit(&self.path.clone(), &explored, w) {
                        continue;
                    }
                    self.path.push(w);
                    let (p, trace) = self.child(part, w);
                    self.traces.push(trace);
                    let flow = self.explore(&p, top);
                    self.traces.pop();
                    self.path.pop();
                    if let Flow::Unwind(level) = flow {
                        if level < depth {
                            return flow;
                        }
                    }
                    explored.push(w);
                }
                Flow::Continue
            }
        }
    }

    fn at_leaf(&mut self, part: &Partition, eq_first: bool, top: usize) -> Flow {
        let key = self.leaf_key(part);
        let first = self.first.as_ref().expect("first leaf");
        if eq_first && self.traces.len() == first.traces.len() && key == first.key {
            let gamma = leaf_map(&first.lab, &part.lab);
            self.gens.push(gamma);
            return Flow::Unwind(top);
        }
        let best = self.best.as_ref().expect("best leaf");
        let ord = cmp_traces(&self.traces, &best.traces).then_with(|| key.cmp(&best.key));
        match ord {
            Ordering::Equal => {
                let gamma = leaf_map(&best.lab, &part.lab);
                if !gamma.iter().enumerate().all(|(i, &x)| i as u32 == x) {
                    self.gens.push(gamma);
                }
            }
            Ordering::Less => {
                self.best = Some(Leaf { lab: part.lab.clone(), key, traces: self.traces.clone() });
            }
            Ordering::Greater => {}
        }
        Flow::Continue
    }

    /// Whether `w` shares an orbit with an explored vertex under the
    /// generators fixing `prefix` pointwise.
    fn same_orbit(&self, prefix: &[u32], explored: &[u32], w: u32) -> bool {
        let gens: Vec<&Vec<u32>> =
            self.gens.iter().filter(|g| prefix.iter().all(|&x| g[x as usize] == x)).collect();
        if gens.is_empty() {
            return false;
        }
        let orbit = orbit_of(&gens, explored, self.g.nv());
        orbit[w as usize]
    }

    fn orbit_size(&self, prefix: &[u32], v: u32) -> usize {
        let gens: Vec<&Vec<u32>> =
            self.gens.iter().filter(|g| prefix.iter().all(|&x| g[x as usize] == x)).collect();
        orbit_of(&gens, &[v], self.g.nv()).iter().filter(|&&x| x).count()
    }

    fn finish(self) -> CanonicalLabeling {
        let g = self.g;
        let best = self.best.expect("best leaf");
        let block_order = best.lab[..g.b].iter().map(|&x| x as usize).collect();
        let point_order = best.lab[g.b..].iter().map(|&x| x as usize - g.b).collect();
        let aut_generators = self
            .gens
            .iter()
            .map(|gm| PermutationAction {
                point_perm: (0..g.n).map(|j| gm[g.b + j] as usize - g.b).collect(),
                block_perm: (0..g.b).map(|i| gm[i] as usize).collect(),
            })
            .collect();
        CanonicalLabeling {
            record: CanonicalRecord { key: best.key, aut_order: self.aut_order, aut_generators },
            block_order,
            point_order,
        }
    }
}

fn cmp_traces(a: &[Vec<u32>], b: &[Vec<u32>]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    Ordering::Equal
}

/// The vertex map sending the labelling `from` onto `to` position-wise.
fn leaf_map(from: &[u32], to: &[u32]) -> Vec<u32> {
    let mut gamma = vec![0u32; from.len()];
    for (a, b) in from.iter().zip(to) {
        gamma[*a as usize] = *b;
    }
    gamma
}

fn orbit_of(gens: &[&Vec<u32>], seeds: &[u32], nv: usize) -> Vec<bool> {
    let mut seen = vec![false; nv];
    let mut stack: Vec<u32> = Vec::new();
    for &s in seeds {
        if !seen[s as usize] {
            seen[s as usize] = true;
            stack.push(s);
        }
    }
    while let Some(x) = stack.pop() {
        for g in gens {
            let y = g[x as usize];
            if !seen[y as usize] {
                seen[y as usize] = true;
                stack.push(y);
            }
        }
    }
    seen
}

// ---------------------------------------------------------------------------
// Permutation groups given by generators.

/// Order of the group generated by `gens` acting on points and blocks
/// (Schreier–Sims).
pub fn group_order(gens: &[PermutationAction]) -> u128 {
    let perms: Vec<Vec<usize>> = gens.iter().map(flatten).collect();
    let degree = perms.first().map_or(0, |p| p.len());
    schreier_sims_order(&perms, degree)
}

fn flatten(a: &PermutationAction) -> Vec<usize> {
    let n = a.point_perm.len();
    a.point_perm.iter().copied().chain(a.block_perm.iter().map(|&x| x + n)).collect()
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    // a then b
    a.iter().map(|&x| b[x]).collect()
}

fn inverse(a: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

/// Sifts `g` through `chain` starting at `level`; returns the residue and
/// the level where it stopped.
fn sift(chain: &[Level], g: &[usize], level: usize) -> (Vec<usize>, usize) {
    let mut h = g.to_vec();
    let mut l = level;
    while l < chain.len() {
        match &chain[l].transversal[h[chain[l].base]] {
            Some(t) => {
                h = compose(&h, &inverse(t));
                l += 1;
            }
            None => break,
        }
    }
    (h, l)
}

struct Level {
    base: usize,
    gens: Vec<Vec<usize>>,
    /// `transversal[x]` maps `base` to `x`.
    transversal: Vec<Option<Vec<usize>>>,
}

fn build_chain(base: &[usize], strong: &[Vec<usize>], degree: usize) -> Vec<Level> {
    base.iter()
        .enumerate()
        .map(|(i, &b)| {
            let gens: Vec<Vec<usize>> =
                strong.iter().filter(|s| base[..i].iter().all(|&x| s[x] == x)).cloned().collect();
            let mut transversal = vec![None; degree];
            transversal[b] = Some((0..degree).collect::<Vec<_>>());
            let mut stack = vec![b];
            while let Some(x) = stack.pop() {
                for g in &gens {
                    let y = g[x];
                    if transversal[y].is_none() {
                        transversal[y] = Some(compose(transversal[x].as_ref().expect("in orbit"), g));
                        stack.push(y);
                    }
                }
            }
            Level { base: b, gens, transversal }
        })
        .collect()
}

fn is_identity(h: &[usize]) -> bool {
    h.iter().enumerate().all(|(i, &x)| i == x)
}

fn schreier_sims_order(gens: &[Vec<usize>], degree: usize) -> u128 {
    let mut strong: Vec<Vec<usize>> = gens.iter().filter(|g| !is_identity(g)).cloned().collect();
    let mut base: Vec<usize> = Vec::new();
    let extend_base = |base: &mut Vec<usize>, h: &[usize]| {
        if base.iter().all(|&x| h[x] == x) {
            base.push(h.iter().enumerate().position(|(i, &x)| i != x).expect("non-identity"));
        }
    };
    for g in &strong {
        extend_base(&mut base, g);
    }
    'outer: loop {
        let chain = build_chain(&base, &strong, degree);
        for (i, lvl) in chain.iter().enumerate() {
            for x in 0..degree {
                let Some(tx) = &lvl.transversal[x] else { continue };
                for s in &lvl.gens {
                    let ty = lvl.transversal[s[x]].as_ref().expect("orbit closed");
                    let schreier = compose(&compose(tx, s), &inverse(ty));
                    let (h, _) = sift(&chain, &schreier, i + 1);
                    if !is_identity(&h) {
                        extend_base(&mut base, &h);
                        strong.push(h);
                        continue 'outer;
                    }
                }
            }
        }
        return chain.iter().map(|l| l.transversal.iter().filter(|t| t.is_some()).count() as u128).product();
    }
}

/// Every element of the group generated by `gens`, refusing groups larger
/// than `limit`.
pub fn group_elements(gens: &[PermutationAction], limit: u128) -> Result<Vec<PermutationAction>> {
    let order = group_order(gens);
    if order > limit {
        return Err(Error::GroupTooLarge(order));
    }
    let Some(g0) = gens.first() else {
        return Ok(Vec::new());
    };
    let id = PermutationAction::identity(g0.point_perm.len(), g0.block_perm.len());
    let mut seen: HashSet<PermutationAction> = HashSet::from([id.clone()]);
    let mut out = vec![id];
    let mut i = 0;
    while i < out.len() {
        let x = out[i].clone();
        for g in gens {
            let y = x.then(g);
            if seen.insert(y.clone()) {
                out.push(y);
            }
        }
        i += 1;
    }
    Ok(out)
}

/// Largest automorphism group enumerated element by element.
pub const CENSUS_GROUP_LIMIT: u128 = 2_000_000;

/// One entry per conjugacy class of involutions in the automorphism group:
/// the number of fixed points and the least class member.
pub fn involution_census(m: &IncidenceMatrix) -> Result<Vec<(usize, PermutationAction)>> {
    let rec = canonical_form(m);
    involution_classes(&rec.aut_generators)
}

pub fn involution_classes(gens: &[PermutationAction]) -> Result<Vec<(usize, PermutationAction)>> {
    let elements = group_elements(gens, CENSUS_GROUP_LIMIT)?;
    let mut involutions: Vec<PermutationAction> =
        elements.into_iter().filter(|g| !g.is_identity() && g.then(g).is_identity()).collect();
    involutions.sort();
    let index: std::collections::HashMap<PermutationAction, usize> =
        involutions.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
    let mut class = vec![usize::MAX; involutions.len()];
    let mut out = Vec::new();
    for start in 0..involutions.len() {
        if class[start] != usize::MAX {
            continue;
        }
        class[start] = start;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for h in gens {
                let conj = h.inverse().then(&involutions[x]).then(h);
                let y = index[&conj];
                if class[y] == usize::MAX {
                    class[y] = start;
                    stack.push(y);
                }
            }
        }
        // Sorted order makes `start` the least member of its class.
        out.push((involutions[start].fixed_points(), involutions[start].clone()));
    }
    out.sort();
    Ok(out)
}
