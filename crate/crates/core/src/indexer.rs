//! Expansion of orbit matrices into incidence matrices ("indexing").
//!
//! Points and blocks are labelled fixed orbits first, then each length-2
//! orbit as a consecutive pair. Every cell of the orbit matrix is forced
//! except the cells where a length-2 block orbit meets a length-2 point
//! orbit in one point: the representative block takes one point of the
//! pair and its image takes the other. Those binary choices are searched in
//! orbit-matrix row order, left to right.
//!
//! For two distinct length-2 block orbits `i` and `j` whose shared choice
//! cells number `s`, the representative blocks meet in exactly `λ` points
//! iff the choices agree in exactly `s / 2` of those cells; the remaining
//! intersection equations are implied by the orbit matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::design::{DesignParams, Incidence, IncidenceMatrix, PermutationAction};
use crate::error::{Error, Result};
use crate::orbit::{verify_orbit_matrix, OrbitDistribution, OrbitMatrix};

/// Largest search tree, in estimated nodes, indexed without `force`.
pub const MAX_ESTIMATED_NODES: f64 = (1u64 << 40) as f64;

/// Random probes used by [`Indexer::estimate_nodes`].
pub const ESTIMATE_PROBES: usize = 256;

/// Which symmetric copies of each design the search is allowed to skip.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SymmetryReduction {
    /// Enumerate every labelled expansion.
    None,
    /// Fix the first choice cell of every length-2 block orbit (swapping a
    /// block with its image flips the whole row).
    BlockOrbit,
    /// Also quotient by swapping the two points of each length-2 point
    /// orbit: the choice cells on a spanning forest of the bipartite
    /// row/column support graph are fixed. One expansion per orbit of the
    /// swap group survives.
    #[default]
    Full,
}

/// An orbit matrix with concrete point and block labels.
#[derive(Clone, Debug)]
pub struct IndexingProblem {
    pub om: OrbitMatrix,
    /// Concrete points of each column orbit.
    pub point_labels: Vec<Vec<usize>>,
    /// Concrete blocks of each row orbit.
    pub block_labels: Vec<Vec<usize>>,
}

impl IndexingProblem {
    pub fn new(om: OrbitMatrix) -> Result<Self> {
        if !verify_orbit_matrix(&om) {
            return Err(Error::InvalidOrbitMatrix("orbit matrix equations fail".into()));
        }
        if om.dist.p > 2 {
            return Err(Error::Unsupported(format!("indexing for p = {}", om.dist.p)));
        }
        let labels = natural_labels(&om.dist);
        Ok(IndexingProblem { om, point_labels: labels.clone(), block_labels: labels })
    }

    /// The automorphism swapping each labelled pair.
    pub fn sigma(&self) -> PermutationAction {
        let v = self.om.dist.params.v;
        let mut perm: Vec<usize> = (0..v).collect();
        for pair in self.point_labels.iter().filter(|l| l.len() == 2) {
            perm.swap(pair[0], pair[1]);
        }
        let mut blocks: Vec<usize> = (0..v).collect();
        for pair in self.block_labels.iter().filter(|l| l.len() == 2) {
            blocks.swap(pair[0], pair[1]);
        }
        PermutationAction { point_perm: perm, block_perm: blocks }
    }
}

fn natural_labels(d: &OrbitDistribution) -> Vec<Vec<usize>> {
    let mut next = 0;
    d.point_orbits
        .iter()
        .map(|&w| {
            let l: Vec<usize> = (next..next + w).collect();
            next += w;
            l
        })
        .collect()
}

/// All expansions of `prob` under the default block-orbit reduction.
pub fn index_orbit_matrix(prob: &IndexingProblem) -> Result<Vec<IncidenceMatrix>> {
    let ix = Indexer::new(prob, SymmetryReduction::BlockOrbit);
    let mut out = Vec::new();
    ix.for_each_design(&[], &mut |m| out.push(m));
    Ok(out)
}

#[derive(Clone, Debug)]
struct Cell {
    row: usize,
    col: usize,
    forced: bool,
    /// `(constraint, earlier cell in the same column)` pairs to update.
    checks: Vec<(usize, usize)>,
}

/// Backtracking search over the choice cells of one problem.
pub struct Indexer<'a> {
    prob: &'a IndexingProblem,
    /// Fixed blocks of the design, complete.
    base: Incidence,
    /// Orbit-matrix row and column indices of the length-2 orbits.
    pair_rows: Vec<usize>,
    pair_cols: Vec<usize>,
    cells: Vec<Cell>,
    /// Agreement targets and sizes per constraint.
    targets: Vec<(u32, u32)>,
    /// Some constraint cannot be met by any choice.
    infeasible: bool,
}

struct State {
    values: Vec<u8>,
    agree: Vec<u32>,
    seen: Vec<u32>,
}

impl<'a> Indexer<'a> {
    pub fn new(prob: &'a IndexingProblem, mode: SymmetryReduction) -> Self {
        let om = &prob.om;
        let d = &om.dist;
        let v = d.params.v;
        let pair_rows: Vec<usize> = (0..d.t).filter(|&i| d.block_orbits[i] == 2).collect();
        let pair_cols: Vec<usize> = (0..d.t).filter(|&r| d.point_orbits[r] == 2).collect();

        // Forced incidences, including the forced parts of pair blocks.
        let mut base = Incidence::zeros(v, v);
        for i in 0..d.t {
            for &blk in &prob.block_labels[i] {
                for r in 0..d.t {
                    let g = om.gamma[i][r] as usize;
                    let pts = &prob.point_labels[r];
                    if g == pts.len() {
                        for &pt in pts {
                            base.set(blk, pt, true);
                        }
                    } else if g == 1 && pts.len() == 1 {
                        base.set(blk, pts[0], true);
                    }
                }
            }
        }

        let mut cells = Vec::new();
        let mut cell_at = vec![vec![usize::MAX; pair_cols.len()]; pair_rows.len()];
        for (a, &i) in pair_rows.iter().enumerate() {
            for (c, &r) in pair_cols.iter().enumerate() {
                if om.gamma[i][r] == 1 {
                    cell_at[a][c] = cells.len();
                    cells.push(Cell { row: a, col: c, forced: false, checks: Vec::new() });
                }
            }
        }

        // One constraint per pair of rows sharing choice columns.
        let mut targets = Vec::new();
        let mut infeasible = false;
        for a in 0..pair_rows.len() {
            for b in 0..a {
                let shared: Vec<usize> =
                    (0..pair_cols.len()).filter(|&c| cell_at[a][c] != usize::MAX && cell_at[b][c] != usize::MAX).collect();
                if shared.is_empty() {
                    continue;
                }
                let size = shared.len() as u32;
                if size % 2 == 1 {
                    infeasible = true;
                }
                let id = targets.len();
                targets.push((size / 2, size));
                for c in shared {
                    let (e, other) = (cell_at[a][c], cell_at[b][c]);
                    cells[e].checks.push((id, other));
                }
            }
        }

        match mode {
            SymmetryReduction::None => {}
            SymmetryReduction::BlockOrbit => {
                for a in 0..pair_rows.len() {
                    if let Some(&e) = cell_at[a].iter().find(|&&e| e != usize::MAX) {
                        cells[e].forced = true;
                    }
                }
            }
            SymmetryReduction::Full => {
                // Spanning forest by breadth-first search, rows in order.
                let (nr, nc) = (pair_rows.len(), pair_cols.len());
                let mut seen_row = vec![false; nr];
                let mut seen_col = vec![false; nc];
                for start in 0..nr {
                    if seen_row[start] {
                        continue;
                    }
                    seen_row[start] = true;
                    let mut queue = std::collections::VecDeque::from([(true, start)]);
                    while let Some((is_row, x)) = queue.pop_front() {
                        if is_row {
                            for c in 0..nc {
                                let e = cell_at[x][c];
                                if e != usize::MAX && !seen_col[c] {
                                    seen_col[c] = true;
                                    cells[e].forced = true;
                                    queue.push_back((false, c));
                                }
                            }
                        } else {
                            for a in 0..nr {
                                let e = cell_at[a][x];
                                if e != usize::MAX && !seen_row[a] {
                                    seen_row[a] = true;
                                    cells[e].forced = true;
                                    queue.push_back((true, a));
                                }
                            }
                        }
                    }
                }
            }
        }

        Indexer { prob, base, pair_rows, pair_cols, cells, targets, infeasible }
    }

    /// Number of choice cells left free by the symmetry reduction.
    pub fn free_cells(&self) -> usize {
        self.cells.iter().filter(|c| !c.forced).count()
    }

    fn state(&self) -> State {
        State {
            values: vec![0; self.cells.len()],
            agree: vec![0; self.targets.len()],
            seen: vec![0; self.targets.len()],
        }
    }

    /// Assigns cell `e` and reports whether every touched constraint can
    /// still be met.
    fn assign(&self, st: &mut State, e: usize, x: u8) -> bool {
        st.values[e] = x;
        let mut ok = true;
        for &(c, other) in &self.cells[e].checks {
            st.seen[c] += 1;
            st.agree[c] += (st.values[other] == x) as u32;
            let (target, size) = self.targets[c];
            if st.agree[c] > target || st.agree[c] + (size - st.seen[c]) < target {
                ok = false;
            }
        }
        ok
    }

    fn unassign(&self, st: &mut State, e: usize) {
        let x = st.values[e];
        for &(c, other) in &self.cells[e].checks {
            st.seen[c] -= 1;
            st.agree[c] -= (st.values[other] == x) as u32;
        }
    }

    fn choices(&self, e: usize) -> &'static [u8] {
        if self.cells[e].forced {
            &[0]
        } else {
            &[0, 1]
        }
    }

    /// Feasible decision prefixes of length `depth` (or complete shorter
    /// ones), in search order. Running [`Indexer::for_each_design`] on each
    /// covers the search exactly once.
    pub fn branches(&self, depth: usize) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        if self.infeasible {
            return out;
        }
        let mut st = self.state();
        let mut prefix = Vec::new();
        self.branches_rec(&mut st, 0, depth, &mut prefix, &mut out);
        out
    }

    fn branches_rec(&self, st: &mut State, e: usize, depth: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if e == self.cells.len() || prefix.len() == depth {
            out.push(prefix.clone());
            return;
        }
        for &x in self.choices(e) {
            let ok = self.assign(st, e, x);
            if ok {
                let decision = !self.cells[e].forced;
                if decision {
                    prefix.push(x);
                }
                self.branches_rec(st, e + 1, depth, prefix, out);
                if decision {
                    prefix.pop();
                }
            }
            self.unassign(st, e);
        }
    }

    /// Streams every expansion whose first decisions equal `prefix`.
    pub fn for_each_design(&self, prefix: &[u8], emit: &mut dyn FnMut(IncidenceMatrix)) {
        if self.infeasible {
            return;
        }
        let mut st = self.state();
        self.dfs(&mut st, 0, 0, prefix, emit);
    }

    fn dfs(&self, st: &mut State, e: usize, decided: usize, prefix: &[u8], emit: &mut dyn FnMut(IncidenceMatrix)) {
        if e == self.cells.len() {
            emit(self.design(&st.values));
            return;
        }
        let decision = !self.cells[e].forced;
        for &x in self.choices(e) {
            if decision && decided < prefix.len() && prefix[decided] != x {
                continue;
            }
            if self.assign(st, e, x) {
                self.dfs(st, e + 1, decided + decision as usize, prefix, emit);
            }
            self.unassign(st, e);
        }
    }

    fn design(&self, values: &[u8]) -> IncidenceMatrix {
        let mut inc = self.base.clone();
        for (cell, &x) in self.cells.iter().zip(values) {
            let blocks = &self.prob.block_labels[self.pair_rows[cell.row]];
            let pts = &self.prob.point_labels[self.pair_cols[cell.col]];
            inc.set(blocks[0], pts[x as usize], true);
            inc.set(blocks[1], pts[1 - x as usize], true);
        }
        let m = IncidenceMatrix::new(self.prob.om.dist.params, inc).expect("square incidence");
        debug_assert!(m.is_2design());
        m
    }

    /// Knuth's random-probe estimate of the number of search nodes.
    pub fn estimate_nodes(&self, probes: usize, seed: u64) -> f64 {
        if self.infeasible || probes == 0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut total = 0.0;
        for _ in 0..probes {
            let mut st = self.state();
            let mut weight = 1.0;
            let mut est = 1.0;
            for e in 0..self.cells.len() {
                let mut ok = Vec::with_capacity(2);
                for &x in self.choices(e) {
                    if self.assign(&mut st, e, x) {
                        ok.push(x);
                    }
                    self.unassign(&mut st, e);
                }
                if ok.is_empty() {
                    break;
                }
                weight *= ok.len() as f64;
                est += weight;
                let x = ok[rng.gen_range(0..ok.len())];
                self.assign(&mut st, e, x);
            }
            total += est;
        }
        total / probes as f64
    }

    /// Refuses searches estimated above [`MAX_ESTIMATED_NODES`] unless
    /// `force` is set.
    pub fn check_scale(&self, force: bool) -> Result<f64> {
        let est = self.estimate_nodes(ESTIMATE_PROBES, 0);
        if !force && est > MAX_ESTIMATED_NODES {
            return Err(Error::SearchTooLarge(format!("about {est:.3e} search nodes; use --force")));
        }
        Ok(est)
    }
}

/// Orbit matrix of `m` under the prime-order automorphism `sigma`, with
/// orbits ordered fixed first and then by least member.
pub fn compress_design(m: &IncidenceMatrix, sigma: &PermutationAction) -> Result<OrbitMatrix> {
    if !m.is_automorphism(sigma) || sigma.is_identity() {
        return Err(Error::NotAnAutomorphism);
    }
    let point_orbits = cycles(&sigma.point_perm);
    let block_orbits = cycles(&sigma.block_perm);
    let p = point_orbits.iter().map(|c| c.len()).max().unwrap_or(1);
    if point_orbits.iter().chain(&block_orbits).any(|c| c.len() != 1 && c.len() != p) {
        return Err(Error::NotAnAutomorphism);
    }
    let f = point_orbits.iter().filter(|c| c.len() == 1).count();
    let fb = block_orbits.iter().filter(|c| c.len() == 1).count();
    if f != fb {
        return Err(Error::NotAnAutomorphism);
    }
    let dist = OrbitDistribution::new(m.params(), p, f)?;
    let gamma = block_orbits
        .iter()
        .map(|bo| {
            let rep = bo[0];
            point_orbits.iter().map(|po| po.iter().filter(|&&pt| m.get(rep, pt)).count() as u8).collect()
        })
        .collect();
    OrbitMatrix::new(dist, gamma)
}

/// Cycles of a permutation, fixed points first, each group by least member.
fn cycles(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut cyc = vec![s];
        seen[s] = true;
        let mut x = perm[s];
        while x != s {
            seen[x] = true;
            cyc.push(x);
            x = perm[x];
        }
        out.push(cyc);
    }
    out.sort_by_key(|c| (c.len() > 1, c[0]));
    out
}

/// Whether `next` may join the complete rows `partial`: each pair of rows
/// meets in exactly `λ` points, no row exceeds `k` points and no column sum
/// exceeds `k`.
pub fn prune_partial(params: DesignParams, partial: &[Vec<bool>], next: &[bool]) -> bool {
    let weight = |r: &[bool]| r.iter().filter(|&&x| x).count();
    if weight(next) > params.k {
        return false;
    }
    for row in partial {
        let meet = row.iter().zip(next).filter(|(&a, &b)| a && b).count();
        if meet != params.lambda {
            return false;
        }
    }
    (0..next.len()).all(|c| partial.iter().filter(|r| r[c]).count() + next[c] as usize <= params.k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::fixtures::{biplane, fano, FANO};
    use crate::isomorph::{canonical_form, group_elements};
    use crate::orbit::{build_orbit_matrices, enumerate_distributions};
    use std::collections::BTreeSet;

    fn rows_of(m: &IncidenceMatrix) -> Vec<Vec<bool>> {
        (0..m.v()).map(|i| (0..m.v()).map(|j| m.get(i, j)).collect()).collect()
    }

    #[test]
    fn identity_om_indexes_to_itself() {
        let f = fano();
        let dist = OrbitDistribution::new(f.params(), 1, 7).unwrap();
        let gamma = rows_of(&f).iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect();
        let prob = IndexingProblem::new(OrbitMatrix::new(dist, gamma).unwrap()).unwrap();
        let out = index_orbit_matrix(&prob).unwrap();
        assert_eq!(out, vec![f]);
    }

    #[test]
    fn rejects_invalid_and_odd_primes() {
        let f = fano();
        let dist = OrbitDistribution::new(f.params(), 1, 7).unwrap();
        let bad = OrbitMatrix::new(dist, vec![vec![1; 7]; 7]).unwrap();
        assert!(matches!(IndexingProblem::new(bad), Err(Error::InvalidOrbitMatrix(_))));
        let dist = OrbitDistribution::new(biplane().params(), 5, 1).unwrap();
        for om in build_orbit_matrices(&dist).unwrap() {
            assert!(matches!(IndexingProblem::new(om), Err(Error::Unsupported(_))));
        }
    }

    fn all_designs(params: DesignParams, mode: SymmetryReduction) -> (usize, BTreeSet<Vec<u8>>) {
        let mut emitted = 0;
        let mut keys = BTreeSet::new();
        for dist in enumerate_distributions(params, 2, None) {
            for om in build_orbit_matrices(&dist).unwrap() {
                let prob = IndexingProblem::new(om.clone()).unwrap();
                let sigma = prob.sigma();
                Indexer::new(&prob, mode).for_each_design(&[], &mut |m| {
                    assert!(m.is_2design());
                    assert!(m.is_automorphism(&sigma));
                    assert_eq!(sigma.fixed_points(), dist.f);
                    assert_eq!(sigma.fixed_blocks(), dist.f);
                    assert!(compress_design(&m, &sigma).unwrap().is_equivalent(&om));
                    emitted += 1;
                    keys.insert(canonical_form(&m).key);
                });
            }
        }
        (emitted, keys)
    }

    #[test]
    fn small_classifications_and_lossless_reduction() {
        for params in [DesignParams::new(7, 3, 1).unwrap(), DesignParams::new(11, 5, 2).unwrap()] {
            let (n_none, none) = all_designs(params, SymmetryReduction::None);
            let (n_blk, blk) = all_designs(params, SymmetryReduction::BlockOrbit);
            let (n_full, full) = all_designs(params, SymmetryReduction::Full);
            assert_eq!(none.len(), 1);
            assert_eq!(none, blk);
            assert_eq!(none, full);
            assert!(n_full <= n_blk && n_blk <= n_none);
        }
    }

    #[test]
    fn partitions_cover_search_once() {
        let params = DesignParams::new(15, 7, 3).unwrap();
        for dist in enumerate_distributions(params, 2, None) {
            for om in build_orbit_matrices(&dist).unwrap() {
                let prob = IndexingProblem::new(om).unwrap();
                let ix = Indexer::new(&prob, SymmetryReduction::BlockOrbit);
                let mut whole = Vec::new();
                ix.for_each_design(&[], &mut |m| whole.push(m));
                for depth in [0, 1, 3] {
                    let mut parts = Vec::new();
                    for b in ix.branches(depth) {
                        ix.for_each_design(&b, &mut |m| parts.push(m));
                    }
                    assert_eq!(parts, whole);
                }
            }
        }
    }

    #[test]
    fn compress_fano_involutions() {
        let f = fano();
        let group = group_elements(&canonical_form(&f).aut_generators, 1000).unwrap();
        let mut seen = 0;
        for g in group.iter().filter(|g| !g.is_identity() && g.then(g).is_identity()) {
            let om = compress_design(&f, g).unwrap();
            assert_eq!((om.dist.f, om.dist.t), (3, 5));
            assert!(verify_orbit_matrix(&om));
            seen += 1;
        }
        assert_eq!(seen, 21);
        let bad = PermutationAction::new(vec![1, 0, 2, 3, 4, 5, 6], (0..7).collect()).unwrap();
        assert!(matches!(compress_design(&f, &bad), Err(Error::NotAnAutomorphism)));
    }

    #[test]
    fn prune_partial_contract() {
        let params = fano().params();
        let rows: Vec<Vec<bool>> = FANO.iter().map(|s| s.chars().map(|c| c == '1').collect()).collect();
        assert!(prune_partial(params, &[], &rows[0]));
        assert!(prune_partial(params, &rows[..6], &rows[6]));
        assert!(!prune_partial(params, &rows[..1], &rows[0]));
    }

    #[test]
    fn estimator_is_exact_on_small_trees() {
        let params = DesignParams::new(7, 3, 1).unwrap();
        let dist = OrbitDistribution::new(params, 2, 3).unwrap();
        for om in build_orbit_matrices(&dist).unwrap() {
            let prob = IndexingProblem::new(om).unwrap();
            let ix = Indexer::new(&prob, SymmetryReduction::None);
            let est = ix.check_scale(false).unwrap();
            assert!(est >= 1.0);
        }
    }
}
