//! Orbit-length distributions and orbit matrices for a prime-order
//! automorphism.
//!
//! An orbit matrix is the `t × t` matrix of incidence counts between block
//! orbits (rows) and point orbits (columns). Orbit matrices are generated up
//! to row permutations within equal block-orbit lengths and column
//! permutations within equal point-orbit lengths. The representative kept
//! for each class is the lexicographically greatest arrangement, reading
//! rows in search order (length-`p` block orbits first, then fixed blocks)
//! with fixed-point columns first.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::io::BufRead;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{parse_header as header, records, DesignParams};
use crate::error::{Error, Result};

/// Largest `v` for which the identity (`p = 1`) search is allowed.
pub const MAX_TRIVIAL_V: usize = 13;

pub fn is_prime(p: usize) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Orbit lengths of a prime-order automorphism on points and blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrbitDistribution {
    pub params: DesignParams,
    pub p: usize,
    pub f: usize,
    pub t: usize,
    /// Point-orbit lengths ω, fixed orbits first.
    pub point_orbits: Vec<usize>,
    /// Block-orbit lengths Ω, fixed orbits first.
    pub block_orbits: Vec<usize>,
}

impl OrbitDistribution {
    /// Distribution with `f` fixed points and blocks. `p = 1` denotes the
    /// identity and requires `f = v`.
    pub fn new(params: DesignParams, p: usize, f: usize) -> Result<Self> {
        if p != 1 && !is_prime(p) {
            return Err(Error::Unsupported(format!("automorphism order {p} is not prime")));
        }
        if f > params.v || (params.v - f) % p != 0 {
            return Err(Error::ParameterIdentityViolation(format!(
                "{p} does not divide v - f = {} - {f}",
                params.v
            )));
        }
        if p == 1 && f != params.v {
            return Err(Error::ParameterIdentityViolation("the identity fixes every point".into()));
        }
        let t = f + (params.v - f) / p;
        let lengths: Vec<usize> = (0..t).map(|r| if r < f { 1 } else { p }).collect();
        Ok(OrbitDistribution { params, p, f, t, point_orbits: lengths.clone(), block_orbits: lengths })
    }

    /// Indices of block orbits in search order: non-fixed first, then fixed.
    pub fn search_order(&self) -> Vec<usize> {
        (self.f..self.t).chain(0..self.f).collect()
    }

    /// Largest entry allowed in cell `(i, r)`. A fixed block meets a
    /// length-`p` point orbit in 0 or `p` points.
    fn cell_values(&self, i: usize, r: usize) -> CellValues {
        let omega = self.point_orbits[r];
        if self.block_orbits[i] == 1 && omega > 1 {
            CellValues::ZeroOr(omega as u8)
        } else {
            CellValues::Range(omega as u8)
        }
    }

    fn diag_target(&self, i: usize) -> i64 {
        let DesignParams { lambda, .. } = self.params;
        (self.p * (lambda * self.block_orbits[i] + self.params.order())) as i64
    }

    fn diag_coef(&self, i: usize, r: usize) -> i64 {
        (self.block_orbits[i] * self.p / self.point_orbits[r]) as i64
    }

    fn cross_coef(&self, r: usize) -> i64 {
        (self.p / self.point_orbits[r]) as i64
    }

    fn cross_target(&self) -> i64 {
        (self.p * self.params.lambda) as i64
    }
}

#[derive(Clone, Copy, Debug)]
enum CellValues {
    Range(u8),
    ZeroOr(u8),
}

impl CellValues {
    fn max(self) -> u8 {
        match self {
            CellValues::Range(m) | CellValues::ZeroOr(m) => m,
        }
    }

    fn allows(self, x: u8) -> bool {
        match self {
            CellValues::Range(m) => x <= m,
            CellValues::ZeroOr(m) => x == 0 || x == m,
        }
    }

    fn step(self) -> i64 {
        match self {
            CellValues::Range(_) => 1,
            CellValues::ZeroOr(m) => m as i64,
        }
    }
}

/// Admissible fixed-point counts for an automorphism of order `p`.
///
/// A count `f` is admissible when `p | v - f`, `f <= v - 2(k - λ)`, and every
/// block-orbit length has at least one row satisfying the row-sum and
/// diagonal equations. `min_fixed` applies an externally known lower bound.
pub fn enumerate_distributions(params: DesignParams, p: usize, min_fixed: Option<usize>) -> Vec<OrbitDistribution> {
    if p == 1 {
        return OrbitDistribution::new(params, 1, params.v).into_iter().collect();
    }
    if !is_prime(p) || p > params.v {
        return Vec::new();
    }
    let upper = match params.v.checked_sub(2 * params.order()) {
        Some(u) => u,
        None => return Vec::new(),
    };
    (min_fixed.unwrap_or(0)..=upper)
        .filter(|&f| (params.v - f) % p == 0)
        .filter_map(|f| OrbitDistribution::new(params, p, f).ok())
        .filter(|d| {
            let mut kinds: Vec<usize> = Vec::new();
            for i in 0..d.t {
                if !kinds.contains(&d.block_orbits[i]) {
                    kinds.push(d.block_orbits[i]);
                    if row_candidates_all(d, i).is_empty() {
                        return false;
                    }
                }
            }
            true
        })
        .collect()
}

/// Every row for block orbit `i` satisfying the entry bounds, the row sum and
/// the diagonal orthogonality equation, without column reduction. Rows are
/// listed in descending lexicographic order.
pub fn row_candidates_all(dist: &OrbitDistribution, i: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut row = vec![0u8; dist.t];
    candidates_rec(dist, i, 0, 0, 0, &mut row, false, &mut out);
    out
}

/// Row candidates up to column equivalence: each row is sorted descending
/// within the fixed columns and within the non-fixed columns.
pub fn row_candidates(dist: &OrbitDistribution, i: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut row = vec![0u8; dist.t];
    candidates_rec(dist, i, 0, 0, 0, &mut row, true, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn candidates_rec(
    dist: &OrbitDistribution,
    i: usize,
    c: usize,
    sum: i64,
    diag: i64,
    row: &mut Vec<u8>,
    sorted: bool,
    out: &mut Vec<Vec<u8>>,
) {
    let k = dist.params.k as i64;
    let target = dist.diag_target(i);
    if c == dist.t {
        if sum == k && diag == target {
            out.push(row.clone());
        }
        return;
    }
    // Remaining capacity bounds.
    let rest_sum: i64 = (c..dist.t).map(|r| dist.cell_values(i, r).max() as i64).sum();
    if sum + rest_sum < k {
        return;
    }
    let cv = dist.cell_values(i, c);
    let mut hi = cv.max();
    if sorted && c > 0 && dist.point_orbits[c] == dist.point_orbits[c - 1] {
        hi = hi.min(row[c - 1]);
    }
    for x in (0..=hi).rev() {
        if !cv.allows(x) {
            continue;
        }
        let s = sum + x as i64;
        let d = diag + dist.diag_coef(i, c) * (x as i64) * (x as i64);
        if s > k || d > target {
            continue;
        }
        row[c] = x;
        candidates_rec(dist, i, c + 1, s, d, row, sorted, out);
    }
    row[c] = 0;
}

/// A `t × t` orbit matrix; `gamma[i][r]` counts points of orbit `r` on a
/// representative block of orbit `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrbitMatrix {
    pub dist: OrbitDistribution,
    pub gamma: Vec<Vec<u8>>,
}

impl OrbitMatrix {
    pub fn new(dist: OrbitDistribution, gamma: Vec<Vec<u8>>) -> Result<Self> {
        if gamma.len() != dist.t || gamma.iter().any(|r| r.len() != dist.t) {
            return Err(Error::InvalidOrbitMatrix(format!("expected a {0}x{0} matrix", dist.t)));
        }
        Ok(OrbitMatrix { dist, gamma })
    }

    pub fn is_valid(&self) -> bool {
        verify_orbit_matrix(self)
    }

    /// Rows in search order.
    fn search_rows(&self) -> Vec<Vec<u8>> {
        self.dist.search_order().into_iter().map(|i| self.gamma[i].clone()).collect()
    }

    fn from_search_rows(dist: &OrbitDistribution, rows: &[Vec<u8>]) -> OrbitMatrix {
        let mut gamma = vec![Vec::new(); dist.t];
        for (pos, i) in dist.search_order().into_iter().enumerate() {
            gamma[i] = rows[pos].clone();
        }
        OrbitMatrix { dist: dist.clone(), gamma }
    }

    /// The lexicographically greatest equivalent arrangement.
    pub fn canonical(&self) -> OrbitMatrix {
        let rows = self.search_rows();
        let classes = row_classes(&self.dist);
        let best = lexmax_form(&rows, &classes, initial_cells(&self.dist));
        OrbitMatrix::from_search_rows(&self.dist, &best)
    }

    pub fn is_equivalent(&self, other: &OrbitMatrix) -> bool {
        self.dist == other.dist && self.canonical() == other.canonical()
    }

    pub fn to_text(&self) -> String {
        let d = &self.dist;
        let DesignParams { v, k, lambda } = d.params;
        let mut s = format!("OM {v} {k} {lambda} {} {} {}\n", d.p, d.f, d.t);
        let join = |xs: &[usize]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "{}", join(&d.point_orbits));
        let _ = writeln!(s, "{}", join(&d.block_orbits));
        for row in &self.gamma {
            let _ = writeln!(s, "{}", row.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
        }
        s
    }
}

/// Checks entry bounds, row sums, the orthogonality equations (diagonal and
/// off-diagonal), column counting, and that fixed blocks meet non-fixed
/// point orbits in 0 or `p` points.
pub fn verify_orbit_matrix(om: &OrbitMatrix) -> bool {
    let d = &om.dist;
    let t = d.t;
    if om.gamma.len() != t || om.gamma.iter().any(|r| r.len() != t) {
        return false;
    }
    for i in 0..t {
        for r in 0..t {
            if !d.cell_values(i, r).allows(om.gamma[i][r]) {
                return false;
            }
        }
        if om.gamma[i].iter().map(|&x| x as usize).sum::<usize>() != d.params.k {
            return false;
        }
    }
    for i in 0..t {
        let diag: i64 = (0..t).map(|r| d.diag_coef(i, r) * (om.gamma[i][r] as i64).pow(2)).sum();
        if diag != d.diag_target(i) {
            return false;
        }
        for j in i + 1..t {
            let cross: i64 = (0..t)
                .map(|r| d.cross_coef(r) * om.gamma[i][r] as i64 * om.gamma[j][r] as i64)
                .sum();
            if cross != d.cross_target() {
                return false;
            }
        }
    }
    for r in 0..t {
        let col: usize = (0..t).map(|i| d.block_orbits[i] * om.gamma[i][r] as usize).sum();
        if col != d.params.k * d.point_orbits[r] {
            return false;
        }
    }
    true
}

/// Parses records in the orbit-matrix text format.
pub fn read_orbit_matrices<R: BufRead>(reader: R) -> Result<Vec<OrbitMatrix>> {
    records(reader)?
        .into_iter()
        .map(|(line, rec)| {
            let h = header(line, &rec[0], "OM", 6)?;
            let params = DesignParams::new(h[0], h[1], h[2])?;
            let dist = OrbitDistribution::new(params, h[3], h[4])?;
            if dist.t != h[5] {
                return Err(Error::Parse { line, msg: format!("t={} but distribution has {}", h[5], dist.t) });
            }
            if rec.len() != 3 + dist.t {
                return Err(Error::Parse { line, msg: format!("expected {} lines", 3 + dist.t) });
            }
            let nums = |n: usize, s: &str| -> Result<Vec<usize>> {
                s.split_whitespace()
                    .map(|x| x.parse::<usize>().map_err(|e| Error::Parse { line: line + n, msg: e.to_string() }))
                    .collect()
            };
            if nums(1, &rec[1])? != dist.point_orbits || nums(2, &rec[2])? != dist.block_orbits {
                return Err(Error::Parse { line, msg: "orbit lengths do not match the header".into() });
            }
            let mut gamma = Vec::with_capacity(dist.t);
            for n in 0..dist.t {
                let row = nums(3 + n, &rec[3 + n])?;
                if row.len() != dist.t || row.iter().any(|&x| x > u8::MAX as usize) {
                    return Err(Error::Parse { line: line + 3 + n, msg: "bad row".into() });
                }
                gamma.push(row.into_iter().map(|x| x as u8).collect());
            }
            OrbitMatrix::new(dist, gamma)
        })
        .collect()
}

pub fn write_orbit_matrices(oms: &[OrbitMatrix]) -> String {
    oms.iter().map(|m| m.to_text()).collect::<Vec<_>>().join("\n")
}

// ---------------------------------------------------------------------------
// Canonical arrangement under row/column permutations within classes.

/// Row class (orbit length) per search position.
fn row_classes(dist: &OrbitDistribution) -> Vec<usize> {
    dist.search_order().into_iter().map(|i| dist.block_orbits[i]).collect()
}

fn initial_cells(dist: &OrbitDistribution) -> Vec<Vec<usize>> {
    let mut cells = Vec::new();
    if dist.f > 0 {
        cells.push((0..dist.f).collect());
    }
    if dist.t > dist.f {
        cells.push((dist.f..dist.t).collect());
    }
    cells
}

/// `row` rearranged descending within each cell of preimage columns.
fn sorted_in_cells(row: &[u8], cells: &[Vec<usize>], out: &mut Vec<u8>) {
    out.clear();
    for cell in cells {
        let start = out.len();
        out.extend(cell.iter().map(|&c| row[c]));
        out[start..].sort_unstable_by(|a, b| b.cmp(a));
    }
}

fn refine_cells(row: &[u8], cells: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(cells.len() + 4);
    for cell in cells {
        let mut vals: Vec<u8> = cell.iter().map(|&c| row[c]).collect();
        vals.sort_unstable_by(|a, b| b.cmp(a));
        vals.dedup();
        for v in vals {
            out.push(cell.iter().copied().filter(|&c| row[c] == v).collect());
        }
    }
    out
}

/// True when no rearrangement of `rows` is lexicographically greater.
///
/// Rows are tried position by position; only rows whose best column
/// arrangement ties the current row are expanded. Arrangements that
/// reproduce the matrix are automorphisms and prune sibling rows in the
/// same orbit.
fn is_lexmax(rows: &[Vec<u8>], classes: &[usize], cells: Vec<Vec<usize>>) -> bool {
    let mut st = LexState {
        rows,
        classes,
        used: vec![false; rows.len()],
        path: Vec::with_capacity(rows.len()),
        autos: Vec::new(),
        buf: Vec::new(),
    };
    st.rec(&cells)
}

struct LexState<'a> {
    rows: &'a [Vec<u8>],
    classes: &'a [usize],
    used: Vec<bool>,
    path: Vec<usize>,
    /// Row permutations found to be automorphisms; `g[q]` is the image of row `q`.
    autos: Vec<Vec<usize>>,
    buf: Vec<u8>,
}

impl LexState<'_> {
    fn rec(&mut self, cells: &[Vec<usize>]) -> bool {
        let pos = self.path.len();
        let m = self.rows.len();
        if pos == m {
            if self.path.iter().enumerate().any(|(q, &r)| q != r) {
                self.autos.push(self.path.clone());
            }
            return true;
        }
        let mut explored: Vec<usize> = Vec::new();
        for cand in 0..m {
            if self.used[cand] || self.classes[cand] != self.classes[pos] {
                continue;
            }
            if !explored.is_empty() && self.in_explored_orbit(cand, &explored) {
                continue;
            }
            sorted_in_cells(&self.rows[cand], cells, &mut self.buf);
            match self.buf.as_slice().cmp(self.rows[pos].as_slice()) {
                Ordering::Greater => return false,
                Ordering::Less => {}
                Ordering::Equal => {
                    let refined = refine_cells(&self.rows[cand], cells);
                    self.used[cand] = true;
                    self.path.push(cand);
                    let ok = self.rec(&refined);
                    self.path.pop();
                    self.used[cand] = false;
                    if !ok {
                        return false;
                    }
                    explored.push(cand);
                }
            }
        }
        true
    }

    /// Whether `cand` lies in the orbit of an explored row under the
    /// automorphisms found so far that fix the current path pointwise.
    fn in_explored_orbit(&self, cand: usize, explored: &[usize]) -> bool {
        let gens: Vec<&Vec<usize>> =
            self.autos.iter().filter(|g| self.path.iter().all(|&r| g[r] == r)).collect();
        if gens.is_empty() {
            return false;
        }
        let m = self.rows.len();
        let mut seen = vec![false; m];
        let mut stack: Vec<usize> = explored.to_vec();
        for &e in explored {
            seen[e] = true;
        }
        while let Some(x) = stack.pop() {
            for g in &gens {
                let y = g[x];
                if !seen[y] {
                    if y == cand {
                        return true;
                    }
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        false
    }
}

/// The lexicographically greatest arrangement of `rows`.
fn lexmax_form(rows: &[Vec<u8>], classes: &[usize], cells: Vec<Vec<usize>>) -> Vec<Vec<u8>> {
    let mut used = vec![false; rows.len()];
    let mut cur = Vec::with_capacity(rows.len());
    let mut best: Option<Vec<Vec<u8>>> = None;
    lexmax_form_rec(rows, classes, &cells, &mut used, &mut cur, &mut best);
    best.expect("at least the identity arrangement")
}

fn lexmax_form_rec(
    rows: &[Vec<u8>],
    classes: &[usize],
    cells: &[Vec<usize>],
    used: &mut [bool],
    cur: &mut Vec<Vec<u8>>,
    best: &mut Option<Vec<Vec<u8>>>,
) {
    let pos = cur.len();
    if pos == rows.len() {
        if best.as_ref().is_none_or(|b| cur.as_slice() > b.as_slice()) {
            *best = Some(cur.clone());
        }
        return;
    }
    let mut options: Vec<(Vec<u8>, usize)> = Vec::new();
    let mut buf = Vec::new();
    for cand in 0..rows.len() {
        if used[cand] || classes[cand] != classes[pos] {
            continue;
        }
        sorted_in_cells(&rows[cand], cells, &mut buf);
        options.push((buf.clone(), cand));
    }
    let top = match options.iter().map(|o| &o.0).max() {
        Some(t) => t.clone(),
        None => return,
    };
    // Prune when the prefix cannot beat the best so far.
    if let Some(b) = best.as_ref() {
        match cur.as_slice().cmp(&b[..pos]) {
            Ordering::Less => return,
            Ordering::Equal if top < b[pos] => return,
            _ => {}
        }
    }
    for (s, cand) in options {
        if s != top {
            continue;
        }
        let refined = refine_cells(&rows[cand], cells);
        used[cand] = true;
        cur.push(s);
        lexmax_form_rec(rows, classes, &refined, used, cur, best);
        cur.pop();
        used[cand] = false;
    }
}

// ---------------------------------------------------------------------------
// Orderly search.
//
// Rows are placed in search order. Every position of a class block draws
// its row from a pool: candidates of that class that meet all placed rows
// correctly and come after the previous row of the block. A second pool
// tracks the candidates of the next block. Before branching, both pools are
// reduced to rows with enough compatible partners and the column sums are
// checked against what the pools can still supply.

/// Search state after a prefix of rows (in search order) has been placed.
#[derive(Clone)]
struct Node {
    rows: Vec<Vec<u8>>,
    /// Contiguous column cells of columns identical on all placed rows.
    segments: Vec<(usize, usize)>,
    colsum: Vec<i64>,
    /// What later rows must still add to each column inner product,
    /// row-major over `t × t`.
    gram: Vec<i64>,
}

/// All candidate rows of one block, in descending order, with bit-plane
/// packings for fast inner products.
struct Candidates {
    rows: Vec<Vec<u8>>,
    stride: usize,
    packed: Vec<u64>,
}

impl Candidates {
    fn new(rows: Vec<Vec<u8>>, layout: &Layout) -> Self {
        let stride = 2 * layout.words;
        let mut packed = vec![0u64; rows.len() * stride];
        for (n, row) in rows.iter().enumerate() {
            layout.pack(row, &mut packed[n * stride..(n + 1) * stride]);
        }
        Candidates { rows, stride, packed }
    }

    fn packed(&self, id: u32) -> &[u64] {
        let id = id as usize;
        &self.packed[id * self.stride..(id + 1) * self.stride]
    }
}

/// Bit layout in which the off-diagonal equation becomes one AND and
/// popcount. Column `c` owns an `m × m × coef` block of bits, `m` its largest
/// entry. The left code of entry `x` sets the bits with first index below
/// `x`; the right code of `y` sets those with second index below `y`. The
/// two codes of a column then share exactly `coef·x·y` bits.
struct Layout {
    words: usize,
    /// Bit offset, largest entry and coefficient per column.
    cols: Vec<(usize, usize, usize)>,
    target: u32,
}

impl Layout {
    fn new(dist: &OrbitDistribution) -> Self {
        let mut cols = Vec::with_capacity(dist.t);
        let mut bits = 0;
        for c in 0..dist.t {
            let m = dist.point_orbits[c];
            let coef = dist.cross_coef(c) as usize;
            cols.push((bits, m, coef));
            bits += m * m * coef;
        }
        Layout { words: bits.div_ceil(64).max(1), cols, target: dist.cross_target() as u32 }
    }

    /// Writes the left code followed by the right code.
    fn pack(&self, row: &[u8], out: &mut [u64]) {
        let (left, right) = out.split_at_mut(self.words);
        for (&x, &(off, m, coef)) in row.iter().zip(&self.cols) {
            for a in 0..m {
                for b in 0..m {
                    for r in 0..coef {
                        let bit = off + (a * m + b) * coef + r;
                        if a < x as usize {
                            left[bit / 64] |= 1 << (bit % 64);
                        }
                        if b < x as usize {
                            right[bit / 64] |= 1 << (bit % 64);
                        }
                    }
                }
            }
        }
    }

    /// Whether two packed rows satisfy the off-diagonal equation.
    #[inline]
    fn compatible(&self, a: &[u64], b: &[u64]) -> bool {
        let w = self.words;
        let n: u32 = a[..w].iter().zip(&b[w..2 * w]).map(|(x, y)| (x & y).count_ones()).sum();
        n == self.target
    }
}

/// Pools up to this size get an explicit compatibility graph.
const GRAPH_LIMIT: usize = 800;

/// Candidate rows still usable for the open positions of one block.
#[derive(Clone)]
struct Pool {
    cands: Arc<Candidates>,
    set: Members,
}

#[derive(Clone)]
enum Members {
    /// Candidate ids in ascending order.
    List(Vec<u32>),
    /// Members of `base` marked in `alive`, with the compatibility graph.
    Graph { base: Arc<GraphBase>, alive: Vec<u64> },
}

struct GraphBase {
    ids: Vec<u32>,
    words: usize,
    adj: Vec<u64>,
}

impl GraphBase {
    fn row(&self, pos: usize) -> &[u64] {
        &self.adj[pos * self.words..(pos + 1) * self.words]
    }
}

fn bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(w, &x)| {
        let mut x = x;
        std::iter::from_fn(move || {
            if x == 0 {
                return None;
            }
            let b = x.trailing_zeros() as usize;
            x &= x - 1;
            Some(w * 64 + b)
        })
    })
}

/// Bits strictly above `pos` within word `w`.
fn above(w: usize, pos: usize) -> u64 {
    let start = pos + 1;
    if w * 64 >= start {
        !0
    } else if w * 64 + 64 <= start {
        0
    } else {
        !0u64 << (start % 64)
    }
}

impl Pool {
    fn new(rows: Vec<Vec<u8>>, layout: &Layout) -> Pool {
        let n = rows.len() as u32;
        Pool { cands: Arc::new(Candidates::new(rows, layout)), set: Members::List((0..n).collect()) }
    }

    fn with(&self, set: Members) -> Pool {
        Pool { cands: self.cands.clone(), set }
    }

    fn len(&self) -> usize {
        match &self.set {
            Members::List(ids) => ids.len(),
            Members::Graph { alive, .. } => alive.iter().map(|w| w.count_ones() as usize).sum(),
        }
    }

    /// `(position, candidate id)` of every member in ascending id order.
    fn members(&self) -> Vec<(usize, u32)> {
        match &self.set {
            Members::List(ids) => ids.iter().copied().enumerate().collect(),
            Members::Graph { base, alive } => bits(alive).map(|p| (p, base.ids[p])).collect(),
        }
    }

    /// Members after position `pos` that are compatible with member `id`.
    fn after(&self, pos: usize, id: u32, layout: &Layout) -> Pool {
        let set = match &self.set {
            Members::List(ids) => {
                let a = self.cands.packed(id);
                Members::List(
                    ids[pos + 1..].iter().copied().filter(|&x| layout.compatible(a, self.cands.packed(x))).collect(),
                )
            }
            Members::Graph { base, alive } => {
                let row = base.row(pos);
                let alive = alive.iter().zip(row).enumerate().map(|(w, (&a, &r))| a & r & above(w, pos)).collect();
                Members::Graph { base: base.clone(), alive }
            }
        };
        self.with(set)
    }

    /// Keeps members compatible with at least `need - 1` other members;
    /// `None` when fewer than `need` remain.
    fn core(self, need: usize, layout: &Layout) -> Option<Pool> {
        if self.len() < need {
            return None;
        }
        if need < 2 {
            return Some(self);
        }
        let (base, mut alive) = match self.set {
            Members::List(ids) if ids.len() <= GRAPH_LIMIT => {
                let n = ids.len();
                let words = n.div_ceil(64).max(1);
                let mut adj = vec![0u64; n * words];
                for a in 0..n {
                    let pa = self.cands.packed(ids[a]);
                    for b in a + 1..n {
                        if layout.compatible(pa, self.cands.packed(ids[b])) {
                            adj[a * words + b / 64] |= 1 << (b % 64);
                            adj[b * words + a / 64] |= 1 << (a % 64);
                        }
                    }
                }
                let mut alive = vec![0u64; words];
                for p in 0..n {
                    alive[p / 64] |= 1 << (p % 64);
                }
                (Arc::new(GraphBase { ids, words, adj }), alive)
            }
            Members::Graph { base, alive } => (base, alive),
            list => return Some(Pool { cands: self.cands, set: list }),
        };
        loop {
            let mut changed = false;
            let live: Vec<usize> = bits(&alive).collect();
            for p in live {
                let deg: u32 = base.row(p).iter().zip(&alive).map(|(a, b)| (a & b).count_ones()).sum();
                if (deg as usize) + 1 < need {
                    alive[p / 64] &= !(1 << (p % 64));
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let pool = Pool { cands: self.cands, set: Members::Graph { base, alive } };
        (pool.len() >= need).then_some(pool)
    }

    /// Least and greatest column sums over `count` distinct members.
    fn column_range(&self, count: usize, t: usize, maxval: usize) -> Vec<(i64, i64)> {
        let mut hist = vec![vec![0usize; maxval + 1]; t];
        for (_, id) in self.members() {
            for (c, &x) in self.cands.rows[id as usize].iter().enumerate() {
                hist[c][x as usize] += 1;
            }
        }
        hist.iter()
            .map(|h| {
                let take = |order: &mut dyn Iterator<Item = usize>| {
                    let (mut left, mut s) = (count, 0i64);
                    for x in order {
                        let n = h[x].min(left);
                        s += (n * x) as i64;
                        left -= n;
                    }
                    s
                };
                (take(&mut (0..=maxval)), take(&mut (0..=maxval).rev()))
            })
            .collect()
    }
}

struct Searcher<'a> {
    dist: &'a OrbitDistribution,
    order: Vec<usize>,
    /// Block-orbit length per search position.
    classes: Vec<usize>,
    layout: Layout,
    /// `cap_after[m][r]`: largest weighted column contribution of rows after
    /// search position `m`.
    cap_after: Vec<Vec<i64>>,
    /// `gcd_after[m][r]`: every contribution of later rows is a multiple.
    gcd_after: Vec<Vec<i64>>,
    /// End of the run of equal-class positions containing each position.
    block_end: Vec<usize>,
    /// Prune: canonicity after every placed row, lookahead and the column
    /// product test. Without it only complete matrices are tested.
    prune: bool,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl<'a> Searcher<'a> {
    fn new(dist: &'a OrbitDistribution) -> Self {
        let order = dist.search_order();
        let t = dist.t;
        let mut cap_after = vec![vec![0i64; t]; t + 1];
        let mut gcd_after = vec![vec![0i64; t]; t + 1];
        for m in (0..t).rev() {
            let i = order[m];
            for r in 0..t {
                let cv = dist.cell_values(i, r);
                let w = dist.block_orbits[i] as i64;
                cap_after[m][r] = cap_after[m + 1][r] + w * cv.max() as i64;
                gcd_after[m][r] = gcd(gcd_after[m + 1][r], w * cv.step());
            }
        }
        // Shift so that index m refers to rows strictly after m.
        cap_after.remove(0);
        gcd_after.remove(0);
        let classes = row_classes(dist);
        let mut block_end = vec![t; t];
        for m in (0..t.saturating_sub(1)).rev() {
            block_end[m] = if classes[m + 1] == classes[m] { block_end[m + 1] } else { m + 1 };
        }
        let layout = Layout::new(dist);
        Searcher { dist, order, classes, layout, cap_after, gcd_after, block_end, prune: true }
    }

    fn root(&self) -> (Node, Option<Pool>) {
        let segments = initial_cells(self.dist).iter().map(|c| (c[0], c[c.len() - 1] + 1)).collect();
        let d = self.dist;
        let t = d.t;
        let (k, lambda) = (d.params.k as i64, d.params.lambda as i64);
        let mut gram = vec![0i64; t * t];
        for r in 0..t {
            for s in 0..t {
                let (wr, ws) = (d.point_orbits[r] as i64, d.point_orbits[s] as i64);
                gram[r * t + s] = lambda * wr * ws + if r == s { (k - lambda) * wr } else { 0 };
            }
        }
        let node = Node { rows: Vec::new(), segments, colsum: vec![0; t], gram };
        let rows = self.generate(&node);
        let pool = Pool::new(rows, &self.layout);
        let pool = self.lookahead(&node, pool);
        (node, pool)
    }

    /// Every row of the next position's class that satisfies its own
    /// equations and meets all placed rows correctly, in descending order.
    /// Later rows of the same class are drawn from this pool.
    fn generate(&self, node: &Node) -> Vec<Vec<u8>> {
        let m = node.rows.len();
        let i = self.order[m];
        let d = self.dist;
        let t = d.t;
        let k = d.params.k;
        let w = d.block_orbits[i] as i64;
        // Values each column may take given the column-sum bookkeeping.
        let allowed: Vec<Vec<u8>> = (0..t)
            .map(|c| {
                let cv = d.cell_values(i, c);
                let target = (k * d.point_orbits[c]) as i64;
                let cap = self.cap_after[m][c];
                let g = self.gcd_after[m][c];
                (0..=cv.max())
                    .filter(|&x| cv.allows(x))
                    .filter(|&x| {
                        let left = target - node.colsum[c] - w * x as i64;
                        left >= 0 && left <= cap && if g == 0 { left == 0 } else { left % g == 0 }
                    })
                    .collect()
            })
            .collect();
        // Exact suffix bounds per constraint given the remaining row sum:
        // constraint 0 is the diagonal equation, 1..=m the cross products.
        let width = k + 1;
        let nq = m + 1;
        let mut lo = vec![i64::MAX; nq * (t + 1) * width];
        let mut hi = vec![i64::MIN; nq * (t + 1) * width];
        let at = |q: usize, c: usize, r: usize| (q * (t + 1) + c) * width + r;
        for q in 0..nq {
            lo[at(q, t, 0)] = 0;
            hi[at(q, t, 0)] = 0;
        }
        for c in (0..t).rev() {
            for q in 0..nq {
                let unit = if q == 0 { 0 } else { d.cross_coef(c) * node.rows[q - 1][c] as i64 };
                for r in 0..width {
                    let (mut l, mut h) = (i64::MAX, i64::MIN);
                    for &x in &allowed[c] {
                        let x = x as usize;
                        if x > r {
                            break;
                        }
                        let (nl, nh) = (lo[at(q, c + 1, r - x)], hi[at(q, c + 1, r - x)]);
                        if nl > nh {
                            continue;
                        }
                        let xi = x as i64;
                        let cost = if q == 0 { d.diag_coef(i, c) * xi * xi } else { unit * xi };
                        l = l.min(nl + cost);
                        h = h.max(nh + cost);
                    }
                    lo[at(q, c, r)] = l;
                    hi[at(q, c, r)] = h;
                }
            }
        }
        let mut targets = vec![d.cross_target(); nq];
        targets[0] = d.diag_target(i);
        let mut st = RowState { row: vec![0u8; t], partial: vec![0i64; nq], out: Vec::new() };
        let ctx = RowCtx { d, node, i, allowed, lo, hi, width, targets, k: k as i64 };
        ctx.rec(&mut st, 0, 0);
        st.out
    }

    /// Prunes the pool and checks that the column sums are reachable.
    fn lookahead(&self, node: &Node, pool: Pool) -> Option<Pool> {
        if !self.prune {
            return Some(pool);
        }
        let d = self.dist;
        let m = node.rows.len();
        let end = self.block_end[m];
        let rem = end - m;
        let pool = pool.core(rem, &self.layout)?;
        let w = self.classes[m] as i64;
        let ranges = pool.column_range(rem, d.t, d.p);
        for (c, (l, h)) in ranges.into_iter().enumerate() {
            let need = (d.params.k * d.point_orbits[c]) as i64 - node.colsum[c];
            let later = if end < d.t { self.cap_after[end - 1][c] } else { 0 };
            if need < w * l || need > w * h + later {
                return None;
            }
        }
        Some(pool)
    }

    /// Whether `row` is non-increasing on every column segment of `node`.
    fn fits_segments(node: &Node, row: &[u8]) -> bool {
        node.segments.iter().all(|&(s, e)| (s + 1..e).all(|c| row[c] <= row[c - 1]))
    }

    fn child(&self, node: &Node, row: Vec<u8>) -> Node {
        let m = node.rows.len();
        let w = self.classes[m] as i64;
        let mut segments = Vec::with_capacity(node.segments.len() + 2);
        for &(s, e) in &node.segments {
            let mut a = s;
            for c in s + 1..e {
                if row[c] != row[c - 1] {
                    segments.push((a, c));
                    a = c;
                }
            }
            segments.push((a, e));
        }
        let mut colsum = node.colsum.clone();
        for (c, &x) in row.iter().enumerate() {
            colsum[c] += w * x as i64;
        }
        let t = self.dist.t;
        let mut gram = node.gram.clone();
        for r in 0..t {
            if row[r] == 0 {
                continue;
            }
            let x = w * row[r] as i64;
            for s in 0..t {
                gram[r * t + s] -= x * row[s] as i64;
            }
        }
        let mut rows = node.rows.clone();
        rows.push(row);
        Node { rows, segments, colsum, gram }
    }

    /// Column inner products must stay reachable. Once only rows of length
    /// one remain, their entries are 0 or the point-orbit length, so the
    /// residual products form the Gram matrix of a 0/1 matrix with
    /// `t - m` rows.
    fn gram_ok(&self, node: &Node) -> bool {
        let d = self.dist;
        let t = d.t;
        let m = node.rows.len();
        if node.gram.iter().any(|&g| g < 0) {
            return false;
        }
        if m == t || self.classes[m] != 1 {
            return true;
        }
        let left = (t - m) as i64;
        let w = |r: usize| d.point_orbits[r] as i64;
        let count = |r: usize| {
            let g = node.gram[r * t + r];
            (g % (w(r) * w(r)) == 0).then(|| g / (w(r) * w(r)))
        };
        let counts: Option<Vec<i64>> = (0..t).map(count).collect();
        let Some(counts) = counts else { return false };
        for r in 0..t {
            if counts[r] > left {
                return false;
            }
            for s in r + 1..t {
                let g = node.gram[r * t + s];
                if g % (w(r) * w(s)) != 0 {
                    return false;
                }
                let g = g / (w(r) * w(s));
                if g > counts[r].min(counts[s]) || g < counts[r] + counts[s] - left {
                    return false;
                }
            }
        }
        true
    }

    fn canonical_prefix(&self, node: &Node) -> bool {
        is_lexmax(&node.rows, &self.classes[..node.rows.len()], initial_cells(self.dist))
    }

    /// Children of `node` with their pools, in search order. `pool` has
    /// already passed the lookahead, and so have the pools handed to
    /// `visit`.
    fn expand(&self, node: &Node, pool: &Pool, mut visit: impl FnMut(Node, Pool)) {
        let m = node.rows.len();
        let last = m + 1 == self.dist.t;
        let ends_block = m + 1 == self.block_end[m];
        for (pos, id) in pool.members() {
            let row = &pool.cands.rows[id as usize];
            if !Self::fits_segments(node, row) {
                continue;
            }
            let child = self.child(node, row.clone());
            if self.prune && !self.gram_ok(&child) {
                continue;
            }
            let next = if last {
                Pool::new(Vec::new(), &self.layout)
            } else if ends_block {
                // A fresh pool is costly, so test canonicity first.
                if self.prune && !self.canonical_prefix(&child) {
                    continue;
                }
                let Some(next) = self.lookahead(&child, Pool::new(self.generate(&child), &self.layout)) else {
                    continue;
                };
                visit(child, next);
                continue;
            } else {
                let Some(next) = self.lookahead(&child, pool.after(pos, id, &self.layout)) else { continue };
                next
            };
            if self.prune && !self.canonical_prefix(&child) {
                continue;
            }
            visit(child, next);
        }
    }

    fn dfs(&self, node: &Node, pool: Pool, emit: &mut dyn FnMut(OrbitMatrix)) {
        if node.rows.len() == self.dist.t {
            if self.prune || self.canonical_prefix(node) {
                let om = OrbitMatrix::from_search_rows(self.dist, &node.rows);
                debug_assert!(verify_orbit_matrix(&om));
                emit(om);
            }
            return;
        }
        self.expand(node, &pool, |child, next| self.dfs(&child, next, emit));
    }

    /// Canonical nodes at search depth `depth` with their pools, in search
    /// order.
    fn frontier(&self, node: Node, pool: Pool, depth: usize, out: &mut Vec<(Node, Pool)>) {
        if node.rows.len() == depth || node.rows.len() == self.dist.t {
            out.push((node, pool));
            return;
        }
        let mut children = Vec::new();
        self.expand(&node, &pool, |c, p| children.push((c, p)));
        for (c, p) in children {
            self.frontier(c, p, depth, out);
        }
    }
}

struct RowState {
    row: Vec<u8>,
    partial: Vec<i64>,
    out: Vec<Vec<u8>>,
}

struct RowCtx<'s> {
    d: &'s OrbitDistribution,
    node: &'s Node,
    i: usize,
    allowed: Vec<Vec<u8>>,
    lo: Vec<i64>,
    hi: Vec<i64>,
    width: usize,
    targets: Vec<i64>,
    k: i64,
}

impl RowCtx<'_> {
    fn rec(&self, st: &mut RowState, c: usize, sum: i64) {
        let t = self.d.t;
        let r = (self.k - sum) as usize;
        for (q, &p) in st.partial.iter().enumerate() {
            let idx = (q * (t + 1) + c) * self.width + r;
            let (l, h) = (self.lo[idx], self.hi[idx]);
            if l > h || p + l > self.targets[q] || p + h < self.targets[q] {
                return;
            }
        }
        if c == t {
            st.out.push(st.row.clone());
            return;
        }
        let coef_d = self.d.diag_coef(self.i, c);
        let coef_x = self.d.cross_coef(c);
        for &x in self.allowed[c].iter().rev() {
            if x as i64 > self.k - sum {
                continue;
            }
            let xi = x as i64;
            st.partial[0] += coef_d * xi * xi;
            for (j, prev) in self.node.rows.iter().enumerate() {
                st.partial[j + 1] += coef_x * xi * prev[c] as i64;
            }
            st.row[c] = x;
            self.rec(st, c + 1, sum + xi);
            st.partial[0] -= coef_d * xi * xi;
            for (j, prev) in self.node.rows.iter().enumerate() {
                st.partial[j + 1] -= coef_x * xi * prev[c] as i64;
            }
        }
        st.row[c] = 0;
    }
}

fn check_searchable(dist: &OrbitDistribution) -> Result<()> {
    if dist.p == 1 && dist.params.v > MAX_TRIVIAL_V {
        return Err(Error::Unsupported(format!(
            "identity orbit matrices are refused for v > {MAX_TRIVIAL_V}"
        )));
    }
    if dist.p > u8::MAX as usize {
        return Err(Error::Unsupported("orbit lengths above 255".into()));
    }
    Ok(())
}

/// Streams every orbit matrix of `dist`, one per equivalence class, in a
/// deterministic order.
pub fn for_each_orbit_matrix(dist: &OrbitDistribution, mut emit: impl FnMut(OrbitMatrix)) -> Result<()> {
    check_searchable(dist)?;
    let s = Searcher::new(dist);
    if let (node, Some(pool)) = s.root() {
        s.dfs(&node, pool, &mut emit);
    }
    Ok(())
}

pub fn build_orbit_matrices(dist: &OrbitDistribution) -> Result<Vec<OrbitMatrix>> {
    let mut out = Vec::new();
    for_each_orbit_matrix(dist, |om| out.push(om))?;
    Ok(out)
}

/// Same output as [`build_orbit_matrices`], computed by splitting the search
/// tree at `depth` placed rows into `parts` contiguous partitions that run
/// in parallel and are concatenated in partition order.
pub fn build_orbit_matrices_partitioned(
    dist: &OrbitDistribution,
    depth: usize,
    parts: usize,
) -> Result<Vec<OrbitMatrix>> {
    check_searchable(dist)?;
    let s = Searcher::new(dist);
    let mut frontier = Vec::new();
    if let (node, Some(pool)) = s.root() {
        s.frontier(node, pool, depth, &mut frontier);
    }
    let parts = parts.max(1);
    let chunk = frontier.len().div_ceil(parts).max(1);
    let results: Vec<Vec<OrbitMatrix>> = frontier
        .par_chunks(chunk)
        .map(|nodes| {
            let mut out = Vec::new();
            for (n, pool) in nodes {
                s.dfs(n, pool.clone(), &mut |om| out.push(om));
            }
            out
        })
        .collect();
    Ok(results.into_iter().flatten().collect())
}

/// Search without any pruning beyond exact row compatibility; only complete
/// matrices are tested for canonicity. Used to cross-check the pruned
/// search.
#[doc(hidden)]
pub fn build_orbit_matrices_unpruned(dist: &OrbitDistribution) -> Result<Vec<OrbitMatrix>> {
    check_searchable(dist)?;
    let mut s = Searcher::new(dist);
    s.prune = false;
    let mut out = Vec::new();
    if let (node, Some(pool)) = s.root() {
        s.dfs(&node, pool, &mut |om| out.push(om));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::fixtures::fano;

    fn p35() -> DesignParams {
        DesignParams::new(35, 17, 8).unwrap()
    }

    fn parse_row(s: &str) -> Vec<u8> {
        s.split_whitespace().map(|x| x.parse().unwrap()).collect()
    }

    #[test]
    fn distributions() {
        let fs: Vec<usize> = enumerate_distributions(p35(), 2, None).iter().map(|d| d.f).collect();
        assert_eq!(fs, vec![1, 3, 5, 7, 9, 11, 13, 15, 17]);
        let fs: Vec<usize> = enumerate_distributions(p35(), 2, Some(3)).iter().map(|d| d.f).collect();
        assert_eq!(fs, vec![3, 5, 7, 9, 11, 13, 15, 17]);
        let fano_p = DesignParams::new(7, 3, 1).unwrap();
        let fs: Vec<usize> = enumerate_distributions(fano_p, 2, None).iter().map(|d| d.f).collect();
        assert_eq!(fs, vec![1, 3]);
        let fs: Vec<usize> = enumerate_distributions(p35(), 17, None).iter().map(|d| d.f).collect();
        assert_eq!(fs, vec![1]);
        assert!(enumerate_distributions(p35(), 19, None).is_empty());
        assert!(enumerate_distributions(p35(), 4, None).is_empty());
        let d = OrbitDistribution::new(p35(), 2, 9).unwrap();
        assert_eq!(d.t, 22);
        assert_eq!(d.point_orbits.iter().sum::<usize>(), 35);
        assert_eq!(d.block_orbits.iter().filter(|&&x| x == 1).count(), 9);
    }

    #[test]
    fn lemma_row_types() {
        let d13 = OrbitDistribution::new(p35(), 2, 13).unwrap();
        let rows = row_candidates(&d13, 13);
        let expected: Vec<Vec<u8>> = [
            "1 1 1 1 1 1 1 1 0 0 0 0 0 1 1 1 1 1 1 1 1 1 0 0",
            "1 1 1 1 1 1 0 0 0 0 0 0 0 2 1 1 1 1 1 1 1 1 1 0",
            "1 1 1 1 0 0 0 0 0 0 0 0 0 2 2 1 1 1 1 1 1 1 1 1",
        ]
        .iter()
        .map(|s| parse_row(s))
        .collect();
        assert_eq!(rows, expected);
        let d17 = OrbitDistribution::new(p35(), 2, 17).unwrap();
        assert_eq!(
            row_candidates(&d17, 17),
            vec![parse_row("1 1 1 1 1 1 1 1 0 0 0 0 0 0 0 0 0 1 1 1 1 1 1 1 1 1")]
        );
    }

    #[test]
    fn identity_row_candidates() {
        let d = OrbitDistribution::new(DesignParams::new(7, 3, 1).unwrap(), 1, 7).unwrap();
        assert_eq!(row_candidates_all(&d, 0).len(), 35);
        assert!(row_candidates_all(&d, 4).iter().all(|r| r.iter().filter(|&&x| x == 1).count() == 3));
        assert_eq!(row_candidates(&d, 0), vec![vec![1, 1, 1, 0, 0, 0, 0]]);
    }

    #[test]
    fn lemma_nonexistence() {
        for f in [13, 17] {
            let d = OrbitDistribution::new(p35(), 2, f).unwrap();
            assert!(build_orbit_matrices(&d).unwrap().is_empty(), "f={f}");
        }
    }

    #[test]
    fn two_equal_rows_fail() {
        let d = OrbitDistribution::new(p35(), 2, 17).unwrap();
        let row = row_candidates(&d, 17)[0].clone();
        let mut gamma = vec![vec![0u8; d.t]; d.t];
        gamma[17] = row.clone();
        gamma[18] = row;
        assert!(!verify_orbit_matrix(&OrbitMatrix::new(d, gamma).unwrap()));
    }

    #[test]
    fn fano_as_identity_orbit_matrix() {
        let f = fano();
        let d = OrbitDistribution::new(f.params(), 1, 7).unwrap();
        let gamma = (0..7).map(|i| (0..7).map(|j| f.get(i, j) as u8).collect()).collect();
        let om = OrbitMatrix::new(d.clone(), gamma).unwrap();
        assert!(verify_orbit_matrix(&om));
        let all = build_orbit_matrices(&d).unwrap();
        assert_eq!(all.len(), 1);
        assert!(all[0].is_equivalent(&om));
    }

    #[test]
    fn identity_refused_for_large_v() {
        let d = OrbitDistribution::new(DesignParams::new(15, 7, 3).unwrap(), 1, 15).unwrap();
        assert!(matches!(build_orbit_matrices(&d), Err(Error::Unsupported(_))));
    }

    #[test]
    fn pruned_matches_unpruned_small() {
        for (v, k, l) in [(7, 3, 1), (11, 5, 2), (15, 7, 3), (13, 4, 1), (16, 6, 2)] {
            let params = DesignParams::new(v, k, l).unwrap();
            for p in [2, 3] {
                for d in enumerate_distributions(params, p, None) {
                    let a = build_orbit_matrices(&d).unwrap();
                    let b = build_orbit_matrices_unpruned(&d).unwrap();
                    assert_eq!(a, b, "{params} p={p} f={}", d.f);
                    for om in &a {
                        assert!(verify_orbit_matrix(om));
                        assert_eq!(om.canonical(), *om);
                    }
                }
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let d = OrbitDistribution::new(DesignParams::new(11, 5, 2).unwrap(), 2, 3).unwrap();
        let oms = build_orbit_matrices(&d).unwrap();
        assert!(!oms.is_empty());
        let text = write_orbit_matrices(&oms);
        assert!(text.starts_with("OM 11 5 2 2 3 7\n1 1 1 2 2 2 2\n1 1 1 2 2 2 2\n"));
        assert_eq!(read_orbit_matrices(text.as_bytes()).unwrap(), oms);
    }
}
