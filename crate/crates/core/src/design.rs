//! Symmetric 2-designs and their bit-packed incidence matrices.
//!
//! Rows are blocks and columns are points throughout the crate. A matrix
//! row is stored as a run of `u64` words so that block intersections reduce
//! to a handful of popcounts.

use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest point count supported by the packed representation.
pub const MAX_POINTS: usize = 1024;

/// Parameters `(v, k, λ)` of a symmetric 2-design.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DesignParams {
    pub v: usize,
    pub k: usize,
    pub lambda: usize,
}

impl DesignParams {
    pub fn new(v: usize, k: usize, lambda: usize) -> Result<Self> {
        validate_params(v, k, lambda)
    }

    /// The order `n = k - λ`.
    pub fn order(&self) -> usize {
        self.k - self.lambda
    }

    /// Parameters of the complementary design, `(v, v-k, v-2k+λ)`.
    pub fn complement(&self) -> Result<Self> {
        let k = self.v - self.k;
        let lambda = (self.v + self.lambda)
            .checked_sub(2 * self.k)
            .ok_or_else(|| Error::ParameterIdentityViolation("complement has negative λ".into()))?;
        validate_params(self.v, k, lambda)
    }
}

impl fmt::Display for DesignParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2-({},{},{})", self.v, self.k, self.lambda)
    }
}

/// Checks `λ(v-1) = k(k-1)` and `2 <= k < v`.
pub fn validate_params(v: usize, k: usize, lambda: usize) -> Result<DesignParams> {
    if v == 0 || k == 0 || lambda == 0 {
        return Err(Error::ParameterIdentityViolation(format!(
            "parameters must be positive, got ({v},{k},{lambda})"
        )));
    }
    if v > MAX_POINTS {
        return Err(Error::ParameterIdentityViolation(format!(
            "v={v} exceeds the supported maximum {MAX_POINTS}"
        )));
    }
    if !(2 <= k && k < v) {
        return Err(Error::ParameterIdentityViolation(format!("2 <= k < v fails for k={k}, v={v}")));
    }
    if lambda * (v - 1) != k * (k - 1) {
        return Err(Error::ParameterIdentityViolation(format!(
            "λ(v-1) = {} but k(k-1) = {}",
            lambda * (v - 1),
            k * (k - 1)
        )));
    }
    Ok(DesignParams { v, k, lambda })
}

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
pub(crate) fn intersect_count(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

/// A general `rows × cols` 0/1 incidence structure with bit-packed rows.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Incidence {
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Incidence {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = words_for(cols);
        Incidence { rows, cols, words, bits: vec![0; rows * words] }
    }

    /// Builds a structure from rows given as lists of column indices.
    pub fn from_row_sets(cols: usize, sets: &[Vec<usize>]) -> Self {
        let mut inc = Incidence::zeros(sets.len(), cols);
        for (i, s) in sets.iter().enumerate() {
            for &j in s {
                inc.set(i, j, true);
            }
        }
        inc
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn words_per_row(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.bits[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let w = &mut self.bits[i * self.words + j / 64];
        if value {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn set_row(&mut self, i: usize, row: &[u64]) {
        self.bits[i * self.words..(i + 1) * self.words].copy_from_slice(row);
    }

    pub fn row_weight(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn col_weight(&self, j: usize) -> usize {
        (0..self.rows).filter(|&i| self.get(i, j)).count()
    }

    pub fn row_intersection(&self, a: usize, b: usize) -> usize {
        intersect_count(self.row(a), self.row(b)) as usize
    }

    /// Columns incident with row `i`, ascending.
    pub fn row_support(&self, i: usize) -> Vec<usize> {
        (0..self.cols).filter(|&j| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Incidence {
        let mut t = Incidence::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    /// Bitwise complement of every row.
    pub fn complement(&self) -> Incidence {
        let mut c = self.clone();
        let tail = self.cols % 64;
        for i in 0..self.rows {
            let row = &mut c.bits[i * self.words..(i + 1) * self.words];
            for w in row.iter_mut() {
                *w = !*w;
            }
            if tail != 0 {
                row[self.words - 1] &= (1u64 << tail) - 1;
            }
        }
        c
    }

    /// Relabels blocks and points: entry `(i, j)` moves to
    /// `(block_perm[i], point_perm[j])`.
    pub fn permuted(&self, action: &PermutationAction) -> Result<Incidence> {
        if action.point_perm.len() != self.cols {
            return Err(Error::DegreeMismatch { expected: self.cols, got: action.point_perm.len() });
        }
        if action.block_perm.len() != self.rows {
            return Err(Error::DegreeMismatch { expected: self.rows, got: action.block_perm.len() });
        }
        let mut out = Incidence::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let ni = action.block_perm[i];
            for j in 0..self.cols {
                if self.get(i, j) {
                    out.set(ni, action.point_perm[j], true);
                }
            }
        }
        Ok(out)
    }

    /// Row-major bit string, most significant bit first within each byte.
    pub fn to_key_bytes(&self) -> Vec<u8> {
        let total = self.rows * self.cols;
        let mut out = vec![0u8; total.div_ceil(8)];
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    let q = i * self.cols + j;
                    out[q / 8] |= 0x80 >> (q % 8);
                }
            }
        }
        out
    }

    pub fn from_key_bytes(rows: usize, cols: usize, key: &[u8]) -> Result<Incidence> {
        let total = rows * cols;
        if key.len() != total.div_ceil(8) {
            return Err(Error::Parse {
                line: 0,
                msg: format!("key has {} bytes, expected {}", key.len(), total.div_ceil(8)),
            });
        }
        let mut inc = Incidence::zeros(rows, cols);
        for q in 0..total {
            if key[q / 8] & (0x80 >> (q % 8)) != 0 {
                inc.set(q / cols, q % cols, true);
            }
        }
        Ok(inc)
    }

    pub(crate) fn write_rows(&self, out: &mut String) {
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.push(if self.get(i, j) { '1' } else { '0' });
            }
            out.push('\n');
        }
    }
}

impl fmt::Debug for Incidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_rows(&mut s);
        write!(f, "Incidence {}x{}\n{}", self.rows, self.cols, s)
    }
}

/// A point permutation paired with a block permutation. `perm[x]` is the
/// image of `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PermutationAction {
    pub point_perm: Vec<usize>,
    pub block_perm: Vec<usize>,
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

impl PermutationAction {
    pub fn new(point_perm: Vec<usize>, block_perm: Vec<usize>) -> Result<Self> {
        if !is_permutation(&point_perm) || !is_permutation(&block_perm) {
            return Err(Error::ParameterIdentityViolation("not a permutation".into()));
        }
        Ok(PermutationAction { point_perm, block_perm })
    }

    pub fn identity(points: usize, blocks: usize) -> Self {
        PermutationAction { point_perm: (0..points).collect(), block_perm: (0..blocks).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.point_perm.iter().enumerate().all(|(i, &x)| i == x)
            && self.block_perm.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &PermutationAction) -> PermutationAction {
        PermutationAction {
            point_perm: self.point_perm.iter().map(|&x| other.point_perm[x]).collect(),
            block_perm: self.block_perm.iter().map(|&x| other.block_perm[x]).collect(),
        }
    }

    pub fn inverse(&self) -> PermutationAction {
        PermutationAction { point_perm: invert(&self.point_perm), block_perm: invert(&self.block_perm) }
    }

    /// Order of the action as a group element.
    pub fn order(&self) -> u128 {
        fn cycle_lcm(p: &[usize], acc: u128) -> u128 {
            let mut seen = vec![false; p.len()];
            let mut l = acc;
            for s in 0..p.len() {
                if seen[s] {
                    continue;
                }
                let mut len = 0u128;
                let mut x = s;
                while !seen[x] {
                    seen[x] = true;
                    x = p[x];
                    len += 1;
                }
                l = lcm(l, len);
            }
            l
        }
        let l = cycle_lcm(&self.point_perm, 1);
        cycle_lcm(&self.block_perm, l)
    }

    pub fn fixed_points(&self) -> usize {
        self.point_perm.iter().enumerate().filter(|(i, &x)| *i == x).count()
    }

    pub fn fixed_blocks(&self) -> usize {
        self.block_perm.iter().enumerate().filter(|(i, &x)| *i == x).count()
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u128, b: u128) -> u128 {
    a / gcd(a, b) * b
}

/// A `v × v` incidence matrix tagged with symmetric-design parameters.
///
/// Construction only checks dimensions; [`IncidenceMatrix::is_2design`]
/// checks the design property.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IncidenceMatrix {
    params: DesignParams,
    inc: Incidence,
}

impl IncidenceMatrix {
    pub fn new(params: DesignParams, inc: Incidence) -> Result<Self> {
        if inc.rows() != params.v || inc.cols() != params.v {
            return Err(Error::DegreeMismatch { expected: params.v, got: inc.rows().max(inc.cols()) });
        }
        Ok(IncidenceMatrix { params, inc })
    }

    pub fn from_rows(params: DesignParams, rows: &[&str]) -> Result<Self> {
        let mut inc = Incidence::zeros(params.v, params.v);
        if rows.len() != params.v {
            return Err(Error::Parse { line: 0, msg: format!("expected {} rows", params.v) });
        }
        for (i, r) in rows.iter().enumerate() {
            let r = r.trim();
            if r.len() != params.v {
                return Err(Error::Parse { line: i + 1, msg: format!("row has {} characters", r.len()) });
            }
            for (j, c) in r.chars().enumerate() {
                match c {
                    '1' => inc.set(i, j, true),
                    '0' => {}
                    _ => return Err(Error::Parse { line: i + 1, msg: format!("bad character {c:?}") }),
                }
            }
        }
        Ok(IncidenceMatrix { params, inc })
    }

    pub fn params(&self) -> DesignParams {
        self.params
    }

    pub fn incidence(&self) -> &Incidence {
        &self.inc
    }

    pub fn into_incidence(self) -> Incidence {
        self.inc
    }

    pub fn v(&self) -> usize {
        self.params.v
    }

    pub fn get(&self, block: usize, point: usize) -> bool {
        self.inc.get(block, point)
    }

    /// Row sums k, column sums k, and pairwise row intersections λ.
    pub fn is_2design(&self) -> bool {
        let DesignParams { v, k, lambda } = self.params;
        if self.inc.rows() != v || self.inc.cols() != v {
            return false;
        }
        if (0..v).any(|i| self.inc.row_weight(i) != k) {
            return false;
        }
        let mut col = vec![0usize; v];
        for i in 0..v {
            for (j, c) in col.iter_mut().enumerate() {
                if self.inc.get(i, j) {
                    *c += 1;
                }
            }
        }
        if col.iter().any(|&c| c != k) {
            return false;
        }
        (0..v).all(|a| (a + 1..v).all(|b| self.inc.row_intersection(a, b) == lambda))
    }

    /// The complementary design with parameters `(v, v-k, v-2k+λ)`.
    pub fn complement(&self) -> Result<IncidenceMatrix> {
        Ok(IncidenceMatrix { params: self.params.complement()?, inc: self.inc.complement() })
    }

    /// The dual structure (points and blocks swapped).
    pub fn transpose(&self) -> IncidenceMatrix {
        IncidenceMatrix { params: self.params, inc: self.inc.transpose() }
    }

    pub fn apply_action(&self, action: &PermutationAction) -> Result<IncidenceMatrix> {
        Ok(IncidenceMatrix { params: self.params, inc: self.inc.permuted(action)? })
    }

    pub fn is_automorphism(&self, action: &PermutationAction) -> bool {
        matches!(self.apply_action(action), Ok(m) if m == *self)
    }

    /// Writes the design in text form: `D v k lambda` then `v` rows.
    pub fn to_text(&self) -> String {
        let mut s = format!("D {} {} {}\n", self.params.v, self.params.k, self.params.lambda);
        self.inc.write_rows(&mut s);
        s
    }
}

/// Free-function form of [`IncidenceMatrix::is_2design`].
pub fn is_2design(m: &IncidenceMatrix) -> bool {
    m.is_2design()
}

pub fn complement(m: &IncidenceMatrix) -> Result<IncidenceMatrix> {
    m.complement()
}

pub fn apply_action(m: &IncidenceMatrix, a: &PermutationAction) -> Result<IncidenceMatrix> {
    m.apply_action(a)
}

/// Serializes designs separated by one blank line.
pub fn write_designs(designs: &[IncidenceMatrix]) -> String {
    designs.iter().map(|d| d.to_text()).collect::<Vec<_>>().join("\n")
}

/// Splits a text stream into blank-line separated records of
/// `(first line number, lines)`.
pub(crate) fn records<R: BufRead>(reader: R) -> Result<Vec<(usize, Vec<String>)>> {
    let mut out = Vec::new();
    let mut cur: Vec<String> = Vec::new();
    let mut start = 0;
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            if !cur.is_empty() {
                out.push((start, std::mem::take(&mut cur)));
            }
            continue;
        }
        if cur.is_empty() {
            start = n + 1;
        }
        cur.push(t.to_string());
    }
    if !cur.is_empty() {
        out.push((start, cur));
    }
    Ok(out)
}

pub(crate) fn parse_header(line: usize, text: &str, tag: &str, count: usize) -> Result<Vec<usize>> {
    let mut it = text.split_whitespace();
    if it.next() != Some(tag) {
        return Err(Error::Parse { line, msg: format!("expected header starting with {tag}") });
    }
    let nums = it
        .map(|s| s.parse::<usize>().map_err(|e| Error::Parse { line, msg: e.to_string() }))
        .collect::<Result<Vec<_>>>()?;
    if nums.len() != count {
        return Err(Error::Parse { line, msg: format!("header needs {count} numbers") });
    }
    Ok(nums)
}



/// Reads every design from a multi-design text stream.
pub fn read_designs<R: BufRead>(reader: R) -> Result<Vec<IncidenceMatrix>> {
    records(reader)?
        .into_iter()
        .map(|(line, rec)| {
            let h = parse_header(line, &rec[0], "D", 3)?;
            let params = validate_params(h[0], h[1], h[2])?;
            let rows: Vec<&str> = rec[1..].iter().map(|s| s.as_str()).collect();
            IncidenceMatrix::from_rows(params, &rows).map_err(|e| match e {
                Error::Parse { line: l, msg } => Error::Parse { line: line + l, msg },
                other => other,
            })
        })
        .collect()
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn params_identity() {
        assert_eq!(validate_params(35, 17, 8).unwrap().order(), 9);
        assert_eq!(validate_params(7, 3, 1).unwrap().order(), 2);
        assert!(matches!(validate_params(35, 17, 7), Err(Error::ParameterIdentityViolation(_))));
        assert!(validate_params(7, 7, 7).is_err());
        assert!(validate_params(0, 3, 1).is_err());
    }

    #[test]
    fn fano_checks() {
        let f = fano();
        assert!(f.is_2design());
        let mut broken = f.incidence().clone();
        broken.set(0, 6, true);
        assert!(!IncidenceMatrix::new(f.params(), broken).unwrap().is_2design());
        let mut ones = Incidence::zeros(7, 7);
        for i in 0..7 {
            for j in 0..7 {
                ones.set(i, j, true);
            }
        }
        assert!(!IncidenceMatrix::new(f.params(), ones).unwrap().is_2design());
    }

    #[test]
    fn complement_of_fano() {
        let c = fano().complement().unwrap();
        assert_eq!(c.params(), DesignParams::new(7, 4, 2).unwrap());
        assert!(c.is_2design());
        assert_eq!(c.complement().unwrap(), fano());
    }

    #[test]
    fn biplane_is_design() {
        assert!(biplane().is_2design());
        assert!(biplane().transpose().is_2design());
    }

    #[test]
    fn fano_automorphisms_by_brute_force() {
        // Every point permutation that maps blocks to blocks, with the induced
        // block permutation, leaves the matrix unchanged.
        let f = fano();
        let blocks: Vec<Vec<usize>> = (0..7).map(|i| f.incidence().row_support(i)).collect();
        let mut count = 0;
        let mut perm: Vec<usize> = (0..7).collect();
        permute_all(&mut perm, 0, &mut |p| {
            let mut bp = vec![0; 7];
            for (i, b) in blocks.iter().enumerate() {
                let mut img: Vec<usize> = b.iter().map(|&x| p[x]).collect();
                img.sort();
                match blocks.iter().position(|c| *c == img) {
                    Some(j) => bp[i] = j,
                    None => return,
                }
            }
            let a = PermutationAction::new(p.to_vec(), bp).unwrap();
            assert_eq!(f.apply_action(&a).unwrap(), f);
            count += 1;
        });
        assert_eq!(count, 168);
    }

    pub(crate) fn permute_all(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute_all(p, k + 1, f);
            p.swap(k, i);
        }
    }

    #[test]
    fn degree_mismatch() {
        let a = PermutationAction::identity(6, 7);
        assert!(matches!(fano().apply_action(&a), Err(Error::DegreeMismatch { .. })));
    }

    #[test]
    fn text_round_trip() {
        let text = write_designs(&[fano(), fano().complement().unwrap()]);
        let back = read_designs(text.as_bytes()).unwrap();
        assert_eq!(back, vec![fano(), fano().complement().unwrap()]);
        assert!(text.starts_with("D 7 3 1\n1101000\n"));
    }

    #[test]
    fn key_bytes_round_trip() {
        let f = fano();
        let key = f.incidence().to_key_bytes();
        assert_eq!(key.len(), 7);
        assert_eq!(key[0], 0b1101_0000);
        assert_eq!(Incidence::from_key_bytes(7, 7, &key).unwrap(), *f.incidence());
    }

    fn perm_strategy(n: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((0..n).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn action_is_group_action(p1 in perm_strategy(11), b1 in perm_strategy(11),
                                  p2 in perm_strategy(11), b2 in perm_strategy(11)) {
            let m = biplane();
            let a = PermutationAction::new(p1, b1).unwrap();
            let b = PermutationAction::new(p2, b2).unwrap();
            let lhs = m.apply_action(&a).unwrap().apply_action(&b).unwrap();
            prop_assert_eq!(lhs, m.apply_action(&a.then(&b)).unwrap());
            let relabeled = m.apply_action(&a).unwrap();
            prop_assert!(relabeled.is_2design());
            prop_assert!(relabeled.transpose().is_2design());
            prop_assert!(relabeled.complement().unwrap().is_2design());
            prop_assert_eq!(relabeled.apply_action(&a.inverse()).unwrap(), m);
        }
    }
}
