//! Hadamard 3-designs: extension of `2-(4t−1, 2t−1, t−1)` designs by a new
//! point, derivation back at a point, and classification of extensions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;

use rayon::prelude::*;

use crate::design::{parse_header as header, records, DesignParams, Incidence, IncidenceMatrix};
use crate::error::{Error, Result};
use crate::isomorph::{canonical_labeling, CanonicalRecord};

/// A `3-(4t, 2t, t−1)` design with `8t − 2` blocks. Rows are blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreeDesign {
    pub t: usize,
    inc: Incidence,
}

/// The `t` with `v = 4t − 1`, `k = 2t − 1`, `λ = t − 1`.
pub fn hadamard_t(params: DesignParams) -> Result<usize> {
    let DesignParams { v, k, lambda } = params;
    if (v + 1) % 4 == 0 {
        let t = (v + 1) / 4;
        if t >= 2 && k == 2 * t - 1 && lambda == t - 1 {
            return Ok(t);
        }
    }
    Err(Error::NotHadamardParameters(params.to_string()))
}

impl ThreeDesign {
    pub fn new(t: usize, inc: Incidence) -> Result<Self> {
        if t < 2 || inc.cols() != 4 * t || inc.rows() != 8 * t - 2 {
            return Err(Error::NotHadamardParameters(format!(
                "{} blocks on {} points for t = {t}",
                inc.rows(),
                inc.cols()
            )));
        }
        Ok(ThreeDesign { t, inc })
    }

    pub fn points(&self) -> usize {
        4 * self.t
    }

    pub fn block_size(&self) -> usize {
        2 * self.t
    }

    pub fn lambda(&self) -> usize {
        self.t - 1
    }

    pub fn incidence(&self) -> &Incidence {
        &self.inc
    }

    /// Exhaustive check: block sizes, every 3-subset of points in exactly
    /// `t − 1` blocks, and closure under complementation.
    pub fn is_3design(&self) -> bool {
        let b = self.inc.rows();
        if (0..b).any(|i| self.inc.row_weight(i) != self.block_size()) {
            return false;
        }
        let cols = self.inc.transpose();
        let n = self.points();
        let w = cols.words_per_row();
        let mut pair = vec![0u64; w];
        for x in 0..n {
            for y in x + 1..n {
                for (p, (a, c)) in pair.iter_mut().zip(cols.row(x).iter().zip(cols.row(y))) {
                    *p = a & c;
                }
                for z in y + 1..n {
                    let c: u32 = pair.iter().zip(cols.row(z)).map(|(a, c)| (a & c).count_ones()).sum();
                    if c as usize != self.lambda() {
                        return false;
                    }
                }
            }
        }
        self.complements_closed()
    }

    fn complements_closed(&self) -> bool {
        let comp = self.inc.complement();
        let rows: std::collections::HashSet<&[u64]> = (0..self.inc.rows()).map(|i| self.inc.row(i)).collect();
        (0..comp.rows()).all(|i| rows.contains(comp.row(i)))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "T3 {} {} {} {}\n",
            self.points(),
            self.block_size(),
            self.lambda(),
            self.inc.rows()
        );
        self.inc.write_rows(&mut s);
        s
    }
}

/// Adds the point `∞ = v` to every block and appends the complements of the
/// original blocks.
pub fn extend(m: &IncidenceMatrix) -> Result<ThreeDesign> {
    let t = hadamard_t(m.params())?;
    let v = m.v();
    let mut inc = Incidence::zeros(2 * v, v + 1);
    for i in 0..v {
        for j in 0..v {
            let x = m.get(i, j);
            inc.set(i, j, x);
            inc.set(v + i, j, !x);
        }
        inc.set(i, v, true);
    }
    ThreeDesign::new(t, inc)
}

/// Blocks through `point` with `point` removed; the remaining points keep
/// their relative order.
pub fn derive(d: &ThreeDesign, point: usize) -> Result<IncidenceMatrix> {
    let n = d.points();
    if point >= n {
        return Err(Error::UnknownPoint(point));
    }
    let params = DesignParams::new(n - 1, d.block_size() - 1, d.lambda())?;
    let mut inc = Incidence::zeros(n - 1, n - 1);
    let mut row = 0;
    for i in 0..d.inc.rows() {
        if !d.inc.get(i, point) {
            continue;
        }
        if row == n - 1 {
            return Err(Error::NotHadamardParameters("too many blocks through a point".into()));
        }
        for j in (0..n).filter(|&j| j != point) {
            let col = if j < point { j } else { j - 1 };
            inc.set(row, col, d.inc.get(i, j));
        }
        row += 1;
    }
    IncidenceMatrix::new(params, inc)
}

/// Orbits of the group generated by point permutations `gens` on `n`
/// points, each sorted, ordered by least member.
pub fn point_orbits(gens: &[Vec<usize>], n: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut orbit = vec![s];
        let mut i = 0;
        while i < orbit.len() {
            let x = orbit[i];
            for g in gens {
                if !seen[g[x]] {
                    seen[g[x]] = true;
                    orbit.push(g[x]);
                }
            }
            i += 1;
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}

/// One isomorphism class of 3-designs.
#[derive(Clone, Debug)]
pub struct ExtensionClass {
    pub record: CanonicalRecord,
    /// Isomorphism classes among its derived 2-designs, equal to the number
    /// of automorphism orbits on points.
    pub derived_classes: usize,
}

pub fn canonical_three_design(d: &ThreeDesign) -> ExtensionClass {
    let lab = canonical_labeling(&d.inc);
    let gens: Vec<Vec<usize>> = lab.record.aut_generators.iter().map(|g| g.point_perm.clone()).collect();
    let derived_classes = point_orbits(&gens, d.points()).len();
    ExtensionClass { record: lab.record, derived_classes }
}

/// Extensions of `designs` up to isomorphism, keyed by canonical bytes.
pub fn classify_extensions(designs: &[IncidenceMatrix]) -> Result<BTreeMap<Vec<u8>, ExtensionClass>> {
    let classes: Vec<ExtensionClass> = designs
        .par_iter()
        .map(|m| extend(m).map(|d| canonical_three_design(&d)))
        .collect::<Result<_>>()?;
    let mut out = BTreeMap::new();
    for c in classes {
        out.entry(c.record.key.clone()).or_insert(c);
    }
    Ok(out)
}

pub fn write_three_designs(designs: &[ThreeDesign]) -> String {
    let mut s = String::new();
    for (n, d) in designs.iter().enumerate() {
        if n > 0 {
            s.push('\n');
        }
        let _ = write!(s, "{}", d.to_text());
    }
    s
}

pub fn read_three_designs<R: BufRead>(reader: R) -> Result<Vec<ThreeDesign>> {
    let mut out = Vec::new();
    for (line, lines) in records(reader)? {
        let h = header(line, &lines[0], "T3", 4)?;
        let (n, k, lambda, b) = (h[0], h[1], h[2], h[3]);
        if n % 4 != 0 || k * 2 != n || lambda + 1 != n / 4 || b + 2 != 2 * n {
            return Err(Error::Parse { line, msg: "not Hadamard 3-design parameters".into() });
        }
        if lines.len() != b + 1 {
            return Err(Error::Parse { line, msg: format!("expected {b} block rows") });
        }
        let mut inc = Incidence::zeros(b, n);
        for (i, text) in lines[1..].iter().enumerate() {
            let bits: Vec<char> = text.trim().chars().collect();
            if bits.len() != n || bits.iter().any(|c| *c != '0' && *c != '1') {
                return Err(Error::Parse { line: line + 1 + i, msg: format!("expected {n} binary digits") });
            }
            for (j, c) in bits.iter().enumerate() {
                inc.set(i, j, *c == '1');
            }
        }
        out.push(ThreeDesign::new(n / 4, inc)?);
    }
    Ok(out)
}
