//! On-disk orchestration: orbit-matrix files, resumable indexing into a
//! deduplicating store, and reports.
//!
//! A store directory holds run manifests, one log per completed work unit
//! (one orbit matrix) and, after finalization, 256 shard files keyed by the
//! first byte of the canonical key. Unit logs are written to a temporary
//! name and renamed once complete, so an interrupted run leaves no partial
//! unit behind and a rerun redoes only missing units. Finalization is a
//! pure function of the unit logs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{DesignParams, Incidence, IncidenceMatrix};
use crate::error::{Error, Result};
use crate::hadamard::{classify_extensions, extend, write_three_designs, ThreeDesign};
use crate::indexer::{IndexingProblem, Indexer, SymmetryReduction};
use crate::isomorph::canonical_form;
use crate::orbit::{
    build_orbit_matrices_partitioned, enumerate_distributions, read_orbit_matrices, verify_orbit_matrix,
    write_orbit_matrices, OrbitDistribution, OrbitMatrix,
};

/// Plain-text report, one `key=value` pair per line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report(pub Vec<(String, String)>);

impl Report {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.0.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.0 {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// The `index`-th (1-based) of `count` interleaved partitions of a list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shard {
    pub index: usize,
    pub count: usize,
}

impl Shard {
    pub const WHOLE: Shard = Shard { index: 1, count: 1 };

    pub fn contains(&self, item: usize) -> bool {
        item % self.count == self.index - 1
    }
}

impl FromStr for Shard {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse { line: 0, msg: format!("shard `{s}` is not of the form i/n") };
        let (i, n) = s.split_once('/').ok_or_else(bad)?;
        let index: usize = i.trim().parse().map_err(|_| bad())?;
        let count: usize = n.trim().parse().map_err(|_| bad())?;
        if count == 0 || index == 0 || index > count {
            return Err(bad());
        }
        Ok(Shard { index, count })
    }
}

impl fmt::Display for Shard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.index, self.count)
    }
}

/// What one indexing run is responsible for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub params: DesignParams,
    pub p: usize,
    pub f: usize,
    /// Orbit matrices in the input file.
    pub om_count: usize,
    pub shard: Shard,
    /// Work units (orbit-matrix indices) owned by this run.
    pub units: Vec<usize>,
}

/// One distinct design in a finalized store.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoredRecord {
    pub key: Vec<u8>,
    pub aut_order: u128,
    /// First-seen provenance: orbit-matrix index and branch prefix.
    pub om_id: usize,
    pub branch: String,
    /// Number of times the design was produced.
    pub hits: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct UnitEntry {
    aut_order: u128,
    branch: String,
    hits: u64,
}

/// Distinct designs produced by one work unit.
#[derive(Clone, Debug, Default)]
pub struct UnitBuffer {
    entries: BTreeMap<Vec<u8>, UnitEntry>,
}

impl UnitBuffer {
    /// Records one production of `key`; repeats only count a hit.
    pub fn insert(&mut self, key: Vec<u8>, aut_order: u128, branch: &str) {
        self.insert_hits(key, aut_order, branch, 1);
    }

    fn insert_hits(&mut self, key: Vec<u8>, aut_order: u128, branch: &str, hits: u64) {
        self.entries
            .entry(key)
            .and_modify(|e| e.hits += hits)
            .or_insert_with(|| UnitEntry { aut_order, branch: branch.to_string(), hits });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.entries.values().map(|e| e.hits).sum()
    }
}

pub struct DedupStore {
    root: PathBuf,
}

const SHARDS: usize = 256;

fn branch_text(prefix: &[u8]) -> String {
    if prefix.is_empty() {
        "-".to_string()
    } else {
        prefix.iter().map(|b| char::from(b'0' + b)).collect()
    }
}

impl DedupStore {
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        for sub in ["units", "manifests", "shards"] {
            fs::create_dir_all(root.join(sub))?;
        }
        Ok(DedupStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn unit_path(&self, om_id: usize) -> PathBuf {
        self.root.join("units").join(format!("om-{om_id:06}.log"))
    }

    pub fn is_complete(&self, om_id: usize) -> bool {
        self.unit_path(om_id).exists()
    }

    /// Writes a unit log atomically.
    pub fn write_unit(&self, om_id: usize, unit: &UnitBuffer) -> Result<()> {
        let path = self.unit_path(om_id);
        let tmp = path.with_extension("tmp");
        {
            let mut w = BufWriter::new(fs::File::create(&tmp)?);
            for (key, e) in &unit.entries {
                writeln!(w, "{} {} {} {}", hex::encode(key), e.aut_order, e.branch, e.hits)?;
            }
            w.flush()?;
        }
        fs::rename(tmp, path)?;
        Ok(())
    }

    fn manifest_path(&self, shard: Shard) -> PathBuf {
        self.root.join("manifests").join(format!("shard-{}-of-{}.json", shard.index, shard.count))
    }

    /// Registers a run; an existing manifest for the same shard must match.
    pub fn add_manifest(&self, m: &RunManifest) -> Result<()> {
        for other in self.manifests()? {
            if (other.params, other.p, other.f, other.om_count) != (m.params, m.p, m.f, m.om_count) {
                return Err(Error::ParamMismatch("store already holds a different stratum".into()));
            }
        }
        let path = self.manifest_path(m.shard);
        let text = serde_json::to_string_pretty(m).map_err(|e| Error::Io(e.to_string()))?;
        if path.exists() {
            if fs::read_to_string(&path)? != text {
                return Err(Error::ParamMismatch(format!("manifest for shard {} differs", m.shard)));
            }
            return Ok(());
        }
        fs::write(path, text)?;
        Ok(())
    }

    pub fn manifests(&self) -> Result<Vec<RunManifest>> {
        let mut paths: Vec<PathBuf> = fs::read_dir(self.root.join("manifests"))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        paths
            .iter()
            .map(|p| {
                let text = fs::read_to_string(p)?;
                serde_json::from_str(&text).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })
            })
            .collect()
    }

    /// Orbit matrices of the input without a completed log. Every shard of
    /// the input must have run before the store counts as complete.
    pub fn missing_units(&self) -> Result<Vec<usize>> {
        let total = self.manifests()?.iter().map(|m| m.om_count).max().unwrap_or(0);
        Ok((0..total).filter(|&u| !self.is_complete(u)).collect())
    }

    fn completed_units(&self) -> Result<Vec<usize>> {
        let mut out: Vec<usize> = fs::read_dir(self.root.join("units"))?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_prefix("om-")?.strip_suffix(".log")?.parse().ok()
            })
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Whether the shards reflect every completed unit.
    fn is_final(&self) -> Result<bool> {
        let units = self.completed_units()?.len();
        Ok(fs::read_to_string(self.root.join("shards").join("FINAL")).ok() == Some(format!("units={units}\n")))
    }

    /// Compacts all unit logs into the sorted prefix shards. A no-op when
    /// nothing changed since the last compaction.
    pub fn finalize(&self) -> Result<()> {
        let missing = self.missing_units()?;
        if !missing.is_empty() {
            return Err(Error::StoreIncomplete(format!(
                "{} unit(s) unfinished, first om {}",
                missing.len(),
                missing[0]
            )));
        }
        if self.is_final()? {
            return Ok(());
        }
        let units = self.completed_units()?;
        // Units are only ever added, so the marker names the unit set; it is
        // dropped first so that an interrupted compaction is redone.
        let _ = fs::remove_file(self.root.join("shards").join("FINAL"));
        let spool = self.root.join("shards").join("spool");
        fs::create_dir_all(&spool)?;
        // Scatter the unit records by shard, in unit order, so that each
        // shard can then be merged on its own.
        let mut spools = (0..SHARDS)
            .map(|i| Ok(BufWriter::new(fs::File::create(spool.join(format!("{i:02x}")))?)))
            .collect::<Result<Vec<_>>>()?;
        for &u in &units {
            let file = BufReader::new(fs::File::open(self.unit_path(u))?);
            for (n, line) in file.lines().enumerate() {
                let line = line?;
                let key = line.split_whitespace().next().unwrap_or("");
                let shard = match key.get(..2) {
                    Some(h) => u8::from_str_radix(h, 16)
                        .map_err(|_| Error::Parse { line: n + 1, msg: format!("bad unit record in om {u}") })?,
                    None => 0,
                };
                writeln!(spools[shard as usize], "{u} {line}")?;
            }
        }
        for w in &mut spools {
            w.flush()?;
        }
        drop(spools);
        (0..SHARDS).into_par_iter().try_for_each(|i| -> Result<()> {
            let path = spool.join(format!("{i:02x}"));
            let mut recs: BTreeMap<Vec<u8>, StoredRecord> = BTreeMap::new();
            for (n, line) in BufReader::new(fs::File::open(&path)?).lines().enumerate() {
                let line = line?;
                let parse_err = || Error::Parse { line: n + 1, msg: format!("bad unit record in shard {i:02x}") };
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() != 5 {
                    return Err(parse_err());
                }
                let hits: u64 = f[4].parse().map_err(|_| parse_err())?;
                // Lines come in increasing unit order, so the first sighting
                // is the least provenance.
                let key = hex::decode(f[1]).map_err(|_| parse_err())?;
                match recs.get_mut(&key) {
                    Some(r) => r.hits += hits,
                    None => {
                        let r = StoredRecord {
                            key: key.clone(),
                            aut_order: f[2].parse().map_err(|_| parse_err())?,
                            om_id: f[0].parse().map_err(|_| parse_err())?,
                            branch: f[3].to_string(),
                            hits,
                        };
                        recs.insert(key, r);
                    }
                }
            }
            let mut w = BufWriter::new(fs::File::create(self.root.join("shards").join(format!("{i:02x}.log")))?);
            for r in recs.values() {
                writeln!(w, "{} {} {} {} {}", hex::encode(&r.key), r.aut_order, r.om_id, r.branch, r.hits)?;
            }
            w.flush()?;
            fs::remove_file(&path)?;
            Ok(())
        })?;
        fs::remove_dir(&spool)?;
        fs::write(self.root.join("shards").join("FINAL"), format!("units={}\n", units.len()))?;
        Ok(())
    }

    /// Records of a finalized store in key order.
    pub fn records(&self) -> Result<Vec<StoredRecord>> {
        let mut out = Vec::new();
        for i in 0..SHARDS {
            out.extend(self.shard_records(i)?);
        }
        Ok(out)
    }

    /// Records of one shard of a finalized store, in key order. Shards hold
    /// disjoint key ranges, so whole-store totals can be taken shard by shard.
    pub fn shard_records(&self, i: usize) -> Result<Vec<StoredRecord>> {
        if !self.is_final()? {
            return Err(Error::StoreIncomplete("store not finalized since the last unit".into()));
        }
        let mut out = Vec::new();
        let file = BufReader::new(fs::File::open(self.root.join("shards").join(format!("{i:02x}.log")))?);
        for (n, line) in file.lines().enumerate() {
            let line = line?;
            let parse_err = || Error::Parse { line: n + 1, msg: format!("bad record in shard {i:02x}") };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 5 {
                return Err(parse_err());
            }
            out.push(StoredRecord {
                key: hex::decode(f[0]).map_err(|_| parse_err())?,
                aut_order: f[1].parse().map_err(|_| parse_err())?,
                om_id: f[2].parse().map_err(|_| parse_err())?,
                branch: f[3].to_string(),
                hits: f[4].parse().map_err(|_| parse_err())?,
            });
        }
        Ok(out)
    }

    /// Parameters of the designs held, from the manifests.
    pub fn params(&self) -> Result<Option<(DesignParams, usize)>> {
        Ok(self.manifests()?.first().map(|m| (m.params, m.f)))
    }

    /// Decoded designs of a finalized store.
    pub fn designs(&self) -> Result<Vec<IncidenceMatrix>> {
        let Some((params, _)) = self.params()? else {
            return Ok(Vec::new());
        };
        self.records()?
            .iter()
            .map(|r| IncidenceMatrix::new(params, Incidence::from_key_bytes(params.v, params.v, &r.key)?))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Commands.

pub fn cmd_distributions(params: DesignParams, p: usize, min_fixed: Option<usize>) -> Report {
    let dists = enumerate_distributions(params, p, min_fixed);
    let mut r = Report::default();
    r.push("params", params);
    r.push("p", p);
    r.push("distributions", dists.len());
    for d in dists {
        r.push("f", d.f);
    }
    r
}

/// Builds the orbit matrices of one stratum, optionally writing them out.
pub fn cmd_om(params: DesignParams, p: usize, f: usize, out: Option<&Path>) -> Result<(Report, Vec<OrbitMatrix>)> {
    let dist = OrbitDistribution::new(params, p, f)?;
    let parts = rayon::current_num_threads() * 8;
    let oms = build_orbit_matrices_partitioned(&dist, OM_SPLIT_DEPTH, parts)?;
    let verified = oms.iter().filter(|m| verify_orbit_matrix(m)).count();
    if let Some(path) = out {
        fs::write(path, write_orbit_matrices(&oms))?;
    }
    let mut r = Report::default();
    r.push("params", params);
    r.push("p", p);
    r.push("f", f);
    r.push("count", oms.len());
    r.push("verified", verified);
    Ok((r, oms))
}

/// Search depth at which orbit-matrix construction is split for threads.
pub const OM_SPLIT_DEPTH: usize = 2;

/// Decision depth at which one orbit matrix is split into branches.
pub const BRANCH_DEPTH: usize = 6;

#[derive(Clone, Copy, Debug)]
pub struct IndexOptions {
    pub shard: Shard,
    pub force: bool,
    pub reduction: SymmetryReduction,
    pub branch_depth: usize,
    /// Stop after this many units (for tests of resumption).
    pub max_units: Option<usize>,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            shard: Shard::WHOLE,
            force: false,
            reduction: SymmetryReduction::Full,
            branch_depth: BRANCH_DEPTH,
            max_units: None,
        }
    }
}

/// Indexes one orbit matrix into a unit buffer.
pub fn index_unit(om: &OrbitMatrix, opts: &IndexOptions) -> Result<UnitBuffer> {
    let prob = IndexingProblem::new(om.clone())?;
    let ix = Indexer::new(&prob, opts.reduction);
    ix.check_scale(opts.force)?;
    let branches = ix.branches(opts.branch_depth);
    let found: Vec<Vec<(Vec<u8>, u128, u64)>> = branches
        .par_iter()
        .map(|b| {
            let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
            let mut list: Vec<(Vec<u8>, u128, u64)> = Vec::new();
            ix.for_each_design(b, &mut |m| {
                let rec = canonical_form(&m);
                match seen.get(&rec.key) {
                    Some(&i) => list[i].2 += 1,
                    None => {
                        seen.insert(rec.key.clone(), list.len());
                        list.push((rec.key, rec.aut_order, 1));
                    }
                }
            });
            list
        })
        .collect();
    let mut unit = UnitBuffer::default();
    for (b, list) in branches.iter().zip(found) {
        let label = branch_text(b);
        for (key, aut, hits) in list {
            unit.insert_hits(key, aut, &label, hits);
        }
    }
    Ok(unit)
}

/// Indexes the selected orbit matrices of `om_file` into `store`, skipping
/// completed units.
pub fn cmd_index(om_file: &Path, store: &DedupStore, opts: &IndexOptions) -> Result<Report> {
    let oms = read_orbit_matrices(BufReader::new(fs::File::open(om_file)?))?;
    index_oms(&oms, store, opts)
}

pub fn index_oms(oms: &[OrbitMatrix], store: &DedupStore, opts: &IndexOptions) -> Result<Report> {
    let Some(first) = oms.first() else {
        let mut r = Report::default();
        r.push("oms", 0);
        return Ok(r);
    };
    let dist = &first.dist;
    if oms.iter().any(|m| m.dist != *dist) {
        return Err(Error::ParamMismatch("orbit matrices from several strata".into()));
    }
    let units: Vec<usize> = (0..oms.len()).filter(|&u| opts.shard.contains(u)).collect();
    store.add_manifest(&RunManifest {
        params: dist.params,
        p: dist.p,
        f: dist.f,
        om_count: oms.len(),
        shard: opts.shard,
        units: units.clone(),
    })?;
    let (mut ran, mut skipped, mut emitted, mut distinct) = (0usize, 0usize, 0u64, 0usize);
    for &u in &units {
        if store.is_complete(u) {
            skipped += 1;
            continue;
        }
        if opts.max_units.is_some_and(|m| ran >= m) {
            break;
        }
        let unit = index_unit(&oms[u], opts)?;
        emitted += unit.hits();
        distinct += unit.len();
        store.write_unit(u, &unit)?;
        ran += 1;
    }
    let mut r = Report::default();
    r.push("params", dist.params);
    r.push("f", dist.f);
    r.push("oms", oms.len());
    r.push("shard", opts.shard);
    r.push("units", units.len());
    r.push("units_run", ran);
    r.push("units_skipped", skipped);
    r.push("emitted", emitted);
    r.push("unit_distinct", distinct);
    Ok(r)
}

/// Totals of a store; finalizes it first.
pub fn cmd_stats(store: &DedupStore) -> Result<Report> {
    store.finalize()?;
    let mut hist: BTreeMap<u128, usize> = BTreeMap::new();
    let (mut designs, mut aut_gt_2, mut hits) = (0usize, 0usize, 0u64);
    for i in 0..SHARDS {
        for r in store.shard_records(i)? {
            *hist.entry(r.aut_order).or_default() += 1;
            designs += 1;
            aut_gt_2 += (r.aut_order > 2) as usize;
            hits += r.hits;
        }
    }
    let mut rep = Report::default();
    if let Some((params, f)) = store.params()? {
        rep.push("params", params);
        rep.push("f", f);
    }
    rep.push("designs", designs);
    rep.push("aut_gt_2", aut_gt_2);
    rep.push("hits", hits);
    for (order, n) in hist {
        rep.push(format!("aut_order_{order}"), n);
    }
    Ok(rep)
}

/// Union and pairwise intersections of the key sets of several stores.
pub fn cmd_overlap(stores: &[(String, &DedupStore)]) -> Result<Report> {
    for (_, s) in stores {
        s.finalize()?;
    }
    let n = stores.len();
    let mut sizes = vec![0usize; n];
    let mut pairs = vec![vec![0usize; n]; n];
    let mut union = 0;
    for i in 0..SHARDS {
        let sets = stores
            .iter()
            .map(|(_, s)| Ok(s.shard_records(i)?.into_iter().map(|r| r.key).collect()))
            .collect::<Result<Vec<BTreeSet<Vec<u8>>>>>()?;
        union += sets.iter().flatten().collect::<BTreeSet<_>>().len();
        for a in 0..n {
            sizes[a] += sets[a].len();
            for b in a + 1..n {
                pairs[a][b] += sets[a].intersection(&sets[b]).count();
            }
        }
    }
    let mut rep = Report::default();
    for (a, (label, _)) in stores.iter().enumerate() {
        rep.push(format!("designs_{label}"), sizes[a]);
    }
    let sum: usize = sizes.iter().sum();
    rep.push("sum", sum);
    rep.push("union", union);
    rep.push("multi_action_slots", sum - union);
    for a in 0..n {
        for b in a + 1..n {
            rep.push(format!("intersection_{}_{}", stores[a].0, stores[b].0), pairs[a][b]);
        }
    }
    Ok(rep)
}

/// Extends every design of `store` and classifies the 3-designs.
pub fn cmd_extend(store: &DedupStore, out: Option<&Path>) -> Result<Report> {
    store.finalize()?;
    let designs = store.designs()?;
    let violations = designs
        .par_iter()
        .map(|m| extend(m).map(|d| !d.is_3design() as usize))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();
    let classes = classify_extensions(&designs)?;
    let mut derived: BTreeMap<usize, usize> = BTreeMap::new();
    for c in classes.values() {
        *derived.entry(c.derived_classes).or_default() += 1;
    }
    if let Some(path) = out {
        let ds: Vec<ThreeDesign> = classes
            .values()
            .map(|c| {
                let n = designs[0].v() + 1;
                ThreeDesign::new(n / 4, Incidence::from_key_bytes(2 * n - 2, n, &c.record.key)?)
            })
            .collect::<Result<_>>()?;
        fs::write(path, write_three_designs(&ds))?;
    }
    let mut rep = Report::default();
    rep.push("designs", designs.len());
    rep.push("three_design_violations", violations);
    rep.push("extension_classes", classes.len());
    for (d, n) in derived {
        rep.push(format!("derived_classes_{d}"), n);
    }
    Ok(rep)
}
