//! Acceptance report: one line per criterion.
//!
//! Cheap criteria are computed here. The stratum-scale ones read artifacts
//! from `ORBITFORGE_ACCEPTANCE_DIR` (default `target/acceptance`):
//! `om-f<f>.txt` files written by `orbitforge om` and `store-f<f>`
//! directories filled by `orbitforge index`. Whatever is missing is
//! reported as not run. Run with `--nocapture` to see the report.

mod oracle;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use orbitforge::design::{IncidenceMatrix, PermutationAction};
use orbitforge::hadamard::{derive, extend};
use orbitforge::indexer::{compress_design, Indexer, IndexingProblem, SymmetryReduction};
use orbitforge::isomorph::canonical_form;
use orbitforge::orbit::{
    build_orbit_matrices, enumerate_distributions, read_orbit_matrices, row_candidates, verify_orbit_matrix,
    OrbitDistribution, OrbitMatrix,
};
use orbitforge::pipeline::{cmd_om, cmd_overlap, cmd_stats, index_oms, DedupStore, IndexOptions};
use orbitforge::DesignParams;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned targets and tolerances. Every count below is compared exactly.
const F9_DESIGNS: usize = 430_654;
const F9_DESIGNS_TABLE_1: usize = 430_656;
const F9_AUT_GT_2: usize = 3_116;
const ROUND_TRIP_SAMPLE: usize = 1000;
const RELABELINGS: usize = 1000;
/// Strata whose orbit matrices are cheap enough to build in this test.
const CHEAP_STRATA: [usize; 3] = [13, 15, 17];
/// Stratum indexed in this test for the sampled criteria.
const SAMPLE_STRATUM: usize = 15;
const STRETCH: [(usize, usize); 5] = [(3, 111_098), (5, 237_058), (7, 687_649), (15, 1_817_486), (11, 8_386_387)];
const UNION: usize = 11_642_495;
const THREE_DESIGN_CLASSES: usize = 1_015_225;
/// Reported but never asserted.
const DOCUMENTED_ONLY: usize = 7;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    NotRun,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotRun => "NOT RUN",
        })
    }
}

struct Line {
    n: usize,
    name: &'static str,
    status: Status,
    detail: String,
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn p35() -> DesignParams {
    DesignParams::new(35, 17, 8).unwrap()
}

fn artifacts() -> PathBuf {
    std::env::var_os("ORBITFORGE_ACCEPTANCE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/acceptance"))
}

fn cached_oms(f: usize) -> Option<Vec<OrbitMatrix>> {
    let file = fs::File::open(artifacts().join(format!("om-f{f}.txt"))).ok()?;
    read_orbit_matrices(BufReader::new(file)).ok()
}

/// A finalized store for stratum `f`, if one was fully indexed.
fn cached_store(f: usize) -> Option<DedupStore> {
    let dir = artifacts().join(format!("store-f{f}"));
    if !dir.is_dir() {
        return None;
    }
    let store = DedupStore::open(&dir).ok()?;
    (store.manifests().ok()?.first()?.f == f && store.missing_units().ok()?.is_empty()).then_some(store)
}

fn criterion_1() -> Line {
    let d13 = OrbitDistribution::new(p35(), 2, 13).unwrap();
    let d17 = OrbitDistribution::new(p35(), 2, 17).unwrap();
    let types13 = row_candidates(&d13, 13).len();
    let types17 = row_candidates(&d17, 17).len();
    let om13 = cmd_om(p35(), 2, 13, None).unwrap().1.len();
    let om17 = cmd_om(p35(), 2, 17, None).unwrap().1.len();
    Line {
        n: 1,
        name: "nonexistence for f=13 and f=17",
        status: pass_if(types13 == 3 && types17 == 1 && om13 == 0 && om17 == 0),
        detail: format!("row types {types13}/{types17} (want 3/1), orbit matrices {om13}/{om17} (want 0/0)"),
    }
}

/// Classes found by indexing every orbit matrix of every stratum.
fn engine_classes(params: DesignParams) -> Vec<(Vec<u8>, u128)> {
    let dir = tempfile::tempdir().unwrap();
    let mut out = Vec::new();
    for dist in enumerate_distributions(params, 2, None) {
        let store = DedupStore::open(dir.path().join(format!("f{}", dist.f))).unwrap();
        let oms = build_orbit_matrices(&dist).unwrap();
        index_oms(&oms, &store, &IndexOptions::default()).unwrap();
        cmd_stats(&store).unwrap();
        out.extend(store.records().unwrap().into_iter().map(|r| (r.key, r.aut_order)));
    }
    out.sort();
    out.dedup();
    out
}

fn criterion_2() -> (Line, Vec<IncidenceMatrix>) {
    let mut ok = true;
    let mut detail = Vec::new();
    let mut reps = Vec::new();
    for (v, k, l, aut) in [(7, 3, 1, 168u128), (11, 5, 2, 660)] {
        let params = DesignParams::new(v, k, l).unwrap();
        let brute = oracle::classify(&oracle::all_designs(v, k, l), v);
        let brute_keys: Vec<(Vec<u8>, u128)> = brute
            .iter()
            .map(|d| {
                let m = oracle::to_matrix(d, params);
                reps.push(m.clone());
                (canonical_form(&m).key, oracle::aut_order(d, v) as u128)
            })
            .collect();
        let engine = engine_classes(params);
        ok &= engine == brute_keys && engine.len() == 1 && engine[0].1 == aut;
        detail.push(format!(
            "{params}: engine {} class(es) aut {:?}, brute force {} class(es)",
            engine.len(),
            engine.iter().map(|e| e.1).collect::<Vec<_>>(),
            brute.len()
        ));
    }
    let line = Line { n: 2, name: "small-parameter oracle equivalence", status: pass_if(ok), detail: detail.join("; ") };
    (line, reps)
}

fn criterion_3() -> (Line, BTreeMap<usize, Vec<OrbitMatrix>>) {
    let mut strata = BTreeMap::new();
    let mut missing = Vec::new();
    let mut bad = 0usize;
    for dist in enumerate_distributions(p35(), 2, Some(3)) {
        let oms = match cached_oms(dist.f) {
            Some(oms) => oms,
            None if CHEAP_STRATA.contains(&dist.f) => build_orbit_matrices(&dist).unwrap(),
            None => {
                missing.push(dist.f);
                continue;
            }
        };
        bad += oms.iter().filter(|m| m.dist != dist || !verify_orbit_matrix(m)).count();
        strata.insert(dist.f, oms);
    }
    let counts: Vec<String> = strata.iter().map(|(f, oms)| format!("f={f}:{}", oms.len())).collect();
    let status = if bad > 0 {
        Status::Fail
    } else if missing.is_empty() {
        Status::Pass
    } else {
        Status::NotRun
    };
    let mut detail = format!("{bad} violations; orbit matrices {}", counts.join(" "));
    if !missing.is_empty() {
        detail += &format!("; strata not built: {missing:?}");
    }
    (Line { n: 3, name: "orbit-matrix invariants on every stratum", status, detail }, strata)
}

/// Indexed designs of randomly chosen orbit matrices of one stratum, with
/// their automorphism, until at least `want` designs are collected.
fn sample_designs(
    oms: &[OrbitMatrix],
    want: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, IncidenceMatrix, PermutationAction)> {
    let mut order: Vec<usize> = (0..oms.len()).collect();
    order.shuffle(rng);
    let mut out = Vec::new();
    for u in order {
        if out.len() >= want {
            break;
        }
        let prob = IndexingProblem::new(oms[u].clone()).unwrap();
        let sigma = prob.sigma();
        Indexer::new(&prob, SymmetryReduction::Full)
            .for_each_design(&[], &mut |m| out.push((u, m, sigma.clone())));
    }
    out
}

/// Round trips on a sample of indexed designs of stratum `f`.
fn round_trips(f: usize, oms: &[OrbitMatrix], rng: &mut ChaCha8Rng) -> (usize, usize, Vec<IncidenceMatrix>) {
    let designs = sample_designs(oms, ROUND_TRIP_SAMPLE, rng);
    let mut failures = 0;
    for (u, m, sigma) in &designs {
        let back = compress_design(m, sigma);
        if !back.is_ok_and(|om| om.is_equivalent(&oms[*u]) && om.dist.f == f) {
            failures += 1;
        }
        let t = extend(m).unwrap();
        if derive(&t, m.v()).ok().as_ref() != Some(m) {
            failures += 1;
        }
    }
    (designs.len(), failures, designs.into_iter().map(|(_, m, _)| m).collect())
}

fn criterion_4(strata: &BTreeMap<usize, Vec<OrbitMatrix>>) -> (Line, Vec<IncidenceMatrix>) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut executed: Vec<usize> = (3..=17).filter(|&f| cached_store(f).is_some()).collect();
    if !executed.contains(&SAMPLE_STRATUM) {
        executed.push(SAMPLE_STRATUM);
    }
    executed.sort_unstable();
    let mut failures = 0;
    let mut detail = Vec::new();
    let mut all = Vec::new();
    let mut short = false;
    for f in executed {
        let Some(oms) = strata.get(&f) else {
            detail.push(format!("f={f}: orbit matrices missing"));
            short = true;
            continue;
        };
        let (n, bad, designs) = round_trips(f, oms, &mut rng);
        short |= n < ROUND_TRIP_SAMPLE;
        failures += bad;
        detail.push(format!("f={f}: {n} designs, {bad} failures"));
        all.extend(designs);
    }
    let status = if failures > 0 {
        Status::Fail
    } else if short {
        Status::NotRun
    } else {
        Status::Pass
    };
    (Line { n: 4, name: "compress and derive round trips", status, detail: detail.join("; ") }, all)
}

fn random_relabeling(m: &IncidenceMatrix, rng: &mut ChaCha8Rng) -> IncidenceMatrix {
    let v = m.v();
    let mut points: Vec<usize> = (0..v).collect();
    let mut blocks: Vec<usize> = (0..v).collect();
    points.shuffle(rng);
    blocks.shuffle(rng);
    m.apply_action(&PermutationAction::new(points, blocks).unwrap()).unwrap()
}

fn criterion_5(oracle_reps: &[IncidenceMatrix], sample: &[IncidenceMatrix]) -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut tested: Vec<IncidenceMatrix> = oracle_reps.to_vec();
    for _ in 0..3 {
        if !sample.is_empty() {
            tested.push(sample[rng.gen_range(0..sample.len())].clone());
        }
    }
    let mut splits = 0;
    for m in &tested {
        let key = canonical_form(m).key;
        splits += (0..RELABELINGS).filter(|_| canonical_form(&random_relabeling(m, &mut rng)).key != key).count();
    }
    // Distinct oracle classes must get distinct keys; the two oracles have
    // one class each, so compare across their complements as well.
    let mut keys: Vec<Vec<u8>> = oracle_reps
        .iter()
        .flat_map(|m| [canonical_form(m).key, canonical_form(&m.complement().unwrap()).key])
        .collect();
    let n = keys.len();
    keys.sort();
    keys.dedup();
    let collisions = n - keys.len();
    Line {
        n: 5,
        name: "canonical-form stability",
        status: pass_if(splits == 0 && collisions == 0 && tested.len() >= oracle_reps.len() + 1),
        detail: format!(
            "{} designs x {RELABELINGS} relabelings: {splits} splits; {collisions} collisions among oracle classes",
            tested.len()
        ),
    }
}

fn criterion_6() -> Line {
    let name = "f=9 stratum end to end";
    let Some(store) = cached_store(9) else {
        return Line { n: 6, name, status: Status::NotRun, detail: "no complete store-f9 in the artifact directory".into() };
    };
    let r = cmd_stats(&store).unwrap();
    let designs: usize = r.get("designs").unwrap().parse().unwrap();
    let aut: usize = r.get("aut_gt_2").unwrap().parse().unwrap();
    let which = if designs == F9_DESIGNS {
        "matches Table 2; Table 1's figure differs"
    } else if designs == F9_DESIGNS_TABLE_1 {
        "matches Table 1, not Table 2"
    } else {
        "matches neither table"
    };
    Line {
        n: 6,
        name,
        status: pass_if(designs == F9_DESIGNS && aut == F9_AUT_GT_2),
        detail: format!(
            "designs {designs} (want {F9_DESIGNS}; {which}, Table 1 gives {F9_DESIGNS_TABLE_1}), aut>2 {aut} (want {F9_AUT_GT_2})"
        ),
    }
}

fn criterion_7() -> Line {
    let mut parts = Vec::new();
    let (mut run, mut mismatched) = (0, 0);
    let mut stores = Vec::new();
    for (f, want) in STRETCH {
        match cached_store(f) {
            Some(s) => {
                let got: usize = cmd_stats(&s).unwrap().get("designs").unwrap().parse().unwrap();
                run += 1;
                mismatched += (got != want) as usize;
                parts.push(format!("f={f} {got} (want {want})"));
                stores.push((f.to_string(), s));
            }
            None => parts.push(format!("f={f} not run")),
        }
    }
    if let Some(s) = cached_store(9) {
        stores.push(("9".into(), s));
    }
    if stores.len() == 6 {
        let refs: Vec<(String, &DedupStore)> = stores.iter().map(|(l, s)| (l.clone(), s)).collect();
        let union: usize = cmd_overlap(&refs).unwrap().get("union").unwrap().parse().unwrap();
        run += 1;
        mismatched += (union != UNION) as usize;
        parts.push(format!("union {union} (want {UNION})"));
    } else {
        parts.push("union not run".into());
    }
    parts.push(format!("3-design classes not run (want {THREE_DESIGN_CLASSES})"));
    let status = if mismatched > 0 {
        Status::Fail
    } else if run == STRETCH.len() + 1 {
        Status::Pass
    } else {
        Status::NotRun
    };
    Line { n: 7, name: "stretch strata (documented only)", status, detail: parts.join("; ") }
}

fn criterion_8(sample: &[IncidenceMatrix]) -> Line {
    let mut designs: Vec<IncidenceMatrix> = sample.iter().filter(|m| m.params() == p35()).cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    if let Some(store) = cached_store(9) {
        store.finalize().unwrap();
        let mut stored = store.designs().unwrap();
        stored.shuffle(&mut rng);
        designs.extend(stored.into_iter().take(ROUND_TRIP_SAMPLE));
    }
    let violations = designs.iter().filter(|m| !extend(m).unwrap().is_3design()).count();
    Line {
        n: 8,
        name: "Hadamard 3-design property",
        status: if designs.is_empty() { Status::NotRun } else { pass_if(violations == 0) },
        detail: format!("{} extensions checked on all 7140 triples, {violations} violations", designs.len()),
    }
}

#[test]
fn acceptance() {
    let mut lines = vec![criterion_1()];
    let (l2, reps) = criterion_2();
    lines.push(l2);
    let (l3, strata) = criterion_3();
    lines.push(l3);
    let (l4, sample) = criterion_4(&strata);
    lines.push(l4);
    lines.push(criterion_5(&reps, &sample));
    lines.push(criterion_6());
    lines.push(criterion_7());
    lines.push(criterion_8(&sample));

    println!("artifacts: {}", artifacts().display());
    for l in &lines {
        println!("criterion {} {}: {} ({})", l.n, l.status, l.name, l.detail);
    }
    // Only a measured failure fails the target; criteria without artifacts
    // are reported above as not run.
    let failed: Vec<usize> =
        lines.iter().filter(|l| l.status == Status::Fail && l.n != DOCUMENTED_ONLY).map(|l| l.n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
