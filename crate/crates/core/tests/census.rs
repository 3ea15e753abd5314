use orbitforge::isomorph::{canonical_form, involution_census};
use orbitforge::orbit::{build_orbit_matrices, enumerate_distributions};
use orbitforge::pipeline::{index_oms, DedupStore, IndexOptions};
use orbitforge::DesignParams;

/// Every involution of every 2-(15,7,3) design with an involution.
#[test]
fn involution_fixed_points_are_admissible() {
    let params = DesignParams::new(15, 7, 3).unwrap();
    let (v, k, l) = (15, 7, 3);
    let dir = tempfile::tempdir().unwrap();
    let mut designs = Vec::new();
    for dist in enumerate_distributions(params, 2, None) {
        let store = DedupStore::open(dir.path().join(format!("f{}", dist.f))).unwrap();
        index_oms(&build_orbit_matrices(&dist).unwrap(), &store, &IndexOptions::default()).unwrap();
        store.finalize().unwrap();
        designs.extend(store.designs().unwrap());
    }
    assert!(!designs.is_empty());
    for m in &designs {
        let census = involution_census(m).unwrap();
        assert!(!census.is_empty());
        for (f, g) in census {
            assert_eq!(f % 2, v % 2);
            assert!(f <= v - 2 * (k - l));
            assert!(m.is_automorphism(&g));
            assert!(g.then(&g).is_identity());
            // The image under the involution is the same design, twice over.
            let once = m.apply_action(&g).unwrap();
            assert_eq!(canonical_form(&once).key, canonical_form(m).key);
            assert_eq!(&once.apply_action(&g).unwrap(), m);
        }
    }
}
