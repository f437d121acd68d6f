use std::collections::BTreeSet;

use floorscope::absorption::*;
use floorscope::search::*;
use floorscope::synth::{plant_topology, random_regular};
use floorscope::tanner::QcBlockSpec;
use floorscope::topology::{complete, dominant_eight_eight};
use floorscope::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn catalog_key(c: &SetCatalog) -> BTreeSet<(Vec<usize>, usize, usize)> {
    c.entries()
        .iter()
        .map(|e| (e.set.vars.clone(), e.set.a, e.set.b))
        .collect()
}

#[test]
fn guided_equals_brute_force_on_random_codes() {
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let g = random_regular(32 + 8 * (seed as usize % 2), 3, 6, &mut rng, 200).unwrap();
        let brute = brute_force_enumerate(&g, 5, DEFAULT_WORK_BOUND).unwrap();
        let guided = search_up_to(&g, 5, true).unwrap();
        assert_eq!(catalog_key(&brute), catalog_key(&guided), "seed {seed}");
    }
}

#[test]
fn guided_equals_brute_force_on_array_code() {
    let g = QcBlockSpec::array_code(6, 12, 13).expand().unwrap();
    assert!(g.is_four_cycle_free());
    let brute = brute_force_enumerate(&g, 4, DEFAULT_WORK_BOUND).unwrap();
    let guided = search_up_to(&g, 4, true).unwrap();
    assert_eq!(catalog_key(&brute), catalog_key(&guided));
}

#[test]
fn planted_k5_is_found() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = plant_topology(&complete(5), 240, 6, 12, &mut rng, 200).unwrap();
    let found = topology_guided_search(&p.graph, &complete(5)).unwrap();
    assert!(found.iter().any(|s| s.vars == p.set_vars));
    let fam = search_family(&p.graph, 5, 10, false).unwrap();
    assert!(fam.contains(&p.set_vars));
}

#[test]
fn planted_dominant_set_is_found() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t = dominant_eight_eight();
    let p = plant_topology(&t, 512, 6, 16, &mut rng, 200).unwrap();
    let found = topology_guided_search(&p.graph, &t).unwrap();
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].vars, p.set_vars);
    assert_eq!((found[0].a, found[0].b), (8, 8));

    let s = &found[0];
    for &v in &s.vars {
        let r = reduction_check(&p.graph, s, &[v]).unwrap();
        assert!(r.absorbing);
        assert_eq!((r.a, r.b), (7, 12));
    }
}

#[test]
fn work_bound_is_enforced() {
    let g = QcBlockSpec::array_code(6, 12, 13).expand().unwrap();
    match brute_force_enumerate(&g, 5, 1000) {
        Err(Error::WorkBound { needed, bound }) => assert!(needed > bound),
        other => panic!("expected a work bound error, got {other:?}"),
    }
}

#[test]
fn catalog_json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let g = random_regular(32, 3, 6, &mut rng, 200).unwrap();
    let cat = search_up_to(&g, 4, true).unwrap();
    let back = SetCatalog::from_json(&g, &cat.to_json()).unwrap();
    assert_eq!(catalog_key(&cat), catalog_key(&back));
    let csv = cat.summary_csv();
    assert!(csv.starts_with("a,b,class,multiplicity\n"));
}

#[test]
fn classification_and_participation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = plant_topology(&complete(5), 240, 6, 12, &mut rng, 200).unwrap();
    let s = AbsorptionSet::new(&p.graph, &p.set_vars).unwrap();
    assert_eq!(s.class(), vec![4; 5]);
    assert_eq!(s.class_label(), "[4 4 4 4 4]");
    assert!(is_stopping_set(&p.graph, &p.set_vars).unwrap() == s.unsat_checks.is_empty());
    let mut cat = SetCatalog::default();
    cat.insert(s.clone(), "planted");
    assert!(!cat.insert(s, "again"));
    let table = cat.participation_table(p.graph.n_vars(), (5, 10)).unwrap();
    assert_eq!(table.iter().sum::<usize>(), 5);
    assert_eq!(cat.multiplicities()[&(5, 10)], 1);
}

#[test]
fn non_sets_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = random_regular(32, 3, 6, &mut rng, 200).unwrap();
    assert!(is_absorption_set(&g, &[0]).unwrap().is_none());
    assert!(AbsorptionSet::new(&g, &[0]).is_err());
    assert!(is_absorption_set(&g, &[99]).is_err());
}
