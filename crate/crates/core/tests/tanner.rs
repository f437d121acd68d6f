use floorscope::tanner::{expand_qc, QcBlockSpec};
use floorscope::{Error, TannerGraph};
use proptest::prelude::*;

fn random_graph() -> impl Strategy<Value = TannerGraph> {
    (1usize..24, 1usize..12).prop_flat_map(|(n, m)| {
        proptest::collection::btree_set((0..n, 0..m), 0..n * m / 2 + 1).prop_map(move |edges| {
            let edges: Vec<(usize, usize)> = edges.into_iter().collect();
            TannerGraph::from_edges(n, m, &edges).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn alist_round_trip(g in random_graph()) {
        let text = g.to_alist();
        let back = TannerGraph::parse_alist(&text).unwrap();
        prop_assert_eq!(back.n_vars(), g.n_vars());
        prop_assert_eq!(back.n_checks(), g.n_checks());
        for v in 0..g.n_vars() {
            prop_assert_eq!(back.var_neighbors(v), g.var_neighbors(v));
        }
        prop_assert_eq!(back.to_alist(), text);
    }

    #[test]
    fn degrees_sum_to_edges(g in random_graph()) {
        let by_var: usize = (0..g.n_vars()).map(|v| g.var_degree(v)).sum();
        let by_chk: usize = (0..g.n_checks()).map(|c| g.check_degree(c)).sum();
        prop_assert_eq!(by_var, g.n_edges());
        prop_assert_eq!(by_chk, g.n_edges());
    }
}

#[test]
fn array_code_is_regular_and_clean() {
    let g = QcBlockSpec::array_code(6, 12, 13).expand().unwrap();
    assert_eq!((g.n_vars(), g.n_checks()), (156, 78));
    assert_eq!(g.require_regular().unwrap(), (6, 12));
    assert!(g.is_four_cycle_free());
}

#[test]
fn repeated_shift_makes_four_cycles() {
    let spec = QcBlockSpec::circulant(5, &[vec![0, 1], vec![0, 1]]);
    assert!(!expand_qc(&spec).unwrap().is_four_cycle_free());
}

#[test]
fn full_size_block_layout() {
    let shifts: Vec<Vec<usize>> = (0..6)
        .map(|i| (0..32).map(|j| (i * j) % 64).collect())
        .collect();
    let g = QcBlockSpec::circulant(64, &shifts).expand().unwrap();
    assert_eq!((g.n_vars(), g.n_checks(), g.n_edges()), (2048, 384, 12288));
    assert_eq!(g.require_regular().unwrap(), (6, 32));
}

#[test]
fn alist_errors_carry_line_numbers() {
    let bad = "2 1\n1 2\n1 2\n1\n2 0\n1 2\n";
    match TannerGraph::parse_alist(bad) {
        Err(Error::Alist { line, .. }) => assert!(line >= 1),
        other => panic!("expected an alist error, got {other:?}"),
    }
    assert!(TannerGraph::parse_alist("").is_err());
    assert!(TannerGraph::parse_alist("2 1\n1 2\n").is_err());
}

#[test]
fn syndrome_of_codeword() {
    let g = TannerGraph::from_check_lists(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
    assert!(g.syndrome_is_zero(&[1, 1, 1]));
    assert!(!g.syndrome_is_zero(&[1, 0, 0]));
}
