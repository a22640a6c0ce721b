use paley_esh::gf::{self, make_field, paley_graph};
use paley_esh::graph::{self, brute_force_alpha, check_isomorphism_map, check_strongly_regular, complement, Graph};
use paley_esh::theta::{theta_lifted, theta_schrijver, theta_trace};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Clique numbers of Paley graphs, OEIS A077610.
const PALEY_ALPHA: [(u64, usize); 11] = [
    (5, 2),
    (9, 3),
    (13, 3),
    (17, 3),
    (25, 5),
    (29, 4),
    (37, 4),
    (41, 5),
    (49, 7),
    (53, 5),
    (61, 5),
];

fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((i + 5, (i + 2) % 5 + 5));
    }
    Graph::from_edges(10, &edges)
}

#[test]
fn paley_alpha_matches_oeis() {
    for (q, alpha) in PALEY_ALPHA {
        let g = paley_graph(q).unwrap();
        let w = brute_force_alpha(&g).unwrap();
        assert_eq!(w.size, alpha, "q = {q}");
        assert!(g.is_stable(&w.witness));
    }
}

#[test]
fn paley_is_strongly_regular() {
    for q in [5u64, 9, 13, 25, 27, 49, 81, 125] {
        if q % 4 != 1 {
            continue;
        }
        let g = paley_graph(q).unwrap();
        let n = q as usize;
        let p = check_strongly_regular(&g).unwrap();
        assert_eq!((p.n, p.r, p.a, p.c), (n, (n - 1) / 2, (n - 5) / 4, (n - 1) / 4), "q = {q}");
    }
}

#[test]
fn paley_is_self_complementary() {
    for q in [9u64, 13, 25, 29] {
        let data = gf::paley_data(q).unwrap();
        let nr = data.residues.non_residues[0];
        let map: Vec<usize> = (0..q).map(|x| data.field.mul(nr, x) as usize).collect();
        assert!(check_isomorphism_map(&data.graph, &complement(&data.graph), &map).unwrap());
    }
}

#[test]
fn invalid_orders_rejected() {
    for q in [3u64, 7, 15, 21, 27] {
        assert!(paley_graph(q).is_err(), "q = {q}");
    }
    assert!(make_field(4, 1).is_err());
}

#[test]
fn theta_closed_forms() {
    let c = (std::f64::consts::PI / 7.0).cos();
    let cases = [
        (Graph::cycle(5), 5f64.sqrt()),
        (Graph::cycle(7), 7.0 * c / (1.0 + c)),
        (petersen(), 4.0),
        (Graph::empty(4), 4.0),
        (Graph::complete(6), 1.0),
    ];
    for (g, want) in cases {
        let lifted = theta_lifted(&g).unwrap().value;
        let trace = theta_trace(&g).unwrap().value;
        assert!((lifted - want).abs() < 1e-6, "{lifted} vs {want}");
        assert!((trace - want).abs() < 1e-6, "{trace} vs {want}");
    }
    for q in [5u64, 9, 13, 17, 29] {
        let t = theta_lifted(&paley_graph(q).unwrap()).unwrap().value;
        assert!((t - (q as f64).sqrt()).abs() < 1e-6, "q = {q}");
    }
}

#[test]
fn spectrum_of_paley() {
    let g = paley_graph(13).unwrap();
    let mut ev = graph::spectrum(&g).unwrap();
    ev.sort_by(|a, b| b.total_cmp(a));
    assert!((ev[0] - 6.0).abs() < 1e-9);
    let (r, s) = ((-1.0 + 13f64.sqrt()) / 2.0, (-1.0 - 13f64.sqrt()) / 2.0);
    assert!(ev[1..7].iter().all(|e| (e - r).abs() < 1e-8));
    assert!(ev[7..].iter().all(|e| (e - s).abs() < 1e-8));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(idx in 0usize..4, a in 0u64..1000, b in 0u64..1000, c in 0u64..1000) {
        let (p, s) = [(5, 2), (3, 3), (7, 2), (2, 4)][idx];
        let f = make_field(p, s).unwrap();
        let q = f.order();
        let (a, b, c) = (a % q, b % q, c % q);
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn theta_sandwich(seed in any::<u64>(), n in 3usize..9, p in 0.2f64..0.8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Graph::random(n, p, &mut rng);
        let alpha = brute_force_alpha(&g).unwrap().size as f64;
        let t = theta_lifted(&g).unwrap().value;
        let ts = theta_schrijver(&g).unwrap().value;
        let tc = theta_lifted(&complement(&g)).unwrap().value;
        prop_assert!(alpha <= ts + 1e-6);
        prop_assert!(ts <= t + 1e-6);
        prop_assert!(t * tc >= n as f64 - 1e-5);
    }
}
