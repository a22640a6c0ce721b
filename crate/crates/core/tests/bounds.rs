use paley_esh::bounds::*;
use paley_esh::gf::paley_graph;
use paley_esh::hierarchy::{vtesh_level, BoundKind, HierarchyConfig};

const IN_SCOPE: [u64; 12] = [5, 9, 13, 17, 25, 29, 37, 41, 49, 53, 61, 89];

#[test]
fn hoffman_is_sqrt_q() {
    for q in IN_SCOPE {
        let h = hoffman_bound(&paley_graph(q).unwrap()).unwrap();
        assert!((h - (q as f64).sqrt()).abs() < 1e-6, "q = {q}: {h}");
    }
}

#[test]
fn hanson_petridis_values() {
    for (q, v) in [(5, 2.0), (13, 3.0), (41, 5.0), (61, 6.0)] {
        assert!((hanson_petridis(q).unwrap() - v).abs() < 1e-9);
    }
    assert_eq!(hanson_petridis(9).unwrap_err(), BoundsError::NotPrime(9));
    assert_eq!(hanson_petridis(7).unwrap_err(), BoundsError::NotOneModFour(7));
}

#[test]
fn cohen_is_below_alpha() {
    // α from the exhaustive search tests
    for (q, alpha) in [(13, 3.0), (17, 3.0), (29, 4.0), (61, 5.0), (101, 5.0)] {
        assert!(cohen_lower(q).unwrap() <= alpha + 1e-9);
    }
}

#[test]
fn local_theta_bounds() {
    for (q, bm, bms) in [(41, 5.4721, 5.4721), (61, 5.9009, 5.8886), (89, 7.1553, 7.0600)] {
        let a = b_m(q).unwrap();
        let b = b_m_star(q).unwrap();
        assert!((a.value - bm).abs() < 5e-4, "b_M({q}) = {}", a.value);
        assert!((b.value - bms).abs() < 5e-4, "b_M*({q}) = {}", b.value);
        assert!(b.value <= a.value + 1e-6);
    }
}

#[test]
fn vtesh_level_two_is_below_b_m_star() {
    for q in [17, 29, 61] {
        let z2 = vtesh_level(&paley_graph(q).unwrap(), &HierarchyConfig::exhaustive(2)).unwrap().value;
        let star = b_m_star(q).unwrap().value;
        let plain = b_m(q).unwrap().value;
        let z1 = vtesh_level(&paley_graph(q).unwrap(), &HierarchyConfig::exhaustive(1)).unwrap().value;
        assert!(z2 <= star + 1e-5 && star <= plain + 1e-5, "q = {q}");
        assert!((plain - z1).abs() < 1e-5);
    }
}

#[test]
fn report_rows() {
    let r = assemble_report(13, &ReportOptions::default()).unwrap();
    assert_eq!(r.alpha.value(), Some(3.0));
    assert!((r.theta.value().unwrap() - 3.6056).abs() < 1e-4);
    assert_eq!(r.hanson.value(), Some(3.0));
    assert!((r.b_m.value().unwrap() - 3.0).abs() < 1e-4);
    assert_eq!(r.ell, 3);
    for cell in r.upper_bounds() {
        assert!(cell.value().unwrap() >= 3.0 - 1e-6);
    }
    assert!(r.cohen_lower.value().unwrap() <= 3.0 + 1e-9);

    let sq = assemble_report(9, &ReportOptions::default()).unwrap();
    assert_eq!(sq.alpha.value(), Some(3.0));
    assert!((sq.theta.value().unwrap() - 3.0).abs() < 1e-6);
    assert!(matches!(sq.maistrelli, Cell::Skipped { .. }));

    let opts = ReportOptions {
        alpha_max_q: 0,
        theta_sdp_max_q: 0,
        local_max_q: 0,
        hierarchy: Vec::new(),
    };
    let big = assemble_report(125, &opts).unwrap();
    assert!(matches!(big.hanson, Cell::Skipped { .. }));
    assert!(matches!(big.alpha, Cell::Skipped { .. }));
    assert!((big.theta.value().unwrap() - 125f64.sqrt()).abs() < 1e-12);
}

#[test]
fn report_with_hierarchy_entries() {
    let opts = ReportOptions {
        hierarchy: vec![
            HierarchyRequest {
                kind: BoundKind::Esh,
                config: HierarchyConfig::exhaustive(2),
            },
            HierarchyRequest {
                kind: BoundKind::Vtesh,
                config: HierarchyConfig::exhaustive(2),
            },
        ],
        ..ReportOptions::default()
    };
    let r = assemble_report(17, &opts).unwrap();
    let esh = r.hierarchy[0].cell.value().unwrap();
    let vt = r.hierarchy[1].cell.value().unwrap();
    assert!((esh - 17f64.sqrt()).abs() < 1e-4);
    assert!((vt - 3.3431).abs() < 2e-3);
    assert!(assemble_report(15, &opts).is_err());
}
