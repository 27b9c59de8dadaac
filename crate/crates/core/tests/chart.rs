use chabauty_core::catalog::InstanceRef;
use chabauty_core::certificates::{check_certificate, refute_pair, CertificateKind};
use chabauty_core::chart::{run_chart, ChartReport, Registries, RegistryError};

fn reg() -> Registries {
    Registries::builtin()
}

#[test]
fn every_dimension_passes() {
    let reg = reg();
    for dim in 1..=6 {
        let r = run_chart(&reg, dim).unwrap();
        assert!(r.passed(), "dim {dim}: {:?}\n{:#?}", r.summary, r.audit);
        let n = r.summary.nodes;
        let accounted = r.summary.direct + r.summary.implied + r.refutations.len();
        assert_eq!(accounted, n * (n - 1), "dim {dim}");
    }
}

#[test]
fn refutations_are_checkable() {
    let reg = reg();
    for dim in 1..=6 {
        for p in run_chart(&reg, dim).unwrap().refutations {
            let c = p.certificate;
            if c.is_mechanical_refutation() {
                assert!(
                    check_certificate(&reg.catalog, &c).unwrap(),
                    "{} -> {}",
                    c.source,
                    c.target
                );
            }
        }
    }
}

#[test]
fn isolated_top_dimensions() {
    let reg = reg();
    for (dim, nodes) in [(5, 3), (6, 2)] {
        let r = run_chart(&reg, dim).unwrap();
        assert_eq!((r.nodes.len(), r.arrows.len()), (nodes, 0));
        assert_eq!(r.refutations.len(), nodes * (nodes - 1));
        let dot = r.to_dot();
        assert_eq!(dot.matches("->").count(), 0);
        assert_eq!(dot.matches("[label=").count(), nodes);
    }
}

#[test]
fn dim1_dot_and_json() {
    let r = run_chart(&reg(), 1).unwrap();
    let dot = r.to_dot();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("\"W1,3\" -> \"W1,5\";"));
    assert!(!dot.contains("dashed"));
    assert!(dot.contains("[label=\"W1,1\\nsingular\"]"));
    assert_eq!(dot.matches("->").count(), 7);
    let json = r.to_json();
    let back: ChartReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);
    assert_eq!(run_chart(&reg(), 1).unwrap().to_json(), json);
}

#[test]
fn dim2_fallback_is_flagged() {
    let r = run_chart(&reg(), 2).unwrap();
    let flagged: Vec<_> = r
        .arrows
        .iter()
        .filter(|a| {
            matches!(
                &a.certificate.kind,
                CertificateKind::Verified {
                    substitution: Some(_),
                    ..
                }
            )
        })
        .map(|a| a.certificate.source.to_string())
        .collect();
    assert_eq!(flagged, ["W2,9"]);
}

#[test]
fn two_paths_are_not_refuted() {
    let reg = reg();
    for dim in 1..=4 {
        let r = run_chart(&reg, dim).unwrap();
        let edges: Vec<(&InstanceRef, &InstanceRef)> = r
            .arrows
            .iter()
            .map(|a| (&a.certificate.source, &a.certificate.target))
            .collect();
        for &(h, l) in &edges {
            for &(l2, m) in &edges {
                if l == l2 && h != m {
                    let c = refute_pair(&reg.catalog, h, m, None).unwrap();
                    assert!(
                        !c.is_mechanical_refutation(),
                        "{h} -> {l} -> {m}: {}",
                        c.summary()
                    );
                }
            }
        }
    }
}

#[test]
fn registry_errors() {
    let cat = reg().catalog;
    let mismatch = r#"{"arrows": [{"source": {"id": "W1,5", "params": {}}, "g": [["n","0","0"],["0","1","0"],["0","0","1/n"]],
        "target": {"id": "W2,3", "params": {}}, "citation": "x"}]}"#;
    assert!(matches!(
        Registries::from_parts(cat.clone(), mismatch),
        Err(RegistryError::DimensionMismatch { .. })
    ));
    let unknown = mismatch.replace("W2,3", "W9,1");
    assert!(Registries::from_parts(cat.clone(), &unknown).is_err());
    assert!(matches!(
        Registries::from_parts(cat, "{"),
        Err(RegistryError::Json(_))
    ));
}

#[test]
fn builtin_counts() {
    let reg = reg();
    assert!(reg.arrows.len() >= 23);
    assert!(reg.builtin_key("builtin:W1,5->W1,4").is_some());
    assert!(run_chart(&reg, 7).is_err());
}
