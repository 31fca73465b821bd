use num_bigint::BigInt;
use num_rational::BigRational;
use prill_core::cert::Certificate;
use prill_core::tower::{build_tower, certify, Stage, TowerOptions, UPointKind};

fn ints(values: [i64; 6]) -> Vec<BigRational> {
    values
        .iter()
        .map(|&v| BigRational::from_integer(BigInt::from(v)))
        .collect()
}

#[test]
fn pinned_configuration_end_to_end() {
    let start = std::time::Instant::now();
    let model = build_tower(&ints([0, 1, 2, 3, 4, 6]), &TowerOptions::default()).unwrap();
    eprintln!("build: {:.1?}", start.elapsed());

    // Stage degrees and shapes.
    for stage in Stage::ALL {
        let ts = model.tracked(stage);
        assert_eq!(ts.cover.degree, stage.expected_degree(), "{}", stage.name());
    }
    assert_eq!(model.t_plane.points.len(), 9);
    assert_eq!(model.u_plane.points.len(), 89);

    // Top stage: connected, genus 37, unramified of degree 36 over the
    // genus-2 stage.
    let x = &model.x_t.cover;
    assert!(x.is_connected());
    assert_eq!(x.genus().unwrap(), 37);
    assert_eq!(model.y.cover.genus().unwrap(), 2);
    assert_eq!(model.e.cover.genus().unwrap(), 1);
    assert_eq!(model.c1.cover.genus().unwrap(), 3);
    assert_eq!(model.c2_t.cover.genus().unwrap(), 19);

    // Every 3-torsion abscissa sees the {2,2} profile on the u-line.
    let mut d_count = 0;
    for (k, kind) in model.u_kinds.iter().enumerate() {
        if *kind == UPointKind::ThreeTorsionRoot {
            d_count += 1;
            let ct = model.c2_u.cover.profile(k).unwrap();
            assert_eq!(ct.lengths(), &[2, 2], "at {}", model.u_plane.labels[k]);
        }
    }
    assert_eq!(d_count, 4);

    // Full certificate: verdicts all green and JSON round-trips byte
    // for byte.
    let cert = certify(&model, 7).unwrap();
    assert!(!cert.failed);
    assert!(cert.verdicts.unramified_over_genus_two.ok);
    assert_eq!(cert.verdicts.cover_degree.degree, 36);
    assert_eq!(cert.verdicts.top_genus.genus, Some(37));
    assert_eq!(cert.verdicts.top_genus.genus_from_euler_ratio, 37);
    assert!(cert.verdicts.degree_below_genus);
    assert!(cert.verdicts.loop_products_contractible);
    assert!(cert.cross_validation.ok);
    assert_eq!(cert.cross_validation.fiber_square.numeric_genus, Some(3));
    assert_eq!(cert.cross_validation.triple_cover.symbolic_genus, Some(19));

    let json = cert.to_json();
    assert!(json.contains("\"degree\": 36"));
    let parsed = Certificate::from_json(&json).unwrap();
    assert_eq!(parsed, cert);
    assert_eq!(parsed.to_json(), json);
    eprintln!("total: {:.1?}, substeps: {}", start.elapsed(), cert.diagnostics.total_substeps);
}
