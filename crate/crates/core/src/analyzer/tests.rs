use std::sync::Arc;

use super::*;
use crate::mesh::make_disc_mesh;

fn identity(rings: usize) -> PAMap {
    let mesh = Arc::new(make_disc_mesh(rings).unwrap());
    PAMap::from_fn(mesh, MetricTarget::euclidean(2), |p| vec![p.x, p.y]).unwrap()
}

fn cone_chart(rings: usize, alpha: f64) -> PAMap {
    let mesh = Arc::new(make_disc_mesh(rings).unwrap());
    let t = MetricTarget::cone(alpha).unwrap();
    PAMap::from_fn(mesh, t.clone(), |p| {
        let mut o = vec![0.0; 2];
        t.from_params(&[p.x, p.y], &mut o);
        o
    })
    .unwrap()
}

fn report(map: &PAMap, cfg: &CheckConfig, kinds: &[CheckKind]) -> AnalysisReport {
    let zd = IntrinsicDisc::from_map(map).unwrap();
    analyze(map, &zd, cfg, AreaDef::BusemannHausdorff, kinds).unwrap()
}

#[test]
fn default_constants() {
    let bh = AreaDef::BusemannHausdorff;
    let ht = AreaDef::HolmesThompson;
    assert!((default_isoperimetric_constant(&MetricTarget::euclidean(2), bh).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
    assert!((default_isoperimetric_constant(&MetricTarget::cone(0.5).unwrap(), bh).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
    // ℓ∞ plane: the isoperimetrix is the ℓ1 diamond, perimeter 4, Lebesgue area 2
    let sup = MetricTarget::sup(2);
    assert!((default_isoperimetric_constant(&sup, ht).unwrap() - (2.0 / PI) * 2.0 / 16.0).abs() < 1e-12);
    assert!((default_isoperimetric_constant(&sup, bh).unwrap() - (PI / 4.0) * 2.0 / 16.0).abs() < 1e-12);
    assert!((default_isoperimetric_constant(&MetricTarget::sup(5), ht).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
}

#[test]
fn check_list_parsing() {
    let ks = CheckKind::parse_list("iso,growth, holder").unwrap();
    assert_eq!(ks, vec![CheckKind::Iso, CheckKind::Growth, CheckKind::Holder]);
    assert_eq!(CheckKind::parse_list("all").unwrap().len(), CheckKind::ALL.len());
    assert!(CheckKind::parse_list("iso,bogus").is_err());
}

#[test]
fn config_validation() {
    let mut cfg = CheckConfig { c: Some(0.01), ..Default::default() };
    assert!(cfg.validate().is_err());
    cfg.c = Some(1.0 / (8.0 * PI));
    assert!(cfg.validate().is_ok());
    cfg.l0 = Some(0.0);
    assert!(cfg.validate().is_err());
    let json = r#"{"c": 0.1, "slack": {"iso": 0.05}, "bogus": 1}"#;
    assert!(serde_json::from_str::<CheckConfig>(json).is_err());
    let cfg: CheckConfig = serde_json::from_str(r#"{"c": 0.1, "slack": {"iso": 0.05}}"#).unwrap();
    assert_eq!(cfg.slack.iso, 0.05);
    assert_eq!(cfg.slack.growth, 0.2);
}

#[test]
fn flat_identity_passes_every_check() {
    let map = identity(20);
    let r = report(&map, &CheckConfig::default(), &CheckKind::ALL);
    for c in &r.checks {
        assert!(c.pass, "{}: {:?}", c.name, c);
        assert!(c.measured.is_finite() && c.bound.is_finite() && c.ratio.is_finite(), "{c:?}");
    }
    assert_eq!(r.checks.len(), CheckKind::ALL.len());
    let iso = r.get(CheckKind::Iso).unwrap();
    // the disc itself is the extremal cycle
    assert!(iso.ratio > 0.95 && iso.ratio <= 1.02, "{iso:?}");
}

#[test]
fn courant_lebesgue_closed_form() {
    // identity: e_r = πr², min l_t = 2π·2r/3, ratio 16/54
    let map = identity(20);
    let r = report(&map, &CheckConfig::default(), &[CheckKind::Cl]);
    let cl = r.get(CheckKind::Cl).unwrap();
    assert!((cl.ratio - 16.0 / 54.0).abs() < 0.02, "{cl:?}");
}

#[test]
fn growth_matches_euclidean_balls() {
    let map = identity(20);
    let cfg = CheckConfig {
        growth: vec![BallSpec { center: [0.0, 0.0], radii: vec![0.2, 0.4, 0.6] }],
        ..Default::default()
    };
    let r = report(&map, &cfg, &[CheckKind::Growth]);
    let g = r.get(CheckKind::Growth).unwrap();
    let ratios = g.details["centers"][0]["ratios"].as_array().unwrap();
    for x in ratios {
        let x = x.as_f64().unwrap();
        assert!((0.9..1.05).contains(&x), "{ratios:?}");
    }
    let e = g.details["centers"][0]["exponent"].as_f64().unwrap();
    assert!((e - 2.0).abs() < 0.1, "{e}");
}

#[test]
fn cone_chart_holder_and_growth() {
    let map = cone_chart(24, 0.5);
    let cfg = CheckConfig {
        holder_center: Some([0.0, 0.0]),
        growth: vec![BallSpec { center: [0.0, 0.0], radii: vec![0.2, 0.4, 0.6, 0.8] }],
        ..Default::default()
    };
    let r = report(&map, &cfg, &[CheckKind::Holder, CheckKind::Growth, CheckKind::Coarea]);
    assert!((r.c - 1.0 / (2.0 * PI)).abs() < 1e-15);
    let h = r.get(CheckKind::Holder).unwrap();
    assert!((0.4..=0.6).contains(&h.measured), "{h:?}");
    assert!((h.bound - 0.5).abs() < 1e-12);
    let g = r.get(CheckKind::Growth).unwrap();
    for x in g.details["centers"][0]["ratios"].as_array().unwrap() {
        assert!((x.as_f64().unwrap() - 1.0).abs() < 0.08, "{g:?}");
    }
    let co = r.get(CheckKind::Coarea).unwrap();
    assert!((co.ratio - 1.0).abs() < 0.15, "{co:?}");
}

#[test]
fn constant_map_is_degenerate() {
    let mesh = Arc::new(make_disc_mesh(4).unwrap());
    let map = PAMap::from_fn(mesh, MetricTarget::euclidean(2), |_| vec![0.3, 0.1]).unwrap();
    let zd = IntrinsicDisc::from_map(&map).unwrap();
    let r = analyze(&map, &zd, &CheckConfig::default(), AreaDef::BusemannHausdorff, &CheckKind::ALL).unwrap();
    for kind in [CheckKind::Iso, CheckKind::Holder, CheckKind::Growth, CheckKind::Voronoi, CheckKind::Coarea] {
        assert_eq!(r.get(kind).unwrap().status, Status::Degenerate, "{kind}");
    }
    // l_t = 0 passes against any energy
    assert!(r.get(CheckKind::Cl).unwrap().pass);
}

#[test]
fn collapsed_disc_doubling_witness() {
    let mesh = Arc::new(make_disc_mesh(24).unwrap());
    let t = MetricTarget::collapsed_disc(Vec2::zeros(), 0.25).unwrap();
    let map = PAMap::from_fn(mesh, t, |p| vec![p.x, p.y]).unwrap();
    let cfg = CheckConfig {
        doubling: Some(DoublingSpec { anchor: [0.0, 0.0], points: vec![[0.45, 0.0], [0.35, 0.0], [0.3, 0.0]] }),
        growth: vec![
            BallSpec { center: [0.0, 0.0], radii: vec![0.04, 0.06, 0.08, 0.12] },
            BallSpec { center: [0.6, 0.0], radii: vec![0.05, 0.1, 0.2, 0.3] },
        ],
        ..Default::default()
    };
    let r = report(&map, &cfg, &[CheckKind::Doubling, CheckKind::Growth]);
    let d = r.get(CheckKind::Doubling).unwrap();
    assert!(d.pass, "{d:?}");
    let g = r.get(CheckKind::Growth).unwrap();
    assert!(g.pass, "{g:?}");
    let thick = g.details["centers"][0]["exponent"].as_f64().unwrap();
    let flat = g.details["centers"][1]["exponent"].as_f64().unwrap();
    assert!((0.8..=1.2).contains(&thick), "{thick}");
    assert!((1.8..=2.2).contains(&flat), "{flat}");
}

#[test]
fn report_round_trips_and_is_deterministic() {
    let map = identity(12);
    let a = report(&map, &CheckConfig::default(), &CheckKind::ALL);
    let b = report(&map, &CheckConfig::default(), &CheckKind::ALL);
    let ja = io::to_json_string(&a).unwrap();
    assert_eq!(ja, io::to_json_string(&b).unwrap());
    let back: AnalysisReport = serde_json::from_str(&ja).unwrap();
    assert_eq!(back.checks.len(), a.checks.len());
    assert!(a.to_csv().lines().count() == a.checks.len() + 1);
}
