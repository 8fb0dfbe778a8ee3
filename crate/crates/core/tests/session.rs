use std::sync::{Arc, OnceLock};

use serde_json::{json, Value};

use netrepr::composite::{pearson, Measure};
use netrepr::features::{Aggregator, FeatureConfig};
use netrepr::graph::CentralityKind;
use netrepr::learn::{LabelDefinition, MlpConfig};
use netrepr::attribution::ShapConfig;
use netrepr::session::{
    axis_values, density_field, export_view, get_view_data, layout_view, load_session, save_session, session_digest,
    shap_view, AnalysisSession, ClassTag, ComparisonMode, Connection, DensityRequest, EvaluationConfig, ExportFormat,
    OutputConfig, Registry, Service, SessionConfig, ViewPayload, ViewRequest,
};
use netrepr::synth::{planted_network, PlantedConfig, TARGET};
use netrepr::viz::{kde2d, polar_legend, LEGEND_SIZE};
use netrepr::learn::Class;
use netrepr::Error;

fn config() -> SessionConfig {
    SessionConfig {
        name: "small".into(),
        dataset: "small.json".into(),
        features: FeatureConfig {
            attributes: vec!["a".into(), "b".into(), "c".into(), "d".into()],
            centralities: vec![CentralityKind::Degree],
            aggregators: vec![Aggregator::Mean],
            hops: 1,
            prune_threshold: 0.95,
        },
        output: OutputConfig {
            attribute: TARGET.into(),
            labeling: LabelDefinition::default(),
        },
        mlp: MlpConfig {
            hidden: vec![16, 8],
            epochs: 60,
            seed: 1,
            ..MlpConfig::default()
        },
        gamma: None,
        shap: ShapConfig {
            background_cap: 10,
            seed: 1,
            ..ShapConfig::default()
        },
        layout: Default::default(),
        evaluation: EvaluationConfig::default(),
    }
}

fn network() -> netrepr::graph::MultivariateNetwork {
    planted_network(&PlantedConfig {
        nodes: 150,
        attributes: 4,
        mean_degree: 4.0,
        seed: 3,
        ..PlantedConfig::default()
    })
    .unwrap()
}

fn session() -> &'static AnalysisSession {
    static S: OnceLock<AnalysisSession> = OnceLock::new();
    S.get_or_init(|| AnalysisSession::run(config(), network()).unwrap())
}

fn class_ids(s: &AnalysisSession, c: Class) -> Vec<String> {
    let rep = s.representation().unwrap();
    rep.instance_ids
        .iter()
        .zip(&rep.class_of)
        .filter(|(_, k)| **k == Some(c))
        .map(|(id, _)| id.clone())
        .collect()
}

#[test]
fn save_and_load_round_trip() {
    let s = session();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small");
    let manifest = save_session(s, &path).unwrap();
    let loaded = load_session(&path).unwrap();
    assert_eq!(&loaded, s);
    assert_eq!(manifest.digest, session_digest(&loaded).unwrap());
}

#[test]
fn unknown_output_fails_validation() {
    let mut cfg = config();
    cfg.output.attribute = "nope".into();
    let err = AnalysisSession::prepare(cfg, network()).unwrap_err();
    let Error::Step { source, .. } = err else { panic!("expected a step error, got {err}") };
    assert!(matches!(*source, Error::UnknownAttribute(ref a) if a == "nope"));
}

#[test]
fn rerun_reproduces_representation() {
    let again = AnalysisSession::run(config(), network()).unwrap();
    assert_eq!(again.representation().unwrap(), session().representation().unwrap());
    assert_eq!(session_digest(&again).unwrap(), session_digest(session()).unwrap());
}

#[test]
fn selecting_class_zero_matches_class_comparison() {
    let mut s = session().clone();
    let default = s.histograms(20).unwrap();
    let selected = s.set_selection(class_ids(&s, Class::Zero), 20).unwrap();
    let order = |h: &[netrepr::viz::DoubleHistogram]| h.iter().map(|x| x.attribute.clone()).collect::<Vec<_>>();
    assert_eq!(order(&default), order(&selected));
    for (a, b) in default.iter().zip(&selected) {
        assert_eq!(a.ks, b.ks);
    }
    let ViewPayload::Histograms(v) = get_view_data(&s, &ViewRequest::Histograms { bins: 20 }).unwrap() else {
        panic!()
    };
    assert_eq!(v.mode, ComparisonMode::Selection);

    s.set_selection(vec![], 20).unwrap();
    let ViewPayload::Histograms(v) = get_view_data(&s, &ViewRequest::Histograms { bins: 20 }).unwrap() else {
        panic!()
    };
    assert_eq!(v.mode, ComparisonMode::Classes);
}

#[test]
fn foreign_ids_are_reported_and_leave_selection_untouched() {
    let mut s = session().clone();
    let first = s.network.node_ids()[0].clone();
    s.set_selection(vec![first.clone()], 10).unwrap();
    let err = s.set_selection(vec![first.clone(), "ghost".into()], 10).unwrap_err();
    assert!(matches!(err, Error::UnknownNodes(ref ids) if ids == &["ghost".to_string()]));
    assert_eq!(s.selection, vec![first]);
}

#[test]
fn composites_discard_and_rebuild() {
    let mut s = session().clone();
    let names: Vec<String> = s.shap().unwrap().attribute_names.iter().take(5).cloned().collect();
    let built = s.construct_composite(&names, Measure::Pearson).unwrap().clone();
    assert_eq!(built.variable.weights.len(), 5);
    s.discard_composite(0).unwrap();
    assert!(s.composites.is_empty());
    let again = s.construct_composite(&names, Measure::Pearson).unwrap();
    assert_eq!(again, &built);
    assert!(s.discard_composite(3).is_err());
}

#[test]
fn composite_beats_best_single_attribute() {
    let mut s = session().clone();
    let names = s.shap().unwrap().attribute_names.clone();
    let (cols, target) = s.composite_inputs(&names).unwrap();
    let best = cols
        .iter()
        .filter_map(|c| pearson(c, &target).ok())
        .fold(0.0f64, |m, r| m.max(r.abs()));
    let top = s.ranking().unwrap().entries[0].name.clone();
    let (single, _) = s.composite_inputs(&[top.clone()]).unwrap();
    let top_r = pearson(&single[0], &target).unwrap().abs();
    let entry = s.construct_composite(&[top], Measure::Pearson).unwrap();
    assert!((entry.variable.achieved_dependence - top_r).abs() < 1e-9);
    let all = s.construct_composite(&names, Measure::Pearson).unwrap();
    assert!(all.variable.achieved_dependence >= best - 1e-12);
}

#[test]
fn shap_view_follows_ranking() {
    let s = session();
    let view = shap_view(s, false, 32).unwrap();
    let ranking = s.ranking().unwrap().names();
    let groups: Vec<&str> = view.groups.iter().map(|g| g.attribute.as_str()).collect();
    assert_eq!(groups, ranking);
    assert_eq!(groups.len(), s.shap().unwrap().attribute_names.len());
    assert!(view.groups.iter().all(|g| g.points.len() == s.shap().unwrap().instance_ids.len()));
}

#[test]
fn layout_marks_unlabeled_nodes() {
    let s = session();
    let view = layout_view(s).unwrap();
    assert_eq!(view.nodes.len(), s.network.node_count());
    let rep = s.representation().unwrap();
    for (node, class) in view.nodes.iter().zip(&rep.class_of) {
        let tag = ClassTag::from(*class);
        assert_eq!(node.class, tag);
        assert_eq!(node.color, tag.color());
    }
    assert!(view.nodes.iter().any(|n| n.class == ClassTag::Other && n.color == "gray"));
}

#[test]
fn composite_density_axes() {
    let mut s = session().clone();
    let names: Vec<String> = s.shap().unwrap().attribute_names.iter().take(3).cloned().collect();
    s.construct_composite(&names, Measure::Spearman).unwrap();
    let req = DensityRequest {
        width: Some(40),
        height: Some(30),
        ..DensityRequest::new("representation", "composite:0")
    };
    let field = density_field(&s, &req).unwrap();

    let rep = s.representation().unwrap();
    let labeled: Vec<usize> = (0..rep.values.len()).filter(|&i| rep.class_of[i].is_some()).collect();
    let (cols, _) = s.composite_inputs(&names).unwrap();
    let ys = s.composites[0].variable.apply(&cols);
    assert_eq!(axis_values(&s, "composite:0").unwrap(), ys);
    let pts: Vec<[f64; 2]> = labeled.iter().zip(&ys).map(|(&i, &y)| [rep.values[i], y]).collect();
    let labels: Vec<Class> = labeled.iter().map(|&i| rep.class_of[i].unwrap()).collect();
    assert_eq!(field, kde2d(&pts, &labels, &req.options()).unwrap());

    assert!(matches!(axis_values(&s, "composite:4"), Err(Error::InvalidArgument(_))));
    assert!(matches!(axis_values(&s, "attribute:zzz"), Err(Error::UnknownAttribute(_))));
}

#[test]
fn exports() {
    let s = session();
    let req = DensityRequest {
        width: Some(24),
        height: Some(20),
        ..DensityRequest::new("representation", "attribute:a")
    };
    let png = export_view(s, "density", Some(&req), ExportFormat::Png).unwrap();
    assert_eq!(&png[..8], b"\x89PNG\r\n\x1a\n");
    let doc: Value = serde_json::from_slice(&export_view(s, "density", Some(&req), ExportFormat::Json).unwrap()).unwrap();
    assert_eq!(doc["field"]["width"], 24);
    assert_eq!(doc["y"], "attribute:a");

    let legend = export_view(s, "legend", None, ExportFormat::Png).unwrap();
    assert_eq!(legend, polar_legend(LEGEND_SIZE).to_png().unwrap());

    let summary: Value = serde_json::from_slice(&export_view(s, "summary", None, ExportFormat::Json).unwrap()).unwrap();
    assert_eq!(summary["name"], "small");
    assert!(export_view(s, "layout", None, ExportFormat::Png).is_err());
    assert!(export_view(s, "bogus", None, ExportFormat::Json).is_err());
    assert!(ExportFormat::from_path("out.txt".as_ref()).is_err());
    assert_eq!(ExportFormat::from_path("OUT.PNG".as_ref()).unwrap(), ExportFormat::Png);
}

fn call(service: &Service, conn: &mut Connection, req: Value) -> Value {
    serde_json::from_str(&service.handle_text(conn, &req.to_string())).unwrap()
}

fn error_kind(v: &Value) -> &str {
    assert_eq!(v["status"], "error", "{v}");
    v["error"]["kind"].as_str().unwrap()
}

#[test]
fn protocol_round_trip() {
    let registry = Arc::new(Registry::in_memory());
    registry.insert(session().clone());
    let service = Service::new(registry);
    let mut conn = Connection::default();

    let hello = call(&service, &mut conn, json!({"v": 1, "id": 1, "op": "hello"}));
    assert_eq!(hello["status"], "ok");
    assert_eq!(hello["id"], 1);
    assert!(hello["payload"]["ops"].as_array().unwrap().len() >= 9);

    let list = call(&service, &mut conn, json!({"op": "list_sessions"}));
    assert_eq!(list["payload"]["sessions"], json!(["small"]));

    let view = json!({"op": "get_view_data", "params": {"view": "layout"}});
    assert_eq!(error_kind(&call(&service, &mut conn, view.clone())), "no_session");

    let open = call(&service, &mut conn, json!({"op": "open_session", "params": {"name": "small"}}));
    assert_eq!(open["payload"]["name"], "small");
    assert_eq!(conn.session_name(), Some("small"));

    let layout = call(&service, &mut conn, view);
    assert_eq!(layout["payload"]["nodes"].as_array().unwrap().len(), 150);

    let density = call(
        &service,
        &mut conn,
        json!({"op": "get_view_data", "params": {"view": "density", "y": "attribute:b", "width": 16, "height": 16}}),
    );
    assert_eq!(density["payload"]["x"], "representation");
    assert!(density["payload"]["image_png"].as_str().unwrap().len() > 10);

    let built = call(
        &service,
        &mut conn,
        json!({"op": "construct_composite", "params": {"attributes": ["a", "b"], "measure": "spearman"}}),
    );
    assert_eq!(built["payload"]["index"], 0);
    assert_eq!(built["payload"]["weights"].as_array().unwrap().len(), 2);

    let composites = call(&service, &mut conn, json!({"op": "get_view_data", "params": {"view": "composites"}}));
    assert_eq!(composites["payload"]["composites"].as_array().unwrap().len(), 1);
    let discarded = call(&service, &mut conn, json!({"op": "discard_composite", "params": {"index": 0}}));
    assert_eq!(discarded["payload"]["composites"], json!([]));

    let ids = json!(["v0000", "v0001", "v0002"]);
    let sel = call(&service, &mut conn, json!({"op": "set_selection", "params": {"ids": ids, "bins": 8}}));
    assert_eq!(sel["payload"]["mode"], "selection");
    assert_eq!(sel["payload"]["group_a"], 3);
    let summary = call(&service, &mut conn, json!({"op": "get_summary"}));
    assert_eq!(summary["payload"]["selection"], ids);

    let bad = call(&service, &mut conn, json!({"op": "set_selection", "params": {"ids": ["v0000", "ghost"]}}));
    assert_eq!(error_kind(&bad), "unknown_nodes");
    assert!(bad["error"]["message"].as_str().unwrap().contains("ghost"));

    let closed = call(&service, &mut conn, json!({"op": "close_session"}));
    assert_eq!(closed["status"], "ok");
    assert_eq!(conn.session_name(), None);
}

#[test]
fn protocol_errors() {
    let service = Service::new(Arc::new(Registry::in_memory()));
    let mut conn = Connection::default();
    let raw: Value = serde_json::from_str(&service.handle_text(&mut conn, "{not json")).unwrap();
    assert_eq!(error_kind(&raw), "bad_request");
    assert_eq!(error_kind(&call(&service, &mut conn, json!({"v": 99, "op": "hello"}))), "unsupported_version");
    assert_eq!(error_kind(&call(&service, &mut conn, json!({"op": "dance"}))), "unknown_op");
    assert_eq!(error_kind(&call(&service, &mut conn, json!({"op": "get_summary"}))), "no_session");
    let missing = call(&service, &mut conn, json!({"op": "open_session", "params": {"name": "absent"}}));
    assert_eq!(error_kind(&missing), "session_not_found");
    let extra = call(&service, &mut conn, json!({"op": "open_session", "params": {"name": "x", "other": 1}}));
    assert_eq!(error_kind(&extra), "bad_request");
}

#[test]
fn registry_loads_saved_sessions_lazily() {
    let root = tempfile::tempdir().unwrap();
    save_session(session(), root.path().join("small")).unwrap();
    let registry = Registry::new(root.path());
    assert_eq!(registry.list(), vec!["small".to_string()]);
    assert!(matches!(registry.get("../small"), Err(Error::SessionNotFound(_))));
    let shared = registry.get("small").unwrap();
    assert_eq!(&*shared.read().unwrap(), session());
}
