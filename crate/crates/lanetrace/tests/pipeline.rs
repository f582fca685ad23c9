//! End-to-end pipeline: synthesize a scene, build the tracing field from
//! its rendered raster, run discovery, and score the result against the
//! scene's own ground truth.

use lanetrace::dag::VertexState;
use lanetrace::eval::{precision_recall, EvalConfig};
use lanetrace::headers::{HeaderConfig, HeaderSuite};
use lanetrace::inference::{discover, initial_vertices, Discovery, InferenceConfig};
use lanetrace::raster::field_from_intensity;
use lanetrace::synth::{generate, EventKind, EventSpec, GroundTruthScene, NoiseSpec, SceneSpec};

const MASK_THRESHOLD: f64 = 0.7;

fn spec(seed: u64, lanes: u32, events: Vec<EventSpec>) -> SceneSpec {
    SceneSpec { seed, num_lanes: lanes, events, ..SceneSpec::default() }
}

fn event(kind: EventKind, position_m: f64) -> EventSpec {
    EventSpec { kind, longitudinal_position_m: position_m, ramp_length_m: 80.0 }
}

fn trace(scene: &GroundTruthScene) -> Discovery {
    let field = field_from_intensity(&scene.raster, MASK_THRESHOLD).unwrap();
    let headers = HeaderSuite::new(HeaderConfig::default()).unwrap();
    let cfg = InferenceConfig::default();
    let seeds = initial_vertices(&field, cfg.binarize_threshold).unwrap();
    discover(&field, &headers, &seeds, &cfg).unwrap()
}

fn quality(scene: &GroundTruthScene, discovery: &Discovery) -> (f64, f64, f64) {
    let preds = vec![discovery.dag.to_polylines()];
    let gts = vec![scene.gt_polylines.clone()];
    let report = precision_recall(&preds, &gts, &EvalConfig::default()).unwrap();
    let at5 = report
        .thresholds
        .iter()
        .find(|m| m.threshold_px == 5.0)
        .expect("5 px is a default threshold");
    (at5.precision, at5.recall, report.topology.fraction)
}

#[test]
fn plain_scene_traces_every_boundary() {
    let scene = generate(&spec(101, 2, vec![])).unwrap();
    let discovery = trace(&scene);
    assert!(!discovery.budget_exceeded);
    assert!(discovery.dag.validate().is_empty());
    let polylines = discovery.dag.to_polylines();
    assert_eq!(polylines.len(), scene.gt_polylines.len(), "one trace per boundary");
    let (precision, recall, topology) = quality(&scene, &discovery);
    assert!(precision >= 0.95, "precision@5 {precision}");
    assert!(recall >= 0.95, "recall@5 {recall}");
    assert_eq!(topology, 1.0);
}

#[test]
fn fork_scene_discovers_the_split() {
    let scene = generate(&spec(102, 2, vec![event(EventKind::Fork, 150.0)])).unwrap();
    let discovery = trace(&scene);
    assert!(discovery.dag.validate().is_empty());
    assert_eq!(discovery.dag.count_state(VertexState::Fork), 1, "exactly one fork");
    assert_eq!(discovery.dag.to_polylines().len(), scene.gt_polylines.len());
    let (precision, recall, topology) = quality(&scene, &discovery);
    assert!(precision >= 0.9, "precision@5 {precision}");
    assert!(recall >= 0.9, "recall@5 {recall}");
    assert_eq!(topology, 1.0);
}

#[test]
fn merge_scene_ends_one_chain_on_the_survivor() {
    let scene = generate(&spec(103, 3, vec![event(EventKind::Merge, 200.0)])).unwrap();
    let discovery = trace(&scene);
    assert!(discovery.dag.validate().is_empty());
    assert_eq!(discovery.dag.count_state(VertexState::Terminate), 1, "exactly one merge");
    assert_eq!(discovery.dag.to_polylines().len(), scene.gt_polylines.len());
    let (precision, recall, topology) = quality(&scene, &discovery);
    assert!(precision >= 0.9, "precision@5 {precision}");
    assert!(recall >= 0.9, "recall@5 {recall}");
    assert_eq!(topology, 1.0);
}

#[test]
fn moderate_noise_does_not_break_tracing() {
    let noisy = SceneSpec {
        noise: NoiseSpec { gaussian_sigma: 0.05, dropout_prob: 0.01 },
        ..spec(104, 2, vec![event(EventKind::Fork, 180.0)])
    };
    let scene = generate(&noisy).unwrap();
    let discovery = trace(&scene);
    assert!(discovery.dag.validate().is_empty());
    let (precision, recall, topology) = quality(&scene, &discovery);
    assert!(precision >= 0.9, "precision@5 {precision}");
    assert!(recall >= 0.9, "recall@5 {recall}");
    assert_eq!(topology, 1.0);
}
