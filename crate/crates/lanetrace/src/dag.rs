//! The lane graph: a forest of out-trees over sparse boundary vertices.
//!
//! Each vertex carries a position, the heading it was reached along, and one
//! of three states: `Normal` (the boundary continues), `Fork` (it splits in
//! two — exactly two children), `Terminate` (it ends — no children, either by
//! merging into an already-traced boundary or by running out of evidence).
//! Merges are *not* represented as in-degree-2 joins; the dying boundary
//! simply terminates next to its survivor, keeping every vertex's parent
//! unique and the graph a forest.
//!
//! The module provides structural validation ([`LaneDag::validate`]),
//! deterministic root-to-leaf polyline extraction
//! ([`LaneDag::to_polylines`]), and the serialized form used by every
//! artifact: a JSON object with sorted keys listing roots, vertices and the
//! extracted polylines (see [`to_json_value`] / [`from_json_value`]).
//!
//! The decode log-score of a graph under the local predictors lives in
//! [`crate::inference::dag_log_score`] — it needs the full prediction
//! machinery to replay the decode.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::geom::{heading_between, Angle, Point, Polyline};

/// Per-vertex topology state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexState {
    /// The boundary continues: at most one child.
    Normal,
    /// The boundary splits: exactly two children.
    Fork,
    /// The boundary ends: no children.
    Terminate,
}

impl VertexState {
    /// Serialized name.
    pub fn as_str(&self) -> &'static str {
        match self {
            VertexState::Normal => "normal",
            VertexState::Fork => "fork",
            VertexState::Terminate => "terminate",
        }
    }

    /// Parses a serialized name.
    pub fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(VertexState::Normal),
            "fork" => Ok(VertexState::Fork),
            "terminate" => Ok(VertexState::Terminate),
            other => Err(Error::Format {
                what: "lane graph JSON",
                message: format!("unknown vertex state {other:?}"),
            }),
        }
    }
}

impl fmt::Display for VertexState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One vertex of the lane graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DagVertex {
    /// Unique id within the graph.
    pub id: u32,
    /// Position in raster coordinates.
    pub position: Point,
    /// Heading along which this vertex was reached from its parent (for
    /// roots: the initial tangent).
    pub heading: Angle,
    /// Topology state at this vertex.
    pub state: VertexState,
    /// Parent vertex id; `None` for roots.
    pub parent: Option<u32>,
    /// Child vertex ids, in creation order (at forks: primary first).
    pub children: Vec<u32>,
}

/// A forest of out-trees describing a scene's lane boundaries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LaneDag {
    vertices: BTreeMap<u32, DagVertex>,
    roots: Vec<u32>,
    next_id: u32,
}

/// One structural rule breach found by [`LaneDag::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// The vertex the rule was checked on, when applicable.
    pub vertex: Option<u32>,
    /// Stable rule name (e.g. `"fork-arity"`, `"link-consistency"`).
    pub rule: &'static str,
    /// Human-readable detail.
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.vertex {
            Some(id) => write!(f, "vertex {id}: {}: {}", self.rule, self.message),
            None => write!(f, "{}: {}", self.rule, self.message),
        }
    }
}

impl LaneDag {
    /// An empty graph.
    pub fn new() -> Self {
        LaneDag::default()
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    /// Whether the graph has no vertices.
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Root ids in insertion order.
    pub fn roots(&self) -> &[u32] {
        &self.roots
    }

    /// Looks up a vertex.
    pub fn get(&self, id: u32) -> Option<&DagVertex> {
        self.vertices.get(&id)
    }

    /// Iterates vertices in id order.
    pub fn iter(&self) -> impl Iterator<Item = &DagVertex> {
        self.vertices.values()
    }

    /// Number of vertices in a given state.
    pub fn count_state(&self, state: VertexState) -> usize {
        self.iter().filter(|v| v.state == state).count()
    }

    /// Adds a root vertex and returns its id.
    pub fn add_root(&mut self, position: Point, heading: Angle, state: VertexState) -> u32 {
        let id = self.next_id;
        self.next_id += 1;
        self.vertices.insert(
            id,
            DagVertex { id, position, heading, state, parent: None, children: Vec::new() },
        );
        self.roots.push(id);
        id
    }

    /// Adds a child vertex under `parent` and returns its id.
    ///
    /// # Panics
    /// Panics if `parent` does not exist — graph construction is fully under
    /// the caller's control, so a missing parent is a bug.
    pub fn add_child(
        &mut self,
        parent: u32,
        position: Point,
        heading: Angle,
        state: VertexState,
    ) -> u32 {
        let id = self.next_id;
        self.next_id += 1;
        self.vertices.insert(
            id,
            DagVertex { id, position, heading, state, parent: Some(parent), children: Vec::new() },
        );
        self.vertices
            .get_mut(&parent)
            .expect("add_child: parent vertex must exist")
            .children
            .push(id);
        id
    }

    /// Rewrites the state of an existing vertex (used by decode cleanup and
    /// by the score certificate tests).
    pub fn set_state(&mut self, id: u32, state: VertexState) {
        if let Some(v) = self.vertices.get_mut(&id) {
            v.state = state;
        }
    }

    // ───────────────────────── validation ─────────────────────────

    /// Checks every structural rule and returns all violations found.
    ///
    /// Rules: `root-listing` (roots exist, have no parent, and every
    /// parentless vertex is listed as a root exactly once), `missing-vertex`
    /// (parent/child references resolve), `link-consistency` (parent and
    /// child lists mirror each other), `fork-arity` / `terminate-arity` /
    /// `normal-arity` (2 / 0 / ≤1 children; a childless `Normal` vertex is
    /// legal — it marks a chain that stopped at the image border or lost
    /// track), and `reachability` (every vertex is reached from some root,
    /// which also rules out parent cycles).
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen_roots = BTreeMap::new();
        for &r in &self.roots {
            match self.vertices.get(&r) {
                None => out.push(Violation {
                    vertex: Some(r),
                    rule: "root-listing",
                    message: "listed root does not exist".into(),
                }),
                Some(v) => {
                    if v.parent.is_some() {
                        out.push(Violation {
                            vertex: Some(r),
                            rule: "root-listing",
                            message: "listed root has a parent".into(),
                        });
                    }
                    if *seen_roots.entry(r).and_modify(|c| *c += 1).or_insert(1u32) > 1 {
                        out.push(Violation {
                            vertex: Some(r),
                            rule: "root-listing",
                            message: "vertex listed as root more than once".into(),
                        });
                    }
                }
            }
        }

        for v in self.vertices.values() {
            if v.parent.is_none() && !self.roots.contains(&v.id) {
                out.push(Violation {
                    vertex: Some(v.id),
                    rule: "root-listing",
                    message: "parentless vertex is not listed as a root".into(),
                });
            }
            if let Some(p) = v.parent {
                match self.vertices.get(&p) {
                    None => out.push(Violation {
                        vertex: Some(v.id),
                        rule: "missing-vertex",
                        message: format!("parent {p} does not exist"),
                    }),
                    Some(pv) => {
                        let times = pv.children.iter().filter(|&&c| c == v.id).count();
                        if times != 1 {
                            out.push(Violation {
                                vertex: Some(v.id),
                                rule: "link-consistency",
                                message: format!(
                                    "parent {p} lists this child {times} times (want 1)"
                                ),
                            });
                        }
                    }
                }
            }
            for &c in &v.children {
                match self.vertices.get(&c) {
                    None => out.push(Violation {
                        vertex: Some(v.id),
                        rule: "missing-vertex",
                        message: format!("child {c} does not exist"),
                    }),
                    Some(cv) => {
                        if cv.parent != Some(v.id) {
                            out.push(Violation {
                                vertex: Some(v.id),
                                rule: "link-consistency",
                                message: format!(
                                    "child {c} records parent {:?}, not this vertex",
                                    cv.parent
                                ),
                            });
                        }
                    }
                }
            }
            let arity = v.children.len();
            match v.state {
                VertexState::Fork if arity != 2 => out.push(Violation {
                    vertex: Some(v.id),
                    rule: "fork-arity",
                    message: format!("fork has {arity} children (want 2)"),
                }),
                VertexState::Terminate if arity != 0 => out.push(Violation {
                    vertex: Some(v.id),
                    rule: "terminate-arity",
                    message: format!("terminate has {arity} children (want 0)"),
                }),
                VertexState::Normal if arity > 1 => out.push(Violation {
                    vertex: Some(v.id),
                    rule: "normal-arity",
                    message: format!("normal vertex has {arity} children (want ≤ 1)"),
                }),
                _ => {}
            }
        }

        // Reachability from the roots; unreached vertices also flag cycles,
        // since every cycle member has a parent and thus is never a root.
        let mut visited: BTreeMap<u32, bool> = BTreeMap::new();
        let mut stack: Vec<u32> = self.roots.iter().copied().collect();
        while let Some(id) = stack.pop() {
            if visited.insert(id, true).is_some() {
                continue;
            }
            if let Some(v) = self.vertices.get(&id) {
                stack.extend(v.children.iter().copied().filter(|c| self.vertices.contains_key(c)));
            }
        }
        for v in self.vertices.values() {
            if !visited.contains_key(&v.id) {
                out.push(Violation {
                    vertex: Some(v.id),
                    rule: "reachability",
                    message: "vertex is not reachable from any root".into(),
                });
            }
        }
        out
    }

    // ─────────────────────── polyline extraction ───────────────────────

    /// Extracts root-to-leaf boundary traces.
    ///
    /// Chains are walked in a FIFO discipline: roots in listed order first;
    /// each fork enqueues its *secondary* branch, whose polyline begins at
    /// the fork position, while the current polyline continues through the
    /// *primary* child — the one whose incoming segment deviates least from
    /// the fork's own heading (ties: smaller child id). For a well-formed
    /// graph this yields exactly `roots + forks` polylines. Chains shorter
    /// than two points (a root that never extended) are skipped.
    pub fn to_polylines(&self) -> Vec<Polyline> {
        let mut out = Vec::new();
        // (starting points already on the chain, first vertex to walk)
        let mut queue: std::collections::VecDeque<(Vec<Point>, u32)> = self
            .roots
            .iter()
            .filter(|r| self.vertices.contains_key(r))
            .map(|&r| (Vec::new(), r))
            .collect();
        let mut guard = 0usize;
        while let Some((mut points, start)) = queue.pop_front() {
            let mut cursor = Some(start);
            while let Some(id) = cursor {
                guard += 1;
                if guard > self.vertices.len().saturating_mul(4) + 16 {
                    // Defensive: a link cycle in an invalid graph.
                    break;
                }
                let Some(v) = self.vertices.get(&id) else { break };
                points.push(v.position);
                cursor = match v.children.len() {
                    0 => None,
                    1 => Some(v.children[0]),
                    _ => {
                        let (primary, secondary) = self.split_fork_children(v);
                        queue.push_back((vec![v.position], secondary));
                        Some(primary)
                    }
                };
            }
            // Drop exact consecutive duplicates (a fork child placed exactly
            // on the fork position would otherwise create a zero segment).
            points.dedup_by(|a, b| a == b);
            if points.len() >= 2 {
                out.push(Polyline::new(points).expect("deduplicated chain of ≥2 points"));
            }
        }
        out
    }

    /// Orders a fork's two children into (primary, secondary): the primary
    /// continues closest to the fork's own heading; ties favor the smaller
    /// id. With more than two children (invalid graphs) the extras after the
    /// first two are ignored.
    fn split_fork_children(&self, fork: &DagVertex) -> (u32, u32) {
        let deviation = |child_id: u32| -> f64 {
            match self.vertices.get(&child_id) {
                Some(c) => match heading_between(fork.position, c.position) {
                    Ok(h) => h.separation(fork.heading),
                    Err(_) => f64::INFINITY,
                },
                None => f64::INFINITY,
            }
        };
        let mut ids: Vec<u32> = fork.children.clone();
        ids.sort_by(|&a, &b| {
            deviation(a)
                .partial_cmp(&deviation(b))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        (ids[0], ids[1])
    }
}

// ───────────────────────────── JSON schema ─────────────────────────────

/// Serializes a graph (and its extracted polylines) to the artifact schema:
///
/// ```json
/// {"polylines": [{"id": 0, "points": [[x, y], ...]}, ...],
///  "roots": [0, ...],
///  "vertices": [{"children": [...], "id": 0, "parent": null,
///                "state": "normal", "theta": 0.0, "x": 0.0, "y": 0.0}, ...]}
/// ```
///
/// Keys serialize sorted; all floats use the crate's fixed 17-significant-
/// digit formatting (see [`crate::store::deterministic_json`]).
pub fn to_json_value(dag: &LaneDag) -> Value {
    let vertices: Vec<Value> = dag
        .iter()
        .map(|v| {
            serde_json::json!({
                "id": v.id,
                "x": v.position.x,
                "y": v.position.y,
                "theta": v.heading.radians(),
                "state": v.state.as_str(),
                "parent": v.parent,
                "children": v.children,
            })
        })
        .collect();
    let polylines: Vec<Value> = dag
        .to_polylines()
        .iter()
        .enumerate()
        .map(|(i, poly)| {
            let points: Vec<Value> =
                poly.points().iter().map(|p| serde_json::json!([p.x, p.y])).collect();
            serde_json::json!({"id": i as u32, "points": points})
        })
        .collect();
    serde_json::json!({
        "roots": dag.roots(),
        "vertices": vertices,
        "polylines": polylines,
    })
}

/// Parses the artifact schema back into a graph and its stored polylines.
///
/// Structural soundness beyond id uniqueness is *not* enforced here — parse,
/// then run [`LaneDag::validate`] to diagnose a suspect file.
pub fn from_json_value(value: &Value) -> Result<(LaneDag, Vec<Polyline>)> {
    let fail = |message: String| Error::Format { what: "lane graph JSON", message };

    let roots: Vec<u32> = value
        .get("roots")
        .and_then(Value::as_array)
        .ok_or_else(|| fail("missing \"roots\" array".into()))?
        .iter()
        .map(|v| v.as_u64().map(|u| u as u32).ok_or_else(|| fail("non-integer root id".into())))
        .collect::<Result<_>>()?;

    let mut dag = LaneDag::new();
    dag.roots = roots;
    let vertex_items = value
        .get("vertices")
        .and_then(Value::as_array)
        .ok_or_else(|| fail("missing \"vertices\" array".into()))?;
    for item in vertex_items {
        let get_f64 = |key: &str| -> Result<f64> {
            let f = item
                .get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| fail(format!("vertex missing numeric {key:?}")))?;
            if !f.is_finite() {
                return Err(fail(format!("vertex {key:?} is not finite")));
            }
            Ok(f)
        };
        let id = item
            .get("id")
            .and_then(Value::as_u64)
            .ok_or_else(|| fail("vertex missing integer \"id\"".into()))? as u32;
        let state = VertexState::from_str(
            item.get("state")
                .and_then(Value::as_str)
                .ok_or_else(|| fail("vertex missing \"state\"".into()))?,
        )?;
        let parent = match item.get("parent") {
            Some(Value::Null) | None => None,
            Some(v) => {
                Some(v.as_u64().ok_or_else(|| fail("non-integer parent id".into()))? as u32)
            }
        };
        let children: Vec<u32> = item
            .get("children")
            .and_then(Value::as_array)
            .ok_or_else(|| fail("vertex missing \"children\" array".into()))?
            .iter()
            .map(|v| {
                v.as_u64().map(|u| u as u32).ok_or_else(|| fail("non-integer child id".into()))
            })
            .collect::<Result<_>>()?;
        let vertex = DagVertex {
            id,
            position: Point::new(get_f64("x")?, get_f64("y")?),
            heading: Angle::new(get_f64("theta")?),
            state,
            parent,
            children,
        };
        if dag.vertices.insert(id, vertex).is_some() {
            return Err(fail(format!("duplicate vertex id {id}")));
        }
        dag.next_id = dag.next_id.max(id + 1);
    }

    let mut polylines = Vec::new();
    if let Some(items) = value.get("polylines").and_then(Value::as_array) {
        for item in items {
            let points: Vec<Point> = item
                .get("points")
                .and_then(Value::as_array)
                .ok_or_else(|| fail("polyline missing \"points\"".into()))?
                .iter()
                .map(|pair| {
                    let xy = pair.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                        fail("polyline point is not a 2-element array".into())
                    })?;
                    let x = xy[0].as_f64().ok_or_else(|| fail("non-numeric x".into()))?;
                    let y = xy[1].as_f64().ok_or_else(|| fail("non-numeric y".into()))?;
                    Ok(Point::new(x, y))
                })
                .collect::<Result<_>>()?;
            polylines
                .push(Polyline::new(points).map_err(|e| fail(format!("bad polyline: {e}")))?);
        }
    }
    Ok((dag, polylines))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    /// Straight 5-vertex chain along +x.
    fn chain() -> LaneDag {
        let mut dag = LaneDag::new();
        let mut prev = dag.add_root(Point::new(0.0, 0.0), Angle::new(0.0), VertexState::Normal);
        for i in 1..5 {
            let state = if i == 4 { VertexState::Terminate } else { VertexState::Normal };
            prev = dag.add_child(prev, Point::new(i as f64 * 10.0, 0.0), Angle::new(0.0), state);
        }
        dag
    }

    /// Root chain that forks at vertex 1: primary continues along +x, the
    /// secondary heads diagonally down.
    fn forked() -> LaneDag {
        let mut dag = LaneDag::new();
        let root = dag.add_root(Point::new(0.0, 0.0), Angle::new(0.0), VertexState::Normal);
        let fork = dag.add_child(root, Point::new(10.0, 0.0), Angle::new(0.0), VertexState::Fork);
        let a = dag.add_child(fork, Point::new(20.0, 0.0), Angle::new(0.0), VertexState::Normal);
        let b = dag.add_child(
            fork,
            Point::new(19.0, 5.0),
            Angle::new(0.46),
            VertexState::Normal,
        );
        dag.add_child(a, Point::new(30.0, 0.0), Angle::new(0.0), VertexState::Terminate);
        dag.add_child(b, Point::new(28.0, 10.0), Angle::new(0.46), VertexState::Terminate);
        dag
    }

    #[test]
    fn valid_graphs_produce_no_violations() {
        assert!(chain().validate().is_empty());
        assert!(forked().validate().is_empty());
        assert!(LaneDag::new().validate().is_empty());
    }

    #[test]
    fn fork_with_one_child_is_flagged() {
        let mut dag = LaneDag::new();
        let root = dag.add_root(Point::new(0.0, 0.0), Angle::new(0.0), VertexState::Fork);
        dag.add_child(root, Point::new(10.0, 0.0), Angle::new(0.0), VertexState::Terminate);
        let violations = dag.validate();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].rule, "fork-arity");
        assert_eq!(violations[0].vertex, Some(root));
    }

    #[test]
    fn terminate_with_children_and_overfull_normal_are_flagged() {
        let mut dag = LaneDag::new();
        let root = dag.add_root(Point::new(0.0, 0.0), Angle::new(0.0), VertexState::Terminate);
        let c1 = dag.add_child(root, Point::new(10.0, 0.0), Angle::new(0.0), VertexState::Normal);
        dag.add_child(c1, Point::new(20.0, 0.0), Angle::new(0.0), VertexState::Terminate);
        dag.add_child(c1, Point::new(20.0, 5.0), Angle::new(0.0), VertexState::Terminate);
        let rules: Vec<&str> = dag.validate().iter().map(|v| v.rule).collect();
        assert!(rules.contains(&"terminate-arity"));
        assert!(rules.contains(&"normal-arity"));
    }

    #[test]
    fn broken_links_are_flagged() {
        let mut dag = chain();
        // Orphan vertex 2 from its parent's child list.
        dag.vertices.get_mut(&1).unwrap().children.clear();
        let violations = dag.validate();
        assert!(violations.iter().any(|v| v.rule == "link-consistency"));
        assert!(violations.iter().any(|v| v.rule == "reachability"));
    }

    #[test]
    fn dangling_child_reference_is_flagged() {
        let mut dag = chain();
        dag.vertices.get_mut(&4).unwrap().children.push(99);
        let violations = dag.validate();
        assert!(violations.iter().any(|v| v.rule == "missing-vertex"));
        // 99 is also a terminate-arity breach now.
        assert!(violations.iter().any(|v| v.rule == "terminate-arity"));
    }

    #[test]
    fn chain_extracts_one_polyline() {
        let polys = chain().to_polylines();
        assert_eq!(polys.len(), 1);
        assert_eq!(polys[0].len(), 5);
        assert_eq!(polys[0].points()[4], Point::new(40.0, 0.0));
    }

    #[test]
    fn fork_extracts_two_polylines_sharing_the_fork_point() {
        let polys = forked().to_polylines();
        assert_eq!(polys.len(), 2);
        // Primary: straight through. Secondary: starts at the fork position.
        assert_eq!(polys[0].points()[0], Point::new(0.0, 0.0));
        assert_eq!(polys[0].points().last(), Some(&Point::new(30.0, 0.0)));
        assert_eq!(polys[1].points()[0], Point::new(10.0, 0.0));
        assert_eq!(polys[1].points().last(), Some(&Point::new(28.0, 10.0)));
    }

    #[test]
    fn fork_primary_choice_breaks_ties_by_id() {
        // Both children deviate by exactly the same angle; the smaller id
        // must become the primary continuation.
        let mut dag = LaneDag::new();
        let root = dag.add_root(Point::new(0.0, 0.0), Angle::new(0.0), VertexState::Normal);
        let fork = dag.add_child(root, Point::new(10.0, 0.0), Angle::new(0.0), VertexState::Fork);
        let up = dag.add_child(fork, Point::new(20.0, -5.0), Angle::new(0.0), VertexState::Normal);
        let down =
            dag.add_child(fork, Point::new(20.0, 5.0), Angle::new(0.0), VertexState::Normal);
        dag.add_child(up, Point::new(30.0, -10.0), Angle::new(0.0), VertexState::Terminate);
        dag.add_child(down, Point::new(30.0, 10.0), Angle::new(0.0), VertexState::Terminate);
        let polys = dag.to_polylines();
        // Primary polyline continues through `up` (id 2 < id 3).
        assert_eq!(polys[0].points()[2], Point::new(20.0, -5.0));
        assert_eq!(polys[1].points()[1], Point::new(20.0, 5.0));
    }

    #[test]
    fn polyline_count_is_roots_plus_forks() {
        let dag = forked();
        let forks = dag.count_state(VertexState::Fork);
        assert_eq!(dag.to_polylines().len(), dag.roots().len() + forks);
    }

    #[test]
    fn two_terminating_roots_extract_two_polylines() {
        let mut dag = LaneDag::new();
        for y in [0.0, 74.0] {
            let r = dag.add_root(Point::new(0.0, y), Angle::new(0.0), VertexState::Normal);
            let c = dag.add_child(r, Point::new(50.0, y), Angle::new(0.0), VertexState::Normal);
            dag.add_child(c, Point::new(100.0, y), Angle::new(0.0), VertexState::Terminate);
        }
        assert_eq!(dag.to_polylines().len(), 2);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let dag = forked();
        let value = to_json_value(&dag);
        let (back, polylines) = from_json_value(&value).unwrap();
        assert_eq!(back, dag);
        assert_eq!(polylines.len(), 2);
        assert_eq!(polylines[0].points()[0], Point::new(0.0, 0.0));

        // Byte-exact serialization through the deterministic writer.
        let a = crate::store::deterministic_json(&value).unwrap();
        let b = crate::store::deterministic_json(&to_json_value(&back)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn json_schema_shape_is_pinned() {
        let mut dag = LaneDag::new();
        let r = dag.add_root(Point::new(1.0, 2.0), Angle::new(FRAC_PI_2), VertexState::Normal);
        dag.add_child(r, Point::new(1.0, 52.0), Angle::new(FRAC_PI_2), VertexState::Terminate);
        let text = crate::store::deterministic_json(&to_json_value(&dag)).unwrap();
        assert_eq!(
            text,
            "{\"polylines\":[{\"id\":0,\"points\":[[1.0000000000000000e0,2.0000000000000000e0],\
             [1.0000000000000000e0,5.2000000000000000e1]]}],\"roots\":[0],\"vertices\":[\
             {\"children\":[1],\"id\":0,\"parent\":null,\"state\":\"normal\",\
             \"theta\":1.5707963267948966e0,\"x\":1.0000000000000000e0,\
             \"y\":2.0000000000000000e0},{\"children\":[],\"id\":1,\"parent\":0,\
             \"state\":\"terminate\",\"theta\":1.5707963267948966e0,\
             \"x\":1.0000000000000000e0,\"y\":5.2000000000000000e1}]}\n"
        );
    }

    #[test]
    fn duplicate_vertex_ids_fail_to_parse() {
        let mut value = to_json_value(&chain());
        let dup = value["vertices"][0].clone();
        value["vertices"].as_array_mut().unwrap().push(dup);
        assert!(from_json_value(&value).is_err());
    }

    #[test]
    fn empty_graph_serializes_and_validates() {
        let dag = LaneDag::new();
        assert!(dag.to_polylines().is_empty());
        let (back, polys) = from_json_value(&to_json_value(&dag)).unwrap();
        assert!(back.is_empty());
        assert!(polys.is_empty());
    }
}
