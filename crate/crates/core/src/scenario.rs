//! Network scenarios and synthetic range measurements.
//!
//! A scenario is a geometric graph: anchor nodes at known positions, agent
//! nodes at unknown (to the estimators) positions, and an edge wherever two
//! nodes lie within connectivity range. Range measurements are drawn per
//! edge with multiplicative Gaussian noise, `r = d * (1 + e)`,
//! `e ~ N(0, sigma^2)`.
//!
//! The canonical benchmark places agents uniformly inside a square and
//! anchors uniformly along its perimeter (arclength parameterization). Node
//! placement depends only on the seed and the counts, never on the
//! connectivity range, so the same seed yields the same geometry for a
//! sparse graph and for its fully connected variant.

use crate::geom::{EdgeKey, NodeId, Position};
use crate::real::{rf, Real};
use crate::rng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Sub-stream tags (see [`crate::rng`]).
const TAG_PLACEMENT: u64 = 0x706C_6163; // "plac"
const TAG_RANGES: u64 = 0x726E_6773; // "rngs"

/// Measured ranges are floored here so that downstream divisions by `r`
/// and logarithms stay finite even when noise drives a sample negative.
pub const RANGE_FLOOR_M: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("agent {0} has no edge within connectivity range")]
    IsolatedAgent(NodeId),
    #[error("scenario has no edges")]
    NoEdges,
    #[error("edge references unknown node {0}")]
    UnknownNode(NodeId),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("malformed scenario json: {0}")]
    Json(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Anchor,
    Agent,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node<R: Real> {
    pub id: NodeId,
    pub role: Role,
    pub position: Position<R>,
}

/// Geometric graph of anchors and agents.
#[derive(Clone, Debug)]
pub struct NetworkScenario<R: Real> {
    pub dim: usize,
    pub connectivity_range: R,
    pub seed: u64,
    nodes: Vec<Node<R>>,
    edges: Vec<EdgeKey>,
}

impl<R: Real> NetworkScenario<R> {
    /// Assembles a scenario from explicit parts, validating ids and edges.
    pub fn from_parts(
        dim: usize,
        connectivity_range: R,
        seed: u64,
        mut nodes: Vec<Node<R>>,
        mut edges: Vec<EdgeKey>,
    ) -> Result<Self, ScenarioError> {
        if dim != 2 && dim != 3 {
            return Err(ScenarioError::InvalidParameter(format!(
                "dim must be 2 or 3, got {dim}"
            )));
        }
        nodes.sort_by_key(|n| n.id);
        for pair in nodes.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(ScenarioError::DuplicateNode(pair[0].id));
            }
        }
        for n in &nodes {
            if n.position.dim() != dim {
                return Err(ScenarioError::InvalidParameter(format!(
                    "node {} has dimension {} in a {}-d scenario",
                    n.id,
                    n.position.dim(),
                    dim
                )));
            }
            if !n.position.is_finite() {
                return Err(ScenarioError::InvalidParameter(format!(
                    "node {} has a non-finite coordinate",
                    n.id
                )));
            }
        }
        let known = |id: NodeId| nodes.binary_search_by_key(&id, |n| n.id).is_ok();
        edges.sort();
        edges.dedup();
        for e in &edges {
            if e.lo == e.hi {
                return Err(ScenarioError::InvalidParameter(format!(
                    "self-edge on node {}",
                    e.lo
                )));
            }
            if !known(e.lo) {
                return Err(ScenarioError::UnknownNode(e.lo));
            }
            if !known(e.hi) {
                return Err(ScenarioError::UnknownNode(e.hi));
            }
        }
        Ok(Self { dim, connectivity_range, seed, nodes, edges })
    }

    pub fn nodes(&self) -> &[Node<R>] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeKey] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> Option<&Node<R>> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn position_of(&self, id: NodeId) -> Option<Position<R>> {
        self.node(id).map(|n| n.position)
    }

    pub fn is_anchor(&self, id: NodeId) -> bool {
        matches!(self.node(id), Some(n) if n.role == Role::Anchor)
    }

    pub fn anchors(&self) -> impl Iterator<Item = &Node<R>> {
        self.nodes.iter().filter(|n| n.role == Role::Anchor)
    }

    pub fn agents(&self) -> impl Iterator<Item = &Node<R>> {
        self.nodes.iter().filter(|n| n.role == Role::Agent)
    }

    pub fn n_anchors(&self) -> usize {
        self.anchors().count()
    }

    pub fn n_agents(&self) -> usize {
        self.agents().count()
    }

    /// Edges incident to `id`, in deterministic (sorted) order.
    pub fn edges_of(&self, id: NodeId) -> impl Iterator<Item = &EdgeKey> {
        self.edges.iter().filter(move |e| e.touches(id))
    }

    /// Axis-aligned bounding box of the anchor positions.
    pub fn anchor_bbox(&self) -> Option<(Position<R>, Position<R>)> {
        let mut anchors = self.anchors();
        let first = anchors.next()?.position;
        let mut lo = first.array();
        let mut hi = first.array();
        for a in anchors {
            let c = a.position.array();
            for k in 0..3 {
                if c[k] < lo[k] {
                    lo[k] = c[k];
                }
                if c[k] > hi[k] {
                    hi[k] = c[k];
                }
            }
        }
        Some((
            Position::from_array(lo, self.dim),
            Position::from_array(hi, self.dim),
        ))
    }

    /// Same nodes, every pair connected. Used for comparisons between
    /// range-limited and fully connected operation; because range noise is
    /// keyed per edge, measurements on shared edges are identical.
    pub fn with_full_connectivity(&self) -> Self {
        let mut edges = Vec::with_capacity(self.nodes.len() * (self.nodes.len() - 1) / 2);
        for (i, a) in self.nodes.iter().enumerate() {
            for b in &self.nodes[i + 1..] {
                edges.push(EdgeKey::new(a.id, b.id));
            }
        }
        let mut out = self.clone();
        out.edges = edges;
        // Upper bound on any pairwise distance in the node set.
        let mut maxd = R::zero();
        for (i, a) in self.nodes.iter().enumerate() {
            for b in &self.nodes[i + 1..] {
                let d = a.position.distance(&b.position);
                if d > maxd {
                    maxd = d;
                }
            }
        }
        out.connectivity_range = maxd + R::one();
        out
    }
}

/// Maps an arclength parameter `u` in `[0, 4*side)` to a point on the
/// perimeter of the axis-aligned square `[0, side]^2`, walking
/// counterclockwise from the origin.
fn perimeter_point<R: Real>(u: R, side: R) -> Position<R> {
    if u < side {
        Position::new_2d(u, R::zero())
    } else if u < side + side {
        Position::new_2d(side, u - side)
    } else if u < side + side + side {
        Position::new_2d(side + side + side - u, side)
    } else {
        Position::new_2d(R::zero(), side + side + side + side - u)
    }
}

/// Generates the canonical 2-D benchmark scenario: `n_agents` agents uniform
/// inside the square `[0, side]^2`, `n_anchors` anchors uniform along its
/// perimeter, and an edge wherever two nodes are within `range` of each
/// other (anchor-anchor pairs included). Anchors get ids `0..n_anchors`,
/// agents follow.
///
/// With `require_connected`, generation fails if any agent ends up with no
/// edge at all.
pub fn generate_benchmark_scenario<R: Real>(
    n_anchors: usize,
    n_agents: usize,
    side: R,
    range: R,
    seed: u64,
    require_connected: bool,
) -> Result<NetworkScenario<R>, ScenarioError> {
    if !(side > R::zero()) || !side.is_finite_real() {
        return Err(ScenarioError::InvalidParameter(format!(
            "side must be positive and finite, got {side}"
        )));
    }
    if !(range > R::zero()) || !range.is_finite_real() {
        return Err(ScenarioError::InvalidParameter(format!(
            "connectivity range must be positive and finite, got {range}"
        )));
    }
    if n_anchors + n_agents == 0 {
        return Err(ScenarioError::InvalidParameter(
            "scenario needs at least one node".into(),
        ));
    }

    let mut rng = rng::rng_for(seed, &[TAG_PLACEMENT]);
    let mut nodes = Vec::with_capacity(n_anchors + n_agents);
    let four_sides = side.as_f64() * 4.0;
    for k in 0..n_anchors {
        let u: f64 = rng.random::<f64>() * four_sides;
        nodes.push(Node {
            id: NodeId(k as u32),
            role: Role::Anchor,
            position: perimeter_point(rf::<R>(u), side),
        });
    }
    for k in 0..n_agents {
        let x: f64 = rng.random::<f64>() * side.as_f64();
        let y: f64 = rng.random::<f64>() * side.as_f64();
        nodes.push(Node {
            id: NodeId((n_anchors + k) as u32),
            role: Role::Agent,
            position: Position::new_2d(rf::<R>(x), rf::<R>(y)),
        });
    }

    let mut edges = Vec::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            if a.position.distance(&b.position) <= range {
                edges.push(EdgeKey::new(a.id, b.id));
            }
        }
    }

    let scenario = NetworkScenario::from_parts(2, range, seed, nodes, edges)?;
    if require_connected {
        for agent in scenario.agents() {
            if scenario.edges_of(agent.id).next().is_none() {
                return Err(ScenarioError::IsolatedAgent(agent.id));
            }
        }
    }
    Ok(scenario)
}

/// One synthesized measurement set: `r = max(d * (1 + e), floor)` per edge.
#[derive(Clone, Debug)]
pub struct RangeSet<R: Real> {
    pub noise_sigma: R,
    pub seed: u64,
    pub measurements: BTreeMap<EdgeKey, R>,
    /// How many draws hit the positivity floor. Nonzero counts signal that
    /// sigma is large relative to the edge lengths.
    pub clamped_count: usize,
}

impl<R: Real> RangeSet<R> {
    pub fn get(&self, a: NodeId, b: NodeId) -> Option<R> {
        self.measurements.get(&EdgeKey::new(a, b)).copied()
    }
}

/// Draws one multiplicative-noise range per scenario edge.
///
/// Each edge consumes its own sub-stream keyed by `(seed, edge)`, so the
/// measurement on an edge does not depend on which other edges exist. A
/// sparse graph and its fully connected variant therefore agree on every
/// shared edge.
pub fn synthesize_ranges<R: Real>(
    scenario: &NetworkScenario<R>,
    sigma: R,
    seed: u64,
) -> Result<RangeSet<R>, ScenarioError> {
    if sigma < R::zero() || !sigma.is_finite_real() {
        return Err(ScenarioError::InvalidParameter(format!(
            "sigma must be non-negative and finite, got {sigma}"
        )));
    }
    if scenario.edges().is_empty() {
        return Err(ScenarioError::NoEdges);
    }
    let floor = rf::<R>(RANGE_FLOOR_M);
    let mut measurements = BTreeMap::new();
    let mut clamped = 0usize;
    for e in scenario.edges() {
        let pa = scenario.position_of(e.lo).ok_or(ScenarioError::UnknownNode(e.lo))?;
        let pb = scenario.position_of(e.hi).ok_or(ScenarioError::UnknownNode(e.hi))?;
        let d = pa.distance(&pb);
        let mut rng = rng::rng_for(seed, &[TAG_RANGES, u64::from(e.lo.0), u64::from(e.hi.0)]);
        let eps: f64 = rng.sample(StandardNormal);
        let mut r = d * (R::one() + sigma * rf::<R>(eps));
        if r < floor {
            r = floor;
            clamped += 1;
        }
        measurements.insert(*e, r);
    }
    Ok(RangeSet { noise_sigma: sigma, seed, measurements, clamped_count: clamped })
}

/// Noise-free edge lengths, keyed like the measurements.
pub fn true_distance_map<R: Real>(scenario: &NetworkScenario<R>) -> BTreeMap<EdgeKey, R> {
    let mut out = BTreeMap::new();
    for e in scenario.edges() {
        let pa = scenario.position_of(e.lo).expect("validated edge");
        let pb = scenario.position_of(e.hi).expect("validated edge");
        out.insert(*e, pa.distance(&pb));
    }
    out
}

// ---------------------------------------------------------------------------
// JSON interchange
//
// Scenarios and range sets serialize to a small, explicit schema. Coordinates
// are written as plain JSON numbers (f64).
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: u32,
    pub role: Role,
    pub coords: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScenarioJson {
    pub dim: usize,
    pub connectivity_range: f64,
    pub seed: u64,
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<(u32, u32)>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RangeMeasurementJson {
    pub i: u32,
    pub j: u32,
    pub range: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RangeSetJson {
    pub sigma: f64,
    pub seed: u64,
    pub clamped_count: usize,
    pub measurements: Vec<RangeMeasurementJson>,
}

impl<R: Real> NetworkScenario<R> {
    pub fn to_json(&self) -> ScenarioJson {
        ScenarioJson {
            dim: self.dim,
            connectivity_range: self.connectivity_range.as_f64(),
            seed: self.seed,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeJson {
                    id: n.id.0,
                    role: n.role,
                    coords: n.position.coords_f64(),
                })
                .collect(),
            edges: self.edges.iter().map(|e| (e.lo.0, e.hi.0)).collect(),
        }
    }

    pub fn from_json(json: &ScenarioJson) -> Result<Self, ScenarioError> {
        let nodes = json
            .nodes
            .iter()
            .map(|n| {
                let coords: Vec<R> = n.coords.iter().map(|c| rf::<R>(*c)).collect();
                let position = Position::from_slice(&coords).ok_or_else(|| {
                    ScenarioError::Json(format!(
                        "node {} has {} coordinates",
                        n.id,
                        n.coords.len()
                    ))
                })?;
                Ok(Node { id: NodeId(n.id), role: n.role, position })
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        let edges = json
            .edges
            .iter()
            .map(|&(a, b)| EdgeKey::new(NodeId(a), NodeId(b)))
            .collect();
        Self::from_parts(
            json.dim,
            rf::<R>(json.connectivity_range),
            json.seed,
            nodes,
            edges,
        )
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("schema serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self, ScenarioError> {
        let json: ScenarioJson =
            serde_json::from_str(s).map_err(|e| ScenarioError::Json(e.to_string()))?;
        Self::from_json(&json)
    }
}

impl<R: Real> RangeSet<R> {
    pub fn to_json(&self) -> RangeSetJson {
        RangeSetJson {
            sigma: self.noise_sigma.as_f64(),
            seed: self.seed,
            clamped_count: self.clamped_count,
            measurements: self
                .measurements
                .iter()
                .map(|(e, r)| RangeMeasurementJson {
                    i: e.lo.0,
                    j: e.hi.0,
                    range: r.as_f64(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &RangeSetJson) -> Self {
        let mut measurements = BTreeMap::new();
        for m in &json.measurements {
            measurements.insert(EdgeKey::new(NodeId(m.i), NodeId(m.j)), rf::<R>(m.range));
        }
        Self {
            noise_sigma: rf::<R>(json.sigma),
            seed: json.seed,
            measurements,
            clamped_count: json.clamped_count,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("schema serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self, ScenarioError> {
        let json: RangeSetJson =
            serde_json::from_str(s).map_err(|e| ScenarioError::Json(e.to_string()))?;
        Ok(Self::from_json(&json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_counts_and_geometry() {
        let s = generate_benchmark_scenario::<f64>(12, 50, 1.0, 0.3, 7, false).unwrap();
        assert_eq!(s.n_anchors(), 12);
        assert_eq!(s.n_agents(), 50);
        for a in s.anchors() {
            let c = a.position.coords();
            let on_edge = c[0] == 0.0 || c[1] == 0.0 || c[0] == 1.0 || c[1] == 1.0;
            assert!(on_edge, "anchor {} not on perimeter: {c:?}", a.id);
            assert!((0.0..=1.0).contains(&c[0]) && (0.0..=1.0).contains(&c[1]));
        }
        for g in s.agents() {
            let c = g.position.coords();
            assert!((0.0..=1.0).contains(&c[0]) && (0.0..=1.0).contains(&c[1]));
        }
        for e in s.edges() {
            let d = s
                .position_of(e.lo)
                .unwrap()
                .distance(&s.position_of(e.hi).unwrap());
            assert!(d <= 0.3);
        }
    }

    #[test]
    fn generation_is_deterministic_and_seed_sensitive() {
        let a = generate_benchmark_scenario::<f64>(4, 6, 1.0, 0.4, 3, false).unwrap();
        let b = generate_benchmark_scenario::<f64>(4, 6, 1.0, 0.4, 3, false).unwrap();
        let c = generate_benchmark_scenario::<f64>(4, 6, 1.0, 0.4, 4, false).unwrap();
        for (na, nb) in a.nodes().iter().zip(b.nodes()) {
            assert_eq!(na.position, nb.position);
        }
        assert!(a
            .nodes()
            .iter()
            .zip(c.nodes())
            .any(|(x, y)| x.position != y.position));
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn placement_ignores_connectivity_range() {
        let sparse = generate_benchmark_scenario::<f64>(5, 9, 1.0, 0.2, 11, false).unwrap();
        let dense = generate_benchmark_scenario::<f64>(5, 9, 1.0, 5.0, 11, false).unwrap();
        for (a, b) in sparse.nodes().iter().zip(dense.nodes()) {
            assert_eq!(a.position, b.position);
        }
        // With range >= the diameter the graph is complete.
        let n = dense.nodes().len();
        assert_eq!(dense.edges().len(), n * (n - 1) / 2);
    }

    #[test]
    fn tiny_scenario_is_fully_connected() {
        let s = generate_benchmark_scenario::<f64>(4, 1, 1.0, 10.0, 7, true).unwrap();
        assert_eq!(s.nodes().len(), 5);
        assert_eq!(s.edges().len(), 10);
    }

    #[test]
    fn anchor_only_scenario_is_valid() {
        let s = generate_benchmark_scenario::<f64>(5, 0, 2.0, 1.0, 1, false).unwrap();
        assert_eq!(s.n_agents(), 0);
        assert_eq!(s.n_anchors(), 5);
    }

    #[test]
    fn isolated_agent_fails_when_connectivity_required() {
        // Vanishing range: no edges at all, so every agent is isolated.
        let r = generate_benchmark_scenario::<f64>(4, 2, 1.0, 1e-9, 5, true);
        assert!(matches!(r, Err(ScenarioError::IsolatedAgent(_))));
        // Without the flag the same parameters generate fine.
        let s = generate_benchmark_scenario::<f64>(4, 2, 1.0, 1e-9, 5, false).unwrap();
        assert!(s.edges().is_empty());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(generate_benchmark_scenario::<f64>(4, 2, -1.0, 0.3, 1, false).is_err());
        assert!(generate_benchmark_scenario::<f64>(4, 2, 1.0, 0.0, 1, false).is_err());
        assert!(generate_benchmark_scenario::<f64>(0, 0, 1.0, 0.3, 1, false).is_err());
    }

    #[test]
    fn ranges_are_deterministic_and_positive() {
        let s = generate_benchmark_scenario::<f64>(6, 10, 1.0, 0.5, 21, false).unwrap();
        let r1 = synthesize_ranges(&s, 0.05, 99).unwrap();
        let r2 = synthesize_ranges(&s, 0.05, 99).unwrap();
        assert_eq!(r1.measurements, r2.measurements);
        assert!(r1.measurements.values().all(|&r| r > 0.0));
        let r3 = synthesize_ranges(&s, 0.05, 100).unwrap();
        assert_ne!(r1.measurements, r3.measurements);
    }

    #[test]
    fn zero_sigma_reproduces_true_distances() {
        let s = generate_benchmark_scenario::<f64>(6, 10, 1.0, 0.5, 33, false).unwrap();
        let r = synthesize_ranges(&s, 0.0, 1).unwrap();
        let d = true_distance_map(&s);
        for (e, m) in &r.measurements {
            assert!((m - d[e]).abs() <= f64::EPSILON * d[e].abs());
        }
        assert_eq!(r.clamped_count, 0);
    }

    #[test]
    fn noise_moments_match_the_model() {
        // One edge of true length 0.2, redrawn many times: the sample mean
        // and standard deviation must match d and d*sigma. Expected values
        // computed from the model, tolerances are loose Monte Carlo bands.
        let nodes = vec![
            Node { id: NodeId(0), role: Role::Anchor, position: Position::new_2d(0.0, 0.0) },
            Node { id: NodeId(1), role: Role::Agent, position: Position::new_2d(0.2, 0.0) },
        ];
        let s = NetworkScenario::from_parts(
            2,
            1.0,
            0,
            nodes,
            vec![EdgeKey::new(NodeId(0), NodeId(1))],
        )
        .unwrap();
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for seed in 0..n {
            let r = synthesize_ranges(&s, 0.1, seed).unwrap();
            let v = r.measurements.values().next().copied().unwrap();
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!((mean - 0.2).abs() < 1e-3, "mean {mean}");
        assert!((var.sqrt() - 0.02).abs() < 2e-3, "std {}", var.sqrt());
    }

    #[test]
    fn large_sigma_clamps_to_floor() {
        let nodes = vec![
            Node { id: NodeId(0), role: Role::Anchor, position: Position::new_2d(0.0, 0.0) },
            Node { id: NodeId(1), role: Role::Agent, position: Position::new_2d(0.05, 0.0) },
        ];
        let s = NetworkScenario::from_parts(
            2,
            1.0,
            0,
            nodes,
            vec![EdgeKey::new(NodeId(0), NodeId(1))],
        )
        .unwrap();
        let mut clamped_total = 0;
        for seed in 0..2000 {
            let r = synthesize_ranges(&s, 10.0, seed).unwrap();
            clamped_total += r.clamped_count;
            assert!(r.measurements.values().all(|&v| v >= RANGE_FLOOR_M));
        }
        // sigma = 10 drives the multiplier negative in ~46% of the draws.
        assert!(clamped_total > 500, "clamped {clamped_total}");
    }

    #[test]
    fn shared_edges_get_identical_noise_after_densification() {
        let sparse = generate_benchmark_scenario::<f64>(6, 10, 1.0, 0.3, 5, false).unwrap();
        let full = sparse.with_full_connectivity();
        let rs = synthesize_ranges(&sparse, 0.05, 123).unwrap();
        let rfull = synthesize_ranges(&full, 0.05, 123).unwrap();
        for (e, v) in &rs.measurements {
            assert_eq!(rfull.measurements[e], *v, "edge {e:?}");
        }
        assert!(rfull.measurements.len() > rs.measurements.len());
    }

    #[test]
    fn json_round_trip_preserves_everything() {
        let s = generate_benchmark_scenario::<f64>(3, 4, 1.0, 0.6, 17, false).unwrap();
        let back = NetworkScenario::<f64>::from_json_str(&s.to_json_string()).unwrap();
        assert_eq!(s.dim, back.dim);
        assert_eq!(s.seed, back.seed);
        assert_eq!(s.edges(), back.edges());
        for (a, b) in s.nodes().iter().zip(back.nodes()) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.role, b.role);
            assert_eq!(a.position, b.position);
        }
        let r = synthesize_ranges(&s, 0.1, 3).unwrap();
        let rback = RangeSet::<f64>::from_json_str(&r.to_json_string()).unwrap();
        assert_eq!(r.measurements, rback.measurements);
        assert_eq!(r.clamped_count, rback.clamped_count);
    }

    #[test]
    fn malformed_json_is_reported() {
        assert!(NetworkScenario::<f64>::from_json_str("{").is_err());
        let json = r#"{"dim":2,"connectivity_range":1.0,"seed":0,
            "nodes":[{"id":0,"role":"anchor","coords":[0.0]}],"edges":[]}"#;
        assert!(matches!(
            NetworkScenario::<f64>::from_json_str(json),
            Err(ScenarioError::Json(_))
        ));
        let json = r#"{"dim":2,"connectivity_range":1.0,"seed":0,
            "nodes":[{"id":0,"role":"anchor","coords":[0.0,0.0]}],"edges":[[0,1]]}"#;
        assert!(matches!(
            NetworkScenario::<f64>::from_json_str(json),
            Err(ScenarioError::UnknownNode(_))
        ));
    }
}
