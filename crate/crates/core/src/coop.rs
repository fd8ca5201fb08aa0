//! Cooperative localization over range graphs.
//!
//! All solvers here estimate every agent position at once from the measured
//! ranges of a [`NetworkScenario`](crate::scenario::NetworkScenario): batch
//! gradient descent on the range-residual stress, sequential multilateration
//! that promotes solved agents to virtual anchors, stress majorization
//! (weighted SMACOF) with anchor alignment, cyclic projection onto range
//! balls, and edge-consensus ADMM.
//!
//! Anchors are fixed at their true positions in every solver except SMACOF,
//! which embeds the whole graph freely and then aligns the embedding onto
//! the anchors. Updates follow a synchronous (Jacobi) schedule: each sweep
//! reads only the previous iterate, so results are deterministic and
//! independent of agent ordering.

use crate::geom::{add3, norm3, scale3, sub3, EdgeKey, Position};
use crate::real::{rf, Real};
use crate::rng::rng_for;
use crate::scenario::{NetworkScenario, RangeSet};
use crate::{geomsolve, NodeId};
use nalgebra::DMatrix;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

const TAG_INIT: u64 = 0x696E_6974;
/// Distances below this are treated as coincident when normalizing.
const DIST_EPS: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum CoopError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no position supplied for node {0}")]
    MissingPosition(NodeId),
    #[error("warm start misses agent {0}")]
    MissingInitializer(NodeId),
    #[error("measurement references unknown node {0}")]
    UnknownNode(NodeId),
    #[error("measurement graph is disconnected")]
    DisconnectedGraph,
    #[error("needs at least {needed} anchors, got {got}")]
    TooFewAnchors { needed: usize, got: usize },
    #[error("anchor geometry too degenerate to align against")]
    DegenerateAnchors,
}

/// Per-agent outcome flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgentStatus {
    Resolved,
    Unresolved,
}

/// Joint position estimate for every agent in a scenario.
///
/// `objective_value` is the stress restricted to edges whose agent
/// endpoints are all resolved (anchor-anchor edges carry no estimate and
/// are excluded). `resolved_in_round` is filled by [`solve_sequential`]
/// only; other solvers leave it empty.
#[derive(Clone, Debug)]
pub struct PositionEstimateSet<R: Real> {
    pub positions: BTreeMap<NodeId, Position<R>>,
    pub per_agent_status: BTreeMap<NodeId, AgentStatus>,
    pub objective_value: R,
    pub converged: bool,
    pub iterations: usize,
    pub resolved_in_round: BTreeMap<NodeId, usize>,
}

impl<R: Real> PositionEstimateSet<R> {
    pub fn position_of(&self, id: NodeId) -> Option<&Position<R>> {
        self.positions.get(&id)
    }

    pub fn resolved_fraction(&self) -> f64 {
        if self.per_agent_status.is_empty() {
            return 1.0;
        }
        let resolved = self
            .per_agent_status
            .values()
            .filter(|s| **s == AgentStatus::Resolved)
            .count();
        resolved as f64 / self.per_agent_status.len() as f64
    }
}

/// Shared knobs for the iterative solvers.
#[derive(Clone, Debug)]
pub struct SolverConfig<R: Real> {
    pub max_iterations: usize,
    /// Sweep-displacement norm below which iteration stops.
    pub step_tolerance: R,
    /// Relative objective decrease below which iteration stops.
    pub objective_tolerance: R,
    pub initializer: Initializer<R>,
    pub acceleration: Acceleration,
}

#[derive(Clone, Debug)]
pub enum Initializer<R: Real> {
    /// Every agent starts at the centroid of the anchors.
    AnchorCentroid,
    /// Uniform draws inside the anchor bounding box.
    Random { seed: u64 },
    /// Caller-provided start, one entry per agent.
    Warm(BTreeMap<NodeId, Position<R>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Acceleration {
    None,
    Nesterov,
}

impl<R: Real> Default for SolverConfig<R> {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            step_tolerance: rf(1e-10),
            objective_tolerance: rf(1e-12),
            initializer: Initializer::AnchorCentroid,
            acceleration: Acceleration::None,
        }
    }
}

impl<R: Real> SolverConfig<R> {
    fn validate(&self) -> Result<(), CoopError> {
        if self.max_iterations == 0 {
            return Err(CoopError::InvalidParameter("max_iterations must be > 0".into()));
        }
        if !(self.step_tolerance > R::zero()) || !(self.objective_tolerance > R::zero()) {
            return Err(CoopError::InvalidParameter("tolerances must be > 0".into()));
        }
        Ok(())
    }
}

/// Sum of squared range residuals over every measured edge, with anchors at
/// their true positions and agents at the supplied positions.
pub fn stress<R: Real>(
    scenario: &NetworkScenario<R>,
    ranges: &RangeSet<R>,
    positions: &BTreeMap<NodeId, Position<R>>,
) -> Result<R, CoopError> {
    let locate = |id: NodeId| -> Result<Position<R>, CoopError> {
        match scenario.node(id) {
            Some(n) if scenario.is_anchor(id) => Ok(n.position),
            Some(_) => positions
                .get(&id)
                .copied()
                .ok_or(CoopError::MissingPosition(id)),
            None => Err(CoopError::UnknownNode(id)),
        }
    };
    let mut total = R::zero();
    for (edge, r) in &ranges.measurements {
        let a = locate(edge.lo)?;
        let b = locate(edge.hi)?;
        let resid = *r - a.distance(&b);
        total += resid * resid;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Shared problem assembly
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
enum End<R: Real> {
    /// Anchor endpoint pinned to its true coordinates.
    Fixed([R; 3]),
    /// Agent endpoint, indexed into the agent slot vector.
    Free(usize),
}

struct ProblemEdge<R: Real> {
    a: End<R>,
    b: End<R>,
    range: R,
}

struct Problem<R: Real> {
    dim: usize,
    agents: Vec<NodeId>,
    edges: Vec<ProblemEdge<R>>,
    /// Per agent slot: (neighbor endpoint, measured range), in edge order.
    adj: Vec<Vec<(End<R>, R)>>,
}

impl<R: Real> Problem<R> {
    fn end_pos(&self, end: &End<R>, xs: &[[R; 3]]) -> [R; 3] {
        match end {
            End::Fixed(p) => *p,
            End::Free(k) => xs[*k],
        }
    }

    fn objective(&self, xs: &[[R; 3]]) -> R {
        let mut total = R::zero();
        for e in &self.edges {
            let d = norm3(sub3(self.end_pos(&e.a, xs), self.end_pos(&e.b, xs)));
            let resid = e.range - d;
            total += resid * resid;
        }
        total
    }

    fn gradient(&self, xs: &[[R; 3]], out: &mut Vec<[R; 3]>) {
        out.clear();
        out.resize(xs.len(), [R::zero(); 3]);
        for e in &self.edges {
            let pa = self.end_pos(&e.a, xs);
            let pb = self.end_pos(&e.b, xs);
            let diff = sub3(pa, pb);
            let d = norm3(diff);
            if d <= rf(DIST_EPS) {
                continue;
            }
            // d/dx_a of (r - d)^2 = 2 (d - r) (x_a - x_b) / d
            let coef = rf::<R>(2.0) * (d - e.range) / d;
            let g = scale3(diff, coef);
            if let End::Free(k) = e.a {
                out[k] = add3(out[k], g);
            }
            if let End::Free(k) = e.b {
                out[k] = sub3(out[k], g);
            }
        }
    }
}

/// Collects the agent-touching measured edges. Anchor-anchor measurements
/// carry no unknowns and are dropped; agent-agent edges are dropped too
/// when `agent_agent` is false (anchor-only mode).
fn build_problem<R: Real>(
    scenario: &NetworkScenario<R>,
    ranges: &RangeSet<R>,
    agent_agent: bool,
) -> Result<Problem<R>, CoopError> {
    let agents: Vec<NodeId> = scenario.agents().map(|n| n.id).collect();
    let slot: BTreeMap<NodeId, usize> =
        agents.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut edges = Vec::new();
    let mut adj: Vec<Vec<(End<R>, R)>> = vec![Vec::new(); agents.len()];
    for (key, r) in &ranges.measurements {
        let end_of = |id: NodeId| -> Result<End<R>, CoopError> {
            match scenario.node(id) {
                Some(n) if scenario.is_anchor(id) => Ok(End::Fixed(n.position.array())),
                Some(_) => Ok(End::Free(slot[&id])),
                None => Err(CoopError::UnknownNode(id)),
            }
        };
        let a = end_of(key.lo)?;
        let b = end_of(key.hi)?;
        match (&a, &b) {
            (End::Fixed(_), End::Fixed(_)) => continue,
            (End::Free(_), End::Free(_)) if !agent_agent => continue,
            _ => {}
        }
        if let End::Free(k) = a {
            adj[k].push((b, *r));
        }
        if let End::Free(k) = b {
            adj[k].push((a, *r));
        }
        edges.push(ProblemEdge { a, b, range: *r });
    }
    Ok(Problem { dim: scenario.dim, agents, edges, adj })
}

fn initial_positions<R: Real>(
    scenario: &NetworkScenario<R>,
    agents: &[NodeId],
    initializer: &Initializer<R>,
) -> Result<Vec<[R; 3]>, CoopError> {
    match initializer {
        Initializer::AnchorCentroid => {
            let c = Position::centroid(scenario.anchors().map(|n| &n.position))
                .unwrap_or_else(|| Position::origin(scenario.dim));
            Ok(vec![c.array(); agents.len()])
        }
        Initializer::Random { seed } => {
            let (lo, hi) = scenario
                .anchor_bbox()
                .unwrap_or_else(|| (Position::origin(scenario.dim), {
                    let mut one = [R::one(); 3];
                    if scenario.dim == 2 {
                        one[2] = R::zero();
                    }
                    Position::from_array(one, scenario.dim)
                }));
            let mut rng = rng_for(*seed, &[TAG_INIT]);
            let mut out = Vec::with_capacity(agents.len());
            for _ in agents {
                let mut p = [R::zero(); 3];
                for (k, coord) in p.iter_mut().enumerate().take(scenario.dim) {
                    let u: f64 = rng.random();
                    *coord = lo.get(k) + rf::<R>(u) * (hi.get(k) - lo.get(k));
                }
                out.push(p);
            }
            Ok(out)
        }
        Initializer::Warm(map) => {
            let mut out = Vec::with_capacity(agents.len());
            for id in agents {
                let p = map.get(id).ok_or(CoopError::MissingInitializer(*id))?;
                if p.dim() != scenario.dim {
                    return Err(CoopError::InvalidParameter(format!(
                        "warm start for agent {id} has wrong dimension"
                    )));
                }
                out.push(p.array());
            }
            Ok(out)
        }
    }
}

/// Stress over edges whose agent endpoints are all resolved, skipping
/// anchor-anchor edges. This is the `objective_value` convention.
fn resolved_stress<R: Real>(
    scenario: &NetworkScenario<R>,
    ranges: &RangeSet<R>,
    positions: &BTreeMap<NodeId, Position<R>>,
    status: &BTreeMap<NodeId, AgentStatus>,
) -> R {
    let mut total = R::zero();
    'edges: for (edge, r) in &ranges.measurements {
        let mut ends = [Position::origin(scenario.dim); 2];
        let mut any_agent = false;
        for (k, id) in [edge.lo, edge.hi].into_iter().enumerate() {
            if scenario.is_anchor(id) {
                ends[k] = match scenario.position_of(id) {
                    Some(p) => p,
                    None => continue 'edges,
                };
            } else {
                if status.get(&id) != Some(&AgentStatus::Resolved) {
                    continue 'edges;
                }
                ends[k] = positions[&id];
                any_agent = true;
            }
        }
        if !any_agent {
            continue;
        }
        let resid = *r - ends[0].distance(&ends[1]);
        total += resid * resid;
    }
    total
}

fn collect_result<R: Real>(
    scenario: &NetworkScenario<R>,
    ranges: &RangeSet<R>,
    problem: &Problem<R>,
    xs: &[[R; 3]],
    converged: bool,
    iterations: usize,
) -> PositionEstimateSet<R> {
    let mut positions = BTreeMap::new();
    let mut per_agent_status = BTreeMap::new();
    for (k, id) in problem.agents.iter().enumerate() {
        positions.insert(*id, Position::from_array(xs[k], problem.dim));
        let status = if problem.adj[k].is_empty() {
            AgentStatus::Unresolved
        } else {
            AgentStatus::Resolved
        };
        per_agent_status.insert(*id, status);
    }
    let objective_value = resolved_stress(scenario, ranges, &positions, &per_agent_status);
    PositionEstimateSet {
        positions,
        per_agent_status,
        objective_value,
        converged,
        iterations,
        resolved_in_round: BTreeMap::new(),
    }
}

// ---------------------------------------------------------------------------
// Gradient descent on the stress
// ---------------------------------------------------------------------------

fn stacked_norm<R: Real>(xs: &[[R; 3]]) -> R {
    xs.iter()
        .map(|v| dot_self(*v))
        .fold(R::zero(), |a, b| a + b)
        .sqrt()
}

fn dot_self<R: Real>(v: [R; 3]) -> R {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

/// Batch gradient descent on the stress with Armijo backtracking and
/// optional Nesterov momentum (restarted whenever the objective rises).
///
/// `cooperative = false` drops agent-agent edges, leaving each agent
/// anchored only by its own anchor links. Agents without a usable edge keep
/// their initial position and come back `Unresolved`; non-convergence shows
/// up in the `converged` flag, never as an error.
pub fn solve_ls_gradient<R: Real>(
    scenario: &NetworkScenario<R>,
    ranges: &RangeSet<R>,
    config: &SolverConfig<R>,
    cooperative: bool,
) -> Result<PositionEstimateSet<R>, CoopError> {
    config.validate()?;
    let problem = build_problem(scenario, ranges, cooperative)?;
    let mut xs = initial_positions(scenario, &problem.agents, &config.initializer)?;
    let n = xs.len();

    let mut xs_prev = xs.clone();
    let mut grad: Vec<[R; 3]> = Vec::new();
    let mut cost = problem.objective(&xs);
    let mut momentum = 0usize;
    let mut t_init = R::one();
    let mut converged = n == 0 || problem.edges.is_empty();
    let mut iterations = 0usize;

    while iterations < config.max_iterations && !converged {
        iterations += 1;
        let beta = match config.acceleration {
            Acceleration::None => R::zero(),
            Acceleration::Nesterov => {
                rf::<R>(momentum as f64) / rf::<R>(momentum as f64 + 3.0)
            }
        };
        let y: Vec<[R; 3]> = xs
            .iter()
            .zip(&xs_prev)
            .map(|(x, p)| add3(*x, scale3(sub3(*x, *p), beta)))
            .collect();
        problem.gradient(&y, &mut grad);
        let gn2 = grad.iter().map(|g| dot_self(*g)).fold(R::zero(), |a, b| a + b);
        if gn2 < rf(1e-30) {
            converged = true;
            break;
        }
        let f_y = problem.objective(&y);

        // Armijo backtracking from the momentum point.
        let mut t = t_init;
        let mut accepted: Option<(Vec<[R; 3]>, R)> = None;
        while t > rf(1e-20) {
            let cand: Vec<[R; 3]> = y
                .iter()
                .zip(&grad)
                .map(|(p, g)| sub3(*p, scale3(*g, t)))
                .collect();
            let f_c = problem.objective(&cand);
            if f_c.is_finite_real() && f_c <= f_y - rf::<R>(1e-4) * t * gn2 {
                accepted = Some((cand, f_c));
                break;
            }
            t *= rf(0.5);
        }
        let Some((cand, f_c)) = accepted else {
            break;
        };
        if f_c > cost {
            // Momentum overshoot: kill the extrapolation and retry plain.
            momentum = 0;
            xs_prev = xs.clone();
            continue;
        }
        let step: Vec<[R; 3]> = cand.iter().zip(&xs).map(|(a, b)| sub3(*a, *b)).collect();
        let step_norm = stacked_norm(&step);
        let drop = cost - f_c;
        xs_prev = std::mem::replace(&mut xs, cand);
        cost = f_c;
        momentum += 1;
        t_init = (t * rf(2.0)).min(rf(1e6));
        // Relative decrease test: scaling by the current cost keeps the
        // rule meaningful both on noisy plateaus and on noiseless runs
        // where the objective heads to zero.
        if step_norm < config.step_tolerance || drop <= config.objective_tolerance * cost {
            converged = true;
        }
    }
    Ok(collect_result(scenario, ranges, &problem, &xs, converged, iterations))
}

// ---------------------------------------------------------------------------
// Sequential multilateration with virtual anchors
// ---------------------------------------------------------------------------

/// Round-based multilateration. Each round trilaterates, in ascending id
/// order, every unresolved agent that has at least `dim + 1` links to
/// anchors or previously promoted agents; agents solved in a round become
/// virtual anchors for the next one. Stops when a round makes no progress.
/// Leftover agents are `Unresolved` at their initializer position; partial
/// results are legitimate output, so this never fails on sparse graphs.
pub fn solve_sequential<R: Real>(
    scenario: &NetworkScenario<R>,
    ranges: &RangeSet<R>,
    config: &SolverConfig<R>,
) -> Result<PositionEstimateSet<R>, CoopError> {
    config.validate()?;
    let dim = scenario.dim;
    let agents: Vec<NodeId> = scenario.agents().map(|n| n.id).collect();
    let fallback = initial_positions(scenario, &agents, &config.initializer)?;

    // Neighbor lists over all agent-touching measured edges.
    let mut neighbors: BTreeMap<NodeId, Vec<(NodeId, R)>> =
        agents.iter().map(|id| (*id, Vec::new())).collect();
    for (key, r) in &ranges.measurements {
        for (me, other) in [(key.lo, key.hi), (key.hi, key.lo)] {
            if scenario.node(me).is_none() {
                return Err(CoopError::UnknownNode(me));
            }
            if let Some(list) = neighbors.get_mut(&me) {
                list.push((other, *r));
            }
        }
    }

    let mut known: BTreeMap<NodeId, Position<R>> = scenario
        .anchors()
        .map(|n| (n.id, n.position))
        .collect();
    let mut unresolved: BTreeSet<NodeId> = agents.iter().copied().collect();
    let mut resolved_in_round = BTreeMap::new();
    let mut positions = BTreeMap::new();
    let mut round = 0usize;

    loop {
        round += 1;
        let mut promoted: Vec<(NodeId, Position<R>)> = Vec::new();
        for id in &unresolved {
            let refs: Vec<(Position<R>, R)> = neighbors[id]
                .iter()
                .filter_map(|(other, r)| known.get(other).map(|p| (*p, *r)))
                .collect();
            if refs.len() < dim + 1 {
                continue;
            }
            let ref_pos: Vec<Position<R>> = refs.iter().map(|(p, _)| *p).collect();
            let ref_rng: Vec<R> = refs.iter().map(|(_, r)| *r).collect();
            match geomsolve::trilaterate(&ref_pos, &ref_rng, None) {
                Ok(report) if report.converged => promoted.push((*id, report.estimate)),
                _ => {}
            }
        }
        if promoted.is_empty() || round > config.max_iterations {
            round -= 1;
            break;
        }
        for (id, pos) in promoted {
            known.insert(id, pos);
            positions.insert(id, pos);
            resolved_in_round.insert(id, round);
            unresolved.remove(&id);
        }
        if unresolved.is_empty() {
            break;
        }
    }

    let mut per_agent_status = BTreeMap::new();
    for (k, id) in agents.iter().enumerate() {
        if positions.contains_key(id) {
            per_agent_status.insert(*id, AgentStatus::Resolved);
        } else {
            per_agent_status.insert(*id, AgentStatus::Unresolved);
            positions.insert(*id, Position::from_array(fallback[k], dim));
        }
    }
    let converged = per_agent_status.values().all(|s| *s == AgentStatus::Resolved);
    let objective_value = resolved_stress(scenario, ranges, &positions, &per_agent_status);
    Ok(PositionEstimateSet {
        positions,
        per_agent_status,
        objective_value,
        converged,
        iterations: round,
        resolved_in_round,
    })
}

// ---------------------------------------------------------------------------
// Stress majorization (weighted SMACOF)
// ---------------------------------------------------------------------------

/// One Guttman-transform step: `X_next = V_plus * B(X) * X`.
pub(crate) fn guttman_step<R: Real>(
    vplus: &DMatrix<R>,
    edges: &[(usize, usize, R)],
    x: &DMatrix<R>,
) -> DMatrix<R> {
    let n = x.nrows();
    let mut b = DMatrix::<R>::zeros(n, n);
    for (i, j, r) in edges {
        let mut d2 = R::zero();
        for c in 0..x.ncols() {
            let diff = x[(*i, c)] - x[(*j, c)];
            d2 += diff * diff;
        }
        let d = d2.sqrt();
        // Convention for coincident points: b_ij = 0.
        if d > rf(DIST_EPS) {
            let v = *r / d;
            b[(*i, *j)] -= v;
            b[(*j, *i)] -= v;
            b[(*i, *i)] += v;
            b[(*j, *j)] += v;
        }
    }
    vplus * (b * x)
}

pub(crate) fn matrix_stress<R: Real>(edges: &[(usize, usize, R)], x: &DMatrix<R>) -> R {
    let mut total = R::zero();
    for (i, j, r) in edges {
        let mut d2 = R::zero();
        for c in 0..x.ncols() {
            let diff = x[(*i, c)] - x[(*j, c)];
            d2 += diff * diff;
        }
        let resid = *r - d2.sqrt();
        total += resid * resid;
    }
    total
}

/// Weighted multidimensional scaling by stress majorization, aligned onto
/// the anchors afterwards.
///
/// Measured edges get weight 1, absent pairs weight 0. Every node, anchors
/// included, is free during the embedding; the similarity fit of estimated
/// anchors onto their true positions then maps agents into scenario
/// coordinates. Needs a connected measurement graph and `dim + 1` anchors.
/// Each majorization step provably cannot increase the stress, and that is
/// asserted on every iteration.
pub fn solve_mds_smacof<R: Real>(
    scenario: &NetworkScenario<R>,
    ranges: &RangeSet<R>,
    config: &SolverConfig<R>,
) -> Result<PositionEstimateSet<R>, CoopError> {
    config.validate()?;
    let dim = scenario.dim;
    if scenario.n_anchors() < dim + 1 {
        return Err(CoopError::TooFewAnchors { needed: dim + 1, got: scenario.n_anchors() });
    }
    let nodes: Vec<NodeId> = scenario.nodes().iter().map(|n| n.id).collect();
    let index: BTreeMap<NodeId, usize> =
        nodes.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let n = nodes.len();

    let mut edges: Vec<(usize, usize, R)> = Vec::with_capacity(ranges.measurements.len());
    for (key, r) in &ranges.measurements {
        let i = *index.get(&key.lo).ok_or(CoopError::UnknownNode(key.lo))?;
        let j = *index.get(&key.hi).ok_or(CoopError::UnknownNode(key.hi))?;
        edges.push((i, j, *r));
    }

    // Connectivity: the relative embedding only determines one component.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for (i, j, _) in &edges {
        let (ri, rj) = (find(&mut parent, *i), find(&mut parent, *j));
        parent[ri] = rj;
    }
    let root = find(&mut parent, 0);
    for i in 1..n {
        if find(&mut parent, i) != root {
            return Err(CoopError::DisconnectedGraph);
        }
    }

    // V from the 0/1 weights; its pseudo-inverse handles the translation
    // nullspace (computed once per solve).
    let mut v = DMatrix::<R>::zeros(n, n);
    for (i, j, _) in &edges {
        v[(*i, *j)] -= R::one();
        v[(*j, *i)] -= R::one();
        v[(*i, *i)] += R::one();
        v[(*j, *j)] += R::one();
    }
    let svd = v.svd(true, true);
    let u = svd.u.as_ref().expect("svd requested");
    let v_t = svd.v_t.as_ref().expect("svd requested");
    let smax = svd.singular_values[0];
    let mut sinv = DMatrix::<R>::zeros(n, n);
    for k in 0..n {
        let s = svd.singular_values[k];
        if s > rf::<R>(1e-10) * smax {
            sinv[(k, k)] = R::one() / s;
        }
    }
    let vplus = v_t.transpose() * sinv * u.transpose();

    // Anchors start at truth, agents at their initializer.
    let agents: Vec<NodeId> = scenario.agents().map(|a| a.id).collect();
    let agent_init = initial_positions(scenario, &agents, &config.initializer)?;
    let mut x = DMatrix::<R>::zeros(n, dim);
    for (row, id) in nodes.iter().enumerate() {
        let p = if scenario.is_anchor(*id) {
            scenario.position_of(*id).expect("known node")
        } else {
            let k = agents.binary_search(id).expect("agent listed");
            Position::from_array(agent_init[k], dim)
        };
        for c in 0..dim {
            x[(row, c)] = p.get(c);
        }
    }

    let mut cost = matrix_stress(&edges, &x);
    let mut converged = false;
    let mut iterations = 0usize;
    while iterations < config.max_iterations {
        iterations += 1;
        let x_next = guttman_step(&vplus, &edges, &x);
        let next_cost = matrix_stress(&edges, &x_next);
        assert!(
            next_cost <= cost + rf::<R>(1e-12) * (R::one() + cost),
            "majorization step increased stress"
        );
        let drop = cost - next_cost;
        x = x_next;
        cost = next_cost;
        if drop <= config.objective_tolerance * cost {
            converged = true;
            break;
        }
    }

    // Map the free embedding onto the anchor frame.
    let row_pos = |m: &DMatrix<R>, row: usize| -> Position<R> {
        let mut c = [R::zero(); 3];
        for k in 0..dim {
            c[k] = m[(row, k)];
        }
        Position::from_array(c, dim)
    };
    let mut est_anchors = Vec::new();
    let mut true_anchors = Vec::new();
    for (row, id) in nodes.iter().enumerate() {
        if scenario.is_anchor(*id) {
            est_anchors.push(row_pos(&x, row));
            true_anchors.push(scenario.position_of(*id).expect("known node"));
        }
    }
    let align = geomsolve::procrustes_align(&est_anchors, &true_anchors)
        .map_err(|_| CoopError::DegenerateAnchors)?;

    let mut positions = BTreeMap::new();
    let mut per_agent_status = BTreeMap::new();
    for (row, id) in nodes.iter().enumerate() {
        if !scenario.is_anchor(*id) {
            positions.insert(*id, align.apply(&row_pos(&x, row)));
            per_agent_status.insert(*id, AgentStatus::Resolved);
        }
    }
    let objective_value = resolved_stress(scenario, ranges, &positions, &per_agent_status);
    Ok(PositionEstimateSet {
        positions,
        per_agent_status,
        objective_value,
        converged,
        iterations,
        resolved_in_round: BTreeMap::new(),
    })
}

// ---------------------------------------------------------------------------
// Projection onto range balls
// ---------------------------------------------------------------------------

/// Distance each point must move to sit inside every neighbor ball, summed
/// as squared hinge violations; the convergence monitor for the projections.
fn ball_violation<R: Real>(problem: &Problem<R>, xs: &[[R; 3]]) -> R {
    let mut total = R::zero();
    for e in &problem.edges {
        let d = norm3(sub3(problem.end_pos(&e.a, xs), problem.end_pos(&e.b, xs)));
        let over = (d - e.range).max(R::zero());
        total += over * over;
    }
    total
}

/// Convex-relaxation solver: every range constraint is relaxed to the ball
/// `||x - x_j|| <= r_ij`, and each sweep projects every agent cyclically
/// onto its own balls. Neighbor agents enter at their previous-sweep
/// positions (synchronous schedule), anchors at truth. Optional Nesterov
/// momentum with a restart whenever the total violation rises.
pub fn solve_pocs<R: Real>(
    scenario: &NetworkScenario<R>,
    ranges: &RangeSet<R>,
    config: &SolverConfig<R>,
) -> Result<PositionEstimateSet<R>, CoopError> {
    config.validate()?;
    let problem = build_problem(scenario, ranges, true)?;
    let mut xs = initial_positions(scenario, &problem.agents, &config.initializer)?;
    let mut xs_prev = xs.clone();
    let mut violation = ball_violation(&problem, &xs);
    let mut momentum = 0usize;
    let mut converged = xs.is_empty() || problem.edges.is_empty();
    let mut iterations = 0usize;

    while iterations < config.max_iterations && !converged {
        iterations += 1;
        let beta = match config.acceleration {
            Acceleration::None => R::zero(),
            Acceleration::Nesterov => {
                rf::<R>(momentum as f64) / rf::<R>(momentum as f64 + 3.0)
            }
        };
        let y: Vec<[R; 3]> = xs
            .iter()
            .zip(&xs_prev)
            .map(|(x, p)| add3(*x, scale3(sub3(*x, *p), beta)))
            .collect();

        let mut next = y.clone();
        for (slot, links) in problem.adj.iter().enumerate() {
            let mut z = y[slot];
            for (end, r) in links {
                let center = problem.end_pos(end, &y);
                let diff = sub3(z, center);
                let d = norm3(diff);
                if d > *r {
                    z = add3(center, scale3(diff, *r / d));
                }
            }
            next[slot] = z;
        }

        let v_next = ball_violation(&problem, &next);
        if config.acceleration == Acceleration::Nesterov && v_next > violation {
            momentum = 0;
            xs_prev = xs.clone();
            continue;
        }
        let step_norm = stacked_norm(
            &next.iter().zip(&xs).map(|(a, b)| sub3(*a, *b)).collect::<Vec<_>>(),
        );
        xs_prev = std::mem::replace(&mut xs, next);
        violation = v_next;
        momentum += 1;
        if step_norm < config.step_tolerance {
            converged = true;
        }
    }
    Ok(collect_result(scenario, ranges, &problem, &xs, converged, iterations))
}

// ---------------------------------------------------------------------------
// Edge-consensus ADMM
// ---------------------------------------------------------------------------

/// Per-edge state: local copies of the free endpoints plus scaled duals.
struct EdgeVars<R: Real> {
    a: End<R>,
    b: End<R>,
    range: R,
    x_a: [R; 3],
    x_b: [R; 3],
    u_a: [R; 3],
    u_b: [R; 3],
}

/// Edge-consensus ADMM on the stress.
///
/// Each measured edge holds local copies `x` of its free endpoints; the
/// x-update solves the per-edge range problem in closed form, the z-update
/// averages the copies back into one consensus position per agent, and
/// scaled duals `u` do the ascent. Stops when both the primal residual
/// (copy-to-consensus gap) and the dual residual (scaled consensus motion)
/// drop below 1e-6, measured as a max over copies. The stress is not
/// convex, so a warm start from another solver is the intended use; pass it
/// through `config.initializer`.
pub fn solve_admm<R: Real>(
    scenario: &NetworkScenario<R>,
    ranges: &RangeSet<R>,
    config: &SolverConfig<R>,
    penalty: R,
) -> Result<PositionEstimateSet<R>, CoopError> {
    config.validate()?;
    if !(penalty > R::zero()) || !penalty.is_finite_real() {
        return Err(CoopError::InvalidParameter("penalty must be > 0".into()));
    }
    let problem = build_problem(scenario, ranges, true)?;
    let mut z = initial_positions(scenario, &problem.agents, &config.initializer)?;
    let c = penalty;
    let residual_tol = rf::<R>(1e-6);

    let mut edges: Vec<EdgeVars<R>> = problem
        .edges
        .iter()
        .map(|e| EdgeVars {
            a: e.a,
            b: e.b,
            range: e.range,
            x_a: problem.end_pos(&e.a, &z),
            x_b: problem.end_pos(&e.b, &z),
            u_a: [R::zero(); 3],
            u_b: [R::zero(); 3],
        })
        .collect();

    let mut converged = z.is_empty() || edges.is_empty();
    let mut iterations = 0usize;
    while iterations < config.max_iterations && !converged {
        iterations += 1;

        // x-update: per edge, minimize (r - ||x_a - x_b||)^2 plus the
        // quadratic coupling to (z - u). Radial geometry gives it in
        // closed form.
        for e in &mut edges {
            match (e.a, e.b) {
                (End::Free(ka), End::Free(kb)) => {
                    let m_a = sub3(z[ka], e.u_a);
                    let m_b = sub3(z[kb], e.u_b);
                    let diff = sub3(m_a, m_b);
                    let dist = norm3(diff);
                    let mid = scale3(add3(m_a, m_b), rf(0.5));
                    if dist > rf(DIST_EPS) {
                        let t = (rf::<R>(4.0) * e.range + c * dist) / (rf::<R>(4.0) + c);
                        let half = scale3(diff, t / (dist * rf::<R>(2.0)));
                        e.x_a = add3(mid, half);
                        e.x_b = sub3(mid, half);
                    } else {
                        e.x_a = mid;
                        e.x_b = mid;
                    }
                }
                (End::Free(ka), End::Fixed(p)) => {
                    let m_a = sub3(z[ka], e.u_a);
                    e.x_a = anchor_pull(m_a, p, e.range, c);
                    e.x_b = p;
                }
                (End::Fixed(p), End::Free(kb)) => {
                    let m_b = sub3(z[kb], e.u_b);
                    e.x_b = anchor_pull(m_b, p, e.range, c);
                    e.x_a = p;
                }
                (End::Fixed(_), End::Fixed(_)) => unreachable!("dropped at build"),
            }
        }

        // z-update: consensus average of (copy + dual) per agent.
        let mut sums = vec![[R::zero(); 3]; z.len()];
        let mut counts = vec![0usize; z.len()];
        for e in &edges {
            if let End::Free(k) = e.a {
                sums[k] = add3(sums[k], add3(e.x_a, e.u_a));
                counts[k] += 1;
            }
            if let End::Free(k) = e.b {
                sums[k] = add3(sums[k], add3(e.x_b, e.u_b));
                counts[k] += 1;
            }
        }
        let mut dual_max = R::zero();
        for k in 0..z.len() {
            if counts[k] == 0 {
                continue;
            }
            let z_new = scale3(sums[k], R::one() / rf::<R>(counts[k] as f64));
            dual_max = dual_max.max(c * norm3(sub3(z_new, z[k])));
            z[k] = z_new;
        }

        // Dual ascent and primal residual against the fresh consensus.
        let mut primal_max = R::zero();
        for e in &mut edges {
            if let End::Free(k) = e.a {
                let gap = sub3(e.x_a, z[k]);
                primal_max = primal_max.max(norm3(gap));
                e.u_a = add3(e.u_a, gap);
            }
            if let End::Free(k) = e.b {
                let gap = sub3(e.x_b, z[k]);
                primal_max = primal_max.max(norm3(gap));
                e.u_b = add3(e.u_b, gap);
            }
        }
        if primal_max <= residual_tol && dual_max <= residual_tol {
            converged = true;
        }
    }
    Ok(collect_result(scenario, ranges, &problem, &z, converged, iterations))
}

/// Minimizer of `(r - ||x - p||)^2 + (c/2)||x - m||^2` over `x`: radial
/// blend between the measured sphere around the anchor and the consensus
/// pull.
fn anchor_pull<R: Real>(m: [R; 3], p: [R; 3], r: R, c: R) -> [R; 3] {
    let diff = sub3(m, p);
    let dist = norm3(diff);
    if dist <= rf(DIST_EPS) {
        return m;
    }
    let t = (rf::<R>(2.0) * r + c * dist) / (rf::<R>(2.0) + c);
    add3(p, scale3(diff, t / dist))
}
