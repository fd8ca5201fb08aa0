//! Single-node geometric solvers.
//!
//! Everything here estimates one position from measurements against anchors
//! at known positions: trilateration and weighted least squares on ranges,
//! iterative linearized positioning on range differences, dilution of
//! precision, covariance-weighted fusion of independent anchor groups,
//! similarity alignment between coordinate frames, and track smoothing.
//!
//! The iterative solvers share one Gauss-Newton core with Levenberg damping
//! (lambda starts at 1e-3, grows tenfold on a rejected step, shrinks tenfold
//! on an accepted one). Damping uses Marquardt diagonal scaling, so scaling
//! all weights by a constant leaves the iterate trajectory unchanged. A run
//! that stops without meeting the step tolerance is reported with
//! `converged = false` rather than as an error; errors are reserved for
//! invalid inputs and degenerate geometry.

use crate::geom::{add3, dot3, norm3, scale3, sub3, Position};
use crate::real::{rf, Real};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("{0} lengths disagree")]
    LengthMismatch(&'static str),
    #[error("positions mix dimensions")]
    DimensionMismatch,
    #[error("needs at least {needed} anchors, got {got}")]
    TooFewAnchors { needed: usize, got: usize },
    #[error("anchor geometry is rank-deficient")]
    SingularGeometry,
    #[error("anchor spread is rank-deficient")]
    DegenerateAnchors,
    #[error("every measurement group failed")]
    AllGroupsFailed,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Iteration limits for the Gauss-Newton solvers.
#[derive(Clone, Copy, Debug)]
pub struct GnConfig<R: Real> {
    pub max_iterations: usize,
    /// Accepted-step norm below which the run counts as converged.
    pub step_tolerance: R,
    /// Initial Levenberg damping factor.
    pub lambda_init: R,
}

impl<R: Real> Default for GnConfig<R> {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            step_tolerance: rf(1e-9),
            lambda_init: rf(1e-3),
        }
    }
}

/// Outcome of a position solve.
#[derive(Clone, Debug)]
pub struct SolverReport<R: Real> {
    pub estimate: Position<R>,
    /// Accepted Gauss-Newton steps (or fused-group total).
    pub iterations: usize,
    pub converged: bool,
    /// Square root of the weighted residual sum of squares at the estimate.
    pub residual_norm: R,
    /// Estimate covariance, when the normal matrix is invertible.
    pub covariance: Option<DMatrix<R>>,
}

impl<R: Real> SolverReport<R> {
    /// JSON rendering; the covariance flattens row-major.
    pub fn to_json(&self) -> serde_json::Value {
        let cov = self.covariance.as_ref().map(|c| {
            let mut flat = Vec::with_capacity(c.len());
            for i in 0..c.nrows() {
                for j in 0..c.ncols() {
                    flat.push(c[(i, j)].as_f64());
                }
            }
            flat
        });
        serde_json::json!({
            "estimate": self.estimate.coords_f64(),
            "dim": self.estimate.dim(),
            "iterations": self.iterations,
            "converged": self.converged,
            "residual_norm": self.residual_norm.as_f64(),
            "covariance": cov,
        })
    }
}

fn common_dim<R: Real>(positions: &[Position<R>]) -> Result<usize, SolveError> {
    let dim = positions
        .first()
        .ok_or(SolveError::TooFewAnchors { needed: 1, got: 0 })?
        .dim();
    if positions.iter().any(|p| p.dim() != dim) {
        return Err(SolveError::DimensionMismatch);
    }
    if positions.iter().any(|p| !p.is_finite()) {
        return Err(SolveError::InvalidInput("non-finite anchor coordinate".into()));
    }
    Ok(dim)
}

/// Rank check on the centered anchor spread. Collinear anchors in 2-D (or
/// coplanar in 3-D) leave the position ambiguous under reflection, so the
/// solvers refuse them up front.
fn anchor_spread_deficient<R: Real>(anchors: &[Position<R>], dim: usize) -> bool {
    let n = anchors.len();
    if n < dim + 1 {
        return true;
    }
    let centroid = Position::centroid(anchors.iter()).expect("non-empty");
    let mut m = DMatrix::<R>::zeros(n, dim);
    for (i, a) in anchors.iter().enumerate() {
        for k in 0..dim {
            m[(i, k)] = a.get(k) - centroid.get(k);
        }
    }
    let svd = m.svd(false, false);
    let s = &svd.singular_values;
    let smax = s[0];
    if !(smax > R::zero()) {
        return true;
    }
    s[dim - 1] <= rf::<R>(1e-8) * smax
}

struct GnOutcome<R: Real> {
    x: [R; 3],
    iterations: usize,
    converged: bool,
    weighted_rss: R,
    normal: DMatrix<R>,
}

/// Levenberg-damped Gauss-Newton on `sum_i w_i r_i(x)^2`.
///
/// `eval` fills the residual vector and the Jacobian rows (padded to three
/// lanes; only the first `dim` are used).
fn lm_least_squares<R: Real>(
    dim: usize,
    init: [R; 3],
    weights: &[R],
    config: &GnConfig<R>,
    eval: &dyn Fn(&[R; 3], &mut Vec<R>, &mut Vec<[R; 3]>),
) -> GnOutcome<R> {
    let m = weights.len();
    let mut x = init;
    let mut lambda = config.lambda_init;
    let mut residuals = Vec::with_capacity(m);
    let mut jacobian = Vec::with_capacity(m);
    let mut scratch_r = Vec::with_capacity(m);
    let mut scratch_j = Vec::with_capacity(m);

    let wrss = |r: &[R]| -> R {
        r.iter()
            .zip(weights)
            .map(|(ri, wi)| *wi * *ri * *ri)
            .fold(R::zero(), |a, b| a + b)
    };

    eval(&x, &mut residuals, &mut jacobian);
    let mut cost = wrss(&residuals);
    let mut iterations = 0usize;
    let mut converged = false;
    let mut normal = DMatrix::<R>::zeros(dim, dim);

    'outer: while iterations < config.max_iterations {
        // Normal matrix and gradient at the current iterate.
        let mut n = DMatrix::<R>::zeros(dim, dim);
        let mut g = DVector::<R>::zeros(dim);
        for (row, (ri, wi)) in jacobian.iter().zip(residuals.iter().zip(weights)) {
            for a in 0..dim {
                g[a] += *wi * *ri * row[a];
                for b in 0..dim {
                    n[(a, b)] += *wi * row[a] * row[b];
                }
            }
        }
        normal = n.clone();
        let trace = (0..dim).map(|k| n[(k, k)]).fold(R::zero(), |a, b| a + b);
        if !(trace > R::zero()) || !trace.is_finite_real() {
            break;
        }

        loop {
            let mut damped = n.clone();
            for k in 0..dim {
                let floor = trace * rf::<R>(1e-14);
                let dkk = if n[(k, k)] > floor { n[(k, k)] } else { floor };
                damped[(k, k)] += lambda * dkk;
            }
            let step = match damped.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => match damped.lu().solve(&(-&g)) {
                    Some(s) => s,
                    None => break 'outer,
                },
            };
            let mut cand = x;
            for k in 0..dim {
                cand[k] += step[k];
            }
            eval(&cand, &mut scratch_r, &mut scratch_j);
            let cand_cost = wrss(&scratch_r);
            if cand_cost.is_finite_real() && cand_cost <= cost {
                x = cand;
                cost = cand_cost;
                std::mem::swap(&mut residuals, &mut scratch_r);
                std::mem::swap(&mut jacobian, &mut scratch_j);
                lambda = (lambda / rf(10.0)).max(rf(1e-12));
                iterations += 1;
                let step_norm = (0..dim)
                    .map(|k| step[k] * step[k])
                    .fold(R::zero(), |a, b| a + b)
                    .sqrt();
                if step_norm < config.step_tolerance {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            lambda *= rf(10.0);
            if lambda > rf(1e12) {
                break 'outer;
            }
        }
    }

    GnOutcome { x, iterations, converged, weighted_rss: cost, normal }
}

/// Covariance of the estimate: `s^2 (J' W J)^-1` with the residual variance
/// factor `s^2 = wrss / (m - d)` (1 when there are no spare measurements).
fn covariance_from<R: Real>(
    normal: &DMatrix<R>,
    weighted_rss: R,
    m: usize,
    dim: usize,
) -> Option<DMatrix<R>> {
    let inv = normal.clone().cholesky()?.inverse();
    let dof = m.saturating_sub(dim);
    let s2 = if dof > 0 { weighted_rss / rf(dof as f64) } else { R::one() };
    Some(inv * s2)
}

fn validate_ranges<R: Real>(ranges: &[R]) -> Result<(), SolveError> {
    if ranges.iter().any(|r| !r.is_finite_real() || *r < R::zero()) {
        return Err(SolveError::InvalidInput(
            "ranges must be finite and non-negative".into(),
        ));
    }
    Ok(())
}

/// Default initializer for range solvers: anchor centroid weighted by
/// inverse measured range, so nearby anchors pull harder.
fn range_weighted_centroid<R: Real>(
    anchors: &[Position<R>],
    ranges: &[R],
    dim: usize,
) -> [R; 3] {
    let mut acc = [R::zero(); 3];
    let mut wsum = R::zero();
    for (a, r) in anchors.iter().zip(ranges) {
        let w = R::one() / r.max(rf(1e-6));
        acc = add3(acc, scale3(a.array(), w));
        wsum += w;
    }
    let _ = dim;
    scale3(acc, R::one() / wsum)
}

/// Range residuals and unit-vector Jacobian rows for a point solve.
fn range_eval<'a, R: Real>(
    anchors: &'a [Position<R>],
    ranges: &'a [R],
) -> impl Fn(&[R; 3], &mut Vec<R>, &mut Vec<[R; 3]>) + 'a {
    move |x, res, jac| {
        res.clear();
        jac.clear();
        for (a, r) in anchors.iter().zip(ranges) {
            let diff = sub3(*x, a.array());
            let d = norm3(diff);
            if d > rf(1e-12) {
                res.push(d - *r);
                jac.push(scale3(diff, R::one() / d));
            } else {
                res.push(-*r);
                jac.push([R::zero(); 3]);
            }
        }
    }
}

/// Position from absolute ranges to anchors (unit weights).
///
/// Needs at least `dim + 1` anchors with full-rank spread. `init` defaults
/// to the range-weighted anchor centroid.
pub fn trilaterate<R: Real>(
    anchors: &[Position<R>],
    ranges: &[R],
    init: Option<Position<R>>,
) -> Result<SolverReport<R>, SolveError> {
    let weights = vec![R::one(); ranges.len()];
    iterative_wls(anchors, ranges, &weights, init, &GnConfig::default())
}

/// Position from ranges with per-measurement weights.
pub fn iterative_wls<R: Real>(
    anchors: &[Position<R>],
    ranges: &[R],
    weights: &[R],
    init: Option<Position<R>>,
    config: &GnConfig<R>,
) -> Result<SolverReport<R>, SolveError> {
    let dim = common_dim(anchors)?;
    if anchors.len() != ranges.len() || anchors.len() != weights.len() {
        return Err(SolveError::LengthMismatch("anchors/ranges/weights"));
    }
    if anchors.len() < dim + 1 {
        return Err(SolveError::TooFewAnchors { needed: dim + 1, got: anchors.len() });
    }
    validate_ranges(ranges)?;
    if weights.iter().any(|w| !w.is_finite_real() || *w <= R::zero()) {
        return Err(SolveError::InvalidInput("weights must be finite and positive".into()));
    }
    if anchor_spread_deficient(anchors, dim) {
        return Err(SolveError::SingularGeometry);
    }
    let x0 = match init {
        Some(p) => {
            if p.dim() != dim {
                return Err(SolveError::DimensionMismatch);
            }
            p.array()
        }
        None => range_weighted_centroid(anchors, ranges, dim),
    };
    let eval = range_eval(anchors, ranges);
    let out = lm_least_squares(dim, x0, weights, config, &eval);
    let covariance = covariance_from(&out.normal, out.weighted_rss, ranges.len(), dim);
    Ok(SolverReport {
        estimate: Position::from_array(out.x, dim),
        iterations: out.iterations,
        converged: out.converged,
        residual_norm: out.weighted_rss.sqrt(),
        covariance,
    })
}

/// Position from range differences, linearized around the running estimate.
///
/// `diffs[i]` is the measured `||x - anchors[i+1]|| - ||x - anchors[0]||`;
/// the first anchor is the reference. Defaults: 50 iterations, step
/// tolerance 1e-9. Non-convergence is reported, not raised.
pub fn foy_tdoa<R: Real>(
    anchors: &[Position<R>],
    diffs: &[R],
    init: Option<Position<R>>,
    config: &GnConfig<R>,
) -> Result<SolverReport<R>, SolveError> {
    let dim = common_dim(anchors)?;
    if anchors.len() < dim + 1 {
        return Err(SolveError::TooFewAnchors { needed: dim + 1, got: anchors.len() });
    }
    if diffs.len() != anchors.len() - 1 {
        return Err(SolveError::LengthMismatch("anchors/diffs"));
    }
    if diffs.iter().any(|d| !d.is_finite_real()) {
        return Err(SolveError::InvalidInput("range differences must be finite".into()));
    }
    if anchor_spread_deficient(anchors, dim) {
        return Err(SolveError::SingularGeometry);
    }
    let x0 = match init {
        Some(p) => {
            if p.dim() != dim {
                return Err(SolveError::DimensionMismatch);
            }
            p.array()
        }
        None => Position::centroid(anchors.iter()).expect("non-empty").array(),
    };
    let reference = anchors[0].array();
    let eval = move |x: &[R; 3], res: &mut Vec<R>, jac: &mut Vec<[R; 3]>| {
        res.clear();
        jac.clear();
        let dref_v = sub3(*x, reference);
        let dref = norm3(dref_v);
        let uref = if dref > rf(1e-12) {
            scale3(dref_v, R::one() / dref)
        } else {
            [R::zero(); 3]
        };
        for (a, meas) in anchors[1..].iter().zip(diffs) {
            let dv = sub3(*x, a.array());
            let d = norm3(dv);
            let u = if d > rf(1e-12) {
                scale3(dv, R::one() / d)
            } else {
                [R::zero(); 3]
            };
            res.push(d - dref - *meas);
            jac.push(sub3(u, uref));
        }
    };
    let weights = vec![R::one(); diffs.len()];
    let out = lm_least_squares(dim, x0, &weights, config, &eval);
    let covariance = covariance_from(&out.normal, out.weighted_rss, diffs.len(), dim);
    Ok(SolverReport {
        estimate: Position::from_array(out.x, dim),
        iterations: out.iterations,
        converged: out.converged,
        residual_norm: out.weighted_rss.sqrt(),
        covariance,
    })
}

/// Weighted geometric dilution of precision at `at`:
/// `sqrt(trace((H' W H)^-1))` over the unit-vector geometry matrix `H`.
pub fn wgdop<R: Real>(
    anchors: &[Position<R>],
    weights: &[R],
    at: &Position<R>,
) -> Result<R, SolveError> {
    let dim = common_dim(anchors)?;
    if anchors.len() != weights.len() {
        return Err(SolveError::LengthMismatch("anchors/weights"));
    }
    if anchors.len() < dim {
        return Err(SolveError::TooFewAnchors { needed: dim, got: anchors.len() });
    }
    if at.dim() != dim {
        return Err(SolveError::DimensionMismatch);
    }
    if weights.iter().any(|w| !w.is_finite_real() || *w <= R::zero()) {
        return Err(SolveError::InvalidInput("weights must be finite and positive".into()));
    }
    if anchor_spread_deficient(anchors, dim) {
        return Err(SolveError::SingularGeometry);
    }
    let mut n = DMatrix::<R>::zeros(dim, dim);
    for (anchor, w) in anchors.iter().zip(weights) {
        let diff = sub3(at.array(), anchor.array());
        let d = norm3(diff);
        if d <= rf(1e-12) {
            return Err(SolveError::InvalidInput(
                "evaluation point coincides with an anchor".into(),
            ));
        }
        let u = scale3(diff, R::one() / d);
        for a in 0..dim {
            for b in 0..dim {
                n[(a, b)] += *w * u[a] * u[b];
            }
        }
    }
    let inv = n.cholesky().ok_or(SolveError::SingularGeometry)?.inverse();
    let trace = (0..dim).map(|k| inv[(k, k)]).fold(R::zero(), |a, b| a + b);
    Ok(trace.sqrt())
}

/// One independent anchor group for [`group_fuse`].
#[derive(Clone, Debug)]
pub struct MeasurementGroup<R: Real> {
    pub anchors: Vec<Position<R>>,
    pub ranges: Vec<R>,
    pub weights: Vec<R>,
}

/// Solves each group independently and fuses the survivors in information
/// form (`cov^-1`-weighted mean). A group that fails to solve, converge, or
/// produce an invertible covariance is dropped with a warning; a single
/// surviving group passes through untouched.
pub fn group_fuse<R: Real>(
    groups: &[MeasurementGroup<R>],
    config: &GnConfig<R>,
) -> Result<SolverReport<R>, SolveError> {
    if groups.is_empty() {
        return Err(SolveError::AllGroupsFailed);
    }
    let mut survivors: Vec<SolverReport<R>> = Vec::new();
    for (idx, g) in groups.iter().enumerate() {
        match iterative_wls(&g.anchors, &g.ranges, &g.weights, None, config) {
            Ok(report) if report.converged && report.covariance.is_some() => {
                survivors.push(report);
            }
            Ok(_) => log::warn!("measurement group {idx} did not converge; dropped"),
            Err(e) => log::warn!("measurement group {idx} failed: {e}; dropped"),
        }
    }
    let dim = match survivors.first() {
        None => return Err(SolveError::AllGroupsFailed),
        Some(r) => r.estimate.dim(),
    };
    if survivors.len() == 1 {
        return Ok(survivors.pop().expect("one survivor"));
    }
    if survivors.iter().any(|r| r.estimate.dim() != dim) {
        return Err(SolveError::DimensionMismatch);
    }

    let mut info = DMatrix::<R>::zeros(dim, dim);
    let mut info_mean = DVector::<R>::zeros(dim);
    let mut iterations = 0usize;
    let mut rss = R::zero();
    let mut used = 0usize;
    for r in &survivors {
        let cov = r.covariance.as_ref().expect("filtered");
        let inv = match cov.clone().cholesky() {
            Some(ch) => ch.inverse(),
            None => {
                log::warn!("group covariance not positive definite; dropped");
                continue;
            }
        };
        let x = DVector::<R>::from_iterator(dim, r.estimate.coords().iter().copied());
        info_mean += &inv * x;
        info += inv;
        iterations += r.iterations;
        rss += r.residual_norm * r.residual_norm;
        used += 1;
    }
    if used == 0 {
        return Err(SolveError::AllGroupsFailed);
    }
    let fused_cov = info.clone().cholesky().ok_or(SolveError::SingularGeometry)?.inverse();
    let fused = &fused_cov * info_mean;
    let mut coords = [R::zero(); 3];
    for k in 0..dim {
        coords[k] = fused[k];
    }
    Ok(SolverReport {
        estimate: Position::from_array(coords, dim),
        iterations,
        converged: true,
        residual_norm: rss.sqrt(),
        covariance: Some(fused_cov),
    })
}

/// Least-squares similarity transform `y = scale * R * x + t`.
#[derive(Clone, Debug)]
pub struct AlignmentTransform<R: Real> {
    pub dim: usize,
    pub scale: R,
    /// `dim x dim` orthogonal matrix; may include a reflection.
    pub rotation: DMatrix<R>,
    pub translation: [R; 3],
    /// Whether the optimal orthogonal part has negative determinant.
    pub reflected: bool,
}

impl<R: Real> AlignmentTransform<R> {
    pub fn apply(&self, p: &Position<R>) -> Position<R> {
        let mut out = self.translation;
        for a in 0..self.dim {
            let mut acc = R::zero();
            for b in 0..self.dim {
                acc += self.rotation[(a, b)] * p.get(b);
            }
            out[a] += self.scale * acc;
        }
        Position::from_array(out, self.dim)
    }

    pub fn apply_all(&self, points: &[Position<R>]) -> Vec<Position<R>> {
        points.iter().map(|p| self.apply(p)).collect()
    }
}

/// Fits the similarity transform mapping `source` onto `target` in the
/// least-squares sense (scale, rotation, optional reflection, translation).
/// Needs `dim + 1` correspondences with full-rank spread on both sides.
pub fn procrustes_align<R: Real>(
    source: &[Position<R>],
    target: &[Position<R>],
) -> Result<AlignmentTransform<R>, SolveError> {
    if source.len() != target.len() {
        return Err(SolveError::LengthMismatch("source/target"));
    }
    let dim = common_dim(source)?;
    if common_dim(target)? != dim {
        return Err(SolveError::DimensionMismatch);
    }
    let n = source.len();
    if n < dim + 1 {
        return Err(SolveError::TooFewAnchors { needed: dim + 1, got: n });
    }
    if anchor_spread_deficient(source, dim) || anchor_spread_deficient(target, dim) {
        return Err(SolveError::DegenerateAnchors);
    }
    let ms = Position::centroid(source.iter()).expect("non-empty");
    let mt = Position::centroid(target.iter()).expect("non-empty");
    let inv_n = R::one() / rf::<R>(n as f64);

    // Cross-covariance of the centered sets and the source variance.
    let mut sigma = DMatrix::<R>::zeros(dim, dim);
    let mut var_s = R::zero();
    for (s, t) in source.iter().zip(target) {
        let sc = sub3(s.array(), ms.array());
        let tc = sub3(t.array(), mt.array());
        var_s += dot3(sc, sc);
        for a in 0..dim {
            for b in 0..dim {
                sigma[(a, b)] += tc[a] * sc[b];
            }
        }
    }
    sigma *= inv_n;
    var_s *= inv_n;

    let svd = sigma.clone().svd(true, true);
    let u = svd.u.as_ref().ok_or(SolveError::DegenerateAnchors)?;
    let v_t = svd.v_t.as_ref().ok_or(SolveError::DegenerateAnchors)?;
    let rotation = u * v_t;
    let trace_d = svd
        .singular_values
        .iter()
        .fold(R::zero(), |a, b| a + *b);
    let scale = trace_d / var_s;
    let reflected = rotation.determinant() < R::zero();

    let mut translation = [R::zero(); 3];
    for a in 0..dim {
        let mut acc = R::zero();
        for b in 0..dim {
            acc += rotation[(a, b)] * ms.get(b);
        }
        translation[a] = mt.get(a) - scale * acc;
    }
    Ok(AlignmentTransform { dim, scale, rotation, translation, reflected })
}

/// Moving-average smoother. The window must be odd; it shrinks symmetrically
/// near the track ends, so the first and last points pass through unchanged.
pub fn smooth_track<R: Real>(
    track: &[Position<R>],
    window: usize,
) -> Result<Vec<Position<R>>, SolveError> {
    if window == 0 || window % 2 == 0 {
        return Err(SolveError::InvalidInput(format!(
            "window must be odd and positive, got {window}"
        )));
    }
    if track.is_empty() {
        return Ok(Vec::new());
    }
    let dim = common_dim(track)?;
    let n = track.len();
    let half = window / 2;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let h = half.min(i).min(n - 1 - i);
        let slice = &track[i - h..=i + h];
        out.push(Position::centroid(slice.iter()).expect("non-empty window"));
    }
    debug_assert!(out.iter().all(|p| p.dim() == dim));
    Ok(out)
}
