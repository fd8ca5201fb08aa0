//! Ranging performance bounds for multicarrier signals.
//!
//! Works on a discrete baseband spectrum: equivalent bandwidth, the
//! Cramer-Rao lower bound on time-of-arrival range variance, the signal
//! autocorrelation, the Ziv-Zakai lower bound (which keeps the low-SNR
//! threshold effect the CRLB misses), and the bandwidth-limited TDoA error
//! floor.

use crate::real::{rf, Real};
use num_complex::Complex;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, thiserror::Error)]
pub enum BoundsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("spectrum carries no energy")]
    ZeroEnergy,
    #[error("equivalent bandwidth is zero; the spectrum carries no delay information")]
    ZeroEquivalentBandwidth,
}

/// Baseband multicarrier spectrum: one complex amplitude per subcarrier at
/// indices `-(N-1)/2 ..= (N-1)/2`, `N` odd, spaced `subcarrier_spacing` Hz.
#[derive(Clone, Debug)]
pub struct DiscreteSpectrum<R: Real> {
    amplitudes: Vec<Complex<R>>,
    subcarrier_spacing: R,
}

impl<R: Real> DiscreteSpectrum<R> {
    pub fn new(amplitudes: Vec<Complex<R>>, subcarrier_spacing: R) -> Result<Self, BoundsError> {
        if amplitudes.is_empty() || amplitudes.len() % 2 == 0 {
            return Err(BoundsError::InvalidParameter(format!(
                "subcarrier count must be odd and positive, got {}",
                amplitudes.len()
            )));
        }
        if !(subcarrier_spacing > R::zero()) || !subcarrier_spacing.is_finite_real() {
            return Err(BoundsError::InvalidParameter(
                "subcarrier spacing must be positive and finite".into(),
            ));
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite_real() || !a.im.is_finite_real())
        {
            return Err(BoundsError::InvalidParameter(
                "amplitudes must be finite".into(),
            ));
        }
        Ok(Self { amplitudes, subcarrier_spacing })
    }

    /// Unit amplitude on every subcarrier.
    pub fn flat(n: usize, subcarrier_spacing: R) -> Result<Self, BoundsError> {
        Self::new(vec![Complex::new(R::one(), R::zero()); n], subcarrier_spacing)
    }

    /// All energy on the two edge subcarriers (on the single carrier when
    /// `n == 1`); the extremal allocation for the equivalent bandwidth.
    pub fn edge(n: usize, subcarrier_spacing: R) -> Result<Self, BoundsError> {
        let mut amplitudes = vec![Complex::new(R::zero(), R::zero()); n];
        if let Some(first) = amplitudes.first_mut() {
            *first = Complex::new(R::one(), R::zero());
        }
        if let Some(last) = amplitudes.last_mut() {
            *last = Complex::new(R::one(), R::zero());
        }
        Self::new(amplitudes, subcarrier_spacing)
    }

    /// Builds from per-subcarrier power values (`|S_l|^2`).
    pub fn from_power(powers: &[R], subcarrier_spacing: R) -> Result<Self, BoundsError> {
        if powers.iter().any(|p| *p < R::zero()) {
            return Err(BoundsError::InvalidParameter(
                "power values must be non-negative".into(),
            ));
        }
        let amplitudes = powers
            .iter()
            .map(|p| Complex::new(p.sqrt(), R::zero()))
            .collect();
        Self::new(amplitudes, subcarrier_spacing)
    }

    pub fn n(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn subcarrier_spacing(&self) -> R {
        self.subcarrier_spacing
    }

    /// Occupied bandwidth `N * delta_f`.
    pub fn bandwidth(&self) -> R {
        rf::<R>(self.n() as f64) * self.subcarrier_spacing
    }

    /// Iterates `(l, |S_l|^2)` over the symmetric index set.
    fn powers(&self) -> impl Iterator<Item = (i64, R)> + '_ {
        let half = (self.amplitudes.len() as i64 - 1) / 2;
        self.amplitudes
            .iter()
            .enumerate()
            .map(move |(i, a)| (i as i64 - half, a.norm_sqr()))
    }

    pub fn total_power(&self) -> R {
        self.powers().map(|(_, p)| p).fold(R::zero(), |a, b| a + b)
    }
}

/// Which bound a [`BoundResult`] carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    Crlb,
    Zzlb,
}

/// A variance bound with its standard deviation, both in meters.
#[derive(Clone, Copy, Debug)]
pub struct BoundResult<R: Real> {
    pub variance: R,
    pub std: R,
    pub kind: BoundKind,
}

impl<R: Real> BoundResult<R> {
    fn new(variance: R, kind: BoundKind) -> Self {
        Self { variance, std: variance.sqrt(), kind }
    }
}

/// Gaussian tail function `Q(x) = P(N(0,1) > x)`.
pub fn q_function<R: Real>(x: R) -> R {
    let xf = x.as_f64();
    rf(0.5 * statrs::function::erf::erfc(xf / std::f64::consts::SQRT_2))
}

/// Squared equivalent bandwidth: the energy-weighted second moment of the
/// subcarrier index, `delta_f^2 * sum(l^2 |S_l|^2) / sum(|S_l|^2)`.
pub fn equivalent_bandwidth_sq<R: Real>(spec: &DiscreteSpectrum<R>) -> Result<R, BoundsError> {
    let mut energy = R::zero();
    let mut second = R::zero();
    for (l, p) in spec.powers() {
        energy += p;
        second += rf::<R>((l * l) as f64) * p;
    }
    if !(energy > R::zero()) {
        return Err(BoundsError::ZeroEnergy);
    }
    let df = spec.subcarrier_spacing;
    Ok(df * df * second / energy)
}

/// Range-estimation CRLB: `c0^2 / (8 pi^2 beta^2 (Es/N0))`.
pub fn crlb_range_variance<R: Real>(
    spec: &DiscreteSpectrum<R>,
    es_over_n0: R,
) -> Result<BoundResult<R>, BoundsError> {
    if !(es_over_n0 > R::zero()) || !es_over_n0.is_finite_real() {
        return Err(BoundsError::InvalidParameter(
            "Es/N0 must be positive and finite".into(),
        ));
    }
    let beta_sq = equivalent_bandwidth_sq(spec)?;
    if !(beta_sq > R::zero()) {
        return Err(BoundsError::ZeroEquivalentBandwidth);
    }
    let c0 = rf::<R>(SPEED_OF_LIGHT);
    let pi = rf::<R>(std::f64::consts::PI);
    let variance = c0 * c0 / (rf::<R>(8.0) * pi * pi * beta_sq * es_over_n0);
    Ok(BoundResult::new(variance, BoundKind::Crlb))
}

/// Normalized autocorrelation of the signal,
/// `phi(tau) = sum(|S_l|^2 e^{j 2 pi l delta_f tau}) / sum(|S_l|^2)`.
///
/// Normalizing by the total power (rather than by the energy, which carries
/// a 1/B factor) keeps `phi(0) = 1`, which the Ziv-Zakai integrand needs so
/// its Q argument vanishes at zero offset.
pub fn autocorrelation<R: Real>(
    spec: &DiscreteSpectrum<R>,
    tau: R,
) -> Result<Complex<R>, BoundsError> {
    let energy = spec.total_power();
    if !(energy > R::zero()) {
        return Err(BoundsError::ZeroEnergy);
    }
    let two_pi = rf::<R>(std::f64::consts::TAU);
    let mut acc = Complex::new(R::zero(), R::zero());
    for (l, p) in spec.powers() {
        let phase = two_pi * rf::<R>(l as f64) * spec.subcarrier_spacing * tau;
        acc += Complex::new(phase.cos(), phase.sin()) * p;
    }
    Ok(acc / energy)
}

/// How the SNR and the autocorrelation gap combine inside the Q function of
/// the Ziv-Zakai integrand. The printed form of the bound puts the radical
/// over the SNR alone; the standard-literature form puts it over the whole
/// product. The distinction matters: with `AsPrinted` the bound's ratio to
/// the CRLB grows like `sqrt(2 SNR / pi)` at high SNR, while
/// `SqrtOfProduct` recovers the classical convergence onto the CRLB.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QArgMode {
    /// `sqrt(Es/N0) * (1 - Re phi(tau))` - the default.
    #[default]
    AsPrinted,
    /// `sqrt((Es/N0) * (1 - Re phi(tau)))`.
    SqrtOfProduct,
}

/// Ziv-Zakai bound on range variance with the default Q-argument reading;
/// see [`zzlb_range_variance_with_mode`].
pub fn zzlb_range_variance<R: Real>(
    spec: &DiscreteSpectrum<R>,
    es_over_n0: R,
    t_obs: R,
    quadrature_points: usize,
) -> Result<BoundResult<R>, BoundsError> {
    zzlb_range_variance_with_mode(spec, es_over_n0, t_obs, quadrature_points, QArgMode::default())
}

/// Ziv-Zakai bound on range variance:
/// `c0^2 * integral_0^T_o of tau (1 - tau/T_o) Q(arg(tau)) d tau`
/// for a delay prior uniform over an interval of length `t_obs`.
///
/// The real part of the autocorrelation enters the Q argument; `mode`
/// selects its grouping (see [`QArgMode`]). Integration is adaptive
/// composite Simpson over a base grid of `quadrature_points` panels (at
/// least 64): the Q factor puts a sharp knee near zero offset at high SNR,
/// and the refinement concentrates points there.
pub fn zzlb_range_variance_with_mode<R: Real>(
    spec: &DiscreteSpectrum<R>,
    es_over_n0: R,
    t_obs: R,
    quadrature_points: usize,
    mode: QArgMode,
) -> Result<BoundResult<R>, BoundsError> {
    if !(es_over_n0 >= R::zero()) || !es_over_n0.is_finite_real() {
        return Err(BoundsError::InvalidParameter(
            "Es/N0 must be non-negative and finite".into(),
        ));
    }
    if !(t_obs > R::zero()) || !t_obs.is_finite_real() {
        return Err(BoundsError::InvalidParameter(
            "observation interval must be positive and finite".into(),
        ));
    }
    if quadrature_points < 64 {
        return Err(BoundsError::InvalidParameter(format!(
            "quadrature_points must be at least 64, got {quadrature_points}"
        )));
    }
    let energy = spec.total_power();
    if !(energy > R::zero()) {
        return Err(BoundsError::ZeroEnergy);
    }

    // Fold the symmetric index pairs so each cosine is evaluated once.
    let half = (spec.n() as i64 - 1) / 2;
    let mut folded: Vec<(f64, R)> = Vec::with_capacity(half as usize + 1);
    {
        let mut by_index = vec![R::zero(); half as usize + 1];
        for (l, p) in spec.powers() {
            by_index[l.unsigned_abs() as usize] += p;
        }
        for (l, p) in by_index.into_iter().enumerate() {
            folded.push((l as f64, p));
        }
    }
    let two_pi = rf::<R>(std::f64::consts::TAU);
    let df = spec.subcarrier_spacing;
    let sqrt_snr = es_over_n0.sqrt();
    let integrand = move |tau: R| -> R {
        let mut re = R::zero();
        for (l, p) in &folded {
            re += *p * (two_pi * rf::<R>(*l) * df * tau).cos();
        }
        let gap = (R::one() - re / energy).max(R::zero());
        let arg = match mode {
            QArgMode::AsPrinted => sqrt_snr * gap,
            QArgMode::SqrtOfProduct => (es_over_n0 * gap).sqrt(),
        };
        tau * (R::one() - tau / t_obs) * q_function(arg)
    };

    let c0 = rf::<R>(SPEED_OF_LIGHT);
    let integral = adaptive_simpson(&integrand, R::zero(), t_obs, quadrature_points);
    Ok(BoundResult::new(c0 * c0 * integral, BoundKind::Zzlb))
}

/// Composite Simpson over `panels` base panels with recursive bisection
/// wherever the local Richardson error estimate stays above tolerance.
fn adaptive_simpson<R: Real>(f: &dyn Fn(R) -> R, a: R, b: R, panels: usize) -> R {
    let width = (b - a) / rf::<R>(panels as f64);
    // Coarse pass fixes the refinement tolerance scale.
    let mut coarse = R::zero();
    let mut cache: Vec<(R, R, R)> = Vec::with_capacity(panels);
    for k in 0..panels {
        let lo = a + width * rf::<R>(k as f64);
        let hi = lo + width;
        let mid = (lo + hi) * rf::<R>(0.5);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        coarse += (flo + rf::<R>(4.0) * fmid + fhi) * width / rf::<R>(6.0);
        cache.push((flo, fmid, fhi));
    }
    let eps = coarse.abs().max(rf(1e-300)) * rf::<R>(1e-10) / rf::<R>(panels as f64);

    let mut total = R::zero();
    for (k, (flo, fmid, fhi)) in cache.into_iter().enumerate() {
        let lo = a + width * rf::<R>(k as f64);
        let hi = lo + width;
        let whole = (flo + rf::<R>(4.0) * fmid + fhi) * width / rf::<R>(6.0);
        total += refine(f, lo, hi, flo, fmid, fhi, whole, eps, 20);
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn refine<R: Real>(
    f: &dyn Fn(R) -> R,
    a: R,
    b: R,
    fa: R,
    fm: R,
    fb: R,
    whole: R,
    eps: R,
    depth: usize,
) -> R {
    let m = (a + b) * rf::<R>(0.5);
    let lm = (a + m) * rf::<R>(0.5);
    let rm = (m + b) * rf::<R>(0.5);
    let flm = f(lm);
    let frm = f(rm);
    let h = (b - a) * rf::<R>(0.5);
    let left = (fa + rf::<R>(4.0) * flm + fm) * h / rf::<R>(6.0);
    let right = (fm + rf::<R>(4.0) * frm + fb) * h / rf::<R>(6.0);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= rf::<R>(15.0) * eps {
        return left + right + delta / rf::<R>(15.0);
    }
    let half_eps = eps * rf::<R>(0.5);
    refine(f, a, m, fa, flm, fm, left, half_eps, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, half_eps, depth - 1)
}

/// Bandwidth-limited TDoA error floor: `c0 / BW` per axis, `sqrt(2) c0 / BW`
/// across two axes.
pub fn tdoa_error_floor<R: Real>(bandwidth: R, dims: usize) -> Result<R, BoundsError> {
    if !(bandwidth > R::zero()) || !bandwidth.is_finite_real() {
        return Err(BoundsError::InvalidParameter(
            "bandwidth must be positive and finite".into(),
        ));
    }
    let per_axis = rf::<R>(SPEED_OF_LIGHT) / bandwidth;
    match dims {
        1 => Ok(per_axis),
        2 => Ok(rf::<R>(std::f64::consts::SQRT_2) * per_axis),
        _ => Err(BoundsError::InvalidParameter(format!(
            "dims must be 1 or 2, got {dims}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const DF: f64 = 15_000.0;

    fn flat(n: usize) -> DiscreteSpectrum<f64> {
        DiscreteSpectrum::flat(n, DF).unwrap()
    }

    #[test]
    fn spectrum_validation() {
        assert!(DiscreteSpectrum::<f64>::flat(0, DF).is_err());
        assert!(DiscreteSpectrum::<f64>::flat(4, DF).is_err());
        assert!(DiscreteSpectrum::<f64>::flat(3, 0.0).is_err());
        assert!(DiscreteSpectrum::from_power(&[1.0, -0.5, 1.0], DF).is_err());
        let s = flat(1201);
        assert_relative_eq!(s.bandwidth(), 1201.0 * DF);
    }

    #[test]
    fn equivalent_bandwidth_matches_hand_values() {
        // Single carrier: no spread, no delay information.
        assert_eq!(equivalent_bandwidth_sq(&flat(1)).unwrap(), 0.0);
        // Three flat carriers: sum l^2 = 2 over 3 carriers.
        assert_relative_eq!(
            equivalent_bandwidth_sq(&flat(3)).unwrap(),
            DF * DF * 2.0 / 3.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(equivalent_bandwidth_sq(&flat(3)).unwrap(), 1.5e8);
        // Edge allocation is the extremal spread.
        let n = 9;
        let edge = DiscreteSpectrum::<f64>::edge(n, DF).unwrap();
        let half = ((n - 1) / 2) as f64;
        assert_relative_eq!(
            equivalent_bandwidth_sq(&edge).unwrap(),
            DF * DF * half * half,
            max_relative = 1e-15
        );
        for k in [1usize, 3, 5, 7, 9] {
            let s = flat(k);
            assert!(equivalent_bandwidth_sq(&s).unwrap() <= DF * DF * half * half + 1e-9);
        }
        // Zero energy is rejected.
        let zero = DiscreteSpectrum::from_power(&[0.0, 0.0, 0.0], DF).unwrap();
        assert!(matches!(equivalent_bandwidth_sq(&zero), Err(BoundsError::ZeroEnergy)));
    }

    #[test]
    fn crlb_scalings_and_independent_evaluation() {
        let s = flat(1201);
        let base = crlb_range_variance(&s, 10.0).unwrap();
        let double_snr = crlb_range_variance(&s, 20.0).unwrap();
        assert_relative_eq!(double_snr.variance, base.variance / 2.0, max_relative = 1e-14);
        assert_relative_eq!(base.std, base.variance.sqrt());
        assert_eq!(base.kind, BoundKind::Crlb);

        // Doubling beta^2 at fixed SNR: scale the spacing by sqrt(2).
        let wider = DiscreteSpectrum::<f64>::flat(1201, DF * 2.0_f64.sqrt()).unwrap();
        let half_var = crlb_range_variance(&wider, 10.0).unwrap();
        assert_relative_eq!(half_var.variance, base.variance / 2.0, max_relative = 1e-12);

        // Independent evaluation: integer index sum via the closed form
        // n(n+1)(2n+1)/6, then the bound assembled from scratch.
        let half = 600u64;
        let sum_l2 = (half * (half + 1) * (2 * half + 1) / 3) as f64; // doubled one-sided sum
        assert_eq!(sum_l2, 144_360_200.0);
        let beta_sq = DF * DF * sum_l2 / 1201.0;
        let expect = SPEED_OF_LIGHT * SPEED_OF_LIGHT
            / (8.0 * std::f64::consts::PI.powi(2) * beta_sq * 10.0);
        assert_relative_eq!(base.variance, expect, max_relative = 1e-12);

        // Single carrier carries no delay information under this bound.
        assert!(matches!(
            crlb_range_variance(&flat(1), 10.0),
            Err(BoundsError::ZeroEquivalentBandwidth)
        ));
        assert!(crlb_range_variance(&s, 0.0).is_err());
    }

    #[test]
    fn autocorrelation_hand_values() {
        let s = flat(3);
        let at_zero = autocorrelation(&s, 0.0).unwrap();
        assert_relative_eq!(at_zero.re, 1.0);
        assert_relative_eq!(at_zero.im, 0.0);
        // Discrete spectrum: periodic with 1/delta_f.
        let at_period = autocorrelation(&s, 1.0 / DF).unwrap();
        assert_relative_eq!(at_period.re, 1.0, max_relative = 1e-12);
        // Three-term null: (1 + 2 cos(2 pi / 3)) / 3 = 0.
        let at_third = autocorrelation(&s, 1.0 / (3.0 * DF)).unwrap();
        assert!(at_third.re.abs() < 1e-15, "{}", at_third.re);
        assert!(at_third.im.abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn autocorrelation_is_bounded_and_hermitian(
            powers in proptest::collection::vec(0.0_f64..10.0, 1..6),
            tau_ns in -1e5_f64..1e5,
        ) {
            let mut p = powers.clone();
            if p.len() % 2 == 0 {
                p.push(1.0);
            }
            if p.iter().sum::<f64>() <= 0.0 {
                p[0] = 1.0;
            }
            let s = DiscreteSpectrum::from_power(&p, DF).unwrap();
            let tau = tau_ns * 1e-9;
            let phi = autocorrelation(&s, tau).unwrap();
            prop_assert!(phi.norm() <= 1.0 + 1e-12);
            let mirrored = autocorrelation(&s, -tau).unwrap();
            prop_assert!((phi.re - mirrored.re).abs() < 1e-12);
            prop_assert!((phi.im + mirrored.im).abs() < 1e-12);
        }
    }

    #[test]
    fn zzlb_low_snr_limit_is_the_prior_variance() {
        let s = flat(1201);
        let t_obs = 1e-6;
        let prior = SPEED_OF_LIGHT * SPEED_OF_LIGHT * t_obs * t_obs / 12.0;
        for mode in [QArgMode::AsPrinted, QArgMode::SqrtOfProduct] {
            let b = zzlb_range_variance_with_mode(&s, 1e-12, t_obs, 64, mode).unwrap();
            assert_relative_eq!(b.variance, prior, max_relative = 1e-3);
            assert_eq!(b.kind, BoundKind::Zzlb);
        }
        // Exactly zero SNR: Q(0) = 1/2, Simpson exact on the quadratic.
        let b = zzlb_range_variance(&s, 0.0, t_obs, 64).unwrap();
        assert_relative_eq!(b.variance, prior, max_relative = 1e-12);
    }

    #[test]
    fn zzlb_vanishes_at_extreme_snr_and_stays_in_range() {
        let s = flat(101);
        let t_obs = 1e-6;
        let prior = SPEED_OF_LIGHT * SPEED_OF_LIGHT * t_obs * t_obs / 12.0;
        let tiny = zzlb_range_variance_with_mode(
            &s,
            1e12,
            t_obs,
            256,
            QArgMode::SqrtOfProduct,
        )
        .unwrap();
        assert!(tiny.variance < prior * 1e-6);
        for snr in [0.0, 1e-3, 1.0, 1e3, 1e9] {
            for mode in [QArgMode::AsPrinted, QArgMode::SqrtOfProduct] {
                let b = zzlb_range_variance_with_mode(&s, snr, t_obs, 64, mode).unwrap();
                assert!(b.variance >= 0.0);
                assert!(b.variance <= prior * (1.0 + 1e-9), "snr {snr}: {}", b.variance);
            }
        }
    }

    #[test]
    fn zzlb_is_monotone_in_snr() {
        let s = flat(101);
        let t_obs = 1e-6;
        for mode in [QArgMode::AsPrinted, QArgMode::SqrtOfProduct] {
            let mut last = f64::INFINITY;
            for k in 0..20 {
                let snr = 10f64.powf(-6.0 + 0.6 * k as f64);
                let b = zzlb_range_variance_with_mode(&s, snr, t_obs, 128, mode).unwrap();
                assert!(
                    b.variance <= last * (1.0 + 1e-9),
                    "mode {mode:?}, snr {snr}: {} > {last}",
                    b.variance
                );
                last = b.variance;
            }
        }
    }

    #[test]
    fn zzlb_high_snr_behavior_depends_on_the_q_argument_grouping() {
        let s = flat(1201);
        let t_obs = 1e-6;
        let snr = 1e4;
        let crlb = crlb_range_variance(&s, snr).unwrap().variance;
        // The product grouping converges onto the CRLB...
        let grouped =
            zzlb_range_variance_with_mode(&s, snr, t_obs, 256, QArgMode::SqrtOfProduct)
                .unwrap()
                .variance;
        let ratio = grouped / crlb;
        assert!(ratio < 1.1, "grouped/crlb = {ratio}");
        assert!(ratio > 0.9, "grouped/crlb = {ratio}");
        // ...while the printed grouping keeps a sqrt(2 SNR / pi) excess.
        let printed = zzlb_range_variance_with_mode(&s, snr, t_obs, 256, QArgMode::AsPrinted)
            .unwrap()
            .variance;
        let printed_ratio = printed / crlb;
        let predicted = (2.0 * snr / std::f64::consts::PI).sqrt();
        assert!(
            printed_ratio > predicted * 0.5 && printed_ratio < predicted * 2.0,
            "printed/crlb = {printed_ratio}, predicted {predicted}"
        );
    }

    #[test]
    fn zzlb_shows_the_low_snr_threshold_effect() {
        // Around 0 dB the ambiguity term dominates and the bound sits far
        // above the CRLB.
        let s = flat(1201);
        let crlb = crlb_range_variance(&s, 1.0).unwrap().variance;
        let zzlb =
            zzlb_range_variance_with_mode(&s, 1.0, 1e-6, 256, QArgMode::SqrtOfProduct)
                .unwrap()
                .variance;
        assert!(zzlb / crlb > 10.0, "ratio {}", zzlb / crlb);
    }

    #[test]
    fn zzlb_quadrature_is_converged_at_the_base_grid() {
        let s = flat(101);
        for mode in [QArgMode::AsPrinted, QArgMode::SqrtOfProduct] {
            let a = zzlb_range_variance_with_mode(&s, 100.0, 1e-6, 256, mode)
                .unwrap()
                .variance;
            let b = zzlb_range_variance_with_mode(&s, 100.0, 1e-6, 512, mode)
                .unwrap()
                .variance;
            assert!(
                (a - b).abs() <= 1e-6 * a.abs().max(1e-300),
                "mode {mode:?}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn zzlb_validates_inputs() {
        let s = flat(3);
        assert!(zzlb_range_variance(&s, -1.0, 1e-6, 64).is_err());
        assert!(zzlb_range_variance(&s, 1.0, 0.0, 64).is_err());
        assert!(zzlb_range_variance(&s, 1.0, 1e-6, 32).is_err());
        let zero = DiscreteSpectrum::from_power(&[0.0; 3], DF).unwrap();
        assert!(matches!(
            zzlb_range_variance(&zero, 1.0, 1e-6, 64),
            Err(BoundsError::ZeroEnergy)
        ));
    }

    #[test]
    fn q_function_reference_points() {
        assert_relative_eq!(q_function(0.0), 0.5);
        assert_relative_eq!(q_function(1.0), 0.158_655_253_931_457_05, max_relative = 1e-12);
        assert!(q_function(8.0) < 1e-15);
        assert_relative_eq!(q_function(-1.0), 1.0 - q_function(1.0), max_relative = 1e-12);
    }

    #[test]
    fn tdoa_floor_matches_the_quoted_scale() {
        let two_d = tdoa_error_floor(4e6, 2).unwrap();
        assert!((100.0..=110.0).contains(&two_d), "{two_d}");
        let one_d = tdoa_error_floor(4e6, 1).unwrap();
        assert_relative_eq!(one_d, SPEED_OF_LIGHT / 4e6, max_relative = 1e-15);
        assert!((one_d - 74.948).abs() < 0.01);
        // Doubling the bandwidth halves the floor.
        assert_relative_eq!(
            tdoa_error_floor(8e6, 2).unwrap(),
            two_d / 2.0,
            max_relative = 1e-15
        );
        assert!(tdoa_error_floor(0.0, 2).is_err());
        assert!(tdoa_error_floor(4e6, 3).is_err());
    }
}
