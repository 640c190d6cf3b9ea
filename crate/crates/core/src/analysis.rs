//! Closed-form travelling waves, residual checks, error norms and
//! measurements of frequency and phase velocity.

use std::f64::consts::{PI, SQRT_2};

use crate::model::{BoundarySpec, Field, Grid1D, InitialCondition, ModelParams};
use crate::ode::TimeSeries;
use crate::pde;
use crate::{Error, Result};

/// Sign of the spatial term in the phase `omega t + sign * k x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `omega t + k x`: travels towards negative `x`.
    Plus,
    /// `omega t - k x`: travels towards positive `x`.
    Minus,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::Plus => Direction::Minus,
            Direction::Minus => Direction::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dims {
    One,
    /// Phase `omega t + k (x + y + z)`.
    Three,
}

/// `A sin(omega t + sign * k x)`, or its 3-D plane-wave analogue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveSpec {
    pub amplitude: f64,
    pub omega: f64,
    pub k: f64,
    pub direction: Direction,
    pub dims: Dims,
}

impl PlaneWaveSpec {
    pub fn new(amplitude: f64, omega: f64, k: f64) -> Self {
        PlaneWaveSpec {
            amplitude,
            omega,
            k,
            direction: Direction::Plus,
            dims: Dims::One,
        }
    }

    /// The exact solution `sin(omega0 t + sqrt(2) x)`.
    pub fn exact(omega0: f64) -> Self {
        Self::new(1.0, omega0, SQRT_2)
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn three_dimensional(mut self) -> Self {
        self.dims = Dims::Three;
        self
    }

    pub fn is_valid(&self) -> bool {
        self.omega > 0.0 && self.k.is_finite() && self.amplitude >= 0.0
    }

    /// Phase velocity `omega / k` with the sign of the propagation direction.
    pub fn phase_velocity(&self) -> f64 {
        -self.direction.sign() * self.omega / self.k
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k.abs()
    }

    fn phase(&self, x: f64, t: f64) -> f64 {
        self.omega * t + self.direction.sign() * self.k * x
    }

    fn phase_3d(&self, x: [f64; 3], t: f64) -> f64 {
        self.omega * t + self.direction.sign() * self.k * (x[0] + x[1] + x[2])
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.amplitude * self.phase(x, t).sin()
    }

    pub fn time_derivative(&self, x: f64, t: f64) -> f64 {
        self.amplitude * self.omega * self.phase(x, t).cos()
    }

    pub fn value_3d(&self, x: [f64; 3], t: f64) -> f64 {
        self.amplitude * self.phase_3d(x, t).sin()
    }

    /// Samples the wave over the mesh at time `t`.
    pub fn field(&self, grid: &Grid1D, t: f64) -> Field {
        Field::sample(grid, t, |x| self.value(x, t))
    }
}

/// Closed-form wave value; `x` is ignored past its first entry for 1-D specs.
pub fn analytic_wave(spec: &PlaneWaveSpec, x: &[f64], t: f64) -> f64 {
    match spec.dims {
        Dims::One => spec.value(x[0], t),
        Dims::Three => spec.value_3d([x[0], x[1], x[2]], t),
    }
}

/// `u_tt - (-omega0^2 u + eps (amp - u^2 - delta u_t^2) u_t + c mu u + mu lap u)`
/// evaluated analytically on the wave, with `c = 2` in 1-D and `c = 6` in 3-D.
///
/// For a 3-D spec the point is `(x, x, x)`; the residual depends on the
/// position only through the phase.
pub fn residual_pointwise(spec: &PlaneWaveSpec, p: &ModelParams, x: f64, t: f64) -> f64 {
    match spec.dims {
        Dims::One => residual_terms(spec, p, spec.phase(x, t), 1.0),
        Dims::Three => residual_terms(spec, p, spec.phase_3d([x, x, x], t), 3.0),
    }
}

pub fn residual_pointwise_3d(spec: &PlaneWaveSpec, p: &ModelParams, x: [f64; 3], t: f64) -> f64 {
    let dims = match spec.dims {
        Dims::One => 1.0,
        Dims::Three => 3.0,
    };
    residual_terms(spec, p, spec.phase_3d(x, t), dims)
}

fn residual_terms(spec: &PlaneWaveSpec, p: &ModelParams, phase: f64, dims: f64) -> f64 {
    let (s, c) = phase.sin_cos();
    let a = spec.amplitude;
    let u = a * s;
    let u_t = a * spec.omega * c;
    let u_tt = -spec.omega * spec.omega * u;
    let laplacian = -dims * spec.k * spec.k * u;
    let rhs = -p.omega0 * p.omega0 * u
        + p.epsilon * (p.amp - u * u - p.delta * u_t * u_t) * u_t
        + 2.0 * dims * p.mu * u
        + p.mu * laplacian;
    u_tt - rhs
}

/// Coefficient `(amp - A^2) A omega0` of the unmatched `eps cos` term left
/// when `A sin(omega0 t + sqrt(2) x)` is substituted into the equation whose
/// damping bracket is `amp - u^2 - u_t^2 / omega0^2`.
pub fn amplitude_consistency(amp_param: f64, amp_wave: f64, omega0: f64) -> f64 {
    (amp_param - amp_wave * amp_wave) * amp_wave * omega0
}

/// Discrete error norms between two fields on the same grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// `sqrt(dx * sum e_i^2)`
    pub l2: f64,
    pub linf: f64,
    pub at_time: f64,
}

pub fn error_norms(computed: &Field, reference: &Field, grid: &Grid1D) -> Result<ErrorReport> {
    let expected = grid.nx() + 1;
    for len in [computed.len(), reference.len()] {
        if len != expected {
            return Err(Error::GridMismatch { expected, got: len });
        }
    }
    Ok(norms(
        computed
            .values()
            .iter()
            .zip(reference.values())
            .map(|(a, b)| a - b),
        grid.dx(),
        computed.time(),
    ))
}

/// Error norms of `computed` against a closed form `reference(x)`.
pub fn error_against(
    computed: &Field,
    grid: &Grid1D,
    reference: impl Fn(f64) -> f64,
) -> Result<ErrorReport> {
    if computed.len() != grid.nx() + 1 {
        return Err(Error::GridMismatch {
            expected: grid.nx() + 1,
            got: computed.len(),
        });
    }
    Ok(norms(
        computed
            .values()
            .iter()
            .enumerate()
            .map(|(i, u)| u - reference(grid.x(i))),
        grid.dx(),
        computed.time(),
    ))
}

fn norms(diffs: impl Iterator<Item = f64>, dx: f64, at_time: f64) -> ErrorReport {
    let (sum_sq, linf) = diffs.fold((0.0, 0.0f64), |(s, m), e| (s + e * e, m.max(e.abs())));
    ErrorReport {
        l2: (dx * sum_sq).sqrt(),
        linf,
        at_time,
    }
}

/// Least-squares slope of `ln(error)` against `ln(h)`.
pub fn convergence_order(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::DegenerateInput(
            "need at least two (h, error) pairs".into(),
        ));
    }
    for w in samples.windows(2) {
        if !(w[1].0 < w[0].0) {
            return Err(Error::DegenerateInput(
                "h must be strictly decreasing".into(),
            ));
        }
    }
    if samples
        .iter()
        .any(|&(h, e)| !(h > 0.0 && e > 0.0 && h.is_finite() && e.is_finite()))
    {
        return Err(Error::DegenerateInput(
            "h and errors must be positive and finite".into(),
        ));
    }
    let n = samples.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples.iter().map(|&(h, e)| (h.ln(), e.ln())).unzip();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - x_mean) * (y - y_mean);
        sxx += (x - x_mean) * (x - x_mean);
    }
    Ok(sxy / sxx)
}

/// Angular frequency from the mean spacing of alternate zero crossings,
/// each located by linear interpolation between samples.
pub fn measure_frequency(ts: &TimeSeries) -> Result<f64> {
    let crossings = zero_crossings(ts);
    if crossings.len() < 3 {
        return Err(Error::InsufficientCrossings {
            found: crossings.len(),
        });
    }
    let periods: Vec<f64> = crossings.windows(3).map(|w| w[2] - w[0]).collect();
    let mean = periods.iter().sum::<f64>() / periods.len() as f64;
    Ok(2.0 * PI / mean)
}

fn zero_crossings(ts: &TimeSeries) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..ts.len() {
        let (ua, ub) = (ts.values[i - 1], ts.values[i]);
        if (ua >= 0.0) != (ub >= 0.0) {
            let (ta, tb) = (ts.times[i - 1], ts.times[i]);
            out.push(ta - ua * (tb - ta) / (ub - ua));
        }
    }
    out
}

/// Peaks within this fraction of the correlation range of the global
/// maximum are treated as equally good.
const PEAK_TOLERANCE: f64 = 0.05;

/// Phase velocity from the circular cross-correlation of two periodic
/// snapshots. The shift is taken as the smallest-magnitude correlation peak
/// and refined by a parabola through the peak and its neighbours.
///
/// Both fields must come from a periodic solution (`u_0 == u_nx`) and the
/// wave must move less than half a wavelength between them.
pub fn measure_phase_velocity(s1: &Field, s2: &Field, grid: &Grid1D) -> Result<f64> {
    let expected = grid.nx() + 1;
    for len in [s1.len(), s2.len()] {
        if len != expected {
            return Err(Error::GridMismatch { expected, got: len });
        }
    }
    let dt = s2.time() - s1.time();
    if !(dt > 0.0) {
        return Err(Error::DegenerateInput(
            "second snapshot must be later than the first".into(),
        ));
    }
    let n = grid.nx();
    let a = demeaned(&s1.values()[..n]);
    let b = demeaned(&s2.values()[..n]);
    let corr: Vec<f64> = (0..n)
        .map(|s| (0..n).map(|i| a[i] * b[(i + s) % n]).sum())
        .collect();

    let cmax = corr.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cmin = corr.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = cmax - cmin;
    if !(range > 0.0) || !range.is_finite() {
        return Err(Error::AmbiguousPeak);
    }
    let signed = |s: usize| -> i64 {
        if s > n / 2 {
            s as i64 - n as i64
        } else {
            s as i64
        }
    };
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&s| {
            let c = corr[s];
            c >= corr[(s + n - 1) % n]
                && c >= corr[(s + 1) % n]
                && c >= cmax - PEAK_TOLERANCE * range
        })
        .collect();
    candidates.sort_by_key(|&s| signed(s).abs());
    let best = candidates[0];
    if 2 * signed(best).unsigned_abs() as usize >= n - 1 {
        return Err(Error::AmbiguousPeak);
    }
    if let Some(&other) = candidates.get(1) {
        let (sb, so) = (signed(best), signed(other));
        if sb.signum() != so.signum() && (sb.abs() - so.abs()).abs() <= 1 && sb != 0 {
            return Err(Error::AmbiguousPeak);
        }
    }
    let (cm, c0, cp) = (corr[(best + n - 1) % n], corr[best], corr[(best + 1) % n]);
    let curvature = cm - 2.0 * c0 + cp;
    let offset = if curvature < 0.0 {
        0.5 * (cm - cp) / curvature
    } else {
        0.0
    };
    let shift = (signed(best) as f64 + offset) * grid.dx();
    Ok(shift / dt)
}

fn demeaned(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

/// Deviation of a superposed two-wave solve from the sum of the closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionReport {
    pub times: Vec<f64>,
    /// L2 deviation at each snapshot time.
    pub deviation: Vec<f64>,
    /// Largest L2 error of either wave solved on its own.
    pub baseline: f64,
    pub max_deviation: f64,
    /// `10 * baseline`
    pub threshold: f64,
    /// First snapshot time at which the deviation exceeds the threshold.
    pub first_exceedance: Option<f64>,
}

impl SuperpositionReport {
    pub fn exceeded_within(&self, t: f64) -> bool {
        self.first_exceedance.is_some_and(|te| te <= t)
    }
}

/// Per-snapshot L2 error of a solve against the sum of closed-form waves.
fn wave_errors(
    p: &ModelParams,
    grid: &Grid1D,
    bc: &BoundarySpec,
    specs: &[PlaneWaveSpec],
    stride: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let ic = InitialCondition::superposed(specs.to_vec());
    let result = pde::solve(p, grid, &ic, bc, stride)?;
    let mut times = Vec::with_capacity(result.snapshots.len());
    let mut errors = Vec::with_capacity(result.snapshots.len());
    for snap in &result.snapshots {
        let t = snap.time();
        let report = error_against(snap, grid, |x| specs.iter().map(|s| s.value(x, t)).sum())?;
        times.push(t);
        errors.push(report.l2);
    }
    Ok((times, errors))
}

/// Solves each wave alone and then their sum, and reports how far the sum's
/// solution departs from the sum of the closed forms relative to ten times
/// the single-wave numerical error.
pub fn superposition_deviation(
    p: &ModelParams,
    grid: &Grid1D,
    bc: &BoundarySpec,
    right: &PlaneWaveSpec,
    left: &PlaneWaveSpec,
    stride: usize,
) -> Result<SuperpositionReport> {
    for spec in [right, left] {
        let residual = (0..16)
            .map(|j| {
                let x = 0.37 * j as f64;
                let t = 0.21 * j as f64;
                residual_pointwise(spec, p, x, t).abs()
            })
            .fold(0.0, f64::max);
        if residual > 1e-9 {
            return Err(Error::NotExactSolution { residual });
        }
    }
    let mut baseline: f64 = 0.0;
    for spec in [right, left] {
        let (_, errors) = wave_errors(p, grid, bc, std::slice::from_ref(spec), stride)?;
        baseline = errors.iter().cloned().fold(baseline, f64::max);
    }
    let (times, deviation) = wave_errors(p, grid, bc, &[*right, *left], stride)?;
    let threshold = 10.0 * baseline;
    let first_exceedance = times
        .iter()
        .zip(&deviation)
        .find(|(_, &d)| d > threshold)
        .map(|(&t, _)| t);
    let max_deviation = deviation.iter().cloned().fold(0.0, f64::max);
    Ok(SuperpositionReport {
        times,
        deviation,
        baseline,
        max_deviation,
        threshold,
        first_exceedance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::canonical_delta;

    #[test]
    fn analytic_wave_values() {
        let spec = PlaneWaveSpec::new(1.0, 1.0, SQRT_2);
        assert_eq!(analytic_wave(&spec, &[0.0], 0.0), 0.0);
        assert_eq!(analytic_wave(&spec, &[0.0], PI / 2.0), 1.0);
        let spec = PlaneWaveSpec::new(1.0, 2.0, SQRT_2);
        assert!(analytic_wave(&spec, &[PI / SQRT_2], 0.0).abs() < 1e-15);
        let spec3 = spec.three_dimensional();
        let v = analytic_wave(&spec3, &[0.1, 0.2, 0.3], 0.5);
        assert!((v - (1.0 + SQRT_2 * 0.6).sin()).abs() < 1e-15);
    }

    #[test]
    fn exact_wave_has_no_residual() {
        for &(omega0, eps, mu) in &[(1.0, 0.5, 1.0), (2.0, 1.0, SQRT_2), (0.7, 3.0, 0.0)] {
            let p = ModelParams::canonical(omega0, eps, mu);
            let spec = PlaneWaveSpec::exact(omega0);
            for j in 0..20 {
                let (x, t) = (0.31 * j as f64 - 2.0, 0.17 * j as f64);
                assert!(residual_pointwise(&spec, &p, x, t).abs() < 1e-12);
                let spec3 = spec.three_dimensional();
                assert!(residual_pointwise(&spec3, &p, x, t).abs() < 1e-12);
                assert!(residual_pointwise_3d(&spec3, &p, [x, 0.3, -t], t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_wavenumber_leaves_coupling_residual() {
        let p = ModelParams::canonical(1.0, 0.5, 1.0);
        let spec = PlaneWaveSpec::new(1.0, 1.0, 1.0);
        // phase pi/2 at x = 0
        let r = residual_pointwise(&spec, &p, 0.0, PI / 2.0);
        assert!((r + 1.0).abs() < 1e-12, "residual {r}");
    }

    #[test]
    fn amplitude_consistency_values() {
        assert_eq!(amplitude_consistency(1.0, 1.0, 1.7), 0.0);
        assert_eq!(amplitude_consistency(4.0, 2.0, 1.7), 0.0);
        assert_eq!(amplitude_consistency(2.0, 2.0, 1.5), -6.0);
        assert_eq!(amplitude_consistency(2.0, 0.0, 1.5), 0.0);
    }

    #[test]
    fn amplitude_consistency_matches_residual() {
        // The residual of A sin(xi) with bracket constant amp is
        // -eps * (amp - A^2) A omega0 cos(xi).
        let omega0 = 1.3;
        let p = canonical_delta(ModelParams::new(omega0, 0.8, 0.0, 0.6)).with_amp(2.0);
        for a in [0.5, 1.0, 2f64.sqrt(), 2.0] {
            let spec = PlaneWaveSpec::exact(omega0).with_amplitude(a);
            let coeff = amplitude_consistency(p.amp, a, omega0);
            let r = residual_pointwise(&spec, &p, 0.0, 0.0);
            assert!(
                (r + p.epsilon * coeff).abs() < 1e-12,
                "A={a}: {r} vs {coeff}"
            );
        }
    }

    #[test]
    fn norms_of_identical_and_offset_fields() {
        let g = Grid1D::from_counts(2.0, 1.0, 40, 10).unwrap();
        let f = Field::sample(&g, 0.0, |x| x.sin());
        let r = error_norms(&f, &f, &g).unwrap();
        assert_eq!((r.l2, r.linf), (0.0, 0.0));
        let c = 0.25;
        let shifted = Field::sample(&g, 0.0, |x| x.sin() + c);
        let r = error_norms(&shifted, &f, &g).unwrap();
        assert!((r.linf - c).abs() < 1e-15);
        let expected = c * (g.dx() * 41.0).sqrt();
        assert!((r.l2 - expected).abs() < 1e-14);
        let other = Grid1D::from_counts(2.0, 1.0, 20, 10).unwrap();
        assert!(matches!(
            error_norms(&f, &Field::sample(&other, 0.0, |x| x), &g),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn convergence_order_values() {
        let p = convergence_order(&[(0.1, 1e-2), (0.05, 2.5e-3)]).unwrap();
        assert!((p - 2.0).abs() < 1e-12);
        let p = convergence_order(&[(0.1, 1e-2), (0.05, 5e-3)]).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!(convergence_order(&[(0.1, 1e-2)]).is_err());
        assert!(convergence_order(&[(0.05, 1e-2), (0.1, 1e-3)]).is_err());
        assert!(convergence_order(&[(0.1, 0.0), (0.05, 1e-3)]).is_err());
    }

    #[test]
    fn frequency_of_sinusoid() {
        let times: Vec<f64> = (0..=10_000).map(|i| i as f64 * 1e-3).collect();
        let ts = TimeSeries::sample(times, |t| (2.0 * t).sin());
        let w = measure_frequency(&ts).unwrap();
        assert!((w - 2.0).abs() < 1e-3, "{w}");
        let w_scaled = measure_frequency(&ts.scaled(4.0)).unwrap();
        assert_eq!(w, w_scaled);
    }

    #[test]
    fn too_few_crossings() {
        let times: Vec<f64> = (0..100).map(|i| i as f64 * 0.01).collect();
        let ts = TimeSeries::sample(times, |t| (t - 0.5).sin());
        assert_eq!(
            measure_frequency(&ts),
            Err(Error::InsufficientCrossings { found: 1 })
        );
    }

    fn periodic_grid() -> Grid1D {
        Grid1D::from_counts(5.0 * PI * SQRT_2, 1.0, 512, 100).unwrap()
    }

    #[test]
    fn phase_velocity_of_closed_form() {
        let g = periodic_grid();
        for omega0 in [1.0, 2.0] {
            let spec = PlaneWaveSpec::exact(omega0);
            let (s1, s2) = (spec.field(&g, 0.3), spec.field(&g, 0.8));
            let v = measure_phase_velocity(&s1, &s2, &g).unwrap();
            let expected = omega0 / SQRT_2;
            assert!((v.abs() - expected).abs() / expected < 0.02, "{v}");
            assert!(v < 0.0);

            let back = spec.with_direction(Direction::Minus);
            let v2 =
                measure_phase_velocity(&back.field(&g, 0.3), &back.field(&g, 0.8), &g).unwrap();
            assert!(v2 > 0.0);
            assert!((v2 + v).abs() < 1e-9);
        }
    }

    #[test]
    fn phase_velocity_rejects_flat_and_half_wavelength_shift() {
        let g = periodic_grid();
        let flat = Field::sample(&g, 0.0, |_| 1.0);
        let later = Field::sample(&g, 1.0, |_| 1.0);
        assert_eq!(
            measure_phase_velocity(&flat, &later, &g),
            Err(Error::AmbiguousPeak)
        );

        // A single-wavelength sine shifted by exactly half its period.
        let spec = PlaneWaveSpec::new(1.0, 1.0, 2.0 * PI / g.length());
        let t_half = PI;
        let r = measure_phase_velocity(&spec.field(&g, 0.0), &spec.field(&g, t_half), &g);
        assert_eq!(r, Err(Error::AmbiguousPeak));
        assert!(measure_phase_velocity(&flat, &flat, &g).is_err());
    }
}
