//! Zero-dimensional oscillators and a fixed-step classical RK4 integrator.

use crate::model::ModelParams;
use crate::{Error, Result};

/// States larger than this in magnitude are treated as a blowup.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// Displacement and velocity of one oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OscState {
    pub u: f64,
    pub v: f64,
}

impl OscState {
    pub const fn new(u: f64, v: f64) -> Self {
        OscState { u, v }
    }
}

/// Complex amplitude of the slow Stuart-Landau reduction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexAmplitude {
    pub re: f64,
    pub im: f64,
}

impl ComplexAmplitude {
    pub const fn new(re: f64, im: f64) -> Self {
        ComplexAmplitude { re, im }
    }

    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// A state vector the RK4 integrator can advance.
///
/// Implementations must apply the same per-component arithmetic, so that a
/// stacked system reproduces its scalar parts bit for bit.
pub trait OdeState: Clone {
    /// `self + h * k`
    fn axpy(&self, h: f64, k: &Self) -> Self;
    /// `self + h / 6 * (k1 + 2 k2 + 2 k3 + k4)`
    fn rk4_combine(&self, h: f64, k1: &Self, k2: &Self, k3: &Self, k4: &Self) -> Self;
    /// Largest component magnitude; infinite if any component is not finite.
    fn max_abs(&self) -> f64;
}

#[inline]
fn combine(s: f64, h: f64, a: f64, b: f64, c: f64, d: f64) -> f64 {
    s + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
}

#[inline]
fn mag(x: f64) -> f64 {
    if x.is_finite() {
        x.abs()
    } else {
        f64::INFINITY
    }
}

impl OdeState for OscState {
    fn axpy(&self, h: f64, k: &Self) -> Self {
        OscState::new(self.u + h * k.u, self.v + h * k.v)
    }

    fn rk4_combine(&self, h: f64, k1: &Self, k2: &Self, k3: &Self, k4: &Self) -> Self {
        OscState::new(
            combine(self.u, h, k1.u, k2.u, k3.u, k4.u),
            combine(self.v, h, k1.v, k2.v, k3.v, k4.v),
        )
    }

    fn max_abs(&self) -> f64 {
        mag(self.u).max(mag(self.v))
    }
}

impl OdeState for ComplexAmplitude {
    fn axpy(&self, h: f64, k: &Self) -> Self {
        ComplexAmplitude::new(self.re + h * k.re, self.im + h * k.im)
    }

    fn rk4_combine(&self, h: f64, k1: &Self, k2: &Self, k3: &Self, k4: &Self) -> Self {
        ComplexAmplitude::new(
            combine(self.re, h, k1.re, k2.re, k3.re, k4.re),
            combine(self.im, h, k1.im, k2.im, k3.im, k4.im),
        )
    }

    fn max_abs(&self) -> f64 {
        mag(self.re).max(mag(self.im))
    }
}

impl OdeState for Vec<f64> {
    fn axpy(&self, h: f64, k: &Self) -> Self {
        self.iter().zip(k).map(|(s, k)| s + h * k).collect()
    }

    fn rk4_combine(&self, h: f64, k1: &Self, k2: &Self, k3: &Self, k4: &Self) -> Self {
        (0..self.len())
            .map(|i| combine(self[i], h, k1[i], k2[i], k3[i], k4[i]))
            .collect()
    }

    fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, &x| m.max(mag(x)))
    }
}

/// Acceleration of the van der Pol oscillator.
#[inline]
pub fn vdp_acceleration(u: f64, v: f64, p: &ModelParams) -> f64 {
    -p.omega0 * p.omega0 * u + p.epsilon * (1.0 - u * u) * v
}

/// Acceleration of the hybrid Rayleigh-van der Pol oscillator,
/// `-omega0^2 u + eps (1 - u^2) v - delta v^3`.
#[inline]
pub fn rvdp_acceleration(u: f64, v: f64, p: &ModelParams) -> f64 {
    -p.omega0 * p.omega0 * u + p.epsilon * (1.0 - u * u) * v - p.delta * v * v * v
}

/// The damping term of the continuum equation, with `delta` inside the
/// `epsilon` bracket: `eps (amp - u^2 - delta v^2) v`.
#[inline]
pub fn bracket_damping(u: f64, v: f64, p: &ModelParams) -> f64 {
    p.epsilon * (p.amp - u * u - p.delta * v * v) * v
}

pub fn rhs_vdp(s: &OscState, p: &ModelParams) -> OscState {
    OscState::new(s.v, vdp_acceleration(s.u, s.v, p))
}

pub fn rhs_rayleigh(s: &OscState, p: &ModelParams) -> OscState {
    OscState::new(
        s.v,
        -p.omega0 * p.omega0 * s.u + p.epsilon * (1.0 - s.v * s.v) * s.v,
    )
}

pub fn rhs_rvdp(s: &OscState, p: &ModelParams) -> OscState {
    OscState::new(s.v, rvdp_acceleration(s.u, s.v, p))
}

/// Right-hand side of the spatially homogeneous continuum equation,
/// `u'' = -(omega0^2 - 2 mu) u + eps (amp - u^2 - delta u'^2) u'`.
///
/// Use [`HomogeneousOscillator`] to have the oscillatory regime checked.
pub fn rhs_homogeneous(s: &OscState, p: &ModelParams) -> OscState {
    let w2 = p.omega0 * p.omega0 - 2.0 * p.mu;
    OscState::new(s.v, -w2 * s.u + bracket_damping(s.u, s.v, p))
}

/// `(eps / 2) (1 - |a|^2) a`
pub fn rhs_stuart_landau(a: &ComplexAmplitude, p: &ModelParams) -> ComplexAmplitude {
    let g = 0.5 * p.epsilon * (1.0 - (a.re * a.re + a.im * a.im));
    ComplexAmplitude::new(g * a.re, g * a.im)
}

/// Homogeneous mean-field oscillator, valid only when `omega0^2 > 2 mu`.
#[derive(Debug, Clone, Copy)]
pub struct HomogeneousOscillator {
    params: ModelParams,
}

impl HomogeneousOscillator {
    pub fn new(params: ModelParams) -> Result<Self> {
        let params = params.validate()?;
        homogeneous_frequency(&params)?;
        Ok(HomogeneousOscillator { params })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Angular frequency `sqrt(omega0^2 - 2 mu)` of the exact harmonic solution.
    pub fn frequency(&self) -> f64 {
        homogeneous_frequency(&self.params).expect("checked at construction")
    }

    /// The `delta` for which `sin(Omega t)` solves the equation exactly.
    pub fn exact_delta(&self) -> f64 {
        let w = self.frequency();
        1.0 / (w * w)
    }

    pub fn rhs(&self, s: &OscState) -> OscState {
        rhs_homogeneous(s, &self.params)
    }
}

/// `sqrt(omega0^2 - 2 mu)`, or `ImaginaryFrequency` when that is not real.
pub fn homogeneous_frequency(p: &ModelParams) -> Result<f64> {
    let w2 = p.omega0 * p.omega0 - 2.0 * p.mu;
    if w2 > 0.0 {
        Ok(w2.sqrt())
    } else {
        Err(Error::ImaginaryFrequency { value: w2 })
    }
}

/// States sampled on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &S {
        self.states.last().expect("trajectory is never empty")
    }

    /// Projects every state onto a scalar series.
    pub fn series(&self, f: impl Fn(&S) -> f64) -> TimeSeries {
        TimeSeries {
            times: self.times.clone(),
            values: self.states.iter().map(f).collect(),
        }
    }
}

impl Trajectory<OscState> {
    pub fn displacement(&self) -> TimeSeries {
        self.series(|s| s.u)
    }
}

/// Scalar samples `u(t)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(
            times.len(),
            values.len(),
            "times and values differ in length"
        );
        TimeSeries { times, values }
    }

    pub fn sample(times: Vec<f64>, f: impl Fn(f64) -> f64) -> Self {
        let values = times.iter().map(|&t| f(t)).collect();
        TimeSeries { times, values }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Samples with `t >= t0`.
    pub fn after(&self, t0: f64) -> TimeSeries {
        let start = self.times.partition_point(|&t| t < t0);
        TimeSeries {
            times: self.times[start..].to_vec(),
            values: self.values[start..].to_vec(),
        }
    }

    pub fn scaled(&self, c: f64) -> TimeSeries {
        TimeSeries {
            times: self.times.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// One classical RK4 step of an autonomous system.
pub fn rk4_step<S: OdeState>(rhs: &mut impl FnMut(&S) -> S, s: &S, dt: f64) -> S {
    let k1 = rhs(s);
    let k2 = rhs(&s.axpy(0.5 * dt, &k1));
    let k3 = rhs(&s.axpy(0.5 * dt, &k2));
    let k4 = rhs(&s.axpy(dt, &k3));
    s.rk4_combine(dt, &k1, &k2, &k3, &k4)
}

/// Integrates `s' = rhs(s)` with fixed-step RK4, recording every step.
pub fn integrate<S: OdeState>(
    rhs: impl FnMut(&S) -> S,
    s0: S,
    dt: f64,
    steps: usize,
) -> Result<Trajectory<S>> {
    integrate_strided(rhs, s0, dt, steps, 1)
}

/// Like [`integrate`] but records only every `stride`-th state (plus the
/// final one).
pub fn integrate_strided<S: OdeState>(
    mut rhs: impl FnMut(&S) -> S,
    s0: S,
    dt: f64,
    steps: usize,
    stride: usize,
) -> Result<Trajectory<S>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidStep(format!(
            "dt must be positive (got {dt})"
        )));
    }
    if steps == 0 || stride == 0 {
        return Err(Error::InvalidStep(
            "steps and stride must be at least 1".into(),
        ));
    }
    if s0.max_abs() > BLOWUP_THRESHOLD {
        return Err(Error::NumericalBlowup { step: 0 });
    }
    let capacity = steps / stride + 2;
    let mut times = Vec::with_capacity(capacity);
    let mut states = Vec::with_capacity(capacity);
    times.push(0.0);
    states.push(s0.clone());
    let mut s = s0;
    for n in 1..=steps {
        s = rk4_step(&mut rhs, &s, dt);
        if s.max_abs() > BLOWUP_THRESHOLD {
            return Err(Error::NumericalBlowup { step: n });
        }
        if n % stride == 0 || n == steps {
            times.push(n as f64 * dt);
            states.push(s.clone());
        }
    }
    Ok(Trajectory { times, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::measure_frequency;

    fn p(omega0: f64, epsilon: f64, delta: f64, mu: f64) -> ModelParams {
        ModelParams::new(omega0, epsilon, delta, mu)
    }

    #[test]
    fn vdp_values() {
        let q = p(1.0, 0.5, 0.0, 0.0);
        assert_eq!(
            rhs_vdp(&OscState::new(0.0, 0.0), &q),
            OscState::new(0.0, 0.0)
        );
        assert_eq!(
            rhs_vdp(&OscState::new(1.0, 1.0), &q),
            OscState::new(1.0, -1.0)
        );
        let q = p(1.0, 1.0, 0.0, 0.0);
        assert_eq!(
            rhs_vdp(&OscState::new(0.0, 1.0), &q),
            OscState::new(1.0, 1.0)
        );
    }

    #[test]
    fn rayleigh_values() {
        let q = p(1.0, 1.0, 0.0, 0.0);
        assert_eq!(rhs_rayleigh(&OscState::default(), &q), OscState::default());
        assert_eq!(
            rhs_rayleigh(&OscState::new(1.0, 0.0), &q),
            OscState::new(0.0, -1.0)
        );
        let q = p(2.0, 1.0, 0.0, 0.0);
        assert_eq!(
            rhs_rayleigh(&OscState::new(0.0, 1.0), &q),
            OscState::new(1.0, 0.0)
        );
    }

    #[test]
    fn rvdp_values() {
        let q = p(1.0, 1.0, 1.0, 0.0);
        assert_eq!(rhs_rvdp(&OscState::default(), &q), OscState::default());
        assert_eq!(
            rhs_rvdp(&OscState::new(1.0, 1.0), &q),
            OscState::new(1.0, -2.0)
        );
        assert_eq!(
            rhs_rvdp(&OscState::new(0.0, 1.0), &q),
            OscState::new(1.0, 0.0)
        );
    }

    #[test]
    fn homogeneous_values() {
        let q = p(2.0, 0.0, 0.0, 1.0);
        assert_eq!(
            rhs_homogeneous(&OscState::new(1.0, 0.0), &q),
            OscState::new(0.0, -2.0)
        );
        assert_eq!(
            rhs_homogeneous(&OscState::default(), &q),
            OscState::default()
        );
    }

    #[test]
    fn homogeneous_without_coupling_matches_rvdp_at_unit_epsilon() {
        // With eps = 1 the bracket form and the split form coincide.
        let q = p(1.3, 1.0, 0.7, 0.0);
        for &(u, v) in &[(0.3, -1.2), (1.5, 0.4), (-0.8, 2.0), (0.0, 0.0)] {
            let s = OscState::new(u, v);
            let a = rhs_homogeneous(&s, &q);
            let b = rhs_rvdp(&s, &q);
            assert!((a.v - b.v).abs() < 1e-14, "{a:?} vs {b:?}");
            assert_eq!(a.u, b.u);
        }
    }

    #[test]
    fn homogeneous_rejects_imaginary_frequency() {
        assert!(matches!(
            HomogeneousOscillator::new(p(1.0, 0.1, 1.0, 0.5)),
            Err(Error::ImaginaryFrequency { .. })
        ));
        let h = HomogeneousOscillator::new(p(2.0, 0.1, 0.5, 1.0)).unwrap();
        assert!((h.frequency() - 2f64.sqrt()).abs() < 1e-15);
        assert!((h.exact_delta() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn stuart_landau_values() {
        let q = p(1.0, 1.0, 0.0, 0.0);
        assert_eq!(
            rhs_stuart_landau(&ComplexAmplitude::default(), &q),
            ComplexAmplitude::default()
        );
        let on_cycle = rhs_stuart_landau(&ComplexAmplitude::new(1.0, 0.0), &q);
        assert_eq!(on_cycle.re, 0.0);
        assert_eq!(on_cycle.im, 0.0);
        assert_eq!(
            rhs_stuart_landau(&ComplexAmplitude::new(2.0, 0.0), &q),
            ComplexAmplitude::new(-3.0, 0.0)
        );
    }

    #[test]
    fn harmonic_motion_tracks_cosine() {
        let q = p(1.0, 0.0, 0.0, 0.0);
        let traj = integrate(|s| rhs_vdp(s, &q), OscState::new(1.0, 0.0), 1e-3, 10_000).unwrap();
        assert_eq!(traj.len(), 10_001);
        let err = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(t, s)| (s.u - t.cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "max error {err}");
    }

    #[test]
    fn harmonic_energy_is_conserved() {
        for omega0 in [0.5, 1.0, 2.0] {
            let q = p(omega0, 0.0, 0.0, 0.0);
            let energy = |s: &OscState| 0.5 * s.v * s.v + 0.5 * omega0 * omega0 * s.u * s.u;
            let s0 = OscState::new(0.7, -0.3);
            let traj = integrate(|s| rhs_rvdp(s, &q), s0, 1e-3, 10_000).unwrap();
            let e0 = energy(&s0);
            let drift = traj
                .states
                .iter()
                .map(|s| (energy(s) - e0).abs() / e0)
                .fold(0.0, f64::max);
            assert!(drift < 1e-6, "omega0={omega0} drift {drift}");
        }
    }

    #[test]
    fn stuart_landau_converges_to_unit_circle() {
        let q = p(1.0, 1.0, 0.0, 0.0);
        let traj = integrate(
            |a| rhs_stuart_landau(a, &q),
            ComplexAmplitude::new(0.1, 0.0),
            1e-2,
            5_000,
        )
        .unwrap();
        assert!((traj.last().modulus() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn stuart_landau_radius_is_monotone() {
        let q = p(1.0, 0.7, 0.0, 0.0);
        for a0 in [
            ComplexAmplitude::new(0.05, 0.02),
            ComplexAmplitude::new(1.8, -1.1),
        ] {
            let traj = integrate(|a| rhs_stuart_landau(a, &q), a0, 1e-2, 3_000).unwrap();
            for w in traj.states.windows(2) {
                let (r0, r1) = (w[0].modulus(), w[1].modulus());
                if (r0 - 1.0).abs() < 1e-9 {
                    break;
                }
                if r0 < 1.0 {
                    assert!(r1 > r0, "not increasing at r={r0}");
                } else {
                    assert!(r1 < r0, "not decreasing at r={r0}");
                }
            }
        }
    }

    #[test]
    fn van_der_pol_limit_cycle_amplitude() {
        let q = p(1.0, 0.1, 0.0, 0.0);
        let traj = integrate(|s| rhs_vdp(s, &q), OscState::new(0.5, 0.0), 1e-2, 40_000).unwrap();
        let tail = traj.displacement().after(300.0);
        let amp = tail.max_abs();
        assert!((1.9..=2.1).contains(&amp), "amplitude {amp}");
    }

    #[test]
    fn homogeneous_frequency_is_measured() {
        for (omega0, mu) in [(2.0f64, 1.0f64), (1.5, 0.3), (1.0, 0.0)] {
            let w = (omega0 * omega0 - 2.0 * mu).sqrt();
            let q = ModelParams::new(omega0, 0.1, 1.0 / (w * w), mu);
            let h = HomogeneousOscillator::new(q).unwrap();
            let traj = integrate(|s| h.rhs(s), OscState::new(0.2, 0.0), 1e-3, 60_000).unwrap();
            let measured = measure_frequency(&traj.displacement().after(20.0)).unwrap();
            assert!(
                (measured - w).abs() / w < 0.01,
                "measured {measured}, expected {w}"
            );
        }
    }

    #[test]
    fn blowup_reports_step() {
        let err = integrate(
            |s: &OscState| OscState::new(s.v, 100.0 * s.u),
            OscState::new(1.0, 0.0),
            0.1,
            1000,
        )
        .unwrap_err();
        match err {
            Error::NumericalBlowup { step } => assert!(step > 1 && step < 1000),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn invalid_requests_are_rejected() {
        let f = |s: &OscState| *s;
        assert!(integrate(f, OscState::default(), 0.0, 10).is_err());
        assert!(integrate(f, OscState::default(), 0.1, 0).is_err());
    }

    #[test]
    fn stride_keeps_final_state() {
        let q = p(1.0, 0.0, 0.0, 0.0);
        let full = integrate(|s| rhs_vdp(s, &q), OscState::new(1.0, 0.0), 0.01, 105).unwrap();
        let strided =
            integrate_strided(|s| rhs_vdp(s, &q), OscState::new(1.0, 0.0), 0.01, 105, 10).unwrap();
        assert_eq!(strided.len(), 12);
        assert_eq!(strided.last(), full.last());
        assert_eq!(strided.states[3], full.states[30]);
    }
}
