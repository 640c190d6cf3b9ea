//! Shared domain types: physical parameters, the space-time mesh, field
//! snapshots, initial conditions and boundary conditions.

use std::fmt;
use std::sync::Arc;

use crate::analysis::PlaneWaveSpec;
use crate::{Error, Result};

/// Physical parameters shared by every solver.
///
/// `amp` is the constant inside the nonlinear damping bracket,
/// `epsilon * (amp - u^2 - delta * u_t^2) * u_t`; it is 1 for the standard
/// equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega0: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub mu: f64,
    pub amp: f64,
    /// Set when `delta == 1 / omega0^2`, the case admitting the exact
    /// travelling wave.
    pub canonical: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            omega0: 1.0,
            epsilon: 0.1,
            delta: 1.0,
            mu: 0.0,
            amp: 1.0,
            canonical: true,
        }
    }
}

impl ModelParams {
    pub fn new(omega0: f64, epsilon: f64, delta: f64, mu: f64) -> Self {
        ModelParams {
            omega0,
            epsilon,
            delta,
            mu,
            amp: 1.0,
            canonical: false,
        }
    }

    /// Parameters with `delta = 1 / omega0^2`.
    pub fn canonical(omega0: f64, epsilon: f64, mu: f64) -> Self {
        canonical_delta(ModelParams::new(omega0, epsilon, 0.0, mu))
    }

    pub fn with_amp(mut self, amp: f64) -> Self {
        self.amp = amp;
        self
    }

    pub fn validate(self) -> Result<Self> {
        validate_params(self)
    }
}

/// Checks the parameter invariants and returns the parameters unchanged.
pub fn validate_params(p: ModelParams) -> Result<ModelParams> {
    let fields = [
        ("omega0", p.omega0),
        ("epsilon", p.epsilon),
        ("delta", p.delta),
        ("mu", p.mu),
        ("amp", p.amp),
    ];
    for (field, value) in fields {
        if !value.is_finite() {
            return Err(Error::NonFinite { field });
        }
    }
    if p.omega0 <= 0.0 {
        return Err(Error::NonPositiveOmega { value: p.omega0 });
    }
    for (field, value) in &fields[1..] {
        if *value < 0.0 {
            return Err(Error::NegativeCoefficient {
                field,
                value: *value,
            });
        }
    }
    if p.canonical {
        let expected = 1.0 / (p.omega0 * p.omega0);
        if p.delta != expected {
            return Err(Error::NonCanonicalDelta {
                delta: p.delta,
                expected,
            });
        }
    }
    Ok(p)
}

/// Replaces `delta` by `1 / omega0^2` and marks the parameters canonical.
pub fn canonical_delta(mut p: ModelParams) -> ModelParams {
    p.delta = 1.0 / (p.omega0 * p.omega0);
    p.canonical = true;
    p
}

/// Uniform space-time mesh on `[0, length] x [0, duration]`.
///
/// The requested steps are rounded to whole interval counts and then
/// recomputed, so `nx * dx == length` and `nt * dt == duration`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    length: f64,
    duration: f64,
    dx: f64,
    dt: f64,
    nx: usize,
    nt: usize,
}

impl Grid1D {
    pub fn new(length: f64, duration: f64, dx: f64, dt: f64) -> Result<Self> {
        for (name, v) in [
            ("length", length),
            ("duration", duration),
            ("dx", dx),
            ("dt", dt),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "{name} must be positive and finite (got {v})"
                )));
            }
        }
        let nx = (length / dx).round();
        let nt = (duration / dt).round();
        if nx < 2.0 {
            return Err(Error::InvalidGrid(format!(
                "length/dx rounds to {nx} intervals, need at least 2"
            )));
        }
        if nt < 1.0 {
            return Err(Error::InvalidGrid(format!(
                "duration/dt rounds to {nt} intervals, need at least 1"
            )));
        }
        Self::from_counts(length, duration, nx as usize, nt as usize)
    }

    pub fn from_counts(length: f64, duration: f64, nx: usize, nt: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0 && duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidGrid(
                "length and duration must be positive".into(),
            ));
        }
        if nx < 2 || nt < 1 {
            return Err(Error::InvalidGrid(format!(
                "need nx >= 2 and nt >= 1 (got nx={nx}, nt={nt})"
            )));
        }
        Ok(Grid1D {
            length,
            duration,
            dx: length / nx as f64,
            dt: duration / nt as f64,
            nx,
            nt,
        })
    }

    /// Same domain with both steps halved.
    pub fn refined(&self) -> Self {
        Grid1D::from_counts(self.length, self.duration, 2 * self.nx, 2 * self.nt)
            .expect("refining a valid grid")
    }

    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn duration(&self) -> f64 {
        self.duration
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    /// Spatial mesh points `x_0 ..= x_nx`.
    pub fn xs(&self) -> Vec<f64> {
        (0..=self.nx).map(|i| self.x(i)).collect()
    }
}

/// One snapshot of `u` over the mesh at a single time level.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    time: f64,
}

impl Field {
    pub fn new(values: Vec<f64>, time: f64, grid: &Grid1D) -> Result<Self> {
        if values.len() != grid.nx() + 1 {
            return Err(Error::GridMismatch {
                expected: grid.nx() + 1,
                got: values.len(),
            });
        }
        Ok(Field { values, time })
    }

    /// Samples `f` at every mesh point.
    pub fn sample(grid: &Grid1D, time: f64, f: impl Fn(f64) -> f64) -> Self {
        Field {
            values: (0..=grid.nx()).map(|i| f(grid.x(i))).collect(),
            time,
        }
    }

    pub(crate) fn from_raw(values: Vec<f64>, time: f64) -> Self {
        Field { values, time }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Initial displacement `u(x, 0)` and velocity `u_t(x, 0)`.
#[derive(Clone)]
pub struct InitialCondition {
    displacement: ScalarFn,
    velocity: ScalarFn,
}

impl fmt::Debug for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialCondition").finish_non_exhaustive()
    }
}

impl InitialCondition {
    pub fn new(
        displacement: impl Fn(f64) -> f64 + Send + Sync + 'static,
        velocity: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        InitialCondition {
            displacement: Arc::new(displacement),
            velocity: Arc::new(velocity),
        }
    }

    /// Spatially constant displacement `c` at rest.
    pub fn uniform(c: f64) -> Self {
        Self::new(move |_| c, |_| 0.0)
    }

    /// Gaussian bump at rest.
    pub fn gaussian(center: f64, width: f64) -> Self {
        Self::new(
            move |x| {
                let s = (x - center) / width;
                (-0.5 * s * s).exp()
            },
            |_| 0.0,
        )
    }

    /// The closed-form wave and its time derivative at `t = 0`.
    pub fn travelling_wave(spec: PlaneWaveSpec) -> Self {
        Self::new(
            move |x| spec.value(x, 0.0),
            move |x| spec.time_derivative(x, 0.0),
        )
    }

    /// Sum of several closed-form waves.
    pub fn superposed(specs: Vec<PlaneWaveSpec>) -> Self {
        let specs = Arc::new(specs);
        let s2 = Arc::clone(&specs);
        Self::new(
            move |x| specs.iter().map(|s| s.value(x, 0.0)).sum(),
            move |x| s2.iter().map(|s| s.time_derivative(x, 0.0)).sum(),
        )
    }

    pub fn displacement(&self, x: f64) -> f64 {
        (self.displacement)(x)
    }

    pub fn velocity(&self, x: f64) -> f64 {
        (self.velocity)(x)
    }
}

/// Boundary closure for the spatial operator.
#[derive(Clone)]
pub enum BoundarySpec {
    DirichletZero,
    /// Prescribed boundary values `left(t)` at `x = 0` and `right(t)` at `x = L`.
    DirichletFunction {
        left: ScalarFn,
        right: ScalarFn,
    },
    NeumannZero,
    /// `u(0, t) = u(L, t)`.
    Periodic,
}

impl BoundarySpec {
    pub fn dirichlet_function(
        left: impl Fn(f64) -> f64 + Send + Sync + 'static,
        right: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        BoundarySpec::DirichletFunction {
            left: Arc::new(left),
            right: Arc::new(right),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundarySpec::DirichletZero => "dirichlet",
            BoundarySpec::DirichletFunction { .. } => "dirichlet_function",
            BoundarySpec::NeumannZero => "neumann",
            BoundarySpec::Periodic => "periodic",
        }
    }
}

impl fmt::Debug for BoundarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_four_parameters_are_valid() {
        let p = ModelParams::new(2.0, 1.0, 0.25, 2f64.sqrt());
        assert_eq!(validate_params(p), Ok(p));
    }

    #[test]
    fn zero_omega_is_rejected() {
        let p = ModelParams::new(0.0, 1.0, 1.0, 0.0);
        assert_eq!(
            validate_params(p),
            Err(Error::NonPositiveOmega { value: 0.0 })
        );
    }

    #[test]
    fn uncoupled_case_is_valid() {
        assert!(validate_params(ModelParams::new(1.0, 1.0, 1.0, 0.0)).is_ok());
    }

    #[test]
    fn negative_and_nonfinite_fields_are_named() {
        let p = ModelParams::new(1.0, 1.0, -0.5, 0.0);
        assert_eq!(
            validate_params(p),
            Err(Error::NegativeCoefficient {
                field: "delta",
                value: -0.5
            })
        );
        let p = ModelParams::new(1.0, f64::NAN, 1.0, 0.0);
        assert_eq!(
            validate_params(p),
            Err(Error::NonFinite { field: "epsilon" })
        );
        let p = ModelParams::new(1.0, 1.0, 1.0, 0.0).with_amp(f64::INFINITY);
        assert_eq!(validate_params(p), Err(Error::NonFinite { field: "amp" }));
    }

    #[test]
    fn canonical_delta_values() {
        let p = canonical_delta(ModelParams::new(2.0, 1.0, 7.0, 0.0));
        assert_eq!(p.delta, 0.25);
        assert!(p.canonical);
        assert_eq!(
            canonical_delta(ModelParams::new(1.0, 1.0, 0.0, 0.0)).delta,
            1.0
        );
        assert_eq!(
            canonical_delta(ModelParams::new(3.0, 1.0, 0.0, 0.0)).delta,
            1.0 / 9.0
        );
        assert!(validate_params(p).is_ok());
    }

    #[test]
    fn canonical_flag_is_checked() {
        let mut p = ModelParams::canonical(2.0, 1.0, 0.0);
        p.delta = 0.3;
        assert!(matches!(
            validate_params(p),
            Err(Error::NonCanonicalDelta { .. })
        ));
    }

    #[test]
    fn grid_steps_are_recomputed() {
        let g = Grid1D::new(10.0, 1.0, 0.3, 0.03).unwrap();
        assert_eq!(g.nx(), 33);
        assert_eq!(g.nt(), 33);
        assert_eq!(g.dx(), 10.0 / 33.0);
        assert_eq!(g.xs().len(), 34);
    }

    #[test]
    fn degenerate_grids_are_rejected() {
        assert!(Grid1D::new(1.0, 1.0, 0.8, 0.1).is_err());
        assert!(Grid1D::new(1.0, 1.0, 0.1, 3.0).is_err());
        assert!(Grid1D::new(-1.0, 1.0, 0.1, 0.1).is_err());
    }

    #[test]
    fn mismatched_field_is_rejected() {
        let g = Grid1D::new(1.0, 1.0, 0.1, 0.1).unwrap();
        assert_eq!(
            Field::new(vec![0.0; 10], 0.0, &g),
            Err(Error::GridMismatch {
                expected: 11,
                got: 10
            })
        );
        assert!(Field::new(vec![0.0; 11], 0.0, &g).is_ok());
    }
}
