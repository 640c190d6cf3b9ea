//! Explicit finite-difference solver for the 1-D continuum equation
//!
//! ```text
//! u_tt = -omega0^2 u + eps (amp - u^2 - delta u_t^2) u_t + 2 mu u + mu u_xx
//! ```
//!
//! The update uses a central second difference in time, a backward first
//! difference for `u_t` and a central second difference in space:
//!
//! ```text
//! (u[n+1] - 2 u[n] + u[n-1]) / dt^2 = -omega0^2 u[n] + 2 mu u[n]
//!     + eps (amp - u[n]^2 - delta w^2) w + mu (u[i+1] - 2 u[i] + u[i-1]) / dx^2
//! w = (u[n] - u[n-1]) / dt
//! ```
//!
//! The scheme is first order in time (from `w`) and second order in space.
//! The first level comes from a second-order Taylor expansion using the
//! initial velocity.

use std::f64::consts::PI;
use std::time::Instant;

use crate::model::{validate_params, BoundarySpec, Field, Grid1D, InitialCondition, ModelParams};
use crate::ode::BLOWUP_THRESHOLD;
use crate::{Error, Result};

/// Multipliers of the explicit update, precomputed from the parameters and
/// the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeCoefficients {
    /// `2 - omega0^2 dt^2 + 2 mu dt^2 - 2 neighbour`
    pub centre: f64,
    /// `mu dt^2 / dx^2`
    pub neighbour: f64,
    /// `eps dt^2`
    pub damping: f64,
    pub amp: f64,
    pub delta: f64,
    pub dt: f64,
    pub inv_dt: f64,
}

impl SchemeCoefficients {
    pub fn new(p: &ModelParams, g: &Grid1D) -> Self {
        let dt = g.dt();
        let dt2 = dt * dt;
        let neighbour = p.mu * dt2 / (g.dx() * g.dx());
        SchemeCoefficients {
            centre: 2.0 - p.omega0 * p.omega0 * dt2 + 2.0 * p.mu * dt2 - 2.0 * neighbour,
            neighbour,
            damping: p.epsilon * dt2,
            amp: p.amp,
            delta: p.delta,
            dt,
            inv_dt: 1.0 / dt,
        }
    }

    #[inline]
    fn update(&self, prev: f64, curr: f64, left: f64, right: f64) -> f64 {
        let w = (curr - prev) * self.inv_dt;
        self.centre * curr - prev
            + self.neighbour * (left + right)
            + self.damping * (self.amp - curr * curr - self.delta * w * w) * w
    }
}

/// Outcome of the a-priori stability heuristics. Failing checks are
/// warnings only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// `mu dt^2 / dx^2`, expected `<= 1`.
    pub courant: f64,
    /// `dt / (2 pi / omega0)`, expected `<= 0.1`.
    pub period_fraction: f64,
}

impl StabilityReport {
    pub const MAX_COURANT: f64 = 1.0;
    pub const MAX_PERIOD_FRACTION: f64 = 0.1;

    pub fn courant_ok(&self) -> bool {
        self.courant <= Self::MAX_COURANT
    }

    pub fn resolution_ok(&self) -> bool {
        self.period_fraction <= Self::MAX_PERIOD_FRACTION
    }

    pub fn passed(&self) -> bool {
        self.courant_ok() && self.resolution_ok()
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.courant_ok() {
            out.push(format!(
                "mu*dt^2/dx^2 = {:.6} exceeds {}",
                self.courant,
                Self::MAX_COURANT
            ));
        }
        if !self.resolution_ok() {
            out.push(format!(
                "dt is {:.4} of the oscillator period, above {}",
                self.period_fraction,
                Self::MAX_PERIOD_FRACTION
            ));
        }
        out
    }
}

pub fn stability_check(p: &ModelParams, g: &Grid1D) -> StabilityReport {
    StabilityReport {
        courant: p.mu * g.dt() * g.dt() / (g.dx() * g.dx()),
        period_fraction: g.dt() * p.omega0 / (2.0 * PI),
    }
}

/// Snapshots of a finished solve.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub snapshots: Vec<Field>,
    pub wall_time: f64,
    pub stability: StabilityReport,
}

impl SolveResult {
    pub fn initial(&self) -> &Field {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Field {
        self.snapshots.last().expect("at least one snapshot")
    }

    /// The snapshot closest in time to `t`.
    pub fn at_time(&self, t: f64) -> &Field {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.time() - t).abs().total_cmp(&(b.time() - t).abs()))
            .expect("at least one snapshot")
    }
}

/// Left and right neighbour indices of node `i` under `bc`, for nodes whose
/// value is computed from the stencil.
#[inline]
fn neighbours(i: usize, nx: usize, bc: &BoundarySpec) -> (usize, usize) {
    match (i, bc) {
        (0, BoundarySpec::Periodic) => (nx - 1, 1),
        (0, _) => (1, 1),
        (i, _) if i == nx => (nx - 1, nx - 1),
        (i, _) => (i - 1, i + 1),
    }
}

/// Writes boundary values that are not computed from the stencil.
fn close_boundary(values: &mut [f64], bc: &BoundarySpec, t: f64) {
    let nx = values.len() - 1;
    match bc {
        BoundarySpec::DirichletZero => {
            values[0] = 0.0;
            values[nx] = 0.0;
        }
        BoundarySpec::DirichletFunction { left, right } => {
            values[0] = left(t);
            values[nx] = right(t);
        }
        BoundarySpec::Periodic => values[nx] = values[0],
        BoundarySpec::NeumannZero => {}
    }
}

/// Indices whose values come from the stencil.
fn stencil_range(bc: &BoundarySpec, nx: usize) -> std::ops::Range<usize> {
    match bc {
        BoundarySpec::DirichletZero | BoundarySpec::DirichletFunction { .. } => 1..nx,
        BoundarySpec::NeumannZero => 0..nx + 1,
        BoundarySpec::Periodic => 0..nx,
    }
}

fn check_level(values: &[f64], level: usize) -> Result<()> {
    match values
        .iter()
        .position(|v| !v.is_finite() || v.abs() > BLOWUP_THRESHOLD)
    {
        Some(index) => Err(Error::FieldBlowup { index, level }),
        None => Ok(()),
    }
}

fn level_of(t: f64, dt: f64) -> usize {
    (t / dt).round() as usize
}

/// Samples the initial displacement, with boundary values made consistent
/// with `bc`.
pub fn initial_field(ic: &InitialCondition, g: &Grid1D, bc: &BoundarySpec) -> Field {
    let mut values: Vec<f64> = (0..=g.nx()).map(|i| ic.displacement(g.x(i))).collect();
    close_boundary(&mut values, bc, 0.0);
    Field::from_raw(values, 0.0)
}

/// Level `n = 1` from the Taylor expansion
/// `u1 = u0 + dt V + dt^2 / 2 F(u0, V)`, where `F` is the right-hand side
/// with `u_t = V` and `u_xx` replaced by the second difference of `u0`.
pub fn first_step(
    u0: &Field,
    ic: &InitialCondition,
    p: &ModelParams,
    g: &Grid1D,
    bc: &BoundarySpec,
) -> Result<Field> {
    let nx = g.nx();
    if u0.len() != nx + 1 {
        return Err(Error::GridMismatch {
            expected: nx + 1,
            got: u0.len(),
        });
    }
    let u = u0.values();
    let dt = g.dt();
    let inv_dx2 = 1.0 / (g.dx() * g.dx());
    let linear = -p.omega0 * p.omega0 + 2.0 * p.mu;
    let mut next = vec![0.0; nx + 1];
    for i in stencil_range(bc, nx) {
        let (l, r) = neighbours(i, nx, bc);
        let v = ic.velocity(g.x(i));
        let uc = u[i];
        let accel = linear * uc
            + p.epsilon * (p.amp - uc * uc - p.delta * v * v) * v
            + p.mu * (u[l] - 2.0 * uc + u[r]) * inv_dx2;
        next[i] = uc + dt * v + 0.5 * dt * dt * accel;
    }
    let t1 = u0.time() + dt;
    close_boundary(&mut next, bc, t1);
    check_level(&next, 1)?;
    Ok(Field::from_raw(next, t1))
}

fn advance(
    prev: &[f64],
    curr: &[f64],
    next: &mut [f64],
    c: &SchemeCoefficients,
    bc: &BoundarySpec,
    t_next: f64,
) {
    let nx = curr.len() - 1;
    for i in 1..nx {
        next[i] = c.update(prev[i], curr[i], curr[i - 1], curr[i + 1]);
    }
    match bc {
        BoundarySpec::Periodic => {
            next[0] = c.update(prev[0], curr[0], curr[nx - 1], curr[1]);
        }
        BoundarySpec::NeumannZero => {
            next[0] = c.update(prev[0], curr[0], curr[1], curr[1]);
            next[nx] = c.update(prev[nx], curr[nx], curr[nx - 1], curr[nx - 1]);
        }
        _ => {}
    }
    close_boundary(next, bc, t_next);
}

/// One explicit step from levels `n - 1` and `n` to `n + 1`.
pub fn step(
    u_prev: &Field,
    u_curr: &Field,
    c: &SchemeCoefficients,
    bc: &BoundarySpec,
) -> Result<Field> {
    if u_prev.len() != u_curr.len() {
        return Err(Error::GridMismatch {
            expected: u_curr.len(),
            got: u_prev.len(),
        });
    }
    if u_curr.len() < 3 {
        return Err(Error::InvalidGrid("need at least 3 mesh points".into()));
    }
    let t_next = u_curr.time() + c.dt;
    let mut next = vec![0.0; u_curr.len()];
    advance(u_prev.values(), u_curr.values(), &mut next, c, bc, t_next);
    check_level(&next, level_of(t_next, c.dt))?;
    Ok(Field::from_raw(next, t_next))
}

/// Runs the full solve: initial level, Taylor start, then `nt - 1` explicit
/// steps. Levels `0, stride, 2 stride, ...` and the final level are kept.
pub fn solve(
    p: &ModelParams,
    g: &Grid1D,
    ic: &InitialCondition,
    bc: &BoundarySpec,
    snapshot_stride: usize,
) -> Result<SolveResult> {
    let p = validate_params(*p)?;
    if snapshot_stride == 0 {
        return Err(Error::InvalidStep(
            "snapshot stride must be at least 1".into(),
        ));
    }
    let stability = stability_check(&p, g);
    let started = Instant::now();
    let nt = g.nt();
    let keep = |n: usize| n % snapshot_stride == 0 || n == nt;

    let u0 = initial_field(ic, g, bc);
    check_level(u0.values(), 0)?;
    let u1 = first_step(&u0, ic, &p, g, bc)?;
    let mut snapshots = vec![u0.clone()];
    if keep(1) {
        snapshots.push(u1.clone());
    }

    let c = SchemeCoefficients::new(&p, g);
    let mut prev = u0.values().to_vec();
    let mut curr = u1.values().to_vec();
    let mut next = vec![0.0; g.nx() + 1];
    for n in 1..nt {
        let t_next = g.t(n + 1);
        advance(&prev, &curr, &mut next, &c, bc, t_next);
        check_level(&next, n + 1)?;
        if keep(n + 1) {
            snapshots.push(Field::from_raw(next.clone(), t_next));
        }
        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
    }

    Ok(SolveResult {
        snapshots,
        wall_time: started.elapsed().as_secs_f64(),
        stability,
    })
}
