//! Discrete chain of oscillators with nearest-neighbour Hooke-like coupling,
//! integrated as one stacked ODE system.

use crate::model::{BoundarySpec, ModelParams};
use crate::ode::{bracket_damping, integrate_strided, rvdp_acceleration};
use crate::{Error, Result};

/// How the neighbour coupling enters each site's acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingMode {
    /// `f_rvdp(u_i, v_i) + mu (u_{i+1} + u_{i-1})`, a plain neighbour sum.
    Raw,
    /// `-omega0^2 u_i + eps (amp - u_i^2 - delta v_i^2) v_i + 2 mu u_i`
    /// plus `mu (u_{i+1} - 2 u_i + u_{i-1}) / spacing^2`, the term-by-term
    /// discretization of the continuum equation.
    ContinuumNormalized,
}

/// Site displacements and velocities. Site `i` sits at `x = i * spacing`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub spacing: f64,
}

impl ChainState {
    pub fn new(u: Vec<f64>, v: Vec<f64>, spacing: f64) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::InvalidChain(format!(
                "{} displacements but {} velocities",
                u.len(),
                v.len()
            )));
        }
        if u.len() < 3 {
            return Err(Error::InvalidChain("a chain needs at least 3 sites".into()));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidChain(format!(
                "spacing must be positive (got {spacing})"
            )));
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::InvalidChain("state is not finite".into()));
        }
        Ok(ChainState { u, v, spacing })
    }

    /// Samples displacement and velocity profiles at the site positions.
    pub fn sample(
        sites: usize,
        spacing: f64,
        displacement: impl Fn(f64) -> f64,
        velocity: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let xs = (0..sites).map(|i| i as f64 * spacing);
        let u = xs.clone().map(&displacement).collect();
        let v = xs.map(&velocity).collect();
        ChainState::new(u, v, spacing)
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.spacing
    }

    fn stacked(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(2 * self.len());
        s.extend_from_slice(&self.u);
        s.extend_from_slice(&self.v);
        s
    }

    fn from_stacked(s: &[f64], spacing: f64) -> Self {
        let n = s.len() / 2;
        ChainState {
            u: s[..n].to_vec(),
            v: s[n..].to_vec(),
            spacing,
        }
    }
}

/// A chain's parameters, boundary closure and coupling mode.
#[derive(Debug, Clone)]
pub struct Chain {
    pub params: ModelParams,
    pub bc: BoundarySpec,
    pub mode: CouplingMode,
}

impl Chain {
    /// Only periodic, Neumann-zero and Dirichlet-zero closures apply to a
    /// chain. Dirichlet-zero pins virtual sites beyond each end at zero.
    pub fn new(params: ModelParams, bc: BoundarySpec, mode: CouplingMode) -> Result<Self> {
        let params = params.validate()?;
        if matches!(bc, BoundarySpec::DirichletFunction { .. }) {
            return Err(Error::InvalidChain(
                "prescribed boundary functions are not supported for chains".into(),
            ));
        }
        Ok(Chain { params, bc, mode })
    }

    /// Neighbour displacements of site `i`.
    #[inline]
    fn neighbours(&self, u: &[f64], i: usize) -> (f64, f64) {
        let n = u.len();
        let left = if i > 0 {
            u[i - 1]
        } else {
            match self.bc {
                BoundarySpec::Periodic => u[n - 1],
                BoundarySpec::NeumannZero => u[1],
                _ => 0.0,
            }
        };
        let right = if i + 1 < n {
            u[i + 1]
        } else {
            match self.bc {
                BoundarySpec::Periodic => u[0],
                BoundarySpec::NeumannZero => u[n - 2],
                _ => 0.0,
            }
        };
        (left, right)
    }

    fn accelerations(&self, u: &[f64], v: &[f64], spacing: f64, out: &mut [f64]) {
        let p = &self.params;
        match self.mode {
            CouplingMode::Raw => {
                for i in 0..u.len() {
                    let (l, r) = self.neighbours(u, i);
                    out[i] = rvdp_acceleration(u[i], v[i], p) + p.mu * (r + l);
                }
            }
            CouplingMode::ContinuumNormalized => {
                let inv_h2 = 1.0 / (spacing * spacing);
                let linear = -p.omega0 * p.omega0 + 2.0 * p.mu;
                for i in 0..u.len() {
                    let (l, r) = self.neighbours(u, i);
                    out[i] = linear * u[i]
                        + bracket_damping(u[i], v[i], p)
                        + p.mu * (r - 2.0 * u[i] + l) * inv_h2;
                }
            }
        }
    }

    fn rhs_stacked(&self, s: &[f64], spacing: f64) -> Vec<f64> {
        let n = s.len() / 2;
        let (u, v) = s.split_at(n);
        let mut d = vec![0.0; 2 * n];
        d[..n].copy_from_slice(v);
        self.accelerations(u, v, spacing, &mut d[n..]);
        d
    }

    /// Time derivative of the state: `(v, acceleration)`.
    pub fn rhs(&self, s: &ChainState) -> ChainState {
        let mut a = vec![0.0; s.len()];
        self.accelerations(&s.u, &s.v, s.spacing, &mut a);
        ChainState {
            u: s.v.clone(),
            v: a,
            spacing: s.spacing,
        }
    }

    /// Whether `dt <= 0.5 spacing / sqrt(mu)`, the advisory step bound in
    /// continuum-normalized mode.
    pub fn step_is_advisable(&self, spacing: f64, dt: f64) -> bool {
        self.params.mu == 0.0 || dt <= 0.5 * spacing / self.params.mu.sqrt()
    }

    /// RK4 over the stacked system, keeping every `stride`-th state and the
    /// final one.
    pub fn integrate(
        &self,
        s0: &ChainState,
        dt: f64,
        steps: usize,
        stride: usize,
    ) -> Result<ChainTrajectory> {
        let spacing = s0.spacing;
        let traj = integrate_strided(
            |s: &Vec<f64>| self.rhs_stacked(s, spacing),
            s0.stacked(),
            dt,
            steps,
            stride,
        )?;
        Ok(ChainTrajectory {
            times: traj.times,
            states: traj
                .states
                .iter()
                .map(|s| ChainState::from_stacked(s, spacing))
                .collect(),
        })
    }
}

pub fn rhs_chain(
    s: &ChainState,
    p: &ModelParams,
    bc: &BoundarySpec,
    mode: CouplingMode,
) -> Result<ChainState> {
    Ok(Chain::new(*p, bc.clone(), mode)?.rhs(s))
}

pub fn integrate_chain(
    s0: &ChainState,
    p: &ModelParams,
    bc: &BoundarySpec,
    mode: CouplingMode,
    dt: f64,
    steps: usize,
    stride: usize,
) -> Result<ChainTrajectory> {
    Chain::new(*p, bc.clone(), mode)?.integrate(s0, dt, steps, stride)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ChainState>,
}

impl ChainTrajectory {
    pub fn last(&self) -> &ChainState {
        self.states.last().expect("trajectory is never empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{residual_pointwise, PlaneWaveSpec};
    use crate::ode::{integrate, rhs_rvdp, OscState};
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn resting_chain_has_no_acceleration() {
        let p = ModelParams::canonical(1.0, 0.5, 1.0);
        let s = ChainState::new(vec![0.0; 3], vec![0.0; 3], 1.0).unwrap();
        for mode in [CouplingMode::Raw, CouplingMode::ContinuumNormalized] {
            let d = rhs_chain(&s, &p, &BoundarySpec::Periodic, mode).unwrap();
            assert!(d.v.iter().all(|&a| a == 0.0));
        }
    }

    #[test]
    fn raw_three_site_example() {
        let p = ModelParams::new(1.0, 0.0, 0.0, 1.0);
        let s = ChainState::new(vec![1.0, 0.0, 0.0], vec![0.0; 3], 1.0).unwrap();
        let d = rhs_chain(&s, &p, &BoundarySpec::Periodic, CouplingMode::Raw).unwrap();
        assert_eq!(d.v, vec![-1.0, 1.0, 1.0]);
        assert_eq!(d.u, vec![0.0; 3]);
    }

    #[test]
    fn boundary_closures() {
        let p = ModelParams::new(1.0, 0.0, 0.0, 1.0);
        let s = ChainState::new(vec![1.0, 2.0, 3.0, 4.0], vec![0.0; 4], 1.0).unwrap();
        let raw = |bc| rhs_chain(&s, &p, &bc, CouplingMode::Raw).unwrap().v;
        // -u_i + (left + right)
        assert_eq!(raw(BoundarySpec::DirichletZero), vec![1.0, 2.0, 3.0, -1.0]);
        assert_eq!(raw(BoundarySpec::NeumannZero), vec![3.0, 2.0, 3.0, 2.0]);
        assert_eq!(raw(BoundarySpec::Periodic), vec![5.0, 2.0, 3.0, 0.0]);
        let bc = BoundarySpec::dirichlet_function(|_| 0.0, |_| 0.0);
        assert!(Chain::new(p, bc, CouplingMode::Raw).is_err());
    }

    #[test]
    fn invalid_states_are_rejected() {
        assert!(ChainState::new(vec![0.0; 2], vec![0.0; 2], 1.0).is_err());
        assert!(ChainState::new(vec![0.0; 3], vec![0.0; 4], 1.0).is_err());
        assert!(ChainState::new(vec![0.0; 3], vec![0.0; 3], 0.0).is_err());
        assert!(ChainState::new(vec![0.0, f64::NAN, 0.0], vec![0.0; 3], 1.0).is_err());
    }

    #[test]
    fn uncoupled_chain_reproduces_single_oscillators_bitwise() {
        let p = ModelParams::new(1.2, 0.7, 0.3, 0.0);
        let u0 = vec![0.1, -0.5, 1.3, 2.0, 0.0];
        let v0 = vec![0.0, 0.4, -1.0, 0.2, 0.9];
        let s0 = ChainState::new(u0.clone(), v0.clone(), 0.1).unwrap();
        let chain = Chain::new(p, BoundarySpec::Periodic, CouplingMode::Raw).unwrap();
        let traj = chain.integrate(&s0, 1e-2, 500, 1).unwrap();
        for i in 0..u0.len() {
            let single =
                integrate(|s| rhs_rvdp(s, &p), OscState::new(u0[i], v0[i]), 1e-2, 500).unwrap();
            for (cs, os) in traj.states.iter().zip(&single.states) {
                assert_eq!(cs.u[i], os.u);
                assert_eq!(cs.v[i], os.v);
            }
        }
    }

    #[test]
    fn continuum_acceleration_converges_at_second_order() {
        let omega0 = 1.0;
        let p = ModelParams::canonical(omega0, 0.5, 1.0);
        let spec = PlaneWaveSpec::exact(omega0);
        let chain =
            Chain::new(p, BoundarySpec::Periodic, CouplingMode::ContinuumNormalized).unwrap();
        let length = 5.0 * PI * SQRT_2;
        let t = 0.3;
        let mut errs = Vec::new();
        for sites in [64, 128, 256] {
            let h = length / sites as f64;
            let s = ChainState::sample(
                sites,
                h,
                |x| spec.value(x, t),
                |x| spec.time_derivative(x, t),
            )
            .unwrap();
            let d = chain.rhs(&s);
            // On the exact wave the continuum right-hand side equals u_tt.
            let err = (0..sites)
                .map(|i| {
                    let x = s.x(i);
                    let u_tt = -omega0 * omega0 * spec.value(x, t);
                    let continuum = u_tt - residual_pointwise(&spec, &p, x, t);
                    (d.v[i] - continuum).abs()
                })
                .fold(0.0, f64::max);
            errs.push(err);
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.8..4.2).contains(&ratio), "ratio {ratio} from {errs:?}");
        }
    }

    #[test]
    fn periodic_chain_is_translation_equivariant() {
        let p = ModelParams::canonical(1.0, 0.5, 0.8);
        let n = 12;
        let u0: Vec<f64> = (0..n).map(|i| ((i * i) as f64 * 0.37).sin()).collect();
        let v0: Vec<f64> = (0..n).map(|i| (i as f64 * 0.9).cos()).collect();
        let shift = 5;
        let rot = |v: &[f64]| {
            let mut r = v.to_vec();
            r.rotate_right(shift);
            r
        };
        for mode in [CouplingMode::Raw, CouplingMode::ContinuumNormalized] {
            let chain = Chain::new(p, BoundarySpec::Periodic, mode).unwrap();
            let a = chain
                .integrate(
                    &ChainState::new(u0.clone(), v0.clone(), 0.5).unwrap(),
                    1e-2,
                    200,
                    50,
                )
                .unwrap();
            let b = chain
                .integrate(
                    &ChainState::new(rot(&u0), rot(&v0), 0.5).unwrap(),
                    1e-2,
                    200,
                    50,
                )
                .unwrap();
            for (sa, sb) in a.states.iter().zip(&b.states) {
                assert_eq!(rot(&sa.u), sb.u);
                assert_eq!(rot(&sa.v), sb.v);
            }
        }
    }

    #[test]
    fn step_advisory() {
        let chain = Chain::new(
            ModelParams::canonical(1.0, 0.5, 4.0),
            BoundarySpec::Periodic,
            CouplingMode::ContinuumNormalized,
        )
        .unwrap();
        assert!(chain.step_is_advisable(0.1, 0.025));
        assert!(!chain.step_is_advisable(0.1, 0.03));
    }
}
