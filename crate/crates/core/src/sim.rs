//! Closed-loop trajectories, the Lyapunov functional `V(x) = xᵀΛ⁻¹x`,
//! empirical decay-rate fits and plateau-length sweeps.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::feedback::{decay_bound_with, spectral_abscissa, synthesize};
use crate::gramian::{GramianBundle, GramianVariant};
use crate::linalg::{ensure_finite, ensure_square};
use crate::lti::LtiSystem;
use crate::ode::step_count;
use crate::quadrature::QuadratureConfig;

/// States whose norm exceeds this are treated as blown up.
pub const DIVERGENCE_NORM: f64 = 1e12;

pub const RK4_METHOD: &str = "rk4-fixed";

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub dt: f64,
    pub method: String,
    /// Integration stopped early because the state norm exceeded
    /// [`DIVERGENCE_NORM`].
    pub diverged: bool,
}

impl Trajectory {
    /// Wraps externally produced samples (strictly increasing times, finite
    /// states of equal length).
    pub fn from_samples(times: Vec<f64>, states: Vec<DVector<f64>>, method: &str) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::DimensionMismatch {
                what: "trajectory samples",
                expected: times.len(),
                got: states.len(),
            });
        }
        if times
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::Degenerate(
                "sample times must be strictly increasing",
            ));
        }
        if let Some(first) = states.first() {
            let n = first.len();
            if states.iter().any(|x| x.len() != n) {
                return Err(Error::Degenerate("states have inconsistent dimensions"));
            }
        }
        if states.iter().any(|x| x.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite("trajectory state"));
        }
        let dt = if times.len() > 1 {
            times[1] - times[0]
        } else {
            0.0
        };
        Ok(Self {
            times,
            states,
            dt,
            method: method.to_string(),
            diverged: false,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }
}

/// Fixed-step classical RK4 for `x' = A_cl x`.
///
/// For a linear autonomous field one RK4 step is multiplication by the
/// degree-4 Taylor polynomial `I + hA + (hA)²/2 + (hA)³/6 + (hA)⁴/24`, which
/// is formed once.
pub fn integrate(
    acl: &DMatrix<f64>,
    x0: &DVector<f64>,
    t_final: f64,
    dt: f64,
) -> Result<Trajectory> {
    ensure_square(acl, "A_cl")?;
    ensure_finite(acl, "A_cl")?;
    if x0.len() != acl.nrows() {
        return Err(Error::DimensionMismatch {
            what: "initial state",
            expected: acl.nrows(),
            got: x0.len(),
        });
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_final",
            value: t_final,
            reason: "must be positive and finite",
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "must be positive and finite",
        });
    }
    let steps = step_count(t_final, dt);
    let h = t_final / steps as f64;
    if t_final + h == t_final {
        return Err(Error::StepUnderflow(h));
    }

    let n = acl.nrows();
    let ha = acl * h;
    let mut propagator = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=4 {
        term = &term * &ha / k as f64;
        propagator += &term;
    }

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(x0.clone());
    let mut x = x0.clone();
    let mut diverged = false;
    for k in 1..=steps {
        x = &propagator * &x;
        let norm = x.norm();
        if !norm.is_finite() || norm > DIVERGENCE_NORM {
            diverged = true;
            break;
        }
        times.push(k as f64 * h);
        states.push(x.clone());
    }
    Ok(Trajectory {
        times,
        states,
        dt: h,
        method: RK4_METHOD.to_string(),
        diverged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovProfile {
    /// `V(tᵢ) = x(tᵢ)ᵀ Λ⁻¹ x(tᵢ)`
    pub values: Vec<f64>,
    /// `e^{−2ωtᵢ} V(0)`
    pub envelope: Vec<f64>,
    /// `maxᵢ (V(tᵢ) − e^{−2ωtᵢ}V(0)) / V(0)`; zero for the zero trajectory.
    pub max_violation: f64,
}

pub fn lyapunov_profile(
    traj: &Trajectory,
    g: &GramianBundle,
    omega: f64,
) -> Result<LyapunovProfile> {
    if let Some(x) = traj.states.first() {
        if x.len() != g.dim() {
            return Err(Error::DimensionMismatch {
                what: "trajectory state",
                expected: g.dim(),
                got: x.len(),
            });
        }
    }
    let values: Vec<f64> = traj.states.iter().map(|x| x.dot(&g.solve_vec(x))).collect();
    let v0 = values.first().copied().unwrap_or(0.0);
    let envelope: Vec<f64> = traj
        .times
        .iter()
        .map(|t| (-2.0 * omega * t).exp() * v0)
        .collect();
    let max_violation = if v0 > 0.0 {
        values
            .iter()
            .zip(&envelope)
            .map(|(v, e)| (v - e) / v0)
            .fold(f64::NEG_INFINITY, f64::max)
    } else {
        0.0
    };
    Ok(LyapunovProfile {
        values,
        envelope,
        max_violation,
    })
}

/// Least-squares slope of `log ‖x(t)‖` after discarding the first
/// `settle_fraction` of the samples.
///
/// When `period` is given the retained window is shortened to a whole
/// number of periods, which removes most of the bias an oscillating
/// envelope puts on the slope.
pub fn fit_decay_rate(traj: &Trajectory, settle_fraction: f64, period: Option<f64>) -> Result<f64> {
    if traj.diverged {
        return Err(Error::Diverged(DIVERGENCE_NORM));
    }
    if !(0.0..1.0).contains(&settle_fraction) {
        return Err(Error::InvalidParameter {
            name: "settle_fraction",
            value: settle_fraction,
            reason: "must lie in [0, 1)",
        });
    }
    let skip = (settle_fraction * traj.len() as f64).floor() as usize;
    let mut window: Vec<(f64, f64)> = traj.times[skip..]
        .iter()
        .zip(&traj.states[skip..])
        .map(|(&t, x)| (t, x.norm()))
        .collect();
    if let (Some(p), Some(&(start, _)), Some(&(stop, _))) = (period, window.first(), window.last())
    {
        if p > 0.0 && p.is_finite() {
            let whole = ((stop - start) / p + 1e-9).floor();
            if whole >= 1.0 {
                let cut = start + whole * p + 0.5 * traj.dt;
                window.retain(|&(t, _)| t <= cut);
            }
        }
    }
    if window.len() < 100 {
        return Err(Error::Degenerate(
            "fewer than 100 samples left after the settling prefix",
        ));
    }
    if window.iter().any(|&(_, r)| r == 0.0) {
        return Err(Error::Degenerate("zero state in the fitting window"));
    }
    let count = window.len() as f64;
    let mean_t = window.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = window.iter().map(|p| p.1.ln()).sum::<f64>() / count;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, r) in &window {
        let dt = t - mean_t;
        sxy += dt * (r.ln() - mean_y);
        sxx += dt * dt;
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub t: f64,
    pub spectral_abscissa: f64,
    pub bound_exponent: f64,
    pub condition_of_lambda: f64,
}

/// Standard synthesis with knot `T` for every `T` in `ts`, alongside the
/// plateau decay-bound exponent. Rows come back in input order.
pub fn sweep_t(
    sys: &LtiSystem,
    omega: f64,
    t0: f64,
    ts: &[f64],
    quad: &QuadratureConfig,
) -> Result<Vec<SweepRow>> {
    if let Some(&bad) = ts.iter().find(|&&t| t.is_nan() || t < t0) {
        return Err(Error::InvalidParameter {
            name: "T",
            value: bad,
            reason: "sweep values must satisfy T >= T0",
        });
    }
    ts.par_iter()
        .map(|&t| {
            let s = synthesize(sys, omega, t0, t, GramianVariant::Standard, quad)?;
            let bound = decay_bound_with(sys, omega, t0, t, &s.gramian, quad)?;
            Ok(SweepRow {
                t,
                spectral_abscissa: spectral_abscissa(s.law.closed_loop())?,
                bound_exponent: bound.exponent,
                condition_of_lambda: s.gramian.condition_number(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::synthesize;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn oscillator() -> LtiSystem {
        LtiSystem::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
            "oscillator",
        )
        .unwrap()
    }

    fn scalar() -> LtiSystem {
        LtiSystem::new(
            DMatrix::zeros(1, 1),
            DMatrix::from_element(1, 1, 1.0),
            "scalar",
        )
        .unwrap()
    }

    #[test]
    fn rotation_returns_after_one_period() {
        let a = oscillator().a().clone();
        let x0 = DVector::from_vec(vec![1.0, 0.0]);
        let traj = integrate(&a, &x0, 2.0 * PI, 1e-3).unwrap();
        assert!((traj.final_state() - &x0).amax() < 1e-6);
        assert_eq!(traj.len(), traj.states.len());
        assert!(!traj.diverged);
    }

    #[test]
    fn scalar_exponential_decay() {
        let a = DMatrix::from_element(1, 1, -1.2254);
        let traj = integrate(&a, &DVector::from_element(1, 1.0), 1.0, 1e-3).unwrap();
        assert_abs_diff_eq!(traj.final_state()[0], (-1.2254f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(traj.final_state()[0], 0.2936, epsilon = 1e-4);
    }

    #[test]
    fn halving_step_shrinks_error_sixteenfold() {
        let a = oscillator().a().clone();
        let x0 = DVector::from_vec(vec![1.0, 0.0]);
        let exact = DVector::from_vec(vec![3.0f64.cos(), -3.0f64.sin()]);
        let err = |dt: f64| (integrate(&a, &x0, 3.0, dt).unwrap().final_state() - &exact).norm();
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
    }

    #[test]
    fn divergence_is_flagged() {
        let a = DMatrix::from_element(1, 1, 30.0);
        let traj = integrate(&a, &DVector::from_element(1, 1.0), 5.0, 1e-3).unwrap();
        assert!(traj.diverged);
        assert!(matches!(
            fit_decay_rate(&traj, 0.2, None),
            Err(Error::Diverged(_))
        ));
    }

    #[test]
    fn open_loop_skew_conserves_norm() {
        let a = oscillator().a().clone();
        let x0 = DVector::from_vec(vec![0.6, -0.8]);
        let traj = integrate(&a, &x0, 20.0, 1e-3).unwrap();
        for x in &traj.states {
            assert!((x.norm() - 1.0).abs() < 1e-7);
        }
        assert_abs_diff_eq!(
            fit_decay_rate(&traj, 0.2, None).unwrap(),
            0.0,
            epsilon = 1e-6
        );
    }

    #[test]
    fn integrate_rejects_bad_input() {
        let a = DMatrix::identity(2, 2);
        assert!(integrate(&a, &DVector::zeros(3), 1.0, 1e-3).is_err());
        assert!(integrate(&a, &DVector::zeros(2), 1.0, 0.0).is_err());
        assert!(integrate(&a, &DVector::zeros(2), -1.0, 1e-3).is_err());
    }

    #[test]
    fn lyapunov_scalar_closed_loop() {
        let sys = scalar();
        let s = synthesize(
            &sys,
            0.5,
            1.0,
            1.0,
            GramianVariant::Standard,
            &Default::default(),
        )
        .unwrap();
        let traj = integrate(
            s.law.closed_loop(),
            &DVector::from_element(1, 1.0),
            20.0,
            1e-3,
        )
        .unwrap();
        let p = lyapunov_profile(&traj, &s.gramian, 0.5).unwrap();
        let rate = s.law.closed_loop()[(0, 0)];
        for (t, v) in traj.times.iter().zip(&p.values) {
            let exact = (2.0 * rate * t).exp() * p.values[0];
            assert!((v - exact).abs() <= 1e-9 * p.values[0]);
        }
        assert!(p.max_violation <= 1e-6);
    }

    #[test]
    fn lyapunov_zero_trajectory() {
        let sys = oscillator();
        let s = synthesize(
            &sys,
            0.5,
            PI,
            PI,
            GramianVariant::Standard,
            &Default::default(),
        )
        .unwrap();
        let traj = integrate(s.law.closed_loop(), &DVector::zeros(2), 1.0, 1e-2).unwrap();
        let p = lyapunov_profile(&traj, &s.gramian, 0.5).unwrap();
        assert!(p.values.iter().all(|&v| v == 0.0));
        assert_eq!(p.max_violation, 0.0);
    }

    #[test]
    fn lyapunov_oscillator_standard() {
        let sys = oscillator();
        let s = synthesize(
            &sys,
            0.5,
            PI,
            PI,
            GramianVariant::Standard,
            &Default::default(),
        )
        .unwrap();
        let traj = integrate(
            s.law.closed_loop(),
            &DVector::from_vec(vec![1.0, 1.0]),
            20.0,
            1e-3,
        )
        .unwrap();
        let p = lyapunov_profile(&traj, &s.gramian, 0.5).unwrap();
        assert!(p.max_violation <= 1e-6, "{}", p.max_violation);
    }

    #[test]
    fn fit_exact_exponential() {
        let times: Vec<f64> = (0..1000).map(|k| k as f64 * 0.01).collect();
        let states = times
            .iter()
            .map(|t| DVector::from_vec(vec![1.0, 1.0]) * (-1.3 * t).exp())
            .collect();
        let traj = Trajectory::from_samples(times, states, "synthetic").unwrap();
        assert_abs_diff_eq!(
            fit_decay_rate(&traj, 0.2, None).unwrap(),
            -1.3,
            epsilon = 1e-6
        );
    }

    #[test]
    fn fit_truncated_oscillator_rate() {
        let sys = oscillator();
        let s = synthesize(
            &sys,
            0.5,
            PI,
            PI,
            GramianVariant::Truncated,
            &Default::default(),
        )
        .unwrap();
        let acl = s.law.closed_loop();
        let period = crate::feedback::dominant_period(acl).unwrap().unwrap();
        let traj = integrate(acl, &DVector::from_vec(vec![1.0, 0.0]), 12.5 * period, 1e-3).unwrap();
        let rate = fit_decay_rate(&traj, 0.2, Some(period)).unwrap();
        assert_abs_diff_eq!(rate, -1.045, epsilon = 0.05);
    }

    #[test]
    fn fit_requires_enough_samples() {
        let times: Vec<f64> = (0..50).map(|k| k as f64).collect();
        let states = times
            .iter()
            .map(|_| DVector::from_element(1, 1.0))
            .collect();
        let traj = Trajectory::from_samples(times, states, "short").unwrap();
        assert!(matches!(
            fit_decay_rate(&traj, 0.2, None),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn sweep_oscillator() {
        let sys = oscillator();
        let ts: Vec<f64> = (0..5).map(|k| PI + k as f64).collect();
        let rows = sweep_t(&sys, 0.5, PI, &ts, &Default::default()).unwrap();
        assert_eq!(rows.len(), 5);
        assert_abs_diff_eq!(rows[0].bound_exponent, -0.413841, epsilon = 1e-5);
        for w in rows.windows(2) {
            assert!(w[1].bound_exponent < w[0].bound_exponent);
        }
        for r in &rows {
            assert!(r.spectral_abscissa <= -0.5 + 1e-9);
            assert!(r.spectral_abscissa <= r.bound_exponent + 1e-9);
        }
        assert!(sweep_t(&sys, 0.5, PI, &[1.0], &Default::default()).is_err());
    }
}
