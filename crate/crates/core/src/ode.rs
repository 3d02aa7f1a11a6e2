//! Classical fourth-order Runge–Kutta on dense matrix states.

use nalgebra::DMatrix;

pub(crate) fn rk4_step<F>(f: &F, t: f64, x: &DMatrix<f64>, dt: f64) -> DMatrix<f64>
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    let half = 0.5 * dt;
    let k1 = f(t, x);
    let k2 = f(t + half, &(x + &k1 * half));
    let k3 = f(t + half, &(x + &k2 * half));
    let k4 = f(t + dt, &(x + &k3 * dt));
    x + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0)
}

/// Number of uniform steps covering `span` with steps no longer than `dt_max`.
pub(crate) fn step_count(span: f64, dt_max: f64) -> usize {
    // Guard against `span/dt_max` landing a hair above an integer.
    let ratio = span / dt_max;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * rounded.max(1.0) {
        rounded.max(1.0) as usize
    } else {
        ratio.ceil() as usize
    }
}
