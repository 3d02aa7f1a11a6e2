//! Composite Gauss–Legendre quadrature of the Gramian kernel
//! `s -> e^{-sA} B Bᵀ e^{-sAᵀ}` against one or more scalar weights.
//!
//! Panels never straddle a breakpoint, so piecewise weights stay analytic on
//! every panel. The panel width is capped by the caller (typically
//! `min(1, 1/(2ω))`) and additionally by `oscillation_budget / ‖A‖₂`, which
//! keeps the number of kernel oscillations per panel bounded for stiff
//! generators such as a finely discretized string.

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes per panel unless overridden.
pub const DEFAULT_NODES: usize = 16;

/// Default bound on `h · ‖A‖₂` for a single panel.
pub const DEFAULT_OSCILLATION_BUDGET: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub nodes_per_panel: usize,
    pub oscillation_budget: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes_per_panel: DEFAULT_NODES,
            oscillation_budget: DEFAULT_OSCILLATION_BUDGET,
        }
    }
}

impl QuadratureConfig {
    pub fn with_nodes(nodes_per_panel: usize) -> Self {
        Self {
            nodes_per_panel,
            ..Self::default()
        }
    }

    /// Largest admissible panel width for a generator of spectral norm `a_norm`.
    pub fn panel_width(&self, a_norm: f64, cap: f64) -> f64 {
        let mut h = cap.min(1.0);
        if a_norm > 0.0 {
            h = h.min(self.oscillation_budget / a_norm);
        }
        h
    }

    fn rule(&self) -> Result<GaussLegendre> {
        if !(self.oscillation_budget > 0.0 && self.oscillation_budget.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "oscillation_budget",
                value: self.oscillation_budget,
                reason: "must be positive and finite",
            });
        }
        GaussLegendre::new(self.nodes_per_panel).map_err(|_| {
            Error::Quadrature(format!(
                "Gauss-Legendre rule needs at least 2 nodes, got {}",
                self.nodes_per_panel
            ))
        })
    }
}

pub(crate) struct KernelIntegrals {
    pub matrices: Vec<DMatrix<f64>>,
    pub nodes: usize,
}

/// Integrates `weight_k(s) · e^{-sA} B Bᵀ e^{-sAᵀ}` over the union of the
/// segments delimited by `breakpoints`, for every weight at once.
pub(crate) fn integrate_kernel(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    breakpoints: &[f64],
    max_width: f64,
    config: &QuadratureConfig,
    weights: &[&dyn Fn(f64) -> f64],
) -> Result<KernelIntegrals> {
    let rule = config.rule()?;
    let n = a.nrows();
    let mut matrices = vec![DMatrix::<f64>::zeros(n, n); weights.len()];
    let mut nodes = 0;

    for seg in breakpoints.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let len = hi - lo;
        if len <= 0.0 {
            continue;
        }
        let panels = (len / max_width).ceil().max(1.0) as usize;
        let h = len / panels as f64;

        // Node offsets are shared by every panel of this segment.
        let offsets: Vec<(f64, f64, DMatrix<f64>)> = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| {
                let delta = 0.5 * (x + 1.0) * h;
                (delta, 0.5 * h * w, (a * -delta).exp())
            })
            .collect();

        for k in 0..panels {
            let start = lo + k as f64 * h;
            let y0 = (a * -start).exp() * b;
            for (delta, w, e) in &offsets {
                let y = e * &y0;
                let outer = &y * y.transpose();
                let s = start + delta;
                for (acc, weight) in matrices.iter_mut().zip(weights) {
                    let coef = w * weight(s);
                    if coef != 0.0 {
                        acc.zip_apply(&outer, |a, o| *a += coef * o);
                    }
                }
                nodes += 1;
            }
        }
    }

    for m in &mut matrices {
        let sym = (&*m + m.transpose()) * 0.5;
        *m = sym;
    }
    Ok(KernelIntegrals { matrices, nodes })
}
