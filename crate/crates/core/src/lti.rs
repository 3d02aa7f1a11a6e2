//! Linear time-invariant model `x' = Ax + Bu`: group propagation, the
//! controllability rank test, unweighted Gramians and the constants bounding
//! them, and the logarithmic-norm growth bound of the adjoint group.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, ensure_square, spectral_norm, symmetric_eigenvalues};
use crate::quadrature::{integrate_kernel, QuadratureConfig};

/// `e^{tA}` by scaling and squaring with Padé approximants.
pub fn expm(a: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    ensure_square(a, "A")?;
    ensure_finite(a, "A")?;
    if !t.is_finite() {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "time must be finite",
        });
    }
    if a.is_empty() {
        return Ok(a.clone());
    }
    Ok((a * t).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `e^{tA} x0`
    Forward,
    /// `e^{-tAᵀ} x0`, the adjoint group run backwards.
    BackwardAdjoint,
}

/// Bound `‖e^{-tAᵀ}‖ ≤ c·e^{γt}` for `t ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBound {
    pub c: f64,
    pub gamma: f64,
}

/// Extreme eigenvalues of the unweighted Gramian over `[0, horizon]`:
/// `c1` bounds the observed energy from above, `c2` from below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservabilityConstants {
    pub c1: f64,
    pub c2: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    label: String,
}

impl LtiSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, label: impl Into<String>) -> Result<Self> {
        ensure_square(&a, "A")?;
        if a.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                what: "state dimension n (must be >= 1)",
                expected: 1,
                got: 0,
            });
        }
        if b.ncols() == 0 {
            return Err(Error::DimensionMismatch {
                what: "control dimension m (must be >= 1)",
                expected: 1,
                got: 0,
            });
        }
        if b.nrows() != a.nrows() {
            return Err(Error::DimensionMismatch {
                what: "rows of B",
                expected: a.nrows(),
                got: b.nrows(),
            });
        }
        ensure_finite(&a, "A")?;
        ensure_finite(&b, "B")?;
        Ok(Self {
            a,
            b,
            label: label.into(),
        })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Same system with the control matrix scaled by `sigma`.
    pub fn with_scaled_control(&self, sigma: f64) -> Result<Self> {
        Self::new(self.a.clone(), &self.b * sigma, self.label.clone())
    }

    pub fn propagate(
        &self,
        x0: &DVector<f64>,
        t: f64,
        direction: Direction,
    ) -> Result<DVector<f64>> {
        if x0.len() != self.n() {
            return Err(Error::DimensionMismatch {
                what: "initial state",
                expected: self.n(),
                got: x0.len(),
            });
        }
        let group = match direction {
            Direction::Forward => expm(&self.a, t)?,
            Direction::BackwardAdjoint => expm(&self.a.transpose(), -t)?,
        };
        Ok(group * x0)
    }

    /// Dimension of the reachable subspace `span[B, AB, …, A^{n-1}B]`.
    ///
    /// The Krylov sequence is orthogonalized as it is generated (block
    /// Arnoldi with reorthogonalization) instead of forming raw powers of `A`,
    /// whose columns lose all numerical independence once `n` reaches a few
    /// dozen. A new direction counts when its residual exceeds
    /// `n · 1e-12` times the norm of the operator that produced it.
    pub fn controllability_rank(&self) -> usize {
        let n = self.n();
        let tol = n as f64 * 1e-12;
        let mut scale = spectral_norm(&self.b);
        let a_norm = spectral_norm(&self.a);

        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
        let mut frontier: Vec<DVector<f64>> =
            self.b.column_iter().map(|c| c.into_owned()).collect();

        while !frontier.is_empty() && basis.len() < n {
            let mut accepted = Vec::new();
            for mut v in frontier {
                for _ in 0..2 {
                    for q in &basis {
                        let p = q.dot(&v);
                        v.axpy(-p, q, 1.0);
                    }
                }
                let norm = v.norm();
                if norm > 0.0 && norm > tol * scale {
                    v /= norm;
                    basis.push(v.clone());
                    accepted.push(v);
                    if basis.len() == n {
                        break;
                    }
                }
            }
            frontier = accepted.iter().map(|q| &self.a * q).collect();
            scale = a_norm;
        }
        basis.len()
    }

    pub fn is_controllable(&self) -> bool {
        self.controllability_rank() == self.n()
    }

    pub(crate) fn require_controllable(&self) -> Result<()> {
        let rank = self.controllability_rank();
        if rank == self.n() {
            Ok(())
        } else {
            Err(Error::NotObservable { rank, n: self.n() })
        }
    }

    /// `M(T) = ∫₀ᵀ e^{-tA} B Bᵀ e^{-tAᵀ} dt`.
    pub fn unweighted_gramian(
        &self,
        horizon: f64,
        quad: &QuadratureConfig,
    ) -> Result<DMatrix<f64>> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "T",
                value: horizon,
                reason: "horizon must be positive and finite",
            });
        }
        let width = quad.panel_width(spectral_norm(&self.a), 1.0);
        let one = |_s: f64| 1.0;
        let mut out = integrate_kernel(&self.a, &self.b, &[0.0, horizon], width, quad, &[&one])?;
        Ok(out.matrices.swap_remove(0))
    }

    /// `c₁(T)`, the largest eigenvalue of `M(T)`. Unlike
    /// [`observability_constants`](Self::observability_constants) this does
    /// not need `M(T)` to be numerically definite, which matters for horizons
    /// shorter than the control time.
    pub fn direct_constant(&self, horizon: f64, quad: &QuadratureConfig) -> Result<f64> {
        let gramian = self.unweighted_gramian(horizon, quad)?;
        let ev = symmetric_eigenvalues(&gramian);
        Ok(ev[ev.len() - 1])
    }

    pub fn observability_constants(
        &self,
        horizon: f64,
        quad: &QuadratureConfig,
    ) -> Result<ObservabilityConstants> {
        self.require_controllable()?;
        let gramian = self.unweighted_gramian(horizon, quad)?;
        let ev = symmetric_eigenvalues(&gramian);
        let (c2, c1) = (ev[0], ev[ev.len() - 1]);
        if c2 <= 0.0 {
            return Err(Error::NotPositiveDefinite("unweighted Gramian"));
        }
        Ok(ObservabilityConstants { c1, c2, horizon })
    }

    /// Logarithmic-norm bound: `c = 1`, `γ = λ_max((−A − Aᵀ)/2)`.
    pub fn growth_bound(&self) -> GrowthBound {
        let neg_sym = -(&self.a + self.a.transpose()) * 0.5;
        let ev = symmetric_eigenvalues(&neg_sym);
        GrowthBound {
            c: 1.0,
            gamma: ev[ev.len() - 1],
        }
    }
}
