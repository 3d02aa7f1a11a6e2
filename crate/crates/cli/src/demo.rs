//! Built-in systems.
//!
//! `string` is a semi-discretized vibrating string of unit length and unit
//! wave speed with fixed ends, written in energy coordinates
//! `z = (K^{1/2}u, u')` so that the generator `[[0, K^{1/2}], [−K^{1/2}, 0]]`
//! is skew-symmetric and the Euclidean norm is the discrete energy. The
//! stiffness is sine-spectral on `N` interior nodes, so the frequencies are
//! exactly `π, 2π, …, Nπ` and the control time is 2. Control is a single
//! column, a decreasing ramp over the first few nodes next to the left end. This is a bounded-control stand-in: genuine
//! Dirichlet boundary control is unbounded and has no finite-dimensional
//! counterpart here.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rapidstab::LtiSystem;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Demo {
    Oscillator,
    Scalar,
    String { nodes: usize, control_width: usize },
    Skew { n: usize, seed: u64 },
}

impl Demo {
    pub fn default_string_width(nodes: usize) -> usize {
        (nodes / 4).max(1)
    }

    /// Parses `oscillator`, `scalar`, `string`, `string(20)`, `string(20,5)`,
    /// `skew(4)`, `skew(4,7)`; `seed` fills in for a skew system without one.
    pub fn parse(name: &str, seed: Option<u64>) -> Result<Self> {
        let unknown = || CliError::UnknownDemo(name.to_string());
        let compact: String = name.chars().filter(|c| !c.is_whitespace()).collect();
        let (head, args) = match compact.find(['(', ':']) {
            Some(i) => {
                let rest = compact[i + 1..].trim_end_matches(')');
                (&compact[..i], rest)
            }
            None => (compact.as_str(), ""),
        };
        let nums: Vec<u64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|s| s.parse::<u64>().map_err(|_| unknown()))
                .collect::<Result<_>>()?
        };
        match (head, nums.as_slice()) {
            ("oscillator", []) => Ok(Demo::Oscillator),
            ("scalar", []) => Ok(Demo::Scalar),
            ("string", []) => Ok(Demo::String {
                nodes: 20,
                control_width: Self::default_string_width(20),
            }),
            ("string", [n]) => Ok(Demo::String {
                nodes: *n as usize,
                control_width: Self::default_string_width(*n as usize),
            }),
            ("string", [n, w]) => Ok(Demo::String {
                nodes: *n as usize,
                control_width: *w as usize,
            }),
            ("skew", [n]) => Ok(Demo::Skew {
                n: *n as usize,
                seed: seed.unwrap_or(0),
            }),
            ("skew", [n, s]) => Ok(Demo::Skew {
                n: *n as usize,
                seed: *s,
            }),
            _ => Err(unknown()),
        }
    }

    pub fn build(&self) -> Result<LtiSystem> {
        match *self {
            Demo::Oscillator => Ok(LtiSystem::new(
                DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
                DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
                self.to_string(),
            )?),
            Demo::Scalar => Ok(LtiSystem::new(
                DMatrix::zeros(1, 1),
                DMatrix::from_element(1, 1, 1.0),
                self.to_string(),
            )?),
            Demo::String {
                nodes,
                control_width,
            } => string_system(nodes, control_width, self.to_string()),
            Demo::Skew { n, seed } => skew_system(n, seed, self.to_string()),
        }
    }
}

impl fmt::Display for Demo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Demo::Oscillator => write!(f, "oscillator"),
            Demo::Scalar => write!(f, "scalar"),
            Demo::String {
                nodes,
                control_width,
            } => write!(f, "string({nodes},{control_width})"),
            Demo::Skew { n, seed } => write!(f, "skew({n},{seed})"),
        }
    }
}

impl FromStr for Demo {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Demo::parse(s, None)
    }
}

pub fn demo_system(name: &str, seed: Option<u64>) -> Result<LtiSystem> {
    Demo::parse(name, seed)?.build()
}

fn string_system(nodes: usize, control_width: usize, label: String) -> Result<LtiSystem> {
    if nodes < 2 {
        return Err(CliError::Usage(format!(
            "string demo needs at least 2 nodes, got {nodes}"
        )));
    }
    if control_width == 0 || control_width > nodes {
        return Err(CliError::Usage(format!(
            "string control width must lie in 1..={nodes}, got {control_width}"
        )));
    }
    // Sine-spectral stiffness: K^{1/2} = S diag(jπ) S with the orthogonal,
    // symmetric sine transform S. Finite differences bunch the top
    // frequencies together and leave the short-horizon Gramian numerically
    // singular for a single input.
    let scale = (2.0 / (nodes + 1) as f64).sqrt();
    let theta = std::f64::consts::PI / (nodes + 1) as f64;
    let sine = DMatrix::from_fn(nodes, nodes, |i, j| {
        scale * (((i + 1) * (j + 1)) as f64 * theta).sin()
    });
    let freqs = DVector::from_fn(nodes, |j, _| std::f64::consts::PI * (j + 1) as f64);
    let root = &sine * DMatrix::from_diagonal(&freqs) * &sine;
    let root = (&root + root.transpose()) * 0.5;

    let n = 2 * nodes;
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, nodes), (nodes, nodes)).copy_from(&root);
    a.view_mut((nodes, 0), (nodes, nodes)).copy_from(&(-&root));

    // Decreasing ramp on the first `control_width` nodes; a flat profile
    // would be orthogonal to some modes for certain widths.
    let mut b = DMatrix::zeros(n, 1);
    for k in 0..control_width {
        b[(nodes + k, 0)] = (control_width - k) as f64 / control_width as f64;
    }
    Ok(LtiSystem::new(a, b, label)?)
}

fn skew_system(n: usize, seed: u64, label: String) -> Result<LtiSystem> {
    if n == 0 {
        return Err(CliError::Usage("skew demo needs n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let a = &g - g.transpose();
    let m = n.div_ceil(4);
    let b = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
    Ok(LtiSystem::new(a, b, label)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillator_matrices() {
        let s = demo_system("oscillator", None).unwrap();
        assert_eq!(
            s.a(),
            &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
        );
        assert_eq!(s.b(), &DMatrix::from_column_slice(2, 1, &[0.0, 1.0]));
    }

    #[test]
    fn scalar_demo() {
        let s = demo_system("scalar", None).unwrap();
        assert_eq!(s.a()[(0, 0)], 0.0);
        assert_eq!(s.b()[(0, 0)], 1.0);
    }

    #[test]
    fn skew_is_deterministic_and_skew() {
        let a = demo_system("skew(4,7)", None).unwrap();
        let b = demo_system("skew(4)", Some(7)).unwrap();
        assert_eq!(a.a(), b.a());
        assert_eq!(a.b(), b.b());
        assert_eq!(a.a().transpose(), -a.a());
        assert!(a.is_controllable());
        let c = demo_system("skew(4,8)", None).unwrap();
        assert_ne!(a.a(), c.a());
    }

    #[test]
    fn string_is_skew_and_controllable() {
        for nodes in [2, 5, 10, 20, 30, 40] {
            let s = demo_system(&format!("string({nodes})"), None).unwrap();
            assert_eq!(s.n(), 2 * nodes);
            assert!((s.a() + s.a().transpose()).amax() < 1e-10);
            assert!(
                s.is_controllable(),
                "string({nodes}) rank {}",
                s.controllability_rank()
            );
        }
    }

    #[test]
    fn names_parse() {
        assert_eq!(
            Demo::parse("string(20)", None).unwrap(),
            Demo::String {
                nodes: 20,
                control_width: 5
            }
        );
        assert_eq!(
            Demo::parse("string:8,2", None).unwrap(),
            Demo::String {
                nodes: 8,
                control_width: 2
            }
        );
        assert!(matches!(
            Demo::parse("pendulum", None),
            Err(CliError::UnknownDemo(_))
        ));
        assert!(matches!(
            Demo::parse("skew(x)", None),
            Err(CliError::UnknownDemo(_))
        ));
        assert!(demo_system("string(1)", None).is_err());
    }
}
