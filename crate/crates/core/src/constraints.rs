//! Interval constraints `a_k <= Tr(rho O_k) <= b_k` and the Lagrangian
//!
//! ```text
//! L(rho, mu, nu) = C(rho) + sum_k mu_k (a_k - Tr(rho O_k)) + nu_k (Tr(rho O_k) - b_k)
//! ```

use crate::error::{Error, Result};
use crate::linalg::{HermitianOperator, QuantumState};
use crate::measures::MeasureDescriptor;

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub operator: HermitianOperator,
    pub lower: f64,
    pub upper: f64,
}

/// A nonempty list of interval constraints on one Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    dim: usize,
    items: Vec<Constraint>,
}

impl ConstraintSet {
    /// Validates dimensions and intervals. Indices in errors are 1-based.
    pub fn new(dim: usize, items: Vec<Constraint>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if items.is_empty() {
            return Err(Error::EmptyConstraints);
        }
        for (k, c) in items.iter().enumerate() {
            let index = k + 1;
            if c.operator.dim() != dim {
                return Err(Error::ConstraintDimension {
                    index,
                    expected: dim,
                    found: c.operator.dim(),
                });
            }
            if !c.lower.is_finite() || !c.upper.is_finite() {
                return Err(Error::NonFiniteBound { index });
            }
            if c.lower > c.upper {
                return Err(Error::InvertedInterval {
                    index,
                    lower: c.lower,
                    upper: c.upper,
                });
            }
        }
        Ok(Self { dim, items })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Constraint] {
        &self.items
    }

    /// `Tr(rho O_k)` for every constraint.
    pub fn expectations(&self, state: &QuantumState) -> Result<Vec<f64>> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: state.dim(),
            });
        }
        self.items
            .iter()
            .map(|c| state.expectation(&c.operator))
            .collect()
    }
}

/// Lagrange multipliers `(mu, nu) >= 0`, one pair per constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
}

impl Multipliers {
    pub fn new(mu: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        if mu.len() != nu.len() {
            return Err(Error::MultiplierLength {
                mu: mu.len(),
                nu: nu.len(),
                expected: mu.len().max(nu.len()),
            });
        }
        if mu.iter().chain(&nu).any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::NegativeMultiplier);
        }
        Ok(Self { mu, nu })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            mu: vec![0.0; n],
            nu: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// `[mu..., nu...]`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.mu.iter().chain(&self.nu).copied().collect()
    }

    /// Inverse of [`Multipliers::to_vec`]; entries are not validated.
    pub fn from_slice(x: &[f64]) -> Self {
        let n = x.len() / 2;
        Self {
            mu: x[..n].to_vec(),
            nu: x[n..].to_vec(),
        }
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.mu.len() != n || self.nu.len() != n {
            return Err(Error::MultiplierLength {
                mu: self.mu.len(),
                nu: self.nu.len(),
                expected: n,
            });
        }
        Ok(())
    }
}

/// Per-constraint slacks: `a_k - Tr(rho O_k)` and `Tr(rho O_k) - b_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Slacks {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

pub fn penalty_terms(state: &QuantumState, cs: &ConstraintSet) -> Result<Slacks> {
    let t = cs.expectations(state)?;
    Ok(slacks_from_expectations(&t, cs))
}

pub(crate) fn slacks_from_expectations(t: &[f64], cs: &ConstraintSet) -> Slacks {
    let lower = cs.items.iter().zip(t).map(|(c, &x)| c.lower - x).collect();
    let upper = cs.items.iter().zip(t).map(|(c, &x)| x - c.upper).collect();
    Slacks { lower, upper }
}

/// `C(state) + mu . lower_slack + nu . upper_slack`.
pub fn lagrangian(
    state: &QuantumState,
    m: &Multipliers,
    cs: &ConstraintSet,
    measure: &MeasureDescriptor,
) -> Result<f64> {
    m.check_len(cs.len())?;
    let slacks = penalty_terms(state, cs)?;
    let value = measure.evaluate(state)?;
    Ok(value + penalty(m, &slacks))
}

pub(crate) fn penalty(m: &Multipliers, s: &Slacks) -> f64 {
    let lower: f64 = m.mu.iter().zip(&s.lower).map(|(a, b)| a * b).sum();
    let upper: f64 = m.nu.iter().zip(&s.upper).map(|(a, b)| a * b).sum();
    lower + upper
}

/// True iff `a_k - tol <= Tr(rho O_k) <= b_k + tol` for all k.
pub fn is_feasible(state: &QuantumState, cs: &ConstraintSet, tol: f64) -> Result<bool> {
    let t = cs.expectations(state)?;
    Ok(cs
        .items
        .iter()
        .zip(&t)
        .all(|(c, &x)| c.lower - tol <= x && x <= c.upper + tol))
}
