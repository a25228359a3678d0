//! Coherence measures in the computational basis.
//!
//! A measure is described by a [`MeasureDescriptor`]. Convex-roof measures only
//! provide a pure-state evaluation; the estimator then samples pure states.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_of, DensityMatrix, PureState, QuantumState};

/// A pluggable coherence measure.
#[derive(Clone, Copy)]
pub struct MeasureDescriptor {
    pub name: &'static str,
    /// When true the measure is only evaluated on pure states.
    pub is_convex_roof: bool,
    pub evaluate_mixed: Option<fn(&DensityMatrix) -> f64>,
    pub evaluate_pure: fn(&PureState) -> f64,
    /// Unit label written to result records.
    pub units: &'static str,
}

impl fmt::Debug for MeasureDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureDescriptor")
            .field("name", &self.name)
            .field("is_convex_roof", &self.is_convex_roof)
            .finish_non_exhaustive()
    }
}

impl PartialEq for MeasureDescriptor {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.is_convex_roof == other.is_convex_roof
    }
}

pub const L1: MeasureDescriptor = MeasureDescriptor {
    name: "l1",
    is_convex_roof: false,
    evaluate_mixed: Some(l1_coherence),
    evaluate_pure: l1_coherence_pure,
    units: "dimensionless",
};

pub const GEOMETRIC: MeasureDescriptor = MeasureDescriptor {
    name: "geometric",
    is_convex_roof: true,
    evaluate_mixed: None,
    evaluate_pure: geometric_coherence_pure,
    units: "dimensionless",
};

pub const RELATIVE_ENTROPY: MeasureDescriptor = MeasureDescriptor {
    name: "relative_entropy",
    is_convex_roof: false,
    evaluate_mixed: Some(relative_entropy_coherence),
    evaluate_pure: relative_entropy_coherence_pure,
    units: "bits",
};

pub const BUILTIN: [MeasureDescriptor; 3] = [L1, GEOMETRIC, RELATIVE_ENTROPY];

impl MeasureDescriptor {
    pub fn from_name(name: &str) -> Result<Self> {
        BUILTIN
            .iter()
            .find(|m| m.name == name)
            .copied()
            .ok_or_else(|| Error::UnknownMeasure(name.to_string()))
    }

    pub fn evaluate(&self, state: &QuantumState) -> Result<f64> {
        match state {
            QuantumState::Pure(psi) => Ok((self.evaluate_pure)(psi)),
            QuantumState::Mixed(rho) => match (self.is_convex_roof, self.evaluate_mixed) {
                (false, Some(f)) => Ok(f(rho)),
                _ => Err(Error::MixedStateForConvexRoof {
                    measure: self.name.to_string(),
                }),
            },
        }
    }
}

/// Sum of off-diagonal moduli.
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let d = m.dim();
    let mut total = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            total += m[(i, j)].norm() + m[(j, i)].norm();
        }
    }
    total
}

pub fn l1_coherence_pure(psi: &PureState) -> f64 {
    let a: Vec<f64> = psi.amplitudes().iter().map(|z| z.norm()).collect();
    let mut total = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            total += 2.0 * a[i] * a[j];
        }
    }
    total
}

/// `1 - max_i |<i|psi>|^2`.
pub fn geometric_coherence_pure(psi: &PureState) -> f64 {
    let max = psi
        .amplitudes()
        .iter()
        .map(|z| z.norm_sqr())
        .fold(0.0, f64::max);
    (1.0 - max).max(0.0)
}

/// `S(diag rho) - S(rho)` in bits.
pub fn relative_entropy_coherence(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let diag: Vec<f64> = (0..m.dim()).map(|i| m[(i, i)].re).collect();
    let spectrum = eigenvalues_of(m);
    (shannon_bits(&diag) - shannon_bits(&spectrum)).max(0.0)
}

pub fn relative_entropy_coherence_pure(psi: &PureState) -> f64 {
    let p: Vec<f64> = psi.amplitudes().iter().map(|z| z.norm_sqr()).collect();
    shannon_bits(&p)
}

/// Shannon entropy in bits; nonpositive entries contribute nothing.
fn shannon_bits(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ComplexMatrix, C64};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn uniform_state() -> PureState {
        PureState::new(vec![c(0.5); 4]).unwrap()
    }

    fn isotropic(p: f64) -> DensityMatrix {
        let id = ComplexMatrix::identity(4).scale((1.0 - p) / 4.0);
        DensityMatrix::new(id.add(&uniform_state().projector().matrix().scale(p))).unwrap()
    }

    #[test]
    fn l1_examples() {
        assert_eq!(l1_coherence(&DensityMatrix::maximally_mixed(4)), 0.0);
        assert!((l1_coherence(&uniform_state().projector()) - 3.0).abs() < 1e-14);
        assert!((l1_coherence(&isotropic(-0.3181)) - 0.9543).abs() < 1e-12);
    }

    #[test]
    fn geometric_examples() {
        assert_eq!(geometric_coherence_pure(&PureState::basis(4, 0)), 0.0);
        assert!((geometric_coherence_pure(&uniform_state()) - 0.75).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(vec![c(s), c(s), c(0.0), c(0.0)]).unwrap();
        assert!((geometric_coherence_pure(&plus) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn relative_entropy_examples() {
        assert!(relative_entropy_coherence(&DensityMatrix::maximally_mixed(4)).abs() < 1e-12);
        assert!((relative_entropy_coherence(&uniform_state().projector()) - 2.0).abs() < 1e-10);

        // rho = |+><+|/2 + |1><1|/2 = [[3/4, 1/4], [1/4, 1/4]]
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(vec![c(s), c(s)]).unwrap().projector();
        let rho = plus.mix(&PureState::basis(2, 0).projector(), 0.5).unwrap();
        // independent 2x2 spectrum: (1 +- sqrt(1 - 4 det)) / 2 with det = 1/8
        let root = (1.0f64 - 0.5).sqrt();
        let (l1, l2) = ((1.0 + root) / 2.0, (1.0 - root) / 2.0);
        let h = |x: f64| -x * x.log2();
        let expected = (h(0.75) + h(0.25)) - (h(l1) + h(l2));
        assert!((relative_entropy_coherence(&rho) - expected).abs() < 1e-12);
        assert!((expected - 0.210_402).abs() < 1e-6);
    }

    #[test]
    fn pure_and_mixed_evaluations_agree() {
        let psi = PureState::normalized(vec![
            C64::new(0.3, 0.1),
            C64::new(-0.7, 0.2),
            C64::new(0.1, -0.5),
            c(0.25),
        ])
        .unwrap();
        let rho = psi.projector();
        assert!((l1_coherence(&rho) - l1_coherence_pure(&psi)).abs() < 1e-12);
        assert!(
            (relative_entropy_coherence(&rho) - relative_entropy_coherence_pure(&psi)).abs()
                < 1e-10
        );
    }

    #[test]
    fn convex_roof_rejects_mixed_states() {
        let rho = QuantumState::Mixed(DensityMatrix::maximally_mixed(2));
        assert!(matches!(
            GEOMETRIC.evaluate(&rho),
            Err(Error::MixedStateForConvexRoof { .. })
        ));
        assert_eq!(L1.evaluate(&rho).unwrap(), 0.0);
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(MeasureDescriptor::from_name("l1").unwrap(), L1);
        assert_eq!(
            MeasureDescriptor::from_name("geometric").unwrap(),
            GEOMETRIC
        );
        assert!(MeasureDescriptor::from_name("l2").is_err());
    }
}
