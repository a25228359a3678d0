#![allow(dead_code)]

use coherence_bound::constraints::{Constraint, ConstraintSet};
use coherence_bound::linalg::{ComplexMatrix, DensityMatrix, HermitianOperator, PureState, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> HermitianOperator {
    let g = ComplexMatrix::from_fn(d, |_, _| gaussian(rng));
    HermitianOperator::new(g.add(&g.adjoint()).scale(0.5)).unwrap()
}

pub fn random_density(rng: &mut impl Rng, d: usize) -> DensityMatrix {
    let rank = rng.random_range(1..=d);
    let factor: Vec<C64> = (0..d * rank).map(|_| gaussian(rng)).collect();
    DensityMatrix::from_factor(d, &factor).unwrap()
}

pub fn random_pure(rng: &mut impl Rng, d: usize) -> PureState {
    PureState::normalized((0..d).map(|_| gaussian(rng)).collect()).unwrap()
}

/// Random diagonal phase unitary applied as `U rho U^dagger`.
pub fn phase_rotate(rng: &mut impl Rng, rho: &DensityMatrix) -> DensityMatrix {
    let d = rho.dim();
    let phases: Vec<C64> = (0..d)
        .map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let m = ComplexMatrix::from_fn(d, |i, j| {
        phases[i] * rho.matrix()[(i, j)] * phases[j].conj()
    });
    DensityMatrix::new(m).unwrap()
}

/// Intervals of half-width `width` around the expectations of `state`.
pub fn constraints_around(
    ops: Vec<HermitianOperator>,
    expectations: &[f64],
    width: f64,
) -> ConstraintSet {
    let d = ops[0].dim();
    let items = ops
        .into_iter()
        .zip(expectations)
        .map(|(operator, &t)| Constraint {
            operator,
            lower: t - width,
            upper: t + width,
        })
        .collect();
    ConstraintSet::new(d, items).unwrap()
}
