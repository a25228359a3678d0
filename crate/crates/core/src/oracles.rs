//! Reference solutions that do not use the estimator.
//!
//! The photon fixture is `d = 4`, `O = |Psi><Psi|` with `Psi` the uniform
//! superposition, and one interval `a <= Tr(rho O) <= b`.
//!
//! * l1: the Lagrangian is invariant under basis permutations and convex, so
//!   the infimum may be taken over permutation-averaged states, which form the
//!   isotropic family `(1 - p) I/4 + p |Psi><Psi|`, `-1/3 <= p <= 1`. There
//!   `C_l1 = 3|p|` and `Tr(rho O) = (1 + 3p)/4`.
//! * geometric: `inf_psi L = min_i lambda_min((nu - mu) O - |i><i|) + a mu - b nu + 1`,
//!   and the smallest eigenvalue is `-(sqrt(x^2 + x + 1) - x + 1)/2` with `x = nu - mu`.
//!
//! [`brute_force_inner_infimum`] is a generic sampled upper bound on `inf L`
//! for small dimensions.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::constraints::{Constraint, ConstraintSet, Multipliers};
use crate::error::{Error, Result};
use crate::linalg::{
    ComplexMatrix, DensityMatrix, HermitianOperator, PureState, QuantumState, C64,
};
use crate::measures::MeasureDescriptor;

pub const PHOTON_DIM: usize = 4;
pub const PHOTON_LOWER: f64 = 0.0088;
pub const PHOTON_UPPER: f64 = 0.0114;

/// Interval data of the two-photon example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhotonFixture {
    pub lower: f64,
    pub upper: f64,
}

impl Default for PhotonFixture {
    fn default() -> Self {
        Self {
            lower: PHOTON_LOWER,
            upper: PHOTON_UPPER,
        }
    }
}

/// Optimal value and a maximizing multiplier pair of a photon dual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualSolution {
    pub lower_bound: f64,
    pub mu: f64,
    pub nu: f64,
}

impl PhotonFixture {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) {
            return Err(Error::NonFiniteBound { index: 1 });
        }
        if lower > upper {
            return Err(Error::InvertedInterval {
                index: 1,
                lower,
                upper,
            });
        }
        Ok(Self { lower, upper })
    }

    pub fn psi() -> PureState {
        PureState::new(vec![C64::new(0.5, 0.0); PHOTON_DIM])
            .expect("uniform superposition is normalized")
    }

    pub fn operator() -> HermitianOperator {
        HermitianOperator::projector(Self::psi().amplitudes()).expect("projector is Hermitian")
    }

    pub fn constraint_set(&self) -> ConstraintSet {
        ConstraintSet::new(
            PHOTON_DIM,
            vec![Constraint {
                operator: Self::operator(),
                lower: self.lower,
                upper: self.upper,
            }],
        )
        .expect("fixture bounds were validated")
    }

    /// `(1 - p) I/4 + p |Psi><Psi|`; a state for `-1/3 <= p <= 1`.
    pub fn isotropic_state(p: f64) -> Result<DensityMatrix> {
        let id = ComplexMatrix::identity(PHOTON_DIM).scale((1.0 - p) / 4.0);
        DensityMatrix::new(id.add(&Self::operator().matrix().scale(p)))
    }

    /// Lagrangian of the isotropic state with parameter `p`.
    pub fn l1_family_lagrangian(&self, p: f64, m: &Multipliers) -> f64 {
        let t = (1.0 + 3.0 * p) / 4.0;
        3.0 * p.abs() + m.mu[0] * (self.lower - t) + m.nu[0] * (t - self.upper)
    }

    /// Infimum of the family Lagrangian over `p` in `p_range`.
    ///
    /// The expression is linear in `p` on each side of 0, so the minimum sits at
    /// an endpoint or at `p = 0`.
    pub fn l1_dual_inner(&self, p_range: (f64, f64), m: &Multipliers) -> f64 {
        let (lo, hi) = p_range;
        let mut best = self
            .l1_family_lagrangian(lo, m)
            .min(self.l1_family_lagrangian(hi, m));
        if lo <= 0.0 && 0.0 <= hi {
            best = best.min(self.l1_family_lagrangian(0.0, m));
        }
        best
    }

    /// `sup_{mu, nu >= 0}` of [`Self::l1_dual_inner`] over `p in [-1/3, 1]`.
    ///
    /// The supremum is `min 3|p|` over the feasible part of the family: zero if
    /// `p = 0` is feasible, otherwise attained at the feasible endpoint nearest
    /// zero, with multiplier 4 on the active bound. Infeasible data give `+inf`.
    pub fn l1_lower_bound_analytic(&self) -> DualSolution {
        let p_lo = ((4.0 * self.lower - 1.0) / 3.0).max(-1.0 / 3.0);
        let p_hi = ((4.0 * self.upper - 1.0) / 3.0).min(1.0);
        if p_lo > p_hi {
            return DualSolution {
                lower_bound: f64::INFINITY,
                mu: 0.0,
                nu: 0.0,
            };
        }
        if p_hi < 0.0 {
            DualSolution {
                lower_bound: 3.0 * p_hi.abs(),
                mu: 0.0,
                nu: 4.0,
            }
        } else if p_lo > 0.0 {
            DualSolution {
                lower_bound: 3.0 * p_lo,
                mu: 4.0,
                nu: 0.0,
            }
        } else {
            DualSolution {
                lower_bound: 0.0,
                mu: 0.0,
                nu: 0.0,
            }
        }
    }

    /// Closed form of `inf_psi L_g(psi, mu, nu)`.
    pub fn geometric_dual_objective(&self, m: &Multipliers) -> f64 {
        let (mu, nu) = (m.mu[0], m.nu[0]);
        let x = nu - mu;
        -0.5 * (x * x + x + 1.0).sqrt() + (self.lower - 0.5) * mu + (0.5 - self.upper) * nu + 0.5
    }

    /// The dual objective maximized over `(mu, nu) >= 0` with `nu - mu = x` fixed.
    ///
    /// For fixed `x` the objective changes with `mu` at rate `a - b <= 0`, so the
    /// smallest admissible `mu = max(0, -x)` is optimal.
    pub fn geometric_ridge(&self, x: f64) -> f64 {
        let (mu, nu) = ridge_point(x);
        self.geometric_dual_objective(&Multipliers {
            mu: vec![mu],
            nu: vec![nu],
        })
    }

    /// Maximizes the geometric dual along the ridge by golden-section search.
    ///
    /// Requires `upper > 0` (otherwise the dual has no finite maximizer).
    pub fn geometric_lower_bound_analytic(&self) -> DualSolution {
        let h = |x: f64| self.geometric_ridge(x);
        // the ridge is concave; widen the bracket until both ends fall off
        let mut r = 1.0;
        while r < 1e12 && (h(r) >= h(r / 2.0) || h(-r) >= h(-r / 2.0)) {
            r *= 2.0;
        }
        let (mut lo, mut hi) = (-r, r);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let (mut f1, mut f2) = (h(x1), h(x2));
        while hi - lo > 1e-11 * (1.0 + lo.abs().max(hi.abs())) {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = h(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = h(x1);
            }
        }
        let x = 0.5 * (lo + hi);
        let (mu, nu) = ridge_point(x);
        DualSolution {
            lower_bound: h(x),
            mu,
            nu,
        }
    }
}

fn ridge_point(x: f64) -> (f64, f64) {
    let mu = (-x).max(0.0);
    (mu, mu + x)
}

/// `-(sqrt(x^2 + x + 1) - x + 1) / 2`, the smallest eigenvalue of `x O - |i><i|`.
pub fn photon_min_eigenvalue(x: f64) -> f64 {
    -0.5 * ((x * x + x + 1.0).sqrt() - x + 1.0)
}

/// Draws feasible mixed states of the photon fixture by rejection.
///
/// Candidates are isotropic states near the feasible band mixed with a
/// random-rank state, plus unmixed random states; only those inside the
/// interval are kept. Stops after `count` states or `100_000 * count` candidates.
pub fn feasible_photon_states(
    fixture: &PhotonFixture,
    count: usize,
    seed: u64,
) -> Vec<DensityMatrix> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let op = PhotonFixture::operator();
    let p_lo = ((4.0 * fixture.lower - 1.0) / 3.0).max(-1.0 / 3.0);
    let p_hi = ((4.0 * fixture.upper - 1.0) / 3.0).min(1.0);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count && attempts < 100_000 * count.max(1) {
        attempts += 1;
        let sigma = random_rank_state(&mut rng, PHOTON_DIM);
        let rho = if attempts.is_multiple_of(4) {
            sigma
        } else {
            let p = rng
                .random_range(p_lo - 0.02..=p_hi + 0.02)
                .clamp(-1.0 / 3.0, 1.0);
            let w: f64 = rng.random_range(0.0..0.1);
            let Ok(iso) = PhotonFixture::isotropic_state(p) else {
                continue;
            };
            let Ok(mixed) = sigma.mix(&iso, w) else {
                continue;
            };
            mixed
        };
        let Ok(t) = crate::linalg::trace_inner_product(&rho, &op) else {
            continue;
        };
        if fixture.lower <= t && t <= fixture.upper {
            out.push(rho);
        }
    }
    out
}

/// Draws feasible Haar-random pure states of the photon fixture by rejection.
pub fn feasible_photon_pure_states(
    fixture: &PhotonFixture,
    count: usize,
    seed: u64,
) -> Vec<PureState> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let op = PhotonFixture::operator();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count && attempts < 100_000 * count.max(1) {
        attempts += 1;
        let v: Vec<C64> = (0..PHOTON_DIM).map(|_| gaussian(&mut rng)).collect();
        let Ok(psi) = PureState::normalized(v) else {
            continue;
        };
        let Ok(t) = crate::linalg::expectation_pure(&psi, &op) else {
            continue;
        };
        if fixture.lower <= t && t <= fixture.upper {
            out.push(psi);
        }
    }
    out
}

fn gaussian<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_rank_state<R: Rng>(rng: &mut R, dim: usize) -> DensityMatrix {
    let rank = rng.random_range(1..=dim);
    let factor: Vec<C64> = (0..dim * rank).map(|_| gaussian(rng)).collect();
    DensityMatrix::from_factor(dim, &factor).expect("Gaussian factor is nonzero")
}

const CHUNK: usize = 10_000;
const POLISHED: usize = 8;
const MAX_SWEEPS: usize = 2_000;

/// Sampled upper bound on `inf L(state, m)`, for `d <= 4`.
///
/// Scans `samples` random states (Haar pure states for convex-roof measures,
/// random-rank mixed states otherwise), then polishes the best few by
/// coordinate descent on their Gaussian factors. Chunks use independent
/// seeded streams, so the result does not depend on the thread count.
pub fn brute_force_inner_infimum(
    cs: &ConstraintSet,
    measure: &MeasureDescriptor,
    m: &Multipliers,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let dim = cs.dim();
    if dim > 4 {
        return Err(Error::OracleDimension(dim));
    }
    if samples == 0 {
        return Err(Error::EmptySample);
    }
    m.check_len(cs.len())?;
    let pure = measure.is_convex_roof;
    let eval = |factor: &[C64]| -> f64 { factor_lagrangian(factor, dim, pure, cs, measure, m) };

    let chunks = samples.div_ceil(CHUNK);
    let mut winners: Vec<(f64, usize, Vec<C64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = CHUNK.min(samples - c * CHUNK);
            let mut best = (f64::INFINITY, c, Vec::new());
            for _ in 0..n {
                let rank = if pure { 1 } else { rng.random_range(1..=dim) };
                let factor: Vec<C64> = (0..dim * rank).map(|_| gaussian(&mut rng)).collect();
                let l = eval(&factor);
                if l < best.0 {
                    best = (l, c, factor);
                }
            }
            best
        })
        .collect();
    winners.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    winners.truncate(POLISHED);

    let polished: Vec<f64> = winners
        .into_par_iter()
        .map(|(l, _, factor)| coordinate_descent(factor, l, &eval))
        .collect();
    Ok(polished.into_iter().fold(f64::INFINITY, f64::min))
}

fn factor_lagrangian(
    factor: &[C64],
    dim: usize,
    pure: bool,
    cs: &ConstraintSet,
    measure: &MeasureDescriptor,
    m: &Multipliers,
) -> f64 {
    let state: QuantumState = if pure {
        match PureState::normalized(factor.to_vec()) {
            Ok(psi) => psi.into(),
            Err(_) => return f64::INFINITY,
        }
    } else {
        match DensityMatrix::from_factor(dim, factor) {
            Ok(rho) => rho.into(),
            Err(_) => return f64::INFINITY,
        }
    };
    crate::constraints::lagrangian(&state, m, cs, measure).unwrap_or(f64::INFINITY)
}

/// Pattern search over the real and imaginary parts of the factor entries.
fn coordinate_descent(mut factor: Vec<C64>, mut best: f64, eval: &impl Fn(&[C64]) -> f64) -> f64 {
    if factor.is_empty() {
        return best;
    }
    let norm = factor.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut factor {
        *z /= norm;
    }
    let mut step = 0.1;
    let mut sweeps = 0;
    while step > 1e-9 && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut improved = false;
        for i in 0..factor.len() {
            for dir in [
                C64::new(1.0, 0.0),
                C64::new(-1.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, -1.0),
            ] {
                let old = factor[i];
                factor[i] = old + dir * step;
                let l = eval(&factor);
                if l < best {
                    best = l;
                    improved = true;
                } else {
                    factor[i] = old;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}
