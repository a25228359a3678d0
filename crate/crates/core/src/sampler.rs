//! Seeded random sample sets of quantum states.
//!
//! States are generated from Gaussian factors: a pure state is a normalized
//! complex Gaussian vector (Haar measure) and a mixed state is `G G^dagger / Tr`
//! for a complex Gaussian `d x r` matrix `G` (induced measure of rank `r`).
//!
//! Two independent ChaCha20 streams are kept per set. Stream 0 draws fresh
//! states from the base ensemble, stream 1 drives [`SampleSet::refine`], which
//! appends random perturbations of chosen members. Both streams continue where
//! they stopped, so a set is a pure function of its seed and the sequence of
//! `extend_random`/`refine` calls made on it.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, DensityMatrix, HermitianOperator, PureState, QuantumState, C64,
};

pub const RNG_ALGORITHM: &str =
    "ChaCha20 (rand_chacha 0.9); stream 0 base ensemble, stream 1 refinement";

const BASE_STREAM: u64 = 0;
const REFINE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    Mixed,
    Pure,
}

impl SampleMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Mixed => "mixed",
            Self::Pure => "pure",
        }
    }
}

/// Distribution of mixed states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixedEnsemble {
    /// Square Ginibre factor: full-rank Hilbert-Schmidt measure.
    HilbertSchmidt,
    /// Rank drawn uniformly from `1..=d`, then an induced-measure state of that rank.
    #[default]
    RandomRank,
}

/// Perturbation moves used by [`SampleSet::refine`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RefineParams {
    /// Share of each enlargement produced by refinement rather than the base ensemble.
    pub fraction: f64,
    /// Number of lowest-Lagrangian states used as parents.
    pub elites: usize,
    /// Perturbation sizes are log-uniform in `[min_scale, max_scale]`.
    pub min_scale: f64,
    pub max_scale: f64,
    /// Probability that the noise touches a single factor entry.
    pub sparse_probability: f64,
    /// Probability that a mixed parent is replaced by its dominant eigenvector.
    pub purify_probability: f64,
    /// Probability that a mixed child is a convex mixture of two parents instead.
    pub mix_probability: f64,
}

impl Default for RefineParams {
    fn default() -> Self {
        Self {
            fraction: 0.8,
            elites: 5,
            min_scale: 1e-4,
            max_scale: 10f64.powf(-0.5),
            sparse_probability: 0.5,
            purify_probability: 0.1,
            mix_probability: 0.3,
        }
    }
}

impl RefineParams {
    /// No refinement: every new state comes from the base ensemble.
    pub fn disabled() -> Self {
        Self {
            fraction: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.fraction)
            || !prob(self.sparse_probability)
            || !prob(self.purify_probability)
            || !prob(self.mix_probability)
        {
            return Err(Error::InvalidSchedule(
                "refinement probabilities must lie in [0, 1]".into(),
            ));
        }
        if !(self.min_scale > 0.0 && self.min_scale <= self.max_scale && self.max_scale.is_finite())
        {
            return Err(Error::InvalidSchedule(
                "refinement scales must satisfy 0 < min_scale <= max_scale".into(),
            ));
        }
        if self.fraction > 0.0 && self.elites == 0 {
            return Err(Error::InvalidSchedule(
                "refinement needs at least one elite".into(),
            ));
        }
        Ok(())
    }
}

/// An ordered, seeded collection of states of one kind.
#[derive(Debug, Clone)]
pub struct SampleSet {
    mode: SampleMode,
    ensemble: MixedEnsemble,
    dim: usize,
    seed: u64,
    states: Vec<QuantumState>,
    // column-major d x rank factor of each state
    factors: Vec<Vec<C64>>,
    base_rng: ChaCha20Rng,
    refine_rng: ChaCha20Rng,
}

impl PartialEq for SampleSet {
    fn eq(&self, other: &Self) -> bool {
        self.mode == other.mode
            && self.ensemble == other.ensemble
            && self.dim == other.dim
            && self.seed == other.seed
            && self.states == other.states
    }
}

fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn gaussian<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Builds the state for a column-major `dim x rank` factor.
fn state_from_factor(mode: SampleMode, dim: usize, factor: &[C64]) -> Result<QuantumState> {
    match mode {
        SampleMode::Pure => Ok(PureState::normalized(factor.to_vec())?.into()),
        SampleMode::Mixed => Ok(DensityMatrix::from_factor(dim, factor)?.into()),
    }
}

impl SampleSet {
    pub fn empty(mode: SampleMode, ensemble: MixedEnsemble, dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            mode,
            ensemble,
            dim,
            seed,
            states: Vec::new(),
            factors: Vec::new(),
            base_rng: stream(seed, BASE_STREAM),
            refine_rng: stream(seed, REFINE_STREAM),
        })
    }

    pub fn mode(&self) -> SampleMode {
        self.mode
    }

    pub fn ensemble(&self) -> MixedEnsemble {
        self.ensemble
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[QuantumState] {
        &self.states
    }

    /// Returns a copy extended by `additional` base-ensemble states.
    pub fn enlarge(&self, additional: usize) -> Result<Self> {
        let mut out = self.clone();
        out.extend_random(additional)?;
        Ok(out)
    }

    /// Appends `additional` states drawn from the base stream.
    pub fn extend_random(&mut self, additional: usize) -> Result<()> {
        if additional == 0 {
            return Err(Error::EmptySample);
        }
        self.states.reserve(additional);
        for _ in 0..additional {
            let factor = self.draw_factor();
            self.push(factor)?;
        }
        Ok(())
    }

    fn draw_factor(&mut self) -> Vec<C64> {
        let d = self.dim;
        let rank = match (self.mode, self.ensemble) {
            (SampleMode::Pure, _) => 1,
            (SampleMode::Mixed, MixedEnsemble::HilbertSchmidt) => d,
            (SampleMode::Mixed, MixedEnsemble::RandomRank) => self.base_rng.random_range(1..=d),
        };
        (0..d * rank)
            .map(|_| gaussian(&mut self.base_rng))
            .collect()
    }

    fn push(&mut self, factor: Vec<C64>) -> Result<()> {
        let state = state_from_factor(self.mode, self.dim, &factor)?;
        self.states.push(state);
        self.factors.push(factor);
        Ok(())
    }

    /// Appends `count` perturbations of the states at `parents`, cycling through them.
    ///
    /// Each child takes its parent's factor (unit Frobenius norm) and adds complex
    /// Gaussian noise of a log-uniform size; with `sparse_probability` the noise
    /// hits one entry only. A mixed parent of rank > 1 is, with
    /// `purify_probability`, replaced by its dominant eigenvector instead. With
    /// `mix_probability` a mixed child is `(1 - w) rho_a + w rho_b` for two
    /// distinct parents and uniform `w`.
    pub fn refine(&mut self, parents: &[usize], count: usize, params: &RefineParams) -> Result<()> {
        if count == 0 {
            return Err(Error::EmptySample);
        }
        if parents.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(&bad) = parents.iter().find(|&&p| p >= self.states.len()) {
            return Err(Error::DimensionMismatch {
                expected: self.states.len(),
                found: bad,
            });
        }
        let (lo, hi) = (params.min_scale.log10(), params.max_scale.log10());
        for j in 0..count {
            let parent = parents[j % parents.len()];
            let mut factor = self.factors[parent].clone();
            let norm = factor.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in &mut factor {
                *z /= norm;
            }
            let rank = factor.len() / self.dim;
            let scale = 10f64.powf(self.refine_rng.random_range(lo..=hi));
            let purify: f64 = self.refine_rng.random();
            if self.mode == SampleMode::Mixed && rank > 1 && purify < params.purify_probability {
                let rho = self.states[parent].to_density();
                let eig = hermitian_eigen(&HermitianOperator::new(rho.matrix().clone())?);
                self.push(eig.vector(self.dim - 1))?;
                continue;
            }
            if self.mode == SampleMode::Mixed && parents.len() > 1 {
                let mix: f64 = self.refine_rng.random();
                if mix < params.mix_probability {
                    let offset = self.refine_rng.random_range(1..parents.len());
                    let other = parents[(j + offset) % parents.len()];
                    let w: f64 = self.refine_rng.random();
                    let child = self.mixture_factor(parent, other, w)?;
                    self.push(child)?;
                    continue;
                }
            }
            let sparse: f64 = self.refine_rng.random();
            if sparse < params.sparse_probability {
                let at = self.refine_rng.random_range(0..factor.len());
                factor[at] += gaussian(&mut self.refine_rng) * scale;
            } else {
                for z in &mut factor {
                    *z += gaussian(&mut self.refine_rng) * scale;
                }
            }
            self.push(factor)?;
        }
        Ok(())
    }
}

impl SampleSet {
    /// Factor of `(1 - w) rho_a + w rho_b`, compressed to at most `dim` columns.
    fn mixture_factor(&self, a: usize, b: usize, w: f64) -> Result<Vec<C64>> {
        let unit = |f: &[C64], weight: f64| -> Vec<C64> {
            let norm = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            f.iter().map(|z| z * (weight.sqrt() / norm)).collect()
        };
        let mut factor = unit(&self.factors[a], 1.0 - w);
        factor.extend(unit(&self.factors[b], w));
        if factor.len() <= self.dim * self.dim {
            return Ok(factor);
        }
        let d = self.dim;
        let rho = DensityMatrix::from_factor(d, &factor)?;
        let eig = hermitian_eigen(&HermitianOperator::new(rho.matrix().clone())?);
        let mut out = Vec::with_capacity(d * d);
        for k in 0..d {
            let s = eig.values[k].max(0.0).sqrt();
            out.extend(eig.vector(k).iter().map(|z| z * s));
        }
        Ok(out)
    }
}

/// `count` mixed states from the default ensemble.
pub fn sample_mixed(count: usize, dim: usize, seed: u64) -> Result<SampleSet> {
    sample_mixed_with(count, dim, seed, MixedEnsemble::default())
}

pub fn sample_mixed_with(
    count: usize,
    dim: usize,
    seed: u64,
    ensemble: MixedEnsemble,
) -> Result<SampleSet> {
    let mut set = SampleSet::empty(SampleMode::Mixed, ensemble, dim, seed)?;
    set.extend_random(count)?;
    Ok(set)
}

/// `count` Haar-random pure states.
pub fn sample_pure(count: usize, dim: usize, seed: u64) -> Result<SampleSet> {
    let mut set = SampleSet::empty(SampleMode::Pure, MixedEnsemble::default(), dim, seed)?;
    set.extend_random(count)?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::purity;
    use crate::tolerances;

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(
            sample_mixed(50, 4, 7).unwrap(),
            sample_mixed(50, 4, 7).unwrap()
        );
        assert_eq!(
            sample_pure(50, 4, 7).unwrap(),
            sample_pure(50, 4, 7).unwrap()
        );
        assert_ne!(
            sample_pure(50, 4, 7).unwrap(),
            sample_pure(50, 4, 8).unwrap()
        );
    }

    #[test]
    fn mixed_samples_are_valid_states() {
        for ensemble in [MixedEnsemble::HilbertSchmidt, MixedEnsemble::RandomRank] {
            let set = sample_mixed_with(200, 4, 3, ensemble).unwrap();
            for s in set.states() {
                let rho = s.to_density();
                assert!((rho.matrix().trace().re - 1.0).abs() <= 1e-12);
                let eig = hermitian_eigen(&HermitianOperator::new(rho.matrix().clone()).unwrap());
                assert!(eig.values[0] >= -1e-12);
                assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
            }
        }
    }

    #[test]
    fn pure_samples_are_normalized() {
        let set = sample_pure(500, 5, 11).unwrap();
        for s in set.states() {
            let QuantumState::Pure(psi) = s else {
                panic!("mixed state in pure set")
            };
            let n: f64 = psi
                .amplitudes()
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!((n - 1.0).abs() <= tolerances::PURE_NORM);
        }
    }

    #[test]
    fn enlarge_continues_the_stream() {
        let small = sample_mixed(100, 4, 21).unwrap();
        let big = small.enlarge(100).unwrap();
        assert_eq!(big, sample_mixed(200, 4, 21).unwrap());
        assert_eq!(&big.states()[..100], small.states());
        assert!(matches!(small.enlarge(0), Err(Error::EmptySample)));
        assert!(matches!(sample_pure(0, 4, 1), Err(Error::EmptySample)));
    }

    #[test]
    fn refinement_preserves_prefix_and_base_stream() {
        let params = RefineParams::default();
        let mut a = sample_mixed(100, 4, 5).unwrap();
        let prefix = a.states().to_vec();
        a.refine(&[0, 3, 9], 40, &params).unwrap();
        assert_eq!(a.len(), 140);
        assert_eq!(&a.states()[..100], &prefix[..]);
        for s in &a.states()[100..] {
            assert!(DensityMatrix::new(s.to_density().matrix().clone()).is_ok());
        }
        // refinement draws from its own stream: base continuation is unchanged
        a.extend_random(10).unwrap();
        let b = sample_mixed(110, 4, 5).unwrap();
        assert_eq!(&a.states()[140..], &b.states()[100..]);

        let mut c = sample_mixed(100, 4, 5).unwrap();
        c.refine(&[0, 3, 9], 40, &params).unwrap();
        c.extend_random(10).unwrap();
        assert_eq!(a, c);
        assert!(c.refine(&[1000], 1, &params).is_err());
    }

    #[test]
    fn refined_children_stay_close_to_parents() {
        let params = RefineParams {
            min_scale: 1e-6,
            max_scale: 1e-6,
            purify_probability: 0.0,
            ..RefineParams::default()
        };
        let mut set = sample_pure(10, 4, 2).unwrap();
        set.refine(&[4], 5, &params).unwrap();
        let parent = set.states()[4].to_density();
        for child in &set.states()[10..] {
            let diff = child.to_density().matrix().sub(parent.matrix()).max_norm();
            assert!(diff < 1e-4, "{diff}");
        }
    }

    #[test]
    fn random_rank_includes_pure_states() {
        let set = sample_mixed(400, 4, 9).unwrap();
        let pure = set
            .states()
            .iter()
            .filter(|s| (purity(&s.to_density()) - 1.0).abs() < 1e-9)
            .count();
        // rank 1 is drawn with probability 1/4
        assert!((60..140).contains(&pure), "{pure}");
        let hs = sample_mixed_with(400, 4, 9, MixedEnsemble::HilbertSchmidt).unwrap();
        assert!(hs
            .states()
            .iter()
            .all(|s| purity(&s.to_density()) < 1.0 - 1e-6));
    }
}
