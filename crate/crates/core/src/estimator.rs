//! Soft-min dual objective and the sample refinement loop.
//!
//! For a finite sample `S` and temperature `T` the dual objective is
//!
//! ```text
//! F(mu, nu) = -(1/T) ln sum_{rho in S} exp(-T L(rho, mu, nu))
//! ```
//!
//! which is concave in the multipliers and lies within `ln|S| / T` below
//! `min_S L`. Each round enlarges the sample, raises `T`, and maximizes `F`
//! over `(mu, nu) >= 0`; the run stops once the maximum settles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ascent::{projected_ascent, AscentParams, AscentStatus, ConcaveObjective};
use crate::constraints::{ConstraintSet, Multipliers};
use crate::error::{Error, Result};
use crate::linalg::QuantumState;
use crate::measures::MeasureDescriptor;
use crate::sampler::{MixedEnsemble, RefineParams, SampleMode, SampleSet, RNG_ALGORITHM};

/// `T_k = scale * k^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Temperature {
    pub scale: f64,
    pub exponent: f64,
}

impl Default for Temperature {
    fn default() -> Self {
        Self {
            scale: 20.0,
            exponent: 2.0,
        }
    }
}

impl Temperature {
    pub fn at(&self, k: usize) -> f64 {
        self.scale * (k as f64).powf(self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schedule {
    /// `L_1`.
    pub initial_count: usize,
    /// `L_{k+1} - L_k`.
    pub count_increment: usize,
    pub temperature: Temperature,
    /// Convergence tolerance on successive maxima.
    pub tolerance: f64,
    /// Rounds that must stay within `tolerance` of a candidate round.
    pub stability_window: usize,
    pub max_rounds: usize,
    pub ascent: AscentParams,
    pub refinement: RefineParams,
    pub mixed_ensemble: MixedEnsemble,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            initial_count: 100,
            count_increment: 100,
            temperature: Temperature::default(),
            tolerance: 1e-4,
            stability_window: 5,
            max_rounds: 60,
            ascent: AscentParams::default(),
            refinement: RefineParams::default(),
            mixed_ensemble: MixedEnsemble::default(),
        }
    }
}

impl Schedule {
    pub fn sample_size(&self, k: usize) -> usize {
        self.initial_count + (k - 1) * self.count_increment
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidSchedule(msg.to_string()));
        if self.initial_count == 0 || self.count_increment == 0 {
            return fail("sample counts must be at least 1");
        }
        if !(self.temperature.scale > 0.0 && self.temperature.scale.is_finite()) {
            return fail("temperature scale must be positive");
        }
        if !(self.temperature.exponent > 0.0 && self.temperature.exponent.is_finite()) {
            return fail("temperature exponent must be positive so T_k increases");
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return fail("tolerance must be positive");
        }
        if self.stability_window == 0 {
            return fail("stability window must be at least 1");
        }
        if self.max_rounds == 0 {
            return fail("max_rounds must be at least 1");
        }
        self.ascent.validate()?;
        self.refinement.validate()
    }
}

fn required_mode(measure: &MeasureDescriptor) -> SampleMode {
    if measure.is_convex_roof {
        SampleMode::Pure
    } else {
        SampleMode::Mixed
    }
}

fn check_mode(mode: SampleMode, measure: &MeasureDescriptor) -> Result<()> {
    if mode != required_mode(measure) {
        return Err(Error::IncompatibleSampleMode {
            mode: mode.as_str(),
            measure: measure.name.to_string(),
        });
    }
    Ok(())
}

/// Multiplier-independent per-state data: `C(rho)` and both slack vectors.
#[derive(Debug, Clone, Default)]
pub struct DualTable {
    constraints: usize,
    values: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DualTable {
    pub fn new(constraints: usize) -> Self {
        Self {
            constraints,
            ..Self::default()
        }
    }

    pub fn from_samples(
        s: &SampleSet,
        cs: &ConstraintSet,
        measure: &MeasureDescriptor,
    ) -> Result<Self> {
        check_mode(s.mode(), measure)?;
        if s.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut table = Self::new(cs.len());
        table.extend(s.states(), cs, measure)?;
        Ok(table)
    }

    /// Appends rows for `states`. Rows are computed in parallel and stored in input order.
    pub fn extend(
        &mut self,
        states: &[QuantumState],
        cs: &ConstraintSet,
        measure: &MeasureDescriptor,
    ) -> Result<()> {
        let rows: Vec<(f64, Vec<f64>)> = states
            .par_iter()
            .map(|s| Ok((measure.evaluate(s)?, cs.expectations(s)?)))
            .collect::<Result<_>>()?;
        for (value, t) in rows {
            self.values.push(value);
            for (c, x) in cs.items().iter().zip(t) {
                self.lower.push(c.lower - x);
                self.upper.push(x - c.upper);
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn constraints(&self) -> usize {
        self.constraints
    }

    /// Lagrangian of state `i` at packed multipliers `x = [mu..., nu...]`.
    pub fn lagrangian(&self, i: usize, x: &[f64]) -> f64 {
        let n = self.constraints;
        let (mu, nu) = x.split_at(n);
        let lo = &self.lower[i * n..(i + 1) * n];
        let up = &self.upper[i * n..(i + 1) * n];
        let mut l = self.values[i];
        for k in 0..n {
            l += mu[k] * lo[k] + nu[k] * up[k];
        }
        l
    }

    pub fn lagrangians(&self, x: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|i| self.lagrangian(i, x)).collect()
    }

    pub fn softmin(&self, temperature: f64, x: &[f64]) -> f64 {
        let l = self.lagrangians(x);
        let min = l.iter().copied().fold(f64::INFINITY, f64::min);
        let sum: f64 = l.iter().map(|&v| (-temperature * (v - min)).exp()).sum();
        min - sum.ln() / temperature
    }

    /// Softmax weights `exp(-T L_i) / sum_j exp(-T L_j)`.
    pub fn weights(&self, temperature: f64, x: &[f64]) -> Vec<f64> {
        let l = self.lagrangians(x);
        let min = l.iter().copied().fold(f64::INFINITY, f64::min);
        let mut w: Vec<f64> = l
            .iter()
            .map(|&v| (-temperature * (v - min)).exp())
            .collect();
        let sum: f64 = w.iter().sum();
        for v in &mut w {
            *v /= sum;
        }
        w
    }

    /// Value and gradient `[dF/dmu..., dF/dnu...]`.
    pub fn softmin_with_gradient(&self, temperature: f64, x: &[f64]) -> (f64, Vec<f64>) {
        let n = self.constraints;
        let l = self.lagrangians(x);
        let min = l.iter().copied().fold(f64::INFINITY, f64::min);
        let mut sum = 0.0;
        let mut grad = vec![0.0; 2 * n];
        for (i, &v) in l.iter().enumerate() {
            let w = (-temperature * (v - min)).exp();
            sum += w;
            for k in 0..n {
                grad[k] += w * self.lower[i * n + k];
                grad[n + k] += w * self.upper[i * n + k];
            }
        }
        for g in &mut grad {
            *g /= sum;
        }
        (min - sum.ln() / temperature, grad)
    }

    /// Indices of the `count` smallest Lagrangians at `x`, ties broken by index.
    pub fn lowest(&self, x: &[f64], count: usize) -> Vec<usize> {
        let l = self.lagrangians(x);
        let mut idx: Vec<usize> = (0..l.len()).collect();
        idx.sort_by(|&a, &b| l[a].total_cmp(&l[b]).then(a.cmp(&b)));
        idx.truncate(count);
        idx
    }
}

struct SoftMin<'a> {
    table: &'a DualTable,
    temperature: f64,
}

impl ConcaveObjective for SoftMin<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.table.softmin(self.temperature, x)
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        self.table.softmin_with_gradient(self.temperature, x)
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTemperature(t))
    }
}

/// `F_{S,T}(mu, nu)`.
pub fn softmin_objective(
    s: &SampleSet,
    temperature: f64,
    m: &Multipliers,
    cs: &ConstraintSet,
    measure: &MeasureDescriptor,
) -> Result<f64> {
    check_temperature(temperature)?;
    m.check_len(cs.len())?;
    let table = DualTable::from_samples(s, cs, measure)?;
    Ok(table.softmin(temperature, &m.to_vec()))
}

/// `(dF/dmu, dF/dnu)`: softmax-weighted averages of the lower and upper slacks.
pub fn softmin_gradient(
    s: &SampleSet,
    temperature: f64,
    m: &Multipliers,
    cs: &ConstraintSet,
    measure: &MeasureDescriptor,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_temperature(temperature)?;
    m.check_len(cs.len())?;
    let table = DualTable::from_samples(s, cs, measure)?;
    let (_, g) = table.softmin_with_gradient(temperature, &m.to_vec());
    let (mu, nu) = g.split_at(cs.len());
    Ok((mu.to_vec(), nu.to_vec()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ascent {
    pub max_f: f64,
    pub argmax: Multipliers,
    pub iterations: usize,
    pub status: AscentStatus,
}

/// Maximizes `F_{S,T}` over `(mu, nu) >= 0` from `start`.
///
/// An unbounded dual is reported through `status == Diverged` with the iterate
/// at which the threshold was crossed.
pub fn ascend(
    s: &SampleSet,
    temperature: f64,
    cs: &ConstraintSet,
    measure: &MeasureDescriptor,
    schedule: &Schedule,
    start: &Multipliers,
) -> Result<Ascent> {
    check_temperature(temperature)?;
    start.check_len(cs.len())?;
    Multipliers::new(start.mu.clone(), start.nu.clone())?;
    let table = DualTable::from_samples(s, cs, measure)?;
    Ok(ascend_table(
        &table,
        temperature,
        &start.to_vec(),
        &schedule.ascent,
    ))
}

fn ascend_table(
    table: &DualTable,
    temperature: f64,
    start: &[f64],
    params: &AscentParams,
) -> Ascent {
    let out = projected_ascent(&SoftMin { table, temperature }, start, params);
    Ascent {
        max_f: out.value,
        argmax: Multipliers::from_slice(&out.x),
        iterations: out.iterations,
        status: out.status,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationStatus {
    Converged,
    MaxRoundsExhausted,
    DivergedUnbounded,
}

impl EstimationStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxRoundsExhausted => "max_rounds_exhausted",
            Self::DivergedUnbounded => "diverged_unbounded",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub k: usize,
    pub sample_size: usize,
    pub temperature: f64,
    pub max_f: f64,
    pub multipliers: Multipliers,
    pub ascent_iterations: usize,
    pub ascent_status: AscentStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    /// Settled maximum when converged; last finite round maximum when rounds ran out;
    /// `None` when the dual is unbounded.
    pub lower_bound: Option<f64>,
    pub status: EstimationStatus,
    /// `k_0`, the round whose maximum the following window stayed close to.
    pub converged_round: Option<usize>,
    pub rounds: Vec<RoundRecord>,
    pub seed: u64,
    pub measure: String,
    pub sample_mode: SampleMode,
    pub rng: &'static str,
}

/// Runs the refinement loop.
///
/// Round `k` maximizes `F` over a sample of `L_k = L_1 + (k - 1) dL` states at
/// temperature `T_k`, warm-started from the previous maximizer. Each
/// enlargement appends `round(fraction * dL)` perturbations of the current
/// lowest-Lagrangian states and the rest from the base ensemble, so every
/// round's sample extends the previous one.
///
/// A round whose ascent diverges restarts the next round from zero multipliers;
/// `stability_window` consecutive diverged rounds end the run as unbounded.
pub fn estimate(
    cs: &ConstraintSet,
    measure: &MeasureDescriptor,
    schedule: &Schedule,
    seed: u64,
) -> Result<EstimationResult> {
    schedule.validate()?;
    let mode = required_mode(measure);
    let mut set = SampleSet::empty(mode, schedule.mixed_ensemble, cs.dim(), seed)?;
    set.extend_random(schedule.initial_count)?;
    let mut table = DualTable::new(cs.len());
    table.extend(set.states(), cs, measure)?;

    let refine = &schedule.refinement;
    let n_refine = ((schedule.count_increment as f64) * refine.fraction).round() as usize;
    let n_refine = n_refine.min(schedule.count_increment);
    let n_base = schedule.count_increment - n_refine;
    let window = schedule.stability_window;

    let mut x = vec![0.0; 2 * cs.len()];
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut diverged_streak = 0;
    let mut status = EstimationStatus::MaxRoundsExhausted;
    let mut converged_round = None;

    for k in 1..=schedule.max_rounds {
        if k > 1 {
            let old = set.len();
            if n_base > 0 {
                set.extend_random(n_base)?;
            }
            if n_refine > 0 {
                let parents = table.lowest(&x, refine.elites);
                set.refine(&parents, n_refine, refine)?;
            }
            table.extend(&set.states()[old..], cs, measure)?;
        }
        let temperature = schedule.temperature.at(k);
        let start = if diverged_streak > 0 {
            vec![0.0; x.len()]
        } else {
            x.clone()
        };
        let ascent = ascend_table(&table, temperature, &start, &schedule.ascent);
        x = ascent.argmax.to_vec();
        rounds.push(RoundRecord {
            k,
            sample_size: set.len(),
            temperature,
            max_f: ascent.max_f,
            multipliers: ascent.argmax,
            ascent_iterations: ascent.iterations,
            ascent_status: ascent.status,
        });

        if ascent.status == AscentStatus::Diverged {
            diverged_streak += 1;
            if diverged_streak >= window {
                status = EstimationStatus::DivergedUnbounded;
                break;
            }
            continue;
        }
        diverged_streak = 0;

        if let Some(k0) = settled_round(&rounds, window, schedule.tolerance) {
            converged_round = Some(k0);
            status = EstimationStatus::Converged;
            break;
        }
    }

    let lower_bound = match status {
        EstimationStatus::Converged => converged_round.map(|k0| rounds[k0 - 1].max_f),
        EstimationStatus::MaxRoundsExhausted => rounds
            .iter()
            .rev()
            .find(|r| r.ascent_status != AscentStatus::Diverged)
            .map(|r| r.max_f),
        EstimationStatus::DivergedUnbounded => None,
    };

    Ok(EstimationResult {
        lower_bound,
        status,
        converged_round,
        rounds,
        seed,
        measure: measure.name.to_string(),
        sample_mode: mode,
        rng: RNG_ALGORITHM,
    })
}

/// `k_0 = k - W` if rounds `k_0 + 1 ..= k` all stay within `tol` of round `k_0`.
fn settled_round(rounds: &[RoundRecord], window: usize, tol: f64) -> Option<usize> {
    let k = rounds.len();
    if k <= window {
        return None;
    }
    let tail = &rounds[k - window - 1..];
    if tail
        .iter()
        .any(|r| r.ascent_status == AscentStatus::Diverged)
    {
        return None;
    }
    let base = tail[0].max_f;
    tail[1..]
        .iter()
        .all(|r| (r.max_f - base).abs() < tol)
        .then_some(k - window)
}
