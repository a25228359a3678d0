//! Problem files, result records, traces and the oracle report.
//!
//! A problem file is JSON:
//!
//! ```json
//! {
//!   "dim": 2,
//!   "constraints": [
//!     {"operator": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]], "lower": 0.2, "upper": 0.4}
//!   ],
//!   "measure": "l1",
//!   "schedule": {"max_rounds": 30},
//!   "seed": 7
//! }
//! ```
//!
//! Complex entries are `[re, im]` pairs. `schedule` and `seed` are optional;
//! missing schedule fields keep their defaults.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::constraints::{Constraint, ConstraintSet, Multipliers};
use crate::error::Error;
use crate::estimator::{estimate, EstimationResult, Schedule};
use crate::linalg::{ComplexMatrix, HermitianOperator, C64};
use crate::measures::MeasureDescriptor;
use crate::oracles::{photon_min_eigenvalue, PhotonFixture};
use crate::tolerances;

pub const DEFAULT_SEED: u64 = 42;
pub const FIXTURES: [&str; 2] = ["photon_l1", "photon_geometric"];
pub const TRACE_HEADER: &str = "k,L,T,maxF,ascent_iters";

#[derive(Debug, ThisError)]
pub enum ProblemError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed problem file: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("constraint {index}: operator is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { index: usize, deviation: f64 },
    #[error("constraint {index}: lower bound {lower} exceeds upper bound {upper}")]
    InvertedInterval {
        index: usize,
        lower: f64,
        upper: f64,
    },
    #[error("constraint {index}: operator shape does not match dim {expected} ({detail})")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        detail: String,
    },
    #[error("unknown measure {0:?} (expected l1, geometric or relative_entropy)")]
    UnknownMeasure(String),
    #[error("unknown fixture {0:?}; available fixtures: photon_l1, photon_geometric")]
    UnknownFixture(String),
    #[error(transparent)]
    Invalid(#[from] Error),
}

impl ProblemError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::Io { .. } => "io",
            Self::Syntax(_) => "syntax",
            Self::NonHermitian { .. } => "non_hermitian",
            Self::InvertedInterval { .. } => "inverted_interval",
            Self::DimensionMismatch { .. } => "dimension_mismatch",
            Self::UnknownMeasure(_) => "unknown_measure",
            Self::UnknownFixture(_) => "unknown_fixture",
            Self::Invalid(_) => "invalid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    /// Row-major `[re, im]` entries.
    pub operator: Vec<Vec<[f64; 2]>>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dim: usize,
    pub constraints: Vec<ConstraintSpec>,
    pub measure: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    /// Builds a problem from validated library types.
    pub fn from_constraints(cs: &ConstraintSet, measure: &MeasureDescriptor) -> Self {
        let constraints = cs
            .items()
            .iter()
            .map(|c| {
                let m = c.operator.matrix();
                ConstraintSpec {
                    operator: (0..m.dim())
                        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
                        .collect(),
                    lower: c.lower,
                    upper: c.upper,
                }
            })
            .collect();
        Self {
            dim: cs.dim(),
            constraints,
            measure: measure.name.to_string(),
            schedule: None,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        self.constraint_set()?;
        self.measure_descriptor()?;
        if let Some(s) = &self.schedule {
            s.validate()?;
        }
        Ok(())
    }

    pub fn measure_descriptor(&self) -> Result<MeasureDescriptor, ProblemError> {
        MeasureDescriptor::from_name(&self.measure)
            .map_err(|_| ProblemError::UnknownMeasure(self.measure.clone()))
    }

    pub fn constraint_set(&self) -> Result<ConstraintSet, ProblemError> {
        if self.dim == 0 {
            return Err(Error::ZeroDimension.into());
        }
        if self.constraints.is_empty() {
            return Err(Error::EmptyConstraints.into());
        }
        let mut items = Vec::with_capacity(self.constraints.len());
        for (k, spec) in self.constraints.iter().enumerate() {
            items.push(spec.to_constraint(k + 1, self.dim)?);
        }
        Ok(ConstraintSet::new(self.dim, items)?)
    }
}

impl ConstraintSpec {
    fn to_constraint(&self, index: usize, dim: usize) -> Result<Constraint, ProblemError> {
        let mismatch = |detail: String| ProblemError::DimensionMismatch {
            index,
            expected: dim,
            detail,
        };
        if self.operator.len() != dim {
            return Err(mismatch(format!("{} rows", self.operator.len())));
        }
        if let Some((i, row)) = self
            .operator
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != dim)
        {
            return Err(mismatch(format!("row {} has {} entries", i + 1, row.len())));
        }
        let m = ComplexMatrix::from_fn(dim, |i, j| {
            let [re, im] = self.operator[i][j];
            C64::new(re, im)
        });
        if !m.is_finite() {
            return Err(Error::NonFinite.into());
        }
        let deviation = m.hermitian_deviation();
        if deviation > tolerances::HERMITIAN {
            return Err(ProblemError::NonHermitian { index, deviation });
        }
        if !(self.lower.is_finite() && self.upper.is_finite()) {
            return Err(Error::NonFiniteBound { index }.into());
        }
        if self.lower > self.upper {
            return Err(ProblemError::InvertedInterval {
                index,
                lower: self.lower,
                upper: self.upper,
            });
        }
        Ok(Constraint {
            operator: HermitianOperator::new(m)?,
            lower: self.lower,
            upper: self.upper,
        })
    }
}

pub fn parse_problem(path: &Path) -> Result<ProblemFile, ProblemError> {
    let text = std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ProblemFile::from_json(&text)
}

/// Command-line overrides of the problem file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub measure: Option<String>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundEntry {
    pub k: usize,
    #[serde(rename = "L")]
    pub sample_size: usize,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub max_f: f64,
    pub ascent_iterations: usize,
    pub ascent_status: crate::ascent::AscentStatus,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub lower_bound: Option<f64>,
    pub status: &'static str,
    pub converged_round: Option<usize>,
    pub seed: u64,
    pub measure: String,
    pub units: &'static str,
    pub sample_mode: &'static str,
    pub rng: &'static str,
    pub schedule: Schedule,
    pub rounds: Vec<RoundEntry>,
    /// Seconds.
    pub wall_time: f64,
}

impl ResultRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result records always serialize")
    }
}

pub struct Run {
    pub result: EstimationResult,
    pub record: ResultRecord,
    pub trace: String,
}

impl Run {
    /// 0 converged, 2 unbounded dual, 3 rounds exhausted.
    pub fn exit_code(&self) -> i32 {
        exit_code(self.result.status)
    }
}

pub fn exit_code(status: crate::estimator::EstimationStatus) -> i32 {
    use crate::estimator::EstimationStatus::*;
    match status {
        Converged => 0,
        DivergedUnbounded => 2,
        MaxRoundsExhausted => 3,
    }
}

/// Resolves the effective measure, seed and schedule, then runs the estimator.
pub fn run_estimate(problem: &ProblemFile, options: &RunOptions) -> Result<Run, ProblemError> {
    let mut problem = problem.clone();
    if let Some(m) = &options.measure {
        problem.measure = m.clone();
    }
    let cs = problem.constraint_set()?;
    let measure = problem.measure_descriptor()?;
    let mut schedule = problem.schedule.clone().unwrap_or_default();
    if let Some(t) = options.tolerance {
        schedule.tolerance = t;
    }
    if let Some(r) = options.max_rounds {
        schedule.max_rounds = r;
    }
    let seed = options.seed.or(problem.seed).unwrap_or(DEFAULT_SEED);

    let started = std::time::Instant::now();
    let result = estimate(&cs, &measure, &schedule, seed)?;
    let wall_time = started.elapsed().as_secs_f64();

    let rounds = result
        .rounds
        .iter()
        .map(|r| RoundEntry {
            k: r.k,
            sample_size: r.sample_size,
            temperature: r.temperature,
            max_f: r.max_f,
            ascent_iterations: r.ascent_iterations,
            ascent_status: r.ascent_status,
            mu: r.multipliers.mu.clone(),
            nu: r.multipliers.nu.clone(),
        })
        .collect();
    let record = ResultRecord {
        lower_bound: result.lower_bound,
        status: result.status.as_str(),
        converged_round: result.converged_round,
        seed,
        measure: measure.name.to_string(),
        units: measure.units,
        sample_mode: result.sample_mode.as_str(),
        rng: result.rng,
        schedule,
        rounds,
        wall_time,
    };
    let trace = trace_csv(&result);
    Ok(Run {
        result,
        record,
        trace,
    })
}

/// One row per round, numbers with 6 significant digits.
pub fn trace_csv(result: &EstimationResult) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in &result.rounds {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.k,
            r.sample_size,
            format_g6(r.temperature),
            format_g6(r.max_f),
            r.ascent_iterations
        );
    }
    out
}

/// `printf("%.6g")`.
pub fn format_g6(x: f64) -> String {
    const SIG: i32 = 6;
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (SIG - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Analytic bound and dual data for a bundled fixture.
pub fn oracle_report(name: &str) -> Result<serde_json::Value, ProblemError> {
    let f = PhotonFixture::default();
    match name {
        "photon_l1" => {
            let sol = f.l1_lower_bound_analytic();
            let m = Multipliers {
                mu: vec![sol.mu],
                nu: vec![sol.nu],
            };
            Ok(serde_json::json!({
                "fixture": name,
                "measure": "l1",
                "lower_bound": sol.lower_bound,
                "lower": f.lower,
                "upper": f.upper,
                "mu": sol.mu,
                "nu": sol.nu,
                "dual_inner_at_optimum": f.l1_dual_inner((-1.0 / 3.0, 1.0), &m),
                "minimizing_family_parameter": (4.0 * f.upper - 1.0) / 3.0,
            }))
        }
        "photon_geometric" => {
            let sol = f.geometric_lower_bound_analytic();
            let x = sol.nu - sol.mu;
            Ok(serde_json::json!({
                "fixture": name,
                "measure": "geometric",
                "lower_bound": sol.lower_bound,
                "lower": f.lower,
                "upper": f.upper,
                "mu": sol.mu,
                "nu": sol.nu,
                "x": x,
                "min_eigenvalue": photon_min_eigenvalue(x),
            }))
        }
        other => Err(ProblemError::UnknownFixture(other.to_string())),
    }
}

/// Problem file of a bundled fixture.
pub fn fixture_problem(name: &str) -> Result<ProblemFile, ProblemError> {
    let measure = match name {
        "photon_l1" => &crate::measures::L1,
        "photon_geometric" => &crate::measures::GEOMETRIC,
        other => return Err(ProblemError::UnknownFixture(other.to_string())),
    };
    Ok(ProblemFile::from_constraints(
        &PhotonFixture::default().constraint_set(),
        measure,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level(op: &str, lower: f64, upper: f64) -> String {
        format!(
            r#"{{"dim": 2, "constraints": [{{"operator": {op}, "lower": {lower}, "upper": {upper}}}], "measure": "l1"}}"#
        )
    }

    const SIGMA_X: &str = "[[[0,0],[1,0]],[[1,0],[0,0]]]";

    #[test]
    fn g6_matches_printf() {
        let cases = [
            (0.954321987, "0.954322"),
            (20.0, "20"),
            (13520.0, "13520"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-0.5, "-0.5"),
            (999999.5, "1e+06"),
            (0.0, "0"),
        ];
        for (x, s) in cases {
            assert_eq!(format_g6(x), s, "{x}");
        }
    }

    #[test]
    fn parses_valid_problem() {
        let p = ProblemFile::from_json(&two_level(SIGMA_X, 0.1, 0.5)).unwrap();
        assert_eq!(p.dim, 2);
        assert_eq!(p.constraint_set().unwrap().len(), 1);
    }

    #[test]
    fn inverted_interval_names_constraint() {
        let e = ProblemFile::from_json(&two_level(SIGMA_X, 0.5, 0.1)).unwrap_err();
        assert!(matches!(e, ProblemError::InvertedInterval { index: 1, .. }));
        assert!(e.to_string().contains("constraint 1"));
    }

    #[test]
    fn non_hermitian_rejected() {
        let e = ProblemFile::from_json(&two_level("[[[0,0],[1,0]],[[2,0],[0,0]]]", 0.0, 1.0))
            .unwrap_err();
        assert_eq!(e.code(), "non_hermitian");
        let e = ProblemFile::from_json(&two_level("[[[0,0],[0,1]],[[0,1],[0,0]]]", 0.0, 1.0))
            .unwrap_err();
        assert_eq!(e.code(), "non_hermitian");
    }

    #[test]
    fn shape_and_syntax_errors() {
        let e = ProblemFile::from_json(&two_level("[[[1,0]]]", 0.0, 1.0)).unwrap_err();
        assert_eq!(e.code(), "dimension_mismatch");
        let e = ProblemFile::from_json("{\"dim\": 2,").unwrap_err();
        assert_eq!(e.code(), "syntax");
        let extra = two_level(SIGMA_X, 0.0, 1.0).replace("\"dim\"", "\"extra\": 1, \"dim\"");
        assert_eq!(ProblemFile::from_json(&extra).unwrap_err().code(), "syntax");
        let bad = two_level(SIGMA_X, 0.0, 1.0).replace("\"l1\"", "\"fidelity\"");
        assert_eq!(
            ProblemFile::from_json(&bad).unwrap_err().code(),
            "unknown_measure"
        );
    }

    #[test]
    fn partial_schedule_override() {
        let text = two_level(SIGMA_X, 0.0, 1.0).replace(
            "\"measure\"",
            "\"schedule\": {\"max_rounds\": 7}, \"measure\"",
        );
        let p = ProblemFile::from_json(&text).unwrap();
        let s = p.schedule.unwrap();
        assert_eq!(s.max_rounds, 7);
        assert_eq!(s.initial_count, 100);
    }

    #[test]
    fn fixture_round_trip() {
        for name in FIXTURES {
            let p = fixture_problem(name).unwrap();
            assert_eq!(ProblemFile::from_json(&p.to_json()).unwrap(), p);
        }
        assert!(matches!(
            fixture_problem("nope"),
            Err(ProblemError::UnknownFixture(_))
        ));
    }

    #[test]
    fn oracle_values() {
        let l1 = oracle_report("photon_l1").unwrap();
        assert!((l1["lower_bound"].as_f64().unwrap() - 0.9544).abs() < 1e-4);
        let g = oracle_report("photon_geometric").unwrap();
        assert!((g["lower_bound"].as_f64().unwrap() - 0.1638).abs() < 1e-4);
        assert_eq!(oracle_report("x").unwrap_err().code(), "unknown_fixture");
    }
}
