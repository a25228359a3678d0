//! Dense complex linear algebra for small Hermitian problems.
//!
//! Matrices are stored row-major as `Complex64`. Dimensions are tiny (d <= 16
//! in practice), so everything is dense and eigenvalues come from a cyclic
//! Jacobi iteration on the Hermitian matrix.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from rows, checking squareness and finiteness.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (row, entries) in rows.iter().enumerate() {
            if entries.len() != dim {
                return Err(Error::NotSquare {
                    row,
                    len: entries.len(),
                    dim,
                });
            }
            data.extend_from_slice(entries);
        }
        let m = Self { dim, data };
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// `|a><b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        assert_eq!(a.len(), b.len(), "outer product of unequal lengths");
        Self::from_fn(a.len(), |i, j| a[i] * b[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "add dimension mismatch");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "sub dimension mismatch");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max|A - A^dagger|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim, v.len(), "mul_vec dimension mismatch");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    let deviation = m.hermitian_deviation();
    if deviation > tolerances::HERMITIAN * (1.0 + m.max_norm()) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// An observable: a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() == 0 {
            return Err(Error::ZeroDimension);
        }
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        check_hermitian(&matrix)?;
        Ok(Self { matrix })
    }

    /// `|v><v|` for a (not necessarily normalized) vector.
    pub fn projector(v: &[C64]) -> Result<Self> {
        Self::new(ComplexMatrix::outer(v, v))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() == 0 {
            return Err(Error::ZeroDimension);
        }
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        check_hermitian(&matrix)?;
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tolerances::TRACE || trace.im.abs() > tolerances::TRACE {
            return Err(Error::InvalidTrace { trace: trace.re });
        }
        let min_eigenvalue = eigenvalues_of(&matrix)[0];
        if min_eigenvalue < -tolerances::MIN_EIGENVALUE {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix })
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// `G G^dagger / Tr(G G^dagger)` for a `dim x rank` factor stored column by column.
    ///
    /// Positive semidefinite with unit trace by construction, so no eigen check is run.
    pub fn from_factor(dim: usize, factor: &[C64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if factor.is_empty() || !factor.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: factor.len(),
            });
        }
        let rank = factor.len() / dim;
        let mut m = ComplexMatrix::zeros(dim);
        for c in 0..rank {
            let col = &factor[c * dim..(c + 1) * dim];
            for i in 0..dim {
                for j in i..dim {
                    m[(i, j)] += col[i] * col[j].conj();
                }
            }
        }
        let trace = m.trace().re;
        if !(trace > 0.0 && trace.is_finite()) {
            return Err(Error::ZeroVector);
        }
        for i in 0..dim {
            m[(i, i)] = C64::new(m[(i, i)].re / trace, 0.0);
            for j in i + 1..dim {
                let v = m[(i, j)] / trace;
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        Ok(Self { matrix: m })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Self::new(self.matrix.scale(w).add(&other.matrix.scale(1.0 - w)))
    }
}

/// Unit vector in `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let norm = norm(&amplitudes);
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if (norm - 1.0).abs() > tolerances::PURE_NORM {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes `v` to unit length.
    pub fn normalized(mut v: Vec<C64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::ZeroDimension);
        }
        let n = norm(&v);
        if !n.is_finite() {
            return Err(Error::NonFinite);
        }
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        for z in &mut v {
            *z /= n;
        }
        Ok(Self { amplitudes: v })
    }

    /// Computational basis vector `|i>` (zero-based).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![ZERO; dim];
        v[i] = ONE;
        Self { amplitudes: v }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Either a density matrix or a state vector.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Mixed(DensityMatrix),
    Pure(PureState),
}

impl QuantumState {
    pub fn dim(&self) -> usize {
        match self {
            Self::Mixed(rho) => rho.dim(),
            Self::Pure(psi) => psi.dim(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, Self::Pure(_))
    }

    /// `Tr(rho O)` or `<psi|O|psi>`.
    pub fn expectation(&self, op: &HermitianOperator) -> Result<f64> {
        match self {
            Self::Mixed(rho) => trace_inner_product(rho, op),
            Self::Pure(psi) => expectation_pure(psi, op),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            Self::Mixed(rho) => rho.clone(),
            Self::Pure(psi) => psi.projector(),
        }
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(rho: DensityMatrix) -> Self {
        Self::Mixed(rho)
    }
}

impl From<PureState> for QuantumState {
    fn from(psi: PureState) -> Self {
        Self::Pure(psi)
    }
}

/// `Re Tr(rho O)`; the imaginary part must vanish to tolerance.
pub fn trace_inner_product(rho: &DensityMatrix, op: &HermitianOperator) -> Result<f64> {
    let d = rho.dim();
    if op.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: op.dim(),
        });
    }
    let (r, o) = (rho.matrix(), op.matrix());
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += r[(i, j)] * o[(j, i)];
        }
    }
    if acc.im.abs() > tolerances::EXPECTATION_IMAG * (1.0 + o.max_norm()) {
        return Err(Error::ComplexExpectation { imag: acc.im });
    }
    Ok(acc.re)
}

/// `<psi|O|psi>`.
pub fn expectation_pure(psi: &PureState, op: &HermitianOperator) -> Result<f64> {
    let d = psi.dim();
    if op.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: op.dim(),
        });
    }
    let v = psi.amplitudes();
    let o = op.matrix();
    let mut acc = ZERO;
    for i in 0..d {
        let mut row = ZERO;
        for j in 0..d {
            row += o[(i, j)] * v[j];
        }
        acc += v[i].conj() * row;
    }
    Ok(acc.re)
}

/// `Tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().as_slice().iter().map(|z| z.norm_sqr()).sum()
}

/// Spectral decomposition `O = V diag(values) V^dagger`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        let d = self.vectors.dim();
        (0..d).map(|i| self.vectors[(i, k)]).collect()
    }
}

pub fn hermitian_eigen(op: &HermitianOperator) -> Eigen {
    jacobi(op.matrix(), true)
}

/// Ascending eigenvalues of a matrix assumed Hermitian.
pub(crate) fn eigenvalues_of(m: &ComplexMatrix) -> Vec<f64> {
    jacobi(m, false).values
}

const MAX_SWEEPS: usize = 100;

/// Cyclic complex Jacobi. Each rotation first removes the phase of the pivot,
/// then applies the real symmetric Jacobi rotation.
fn jacobi(m: &ComplexMatrix, want_vectors: bool) -> Eigen {
    let d = m.dim();
    let mut a = m.clone();
    // Symmetrize so round-off in the input cannot break the iteration.
    for i in 0..d {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
        for j in i + 1..d {
            let v = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = v;
            a[(j, i)] = v.conj();
        }
    }
    let mut v = ComplexMatrix::identity(d);
    let scale = a
        .as_slice()
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U = diag(1, conj(phase)) * [[c, s], [-s, c]] on the (p, q) plane.
                let u_pp = C64::new(c, 0.0);
                let u_pq = C64::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;

                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                if want_vectors {
                    for k in 0..d {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * u_pp + vkq * u_qp;
                        v[(k, q)] = vkp * u_pq + vkq * u_qq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = if want_vectors {
        ComplexMatrix::from_fn(d, |i, k| v[(i, order[k])])
    } else {
        ComplexMatrix::zeros(d)
    };
    Eigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn uniform(d: usize) -> Vec<C64> {
        vec![c(1.0 / (d as f64).sqrt()); d]
    }

    fn psi_projector() -> HermitianOperator {
        HermitianOperator::projector(&uniform(4)).unwrap()
    }

    fn basis_projector(i: usize) -> ComplexMatrix {
        let e = PureState::basis(4, i);
        ComplexMatrix::outer(e.amplitudes(), e.amplitudes())
    }

    #[test]
    fn maximally_mixed_expectation_is_trace_over_d() {
        let rho = DensityMatrix::maximally_mixed(4);
        let v = trace_inner_product(&rho, &psi_projector()).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn projector_on_own_state() {
        let psi = PureState::new(uniform(4)).unwrap();
        let v = trace_inner_product(&psi.projector(), &psi_projector()).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn isotropic_family_expectation() {
        let p = -0.3181;
        let mixed = ComplexMatrix::identity(4).scale((1.0 - p) / 4.0);
        let rho = DensityMatrix::new(mixed.add(&psi_projector().matrix().scale(p))).unwrap();
        let v = trace_inner_product(&rho, &psi_projector()).unwrap();
        // (1 + 3p) / 4
        assert!((v - 0.011425).abs() < 1e-12);
        // lower and upper slack coefficients of the photon interval at this p
        assert!(((0.0088 - v) - (-0.2412 - 0.75 * p)).abs() < 1e-12);
        assert!(((v - 0.0114) - (0.2386 + 0.75 * p)).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            trace_inner_product(&rho, &psi_projector()),
            Err(Error::DimensionMismatch { .. })
        ));
        let psi = PureState::basis(2, 0);
        assert!(expectation_pure(&psi, &psi_projector()).is_err());
    }

    #[test]
    fn pure_expectations() {
        let o = psi_projector();
        let e1 = PureState::basis(4, 0);
        assert!((expectation_pure(&e1, &o).unwrap() - 0.25).abs() < 1e-15);
        let psi = PureState::new(uniform(4)).unwrap();
        assert!((expectation_pure(&psi, &o).unwrap() - 1.0).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let minus = PureState::new(vec![c(s), c(-s), c(0.0), c(0.0)]).unwrap();
        assert!(expectation_pure(&minus, &o).unwrap().abs() < 1e-15);
    }

    #[test]
    fn projector_spectrum() {
        let eig = hermitian_eigen(&psi_projector());
        let expected = [0.0, 0.0, 0.0, 1.0];
        for (v, e) in eig.values.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12, "{:?}", eig.values);
        }
    }

    #[test]
    fn negative_basis_projector() {
        let op = HermitianOperator::new(basis_projector(0).scale(-1.0)).unwrap();
        let eig = hermitian_eigen(&op);
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn projector_minus_basis_projector() {
        // 2x2 effective block on span{|1>, Psi}: with overlap s = 1/2 the
        // eigenvalues of |Psi><Psi| - |1><1| are +-sqrt(1 - s^2).
        let op = HermitianOperator::new(psi_projector().matrix().sub(&basis_projector(0))).unwrap();
        let eig = hermitian_eigen(&op);
        let block = -(1.0f64 - 0.25).sqrt();
        let closed_form = -0.5 * ((1.0f64 + 1.0 + 1.0).sqrt() - 1.0 + 1.0);
        assert!((block - closed_form).abs() < 1e-15);
        assert!((eig.values[0] - block).abs() < 1e-12);
        assert!((eig.values[0] + 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 1)] = c(1.0);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn density_validation() {
        assert!(matches!(
            DensityMatrix::new(ComplexMatrix::identity(2)),
            Err(Error::InvalidTrace { .. })
        ));
        let m = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(
            DensityMatrix::new(m),
            Err(Error::NotPositive { .. })
        ));
        assert!(PureState::new(vec![c(1.0), c(1.0)]).is_err());
        assert!(PureState::normalized(vec![c(0.0), c(0.0)]).is_err());
        assert!(ComplexMatrix::from_rows(&[vec![c(1.0)], vec![c(1.0), c(0.0)]]).is_err());
    }

    #[test]
    fn purity_values() {
        assert!((purity(&DensityMatrix::maximally_mixed(4)) - 0.25).abs() < 1e-15);
        let psi = PureState::new(uniform(4)).unwrap();
        assert!((purity(&psi.projector()) - 1.0).abs() < 1e-15);
        let half =
            DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.5, 0.5, 0.0, 0.0])).unwrap();
        assert!((purity(&half) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn factor_construction_is_valid() {
        let g = vec![
            C64::new(1.0, 2.0),
            C64::new(-0.5, 0.1),
            C64::new(0.3, -0.7),
            c(2.0),
        ];
        let rho = DensityMatrix::from_factor(2, &g).unwrap();
        assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
    }
}
