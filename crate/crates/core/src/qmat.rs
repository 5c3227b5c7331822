//! Dense complex linear algebra for small quantum systems.
//!
//! Everything here targets total dimensions of at most 64, so the algorithms are
//! the simple cubic ones: cyclic Jacobi for Hermitian eigenproblems, direct
//! index arithmetic for partial traces.
//!
//! Subsystem 0 is always the leftmost tensor factor and the slowest-varying
//! index of a composite basis label.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermiticity tolerance accepted by [`herm_eig`].
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Hermiticity tolerance for [`DensityMatrix`] construction.
pub const STATE_HERMITIAN_TOL: f64 = 1e-10;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-9;
/// Allowed deviation of a normalized trace from one.
pub const TRACE_TOL: f64 = 1e-9;
/// Allowed deviation of a pure state's norm from one.
pub const NORM_TOL: f64 = 1e-10;
/// Relative threshold deciding whether an eigenvalue counts towards the rank.
pub const RANK_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from nested rows; all rows must share one length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.iter().flatten().copied().collect())
    }

    /// Convenience constructor for real-valued matrices.
    pub fn from_real(rows: &[&[f64]]) -> Result<Self> {
        let converted: Vec<Vec<Complex64>> =
            rows.iter().map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&converted)
    }

    /// Rank-one projector `|v><v|`.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(c, r)] = self[(r, c)].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(Complex64::conj).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(c, r)] = self[(r, c)];
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let mut m = self.clone();
        for r in 0..self.rows {
            for c in r..self.cols {
                let avg = (self[(r, c)] + self[(c, r)].conj()) * 0.5;
                m[(r, c)] = avg;
                m[(c, r)] = avg.conj();
            }
        }
        m
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
}

pub fn sigma_y() -> CMatrix {
    let i = Complex64::new(0.0, 1.0);
    CMatrix::from_rows(&[vec![ZERO, -i], vec![i, ZERO]]).unwrap()
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_diag(&[1.0, -1.0])
}

/// Kronecker product, left factor major.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = CMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a[(ar, ac)];
            if x == ZERO {
                continue;
            }
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out[(ar * b.rows + br, ac * b.cols + bc)] = x * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two vectors.
pub fn tensor_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: CMatrix,
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
pub fn herm_eig(h: &CMatrix) -> Result<HermEig> {
    check_hermitian(h)?;
    let (values, vectors) = jacobi(h, true);
    Ok(HermEig { values, vectors: vectors.expect("vectors requested") })
}

/// Eigenvalues only, descending.
pub fn herm_eigvals(h: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    Ok(jacobi(h, false).0)
}

fn check_hermitian(h: &CMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", h.rows, h.cols)));
    }
    let dev = h.hermitian_deviation();
    if dev > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

fn jacobi(h: &CMatrix, want_vectors: bool) -> (Vec<f64>, Option<CMatrix>) {
    const MAX_SWEEPS: usize = 100;
    let n = h.rows;
    let mut a = h.hermitian_part();
    let mut v = want_vectors.then(|| CMatrix::identity(n));

    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U on the (p, q) plane: [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
                let u00 = Complex64::new(c, 0.0);
                let u01 = Complex64::new(s, 0.0);
                let u10 = -phase.conj() * s;
                let u11 = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u00 + akq * u10;
                    a[(k, q)] = akp * u01 + akq * u11;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u00.conj() * apk + u10.conj() * aqk;
                    a[(q, k)] = u01.conj() * apk + u11.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * u00 + vkq * u10;
                        v[(k, q)] = vkp * u01 + vkq * u11;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = v.map(|v| {
        let mut sorted = CMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            for k in 0..n {
                sorted[(k, dst)] = v[(k, src)];
            }
        }
        sorted
    });
    (values, vectors)
}

/// Number of eigenvalues above the relative rank threshold.
pub fn numerical_rank(eigenvalues: &[f64]) -> usize {
    let max = eigenvalues.iter().copied().fold(0.0, f64::max);
    let cut = RANK_TOL * max.max(1.0);
    eigenvalues.iter().filter(|&&l| l > cut).count()
}

/// Square root of a PSD-to-tolerance matrix; eigenvalues in `[-PSD_TOL, 0)` clamp to zero.
/// Relative size below which a computed PSD eigenvalue is indistinguishable from zero.
pub const SPECTRAL_NOISE: f64 = 1e-13;

/// Square roots of a PSD spectrum, with roundoff-level eigenvalues sent to zero
/// first (the root would otherwise magnify `1e-17` into `3e-9`).
pub fn root_spectrum(values: &[f64]) -> Vec<f64> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = SPECTRAL_NOISE * scale;
    values.iter().map(|&l| if l <= floor { 0.0 } else { l.sqrt() }).collect()
}

pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let eig = herm_eig(m)?;
    if let Some(&min) = eig.values.last() {
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
    }
    Ok(reassemble(&eig.vectors, &root_spectrum(&eig.values)))
}

/// `V diag(values) V†`.
pub fn reassemble(vectors: &CMatrix, values: &[f64]) -> CMatrix {
    let n = vectors.rows;
    let mut out = CMatrix::zeros(n, n);
    for (k, &l) in values.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = vectors[(i, k)] * l;
            for j in 0..n {
                out[(i, j)] += vik * vectors[(j, k)].conj();
            }
        }
    }
    out
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("trace norm needs a square matrix".into()));
    }
    if m.hermitian_deviation() <= 1e-14 * m.max_abs().max(1.0) {
        return Ok(herm_eigvals(m)?.iter().map(|l| l.abs()).sum());
    }
    let gram = &m.adjoint() * m;
    Ok(herm_eigvals(&gram)?.iter().map(|l| l.max(0.0).sqrt()).sum())
}

/// Density operator on a composite space with recorded subsystem dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validated normalized state.
    pub fn new(dims: Vec<usize>, mat: CMatrix) -> Result<Self> {
        let state = Self::new_subnormalized(dims, mat)?;
        let tr = state.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        Ok(state)
    }

    /// Validated state with trace at most one.
    pub fn new_subnormalized(dims: Vec<usize>, mat: CMatrix) -> Result<Self> {
        let state = Self::from_parts_unchecked(dims, mat)?;
        let dev = state.mat.hermitian_deviation();
        if dev > STATE_HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let mat = state.mat.hermitian_part();
        let min = herm_eigvals(&mat)?.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        let tr = mat.trace().re;
        if tr > 1.0 + TRACE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        Ok(Self { dims: state.dims, mat })
    }

    /// Shape checks only. Used for operators the caller already knows are valid.
    pub(crate) fn from_parts_unchecked(dims: Vec<usize>, mat: CMatrix) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!("invalid subsystem dims {dims:?}")));
        }
        if !mat.is_square() || mat.rows() != total {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} need a {total}x{total} matrix, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        Ok(Self { dims, mat })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self { dims: psi.dims.clone(), mat: CMatrix::outer(&psi.vec) }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let total: usize = dims.iter().product();
        let mat = CMatrix::identity(total).scale_real(1.0 / total as f64);
        Self { dims, mat }
    }

    /// Product state `a ⊗ b` with concatenated subsystem lists.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, mat: tensor(&self.mat, &other.mat) }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        herm_eigvals(&self.mat).expect("density matrices are Hermitian")
    }

    pub fn eig(&self) -> HermEig {
        herm_eig(&self.mat).expect("density matrices are Hermitian")
    }

    /// Numerical rank under [`RANK_TOL`].
    pub fn rank(&self) -> usize {
        numerical_rank(&self.eigenvalues())
    }

    /// Reduced operator on the subsystems in `keep`, in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        partial_trace(self, keep)
    }

    /// Transpose on a single subsystem.
    pub fn partial_transpose(&self, sys: usize) -> Result<CMatrix> {
        if sys >= self.dims.len() {
            return Err(Error::InvalidSubsystem(format!(
                "subsystem {sys} out of range for {} subsystems",
                self.dims.len()
            )));
        }
        let n = self.dim();
        let inner: usize = self.dims[sys + 1..].iter().product();
        let d = self.dims[sys];
        let digit = |idx: usize| (idx / inner) % d;
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let (di, dj) = (digit(i), digit(j));
                let i2 = i - di * inner + dj * inner;
                let j2 = j - dj * inner + di * inner;
                out[(i2, j2)] = self.mat[(i, j)];
            }
        }
        Ok(out)
    }
}

/// Reduced state on `keep` (sorted, unique, valid indices).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let dims = &rho.dims;
    if keep.is_empty() {
        return Err(Error::InvalidSubsystem("keep set is empty".into()));
    }
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidSubsystem(format!("{keep:?} out of range for {} subsystems", dims.len())));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSubsystem(format!("{keep:?} must be strictly increasing")));
    }

    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&t| dims[t]).collect();
    let kd: usize = kept_dims.iter().product();
    let td: usize = traced_dims.iter().product();

    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let offset = |subsystems: &[usize], sub_dims: &[usize], mut label: usize| {
        let mut off = 0;
        for (pos, &s) in subsystems.iter().enumerate().rev() {
            off += (label % sub_dims[pos]) * strides[s];
            label /= sub_dims[pos];
        }
        off
    };
    let kept_off: Vec<usize> = (0..kd).map(|k| offset(keep, &kept_dims, k)).collect();
    let traced_off: Vec<usize> = (0..td).map(|t| offset(&traced, &traced_dims, t)).collect();

    let mut out = CMatrix::zeros(kd, kd);
    for (a, &ka) in kept_off.iter().enumerate() {
        for (b, &kb) in kept_off.iter().enumerate() {
            out[(a, b)] = traced_off.iter().map(|&t| rho.mat[(ka + t, kb + t)]).sum();
        }
    }
    Ok(DensityMatrix { dims: kept_dims, mat: out })
}

/// Unit vector on a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    vec: Vec<Complex64>,
}

impl PureState {
    pub fn new(dims: Vec<usize>, vec: Vec<Complex64>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || total != vec.len() {
            return Err(Error::DimensionMismatch(format!("dims {dims:?} need {total} amplitudes, got {}", vec.len())));
        }
        if vec.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = vec_norm(&vec);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { dims, vec })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(dims: Vec<usize>, mut vec: Vec<Complex64>) -> Result<Self> {
        let norm = vec_norm(&vec);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        for z in &mut vec {
            *z /= norm;
        }
        Self::new(dims, vec)
    }

    /// Computational basis state with the given label.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(Error::OutOfRange(format!("basis index {index} >= {total}")));
        }
        let mut vec = vec![ZERO; total];
        vec[index] = ONE;
        Self::new(dims, vec)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.vec
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// `Tr|√ρ √σ|`, computed as the trace of `√(√σ ρ √σ)`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    let root = sqrt_psd(sigma.mat())?;
    let inner = &(&root * rho.mat()) * &root;
    let f: f64 = root_spectrum(&herm_eigvals(&inner.hermitian_part())?).iter().sum();
    let cap = (rho.trace() * sigma.trace()).max(0.0).sqrt();
    Ok(f.clamp(0.0, cap))
}

/// Generalized fidelity for subnormalized operators.
pub fn generalized_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let defect = ((1.0 - rho.trace()).max(0.0) * (1.0 - sigma.trace()).max(0.0)).sqrt();
    Ok(fidelity(rho, sigma)? + defect)
}

/// `√(1 - F̄²)`.
pub fn purified_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let f = generalized_fidelity(rho, sigma)?.min(1.0);
    Ok((1.0 - f * f).max(0.0).sqrt())
}

/// Schmidt decomposition `ψ = Σ_i s_i |u_i>|v_i>`.
#[derive(Debug, Clone)]
pub struct Schmidt {
    /// Nonzero coefficients, descending.
    pub coefficients: Vec<f64>,
    /// Local vectors on the first factor.
    pub left: Vec<Vec<Complex64>>,
    /// Local vectors on the second factor.
    pub right: Vec<Vec<Complex64>>,
}

impl Schmidt {
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let dim = self.left.first().map_or(0, Vec::len) * self.right.first().map_or(0, Vec::len);
        let mut out = vec![ZERO; dim];
        for ((s, u), v) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            for (o, x) in out.iter_mut().zip(tensor_vec(u, v)) {
                *o += x * *s;
            }
        }
        out
    }
}

pub fn schmidt(psi: &PureState) -> Result<Schmidt> {
    let [da, db] = psi.dims[..] else {
        return Err(Error::InvalidSubsystem(format!("Schmidt decomposition needs two subsystems, got {:?}", psi.dims)));
    };
    let coeffs = CMatrix::new(da, db, psi.vec.clone())?;
    let eig = herm_eig(&(&coeffs * &coeffs.adjoint()))?;

    let mut terms: Vec<(f64, Vec<Complex64>, Vec<Complex64>)> = Vec::new();
    for i in 0..da {
        let u = eig.vectors.column(i);
        // r_i = u_i† M, so that M = Σ_i u_i r_i
        let r: Vec<Complex64> = (0..db).map(|b| (0..da).map(|a| u[a].conj() * coeffs[(a, b)]).sum()).collect();
        let s = vec_norm(&r);
        if s > 1e-13 {
            terms.push((s, u, r.into_iter().map(|z| z / s).collect()));
        }
    }
    terms.sort_by(|x, y| y.0.total_cmp(&x.0));
    Ok(Schmidt {
        coefficients: terms.iter().map(|t| t.0).collect(),
        left: terms.iter().map(|t| t.1.clone()).collect(),
        right: terms.into_iter().map(|t| t.2).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell_phi_plus() -> PureState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(vec![2, 2], vec![c(h, 0.0), ZERO, ZERO, c(h, 0.0)]).unwrap()
    }

    #[test]
    fn tensor_examples() {
        assert_eq!(tensor(&CMatrix::identity(2), &CMatrix::identity(2)), CMatrix::identity(4));

        let yy = tensor(&sigma_y(), &sigma_y());
        // (-i)(-i) = -1 at (0,3); (-i)(i) = 1 at (1,2) and (2,1); (i)(i) = -1 at (3,0)
        let expected = [(0, 3, -1.0), (1, 2, 1.0), (2, 1, 1.0), (3, 0, -1.0)];
        for r in 0..4 {
            for col in 0..4 {
                let want = expected.iter().find(|e| e.0 == r && e.1 == col).map_or(0.0, |e| e.2);
                assert!((yy[(r, col)] - c(want, 0.0)).norm() < 1e-15);
            }
        }

        let p0 = CMatrix::from_diag(&[1.0, 0.0]);
        assert_eq!(tensor(&p0, &p0), CMatrix::from_diag(&[1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let rho = bell_phi_plus().density();
        let red = rho.partial_trace(&[0]).unwrap();
        assert!(red.mat().max_abs_diff(&CMatrix::identity(2).scale_real(0.5)) < 1e-15);
        assert_eq!(red.dims(), &[2]);
    }

    #[test]
    fn partial_trace_product_and_order() {
        let a = DensityMatrix::new(vec![2], CMatrix::from_real(&[&[0.7, 0.2], &[0.2, 0.3]]).unwrap()).unwrap();
        let b = DensityMatrix::new(vec![3], CMatrix::from_diag(&[0.5, 0.25, 0.25])).unwrap();
        let ab = a.tensor(&b);
        assert!(ab.partial_trace(&[0]).unwrap().mat().max_abs_diff(a.mat()) < 1e-14);
        assert!(ab.partial_trace(&[1]).unwrap().mat().max_abs_diff(b.mat()) < 1e-14);
        assert!(ab.partial_trace(&[0, 1]).unwrap().mat().max_abs_diff(ab.mat()) < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_bad_indices() {
        let rho = bell_phi_plus().density();
        assert!(matches!(rho.partial_trace(&[]), Err(Error::InvalidSubsystem(_))));
        assert!(matches!(rho.partial_trace(&[2]), Err(Error::InvalidSubsystem(_))));
        assert!(matches!(rho.partial_trace(&[1, 0]), Err(Error::InvalidSubsystem(_))));
    }

    #[test]
    fn herm_eig_diagonal_and_pauli() {
        let eig = herm_eig(&CMatrix::from_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(eig.values, vec![3.0, 2.0, 1.0]);
        assert!((eig.vectors[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((eig.vectors[(2, 1)].norm() - 1.0).abs() < 1e-15);
        assert!((eig.vectors[(1, 2)].norm() - 1.0).abs() < 1e-15);

        let eig = herm_eig(&sigma_x()).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] + 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for k in 0..2 {
            for r in 0..2 {
                assert!((eig.vectors[(r, k)].norm() - h).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let m = CMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&CMatrix::from_diag(&[1.0, -1.0])).unwrap() - 2.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let minus = PureState::new(vec![2, 2], vec![c(h, 0.0), ZERO, ZERO, c(-h, 0.0)]).unwrap();
        let diff = bell_phi_plus().density().mat() - minus.density().mat();
        assert!((trace_norm(&diff).unwrap() - 2.0).abs() < 1e-12);
        // non-Hermitian path: nilpotent has singular values (1, 0)
        let n = CMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!((trace_norm(&n).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fidelity_and_purified_distance_examples() {
        let zero = PureState::basis(vec![2], 0).unwrap().density();
        let one = PureState::basis(vec![2], 1).unwrap().density();
        let mixed = DensityMatrix::maximally_mixed(vec![2]);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((fidelity(&mixed, &zero).unwrap() - h).abs() < 1e-12);
        assert!((fidelity(&zero, &mixed).unwrap() - h).abs() < 1e-12);

        assert!(purified_distance(&zero, &zero).unwrap() < 1e-6);
        assert!((purified_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!((purified_distance(&mixed, &zero).unwrap() - h).abs() < 1e-12);
    }

    #[test]
    fn generalized_fidelity_of_subnormalized_states() {
        let half = DensityMatrix::new_subnormalized(vec![1], CMatrix::from_diag(&[0.5])).unwrap();
        let quarter = DensityMatrix::new_subnormalized(vec![1], CMatrix::from_diag(&[0.25])).unwrap();
        // F = sqrt(0.5 * 0.25), defect = sqrt(0.5 * 0.75)
        let want = (0.125f64).sqrt() + (0.375f64).sqrt();
        assert!((generalized_fidelity(&half, &quarter).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn schmidt_examples() {
        let s = schmidt(&bell_phi_plus()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(s.coefficients.len(), 2);
        assert!(s.coefficients.iter().all(|&x| (x - h).abs() < 1e-12));

        let prod = PureState::basis(vec![2, 2], 0).unwrap();
        let s = schmidt(&prod).unwrap();
        assert_eq!(s.coefficients.len(), 1);
        assert!((s.coefficients[0] - 1.0).abs() < 1e-12);

        let psi = PureState::normalized(vec![2, 2], vec![c(1.0, 0.0), ZERO, ZERO, c(0.5, 0.0)]).unwrap();
        let s = schmidt(&psi).unwrap();
        assert!((s.coefficients[0] - 2.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((s.coefficients[1] - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        let rec = s.reconstruct();
        let err = rec.iter().zip(psi.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn schmidt_rejects_tripartite() {
        let psi = PureState::basis(vec![2, 2, 2], 0).unwrap();
        assert!(matches!(schmidt(&psi), Err(Error::InvalidSubsystem(_))));
    }

    #[test]
    fn density_validation() {
        let not_psd = CMatrix::from_diag(&[1.5, -0.5]);
        assert!(matches!(DensityMatrix::new(vec![2], not_psd), Err(Error::NotPsd(_))));
        let bad_trace = CMatrix::from_diag(&[0.5, 0.4]);
        assert!(matches!(DensityMatrix::new(vec![2], bad_trace.clone()), Err(Error::InvalidTrace(_))));
        assert!(DensityMatrix::new_subnormalized(vec![2], bad_trace).is_ok());
        let wrong = CMatrix::identity(3);
        assert!(matches!(DensityMatrix::new(vec![2], wrong), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn rank_threshold_is_relative() {
        assert_eq!(numerical_rank(&[0.999, 0.001]), 2);
        assert_eq!(numerical_rank(&[1.0, 1e-10]), 1);
        assert_eq!(numerical_rank(&[1.0, 2e-9]), 2);
    }

    #[test]
    fn partial_transpose_of_bell_has_negative_eigenvalue() {
        let pt = bell_phi_plus().density().partial_transpose(1).unwrap();
        let eig = herm_eigvals(&pt).unwrap();
        assert!((eig[3] + 0.5).abs() < 1e-12);
    }
}
