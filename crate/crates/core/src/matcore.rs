//! Dense real/complex matrix kernel.
//!
//! Every matrix carries a [`Field`] tag. Entries are stored as complex numbers
//! in both cases; real-field matrices keep their imaginary parts at zero, which
//! lets one code path serve both fields.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Symmetrization tolerance applied when a matrix is promoted to [`HermMat`].
pub const SYMMETRIZE_TOL: f64 = 1e-12;
/// Default tolerance for PSD tests.
pub const PSD_TOL: f64 = 1e-9;
/// Default relative tolerance for rank decisions (`eigenvalue > tol * ||a||`).
pub const RANK_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    #[serde(rename = "R")]
    Real,
    #[serde(rename = "C")]
    Complex,
}

impl Field {
    /// The smallest field containing both.
    pub fn join(self, other: Field) -> Field {
        if self == Field::Complex || other == Field::Complex {
            Field::Complex
        } else {
            Field::Real
        }
    }

    pub fn is_complex(self) -> bool {
        self == Field::Complex
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Real => write!(f, "R"),
            Field::Complex => write!(f, "C"),
        }
    }
}

/// A dense matrix over ℝ or ℂ.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    field: Field,
    data: DMatrix<C64>,
}

impl Mat {
    /// Wraps complex data. For [`Field::Real`] the imaginary parts are dropped.
    pub fn new(field: Field, mut data: DMatrix<C64>) -> Mat {
        if field == Field::Real {
            data.iter_mut().for_each(|z| z.im = 0.0);
        }
        Mat { field, data }
    }

    pub fn from_real(data: &DMatrix<f64>) -> Mat {
        Mat {
            field: Field::Real,
            data: data.map(|v| C64::new(v, 0.0)),
        }
    }

    /// Row-major real constructor.
    pub fn from_rows(rows: &[&[f64]]) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let data = DMatrix::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0));
        Mat {
            field: Field::Real,
            data,
        }
    }

    /// Row-major complex constructor.
    pub fn from_complex_rows(rows: &[&[C64]]) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let data = DMatrix::from_fn(r, c, |i, j| rows[i][j]);
        Mat {
            field: Field::Complex,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, field: Field, f: impl FnMut(usize, usize) -> C64) -> Mat {
        Mat::new(field, DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize, field: Field) -> Mat {
        Mat {
            field,
            data: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize, field: Field) -> Mat {
        Mat {
            field,
            data: DMatrix::identity(n, n),
        }
    }

    pub fn diag(values: &[f64]) -> Mat {
        let n = values.len();
        Mat::from_fn(n, n, Field::Real, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Matrix unit `E_ij` of the given shape.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize, field: Field) -> Mat {
        let mut m = Mat::zeros(rows, cols, field);
        m.data[(i, j)] = ONE;
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.data.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn data(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<C64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[(i, j)] = if self.field == Field::Real {
            C64::new(v.re, 0.0)
        } else {
            v
        };
    }

    /// Re-tags the matrix with a wider (or equal) field.
    pub fn with_field(mut self, field: Field) -> Mat {
        if field == Field::Real {
            self.data.iter_mut().for_each(|z| z.im = 0.0);
        }
        self.field = field;
        self
    }

    /// Real parts as an `f64` matrix.
    pub fn re(&self) -> DMatrix<f64> {
        self.data.map(|z| z.re)
    }

    /// Imaginary parts as an `f64` matrix.
    pub fn im(&self) -> DMatrix<f64> {
        self.data.map(|z| z.im)
    }

    pub fn adjoint(&self) -> Mat {
        Mat {
            field: self.field,
            data: self.data.adjoint(),
        }
    }

    pub fn transpose(&self) -> Mat {
        Mat {
            field: self.field,
            data: self.data.transpose(),
        }
    }

    pub fn conj(&self) -> Mat {
        Mat {
            field: self.field,
            data: self.data.map(|z| z.conj()),
        }
    }

    /// Scales by a complex factor; a non-real factor promotes to ℂ.
    pub fn scale(&self, c: C64) -> Mat {
        let field = if c.im != 0.0 { Field::Complex } else { self.field };
        Mat {
            field,
            data: &self.data * c,
        }
    }

    pub fn scale_re(&self, c: f64) -> Mat {
        Mat {
            field: self.field,
            data: &self.data * C64::new(c, 0.0),
        }
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        if self.rows() == 0 || self.cols() == 0 {
            return 0.0;
        }
        if self.field == Field::Real {
            let svd = self.re().svd(false, false);
            svd.singular_values.max()
        } else {
            let svd = self.data.clone().svd(false, false);
            svd.singular_values.max()
        }
    }

    /// Real Hilbert–Schmidt inner product `Re tr(a* b)`.
    pub fn inner(&self, other: &Mat) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// Complex Hilbert–Schmidt inner product `tr(a* b)`.
    pub fn inner_c(&self, other: &Mat) -> C64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Mat) -> Mat {
        Mat {
            field: self.field.join(other.field),
            data: self.data.kronecker(&other.data),
        }
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &Mat) -> Mat {
        let (r1, c1) = self.shape();
        let (r2, c2) = other.shape();
        let mut data = DMatrix::zeros(r1 + r2, c1 + c2);
        data.view_mut((0, 0), (r1, c1)).copy_from(&self.data);
        data.view_mut((r1, c1), (r2, c2)).copy_from(&other.data);
        Mat {
            field: self.field.join(other.field),
            data,
        }
    }

    /// Assembles `[[a, b], [c, d]]`.
    pub fn block2(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Result<Mat> {
        if a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() || b.cols() != d.cols() {
            return Err(Error::Dimension("incompatible 2x2 block shapes".into()));
        }
        let (r1, c1) = a.shape();
        let (r2, c2) = d.shape();
        let mut data = DMatrix::zeros(r1 + r2, c1 + c2);
        data.view_mut((0, 0), (r1, c1)).copy_from(&a.data);
        data.view_mut((0, c1), (r1, c2)).copy_from(&b.data);
        data.view_mut((r1, 0), (r2, c1)).copy_from(&c.data);
        data.view_mut((r1, c1), (r2, c2)).copy_from(&d.data);
        let field = a.field.join(b.field).join(c.field).join(d.field);
        Ok(Mat { field, data })
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat {
        Mat {
            field: self.field,
            data: self.data.view((r0, c0), (rows, cols)).into_owned(),
        }
    }

    pub fn set_submatrix(&mut self, r0: usize, c0: usize, block: &Mat) {
        self.data
            .view_mut((r0, c0), block.shape())
            .copy_from(&block.data);
        if block.field == Field::Complex {
            self.field = Field::Complex;
        }
    }

    /// Hermitian part `(a + a*)/2`.
    pub fn herm_part(&self) -> Mat {
        Mat {
            field: self.field,
            data: (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0),
        }
    }

    /// Maximum entrywise deviation from being Hermitian.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        dev
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        Mat {
            field: self.field.join(rhs.field),
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        Mat {
            field: self.field.join(rhs.field),
            data: &self.data - &rhs.data,
        }
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        Mat {
            field: self.field.join(rhs.field),
            data: &self.data * &rhs.data,
        }
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        Mat {
            field: self.field,
            data: -&self.data,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EntryRepr {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Serialize, Deserialize)]
struct MatRepr {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<Vec<EntryRepr>>,
}

impl Serialize for Mat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let data = (0..self.rows())
            .map(|i| {
                (0..self.cols())
                    .map(|j| {
                        let z = self.data[(i, j)];
                        match self.field {
                            Field::Real => EntryRepr::Real(z.re),
                            Field::Complex => EntryRepr::Complex([z.re, z.im]),
                        }
                    })
                    .collect()
            })
            .collect();
        MatRepr {
            rows: self.rows(),
            cols: self.cols(),
            field: self.field,
            data,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Mat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Mat, D::Error> {
        let repr = MatRepr::deserialize(deserializer)?;
        if repr.data.len() != repr.rows || repr.data.iter().any(|row| row.len() != repr.cols) {
            return Err(D::Error::custom(format!(
                "matrix data does not match declared shape {}x{}",
                repr.rows, repr.cols
            )));
        }
        let mut data = DMatrix::zeros(repr.rows, repr.cols);
        for (i, row) in repr.data.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                data[(i, j)] = match *e {
                    EntryRepr::Real(v) => C64::new(v, 0.0),
                    EntryRepr::Complex([re, im]) => {
                        if repr.field == Field::Real && im != 0.0 {
                            return Err(D::Error::custom(format!(
                                "complex entry at ({i}, {j}) in a real matrix"
                            )));
                        }
                        C64::new(re, im)
                    }
                };
            }
        }
        Ok(Mat::new(repr.field, data))
    }
}

/// A square matrix equal to its own adjoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Mat", into = "Mat")]
pub struct HermMat(Mat);

impl HermMat {
    /// Accepts `m` if it is Hermitian up to [`SYMMETRIZE_TOL`] (relative to its
    /// largest entry) and stores the exact Hermitian part.
    pub fn new(m: Mat) -> Result<HermMat> {
        HermMat::with_tol(m, SYMMETRIZE_TOL)
    }

    pub fn with_tol(m: Mat, tol: f64) -> Result<HermMat> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let dev = m.hermitian_deviation();
        if dev > tol * m.max_abs().max(1.0) {
            return Err(Error::NotHermitian(dev));
        }
        Ok(HermMat(m.herm_part()))
    }

    /// Takes the Hermitian part without checking how far `m` was from it.
    pub fn from_herm_part(m: &Mat) -> HermMat {
        assert!(m.is_square(), "Hermitian part of a non-square matrix");
        HermMat(m.herm_part())
    }

    pub fn identity(n: usize, field: Field) -> HermMat {
        HermMat(Mat::identity(n, field))
    }

    pub fn zeros(n: usize, field: Field) -> HermMat {
        HermMat(Mat::zeros(n, n, field))
    }

    pub fn diag(values: &[f64]) -> HermMat {
        HermMat(Mat::diag(values))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    /// Congruence `a* self a`.
    pub fn congruence(&self, a: &Mat) -> HermMat {
        HermMat::from_herm_part(&(&(&a.adjoint() * &self.0) * a))
    }
}

impl std::ops::Deref for HermMat {
    type Target = Mat;
    fn deref(&self) -> &Mat {
        &self.0
    }
}

impl TryFrom<Mat> for HermMat {
    type Error = Error;
    fn try_from(m: Mat) -> Result<HermMat> {
        HermMat::new(m)
    }
}

impl From<HermMat> for Mat {
    fn from(h: HermMat) -> Mat {
        h.0
    }
}

/// Spectral decomposition `a = V diag(values) V*` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl HermEig {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue in absolute value.
    pub fn abs_max(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// Eigenvector `k` as an `n×1` column.
    pub fn vector(&self, k: usize) -> Mat {
        self.vectors.submatrix(0, k, self.vectors.rows(), 1)
    }

    /// Rebuilds `V diag(f(λ)) V*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermMat {
        let v = self.vectors.data();
        let mut scaled = v.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            scaled.column_mut(k).scale_mut(s);
        }
        let data = scaled * v.adjoint();
        HermMat::from_herm_part(&Mat::new(self.vectors.field(), data))
    }
}

const EIG_MAX_ITER: usize = 10_000;

/// Hermitian eigendecomposition, eigenvalues sorted ascending.
pub fn herm_eig(a: &HermMat) -> Result<HermEig> {
    let n = a.dim();
    if n == 0 {
        return Ok(HermEig {
            values: vec![],
            vectors: Mat::zeros(0, 0, a.field()),
        });
    }
    let (values, vectors): (Vec<f64>, DMatrix<C64>) = match a.field() {
        Field::Real => {
            let eig = a
                .re()
                .try_symmetric_eigen(f64::EPSILON, EIG_MAX_ITER)
                .ok_or(Error::NoConvergence)?;
            (
                eig.eigenvalues.iter().copied().collect(),
                eig.eigenvectors.map(|v| C64::new(v, 0.0)),
            )
        }
        Field::Complex => {
            let eig = a
                .data()
                .clone()
                .try_symmetric_eigen(f64::EPSILON, EIG_MAX_ITER)
                .ok_or(Error::NoConvergence)?;
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        }
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok(HermEig {
        values: sorted_values,
        vectors: Mat::new(a.field(), sorted_vectors),
    })
}

pub fn min_eigenvalue(a: &HermMat) -> Result<f64> {
    Ok(herm_eig(a)?.min())
}

/// True iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd(a: &HermMat, tol: f64) -> Result<bool> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidArgument(format!("PSD tolerance must be nonnegative, got {tol}")));
    }
    Ok(min_eigenvalue(a)? >= -tol)
}

fn psd_eig(a: &HermMat, tol: f64) -> Result<(HermEig, f64)> {
    let eig = herm_eig(a)?;
    let scale = eig.abs_max();
    if eig.min() < -tol * scale.max(1.0) {
        return Err(Error::NotPsd(eig.min()));
    }
    Ok((eig, scale))
}

/// Orthogonal projection onto the span of eigenvectors with eigenvalue
/// above `tol·‖a‖`.
pub fn support_projection(a: &HermMat, tol: f64) -> Result<HermMat> {
    let (eig, scale) = psd_eig(a, tol)?;
    let cut = tol * scale;
    Ok(eig.map(|l| if scale > 0.0 && l > cut { 1.0 } else { 0.0 }))
}

/// `(e a e)^{-1/2} + e⊥` where `e` is the support projection of `a`.
pub fn restricted_inv_sqrt(a: &HermMat, tol: f64) -> Result<HermMat> {
    let (eig, scale) = psd_eig(a, tol)?;
    let cut = tol * scale;
    Ok(eig.map(|l| if scale > 0.0 && l > cut { 1.0 / l.sqrt() } else { 1.0 }))
}

/// Moore–Penrose inverse square root `(e a e)^{-1/2}` (zero on `e⊥`).
pub fn pinv_sqrt(a: &HermMat, tol: f64) -> Result<HermMat> {
    let (eig, scale) = psd_eig(a, tol)?;
    let cut = tol * scale;
    Ok(eig.map(|l| if scale > 0.0 && l > cut { 1.0 / l.sqrt() } else { 0.0 }))
}

/// PSD square root; small negative eigenvalues (within `tol`) are clipped.
pub fn psd_sqrt(a: &HermMat, tol: f64) -> Result<HermMat> {
    let (eig, _) = psd_eig(a, tol)?;
    Ok(eig.map(|l| l.max(0.0).sqrt()))
}

/// The selfadjoint dilation `[[0, x], [x*, 0]]`.
pub fn tilde(x: &Mat) -> HermMat {
    let (r, c) = x.shape();
    let z1 = Mat::zeros(r, r, x.field());
    let z2 = Mat::zeros(c, c, x.field());
    let m = Mat::block2(&z1, x, &x.adjoint(), &z2).expect("shapes are consistent by construction");
    HermMat(m)
}

/// Reorders `x ∈ M_m ⊗ M_n` as an element of `M_n ⊗ M_m`.
pub fn canonical_shuffle(x: &Mat, m: usize, n: usize) -> Result<Mat> {
    if x.rows() != m * n || x.cols() != m * n {
        return Err(Error::Dimension(format!(
            "canonical shuffle of a {}x{} matrix with m={m}, n={n}",
            x.rows(),
            x.cols()
        )));
    }
    let src = x.data();
    let data = DMatrix::from_fn(m * n, m * n, |r, c| {
        let (a, i) = (r / m, r % m);
        let (b, j) = (c / m, c % m);
        src[(i * n + a, j * n + b)]
    });
    Ok(Mat::new(x.field(), data))
}

/// Orthonormal basis (for `Re tr(a* b)`) of the real space of Hermitian
/// (real field: symmetric) `n×n` matrices.
pub fn hermitian_basis(n: usize, field: Field) -> Vec<Mat> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(n * n);
    for i in 0..n {
        basis.push(Mat::unit(n, n, i, i, field));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m = Mat::zeros(n, n, field);
            m.set(i, j, C64::new(s, 0.0));
            m.set(j, i, C64::new(s, 0.0));
            basis.push(m);
            if field == Field::Complex {
                let mut m = Mat::zeros(n, n, field);
                m.set(i, j, C64::new(0.0, s));
                m.set(j, i, C64::new(0.0, -s));
                basis.push(m);
            }
        }
    }
    basis
}

/// Orthonormal basis of real antisymmetric `n×n` matrices.
pub fn antisymmetric_basis(n: usize) -> Vec<Mat> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m = Mat::zeros(n, n, Field::Real);
            m.set(i, j, C64::new(s, 0.0));
            m.set(j, i, C64::new(-s, 0.0));
            basis.push(m);
        }
    }
    basis
}

/// Modified Gram–Schmidt over real-vectorized matrices. Appends each
/// candidate whose residual exceeds `tol` (relative to its own norm) to
/// `basis`, normalized. Returns how many were added.
pub(crate) fn gram_schmidt_extend(basis: &mut Vec<Mat>, candidates: impl IntoIterator<Item = Mat>, tol: f64) -> usize {
    let mut added = 0;
    for cand in candidates {
        let norm0 = cand.frobenius_norm();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = cand;
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for b in basis.iter() {
                let c = b.inner(&v);
                if c != 0.0 {
                    v = &v - &b.scale_re(c);
                }
            }
        }
        let norm = v.frobenius_norm();
        if norm > tol * norm0 {
            basis.push(v.scale_re(1.0 / norm));
            added += 1;
        }
    }
    added
}
