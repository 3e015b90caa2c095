//! Concrete operator systems `S ⊆ M_d` and their matrix levels.
//!
//! A system stores an orthonormal basis (for `Re tr(a* b)`) whose first
//! element is `I/√d`. Every basis element is selfadjoint or, over the reals,
//! possibly antisymmetric; `signs[r]` records `b_r* = signs[r]·b_r`.
//!
//! An element of `M_n(S)` is stored by coefficient matrices, one `n×n` block
//! per basis element. Its ambient form is `Σ_r C_r ⊗ b_r ∈ M_n ⊗ M_d`, so the
//! `(i, j)` block of size `d` is the `(i, j)` matrix entry. The same storage
//! holds a linear map `S → M_n` by its values on the basis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    antisymmetric_basis, gram_schmidt_extend, herm_eig, hermitian_basis, Field, HermMat, Mat, C64,
};

/// Residual allowed when checking span membership.
pub const SPAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSystem {
    field: Field,
    d: usize,
    basis: Vec<Mat>,
    signs: Vec<f64>,
}

/// An element of `M_n(S)`, or a map `S → M_n` given by its values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub level: usize,
    #[serde(rename = "values")]
    pub coeffs: Vec<Mat>,
}

pub type SysElement = Element;
pub type DualElement = Element;

impl Element {
    pub fn zeros(level: usize, dim: usize, field: Field) -> Element {
        Element {
            level,
            coeffs: vec![Mat::zeros(level, level, field); dim],
        }
    }

    pub fn scale(&self, c: f64) -> Element {
        Element {
            level: self.level,
            coeffs: self.coeffs.iter().map(|m| m.scale_re(c)).collect(),
        }
    }

    pub fn scale_c(&self, c: C64) -> Element {
        Element {
            level: self.level,
            coeffs: self.coeffs.iter().map(|m| m.scale(c)).collect(),
        }
    }

    /// Same coefficients over another field.
    pub fn with_field(&self, field: Field) -> Element {
        Element {
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| c.clone().with_field(field)).collect(),
        }
    }

    pub fn add(&self, other: &Element) -> Element {
        assert_eq!(self.level, other.level, "level mismatch");
        Element {
            level: self.level,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Element) -> Element {
        self.add(&other.scale(-1.0))
    }

    /// `α* x β` for scalar matrices `α` (n×m) and `β` (n×k).
    pub fn compress(&self, alpha: &Mat, beta: &Mat) -> Element {
        let a = alpha.adjoint();
        Element {
            level: beta.cols(),
            coeffs: self.coeffs.iter().map(|c| &(&a * c) * beta).collect(),
        }
    }

    /// `x ⊕ y`.
    pub fn direct_sum(&self, other: &Element) -> Element {
        Element {
            level: self.level + other.level,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.direct_sum(b)).collect(),
        }
    }

    /// Largest coefficient entry, a cheap size measure.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    /// Distance to another element in the coefficient Frobenius norm (which is
    /// the ambient Frobenius norm for an orthonormal basis).
    pub fn distance(&self, other: &Element) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Serialize, Deserialize)]
struct SystemRepr {
    field: Field,
    ambient_dim: usize,
    basis: Vec<Mat>,
}

impl Serialize for OperatorSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SystemRepr {
            field: self.field,
            ambient_dim: self.d,
            basis: self.basis.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SystemRepr::deserialize(d)?;
        if repr.basis.iter().any(|b| b.rows() != repr.ambient_dim || b.cols() != repr.ambient_dim) {
            return Err(D::Error::custom("basis matrix does not match ambient_dim"));
        }
        let basis: Vec<Mat> = repr.basis.into_iter().map(|b| b.with_field(repr.field)).collect();
        make_opsys(&basis).map_err(D::Error::custom)
    }
}

/// Builds the operator system spanned by `matrices` and their adjoints.
pub fn make_opsys(matrices: &[Mat]) -> Result<OperatorSystem> {
    let Some(first) = matrices.first() else {
        return Err(Error::EmptySpan);
    };
    let d = first.rows();
    let mut field = Field::Real;
    for m in matrices {
        if m.rows() != d || m.cols() != d {
            return Err(Error::Dimension(format!(
                "generator of shape {}x{} in a system of {d}x{d} matrices",
                m.rows(),
                m.cols()
            )));
        }
        field = field.join(m.field());
    }
    // selfadjoint and (real case) antisymmetric parts span the adjoint closure
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for m in matrices {
        let m = m.clone().with_field(field);
        even.push(m.herm_part());
        let skew = (&m - &m.adjoint()).scale_re(0.5);
        match field {
            Field::Complex => even.push(skew.scale(C64::new(0.0, -1.0))),
            Field::Real => odd.push(skew),
        }
    }
    let scale = matrices.iter().fold(0.0f64, |m, a| m.max(a.frobenius_norm()));
    if scale == 0.0 {
        return Err(Error::EmptySpan);
    }
    let mut probe = Vec::new();
    gram_schmidt_extend(&mut probe, even.iter().cloned(), SPAN_TOL);
    if probe.is_empty() && odd.iter().all(|o| o.frobenius_norm() == 0.0) {
        return Err(Error::EmptySpan);
    }
    let id = Mat::identity(d, field);
    let mut residual = id.clone();
    for b in &probe {
        residual = &residual - &b.scale_re(b.inner(&id));
    }
    let res = residual.frobenius_norm() / (d as f64).sqrt();
    if res > SPAN_TOL.sqrt() {
        return Err(Error::UnitNotInSpan(res));
    }

    let mut basis = vec![id.scale_re(1.0 / (d as f64).sqrt())];
    gram_schmidt_extend(&mut basis, even, SPAN_TOL);
    let n_even = basis.len();
    gram_schmidt_extend(&mut basis, odd, SPAN_TOL);
    let signs = (0..basis.len()).map(|r| if r < n_even { 1.0 } else { -1.0 }).collect();
    let basis = basis
        .into_iter()
        .map(|b| if field == Field::Real { b } else { HermMat::from_herm_part(&b).into_mat() })
        .collect();
    Ok(OperatorSystem { field, d, basis, signs })
}

impl OperatorSystem {
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    /// Coordinates of the unit in the basis.
    pub fn unit_coords(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim()];
        c[0] = (self.d as f64).sqrt();
        c
    }

    /// Coordinates of `a ∈ S`; fails if `a` is not in the span.
    pub fn coords(&self, a: &Mat) -> Result<Vec<C64>> {
        let c: Vec<C64> = self.basis.iter().map(|b| b.inner_c(a)).collect();
        let mut back = Mat::zeros(self.d, self.d, self.field.join(a.field()));
        for (ci, b) in c.iter().zip(&self.basis) {
            back = &back + &b.scale(*ci);
        }
        let res = (&back - a).frobenius_norm();
        if res > SPAN_TOL.sqrt() * a.frobenius_norm().max(1.0) {
            return Err(Error::InvalidArgument(format!("matrix is not in the system (residual {res:.3e})")));
        }
        Ok(c)
    }

    /// The system with the same generators over ℂ.
    pub fn complexify(&self) -> OperatorSystem {
        let basis: Vec<Mat> = self.basis.iter().map(|b| b.clone().with_field(Field::Complex)).collect();
        make_opsys(&basis).expect("complex span of a valid system is valid")
    }

    /// The unit of `M_n(S)`.
    pub fn unit(&self, n: usize) -> Element {
        let mut e = Element::zeros(n, self.dim(), self.field);
        e.coeffs[0] = Mat::identity(n, self.field).scale_re((self.d as f64).sqrt());
        e
    }

    pub fn zero(&self, n: usize) -> Element {
        Element::zeros(n, self.dim(), self.field)
    }

    fn check(&self, x: &Element) -> Result<()> {
        if x.coeffs.len() != self.dim() || x.coeffs.iter().any(|c| c.rows() != x.level || c.cols() != x.level) {
            return Err(Error::Dimension(format!(
                "element of level {} with {} coefficient blocks does not fit a system of dimension {}",
                x.level,
                x.coeffs.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `Σ_r C_r ⊗ b_r`.
    pub fn ambient(&self, x: &Element) -> Mat {
        let n = x.level;
        let mut out = Mat::zeros(n * self.d, n * self.d, self.field);
        for (c, b) in x.coeffs.iter().zip(&self.basis) {
            if c.max_abs() != 0.0 {
                out = &out + &c.kron(b);
            }
        }
        out
    }

    /// Inverse of [`OperatorSystem::ambient`]; fails off `M_n(S)`.
    pub fn from_ambient(&self, a: &Mat, n: usize) -> Result<Element> {
        if a.rows() != n * self.d || a.cols() != n * self.d {
            return Err(Error::Dimension(format!("ambient matrix is not {0}x{0}", n * self.d)));
        }
        let d = self.d;
        let coeffs: Vec<Mat> = self
            .basis
            .iter()
            .map(|b| Mat::from_fn(n, n, self.field, |i, j| b.inner_c(&a.submatrix(i * d, j * d, d, d))))
            .collect();
        let x = Element { level: n, coeffs };
        let res = (&self.ambient(&x) - a).frobenius_norm();
        if res > SPAN_TOL.sqrt() * a.frobenius_norm().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not in M_{n}(S) (residual {res:.3e})"
            )));
        }
        Ok(x)
    }

    pub fn adjoint(&self, x: &Element) -> Element {
        Element {
            level: x.level,
            coeffs: x.coeffs.iter().zip(&self.signs).map(|(c, s)| c.adjoint().scale_re(*s)).collect(),
        }
    }

    pub fn is_selfadjoint(&self, x: &Element, tol: f64) -> bool {
        self.adjoint(x).distance(x) <= tol * x.max_abs().max(1.0)
    }

    /// `[[0, x], [x*, 0]]` at level `2n`.
    pub fn tilde(&self, x: &Element) -> Element {
        let xs = self.adjoint(x);
        let n = x.level;
        let z = Mat::zeros(n, n, self.field);
        Element {
            level: 2 * n,
            coeffs: x
                .coeffs
                .iter()
                .zip(&xs.coeffs)
                .map(|(c, cs)| Mat::block2(&z, c, cs, &z).expect("square blocks"))
                .collect(),
        }
    }

    /// `[[x, y], [−y, x]]` at level `2n`.
    pub fn c_block(&self, x: &Element, y: &Element) -> Element {
        Element {
            level: 2 * x.level,
            coeffs: x
                .coeffs
                .iter()
                .zip(&y.coeffs)
                .map(|(a, b)| Mat::block2(a, b, &b.scale_re(-1.0), a).expect("square blocks"))
                .collect(),
        }
    }

    /// Hermitian ambient form of a selfadjoint element.
    pub fn ambient_herm(&self, x: &Element) -> Result<HermMat> {
        self.check(x)?;
        HermMat::with_tol(self.ambient(x), 1e-9)
    }

    /// Membership in the inherited cone `M_n(S) ∩ M_{nd}⁺`.
    pub fn is_positive(&self, x: &Element, tol: f64) -> Result<bool> {
        let a = self.ambient_herm(x)?;
        Ok(herm_eig(&a)?.min() >= -tol)
    }

    /// `inf{t : −t1 ≤ x ≤ t1}`.
    pub fn order_unit_norm(&self, x: &Element) -> Result<f64> {
        let a = self.ambient_herm(x)?;
        Ok(herm_eig(&a)?.abs_max())
    }

    /// Operator space norm of a general element.
    pub fn matrix_norm(&self, x: &Element) -> Result<f64> {
        self.check(x)?;
        Ok(self.ambient(x).spectral_norm())
    }

    /// Orthonormal real basis of `M_n(S)_sa`, as `(r, H)` with element
    /// `H ⊗ b_r`.
    pub fn sa_basis(&self, n: usize) -> Vec<(usize, Mat)> {
        let herm = hermitian_basis(n, self.field);
        let anti = antisymmetric_basis(n);
        let mut out = Vec::new();
        for (r, s) in self.signs.iter().enumerate() {
            let hs = if *s > 0.0 { &herm } else { &anti };
            for h in hs {
                out.push((r, h.clone()));
            }
        }
        out
    }

    /// Element with a single coefficient `H` on basis element `r`.
    pub fn basis_element(&self, n: usize, r: usize, h: &Mat) -> Element {
        let mut e = self.zero(n);
        e.coeffs[r] = h.clone().with_field(self.field);
        e
    }

    /// Coordinates of a selfadjoint element in [`OperatorSystem::sa_basis`].
    pub fn sa_coords(&self, x: &Element) -> Vec<f64> {
        self.sa_basis(x.level).iter().map(|(r, h)| h.inner(&x.coeffs[*r])).collect()
    }

    /// Pairing `⟨⟨φ, x⟩⟩ = Σ_ij φ(x_ij)_ij` of a map `φ: S → M_n` with
    /// `x ∈ M_n(S)`.
    pub fn pairing(&self, phi: &Element, x: &Element) -> C64 {
        phi.coeffs
            .iter()
            .zip(&x.coeffs)
            .map(|(p, c)| p.data().iter().zip(c.data().iter()).map(|(a, b)| a * b).sum::<C64>())
            .sum()
    }

    /// `φ⁽ᵏ⁾(x) ∈ M_k ⊗ M_n` for `φ: S → M_n` and `x ∈ M_k(S)`.
    pub fn apply_map(&self, phi: &Element, x: &Element) -> Mat {
        let mut out = Mat::zeros(x.level * phi.level, x.level * phi.level, self.field);
        for (c, p) in x.coeffs.iter().zip(&phi.coeffs) {
            out = &out + &c.kron(p);
        }
        out
    }

    /// Values of `φ` on an arbitrary matrix of `S`.
    pub fn eval_map(&self, phi: &Element, a: &Mat) -> Result<Mat> {
        let c = self.coords(a)?;
        let mut out = Mat::zeros(phi.level, phi.level, self.field.join(a.field()));
        for (ci, p) in c.iter().zip(&phi.coeffs) {
            out = &out + &p.scale(*ci);
        }
        Ok(out)
    }

    /// The map `a ↦ tr(ρ a)` for a density `ρ`.
    pub fn functional_from_density(&self, rho: &Mat) -> Element {
        let coeffs = self
            .basis
            .iter()
            .map(|b| {
                let v = (rho * b).trace();
                Mat::from_fn(1, 1, self.field.join(rho.field()), |_, _| v)
            })
            .collect();
        Element { level: 1, coeffs }
    }

    /// The map `a ↦ V* a V` for `V ∈ M_{d,n}`.
    pub fn compression_map(&self, v: &Mat) -> Element {
        let vs = v.adjoint();
        Element {
            level: v.cols(),
            coeffs: self.basis.iter().map(|b| &(&vs * b) * v).collect(),
        }
    }

    /// `φ(1)`.
    pub fn map_at_unit(&self, phi: &Element) -> Mat {
        let s = (self.d as f64).sqrt();
        phi.coeffs[0].scale_re(s)
    }

    /// Whether `φ` (given by its values on the basis) is a state.
    pub fn is_state(&self, phi: &Element, tol: f64) -> Result<bool> {
        if phi.level != 1 {
            return Err(Error::Dimension("a state is a scalar functional".into()));
        }
        let at_unit = self.map_at_unit(phi).get(0, 0);
        if (at_unit - C64::new(1.0, 0.0)).norm() > tol {
            return Ok(false);
        }
        crate::cones::dual_cp_member(self, phi, tol).map(|m| m.is_member)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sx() -> Mat {
        Mat::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    fn units(d: usize) -> Vec<Mat> {
        let mut out = Vec::new();
        for i in 0..d {
            for j in 0..d {
                out.push(Mat::unit(d, d, i, j, Field::Real));
            }
        }
        out
    }

    #[test]
    fn construction_examples() {
        let s = make_opsys(&[Mat::identity(2, Field::Real), sx()]).unwrap();
        assert_eq!(s.dim(), 2);
        let err = make_opsys(&[Mat::unit(2, 2, 0, 0, Field::Real)]).unwrap_err();
        assert!(matches!(err, Error::UnitNotInSpan(_)));
        let full = make_opsys(&units(2)).unwrap();
        assert_eq!(full.dim(), 4);
        assert!(matches!(make_opsys(&[]), Err(Error::EmptySpan)));
        assert!(matches!(make_opsys(&[Mat::zeros(2, 2, Field::Real)]), Err(Error::EmptySpan)));
    }

    #[test]
    fn adjoint_closure_from_nonselfadjoint_generators() {
        // I and E₁₂ generate span{I, E₁₂, E₂₁}
        let s = make_opsys(&[Mat::identity(2, Field::Complex), Mat::unit(2, 2, 0, 1, Field::Complex)]).unwrap();
        assert_eq!(s.dim(), 3);
        assert!(s.coords(&Mat::unit(2, 2, 1, 0, Field::Complex)).is_ok());
        assert!(s.coords(&Mat::unit(2, 2, 0, 0, Field::Complex)).is_err());
        // duplicates collapse
        let s = make_opsys(&[Mat::identity(2, Field::Real), sx(), sx().scale_re(2.0)]).unwrap();
        assert_eq!(s.dim(), 2);
    }

    #[test]
    fn ambient_examples() {
        let s = make_opsys(&units(2)).unwrap();
        assert!((&s.ambient(&s.unit(1)) - &Mat::identity(2, Field::Real)).max_abs() < 1e-14);
        assert!((&s.ambient(&s.unit(3)) - &Mat::identity(6, Field::Real)).max_abs() < 1e-14);
        let b = s.basis()[1].clone();
        let e = s.basis_element(2, 1, &Mat::unit(2, 2, 0, 1, Field::Real));
        let a = s.ambient(&e);
        assert!((&a.submatrix(0, 2, 2, 2) - &b).max_abs() < 1e-14);
        assert_eq!(a.submatrix(2, 0, 2, 2).max_abs(), 0.0);
        let back = s.from_ambient(&a, 2).unwrap();
        assert!(back.distance(&e) < 1e-14);
    }

    #[test]
    fn positivity_and_norms() {
        let s = make_opsys(&[Mat::identity(2, Field::Real), sx()]).unwrap();
        assert!(s.is_positive(&s.unit(1), 1e-9).unwrap());
        assert!(!s.is_positive(&s.unit(1).scale(-1.0), 1e-9).unwrap());
        // 2I + σx has eigenvalues 1 and 3
        let x = s.from_ambient(&Mat::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]), 1).unwrap();
        assert!(s.is_positive(&x, 1e-9).unwrap());
        assert!((s.order_unit_norm(&x).unwrap() - 3.0).abs() < 1e-12);
        assert!((s.order_unit_norm(&s.unit(1)).unwrap() - 1.0).abs() < 1e-12);
        assert!((s.order_unit_norm(&s.unit(2).scale(3.0)).unwrap() - 3.0).abs() < 1e-12);

        let diag = make_opsys(&[Mat::unit(2, 2, 0, 0, Field::Real), Mat::unit(2, 2, 1, 1, Field::Real)]).unwrap();
        let x = diag.from_ambient(&Mat::diag(&[1.0, -1.0]), 1).unwrap();
        assert!((diag.order_unit_norm(&x).unwrap() - 1.0).abs() < 1e-12);

        // nilpotent E₁₂ ⊗ 1 has norm 1
        let e = s.unit(2).compress(&Mat::unit(2, 2, 0, 0, Field::Real), &Mat::unit(2, 2, 0, 1, Field::Real));
        assert!((s.matrix_norm(&e).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(s.matrix_norm(&s.zero(3)).unwrap(), 0.0);
        assert!(s.order_unit_norm(&e).is_err());
    }

    #[test]
    fn states() {
        let d = 3;
        let full = make_opsys(&units(d)).unwrap();
        let tr = full.functional_from_density(&Mat::identity(d, Field::Real).scale_re(1.0 / d as f64));
        assert!(full.is_state(&tr, 1e-7).unwrap());
        let mut xi = Mat::zeros(d, 1, Field::Real);
        xi.set(1, 0, C64::new(1.0, 0.0));
        let vector_state = full.compression_map(&xi);
        assert!(full.is_state(&vector_state, 1e-7).unwrap());
        assert!(!full.is_state(&tr.scale(2.0), 1e-7).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let s = make_opsys(&[Mat::identity(2, Field::Complex), Mat::unit(2, 2, 0, 1, Field::Complex)]).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        let back: OperatorSystem = serde_json::from_str(&js).unwrap();
        assert_eq!(back.dim(), s.dim());
        for (a, b) in back.basis().iter().zip(s.basis()) {
            assert!((a - b).max_abs() < 1e-12);
        }
    }
}
