//! Level-one theory on polytope bases: the base norm as a Minkowski gauge,
//! its complex extension `inf Σ|α_k|`, the Taylor norm, and the
//! complexification check for matrix levels.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cones::BaseSpec;
use crate::conic::model::LinExpr;
use crate::conic::{solver_tol, PrimalModel, SolveStatus};
use crate::error::{Error, Result};
use crate::matcore::{Field, Mat, C64};
use crate::ncnorm::{base_decompose, nc_base_norm_sa};
use crate::opsys::{Element, OperatorSystem};
use crate::random::{gauss, random_cp_map, random_element, random_sa_element, rng_for};
use crate::report::CheckRecord;

const F1_TOL: f64 = 1e-9;

/// A real base space `ℝⁿ` with base `K = conv(base_points)` and `f₁ = 1` on `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BaseSpaceRepr", into = "BaseSpaceRepr")]
pub struct ClassicalBaseSpace {
    dim: usize,
    points: Vec<Vec<f64>>,
    f1: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct BaseSpaceRepr {
    dim: usize,
    field: Field,
    base_points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f1: Option<Vec<f64>>,
}

impl TryFrom<BaseSpaceRepr> for ClassicalBaseSpace {
    type Error = Error;
    fn try_from(r: BaseSpaceRepr) -> Result<Self> {
        if r.field != Field::Real {
            return Err(Error::InvalidArgument("base spaces are real".into()));
        }
        ClassicalBaseSpace::new(r.dim, r.base_points, r.f1)
    }
}

impl From<ClassicalBaseSpace> for BaseSpaceRepr {
    fn from(s: ClassicalBaseSpace) -> Self {
        BaseSpaceRepr {
            dim: s.dim,
            field: Field::Real,
            base_points: s.points,
            f1: Some(s.f1),
        }
    }
}

/// `u = re + i·im` in the complexification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexPoint {
    pub fn real(re: Vec<f64>) -> ComplexPoint {
        let im = vec![0.0; re.len()];
        ComplexPoint { re, im }
    }

    pub fn scale(&self, c: C64) -> ComplexPoint {
        ComplexPoint {
            re: self.re.iter().zip(&self.im).map(|(a, b)| c.re * a - c.im * b).collect(),
            im: self.re.iter().zip(&self.im).map(|(a, b)| c.im * a + c.re * b).collect(),
        }
    }
}

/// Bilinear pairing `Σ u_j v_j`.
pub fn pairing(u: &ComplexPoint, v: &ComplexPoint) -> C64 {
    (0..u.re.len())
        .map(|j| C64::new(u.re[j], u.im[j]) * C64::new(v.re[j], v.im[j]))
        .sum()
}

impl ClassicalBaseSpace {
    /// Solves for `f₁` when it is not given.
    pub fn new(dim: usize, points: Vec<Vec<f64>>, f1: Option<Vec<f64>>) -> Result<ClassicalBaseSpace> {
        if points.is_empty() || points.iter().any(|p| p.len() != dim) {
            return Err(Error::Dimension(format!("base points must be vectors of length {dim}")));
        }
        let pm = nalgebra::DMatrix::from_fn(points.len(), dim, |i, j| points[i][j]);
        if pm.rank(1e-9) < dim {
            return Err(Error::InvalidArgument("base points do not span the space".into()));
        }
        let f1 = match f1 {
            Some(f) if f.len() == dim => f,
            Some(_) => return Err(Error::Dimension("f1 has the wrong length".into())),
            None => {
                let ones = nalgebra::DVector::from_element(points.len(), 1.0);
                let sol = pm.clone().svd(true, true).solve(&ones, 1e-12).map_err(|e| Error::InvalidArgument(e.into()))?;
                sol.iter().copied().collect()
            }
        };
        for p in &points {
            let v: f64 = p.iter().zip(&f1).map(|(a, b)| a * b).sum();
            if (v - 1.0).abs() > F1_TOL {
                return Err(Error::InvalidArgument(format!("f1 equals {v} on a base point")));
            }
        }
        Ok(ClassicalBaseSpace { dim, points, f1 })
    }

    /// The standard simplex in `ℝⁿ` with `f₁ = Σ uᵢ`.
    pub fn simplex(n: usize) -> ClassicalBaseSpace {
        let points = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        ClassicalBaseSpace::new(n, points, Some(vec![1.0; n])).expect("simplex")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn base_points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn f1(&self) -> &[f64] {
        &self.f1
    }

    pub fn f1_apply(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.f1).map(|(a, b)| a * b).sum()
    }

    /// Dual norm on `ℝⁿ*`: `max_i |v(kᵢ)|`.
    pub fn dual_norm(&self, v: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| p.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// `min Σ(aᵢ + bᵢ)` over `u = Σ aᵢkᵢ − Σ bᵢkᵢ`, `a, b ≥ 0`.
    pub fn minkowski_gauge(&self, u: &[f64]) -> Result<f64> {
        self.check(u)?;
        let mut m = PrimalModel::new();
        let a: Vec<_> = self.points.iter().map(|_| m.add_nonneg()).collect();
        let b: Vec<_> = self.points.iter().map(|_| m.add_nonneg()).collect();
        for (j, uj) in u.iter().enumerate() {
            let mut e = LinExpr::new();
            for (i, p) in self.points.iter().enumerate() {
                e.add_scalar(a[i], p[j]);
                e.add_scalar(b[i], -p[j]);
            }
            m.add_eq(&e, *uj);
        }
        let mut obj = LinExpr::new();
        a.iter().chain(&b).for_each(|v| obj.add_scalar(*v, 1.0));
        m.minimize(&obj);
        let sol = m.solve(solver_tol())?;
        if sol.sol.status == SolveStatus::PrimalInfeasible {
            return Err(Error::InvalidArgument("vector is outside the span of the base".into()));
        }
        Ok(sol.require_optimal("minkowski gauge")?.objective().max(0.0))
    }

    /// `min Σ rᵢ` over `u = Σ tᵢkᵢ`, `tᵢ ∈ ℂ`, `|tᵢ| ≤ rᵢ`. Also returns a
    /// norming functional `v` with `max_i |v(kᵢ)| ≤ 1` from the multipliers.
    pub fn extended_base_norm_with_dual(&self, u: &ComplexPoint) -> Result<(f64, ComplexPoint)> {
        self.check(&u.re)?;
        self.check(&u.im)?;
        let mut m = PrimalModel::new();
        // [[r, t], [t̄, r]] ⪰ 0  ⇔  |t| ≤ r
        let z: Vec<_> = self.points.iter().map(|_| m.add_psd(2, Field::Complex)).collect();
        let e01 = Mat::unit(2, 2, 1, 0, Field::Complex);
        let e01i = e01.scale(C64::new(0.0, -1.0));
        for zi in &z {
            m.add_eq(&LinExpr::new().herm(*zi, &Mat::diag(&[1.0, -1.0])), 0.0);
        }
        // Re tᵢ = Re tr(E₁₀ Zᵢ), Im tᵢ = Re tr(−i E₁₀ Zᵢ)
        let mut rows = Vec::new();
        for (target, g) in [(&u.re, &e01), (&u.im, &e01i)] {
            for (j, uj) in target.iter().enumerate() {
                let mut e = LinExpr::new();
                for (i, p) in self.points.iter().enumerate() {
                    if p[j] != 0.0 {
                        e.add_herm(z[i], &g.scale_re(p[j]));
                    }
                }
                rows.push(m.add_eq(&e, *uj));
            }
        }
        let mut obj = LinExpr::new();
        for zi in &z {
            obj.add_herm(*zi, &Mat::identity(2, Field::Complex).scale_re(0.5));
        }
        m.minimize(&obj);
        let sol = m.solve(solver_tol())?;
        if sol.sol.status == SolveStatus::PrimalInfeasible {
            return Err(Error::InvalidArgument("point is outside the complex span of the base".into()));
        }
        let sol = sol.require_optimal("extended base norm")?;
        let n = self.dim;
        let v = ComplexPoint {
            re: (0..n).map(|j| sol.dual(rows[j])).collect(),
            im: (0..n).map(|j| -sol.dual(rows[n + j])).collect(),
        };
        Ok((sol.objective().max(0.0), v))
    }

    pub fn extended_base_norm(&self, u: &ComplexPoint) -> Result<f64> {
        self.extended_base_norm_with_dual(u).map(|r| r.0)
    }

    pub fn abs_conv_hull_membership(&self, u: &ComplexPoint, tol: f64) -> Result<bool> {
        Ok(self.extended_base_norm(u)? <= 1.0 + tol)
    }

    /// Taylor norm of `v` in the complexified dual.
    pub fn dual_taylor(&self, v: &ComplexPoint) -> f64 {
        taylor_norm(&v.re, &v.im, |w| self.dual_norm(w))
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::Dimension(format!("vector of length {} in dimension {}", u.len(), self.dim)));
        }
        Ok(())
    }

    /// Least `‖p − Σλᵢkᵢ‖₁` over convex weights on `pts`.
    fn hull_residual(pts: &[&Vec<f64>], p: &[f64]) -> Result<f64> {
        let mut m = PrimalModel::new();
        let lam: Vec<_> = pts.iter().map(|_| m.add_nonneg()).collect();
        let mut obj = LinExpr::new();
        for (j, pj) in p.iter().enumerate() {
            let (sp, sn) = (m.add_nonneg(), m.add_nonneg());
            obj.add_scalar(sp, 1.0);
            obj.add_scalar(sn, 1.0);
            let mut e = LinExpr::new().scalar(sp, 1.0).scalar(sn, -1.0);
            for (i, q) in pts.iter().enumerate() {
                e.add_scalar(lam[i], q[j]);
            }
            m.add_eq(&e, *pj);
        }
        let mut e = LinExpr::new();
        lam.iter().for_each(|l| e.add_scalar(*l, 1.0));
        m.add_eq(&e, 1.0);
        m.minimize(&obj);
        Ok(m.solve(solver_tol())?.require_optimal("hull membership")?.objective().max(0.0))
    }

    /// Extreme points of the base: listed points outside the hull of the others.
    pub fn vertices(&self, tol: f64) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for i in 0..self.points.len() {
            let others: Vec<&Vec<f64>> = self.points.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p).collect();
            if others.is_empty() || Self::hull_residual(&others, &self.points[i])? > tol {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Re-derives the base as `cone ∩ {f₁ = 1}` from the extreme points and
    /// checks that nothing changes.
    pub fn cone_closure_idempotence(&self, tol: f64) -> Result<Vec<CheckRecord>> {
        let verts = self.vertices(tol)?;
        let vpts: Vec<&Vec<f64>> = verts.iter().map(|i| &self.points[*i]).collect();
        let mut worst_hull = 0.0f64;
        for p in &self.points {
            worst_hull = worst_hull.max(Self::hull_residual(&vpts, p)?);
        }
        let mut worst_f1 = 0.0f64;
        let mut worst_gauge = 0.0f64;
        for v in &vpts {
            worst_f1 = worst_f1.max((self.f1_apply(v) - 1.0).abs());
            worst_gauge = worst_gauge.max((self.minkowski_gauge(v)? - 1.0).abs());
        }
        Ok(vec![
            CheckRecord::le("closure: base points in the hull of the extreme points", worst_hull, 0.0, tol),
            CheckRecord::le("closure: f1 on extreme points", worst_f1, 0.0, tol),
            CheckRecord::le("closure: unit gauge on extreme points", worst_gauge, 0.0, tol),
        ])
    }
}

/// `sup_θ ‖cos θ·x + sin θ·y‖` by a 720-point grid and golden-section
/// refinement.
pub fn taylor_norm(x: &[f64], y: &[f64], oracle: impl Fn(&[f64]) -> f64) -> f64 {
    let f = |t: f64| {
        let (s, c) = t.sin_cos();
        let w: Vec<f64> = x.iter().zip(y).map(|(a, b)| c * a + s * b).collect();
        oracle(&w)
    };
    let grid = 720;
    let h = 2.0 * PI / grid as f64;
    let (mut best_t, mut best) = (0.0, f(0.0));
    for k in 1..grid {
        let t = k as f64 * h;
        let v = f(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let (mut a, mut b) = (best_t - h, best_t + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-8 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    best.max(fc).max(fd)
}

/// Taylor duality on a base space: the pairing inequality on random pairs,
/// recovery of the extended base norm as a supremum, and agreement with the
/// gauge on real points.
pub fn verify_taylor(sp: &ClassicalBaseSpace, pairs: usize, seed: u64, tol: f64) -> Result<Vec<CheckRecord>> {
    let n = sp.dim();
    let mut violation = 0.0f64;
    let mut worst_recovery = 0.0f64;
    let mut worst_real = 0.0f64;
    let per_u = 10;
    for idx in 0..pairs.div_ceil(per_u) {
        let mut rng = rng_for(seed, idx as u64);
        let u = ComplexPoint {
            re: (0..n).map(|_| gauss(&mut rng)).collect(),
            im: (0..n).map(|_| gauss(&mut rng)).collect(),
        };
        let (nu, cert) = sp.extended_base_norm_with_dual(&u)?;
        let mut sup = 0.0f64;
        let mut candidates = vec![cert];
        for _ in 0..per_u {
            candidates.push(ComplexPoint {
                re: (0..n).map(|_| gauss(&mut rng)).collect(),
                im: (0..n).map(|_| gauss(&mut rng)).collect(),
            });
        }
        for (k, v) in candidates.iter().enumerate() {
            let tv = sp.dual_taylor(v);
            let p = pairing(&u, v).norm();
            if k > 0 {
                violation = violation.max(p - nu * tv);
            }
            if tv > 0.0 {
                sup = sup.max(p / tv);
            }
        }
        worst_recovery = worst_recovery.max((nu - sup).abs() / nu);
        let real = ComplexPoint::real(u.re.clone());
        worst_real = worst_real.max((sp.extended_base_norm(&real)? - sp.minkowski_gauge(&u.re)?).abs());
    }
    Ok(vec![
        CheckRecord::le("taylor: pairing bound violation", violation, 0.0, tol),
        CheckRecord::le("taylor: sup over the unit ball recovers the norm", worst_recovery, 0.0, 0.02),
        CheckRecord::le("taylor: extended norm on real points vs gauge", worst_real, 0.0, tol),
    ])
}

/// Closure idempotence and Taylor duality on one base space.
pub fn classical_suite(sp: &ClassicalBaseSpace, samples: usize, seed: u64, tol: f64) -> Result<Vec<CheckRecord>> {
    let mut out = sp.cone_closure_idempotence(tol)?;
    out.extend(verify_taylor(sp, samples, seed, tol)?);
    Ok(out)
}

/// Values of a map on the basis of the complexified system.
pub fn to_complexified(real: &OperatorSystem, complex: &OperatorSystem, phi: &Element) -> Result<Element> {
    let coeffs = complex
        .basis()
        .iter()
        .map(|b| {
            let c = real.coords(b)?;
            let mut out = Mat::zeros(phi.level, phi.level, Field::Complex);
            for (cr, p) in c.iter().zip(&phi.coeffs) {
                out = &out + &p.scale(*cr);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Element { level: phi.level, coeffs })
}

/// Real and imaginary parts of a complex map, as maps on the real system.
pub fn split_parts(real: &OperatorSystem, complex: &OperatorSystem, phi: &Element) -> Result<(Element, Element)> {
    let (mut x, mut y) = (real.zero(phi.level), real.zero(phi.level));
    for (r, b) in real.basis().iter().enumerate() {
        let v = complex.eval_map(phi, &b.clone().with_field(Field::Complex))?;
        x.coeffs[r] = Mat::from_real(&v.re());
        y.coeffs[r] = Mat::from_real(&v.im());
    }
    Ok((x, y))
}

/// Complexification of a real space of maps: `‖x + iy‖ = ‖c(x, y)‖` with
/// `c(x, y) = [[x, y], [−y, x]]`, and `x + iy` is in the base iff `c(x, y)` is.
pub fn complexify_check(sys: &Arc<OperatorSystem>, samples: usize, seed: u64, tol: f64) -> Result<Vec<CheckRecord>> {
    if sys.field() != Field::Real {
        return Err(Error::InvalidArgument("complexification needs a real system".into()));
    }
    let sc = Arc::new(sys.complexify());
    let b = BaseSpec::unit_evaluation(sys.clone());
    let bc = BaseSpec::unit_evaluation(sc.clone());
    let mut worst_norm = 0.0f64;
    let mut base_disagree = 0;
    for idx in 0..samples {
        let mut rng = rng_for(seed, idx as u64);
        let level = 1 + idx % 2;
        // x selfadjoint, y skew, so x + iy is selfadjoint
        let x = random_sa_element(&mut rng, sys, level);
        let g = random_element(&mut rng, sys, level);
        let y = g.sub(&sys.adjoint(&g)).scale(0.5);
        let z = x.with_field(Field::Complex).add(&y.with_field(Field::Complex).scale_c(C64::new(0.0, 1.0)));
        let zc = to_complexified(sys, &sc, &z)?;
        let lhs = nc_base_norm_sa(&bc, &zc)?.value;
        let rhs = nc_base_norm_sa(&b, &sys.c_block(&x, &y))?.value;
        worst_norm = worst_norm.max((lhs - rhs).abs());

        // base correspondence on a base element and on a scaled copy
        let cp = random_cp_map(&mut rng, &sc, level, 2);
        let k = base_decompose(&bc, &cp, 1e-9)?.k;
        let scale = if idx % 3 == 0 { 1.0 + 0.2 * gauss(&mut rng).abs() } else { 1.0 };
        let k = k.scale(scale);
        let (kx, ky) = split_parts(sys, &sc, &k)?;
        let in_c = bc.in_base(&k, 1e-7)?;
        let in_r = b.in_base(&sys.c_block(&kx, &ky), 1e-7)?;
        if in_c != in_r {
            base_disagree += 1;
        }
    }
    Ok(vec![
        CheckRecord::le("complexify: norm of x+iy vs c(x,y)", worst_norm, 0.0, tol),
        CheckRecord::zero_count("complexify: base correspondence disagreements", base_disagree, tol),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opsys::make_opsys;

    #[test]
    fn gauge_examples() {
        let s = ClassicalBaseSpace::simplex(3);
        assert!((s.minkowski_gauge(&[1.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-7);
        assert!(s.minkowski_gauge(&[0.0, 0.0, 0.0]).unwrap().abs() < 1e-7);
        assert!((s.minkowski_gauge(&[0.5, -2.0, 1.0]).unwrap() - 3.5).abs() < 1e-7);
        assert!(s.minkowski_gauge(&[1.0]).is_err());
    }

    #[test]
    fn extended_norm_examples() {
        let s = ClassicalBaseSpace::simplex(3);
        let u = ComplexPoint::real(vec![0.5, -2.0, 1.0]);
        assert!((s.extended_base_norm(&u).unwrap() - 3.5).abs() < 1e-7);
        let ik = ComplexPoint { re: vec![0.0; 3], im: vec![1.0, 0.0, 0.0] };
        assert!((s.extended_base_norm(&ik).unwrap() - 1.0).abs() < 1e-7);
        let u = ComplexPoint { re: vec![3.0, 0.0, 1.0], im: vec![4.0, -1.0, 0.0] };
        let (v, cert) = s.extended_base_norm_with_dual(&u).unwrap();
        assert!((v - 7.0).abs() < 1e-7);
        assert!((pairing(&u, &cert).norm() - 7.0).abs() < 1e-6);
        assert!(s.dual_taylor(&cert) <= 1.0 + 1e-6);
    }

    #[test]
    fn taylor_examples() {
        let abs = |w: &[f64]| w[0].abs();
        assert!((taylor_norm(&[3.0], &[0.0], abs) - 3.0).abs() < 1e-12);
        assert!((taylor_norm(&[3.0], &[4.0], abs) - 5.0).abs() < 1e-10);
        let l2 = |w: &[f64]| w.iter().map(|a| a * a).sum::<f64>().sqrt();
        let x = [1.0, 2.0];
        assert!((taylor_norm(&x, &x, l2) - 2f64.sqrt() * l2(&x)).abs() < 1e-10);
    }

    #[test]
    fn hull_membership() {
        let s = ClassicalBaseSpace::simplex(2);
        let u = ComplexPoint { re: vec![0.5, 0.0], im: vec![0.0, 0.5] };
        assert!(s.abs_conv_hull_membership(&u, 1e-7).unwrap());
        assert!(!s.abs_conv_hull_membership(&ComplexPoint::real(vec![2.0, 0.0]), 1e-7).unwrap());
        let w = C64::from_polar(1.0, 0.7);
        let edge = ComplexPoint { re: vec![0.3 * w.re, 0.0], im: vec![0.3 * w.im, 0.7] };
        assert!(s.abs_conv_hull_membership(&edge, 1e-7).unwrap());
    }

    #[test]
    fn closure_with_redundant_points() {
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]];
        let s = ClassicalBaseSpace::new(2, pts, None).unwrap();
        assert!((s.f1()[0] - 1.0).abs() < 1e-9);
        assert_eq!(s.vertices(1e-7).unwrap(), vec![0, 1]);
        assert!(s.cone_closure_idempotence(1e-7).unwrap().iter().all(|r| r.passed()));
        // rotated simplex in the plane {Σu = 1}
        let (c, sn) = (0.3f64.cos(), 0.3f64.sin());
        let rot: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                let e: Vec<f64> = (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect();
                // rotate about the axis (1,1,1)/√3 via Rodrigues
                let k = 1.0 / 3f64.sqrt();
                let kv = [k, k, k];
                let dot: f64 = e.iter().zip(&kv).map(|(a, b)| a * b).sum();
                let cross = [kv[1] * e[2] - kv[2] * e[1], kv[2] * e[0] - kv[0] * e[2], kv[0] * e[1] - kv[1] * e[0]];
                (0..3).map(|j| e[j] * c + cross[j] * sn + kv[j] * dot * (1.0 - c)).collect()
            })
            .collect();
        let s = ClassicalBaseSpace::new(3, rot, None).unwrap();
        assert!(s.cone_closure_idempotence(1e-7).unwrap().iter().all(|r| r.passed()));
    }

    #[test]
    fn json_format() {
        let js = r#"{"dim": 2, "field": "R", "base_points": [[1, 0], [0, 1]], "f1": [1, 1]}"#;
        let s: ClassicalBaseSpace = serde_json::from_str(js).unwrap();
        assert_eq!(s, ClassicalBaseSpace::simplex(2));
        let bad = r#"{"dim": 2, "field": "R", "base_points": [[1, 0], [0, 1]], "f1": [1, 2]}"#;
        assert!(serde_json::from_str::<ClassicalBaseSpace>(bad).is_err());
    }

    #[test]
    fn taylor_duality_small() {
        let recs = verify_taylor(&ClassicalBaseSpace::simplex(3), 20, 1, 1e-7).unwrap();
        assert!(recs.iter().all(|r| r.passed()), "{recs:?}");
    }

    #[test]
    fn complexification_small() {
        let gens: Vec<Mat> = (0..2).map(|i| Mat::unit(2, 2, i, i, Field::Real)).collect();
        let s = Arc::new(make_opsys(&gens).unwrap());
        let recs = complexify_check(&s, 4, 1, 1e-7).unwrap();
        assert!(recs.iter().all(|r| r.passed()), "{recs:?}");
        let s = Arc::new(make_opsys(&[Mat::identity(2, Field::Real), Mat::from_rows(&[&[0.0, 1.0], &[-1.0, 0.5]])]).unwrap());
        let recs = complexify_check(&s, 4, 2, 1e-7).unwrap();
        assert!(recs.iter().all(|r| r.passed()), "{recs:?}");
    }
}
