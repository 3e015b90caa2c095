//! Noncommutative base norms and the checks built on them.
//!
//! For a base `K_n = {x ∈ C_n : f₁⁽ⁿ⁾(x) = I_n}` the norm of a selfadjoint
//! `x` is `min ‖f₁⁽ⁿ⁾(y + z)‖` over `x = y − z` with `y, z` in the cone,
//! solved as `min λ` with `f₁⁽ⁿ⁾(y + z) ⪯ λI`. General elements go through
//! the selfadjoint dilation `[[0, x], [x*, 0]]`.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cones::{BaseSpec, ConeKind, CoordElement, PrimalMember};
use crate::conic::model::LinExpr;
use crate::conic::{solver_tol, DualModel, HermAffine, PrimalModel};
use crate::error::{Error, Result};
use crate::matcore::{herm_eig, hermitian_basis, psd_sqrt, restricted_inv_sqrt, support_projection, HermMat, Mat, C64, RANK_TOL};
use crate::opsys::{Element, OperatorSystem};
use crate::random::{random_element, random_sa_element, rng_for};
use crate::report::{CheckRecord, SuiteOutput};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    /// `x = positive − negative` with both parts in the cone.
    pub positive: Element,
    pub negative: Element,
    pub gap: f64,
}

/// `x = α* k α` with `k` in the base.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaseDecomposition {
    pub alpha: HermMat,
    pub k: Element,
}

fn check_element(sys: &OperatorSystem, x: &Element) -> Result<()> {
    if x.coeffs.len() != sys.dim() || x.coeffs.iter().any(|c| c.rows() != x.level || c.cols() != x.level) {
        return Err(Error::Dimension("element does not fit the system".into()));
    }
    Ok(())
}

fn require_selfadjoint(sys: &OperatorSystem, x: &Element) -> Result<()> {
    let dev = sys.adjoint(x).distance(x);
    if dev > 1e-9 * x.max_abs().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Norm of a selfadjoint element.
pub fn nc_base_norm_sa(b: &BaseSpec, x: &Element) -> Result<NormResult> {
    b.cone.check_level(x.level)?;
    sa_norm(b, x)
}

/// Norm of a general element, through its dilation at level `2n`.
pub fn nc_base_norm(b: &BaseSpec, x: &Element) -> Result<NormResult> {
    b.cone.check_level(x.level)?;
    check_element(b.system(), x)?;
    sa_norm(b, &b.system().tilde(x))
}

fn sa_norm(b: &BaseSpec, x: &Element) -> Result<NormResult> {
    let sys = b.system();
    check_element(sys, x)?;
    require_selfadjoint(sys, x)?;
    if x.max_abs() == 0.0 {
        return Ok(NormResult {
            value: 0.0,
            positive: sys.zero(x.level),
            negative: sys.zero(x.level),
            gap: 0.0,
        });
    }
    match b.kind() {
        ConeKind::DualCp => sa_norm_primal(b, x),
        ConeKind::Inherited => sa_norm_lmi(b, x),
    }
}

/// Choi matrices for both parts: few constraints, large matrix unknowns.
fn sa_norm_primal(b: &BaseSpec, x: &Element) -> Result<NormResult> {
    let sys = b.system();
    let n = x.level;
    let cone = b.cone.clone().with_max_level(usize::MAX);
    let mut m = PrimalModel::new();
    let y = cone.encode_membership(&mut m, n)?;
    let z = cone.encode_membership(&mut m, n)?;
    let lambda = m.add_free();
    let slack = m.add_psd(n, sys.field());
    let coords = sys.sa_coords(x);
    for (c, (r, h)) in coords.iter().zip(sys.sa_basis(n)) {
        let e = y.coef_expr(r, &h).plus(&z.coef_expr(r, &h).scaled(-1.0));
        m.add_eq(&e, *c);
    }
    add_dominance(&mut m, b, &y, &z, lambda, slack);
    m.minimize(&LinExpr::new().scalar(lambda, 1.0));
    let sol = m.solve(solver_tol())?.require_optimal("base norm")?;
    Ok(NormResult {
        value: sol.objective().max(0.0),
        positive: y.value(&sol)?,
        negative: z.value(&sol)?,
        gap: sol.sol.gap,
    })
}

/// `λI − f₁⁽ⁿ⁾(y + z) = W ⪰ 0`, one equality per Hermitian basis matrix.
fn add_dominance(
    m: &mut PrimalModel,
    b: &BaseSpec,
    y: &PrimalMember,
    z: &PrimalMember,
    lambda: crate::conic::ScalarVar,
    slack: crate::conic::HermVar,
) {
    let w = b.weights();
    for h in hermitian_basis(y.n, b.system().field()) {
        let e = LinExpr::new()
            .scalar(lambda, h.trace().re)
            .plus(&y.f1_expr(w, &h).scaled(-1.0))
            .plus(&z.f1_expr(w, &h).scaled(-1.0))
            .herm(slack, &h.scale_re(-1.0));
        m.add_eq(&e, 0.0);
    }
}

/// Coordinates of `y` as unknowns, `z = y − x`: small LMIs of size `nd`.
fn sa_norm_lmi(b: &BaseSpec, x: &Element) -> Result<NormResult> {
    let sys = b.system();
    let n = x.level;
    let mut m = DualModel::new();
    let y = CoordElement::new(&mut m, b.cone.system.clone(), n);
    let lambda = m.add_free();
    let xa = sys.ambient(x);
    m.add_lmi(y.ambient());
    m.add_lmi(y.ambient().plus_const(&xa.scale_re(-1.0)));
    // λI − f₁(2y − x) ⪰ 0
    let dom = y
        .f1(b.weights())
        .scaled(-2.0)
        .plus_const(&b.f1(x))
        .plus(&HermAffine::zero(n, sys.field()).plus_var(lambda, &Mat::identity(n, sys.field())));
    m.add_lmi(dom);
    m.minimize(&[(lambda, 1.0)]);
    let sol = m.solve(solver_tol())?.require_optimal("base norm")?;
    let pos = y.value(&sol);
    let neg = pos.sub(x);
    Ok(NormResult {
        value: sol.objective().max(0.0),
        positive: pos,
        negative: neg,
        gap: sol.sol.gap,
    })
}

/// `min t` with `t·(f₁ ⊗ I_n) ± φ` completely positive, where the unit
/// `f₁ ⊗ I_n` acts on the predual side; computed as the supremum of
/// `Re ⟨⟨φ, W⟩⟩` over `σ ⊗ a ± W ⪰ 0`, `tr σ = 1`, `a` the evaluation point.
pub fn dual_order_unit_norm(b: &BaseSpec, phi: &Element) -> Result<f64> {
    if b.kind() != ConeKind::DualCp {
        return Err(Error::InvalidArgument("the dual order unit norm needs a space of maps".into()));
    }
    b.cone.check_level(phi.level)?;
    let sys = b.system();
    check_element(sys, phi)?;
    require_selfadjoint(sys, phi)?;
    let n = phi.level;
    if phi.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let a = b.f1_matrix();
    let mut m = DualModel::new();
    let sbasis = hermitian_basis(n, sys.field());
    let sigma = m.add_frees(sbasis.len());
    let w = CoordElement::new(&mut m, b.cone.system.clone(), n);
    let mut unit = HermAffine::zero(n * sys.ambient_dim(), sys.field());
    for (v, h) in sigma.iter().zip(&sbasis) {
        unit.add_var(*v, &h.kron(&a));
    }
    m.add_lmi(unit.clone().plus(&w.ambient()));
    m.add_lmi(unit.plus(&w.ambient().scaled(-1.0)));
    let tr: Vec<_> = sigma.iter().zip(&sbasis).map(|(v, h)| (*v, h.trace().re)).collect();
    m.add_eq(&tr, 1.0);
    m.maximize(&w.pairing_terms(phi));
    let sol = m.solve(solver_tol())?.require_optimal("dual order unit norm")?;
    Ok(sol.objective().max(0.0))
}

/// `x = α* k α` with `α = f₁⁽ⁿ⁾(x)^{1/2}` and
/// `k = R x R + e⊥ k₀ e⊥`, `R = (e a e)^{-1/2} + e⊥`.
pub fn base_decompose(b: &BaseSpec, x: &Element, tol: f64) -> Result<BaseDecomposition> {
    let membership = b.cone.is_member(x, tol)?;
    if !membership.is_member {
        return Err(Error::NotInCone(membership.margin));
    }
    let a = HermMat::from_herm_part(&b.f1(x));
    let alpha = psd_sqrt(&a, 1e-6)?;
    let r = restricted_inv_sqrt(&a, RANK_TOL)?;
    let e = support_projection(&a, RANK_TOL)?;
    let perp = &Mat::identity(x.level, a.field()) - e.as_mat();
    let k0 = b.reference_point(x.level)?;
    let k = x.compress(&r, &r).add(&k0.compress(&perp, &perp));
    Ok(BaseDecomposition { alpha, k })
}

/// A linear map between the level-1 spaces of two bases, as the matrix of
/// coordinates `u(e_r) = Σ_s U[s][r] e_s` in the coordinate bases.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearMap {
    pub matrix: Mat,
}

impl LinearMap {
    /// The map induced on functionals by a map `T` on density matrices,
    /// `tr(ρ ·) ↦ tr(T(ρ) ·)`.
    pub fn from_density_map(source: &OperatorSystem, target: &OperatorSystem, t: impl Fn(&Mat) -> Mat) -> LinearMap {
        let field = source.field().join(target.field());
        let mut u = Mat::zeros(target.dim(), source.dim(), field);
        for (r, br) in source.basis().iter().enumerate() {
            let image = t(&br.adjoint());
            for (s, bs) in target.basis().iter().enumerate() {
                u.set(s, r, (&image * bs).trace());
            }
        }
        LinearMap { matrix: u }
    }

    /// Level-`n` amplification.
    pub fn apply(&self, x: &Element) -> Element {
        let (rows, cols) = self.matrix.shape();
        let field = x.coeffs.first().map(|c| c.field()).unwrap_or(self.matrix.field()).join(self.matrix.field());
        let coeffs = (0..rows)
            .map(|s| {
                let mut out = Mat::zeros(x.level, x.level, field);
                for r in 0..cols {
                    let c = self.matrix.get(s, r);
                    if c != C64::new(0.0, 0.0) {
                        out = &out + &x.coeffs[r].scale(c);
                    }
                }
                out
            })
            .collect();
        Element { level: x.level, coeffs }
    }
}

/// Whether `u` is completely positive and intertwines the base functions.
///
/// Complete positivity is decided exactly: for spaces of maps, `u` is the
/// adjoint of `v: S₂ → S₁ ⊆ M_{d₁}` and is completely positive iff `v`
/// is, i.e. iff `v` lies in the dual cone at level `d₁`. For inherited
/// cones the roles of `u` and `v` swap.
pub fn is_base_morphism(u: &LinearMap, source: &BaseSpec, target: &BaseSpec, tol: f64) -> Result<bool> {
    let (s1, s2) = (source.system(), target.system());
    if u.matrix.shape() != (s2.dim(), s1.dim()) {
        return Err(Error::Dimension(format!(
            "map of shape {:?} between spaces of dimension {} and {}",
            u.matrix.shape(),
            s1.dim(),
            s2.dim()
        )));
    }
    if source.kind() != target.kind() {
        return Err(Error::InvalidArgument("source and target cones must be of the same kind".into()));
    }
    // f₁ᵀ ∘ u = f₁ˢ
    for r in 0..s1.dim() {
        let mut v = C64::new(0.0, 0.0);
        for (s, w) in target.weights().iter().enumerate() {
            v += u.matrix.get(s, r) * *w;
        }
        if (v - source.weights()[r]).norm() > tol {
            return Ok(false);
        }
    }
    // the map into matrices whose complete positivity is equivalent
    let (domain, codomain, entries) = match source.kind() {
        ConeKind::DualCp => (s2, s1, u.matrix.clone()),
        ConeKind::Inherited => (s1, s2, u.matrix.transpose()),
    };
    if !domain.field().is_complex() && entries.data().iter().any(|z| z.im != 0.0) {
        return Err(Error::InvalidArgument("complex map on a real space".into()));
    }
    let d = codomain.ambient_dim();
    let coeffs = (0..domain.dim())
        .map(|s| {
            let mut out = Mat::zeros(d, d, domain.field());
            for (r, b) in codomain.basis().iter().enumerate() {
                out = &out + &b.scale(entries.get(s, r));
            }
            out.with_field(domain.field())
        })
        .collect();
    let v = Element { level: d, coeffs };
    if domain.adjoint(&v).distance(&v) > tol.max(1e-9) {
        return Ok(false);
    }
    Ok(crate::cones::dual_cp_member(domain, &v, tol)?.is_member)
}

/// Lower bound `sup ‖φ⁽ᵏ⁾(x)‖` over unit-ball `x ∈ M_k(S)`, `k ≤ n`, by
/// gradient ascent from `restarts` random starts.
pub fn cb_lower_bound(sys: &OperatorSystem, phi: &Element, restarts: usize, seed: u64) -> Result<f64> {
    let mut best = 0.0f64;
    for start in 0..restarts {
        let mut rng = rng_for(seed, start as u64);
        let k = 1 + start % phi.level;
        let mut x = random_element(&mut rng, sys, k);
        let mut step = 0.5;
        let mut cur = 0.0;
        for _ in 0..30 {
            let norm = sys.matrix_norm(&x)?;
            if norm == 0.0 {
                break;
            }
            x = x.scale(1.0 / norm);
            let img = sys.apply_map(phi, &x);
            let svd = img.data().clone().svd(true, true);
            let (i, s) = svd.singular_values.iter().enumerate().fold((0, 0.0), |acc, (i, s)| if *s > acc.1 { (i, *s) } else { acc });
            if s < cur {
                step *= 0.5;
            }
            cur = cur.max(s);
            best = best.max(s);
            let uu = svd.u.as_ref().unwrap().column(i).into_owned();
            let vv = svd.v_t.as_ref().unwrap().row(i).adjoint();
            // gradient of Re u* φ⁽ᵏ⁾(x) v in the coefficients of x
            let nn = phi.level;
            let grad: Vec<Mat> = phi
                .coeffs
                .iter()
                .map(|p| {
                    Mat::from_fn(k, k, sys.field(), |a, c| {
                        let ua = uu.rows(a * nn, nn);
                        let vc = vv.rows(c * nn, nn);
                        (ua.adjoint() * p.data() * vc)[(0, 0)].conj()
                    })
                })
                .collect();
            let g = Element { level: k, coeffs: grad };
            let gn = g.max_abs().max(1e-300);
            x = x.add(&g.scale(step / gn));
            if rng.random::<f64>() < 0.05 {
                step *= 0.7;
            }
        }
    }
    Ok(best)
}

/// Cross-checks the base norm of random selfadjoint maps against the dual
/// order unit norm and against sampled lower bounds.
pub fn verify_duality(
    sys: &Arc<OperatorSystem>,
    levels: &[usize],
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<SuiteOutput> {
    let b = BaseSpec::unit_evaluation(sys.clone());
    let mut worst_rel = 0.0f64;
    let mut lb_violation = 0.0f64;
    let mut lb_ratio = 0.0f64;
    for &n in levels {
        b.cone.check_level(n)?;
        for idx in 0..samples {
            let mut rng = rng_for(seed ^ ((n as u64) << 32), idx as u64);
            let phi = random_sa_element(&mut rng, sys, n);
            let base = nc_base_norm_sa(&b, &phi)?.value;
            let dual = dual_order_unit_norm(&b, &phi)?;
            worst_rel = worst_rel.max((base - dual).abs() / (1.0 + base.abs()));
            let lb = cb_lower_bound(sys, &phi, 50, seed.wrapping_add(idx as u64))?;
            lb_violation = lb_violation.max(lb - base);
            lb_ratio = lb_ratio.max(lb / base);
        }
    }
    let records = vec![
        CheckRecord::le("duality: base norm vs dual order unit norm", worst_rel, 0.0, tol),
        CheckRecord::le("duality: sampled cb lower bound vs base norm", lb_violation, 0.0, tol),
    ];
    Ok((records, vec![("max lower bound / norm".into(), lb_ratio)]))
}

/// Validates the matrix base ordered space conditions on samples: strict
/// positivity of `f₁`, domination `x ≤ t·k` with `k` in the base, and
/// nondegeneracy of the norm.
pub fn mbos_validate(b: &BaseSpec, levels: &[usize], samples: usize, seed: u64, tol: f64) -> Result<Vec<CheckRecord>> {
    let sys = b.system();
    let strict = b.strict_positivity()?;
    let mut worst_t = 0.0f64;
    let mut undominated = 0;
    let mut min_ratio = f64::INFINITY;
    for idx in 0..samples {
        let n = levels[idx % levels.len()];
        let mut rng = rng_for(seed, idx as u64);
        let x = random_sa_element(&mut rng, sys, n);
        let size = x.coeffs.iter().map(|c| c.frobenius_norm().powi(2)).sum::<f64>().sqrt();
        let t = domination(b, &x)?;
        let t_max = 1e4 * size.max(1.0);
        match t {
            Some(t) if t <= t_max => worst_t = worst_t.max(t / size),
            _ => undominated += 1,
        }
        let norm = nc_base_norm_sa(b, &x)?.value;
        min_ratio = min_ratio.min(norm / size);
    }
    Ok(vec![
        CheckRecord::ge("mbos: strict positivity of f1", strict, tol, 0.0),
        CheckRecord::zero_count("mbos: elements not dominated by a base multiple", undominated, tol),
        CheckRecord::le("mbos: largest domination scale t / |x|", worst_t, 1e4, 0.0),
        CheckRecord::ge("mbos: least norm / frobenius ratio", min_ratio, tol, 0.0),
    ])
}

/// Least `t` with `t·k − x` in the cone for some base element `k`.
fn domination(b: &BaseSpec, x: &Element) -> Result<Option<f64>> {
    let sys = b.system();
    let n = x.level;
    let cone = b.cone.clone().with_max_level(usize::MAX);
    let mut m = PrimalModel::new();
    let y = cone.encode_membership(&mut m, n)?;
    let z = cone.encode_membership(&mut m, n)?;
    let t = m.add_free();
    for (c, (r, h)) in sys.sa_coords(x).iter().zip(sys.sa_basis(n)) {
        let e = y.coef_expr(r, &h).plus(&z.coef_expr(r, &h).scaled(-1.0));
        m.add_eq(&e, *c);
    }
    for h in hermitian_basis(n, sys.field()) {
        let e = y.f1_expr(b.weights(), &h).scalar(t, -h.trace().re);
        m.add_eq(&e, 0.0);
    }
    m.minimize(&LinExpr::new().scalar(t, 1.0));
    let sol = m.solve(solver_tol())?;
    if sol.sol.is_optimal() {
        Ok(Some(sol.objective()))
    } else {
        Ok(None)
    }
}

/// Smallest eigenvalue of `f₁⁽ⁿ⁾(x)`.
pub fn f1_min_eig(b: &BaseSpec, x: &Element) -> Result<f64> {
    herm_eig(&HermMat::from_herm_part(&b.f1(x))).map(|e| e.min())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::ConeProvider;
    use crate::matcore::Field;
    use crate::opsys::make_opsys;
    use crate::random::random_cp_map;

    fn full(d: usize, field: Field) -> Arc<OperatorSystem> {
        let mut gens = Vec::new();
        for i in 0..d {
            for j in 0..d {
                gens.push(Mat::unit(d, d, i, j, field));
            }
        }
        Arc::new(make_opsys(&gens).unwrap())
    }

    fn diag(d: usize) -> Arc<OperatorSystem> {
        let gens: Vec<Mat> = (0..d).map(|i| Mat::unit(d, d, i, i, Field::Real)).collect();
        Arc::new(make_opsys(&gens).unwrap())
    }

    #[test]
    fn trace_norm_example() {
        let s = full(2, Field::Complex);
        let b = BaseSpec::unit_evaluation(s.clone());
        let phi = s.functional_from_density(&Mat::diag(&[0.5, -0.5]).with_field(Field::Complex));
        let r = nc_base_norm_sa(&b, &phi).unwrap();
        assert!((r.value - 1.0).abs() < 1e-7);
        assert!(r.positive.sub(&r.negative).distance(&phi) < 1e-7);
        assert!((dual_order_unit_norm(&b, &phi).unwrap() - 1.0).abs() < 1e-7);
        assert_eq!(nc_base_norm_sa(&b, &s.zero(2)).unwrap().value, 0.0);
    }

    #[test]
    fn l1_norm_on_diagonal_duals() {
        let s = diag(3);
        let b = BaseSpec::unit_evaluation(s.clone());
        let phi = s.functional_from_density(&Mat::diag(&[0.3, -1.2, 0.5]));
        let want = 0.3 + 1.2 + 0.5;
        assert!((nc_base_norm_sa(&b, &phi).unwrap().value - want).abs() < 1e-7);
        assert!((dual_order_unit_norm(&b, &phi).unwrap() - want).abs() < 1e-7);
    }

    #[test]
    fn unit_map_has_norm_one() {
        let s = full(2, Field::Real);
        let b = BaseSpec::unit_evaluation(s.clone());
        let k = b.reference_point(2).unwrap();
        assert!((nc_base_norm_sa(&b, &k).unwrap().value - 1.0).abs() < 1e-7);
        assert!((dual_order_unit_norm(&b, &k).unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn norm_not_additive_on_positives() {
        let s = diag(2);
        let b = BaseSpec::new(ConeProvider::inherited(s.clone()), s.unit_coords()).unwrap();
        let p = s.from_ambient(&Mat::diag(&[1.0, 0.0, 0.0, 0.0]), 2).unwrap();
        let q = s.from_ambient(&Mat::diag(&[0.0, 0.0, 0.0, 1.0]), 2).unwrap();
        let n = |x: &Element| nc_base_norm_sa(&b, x).unwrap().value;
        assert!((n(&p) - 1.0).abs() < 1e-7 && (n(&q) - 1.0).abs() < 1e-7);
        assert!((n(&p.add(&q)) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn positive_shortcut_and_gen_route() {
        let s = Arc::new(make_opsys(&[Mat::identity(2, Field::Complex), Mat::unit(2, 2, 0, 1, Field::Complex)]).unwrap());
        let b = BaseSpec::unit_evaluation(s.clone());
        let mut rng = rng_for(9, 0);
        let phi = random_cp_map(&mut rng, &s, 2, 2);
        let v = nc_base_norm_sa(&b, &phi).unwrap().value;
        assert!((v - b.f1(&phi).spectral_norm()).abs() < 1e-7);
        let g = nc_base_norm(&b, &phi).unwrap().value;
        assert!((g - v).abs() < 1e-6);
        let x = random_element(&mut rng, &s, 1);
        let a = nc_base_norm(&b, &x).unwrap().value;
        let a2 = nc_base_norm(&b, &x.scale(2.0)).unwrap().value;
        let astar = nc_base_norm(&b, &s.adjoint(&x)).unwrap().value;
        assert!((a2 - 2.0 * a).abs() < 1e-6);
        assert!((astar - a).abs() < 1e-6);
    }

    #[test]
    fn inherited_norm_matches_primal_route() {
        let s = Arc::new(make_opsys(&[Mat::identity(2, Field::Real), Mat::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]])]).unwrap());
        let b = BaseSpec::normalized_trace(s.clone());
        // unit is in the base up to scaling: ‖1‖ = f₁(1) = 1
        assert!((nc_base_norm_sa(&b, &s.unit(1)).unwrap().value - 1.0).abs() < 1e-7);
        let mut rng = rng_for(1, 2);
        let x = random_sa_element(&mut rng, &s, 2);
        let lmi = nc_base_norm_sa(&b, &x).unwrap();
        let primal = sa_norm_primal(&b, &x).unwrap();
        assert!((lmi.value - primal.value).abs() < 1e-6);
        assert!(lmi.positive.sub(&lmi.negative).distance(&x) < 1e-7);
    }

    #[test]
    fn decomposition_examples() {
        let s = full(2, Field::Complex);
        let b = BaseSpec::unit_evaluation(s.clone());
        let k = b.reference_point(2).unwrap();
        let d = base_decompose(&b, &k, 1e-7).unwrap();
        assert!((d.alpha.as_mat() - &Mat::identity(2, Field::Complex)).max_abs() < 1e-7);
        assert!(d.k.distance(&k) < 1e-7);
        let d = base_decompose(&b, &k.scale(2.0), 1e-7).unwrap();
        assert!((d.alpha.as_mat() - &Mat::identity(2, Field::Complex).scale_re(2f64.sqrt())).max_abs() < 1e-7);
        // a rank-one map has singular f₁
        let mut xi = Mat::zeros(2, 2, Field::Complex);
        xi.set(0, 0, C64::new(1.0, 0.0));
        let x = s.compression_map(&xi);
        let d = base_decompose(&b, &x, 1e-7).unwrap();
        let back = d.k.compress(&d.alpha, &d.alpha);
        assert!(back.distance(&x) < 1e-7);
        assert!(b.in_base(&d.k, 1e-7).unwrap());
        assert!(matches!(base_decompose(&b, &x.scale(-1.0), 1e-7), Err(Error::NotInCone(_))));
    }

    #[test]
    fn base_morphisms() {
        let s = full(2, Field::Complex);
        let b = BaseSpec::unit_evaluation(s.clone());
        let id = LinearMap::from_density_map(&s, &s, |r| r.clone());
        assert!(is_base_morphism(&id, &b, &b, 1e-7).unwrap());
        let twice = LinearMap::from_density_map(&s, &s, |r| r.scale_re(2.0));
        assert!(!is_base_morphism(&twice, &b, &b, 1e-7).unwrap());
        let transpose = LinearMap::from_density_map(&s, &s, |r| r.transpose());
        assert!(!is_base_morphism(&transpose, &b, &b, 1e-7).unwrap());
    }

    #[test]
    fn duality_and_mbos_small() {
        let s = Arc::new(make_opsys(&[Mat::identity(2, Field::Real), Mat::from_rows(&[&[1.0, 2.0], &[2.0, -1.0]])]).unwrap());
        let (recs, _) = verify_duality(&s, &[1, 2], 3, 4, 1e-5).unwrap();
        assert!(recs.iter().all(|r| r.passed()), "{recs:?}");
        let recs = mbos_validate(&BaseSpec::normalized_trace(s.clone()), &[1, 2], 4, 2, 1e-7).unwrap();
        assert!(recs.iter().all(|r| r.passed()), "{recs:?}");
        let vector = BaseSpec::with_density(full(2, Field::Real), &Mat::diag(&[1.0, 0.0])).unwrap();
        assert!((vector.strict_positivity().unwrap()).abs() < 1e-7);
    }
}
