//! Matrix cones over a concrete operator system, and bases inside them.
//!
//! [`ConeKind::Inherited`] is `M_n(S) ∩ M_{nd}⁺`. [`ConeKind::DualCp`] is the
//! cone of completely positive maps `S → M_n`, certified by the Choi matrix of
//! a completely positive extension to `M_d`: a PSD `Y ∈ M_d ⊗ M_n` (a `d×d`
//! grid of `n×n` blocks `Y_ij`) with `φ(b) = Σ_ij b_ij Y_ij`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conic::model::{DualSolution, LinExpr, PrimalSolution};
use crate::conic::{solver_tol, DualModel, HermAffine, HermVar, PrimalModel, ScalarVar};
use crate::error::{Error, Result};
use crate::matcore::{gram_schmidt_extend, herm_eig, hermitian_basis, HermMat, Mat, C64};
use crate::opsys::{Element, OperatorSystem};
use crate::random::{random_sa_element, rng_for};
use crate::report::CheckRecord;

pub const DEFAULT_MAX_LEVEL: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeKind {
    Inherited,
    DualCp,
}

#[derive(Clone, Debug)]
pub struct ConeProvider {
    pub kind: ConeKind,
    pub system: Arc<OperatorSystem>,
    pub max_level: usize,
}

/// Outcome of a membership query. `margin` is the least `t` with
/// `x + t·e` in the cone, where `e` is the provider's interior point.
#[derive(Clone, Debug)]
pub struct Membership {
    pub is_member: bool,
    pub margin: f64,
    /// Inherited: the separating eigenprojection of a non-member.
    /// DualCp: the Choi matrix of a member.
    pub certificate: Option<HermMat>,
}

/// Map `S → M_n` with Choi matrix `y`.
pub fn choi_to_map(sys: &OperatorSystem, y: &Mat, n: usize) -> Element {
    let d = sys.ambient_dim();
    let field = sys.field().join(y.field());
    let coeffs = sys
        .basis()
        .iter()
        .map(|b| {
            let mut out = Mat::zeros(n, n, field);
            for i in 0..d {
                for j in 0..d {
                    let bij = b.get(i, j);
                    if bij != C64::new(0.0, 0.0) {
                        out = &out + &y.submatrix(i * n, j * n, n, n).scale(bij);
                    }
                }
            }
            out.with_field(sys.field())
        })
        .collect();
    Element { level: n, coeffs }
}

/// Choi matrix of `a ↦ V* a V` for `V ∈ M_{d,n}`.
pub fn stinespring_choi(v: &Mat) -> Mat {
    let (d, n) = v.shape();
    let w = Mat::from_fn(d * n, 1, v.field(), |k, _| v.get(k / n, k % n).conj());
    &w * &w.adjoint()
}

impl ConeProvider {
    pub fn new(kind: ConeKind, system: Arc<OperatorSystem>) -> ConeProvider {
        ConeProvider {
            kind,
            system,
            max_level: DEFAULT_MAX_LEVEL,
        }
    }

    pub fn inherited(system: Arc<OperatorSystem>) -> ConeProvider {
        ConeProvider::new(ConeKind::Inherited, system)
    }

    pub fn dual_cp(system: Arc<OperatorSystem>) -> ConeProvider {
        ConeProvider::new(ConeKind::DualCp, system)
    }

    pub fn with_max_level(mut self, max_level: usize) -> ConeProvider {
        self.max_level = max_level;
        self
    }

    pub fn check_level(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidArgument("matrix level must be at least 1".into()));
        }
        if n > self.max_level {
            return Err(Error::LevelOverflow {
                level: n,
                max: self.max_level,
            });
        }
        Ok(())
    }

    /// Size of the PSD block certifying membership at level `n`.
    pub fn block_dim(&self, n: usize) -> usize {
        n * self.system.ambient_dim()
    }

    /// Adds a cone member at level `n` to `model`.
    pub fn encode_membership(&self, model: &mut PrimalModel, n: usize) -> Result<PrimalMember> {
        self.check_level(n)?;
        let sys = &self.system;
        let var = model.add_psd(self.block_dim(n), sys.field());
        if self.kind == ConeKind::Inherited {
            // confine the ambient variable to M_n(S)
            let mut span: Vec<Mat> = sys
                .sa_basis(n)
                .iter()
                .map(|(r, h)| h.kron(&sys.basis()[*r]))
                .collect();
            let k = span.len();
            gram_schmidt_extend(&mut span, hermitian_basis(self.block_dim(n), sys.field()), 1e-8);
            for g in &span[k..] {
                model.add_eq(&LinExpr::new().herm(var, g), 0.0);
            }
        }
        Ok(PrimalMember {
            kind: self.kind,
            n,
            var,
            system: self.system.clone(),
        })
    }

    /// The interior point `e`: the unit for `Inherited`, the map
    /// `b ↦ tr(b)/d·I_n` (Choi matrix `I/d`) for `DualCp`.
    pub fn interior_point(&self, n: usize) -> Element {
        match self.kind {
            ConeKind::Inherited => self.system.unit(n),
            ConeKind::DualCp => {
                let k = self.block_dim(n);
                let d = self.system.ambient_dim() as f64;
                choi_to_map(&self.system, &Mat::identity(k, self.system.field()).scale_re(1.0 / d), n)
            }
        }
    }

    pub fn is_member(&self, x: &Element, tol: f64) -> Result<Membership> {
        self.check_level(x.level)?;
        match self.kind {
            ConeKind::Inherited => inherited_member(&self.system, x, tol),
            ConeKind::DualCp => dual_cp_member(&self.system, x, tol),
        }
    }
}

fn inherited_member(sys: &OperatorSystem, x: &Element, tol: f64) -> Result<Membership> {
    let a = sys.ambient_herm(x)?;
    let eig = herm_eig(&a)?;
    let lmin = eig.min();
    let is_member = lmin >= -tol;
    let certificate = if is_member {
        None
    } else {
        let v = eig.vector(0);
        Some(HermMat::from_herm_part(&(&v * &v.adjoint())))
    };
    Ok(Membership {
        is_member,
        margin: -lmin,
        certificate,
    })
}

fn require_selfadjoint(sys: &OperatorSystem, x: &Element) -> Result<()> {
    let dev = sys.adjoint(x).distance(x);
    if dev > 1e-9 * x.max_abs().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Complete positivity of a map `φ: S → M_n`, via the least `t` for which
/// `φ + t·e` has a PSD Choi extension.
pub fn dual_cp_member(sys: &OperatorSystem, phi: &Element, tol: f64) -> Result<Membership> {
    require_selfadjoint(sys, phi)?;
    let n = phi.level;
    let cone = ConeProvider::dual_cp(Arc::new(sys.clone())).with_max_level(n.max(DEFAULT_MAX_LEVEL));
    let mut m = PrimalModel::new();
    let y = cone.encode_membership(&mut m, n)?;
    let t = m.add_free();
    let e = cone.interior_point(n);
    let target = sys.sa_coords(phi);
    let refc = sys.sa_coords(&e);
    for (i, (r, h)) in sys.sa_basis(n).iter().enumerate() {
        let expr = y.coef_expr(*r, h).scalar(t, -refc[i]);
        m.add_eq(&expr, target[i]);
    }
    m.minimize(&LinExpr::new().scalar(t, 1.0));
    let sol = m.solve(solver_tol())?.require_optimal("complete positivity test")?;
    let margin = sol.scalar(t);
    let is_member = margin <= tol;
    let certificate = is_member.then(|| {
        let k = cone.block_dim(n);
        let shift = Mat::identity(k, sys.field()).scale_re(margin / sys.ambient_dim() as f64);
        HermMat::from_herm_part(&(sol.herm(y.var).as_mat() - &shift))
    });
    Ok(Membership {
        is_member,
        margin,
        certificate,
    })
}

/// A cone member inside a [`PrimalModel`]: an ambient matrix (`Inherited`)
/// or a Choi matrix (`DualCp`).
#[derive(Clone, Debug)]
pub struct PrimalMember {
    pub kind: ConeKind,
    pub n: usize,
    pub var: HermVar,
    system: Arc<OperatorSystem>,
}

impl PrimalMember {
    /// `Re tr(K* x_r)` for the coefficient (or value) `x_r` on basis element `r`.
    pub fn coef_expr(&self, r: usize, k: &Mat) -> LinExpr {
        let mut e = LinExpr::new();
        self.add_coef(&mut e, r, k);
        e
    }

    fn add_coef(&self, e: &mut LinExpr, r: usize, k: &Mat) {
        let b = &self.system.basis()[r];
        let g = match self.kind {
            // X = Σ C_r ⊗ b_r with orthonormal b_r
            ConeKind::Inherited => k.kron(b).adjoint(),
            // Re tr(K* φ(b)) = Re Σ_ij b_ij tr(K* Y_ij)
            ConeKind::DualCp => b.transpose().kron(&k.adjoint()),
        };
        e.add_herm(self.var, &g);
    }

    /// `Re tr(H f₁⁽ⁿ⁾(x))` for `f₁⁽ⁿ⁾(x) = Σ_r w_r x_r`.
    pub fn f1_expr(&self, weights: &[f64], h: &Mat) -> LinExpr {
        let mut e = LinExpr::new();
        let hs = h.adjoint();
        for (r, w) in weights.iter().enumerate() {
            if *w != 0.0 {
                self.add_coef(&mut e, r, &hs.scale_re(*w));
            }
        }
        e
    }

    /// `Re ⟨⟨ψ, x⟩⟩` against a fixed partner of the opposite kind.
    pub fn pairing_expr(&self, partner: &Element) -> LinExpr {
        let mut e = LinExpr::new();
        for (r, c) in partner.coeffs.iter().enumerate() {
            if c.max_abs() != 0.0 {
                self.add_coef(&mut e, r, &c.conj());
            }
        }
        e
    }

    pub fn matrix(&self, sol: &PrimalSolution) -> HermMat {
        sol.herm(self.var)
    }

    pub fn value(&self, sol: &PrimalSolution) -> Result<Element> {
        let y = sol.herm(self.var);
        match self.kind {
            ConeKind::Inherited => project_ambient(&self.system, y.as_mat(), self.n),
            ConeKind::DualCp => Ok(choi_to_map(&self.system, y.as_mat(), self.n)),
        }
    }
}

/// Coefficients of the orthogonal projection of an ambient matrix onto `M_n(S)`.
fn project_ambient(sys: &OperatorSystem, a: &Mat, n: usize) -> Result<Element> {
    let d = sys.ambient_dim();
    if a.rows() != n * d {
        return Err(Error::Dimension("ambient matrix has the wrong size".into()));
    }
    let coeffs = sys
        .basis()
        .iter()
        .map(|b| Mat::from_fn(n, n, sys.field(), |i, j| b.inner_c(&a.submatrix(i * d, j * d, d, d))))
        .collect();
    Ok(Element { level: n, coeffs })
}

/// A selfadjoint element of `M_n(S)` with unknown coordinates in a
/// [`DualModel`].
#[derive(Clone, Debug)]
pub struct CoordElement {
    pub n: usize,
    pub vars: Vec<ScalarVar>,
    basis: Vec<(usize, Mat)>,
    system: Arc<OperatorSystem>,
}

impl CoordElement {
    pub fn new(model: &mut DualModel, system: Arc<OperatorSystem>, n: usize) -> CoordElement {
        let basis = system.sa_basis(n);
        CoordElement {
            n,
            vars: model.add_frees(basis.len()),
            basis,
            system,
        }
    }

    /// Ambient matrix as an affine expression.
    pub fn ambient(&self) -> HermAffine {
        let sys = &self.system;
        let mut aff = HermAffine::zero(self.n * sys.ambient_dim(), sys.field());
        for (v, (r, h)) in self.vars.iter().zip(&self.basis) {
            aff.add_var(*v, &h.kron(&sys.basis()[*r]));
        }
        aff
    }

    /// `f₁⁽ⁿ⁾(x) = Σ_r w_r x_r` as an affine expression.
    pub fn f1(&self, weights: &[f64]) -> HermAffine {
        let mut aff = HermAffine::zero(self.n, self.system.field());
        for (v, (r, h)) in self.vars.iter().zip(&self.basis) {
            if weights[*r] != 0.0 {
                aff.add_var(*v, &h.scale_re(weights[*r]));
            }
        }
        aff
    }

    /// Linear coefficients of `x ↦ Re ⟨⟨ψ, x⟩⟩`.
    pub fn pairing_terms(&self, psi: &Element) -> Vec<(ScalarVar, f64)> {
        self.vars
            .iter()
            .zip(&self.basis)
            .map(|(v, (r, h))| {
                let p = psi.coeffs[*r].data().iter().zip(h.data().iter()).map(|(a, b)| a * b).sum::<C64>();
                (*v, p.re)
            })
            .collect()
    }

    /// Coefficients of the ambient trace.
    pub fn trace_terms(&self) -> Vec<(ScalarVar, f64)> {
        self.vars
            .iter()
            .zip(&self.basis)
            .map(|(v, (r, h))| (*v, (h.trace() * self.system.basis()[*r].trace()).re))
            .collect()
    }

    pub fn value(&self, sol: &DualSolution) -> Element {
        let mut x = self.system.zero(self.n);
        for (v, (r, h)) in self.vars.iter().zip(&self.basis) {
            x.coeffs[*r] = &x.coeffs[*r] + &h.scale_re(sol.value(*v));
        }
        x
    }
}

/// A cone together with its base function `f₁⁽ⁿ⁾(x) = Σ_r w_r x_r`.
#[derive(Clone, Debug)]
pub struct BaseSpec {
    pub cone: ConeProvider,
    weights: Vec<f64>,
}

impl BaseSpec {
    pub fn new(cone: ConeProvider, weights: Vec<f64>) -> Result<BaseSpec> {
        let sys = &cone.system;
        if weights.len() != sys.dim() {
            return Err(Error::Dimension(format!(
                "{} base function weights for a system of dimension {}",
                weights.len(),
                sys.dim()
            )));
        }
        if weights.iter().zip(sys.signs()).any(|(w, s)| *s < 0.0 && *w != 0.0) {
            return Err(Error::InvalidArgument("base function is not selfadjoint".into()));
        }
        Ok(BaseSpec { cone, weights })
    }

    /// Inherited cone with `f₁ = tr(ρ ·)`.
    pub fn with_density(system: Arc<OperatorSystem>, rho: &Mat) -> Result<BaseSpec> {
        let rho = HermMat::with_tol(rho.clone(), 1e-9)?;
        let w = system
            .basis()
            .iter()
            .zip(system.signs())
            .map(|(b, s)| if *s > 0.0 { (rho.as_mat() * b).trace().re } else { 0.0 })
            .collect();
        BaseSpec::new(ConeProvider::inherited(system), w)
    }

    /// Inherited cone with the normalized trace.
    pub fn normalized_trace(system: Arc<OperatorSystem>) -> BaseSpec {
        let d = system.ambient_dim();
        let rho = Mat::identity(d, system.field()).scale_re(1.0 / d as f64);
        BaseSpec::with_density(system, &rho).expect("identity is Hermitian")
    }

    /// Completely positive maps with `f₁(φ) = φ(a)`, `a ∈ S` selfadjoint.
    pub fn evaluation(system: Arc<OperatorSystem>, a: &Mat) -> Result<BaseSpec> {
        let c = system.coords(a)?;
        if c.iter().any(|z| z.im.abs() > 1e-9) || a.hermitian_deviation() > 1e-9 {
            return Err(Error::InvalidArgument("evaluation point must be selfadjoint".into()));
        }
        let w = c.iter().map(|z| z.re).collect();
        BaseSpec::new(ConeProvider::dual_cp(system), w)
    }

    /// Completely positive maps with `f₁(φ) = φ(1)`.
    pub fn unit_evaluation(system: Arc<OperatorSystem>) -> BaseSpec {
        let w = system.unit_coords();
        BaseSpec::new(ConeProvider::dual_cp(system), w).expect("unit weights")
    }

    pub fn system(&self) -> &OperatorSystem {
        &self.cone.system
    }

    pub fn kind(&self) -> ConeKind {
        self.cone.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn with_max_level(mut self, max_level: usize) -> BaseSpec {
        self.cone.max_level = max_level;
        self
    }

    /// `Σ_r w_r b_r`: the density of `f₁` (Inherited) or the evaluation
    /// point (DualCp).
    pub fn f1_matrix(&self) -> Mat {
        let sys = self.system();
        let d = sys.ambient_dim();
        let mut a = Mat::zeros(d, d, sys.field());
        for (w, b) in self.weights.iter().zip(sys.basis()) {
            a = &a + &b.scale_re(*w);
        }
        a
    }

    pub fn f1(&self, x: &Element) -> Mat {
        let mut out = Mat::zeros(x.level, x.level, self.system().field());
        for (w, c) in self.weights.iter().zip(&x.coeffs) {
            if *w != 0.0 {
                out = &out + &c.scale_re(*w);
            }
        }
        out
    }

    /// A point of the base at level `n`.
    pub fn reference_point(&self, n: usize) -> Result<Element> {
        let sys = self.system();
        match self.kind() {
            ConeKind::Inherited => {
                let f1_unit = self.weights[0] * (sys.ambient_dim() as f64).sqrt();
                if f1_unit <= 0.0 {
                    return Err(Error::NoReferencePoint);
                }
                Ok(sys.unit(n).scale(1.0 / f1_unit))
            }
            ConeKind::DualCp => {
                let tr = self.f1_matrix().trace().re;
                if tr <= 0.0 {
                    return Err(Error::NoReferencePoint);
                }
                let k = self.cone.block_dim(n);
                Ok(choi_to_map(sys, &Mat::identity(k, sys.field()).scale_re(1.0 / tr), n))
            }
        }
    }

    pub fn in_base(&self, x: &Element, tol: f64) -> Result<bool> {
        let f = self.f1(x);
        if (&f - &Mat::identity(x.level, f.field())).spectral_norm() > tol {
            return Ok(false);
        }
        Ok(self.cone.is_member(x, tol)?.is_member)
    }

    /// `min f₁(x)` over level-1 cone members normalized to unit ambient
    /// trace (Inherited) or `φ(1) = 1` (DualCp). Positive iff `f₁` is
    /// strictly positive.
    pub fn strict_positivity(&self) -> Result<f64> {
        let sys = self.system();
        let mut m = PrimalModel::new();
        let x = self.cone.encode_membership(&mut m, 1)?;
        let one = Mat::identity(1, sys.field());
        let norm = match self.kind() {
            ConeKind::Inherited => LinExpr::new().herm(x.var, &Mat::identity(sys.ambient_dim(), sys.field())),
            ConeKind::DualCp => x.f1_expr(&sys.unit_coords(), &one),
        };
        m.add_eq(&norm, 1.0);
        m.minimize(&x.f1_expr(&self.weights, &one));
        let sol = m.solve(solver_tol())?;
        Ok(sol.sol.require_optimal("strict positivity")?.primal_objective)
    }
}

/// Checks `(P*)_* = P` on `samples` selfadjoint elements per level, in both
/// directions: inherited positivity against the least pairing with
/// trace-one Choi maps, and complete positivity of maps against the least
/// pairing with trace-one positives.
pub fn bipolar_check(
    sys: &Arc<OperatorSystem>,
    levels: &[usize],
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<CheckRecord>> {
    let inherited = ConeProvider::inherited(sys.clone());
    let dual = ConeProvider::dual_cp(sys.clone());
    let mut primal_disagree = 0;
    let mut dual_disagree = 0;
    let mut eig_gap = 0.0f64;
    for idx in 0..samples {
        let n = levels[idx % levels.len()];
        inherited.check_level(n)?;
        let mut rng = rng_for(seed, idx as u64);
        let shift: f64 = rand::Rng::random_range(&mut rng, -0.5..0.5);

        // x with least ambient eigenvalue `shift`
        let g = random_sa_element(&mut rng, sys, n);
        let lmin = herm_eig(&sys.ambient_herm(&g)?)?.min();
        let x = g.add(&sys.unit(n).scale(shift - lmin));
        let direct = inherited.is_member(&x, tol)?.is_member;
        let mut m = PrimalModel::new();
        let psi = dual.encode_membership(&mut m, n)?;
        let k = dual.block_dim(n);
        m.add_eq(&LinExpr::new().herm(psi.var, &Mat::identity(k, sys.field())), 1.0);
        m.minimize(&psi.pairing_expr(&x));
        let least = m.solve(solver_tol())?.sol.require_optimal("bipolar, dual side")?.primal_objective;
        // the least pairing over trace-one Choi matrices is the least eigenvalue
        eig_gap = eig_gap.max((least - (shift)).abs());
        if direct != (least >= -tol) {
            primal_disagree += 1;
        }

        // φ with margin −shift against the interior map
        let h = random_sa_element(&mut rng, sys, n);
        let t0 = dual.is_member(&h, tol)?.margin;
        let e = dual.interior_point(n);
        let phi = h.add(&e.scale(t0 + shift));
        let direct = dual.is_member(&phi, tol)?.is_member;
        let mut m = DualModel::new();
        let x = CoordElement::new(&mut m, sys.clone(), n);
        m.add_lmi(x.ambient());
        m.add_eq(&x.trace_terms(), 1.0);
        m.minimize(&x.pairing_terms(&phi));
        let sol = m.solve(solver_tol())?.require_optimal("bipolar, primal side")?;
        if direct != (sol.objective() >= -tol) {
            dual_disagree += 1;
        }
    }
    Ok(vec![
        CheckRecord::zero_count("bipolar: inherited cone vs dual pairing", primal_disagree, tol),
        CheckRecord::zero_count("bipolar: Choi cone vs primal pairing", dual_disagree, tol),
        CheckRecord::le("bipolar: least pairing vs least eigenvalue", eig_gap, 0.0, 1e-6),
    ])
}
