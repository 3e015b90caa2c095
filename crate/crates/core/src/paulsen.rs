//! Paulsen systems `S_V = {[[λI, x], [y*, μI]]}` with the trace base
//! `τ = ½(λ + μ)`.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cones::BaseSpec;
use crate::conic::model::LinExpr;
use crate::conic::{solver_tol, PrimalModel};
use crate::error::{Error, Result};
use crate::matcore::{
    herm_eig, hermitian_basis, is_psd, restricted_inv_sqrt, psd_sqrt, support_projection, Field, HermMat, Mat, C64, RANK_TOL,
};
use crate::ncnorm::{base_decompose, nc_base_norm};
use crate::opsys::{make_opsys, Element, OperatorSystem};
use crate::random::{gauss, random_element, random_mat, random_psd, random_sa_element, random_unit_vector, rng_for};
use crate::report::{CheckRecord, SuiteOutput};

/// A concrete operator space `V ⊆ M_{d₁×d₂}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct OperatorSpaceRep {
    field: Field,
    shape: (usize, usize),
    basis: Vec<Mat>,
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    field: Field,
    shape: [usize; 2],
    basis: Vec<Mat>,
}

impl TryFrom<SpaceRepr> for OperatorSpaceRep {
    type Error = Error;
    fn try_from(r: SpaceRepr) -> Result<Self> {
        OperatorSpaceRep::new(r.field, (r.shape[0], r.shape[1]), r.basis)
    }
}

impl From<OperatorSpaceRep> for SpaceRepr {
    fn from(v: OperatorSpaceRep) -> Self {
        SpaceRepr {
            field: v.field,
            shape: [v.shape.0, v.shape.1],
            basis: v.basis,
        }
    }
}

impl OperatorSpaceRep {
    pub fn new(field: Field, shape: (usize, usize), basis: Vec<Mat>) -> Result<OperatorSpaceRep> {
        if shape.0 == 0 || shape.1 == 0 {
            return Err(Error::Dimension("operator space shape must be positive".into()));
        }
        if basis.iter().any(|b| b.shape() != shape) {
            return Err(Error::Dimension(format!("basis matrices must be {}x{}", shape.0, shape.1)));
        }
        if basis.iter().any(|b| b.field().is_complex() && !field.is_complex()) {
            return Err(Error::InvalidArgument("complex basis matrix in a real space".into()));
        }
        let flat = nalgebra::DMatrix::from_fn(shape.0 * shape.1, basis.len(), |i, k| basis[k].get(i / shape.1, i % shape.1));
        if !basis.is_empty() && flat.svd(false, false).singular_values.iter().filter(|s| **s > 1e-10).count() < basis.len() {
            return Err(Error::InvalidArgument("operator space basis is linearly dependent".into()));
        }
        let basis = basis.into_iter().map(|b| b.with_field(field)).collect();
        Ok(OperatorSpaceRep { field, shape, basis })
    }

    pub fn zero(d1: usize, d2: usize, field: Field) -> OperatorSpaceRep {
        OperatorSpaceRep::new(field, (d1, d2), Vec::new()).expect("zero space")
    }

    /// All of `M_{d₁×d₂}`.
    pub fn full(d1: usize, d2: usize, field: Field) -> OperatorSpaceRep {
        let basis = (0..d1 * d2).map(|k| Mat::unit(d1, d2, k / d2, k % d2, field)).collect();
        OperatorSpaceRep::new(field, (d1, d2), basis).expect("matrix units")
    }

    /// Span of `dim` Gaussian matrices.
    pub fn random<R: Rng>(rng: &mut R, d1: usize, d2: usize, dim: usize, field: Field) -> Result<OperatorSpaceRep> {
        let basis = (0..dim).map(|_| random_mat(rng, d1, d2, field)).collect();
        OperatorSpaceRep::new(field, (d1, d2), basis)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Blocks of a level-`n` element: `[[λ ⊗ I, x], [y*, μ ⊗ I]]` with `x, y`
/// stored as `n·d₁ × n·d₂` matrices (outer index is the level).
#[derive(Clone, Debug)]
pub struct PaulsenBlocks {
    pub lambda: Mat,
    pub mu: Mat,
    pub x: Mat,
    pub y: Mat,
}

#[derive(Clone, Debug)]
pub struct PaulsenSystem {
    space: OperatorSpaceRep,
    system: Arc<OperatorSystem>,
    base: Arc<BaseSpec>,
}

pub fn build_paulsen(v: &OperatorSpaceRep) -> Result<PaulsenSystem> {
    let (d1, d2) = v.shape;
    let d = d1 + d2;
    let f = v.field;
    let mut gens = vec![
        Mat::identity(d1, f).direct_sum(&Mat::zeros(d2, d2, f)),
        Mat::zeros(d1, d1, f).direct_sum(&Mat::identity(d2, f)),
    ];
    for b in &v.basis {
        let mut upper = Mat::zeros(d, d, f);
        upper.set_submatrix(0, d1, b);
        gens.push(upper.adjoint());
        gens.push(upper);
    }
    let system = Arc::new(make_opsys(&gens)?);
    let base = Arc::new(BaseSpec::with_density(system.clone(), &tau_density(d1, d2, f))?);
    Ok(PaulsenSystem {
        space: v.clone(),
        system,
        base,
    })
}

/// `(I/d₁ ⊕ I/d₂)/2`, so that `τ([[λI, x], [y*, μI]]) = ½(λ + μ)`.
pub fn tau_density(d1: usize, d2: usize, field: Field) -> Mat {
    Mat::identity(d1, field)
        .scale_re(0.5 / d1 as f64)
        .direct_sum(&Mat::identity(d2, field).scale_re(0.5 / d2 as f64))
}

impl PaulsenSystem {
    pub fn space(&self) -> &OperatorSpaceRep {
        &self.space
    }

    pub fn system(&self) -> &Arc<OperatorSystem> {
        &self.system
    }

    /// Inherited cone with `f₁ = τ`.
    pub fn base(&self) -> &BaseSpec {
        &self.base
    }

    pub fn tau(&self, p: &Element) -> Mat {
        self.base.f1(p)
    }

    /// `[[λ ⊗ I, x], [y*, μ ⊗ I]]` as an element of `M_n(S_V)`.
    pub fn element(&self, lambda: &Mat, mu: &Mat, x: &Mat, y: &Mat) -> Result<Element> {
        let (d1, d2) = self.space.shape;
        let n = lambda.rows();
        if mu.shape() != (n, n) || lambda.shape() != (n, n) || x.shape() != (n * d1, n * d2) || y.shape() != x.shape() {
            return Err(Error::Dimension("Paulsen blocks have inconsistent sizes".into()));
        }
        let d = d1 + d2;
        let field = self.system.field();
        let a = Mat::from_fn(n * d, n * d, field, |r, c| {
            let (i, a) = (r / d, r % d);
            let (j, b) = (c / d, c % d);
            match (a < d1, b < d1) {
                (true, true) if a == b => lambda.get(i, j),
                (false, false) if a == b => mu.get(i, j),
                (true, false) => x.get(i * d1 + a, j * d2 + b - d1),
                (false, true) => y.get(j * d1 + b, i * d2 + a - d1).conj(),
                _ => C64::new(0.0, 0.0),
            }
        });
        self.system.from_ambient(&a, n)
    }

    /// Splits an element into its blocks; diagonal blocks must be scalar
    /// matrices tensored with the identity.
    pub fn blocks(&self, p: &Element) -> Result<PaulsenBlocks> {
        let (d1, d2) = self.space.shape;
        let d = d1 + d2;
        let n = p.level;
        let a = self.system.ambient(p);
        let field = self.system.field();
        let lambda = Mat::from_fn(n, n, field, |i, j| a.get(i * d, j * d));
        let mu = Mat::from_fn(n, n, field, |i, j| a.get(i * d + d1, j * d + d1));
        let x = Mat::from_fn(n * d1, n * d2, field, |r, c| a.get((r / d1) * d + r % d1, (c / d2) * d + d1 + c % d2));
        let y = Mat::from_fn(n * d1, n * d2, field, |r, c| a.get((c / d2) * d + d1 + c % d2, (r / d1) * d + r % d1).conj());
        let rebuilt = self.element(&lambda, &mu, &x, &y)?;
        if (&self.system.ambient(&rebuilt) - &a).max_abs() > 1e-9 * (1.0 + a.max_abs()) {
            return Err(Error::InvalidArgument("diagonal blocks are not scalar multiples of the identity".into()));
        }
        Ok(PaulsenBlocks { lambda, mu, x, y })
    }

    /// Parses an ambient matrix, rejecting anything outside `M_n(S_V)`.
    pub fn from_ambient(&self, a: &Mat, n: usize) -> Result<Element> {
        let p = self.system.from_ambient(a, n)?;
        self.blocks(&p)?;
        Ok(p)
    }

    /// Random element of `M_n(V)` as an `n·d₁ × n·d₂` matrix.
    pub fn random_corner<R: Rng>(&self, rng: &mut R, n: usize) -> Mat {
        let (d1, d2) = self.space.shape;
        let field = self.space.field;
        let mut x = Mat::zeros(n * d1, n * d2, field);
        for b in &self.space.basis {
            x = &x + &random_mat(rng, n, n, field).kron(b);
        }
        x
    }

    /// `[[λI, x], [x*, (2−λ)I]]`.
    pub fn k1_candidate(&self, lambda: f64, x: &Mat) -> Result<Element> {
        let f = self.system.field();
        let one = |v: f64| Mat::from_fn(1, 1, f, |_, _| C64::new(v, 0.0));
        self.element(&one(lambda), &one(2.0 - lambda), x, x)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityCheck {
    /// `[[λ ⊗ I, x], [x*, μ ⊗ I]] ⪰ 0` by eigenvalues.
    pub ambient_psd: bool,
    /// `λ, μ ⪰ 0` and `|⟨xζ, η⟩|² ≤ ⟨λη, η⟩⟨μζ, ζ⟩` on all tested pairs.
    pub formula: bool,
    pub agree: bool,
    /// When positive: `‖x‖ ≤ √(‖λ‖‖μ‖)`.
    pub norm_bound: Option<bool>,
    pub pairs: usize,
}

/// Compares ambient positivity with the bilinear-form criterion on 500
/// random pairs plus the extremal ones.
pub fn positivity_formula_check(
    ps: &PaulsenSystem,
    lambda: &Mat,
    mu: &Mat,
    x: &Mat,
    seed: u64,
    tol: f64,
) -> Result<PositivityCheck> {
    let (d1, d2) = ps.space.shape;
    let field = ps.system.field().join(lambda.field()).join(mu.field()).join(x.field());
    let n = lambda.rows();
    if x.shape() != (n * d1, n * d2) {
        return Err(Error::Dimension("corner has the wrong size".into()));
    }
    let lh = HermMat::with_tol(lambda.clone().with_field(field), 1e-9)?;
    let mh = HermMat::with_tol(mu.clone().with_field(field), 1e-9)?;
    let a = lh.kron(&Mat::identity(d1, field));
    let b = mh.kron(&Mat::identity(d2, field));
    let x = x.clone().with_field(field);
    let full = Mat::block2(&a, &x, &x.adjoint(), &b)?;
    let ambient_psd = is_psd(&HermMat::from_herm_part(&full), tol)?;

    let scale = 1.0 + a.spectral_norm().max(b.spectral_norm()).max(x.spectral_norm());
    let diag_psd = is_psd(&lh, tol)? && is_psd(&mh, tol)?;
    let form = |eta: &Mat, zeta: &Mat| -> bool {
        let lhs = (&eta.adjoint() * &(&x * zeta)).get(0, 0).norm_sqr();
        let ea = (&eta.adjoint() * &(&a * eta)).get(0, 0).re;
        let zb = (&zeta.adjoint() * &(&b * zeta)).get(0, 0).re;
        lhs <= ea * zb + tol * scale * scale
    };
    let mut pairs: Vec<(Mat, Mat)> = Vec::new();
    let mut rng = rng_for(seed, 0);
    for _ in 0..500 {
        pairs.push((random_unit_vector(&mut rng, n * d1, field), random_unit_vector(&mut rng, n * d2, field)));
    }
    // worst pairs: the top singular pair of A^{+½} x B^{+½}, and vectors in
    // the kernels of A and B
    let ah = HermMat::from_herm_part(&a);
    let bh = HermMat::from_herm_part(&b);
    if diag_psd {
        let ra = restricted_inv_sqrt(&ah, RANK_TOL)?;
        let rb = restricted_inv_sqrt(&bh, RANK_TOL)?;
        let ea = support_projection(&ah, RANK_TOL)?;
        let eb = support_projection(&bh, RANK_TOL)?;
        let core = &(ra.as_mat() * &x) * rb.as_mat();
        let svd = core.data().clone().svd(true, true);
        if let (Some(u), Some(vt)) = (svd.u, svd.v_t) {
            let u0 = Mat::new(field, u.columns(0, 1).into_owned());
            let v0 = Mat::new(field, vt.rows(0, 1).adjoint());
            pairs.push((ra.as_mat() * &u0, rb.as_mat() * &v0));
        }
        let ka = herm_eig(&HermMat::from_herm_part(&(&Mat::identity(n * d1, field) - ea.as_mat())))?;
        let kb = herm_eig(&HermMat::from_herm_part(&(&Mat::identity(n * d2, field) - eb.as_mat())))?;
        for k in 0..n * d1 {
            if ka.values[k] > 0.5 {
                let eta = ka.vector(k);
                let zeta = &x.adjoint() * &eta;
                pairs.push((eta, zeta));
            }
        }
        for k in 0..n * d2 {
            if kb.values[k] > 0.5 {
                let zeta = kb.vector(k);
                let eta = &x * &zeta;
                pairs.push((eta, zeta));
            }
        }
    }
    let formula = diag_psd && pairs.iter().all(|(e, z)| form(e, z));
    let norm_bound = ambient_psd.then(|| x.spectral_norm() <= (lh.spectral_norm() * mh.spectral_norm()).sqrt() + tol * scale);
    Ok(PositivityCheck {
        ambient_psd,
        formula,
        agree: ambient_psd == formula,
        norm_bound,
        pairs: pairs.len(),
    })
}

#[derive(Clone, Debug)]
pub struct PaulsenDecomposition {
    /// `λ^{½} ⊕ μ^{½}`.
    pub sqrt_diag: Mat,
    /// Contraction in `M_n(V)` as an `n·d₁ × n·d₂` matrix.
    pub z: Mat,
    /// `‖(λ^{½} ⊕ μ^{½})[[I, z], [z*, I]](λ^{½} ⊕ μ^{½}) − p‖`, entrywise max.
    pub residual: f64,
    pub z_norm: f64,
}

/// `p = (λ^{½} ⊕ μ^{½})[[I, z], [z*, I]](λ^{½} ⊕ μ^{½})` with
/// `z = (eλe)^{-½} x (fμf)^{-½}`.
pub fn positive_decompose(ps: &PaulsenSystem, p: &Element, tol: f64) -> Result<PaulsenDecomposition> {
    if !ps.system.is_positive(p, tol)? {
        return Err(Error::NotInCone(herm_eig(&ps.system.ambient_herm(p)?)?.min()));
    }
    let (d1, d2) = ps.space.shape;
    let field = ps.system.field();
    let bl = ps.blocks(p)?;
    let lam = HermMat::from_herm_part(&bl.lambda);
    let mu = HermMat::from_herm_part(&bl.mu);
    let i1 = Mat::identity(d1, field);
    let i2 = Mat::identity(d2, field);
    let rl = restricted_inv_sqrt(&lam, RANK_TOL)?.kron(&i1);
    let rm = restricted_inv_sqrt(&mu, RANK_TOL)?.kron(&i2);
    let z = &(&rl * &bl.x) * &rm;
    let s = psd_sqrt(&lam, 1e-6)?.kron(&i1).direct_sum(&psd_sqrt(&mu, 1e-6)?.kron(&i2));
    let n = p.level;
    let unit = Mat::block2(&Mat::identity(n * d1, field), &z, &z.adjoint(), &Mat::identity(n * d2, field))?;
    let rebuilt = &(&s * &unit) * &s;
    let target = Mat::block2(&bl.lambda.kron(&i1), &bl.x, &bl.x.adjoint(), &bl.mu.kron(&i2))?;
    Ok(PaulsenDecomposition {
        residual: (&rebuilt - &target).max_abs(),
        z_norm: z.spectral_norm(),
        sqrt_diag: psd_sqrt(&lam, 1e-6)?.direct_sum(psd_sqrt(&mu, 1e-6)?.as_mat()),
        z,
    })
}

/// `0 ≤ λ ≤ 2` and `‖x‖ ≤ √(λ(2−λ))`, relaxed by `tol` the way an
/// eigenvalue test of `[[λI, x], [x*, (2−λ)I]]` is.
pub fn k1_membership(lambda: f64, x: &Mat, tol: f64) -> bool {
    let s = x.spectral_norm();
    lambda >= -tol && lambda <= 2.0 + tol && s * s <= lambda * (2.0 - lambda) + 2.0 * tol + tol * tol
}

/// Alternating ascent for `max ‖k‖` over the base at level `n`: fix a unit
/// vector `w` and maximize `⟨k w, w⟩` over `K_n`, then replace `w` by a top
/// eigenvector of `k`.
pub fn norm_witness(ps: &PaulsenSystem, n: usize, restarts: usize, seed: u64) -> Result<(f64, Element)> {
    let runs: Vec<Result<(f64, Element)>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_for(seed, r as u64);
            let dim = n * ps.system.ambient_dim();
            let mut w = random_unit_vector(&mut rng, dim, ps.system.field());
            let mut best = (f64::NEG_INFINITY, ps.system.zero(n));
            for _ in 0..60 {
                let k = maximize_on_base(ps, n, &w)?;
                let eig = herm_eig(&ps.system.ambient_herm(&k)?)?;
                let v = eig.max();
                let improved = v > best.0 + 1e-10;
                best = (v.max(best.0), if v >= best.0 { k } else { best.1 });
                if !improved {
                    break;
                }
                w = eig.vector(eig.values.len() - 1);
            }
            Ok(best)
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, ps.system.zero(n));
    for run in runs {
        let run = run?;
        if run.0 > best.0 {
            best = run;
        }
    }
    Ok(best)
}

fn maximize_on_base(ps: &PaulsenSystem, n: usize, w: &Mat) -> Result<Element> {
    let b = ps.base();
    let mut m = PrimalModel::new();
    let x = b.cone.encode_membership(&mut m, n)?;
    for h in hermitian_basis(n, ps.system.field()) {
        let rhs = h.trace().re;
        m.add_eq(&x.f1_expr(b.weights(), &h), rhs);
    }
    let ww = (w * &w.adjoint()).scale_re(-1.0);
    m.minimize(&LinExpr::new().herm(x.var, &ww));
    let sol = m.solve(solver_tol())?.require_optimal("base maximization")?;
    x.value(&sol)
}

/// Random positive element built from the factorization: `λ, μ ⪰ 0` and a
/// contraction `z`.
fn random_positive<R: Rng>(ps: &PaulsenSystem, rng: &mut R, n: usize) -> Result<Element> {
    let (d1, d2) = ps.space.shape;
    let field = ps.system.field();
    let rank = |rng: &mut R| if rng.random::<f64>() < 0.25 { rng.random_range(0..n) } else { n };
    let (rl, rm) = (rank(rng), rank(rng));
    let lam = random_psd(rng, n, rl, field);
    let mu = random_psd(rng, n, rm, field);
    let mut z = ps.random_corner(rng, n);
    let zn = z.spectral_norm();
    if zn > 0.0 {
        z = z.scale_re(rng.random::<f64>().sqrt() / zn);
    }
    let i1 = Mat::identity(d1, field);
    let i2 = Mat::identity(d2, field);
    let sl = psd_sqrt(&HermMat::from_herm_part(&lam), 1e-6)?.kron(&i1);
    let sm = psd_sqrt(&HermMat::from_herm_part(&mu), 1e-6)?.kron(&i2);
    let x = &(&sl * &z) * &sm;
    ps.element(&lam, &mu, &x, &x)
}

/// Norm equivalence `½‖u‖_τ ≤ ‖u‖ ≤ 4‖u‖_τ`, the bound 4 on the base, and a
/// search for a base element of norm 4.
pub fn verify_equivalence(
    ps: &PaulsenSystem,
    levels: &[usize],
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<SuiteOutput> {
    let b = ps.base();
    let sys = ps.system();
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::NEG_INFINITY;
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = 0.0f64;
    let mut base_max = 0.0f64;
    let mut base_out = 0;
    for &n in levels {
        b.cone.check_level(n)?;
        let rows: Vec<Result<(f64, f64, f64, bool)>> = (0..samples)
            .into_par_iter()
            .map(|idx| {
                let mut rng = rng_for(seed ^ ((n as u64) << 32), idx as u64);
                let u = if idx % 2 == 0 {
                    random_element(&mut rng, sys, n)
                } else {
                    random_sa_element(&mut rng, sys, n)
                };
                let u = u.scale(gauss(&mut rng).abs() + 0.1);
                let orig = sys.matrix_norm(&u)?;
                let tau = nc_base_norm(b, &u)?.value;
                let p = random_positive(ps, &mut rng, n)?;
                let k = base_decompose(b, &p, 1e-9)?.k;
                Ok((orig, tau, sys.matrix_norm(&k)?, b.in_base(&k, 1e-7)?))
            })
            .collect();
        for row in rows {
            let (orig, tau, kn, inb) = row?;
            lower = lower.max(0.5 * tau - orig);
            upper = upper.max(orig - 4.0 * tau);
            if tau > 0.0 {
                ratio_min = ratio_min.min(orig / tau);
                ratio_max = ratio_max.max(orig / tau);
            }
            base_max = base_max.max(kn);
            if !inb {
                base_out += 1;
            }
        }
    }
    let (witness, k) = norm_witness(ps, 2, 100, seed)?;
    let witness_in_base = b.in_base(&k, 1e-6)?;
    let records = vec![
        CheckRecord::le("paulsen: half the base norm is at most the norm", lower, 0.0, tol),
        CheckRecord::le("paulsen: norm is at most four times the base norm", upper, 0.0, tol),
        CheckRecord::le("paulsen: norm on sampled base elements", base_max, 4.0, 1e-6),
        CheckRecord::zero_count("paulsen: sampled base elements outside the base", base_out, 1e-7),
        CheckRecord::ge("paulsen: level-2 base witness norm", witness, 4.0, 1e-3),
        CheckRecord::le("paulsen: level-2 base witness norm bound", witness, 4.0, 1e-6),
        CheckRecord::zero_count("paulsen: witness outside the base", usize::from(!witness_in_base), 1e-6),
    ];
    let notes = vec![
        ("min norm / base norm".to_string(), ratio_min),
        ("max norm / base norm".to_string(), ratio_max),
        ("max norm on sampled base elements".to_string(), base_max),
        ("witness norm".to_string(), witness),
    ];
    Ok((records, notes))
}

/// Everything checkable about `(S_V, τ)`: the norm equivalence, the `K₁`
/// formula against the SDP, the factorization of positives, faithfulness of
/// `τ` and the matrix base ordered space conditions.
pub fn paulsen_suite(
    ps: &PaulsenSystem,
    levels: &[usize],
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<SuiteOutput> {
    let (mut records, notes) = verify_equivalence(ps, levels, samples, seed, tol)?;
    let b = ps.base();
    let mut disagree = 0;
    let mut residual = 0.0f64;
    let mut z_excess = 0.0f64;
    for idx in 0..samples {
        let mut rng = rng_for(seed.wrapping_add(1), idx as u64);
        let lambda: f64 = rng.random_range(-0.3..2.3);
        let mut x = ps.random_corner(&mut rng, 1);
        let xn = x.spectral_norm();
        if xn > 0.0 {
            x = x.scale_re((lambda * (2.0 - lambda)).max(0.01).sqrt() * rng.random_range(0.0..1.6) / xn);
        }
        if k1_membership(lambda, &x, tol) != b.in_base(&ps.k1_candidate(lambda, &x)?, tol)? {
            disagree += 1;
        }
        let n = levels[idx % levels.len()];
        let p = random_positive(ps, &mut rng, n)?;
        let d = positive_decompose(ps, &p, 1e-9)?;
        residual = residual.max(d.residual);
        z_excess = z_excess.max(d.z_norm - 1.0);
    }
    records.push(CheckRecord::zero_count("paulsen: K1 formula vs SDP membership", disagree, tol));
    records.push(CheckRecord::le("paulsen: factorization residual", residual, 0.0, 1e-7));
    records.push(CheckRecord::le("paulsen: factorization contraction norm", z_excess, 0.0, 1e-7));
    records.extend(crate::ncnorm::mbos_validate(b, levels, samples.min(20), seed, tol)?);
    Ok((records, notes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Mat {
        Mat::from_rows(&[&[v]]).with_field(Field::Complex)
    }

    #[test]
    fn dimensions() {
        let ps = build_paulsen(&OperatorSpaceRep::zero(2, 2, Field::Complex)).unwrap();
        assert_eq!(ps.system().dim(), 2);
        let ps = build_paulsen(&OperatorSpaceRep::full(1, 1, Field::Complex)).unwrap();
        assert_eq!(ps.system().dim(), 4);
        let ps = build_paulsen(&OperatorSpaceRep::full(2, 2, Field::Complex)).unwrap();
        assert_eq!(ps.system().dim(), 10);
        assert_eq!(ps.system().ambient_dim(), 4);
    }

    #[test]
    fn rejects_dependent_basis() {
        let b = Mat::unit(2, 2, 0, 1, Field::Complex);
        assert!(OperatorSpaceRep::new(Field::Complex, (2, 2), vec![b.clone(), b.scale_re(2.0)]).is_err());
        assert!(OperatorSpaceRep::new(Field::Complex, (2, 2), vec![Mat::identity(3, Field::Complex)]).is_err());
    }

    #[test]
    fn tau_on_blocks() {
        let ps = build_paulsen(&OperatorSpaceRep::full(2, 1, Field::Complex)).unwrap();
        let x = Mat::from_rows(&[&[0.3], &[-0.2]]).with_field(Field::Complex);
        let p = ps.element(&c(3.0), &c(5.0), &x, &x.scale_re(2.0)).unwrap();
        assert!((ps.tau(&p).get(0, 0).re - 4.0).abs() < 1e-12);
        let bl = ps.blocks(&p).unwrap();
        assert!((&bl.y - &x.scale_re(2.0)).max_abs() < 1e-12);
    }

    #[test]
    fn rejects_nonscalar_diagonal() {
        let ps = build_paulsen(&OperatorSpaceRep::full(2, 2, Field::Complex)).unwrap();
        let a = Mat::diag(&[1.0, 2.0, 1.0, 1.0]).with_field(Field::Complex);
        assert!(ps.from_ambient(&a, 1).is_err());
        assert!(ps.from_ambient(&Mat::identity(4, Field::Complex), 1).is_ok());
    }

    #[test]
    fn positivity_formula_examples() {
        let ps = build_paulsen(&OperatorSpaceRep::full(1, 1, Field::Complex)).unwrap();
        let one = c(1.0);
        let r = positivity_formula_check(&ps, &one, &one, &c(0.8), 1, 1e-9).unwrap();
        assert!(r.ambient_psd && r.agree && r.norm_bound == Some(true));
        let r = positivity_formula_check(&ps, &one, &one, &c(1.5), 1, 1e-9).unwrap();
        assert!(!r.ambient_psd && r.agree);
        let r = positivity_formula_check(&ps, &c(0.0), &one, &c(0.0), 1, 1e-9).unwrap();
        assert!(r.ambient_psd && r.agree);
        let r = positivity_formula_check(&ps, &c(0.0), &one, &c(0.1), 1, 1e-9).unwrap();
        assert!(!r.ambient_psd && r.agree);
        let r = positivity_formula_check(&ps, &c(0.0), &c(-1.0), &c(0.0), 1, 1e-9).unwrap();
        assert!(!r.ambient_psd && r.agree);
    }

    #[test]
    fn decomposition_examples() {
        let ps = build_paulsen(&OperatorSpaceRep::full(1, 1, Field::Complex)).unwrap();
        let i2 = Mat::identity(2, Field::Complex);
        let x = Mat::from_rows(&[&[0.3, 0.1], &[0.0, 0.2]]).with_field(Field::Complex);
        let p = ps.element(&i2, &i2, &x, &x).unwrap();
        let d = positive_decompose(&ps, &p, 1e-9).unwrap();
        assert!((&d.z - &x).max_abs() < 1e-9 && d.residual < 1e-9);

        let lam = Mat::diag(&[4.0, 0.0]).with_field(Field::Complex);
        let x = Mat::from_rows(&[&[0.5, 0.4], &[0.0, 0.0]]).with_field(Field::Complex);
        let p = ps.element(&lam, &i2, &x, &x).unwrap();
        let d = positive_decompose(&ps, &p, 1e-9).unwrap();
        assert!((&d.z - &x.scale_re(0.5)).max_abs() < 1e-9 && d.residual < 1e-9);

        let d = positive_decompose(&ps, &ps.system().zero(2), 1e-9).unwrap();
        assert!(d.z.max_abs() < 1e-12);

        let bad = ps.element(&i2, &i2, &i2.scale_re(2.0), &i2.scale_re(2.0)).unwrap();
        assert!(positive_decompose(&ps, &bad, 1e-9).is_err());
    }

    #[test]
    fn k1_examples() {
        let x = Mat::from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).with_field(Field::Complex);
        assert!(k1_membership(1.0, &x, 1e-9));
        assert!(k1_membership(2.0, &x.scale_re(0.0), 1e-9));
        assert!(!k1_membership(1.0, &x.scale_re(1.01), 1e-9));
        let ps = build_paulsen(&OperatorSpaceRep::full(2, 2, Field::Complex)).unwrap();
        for (l, s, expect) in [(1.0, 1.0, true), (2.0, 0.0, true), (1.0, 1.01, false), (0.5, 0.8, true), (0.5, 0.9, false)] {
            let k = ps.k1_candidate(l, &x.scale_re(s)).unwrap();
            assert_eq!(ps.base().in_base(&k, 1e-7).unwrap(), expect, "{l} {s}");
        }
    }

    #[test]
    fn diagonal_norms() {
        let ps = build_paulsen(&OperatorSpaceRep::full(2, 2, Field::Complex)).unwrap();
        let z = Mat::zeros(2, 2, Field::Complex);
        let p = ps.element(&c(0.7), &c(2.5), &z, &z).unwrap();
        assert!((nc_base_norm(ps.base(), &p).unwrap().value - 1.6).abs() < 1e-7);
        let x = Mat::from_rows(&[&[0.6, 0.0], &[0.8, 0.0]]).with_field(Field::Complex);
        let p = ps.element(&c(1.0), &c(1.0), &x, &x).unwrap();
        assert!((nc_base_norm(ps.base(), &p).unwrap().value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn tau_is_faithful() {
        let ps = build_paulsen(&OperatorSpaceRep::full(1, 2, Field::Complex)).unwrap();
        assert!(ps.base().strict_positivity().unwrap() > 1e-6);
    }

    #[test]
    fn level_two_witness_reaches_four() {
        let ps = build_paulsen(&OperatorSpaceRep::full(1, 1, Field::Complex)).unwrap();
        let (v, k) = norm_witness(&ps, 2, 10, 3).unwrap();
        assert!(v >= 4.0 - 1e-3, "{v}");
        assert!(ps.base().in_base(&k, 1e-6).unwrap());
    }
}
