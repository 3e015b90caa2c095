//! Two small builders on top of [`ConicProblem`].
//!
//! [`PrimalModel`] has Hermitian PSD matrix variables and scalar variables
//! tied together by real linear equalities. It suits problems with large matrix
//! unknowns and few constraints.
//!
//! [`DualModel`] has free scalar unknowns `y` and linear matrix inequalities
//! `F₀ + Σ y_k F_k ⪰ 0`. It maps onto the dual side of the standard form and
//! suits problems with few unknowns and large matrix inequalities.

use nalgebra::{DMatrix, DVector};

use super::{
    embed_real, solve, unembed, BlockKind, Coef, ConicProblem, ConicSolution, Constraint, SparseSym,
    SparseVec,
};
use crate::error::Result;
use crate::matcore::{Field, HermMat, Mat};

const DROP_TOL: f64 = 1e-15;

/// Real symmetric data of a Hermitian coefficient for a block of `field`.
/// Complex data is embedded and halved so that `⟨coef, X⟩ = Re tr(G Z)`.
fn block_coef(g: &Mat, field: Field) -> DMatrix<f64> {
    match field {
        Field::Real => g.re(),
        Field::Complex => embed_real(g) * 0.5,
    }
}

fn block_dim(n: usize, field: Field) -> usize {
    match field {
        Field::Real => n,
        Field::Complex => 2 * n,
    }
}

/// A Hermitian PSD matrix variable of a [`PrimalModel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HermVar {
    block: usize,
    pub dim: usize,
    pub field: Field,
}

/// A scalar variable (a column in a [`PrimalModel`], an unknown `y_k` in a
/// [`DualModel`]).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScalarVar(usize);

impl ScalarVar {
    pub fn index(self) -> usize {
        self.0
    }
}

/// `Σ tr(G_i X_i) + Σ a_j s_j` over the variables of a [`PrimalModel`].
#[derive(Clone, Debug, Default)]
pub struct LinExpr {
    herm: Vec<(HermVar, DMatrix<f64>)>,
    scalar: Vec<(ScalarVar, f64)>,
}

impl LinExpr {
    pub fn new() -> LinExpr {
        LinExpr::default()
    }

    /// Adds `Re tr(G X)`.
    pub fn herm(mut self, var: HermVar, g: &Mat) -> LinExpr {
        self.add_herm(var, g);
        self
    }

    pub fn add_herm(&mut self, var: HermVar, g: &Mat) {
        let g = g.herm_part();
        let data = block_coef(&g, var.field);
        if let Some(entry) = self.herm.iter_mut().find(|(v, _)| *v == var) {
            entry.1 += data;
        } else {
            self.herm.push((var, data));
        }
    }

    pub fn scalar(mut self, var: ScalarVar, a: f64) -> LinExpr {
        self.add_scalar(var, a);
        self
    }

    pub fn add_scalar(&mut self, var: ScalarVar, a: f64) {
        self.scalar.push((var, a));
    }

    pub fn plus(mut self, other: &LinExpr) -> LinExpr {
        for (v, d) in &other.herm {
            match self.herm.iter_mut().find(|(w, _)| w == v) {
                Some(e) => e.1 += d,
                None => self.herm.push((*v, d.clone())),
            }
        }
        self.scalar.extend(other.scalar.iter().copied());
        self
    }

    pub fn scaled(mut self, c: f64) -> LinExpr {
        self.herm.iter_mut().for_each(|e| e.1 *= c);
        self.scalar.iter_mut().for_each(|e| e.1 *= c);
        self
    }

    fn terms(&self) -> Vec<(usize, Coef)> {
        let mut out: Vec<(usize, Coef)> = self
            .herm
            .iter()
            .map(|(v, d)| (v.block, Coef::Psd(SparseSym::from_dense(d, DROP_TOL))))
            .filter(|(_, c)| matches!(c, Coef::Psd(s) if !s.entries.is_empty()))
            .collect();
        for &(v, a) in &self.scalar {
            if a != 0.0 {
                out.push((v.0, Coef::Vec(SparseVec { entries: vec![(0, a)] })));
            }
        }
        out
    }
}

#[derive(Clone, Debug, Default)]
pub struct PrimalModel {
    problem: ConicProblem,
}

impl PrimalModel {
    pub fn new() -> PrimalModel {
        PrimalModel::default()
    }

    pub fn add_psd(&mut self, dim: usize, field: Field) -> HermVar {
        self.problem.blocks.push(BlockKind::Psd(block_dim(dim, field)));
        HermVar {
            block: self.problem.blocks.len() - 1,
            dim,
            field,
        }
    }

    pub fn add_nonneg(&mut self) -> ScalarVar {
        self.problem.blocks.push(BlockKind::Nonneg(1));
        ScalarVar(self.problem.blocks.len() - 1)
    }

    pub fn add_free(&mut self) -> ScalarVar {
        self.problem.blocks.push(BlockKind::Free(1));
        ScalarVar(self.problem.blocks.len() - 1)
    }

    /// Adds `expr = rhs`; returns the constraint index (for duals).
    pub fn add_eq(&mut self, expr: &LinExpr, rhs: f64) -> usize {
        self.problem.constraints.push(Constraint {
            terms: expr.terms(),
            rhs,
        });
        self.problem.constraints.len() - 1
    }

    pub fn num_constraints(&self) -> usize {
        self.problem.constraints.len()
    }

    pub fn minimize(&mut self, expr: &LinExpr) {
        self.problem.objective = expr.terms();
    }

    pub fn problem(&self) -> &ConicProblem {
        &self.problem
    }

    pub fn solve(&self, tol: f64) -> Result<PrimalSolution> {
        Ok(PrimalSolution {
            sol: solve(&self.problem, tol)?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct PrimalSolution {
    pub sol: ConicSolution,
}

impl PrimalSolution {
    pub fn require_optimal(self, context: &str) -> Result<PrimalSolution> {
        Ok(PrimalSolution {
            sol: self.sol.require_optimal(context)?,
        })
    }

    pub fn herm(&self, v: HermVar) -> HermMat {
        let x = self.sol.x[v.block].psd();
        let m = match v.field {
            Field::Real => Mat::from_real(x),
            Field::Complex => unembed(x),
        };
        HermMat::from_herm_part(&m)
    }

    pub fn scalar(&self, v: ScalarVar) -> f64 {
        self.sol.x[v.0].vec()[0]
    }

    /// Multiplier of equality constraint `i`.
    pub fn dual(&self, i: usize) -> f64 {
        self.sol.y[i]
    }

    pub fn objective(&self) -> f64 {
        self.sol.primal_objective
    }
}

/// `F₀ + Σ y_k F_k` with Hermitian `F`'s.
#[derive(Clone, Debug)]
pub struct HermAffine {
    pub dim: usize,
    pub field: Field,
    constant: Mat,
    terms: Vec<(ScalarVar, Mat)>,
}

impl HermAffine {
    pub fn zero(dim: usize, field: Field) -> HermAffine {
        HermAffine {
            dim,
            field,
            constant: Mat::zeros(dim, dim, field),
            terms: Vec::new(),
        }
    }

    pub fn plus_const(mut self, f: &Mat) -> HermAffine {
        self.add_const(f);
        self
    }

    pub fn add_const(&mut self, f: &Mat) {
        self.constant = &self.constant + &f.herm_part();
    }

    pub fn plus_var(mut self, v: ScalarVar, f: &Mat) -> HermAffine {
        self.add_var(v, f);
        self
    }

    pub fn add_var(&mut self, v: ScalarVar, f: &Mat) {
        self.terms.push((v, f.herm_part()));
    }

    pub fn plus(mut self, other: &HermAffine) -> HermAffine {
        assert_eq!(self.dim, other.dim, "affine dimension mismatch");
        self.field = self.field.join(other.field);
        self.constant = &self.constant + &other.constant;
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn scaled(mut self, c: f64) -> HermAffine {
        self.constant = self.constant.scale_re(c);
        self.terms.iter_mut().for_each(|t| t.1 = t.1.scale_re(c));
        self
    }

    /// Evaluates at given unknowns.
    pub fn eval(&self, y: &DVector<f64>) -> HermMat {
        let mut m = self.constant.clone();
        for (v, f) in &self.terms {
            m = &m + &f.scale_re(y[v.0]);
        }
        HermMat::from_herm_part(&m)
    }

    fn real_data(&self, m: &Mat) -> DMatrix<f64> {
        match self.field {
            Field::Real => m.re(),
            Field::Complex => embed_real(m),
        }
    }
}

/// `(terms, rhs, is_equality)`.
type LinearRow = (Vec<(ScalarVar, f64)>, f64, bool);

#[derive(Clone, Debug, Default)]
pub struct DualModel {
    num_vars: usize,
    objective: Vec<f64>,
    lmis: Vec<HermAffine>,
    linear: Vec<LinearRow>,
    minimizing: bool,
}

impl DualModel {
    pub fn new() -> DualModel {
        DualModel::default()
    }

    pub fn add_free(&mut self) -> ScalarVar {
        self.num_vars += 1;
        self.objective.push(0.0);
        ScalarVar(self.num_vars - 1)
    }

    pub fn add_frees(&mut self, n: usize) -> Vec<ScalarVar> {
        (0..n).map(|_| self.add_free()).collect()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Adds `aff ⪰ 0`; returns its index (for multipliers).
    pub fn add_lmi(&mut self, aff: HermAffine) -> usize {
        self.lmis.push(aff);
        self.lmis.len() - 1
    }

    pub fn add_eq(&mut self, terms: &[(ScalarVar, f64)], rhs: f64) {
        self.linear.push((terms.to_vec(), rhs, true));
    }

    /// Adds `Σ a y ≤ rhs`.
    pub fn add_le(&mut self, terms: &[(ScalarVar, f64)], rhs: f64) {
        self.linear.push((terms.to_vec(), rhs, false));
    }

    pub fn maximize(&mut self, terms: &[(ScalarVar, f64)]) {
        self.objective.iter_mut().for_each(|b| *b = 0.0);
        for &(v, a) in terms {
            self.objective[v.0] += a;
        }
        self.minimizing = false;
    }

    pub fn minimize(&mut self, terms: &[(ScalarVar, f64)]) {
        let neg: Vec<_> = terms.iter().map(|&(v, a)| (v, -a)).collect();
        self.maximize(&neg);
        self.minimizing = true;
    }

    pub fn problem(&self) -> ConicProblem {
        let mut p = ConicProblem::default();
        let mut constraints: Vec<Constraint> = self
            .objective
            .iter()
            .map(|&b| Constraint {
                terms: vec![],
                rhs: b,
            })
            .collect();
        for aff in &self.lmis {
            let k = block_dim(aff.dim, aff.field);
            p.blocks.push(BlockKind::Psd(k));
            let j = p.blocks.len() - 1;
            let c = SparseSym::from_dense(&aff.real_data(&aff.constant), DROP_TOL);
            if !c.entries.is_empty() {
                p.objective.push((j, Coef::Psd(c)));
            }
            // merge repeated unknowns within one LMI
            let mut per_var: Vec<(usize, DMatrix<f64>)> = Vec::new();
            for (v, f) in &aff.terms {
                let d = aff.real_data(f);
                match per_var.iter_mut().find(|(i, _)| *i == v.0) {
                    Some(e) => e.1 += d,
                    None => per_var.push((v.0, d)),
                }
            }
            for (i, d) in per_var {
                let a = SparseSym::from_dense(&(-d), DROP_TOL);
                if !a.entries.is_empty() {
                    constraints[i].terms.push((j, Coef::Psd(a)));
                }
            }
        }
        for (terms, rhs, is_eq) in &self.linear {
            p.blocks.push(if *is_eq { BlockKind::Free(1) } else { BlockKind::Nonneg(1) });
            let j = p.blocks.len() - 1;
            if *rhs != 0.0 {
                p.objective.push((j, Coef::Vec(SparseVec { entries: vec![(0, *rhs)] })));
            }
            for &(v, a) in terms {
                if a != 0.0 {
                    constraints[v.0].terms.push((j, Coef::Vec(SparseVec { entries: vec![(0, a)] })));
                }
            }
        }
        p.constraints = constraints;
        p
    }

    pub fn solve(&self, tol: f64) -> Result<DualSolution> {
        let p = self.problem();
        let sol = solve(&p, tol)?;
        Ok(DualSolution {
            sol,
            fields: self.lmis.iter().map(|a| a.field).collect(),
            minimizing: self.minimizing,
        })
    }
}

#[derive(Clone, Debug)]
pub struct DualSolution {
    pub sol: ConicSolution,
    fields: Vec<Field>,
    minimizing: bool,
}

impl DualSolution {
    pub fn require_optimal(mut self, context: &str) -> Result<DualSolution> {
        self.sol = self.sol.require_optimal(context)?;
        Ok(self)
    }

    pub fn value(&self, v: ScalarVar) -> f64 {
        self.sol.y[v.0]
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.sol.y
    }

    /// Optimal value of the objective as stated (maximized or minimized).
    pub fn objective(&self) -> f64 {
        if self.minimizing {
            -self.sol.dual_objective
        } else {
            self.sol.dual_objective
        }
    }

    /// Value of the other side of the duality (for gap reporting).
    pub fn bound(&self) -> f64 {
        if self.minimizing {
            -self.sol.primal_objective
        } else {
            self.sol.primal_objective
        }
    }

    /// Multiplier `Z ⪰ 0` of LMI `i`, normalized so that the Lagrangian term
    /// reads `Re tr(Z F(y))`.
    pub fn lmi_multiplier(&self, i: usize) -> HermMat {
        let x = self.sol.x[i].psd();
        let m = match self.fields[i] {
            Field::Real => Mat::from_real(x),
            Field::Complex => unembed(x).scale_re(2.0),
        };
        HermMat::from_herm_part(&m)
    }
}

/// Unknown coordinates of a Hermitian matrix in an orthonormal basis.
#[derive(Clone, Debug)]
pub struct HermCoords {
    pub vars: Vec<ScalarVar>,
    pub basis: Vec<Mat>,
}

impl HermCoords {
    pub fn new(model: &mut DualModel, basis: Vec<Mat>) -> HermCoords {
        HermCoords {
            vars: model.add_frees(basis.len()),
            basis,
        }
    }

    /// Reconstructs the matrix from solved unknowns.
    pub fn value(&self, sol: &DualSolution) -> Mat {
        let b0 = &self.basis[0];
        let mut m = Mat::zeros(b0.rows(), b0.cols(), b0.field());
        for (v, b) in self.vars.iter().zip(&self.basis) {
            m = &m + &b.scale_re(sol.value(*v));
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{herm_eig, hermitian_basis, C64};

    #[test]
    fn primal_trace_norm_of_hermitian() {
        // min tr(P + N) s.t. P − N = H, P, N ⪰ 0  equals Σ|λ(H)|
        let h = Mat::from_complex_rows(&[
            &[C64::new(1.0, 0.0), C64::new(0.0, 2.0)],
            &[C64::new(0.0, -2.0), C64::new(-0.5, 0.0)],
        ]);
        let mut m = PrimalModel::new();
        let p = m.add_psd(2, Field::Complex);
        let n = m.add_psd(2, Field::Complex);
        for b in hermitian_basis(2, Field::Complex) {
            let e = LinExpr::new().herm(p, &b).herm(n, &b.scale_re(-1.0));
            m.add_eq(&e, h.inner(&b));
        }
        let id = Mat::identity(2, Field::Complex);
        m.minimize(&LinExpr::new().herm(p, &id).herm(n, &id));
        let sol = m.solve(1e-9).unwrap();
        let eig = herm_eig(&HermMat::new(h.clone()).unwrap()).unwrap();
        let expected: f64 = eig.values.iter().map(|v| v.abs()).sum();
        assert!((sol.objective() - expected).abs() < 1e-7, "{} vs {}", sol.objective(), expected);
        let diff = &sol.herm(p) as &Mat - &sol.herm(n);
        assert!((&diff - &h).max_abs() < 1e-7);
    }

    #[test]
    fn dual_spectral_norm_of_complex_matrix() {
        // min t s.t. [[tI, A], [A*, tI]] ⪰ 0  equals ‖A‖
        let a = Mat::from_complex_rows(&[
            &[C64::new(1.0, 1.0), C64::new(0.0, 0.0)],
            &[C64::new(2.0, 0.0), C64::new(0.0, -1.0)],
        ]);
        let mut m = DualModel::new();
        let t = m.add_free();
        let big = crate::matcore::tilde(&a);
        let aff = HermAffine::zero(4, Field::Complex)
            .plus_const(&big)
            .plus_var(t, &Mat::identity(4, Field::Complex));
        m.add_lmi(aff);
        m.minimize(&[(t, 1.0)]);
        let sol = m.solve(1e-9).unwrap();
        assert!((sol.objective() - a.spectral_norm()).abs() < 1e-7);
        let z = sol.lmi_multiplier(0);
        // complementary slackness: tr(Z F(t*)) ≈ 0, tr(Z) = 1 from stationarity in t
        assert!((z.trace().re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn dual_equality_and_inequality() {
        // max x + y s.t. x + 2y = 2, x ≤ 1  → x = 1, y = ½
        let mut m = DualModel::new();
        let x = m.add_free();
        let y = m.add_free();
        m.add_eq(&[(x, 1.0), (y, 2.0)], 2.0);
        m.add_le(&[(x, 1.0)], 1.0);
        m.maximize(&[(x, 1.0), (y, 1.0)]);
        let sol = m.solve(1e-9).unwrap();
        assert!((sol.value(x) - 1.0).abs() < 1e-7);
        assert!((sol.value(y) - 0.5).abs() < 1e-7);
        assert!((sol.objective() - 1.5).abs() < 1e-7);
    }
}
