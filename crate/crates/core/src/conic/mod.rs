//! Standard-form conic programs over products of PSD blocks, nonnegative
//! orthants and free variables:
//!
//! ```text
//!   minimize   Σ_j ⟨C_j, X_j⟩
//!   subject to Σ_j ⟨A_kj, X_j⟩ = b_k,   X_j ∈ K_j
//! ```
//!
//! with dual `max bᵀy  s.t.  C_j − Σ_k y_k A_kj ∈ K_j*`. PSD blocks are real
//! symmetric; complex Hermitian data is embedded with [`complex_embed`].

mod ipm;
pub mod model;

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{Field, HermMat, Mat, C64};

pub use ipm::SolverSettings;
pub use model::{DualModel, HermAffine, HermVar, PrimalModel, ScalarVar};

/// Loosest and tightest tolerances accepted by [`solve`].
pub const TOL_RANGE: (f64, f64) = (1e-10, 1e-4);
/// Default solver tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockKind {
    Psd(usize),
    Nonneg(usize),
    Free(usize),
}

impl BlockKind {
    pub fn len(&self) -> usize {
        match *self {
            BlockKind::Psd(k) => k,
            BlockKind::Nonneg(k) | BlockKind::Free(k) => k,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Symmetric matrix stored by its upper triangle: `(i, j, v)` with `i ≤ j`
/// means `A_ij = A_ji = v`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseSym {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn new(dim: usize) -> SparseSym {
        SparseSym { dim, entries: Vec::new() }
    }

    /// Adds `v` to both `(i, j)` and `(j, i)` (once if `i == j`).
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        if v != 0.0 {
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            self.entries.push((i, j, v));
        }
    }

    /// Upper triangle of a dense symmetric matrix; entries below
    /// `drop_tol·max|a|` are discarded.
    pub fn from_dense(a: &DMatrix<f64>, drop_tol: f64) -> SparseSym {
        let n = a.nrows();
        let cut = drop_tol * a.amax();
        let mut s = SparseSym::new(n);
        for j in 0..n {
            for i in 0..=j {
                let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                if v.abs() > cut {
                    s.entries.push((i, j, v));
                }
            }
        }
        s
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            a[(i, j)] += v;
            if i != j {
                a[(j, i)] += v;
            }
        }
        a
    }

    /// Merges duplicate positions.
    pub fn compress(&mut self) {
        self.entries.sort_by_key(|e| (e.0, e.1));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(i, j, v) in &self.entries {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => out.push((i, j, v)),
            }
        }
        out.retain(|e| e.2 != 0.0);
        self.entries = out;
    }

    /// `⟨A, X⟩ = tr(A X)` for symmetric `X`.
    pub fn dot(&self, x: &DMatrix<f64>) -> f64 {
        let mut s = 0.0;
        for &(i, j, v) in &self.entries {
            if i == j {
                s += v * x[(i, i)];
            } else {
                s += v * (x[(i, j)] + x[(j, i)]);
            }
        }
        s
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * v } else { 2.0 * v * v })
            .sum()
    }

    fn scale(&mut self, c: f64) {
        self.entries.iter_mut().for_each(|e| e.2 *= c);
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVec {
    pub entries: Vec<(usize, f64)>,
}

impl SparseVec {
    pub fn dot(&self, x: &DVector<f64>) -> f64 {
        self.entries.iter().map(|&(i, v)| v * x[i]).sum()
    }

    fn scale(&mut self, c: f64) {
        self.entries.iter_mut().for_each(|e| e.1 *= c);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Coef {
    Psd(SparseSym),
    Vec(SparseVec),
}

impl Coef {
    fn frobenius_sq(&self) -> f64 {
        match self {
            Coef::Psd(s) => s.frobenius_sq(),
            Coef::Vec(v) => v.entries.iter().map(|e| e.1 * e.1).sum(),
        }
    }

    fn scale(&mut self, c: f64) {
        match self {
            Coef::Psd(s) => s.scale(c),
            Coef::Vec(v) => v.scale(c),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    /// `(block index, coefficient)` pairs.
    pub terms: Vec<(usize, Coef)>,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConicProblem {
    pub blocks: Vec<BlockKind>,
    pub objective: Vec<(usize, Coef)>,
    pub constraints: Vec<Constraint>,
}

impl ConicProblem {
    /// Checks that every coefficient matches the kind and size of its block.
    pub fn validate(&self) -> Result<()> {
        let check = |block: usize, coef: &Coef| -> Result<()> {
            let kind = self
                .blocks
                .get(block)
                .ok_or_else(|| Error::Dimension(format!("block {block} does not exist")))?;
            match (kind, coef) {
                (BlockKind::Psd(k), Coef::Psd(s)) => {
                    if s.dim != *k || s.entries.iter().any(|&(i, j, _)| i > j || j >= *k) {
                        return Err(Error::Dimension(format!("bad PSD coefficient for block {block}")));
                    }
                }
                (BlockKind::Nonneg(k) | BlockKind::Free(k), Coef::Vec(v)) => {
                    if v.entries.iter().any(|&(i, _)| i >= *k) {
                        return Err(Error::Dimension(format!("bad vector coefficient for block {block}")));
                    }
                }
                _ => return Err(Error::Dimension(format!("coefficient kind does not match block {block}"))),
            }
            Ok(())
        };
        for (b, c) in &self.objective {
            check(*b, c)?;
        }
        for con in &self.constraints {
            if !con.rhs.is_finite() {
                return Err(Error::InvalidArgument("non-finite right-hand side".into()));
            }
            for (b, c) in &con.terms {
                check(*b, c)?;
            }
        }
        Ok(())
    }

    /// JSON record for offline debugging.
    pub fn dump(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    Inaccurate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BlockValue {
    Psd(DMatrix<f64>),
    Vec(DVector<f64>),
}

impl BlockValue {
    pub fn psd(&self) -> &DMatrix<f64> {
        match self {
            BlockValue::Psd(m) => m,
            BlockValue::Vec(_) => panic!("block holds a vector, not a matrix"),
        }
    }

    pub fn vec(&self) -> &DVector<f64> {
        match self {
            BlockValue::Vec(v) => v,
            BlockValue::Psd(_) => panic!("block holds a matrix, not a vector"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConicSolution {
    pub status: SolveStatus,
    /// Primal values per block. For infeasibility statuses, the certificate ray.
    pub x: Vec<BlockValue>,
    /// Dual slacks per block (zero vectors for free blocks).
    pub s: Vec<BlockValue>,
    pub y: DVector<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Relative duality gap `|p − d| / (1 + |p| + |d|)`.
    pub gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Fails unless the status is [`SolveStatus::Optimal`].
    pub fn require_optimal(self, context: &str) -> Result<ConicSolution> {
        if self.is_optimal() {
            Ok(self)
        } else {
            Err(Error::Solver {
                status: self.status,
                context: context.to_string(),
            })
        }
    }
}

/// Solves `p` to relative accuracy `tol`.
pub fn solve(p: &ConicProblem, tol: f64) -> Result<ConicSolution> {
    solve_with(p, &SolverSettings::with_tol(tol)?)
}

pub fn solve_with(p: &ConicProblem, settings: &SolverSettings) -> Result<ConicSolution> {
    p.validate()?;
    let sol = ipm::solve(p, settings)?;
    SOLVES.fetch_add(1, Ordering::Relaxed);
    ITERATIONS.fetch_add(sol.iterations as u64, Ordering::Relaxed);
    Ok(sol)
}

static SOLVER_TOL_BITS: AtomicU64 = AtomicU64::new(0);
static SOLVES: AtomicU64 = AtomicU64::new(0);
static ITERATIONS: AtomicU64 = AtomicU64::new(0);

/// Process-wide tolerance used by the norm and membership routines.
pub fn solver_tol() -> f64 {
    match SOLVER_TOL_BITS.load(Ordering::Relaxed) {
        0 => DEFAULT_TOL,
        bits => f64::from_bits(bits),
    }
}

pub fn set_solver_tol(tol: f64) -> Result<()> {
    SolverSettings::with_tol(tol)?;
    SOLVER_TOL_BITS.store(tol.to_bits(), Ordering::Relaxed);
    Ok(())
}

/// Number of solves and total interior point iterations so far.
pub fn solver_stats() -> (u64, u64) {
    (SOLVES.load(Ordering::Relaxed), ITERATIONS.load(Ordering::Relaxed))
}

/// `[[Re h, −Im h], [Im h, Re h]]`.
pub fn complex_embed(h: &HermMat) -> Mat {
    Mat::from_real(&embed_real(h.as_mat()))
}

/// Real embedding of any complex matrix.
pub(crate) fn embed_real(m: &Mat) -> DMatrix<f64> {
    let (r, c) = m.shape();
    let re = m.re();
    let im = m.im();
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    out.view_mut((0, 0), (r, c)).copy_from(&re);
    out.view_mut((r, c), (r, c)).copy_from(&re);
    out.view_mut((r, 0), (r, c)).copy_from(&im);
    out.view_mut((0, c), (r, c)).copy_from(&(-im));
    out
}

/// Inverse of the embedding on a (not necessarily structured) real symmetric
/// `2k×2k` matrix: `(Z₁₁ + Z₂₂)/2 + i(Z₂₁ − Z₁₂)/2`.
pub(crate) fn unembed(z: &DMatrix<f64>) -> Mat {
    let k = z.nrows() / 2;
    let a = z.view((0, 0), (k, k));
    let b = z.view((0, k), (k, k));
    let c = z.view((k, 0), (k, k));
    let d = z.view((k, k), (k, k));
    Mat::new(
        Field::Complex,
        DMatrix::from_fn(k, k, |i, j| {
            C64::new(0.5 * (a[(i, j)] + d[(i, j)]), 0.5 * (c[(i, j)] - b[(i, j)]))
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::herm_eig;

    fn psd_coef(a: &[&[f64]]) -> Coef {
        Coef::Psd(SparseSym::from_dense(&Mat::from_rows(a).re(), 0.0))
    }

    #[test]
    fn max_eigenvalue_by_lmi() {
        // min t  s.t.  t·I − diag(1,3) = X ⪰ 0, written in standard form with
        // t free: X₁₁ − t = −1, X₂₂ − t = −3, X₁₂ = 0.
        let p = ConicProblem {
            blocks: vec![BlockKind::Psd(2), BlockKind::Free(1)],
            objective: vec![(1, Coef::Vec(SparseVec { entries: vec![(0, 1.0)] }))],
            constraints: vec![
                Constraint {
                    terms: vec![
                        (0, psd_coef(&[&[1.0, 0.0], &[0.0, 0.0]])),
                        (1, Coef::Vec(SparseVec { entries: vec![(0, -1.0)] })),
                    ],
                    rhs: -1.0,
                },
                Constraint {
                    terms: vec![
                        (0, psd_coef(&[&[0.0, 0.0], &[0.0, 1.0]])),
                        (1, Coef::Vec(SparseVec { entries: vec![(0, -1.0)] })),
                    ],
                    rhs: -3.0,
                },
                Constraint {
                    terms: vec![(0, psd_coef(&[&[0.0, 0.5], &[0.5, 0.0]]))],
                    rhs: 0.0,
                },
            ],
        };
        let sol = solve(&p, 1e-9).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_objective - 3.0).abs() < 1e-7, "{}", sol.primal_objective);
        assert!(sol.dual_objective <= sol.primal_objective + 1e-9);
    }

    #[test]
    fn zero_operand_gives_zero() {
        // min t s.t. t ≥ 0 (t·I ± 0 ⪰ 0 collapses to a nonnegative scalar)
        let mut m = DualModel::new();
        let t = m.add_free();
        m.add_lmi(HermAffine::zero(2, Field::Real).plus_var(t, &Mat::identity(2, Field::Real)));
        m.add_lmi(HermAffine::zero(2, Field::Real).plus_var(t, &Mat::identity(2, Field::Real)));
        m.minimize(&[(t, 1.0)]);
        let sol = m.solve(1e-9).unwrap();
        assert!(sol.value(t).abs() < 1e-7);
    }

    #[test]
    fn simplex_lp() {
        let p = ConicProblem {
            blocks: vec![BlockKind::Nonneg(3)],
            objective: vec![(0, Coef::Vec(SparseVec { entries: vec![(0, 1.0), (1, 1.0), (2, 1.0)] }))],
            constraints: vec![Constraint {
                terms: vec![(0, Coef::Vec(SparseVec { entries: vec![(0, 1.0), (1, 1.0), (2, 1.0)] }))],
                rhs: 1.0,
            }],
        };
        let sol = solve(&p, 1e-9).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_objective - 1.0).abs() < 1e-8);
    }

    #[test]
    fn infeasible_lp_detected() {
        // x ≥ 0, x₁ + x₂ = −1
        let p = ConicProblem {
            blocks: vec![BlockKind::Nonneg(2)],
            objective: vec![(0, Coef::Vec(SparseVec { entries: vec![(0, 1.0)] }))],
            constraints: vec![Constraint {
                terms: vec![(0, Coef::Vec(SparseVec { entries: vec![(0, 1.0), (1, 1.0)] }))],
                rhs: -1.0,
            }],
        };
        let sol = solve(&p, 1e-8).unwrap();
        assert_eq!(sol.status, SolveStatus::PrimalInfeasible);
    }

    #[test]
    fn unbounded_lp_detected() {
        // min −x₁ s.t. x₁ − x₂ = 0, x ≥ 0
        let p = ConicProblem {
            blocks: vec![BlockKind::Nonneg(2)],
            objective: vec![(0, Coef::Vec(SparseVec { entries: vec![(0, -1.0)] }))],
            constraints: vec![Constraint {
                terms: vec![(0, Coef::Vec(SparseVec { entries: vec![(0, 1.0), (1, -1.0)] }))],
                rhs: 0.0,
            }],
        };
        let sol = solve(&p, 1e-8).unwrap();
        assert_eq!(sol.status, SolveStatus::DualInfeasible);
    }

    #[test]
    fn tolerance_range_enforced() {
        let p = ConicProblem::default();
        assert!(solve(&p, 1e-12).is_err());
        assert!(solve(&p, 1e-2).is_err());
    }

    #[test]
    fn embed_examples() {
        let h = HermMat::new(Mat::from_complex_rows(&[
            &[C64::new(0.0, 0.0), C64::new(0.0, 1.0)],
            &[C64::new(0.0, -1.0), C64::new(0.0, 0.0)],
        ]))
        .unwrap();
        let e = complex_embed(&h);
        let expected = Mat::from_rows(&[
            &[0.0, 0.0, 0.0, -1.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[-1.0, 0.0, 0.0, 0.0],
        ]);
        assert_eq!(e, expected);
        let eig = herm_eig(&HermMat::new(e).unwrap()).unwrap();
        for (v, w) in eig.values.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((v - w).abs() < 1e-12);
        }
        let id = complex_embed(&HermMat::identity(2, Field::Complex));
        assert_eq!(id, Mat::identity(4, Field::Real));
        let r = HermMat::diag(&[1.0, 2.0]);
        assert_eq!(complex_embed(&r), Mat::diag(&[1.0, 2.0, 1.0, 2.0]));
    }

    #[test]
    fn unembed_inverts_embed() {
        let h = Mat::from_complex_rows(&[
            &[C64::new(1.0, 0.0), C64::new(2.0, -1.0)],
            &[C64::new(2.0, 1.0), C64::new(-3.0, 0.0)],
        ]);
        let back = unembed(&embed_real(&h));
        assert!((&back - &h).max_abs() < 1e-15);
    }
}
