// Infeasible-start primal-dual path following with the HKM search direction
// and Mehrotra predictor-corrector steps.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use super::{BlockKind, BlockValue, Coef, ConicProblem, ConicSolution, SolveStatus, SparseSym, TOL_RANGE};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl SolverSettings {
    pub fn with_tol(tol: f64) -> Result<SolverSettings> {
        if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&tol) {
            return Err(Error::InvalidArgument(format!(
                "solver tolerance {tol:e} outside [{:e}, {:e}]",
                TOL_RANGE.0, TOL_RANGE.1
            )));
        }
        Ok(SolverSettings { tol, max_iter: 120 })
    }
}

/// A PSD block and the constraints that touch it.
struct PsdBlock {
    block: usize,
    k: usize,
    c: DMatrix<f64>,
    rows: Vec<usize>,
    coefs: Vec<SparseSym>,
    // dense copies for coefficients too full for rank-one accumulation
    dense: Vec<Option<DMatrix<f64>>>,
}

/// Concatenation of all vector blocks of one kind, stored by column.
#[derive(Default)]
struct VecPart {
    n: usize,
    // (block, offset, len)
    layout: Vec<(usize, usize, usize)>,
    c: DVector<f64>,
    cols: Vec<Vec<(usize, f64)>>,
}

impl VecPart {
    fn apply(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        for (j, col) in self.cols.iter().enumerate() {
            let xj = x[j];
            if xj != 0.0 {
                for &(r, v) in col {
                    out[r] += v * xj;
                }
            }
        }
    }

    fn apply_t(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.n,
            self.cols.iter().map(|col| col.iter().map(|&(r, v)| v * y[r]).sum::<f64>()),
        )
    }
}

struct Data {
    m: usize,
    b: DVector<f64>,
    psd: Vec<PsdBlock>,
    lp: VecPart,
    free: VecPart,
    // unscaling factors
    row_scale: Vec<f64>,
    b_scale: f64,
    c_scale: f64,
    kept_rows: Vec<usize>,
    total_rows: usize,
}

struct State {
    x: Vec<DMatrix<f64>>,
    s: Vec<DMatrix<f64>>,
    xl: DVector<f64>,
    sl: DVector<f64>,
    xf: DVector<f64>,
    y: DVector<f64>,
}

struct Residuals {
    rp: DVector<f64>,
    rd: Vec<DMatrix<f64>>,
    rdl: DVector<f64>,
    rf: DVector<f64>,
}

struct Dir {
    dx: Vec<DMatrix<f64>>,
    ds: Vec<DMatrix<f64>>,
    dxl: DVector<f64>,
    dsl: DVector<f64>,
    dxf: DVector<f64>,
    dy: DVector<f64>,
}

enum Factor {
    Chol(Cholesky<f64, Dyn>),
    Lu(LU<f64, Dyn, Dyn>),
}

impl Factor {
    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            Factor::Chol(c) => Some(c.solve(rhs)),
            Factor::Lu(l) => l.solve(rhs),
        }
    }
}

fn build(p: &ConicProblem) -> std::result::Result<Data, usize> {
    let total_rows = p.constraints.len();
    // drop empty rows; an empty row with nonzero rhs is infeasible
    let mut kept_rows = Vec::new();
    let mut row_scale = Vec::new();
    for (k, con) in p.constraints.iter().enumerate() {
        let norm = con.terms.iter().map(|(_, c)| c.frobenius_sq()).sum::<f64>().sqrt();
        if norm == 0.0 {
            if con.rhs != 0.0 {
                return Err(k);
            }
            continue;
        }
        kept_rows.push(k);
        row_scale.push(norm);
    }
    let m = kept_rows.len();
    let mut b = DVector::from_iterator(m, kept_rows.iter().zip(&row_scale).map(|(&k, r)| p.constraints[k].rhs / r));
    let b_scale = b.norm().max(1.0);
    b /= b_scale;

    let mut psd = Vec::new();
    let mut psd_index = vec![usize::MAX; p.blocks.len()];
    let mut lp = VecPart::default();
    let mut free = VecPart::default();
    let mut vec_index = vec![(false, 0usize); p.blocks.len()];
    for (j, kind) in p.blocks.iter().enumerate() {
        match *kind {
            BlockKind::Psd(k) => {
                psd_index[j] = psd.len();
                psd.push(PsdBlock {
                    block: j,
                    k,
                    c: DMatrix::zeros(k, k),
                    rows: vec![],
                    coefs: vec![],
                    dense: vec![],
                });
            }
            BlockKind::Nonneg(k) => {
                vec_index[j] = (true, lp.n);
                lp.layout.push((j, lp.n, k));
                lp.n += k;
            }
            BlockKind::Free(k) => {
                vec_index[j] = (false, free.n);
                free.layout.push((j, free.n, k));
                free.n += k;
            }
        }
    }
    lp.c = DVector::zeros(lp.n);
    lp.cols = vec![vec![]; lp.n];
    free.c = DVector::zeros(free.n);
    free.cols = vec![vec![]; free.n];

    let mut c_norm_sq = 0.0;
    for (j, coef) in &p.objective {
        c_norm_sq += coef.frobenius_sq();
        match coef {
            Coef::Psd(s) => psd[psd_index[*j]].c += s.to_dense(),
            Coef::Vec(v) => {
                let (is_lp, off) = vec_index[*j];
                let part = if is_lp { &mut lp } else { &mut free };
                for &(i, val) in &v.entries {
                    part.c[off + i] += val;
                }
            }
        }
    }
    let c_scale = c_norm_sq.sqrt().max(1.0);
    for blk in psd.iter_mut() {
        blk.c /= c_scale;
    }
    lp.c /= c_scale;
    free.c /= c_scale;

    for (row, (&k, &r)) in kept_rows.iter().zip(&row_scale).enumerate() {
        for (j, coef) in &p.constraints[k].terms {
            let mut coef = coef.clone();
            coef.scale(1.0 / r);
            match coef {
                Coef::Psd(mut s) => {
                    let blk = &mut psd[psd_index[*j]];
                    // several terms on one block within a row are merged
                    if blk.rows.last() == Some(&row) {
                        let last = blk.coefs.last_mut().expect("coefficient present");
                        last.entries.extend(s.entries);
                        last.compress();
                    } else {
                        s.compress();
                        blk.rows.push(row);
                        blk.coefs.push(s);
                    }
                }
                Coef::Vec(v) => {
                    let (is_lp, off) = vec_index[*j];
                    let part = if is_lp { &mut lp } else { &mut free };
                    for &(i, val) in &v.entries {
                        part.cols[off + i].push((row, val));
                    }
                }
            }
        }
    }
    for blk in psd.iter_mut() {
        blk.dense = blk
            .coefs
            .iter()
            .map(|s| if s.entries.len() > blk.k / 2 { Some(s.to_dense()) } else { None })
            .collect();
    }
    Ok(Data {
        m,
        b,
        psd,
        lp,
        free,
        row_scale,
        b_scale,
        c_scale,
        kept_rows,
        total_rows,
    })
}

impl Data {
    fn num_cone(&self) -> f64 {
        (self.psd.iter().map(|b| b.k).sum::<usize>() + self.lp.n) as f64
    }

    /// `A(X) + A_l x_l + A_f x_f`.
    fn apply_a(&self, x: &[DMatrix<f64>], xl: &DVector<f64>, xf: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        self.apply_a_psd(x, &mut out);
        self.lp.apply(xl, &mut out);
        self.free.apply(xf, &mut out);
        out
    }

    fn apply_a_psd(&self, x: &[DMatrix<f64>], out: &mut DVector<f64>) {
        for (blk, xj) in self.psd.iter().zip(x) {
            for (r, a) in blk.rows.iter().zip(&blk.coefs) {
                out[*r] += a.dot(xj);
            }
        }
    }

    fn apply_at_psd(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.psd
            .iter()
            .map(|blk| {
                let mut out = DMatrix::zeros(blk.k, blk.k);
                for (r, a) in blk.rows.iter().zip(&blk.coefs) {
                    let yr = y[*r];
                    if yr != 0.0 {
                        for &(i, j, v) in &a.entries {
                            out[(i, j)] += yr * v;
                            if i != j {
                                out[(j, i)] += yr * v;
                            }
                        }
                    }
                }
                out
            })
            .collect()
    }

    fn residuals(&self, st: &State) -> Residuals {
        let rp = &self.b - self.apply_a(&st.x, &st.xl, &st.xf);
        let aty = self.apply_at_psd(&st.y);
        let rd = self
            .psd
            .iter()
            .zip(aty)
            .zip(&st.s)
            .map(|((blk, a), s)| &blk.c - a - s)
            .collect();
        let rdl = &self.lp.c - self.lp.apply_t(&st.y) - &st.sl;
        let rf = &self.free.c - self.free.apply_t(&st.y);
        Residuals { rp, rd, rdl, rf }
    }

    fn primal_obj(&self, st: &State) -> f64 {
        let mut v = self.lp.c.dot(&st.xl) + self.free.c.dot(&st.xf);
        for (blk, x) in self.psd.iter().zip(&st.x) {
            v += blk.c.dot(x);
        }
        v
    }

    fn c_norm(&self) -> f64 {
        (self.psd.iter().map(|b| b.c.norm_squared()).sum::<f64>() + self.lp.c.norm_squared() + self.free.c.norm_squared())
            .sqrt()
    }

    /// Schur complement `M_kl = Σ ⟨A_k, X A_l S⁻¹⟩ + A_l diag(x/s) A_lᵀ`.
    fn schur(&self, st: &State, sinv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.m, self.m);
        for ((blk, x), si) in self.psd.iter().zip(&st.x).zip(sinv) {
            let k = blk.k;
            let mut g = DMatrix::zeros(k, k);
            for a in 0..blk.rows.len() {
                match &blk.dense[a] {
                    Some(ad) => {
                        g = x * ad * si;
                    }
                    None => {
                        g.fill(0.0);
                        for &(p, q, v) in &blk.coefs[a].entries {
                            g.ger(v, &x.column(p), &si.column(q), 1.0);
                            if p != q {
                                g.ger(v, &x.column(q), &si.column(p), 1.0);
                            }
                        }
                    }
                }
                let ra = blk.rows[a];
                for bidx in 0..=a {
                    let v = blk.coefs[bidx].dot(&g);
                    let rb = blk.rows[bidx];
                    m[(rb, ra)] += v;
                    if rb != ra {
                        m[(ra, rb)] += v;
                    }
                }
            }
        }
        for (j, col) in self.lp.cols.iter().enumerate() {
            let d = st.xl[j] / st.sl[j];
            for &(r1, v1) in col {
                for &(r2, v2) in col {
                    m[(r1, r2)] += d * v1 * v2;
                }
            }
        }
        m
    }

    fn factor(&self, mut m: DMatrix<f64>) -> Option<Factor> {
        let nf = self.free.n;
        if nf == 0 {
            if let Some(c) = Cholesky::new(m.clone()) {
                return Some(Factor::Chol(c));
            }
            let diag_max = m.diagonal().amax().max(1e-300);
            let mut delta = 1e-14 * diag_max;
            for _ in 0..4 {
                for i in 0..self.m {
                    m[(i, i)] += delta;
                }
                if let Some(c) = Cholesky::new(m.clone()) {
                    return Some(Factor::Chol(c));
                }
                delta *= 100.0;
            }
            return Some(Factor::Lu(LU::new(m)));
        }
        let n = self.m + nf;
        let mut k = DMatrix::zeros(n, n);
        k.view_mut((0, 0), (self.m, self.m)).copy_from(&m);
        for (j, col) in self.free.cols.iter().enumerate() {
            for &(r, v) in col {
                k[(r, self.m + j)] += v;
                k[(self.m + j, r)] += v;
            }
        }
        let lu = LU::new(k.clone());
        if lu.is_invertible() {
            return Some(Factor::Lu(lu));
        }
        // quasi-definite regularization of the saddle system
        let diag_max = k.diagonal().amax().max(1e-300);
        let mut delta = 1e-14 * diag_max;
        for _ in 0..4 {
            let mut kr = k.clone();
            for i in 0..n {
                kr[(i, i)] += if i < self.m { delta } else { -delta };
            }
            let lu = LU::new(kr);
            if lu.is_invertible() {
                return Some(Factor::Lu(lu));
            }
            delta *= 100.0;
        }
        None
    }

    /// Solves for the search direction targeting `X S = σμ I` (with the
    /// second-order correction when `pred` is given).
    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        st: &State,
        res: &Residuals,
        sinv: &[DMatrix<f64>],
        factor: &Factor,
        sigma_mu: f64,
        pred: Option<&Dir>,
    ) -> Option<Dir> {
        // T = σμ S⁻¹ − X − ΔXa ΔSa S⁻¹,  U = T − X Rd S⁻¹
        let mut t = Vec::with_capacity(self.psd.len());
        let mut u = Vec::with_capacity(self.psd.len());
        for (j, ((x, si), rd)) in st.x.iter().zip(sinv).zip(&res.rd).enumerate() {
            let mut tj = si * sigma_mu - x;
            if let Some(p) = pred {
                tj -= &p.dx[j] * &p.ds[j] * si;
            }
            let uj = &tj - x * rd * si;
            t.push(tj);
            u.push(uj);
        }
        let nl = self.lp.n;
        let mut tl = DVector::zeros(nl);
        let mut ul = DVector::zeros(nl);
        for i in 0..nl {
            let (x, s) = (st.xl[i], st.sl[i]);
            let mut v = sigma_mu / s - x;
            if let Some(p) = pred {
                v -= p.dxl[i] * p.dsl[i] / s;
            }
            tl[i] = v;
            ul[i] = v - x / s * res.rdl[i];
        }
        let mut h = res.rp.clone();
        let mut au = DVector::zeros(self.m);
        self.apply_a_psd(&u, &mut au);
        self.lp.apply(&ul, &mut au);
        h -= au;

        let mut rhs = DVector::zeros(self.m + self.free.n);
        rhs.rows_mut(0, self.m).copy_from(&h);
        rhs.rows_mut(self.m, self.free.n).copy_from(&res.rf);
        let sol = factor.solve(&rhs)?;
        if sol.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let dy = sol.rows(0, self.m).into_owned();
        let dxf = sol.rows(self.m, self.free.n).into_owned();

        let aty = self.apply_at_psd(&dy);
        let mut dx = Vec::with_capacity(self.psd.len());
        let mut ds = Vec::with_capacity(self.psd.len());
        for (j, a) in aty.into_iter().enumerate() {
            let dsj = &res.rd[j] - a;
            let raw = &t[j] - &st.x[j] * &dsj * &sinv[j];
            dx.push((&raw + raw.transpose()) * 0.5);
            ds.push(dsj);
        }
        let dsl = &res.rdl - self.lp.apply_t(&dy);
        let dxl = DVector::from_fn(nl, |i, _| tl[i] - st.xl[i] / st.sl[i] * dsl[i]);
        Some(Dir { dx, ds, dxl, dsl, dxf, dy })
    }
}

/// Largest `α` with `X + α ΔX ⪰ 0` (infinite if the direction never leaves).
fn psd_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let Some(chol) = Cholesky::new(x.clone()) else {
        return 0.0;
    };
    let l = chol.l();
    let Some(t) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(w) = l.solve_lower_triangular(&t.transpose()) else {
        return 0.0;
    };
    let w = (&w + w.transpose()) * 0.5;
    let lmin = w.symmetric_eigenvalues().min();
    if lmin < 0.0 {
        -1.0 / lmin
    } else {
        f64::INFINITY
    }
}

fn vec_step(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(xi, d)| -xi / d)
        .fold(f64::INFINITY, f64::min)
}

fn step_lengths(st: &State, d: &Dir) -> (f64, f64) {
    let mut ap = vec_step(&st.xl, &d.dxl);
    let mut ad = vec_step(&st.sl, &d.dsl);
    for j in 0..st.x.len() {
        ap = ap.min(psd_step(&st.x[j], &d.dx[j]));
        ad = ad.min(psd_step(&st.s[j], &d.ds[j]));
    }
    (ap, ad)
}

fn complementarity(st: &State) -> f64 {
    st.x.iter().zip(&st.s).map(|(x, s)| x.dot(s)).sum::<f64>() + st.xl.dot(&st.sl)
}

fn inverse_pd(s: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let c = Cholesky::new(s.clone())?;
    let inv = c.inverse();
    Some((&inv + inv.transpose()) * 0.5)
}

fn frob_all(ms: &[DMatrix<f64>], v1: &DVector<f64>, v2: &DVector<f64>) -> f64 {
    (ms.iter().map(|m| m.norm_squared()).sum::<f64>() + v1.norm_squared() + v2.norm_squared()).sqrt()
}

/// Residuals within this factor of the tolerance count as optimal once
/// progress stalls.
const NEAR_OPTIMAL: f64 = 10.0;

pub(super) fn solve(p: &ConicProblem, settings: &SolverSettings) -> Result<ConicSolution> {
    let tol = settings.tol;
    let data = match build(p) {
        Ok(d) => d,
        Err(row) => return Ok(trivially_infeasible(p, row)),
    };
    let n_cone = data.num_cone();

    // starting point
    let mut st = State {
        x: vec![],
        s: vec![],
        xl: DVector::zeros(0),
        sl: DVector::zeros(0),
        xf: DVector::zeros(data.free.n),
        y: DVector::zeros(data.m),
    };
    for blk in &data.psd {
        let k = blk.k as f64;
        let mut xi: f64 = 10f64.max(k.sqrt());
        let mut eta: f64 = 10f64.max(k.sqrt()).max(blk.c.norm());
        for (r, a) in blk.rows.iter().zip(&blk.coefs) {
            let an = a.frobenius_sq().sqrt();
            xi = xi.max(k.sqrt() * (1.0 + data.b[*r].abs()) / (1.0 + an));
            eta = eta.max(an);
        }
        st.x.push(DMatrix::identity(blk.k, blk.k) * xi);
        st.s.push(DMatrix::identity(blk.k, blk.k) * eta);
    }
    let lp_start = 10f64.max((data.lp.n as f64).sqrt());
    st.xl = DVector::from_element(data.lp.n, lp_start);
    st.sl = DVector::from_element(data.lp.n, lp_start.max(data.lp.c.amax()));

    let b_norm = data.b.norm();
    let c_norm = data.c_norm();
    let obj_scale = data.b_scale * data.c_scale;

    let mut status = SolveStatus::Inaccurate;
    let mut iter = 0;
    let mut pinf;
    let mut dinf;
    let mut gap;
    let mut pobj;
    let mut dobj;
    let mut stalls = 0;
    // progress tracking: residuals that stop improving near the target are
    // accepted at reduced accuracy
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    let trace = std::env::var_os("NCBASE_TRACE").is_some();
    loop {
        let res = data.residuals(&st);
        pinf = res.rp.norm() / (1.0 + b_norm);
        dinf = frob_all(&res.rd, &res.rdl, &res.rf) / (1.0 + c_norm);
        pobj = data.primal_obj(&st) * obj_scale;
        dobj = data.b.dot(&st.y) * obj_scale;
        gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let mu = if n_cone > 0.0 { complementarity(&st) / n_cone } else { 0.0 };
        if trace {
            eprintln!("{iter:3} pinf {pinf:.2e} dinf {dinf:.2e} gap {gap:.2e} mu {mu:.2e} p {pobj:.10e} d {dobj:.10e}");
        }
        if pinf <= tol && dinf <= tol && (gap <= tol || n_cone == 0.0) {
            status = SolveStatus::Optimal;
            break;
        }
        let merit = pinf.max(dinf).max(if n_cone == 0.0 { 0.0 } else { gap });
        if merit < 0.99 * best {
            best = merit;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= 8 && merit <= NEAR_OPTIMAL * tol {
                if trace {
                    eprintln!("stop: stalled near optimum");
                }
                status = SolveStatus::Optimal;
                break;
            }
            if since_best >= 25 {
                if trace {
                    eprintln!("stop: no progress");
                }
                break;
            }
        }
        // infeasibility certificates
        let by = data.b.dot(&st.y);
        if by > 0.0 {
            let cert = (frob_all(
                &data.psd.iter().zip(&res.rd).map(|(b, r)| &b.c - r).collect::<Vec<_>>(),
                &(&data.lp.c - &res.rdl),
                &(&data.free.c - &res.rf),
            )) / by;
            if cert < tol && by > 1.0 / tol.sqrt() {
                status = SolveStatus::PrimalInfeasible;
                break;
            }
        }
        let cx = -data.primal_obj(&st);
        if cx > 0.0 {
            let ax = (&data.b - &res.rp).norm() / cx;
            if ax < tol && cx > 1.0 / tol.sqrt() {
                status = SolveStatus::DualInfeasible;
                break;
            }
        }
        if iter >= settings.max_iter {
            break;
        }
        iter += 1;

        let Some(sinv) = st.s.iter().map(inverse_pd).collect::<Option<Vec<_>>>() else {
            if trace {
                eprintln!("stop: sinv failed");
            }
            break;
        };
        let m = data.schur(&st, &sinv);
        let Some(factor) = data.factor(m) else {
            if trace {
                eprintln!("stop: factor failed");
            }
            break;
        };
        let Some(pred) = data.direction(&st, &res, &sinv, &factor, 0.0, None) else {
            if trace {
                eprintln!("stop: pred failed");
            }
            break;
        };
        let (ap, ad) = step_lengths(&st, &pred);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let sigma = if n_cone > 0.0 && mu > 0.0 {
            let mut c = 0.0;
            for j in 0..st.x.len() {
                c += (&st.x[j] + &pred.dx[j] * ap).dot(&(&st.s[j] + &pred.ds[j] * ad));
            }
            c += (&st.xl + &pred.dxl * ap).dot(&(&st.sl + &pred.dsl * ad));
            let mu_aff = c / n_cone;
            (mu_aff / mu).max(0.0).powi(3).min(1.0)
        } else {
            0.0
        };
        let Some(corr) = data.direction(&st, &res, &sinv, &factor, sigma * mu, Some(&pred)) else {
            if trace {
                eprintln!("stop: corr failed");
            }
            break;
        };
        let (apm, adm) = step_lengths(&st, &corr);
        let gamma = 0.9 + 0.09 * apm.min(adm).min(1.0);
        let ap = (gamma * apm).min(1.0);
        let ad = (gamma * adm).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
        for j in 0..st.x.len() {
            st.x[j] += &corr.dx[j] * ap;
            st.s[j] += &corr.ds[j] * ad;
        }
        st.xl += &corr.dxl * ap;
        st.sl += &corr.dsl * ad;
        st.xf += &corr.dxf * ap;
        st.y += &corr.dy * ad;
    }

    if status == SolveStatus::Inaccurate && pinf.max(dinf).max(gap) <= NEAR_OPTIMAL * tol {
        status = SolveStatus::Optimal;
    }
    Ok(unscale(p, &data, &st, status, pobj, dobj, gap, pinf, dinf, iter))
}

#[allow(clippy::too_many_arguments)]
fn unscale(
    p: &ConicProblem,
    data: &Data,
    st: &State,
    status: SolveStatus,
    pobj: f64,
    dobj: f64,
    gap: f64,
    pinf: f64,
    dinf: f64,
    iterations: usize,
) -> ConicSolution {
    let (bs, cs) = (data.b_scale, data.c_scale);
    let mut x = Vec::with_capacity(p.blocks.len());
    let mut s = Vec::with_capacity(p.blocks.len());
    let mut psd_iter = 0;
    for (j, kind) in p.blocks.iter().enumerate() {
        match kind {
            BlockKind::Psd(_) => {
                debug_assert_eq!(data.psd[psd_iter].block, j);
                x.push(BlockValue::Psd(&st.x[psd_iter] * bs));
                s.push(BlockValue::Psd(&st.s[psd_iter] * cs));
                psd_iter += 1;
            }
            BlockKind::Nonneg(_) => {
                let &(_, off, len) = data.lp.layout.iter().find(|l| l.0 == j).expect("layout");
                x.push(BlockValue::Vec(st.xl.rows(off, len) * bs));
                s.push(BlockValue::Vec(st.sl.rows(off, len) * cs));
            }
            BlockKind::Free(_) => {
                let &(_, off, len) = data.free.layout.iter().find(|l| l.0 == j).expect("layout");
                x.push(BlockValue::Vec(st.xf.rows(off, len) * bs));
                s.push(BlockValue::Vec(DVector::zeros(len)));
            }
        }
    }
    let mut y = DVector::zeros(data.total_rows);
    for (i, (&k, &r)) in data.kept_rows.iter().zip(&data.row_scale).enumerate() {
        y[k] = st.y[i] * cs / r;
    }
    ConicSolution {
        status,
        x,
        s,
        y,
        primal_objective: pobj,
        dual_objective: dobj,
        gap,
        primal_infeasibility: pinf,
        dual_infeasibility: dinf,
        iterations,
    }
}

fn trivially_infeasible(p: &ConicProblem, row: usize) -> ConicSolution {
    let zeros = |kind: &BlockKind| match *kind {
        BlockKind::Psd(k) => BlockValue::Psd(DMatrix::zeros(k, k)),
        BlockKind::Nonneg(k) | BlockKind::Free(k) => BlockValue::Vec(DVector::zeros(k)),
    };
    let mut y = DVector::zeros(p.constraints.len());
    y[row] = p.constraints[row].rhs.signum();
    ConicSolution {
        status: SolveStatus::PrimalInfeasible,
        x: p.blocks.iter().map(zeros).collect(),
        s: p.blocks.iter().map(zeros).collect(),
        y,
        primal_objective: f64::INFINITY,
        dual_objective: f64::INFINITY,
        gap: f64::NAN,
        primal_infeasibility: p.constraints[row].rhs.abs(),
        dual_infeasibility: 0.0,
        iterations: 0,
    }
}
