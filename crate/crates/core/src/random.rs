//! Seeded samplers. Every sample draws from its own ChaCha stream
//! `(seed, index)`, so results do not depend on evaluation order.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::matcore::{Field, Mat, C64};
use crate::opsys::{make_opsys, Element, OperatorSystem};

pub type SampleRng = ChaCha8Rng;

pub fn rng_for(seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gauss<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gauss_c<R: Rng>(rng: &mut R, field: Field) -> C64 {
    match field {
        Field::Real => C64::new(gauss(rng), 0.0),
        Field::Complex => C64::new(gauss(rng), gauss(rng)) * std::f64::consts::FRAC_1_SQRT_2,
    }
}

pub fn random_mat<R: Rng>(rng: &mut R, rows: usize, cols: usize, field: Field) -> Mat {
    Mat::from_fn(rows, cols, field, |_, _| gauss_c(rng, field))
}

pub fn random_herm<R: Rng>(rng: &mut R, n: usize, field: Field) -> Mat {
    random_mat(rng, n, n, field).herm_part()
}

pub fn random_antisym<R: Rng>(rng: &mut R, n: usize) -> Mat {
    let g = random_mat(rng, n, n, Field::Real);
    (&g - &g.transpose()).scale_re(0.5)
}

/// Random PSD matrix `G G*` with `G` of shape `n × rank`.
pub fn random_psd<R: Rng>(rng: &mut R, n: usize, rank: usize, field: Field) -> Mat {
    let g = random_mat(rng, n, rank, field);
    &g * &g.adjoint()
}

pub fn random_unit_vector<R: Rng>(rng: &mut R, n: usize, field: Field) -> Mat {
    let v = random_mat(rng, n, 1, field);
    let norm = v.frobenius_norm();
    v.scale_re(1.0 / norm)
}

/// `n × m` isometry (`m ≤ n`) from the QR factor of a Gaussian matrix.
pub fn random_isometry<R: Rng>(rng: &mut R, n: usize, m: usize, field: Field) -> Mat {
    let g = random_mat(rng, n, m, field);
    let q = g.data().clone().qr().q();
    Mat::new(field, q.columns(0, m).into_owned())
}

pub fn random_unitary<R: Rng>(rng: &mut R, n: usize, field: Field) -> Mat {
    random_isometry(rng, n, n, field)
}

/// Random selfadjoint element of `M_n(S)`.
pub fn random_sa_element<R: Rng>(rng: &mut R, sys: &OperatorSystem, n: usize) -> Element {
    let coeffs = sys
        .signs()
        .iter()
        .map(|s| {
            if *s > 0.0 {
                random_herm(rng, n, sys.field())
            } else {
                random_antisym(rng, n)
            }
        })
        .collect();
    Element { level: n, coeffs }
}

/// Random element of `M_n(S)` (not selfadjoint).
pub fn random_element<R: Rng>(rng: &mut R, sys: &OperatorSystem, n: usize) -> Element {
    Element {
        level: n,
        coeffs: (0..sys.dim()).map(|_| random_mat(rng, n, n, sys.field())).collect(),
    }
}

/// Random completely positive map `a ↦ Σ V_k* a V_k` into `M_n`, restricted to `S`.
pub fn random_cp_map<R: Rng>(rng: &mut R, sys: &OperatorSystem, n: usize, kraus: usize) -> Element {
    let d = sys.ambient_dim();
    let mut out = sys.zero(n);
    for _ in 0..kraus {
        let v = random_mat(rng, d, n, sys.field()).scale_re(1.0 / ((d * kraus) as f64).sqrt());
        out = out.add(&sys.compression_map(&v));
    }
    out
}

/// Unital selfadjoint system spanned by `I` and `dim − 1` Gaussian
/// selfadjoint matrices.
pub fn random_system<R: Rng>(rng: &mut R, d: usize, dim: usize, field: Field) -> Result<OperatorSystem> {
    let mut gens = vec![Mat::identity(d, field)];
    for _ in 1..dim {
        gens.push(random_herm(rng, d, field));
    }
    make_opsys(&gens)
}

/// Dense real Gaussian matrix, for callers working with raw vectors.
pub fn random_real<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| gauss(rng))
}
