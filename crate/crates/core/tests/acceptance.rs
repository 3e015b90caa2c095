//! End-to-end acceptance criteria. Each test prints one PASS/FAIL line.

use std::sync::Arc;
use std::time::{Duration, Instant};

use ncbase::classical::{complexify_check, verify_taylor};
use ncbase::cones::bipolar_check;
use ncbase::ncnorm::verify_duality;
use ncbase::paulsen::{k1_membership, verify_equivalence};
use ncbase::random::{gauss, gauss_c, random_cp_map, random_element, random_herm, random_mat, random_sa_element, random_system, rng_for};
use ncbase::*;
use rand::Rng;

fn line(id: u32, name: &str, ok: bool, detail: &str) {
    println!("criterion {id:>2} {name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
}

fn finish(id: u32, name: &str, records: &[CheckRecord], elapsed: Duration, limit: Option<Duration>) {
    let mut ok = records.iter().all(|r| r.passed());
    let mut detail: Vec<String> = records
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("{} observed {:.3e} bound {:.3e}", r.name, r.observed, r.bound))
        .collect();
    if let Some(limit) = limit {
        if elapsed > limit {
            ok = false;
            detail.push(format!("time limit {limit:?} exceeded"));
        }
    }
    detail.push(format!("{} checks in {:.1}s", records.len(), elapsed.as_secs_f64()));
    line(id, name, ok, &detail.join("; "));
    assert!(ok, "criterion {id} failed: {records:#?}");
}

fn sys(gens: &[Mat]) -> Arc<OperatorSystem> {
    Arc::new(make_opsys(gens).unwrap())
}

fn diagonal(n: usize, field: Field) -> Arc<OperatorSystem> {
    sys(&(0..n).map(|i| Mat::unit(n, n, i, i, field)).collect::<Vec<_>>())
}

fn full(d: usize, field: Field) -> Arc<OperatorSystem> {
    sys(&(0..d * d).map(|k| Mat::unit(d, d, k / d, k % d, field)).collect::<Vec<_>>())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[test]
fn c01_l1_oracle() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for n in 2..=5 {
        let s = diagonal(n, Field::Real);
        let b = BaseSpec::unit_evaluation(s.clone());
        for k in 0..100 {
            let mut rng = rng_for(1, (n * 1000 + k) as u64);
            let phi = random_sa_element(&mut rng, &s, 1);
            let l1: f64 = (0..n)
                .map(|i| s.eval_map(&phi, &Mat::unit(n, n, i, i, Field::Real)).unwrap().get(0, 0).norm())
                .sum();
            worst = worst.max(rel(nc_base_norm_sa(&b, &phi).unwrap().value, l1));
        }
    }
    let recs = [CheckRecord::le("l1 norm relative error", worst, 0.0, 1e-6)];
    finish(1, "l1 duality oracle", &recs, t.elapsed(), Some(Duration::from_secs(30)));
}

#[test]
fn c02_trace_norm_oracle() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for d in [2, 3] {
        let s = full(d, Field::Complex);
        let b = BaseSpec::unit_evaluation(s.clone());
        for k in 0..100 {
            let mut rng = rng_for(2, (d * 1000 + k) as u64);
            let rho = random_herm(&mut rng, d, Field::Complex);
            let phi = s.functional_from_density(&rho);
            let eig = rho.data().clone().symmetric_eigenvalues();
            let oracle: f64 = eig.iter().map(|e| e.abs()).sum();
            worst = worst.max(rel(nc_base_norm_sa(&b, &phi).unwrap().value, oracle));
        }
    }
    let recs = [CheckRecord::le("trace norm relative error", worst, 0.0, 1e-6)];
    finish(2, "trace-norm oracle", &recs, t.elapsed(), Some(Duration::from_secs(120)));
}

#[test]
fn c03_central_duality() {
    let t = Instant::now();
    let mut recs = Vec::new();
    for (i, (d, dim)) in [(2, 3), (3, 5), (4, 8)].into_iter().enumerate() {
        let mut rng = rng_for(3, i as u64);
        let s = Arc::new(random_system(&mut rng, d, dim, Field::Complex).unwrap());
        let (r, _) = verify_duality(&s, &[1, 2, 3], 50, 30 + i as u64, 1e-5).unwrap();
        recs.extend(r);
    }
    finish(3, "central duality", &recs, t.elapsed(), Some(Duration::from_secs(600)));
}

#[test]
fn c04_positive_shortcut() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let systems = [
        full(2, Field::Complex),
        diagonal(3, Field::Real),
        Arc::new(random_system(&mut rng_for(4, 0), 3, 4, Field::Complex).unwrap()),
    ];
    for k in 0..100 {
        let mut rng = rng_for(4, 1 + k as u64);
        let s = &systems[k % 3];
        let n = 1 + k % 3;
        let (b, x) = if k % 2 == 0 {
            (BaseSpec::unit_evaluation(s.clone()), random_cp_map(&mut rng, s, n, 2))
        } else {
            // positive ambient matrices: g* g restricted to the system
            let g = random_sa_element(&mut rng, s, n);
            let lmin = ncbase::matcore::herm_eig(&s.ambient_herm(&g).unwrap()).unwrap().min();
            let x = g.add(&s.unit(n).scale(rng.random_range(0.0..1.0) - lmin));
            (BaseSpec::normalized_trace(s.clone()), x)
        };
        let norm = nc_base_norm_sa(&b, &x).unwrap().value;
        let oracle = b.f1(&x).spectral_norm();
        worst = worst.max((norm - oracle).abs() / oracle.max(1.0));
    }
    let recs = [CheckRecord::le("positive norm vs norm of f1", worst, 0.0, 1e-7)];
    finish(4, "positive shortcut", &recs, t.elapsed(), None);
}

#[test]
fn c05_base_decompose_round_trip() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut outside = 0;
    let mut singular = 0;
    let s = Arc::new(random_system(&mut rng_for(5, 0), 3, 5, Field::Complex).unwrap());
    let bases = [BaseSpec::unit_evaluation(s.clone()), BaseSpec::normalized_trace(s.clone())];
    for k in 0..100 {
        let mut rng = rng_for(5, 1 + k as u64);
        let n = 2 + k % 2;
        let b = &bases[k % 2];
        let rank_deficient = k < 20;
        let x = match (b.kind(), rank_deficient) {
            (ConeKind::DualCp, false) => random_cp_map(&mut rng, &s, n, 2),
            (ConeKind::DualCp, true) => {
                // Kraus operator killing the last coordinate
                let mut v = random_mat(&mut rng, 3, n, Field::Complex);
                for r in 0..3 {
                    v.set(r, n - 1, C64::new(0.0, 0.0));
                }
                s.compression_map(&v)
            }
            (ConeKind::Inherited, false) => {
                let g = random_sa_element(&mut rng, &s, n);
                let lmin = ncbase::matcore::herm_eig(&s.ambient_herm(&g).unwrap()).unwrap().min();
                g.add(&s.unit(n).scale(0.1 - lmin))
            }
            (ConeKind::Inherited, true) => {
                // β* (unit ⊕ 0) β with a rank-deficient β
                let mut beta = random_mat(&mut rng, n, n, Field::Complex);
                for c in 0..n {
                    beta.set(n - 1, c, C64::new(0.0, 0.0));
                }
                s.unit(n).compress(&beta, &beta)
            }
        };
        let f = HermMat::from_herm_part(&b.f1(&x));
        if ncbase::matcore::herm_eig(&f).unwrap().min() < 1e-9 {
            singular += 1;
        }
        let dec = base_decompose(b, &x, 1e-9).unwrap();
        let back = dec.k.compress(dec.alpha.as_mat(), dec.alpha.as_mat());
        worst = worst.max(back.distance(&x));
        if !b.in_base(&dec.k, 1e-7).unwrap() {
            outside += 1;
        }
    }
    let recs = [
        CheckRecord::le("round trip residual", worst, 0.0, 1e-7),
        CheckRecord::zero_count("decomposed element outside the base", outside, 1e-7),
        CheckRecord::ge("samples with singular f1", singular as f64, 20.0, 0.0),
    ];
    finish(5, "base decomposition round trip", &recs, t.elapsed(), None);
}

fn random_spaces() -> Vec<PaulsenSystem> {
    (1..=3)
        .map(|dim| {
            let v = OperatorSpaceRep::random(&mut rng_for(6, dim as u64), 2, 2, dim, Field::Complex).unwrap();
            build_paulsen(&v).unwrap()
        })
        .collect()
}

#[test]
fn c06_paulsen_sandwich() {
    let t = Instant::now();
    let mut recs = Vec::new();
    for (i, ps) in random_spaces().iter().enumerate() {
        let (r, _) = verify_equivalence(ps, &[1, 2], 50, 60 + i as u64, 1e-5).unwrap();
        recs.extend(r);
    }
    finish(6, "Paulsen norm equivalence", &recs, t.elapsed(), None);
}

#[test]
fn c07_paulsen_k1_formula() {
    let t = Instant::now();
    let mut disagree = 0;
    for (i, ps) in random_spaces().iter().enumerate() {
        for k in 0..500 {
            let mut rng = rng_for(70 + i as u64, k);
            let lambda: f64 = rng.random_range(-0.3..2.3);
            let mut x = ps.random_corner(&mut rng, 1);
            let cap = (lambda * (2.0 - lambda)).max(0.01_f64).sqrt();
            x = x.scale_re(cap * rng.random_range(0.0..1.6) / x.spectral_norm());
            let formula = k1_membership(lambda, &x, 1e-7);
            let sdp = ps.base().in_base(&ps.k1_candidate(lambda, &x).unwrap(), 1e-7).unwrap();
            if formula != sdp {
                disagree += 1;
            }
        }
    }
    let recs = [CheckRecord::zero_count("K1 formula vs SDP membership", disagree, 1e-7)];
    finish(7, "Paulsen K1 formula", &recs, t.elapsed(), None);
}

#[test]
fn c08_paulsen_diagonal_norms() {
    let t = Instant::now();
    let ps = build_paulsen(&OperatorSpaceRep::full(2, 2, Field::Complex)).unwrap();
    let scalar = |v: f64| Mat::from_fn(1, 1, Field::Complex, |_, _| C64::new(v, 0.0));
    let zero = Mat::zeros(2, 2, Field::Complex);
    let (mut diag_err, mut corner_err) = (0.0f64, 0.0f64);
    for k in 0..20 {
        let mut rng = rng_for(8, k);
        let (l, m) = (rng.random_range(0.0..3.0), rng.random_range(0.0..3.0));
        let u = ps.element(&scalar(l), &scalar(m), &zero, &zero).unwrap();
        diag_err = diag_err.max((nc_base_norm(ps.base(), &u).unwrap().value - 0.5 * (l + m)).abs());
        let x = ps.random_corner(&mut rng, 1);
        let x = x.scale_re(1.0 / x.spectral_norm());
        let u = ps.element(&scalar(1.0), &scalar(1.0), &x, &x).unwrap();
        corner_err = corner_err.max((nc_base_norm(ps.base(), &u).unwrap().value - 1.0).abs());
    }
    let recs = [
        CheckRecord::le("norm of a diagonal element vs half the trace", diag_err, 0.0, 1e-7),
        CheckRecord::le("norm of [[I, x], [x*, I]] with unit x", corner_err, 0.0, 1e-6),
    ];
    finish(8, "Paulsen diagonal norms", &recs, t.elapsed(), None);
}

#[test]
fn c09_taylor_duality() {
    let t = Instant::now();
    let mut recs = Vec::new();
    for n in 3..=5 {
        recs.extend(verify_taylor(&ClassicalBaseSpace::simplex(n), 170, 90 + n as u64, 1e-7).unwrap());
    }
    finish(9, "Taylor duality on the simplex", &recs, t.elapsed(), None);
}

#[test]
fn c10_bipolar() {
    let t = Instant::now();
    let systems = [
        diagonal(3, Field::Real),
        full(2, Field::Complex),
        Arc::new(random_system(&mut rng_for(10, 0), 3, 5, Field::Complex).unwrap()),
    ];
    let mut recs = Vec::new();
    for (i, s) in systems.iter().enumerate() {
        recs.extend(bipolar_check(s, &[1, 2], 200, 100 + i as u64, 1e-7).unwrap());
    }
    finish(10, "bipolar theorem", &recs, t.elapsed(), None);
}

#[test]
fn c11_ruan_properties() {
    let t = Instant::now();
    let s = Arc::new(random_system(&mut rng_for(11, 0), 3, 4, Field::Complex).unwrap());
    let bases = [BaseSpec::unit_evaluation(s.clone()), BaseSpec::normalized_trace(s.clone())];
    let norm = |b: &BaseSpec, x: &Element| nc_base_norm(b, x).unwrap().value;
    let mut worst = [0.0f64; 6];
    for k in 0..100 {
        let mut rng = rng_for(11, 1 + k as u64);
        let b = &bases[k % 2];
        let x = random_element(&mut rng, &s, 1);
        let y = random_element(&mut rng, &s, 1);
        let (nx, ny) = (norm(b, &x), norm(b, &y));
        worst[0] = worst[0].max(norm(b, &x.add(&y)) - nx - ny);
        let c = gauss_c(&mut rng, Field::Complex);
        worst[1] = worst[1].max((norm(b, &x.scale_c(c)) - c.norm() * nx).abs() / (1.0 + c.norm() * nx));
        let x2 = random_element(&mut rng, &s, 2);
        let alpha = random_mat(&mut rng, 2, 1 + k % 2, Field::Complex);
        let a2 = alpha.spectral_norm().powi(2);
        worst[2] = worst[2].max(norm(b, &x2.compress(&alpha, &alpha)) - a2 * norm(b, &x2));
        worst[3] = worst[3].max((norm(b, &x.direct_sum(&y)) - nx.max(ny)).abs());
        worst[4] = worst[4].max((norm(b, &s.adjoint(&x)) - nx).abs());
        let h = random_sa_element(&mut rng, &s, 1 + k % 2).scale(gauss(&mut rng).abs() + 0.1);
        worst[5] = worst[5].max((norm(b, &h) - nc_base_norm_sa(b, &h).unwrap().value).abs());
    }
    let names = [
        "triangle inequality",
        "homogeneity",
        "compression bound",
        "direct sum is the max",
        "adjoint invariance",
        "selfadjoint and general norms agree",
    ];
    let recs: Vec<CheckRecord> = names.iter().zip(worst).map(|(n, w)| CheckRecord::le(*n, w, 0.0, 1e-6)).collect();
    finish(11, "Ruan properties", &recs, t.elapsed(), None);
}

#[test]
fn c12_complexification() {
    let t = Instant::now();
    let mut rng = rng_for(12, 0);
    let a = ncbase::random::random_real(&mut rng, 3, 3);
    let g = Mat::from_real(&a);
    let sym = Mat::from_real(&(&a + a.transpose()));
    let random_real = sys(&[Mat::identity(3, Field::Real), sym, g.clone(), g.transpose()]);
    let mut recs = Vec::new();
    recs.extend(complexify_check(&diagonal(3, Field::Real), 50, 120, 1e-7).unwrap());
    recs.extend(complexify_check(&random_real, 50, 121, 1e-7).unwrap());
    finish(12, "complexification", &recs, t.elapsed(), None);
}

fn partial_trace(a: &Mat) -> Mat {
    // M_2 ⊗ M_2 → M_2, tracing out the second factor
    Mat::from_fn(2, 2, a.field(), |i, j| a.get(2 * i, 2 * j) + a.get(2 * i + 1, 2 * j + 1))
}

#[test]
fn c13_base_morphisms() {
    let t = Instant::now();
    let m4 = full(4, Field::Complex);
    let m2 = full(2, Field::Complex);
    let b4 = BaseSpec::unit_evaluation(m4.clone());
    let b2 = BaseSpec::unit_evaluation(m2.clone());
    let u = ncbase::random::random_unitary(&mut rng_for(13, 0), 2, Field::Complex);
    let run = || {
        let ptr = LinearMap::from_density_map(&m4, &m2, partial_trace);
        let conj = LinearMap::from_density_map(&m2, &m2, |a| &(&u * a) * &u.adjoint());
        let double = LinearMap::from_density_map(&m2, &m2, |a| a.scale_re(2.0));
        (
            is_base_morphism(&ptr, &b4, &b2, 1e-7).unwrap(),
            is_base_morphism(&conj, &b2, &b2, 1e-7).unwrap(),
            is_base_morphism(&double, &b2, &b2, 1e-7).unwrap(),
        )
    };
    let first = run();
    let second = run();
    let recs = [
        CheckRecord::zero_count("partial trace rejected", usize::from(!first.0), 0.0),
        CheckRecord::zero_count("unitary conjugation rejected", usize::from(!first.1), 0.0),
        CheckRecord::zero_count("trace-increasing map accepted", usize::from(first.2), 0.0),
        CheckRecord::zero_count("repeated runs differ", usize::from(first != second), 0.0),
    ];
    finish(13, "base morphisms", &recs, t.elapsed(), None);
}
