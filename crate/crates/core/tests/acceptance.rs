//! Acceptance criteria, one test per criterion.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use noncurv_core::algebra::octonion::{ad_imaginary, left_multiplication};
use noncurv_core::algebra::{
    build_g2, build_so, build_sp, build_spin7_prime, build_su, g2_characterization_distance, MatrixLieAlgebra, Octonion,
};
use noncurv_core::certify::{
    fatness_margin, first_refuted, infinitesimal_check, random_commuting_pair, scan_t, theorem_ex_sweep,
    wallach_positivity, wedge_constant, OptimizerConfig, Status,
};
use noncurv_core::curvature::{k_direct, random_invariant_map, Deformation};
use noncurv_core::homogeneous::{catalog, chain_by_key, Chain, ChainRole, Part};
use noncurv_core::linalg::nullspace;
use noncurv_core::report::{to_json, Report};
use noncurv_core::series::{
    cheeger_path, inverse_linear_direction, inverse_linear_path, k_split, richardson_derivatives, series_commuting,
    series_general, tsplit_coeffs,
};

fn within(start: Instant, limit: Duration, what: &str) {
    let e = start.elapsed();
    assert!(e < limit, "{what} took {e:?}, limit {limit:?}");
}

fn unit_p(chain: &Chain, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let xi = DVector::from_fn(chain.part_dim(Part::P), |_, _| rng.random_range(-1.0..1.0));
    chain.from_p(&xi.normalize())
}

fn random_admissible(chain: &Chain, rng: &mut ChaCha8Rng) -> Deformation {
    let s = random_invariant_map(chain, Part::P, rng);
    Deformation::from_p_matrix(chain, &s, "random-p").unwrap()
}

fn sample_t(def: &Deformation, rng: &mut ChaCha8Rng) -> f64 {
    let (lo, hi) = def.domain();
    rng.random_range(lo.max(-3.0) * 0.95..hi.min(3.0) * 0.95)
}

fn n_chains() -> Vec<Chain> {
    catalog().unwrap().into_iter().map(|c| c.chain).collect()
}

fn check_algebra(alg: &MatrixLieAlgebra) {
    let r = alg.residuals();
    assert!(r.max() < 1e-10, "{}: {r:?}", alg.name());
    assert!(alg.gram_is_positive_definite(), "{}", alg.name());
}

#[test]
fn criterion_01_algebra_suite() {
    let start = Instant::now();
    for n in 2..=10 {
        check_algebra(&build_so(n).unwrap());
    }
    for n in 2..=5 {
        check_algebra(&build_su(n).unwrap());
    }
    check_algebra(&build_sp(2).unwrap());
    let g2 = build_g2().unwrap();
    check_algebra(&g2);
    assert_eq!(g2.dim(), 14);
    check_algebra(&build_spin7_prime().unwrap());

    // so(7) splits orthogonally into g2 and the ad_q
    assert!(g2_characterization_distance().unwrap() < 1e-10);
    let so7 = build_so(7).unwrap();
    let ads: Vec<DVector<f64>> = (0..7)
        .map(|q| so7.element_of(&ad_imaginary(&Octonion::imaginary_unit(q))).unwrap())
        .collect();
    let mut span = DMatrix::zeros(21, 21);
    for (i, d) in g2.basis().iter().enumerate() {
        let v = so7.element_of(d).unwrap();
        for a in &ads {
            assert!(v.dot(a).abs() < 1e-10);
        }
        span.set_column(i, &v);
    }
    for (i, a) in ads.iter().enumerate() {
        span.set_column(14 + i, a);
    }
    assert_eq!(span.rank(1e-9), 21);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pairs: Vec<(Octonion, Octonion)> = Vec::new();
    for i in 0..7 {
        for j in (i + 1)..7 {
            pairs.push((Octonion::imaginary_unit(i), Octonion::imaginary_unit(j)));
        }
    }
    for _ in 0..20 {
        let mut a = [0.0; 8];
        let mut b = [0.0; 8];
        for k in 1..8 {
            a[k] = rng.random_range(-1.0..1.0);
            b[k] = rng.random_range(-1.0..1.0);
        }
        pairs.push((Octonion::new(a), Octonion::new(b)));
    }
    for (p, q) in &pairs {
        let (ap, aq) = (ad_imaginary(p), ad_imaginary(q));
        let c = &ap * &aq - &aq * &ap;
        assert_eq!(nullspace(&c).ncols(), 1);
        let (lp, lq) = (left_multiplication(p), left_multiplication(q));
        let l = &lp * &lq - &lq * &lp;
        assert_eq!(nullspace(&l).ncols(), 0);
    }
    within(start, Duration::from_secs(30), "criterion 1");
}

#[test]
fn criterion_02_series_matches_oracle() {
    let start = Instant::now();
    let chains = n_chains();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let c = &chains[i % chains.len()];
        let d = random_admissible(c, &mut rng);
        let (x, y) = (unit_p(c, &mut rng), unit_p(c, &mut rng));
        let s = series_general(c, &d, &x, &y).unwrap();
        for _ in 0..20 {
            let t = sample_t(&d, &mut rng);
            let k = k_direct(c, &d, t, &x, &y).unwrap();
            let rel = (s.eval(t) - k).abs() / k.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
            assert!(rel <= 1e-8, "{} t={t}: series {} oracle {k}", c.name(), s.eval(t));
        }
    }
    eprintln!("criterion 2: worst relative discrepancy {worst:e}");
    within(start, Duration::from_secs(120), "criterion 2");
}

/// Central first derivative at 0 with two Richardson steps.
fn richardson_first(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let d1 = |s: f64| (f(s) - f(-s)) / (2.0 * s);
    let v = [d1(h), d1(h / 2.0), d1(h / 4.0)];
    let r = [(4.0 * v[1] - v[0]) / 3.0, (4.0 * v[2] - v[1]) / 3.0];
    (16.0 * r[1] - r[0]) / 15.0
}

#[test]
fn criterion_03_commuting_pairs() {
    let chains = n_chains();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut done = 0;
    let mut i = 0;
    while done < 100 {
        let c = &chains[i % chains.len()];
        i += 1;
        assert!(i < 1000, "could not sample enough commuting pairs");
        let Some((x, y)) = random_commuting_pair(c, &mut rng, 20) else {
            continue;
        };
        let d = random_admissible(c, &mut rng);
        let sc = series_commuting(c, &d, &x, &y).unwrap();
        let f = |t: f64| k_direct(c, &d, t, &x, &y).unwrap();
        assert!(f(0.0).abs() < 1e-10, "{}: k(0) = {}", c.name(), f(0.0));
        let (lo, hi) = d.domain();
        let r = lo.abs().min(hi.abs()).min(1.0);
        let k1 = richardson_first(f, 0.05 * r);
        assert!(k1.abs() < 1e-10, "{}: k'(0) = {k1:e}", c.name());
        // truncation error dominates the second derivative, round-off the third
        let (k2, _) = richardson_derivatives(f, 0.01 * r);
        let (_, k3) = richardson_derivatives(f, 0.05 * r);
        let g = c.algebra();
        let a = g.lie(&d.apply(&x), &y) + g.lie(&x, &d.apply(&y));
        let ah2 = c.project(&a, Part::H).unwrap().norm_squared();
        assert!((sc.k2 - 1.5 * ah2).abs() <= 1e-12 * ah2.max(1.0));
        // an exact zero is compared at the 1e-10 level used for k(0) and k'(0)
        assert!((k2 - sc.k2).abs() <= 1e-5 * sc.k2.abs().max(1e-5), "{}: k'' fd {k2} vs {}", c.name(), sc.k2);
        assert!((k3 - sc.k3).abs() <= 1e-5 * sc.k3.abs().max(1e-5), "{}: k''' fd {k3} vs {}", c.name(), sc.k3);
        done += 1;
    }
}

#[test]
fn criterion_04_split_coefficients() {
    for i in 0..10 {
        let t = -2.0 + 0.37 * i as f64;
        let co = tsplit_coeffs(t).unwrap();
        let lhs = 4.0 * co.a_bar - co.b_bar * co.b_bar;
        assert!((lhs - (3.0 * t * t - 4.0 * t.powi(3))).abs() < 1e-12, "t={t}");
        let lhs = 4.0 * co.a * co.c - co.b * co.b;
        assert!((lhs + t.powi(3)).abs() < 1e-12, "t={t}");
    }
    let chains = n_chains();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for i in 0..100 {
        let c = &chains[i % chains.len()];
        let d = Deformation::proj_m(c);
        let (x, y) = (unit_p(c, &mut rng), unit_p(c, &mut rng));
        let t = rng.random_range(-3.0..0.9);
        let (t1, t2, t3) = k_split(c, &x, &y, t).unwrap();
        let k = k_direct(c, &d, t, &x, &y).unwrap();
        assert!((t1 + t2 + t3 - k).abs() < 1e-9, "{} t={t}: {} vs {k}", c.name(), t1 + t2 + t3);
    }
}

#[test]
fn criterion_05_symmetric_stage_sign_window() {
    let start = Instant::now();
    let cfg = OptimizerConfig::default();
    for key in ["so4-so5-so6", "sp2-su4-so7"] {
        let c = chain_by_key(key).unwrap().chain;
        let d = Deformation::proj_m(&c);
        for cert in scan_t(&c, &d, &[-4.0, -1.0, -0.25, 0.1, 0.25], &cfg).unwrap() {
            assert_eq!(cert.status, Status::Certified, "{key} t={:?} value {}", cert.t, cert.value);
            assert!(cert.value >= -1e-9);
        }
        let upper = scan_t(&c, &d, &[0.3, 0.35, 0.5], &cfg).unwrap();
        assert!(first_refuted(&upper).is_some(), "{key}: nothing refuted above 1/4");
        for cert in upper.iter().filter(|c| c.status == Status::Refuted) {
            let re = cert.reevaluate(&c, Some(&d)).unwrap().unwrap();
            assert!((re - cert.value).abs() <= 1e-9, "{key}: witness {re} vs {}", cert.value);
            assert!(re < 0.0);
        }
    }
    within(start, Duration::from_secs(300), "criterion 5");
}

#[test]
fn criterion_06_cheeger_path_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..50 {
        let n = rng.random_range(1..9);
        let h: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..20.0)).collect();
        let dir = inverse_linear_direction(&h).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let s = 1.0 / (1.0 + t);
            let tilde = inverse_linear_path(&dir, s).unwrap();
            let ht = cheeger_path(&h, t).unwrap();
            for (a, b) in tilde.iter().zip(&ht) {
                assert!((s * a - b).abs() <= 1e-12 * b.abs(), "t={t}: {} vs {b}", s * a);
            }
        }
    }
}

#[test]
fn criterion_07_wallach_flag_positivity() {
    let cfg = OptimizerConfig::default();
    let c = chain_by_key("t2-u2-su3").unwrap().chain;
    let fat = fatness_margin(&c, &cfg);
    assert!(fat.value > 0.0 && fat.status == Status::Certified, "fatness {}", fat.value);
    for t in [-1.0, 0.2] {
        let cert = wallach_positivity(&c, t, &cfg).unwrap();
        assert!(cert.value > 0.0, "t={t}: {}", cert.value);
        assert_eq!(cert.status, Status::Certified);
    }
}

#[test]
fn criterion_08_wedge_constants_and_kappa_sweep() {
    let start = Instant::now();
    let cfg = OptimizerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let triples: Vec<_> = catalog().unwrap().into_iter().filter(|c| c.role == ChainRole::WedgeExample).collect();
    assert_eq!(triples.len(), 8);
    for nc in &triples {
        let c = &nc.chain;
        let w = wedge_constant(c, &cfg);
        assert!(w.value > cfg.stop_tol && w.value.is_finite(), "{}: mu = {}", nc.key, w.value);
        assert!(w.details["C"].is_finite());
        let dm = c.part_dim(Part::M);
        let maps = [DMatrix::identity(dm, dm), random_invariant_map(c, Part::M, &mut rng)];
        for psi in &maps {
            for t in [0.02, 0.05] {
                let cert = theorem_ex_sweep(c, psi, t, &cfg).unwrap();
                assert!(cert.value >= -1e-9, "{} t={t}: {}", nc.key, cert.value);
                assert_eq!(cert.status, Status::Certified);
            }
        }
    }
    within(start, Duration::from_secs(600), "criterion 8");
}

#[test]
fn criterion_09_negative_control() {
    let cfg = OptimizerConfig::default();
    let c = chain_by_key("0-su2-su3").unwrap().chain;
    let d = Deformation::proj_m(&c);
    let cert = infinitesimal_check(&c, &d, &cfg).unwrap();
    assert_eq!(cert.status, Status::Refuted);
    assert!(cert.value < 0.0);
    let re = cert.reevaluate(&c, Some(&d)).unwrap().unwrap();
    assert!((re - cert.value).abs() <= 1e-9);
}

#[test]
fn criterion_10_deterministic_reports() {
    let cfg = OptimizerConfig {
        starts: 16,
        ..OptimizerConfig::default()
    };
    let run = || {
        let c = chain_by_key("so4-so5-so6").unwrap().chain;
        let d = Deformation::proj_m(&c);
        let mut certs = scan_t(&c, &d, &[-1.0, 0.25, 0.35], &cfg).unwrap();
        certs.push(wedge_constant(&c, &cfg));
        certs.push(infinitesimal_check(&c, &d, &cfg).unwrap());
        let w = chain_by_key("t2-u2-su3").unwrap().chain;
        certs.push(fatness_margin(&w, &cfg));
        certs.push(wallach_positivity(&w, 0.2, &cfg).unwrap());
        let e = chain_by_key("su2-so4-g2").unwrap().chain;
        certs.push(theorem_ex_sweep(&e, &DMatrix::identity(3, 3), 0.05, &cfg).unwrap());
        to_json("mixed", "proj-m", &certs)
    };
    let first = run();
    assert_eq!(first, run());
    let report = Report::from_json(&first).unwrap();
    let c = chain_by_key("so4-so5-so6").unwrap().chain;
    let d = Deformation::proj_m(&c);
    for r in report.results.iter().take(3) {
        let cert = r.to_certificate("so4-so5-so6");
        let re = cert.reevaluate(&c, Some(&d)).unwrap().unwrap();
        assert!((re - cert.value).abs() <= 1e-9);
    }
}
