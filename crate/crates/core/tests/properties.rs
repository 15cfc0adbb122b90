//! Cross-module invariants: dominance chains, the bounded form of the
//! asymptotic-root error, consistency of the certified profile bound with
//! its three-term large-k expansion, and randomized structural properties.

use proptest::prelude::*;

use spectral_bounds::bounds::{self, Operator, ProblemSpec};
use spectral_bounds::dd::{self, Dd};
use spectral_bounds::extremal::{self, RootMethod};
use spectral_bounds::geometry::Domain;
use spectral_bounds::spectra::{self, OperatorKind};

#[test]
fn clamped_plate_stable_across_grid_pairs() {
    // no analytic spectrum exists for the clamped plate: two independent
    // Richardson pairs must agree on the fundamental eigenvalue
    let square = Domain::new_box(vec![1.0, 1.0]).unwrap();
    let pair_a = spectra::extrapolated_spectrum(
        &square,
        &OperatorKind::ClampedBilaplacian,
        &[64, 128],
        1,
    )
    .unwrap();
    let pair_b = spectra::extrapolated_spectrum(
        &square,
        &OperatorKind::ClampedBilaplacian,
        &[96, 192],
        1,
    )
    .unwrap();
    let (a, b) = (pair_a.eigenvalues[0], pair_b.eigenvalues[0]);
    assert!(
        (a - b).abs() <= 0.002 * b,
        "grid pairs disagree: {a} vs {b}"
    );
}

#[test]
fn dominance_chains_sampled() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
    for _ in 0..40 {
        let n = rng.gen_range(2..=4usize);
        let v: f64 = rng.gen_range(0.2..4.0);
        let i: f64 = rng.gen_range(0.05..2.0);
        let a: f64 = rng.gen_range(0.0..5.0);
        let k = rng.gen_range(1..2000u64);
        let l = rng.gen_range(1..=3u32);
        let p = ProblemSpec::new(n, Operator::PolyLaplacian { order: l }, v, i).unwrap();
        let q = ProblemSpec::new(n, Operator::Quadratic { a }, v, i).unwrap();

        assert!(bounds::melas(&p, k).value > bounds::li_yau(&p, k).value);
        assert!(
            bounds::cheng_qi_wei(&p, l, k).unwrap().value
                > bounds::levine_protter(&p, l, k).unwrap().value
        );
        assert!(
            bounds::thm3(&q, k).unwrap().value
                > bounds::levine_protter_quad(&q, k).unwrap().value
        );
        assert!(
            extremal::rigorous_quad_bound(n, v, i, a, k).unwrap().value
                > bounds::levine_protter_quad(&q, k).unwrap().value
        );
        // the slope-constrained minimizer beats the unconstrained bathtub
        assert!(
            extremal::rigorous_sum_bound(n, l, v, i, k).unwrap().value
                > bounds::levine_protter(&p, l, k).unwrap().value
        );
    }
}

#[test]
fn asymptotic_error_times_zeta5_bounded() {
    // |t_asym - t_ref| * zeta^5 stays small over zeta in [10, 1e4] for
    // n = 2..5; double-double reference roots (the raw error is far below
    // f64 resolution at large zeta)
    let zetas: [u64; 7] = [10, 40, 100, 400, 1000, 4000, 10000];
    for n in 2..=5usize {
        for &z in &zetas {
            let k_star = Dd::from_u128((n as u128 + 1) * (z as u128).pow(n as u32));
            let seed = extremal::solve_t(n, k_star.to_f64(), RootMethod::Numeric)
                .unwrap()
                .knee;
            let t_ref = dd::refine_binomial_root((n + 1) as u32, k_star, seed);
            let zd = Dd::from_f64(z as f64);
            let nf = n as f64;
            // rational coefficients formed by exact dd division
            let eta = zd - Dd::from_f64(nf - 1.0) / 24.0 / zd
                + Dd::from_f64((nf - 1.0) * (nf - 3.0) * (2.0 * nf + 1.0)) / 5760.0
                    / zd.powi(3);
            let err = (t_ref - (eta - Dd::from_f64(0.5))).abs().to_f64();
            let scaled = err * (z as f64).powi(5);
            assert!(scaled < 1e-2, "n={n}, zeta={z}: err*zeta^5 = {scaled:.3e}");
        }
    }
}

/// Double-double pipeline for `k * rigorous mean` and the three-term
/// expansion it should follow at large k. Returns
/// `(residual, binom, prefactor, k_star)` where
/// `k * mean = prefactor * binom` and `residual` is `binom` minus the
/// three displayed expansion orders.
fn expansion_residual_dd(n: usize, l: u32, volume: f64, inertia: f64, k: u64) -> (Dd, Dd, Dd) {
    let p = n as u32 + 2 * l + 1;
    let pf = p as f64;
    let omega = dd::unit_ball_volume_dd(n);
    let two_pi_n = Dd::TWO_PI.powi(n as u32);
    let v = Dd::from_f64(volume);
    let i = Dd::from_f64(inertia);
    let height = v / two_pi_n;
    let slope = (v * i).sqrt() * 2.0 / two_pi_n;
    let k_star = Dd::from_f64(k as f64) * (n as f64 + 1.0) * (slope / height).powi(n as u32)
        * two_pi_n
        / (omega * v);
    let seed = extremal::solve_t(n, k_star.to_f64(), RootMethod::Numeric)
        .unwrap()
        .knee;
    let knee = dd::refine_binomial_root((n + 1) as u32, k_star, seed);
    let binom = dd::binomial_diff_dd(knee, p);
    let zeta = (k_star / (n as f64 + 1.0)).nth_root(n as u32);
    let c = bounds::expansion_coefficient(n, l);
    // integer numerators are exact in f64; divisions stay in dd so the
    // rational coefficients carry full precision
    let three_terms = (zeta.powi(p - 1)
        + zeta.powi(p - 3) * (l as f64 * (pf - 1.0)) / 12.0
        + zeta.powi(p - 5) * ((pf - 1.0) * c) / 5760.0)
        * pf;
    let residual = binom - three_terms;
    let prefactor =
        omega * (n as f64) * height * (height / slope).powi(p - 1) / (pf * (pf - 1.0));
    (residual, binom, prefactor)
}

#[test]
fn rigorous_bound_matches_three_term_expansion() {
    let (volume, inertia) = (1.3, 0.4);
    // cross-check the dd pipeline against the f64 production bound
    for (n, l) in [(2usize, 1u32), (3, 2)] {
        let k = 1000u64;
        let (_, binom, pref) = expansion_residual_dd(n, l, volume, inertia, k);
        let mean_dd = (pref * binom / k as f64).to_f64();
        let mean = extremal::rigorous_sum_bound(n, l, volume, inertia, k)
            .unwrap()
            .value;
        assert!(
            (mean_dd - mean).abs() <= 1e-11 * mean,
            "(n={n}, l={l}): dd {mean_dd} vs f64 {mean}"
        );
    }

    // residual order: k * mean minus the three displayed terms behaves like
    // k^{1 + (2l-6)/n}. At n=2 the polynomial in k_* terminates: for l=1
    // the residual is exactly zero and for l=2 exactly constant.
    let ks: Vec<u64> = (0..7)
        .map(|i| (1e4f64 * 10f64.powf(i as f64 / 2.0)).round() as u64)
        .collect();
    for (n, l) in [(2usize, 1u32), (2, 2), (3, 1), (3, 2), (4, 1), (5, 2)] {
        let mut pts = Vec::new();
        let mut terminated = true;
        for &k in &ks {
            let (residual, binom, _) = expansion_residual_dd(n, l, volume, inertia, k);
            let rel = residual.abs().to_f64() / binom.to_f64();
            if rel > 1e-25 {
                terminated = false;
            }
            pts.push(((k as f64).ln(), residual.abs().to_f64().max(1e-300).ln()));
        }
        if terminated {
            continue; // expansion is exact for this (n, l)
        }
        let slope = {
            let n_pts = pts.len() as f64;
            let sx: f64 = pts.iter().map(|p| p.0).sum();
            let sy: f64 = pts.iter().map(|p| p.1).sum();
            let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
            (n_pts * sxy - sx * sy) / (n_pts * sxx - sx * sx)
        };
        let predicted = 1.0 + (2.0 * l as f64 - 6.0) / n as f64;
        assert!(
            (slope - predicted).abs() <= 0.3,
            "(n={n}, l={l}): residual slope {slope:.3} vs predicted {predicted:.3}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binomial_diff_equals_direct_form(t in 0.0..1e3f64, p in 2u32..20) {
        let direct = (t + 1.0).powi(p as i32) - t.powi(p as i32);
        let stable = extremal::binomial_diff(t, p).unwrap();
        prop_assert!((stable - direct).abs() <= 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn prescribed_moment_round_trip(
        n in 2usize..=6,
        v in 0.05..10.0f64,
        i in 0.01..5.0f64,
        k in 1u64..100_000,
    ) {
        let profile = extremal::profile_for(n, v, i, k).unwrap();
        let m = extremal::psi_moment(&profile, n as u32 - 1).unwrap();
        prop_assert!(
            (m - profile.prescribed_moment).abs() <= 1e-12 * profile.prescribed_moment
        );
    }

    #[test]
    fn bound_values_nondecreasing_in_k(
        v in 0.1..5.0f64,
        i in 0.02..2.0f64,
        k in 1u64..5000,
    ) {
        let spec = ProblemSpec::new(2, Operator::PolyLaplacian { order: 1 }, v, i).unwrap();
        prop_assert!(bounds::melas(&spec, k + 1).value >= bounds::melas(&spec, k).value);
        let rig = |k| extremal::rigorous_sum_bound(2, 1, v, i, k).unwrap().value;
        prop_assert!(rig(k + 1) >= rig(k));
    }

    #[test]
    fn root_residual_contract(n in 2usize..=6, k_star in 1.0..1e10f64) {
        let r = extremal::solve_t(n, k_star, RootMethod::Numeric).unwrap();
        prop_assert!(r.knee >= 0.0);
        prop_assert!(r.residual.abs() <= 1e-9 * k_star.max(1.0));
    }
}
