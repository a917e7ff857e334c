use homflow::catalog::{self, Entry};
use homflow::homgeom::{
    g_norm2, g_sym, koszul_ricci, mean_curvature, pushforward_by_automorphism, random_invariant_metric,
    restrict_automorphism, ricci_operator, InvariantMetric,
};
use homflow::linalg::{self, Mat};
use homflow::strata::{moment_map, BracketPoint};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::sync::OnceLock;

fn entries() -> &'static [Entry] {
    static ENTRIES: OnceLock<Vec<Entry>> = OnceLock::new();
    ENTRIES.get_or_init(|| catalog::all().expect("catalog loads"))
}

fn normal(n: usize, rng: &mut ChaCha8Rng) -> Mat {
    Mat::from_fn(n, n, |_, _| StandardNormal.sample(rng))
}

fn metric(e: &Entry, spread: f64, rng: &mut ChaCha8Rng) -> InvariantMetric {
    random_invariant_metric(e.space(), e.metric(), spread, rng).expect("invariant metric")
}

fn rel(a: &Mat, b: &Mat) -> f64 {
    linalg::max_abs(&(a - b)) / (1.0 + linalg::max_abs(b))
}

fn any_entry() -> impl Strategy<Value = usize> {
    0..entries().len()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn ricci_is_g_self_adjoint(i in any_entry(), seed in any::<u64>(), spread in 0.05f64..1.0) {
        let e = &entries()[i];
        let g = metric(e, spread, &mut ChaCha8Rng::seed_from_u64(seed));
        let gr = g.gram() * ricci_operator(e.space(), &g).unwrap();
        prop_assert!(rel(&gr, &gr.transpose()) < 1e-10);
    }

    #[test]
    fn mean_curvature_identities(i in any_entry(), seed in any::<u64>(), spread in 0.05f64..1.0) {
        let e = &entries()[i];
        let space = e.space();
        let g = metric(e, spread, &mut ChaCha8Rng::seed_from_u64(seed));
        let mc = mean_curvature(space, &g);
        let s = g_sym(&space.ad_m(&space.embed_m(&mc.vector)), &g);
        prop_assert!((s.trace() - 2.0 * mc.h).abs() <= 1e-9 * (1.0 + mc.h));
        let ric = ricci_operator(space, &g).unwrap();
        let h = &mc.vector;
        let ric_hh = (h.transpose() * g.gram() * ric * h)[(0, 0)];
        let norm = g_norm2(&s, &g);
        prop_assert!((ric_hh + norm).abs() <= 1e-8 * (1.0 + norm));
    }

    #[test]
    fn ricci_agrees_with_koszul_on_groups(i in any_entry(), seed in any::<u64>(), spread in 0.05f64..1.0) {
        let e = &entries()[i];
        prop_assume!(e.has_trivial_isotropy());
        let g = metric(e, spread, &mut ChaCha8Rng::seed_from_u64(seed));
        let a = ricci_operator(e.space(), &g).unwrap();
        // The split basis of a group is a basis change of the algebra.
        let alg = e.space().split_algebra();
        let b = koszul_ricci(alg, g.gram()).unwrap();
        prop_assert!(rel(&a, &b) < 1e-8);
    }

    #[test]
    fn ricci_is_natural_under_automorphisms(i in any_entry(), seed in any::<u64>(), t in -0.5f64..0.5) {
        let e = &entries()[i];
        prop_assume!(e.has_trivial_isotropy());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ders = e.algebra().derivation_space();
        prop_assume!(!ders.is_empty());
        let n = e.algebra().dim();
        let mut d = Mat::zeros(n, n);
        for x in &ders {
            let z: f64 = StandardNormal.sample(&mut rng);
            d += x * z;
        }
        let d = &d * (t / linalg::max_abs(&d).max(1.0));
        let a = linalg::expm(&d);
        let g = metric(e, 0.3, &mut rng);
        let pushed = pushforward_by_automorphism(e.space(), &g, &a).unwrap();
        let am = restrict_automorphism(e.space(), &a).unwrap();
        let ainv = linalg::inverse(&am).unwrap();
        let expected = &am * ricci_operator(e.space(), &g).unwrap() * ainv;
        prop_assert!(rel(&ricci_operator(e.space(), &pushed).unwrap(), &expected) < 1e-9);
    }

    #[test]
    fn moment_map_is_orthogonally_equivariant(i in any_entry(), seed in any::<u64>(), c in 0.1f64..10.0) {
        let e = &entries()[i];
        prop_assume!(e.algebra().derived_algebra().dim() > 0);
        let mu = BracketPoint::from_algebra(e.algebra());
        let n = mu.dim();
        let k = linalg::expm(&linalg::skew(&normal(n, &mut ChaCha8Rng::seed_from_u64(seed))));
        let m = moment_map(&mu).unwrap();
        prop_assert!((m.trace() + 1.0).abs() < 1e-12);
        let moved = moment_map(&mu.act(&k).unwrap()).unwrap();
        prop_assert!(rel(&moved, &(&k * &m * k.transpose())) < 1e-10);
        let scaled = moment_map(&mu.scaled(c)).unwrap();
        prop_assert!(rel(&scaled, &m) < 1e-12);
    }

    #[test]
    fn stratum_pairing_is_nonnegative(i in any_entry(), seed in any::<u64>()) {
        let e = &entries()[i];
        let Some(beta) = e.beta_frame().unwrap() else {
            return Ok(());
        };
        let s = linalg::sym(&normal(beta.dim(), &mut ChaCha8Rng::seed_from_u64(seed)));
        let q = beta.q_completion(&s).unwrap();
        let p = beta.pairing(&s, &q);
        let scale = 1.0 + s.norm_squared();
        prop_assert!(p >= -1e-10 * scale);
        prop_assert!((p - beta.pairing_closed_form(&s)).abs() <= 1e-10 * scale);
        prop_assert!(linalg::max_abs(&linalg::sym(&(&s + &q))) <= 1e-10 * scale);
    }

    #[test]
    fn catalog_labels_satisfy_trace_identities(i in any_entry()) {
        let e = &entries()[i];
        if let Some(beta) = e.beta_frame().unwrap() {
            prop_assert!(beta.identity_residuals().iter().all(|r| *r <= 1e-9));
            let n = beta.dim() as f64;
            let bp = beta.beta_plus().trace();
            prop_assert!(bp >= -1e-9 && bp <= n);
        }
    }
}
