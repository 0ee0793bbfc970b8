use proptest::prelude::*;

use inar_equiv::equivalence::{
    canonicalize, figure1_curve, transform_a, transform_b, transform_c, UnderreportedModel,
};
use inar_equiv::processes::{
    apply_reporting, simulate_inar1, simulate_inar_inf, GeomInarSpec, Inar1Spec, ReportingSpec,
};
use inar_equiv::sampling::{binomial_thin, multinomial_allocate, RngStream};

const TOL: f64 = 1e-12;

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
}

fn abs_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

fn same_latent(a: &GeomInarSpec, b: &GeomInarSpec) -> bool {
    rel_close(a.lambda, b.lambda) && abs_close(a.beta, b.beta) && abs_close(a.gamma, b.gamma)
}

/// Interior INAR(∞) parameters: `β + γ = s ∈ (0, 0.98]`, `β = s·frac > 0`.
fn latent() -> impl Strategy<Value = GeomInarSpec> {
    (0.01f64..50.0, 0.01f64..0.98, 0.01f64..=1.0).prop_map(|(lambda, s, frac)| {
        let beta = s * frac;
        GeomInarSpec::new(lambda, beta, s - beta).unwrap()
    })
}

fn model() -> impl Strategy<Value = UnderreportedModel> {
    (latent(), 0.01f64..=1.0).prop_map(|(l, q)| UnderreportedModel::new(l, q).unwrap())
}

/// A model and a target reporting probability inside its admissible range.
fn model_and_target() -> impl Strategy<Value = (UnderreportedModel, f64)> {
    (model(), 0.0f64..=1.0).prop_map(|(m, u)| {
        let lo = m.min_reporting();
        (m, lo + u * (1.0 - lo))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn b_after_a_is_identity(lambda in 0.01f64..50.0, alpha in 0.0f64..0.98, q in 0.01f64..=1.0) {
        let s = Inar1Spec::new(lambda, alpha).unwrap();
        let image = transform_a(&s, q).unwrap();
        let back = transform_b(&image).unwrap();
        if alpha > 0.0 {
            prop_assert!(rel_close(back.lambda_star, lambda));
            prop_assert!(abs_close(back.alpha_star, alpha));
            prop_assert!(abs_close(back.q_star, q));
        }
    }

    #[test]
    fn a_after_b_is_identity(l in latent()) {
        let c = transform_b(&l).unwrap();
        let again = transform_a(&c.inar1(), c.q_star).unwrap();
        prop_assert!(same_latent(&again, &l), "{again:?} vs {l:?}");
    }

    #[test]
    fn transform_c_is_a_semigroup((m, q1) in model_and_target(), u in 0.0f64..=1.0) {
        let lo = m.min_reporting();
        let q2 = lo + u * (1.0 - lo);
        let step = transform_c(&m, q1).unwrap();
        // The admissible range is a class invariant, so q2 stays admissible.
        let two = transform_c(&step, q2.max(step.min_reporting())).unwrap();
        let direct = transform_c(&m, q2.max(step.min_reporting())).unwrap();
        prop_assert!(same_latent(&two.latent, &direct.latent), "{two:?} vs {direct:?}");
        prop_assert_eq!(two.q, direct.q);
    }

    #[test]
    fn transform_c_conserves_class_quantities((m, q) in model_and_target()) {
        let y = transform_c(&m, q).unwrap();
        prop_assert!(abs_close(y.latent.beta + y.latent.gamma, m.latent.beta + m.latent.gamma));
        prop_assert!(abs_close(y.min_reporting(), m.min_reporting()));
        prop_assert!(rel_close(y.observed_mean(), m.observed_mean()));
        prop_assert!(canonicalize(&y).unwrap().approx_eq(&canonicalize(&m).unwrap()));
        prop_assert!(y.validate().is_ok());
    }

    #[test]
    fn images_satisfy_invariants(l in latent(), q in 0.01f64..=1.0) {
        let c = transform_b(&l).unwrap();
        prop_assert!(c.lambda_star > 0.0);
        prop_assert!(c.alpha_star > 0.0 && c.alpha_star < 1.0);
        prop_assert!(c.q_star > 0.0 && c.q_star <= 1.0);
        let s = Inar1Spec::new(l.lambda, l.beta).unwrap();
        prop_assert!(transform_a(&s, q).unwrap().validate().is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn curves_are_monotone(m in model(), grid in 2usize..80) {
        let rows = figure1_curve(&m, grid).unwrap();
        let c = canonicalize(&m).unwrap();
        for w in rows.windows(2) {
            prop_assert!(w[1].q > w[0].q);
            prop_assert!(w[1].beta < w[0].beta);
            prop_assert!(w[1].gamma > w[0].gamma);
            prop_assert!(w[1].lambda < w[0].lambda);
        }
        for r in &rows {
            let y = UnderreportedModel::new(GeomInarSpec::new(r.lambda, r.beta, r.gamma).unwrap(), r.q).unwrap();
            prop_assert!(canonicalize(&y).unwrap().approx_eq(&c));
        }
    }

    #[test]
    fn thinning_is_bounded(n in 0u64..10_000, p in 0.0f64..=1.0, seed: u64) {
        let mut rng = RngStream::new(seed, 0);
        prop_assert!(binomial_thin(n, p, &mut rng).unwrap() <= n);
        prop_assert_eq!(binomial_thin(n, 0.0, &mut rng).unwrap(), 0);
    }

    #[test]
    fn multinomial_is_bounded(x in 0u64..5_000, raw in prop::collection::vec(0.0f64..1.0, 0..8), seed: u64) {
        let total: f64 = raw.iter().sum::<f64>().max(1.0);
        let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
        let counts = multinomial_allocate(x, &probs, &mut RngStream::new(seed, 1)).unwrap();
        prop_assert_eq!(counts.len(), probs.len());
        prop_assert!(counts.iter().sum::<u64>() <= x);
    }

    #[test]
    fn simulations_replay_and_respect_reporting(seed: u64, stream: u64, q in 0.05f64..=1.0, omega in 0.0f64..=1.0) {
        let spec = Inar1Spec::new(1.62, 0.52).unwrap();
        let a = simulate_inar1(&spec, 300, &mut RngStream::new(seed, stream), 0).unwrap();
        let b = simulate_inar1(&spec, 300, &mut RngStream::new(seed, stream), 0).unwrap();
        prop_assert_eq!(&a, &b);

        let rep = ReportingSpec::new(q, omega).unwrap();
        let r1 = apply_reporting(&a, &rep, &mut RngStream::new(seed, stream ^ 1)).unwrap();
        let r2 = apply_reporting(&a, &rep, &mut RngStream::new(seed, stream ^ 1)).unwrap();
        prop_assert_eq!(&r1, &r2);
        prop_assert!(r1.values().iter().zip(a.values()).all(|(o, l)| o <= l));

        let inf = GeomInarSpec::new(0.8204, 0.1716, 0.3484).unwrap();
        let c = simulate_inar_inf(&inf, 300, &mut RngStream::new(seed, stream), 50).unwrap();
        let d = simulate_inar_inf(&inf, 300, &mut RngStream::new(seed, stream), 50).unwrap();
        prop_assert_eq!(c, d);
    }
}
