use std::f64::consts::PI;

use approx::assert_relative_eq;
use cewave::ce::strong_ce_residuals;
use cewave::charsys::{fresnel_roots, scalar_plane_matrix, vector_system, Cone, FieldBackground, FresnelCone};
use cewave::gravity::{analyze, Theory};
use cewave::jets::{InvariantPoint, Jet3};
use cewave::lagrangians::{builtin, Kind, LagrangianModel};
use cewave::linalg::{char_poly, EigenSystem};
use cewave::rays::{crossing_time, transport_amplitude, TransportState};
use cewave::shock1d::{shock_time, Profile1D};
use proptest::prelude::*;

fn ab(alpha: f64, beta: f64) -> InvariantPoint {
    InvariantPoint::AlphaBeta { alpha, beta }
}

fn binom(n: usize, k: usize) -> f64 {
    [
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0],
        [1.0, 3.0, 3.0, 1.0],
    ][n][k]
}

fn field() -> impl Strategy<Value = [f64; 3]> {
    [-0.4..0.4f64, -0.4..0.4f64, -0.4..0.4f64]
}

fn direction() -> impl Strategy<Value = nalgebra::Vector3<f64>> {
    [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64]
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 0.04)
        .prop_map(|v| nalgebra::Vector3::from(v).normalize())
}

/// Random expression text over `a` and `b`.
fn expr_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("a".to_string()),
        Just("b".to_string()),
        (-3.0..3.0f64).prop_map(|c| format!("{c:.3}")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("({x}) + ({y})")),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("({x}) - {y}")),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("{x} * ({y})")),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("({x}) / (3 + ({y})^2)")),
            inner.clone().prop_map(|x| format!("-({x})^2")),
            inner.clone().prop_map(|x| format!("sqrt(4 + ({x})^2)")),
            inner.prop_map(|x| format!("(1 + ({x})^2)^(3/2)")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    #[test]
    fn product_rule(alpha in -0.4..0.4f64, beta in -0.4..0.4f64) {
        let f = LagrangianModel::parse("1 + a*b - 0.3*a^2 + b^3", Kind::VectorAlphaBeta).unwrap();
        let g = LagrangianModel::parse("sqrt(2 + a + b^2)", Kind::VectorAlphaBeta).unwrap();
        let fg = LagrangianModel::parse("(1 + a*b - 0.3*a^2 + b^3) * sqrt(2 + a + b^2)", Kind::VectorAlphaBeta).unwrap();
        let p = ab(alpha, beta);
        let (jf, jg, jfg) = (f.jet(&p).unwrap(), g.jet(&p).unwrap(), fg.jet(&p).unwrap());
        for i in 0..=3 {
            for j in 0..=(3 - i) {
                let mut leibniz = 0.0;
                for k in 0..=i {
                    for l in 0..=j {
                        leibniz += binom(i, k) * binom(j, l) * jf.partial(k, l) * jg.partial(i - k, j - l);
                    }
                }
                assert_relative_eq!(jfg.partial(i, j), leibniz, epsilon = 1e-12, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn sqrt_squares_back(alpha in -0.4..0.4f64, beta in -0.4..0.4f64) {
        let u = LagrangianModel::parse("1.5 + a - b^2 + a*b^2", Kind::VectorAlphaBeta).unwrap();
        let s = LagrangianModel::parse("sqrt(1.5 + a - b^2 + a*b^2)", Kind::VectorAlphaBeta).unwrap();
        let p = ab(alpha, beta);
        let (ju, js) = (u.jet(&p).unwrap(), s.jet(&p).unwrap());
        let sq: Jet3 = js * js;
        for i in 0..=3 {
            for j in 0..=(3 - i) {
                assert_relative_eq!(sq.partial(i, j), ju.partial(i, j), epsilon = 1e-12, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn display_round_trip(text in expr_text(), pts in proptest::collection::vec((-0.9..0.9f64, -0.9..0.9f64), 5)) {
        let m = LagrangianModel::parse(&text, Kind::VectorAlphaBeta).unwrap();
        let again = LagrangianModel::parse(&m.expr().to_string(), Kind::VectorAlphaBeta).unwrap();
        for (a, b) in pts {
            let (x, y) = (m.eval(&ab(a, b)), again.eval(&ab(a, b)));
            match (x, y) {
                (Ok(x), Ok(y)) => assert_relative_eq!(x, y, epsilon = 1e-12, max_relative = 1e-12),
                (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
            }
        }
    }

    #[test]
    fn maxwell_builtin_matches_text(alpha in -2.0..2.0f64) {
        let p = InvariantPoint::Alpha { alpha };
        let a = builtin("maxwell", &[]).unwrap().jet(&p).unwrap();
        let b = LagrangianModel::parse("-a/2", Kind::VectorAlpha).unwrap().jet(&p).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn alpha_models_have_no_second_strong_condition(
        alpha in -0.4..2.0f64,
        k in -1.0..1.0f64,
        d in 0.5..2.0f64,
        c in -0.2..1.0f64,
    ) {
        let m = builtin("sqrt-family", &[k, d, c]).unwrap();
        let jet = m.jet(&InvariantPoint::Alpha { alpha }).unwrap();
        let [_, second] = strong_ce_residuals(&jet, alpha, 0.0);
        prop_assert!(second.normalized() < 1e-14);
    }

    #[test]
    fn born_infeld_quartic_is_a_perfect_square(e in field(), b in field(), u in -2.0..2.0f64, g in -2.0..2.0f64) {
        let bi = builtin("born-infeld", &[]).unwrap();
        let bg = FieldBackground::vector(e, b);
        prop_assume!(bi.in_domain(&bg.invariant_point(bi.kind()), 0.05));
        let cone = FresnelCone::from_jet(&bg, &bi.jet(&bg.invariant_point(bi.kind())).unwrap()).unwrap();
        let h = cone.k * u * u + cone.p * u * g + cone.r * g * g;
        let root = -cone.p * g / (2.0 * cone.k);
        let square = cone.k * (u - root).powi(2);
        let scale = cone.k.abs() * u * u + cone.p.abs() * (u * g).abs() + cone.r.abs() * g * g;
        prop_assert!((h - square).abs() <= 1e-8 * scale.max(1e-300));
    }

    #[test]
    fn vector_systems_are_biorthogonal_with_two_zero_modes(e in field(), b in field(), n in direction()) {
        for name in ["born-infeld", "perturbed-maxwell"] {
            let params: &[f64] = if name == "perturbed-maxwell" { &[0.1] } else { &[] };
            let m = builtin(name, params).unwrap();
            let bg = FieldBackground::vector(e, b);
            prop_assume!(m.in_domain(&bg.invariant_point(m.kind()), 0.05));
            let sys = vector_system(&bg, &m.jet(&bg.invariant_point(m.kind())).unwrap(), &n).unwrap();
            prop_assert!(sys.eigen.biorthogonality_error() < 1e-10);
            let zeros = sys.eigen.values.iter().filter(|l| l.abs() < 1e-10).count();
            prop_assert_eq!(zeros, 2);
        }
    }

    #[test]
    fn fresnel_roots_are_real(e in field(), b in field(), n in direction(), eps in 0.0..0.2f64) {
        let m = builtin("perturbed-maxwell", &[eps]).unwrap();
        let bg = FieldBackground::vector(e, b);
        let fr = fresnel_roots(&m.jet(&bg.invariant_point(m.kind())).unwrap(), &bg, &n).unwrap();
        prop_assert!(fr.max_imag < 1e-10);
    }

    #[test]
    fn quartic_cone_satisfies_euler_identity(e in field(), b in field(), p in [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64]) {
        let m = builtin("perturbed-maxwell", &[0.1]).unwrap();
        let bg = FieldBackground::vector(e, b);
        let cone = FresnelCone::from_jet(&bg, &m.jet(&bg.invariant_point(m.kind())).unwrap()).unwrap();
        let g = cone.grad_p(&p);
        let lhs: f64 = (0..4).map(|i| p[i] * g[i]).sum();
        prop_assert!((lhs - 4.0 * cone.value(&p)).abs() <= 1e-10 * cone.scale(&p).max(1e-300));
    }

    #[test]
    fn scalar_charpoly_has_closed_form(a in 0.2..1.0f64, b in -0.5..0.5f64, l1 in -2.0..-0.5f64, l2 in -1.0..1.0f64) {
        let theta = a * a * l2 - l1;
        prop_assume!(theta.abs() > 0.1);
        let m = scalar_plane_matrix(a, b, l1, l2).unwrap();
        let cp = char_poly(&m);
        let a1 = 2.0 * a * b * l2 / theta;
        let a2 = (b * b * l2 + l1) / theta;
        prop_assert_eq!(cp.len(), 3);
        assert_relative_eq!(cp[0], a2, epsilon = 1e-12, max_relative = 1e-12);
        assert_relative_eq!(cp[1], a1, epsilon = 1e-12, max_relative = 1e-12);
    }

    #[test]
    fn eigensystem_biorthogonality(entries in proptest::collection::vec(-1.0..1.0f64, 16)) {
        // Symmetric plus small skew part keeps the spectrum real and simple.
        let r = nalgebra::DMatrix::from_vec(4, 4, entries);
        let a = &r + r.transpose() + (&r - r.transpose()) * 0.05;
        if let Ok(es) = EigenSystem::new(&a) {
            prop_assert!(es.biorthogonality_error() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn shock_time_matches_crossing_time(amp in 0.5..2.0f64, shift in 0.0..6.0f64, second in -0.3..0.3f64, mean in -1.0..1.0f64) {
        let f = move |x: f64| mean + amp * (x + shift).sin() + second * (2.0 * x).cos();
        let profile = Profile1D::callable(f, 0.0, 2.0 * PI, true).unwrap();
        let ts = shock_time(&|u| u, &profile, 400).unwrap().unwrap();
        let tc = crossing_time(&|x| profile.eval(x), &profile.grid(400), 100.0).unwrap().unwrap();
        prop_assert!((ts - tc).abs() <= 0.02 * tc, "{ts} vs {tc}");
    }

    #[test]
    fn kernel_dimension_is_scale_invariant(phi in [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64], c in prop_oneof![-5.0..-0.2f64, 0.2..5.0f64]) {
        let q = -phi[0] * phi[0] + phi[1] * phi[1] + phi[2] * phi[2] + phi[3] * phi[3];
        prop_assume!(q.abs() > 0.1);
        let scaled = phi.map(|x| x * c);
        for th in [Theory::Einstein, Theory::Quadratic { p: 1.0, q: 0.0 }, Theory::FofR { fpp: 2.0 }] {
            prop_assert_eq!(analyze(&th, &phi).unwrap().kernel_dim, analyze(&th, &scaled).unwrap().kernel_dim);
        }
    }
}

#[test]
fn exceptional_transport_stays_bounded() {
    for k in -2..=2 {
        for sign in [-1.0, 1.0] {
            let pi0 = sign * 10f64.powi(k);
            let rep = transport_amplitude(&TransportState { pi0, m: 0.0, c: 0.0 }, 100.0, 0.05).unwrap();
            assert!(rep.blowup.is_none());
            assert!(rep.max_abs() <= pi0.abs() * (1.0 + 1e-12));
        }
    }
}
