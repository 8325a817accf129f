use std::f64::consts::PI;

use lownerlab::integrals::{tricomi_u, unit_ball_volume};
use lownerlab::interpolation::grid_points;
use lownerlab::legendre::duality_check;
use lownerlab::{
    comparison_band, john_decomposition, mvee_centered, psi_s_eval, ratio_bound, solve_lowner_s, v_psi,
    v_psi_s_closed, AdmissibleProfile, DEllipsoid, LogDensity, QuadratureSpec, SParam, SolverOptions,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

// V_Ψ(ψ_s, d) from 30-digit quadrature of the radial integral (mpmath).
const VPSI: [(f64, usize, f64); 16] = [
    (0.5, 1, 2.9710744636150250734),
    (0.5, 2, 11.138942617430564033),
    (0.5, 3, 49.599733964531030106),
    (0.5, 4, 252.13637115025459214),
    (1.0, 1, 3.5449077018110320546),
    (1.0, 2, 14.947296212452975769),
    (1.0, 3, 72.388263958812201989),
    (1.0, 4, 392.34090897014536201),
    (3.0, 1, 5.1166335397324424424),
    (3.0, 2, 28.73621707806367815),
    (3.0, 3, 175.21072390092692885),
    (3.0, 4, 1148.8614046392784007),
    (10.0, 1, 8.4367790408778836088),
    (10.0, 2, 73.97319725848670751),
    (10.0, 3, 672.59862661317255018),
    (10.0, 4, 6329.1641189635421521),
];

#[test]
fn vpsi_matches_reference_values() {
    let spec = QuadratureSpec::default();
    for (s, d, want) in VPSI {
        let quad = v_psi(&AdmissibleProfile::psi(SParam::Finite(s)), d, &spec).unwrap();
        let closed = v_psi_s_closed(s, d).unwrap();
        assert!((quad - want).abs() <= 1e-9 * want, "s={s} d={d}: {quad}");
        assert!((closed - want).abs() <= 1e-9 * want, "s={s} d={d}: {closed}");
    }
}

#[test]
fn tricomi_reference_values() {
    // mpmath hyperu
    for (a, b, z, want) in [
        (1.0, 2.0, 1.0, 1.0),
        (0.5, 3.25, 0.5, 6.1787698979830035286),
        (2.5, 5.0, 3.0, 0.16397634587706493098),
        (1.5, 4.0, 10.0, 0.039160144167024541696),
    ] {
        let u = tricomi_u(a, b, z).unwrap();
        assert!((u - want).abs() <= 1e-10 * want, "U({a};{b};{z}) = {u}");
    }
}

#[test]
fn psi_and_bound_reference_values() {
    let p = psi_s_eval(SParam::Finite(1.0), 1.0).unwrap();
    assert!((p - 0.37742807622009312446).abs() < 1e-14);
    assert!((ratio_bound(3) - 7.9623470281340436912).abs() < 1e-12);
    assert!((ratio_bound(5) - 9.8716653828651441807).abs() < 1e-12);
    assert!((unit_ball_volume(3) / (4.0 * PI / 3.0) - 1.0).abs() < 1e-13);
}

fn spd(d: usize, entries: &[f64], lo: f64) -> DMatrix<f64> {
    let b = DMatrix::from_iterator(d, d, entries.iter().copied().take(d * d));
    &b * b.transpose() + DMatrix::identity(d, d) * lo
}

fn ellipsoid_strategy(d: usize) -> impl Strategy<Value = DEllipsoid> {
    (
        prop::collection::vec(-0.8f64..0.8, d * d),
        0.3f64..3.0,
        prop::collection::vec(-1.0f64..1.0, d),
    )
        .prop_map(move |(m, h, c)| DEllipsoid::new(spd(d, &m, 0.3), h, DVector::from_vec(c)).unwrap())
}

fn quick() -> SolverOptions {
    SolverOptions::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn polar_of_height_is_ellipsoidal(e in ellipsoid_strategy(2), k in 0usize..3) {
        let s = [SParam::Finite(0.0), SParam::Finite(1.0), SParam::Finite(2.0)][k];
        let e = DEllipsoid::new(e.matrix.clone(), 1.0, DVector::zeros(2)).unwrap();
        let grid = grid_points(2, -3.0, 3.0, 15 * 15);
        prop_assert!(duality_check(s, &e, &grid).unwrap() < 1e-5);
    }

    #[test]
    fn comparison_band_is_ordered(d in 1usize..5, s1 in 0.0f64..5.0, gap in 0.1f64..20.0) {
        let (lo, hi) = comparison_band(d, s1, s1 + gap).unwrap();
        prop_assert!(lo > 0.0 && hi > lo);
    }

    #[test]
    fn mvee_contains_points_and_decomposes(raw in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 3..10)) {
        let mut pts: Vec<DVector<f64>> = raw.iter().map(|p| DVector::from_vec(p.clone())).collect();
        pts.extend(raw.iter().map(|p| -DVector::from_vec(p.clone())));
        let spread = pts.iter().map(|p| p * p.transpose()).fold(DMatrix::zeros(2, 2), |a, b| a + b);
        prop_assume!(spread.determinant() > 1e-2);
        let m = mvee_centered(&pts, 1e-9).unwrap();
        for p in &pts {
            prop_assert!((p.transpose() * &m * p)[(0, 0)] <= 1.0 + 1e-6);
        }
        let j = john_decomposition(&pts, &m, 1e-7).unwrap();
        prop_assert!(j.frobenius_residual < 1e-6 && j.trace_residual < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn lowner_of_min_of_two_lies_above(e1 in ellipsoid_strategy(2), e2 in ellipsoid_strategy(2)) {
        let f = LogDensity::min_of(vec![
            LogDensity::ellipsoidal(SParam::Finite(0.0), e1),
            LogDensity::ellipsoidal(SParam::Finite(0.0), e2),
        ]).unwrap();
        let r = solve_lowner_s(&f, SParam::Finite(0.0), &quick()).unwrap();
        let mass = f.integral(&QuadratureSpec::default()).unwrap();
        prop_assert!(r.integral >= mass * (1.0 - 1e-6));
        prop_assert!(r.optimum.height >= f.sup_norm() * (1.0 - 1e-6));
    }

    #[test]
    fn lowner_commutes_with_scaling_and_translation(
        e in ellipsoid_strategy(2),
        c in 0.2f64..5.0,
        v in prop::collection::vec(-2.0f64..2.0, 2),
    ) {
        let f = LogDensity::height(SParam::Finite(0.0), e);
        let v = DVector::from_vec(v);
        let g = f.scaled_translated(c, &v).unwrap();
        let rf = solve_lowner_s(&f, SParam::Finite(1.0), &quick()).unwrap();
        let rg = solve_lowner_s(&g, SParam::Finite(1.0), &quick()).unwrap();
        prop_assert!((rg.integral - c * rf.integral).abs() <= 1e-6 * rg.integral);
        prop_assert!((&rg.optimum.center - &rf.optimum.center - &v).norm() <= 1e-4 * (1.0 + v.norm()));
    }
}
