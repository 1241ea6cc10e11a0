use mcgl::potential::{PotentialError, PotentialSpec};
use proptest::prelude::*;

/// Symmetric quartic times `1 + k (u - 2)`, expanded to ascending
/// coefficients. Small `k` keeps the double-well shape but breaks symmetry.
fn skewed(k: f64) -> PotentialSpec {
    let base = [2.25, -6.0, 5.5, -2.0, 0.25];
    let mut c = vec![0.0; 6];
    for (j, &a) in base.iter().enumerate() {
        c[j] += a * (1.0 - 2.0 * k);
        c[j + 1] += a * k;
    }
    PotentialSpec::polynomial(c, 1e-6, 6.0).unwrap()
}

#[test]
fn tilted_quartic_family() {
    for t in [-0.2, -0.1, 0.0, 0.1, 0.2] {
        let mp = PotentialSpec::tilted_quartic(t).maxwell_point(1e-15).unwrap();
        assert!((mp.sigma0 - t).abs() < 1e-12);
        assert!(mp.b0.abs() < 1e-12);
        assert!((mp.alpha0 - 1.0).abs() < 1e-12);
        assert!((mp.beta0 - 3.0).abs() < 1e-12);
        assert!((mp.zeta0 - 2.0).abs() < 1e-12);
    }
}

#[test]
fn constant_curvature_is_rejected() {
    let p = PotentialSpec::polynomial(vec![0.0, 0.0, 1.0, 0.0, 1.0], 1e-6, 6.0).unwrap();
    assert!(matches!(p.validate(), Err(PotentialError::Hypothesis(_))));
    assert!(!p.hypothesis_violations().is_empty());
}

proptest! {
    #[test]
    fn maxwell_point_satisfies_equal_area(k in -0.08f64..0.08) {
        let p = skewed(k);
        let mp = p.maxwell_point(1e-15).unwrap();
        prop_assert!((p.df(mp.alpha0) - mp.sigma0).abs() < 1e-11);
        prop_assert!((p.df(mp.beta0) - mp.sigma0).abs() < 1e-11);
        prop_assert!((p.df(mp.zeta0) - mp.sigma0).abs() < 1e-11);
        let gap = p.f(mp.beta0) - p.f(mp.alpha0) - mp.sigma0 * (mp.beta0 - mp.alpha0);
        prop_assert!(gap.abs() < 1e-12);
        prop_assert!((mp.b0 - (p.f(mp.alpha0) - mp.sigma0 * mp.alpha0)).abs() < 1e-12);
    }

    #[test]
    fn critical_points_move_monotonically(s in -0.35f64..0.35, ds in 1e-3f64..0.02) {
        let p = PotentialSpec::symmetric_quartic();
        let a = p.critical_points(s, 0.0).unwrap();
        let b = p.critical_points(s + ds, 0.0).unwrap();
        prop_assert!(b.alpha_sigma > a.alpha_sigma);
        prop_assert!(b.beta_sigma > a.beta_sigma);
        prop_assert!(b.zeta_sigma < a.zeta_sigma);
    }

    #[test]
    fn critical_values_have_slope_minus_xi(s in -0.3f64..0.3) {
        let p = PotentialSpec::symmetric_quartic();
        let h = 1e-5;
        let value = |sigma: f64, pick: fn(&mcgl::potential::CriticalTriple) -> f64| {
            let c = p.critical_points(sigma, 0.0).unwrap();
            let z = pick(&c);
            p.f(z) - sigma * z
        };
        let c = p.critical_points(s, 0.0).unwrap();
        let picks: [(fn(&mcgl::potential::CriticalTriple) -> f64, f64); 3] = [
            (|c| c.alpha_sigma, c.alpha_sigma),
            (|c| c.zeta_sigma, c.zeta_sigma),
            (|c| c.beta_sigma, c.beta_sigma),
        ];
        for (pick, xi) in picks {
            let slope = (value(s + h, pick) - value(s - h, pick)) / (2.0 * h);
            prop_assert!((slope + xi).abs() < 1e-7, "{} vs {}", slope, -xi);
        }
    }

    #[test]
    fn well_gap_decreases(s in -0.3f64..0.4, ds in 1e-3f64..0.02) {
        let p = PotentialSpec::tilted_quartic(0.05);
        prop_assert!(p.well_gap(s + ds).unwrap() < p.well_gap(s).unwrap());
    }

    #[test]
    fn fused_evaluation_matches_separate(u in 0.0f64..6.0, t in -0.3f64..0.3) {
        let p = PotentialSpec::tilted_quartic(t);
        let (f, df) = p.f_and_df(u);
        prop_assert!((f - p.f(u)).abs() <= 1e-13 * (1.0 + f.abs()));
        prop_assert!((df - p.df(u)).abs() <= 1e-13 * (1.0 + df.abs()));
    }
}
