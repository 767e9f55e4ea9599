use nalgebra::DVector;
use proptest::prelude::*;
use sphdiff_core::chart::synthesis_from_chart_map;
use sphdiff_core::lossmap::BoundOperators;
use sphdiff_core::noise::{is_re_im_cross, sigma_entry_allowed};
use sphdiff_core::{
    chart_linear_map, from_chart, to_chart, BandLimit, ChartVector, CovarianceSet, OperatorSet, SpatialField,
};

fn band_limited(ops: &OperatorSet, z: &[f64]) -> SpatialField {
    let a = from_chart(&ChartVector::new(ops.band_limit(), z.to_vec()).unwrap());
    ops.synthesis(&a).unwrap()
}

fn chart_input(max_l: usize) -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (1..=max_l).prop_flat_map(|l| {
        (
            Just(l),
            prop::collection::vec(-3.0..3.0f64, l * l),
            prop::collection::vec(-3.0..3.0f64, l * l),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analysis_of_real_field_is_mirror_symmetric(l in 1usize..6, seed in prop::collection::vec(-5.0..5.0f64, 110)) {
        let bl = BandLimit::new(l).unwrap();
        let ops = OperatorSet::build(bl);
        let x = SpatialField::new(bl, seed[..bl.spatial_dim()].to_vec()).unwrap();
        let a = ops.analysis(&x).unwrap();
        prop_assert!(a.symmetry_residual() < 1e-12);
        prop_assert!(to_chart(&a).is_ok());
    }

    #[test]
    fn synthesis_then_analysis_is_identity((l, z, _) in chart_input(6)) {
        let ops = OperatorSet::build(BandLimit::new(l).unwrap());
        let x = band_limited(&ops, &z);
        let back = to_chart(&ops.analysis(&x).unwrap()).unwrap();
        for (a, b) in back.values().iter().zip(&z) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn q_inner_product_is_coefficient_inner_product((l, z1, z2) in chart_input(6)) {
        let ops = OperatorSet::build(BandLimit::new(l).unwrap());
        let (x1, x2) = (band_limited(&ops, &z1), band_limited(&ops, &z2));
        let q = ops.q_inner(&x1, &x2).unwrap();
        let c = ops.analysis(&x1).unwrap().inner(&ops.analysis(&x2).unwrap());
        let scale = ops.q_inner(&x1, &x1).unwrap().sqrt() * ops.q_inner(&x2, &x2).unwrap().sqrt();
        prop_assert!((q - c.re).abs() <= 1e-10 * scale.max(1e-300));
        prop_assert!(c.im.abs() <= 1e-10 * scale.max(1e-300));
    }

    #[test]
    fn projector_fixes_band_limited_fields((l, z, _) in chart_input(5)) {
        let ops = OperatorSet::build(BandLimit::new(l).unwrap());
        let x = band_limited(&ops, &z);
        let px = ops.project_bandlimited(&x).unwrap();
        for (a, b) in px.values().iter().zip(x.values()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn chart_maps_are_mutually_inverse((l, z, _) in chart_input(6)) {
        let ops = OperatorSet::build(BandLimit::new(l).unwrap());
        let t = chart_linear_map(&ops);
        let m = synthesis_from_chart_map(&ops);
        let zv = DVector::from_vec(z);
        prop_assert!((&t * (&m * &zv) - &zv).amax() < 1e-10);
    }
}

#[test]
fn sigma_structure_for_all_small_band_limits() {
    for l in 1..=8 {
        let bl = BandLimit::new(l).unwrap();
        let cov = CovarianceSet::build(bl).unwrap();
        let n = bl.coeff_dim();
        for i in 0..n {
            for j in 0..n {
                if !sigma_entry_allowed(i, j) || is_re_im_cross(i, j) {
                    assert_eq!(cov.sigma[(i, j)], 0.0, "L = {l}, ({i},{j})");
                }
            }
        }
        let ops = OperatorSet::build(bl);
        let bound = BoundOperators::build(&ops, &cov.sigma).unwrap();
        assert!(bound.gram_residual(&cov.sigma) < 1e-10);
        assert!(bound.right_inverse_residual() < 1e-10);
        assert!(bound.annihilation_residual() < 1e-10);
    }
}
