use vnlab_core::calculus::eval_poly_on_tuple;
use vnlab_core::poly::{polydisc_sup, MultiPoly, SupConfig};
use vnlab_core::vncheck::{guaranteed_lhs, pv_closed_form, threshold, varopoulos_tuple, VaropoulosConfig, PV_SUP};

#[test]
fn threshold_matches_its_decimal() {
    assert!((threshold() - 0.087129).abs() < 5e-7);
    // 6(1-c)^2 = 5 exactly at the threshold
    assert!((guaranteed_lhs(threshold()) - PV_SUP).abs() < 1e-12);
}

#[test]
fn generic_calculus_matches_closed_form() {
    for c in [0.01, 0.05, threshold(), 0.3, 0.9] {
        let cfg = VaropoulosConfig::with_angles(c, [0.4, 1.7, 5.1]).unwrap();
        let t = varopoulos_tuple(&cfg).unwrap();
        let generic = eval_poly_on_tuple(&MultiPoly::varopoulos_kaijser(), &t).unwrap();
        let gap = generic.as_dense().unwrap().sub(&pv_closed_form(&cfg)).unwrap().max_abs();
        assert!(gap < 1e-12, "c = {c}: {gap}");
    }
}

#[test]
fn kaijser_varopoulos_sup_is_five() {
    let sup = polydisc_sup(&MultiPoly::varopoulos_kaijser(), &SupConfig::default()).unwrap();
    assert!(sup.lower <= PV_SUP && PV_SUP <= sup.upper, "{sup:?}");
    assert!(sup.width() < 1e-3);
}
