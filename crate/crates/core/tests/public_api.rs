use approx::assert_relative_eq;
use num_complex::Complex64;
use planar_qed::analysis::{find_barrier, levitation_check, Grid, SweepSpec};
use planar_qed::asymptotics::interface_limits;
use planar_qed::green::QuadratureConfig;
use planar_qed::ideal::{ideal_decay, ideal_potential};
use planar_qed::observables::{decay_rate, vdw_force, vdw_potential, Backend, Evaluator};
use planar_qed::units::{AtomSI, DipoleOrientation, MediumResponse};
use planar_qed::Error;

fn lhm(eta: f64) -> MediumResponse {
    MediumResponse::lhm(eta).unwrap()
}

#[test]
fn free_functions_agree_with_evaluator() {
    let m = lhm(1e-2);
    let o = DipoleOrientation::random();
    let cfg = QuadratureConfig::default();
    let eval = Evaluator::new(m, 5.0, o, cfg, None).unwrap();
    for z in [0.3, 2.0, 7.5] {
        let p = eval.point(z).unwrap();
        assert_relative_eq!(p.potential, vdw_potential(z, &m, 5.0, &o, &cfg).unwrap(), max_relative = 1e-12);
        assert_relative_eq!(p.force, vdw_force(z, &m, 5.0, &o, &cfg).unwrap(), max_relative = 1e-12);
        assert_relative_eq!(p.rate, decay_rate(z, &m, 5.0, &o, &cfg).unwrap(), max_relative = 1e-12);
    }
}

#[test]
fn lossless_slab_uses_closed_forms() {
    let m = MediumResponse::new(Complex64::new(-1.0, 0.0), Complex64::new(-1.0, 0.0)).unwrap();
    let o = DipoleOrientation::perpendicular();
    let eval = Evaluator::new(m, 5.0, o, QuadratureConfig::default(), None).unwrap();
    assert_eq!(eval.backend(), Backend::Ideal);
    let p = eval.point(8.0).unwrap();
    assert_eq!(p.potential, ideal_potential(8.0, 5.0, &o).unwrap());
    assert_eq!(eval.rate_point(3.0).unwrap().rate, ideal_decay(3.0, 5.0, &o).unwrap());
    assert!(matches!(eval.point(3.0), Err(Error::Divergent { .. })));
}

#[test]
fn low_loss_numeric_approaches_closed_form_far_from_slab() {
    let o = DipoleOrientation::parallel();
    let cfg = QuadratureConfig::default();
    let ideal = ideal_decay(9.0, 5.0, &o).unwrap();
    let coarse = (decay_rate(9.0, &lhm(1e-2), 5.0, &o, &cfg).unwrap() - ideal).abs();
    let fine = (decay_rate(9.0, &lhm(1e-4), 5.0, &o, &cfg).unwrap() - ideal).abs();
    assert!(fine < coarse, "{fine} vs {coarse}");
    assert!(fine < 0.02 * ideal);
}

#[test]
fn thick_lossy_slab_near_surface_matches_interface() {
    let m = MediumResponse::new(Complex64::new(3.0, 0.5), Complex64::new(1.0, 0.0)).unwrap();
    let o = DipoleOrientation::perpendicular();
    let eval = Evaluator::new(m, 50.0, o, QuadratureConfig::default(), None).unwrap();
    let z = 2e-3;
    let lim = interface_limits(z, &m, &o).unwrap();
    let p = eval.point(z).unwrap();
    assert_relative_eq!(p.potential, lim.potential, max_relative = 1e-2);
    assert_relative_eq!(p.rate, lim.rate, max_relative = 1e-2);
}

#[test]
fn barrier_and_levitation_pipeline() {
    let sweep = SweepSpec::new(0.05, 5.0, 120, Grid::Linear).unwrap();
    let r = find_barrier(&lhm(1e-3), 5.0, &DipoleOrientation::parallel(), &sweep, &QuadratureConfig::default())
        .unwrap();
    assert!(r.exists && !r.at_boundary);
    assert!(r.height > 1.0 && r.peak_force_inward > 0.0);
    let atom = AtomSI::new(6e8, 1e-7, 1.67e-27).unwrap();
    assert!(levitation_check(&r, &atom).unwrap().levitates);

    let none = find_barrier(&lhm(1e-1), 5.0, &DipoleOrientation::parallel(), &sweep, &QuadratureConfig::default())
        .unwrap();
    assert!(!none.exists);
    assert!(matches!(levitation_check(&none, &atom), Err(Error::NotApplicable(_))));
}

#[test]
fn active_media_are_rejected() {
    let e = MediumResponse::new(Complex64::new(-1.0, -1e-3), Complex64::new(-1.0, 1e-3)).unwrap_err();
    assert!(matches!(e, Error::ActiveMedium { .. }));
    assert!(!e.is_numerical());
}
