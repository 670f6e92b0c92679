use std::f64::consts::PI;

use qrc_web::{ground_state, sigma_z_trace, speckle};

#[test]
fn speckle_is_reproducible_and_non_negative() {
    let a = speckle(256, 8.0, 0.02, 1, 3, false).unwrap();
    assert_eq!(a.len(), 256);
    assert!(a.iter().all(|v| *v >= 0.0));
    assert_eq!(a, speckle(256, 8.0, 0.02, 1, 3, false).unwrap());
    assert!(speckle(256, 1.0, 0.02, 1, 3, false).is_err());
}

#[test]
fn empty_box_energy_uses_unit_spacing() {
    let e = ground_state(&vec![0.0; 255], false).unwrap();
    let exact = PI * PI / (2.0 * 256.0 * 256.0);
    assert!(((e - exact) / exact).abs() < 1e-4);
    assert!(ground_state(&vec![0.5; 64], true).unwrap() - 0.5 < 1e-12);
}

#[test]
fn trace_has_one_row_per_step() {
    let v = speckle(64, 8.0, 0.02, 1, 0, true).unwrap();
    let t = sigma_z_trace(&v, 3, 10.0, 2021).unwrap();
    assert_eq!(t.len(), 64 * 3);
    assert!(t.iter().all(|z| z.abs() <= 1.0 + 1e-12));
    assert!(sigma_z_trace(&v, 9, 10.0, 2021).is_err());
}
