use num_complex::Complex64;
use subradiant::geometry::{generate_array, AtomArray, LatticeDescriptor, PolarizationTag};
use subradiant::scattering::{scattering_spectrum, BeamParams, BesselBeam, IncidentField};

fn plane_z() -> IncidentField {
    let zero = Complex64::new(0.0, 0.0);
    IncidentField::PlaneWave { polarization: [zero, zero, Complex64::new(1.0, 0.0)], amplitude: 1.0 }
}

#[test]
fn dimer_symmetric_resonance() {
    // mpmath: symmetric mode at d = 2.5970938737257061, decay 1.9226968483822758;
    // on resonance sigma / sigma_0 = 2 / decay
    let arr = AtomArray::from_positions(vec![[0.0, 0.0], [0.1, 0.0]], PolarizationTag::SigmaZ).unwrap();
    let d = 2.597_093_873_725_706;
    let s = scattering_spectrum(&arr, &plane_z(), &[d], None).unwrap();
    assert!((s.total[0] - 1.040_205_585_026_451_6).abs() < 1e-10, "{}", s.total[0]);
    let sym = s.mode_decay.iter().position(|g| (g - 1.922_696_848_382_275_8).abs() < 1e-10).unwrap();
    assert!((s.modal[sym][0] - s.total[0]).abs() < 1e-10);
    assert!(s.modal[1 - sym][0].abs() < 1e-10);
}

#[test]
fn single_atom_lorentzian() {
    let arr = AtomArray::from_positions(vec![[0.0, 0.0]], PolarizationTag::SigmaZ).unwrap();
    let grid = [-3.0, -0.5, 0.0, 0.25, 2.0];
    let s = scattering_spectrum(&arr, &plane_z(), &grid, None).unwrap();
    for (d, v) in grid.iter().zip(&s.total) {
        assert!((v - 1.0 / (1.0 + 4.0 * d * d)).abs() < 1e-12);
    }
}

#[test]
fn beam_field_rotates_with_its_winding() {
    let beam = BesselBeam::new(BeamParams::new(4, 1)).unwrap();
    assert_eq!(beam.measured_winding, 5);
    let (x, y) = (0.31, 0.12);
    let ez = beam.field(x, y).unwrap()[2];
    for phi in [0.4, 1.3, 2.9] {
        let (c, s) = (f64::cos(phi), f64::sin(phi));
        let rotated = beam.field(c * x - s * y, s * x + c * y).unwrap()[2];
        let expected = ez * Complex64::from_polar(1.0, 5.0 * phi);
        assert!((rotated - expected).norm() < 1e-8 * ez.norm(), "{phi}");
    }
}

#[test]
fn sum_rule_for_beam_on_array() {
    let arr = generate_array(LatticeDescriptor::square(4, 0.27), PolarizationTag::SigmaZ).unwrap();
    let beam = BesselBeam::new(BeamParams::new(3, 1)).unwrap().centered_at(arr.centroid());
    let grid: Vec<f64> = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
    let s = scattering_spectrum(&arr, &IncidentField::Bessel(beam), &grid, None).unwrap();
    assert!(s.sum_rule_error() < 1e-8);
    assert!(s.total.iter().all(|v| *v > 0.0));
}
