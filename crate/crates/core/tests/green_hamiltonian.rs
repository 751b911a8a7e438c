use num_complex::Complex64;
use subradiant::geometry::{AtomArray, PolarizationTag};
use subradiant::green::green_projected;
use subradiant::hamiltonian::build_hamiltonian;
use subradiant::spectrum::diagonalize;

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm()
}

#[test]
fn projections_at_half_wavelength() {
    // mpmath, |R| = 0.5 along (0.3, 0.4)
    let z = Complex64::new(-0.143_029_175_875_295_59, -0.050_660_591_821_168_886);
    let c = Complex64::new(-0.087_640_355_154_247_54, 0.025_330_295_910_584_443);
    assert!(close(green_projected(0.3, 0.4, PolarizationTag::SigmaZ).unwrap(), z, 1e-12));
    assert!(close(green_projected(0.3, 0.4, PolarizationTag::SigmaPlus).unwrap(), c, 1e-12));
    assert!(close(green_projected(-0.4, 0.3, PolarizationTag::SigmaMinus).unwrap(), c, 1e-12));
}

#[test]
fn equilateral_triangle_eigenvalues() {
    let s = 0.2;
    let h = 3f64.sqrt() / 2.0 * s;
    let arr = AtomArray::from_positions(vec![[0.0, 0.0], [s, 0.0], [s / 2.0, h]], PolarizationTag::SigmaZ).unwrap();
    let ham = build_hamiltonian(&arr);
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(ham.get(i, j), ham.get(j, i));
        }
    }
    let states = diagonalize(&ham).unwrap();
    // mpmath: -i/2 - m (twice) and -i/2 + 2m with m = -1.5 G_zz(0.2)
    let (pair, single) = ((-0.384_059_000_647_327_5, 0.290_128_147_561_162_36), (0.768_118_001_294_654_9, 2.419_743_704_877_675_3));
    for (st, (d, g)) in states.iter().zip([pair, pair, single]) {
        assert!((st.detuning - d).abs() < 1e-10 && (st.decay - g).abs() < 1e-10, "{} {}", st.detuning, st.decay);
    }
}

#[test]
fn csv_dump_lists_every_entry() {
    let arr = AtomArray::from_positions(vec![[0.0, 0.0], [0.3, 0.0]], PolarizationTag::SigmaPlus).unwrap();
    let mut buf = Vec::new();
    build_hamiltonian(&arr).write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.lines().count() >= 4);
}
