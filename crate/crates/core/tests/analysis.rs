use subradiant::analysis::{
    corner_asymptotics, fit_power_law, optimize_period, BranchMode, BranchSelector, OptimizeOptions,
};
use subradiant::geometry::{LatticeKind, PolarizationTag};

#[test]
fn corner_rows_match_direct_basis_values() {
    // mpmath from the standing-wave definition
    let c = corner_asymptotics(&[12, 20, 40]).unwrap();
    let expected = [
        (8.811_074_949_753_085e-3, 7.680_015_285_381_946e-3),
        (2.115_580_676_850_441_3e-3, 7.652_606_761_254_551e-4),
        (2.858_433_224_305_237_5e-4, 2.812_053_233_794_326e-5),
    ];
    for (row, (s, a)) in c.rows.iter().zip(expected) {
        assert!((row.symmetric - s).abs() < 1e-13 * s, "{}", row.n);
        assert!((row.antisymmetric - a).abs() < 1e-13 * a, "{}", row.n);
    }
}

#[test]
fn fit_recovers_exponent_of_noisy_free_data() {
    let x: Vec<f64> = (4..12).map(|n| n as f64 * 10.0).collect();
    let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-1.5)).collect();
    let f = fit_power_law(&x, &y).unwrap();
    assert!((f.exponent + 1.5).abs() < 1e-12);
}

#[test]
fn envelope_never_above_tracked_branch() {
    let sel = BranchSelector::checkerboard(6);
    let tracked = OptimizeOptions { mode: BranchMode::Tracked, ..OptimizeOptions::default() };
    let envelope = OptimizeOptions { mode: BranchMode::Envelope, ..OptimizeOptions::default() };
    let t = optimize_period(LatticeKind::Square, 6, PolarizationTag::SigmaZ, &sel, (0.26, 0.30), &tracked).unwrap();
    let e = optimize_period(LatticeKind::Square, 6, PolarizationTag::SigmaZ, &sel, (0.26, 0.30), &envelope).unwrap();
    assert!(e.decay <= t.decay * (1.0 + 1e-9));
    assert!(t.grid.is_intact());
    assert!(sel.matches(&t.state) && sel.matches(&e.state));
}

#[test]
fn invalid_requests_are_reported() {
    assert!(corner_asymptotics(&[7, 9]).is_err());
    let opts = OptimizeOptions::default();
    assert!(optimize_period(LatticeKind::Square, 6, PolarizationTag::SigmaZ, &BranchSelector::any(), (0.35, 0.3), &opts).is_err());
}
