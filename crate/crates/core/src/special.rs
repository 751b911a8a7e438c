//! Special functions needed by the lattice sums and the beam model.
//!
//! Everything here is evaluated on the real axis (Bessel functions) or on the
//! unit circle (polylogarithms), which is all the physics needs. Accuracy is
//! close to machine precision; see the unit tests for the reference values.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Apery's constant, zeta(3).
pub const ZETA_3: f64 = 1.202_056_903_159_594_3;

/// Riemann zeta at an even integer argument `2n`, `n >= 1`.
fn zeta_even(two_n: u32) -> f64 {
    // Direct summation converges like 2^{-2n}; the first terms matter only for small n.
    match two_n {
        2 => PI * PI / 6.0,
        4 => PI.powi(4) / 90.0,
        6 => PI.powi(6) / 945.0,
        _ => {
            let mut s = 1.0;
            let mut k = 2.0_f64;
            loop {
                let t = k.powi(-(two_n as i32));
                s += t;
                if t < 1e-18 {
                    break;
                }
                k += 1.0;
            }
            s
        }
    }
}

/// Reduce an angle to `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Clausen function `Cl2(theta) = sum_k sin(k theta) / k^2`.
pub fn clausen_sin2(theta: f64) -> f64 {
    let t = wrap_angle(theta);
    if t == 0.0 {
        return 0.0;
    }
    let a = t.abs();
    // Cl2(t) = t - t ln|t| + sum_n 2 zeta(2n) (t / 2pi)^{2n} t / (2n (2n + 1))
    let ratio = (t / (2.0 * PI)).powi(2);
    let mut pow = 1.0;
    let mut s = t - t * a.ln();
    for n in 1..60u32 {
        pow *= ratio;
        let m = 2.0 * n as f64;
        let term = 2.0 * zeta_even(2 * n) * pow * t / (m * (m + 1.0));
        s += term;
        if term.abs() < 1e-17 * s.abs().max(1e-300) {
            break;
        }
    }
    s
}

/// `sum_k cos(k theta) / k^3`.
pub fn clausen_cos3(theta: f64) -> f64 {
    let t = wrap_angle(theta);
    if t == 0.0 {
        return ZETA_3;
    }
    let a = t.abs();
    // Term-wise integral of the Cl2 series: zeta(3) - int_0^t Cl2.
    let ratio = (t / (2.0 * PI)).powi(2);
    let mut pow = 1.0;
    let mut s = ZETA_3 - 0.75 * t * t + 0.5 * t * t * a.ln();
    for n in 1..60u32 {
        pow *= ratio;
        let m = 2.0 * n as f64;
        let term = 2.0 * zeta_even(2 * n) * pow * t * t / (m * (m + 1.0) * (m + 2.0));
        s -= term;
        if term.abs() < 1e-17 {
            break;
        }
    }
    s
}

/// Polylogarithms `Li_1, Li_2, Li_3` of `e^{i theta}`.
///
/// `Li_1` diverges at `theta = 0 (mod 2pi)`; callers must stay away from that point.
pub fn polylog_unit_circle(theta: f64) -> [Complex64; 3] {
    let t = theta.rem_euclid(2.0 * PI);
    // Real part of Li_1 and the closed-form Bernoulli polynomials hold on [0, 2pi).
    let li1 = Complex64::new(-(2.0 * (t / 2.0).sin()).abs().ln(), (PI - t) / 2.0);
    let li2 = Complex64::new(
        PI * PI / 6.0 - PI * t / 2.0 + t * t / 4.0,
        clausen_sin2(t),
    );
    let li3 = Complex64::new(
        clausen_cos3(t),
        PI * PI * t / 6.0 - PI * t * t / 4.0 + t * t * t / 12.0,
    );
    [li1, li2, li3]
}

/// Modified Bessel functions of the second kind `(K_0(x), K_1(x))` for `x > 0`.
pub fn bessel_k01(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "bessel_k01 requires a positive argument");
    if x <= 2.0 {
        bessel_k01_series(x)
    } else if x > 700.0 {
        (0.0, 0.0)
    } else {
        bessel_k01_integral(x)
    }
}

/// Ascending series around the origin.
fn bessel_k01_series(x: f64) -> (f64, f64) {
    let y = x * x / 4.0;
    let l = (x / 2.0).ln() + EULER_GAMMA;
    // I0, I1 and the harmonic-number sums
    let mut term = 1.0; // y^k / (k!)^2
    let mut i0 = 0.0;
    let mut k0_tail = 0.0;
    let mut i1 = 0.0;
    let mut k1_tail = 0.0;
    let mut harm = 0.0; // H_k
    for k in 0..40 {
        let kf = k as f64;
        if k > 0 {
            term *= y / (kf * kf);
            harm += 1.0 / kf;
        }
        i0 += term;
        k0_tail += term * harm;
        // I1 = (x/2) sum y^k / (k! (k+1)!)
        let t1 = term / (kf + 1.0);
        i1 += t1;
        // K1 series: (x/4) sum y^k/(k!(k+1)!) (H_k + H_{k+1})
        k1_tail += t1 * (2.0 * harm + 1.0 / (kf + 1.0));
        if term < 1e-18 * i0 {
            break;
        }
    }
    i1 *= x / 2.0;
    let k0 = -l * i0 + k0_tail;
    let k1 = 1.0 / x + l * i1 - (x / 4.0) * k1_tail;
    (k0, k1)
}

/// `K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt` by the trapezoidal rule,
/// which converges geometrically for this analytic, rapidly decaying integrand.
fn bessel_k01_integral(x: f64) -> (f64, f64) {
    let h: f64 = 0.1;
    let mut k0 = 0.5 * (-x).exp();
    let mut k1 = k0;
    let mut t = h;
    loop {
        let e = (-x * t.cosh()).exp();
        k0 += e;
        k1 += e * t.cosh();
        if e < 1e-20 * k0 {
            break;
        }
        t += h;
    }
    (k0 * h, k1 * h)
}

/// Bessel function of the first kind of integer order, real argument.
///
/// Uses `J_n(x) = (1/pi) int_0^pi cos(n tau - x sin tau) d tau`; the trapezoidal rule on this
/// periodic integrand is exact once the node count exceeds `|n| + |x|` by a safety margin.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let m = (2 * ((n.unsigned_abs() as usize) + x.abs().ceil() as usize) + 40).max(64);
    let h = PI / m as f64;
    let nf = n as f64;
    let mut s = 0.5 * (1.0 + (nf * PI).cos());
    for j in 1..m {
        let tau = j as f64 * h;
        s += (nf * tau - x * tau.sin()).cos();
    }
    s * h / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from arbitrary-precision evaluation (mpmath, 30 digits).
    const POLYLOG_REF: [(f64, [(f64, f64); 3]); 5] = [
        (0.3, [(1.2077256208505855, 1.4207963267948966), (1.1961951688097574, 0.661567010220201), (1.080349993520963, 0.4250443853486976)]),
        (1.7, [(-0.4071708593407294, 0.7207963267948967), (-0.30291968870309777, 0.867187834451732), (-0.22797209788306164, 0.936003888090026)]),
        (3.0, [(-0.6906390243683489, 0.07079632679489661), (-0.8174549135364634, 0.09802620939130142), (-0.8945985921231673, 0.11621872996764453)]),
        (4.5, [(-0.44221250473413176, -0.6792036732051033), (-0.3611494037288083, -0.8318392208232194), (-0.2986593463915669, -0.9083595079813093)]),
        (6.0, [(1.2649974490501406, -1.4292036732051034), (1.2201561060788466, -0.6407826657017233), (1.0913006476335474, -0.40472948121878055)]),
    ];

    #[test]
    fn polylog_matches_reference() {
        for (theta, expect) in POLYLOG_REF {
            let got = polylog_unit_circle(theta);
            for (g, (re, im)) in got.iter().zip(expect) {
                assert!((g.re - re).abs() < 1e-13, "theta={theta} re {} vs {re}", g.re);
                assert!((g.im - im).abs() < 1e-13, "theta={theta} im {} vs {im}", g.im);
            }
        }
    }

    #[test]
    fn polylog_is_periodic() {
        let a = polylog_unit_circle(1.1);
        let b = polylog_unit_circle(1.1 + 4.0 * PI);
        let c = polylog_unit_circle(1.1 - 2.0 * PI);
        for i in 0..3 {
            assert!((a[i] - b[i]).norm() < 1e-12);
            assert!((a[i] - c[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn bessel_k_matches_reference() {
        let table = [
            (0.05, 3.11423402947199, 19.909674325882506),
            (0.7, 0.6605198599151016, 1.050283535312918),
            (1.0, 0.42102443824070834, 0.6019072301972346),
            (2.0, 0.11389387274953344, 0.13986588181652243),
            (3.5, 0.01959889717036849, 0.022239392925923834),
            (10.0, 1.778006231616765e-05, 1.8648773453825585e-05),
            (30.0, 2.1324774964630563e-14, 2.1677320018915495e-14),
        ];
        for (x, k0, k1) in table {
            let (a, b) = bessel_k01(x);
            assert!(((a - k0) / k0).abs() < 1e-12, "K0({x}) = {a} vs {k0}");
            assert!(((b - k1) / k1).abs() < 1e-12, "K1({x}) = {b} vs {k1}");
        }
    }

    #[test]
    fn bessel_k_branches_agree_at_split() {
        let (a0, a1) = bessel_k01_series(2.0);
        let (b0, b1) = bessel_k01_integral(2.0);
        assert!((a0 - b0).abs() < 1e-14);
        assert!((a1 - b1).abs() < 1e-14);
    }

    #[test]
    fn bessel_j_matches_reference() {
        let table = [
            (0, 1.0, 0.7651976865579666),
            (1, 2.5, 0.49709410246427405),
            (9, 7.0, 0.05892050827307543),
            (10, 12.0, 0.3004760352712693),
            (-3, 4.0, -0.43017147387562193),
            (11, 3.0, 1.7939896623474464e-06),
        ];
        for (n, x, v) in table {
            assert!((bessel_j(n, x) - v).abs() < 1e-14, "J_{n}({x})");
        }
    }
}
