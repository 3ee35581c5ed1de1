//! Even functions of the local wavenumber squared.
//!
//! Propagation through a constant-potential segment only involves cos(qL) and
//! sin(qL)/q, both even in q = sqrt(k^2 - V). Writing them as functions of
//! z = (qL)^2 removes every branch-cut issue and keeps the results exactly
//! real for real potentials at real frequencies, including the evanescent
//! case z < 0 where they turn into cosh/sinh.

use num_complex::Complex64;

/// Below this |z| the closed forms degrade to 0/0; power series take over.
const SERIES_CUTOFF: f64 = 1e-6;

/// cos(sqrt(z)) as an entire function of z.
pub(crate) fn cos_sqrt(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_CUTOFF {
        // 1 - z/2! + z^2/4! - z^3/6!
        let one = Complex64::new(1.0, 0.0);
        return one - z / 2.0 + z * z / 24.0 - z * z * z / 720.0;
    }
    if z.im == 0.0 {
        let x = z.re;
        if x >= 0.0 {
            Complex64::new(x.sqrt().cos(), 0.0)
        } else {
            Complex64::new((-x).sqrt().cosh(), 0.0)
        }
    } else {
        z.sqrt().cos()
    }
}

/// sin(sqrt(z))/sqrt(z) as an entire function of z.
pub(crate) fn sinc_sqrt(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_CUTOFF {
        // 1 - z/3! + z^2/5! - z^3/7!
        let one = Complex64::new(1.0, 0.0);
        return one - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0;
    }
    if z.im == 0.0 {
        let x = z.re;
        if x >= 0.0 {
            let q = x.sqrt();
            Complex64::new(q.sin() / q, 0.0)
        } else {
            let q = (-x).sqrt();
            Complex64::new(q.sinh() / q, 0.0)
        }
    } else {
        let q = z.sqrt();
        q.sin() / q
    }
}

/// (1 - sinc_sqrt(4z)) / z, regular at z = 0; feeds the sin^2 primitive.
fn one_minus_sinc4_over(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        // 2/3 - (2/15) z + (4/315) z^2 - (256/362880) z^3
        let c0 = Complex64::new(2.0 / 3.0, 0.0);
        return c0 - z * (2.0 / 15.0) + z * z * (4.0 / 315.0)
            - z * z * z * (256.0 / 362_880.0);
    }
    (Complex64::new(1.0, 0.0) - sinc_sqrt(4.0 * z)) / z
}

/// Primitives of the squared basis functions over a segment [0, L] with
/// z = (k^2 - V) L^2. The local solution is psi(u) = a cos(qu) + b sin(qu)/q,
/// so: int psi^2 = a^2 Icc + 2ab Ics + b^2 Iss.
pub(crate) struct SegmentSquares {
    pub cc: Complex64,
    pub cs: Complex64,
    pub ss: Complex64,
}

pub(crate) fn segment_squares(z: Complex64, len: f64) -> SegmentSquares {
    let half = 0.5 * len;
    let cc = half * (Complex64::new(1.0, 0.0) + sinc_sqrt(4.0 * z));
    let s = sinc_sqrt(z);
    let cs = 0.5 * len * len * s * s;
    let ss = 0.5 * len * len * len * one_minus_sinc4_over(z);
    SegmentSquares { cc, cs, ss }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn matches_direct_trig_for_moderate_arguments() {
        let q: f64 = 1.7;
        let z = c(q * q);
        assert!((cos_sqrt(z).re - q.cos()).abs() < 1e-15);
        assert!((sinc_sqrt(z).re - q.sin() / q).abs() < 1e-15);
    }

    #[test]
    fn evanescent_branch_is_hyperbolic_and_real() {
        let kappa: f64 = 2.3;
        let z = c(-kappa * kappa);
        assert_eq!(cos_sqrt(z).im, 0.0);
        assert!((cos_sqrt(z).re - kappa.cosh()).abs() < 1e-14);
        assert!((sinc_sqrt(z).re - kappa.sinh() / kappa).abs() < 1e-14);
    }

    #[test]
    fn series_joins_closed_form_smoothly() {
        // straddle the cutoff from both sides
        for &zr in &[2e-6, 9e-7, -2e-6, -9e-7] {
            let z = c(zr);
            let q = Complex64::new(zr, 0.0).sqrt();
            let direct = (q * Complex64::new(1.0, 0.0)).cos();
            assert!((cos_sqrt(z) - direct).norm() < 1e-14);
        }
        // limit values at z = 0
        assert_eq!(cos_sqrt(c(0.0)).re, 1.0);
        assert_eq!(sinc_sqrt(c(0.0)).re, 1.0);
    }

    #[test]
    fn squared_primitives_match_quadrature() {
        // crude trapezoid oracle; tight tolerances live in the field tests
        for &(qsq, len) in &[(4.0_f64, 0.7_f64), (-9.0, 0.4), (1e-9, 1.3), (0.0, 0.5)] {
            let z = c(qsq * len * len);
            let sq = segment_squares(z, len);
            let n = 20_000;
            let h = len / n as f64;
            let (mut icc, mut ics, mut iss) = (0.0, 0.0, 0.0);
            for i in 0..=n {
                let u = i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                let (cv, sv) = if qsq > 0.0 {
                    let q = qsq.sqrt();
                    ((q * u).cos(), (q * u).sin() / q)
                } else if qsq < 0.0 {
                    let q = (-qsq).sqrt();
                    ((q * u).cosh(), (q * u).sinh() / q)
                } else {
                    (1.0, u)
                };
                icc += w * h * cv * cv;
                ics += w * h * cv * sv;
                iss += w * h * sv * sv;
            }
            assert!((sq.cc.re - icc).abs() < 1e-7 * icc.abs().max(1.0));
            assert!((sq.cs.re - ics).abs() < 1e-7 * ics.abs().max(1.0));
            assert!((sq.ss.re - iss).abs() < 1e-7 * iss.abs().max(1.0));
        }
    }
}
