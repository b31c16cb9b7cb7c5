//! Dissipation and dispersion analysis of the stepping scheme and of the
//! HHT-alpha reference: spectral radius, shifted phase, relative period
//! error, equivalent damping ratio, and amplitude decay per period, all as
//! functions of the dimensionless step size x = dt/T.
//!
//! Undefined quantities (the phase convention leaves gaps, and HHT has no
//! usable phase for x > 1) are reported as NaN and written as empty CSV
//! fields downstream.

use crate::pade::MixedPadeScheme;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Spectral radius |R(i 2 pi x)| of the scheme.
pub fn spectral_radius(scheme: &MixedPadeScheme, x: f64) -> f64 {
    amplification(scheme, x).norm()
}

fn amplification(scheme: &MixedPadeScheme, x: f64) -> Complex64 {
    assert!(x >= 0.0, "dimensionless step size must be non-negative");
    scheme
        .amplification_factor(x)
        .expect("denominator stays nonzero for x >= 0")
}

/// Phase of the amplification factor with the principal value shifted to
/// the positive side: arg(r) + 2 pi when Im(r) < 0 or when x > 1.
pub fn shifted_phase(r: Complex64, x: f64) -> f64 {
    assert!(r.norm() > 0.0, "phase undefined at r = 0");
    if r.im < 0.0 || x > 1.0 {
        r.arg() + 2.0 * PI
    } else {
        r.arg()
    }
}

/// HHT variant of the shifted phase: the x > 1 branch is undefined (NaN)
/// instead of shifted.
pub fn hht_shifted_phase(r: Complex64, x: f64) -> f64 {
    assert!(r.norm() > 0.0, "phase undefined at r = 0");
    if r.im < 0.0 {
        r.arg() + 2.0 * PI
    } else if x > 1.0 {
        f64::NAN
    } else {
        r.arg()
    }
}

/// Relative period error 2 pi x / phase - 1; tends to zero as x -> 0.
pub fn period_error(scheme: &MixedPadeScheme, x: f64) -> f64 {
    assert!(x > 0.0, "period error needs x > 0");
    let r = amplification(scheme, x);
    2.0 * PI * x / shifted_phase(r, x) - 1.0
}

/// Equivalent viscous damping ratio -ln(rho) / phase.
pub fn damping_ratio(scheme: &MixedPadeScheme, x: f64) -> f64 {
    let r = amplification(scheme, x);
    -r.norm().ln() / shifted_phase(r, x)
}

/// Amplitude ratio after n_periods periods of vibration: rho^(n_periods/x),
/// i.e. rho once per step over n_periods * T / dt steps. The same exponent
/// convention is applied to the HHT curves.
pub fn amplitude_ratio(rho: f64, x: f64, n_periods: f64) -> f64 {
    assert!(x > 0.0, "amplitude ratio needs x > 0");
    rho.powf(n_periods / x)
}

/// Spectral radius the HHT-alpha method attains in the high-frequency
/// limit for a given alpha.
pub fn alpha_to_rho_infty(alpha: f64) -> f64 {
    assert!(alpha != 1.0);
    (1.0 + alpha) / (1.0 - alpha)
}

/// Inverse map: the alpha that yields a given high-frequency spectral radius.
pub fn rho_infty_to_alpha(rho_inf: f64) -> f64 {
    (rho_inf - 1.0) / (rho_inf + 1.0)
}

/// Principal amplification factor of the HHT-alpha method at x = dt/T:
/// the maximum-magnitude root of the characteristic cubic
/// t^3 - 2 A1 t^2 + A2 t - A3, returned as (Re, |Im|). Magnitude ties
/// within 1e-12 go to the root with the larger |Im|.
pub fn hht_amplification(alpha: f64, x: f64) -> Complex64 {
    assert!((-1.0 / 3.0..=0.0).contains(&alpha), "alpha outside [-1/3, 0]");
    assert!(x >= 0.0);
    let b = (1.0 - alpha) * (1.0 - alpha) / 4.0;
    let g = 0.5 - alpha;
    let o = 2.0 * PI * x;
    let d = 1.0 + (1.0 + alpha) * b * o * o;
    let a1 = 1.0 - o * o * ((1.0 + alpha) * (g + 0.5) - alpha * b) / (2.0 * d);
    let a2 = 1.0 - o * o * (g - 0.5 + 2.0 * alpha * (g - b)) / d;
    let a3 = alpha * o * o * (b - g + 0.5) / d;

    // companion matrix of t^3 - 2 A1 t^2 + A2 t - A3
    let mut companion = faer::Mat::<f64>::zeros(3, 3);
    companion[(1, 0)] = 1.0;
    companion[(2, 1)] = 1.0;
    companion[(0, 2)] = a3;
    companion[(1, 2)] = -a2;
    companion[(2, 2)] = 2.0 * a1;
    let roots = companion.eigenvalues().expect("3x3 eigensolve");

    let mut best = roots[0];
    for &r in &roots[1..] {
        let (nb, nr) = (best.norm(), r.norm());
        if nr > nb + 1e-12 * nb.max(1.0) || ((nr - nb).abs() <= 1e-12 * nb.max(1.0) && r.im.abs() > best.im.abs()) {
            best = r;
        }
    }
    Complex64::new(best.re, best.im.abs())
}

pub fn hht_spectral_radius(alpha: f64, x: f64) -> f64 {
    hht_amplification(alpha, x).norm()
}

pub fn hht_period_error(alpha: f64, x: f64) -> f64 {
    assert!(x > 0.0);
    let r = hht_amplification(alpha, x);
    2.0 * PI * x / hht_shifted_phase(r, x) - 1.0
}

pub fn hht_damping_ratio(alpha: f64, x: f64) -> f64 {
    let r = hht_amplification(alpha, x);
    -r.norm().ln() / hht_shifted_phase(r, x)
}

/// One row of a dissipation/dispersion sweep. NaN marks an undefined entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCurvePoint {
    pub x: f64,
    pub rho: f64,
    pub phase: f64,
    pub period_error: f64,
    pub damping_ratio: f64,
}

/// What a sweep evaluates: the stepping scheme or the HHT reference.
#[derive(Clone, Copy)]
pub enum SweepTarget<'a> {
    Scheme(&'a MixedPadeScheme),
    Hht { alpha: f64 },
}

/// Evaluates all curve quantities over the grid. At x = 0 the amplitude is
/// exactly 1 and the phase is undefined; period error and damping ratio
/// take their x -> 0 limits (both zero).
pub fn sweep(target: SweepTarget<'_>, grid: &[f64]) -> Vec<SpectralCurvePoint> {
    grid.iter()
        .map(|&x| {
            if x == 0.0 {
                return SpectralCurvePoint {
                    x,
                    rho: 1.0,
                    phase: f64::NAN,
                    period_error: 0.0,
                    damping_ratio: 0.0,
                };
            }
            let (r, phase) = match target {
                SweepTarget::Scheme(scheme) => {
                    let r = amplification(scheme, x);
                    (r, shifted_phase(r, x))
                }
                SweepTarget::Hht { alpha } => {
                    let r = hht_amplification(alpha, x);
                    (r, hht_shifted_phase(r, x))
                }
            };
            SpectralCurvePoint {
                x,
                rho: r.norm(),
                phase,
                period_error: 2.0 * PI * x / phase - 1.0,
                damping_ratio: -r.norm().ln() / phase,
            }
        })
        .collect()
}

/// Logarithmically spaced grid, endpoints included.
pub fn log_grid(x_min: f64, x_max: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && x_min > 0.0 && x_max > x_min);
    let ratio = x_max / x_min;
    (0..points)
        .map(|i| x_min * ratio.powf(i as f64 / (points - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pade::MixedPadeScheme;

    fn scheme(m: usize, rho: f64) -> MixedPadeScheme {
        MixedPadeScheme::new(m, rho, 0).unwrap()
    }

    #[test]
    fn spectral_radius_examples() {
        for m in 1..=4 {
            assert!((spectral_radius(&scheme(m, 1.0), 0.37) - 1.0).abs() <= 1e-12);
        }
        assert!((spectral_radius(&scheme(2, 0.8), 1e4) - 0.8).abs() <= 1e-3);
        assert!((spectral_radius(&scheme(3, 0.5), 0.0) - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn shifted_phase_branches() {
        let quarter = Complex64::new(0.0, 1.0);
        assert!((shifted_phase(quarter, 0.25) - PI / 2.0).abs() < 1e-15);

        let minus_i = Complex64::new(0.0, -1.0);
        assert!((shifted_phase(minus_i, 0.1) - 3.0 * PI / 2.0).abs() < 1e-15);
        assert!((shifted_phase(minus_i, 5.0) - 3.0 * PI / 2.0).abs() < 1e-15);

        let near_one = Complex64::new(1.0, 1e-12);
        assert!((shifted_phase(near_one, 2.0) - 2.0 * PI).abs() < 1e-11);
    }

    #[test]
    fn hht_phase_undefined_beyond_one() {
        let r = Complex64::new(0.5, 0.1);
        assert!(hht_shifted_phase(r, 2.0).is_nan());
        assert!(!hht_shifted_phase(r, 0.5).is_nan());
        let below = Complex64::new(0.5, -0.1);
        assert!(!hht_shifted_phase(below, 2.0).is_nan());
    }

    #[test]
    fn period_error_vanishes_at_small_steps() {
        for m in 2..=5 {
            for rho in [0.0, 0.5, 1.0] {
                let pe = period_error(&scheme(m, rho), 1e-4);
                assert!(pe.abs() <= 1e-6, "M={m} rho={rho}: {pe:e}");
            }
        }
    }

    /// Least-squares slope of log(pe) vs log(x).
    fn fitted_slope(points: &[(f64, f64)]) -> f64 {
        let n = points.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &(x, y) in points {
            let (lx, ly) = (x.ln(), y.ln());
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }

    #[test]
    fn period_error_slope_matches_truncation_order() {
        // On the imaginary axis the leading truncation term lands on the
        // amplitude, so the phase picks up the next order: the period error
        // scales as x^(2M) for every dissipation level, diagonal included.
        // The fit window is chosen per order so the error stays above the
        // cancellation floor of the 2 pi x / phase - 1 evaluation.
        for (m, rho, want, x_lo, x_hi) in [
            (2usize, 1.0, 4.0, 2e-3f64, 2e-2),
            (2, 0.8, 4.0, 2e-3, 2e-2),
            (2, 0.0, 4.0, 2e-3, 2e-2),
            (3, 0.5, 6.0, 2e-2, 6e-2),
        ] {
            let s = scheme(m, rho);
            let pts: Vec<(f64, f64)> = (0..12)
                .map(|i| {
                    let x = x_lo * (x_hi / x_lo).powf(i as f64 / 11.0);
                    (x, period_error(&s, x).abs())
                })
                .collect();
            let slope = fitted_slope(&pts);
            assert!((slope - want).abs() <= 0.3, "M={m} rho={rho}: slope {slope}");
        }
    }

    #[test]
    fn damping_ratio_behaviour() {
        // zero without dissipation, vanishing for small steps, growing
        // toward larger steps when dissipation is on
        for x in [1e-3, 0.1, 0.9] {
            assert!(damping_ratio(&scheme(3, 1.0), x).abs() <= 1e-12);
        }
        assert!(damping_ratio(&scheme(2, 0.8), 1e-4).abs() <= 1e-6);

        let s = scheme(2, 0.0);
        let mut prev = damping_ratio(&s, 1e-2);
        for i in 1..=40 {
            let x = 1e-2 * (100.0f64).powf(i as f64 / 40.0);
            let d = damping_ratio(&s, x);
            assert!(d >= prev - 1e-12, "x={x}: {d} < {prev}");
            prev = d;
        }
    }

    #[test]
    fn amplitude_ratio_composition() {
        assert!((amplitude_ratio(1.0, 0.3, 7.0) - 1.0).abs() < 1e-15);
        assert!((amplitude_ratio(0.9, 0.3, 0.0) - 1.0).abs() < 1e-15);

        let s = scheme(2, 0.0);
        let rho = spectral_radius(&s, 0.1);
        let want = rho.powi(10);
        assert!((amplitude_ratio(rho, 0.1, 1.0) - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn hht_high_frequency_limits() {
        for (alpha, want) in [(-0.05, 0.90476), (-0.1, 0.81818), (-0.3, 0.53846)] {
            let got = hht_spectral_radius(alpha, 1e4);
            assert!((got - want).abs() <= 1e-2, "alpha={alpha}: {got}");
            // and the closed-form map agrees to 5 significant digits
            let map = alpha_to_rho_infty(alpha);
            assert!((map - want).abs() <= 5e-6, "alpha={alpha}: map {map}");
        }
    }

    #[test]
    fn trapezoidal_case_is_non_dissipative() {
        assert!((hht_spectral_radius(0.0, 0.1) - 1.0).abs() <= 1e-10);
        assert!((hht_spectral_radius(0.0, 3.7) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn alpha_map_round_trip() {
        assert!((alpha_to_rho_infty(0.0) - 1.0).abs() < 1e-15);
        for alpha in [-0.05, -0.1, -0.3] {
            let rho = alpha_to_rho_infty(alpha);
            assert!((rho_infty_to_alpha(rho) - alpha).abs() < 1e-14);
        }
    }

    #[test]
    fn sweep_rows() {
        let s = scheme(3, 1.0);
        let rows = sweep(SweepTarget::Scheme(&s), &[0.0]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].rho, 1.0);
        assert!(rows[0].phase.is_nan());
        assert_eq!(rows[0].period_error, 0.0);
        assert_eq!(rows[0].damping_ratio, 0.0);

        // diagonal family: amplitude exactly preserved across the grid
        let grid = log_grid(1e-2, 1e2, 50);
        for row in sweep(SweepTarget::Scheme(&s), &grid) {
            assert!((row.rho - 1.0).abs() <= 1e-12);
        }

        // HHT amplitude decreasing over [1e-2, 1e2] at alpha = -0.3
        let rows = sweep(SweepTarget::Hht { alpha: -0.3 }, &grid);
        for pair in rows.windows(2) {
            assert!(pair[1].rho <= pair[0].rho + 1e-9);
        }
        // the HHT principal root never carries a negative imaginary part,
        // so its phase convention leaves everything past x = 1 undefined
        for row in rows.iter().filter(|r| r.x > 1.0) {
            assert!(row.phase.is_nan());
            assert!(row.period_error.is_nan());
        }
    }

    #[test]
    fn scheme_dissipates_later_but_harder_than_hht() {
        // at matched high-frequency dissipation the scheme holds amplitude
        // strictly closer to 1 for small steps; by x = 50 both curves have
        // collapsed onto rho_inf, so the large-step comparison is asserted
        // to plot resolution (the strict ordering holds mid-transition for
        // the heavily dissipative case, checked below)
        for alpha in [-0.05, -0.1, -0.3] {
            let rho_inf = alpha_to_rho_infty(alpha);
            for m in 2..=5 {
                let s = MixedPadeScheme::new(m, rho_inf, 0).unwrap();
                let ours_small = spectral_radius(&s, 0.05);
                let hht_small = hht_spectral_radius(alpha, 0.05);
                assert!(
                    ours_small >= hht_small,
                    "M={m} alpha={alpha}: {ours_small} < {hht_small} at x=0.05"
                );
                let ours_large = spectral_radius(&s, 50.0);
                let hht_large = hht_spectral_radius(alpha, 50.0);
                assert!(
                    ours_large <= hht_large + 1e-3,
                    "M={m} alpha={alpha}: {ours_large} > {hht_large} at x=50"
                );
            }
        }
        for m in 2..=5 {
            let s = MixedPadeScheme::new(m, alpha_to_rho_infty(-0.3), 0).unwrap();
            for x in [5.0, 50.0] {
                assert!(
                    spectral_radius(&s, x) < hht_spectral_radius(-0.3, x),
                    "M={m} x={x}"
                );
            }
        }
    }

    #[test]
    fn phase_stays_in_the_principal_shifted_band_below_one() {
        // below x = 1 the shift only ever lifts negative principal values,
        // so the phase lands in (0, 2 pi]; past x = 1 the convention can
        // push it as far as 3 pi
        for m in [1usize, 3, 5] {
            for rho in [0.0, 0.5, 1.0] {
                let s = scheme(m, rho);
                for row in sweep(SweepTarget::Scheme(&s), &log_grid(1e-3, 1.0, 120)) {
                    assert!(row.phase > 0.0 && row.phase <= 2.0 * PI + 1e-12,
                        "M={m} rho={rho} x={}: phase {}", row.x, row.phase);
                    assert!(row.period_error.is_finite() && row.damping_ratio.is_finite());
                    assert!(row.rho >= 0.0);
                }
                for row in sweep(SweepTarget::Scheme(&s), &log_grid(1.0, 1e4, 120)) {
                    assert!(row.phase > 0.0 && row.phase <= 3.0 * PI + 1e-12,
                        "M={m} rho={rho} x={}: phase {}", row.x, row.phase);
                }
            }
        }
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 1e3, 7);
        assert_eq!(g.len(), 7);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert!((g[6] - 1e3).abs() < 1e-9);
        for pair in g.windows(2) {
            assert!(pair[1] > pair[0]);
        }
    }
}
