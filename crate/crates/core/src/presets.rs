//! Deterministic profiles used by the reference experiments (period 2π).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::surface::ProfileCoeffs;
use crate::uniform_grid;

const TWO_PI: f64 = 2.0 * PI;

/// Harmonics whose coefficients fall below this are dropped from
/// numerically expanded presets.
pub const COEFF_CUTOFF: f64 = 1e-10;

/// `1.5 + 0.2 cos x + 0.2 cos 2x`.
pub fn example1() -> ProfileCoeffs {
    ProfileCoeffs::new(vec![1.5, 0.2, 0.0, 0.2, 0.0], TWO_PI).expect("odd length")
}

/// `1.2 + 0.05 exp(cos 2x) + 0.04 exp(cos 3x)`, expanded in a Fourier series
/// truncated after the last harmonic above [`COEFF_CUTOFF`].
pub fn example2() -> ProfileCoeffs {
    fourier_expand(example2_exact, 40, 256)
}

pub fn example2_exact(x: f64) -> f64 {
    1.2 + 0.05 * (2.0 * x).cos().exp() + 0.04 * (3.0 * x).cos().exp()
}

pub fn by_name(name: &str) -> Option<ProfileCoeffs> {
    match name {
        "example1" => Some(example1()),
        "example2" => Some(example2()),
        _ => None,
    }
}

/// Trapezoidal Fourier coefficients of a smooth 2π-periodic function through
/// `max_harmonic`, trimming negligible trailing harmonics.
pub fn fourier_expand(f: impl Fn(f64) -> f64, max_harmonic: usize, n: usize) -> ProfileCoeffs {
    let grid = uniform_grid(n, TWO_PI);
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let nf = n as f64;
    let mut coeffs = vec![values.iter().sum::<f64>() / nf];
    for p in 1..=max_harmonic {
        let (mut a, mut b) = (0.0, 0.0);
        for (&x, &v) in grid.iter().zip(&values) {
            let (s, c) = (p as f64 * x).sin_cos();
            a += v * c;
            b += v * s;
        }
        coeffs.push(2.0 * a / nf);
        coeffs.push(2.0 * b / nf);
    }
    while coeffs.len() > 1 {
        let k = coeffs.len();
        if coeffs[k - 1].abs() < COEFF_CUTOFF && coeffs[k - 2].abs() < COEFF_CUTOFF {
            coeffs.truncate(k - 2);
        } else {
            break;
        }
    }
    ProfileCoeffs::new(coeffs, TWO_PI).expect("odd length")
}
