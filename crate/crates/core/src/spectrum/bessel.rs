//! Bessel functions of integer order and their positive zeros.

use std::f64::consts::PI;

/// `J_n(x)` from the periodic integral `(1/2π)∫₀^{2π} cos(nθ − x sin θ) dθ`.
///
/// The trapezoid rule is spectrally accurate for this integrand; the node
/// count grows with `n + |x|` to resolve the oscillation.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let m = 2 * ((x.abs() + n as f64).ceil() as usize) + 64;
    let mut s = 0.0;
    for k in 0..m {
        let t = 2.0 * PI * k as f64 / m as f64;
        s += (n as f64 * t - x * t.sin()).cos();
    }
    s / m as f64
}

/// First `count` positive zeros of `J_n`, by scanning and bisection.
pub fn bessel_zeros(n: u32, count: usize) -> Vec<f64> {
    scan_zeros(n, |z| z.len() >= count, f64::INFINITY)
}

/// Positive zeros of `J_n` not exceeding `cap`.
pub fn bessel_zeros_below(n: u32, cap: f64) -> Vec<f64> {
    scan_zeros(n, |_| false, cap)
}

fn scan_zeros(n: u32, done: impl Fn(&[f64]) -> bool, cap: f64) -> Vec<f64> {
    let mut zeros = Vec::new();
    let step = 0.25;
    let mut a = (n as f64).max(step);
    let mut fa = bessel_j(n, a);
    while !done(&zeros) && a <= cap {
        let b = a + step;
        let fb = bessel_j(n, b);
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            zeros.push(bisect(n, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    zeros.retain(|z| *z <= cap);
    zeros
}

fn bisect(n: u32, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = bessel_j(n, m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Dirichlet eigenvalue of the disk, with angular order and multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskEigenvalue {
    pub nu: f64,
    pub order: u32,
    pub zero: f64,
    pub multiplicity: usize,
}

/// All disk eigenvalues `(z_{k,i}/r)²` below the `count`-th, listed once per
/// distinct value with multiplicity 1 (`k = 0`) or 2 (`k ≥ 1`).
pub fn disk_eigenvalues(radius: f64, count: usize) -> Vec<DiskEigenvalue> {
    // Bound on the count-th eigenvalue from the radial family alone.
    let radial = bessel_zeros(0, count);
    let cap = radial[count - 1];
    let mut out = Vec::new();
    let mut k = 0u32;
    while (k as f64) < cap {
        let zs = bessel_zeros_below(k, cap);
        if zs.is_empty() {
            break;
        }
        for z in zs {
            out.push(DiskEigenvalue {
                nu: (z / radius).powi(2),
                order: k,
                zero: z,
                multiplicity: if k == 0 { 1 } else { 2 },
            });
        }
        k += 1;
    }
    out.sort_by(|a, b| a.nu.total_cmp(&b.nu));
    let mut total = 0;
    let mut trimmed = Vec::new();
    for e in out {
        if total >= count {
            break;
        }
        total += e.multiplicity;
        trimmed.push(e);
    }
    trimmed
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((bessel_j(0, 0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1, 2.5) - 0.497_094_102_464_274_4).abs() < 1e-14);
        assert!((bessel_j(3, 10.0) - 0.058_379_379_305_186_8).abs() < 1e-14);
    }

    #[test]
    fn known_zeros() {
        let z = bessel_zeros(0, 3);
        assert!((z[0] - 2.404_825_557_695_773).abs() < 1e-12);
        assert!((z[1] - 5.520_078_110_286_311).abs() < 1e-12);
        assert!((z[2] - 8.653_727_912_911_013).abs() < 1e-12);
        assert!((bessel_zeros(1, 1)[0] - 3.831_705_970_207_512).abs() < 1e-12);
        assert!((bessel_zeros(2, 1)[0] - 5.135_622_301_840_683).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_sum_of_inverse_squared_zeros() {
        // Σ_i 1/j_{0,i}² = 1/4; the tail beyond N zeros is ≈ 1/(π² N).
        let n = 400;
        let s: f64 = bessel_zeros(0, n).iter().map(|z| 1.0 / (z * z)).sum();
        let tail = 1.0 / (PI * PI * n as f64);
        assert!((s + tail - 0.25).abs() < 1e-5);
    }

    #[test]
    fn disk_list_is_sorted_with_multiplicity() {
        let e = disk_eigenvalues(0.375, 12);
        assert_eq!(e[0].order, 0);
        assert_eq!(e[1].order, 1);
        assert_eq!(e[1].multiplicity, 2);
        assert!(e.windows(2).all(|w| w[0].nu <= w[1].nu));
        assert!(e.iter().map(|x| x.multiplicity).sum::<usize>() >= 12);
    }
}
