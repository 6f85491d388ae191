//! Small helpers for dense complex vectors stored as slices.

use num_complex::Complex64;

/// Hermitian inner product `a* b`.
#[inline]
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

#[inline]
pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

#[inline]
pub fn norm(a: &[Complex64]) -> f64 {
    norm_sqr(a).sqrt()
}

/// Beamforming gain `|f* h|²` between two directions.
#[inline]
pub fn beamforming_gain(f: &[Complex64], h: &[Complex64]) -> f64 {
    inner(f, h).norm_sqr()
}

/// The `k`-th standard basis vector of length `m`.
pub fn unit_vector(k: usize, m: usize) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); m];
    e[k] = Complex64::new(1.0, 0.0);
    e
}
