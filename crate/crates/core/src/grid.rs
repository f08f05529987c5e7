use std::f64::consts::PI;

use crate::error::{Result, SpecError};

/// Fourier frequencies ω_j = 2πj/L for −⌊(L−1)/2⌋ ≤ j ≤ ⌊L/2⌋.
///
/// Values attached to a grid are stored in ascending order of `j`, so
/// position `k` holds frequency index `j = k − ⌊(L−1)/2⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrequencyGrid {
    len: usize,
}

impl FrequencyGrid {
    pub fn new(len: usize) -> Result<Self> {
        if len < 2 {
            return Err(SpecError::invalid(format!(
                "frequency grid needs at least 2 points, got {len}"
            )));
        }
        Ok(Self { len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_index(&self) -> i64 {
        -(((self.len - 1) / 2) as i64)
    }

    pub fn max_index(&self) -> i64 {
        (self.len / 2) as i64
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.len as f64
    }

    pub fn frequency(&self, j: i64) -> f64 {
        2.0 * PI * j as f64 / self.len as f64
    }

    /// Frequency index stored at position `k`.
    pub fn index_at(&self, k: usize) -> i64 {
        k as i64 + self.min_index()
    }

    /// Storage position of frequency index `j`, after reduction modulo L.
    pub fn position_of(&self, j: i64) -> usize {
        let l = self.len as i64;
        let mut r = j.rem_euclid(l);
        if r > self.max_index() {
            r -= l;
        }
        (r - self.min_index()) as usize
    }

    /// Position of `j` in an FFT output, which is ordered 0, 1, …, L−1.
    pub fn fft_bin(&self, j: i64) -> usize {
        j.rem_euclid(self.len as i64) as usize
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.min_index()..=self.max_index()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.indices().map(|j| self.frequency(j)).collect()
    }
}

/// Builds the length-`len` Fourier grid.
pub fn fourier_grid(len: usize) -> Result<FrequencyGrid> {
    FrequencyGrid::new(len)
}

/// Reduces an angle to (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = x.rem_euclid(two_pi);
    if r > PI {
        r -= two_pi;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15)
    }

    #[test]
    fn even_length_grid() {
        let g = fourier_grid(4).unwrap();
        assert!(close(&g.frequencies(), &[-PI / 2.0, 0.0, PI / 2.0, PI]));
    }

    #[test]
    fn odd_length_grid() {
        let g = fourier_grid(5).unwrap();
        let f: Vec<f64> = [-4.0, -2.0, 0.0, 2.0, 4.0]
            .iter()
            .map(|k| k * PI / 5.0)
            .collect();
        assert!(close(&g.frequencies(), &f));
    }

    #[test]
    fn large_even_grid_reaches_nyquist() {
        let g = fourier_grid(3072).unwrap();
        let f = g.frequencies();
        assert_eq!(f.len(), 3072);
        assert_eq!(*f.last().unwrap(), PI);
        assert!(f.windows(2).all(|w| w[0] < w[1]));
        assert!(f[0] > -PI);
        assert_eq!(f[g.position_of(0)], 0.0);
    }

    #[test]
    fn rejects_tiny_grid() {
        assert!(fourier_grid(1).is_err());
        assert!(fourier_grid(0).is_err());
    }

    #[test]
    fn positions_wrap_periodically() {
        let g = fourier_grid(6).unwrap();
        assert_eq!(g.position_of(-2), 0);
        assert_eq!(g.position_of(3), 5);
        assert_eq!(g.position_of(-3), 5);
        assert_eq!(g.position_of(4), 0);
        for k in 0..6 {
            assert_eq!(g.position_of(g.index_at(k)), k);
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }
}
