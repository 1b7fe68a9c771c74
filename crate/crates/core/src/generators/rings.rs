use crate::error::{Error, Result};
use crate::linalg::{Complex, ComplexMatrix};

use super::Rng;

pub const DEFAULT_RING_RADII: [(f64, f64); 2] = [(0.35, 0.45), (0.75, 0.85)];

#[derive(Debug, Clone, PartialEq)]
pub struct RingsSpec {
    pub side: usize,
    /// Annuli as fractions of the half-width.
    pub radii: Vec<(f64, f64)>,
    pub noise_std: f64,
    pub seed: u64,
}

impl RingsSpec {
    pub fn new(side: usize, seed: u64) -> Self {
        Self {
            side,
            radii: DEFAULT_RING_RADII.to_vec(),
            noise_std: 0.05,
            seed,
        }
    }
}

/// Concentric annuli on a square grid: pixels inside any annulus are
/// `1 + noise`, all others 0. One normal draw is taken per pixel in
/// row-major order whether or not it is used.
pub fn rings_image(spec: &RingsSpec) -> Result<ComplexMatrix> {
    let side = spec.side;
    if side < 8 || !side.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "ring image side must be a power of two >= 8, got {side}"
        )));
    }
    if spec.radii.is_empty() {
        return Err(Error::InvalidArgument("ring image needs at least one annulus".into()));
    }
    if spec.radii.iter().any(|&(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
        return Err(Error::InvalidArgument(format!("bad annuli {:?}", spec.radii)));
    }
    if !spec.noise_std.is_finite() || spec.noise_std < 0.0 {
        return Err(Error::InvalidArgument(format!("bad noise std {}", spec.noise_std)));
    }
    let mut rng = Rng::new(spec.seed);
    let center = (side as f64 - 1.0) / 2.0;
    let half = side as f64 / 2.0;
    Ok(ComplexMatrix::from_fn(side, side, |r, c| {
        let noise = spec.noise_std * rng.normal();
        let d = (r as f64 - center).hypot(c as f64 - center) / half;
        let inside = spec.radii.iter().any(|&(a, b)| d >= a && d <= b);
        Complex::new(if inside { 1.0 + noise } else { 0.0 }, 0.0)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let img = rings_image(&RingsSpec::new(64, 1)).unwrap();
        assert_eq!(img[(32, 32)].re, 0.0);
        assert_eq!(img[(0, 0)].re, 0.0);
        // on the inner ring: distance 0.4 of the half-width
        let r = 32 + (0.4f64 * 32.0) as usize;
        assert!((img[(r, 32)].re - 1.0).abs() < 0.5);
        assert_eq!(img, rings_image(&RingsSpec::new(64, 1)).unwrap());
    }

    #[test]
    fn binary_without_noise() {
        let mut spec = RingsSpec::new(32, 4);
        spec.noise_std = 0.0;
        let img = rings_image(&spec).unwrap();
        assert!(img.data().iter().all(|z| z.re == 0.0 || z.re == 1.0));
        assert!(img.data().iter().any(|z| z.re == 1.0));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(rings_image(&RingsSpec::new(4, 0)).is_err());
        assert!(rings_image(&RingsSpec::new(24, 0)).is_err());
        let mut spec = RingsSpec::new(16, 0);
        spec.radii.clear();
        assert!(rings_image(&spec).is_err());
    }
}
