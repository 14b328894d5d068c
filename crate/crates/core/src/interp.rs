//! Piecewise-linear lookup curves.
//!
//! Every table-driven quantity in the model goes through [`Curve`]. Evaluation
//! returns the stored ordinate bit-for-bit at a node, interpolates linearly
//! between nodes and refuses to extrapolate.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("curve needs at least one point")]
    Empty,
    #[error("point {0} is not finite")]
    NotFinite(usize),
    #[error("abscissa at point {0} does not strictly increase")]
    NotIncreasing(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Curve {
    pub fn new(points: &[(f64, f64)]) -> Result<Self, CurveError> {
        if points.is_empty() {
            return Err(CurveError::Empty);
        }
        for (i, &(x, y)) in points.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(CurveError::NotFinite(i));
            }
            if i > 0 && x <= points[i - 1].0 {
                return Err(CurveError::NotIncreasing(i));
            }
        }
        Ok(Self {
            xs: points.iter().map(|p| p.0).collect(),
            ys: points.iter().map(|p| p.1).collect(),
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn first_y(&self) -> f64 {
        self.ys[0]
    }

    pub fn last_y(&self) -> f64 {
        self.ys[self.ys.len() - 1]
    }

    /// Value at `x`, or `None` outside the node range.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return None;
        }
        // First node with xs[i] >= x.
        let i = self.xs.partition_point(|&node| node < x);
        if self.xs[i] == x {
            return Some(self.ys[i]);
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.ys.windows(2).all(|w| w[1] >= w[0])
    }

    pub fn is_non_increasing(&self) -> bool {
        self.ys.windows(2).all(|w| w[1] <= w[0])
    }

    /// Smallest `x` with `eval(x) >= y` on a non-decreasing curve.
    ///
    /// Returns `None` when `y` is above the curve maximum.
    pub fn first_reaching(&self, y: f64) -> Option<f64> {
        if y <= self.ys[0] {
            return Some(self.xs[0]);
        }
        let i = self.ys.iter().position(|&v| v >= y)?;
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        if self.ys[i] == y {
            return Some(x1);
        }
        Some(x0 + (x1 - x0) * (y - y0) / (y1 - y0))
    }

    /// Smallest `x` with `eval(x) <= y` on a non-increasing curve.
    pub fn first_falling_to(&self, y: f64) -> Option<f64> {
        if y >= self.ys[0] {
            return Some(self.xs[0]);
        }
        let i = self.ys.iter().position(|&v| v <= y)?;
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        if self.ys[i] == y {
            return Some(x1);
        }
        Some(x0 + (x1 - x0) * (y0 - y) / (y0 - y1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp() -> Curve {
        Curve::new(&[(0.0, 0.0), (20.0, 0.6), (40.0, 1.3), (60.0, 1.3)]).unwrap()
    }

    #[test]
    fn rejects_bad_tables() {
        assert_eq!(Curve::new(&[]), Err(CurveError::Empty));
        assert_eq!(
            Curve::new(&[(0.0, 1.0), (0.0, 2.0)]),
            Err(CurveError::NotIncreasing(1))
        );
        assert_eq!(
            Curve::new(&[(0.0, f64::NAN)]),
            Err(CurveError::NotFinite(0))
        );
    }

    #[test]
    fn no_extrapolation() {
        let c = ramp();
        assert_eq!(c.eval(-1e-12), None);
        assert_eq!(c.eval(60.000001), None);
        assert_eq!(c.eval(60.0), Some(1.3));
    }

    #[test]
    fn inverse_hits_plateau_start() {
        let c = ramp();
        assert_eq!(c.first_reaching(1.3), Some(40.0));
        assert_eq!(c.first_reaching(0.0), Some(0.0));
        assert_eq!(c.first_reaching(1.31), None);
        let x = c.first_reaching(0.3).unwrap();
        assert!((x - 10.0).abs() < 1e-12);
    }

    #[test]
    fn falling_inverse() {
        let c = Curve::new(&[(0.0, 26.0), (3.0, 20.0), (6.0, 13.0)]).unwrap();
        assert_eq!(c.first_falling_to(26.0), Some(0.0));
        assert_eq!(c.first_falling_to(13.0), Some(6.0));
        assert_eq!(c.first_falling_to(12.0), None);
        assert!((c.first_falling_to(23.0).unwrap() - 1.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn anchors_are_exact(ys in proptest::collection::vec(-100.0f64..100.0, 1..12)) {
            let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64 * 1.7, y)).collect();
            let c = Curve::new(&pts).unwrap();
            for &(x, y) in &pts {
                prop_assert_eq!(c.eval(x), Some(y));
            }
        }

        #[test]
        fn interpolant_stays_between_neighbours(
            ys in proptest::collection::vec(-100.0f64..100.0, 2..12),
            frac in 0.0f64..1.0,
        ) {
            let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect();
            let c = Curve::new(&pts).unwrap();
            for w in pts.windows(2) {
                let x = w[0].0 + frac;
                let v = c.eval(x).unwrap();
                let (lo, hi) = if w[0].1 < w[1].1 { (w[0].1, w[1].1) } else { (w[1].1, w[0].1) };
                prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
            }
        }
    }
}
