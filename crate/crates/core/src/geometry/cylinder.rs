use std::sync::Arc;

use super::{BaseShape, Frame, MAX_BASE_DIM};

/// One cylinder `θ((X + x) × E^m)`: the base shape translated by `position`
/// in the base space and swept along the frame's direction subspace.
#[derive(Debug, Clone)]
pub struct Cylinder {
    /// Translation of the base within the base space `R^{n−m}`.
    pub position: Vec<f64>,
    pub frame: Arc<Frame>,
    pub base: BaseShape,
}

impl Cylinder {
    pub fn new(position: Vec<f64>, frame: Arc<Frame>, base: BaseShape) -> Self {
        assert_eq!(position.len(), frame.base_dim());
        Self {
            position,
            frame,
            base,
        }
    }

    /// Membership test: project onto the base coordinates and compare with
    /// the translated base.
    pub fn contains(&self, y: &[f64]) -> bool {
        let d = self.frame.base_dim();
        debug_assert!(d <= MAX_BASE_DIM);
        let mut u = [0.0; MAX_BASE_DIM];
        self.frame.project_base(y, &mut u[..d]);
        for (ui, xi) in u[..d].iter_mut().zip(&self.position) {
            *ui -= xi;
        }
        self.base.contains(&u[..d])
    }

    /// Euclidean distance from `y` to the cylinder. Direction coordinates
    /// are free, so this is the base-space distance to the translated base.
    pub fn distance(&self, y: &[f64]) -> f64 {
        let d = self.frame.base_dim();
        debug_assert!(d <= MAX_BASE_DIM);
        let mut u = [0.0; MAX_BASE_DIM];
        self.frame.project_base(y, &mut u[..d]);
        for (ui, xi) in u[..d].iter_mut().zip(&self.position) {
            *ui -= xi;
        }
        self.base.distance(&u[..d])
    }

    /// A point of `R^n` on the cylinder's axis flat (the image of the base
    /// translation point).
    pub fn axis_point(&self) -> Vec<f64> {
        self.frame.embed_base(&self.position)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_point_is_inside() {
        let frame = Arc::new(Frame::identity(3, 1).unwrap());
        let c = Cylinder::new(vec![0.5, -0.25], frame, BaseShape::Ball { radius: 0.1 });
        let p = c.axis_point();
        assert!(c.contains(&p));
        // Shifting along the direction space keeps membership.
        let shifted = [p[0], p[1], p[2] + 123.0];
        assert!(c.contains(&shifted));
        assert_eq!(c.distance(&shifted), 0.0);
    }

    #[test]
    fn distance_is_base_space_distance() {
        let frame = Arc::new(Frame::identity(2, 1).unwrap());
        let c = Cylinder::new(vec![0.0], frame, BaseShape::Ball { radius: 0.5 });
        // Base coordinate is the first axis; the second is the sweep.
        assert!((c.distance(&[1.5, 77.0]) - 1.0).abs() < 1e-15);
        assert!(c.contains(&[0.5, -50.0]));
        assert!(!c.contains(&[0.6, 0.0]));
    }
}
