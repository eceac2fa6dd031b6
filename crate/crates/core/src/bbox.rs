//! Axis-aligned pixel rectangles shared by the renderers, the detector
//! and the evaluation metrics.

use serde::{Deserialize, Serialize};

/// Rectangle in continuous pixel coordinates, `x1 > x0`, `y1 > y0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box2D {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Box2D {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Box2D { x0, y0, x1, y1 }
    }

    /// From center and size.
    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Box2D {
            x0: cx - w * 0.5,
            y0: cy - h * 0.5,
            x1: cx + w * 0.5,
            y1: cy + h * 0.5,
        }
    }

    pub fn width(&self) -> f64 {
        (self.x1 - self.x0).max(0.0)
    }

    pub fn height(&self) -> f64 {
        (self.y1 - self.y0).max(0.0)
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Intersection-over-union; 0 when the union is empty.
    pub fn iou(&self, other: &Box2D) -> f64 {
        let ix = (self.x1.min(other.x1) - self.x0.max(other.x0)).max(0.0);
        let iy = (self.y1.min(other.y1) - self.y0.max(other.y0)).max(0.0);
        let inter = ix * iy;
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_boxes_have_iou_one() {
        let b = Box2D::new(2.0, 3.0, 10.0, 8.0);
        assert_eq!(b.iou(&b), 1.0);
    }

    #[test]
    fn disjoint_boxes_have_iou_zero() {
        let a = Box2D::new(0.0, 0.0, 1.0, 1.0);
        let b = Box2D::new(5.0, 5.0, 6.0, 6.0);
        assert_eq!(a.iou(&b), 0.0);
    }

    #[test]
    fn hand_computed_overlap() {
        // (0,0,10,10) vs (5,5,15,15): intersection 25, union 175.
        let a = Box2D::new(0.0, 0.0, 10.0, 10.0);
        let b = Box2D::new(5.0, 5.0, 15.0, 15.0);
        assert!((a.iou(&b) - 25.0 / 175.0).abs() < 1e-15);
    }
}
