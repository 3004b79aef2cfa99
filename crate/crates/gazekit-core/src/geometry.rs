//! Screen geometry, pixel/degree conversion, and 2-D primitives shared by the
//! AOI and event modules.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Physical recording setup: panel resolution and size, viewing distance,
/// sampling rate.
///
/// Defaults describe the reference apparatus: a 1024x768 18-inch 4:3 panel
/// (36.576 cm x 27.432 cm) viewed from 70 cm, sampled at 1000 Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScreenGeometry {
    pub resolution_px: (u32, u32),
    pub physical_size_cm: (f64, f64),
    pub viewing_distance_cm: f64,
    pub sampling_rate_hz: f64,
}

impl Default for ScreenGeometry {
    fn default() -> Self {
        ScreenGeometry {
            resolution_px: (1024, 768),
            physical_size_cm: (36.576, 27.432),
            viewing_distance_cm: 70.0,
            sampling_rate_hz: 1000.0,
        }
    }
}

/// Why a [`ScreenGeometry`] was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeometryError(pub String);

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid geometry: {}", self.0)
    }
}

impl ScreenGeometry {
    /// Check the structural invariants: everything strictly positive, sampling
    /// rate at least 250 Hz (below that the acceleration estimates used for
    /// microsaccade detection are meaningless), and a sample interval that is
    /// a whole number of milliseconds (timestamps are integer ms).
    pub fn validate(&self) -> Result<(), GeometryError> {
        use alloc::string::ToString;
        if self.resolution_px.0 == 0 || self.resolution_px.1 == 0 {
            return Err(GeometryError("resolution must be positive".to_string()));
        }
        if !(self.physical_size_cm.0 > 0.0) || !(self.physical_size_cm.1 > 0.0) {
            return Err(GeometryError("physical size must be positive".to_string()));
        }
        if !(self.viewing_distance_cm > 0.0) {
            return Err(GeometryError("viewing distance must be positive".to_string()));
        }
        if !(self.sampling_rate_hz >= 250.0) {
            return Err(GeometryError(
                "sampling rate must be at least 250 Hz".to_string(),
            ));
        }
        let interval = 1000.0 / self.sampling_rate_hz;
        if (interval - libm::round(interval)).abs() > 1e-9 {
            return Err(GeometryError(
                "sampling rate must divide 1000 ms evenly".to_string(),
            ));
        }
        Ok(())
    }

    /// Sample interval in integer milliseconds.
    pub fn sample_interval_ms(&self) -> u64 {
        libm::round(1000.0 / self.sampling_rate_hz) as u64
    }

    /// Degrees of visual angle subtended by one pixel at screen center,
    /// per axis: `atan(pixel_pitch_cm / viewing_distance_cm)`.
    ///
    /// The two axes agree only when the pixel pitch is square.
    pub fn deg_per_px(&self) -> DegPerPx {
        let pitch_x = self.physical_size_cm.0 / self.resolution_px.0 as f64;
        let pitch_y = self.physical_size_cm.1 / self.resolution_px.1 as f64;
        DegPerPx {
            x: libm::atan(pitch_x / self.viewing_distance_cm).to_degrees(),
            y: libm::atan(pitch_y / self.viewing_distance_cm).to_degrees(),
        }
    }

    pub fn screen_center(&self) -> Point {
        Point {
            x: self.resolution_px.0 as f64 / 2.0,
            y: self.resolution_px.1 as f64 / 2.0,
        }
    }
}

/// Per-axis degrees-per-pixel conversion factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegPerPx {
    pub x: f64,
    pub y: f64,
}

impl DegPerPx {
    /// Mean of the two axes; used where an isotropic factor is needed
    /// (dispersion thresholds, amplitude of oblique displacements).
    pub fn mean(&self) -> f64 {
        (self.x + self.y) / 2.0
    }
}

/// A point in screen pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

/// An axis-aligned rectangle in screen pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn center(&self) -> Point {
        Point::new(self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    /// Boundary-inclusive containment.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x && p.x <= self.x + self.w && p.y >= self.y && p.y <= self.y + self.h
    }

    /// Euclidean distance from `p` to the rectangle; 0 when contained.
    pub fn exterior_distance(&self, p: Point) -> f64 {
        let dx = (self.x - p.x).max(0.0).max(p.x - (self.x + self.w));
        let dy = (self.y - p.y).max(0.0).max(p.y - (self.y + self.h));
        libm::hypot(dx, dy)
    }
}

/// A closed polygon (ring of vertices; the last vertex connects back to the
/// first). Rings may be non-convex; containment uses the even-odd rule.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Polygon { vertices }
    }

    /// Even-odd containment test. Points exactly on an edge may land on
    /// either side; callers that care use `boundary_distance` as well.
    pub fn contains(&self, p: Point) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[j];
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
                if p.x < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Minimum Euclidean distance from `p` to the polygon boundary,
    /// brute-forced over every edge.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        let n = self.vertices.len();
        if n == 0 {
            return f64::INFINITY;
        }
        if n == 1 {
            return p.distance(self.vertices[0]);
        }
        let mut best = f64::INFINITY;
        let mut j = n - 1;
        for i in 0..n {
            let d = segment_distance(p, self.vertices[j], self.vertices[i]);
            if d < best {
                best = d;
            }
            j = i;
        }
        best
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len().max(1) as f64;
        let (sx, sy) = self
            .vertices
            .iter()
            .fold((0.0, 0.0), |(sx, sy), v| (sx + v.x, sy + v.y));
        Point::new(sx / n, sy / n)
    }
}

/// Distance from point `p` to segment `ab`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let abx = b.x - a.x;
    let aby = b.y - a.y;
    let len2 = abx * abx + aby * aby;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * abx + (p.y - a.y) * aby) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * abx, a.y + t * aby))
}
