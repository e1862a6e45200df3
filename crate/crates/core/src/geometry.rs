//! Positions, the UE's straight-line trajectory, and box obstacles.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    fn axis(&self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl From<[f64; 3]> for Point3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

impl std::ops::Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, k: f64) -> Point3 {
        Point3::new(self.x * k, self.y * k, self.z * k)
    }
}

pub fn distance_3d(a: Point3, b: Point3) -> f64 {
    (b - a).norm()
}

/// Converts km/h to m/s.
#[inline]
pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}

/// Constant-velocity straight-line motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    start: Point3,
    direction: Point3,
    speed_kmh: f64,
}

impl Trajectory {
    /// `direction` is normalized here; a zero vector or negative speed is rejected.
    pub fn new(start: Point3, direction: Point3, speed_kmh: f64) -> Option<Self> {
        let len = direction.norm();
        if !start.is_finite() || !len.is_finite() || len == 0.0 {
            return None;
        }
        if !(speed_kmh >= 0.0 && speed_kmh.is_finite()) {
            return None;
        }
        Some(Self {
            start,
            direction: direction * (1.0 / len),
            speed_kmh,
        })
    }

    pub fn start(&self) -> Point3 {
        self.start
    }

    pub fn direction(&self) -> Point3 {
        self.direction
    }

    pub fn speed_kmh(&self) -> f64 {
        self.speed_kmh
    }

    pub fn position_at(&self, t_s: f64) -> Point3 {
        self.start + self.direction * (kmh_to_mps(self.speed_kmh) * t_s)
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub min: Point3,
    pub max: Point3,
}

impl Obstacle {
    pub fn new(min: Point3, max: Point3) -> Option<Self> {
        let ok = min.is_finite()
            && max.is_finite()
            && min.x <= max.x
            && min.y <= max.y
            && min.z <= max.z;
        ok.then_some(Self { min, max })
    }

    /// Slab test on the open segment `(a, b)`. The segment must pass through
    /// the box interior: touching a face, edge or corner does not count.
    pub fn blocks(&self, a: Point3, b: Point3) -> bool {
        let d = b - a;
        let mut t_enter = 0.0_f64;
        let mut t_exit = 1.0_f64;
        for i in 0..3 {
            let (lo, hi) = (self.min.axis(i), self.max.axis(i));
            let (o, v) = (a.axis(i), d.axis(i));
            if v == 0.0 {
                if o <= lo || o >= hi {
                    return false;
                }
            } else {
                let mut t0 = (lo - o) / v;
                let mut t1 = (hi - o) / v;
                if t0 > t1 {
                    std::mem::swap(&mut t0, &mut t1);
                }
                t_enter = t_enter.max(t0);
                t_exit = t_exit.min(t1);
                if t_enter >= t_exit {
                    return false;
                }
            }
        }
        t_enter < t_exit
    }
}

pub fn blockage_count(a: Point3, b: Point3, obstacles: &[Obstacle]) -> u32 {
    obstacles.iter().filter(|o| o.blocks(a, b)).count() as u32
}
