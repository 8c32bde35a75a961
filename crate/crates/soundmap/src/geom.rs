//! Frame transforms, two-ray triangulation and the geometric diagnostics
//! used by the analysis harness (baseline angle, root square error).
//!
//! All operations are pure value computations and safe to call concurrently.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on unit-norm invariants (quaternions and direction vectors).
pub const UNIT_TOL: f64 = 1e-9;

/// Default threshold on `1 - (d1 . d2)^2` below which two rays are treated
/// as degenerate (near-parallel). Below this the ray parameters exceed any
/// plausible room scale.
pub const DEFAULT_DEGENERACY_EPS: f64 = 1e-6;

/// A point or free vector in 3D, meters (map or body frame per context).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Rescale to unit length. Errors on (near-)zero input.
    pub fn normalized(self) -> Result<UnitVec3> {
        UnitVec3::normalize(self)
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl std::ops::Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// A direction on the unit sphere; the norm is within [`UNIT_TOL`] of 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec3", into = "Vec3")]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    /// Wrap a vector that is already unit-norm within tolerance.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vec3::new(x, y, z);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                context: "unit vector",
            });
        }
        if (v.norm() - 1.0).abs() > UNIT_TOL {
            // Not unit within tolerance; caller should normalize instead.
            return Err(Error::ZeroVector);
        }
        Ok(UnitVec3(v))
    }

    /// Normalize an arbitrary vector. Errors on zero or non-finite input.
    pub fn normalize(v: Vec3) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                context: "unit vector",
            });
        }
        let n = v.norm();
        if n < 1e-300 {
            return Err(Error::ZeroVector);
        }
        Ok(UnitVec3(v / n))
    }

    pub fn as_vec3(self) -> Vec3 {
        self.0
    }

    pub fn x(self) -> f64 {
        self.0.x
    }

    pub fn y(self) -> f64 {
        self.0.y
    }

    pub fn z(self) -> f64 {
        self.0.z
    }

    pub fn dot(self, other: UnitVec3) -> f64 {
        self.0.dot(other.0)
    }

    /// Angle to another direction, degrees in [0, 180].
    pub fn angle_deg(self, other: UnitVec3) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos().to_degrees()
    }

    pub const X: UnitVec3 = UnitVec3(Vec3 {
        x: 1.0,
        y: 0.0,
        z: 0.0,
    });
    pub const Y: UnitVec3 = UnitVec3(Vec3 {
        x: 0.0,
        y: 1.0,
        z: 0.0,
    });
    pub const Z: UnitVec3 = UnitVec3(Vec3 {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    });
}

impl TryFrom<Vec3> for UnitVec3 {
    type Error = Error;
    fn try_from(v: Vec3) -> Result<Self> {
        UnitVec3::normalize(v)
    }
}

impl From<UnitVec3> for Vec3 {
    fn from(u: UnitVec3) -> Vec3 {
        u.0
    }
}

/// Unit quaternion, Hamilton convention, scalar-first, acting as an active
/// rotation body -> map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Build from components, enforcing unit norm within [`UNIT_TOL`].
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if !norm.is_finite() {
            return Err(Error::NonFinite {
                context: "quaternion",
            });
        }
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnitQuaternion { norm });
        }
        Ok(Quaternion { w, x, y, z })
    }

    /// Build from components, rescaling to unit norm. Errors on zero norm.
    pub fn normalize(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if !norm.is_finite() {
            return Err(Error::NonFinite {
                context: "quaternion",
            });
        }
        if norm < 1e-300 {
            return Err(Error::ZeroVector);
        }
        Ok(Quaternion {
            w: w / norm,
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    pub fn from_axis_angle(axis: UnitVec3, angle_rad: f64) -> Self {
        let half = 0.5 * angle_rad;
        let s = half.sin();
        Quaternion {
            w: half.cos(),
            x: axis.x() * s,
            y: axis.y() * s,
            z: axis.z() * s,
        }
    }

    /// Rotation about the map z axis (robot heading).
    pub fn from_yaw(yaw_rad: f64) -> Self {
        Quaternion::from_axis_angle(UnitVec3::Z, yaw_rad)
    }

    pub fn conjugate(self) -> Quaternion {
        Quaternion {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Hamilton product self * rhs.
    pub fn mul(self, r: Quaternion) -> Quaternion {
        Quaternion {
            w: self.w * r.w - self.x * r.x - self.y * r.y - self.z * r.z,
            x: self.w * r.x + self.x * r.w + self.y * r.z - self.z * r.y,
            y: self.w * r.y - self.x * r.z + self.y * r.w + self.z * r.x,
            z: self.w * r.z + self.x * r.y - self.y * r.x + self.z * r.w,
        }
    }

    /// Rotate a vector: q v q^-1.
    pub fn rotate(self, v: Vec3) -> Vec3 {
        // Expanded form of q v q^-1 using t = 2 (q_vec x v).
        let qv = Vec3::new(self.x, self.y, self.z);
        let t = qv.cross(v) * 2.0;
        v + t * self.w + qv.cross(t)
    }

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Spherical linear interpolation from self (s = 0) to other (s = 1),
    /// along the shorter arc.
    pub fn slerp(self, other: Quaternion, s: f64) -> Quaternion {
        let mut dot =
            self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z;
        let mut b = other;
        if dot < 0.0 {
            b = Quaternion {
                w: -other.w,
                x: -other.x,
                y: -other.y,
                z: -other.z,
            };
            dot = -dot;
        }
        if dot > 1.0 - 1e-12 {
            // Nearly identical: fall back to normalized linear interpolation.
            return Quaternion::normalize(
                self.w + (b.w - self.w) * s,
                self.x + (b.x - self.x) * s,
                self.y + (b.y - self.y) * s,
                self.z + (b.z - self.z) * s,
            )
            .expect("nlerp of near-identical unit quaternions is non-zero");
        }
        let omega = dot.clamp(-1.0, 1.0).acos();
        let sin_omega = omega.sin();
        let wa = ((1.0 - s) * omega).sin() / sin_omega;
        let wb = (s * omega).sin() / sin_omega;
        Quaternion::normalize(
            wa * self.w + wb * b.w,
            wa * self.x + wb * b.x,
            wa * self.y + wb * b.y,
            wa * self.z + wb * b.z,
        )
        .expect("slerp of unit quaternions is non-zero")
    }
}

/// Robot pose in the map frame: position plus orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Quaternion,
}

impl Pose {
    pub fn new(position: Vec3, orientation: Quaternion) -> Self {
        Pose {
            position,
            orientation,
        }
    }
}

/// Output of [`ray_to_ray`].
///
/// When `degenerate` is set the rays were near-parallel and the denominator
/// was clamped to `eps` before solving; `point`, `gap`, `g1` and `g2` are
/// then advisory only (typically far outside any plausible scene).
/// `behind` flags a solution with `g1 < 0` or `g2 < 0`, i.e. the closest
/// approach lies behind at least one ray origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangulationResult {
    pub point: Vec3,
    /// Closest distance between the two rays, meters.
    pub gap: f64,
    pub g1: f64,
    pub g2: f64,
    pub degenerate: bool,
    pub behind: bool,
}

/// Rotate a body-frame direction into the map frame using the robot pose.
pub fn rotate_to_map(pose: &Pose, local_dir: UnitVec3) -> UnitVec3 {
    let rotated = pose.orientation.rotate(local_dir.as_vec3());
    UnitVec3::normalize(rotated).expect("rotation preserves norm")
}

/// Closest-approach midpoint of two 3D lines.
///
/// Solves for the ray parameters g1, g2 minimizing the distance between
/// `origin1 + g1 dir1` and `origin2 + g2 dir2`, then returns the midpoint of
/// the connecting segment. Rays are treated as full lines: g1 and g2 may be
/// negative. When `1 - (dir1 . dir2)^2 <= eps` the lines are near-parallel;
/// the result is flagged degenerate and computed with the denominator
/// clamped to `eps`.
pub fn ray_to_ray(
    origin1: Vec3,
    dir1: UnitVec3,
    origin2: Vec3,
    dir2: UnitVec3,
    eps: f64,
) -> TriangulationResult {
    let d1 = dir1.as_vec3();
    let d2 = dir2.as_vec3();
    let c = d1.dot(d2);
    let denom = 1.0 - c * c;
    let degenerate = denom <= eps;
    let denom = denom.max(eps);

    let delta = origin1 - origin2; // l1 - l2
    let g1 = (c * d2.dot(delta) - d1.dot(delta)) / denom;
    let g2 = (c * d1.dot(-delta) - d2.dot(-delta)) / denom;

    let p1 = origin1 + d1 * g1;
    let p2 = origin2 + d2 * g2;
    let point = (p1 + p2) * 0.5;
    let gap = p1.distance(p2);

    TriangulationResult {
        point,
        gap,
        g1,
        g2,
        degenerate,
        behind: g1 < 0.0 || g2 < 0.0,
    }
}

/// Angle at the source between the lines to the two robot positions,
/// degrees in [0, 180]. Errors if the source coincides with either position.
pub fn baseline_angle(source: Vec3, p1: Vec3, p2: Vec3) -> Result<f64> {
    let u1 = (p1 - source).normalized().map_err(|_| Error::CoincidentPoints)?;
    let u2 = (p2 - source).normalized().map_err(|_| Error::CoincidentPoints)?;
    Ok(u1.angle_deg(u2))
}

/// Root square error: Euclidean distance between estimate and truth, meters.
pub fn rse(estimate: Vec3, truth: Vec3) -> f64 {
    estimate.distance(truth)
}
