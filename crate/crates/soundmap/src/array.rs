//! Microphone-array geometry and far-field per-pair delay prediction.
//!
//! The 16-microphone layout is reconstructed from six spacing values as two
//! concentric rectangles of 8 microphones each (4 corners plus 4 edge
//! midpoints); an explicit coordinate list can be loaded instead when the
//! exact geometry is known.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{UnitVec3, Vec3};

/// Number of microphones on the array.
pub const MIC_COUNT: usize = 16;

/// Number of unordered microphone pairs.
pub const PAIR_COUNT: usize = MIC_COUNT * (MIC_COUNT - 1) / 2;

/// Speed of sound default, m/s at roughly 20 C.
pub const SPEED_OF_SOUND: f64 = 343.0;

/// Largest admissible microphone spacing, meters.
pub const MAX_APERTURE: f64 = 0.5;

/// Six spacing values describing the two-rectangle layout, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArraySpacings {
    pub dx1: f64,
    pub dx2: f64,
    pub dy1: f64,
    pub dy2: f64,
    pub dz1: f64,
    pub dz2: f64,
}

impl ArraySpacings {
    pub fn new(dx1: f64, dx2: f64, dy1: f64, dy2: f64, dz1: f64, dz2: f64) -> Result<Self> {
        let s = ArraySpacings {
            dx1,
            dx2,
            dy1,
            dy2,
            dz1,
            dz2,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let all = [self.dx1, self.dx2, self.dy1, self.dy2, self.dz1, self.dz2];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidSpacings {
                reason: "all spacings must be positive and finite".into(),
            });
        }
        if self.dx1 >= self.dx2 || self.dy1 >= self.dy2 || self.dz1 >= self.dz2 {
            return Err(Error::InvalidSpacings {
                reason: "inner spacings must be strictly smaller than outer ones".into(),
            });
        }
        Ok(())
    }

    /// Spacings of the array mounted on the Pioneer2-DX robot, meters.
    pub fn pioneer2_dx() -> Self {
        ArraySpacings {
            dx1: 0.191,
            dx2: 0.332,
            dy1: 0.245,
            dy2: 0.360,
            dz1: 0.025,
            dz2: 0.040,
        }
    }

    /// Spacings of the array mounted on the TurtleBot2 robot, meters.
    pub fn turtlebot2() -> Self {
        ArraySpacings {
            dx1: 0.185,
            dx2: 0.310,
            dy1: 0.193,
            dy2: 0.284,
            dz1: 0.026,
            dz2: 0.039,
        }
    }
}

/// Positions of the 16 microphones in the robot body frame plus the mount
/// height of the array plane above the ground.
#[derive(Debug, Clone, PartialEq)]
pub struct MicArrayGeometry {
    mics: Vec<Vec3>,
    mount_height: f64,
}

/// Default array mount height above the ground, meters.
pub const DEFAULT_MOUNT_HEIGHT: f64 = 0.48;

/// On-disk geometry file: explicit mic list in meters.
#[derive(Debug, Serialize, Deserialize)]
struct GeometryFile {
    mics: Vec<[f64; 3]>,
    #[serde(default = "default_mount_height")]
    mount_height: f64,
}

fn default_mount_height() -> f64 {
    DEFAULT_MOUNT_HEIGHT
}

/// One rectangle of 8 microphones: 4 corners plus 4 edge midpoints,
/// centered on the body origin at height `z`.
fn rectangle_ring(dx: f64, dy: f64, z: f64) -> [Vec3; 8] {
    let hx = dx / 2.0;
    let hy = dy / 2.0;
    [
        Vec3::new(hx, hy, z),
        Vec3::new(hx, -hy, z),
        Vec3::new(-hx, hy, z),
        Vec3::new(-hx, -hy, z),
        Vec3::new(hx, 0.0, z),
        Vec3::new(-hx, 0.0, z),
        Vec3::new(0.0, hy, z),
        Vec3::new(0.0, -hy, z),
    ]
}

impl MicArrayGeometry {
    /// Build the two-rectangle layout from spacing values. Heights are
    /// measured relative to the array mounting plane.
    pub fn from_spacings(spacings: ArraySpacings, mount_height: f64) -> Result<Self> {
        spacings.validate()?;
        let mut mics = Vec::with_capacity(MIC_COUNT);
        mics.extend(rectangle_ring(spacings.dx1, spacings.dy1, spacings.dz1));
        mics.extend(rectangle_ring(spacings.dx2, spacings.dy2, spacings.dz2));
        Self::from_positions(mics, mount_height)
    }

    /// Wrap an explicit list of 16 body-frame positions, validating the
    /// geometry invariants.
    pub fn from_positions(mics: Vec<Vec3>, mount_height: f64) -> Result<Self> {
        if mics.len() != MIC_COUNT {
            return Err(Error::InvalidGeometry {
                reason: format!("expected {} microphones, got {}", MIC_COUNT, mics.len()),
            });
        }
        if mics.iter().any(|m| !m.is_finite()) || !mount_height.is_finite() {
            return Err(Error::InvalidGeometry {
                reason: "non-finite coordinate".into(),
            });
        }
        let mut max_spacing = 0.0f64;
        for i in 0..MIC_COUNT {
            for j in (i + 1)..MIC_COUNT {
                max_spacing = max_spacing.max(mics[i].distance(mics[j]));
            }
        }
        if max_spacing > MAX_APERTURE {
            return Err(Error::InvalidGeometry {
                reason: format!(
                    "max pairwise spacing {max_spacing:.3} m exceeds {MAX_APERTURE} m"
                ),
            });
        }
        let centroid = mics
            .iter()
            .fold(Vec3::ZERO, |acc, m| acc + *m)
            / MIC_COUNT as f64;
        if centroid.x.abs() > 1e-6 || centroid.y.abs() > 1e-6 {
            return Err(Error::InvalidGeometry {
                reason: format!(
                    "horizontal centroid ({:.2e}, {:.2e}) is not on the body origin",
                    centroid.x, centroid.y
                ),
            });
        }
        Ok(MicArrayGeometry {
            mics,
            mount_height,
        })
    }

    /// Pioneer2-DX array at the default mount height.
    pub fn pioneer2_dx() -> Self {
        Self::from_spacings(ArraySpacings::pioneer2_dx(), DEFAULT_MOUNT_HEIGHT)
            .expect("preset spacings are valid")
    }

    /// TurtleBot2 array at the default mount height.
    pub fn turtlebot2() -> Self {
        Self::from_spacings(ArraySpacings::turtlebot2(), DEFAULT_MOUNT_HEIGHT)
            .expect("preset spacings are valid")
    }

    /// Load an explicit geometry from a TOML file with `mics` (16 [x, y, z]
    /// triples in meters) and optional `mount_height`.
    pub fn from_toml_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: GeometryFile =
            toml::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        let mics = file
            .mics
            .into_iter()
            .map(|[x, y, z]| Vec3::new(x, y, z))
            .collect();
        Self::from_positions(mics, file.mount_height)
    }

    /// Resolve a preset name (`pioneer2dx`, `turtlebot2`) or a path to a
    /// geometry TOML file.
    pub fn resolve(spec: &str) -> Result<Self> {
        match spec.to_ascii_lowercase().as_str() {
            "pioneer2dx" | "pioneer2-dx" | "pioneer" => Ok(Self::pioneer2_dx()),
            "turtlebot2" | "turtlebot" => Ok(Self::turtlebot2()),
            _ => Self::from_toml_path(Path::new(spec)),
        }
    }

    pub fn mics(&self) -> &[Vec3] {
        &self.mics
    }

    pub fn mount_height(&self) -> f64 {
        self.mount_height
    }

    /// Largest distance between any two microphones, meters.
    pub fn aperture(&self) -> f64 {
        let mut max = 0.0f64;
        for i in 0..self.mics.len() {
            for j in (i + 1)..self.mics.len() {
                max = max.max(self.mics[i].distance(self.mics[j]));
            }
        }
        max
    }

    /// Radius of the bounding sphere around the body origin, meters.
    pub fn bounding_radius(&self) -> f64 {
        self.mics
            .iter()
            .map(|m| m.norm())
            .fold(0.0, f64::max)
    }

    /// Unordered index pairs (i, j) with i < j, in a fixed order shared by
    /// all per-pair computations.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(PAIR_COUNT);
        for i in 0..self.mics.len() {
            for j in (i + 1)..self.mics.len() {
                out.push((i, j));
            }
        }
        out
    }
}

/// Predicted far-field delay per unordered microphone pair, seconds.
/// `tau[k]` is how much channel `j` lags channel `i` for `pairs[k] = (i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDelays {
    pub pairs: Vec<(usize, usize)>,
    pub tau: Vec<f64>,
}

/// Plane-wave delay model: tau_ij = (m_i - m_j) . direction / c, where
/// `direction` points from the array toward the source in the body frame.
pub fn far_field_tdoa(
    geometry: &MicArrayGeometry,
    direction: UnitVec3,
    speed_of_sound: f64,
) -> PairDelays {
    assert!(speed_of_sound > 0.0, "speed of sound must be positive");
    let dir = direction.as_vec3();
    let pairs = geometry.pairs();
    let tau = pairs
        .iter()
        .map(|&(i, j)| (geometry.mics()[i] - geometry.mics()[j]).dot(dir) / speed_of_sound)
        .collect();
    PairDelays { pairs, tau }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut impl Rng) -> UnitVec3 {
        loop {
            let v = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if v.norm() > 1e-3 {
                return v.normalized().unwrap();
            }
        }
    }

    #[test]
    fn pioneer_inner_corners() {
        let g = MicArrayGeometry::pioneer2_dx();
        assert_eq!(g.mics().len(), MIC_COUNT);
        for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let expected = Vec3::new(sx * 0.0955, sy * 0.1225, 0.025);
            assert!(
                g.mics().iter().any(|m| m.distance(expected) < 1e-12),
                "missing inner corner {expected:?}"
            );
        }
    }

    #[test]
    fn turtlebot_outer_corners() {
        let g = MicArrayGeometry::turtlebot2();
        for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let expected = Vec3::new(sx * 0.155, sy * 0.142, 0.039);
            assert!(
                g.mics().iter().any(|m| m.distance(expected) < 1e-12),
                "missing outer corner {expected:?}"
            );
        }
    }

    #[test]
    fn equal_inner_outer_spacing_rejected() {
        let r = ArraySpacings::new(0.3, 0.3, 0.2, 0.3, 0.02, 0.04);
        assert!(r.is_err());
    }

    #[test]
    fn nonpositive_spacing_rejected() {
        assert!(ArraySpacings::new(0.0, 0.3, 0.2, 0.3, 0.02, 0.04).is_err());
        assert!(ArraySpacings::new(-0.1, 0.3, 0.2, 0.3, 0.02, 0.04).is_err());
    }

    #[test]
    fn centroid_is_centered() {
        for g in [MicArrayGeometry::pioneer2_dx(), MicArrayGeometry::turtlebot2()] {
            let c = g.mics().iter().fold(Vec3::ZERO, |a, m| a + *m) / 16.0;
            assert!(c.x.abs() < 1e-12 && c.y.abs() < 1e-12);
        }
    }

    #[test]
    fn layout_symmetric_under_180_rotation() {
        let g = MicArrayGeometry::pioneer2_dx();
        for m in g.mics() {
            let rotated = Vec3::new(-m.x, -m.y, m.z);
            assert!(
                g.mics().iter().any(|o| o.distance(rotated) < 1e-12),
                "no mirror mic for {m:?}"
            );
        }
    }

    #[test]
    fn broadside_direction_gives_zero_delay_for_coplanar_mics() {
        let g = MicArrayGeometry::pioneer2_dx();
        let delays = far_field_tdoa(&g, UnitVec3::Z, SPEED_OF_SOUND);
        for (k, &(i, j)) in delays.pairs.iter().enumerate() {
            if (g.mics()[i].z - g.mics()[j].z).abs() < 1e-12 {
                assert_abs_diff_eq!(delays.tau[k], 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn endfire_delay_matches_projection() {
        // Two outer corners 0.332 m apart along x.
        let g = MicArrayGeometry::pioneer2_dx();
        let delays = far_field_tdoa(&g, UnitVec3::X, SPEED_OF_SOUND);
        let expected = 0.332 / SPEED_OF_SOUND;
        let found = delays
            .pairs
            .iter()
            .zip(&delays.tau)
            .any(|(&(i, j), &tau)| {
                (g.mics()[i].x - g.mics()[j].x).abs() > 0.331
                    && (tau.abs() - expected).abs() < 1e-12
            });
        assert!(found, "no pair with the full x aperture delay");
        assert_abs_diff_eq!(expected, 9.679e-4, epsilon = 5e-7);
    }

    #[test]
    fn antisymmetric_under_pair_swap() {
        // tau_ij computed with swapped mic arguments flips sign.
        let g = MicArrayGeometry::pioneer2_dx();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let dir = random_unit(&mut rng).as_vec3();
            for (i, j) in g.pairs() {
                let tau_ij = (g.mics()[i] - g.mics()[j]).dot(dir) / SPEED_OF_SOUND;
                let tau_ji = (g.mics()[j] - g.mics()[i]).dot(dir) / SPEED_OF_SOUND;
                assert_abs_diff_eq!(tau_ij, -tau_ji, epsilon = 1e-18);
            }
        }
    }

    #[test]
    fn delays_bounded_by_aperture() {
        let g = MicArrayGeometry::turtlebot2();
        let bound = g.aperture() / SPEED_OF_SOUND;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let delays = far_field_tdoa(&g, random_unit(&mut rng), SPEED_OF_SOUND);
            for tau in delays.tau {
                assert!(tau.abs() <= bound + 1e-15);
            }
        }
    }

    #[test]
    fn tdoa_linear_in_direction() {
        // Renormalized combinations still follow the dot-product formula.
        let g = MicArrayGeometry::pioneer2_dx();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let a = random_unit(&mut rng);
            let b = random_unit(&mut rng);
            let alpha: f64 = rng.gen_range(0.1..2.0);
            let beta: f64 = rng.gen_range(0.1..2.0);
            let combo = a.as_vec3() * alpha + b.as_vec3() * beta;
            if combo.norm() < 1e-3 {
                continue;
            }
            let dir = combo.normalized().unwrap();
            let delays = far_field_tdoa(&g, dir, SPEED_OF_SOUND);
            for (k, &(i, j)) in delays.pairs.iter().enumerate() {
                let direct =
                    (g.mics()[i] - g.mics()[j]).dot(dir.as_vec3()) / SPEED_OF_SOUND;
                assert_abs_diff_eq!(delays.tau[k], direct, epsilon = 1e-18);
            }
        }
    }

    #[test]
    fn pair_count_is_120() {
        assert_eq!(MicArrayGeometry::pioneer2_dx().pairs().len(), PAIR_COUNT);
        assert_eq!(PAIR_COUNT, 120);
    }

    #[test]
    fn geometry_file_roundtrip() {
        let g = MicArrayGeometry::pioneer2_dx();
        let file = GeometryFile {
            mics: g.mics().iter().map(|m| [m.x, m.y, m.z]).collect(),
            mount_height: g.mount_height(),
        };
        let text = toml::to_string(&file).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("geom.toml");
        std::fs::write(&path, text).unwrap();
        let loaded = MicArrayGeometry::from_toml_path(&path).unwrap();
        assert_eq!(loaded, g);
    }

    #[test]
    fn rejects_wrong_mic_count() {
        let r = MicArrayGeometry::from_positions(vec![Vec3::ZERO; 4], 0.48);
        assert!(r.is_err());
    }
}
