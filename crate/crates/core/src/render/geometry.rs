use alloc::string::String;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
    }

    pub fn lerp(self, o: Self, alpha: f64) -> Self {
        Self::new(
            self.x + (o.x - self.x) * alpha,
            self.y + (o.y - self.y) * alpha,
            self.z + (o.z - self.z) * alpha,
        )
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Timestamped fingertip position (mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerSample {
    pub t: f64,
    pub position: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridAxis {
    #[default]
    X,
    Y,
}

impl GridAxis {
    pub fn coord(self, p: Vec3) -> f64 {
        match self {
            GridAxis::X => p.x,
            GridAxis::Y => p.y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaterialKind {
    Stiffness {
        stiffness_k_n_per_mm: f64,
    },
    Texture {
        grid_pitch_mm: f64,
        grid_axis: GridAxis,
        /// Upper chamber supply for texture bursts.
        burst_supply_psi: f64,
    },
    Button {
        /// Press depth below the button top at which the click fires.
        click_height_mm: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceMaterial {
    pub kind: MaterialKind,
    pub temperature_c: f64,
}

/// Axis-aligned horizontal patch. The surface normal is +z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub origin_mm: [f64; 2],
    pub extent_mm: [f64; 2],
    pub surface_height_mm: f64,
}

impl Region {
    /// Closed lateral containment.
    pub fn contains_xy(&self, p: Vec3) -> bool {
        let [ox, oy] = self.origin_mm;
        let [w, h] = self.extent_mm;
        p.x >= ox && p.x <= ox + w && p.y >= oy && p.y <= oy + h
    }

    /// Whether the interiors of two patches overlap laterally.
    pub fn overlaps(&self, o: &Region) -> bool {
        let a_max = [self.origin_mm[0] + self.extent_mm[0], self.origin_mm[1] + self.extent_mm[1]];
        let b_max = [o.origin_mm[0] + o.extent_mm[0], o.origin_mm[1] + o.extent_mm[1]];
        (0..2).all(|i| self.origin_mm[i] < b_max[i] && o.origin_mm[i] < a_max[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub name: String,
    pub region: Region,
    pub material: SurfaceMaterial,
}

/// Fingertip inside the lateral extent and at or below the surface.
pub fn is_touched(p: Vec3, mesh: &Mesh) -> bool {
    mesh.region.contains_xy(p) && p.z <= mesh.region.surface_height_mm
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn slab() -> Mesh {
        Mesh {
            name: String::from("slab"),
            region: Region {
                origin_mm: [0.0, 0.0],
                extent_mm: [80.0, 60.0],
                surface_height_mm: 0.0,
            },
            material: SurfaceMaterial {
                kind: MaterialKind::Stiffness {
                    stiffness_k_n_per_mm: 0.5,
                },
                temperature_c: 13.0,
            },
        }
    }

    #[test]
    fn touch_examples() {
        let m = slab();
        assert!(is_touched(Vec3::new(40.0, 30.0, -1.0), &m));
        assert!(!is_touched(Vec3::new(40.0, 30.0, 1.0), &m));
        assert!(is_touched(Vec3::new(40.0, 30.0, 0.0), &m));
    }

    #[test]
    fn boundary_is_closed() {
        let m = slab();
        let eps = 1e-9;
        for (x, y) in [(0.0, 30.0), (80.0, 30.0), (40.0, 0.0), (40.0, 60.0), (0.0, 0.0), (80.0, 60.0)] {
            assert!(is_touched(Vec3::new(x, y, 0.0), &m), "({x}, {y})");
        }
        for (x, y) in [(-eps, 30.0), (80.0 + eps, 30.0), (40.0, -eps), (40.0, 60.0 + eps)] {
            assert!(!is_touched(Vec3::new(x, y, 0.0), &m), "({x}, {y})");
        }
        assert!(!is_touched(Vec3::new(40.0, 30.0, eps), &m));
        assert!(is_touched(Vec3::new(40.0, 30.0, -eps), &m));
    }

    #[test]
    fn touching_edges_do_not_overlap() {
        let a = slab().region;
        let b = Region {
            origin_mm: [80.0, 0.0],
            ..a
        };
        assert!(!a.overlaps(&b));
        let c = Region {
            origin_mm: [79.0, 59.0],
            ..a
        };
        assert!(a.overlaps(&c));
    }
}
