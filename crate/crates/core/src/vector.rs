use std::ops::{Add, Mul, Neg, Sub};

/// Cartesian 3-vector. Positions are in meters; the surface lies in z = 0
/// and reflects into z > 0.
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

    /// Unit vector at polar angle `theta_deg` from broadside (+z) and azimuth
    /// `phi_deg` measured from +x toward +y.
    pub fn from_angles(theta_deg: f64, phi_deg: f64) -> Self {
        let (st, ct) = theta_deg.to_radians().sin_cos();
        let (sp, cp) = phi_deg.to_radians().sin_cos();
        Self::new(st * cp, st * sp, ct)
    }

    /// Polar and azimuth angles in degrees, azimuth in [0, 360).
    pub fn to_angles(self) -> (f64, f64) {
        let r = self.norm();
        let theta = (self.z / r).clamp(-1.0, 1.0).acos().to_degrees();
        let phi = self.y.atan2(self.x).to_degrees().rem_euclid(360.0);
        (theta, phi)
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `None` for zero-length or non-finite vectors.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    /// Angle between two vectors in degrees.
    pub fn angle_to(self, other: Self) -> f64 {
        let c = self.dot(other) / (self.norm() * other.norm());
        c.clamp(-1.0, 1.0).acos().to_degrees()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}
