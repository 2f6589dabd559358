use crate::scalar::{add, dot, norm, Real, Vec3};

use super::MeshError;

/// A proper rigid motion `x ↦ Rx + t` with `R ∈ SO(3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion<T> {
    rotation: [[T; 3]; 3],
    translation: Vec3<T>,
}

impl<T: Real> RigidMotion<T> {
    /// Validates `RᵀR = I` and `det R = 1` to within [`Real::geometric_tolerance`].
    pub fn new(rotation: [[T; 3]; 3], translation: Vec3<T>) -> Result<Self, MeshError> {
        let tol = T::geometric_tolerance();
        let finite = rotation.iter().flatten().chain(&translation).all(|x| x.is_finite());
        if !finite {
            return Err(MeshError::InvalidRotation);
        }
        let col = |j: usize| [rotation[0][j], rotation[1][j], rotation[2][j]];
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { T::one() } else { T::zero() };
                if (dot(col(i), col(j)) - expect).abs() > tol {
                    return Err(MeshError::InvalidRotation);
                }
            }
        }
        if (det3(&rotation) - T::one()).abs() > tol {
            return Err(MeshError::InvalidRotation);
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self::from_translation([T::zero(); 3])
    }

    pub fn from_translation(translation: Vec3<T>) -> Self {
        let (o, z) = (T::one(), T::zero());
        Self {
            rotation: [[o, z, z], [z, o, z], [z, z, o]],
            translation,
        }
    }

    /// Rotation by `angle` radians about `axis` (normalized internally), then translation.
    pub fn from_axis_angle(axis: Vec3<T>, angle: T, translation: Vec3<T>) -> Self {
        let len = norm(axis);
        let [x, y, z] = axis.map(|c| c / len);
        let (s, c) = angle.sin_cos();
        let t = T::one() - c;
        let rotation = [
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ];
        Self {
            rotation,
            translation,
        }
    }

    /// Rotation from a (not necessarily normalized) quaternion `w + xi + yj + zk`.
    pub fn from_quaternion(q: [T; 4], translation: Vec3<T>) -> Self {
        let len = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        let [w, x, y, z] = q.map(|c| c / len);
        let two = T::one() + T::one();
        let o = T::one();
        let rotation = [
            [o - two * (y * y + z * z), two * (x * y - w * z), two * (x * z + w * y)],
            [two * (x * y + w * z), o - two * (x * x + z * z), two * (y * z - w * x)],
            [two * (x * z - w * y), two * (y * z + w * x), o - two * (x * x + y * y)],
        ];
        Self {
            rotation,
            translation,
        }
    }

    pub fn rotation(&self) -> &[[T; 3]; 3] {
        &self.rotation
    }

    pub fn translation(&self) -> Vec3<T> {
        self.translation
    }

    #[inline]
    pub fn rotate(&self, v: Vec3<T>) -> Vec3<T> {
        let r = &self.rotation;
        [dot(r[0], v), dot(r[1], v), dot(r[2], v)]
    }

    #[inline]
    pub fn apply_point(&self, p: Vec3<T>) -> Vec3<T> {
        add(self.rotate(p), self.translation)
    }
}

fn det3<T: Real>(m: &[[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}
