//! Minimal 6D spatial algebra in body (Plucker) coordinates. Motion vectors
//! stack [angular; linear]; force vectors stack [torque; force], both taken
//! about the frame origin.

use nalgebra::{Matrix3, Matrix6, UnitQuaternion, Vector3, Vector6};

pub type Vec6 = Vector6<f64>;

pub fn vec6(ang: Vector3<f64>, lin: Vector3<f64>) -> Vec6 {
    Vec6::new(ang.x, ang.y, ang.z, lin.x, lin.y, lin.z)
}

pub fn angular(v: &Vec6) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

pub fn linear(v: &Vec6) -> Vector3<f64> {
    Vector3::new(v[3], v[4], v[5])
}

/// Coordinate transform for spatial vectors between two frames A and B,
/// where B's pose in A is (rotation `rot_ab` mapping B coords into A coords,
/// origin `pos_ab` of B expressed in A).
#[derive(Debug, Clone, Copy)]
pub struct Xform {
    /// Rotation taking A coordinates to B coordinates (transpose of rot_ab).
    pub e: Matrix3<f64>,
    /// Origin of B expressed in A coordinates.
    pub r: Vector3<f64>,
}

impl Xform {
    pub fn from_pose(rot_ab: &UnitQuaternion<f64>, pos_ab: &Vector3<f64>) -> Self {
        Xform { e: rot_ab.to_rotation_matrix().matrix().transpose(), r: *pos_ab }
    }

    /// Motion vector from A coordinates to B coordinates.
    pub fn motion(&self, v: &Vec6) -> Vec6 {
        let w = angular(v);
        let l = linear(v);
        vec6(self.e * w, self.e * (l - self.r.cross(&w)))
    }

    /// Motion vector from B coordinates back to A coordinates.
    pub fn inv_motion(&self, v: &Vec6) -> Vec6 {
        let w = self.e.transpose() * angular(v);
        let l = self.e.transpose() * linear(v);
        vec6(w, l + self.r.cross(&w))
    }

    /// Force vector from B coordinates back to A coordinates (the dual map).
    pub fn inv_force(&self, f: &Vec6) -> Vec6 {
        let n = self.e.transpose() * angular(f);
        let fl = self.e.transpose() * linear(f);
        vec6(n + self.r.cross(&fl), fl)
    }

    /// Dense 6x6 matrix of the motion map (A -> B).
    pub fn to_matrix(&self) -> Matrix6<f64> {
        let mut m = Matrix6::zeros();
        let erx = self.e * skew(&self.r);
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] = self.e[(i, j)];
                m[(i + 3, j + 3)] = self.e[(i, j)];
                m[(i + 3, j)] = -erx[(i, j)];
            }
        }
        m
    }
}

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Spatial motion cross product v x m.
pub fn cross_motion(v: &Vec6, m: &Vec6) -> Vec6 {
    let (w, l) = (angular(v), linear(v));
    let (mw, ml) = (angular(m), linear(m));
    vec6(w.cross(&mw), w.cross(&ml) + l.cross(&mw))
}

/// Spatial force cross product v x* f.
pub fn cross_force(v: &Vec6, f: &Vec6) -> Vec6 {
    let (w, l) = (angular(v), linear(v));
    let (fn_, fl) = (angular(f), linear(f));
    vec6(w.cross(&fn_) + l.cross(&fl), w.cross(&fl))
}

/// 6x6 spatial inertia of a rigid body about its frame origin: mass `m`,
/// center of mass `c` in the frame, rotational inertia `i_com` about the
/// center of mass expressed in the frame.
pub fn spatial_inertia(m: f64, c: &Vector3<f64>, i_com: &Matrix3<f64>) -> Matrix6<f64> {
    let cx = skew(c);
    let top_left = i_com + m * cx * cx.transpose();
    let mut out = Matrix6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            out[(i, j)] = top_left[(i, j)];
            out[(i, j + 3)] = m * cx[(i, j)];
            out[(i + 3, j)] = m * cx.transpose()[(i, j)];
        }
        out[(i + 3, i + 3)] = m;
    }
    out
}
