use crate::channel::{AntennaArray, Vec3};

#[derive(Clone, Debug)]
pub struct Vehicle {
    pub id: usize,
    /// Road coordinates: x along the road, y lane offset.
    pub position: Vec3,
    /// Speed along +x.
    pub speed_mps: f64,
    pub antenna: AntennaArray,
}

impl Vehicle {
    /// Unit vector from this vehicle toward `other`.
    pub fn direction_to(&self, other: &Vehicle) -> Option<Vec3> {
        (other.position - self.position).normalized()
    }
}

/// True if some vehicle other than the endpoints sits within `clearance_m`
/// of the open segment `a`→`b`.
pub fn segment_blocked(a: Vec3, b: Vec3, others: impl IntoIterator<Item = Vec3>, clearance_m: f64) -> bool {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return false;
    }
    others.into_iter().any(|p| {
        let t = (p - a).dot(ab) / len2;
        if t <= 0.0 || t >= 1.0 {
            return false;
        }
        let closest = a + ab * t;
        (p - closest).norm() < clearance_m
    })
}
