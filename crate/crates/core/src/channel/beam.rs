use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ChannelError;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n.is_finite() && n > 1e-12).then(|| self * (1.0 / n))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self * -1.0
    }
}

/// Uniform planar array of `rows × cols` elements lying in the plane normal
/// to `boresight`. Columns run horizontally, rows vertically.
#[derive(Clone, Debug, PartialEq)]
pub struct AntennaArray {
    rows: u32,
    cols: u32,
    spacing_wl: f64,
    boresight: Vec3,
    horizontal: Vec3,
    vertical: Vec3,
    backlobe_floor_db: f64,
}

pub const DEFAULT_BACKLOBE_FLOOR_DB: f64 = 30.0;

impl AntennaArray {
    pub fn new(rows: u32, cols: u32, boresight: Vec3) -> Result<Self, ChannelError> {
        Self::with_spacing(rows, cols, 0.5, boresight)
    }

    pub fn with_spacing(rows: u32, cols: u32, spacing_wl: f64, boresight: Vec3) -> Result<Self, ChannelError> {
        if rows == 0 || cols == 0 {
            return Err(ChannelError::InvalidArray(format!("{rows}x{cols}")));
        }
        if !(spacing_wl.is_finite() && spacing_wl > 0.0) {
            return Err(ChannelError::InvalidArray(format!("spacing {spacing_wl}")));
        }
        let boresight = boresight.normalized().ok_or(ChannelError::ZeroDirection)?;
        let horizontal = Vec3::Z
            .cross(boresight)
            .normalized()
            .unwrap_or(Vec3::X);
        let vertical = boresight.cross(horizontal);
        Ok(AntennaArray {
            rows,
            cols,
            spacing_wl,
            boresight,
            horizontal,
            vertical,
            backlobe_floor_db: DEFAULT_BACKLOBE_FLOOR_DB,
        })
    }

    pub fn with_backlobe_floor_db(mut self, floor_db: f64) -> Self {
        self.backlobe_floor_db = floor_db;
        self
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn boresight(&self) -> Vec3 {
        self.boresight
    }

    pub fn elements(&self) -> u32 {
        self.rows * self.cols
    }

    pub fn peak_gain_db(&self) -> f64 {
        10.0 * f64::from(self.elements()).log10()
    }

    /// Element positions in wavelengths, column-major from the array origin.
    pub fn element_positions(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.elements() as usize);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(
                    self.horizontal * (f64::from(c) * self.spacing_wl)
                        + self.vertical * (f64::from(r) * self.spacing_wl),
                );
            }
        }
        out
    }

    /// Linear power gain of the beam steered at `steer`, seen from `eval`.
    ///
    /// Equals `|a(eval)ᴴ w(steer)|²` with `w = a(steer)/√(NM)`, so the peak is
    /// `N·M`. Directions behind the array plane get a flat floor
    /// `backlobe_floor_db` below peak; a single element is isotropic.
    pub fn gain_linear(&self, steer: Vec3, eval: Vec3) -> Result<f64, ChannelError> {
        let steer = steer.normalized().ok_or(ChannelError::ZeroDirection)?;
        let eval = eval.normalized().ok_or(ChannelError::ZeroDirection)?;
        let n = f64::from(self.elements());
        if self.elements() == 1 {
            return Ok(1.0);
        }
        if eval.dot(self.boresight) < 0.0 {
            return Ok(n * 10f64.powf(-self.backlobe_floor_db / 10.0));
        }
        // separable in the two array axes
        let delta = steer - eval;
        let phase = 2.0 * PI * self.spacing_wl;
        let h = axis_factor(self.cols, phase * delta.dot(self.horizontal));
        let v = axis_factor(self.rows, phase * delta.dot(self.vertical));
        Ok((h * v / n).min(n))
    }

    pub fn gain_db(&self, steer: Vec3, eval: Vec3) -> Result<f64, ChannelError> {
        Ok(10.0 * self.gain_linear(steer, eval)?.log10())
    }
}

/// `|Σ_{k<n} e^{j k ψ}|²`
fn axis_factor(n: u32, psi: f64) -> f64 {
    let sum: Complex64 = (0..n).map(|k| Complex64::from_polar(1.0, f64::from(k) * psi)).sum();
    sum.norm_sqr()
}

/// Array size written as `"<rows>x<cols>"`, e.g. `"4x4"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ArraySize {
    pub rows: u32,
    pub cols: u32,
}

impl ArraySize {
    pub const fn new(rows: u32, cols: u32) -> Self {
        ArraySize { rows, cols }
    }
}

impl fmt::Display for ArraySize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

impl FromStr for ArraySize {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ChannelError::InvalidArray(s.to_owned());
        let (r, c) = s.split_once(['x', 'X', '×']).ok_or_else(bad)?;
        let rows: u32 = r.trim().parse().map_err(|_| bad())?;
        let cols: u32 = c.trim().parse().map_err(|_| bad())?;
        if rows == 0 || cols == 0 {
            return Err(bad());
        }
        Ok(ArraySize { rows, cols })
    }
}

impl Serialize for ArraySize {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ArraySize {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct sum over every element, independent of the separable form.
    fn brute_force_gain(array: &AntennaArray, steer: Vec3, eval: Vec3) -> f64 {
        let n = array.elements() as f64;
        let sum: Complex64 = array
            .element_positions()
            .into_iter()
            .map(|p| {
                let a_eval = Complex64::from_polar(1.0, 2.0 * PI * p.dot(eval));
                let w = Complex64::from_polar(1.0 / n.sqrt(), 2.0 * PI * p.dot(steer));
                a_eval.conj() * w
            })
            .sum();
        sum.norm_sqr()
    }

    fn dir_deg(azimuth: f64, elevation: f64) -> Vec3 {
        let (a, e) = (azimuth.to_radians(), elevation.to_radians());
        Vec3::new(a.cos() * e.cos(), a.sin() * e.cos(), e.sin())
    }

    #[test]
    fn matched_4x4_peak() {
        let arr = AntennaArray::new(4, 4, Vec3::X).unwrap();
        let g = arr.gain_db(Vec3::X, Vec3::X).unwrap();
        assert!((g - 12.0412).abs() < 1e-4);
        let off = dir_deg(20.0, 5.0);
        assert!((arr.gain_db(off, off).unwrap() - 10.0 * 16f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn single_element_is_isotropic() {
        let arr = AntennaArray::new(1, 1, Vec3::X).unwrap();
        for eval in [Vec3::X, -Vec3::X, Vec3::Y, dir_deg(137.0, -20.0)] {
            assert_eq!(arr.gain_db(dir_deg(10.0, 0.0), eval).unwrap(), 0.0);
        }
    }

    #[test]
    fn two_by_two_at_ninety_degrees_matches_direct_sum() {
        let arr = AntennaArray::new(2, 2, Vec3::X).unwrap();
        // horizontal 90°: elements along the row cancel pairwise
        let g = arr.gain_linear(Vec3::X, Vec3::Y).unwrap();
        let oracle = brute_force_gain(&arr, Vec3::X, Vec3::Y);
        assert!((g - oracle).abs() < 1e-12);
        assert!(oracle < 1e-20);
        // a 90° direction off both axes is not a null
        let diag = Vec3::new(0.0, 1.0, 1.0).normalized().unwrap();
        let g = arr.gain_linear(Vec3::X, diag).unwrap();
        let oracle = brute_force_gain(&arr, Vec3::X, diag);
        assert!((g - oracle).abs() < 1e-12);
        assert!(oracle > 0.01);
    }

    #[test]
    fn front_hemisphere_matches_direct_sum() {
        let arr = AntennaArray::new(4, 4, Vec3::X).unwrap();
        for (sa, se, ea, ee) in [(0.0, 0.0, 10.0, 0.0), (15.0, -5.0, -30.0, 10.0), (60.0, 20.0, 61.0, 19.0)] {
            let (s, e) = (dir_deg(sa, se), dir_deg(ea, ee));
            let g = arr.gain_linear(s, e).unwrap();
            assert!((g - brute_force_gain(&arr, s, e)).abs() < 1e-9);
        }
    }

    #[test]
    fn backlobe_floor() {
        let arr = AntennaArray::new(4, 4, Vec3::X).unwrap();
        let g = arr.gain_db(Vec3::X, -Vec3::X).unwrap();
        assert!((g - (arr.peak_gain_db() - 30.0)).abs() < 1e-9);
    }

    #[test]
    fn zero_direction_rejected() {
        let arr = AntennaArray::new(2, 2, Vec3::X).unwrap();
        assert!(matches!(arr.gain_db(Vec3::default(), Vec3::X), Err(ChannelError::ZeroDirection)));
        assert!(arr.gain_db(Vec3::X, Vec3::default()).is_err());
        assert!(AntennaArray::new(2, 2, Vec3::default()).is_err());
        assert!(AntennaArray::new(0, 2, Vec3::X).is_err());
    }

    #[test]
    fn array_size_parses() {
        assert_eq!("4x4".parse::<ArraySize>().unwrap(), ArraySize::new(4, 4));
        assert_eq!("1X2".parse::<ArraySize>().unwrap(), ArraySize::new(1, 2));
        assert!("4".parse::<ArraySize>().is_err());
        assert!("0x4".parse::<ArraySize>().is_err());
    }

    proptest::proptest! {
        #[test]
        fn gain_never_exceeds_peak(
            rows in 1u32..5, cols in 1u32..5,
            sa in -80.0f64..80.0, se in -60.0f64..60.0,
            ea in -180.0f64..180.0, ee in -89.0f64..89.0,
        ) {
            let arr = AntennaArray::new(rows, cols, Vec3::X).unwrap();
            let g = arr.gain_db(dir_deg(sa, se), dir_deg(ea, ee)).unwrap();
            proptest::prop_assert!(g <= arr.peak_gain_db() + 1e-9);
        }
    }
}
