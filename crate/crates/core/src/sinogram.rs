//! Interpolated hyperplane data: line sinograms on the disk and plane
//! sinograms on the 3-ball, the inputs of the dual-mean / inversion stage.
//!
//! Offsets are sampled at Chebyshev nodes t = cos(psi) and interpolated in
//! the psi variable, where sqrt(1 - t^2)-type boundary behavior is smooth.

use crate::error::{Error, Result};
use crate::profile::{LatticeSpec, SectionProfile, TransformId};

/// Catmull-Rom weights for a unit-spaced grid, local coordinate s in [0,1].
fn catmull_rom(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [
        -0.5 * s3 + s2 - 0.5 * s,
        1.5 * s3 - 2.5 * s2 + 1.0,
        -1.5 * s3 + 2.0 * s2 + 0.5 * s,
        0.5 * s3 - 0.5 * s2,
    ]
}

/// Function on hyperplanes of R^m, addressed by unit normal and signed offset.
pub trait HyperplaneFn: Sync {
    fn ambient(&self) -> usize;
    fn eval(&self, normal: &[f64], p: f64) -> f64;
}

/// Closure-backed hyperplane data, used by oracles and tests.
pub struct FnHyperplane<F: Fn(&[f64], f64) -> f64 + Sync> {
    pub m: usize,
    pub f: F,
}

impl<F: Fn(&[f64], f64) -> f64 + Sync> HyperplaneFn for FnHyperplane<F> {
    fn ambient(&self) -> usize {
        self.m
    }

    fn eval(&self, normal: &[f64], p: f64) -> f64 {
        (self.f)(normal, p)
    }
}

/// Uniform psi-axis description: psi_j = psi0 + j * dpsi.
#[derive(Debug, Clone, Copy)]
struct PsiAxis {
    psi0: f64,
    dpsi: f64,
    count: usize,
}

impl PsiAxis {
    fn from_offsets(offsets: &[f64]) -> Result<PsiAxis> {
        if offsets.len() < 4 {
            return Err(Error::Domain("need at least 4 offset nodes".into()));
        }
        let psis: Vec<f64> = offsets.iter().map(|t| t.clamp(-1.0, 1.0).acos()).collect();
        let dpsi = psis[1] - psis[0];
        for w in psis.windows(2) {
            if ((w[1] - w[0]) - dpsi).abs() > 1e-9 {
                return Err(Error::Domain(
                    "offsets are not Chebyshev nodes on a uniform psi grid".into(),
                ));
            }
        }
        Ok(PsiAxis {
            psi0: psis[0],
            dpsi,
            count: psis.len(),
        })
    }

    /// Fractional index of an offset p; outside the sampled range the index
    /// clamps to the edge (constant extension toward |p| -> 1).
    fn locate(&self, p: f64) -> (usize, f64) {
        let psi = p.clamp(-1.0, 1.0).acos();
        let fi = (psi - self.psi0) / self.dpsi;
        let fi = fi.clamp(0.0, (self.count - 1) as f64);
        let i0 = (fi.floor() as usize).min(self.count - 2);
        (i0, fi - i0 as f64)
    }
}

fn clamped_row_index(i: isize, count: usize) -> usize {
    i.clamp(0, count as isize - 1) as usize
}

/// Sinogram of lines in R^2: values on an (angle x offset) lattice for lines
/// {y : n(alpha).y = t}, angles uniform over the full circle.
pub struct LineSinogram2 {
    angles: usize,
    axis: PsiAxis,
    /// values[i * offsets + j]
    values: Vec<f64>,
}

impl LineSinogram2 {
    pub fn new(angles: usize, offsets: &[f64], values: Vec<f64>) -> Result<Self> {
        if values.len() != angles * offsets.len() {
            return Err(Error::Dimension("sinogram value count".into()));
        }
        Ok(LineSinogram2 {
            angles,
            axis: PsiAxis::from_offsets(offsets)?,
            values,
        })
    }

    /// Builds the Radon-side data Phi from a slice profile by removing the
    /// sqrt(1 - t^2) factor of the slice-to-Radon reduction.
    pub fn from_slice_profile(profile: &SectionProfile) -> Result<Self> {
        let (angles, offsets) = match &profile.header.lattice {
            LatticeSpec::ParallelSinogram {
                angles, offsets, ..
            } => (*angles, offsets.clone()),
            LatticeSpec::MappedParallel { inner } => match inner.as_ref() {
                LatticeSpec::ParallelSinogram {
                    angles, offsets, ..
                } => (*angles, offsets.clone()),
                _ => return Err(Error::Unsupported("lattice is not a line sinogram".into())),
            },
            _ => return Err(Error::Unsupported("lattice is not a line sinogram".into())),
        };
        let mut values = Vec::with_capacity(profile.values.len());
        for (flat, v) in profile.values.iter().enumerate() {
            let t = offsets[flat % offsets.len()];
            values.push(v / (1.0 - t * t).sqrt());
        }
        LineSinogram2::new(angles, &offsets, values)
    }

    /// Plain Radon sinogram (no weight removal).
    pub fn from_radon_profile(profile: &SectionProfile) -> Result<Self> {
        if profile.header.transform != TransformId::Radon {
            return Err(Error::Unsupported("not a Radon profile".into()));
        }
        match &profile.header.lattice {
            LatticeSpec::LineSinogram2 { angles, offsets } => {
                LineSinogram2::new(*angles, offsets, profile.values.clone())
            }
            _ => Err(Error::Unsupported("lattice is not a line sinogram".into())),
        }
    }

    fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis.count + j]
    }

    /// Interpolates at a normal angle beta and offset p.
    pub fn eval_angle(&self, beta: f64, p: f64) -> f64 {
        if p.abs() >= 1.0 {
            return 0.0;
        }
        let fa = beta.rem_euclid(2.0 * std::f64::consts::PI) / (2.0 * std::f64::consts::PI)
            * self.angles as f64;
        let ia = fa.floor() as isize;
        let wa = catmull_rom(fa - ia as f64);
        let (j0, sj) = self.axis.locate(p);
        let wj = catmull_rom(sj);
        let mut total = 0.0;
        for (da, wa) in wa.iter().enumerate() {
            let row = (ia + da as isize - 1).rem_euclid(self.angles as isize) as usize;
            let mut acc = 0.0;
            for (dj, wj) in wj.iter().enumerate() {
                let col = clamped_row_index(j0 as isize + dj as isize - 1, self.axis.count);
                acc += wj * self.value(row, col);
            }
            total += wa * acc;
        }
        total
    }
}

impl HyperplaneFn for LineSinogram2 {
    fn ambient(&self) -> usize {
        2
    }

    fn eval(&self, normal: &[f64], p: f64) -> f64 {
        self.eval_angle(normal[1].atan2(normal[0]), p)
    }
}

/// Sinogram of planes in R^3: values on an
/// (azimuth x polar-midpoint x offset) lattice for planes {y : n.y = t}.
pub struct SphereSinogram3 {
    azimuth: usize,
    polar: usize,
    axis: PsiAxis,
    /// values[(i * polar + m) * offsets + j]
    values: Vec<f64>,
}

impl SphereSinogram3 {
    pub fn new(
        azimuth: usize,
        polar: usize,
        offsets: &[f64],
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != azimuth * polar * offsets.len() {
            return Err(Error::Dimension("sinogram value count".into()));
        }
        if polar < 4 {
            return Err(Error::Domain("need at least 4 polar rows".into()));
        }
        Ok(SphereSinogram3 {
            azimuth,
            polar,
            axis: PsiAxis::from_offsets(offsets)?,
            values,
        })
    }

    pub fn from_slice_profile(profile: &SectionProfile) -> Result<Self> {
        let (azimuth, polar, offsets) = match &profile.header.lattice {
            LatticeSpec::ParallelSphereSinogram {
                azimuth,
                polar,
                offsets,
                ..
            } => (*azimuth, *polar, offsets.clone()),
            LatticeSpec::MappedParallel { inner } => match inner.as_ref() {
                LatticeSpec::ParallelSphereSinogram {
                    azimuth,
                    polar,
                    offsets,
                    ..
                } => (*azimuth, *polar, offsets.clone()),
                _ => return Err(Error::Unsupported("lattice is not a plane sinogram".into())),
            },
            _ => return Err(Error::Unsupported("lattice is not a plane sinogram".into())),
        };
        let mut values = Vec::with_capacity(profile.values.len());
        for (flat, v) in profile.values.iter().enumerate() {
            let t = offsets[flat % offsets.len()];
            values.push(v / (1.0 - t * t).sqrt());
        }
        SphereSinogram3::new(azimuth, polar, &offsets, values)
    }

    pub fn from_radon_profile(profile: &SectionProfile) -> Result<Self> {
        if profile.header.transform != TransformId::Radon {
            return Err(Error::Unsupported("not a Radon profile".into()));
        }
        match &profile.header.lattice {
            LatticeSpec::PlaneSinogram3 {
                azimuth,
                polar,
                offsets,
            } => SphereSinogram3::new(*azimuth, *polar, offsets, profile.values.clone()),
            _ => Err(Error::Unsupported("lattice is not a plane sinogram".into())),
        }
    }

    fn value(&self, i: usize, m: usize, j: usize) -> f64 {
        self.values[(i * self.polar + m) * self.axis.count + j]
    }

    /// Row lookup with pole wrap: stepping past a pole lands on the
    /// antipodal azimuth column.
    fn row(&self, i_az: isize, m: isize, j: usize) -> f64 {
        let (i_az, m) = if m < 0 {
            (i_az + self.azimuth as isize / 2, -1 - m)
        } else if m >= self.polar as isize {
            (
                i_az + self.azimuth as isize / 2,
                2 * self.polar as isize - 1 - m,
            )
        } else {
            (i_az, m)
        };
        let i = i_az.rem_euclid(self.azimuth as isize) as usize;
        self.value(i, m as usize, j)
    }
}

impl HyperplaneFn for SphereSinogram3 {
    fn ambient(&self) -> usize {
        3
    }

    fn eval(&self, normal: &[f64], p: f64) -> f64 {
        if p.abs() >= 1.0 {
            return 0.0;
        }
        let theta = normal[2].clamp(-1.0, 1.0).acos();
        let u = normal[1].atan2(normal[0]);
        let fa = u.rem_euclid(2.0 * std::f64::consts::PI) / (2.0 * std::f64::consts::PI)
            * self.azimuth as f64;
        let ia = fa.floor() as isize;
        let wa = catmull_rom(fa - ia as f64);
        let dth = std::f64::consts::PI / self.polar as f64;
        let fm = (theta / dth - 0.5).clamp(-0.999, self.polar as f64 - 0.001);
        let im = fm.floor() as isize;
        let wm = catmull_rom(fm - im as f64);
        let (j0, sj) = self.axis.locate(p);
        let wj = catmull_rom(sj);
        let mut total = 0.0;
        for (da, wa) in wa.iter().enumerate() {
            let az = ia + da as isize - 1;
            for (dm, wm) in wm.iter().enumerate() {
                let m = im + dm as isize - 1;
                let mut acc = 0.0;
                for (dj, wj) in wj.iter().enumerate() {
                    let col = clamped_row_index(j0 as isize + dj as isize - 1, self.axis.count);
                    acc += wj * self.row(az, m, col);
                }
                total += wa * wm * acc;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::chebyshev_offsets;

    #[test]
    fn line_sinogram_reproduces_smooth_data() {
        let angles = 64;
        let offsets = chebyshev_offsets(48, true);
        let truth = |beta: f64, p: f64| (2.0 * (1.0 - p * p)).sqrt() * (0.3 + (beta).cos().powi(2));
        let mut values = Vec::new();
        for i in 0..angles {
            let beta = 2.0 * std::f64::consts::PI * i as f64 / angles as f64;
            for t in &offsets {
                values.push(truth(beta, *t));
            }
        }
        let sino = LineSinogram2::new(angles, &offsets, values).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..500 {
            let beta = 0.013 * k as f64;
            let p = -0.98 + 1.96 * (k as f64 / 500.0);
            worst = worst.max((sino.eval_angle(beta, p) - truth(beta, p)).abs());
        }
        assert!(worst < 2e-4, "interpolation error {worst}");
    }

    #[test]
    fn line_sinogram_vanishes_outside_ball() {
        let offsets = chebyshev_offsets(16, true);
        let sino = LineSinogram2::new(8, &offsets, vec![1.0; 8 * 16]).unwrap();
        assert_eq!(sino.eval_angle(0.3, 1.01), 0.0);
        assert_eq!(sino.eval_angle(0.3, -1.2), 0.0);
        // constant-extension toward the boundary
        assert!((sino.eval_angle(0.3, 0.999) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_sinogram_smooth_data_and_pole_wrap() {
        let (az, polar) = (48, 24);
        let offsets = chebyshev_offsets(32, true);
        let truth = |n: &[f64], p: f64| (1.0 - p * p) * (0.5 + n[2] * n[2] + 0.3 * n[0]);
        let mut values = Vec::new();
        for i in 0..az {
            let u = 2.0 * std::f64::consts::PI * i as f64 / az as f64;
            for m in 0..polar {
                let th = (m as f64 + 0.5) * std::f64::consts::PI / polar as f64;
                let n = [th.sin() * u.cos(), th.sin() * u.sin(), th.cos()];
                for t in &offsets {
                    values.push(truth(&n, *t));
                }
            }
        }
        let sino = SphereSinogram3::new(az, polar, &offsets, values).unwrap();
        let mut rng = crate::testutil::rng(77);
        let mut worst: f64 = 0.0;
        for _ in 0..500 {
            let n = crate::testutil::random_sphere_point(&mut rng, 3);
            let p = rand::Rng::random_range(&mut rng, -0.97..0.97);
            let got = sino.eval(&[n[0], n[1], n[2]], p);
            worst = worst.max((got - truth(&[n[0], n[1], n[2]], p)).abs());
        }
        assert!(worst < 5e-3, "interpolation error {worst}");
        // near-pole normals still evaluate smoothly
        let got = sino.eval(&[1e-3, 0.0, (1.0f64 - 1e-6).sqrt()], 0.2);
        assert!((got - truth(&[0.0, 0.0, 1.0], 0.2)).abs() < 5e-3);
    }
}
