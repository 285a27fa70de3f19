//! Scalar fields: evaluable real functions on S^n or on the unit ball of a
//! subspace. Analytic phantoms are closures; reconstructed fields are
//! grid-backed with multilinear interpolation.

use crate::geometry::Point;
use std::sync::Arc;

pub trait ScalarField: Send + Sync {
    fn eval(&self, x: &Point) -> f64;
}

impl<F> ScalarField for F
where
    F: Fn(&Point) -> f64 + Send + Sync,
{
    fn eval(&self, x: &Point) -> f64 {
        self(x)
    }
}

/// Shared, owned field handle. All pipelines compose through this.
pub type DynField = Arc<dyn ScalarField>;

pub fn constant(c: f64) -> DynField {
    Arc::new(move |_x: &Point| c)
}

pub fn from_fn<F>(f: F) -> DynField
where
    F: Fn(&Point) -> f64 + Send + Sync + 'static,
{
    Arc::new(f)
}

/// a*f + b*g
pub fn lin_comb(a: f64, f: &DynField, b: f64, g: &DynField) -> DynField {
    let f = f.clone();
    let g = g.clone();
    Arc::new(move |x: &Point| a * f.eval(x) + b * g.eval(x))
}

/// Latitude–longitude grid field on S^2 with bilinear interpolation.
///
/// Rows are colatitude midpoints theta_i = (i + 1/2) pi / nlat, columns are
/// longitudes phi_j = 2 pi j / nlon (periodic).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GridField2 {
    pub nlat: usize,
    pub nlon: usize,
    pub values: Vec<f64>,
}

impl GridField2 {
    pub fn from_values(nlat: usize, nlon: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), nlat * nlon);
        GridField2 { nlat, nlon, values }
    }

    /// Samples a field on the grid.
    pub fn sample(nlat: usize, nlon: usize, f: &dyn ScalarField) -> Self {
        let mut values = Vec::with_capacity(nlat * nlon);
        for i in 0..nlat {
            let theta = (i as f64 + 0.5) * std::f64::consts::PI / nlat as f64;
            for j in 0..nlon {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / nlon as f64;
                values.push(f.eval(&sphere_pt(theta, phi)));
            }
        }
        GridField2 { nlat, nlon, values }
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        let theta = (i as f64 + 0.5) * std::f64::consts::PI / self.nlat as f64;
        let phi = 2.0 * std::f64::consts::PI * j as f64 / self.nlon as f64;
        sphere_pt(theta, phi)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nlon + j]
    }

    /// Area weight sin(theta_i) dtheta dphi of a grid cell.
    pub fn cell_weight(&self, i: usize) -> f64 {
        let theta = (i as f64 + 0.5) * std::f64::consts::PI / self.nlat as f64;
        theta.sin() * (std::f64::consts::PI / self.nlat as f64)
            * (2.0 * std::f64::consts::PI / self.nlon as f64)
    }

    /// Relative L2 distance to another field evaluated on this grid.
    pub fn relative_l2_error(&self, truth: &dyn ScalarField) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.nlat {
            let w = self.cell_weight(i);
            for j in 0..self.nlon {
                let t = truth.eval(&self.node(i, j));
                let d = self.value(i, j) - t;
                num += w * d * d;
                den += w * t * t;
            }
        }
        (num / den.max(1e-300)).sqrt()
    }

    pub fn linf_error(&self, truth: &dyn ScalarField) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.nlat {
            for j in 0..self.nlon {
                let t = truth.eval(&self.node(i, j));
                worst = worst.max((self.value(i, j) - t).abs());
            }
        }
        worst
    }
}

impl ScalarField for GridField2 {
    fn eval(&self, x: &Point) -> f64 {
        debug_assert_eq!(x.len(), 3);
        let r = x.norm();
        let theta = (x[2] / r.max(1e-300)).clamp(-1.0, 1.0).acos();
        let phi = x[1].atan2(x[0]).rem_euclid(2.0 * std::f64::consts::PI);
        let dlat = std::f64::consts::PI / self.nlat as f64;
        let dlon = 2.0 * std::f64::consts::PI / self.nlon as f64;
        // fractional row index against midpoint rows, clamped at the poles
        let fi = (theta / dlat - 0.5).clamp(0.0, (self.nlat - 1) as f64);
        let i0 = (fi.floor() as usize).min(self.nlat - 2);
        let ti = fi - i0 as f64;
        let fj = phi / dlon;
        let j0 = (fj.floor() as usize) % self.nlon;
        let tj = fj - fj.floor();
        let j1 = (j0 + 1) % self.nlon;
        let v00 = self.value(i0, j0);
        let v01 = self.value(i0, j1);
        let v10 = self.value(i0 + 1, j0);
        let v11 = self.value(i0 + 1, j1);
        (1.0 - ti) * ((1.0 - tj) * v00 + tj * v01) + ti * ((1.0 - tj) * v10 + tj * v11)
    }
}

fn sphere_pt(theta: f64, phi: f64) -> Point {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    nalgebra::dvector![st * cp, st * sp, ct]
}
