//! Analytic phantom fields: sums of Gaussian bumps restricted to the sphere,
//! optionally pushed into a symmetry class by the parity or W symmetrizers.
//! The spec of a phantom is plain data, so pipelines can rebuild the exact
//! field from a file header.

use crate::error::{Error, Result};
use crate::field::{from_fn, DynField};
use crate::geometry::Point;
use crate::mobius::{parity_parts, symmetrize_w, CenterContext};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GaussianBump {
    pub center: Vec<f64>,
    pub width: f64,
    pub amplitude: f64,
}

/// Symmetry class imposed on the base sum of bumps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryClass {
    Generic,
    PerpEven,
    PerpOdd,
    WEven,
    WOdd,
}

impl SymmetryClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SymmetryClass::Generic => "generic",
            SymmetryClass::PerpEven => "perp_even",
            SymmetryClass::PerpOdd => "perp_odd",
            SymmetryClass::WEven => "w_even",
            SymmetryClass::WOdd => "w_odd",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PhantomSpec {
    pub bumps: Vec<GaussianBump>,
    pub class: SymmetryClass,
    /// constant added to the base sum before symmetrization
    #[serde(default)]
    pub offset: f64,
}

impl PhantomSpec {
    /// A default smooth phantom for an ambient dimension: three bumps of
    /// mixed sign plus a constant, chosen to have O(1) values and no
    /// accidental symmetry.
    pub fn default_smooth(dim: usize, class: SymmetryClass) -> Self {
        let mut dirs = vec![
            vec![0.9, 0.3, -0.2, 0.5],
            vec![-0.4, 0.8, 0.6, -0.1],
            vec![0.1, -0.5, 0.9, 0.3],
        ];
        for d in &mut dirs {
            d.truncate(dim);
        }
        PhantomSpec {
            bumps: vec![
                GaussianBump {
                    center: dirs[0].clone(),
                    width: 0.8,
                    amplitude: 1.0,
                },
                GaussianBump {
                    center: dirs[1].clone(),
                    width: 0.6,
                    amplitude: -0.7,
                },
                GaussianBump {
                    center: dirs[2].clone(),
                    width: 1.0,
                    amplitude: 0.5,
                },
            ],
            class,
            offset: 0.3,
        }
    }

    /// Base field before symmetrization.
    fn base_field(&self, dim: usize) -> Result<DynField> {
        for b in &self.bumps {
            if b.center.len() != dim {
                return Err(Error::Dimension(format!(
                    "bump center has dimension {}, ambient is {dim}",
                    b.center.len()
                )));
            }
            if b.width <= 0.0 {
                return Err(Error::Domain("bump width must be positive".into()));
            }
        }
        let bumps: Vec<(DVector<f64>, f64, f64)> = self
            .bumps
            .iter()
            .map(|b| {
                (
                    DVector::from_vec(b.center.clone()),
                    2.0 * b.width * b.width,
                    b.amplitude,
                )
            })
            .collect();
        let offset = self.offset;
        Ok(from_fn(move |x: &Point| {
            offset
                + bumps
                    .iter()
                    .map(|(c, twow2, amp)| amp * (-(x - c).norm_squared() / twow2).exp())
                    .sum::<f64>()
        }))
    }

    /// Builds the field. Classes other than `Generic` need the center
    /// context; the W classes additionally need an exterior center.
    pub fn build(&self, ctx: &CenterContext) -> Result<DynField> {
        let base = self.base_field(ctx.ambient_dim())?;
        match self.class {
            SymmetryClass::Generic => Ok(base),
            SymmetryClass::PerpEven => Ok(parity_parts(ctx.center(), &base)?.0),
            SymmetryClass::PerpOdd => Ok(parity_parts(ctx.center(), &base)?.1),
            SymmetryClass::WEven => symmetrize_w(ctx, &base, 1.0),
            SymmetryClass::WOdd => symmetrize_w(ctx, &base, -1.0),
        }
    }

    /// Builds a generic field without a center (class must be `Generic`).
    pub fn build_centerless(&self, dim: usize) -> Result<DynField> {
        if self.class != SymmetryClass::Generic {
            return Err(Error::Domain(
                "symmetry classes require a center context".into(),
            ));
        }
        self.base_field(dim)
    }

    /// Max symmetry-defect of the built field over seeded sphere samples;
    /// recorded in phantom file headers.
    pub fn symmetry_residual(&self, ctx: &CenterContext, samples: usize, seed: u64) -> Result<f64> {
        let f = self.build(ctx)?;
        let mut rng = crate::sampling::rng(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = crate::sampling::sphere_point(&mut rng, ctx.ambient_dim());
            let defect = match self.class {
                SymmetryClass::Generic => 0.0,
                SymmetryClass::PerpEven => {
                    let r = crate::mobius::reflect_hyperplane(ctx.center(), &x)?;
                    f.eval(&x) - f.eval(&r)
                }
                SymmetryClass::PerpOdd => {
                    let r = crate::mobius::reflect_hyperplane(ctx.center(), &x)?;
                    f.eval(&x) + f.eval(&r)
                }
                SymmetryClass::WEven => {
                    let w = crate::mobius::involution_w(ctx, &f)?;
                    f.eval(&x) - w.eval(&x)
                }
                SymmetryClass::WOdd => {
                    let w = crate::mobius::involution_w(ctx, &f)?;
                    f.eval(&x) + w.eval(&x)
                }
            };
            worst = worst.max(defect.abs());
        }
        Ok(worst)
    }
}
