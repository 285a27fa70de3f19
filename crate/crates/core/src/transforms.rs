//! Forward transforms: the shifted Funk transform over central planes, the
//! parallel slice transform, the Radon–John d-plane transform on the unit
//! ball, the normalized section average, and the cross-dimension link.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{
    section_area, sphere_section_nodes, CentralPlane, ParallelPlane, PlaneSection, SectionRule,
    StiefelFrame,
};
use crate::mobius::CenterContext;
use crate::quadrature::{circle_trapezoid, gauss_legendre_on};
use nalgebra::DVector;
use rand_chacha::ChaCha8Rng;

/// (F_a f)(tau): integral of f over S^n ∩ tau with the section surface
/// measure. Planes missing the ball integrate to zero.
pub fn funk_transform(
    ctx: &CenterContext,
    f: &dyn ScalarField,
    plane: &CentralPlane,
    rule: SectionRule,
) -> Result<f64> {
    if (plane.center() - ctx.center()).norm() > 1e-10 * (1.0 + ctx.center().norm()) {
        return Err(Error::Domain("plane does not pass through the center".into()));
    }
    if !plane.meets_ball() {
        return Ok(0.0);
    }
    integrate_section(&plane.into(), f, rule)
}

/// (Pi_a f)(zeta): integral of f over S^n ∩ zeta.
pub fn parallel_slice_transform(
    f: &dyn ScalarField,
    plane: &ParallelPlane,
    rule: SectionRule,
) -> Result<f64> {
    if !plane.meets_ball() {
        return Ok(0.0);
    }
    integrate_section(&plane.into(), f, rule)
}

fn integrate_section(section: &PlaneSection, f: &dyn ScalarField, rule: SectionRule) -> Result<f64> {
    let (nodes, weights) = sphere_section_nodes(section, rule)?;
    Ok(nodes
        .iter()
        .zip(&weights)
        .map(|(x, w)| w * f.eval(x))
        .sum())
}

/// Normalized transform: the mean of f over the section with respect to the
/// probability measure. Independent of the frame completion choice.
pub fn funk_normalized(
    ctx: &CenterContext,
    f: &dyn ScalarField,
    frame: &StiefelFrame,
    rule: SectionRule,
) -> Result<f64> {
    let plane = CentralPlane::new(frame.clone(), ctx.center().clone())?;
    if !plane.meets_ball() {
        return Err(Error::InvalidPlane(
            "normalized transform needs |xi'a| < 1".into(),
        ));
    }
    let raw = funk_transform(ctx, f, &plane, rule)?;
    let k = plane.plane_dim();
    Ok(raw / section_area(k, plane.distance_from_origin()))
}

/// Affine d-plane in R^m: base point `shift` in the orthogonal complement of
/// the direction space spanned by `span`.
#[derive(Debug, Clone)]
pub struct EuclideanPlane {
    span: StiefelFrame,
    shift: DVector<f64>,
}

impl EuclideanPlane {
    pub fn new(span: StiefelFrame, shift: DVector<f64>) -> Result<Self> {
        if shift.len() != span.ambient_dim() {
            return Err(Error::Dimension("shift/span ambient mismatch".into()));
        }
        let along = span.project_coords(&shift);
        if along.norm() > 1e-12 * (1.0 + shift.norm()) {
            return Err(Error::Domain(
                "shift must lie in the orthogonal complement of the direction space".into(),
            ));
        }
        Ok(EuclideanPlane { span, shift })
    }

    /// Line in R^2 with unit normal at angle `alpha` and signed offset `p`,
    /// i.e. {y : n(alpha).y = p}.
    pub fn line2(alpha: f64, p: f64) -> Self {
        let (s, c) = alpha.sin_cos();
        let dir = DVector::from_vec(vec![-s, c]);
        EuclideanPlane {
            span: StiefelFrame::from_vector(&dir).expect("unit direction"),
            shift: DVector::from_vec(vec![c * p, s * p]),
        }
    }

    /// Hyperplane in R^m with unit normal `normal` and signed offset `p`.
    pub fn hyperplane(normal: &DVector<f64>, p: f64) -> Result<Self> {
        let n = normal.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector("hyperplane normal"));
        }
        let unit = normal / n;
        let frame = StiefelFrame::from_vector(&unit)?;
        let span = frame.completion();
        EuclideanPlane::new(span, unit * p)
    }

    pub fn span(&self) -> &StiefelFrame {
        &self.span
    }

    pub fn shift(&self) -> &DVector<f64> {
        &self.shift
    }

    pub fn plane_dim(&self) -> usize {
        self.span.frame_size()
    }

    pub fn distance_from_origin(&self) -> f64 {
        self.shift.norm()
    }
}

/// Radon–John transform: integral of phi over the plane's intersection with
/// the unit ball. The chord-angle substitution v = r sin(theta) removes the
/// (1-|y|^2)^(-1/2) endpoint singularity exactly, so integrands of that form
/// are handled at full accuracy.
pub fn radon_john(
    phi: &dyn ScalarField,
    plane: &EuclideanPlane,
    nodes: usize,
) -> Result<f64> {
    let dist = plane.distance_from_origin();
    if dist >= 1.0 {
        return Ok(0.0);
    }
    let r = (1.0 - dist * dist).sqrt();
    let d = plane.plane_dim();
    let u = plane.shift();
    let span = plane.span().matrix();
    match d {
        1 => {
            let dir = span.column(0).into_owned();
            let half_pi = std::f64::consts::FRAC_PI_2;
            let (ts, ws) = gauss_legendre_on(nodes, -half_pi, half_pi);
            Ok(ts
                .iter()
                .zip(&ws)
                .map(|(t, w)| {
                    let y = u + &dir * (r * t.sin());
                    w * r * t.cos() * phi.eval(&y)
                })
                .sum())
        }
        2 => {
            let d1 = span.column(0).into_owned();
            let d2 = span.column(1).into_owned();
            let (ts, wt) = gauss_legendre_on(nodes.div_ceil(4).max(16), 0.0, std::f64::consts::FRAC_PI_2);
            let (betas, wb) = circle_trapezoid(nodes.max(32));
            let mut total = 0.0;
            for (t, wt) in ts.iter().zip(&wt) {
                let (st, ct) = t.sin_cos();
                for beta in &betas {
                    let y = u + (&d1 * beta.cos() + &d2 * beta.sin()) * (r * st);
                    total += wt * wb * r * r * st * ct * phi.eval(&y);
                }
            }
            Ok(total)
        }
        _ => Err(Error::Unsupported(format!(
            "Radon–John quadrature for d = {d} (supported: 1, 2)"
        ))),
    }
}

/// One Monte Carlo estimate of the cross-dimension link's right-hand side:
/// the mean over frames eta_tilde in St(eta^⊥, ell-k) of the normalized
/// k-section transform on the extended frame [eta_tilde, eta], together with
/// the standard error of the estimator.
///
/// Frames whose extended plane misses the ball carry no section to average
/// over; the invariant measure is restricted to valid frames (for interior
/// centers every frame is valid and the restriction is vacuous).
pub fn dimension_link_rhs(
    ctx: &CenterContext,
    f: &dyn ScalarField,
    eta: &StiefelFrame,
    k: usize,
    mc_samples: usize,
    rule: SectionRule,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    let dim = ctx.ambient_dim();
    let ell = dim - eta.frame_size();
    let n = dim - 1;
    if !(1 < k && k < ell && ell <= n) {
        return Err(Error::Dimension(format!(
            "need 1 < k < ell <= n, got k = {k}, ell = {ell}, n = {n}"
        )));
    }
    let mut values = Vec::with_capacity(mc_samples);
    let mut attempts = 0usize;
    let max_attempts = mc_samples.saturating_mul(1000).max(100_000);
    while values.len() < mc_samples {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::Domain(
                "no valid extended frames found; every sampled section missed the ball".into(),
            ));
        }
        let eta_tilde = crate::sampling::uniform_stiefel_in_complement(rng, eta, ell - k);
        let mut cols = Vec::with_capacity(dim - k);
        for j in 0..eta_tilde.frame_size() {
            cols.push(eta_tilde.matrix().column(j).into_owned());
        }
        for j in 0..eta.frame_size() {
            cols.push(eta.matrix().column(j).into_owned());
        }
        let xi = StiefelFrame::new(nalgebra::DMatrix::from_columns(&cols))?;
        if xi.project_coords(ctx.center()).norm() >= 1.0 {
            continue;
        }
        values.push(funk_normalized(ctx, f, &xi, rule)?);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / (values.len() as f64 - 1.0).max(1.0);
    let sigma_mc = (var / values.len() as f64).sqrt();
    Ok((mean, sigma_mc))
}
