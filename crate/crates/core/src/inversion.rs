//! Reconstruction: Erdélyi–Kober fractional calculus on radial profiles,
//! the dual mean over planes at a fixed distance from a point, Radon–John
//! inversion, slice inversion, and the full shifted-Funk inversion chain.
//!
//! Everything works in the q = t^2 variable, where the operator
//! D = (1/2t) d/dt is exactly d/dq and the dual mean of a plane profile is
//! an even, hence smooth, function of t. The fractional derivative for odd
//! plane dimension is expanded into integrals of u, u', u'' with the
//! differentiation moved under the Erdélyi–Kober integral (the boundary
//! terms vanish on ball-supported data), so finite differences only ever
//! touch smooth profiles.

use crate::error::{Error, Result};
use crate::field::GridField2;
use crate::geometry::Point;
use crate::mobius::CenterContext;
use crate::profile::{LatticeSpec, SectionProfile, TransformId};
use crate::quadrature::{circle_trapezoid, gauss_jacobi, gauss_legendre, gauss_legendre_on};
use crate::sinogram::{HyperplaneFn, LineSinogram2, SphereSinogram3};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

const SQRT_PI: f64 = 1.772453850905516;

/// Samples of a function of t > 0 on the uniform q = t^2 grid q_i = i * hq,
/// together with the q-locations of known kinks or jumps. Interpolation and
/// differentiation never cross a break. The profile is zero beyond the grid.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    hq: f64,
    values: Vec<f64>,
    breaks: Vec<f64>,
}

impl RadialProfile {
    pub fn new(hq: f64, values: Vec<f64>, mut breaks: Vec<f64>) -> Result<Self> {
        if hq <= 0.0 || values.len() < 8 {
            return Err(Error::Domain(
                "radial profile needs hq > 0 and at least 8 nodes".into(),
            ));
        }
        breaks.retain(|b| *b > 0.0);
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(RadialProfile { hq, values, breaks })
    }

    /// Samples f(t) at the grid nodes t_i = sqrt(i * hq).
    pub fn from_fn(
        f: impl Fn(f64) -> f64,
        hq: f64,
        count: usize,
        breaks: Vec<f64>,
    ) -> Result<Self> {
        let values = (0..count).map(|i| f((i as f64 * hq).sqrt())).collect();
        RadialProfile::new(hq, values, breaks)
    }

    pub fn hq(&self) -> f64 {
        self.hq
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn q_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.hq
    }

    pub fn t_max(&self) -> f64 {
        self.q_max().sqrt()
    }

    pub fn q_node(&self, i: usize) -> f64 {
        i as f64 * self.hq
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// Maximal node-index range [lo, hi] on the same side of every break
    /// as the query point q.
    fn run_around(&self, q: f64) -> (usize, usize) {
        let mut lo = 0usize;
        let mut hi = self.values.len() - 1;
        for b in &self.breaks {
            let split = (b / self.hq).ceil() as usize; // first node at or right of the break
            if q < *b {
                hi = hi.min(split.saturating_sub(1));
            } else {
                lo = lo.max(split.min(self.values.len() - 1));
            }
        }
        (lo, hi.max(lo))
    }

    /// Break-aware cubic interpolation in q; zero beyond the grid.
    pub fn eval_q(&self, q: f64) -> f64 {
        if q < 0.0 || q > self.q_max() {
            return 0.0;
        }
        let (lo, hi) = self.run_around(q);
        let idx = (q / self.hq).floor() as usize;
        let count = (hi - lo + 1).min(4);
        if count == 0 {
            return 0.0;
        }
        let start = idx
            .saturating_sub(1)
            .clamp(lo, (hi + 1).saturating_sub(count).max(lo));
        lagrange_uniform(&self.values[start..start + count], start as f64 * self.hq, self.hq, q)
    }

    pub fn eval_t(&self, t: f64) -> f64 {
        self.eval_q(t * t)
    }

    /// First derivative in q at every node (4th order inside a run,
    /// one-sided near run edges).
    pub fn derivative_grid(&self) -> RadialProfile {
        let d = self.derivative_values(&self.values);
        RadialProfile {
            hq: self.hq,
            values: d,
            breaks: self.breaks.clone(),
        }
    }

    fn derivative_values(&self, values: &[f64]) -> Vec<f64> {
        let n = values.len();
        let mut out = vec![0.0; n];
        let mut runs: Vec<(usize, usize)> = Vec::new();
        let mut lo = 0usize;
        for b in &self.breaks {
            let split = (b / self.hq).ceil() as usize;
            if split > lo && split <= n {
                runs.push((lo, split - 1));
                lo = split;
            }
        }
        if lo < n {
            runs.push((lo, n - 1));
        }
        for (lo, hi) in runs {
            let len = hi - lo + 1;
            for i in lo..=hi {
                out[i] = if len >= 5 {
                    let w = i.saturating_sub(2).clamp(lo, hi - 4);
                    fd5(&values[w..w + 5], i - w, self.hq)
                } else if len >= 3 {
                    let w = i.saturating_sub(1).clamp(lo, hi - 2);
                    fd3(&values[w..w + 3], i - w, self.hq)
                } else if len == 2 {
                    (values[hi] - values[lo]) / self.hq
                } else {
                    0.0
                };
            }
        }
        out
    }
}

/// Lagrange interpolation through up to 4 uniformly spaced values.
fn lagrange_uniform(ys: &[f64], x0: f64, h: f64, x: f64) -> f64 {
    let n = ys.len();
    let mut total = 0.0;
    for (i, y) in ys.iter().enumerate() {
        let xi = x0 + i as f64 * h;
        let mut w = 1.0;
        for j in 0..n {
            if j != i {
                let xj = x0 + j as f64 * h;
                w *= (x - xj) / (xi - xj);
            }
        }
        total += w * y;
    }
    total
}

/// 5-point first-derivative stencils on a uniform grid, 4th order.
fn fd5(v: &[f64], at: usize, h: f64) -> f64 {
    const W: [[f64; 5]; 5] = [
        [-25.0, 48.0, -36.0, 16.0, -3.0],
        [-3.0, -10.0, 18.0, -6.0, 1.0],
        [1.0, -8.0, 0.0, 8.0, -1.0],
        [-1.0, 6.0, -18.0, 10.0, 3.0],
        [3.0, -16.0, 36.0, -48.0, 25.0],
    ];
    W[at].iter().zip(v).map(|(w, v)| w * v).sum::<f64>() / (12.0 * h)
}

/// 3-point first-derivative stencils, 2nd order.
fn fd3(v: &[f64], at: usize, h: f64) -> f64 {
    const W: [[f64; 3]; 3] = [
        [-3.0, 4.0, -1.0],
        [-1.0, 0.0, 1.0],
        [1.0, -4.0, 3.0],
    ];
    W[at].iter().zip(v).map(|(w, v)| w * v).sum::<f64>() / (2.0 * h)
}

/// Specification of the fractional derivative of order d/2 in the t^2
/// variable: the plane dimension d, the branch (even d is a pure derivative
/// power, odd d composes an Erdélyi–Kober integral of order 1/2), and the
/// quadrature effort for the integral part.
#[derive(Debug, Clone, Copy)]
pub struct FractionalOpSpec {
    pub d: usize,
    /// Gauss–Legendre nodes per panel of the substituted integral.
    pub panel_nodes: usize,
}

impl FractionalOpSpec {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 || d > 4 {
            return Err(Error::Unsupported(format!(
                "fractional derivative for d = {d} (supported: 1..=4)"
            )));
        }
        Ok(FractionalOpSpec { d, panel_nodes: 12 })
    }

    pub fn order(&self) -> f64 {
        self.d as f64 / 2.0
    }

    /// m = floor(d/2)
    pub fn m(&self) -> usize {
        self.d / 2
    }

    pub fn is_even(&self) -> bool {
        self.d % 2 == 0
    }
}

/// Erdélyi–Kober integral I^alpha of a radial profile, evaluated on the
/// profile's own grid:
///
///   (I^alpha f)(t) = (2/Gamma(alpha)) ∫_t^∞ f(s) s ds / (s^2-t^2)^(1-alpha)
///                  = (1/Gamma(alpha)) ∫_{q_t}^{Q} f(sqrt(q)) (q-q_t)^(alpha-1) dq.
///
/// The upper limit truncates at the grid end (ball-supported data vanish
/// there). alpha = 1 and alpha = 1/2 use substitutions that remove the
/// endpoint weight exactly; other orders fall back to Gauss–Jacobi.
pub fn ek_integral(alpha: f64, f: &RadialProfile) -> Result<RadialProfile> {
    if alpha <= 0.0 {
        return Err(Error::Domain(format!("EK order must be positive: {alpha}")));
    }
    let values: Vec<f64> = (0..f.len())
        .map(|i| ek_integral_at(alpha, f, f.q_node(i), 12))
        .collect();
    RadialProfile::new(f.hq(), values, f.breaks().to_vec())
}

fn ek_integral_at(alpha: f64, u: &RadialProfile, q_t: f64, panel_nodes: usize) -> f64 {
    let q_max = u.q_max();
    if q_t >= q_max {
        return 0.0;
    }
    if (alpha - 1.0).abs() < 1e-14 {
        // plain integral of the interpolant from q_t to the end
        let mut total = 0.0;
        for (a, b) in split_segments(q_t, q_max, u.breaks(), u.hq()) {
            let (xs, ws) = gauss_legendre_on(4, a, b);
            total += xs.iter().zip(&ws).map(|(x, w)| w * u.eval_q(*x)).sum::<f64>();
        }
        return total;
    }
    if (alpha - 0.5).abs() < 1e-14 {
        // zeta-substitution q = q_t + zeta^2 removes the singular weight
        let z_end = (q_max - q_t).sqrt();
        let mut bounds: Vec<f64> = vec![0.0];
        for b in u.breaks() {
            if *b > q_t && *b < q_max {
                bounds.push((b - q_t).sqrt());
            }
        }
        bounds.push(z_end);
        bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        let mut total = 0.0;
        for w in bounds.windows(2) {
            for (a, b) in graded_panels(w[0], w[1], u.hq().sqrt()) {
                let (xs, ws) = gauss_legendre_on(panel_nodes, a, b);
                total += xs
                    .iter()
                    .zip(&ws)
                    .map(|(z, w)| w * u.eval_q(q_t + z * z))
                    .sum::<f64>();
            }
        }
        return 2.0 / SQRT_PI * total;
    }
    // generic order: Gauss–Jacobi with weight z^(alpha-1) on the segment
    // touching q_t, plain Gauss–Legendre with the (now smooth) weight on the
    // segments past each break
    use statrs::function::gamma::gamma;
    let mut pts = vec![q_t];
    for b in u.breaks() {
        if *b > q_t && *b < q_max {
            pts.push(*b);
        }
    }
    pts.push(q_max);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = 0.0;
    let l1 = pts[1] - q_t;
    let (xs, ws) = gauss_jacobi(48, 0.0, alpha - 1.0);
    total += (l1 / 2.0).powf(alpha)
        * xs
            .iter()
            .zip(&ws)
            .map(|(x, w)| w * u.eval_q(q_t + l1 * (1.0 + x) / 2.0))
            .sum::<f64>();
    for seg in pts[1..].windows(2) {
        let (xs, ws) = gauss_legendre_on(48, seg[0], seg[1]);
        total += xs
            .iter()
            .zip(&ws)
            .map(|(q, w)| w * (q - q_t).powf(alpha - 1.0) * u.eval_q(*q))
            .sum::<f64>();
    }
    total / gamma(alpha)
}

/// Splits [a, b] at profile breaks and into cell-sized pieces.
fn split_segments(a: f64, b: f64, breaks: &[f64], h: f64) -> Vec<(f64, f64)> {
    let mut pts = vec![a];
    for br in breaks {
        if *br > a && *br < b {
            pts.push(*br);
        }
    }
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let len = w[1] - w[0];
        let pieces = (len / (8.0 * h)).ceil().max(1.0) as usize;
        for p in 0..pieces {
            out.push((
                w[0] + len * p as f64 / pieces as f64,
                w[0] + len * (p + 1) as f64 / pieces as f64,
            ));
        }
    }
    out
}

/// Panels on [a, b] graded geometrically away from both endpoints, where the
/// integrand can vary at the scale `fine` (near the origin of the
/// substitution) or carry root-type behavior (adjacent to a break).
fn graded_panels(a: f64, b: f64, fine: f64) -> Vec<(f64, f64)> {
    let len = b - a;
    if len <= 0.0 {
        return Vec::new();
    }
    let fine = fine.max(len * 1e-4);
    let mut bounds = vec![a];
    // forward sweep from a
    let mut step = fine;
    let mut pos = a;
    while pos + step < a + 0.5 * len {
        pos += step;
        bounds.push(pos);
        step = (step * 2.0).min(0.4);
    }
    // backward sweep from b
    let mut back = vec![b];
    let mut step = fine;
    let mut pos = b;
    while pos - step > a + 0.5 * len {
        pos -= step;
        back.push(pos);
        step = (step * 2.0).min(0.4);
    }
    bounds.extend(back.into_iter().rev());
    bounds.sort_by(|x, y| x.partial_cmp(y).unwrap());
    bounds.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    bounds
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|(a, b)| b > a)
        .collect()
}

/// Value, first, and (optionally) second q-derivative of
/// g = I^(1/2)[ q^(-m-1) F ] at q_t, with the derivatives taken under the
/// integral sign (valid because F vanishes identically near the grid end).
fn ek_half_with_derivs(
    f: &RadialProfile,
    df: &RadialProfile,
    d2f: Option<&RadialProfile>,
    m: usize,
    q_t: f64,
    panel_nodes: usize,
) -> (f64, f64, f64) {
    let q_max = f.q_max();
    let z_end = (q_max - q_t).max(0.0).sqrt();
    if z_end == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let mp1 = (m + 1) as f64;
    let mut bounds: Vec<f64> = vec![0.0];
    for b in f.breaks() {
        if *b > q_t && *b < q_max {
            bounds.push((b - q_t).sqrt());
        }
    }
    bounds.push(z_end);
    bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let (mut g, mut dg, mut d2g) = (0.0, 0.0, 0.0);
    for w in bounds.windows(2) {
        for (a, b) in graded_panels(w[0], w[1], f.hq().sqrt()) {
            let (xs, ws) = gauss_legendre_on(panel_nodes, a, b);
            for (z, wq) in xs.iter().zip(&ws) {
                let q = q_t + z * z;
                let qp = q.powf(mp1);
                let fv = f.eval_q(q);
                let dv = df.eval_q(q);
                g += wq * fv / qp;
                dg += wq * (dv / qp - mp1 * fv / (qp * q));
                if let Some(d2f) = d2f {
                    let d2v = d2f.eval_q(q);
                    d2g += wq
                        * (d2v / qp - 2.0 * mp1 * dv / (qp * q)
                            + mp1 * (mp1 + 1.0) * fv / (qp * q * q));
                }
            }
        }
    }
    let c = 2.0 / SQRT_PI;
    (c * g, c * dg, c * d2g)
}

/// Fractional derivative D^(d/2) of a radial profile on its grid.
///
/// Even d: (-D)^(d/2) f with D = d/dq, by repeated grid differentiation.
/// Odd d: t^(2-d+2m) (-D)^(m+1) [ t^d g ], g = I^(1-d/2+m)[ t^(-2m-2) f ],
/// expanded in q so that only integrals of F, F', F'' appear:
///   d = 1:  -( g/2 + q g' )
///   d = 3:  (3/4) g + 3 q g' + q^2 g''.
pub fn ek_derivative(spec: &FractionalOpSpec, f: &RadialProfile) -> Result<RadialProfile> {
    if spec.is_even() {
        let mut cur = f.clone();
        for _ in 0..spec.d / 2 {
            let d = cur.derivative_grid();
            cur = RadialProfile::new(
                d.hq(),
                d.values().iter().map(|v| -v).collect(),
                d.breaks().to_vec(),
            )?;
        }
        return Ok(cur);
    }
    let df = f.derivative_grid();
    let d2f = if spec.d >= 3 {
        Some(df.derivative_grid())
    } else {
        None
    };
    let mut values = vec![0.0; f.len()];
    for i in 1..f.len() {
        let q = f.q_node(i);
        values[i] = odd_derivative_at(spec, f, &df, d2f.as_ref(), q);
    }
    // q = 0 is the extrapolation target, not an evaluation point
    values[0] = values[1];
    RadialProfile::new(f.hq(), values, f.breaks().to_vec())
}

fn odd_derivative_at(
    spec: &FractionalOpSpec,
    f: &RadialProfile,
    df: &RadialProfile,
    d2f: Option<&RadialProfile>,
    q: f64,
) -> f64 {
    let m = spec.m();
    let (g, dg, d2g) = ek_half_with_derivs(f, df, d2f, m, q, spec.panel_nodes);
    match spec.d {
        1 => -(0.5 * g + q * dg),
        3 => 0.75 * g + 3.0 * q * dg + q * q * d2g,
        _ => unreachable!("odd d restricted to 1 and 3"),
    }
}

/// Mean of a hyperplane function over all hyperplanes at distance t from x.
///
/// For the disk (m = 2) the circle integral is split at the angles where the
/// plane offset crosses ±1 (the data's support boundary), then integrated by
/// composite Gauss–Legendre per smooth arc. For the 3-ball (m = 3) a product
/// rule over normals is used.
pub fn dual_mean(phi: &dyn HyperplaneFn, x: &[f64], t: f64, budget: usize) -> f64 {
    match phi.ambient() {
        2 => dual_mean2(phi, x, t, budget),
        3 => dual_mean3(phi, x, t, budget),
        m => panic!("dual mean implemented for m in {{2, 3}}, got {m}"),
    }
}

fn dual_mean2(phi: &dyn HyperplaneFn, x: &[f64], t: f64, budget: usize) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let beta0 = x[1].atan2(x[0]);
    let mut cuts: Vec<f64> = vec![0.0, tau];
    if r > 1e-14 {
        for target in [1.0f64, -1.0] {
            let c = (target - t) / r;
            if c.abs() < 1.0 {
                let delta = c.acos();
                for b in [beta0 + delta, beta0 - delta] {
                    cuts.push(b.rem_euclid(tau));
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let per_panel = 16usize;
    let target_len = (tau * per_panel as f64 / budget.max(32) as f64).min(0.6);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < 1e-13 {
            continue;
        }
        // skip arcs whose planes miss the support entirely
        let mid = 0.5 * (a + b);
        let p_mid = t + r * (mid - beta0).cos();
        if p_mid.abs() >= 1.0 {
            continue;
        }
        let panels = ((b - a) / target_len).ceil().max(1.0) as usize;
        for p in 0..panels {
            let pa = a + (b - a) * p as f64 / panels as f64;
            let pb = a + (b - a) * (p + 1) as f64 / panels as f64;
            let (xs, ws) = gauss_legendre_on(per_panel, pa, pb);
            for (beta, w) in xs.iter().zip(&ws) {
                let n = [beta.cos(), beta.sin()];
                let p = t + r * (beta - beta0).cos();
                total += w * phi.eval(&n, p);
            }
        }
    }
    total / tau
}

fn dual_mean3(phi: &dyn HyperplaneFn, x: &[f64], t: f64, budget: usize) -> f64 {
    let nz = (budget / 64).clamp(24, 96);
    let naz = 2 * nz;
    let (zs, wz) = gauss_legendre(nz);
    let (azs, waz) = circle_trapezoid(naz);
    let mut total = 0.0;
    for (z, wz) in zs.iter().zip(&wz) {
        let s = (1.0 - z * z).sqrt();
        for az in &azs {
            let n = [s * az.cos(), s * az.sin(), *z];
            let p = t + n[0] * x[0] + n[1] * x[1] + n[2] * x[2];
            total += wz * waz * phi.eval(&n, p);
        }
    }
    total / (4.0 * std::f64::consts::PI)
}

/// Tuning knobs of the profile-based inversion pipelines.
#[derive(Debug, Clone, Copy)]
pub struct InversionParams {
    /// radial cells per unit of q (the coarse grid step is 1/cells_per_q)
    pub radial_cells: usize,
    /// cells per refinement level of the layered near-origin grids
    pub level_cells: usize,
    /// dual-mean evaluation budget per radial node
    pub angular_budget: usize,
    /// first fine-grid node of the extrapolation window (skip the origin)
    pub fit_skip: usize,
    /// number of window nodes entering the quadratic fit in q
    pub fit_len: usize,
    /// relative RMS residual above which the fit is rejected
    pub fit_tol: f64,
    /// reconstruction points are pulled inside this radius
    pub boundary_clamp: f64,
    pub panel_nodes: usize,
}

impl Default for InversionParams {
    fn default() -> Self {
        InversionParams {
            radial_cells: 220,
            level_cells: 64,
            angular_budget: 160,
            fit_skip: 2,
            fit_len: 8,
            fit_tol: 0.25,
            boundary_clamp: 1.0 - 1e-6,
            panel_nodes: 12,
        }
    }
}

impl InversionParams {
    /// Scales the resolutions by 2^level; the fit window keeps its relative
    /// place on the fine grid, which itself is pinned under the first kink.
    pub fn refined(&self, level: u32) -> Self {
        let f = 1usize << level;
        InversionParams {
            radial_cells: self.radial_cells * f,
            level_cells: self.level_cells * f,
            angular_budget: self.angular_budget * f,
            fit_skip: self.fit_skip * f,
            fit_len: self.fit_len * f,
            ..*self
        }
    }
}

/// Radial profile of the dual mean (R*_x Phi)(t) on the q-grid, with breaks
/// at the tangency distances (1 ± |x|)^2 and a zero tail.
pub fn dual_mean_profile(
    phi: &dyn HyperplaneFn,
    x: &[f64],
    params: &InversionParams,
) -> Result<RadialProfile> {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let support_q = (1.0 + r) * (1.0 + r);
    let hq = 1.0 / params.radial_cells as f64;
    let n_support = (support_q / hq).ceil() as usize;
    let count = n_support + 8;
    let values: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|i| {
            let q = i as f64 * hq;
            if q >= support_q {
                0.0
            } else {
                dual_mean(phi, x, q.sqrt(), params.angular_budget)
            }
        })
        .collect();
    let breaks = vec![(1.0 - r) * (1.0 - r), support_q];
    RadialProfile::new(hq, values, breaks)
}

/// Octave-layered dual-mean data. Near the support rim the dual mean scales
/// like q^(1/4) toward q = 0, and the fractional derivative weights errors
/// by 1/q, so accuracy requires a roughly constant *relative* resolution
/// Δq/q across many decades. Level 0 spans the full support; every further
/// level covers a quarter of the previous range at the same cell count,
/// down far enough that the extrapolation window sits below the first kink
/// at q = (1 - |x|)^2.
struct LayeredRadial {
    levels: Vec<RadialProfile>,
    dlevels: Vec<RadialProfile>,
    /// use level l for q below this bound
    switches: Vec<f64>,
}

impl LayeredRadial {
    fn build(phi: &dyn HyperplaneFn, x: &[f64], params: &InversionParams) -> Result<Self> {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let q_break = ((1.0 - r) * (1.0 - r)).max(1e-13);
        let support_q = (1.0 + r) * (1.0 + r);
        let kinks = [q_break, support_q];

        let sample = |hq: f64, count: usize| -> Vec<f64> {
            (0..count)
                .into_par_iter()
                .map(|i| {
                    let q = i as f64 * hq;
                    if q >= support_q {
                        0.0
                    } else {
                        dual_mean(phi, x, q.sqrt(), params.angular_budget)
                    }
                })
                .collect()
        };
        let breaks_for = |q_max: f64| -> Vec<f64> {
            kinks.iter().cloned().filter(|b| *b < q_max).collect()
        };

        let hq0 = 1.0 / params.radial_cells as f64;
        let count0 = (support_q / hq0).ceil() as usize + 8;
        let mut levels = vec![RadialProfile::new(
            hq0,
            sample(hq0, count0),
            breaks_for(count0 as f64 * hq0),
        )?];

        // refine by factors of 4 until the fit window clears the first kink
        let cells = params.level_cells;
        let window_top = (params.fit_skip + params.fit_len) as f64;
        let mut q_top = 1.0f64.min(support_q / 4.0);
        while levels.len() < 24 {
            let hq = q_top / cells as f64;
            levels.push(RadialProfile::new(
                hq,
                sample(hq, cells + 5),
                breaks_for((cells + 4) as f64 * hq),
            )?);
            if window_top * hq < 0.75 * q_break {
                break;
            }
            q_top /= 4.0;
        }
        let switches = levels
            .iter()
            .map(|l| 0.5 * l.q_max())
            .collect::<Vec<f64>>();
        let dlevels = levels.iter().map(|l| l.derivative_grid()).collect();
        Ok(LayeredRadial {
            levels,
            dlevels,
            switches,
        })
    }

    fn finest(&self) -> &RadialProfile {
        self.levels.last().expect("at least one level")
    }

    fn finest_derivative(&self) -> &RadialProfile {
        self.dlevels.last().expect("at least one level")
    }

    fn level_for(&self, q: f64) -> usize {
        let mut best = 0;
        for (l, sw) in self.switches.iter().enumerate() {
            if q <= *sw {
                best = l;
            }
        }
        best
    }

    fn f(&self, q: f64) -> f64 {
        self.levels[self.level_for(q)].eval_q(q)
    }

    fn df(&self, q: f64) -> f64 {
        self.dlevels[self.level_for(q)].eval_q(q)
    }

    fn q_max(&self) -> f64 {
        self.levels[0].q_max()
    }

    /// D^(1/2)-type value at q_t for plane dimension d = 1:
    ///   -( g/2 + q_t g' ) with g = I^(1/2)[F/q],
    /// evaluated as a single integral so the large opposite-sign regions of
    /// the integrand share quadrature nodes:
    ///   -(2/sqrt(pi)) ∫ [ F/(2q) + q_t (F'/q - F/q^2) ](q_t + z^2) dz.
    fn d1_value(&self, q_t: f64, panel_nodes: usize) -> f64 {
        let q_max = self.q_max();
        let z_end = (q_max - q_t).max(0.0).sqrt();
        if z_end == 0.0 {
            return 0.0;
        }
        let mut bounds: Vec<f64> = vec![0.0];
        // panel seams at representation switches and data kinks
        for sw in &self.switches {
            if *sw > q_t && *sw < q_max {
                bounds.push((sw - q_t).sqrt());
            }
        }
        for b in self.levels[0].breaks() {
            if *b > q_t && *b < q_max {
                bounds.push((b - q_t).sqrt());
            }
        }
        bounds.push(z_end);
        bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        let fine_scale = self.finest().hq().sqrt().min(q_t.max(1e-12).sqrt());
        let mut total = 0.0;
        for w in bounds.windows(2) {
            for (a, b) in graded_panels(w[0], w[1], fine_scale) {
                let (zs, ws) = gauss_legendre_on(panel_nodes, a, b);
                for (z, wq) in zs.iter().zip(&ws) {
                    let q = q_t + z * z;
                    let fv = self.f(q);
                    let dv = self.df(q);
                    total += wq * (fv / (2.0 * q) + q_t * (dv / q - fv / (q * q)));
                }
            }
        }
        -(2.0 / SQRT_PI) * total
    }
}

/// Least-squares quadratic fit in q over the window nodes; returns the
/// extrapolated value at q = 0 and the RMS fit residual.
fn fit_limit(values: &[(f64, f64)]) -> (f64, f64) {
    let n = values.len();
    let mut a = DMatrix::zeros(n, 3);
    let mut b = DVector::zeros(n);
    for (row, (q, v)) in values.iter().enumerate() {
        a[(row, 0)] = 1.0;
        a[(row, 1)] = *q;
        a[(row, 2)] = q * q;
        b[row] = *v;
    }
    let at = a.transpose();
    let coef = (&at * &a)
        .lu()
        .solve(&(&at * &b))
        .expect("3x3 normal equations");
    let resid = (&a * &coef - &b).norm() / (n as f64).sqrt();
    (coef[0], resid)
}

/// Reconstructs phi(x) from hyperplane data by Theorem-style inversion:
/// pi^(-d/2) (D^(d/2) R*_x Phi)(t) extrapolated to t -> 0, with d = m - 1.
/// The window of the quadratic fit lives on the fine grid, below the first
/// kink of the dual mean.
pub fn radon_invert_hyperplane(
    phi: &dyn HyperplaneFn,
    x: &[f64],
    params: &InversionParams,
) -> Result<f64> {
    let m = phi.ambient();
    let d = m - 1;
    if d != 1 && d != 2 {
        return Err(Error::Unsupported(format!(
            "hyperplane inversion for d = {d}"
        )));
    }
    let data = LayeredRadial::build(phi, x, params)?;
    let window: Vec<usize> = (params.fit_skip..params.fit_skip + params.fit_len).collect();
    let values: Vec<(f64, f64)> = if d == 2 {
        let fine = data.finest();
        let dfine = data.finest_derivative();
        window
            .iter()
            .map(|&i| (fine.q_node(i), -dfine.values()[i]))
            .collect()
    } else {
        let fine = data.finest();
        window
            .iter()
            .map(|&i| {
                let q = fine.q_node(i);
                (q, data.d1_value(q, params.panel_nodes))
            })
            .collect()
    };
    let (c0, resid) = fit_limit(&values);
    let scale = values
        .iter()
        .map(|(_, v)| v.abs())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    if resid > params.fit_tol * scale {
        return Err(Error::Accuracy(format!(
            "extrapolation fit residual {resid:.3e} exceeds {} of scale {scale:.3e}",
            params.fit_tol
        )));
    }
    Ok(c0 / std::f64::consts::PI.powf(d as f64 / 2.0))
}

/// Spec-level entry point: Radon–John inversion from a sampled profile.
pub fn radon_invert(
    profile: &SectionProfile,
    x: &[f64],
    params: &InversionParams,
) -> Result<f64> {
    match &profile.header.lattice {
        LatticeSpec::LineSinogram2 { .. } => {
            let sino = LineSinogram2::from_radon_profile(profile)?;
            radon_invert_hyperplane(&sino, x, params)
        }
        LatticeSpec::PlaneSinogram3 { .. } => {
            let sino = SphereSinogram3::from_radon_profile(profile)?;
            radon_invert_hyperplane(&sino, x, params)
        }
        _ => Err(Error::Unsupported(
            "profile lattice does not describe hyperplane data".into(),
        )),
    }
}

enum SinoKind {
    Line2(LineSinogram2),
    Sphere3(SphereSinogram3),
}

/// Inversion of the parallel slice transform from a sampled profile: for
/// a^⊥-even functions f it recovers f; in general it recovers the even part.
pub struct SliceInversion {
    a_hat: Point,
    basis: Vec<Point>,
    sino: SinoKind,
    params: InversionParams,
}

impl SliceInversion {
    /// Accepts a slice profile, or a Funk profile on a mapped lattice (whose
    /// values are exactly the slice transform of the multiplier image).
    pub fn from_profile(profile: &SectionProfile, params: InversionParams) -> Result<Self> {
        let center = DVector::from_vec(profile.header.center.clone());
        if center.norm() == 0.0 {
            return Err(Error::Domain("slice profile carries no direction".into()));
        }
        let a_hat = center.normalize();
        match profile.header.transform {
            TransformId::Slice | TransformId::Funk => {}
            TransformId::Radon => {
                return Err(Error::Unsupported(
                    "Radon profiles invert through radon_invert".into(),
                ))
            }
        }
        let lattice = match &profile.header.lattice {
            LatticeSpec::MappedParallel { inner } => inner.as_ref(),
            other => other,
        };
        let (basis, sino) = match lattice {
            LatticeSpec::ParallelSinogram { basis, .. } => (
                basis.clone(),
                SinoKind::Line2(LineSinogram2::from_slice_profile(profile)?),
            ),
            LatticeSpec::ParallelSphereSinogram { basis, .. } => (
                basis.clone(),
                SinoKind::Sphere3(SphereSinogram3::from_slice_profile(profile)?),
            ),
            _ => {
                return Err(Error::Unsupported(
                    "slice inversion needs a parallel sinogram lattice; for k < n \
                     reduce to k = n through the dimension link"
                        .into(),
                ))
            }
        };
        Ok(SliceInversion {
            a_hat,
            basis: basis.iter().map(|b| DVector::from_vec(b.clone())).collect(),
            sino,
            params,
        })
    }

    /// f(x) = (1/2) |x.ã| (R^{-1} Phi)(Q_a x). Near the equator x.ã = 0 the
    /// prefactor vanishes and the value is taken as 0.
    pub fn reconstruct_at(&self, x: &Point) -> Result<f64> {
        let xa = x.dot(&self.a_hat);
        if xa.abs() < 1e-10 {
            return Ok(0.0);
        }
        let mut y: Vec<f64> = self.basis.iter().map(|b| b.dot(x)).collect();
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > self.params.boundary_clamp {
            let s = self.params.boundary_clamp / r;
            for v in &mut y {
                *v *= s;
            }
        }
        let rad = match &self.sino {
            SinoKind::Line2(s) => radon_invert_hyperplane(s, &y, &self.params)?,
            SinoKind::Sphere3(s) => radon_invert_hyperplane(s, &y, &self.params)?,
        };
        Ok(0.5 * xa.abs() * rad)
    }
}

/// Convenience wrapper matching the operation-level signature.
pub fn slice_invert(
    profile: &SectionProfile,
    x: &Point,
    params: InversionParams,
) -> Result<f64> {
    SliceInversion::from_profile(profile, params)?.reconstruct_at(x)
}

/// Full shifted-Funk inversion for W-even functions: f = M^{-1} Pi^{-1} g_a
/// with g_a read off the mapped-lattice profile of g = F_a f.
pub struct FunkInversion {
    slice: SliceInversion,
    phi: crate::mobius::MobiusMap,
    a_star: Point,
    s_a_star: f64,
    exponent: i32,
}

impl FunkInversion {
    pub fn from_profile(
        ctx: &CenterContext,
        profile: &SectionProfile,
        params: InversionParams,
    ) -> Result<Self> {
        if profile.header.transform != TransformId::Funk {
            return Err(Error::Unsupported("funk inversion needs a Funk profile".into()));
        }
        let pc = DVector::from_vec(profile.header.center.clone());
        if (ctx.center() - &pc).norm() > 1e-10 * (1.0 + pc.norm()) {
            return Err(Error::Domain("profile center does not match context".into()));
        }
        Ok(FunkInversion {
            slice: SliceInversion::from_profile(profile, params)?,
            phi: ctx.mobius_star()?,
            a_star: ctx.a_star().clone(),
            s_a_star: ctx.s_a_star(),
            exponent: ctx.k() as i32 - 1,
        })
    }

    pub fn reconstruct_at(&self, x: &Point) -> Result<f64> {
        let y = self.phi.apply(x)?;
        let v = self.slice.reconstruct_at(&y)?;
        Ok(self.s_a_star.powi(-self.exponent)
            * (1.0 - self.a_star.dot(&y)).powi(self.exponent)
            * v)
    }
}

/// Grid-backed full inversion on a latitude-longitude grid (n = 2).
/// Per-point failures are recorded and left as NaN.
pub fn funk_invert(
    ctx: &CenterContext,
    profile: &SectionProfile,
    nlat: usize,
    nlon: usize,
    params: InversionParams,
) -> Result<(GridField2, Vec<usize>)> {
    if ctx.sphere_dim() != 2 {
        return Err(Error::Unsupported(
            "grid-backed Funk inversion is implemented for n = 2".into(),
        ));
    }
    let inv = FunkInversion::from_profile(ctx, profile, params)?;
    let template = GridField2::from_values(nlat, nlon, vec![0.0; nlat * nlon]);
    let values: Vec<f64> = (0..nlat * nlon)
        .into_par_iter()
        .map(|flat| {
            let (i, j) = (flat / nlon, flat % nlon);
            inv.reconstruct_at(&template.node(i, j)).unwrap_or(f64::NAN)
        })
        .collect();
    let flagged = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_nan())
        .map(|(i, _)| i)
        .collect();
    Ok((GridField2::from_values(nlat, nlon, values), flagged))
}
