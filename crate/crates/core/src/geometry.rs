//! Linear-algebra substrate: points of R^{n+1}, orthonormal frames, planes
//! through a center or parallel to a direction, projections, the polar
//! decomposition, and quadrature nodes on spherical sections.
//!
//! A k-plane is always described by its *normal* frame: an orthonormal
//! (n+1) x (n+1-k) matrix xi, so the plane is {x : xi'x = b}.

use crate::error::{Error, Result};
use crate::quadrature::{circle_trapezoid, gauss_legendre, sphere_area};
use nalgebra::{DMatrix, DVector};

/// Point or direction of R^{n+1}.
pub type Point = DVector<f64>;

pub const FRAME_TOL: f64 = 1e-12;

/// Orthonormal m-frame in R^{n+1}: a matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelFrame {
    cols: DMatrix<f64>,
}

impl StiefelFrame {
    /// Wraps a matrix after checking the Gram residual ||M'M - I||_max <= 1e-12.
    pub fn new(cols: DMatrix<f64>) -> Result<Self> {
        if cols.ncols() == 0 || cols.nrows() < cols.ncols() {
            return Err(Error::Dimension(format!(
                "frame must be tall: {}x{}",
                cols.nrows(),
                cols.ncols()
            )));
        }
        let gram = cols.transpose() * &cols;
        let resid = gram_residual(&gram);
        if resid > FRAME_TOL {
            return Err(Error::Domain(format!(
                "columns not orthonormal (Gram residual {resid:.2e})"
            )));
        }
        Ok(StiefelFrame { cols })
    }

    /// Orthonormalizes an arbitrary full-column-rank matrix by QR with the
    /// positive-diagonal sign convention.
    pub fn orthonormalize(m: &DMatrix<f64>) -> Result<Self> {
        let qr = m.clone().qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..q.ncols() {
            if r[(j, j)].abs() < 1e-13 {
                return Err(Error::Singular("rank-deficient frame matrix".into()));
            }
            if r[(j, j)] < 0.0 {
                for i in 0..q.nrows() {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        StiefelFrame::new(q)
    }

    /// Single-column frame from a nonzero vector.
    pub fn from_vector(v: &Point) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector("frame direction"));
        }
        Ok(StiefelFrame {
            cols: DMatrix::from_column_slice(v.len(), 1, (v / n).as_slice()),
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.cols
    }

    pub fn ambient_dim(&self) -> usize {
        self.cols.nrows()
    }

    pub fn frame_size(&self) -> usize {
        self.cols.ncols()
    }

    /// xi' x
    pub fn project_coords(&self, x: &Point) -> DVector<f64> {
        self.cols.transpose() * x
    }

    /// Largest |column . a| over the frame columns, used for perpendicularity checks.
    pub fn max_dot(&self, a: &Point) -> f64 {
        (0..self.frame_size())
            .map(|j| self.cols.column(j).dot(a).abs())
            .fold(0.0, f64::max)
    }

    /// Orthogonal projector onto the column span, xi xi'.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.cols * self.cols.transpose()
    }

    /// Deterministic orthonormal completion: a frame spanning the orthogonal
    /// complement of the column span. Greedy Gram–Schmidt over the standard
    /// basis, largest residual first, so results do not depend on input scale.
    pub fn completion(&self) -> StiefelFrame {
        self.completion_with_order(None)
    }

    /// Completion with an explicit preference order over the standard basis,
    /// used by tests to confirm results do not depend on the completion choice.
    pub fn completion_with_order(&self, order: Option<&[usize]>) -> StiefelFrame {
        let n = self.ambient_dim();
        let need = n - self.frame_size();
        let mut basis: Vec<DVector<f64>> =
            (0..self.frame_size()).map(|j| self.cols.column(j).into_owned()).collect();
        let mut found: Vec<DVector<f64>> = Vec::with_capacity(need);
        let candidates: Vec<usize> = match order {
            Some(o) => o.to_vec(),
            None => (0..n).collect(),
        };
        while found.len() < need {
            // pick the candidate with the largest residual after projection
            let mut best: Option<(f64, DVector<f64>)> = None;
            for &i in &candidates {
                let mut v = DVector::zeros(n);
                v[i] = 1.0;
                for b in basis.iter().chain(found.iter()) {
                    let c = b.dot(&v);
                    v -= b * c;
                }
                let norm = v.norm();
                if best.as_ref().map_or(true, |(bn, _)| norm > *bn) {
                    best = Some((norm, v));
                }
            }
            let (norm, mut v) = best.expect("completion candidates exhausted");
            v /= norm;
            // re-orthogonalize once for stability
            for b in basis.iter().chain(found.iter()) {
                let c = b.dot(&v);
                v -= b * c;
            }
            v /= v.norm();
            found.push(v);
        }
        let mut m = DMatrix::zeros(n, need);
        for (j, v) in found.iter().enumerate() {
            m.set_column(j, v);
        }
        basis.clear();
        StiefelFrame { cols: m }
    }
}

fn gram_residual(gram: &DMatrix<f64>) -> f64 {
    let mut resid: f64 = 0.0;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            resid = resid.max((gram[(i, j)] - target).abs());
        }
    }
    resid
}

/// P_a x = (a.x / |a|^2) a
pub fn project_along(a: &Point, x: &Point) -> Result<Point> {
    let na2 = a.norm_squared();
    if na2 == 0.0 {
        return Err(Error::ZeroVector("projection direction"));
    }
    Ok(a * (a.dot(x) / na2))
}

/// Q_a x = x - P_a x
pub fn project_perp(a: &Point, x: &Point) -> Result<Point> {
    Ok(x - project_along(a, x)?)
}

/// Principal polar factorization M = Q * S with Q column-orthonormal and
/// S = (M'M)^(1/2) the principal symmetric PSD square root.
pub fn polar_factor(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let gram = m.transpose() * m;
    let s = sym_sqrt(&gram)?;
    let s_inv = sym_inv_sqrt(&gram)?;
    Ok((m * s_inv, s))
}

/// Principal symmetric PSD square root by eigendecomposition.
pub fn sym_sqrt(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    sym_pow(s, 0.5)
}

/// Inverse principal square root; errors when the matrix is numerically singular.
pub fn sym_inv_sqrt(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    sym_pow(s, -0.5)
}

fn sym_pow(s: &DMatrix<f64>, p: f64) -> Result<DMatrix<f64>> {
    let eig = s.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut d = DMatrix::zeros(s.nrows(), s.ncols());
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam < 1e-12 * max.max(1e-300) {
            if p < 0.0 {
                return Err(Error::Singular(format!(
                    "eigenvalue {lam:.3e} below 1e-12 * {max:.3e}"
                )));
            }
            d[(i, i)] = 0.0;
        } else {
            d[(i, i)] = lam.powf(p);
        }
    }
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// |det(I_p + AB) - det(I_q + BA)|, the determinant identity residual.
pub fn det_identity_check(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let p = a.nrows();
    let q = a.ncols();
    assert_eq!(b.nrows(), q);
    assert_eq!(b.ncols(), p);
    let lhs = (DMatrix::identity(p, p) + a * b).determinant();
    let rhs = (DMatrix::identity(q, q) + b * a).determinant();
    (lhs - rhs).abs()
}

/// k-plane through the point `center`: {x : xi'x = xi'center}.
#[derive(Debug, Clone)]
pub struct CentralPlane {
    normal_frame: StiefelFrame,
    center: Point,
    offset: DVector<f64>,
}

impl CentralPlane {
    pub fn new(normal_frame: StiefelFrame, center: Point) -> Result<Self> {
        if normal_frame.ambient_dim() != center.len() {
            return Err(Error::Dimension("frame/center ambient mismatch".into()));
        }
        let offset = normal_frame.project_coords(&center);
        Ok(CentralPlane {
            normal_frame,
            center,
            offset,
        })
    }

    pub fn normal_frame(&self) -> &StiefelFrame {
        &self.normal_frame
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    /// xi'a, the coordinates of the plane equation's right-hand side.
    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    /// Euclidean distance from the plane to the origin.
    pub fn distance_from_origin(&self) -> f64 {
        self.offset.norm()
    }

    pub fn meets_ball(&self) -> bool {
        self.distance_from_origin() < 1.0
    }

    /// Plane dimension k.
    pub fn plane_dim(&self) -> usize {
        self.normal_frame.ambient_dim() - self.normal_frame.frame_size()
    }
}

/// k-plane parallel to the vector `direction`: {y : eta'y = t} with every
/// frame column orthogonal to the direction.
#[derive(Debug, Clone)]
pub struct ParallelPlane {
    normal_frame: StiefelFrame,
    direction: Point,
    offset: DVector<f64>,
}

impl ParallelPlane {
    pub fn new(normal_frame: StiefelFrame, direction: Point, offset: DVector<f64>) -> Result<Self> {
        if normal_frame.ambient_dim() != direction.len() {
            return Err(Error::Dimension("frame/direction ambient mismatch".into()));
        }
        if offset.len() != normal_frame.frame_size() {
            return Err(Error::Dimension("offset length != frame size".into()));
        }
        if direction.norm() == 0.0 {
            return Err(Error::ZeroVector("parallel plane direction"));
        }
        let dot = normal_frame.max_dot(&direction.normalize());
        if dot > FRAME_TOL {
            return Err(Error::Domain(format!(
                "frame not orthogonal to direction (max dot {dot:.2e})"
            )));
        }
        Ok(ParallelPlane {
            normal_frame,
            direction,
            offset,
        })
    }

    pub fn normal_frame(&self) -> &StiefelFrame {
        &self.normal_frame
    }

    pub fn direction(&self) -> &Point {
        &self.direction
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn distance_from_origin(&self) -> f64 {
        self.offset.norm()
    }

    pub fn meets_ball(&self) -> bool {
        self.distance_from_origin() < 1.0
    }

    pub fn plane_dim(&self) -> usize {
        self.normal_frame.ambient_dim() - self.normal_frame.frame_size()
    }
}

/// Either plane kind, reduced to the data the section quadrature needs.
#[derive(Debug, Clone)]
pub struct PlaneSection {
    /// normal frame of the plane
    pub normal_frame: StiefelFrame,
    /// right-hand side of the plane equation in frame coordinates
    pub offset: DVector<f64>,
}

impl From<&CentralPlane> for PlaneSection {
    fn from(p: &CentralPlane) -> Self {
        PlaneSection {
            normal_frame: p.normal_frame.clone(),
            offset: p.offset.clone(),
        }
    }
}

impl From<&ParallelPlane> for PlaneSection {
    fn from(p: &ParallelPlane) -> Self {
        PlaneSection {
            normal_frame: p.normal_frame.clone(),
            offset: p.offset.clone(),
        }
    }
}

/// Quadrature rule on the (k-1)-sphere S^n ∩ plane.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum SectionRule {
    /// k = 2 sections are circles: uniform trapezoid with `nodes` points.
    Circle { nodes: usize },
    /// k = 3 sections are 2-spheres: Gauss–Legendre in the polar cosine times
    /// trapezoid in azimuth.
    Sphere { polar: usize, azimuth: usize },
}

impl SectionRule {
    pub fn default_for(k: usize) -> Result<SectionRule> {
        match k {
            2 => Ok(SectionRule::Circle { nodes: 256 }),
            3 => Ok(SectionRule::Sphere {
                polar: 32,
                azimuth: 64,
            }),
            _ => Err(Error::Unsupported(format!(
                "section quadrature for k = {k} (supported: k in {{2, 3}})"
            ))),
        }
    }

    pub fn section_dim(&self) -> usize {
        match self {
            SectionRule::Circle { .. } => 2,
            SectionRule::Sphere { .. } => 3,
        }
    }
}

/// Nodes and weights for integrating over S^n ∩ plane with the surface
/// measure of the section, which is a (k-1)-sphere of radius
/// r = sqrt(1 - dist^2).
pub fn sphere_section_nodes(
    section: &PlaneSection,
    rule: SectionRule,
) -> Result<(Vec<Point>, Vec<f64>)> {
    let k = section.normal_frame.ambient_dim() - section.normal_frame.frame_size();
    if rule.section_dim() != k {
        return Err(Error::Dimension(format!(
            "rule is for k = {}, plane has k = {k}",
            rule.section_dim()
        )));
    }
    let dist = section.offset.norm();
    if dist >= 1.0 {
        return Err(Error::EmptySection);
    }
    let r = (1.0 - dist * dist).sqrt();
    // closest point of the plane to the origin
    let base = section.normal_frame.matrix() * &section.offset;
    let dirs = section.normal_frame.completion();
    let d = dirs.matrix();
    match rule {
        SectionRule::Circle { nodes } => {
            let (angles, w) = circle_trapezoid(nodes);
            let u = d.column(0);
            let v = d.column(1);
            let mut pts = Vec::with_capacity(nodes);
            let mut wts = Vec::with_capacity(nodes);
            for t in angles {
                pts.push(&base + (u * t.cos() + v * t.sin()) * r);
                wts.push(w * r);
            }
            Ok((pts, wts))
        }
        SectionRule::Sphere { polar, azimuth } => {
            let (zs, wz) = gauss_legendre(polar);
            let (phis, wphi) = circle_trapezoid(azimuth);
            let u = d.column(0);
            let v = d.column(1);
            let n3 = d.column(2);
            let mut pts = Vec::with_capacity(polar * azimuth);
            let mut wts = Vec::with_capacity(polar * azimuth);
            for (z, wz) in zs.iter().zip(&wz) {
                let s = (1.0 - z * z).sqrt();
                for phi in &phis {
                    let om = u * (s * phi.cos()) + v * (s * phi.sin()) + n3 * *z;
                    pts.push(&base + om * r);
                    wts.push(wz * wphi * r * r);
                }
            }
            Ok((pts, wts))
        }
    }
}

/// Exact surface area of the section sphere for a plane at distance `dist`
/// from the origin, zero when the plane misses the ball.
pub fn section_area(k: usize, dist: f64) -> f64 {
    if dist >= 1.0 {
        return 0.0;
    }
    let r = (1.0 - dist * dist).sqrt();
    sphere_area(k - 1) * r.powi(k as i32 - 1)
}
