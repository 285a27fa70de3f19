//! Ball automorphisms and the operator algebra around an exterior center.
//!
//! For a center a with |a| > 1 the Kelvin point a* = a/|a|^2 lies inside the
//! ball and the Möbius map phi_{a*} swaps 0 and a*, preserves S^n, and sends
//! planes through a to planes parallel to a. On top of it sit the hyperplane
//! reflection R_a, the center reflection tau_a (second sphere intersection of
//! the line through a), the multiplier M_{a*} and its inverse, the weight
//! rho_{a*}, and the weighted involution W_a whose ±1 eigenspaces split
//! C(S^n) into the part the shifted Funk transform sees and its kernel.

use crate::error::{Error, Result};
use crate::field::{DynField, ScalarField};
use crate::geometry::{
    project_along, project_perp, sym_inv_sqrt, CentralPlane, ParallelPlane, Point, StiefelFrame,
};
use crate::quadrature::SphereRule;
use nalgebra::DMatrix;
use std::sync::Arc;

/// Kelvin inversion a -> a/|a|^2.
pub fn kelvin(a: &Point) -> Result<Point> {
    let n2 = a.norm_squared();
    if n2 == 0.0 {
        return Err(Error::ZeroVector("kelvin inversion"));
    }
    Ok(a / n2)
}

/// Reflection in the hyperplane a^⊥: R_a x = x - 2 P_a x.
pub fn reflect_hyperplane(a: &Point, x: &Point) -> Result<Point> {
    Ok(x - project_along(a, x)? * 2.0)
}

/// The Möbius automorphism phi_b of the unit ball, |b| < 1:
///
///   phi_b(x) = (b - P_b x - s_b Q_b x) / (1 - x.b),   s_b = sqrt(1 - |b|^2).
///
/// It swaps 0 and b, is an involution, and preserves the sphere. An optional
/// additive perturbation of the s_b coefficient is exposed for the
/// sensitivity (mutation) check of the verification suite.
#[derive(Debug, Clone)]
pub struct MobiusMap {
    b: Point,
    s_b: f64,
}

impl MobiusMap {
    pub fn new(b: Point) -> Result<Self> {
        let n = b.norm();
        if n >= 1.0 {
            return Err(Error::Domain(format!(
                "Möbius parameter must satisfy |b| < 1, got {n}"
            )));
        }
        let s_b = (1.0 - n * n).sqrt();
        Ok(MobiusMap { b, s_b })
    }

    pub fn with_perturbation(b: Point, eps: f64) -> Result<Self> {
        let mut m = Self::new(b)?;
        m.s_b += eps;
        Ok(m)
    }

    pub fn parameter(&self) -> &Point {
        &self.b
    }

    /// Applies the map. Errors at the pole x.b = 1, which lies outside the
    /// closed ball when |b| < 1, so sphere points are always safe.
    pub fn apply(&self, x: &Point) -> Result<Point> {
        let denom = 1.0 - x.dot(&self.b);
        if denom.abs() < 1e-13 {
            return Err(Error::Pole);
        }
        if self.b.norm_squared() == 0.0 {
            // phi_0 x = -x
            return Ok(-x.clone());
        }
        let p = project_along(&self.b, x)?;
        let q = x - &p;
        Ok((&self.b - p - q * self.s_b) / denom)
    }
}

/// Precomputed data for one center: a, the Kelvin point a* = a/|a|^2, the
/// unit direction ã, s_{a*} = sqrt(1-|a*|^2), and the section dimension k.
#[derive(Debug, Clone)]
pub struct CenterContext {
    a: Point,
    a_star: Point,
    a_hat: Point,
    s_a_star: f64,
    k: usize,
}

impl CenterContext {
    pub fn new(a: Point, k: usize) -> Result<Self> {
        let n = a.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector("center"));
        }
        if a.len() < 3 {
            return Err(Error::Dimension("ambient dimension must be >= 3".into()));
        }
        if k < 1 || k > a.len() - 1 {
            return Err(Error::Dimension(format!(
                "section dimension k = {k} out of range for S^{}",
                a.len() - 1
            )));
        }
        let a_star = &a / (n * n);
        let a_hat = &a / n;
        let s2 = 1.0 - a_star.norm_squared();
        Ok(CenterContext {
            a,
            a_star,
            a_hat,
            s_a_star: s2.max(0.0).sqrt(),
            k,
        })
    }

    pub fn center(&self) -> &Point {
        &self.a
    }

    pub fn a_star(&self) -> &Point {
        &self.a_star
    }

    pub fn a_hat(&self) -> &Point {
        &self.a_hat
    }

    pub fn s_a_star(&self) -> f64 {
        self.s_a_star
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Ambient dimension n+1.
    pub fn ambient_dim(&self) -> usize {
        self.a.len()
    }

    pub fn sphere_dim(&self) -> usize {
        self.a.len() - 1
    }

    pub fn is_exterior(&self) -> bool {
        self.a.norm() > 1.0
    }

    fn require_exterior(&self) -> Result<()> {
        if !self.is_exterior() {
            return Err(Error::Domain(format!(
                "center must lie outside the closed unit ball, |a| = {}",
                self.a.norm()
            )));
        }
        Ok(())
    }

    /// The spherical automorphism phi_{a*}.
    pub fn mobius_star(&self) -> Result<MobiusMap> {
        self.require_exterior()?;
        MobiusMap::new(self.a_star.clone())
    }

    /// tau_a: second intersection of the line through a and x with S^n,
    ///
    ///   tau_a x = ((|a|^2 - 1) x + 2 (1 - x.a) a) / |x - a|^2.
    ///
    /// Tangent points are fixed by the formula itself.
    pub fn tau(&self, x: &Point) -> Result<Point> {
        self.require_exterior()?;
        let na2 = self.a.norm_squared();
        let diff = x - &self.a;
        let denom = diff.norm_squared();
        Ok((x * (na2 - 1.0) + &self.a * (2.0 * (1.0 - x.dot(&self.a)))) / denom)
    }

    /// rho_{a*}(x) = ((|a|^2 - 1)/|a - x|^2)^(k-1), strictly positive on S^n.
    pub fn weight_rho(&self, x: &Point) -> Result<f64> {
        self.require_exterior()?;
        let na2 = self.a.norm_squared();
        let d2 = (x - &self.a).norm_squared();
        Ok(((na2 - 1.0) / d2).powi(self.k as i32 - 1))
    }

    /// The same weight through its defining quotient
    /// ((1 - a*.phi x)/(1 - a*.R_a phi x))^(k-1); used as a cross-check.
    pub fn weight_rho_quotient(&self, x: &Point) -> Result<f64> {
        let phi = self.mobius_star()?;
        let y = phi.apply(x)?;
        let ry = reflect_hyperplane(&self.a, &y)?;
        let num = 1.0 - self.a_star.dot(&y);
        let den = 1.0 - self.a_star.dot(&ry);
        Ok((num / den).powi(self.k as i32 - 1))
    }
}

/// (M_{a*} f)(y) = (s_{a*}/(1 - a*.y))^(k-1) f(phi_{a*} y).
pub fn multiplier_m(ctx: &CenterContext, f: &DynField) -> Result<DynField> {
    let phi = ctx.mobius_star()?;
    let a_star = ctx.a_star().clone();
    let s = ctx.s_a_star();
    let e = ctx.k() as i32 - 1;
    let f = f.clone();
    Ok(Arc::new(move |y: &Point| {
        let x = phi.apply(y).expect("pole off the sphere");
        (s / (1.0 - a_star.dot(y))).powi(e) * f.eval(&x)
    }))
}

/// (M_{a*}^{-1} f)(x) = s_{a*}^(1-k) (1 - a*.phi_{a*} x)^(k-1) f(phi_{a*} x).
pub fn multiplier_m_inverse(ctx: &CenterContext, f: &DynField) -> Result<DynField> {
    let phi = ctx.mobius_star()?;
    let a_star = ctx.a_star().clone();
    let s = ctx.s_a_star();
    let e = ctx.k() as i32 - 1;
    let f = f.clone();
    Ok(Arc::new(move |x: &Point| {
        let y = phi.apply(x).expect("pole off the sphere");
        s.powi(-e) * (1.0 - a_star.dot(&y)).powi(e) * f.eval(&y)
    }))
}

/// (W_a f)(x) = rho_{a*}(x) f(tau_a x); an involution on fields over S^n.
pub fn involution_w(ctx: &CenterContext, f: &DynField) -> Result<DynField> {
    ctx.require_exterior()?;
    let ctx = ctx.clone();
    let f = f.clone();
    Ok(Arc::new(move |x: &Point| {
        let t = ctx.tau(x).expect("exterior center");
        ctx.weight_rho(x).expect("exterior center") * f.eval(&t)
    }))
}

/// (g + sign * W_a g)/2: the projection of g onto the ±1 eigenspace of W_a.
pub fn symmetrize_w(ctx: &CenterContext, g: &DynField, sign: f64) -> Result<DynField> {
    assert!(sign == 1.0 || sign == -1.0);
    let w = involution_w(ctx, g)?;
    let g = g.clone();
    Ok(Arc::new(move |x: &Point| {
        0.5 * (g.eval(x) + sign * w.eval(x))
    }))
}

/// Even/odd parts of f with respect to reflection in a^⊥:
/// f± = (f ± f∘R_a)/2.
pub fn parity_parts(a: &Point, f: &DynField) -> Result<(DynField, DynField)> {
    if a.norm() == 0.0 {
        return Err(Error::ZeroVector("parity axis"));
    }
    let a1 = a.clone();
    let a2 = a.clone();
    let fp = f.clone();
    let fm = f.clone();
    let plus: DynField = Arc::new(move |x: &Point| {
        let r = reflect_hyperplane(&a1, x).expect("nonzero axis");
        0.5 * (fp.eval(x) + fp.eval(&r))
    });
    let minus: DynField = Arc::new(move |x: &Point| {
        let r = reflect_hyperplane(&a2, x).expect("nonzero axis");
        0.5 * (fm.eval(x) - fm.eval(&r))
    });
    Ok((plus, minus))
}

/// Residual of the measure change
/// | ∫ f dx - s^n ∫ (f∘phi_{a*})(y) / (1 - a*.y)^n dy |
/// under the supplied sphere quadrature.
pub fn measure_change_residual(
    ctx: &CenterContext,
    f: &dyn ScalarField,
    rule: &SphereRule,
) -> Result<f64> {
    let phi = ctx.mobius_star()?;
    let n = ctx.sphere_dim() as i32;
    let a_star = ctx.a_star().clone();
    let s_pow = ctx.s_a_star().powi(n);
    let lhs = rule.integrate(|x| f.eval(x));
    let rhs = rule.integrate(|y| {
        let x = phi.apply(y).expect("pole off the sphere");
        s_pow * f.eval(&x) / (1.0 - a_star.dot(y)).powi(n)
    });
    Ok((lhs - rhs).abs())
}

/// Lemma 4.1 forward direction: the phi_{a*}-image of a plane through a is
/// the parallel plane with
///
///   eta = (Q_{a*} xi) rho^{-1/2},  rho = (Q_{a*} xi)'(Q_{a*} xi),
///   t = -s_{a*} rho^{-1/2} xi' a.
pub fn central_to_parallel(ctx: &CenterContext, plane: &CentralPlane) -> Result<ParallelPlane> {
    ctx.require_exterior()?;
    check_center(ctx, plane)?;
    if !plane.meets_ball() {
        return Err(Error::InvalidPlane(format!(
            "|xi'a| = {} >= 1",
            plane.distance_from_origin()
        )));
    }
    let xi = plane.normal_frame().matrix();
    let mut qxi = DMatrix::zeros(xi.nrows(), xi.ncols());
    for j in 0..xi.ncols() {
        let col = project_perp(ctx.a_star(), &xi.column(j).into_owned())?;
        qxi.set_column(j, &col);
    }
    let rho = qxi.transpose() * &qxi;
    let rho_inv_sqrt = sym_inv_sqrt(&rho)?;
    let eta = StiefelFrame::new(&qxi * &rho_inv_sqrt)?;
    let t = -(&rho_inv_sqrt * plane.offset()) * ctx.s_a_star();
    if t.norm() >= 1.0 {
        return Err(Error::InvalidPlane(format!(
            "image offset |t| = {} >= 1",
            t.norm()
        )));
    }
    ParallelPlane::new(eta, ctx.center().clone(), t)
}

/// Lemma 4.1 reverse direction: the phi_{a*}-image of a parallel plane is
/// central with
///
///   xi = (s_{a*} eta - a* t') s^{-1/2},  s = s_{a*}^2 I + |a*|^2 t t'.
///
/// The sign of the a* t' term follows from eta' phi_{a*} x =
/// -s_{a*} eta' x / (1 - x.a*): it makes the map the exact inverse of
/// [`central_to_parallel`] (substituting the forward formulas gives
/// xi_tilde = s_{a*} xi rho^{-1/2}, the same plane).
pub fn parallel_to_central(ctx: &CenterContext, plane: &ParallelPlane) -> Result<CentralPlane> {
    ctx.require_exterior()?;
    if (plane.direction().normalize() - ctx.a_hat()).norm() > 1e-10
        && (plane.direction().normalize() + ctx.a_hat()).norm() > 1e-10
    {
        return Err(Error::Domain(
            "plane direction does not match the context center".into(),
        ));
    }
    if !plane.meets_ball() {
        return Err(Error::InvalidPlane(format!(
            "|t| = {} >= 1",
            plane.distance_from_origin()
        )));
    }
    let eta = plane.normal_frame().matrix();
    let t = plane.offset();
    let c = eta.ncols();
    let s_star = ctx.s_a_star();
    let xi_tilde = eta * s_star - ctx.a_star() * t.transpose();
    let s = DMatrix::identity(c, c) * (s_star * s_star)
        + t * t.transpose() * ctx.a_star().norm_squared();
    let xi = StiefelFrame::new(&xi_tilde * sym_inv_sqrt(&s)?)?;
    let central = CentralPlane::new(xi, ctx.center().clone())?;
    if !central.meets_ball() {
        return Err(Error::InvalidPlane(
            "image plane does not meet the ball".into(),
        ));
    }
    Ok(central)
}

fn check_center(ctx: &CenterContext, plane: &CentralPlane) -> Result<()> {
    if (plane.center() - ctx.center()).norm() > 1e-10 * (1.0 + ctx.center().norm()) {
        return Err(Error::Domain(
            "plane center does not match the context center".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::from_fn;
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;

    fn ctx2() -> CenterContext {
        CenterContext::new(dvector![2.0, 0.0, 0.0], 2).unwrap()
    }

    #[test]
    fn kelvin_examples() {
        let a = dvector![2.0, 0.0, 0.0];
        assert_abs_diff_eq!(kelvin(&a).unwrap(), dvector![0.5, 0.0, 0.0], epsilon = 1e-15);
        let u = dvector![0.0, 1.0, 0.0];
        assert_abs_diff_eq!(kelvin(&u).unwrap(), u, epsilon = 1e-15);
        let mut rng = crate::testutil::rng(21);
        for _ in 0..30 {
            let v = crate::testutil::random_vector(&mut rng, 4);
            let back = kelvin(&kelvin(&v).unwrap()).unwrap();
            assert!((back - &v).norm() < 1e-14 * (1.0 + v.norm()));
        }
        assert!(kelvin(&dvector![0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn context_invariants() {
        let ctx = ctx2();
        assert_abs_diff_eq!(ctx.a_star().dot(ctx.center()), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ctx.a_hat().norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            ctx.s_a_star().powi(2) + ctx.a_star().norm_squared(),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn mobius_swaps_zero_and_parameter() {
        let phi = MobiusMap::new(dvector![0.5, 0.0, 0.0]).unwrap();
        let zero = dvector![0.0, 0.0, 0.0];
        assert_abs_diff_eq!(
            phi.apply(&zero).unwrap(),
            dvector![0.5, 0.0, 0.0],
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            phi.apply(&dvector![0.5, 0.0, 0.0]).unwrap(),
            zero,
            epsilon = 1e-14
        );
    }

    #[test]
    fn mobius_direct_substitution() {
        // a = (0.5,0,0), x = (0,1,0) -> (0.5, -sqrt(0.75), 0), a sphere point
        let phi = MobiusMap::new(dvector![0.5, 0.0, 0.0]).unwrap();
        let y = phi.apply(&dvector![0.0, 1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(y[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(y[1], -0.75f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(y.norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn mobius_involution_and_sphere_identity() {
        let mut rng = crate::testutil::rng(31);
        let phi = MobiusMap::new(dvector![0.3, -0.2, 0.25]).unwrap();
        let b = phi.parameter().clone();
        let s2 = 1.0 - b.norm_squared();
        for _ in 0..200 {
            let x = crate::testutil::random_sphere_point(&mut rng, 3);
            let y = phi.apply(&x).unwrap();
            assert!((1.0 - y.norm_squared()).abs() < 1e-13);
            let back = phi.apply(&y).unwrap();
            assert!((back - &x).norm() < 1e-13);
            // interior point identity 1-|phi x|^2 = (1-|b|^2)(1-|x|^2)/(1-x.b)^2
            let xi = &x * 0.7;
            let yi = phi.apply(&xi).unwrap();
            let lhs = 1.0 - yi.norm_squared();
            let rhs = s2 * (1.0 - xi.norm_squared()) / (1.0 - xi.dot(&b)).powi(2);
            assert!((lhs - rhs).abs() < 1e-13);
        }
    }

    #[test]
    fn reflection_examples_and_involution() {
        let a = dvector![0.0, 0.0, 1.0];
        let x = dvector![1.0, 2.0, 3.0];
        assert_abs_diff_eq!(
            reflect_hyperplane(&a, &x).unwrap(),
            dvector![1.0, 2.0, -3.0],
            epsilon = 1e-14
        );
        let inplane = dvector![1.0, 2.0, 0.0];
        assert_abs_diff_eq!(
            reflect_hyperplane(&a, &inplane).unwrap(),
            inplane,
            epsilon = 1e-14
        );
        let mut rng = crate::testutil::rng(41);
        for _ in 0..50 {
            let x = crate::testutil::random_vector(&mut rng, 3);
            let rr = reflect_hyperplane(&a, &reflect_hyperplane(&a, &x).unwrap()).unwrap();
            assert!((rr - &x).norm() < 1e-14 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn tau_axis_and_tangent_points() {
        let ctx = ctx2();
        let t = ctx.tau(&dvector![1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(t, dvector![-1.0, 0.0, 0.0], epsilon = 1e-14);
        // tangent line: x.a = 1 is fixed
        let x = dvector![0.5, 0.75f64.sqrt(), 0.0];
        assert_abs_diff_eq!(ctx.tau(&x).unwrap(), x, epsilon = 1e-13);
    }

    #[test]
    fn tau_is_involution_on_sphere() {
        let ctx = CenterContext::new(dvector![1.3, -0.9, 0.7], 2).unwrap();
        let mut rng = crate::testutil::rng(51);
        for _ in 0..200 {
            let x = crate::testutil::random_sphere_point(&mut rng, 3);
            let t = ctx.tau(&x).unwrap();
            assert!((t.norm() - 1.0).abs() < 1e-12);
            let tt = ctx.tau(&t).unwrap();
            assert!((tt - &x).norm() < 1e-12);
        }
    }

    #[test]
    fn tau_equals_mobius_conjugation() {
        // Lemma 4.2 cross-check: tau_a = phi_{a*} ∘ R_a ∘ phi_{a*} on S^n
        let ctx = CenterContext::new(dvector![0.8, 1.4, -1.1], 2).unwrap();
        let phi = ctx.mobius_star().unwrap();
        let mut rng = crate::testutil::rng(61);
        for _ in 0..300 {
            let x = crate::testutil::random_sphere_point(&mut rng, 3);
            let lhs = ctx.tau(&x).unwrap();
            let rhs = phi
                .apply(&reflect_hyperplane(ctx.center(), &phi.apply(&x).unwrap()).unwrap())
                .unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn weight_rho_values_and_product() {
        let ctx = ctx2();
        assert_abs_diff_eq!(
            ctx.weight_rho(&dvector![1.0, 0.0, 0.0]).unwrap(),
            3.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            ctx.weight_rho(&dvector![-1.0, 0.0, 0.0]).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-14
        );
        let mut rng = crate::testutil::rng(71);
        for _ in 0..100 {
            let x = crate::testutil::random_sphere_point(&mut rng, 3);
            let r = ctx.weight_rho(&x).unwrap();
            assert!(r > 0.0);
            let rt = ctx.weight_rho(&ctx.tau(&x).unwrap()).unwrap();
            assert!((r * rt - 1.0).abs() < 1e-12);
            // two algebraic forms of the weight agree
            let rq = ctx.weight_rho_quotient(&x).unwrap();
            assert!((r - rq).abs() < 1e-12 * (1.0 + r.abs()));
        }
    }

    #[test]
    fn involution_w_squares_to_identity() {
        let ctx = CenterContext::new(dvector![0.0, 1.7, 0.4, -0.6], 3).unwrap();
        let f = from_fn(|x: &Point| (1.3 * x[0] - 0.4 * x[1] * x[2]).sin() + 0.7 + 0.2 * x[3]);
        let wf = involution_w(&ctx, &f).unwrap();
        let wwf = involution_w(&ctx, &wf).unwrap();
        let mut rng = crate::testutil::rng(81);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let x = crate::testutil::random_sphere_point(&mut rng, 4);
            worst = worst.max((wwf.eval(&x) - f.eval(&x)).abs());
        }
        assert!(worst < 1e-11, "W∘W residual {worst}");
        // weight alone at x=(1,0,0), a=(2,0,0), k=2 gives 3
        let c2 = ctx2();
        let one = crate::field::constant(1.0);
        let w1 = involution_w(&c2, &one).unwrap();
        assert_abs_diff_eq!(w1.eval(&dvector![1.0, 0.0, 0.0]), 3.0, epsilon = 1e-13);
    }

    #[test]
    fn symmetrizer_produces_w_eigenfunctions() {
        let ctx = ctx2();
        let g = from_fn(|x: &Point| (x[0] + 0.5 * x[1] - 0.3 * x[2]).cos());
        let plus = symmetrize_w(&ctx, &g, 1.0).unwrap();
        let minus = symmetrize_w(&ctx, &g, -1.0).unwrap();
        let wplus = involution_w(&ctx, &plus).unwrap();
        let mut rng = crate::testutil::rng(91);
        for _ in 0..100 {
            let x = crate::testutil::random_sphere_point(&mut rng, 3);
            assert!((wplus.eval(&x) - plus.eval(&x)).abs() < 1e-11);
            // parts reassemble g
            assert!((plus.eval(&x) + minus.eval(&x) - g.eval(&x)).abs() < 1e-13);
        }
        // symmetrizing an already-even field changes nothing
        let plus2 = symmetrize_w(&ctx, &plus, 1.0).unwrap();
        let x = dvector![0.6, 0.8, 0.0];
        assert_abs_diff_eq!(plus2.eval(&x), plus.eval(&x), epsilon = 1e-12);
        // and the odd projection of an even field vanishes
        let dead = symmetrize_w(&ctx, &plus, -1.0).unwrap();
        assert_abs_diff_eq!(dead.eval(&x), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn parity_parts_reassemble_and_have_parity() {
        let a = dvector![2.0, 0.0, 0.0];
        let f = from_fn(|x: &Point| x[0] * 0.3 + x[1] * x[1] + 0.1 * (x[2] * 3.0).sin());
        let (plus, minus) = parity_parts(&a, &f).unwrap();
        let mut rng = crate::testutil::rng(101);
        for _ in 0..100 {
            let x = crate::testutil::random_sphere_point(&mut rng, 3);
            let r = reflect_hyperplane(&a, &x).unwrap();
            assert!((plus.eval(&x) + minus.eval(&x) - f.eval(&x)).abs() < 1e-14);
            assert!((plus.eval(&r) - plus.eval(&x)).abs() < 1e-14);
            assert!((minus.eval(&r) + minus.eval(&x)).abs() < 1e-14);
        }
        // an even function has zero odd part; x.ã is purely odd
        let even = from_fn(|x: &Point| x[1] * x[2]);
        let (_, m) = parity_parts(&a, &even).unwrap();
        assert_abs_diff_eq!(m.eval(&dvector![0.3, 0.5, 0.8]), 0.0, epsilon = 1e-15);
        let odd = from_fn(|x: &Point| x[0]);
        let (p, _) = parity_parts(&a, &odd).unwrap();
        assert_abs_diff_eq!(p.eval(&dvector![0.3, 0.5, 0.8]), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn plane_bijection_axis_aligned_examples() {
        let ctx = ctx2();
        // plane x3 = 0 passes through a = (2,0,0) and the origin; it maps to itself
        let xi = StiefelFrame::from_vector(&dvector![0.0, 0.0, 1.0]).unwrap();
        let plane = CentralPlane::new(xi, ctx.center().clone()).unwrap();
        let par = central_to_parallel(&ctx, &plane).unwrap();
        assert_abs_diff_eq!(par.offset()[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            par.normal_frame().matrix().column(0).into_owned(),
            dvector![0.0, 0.0, 1.0],
            epsilon = 1e-14
        );
        // xi = e2: xi'a = 0, so t = 0 and eta = e2
        let xi = StiefelFrame::from_vector(&dvector![0.0, 1.0, 0.0]).unwrap();
        let plane = CentralPlane::new(xi, ctx.center().clone()).unwrap();
        let par = central_to_parallel(&ctx, &plane).unwrap();
        assert_abs_diff_eq!(par.offset()[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            par.normal_frame().matrix().column(0).abs(),
            dvector![0.0, 1.0, 0.0],
            epsilon = 1e-14
        );
        // t = 0 parallel plane maps back to the frame itself
        let eta = StiefelFrame::from_vector(&dvector![0.0, 0.3, -0.8]).unwrap();
        let par = ParallelPlane::new(eta.clone(), ctx.center().clone(), dvector![0.0]).unwrap();
        let cen = parallel_to_central(&ctx, &par).unwrap();
        assert!((cen.normal_frame().projector() - eta.projector()).norm() < 1e-13);
    }

    #[test]
    fn plane_bijection_pointwise_and_round_trip() {
        use crate::geometry::{sphere_section_nodes, SectionRule};
        let mut rng = crate::testutil::rng(121);
        for &(dim, k, norm_a) in &[
            (3usize, 2usize, 1.5f64),
            (3, 2, 2.0),
            (3, 2, 5.0),
            (4, 2, 2.0),
            (4, 3, 1.5),
            (4, 3, 5.0),
        ] {
            let a = crate::testutil::random_sphere_point(&mut rng, dim) * norm_a;
            let ctx = CenterContext::new(a.clone(), k).unwrap();
            let phi = ctx.mobius_star().unwrap();
            let mut done = 0;
            while done < 10 {
                let xi = crate::sampling::uniform_stiefel(&mut rng, dim, dim - k);
                let plane = CentralPlane::new(xi, a.clone()).unwrap();
                if !plane.meets_ball() {
                    continue;
                }
                done += 1;
                let par = central_to_parallel(&ctx, &plane).unwrap();
                // sphere-section points of the central plane land on the image plane
                let rule = SectionRule::default_for(k).unwrap();
                let (pts, _) = sphere_section_nodes(&(&plane).into(), rule).unwrap();
                for x in pts.iter().step_by(pts.len() / 20 + 1) {
                    let y = phi.apply(x).unwrap();
                    let resid = (par.normal_frame().project_coords(&y) - par.offset()).norm();
                    assert!(resid < 1e-11, "forward image residual {resid}");
                }
                // reverse direction: points of the parallel section map to the plane
                let (pts, _) = sphere_section_nodes(&(&par).into(), rule).unwrap();
                for y in pts.iter().step_by(pts.len() / 20 + 1) {
                    let x = phi.apply(y).unwrap();
                    let resid =
                        (plane.normal_frame().project_coords(&x) - plane.offset()).norm();
                    assert!(resid < 1e-11, "reverse image residual {resid}");
                }
                // round trip recovers the plane modulo frame choice
                let back = parallel_to_central(&ctx, &par).unwrap();
                let dproj =
                    (back.normal_frame().projector() - plane.normal_frame().projector()).norm();
                assert!(dproj < 1e-11, "projector residual {dproj}");
            }
        }
    }

    #[test]
    fn bijection_rejects_planes_missing_the_ball() {
        let ctx = ctx2();
        let xi = StiefelFrame::from_vector(&dvector![1.0, 0.0, 0.0]).unwrap();
        let plane = CentralPlane::new(xi, ctx.center().clone()).unwrap();
        assert!(matches!(
            central_to_parallel(&ctx, &plane),
            Err(Error::InvalidPlane(_))
        ));
        let eta = StiefelFrame::from_vector(&dvector![0.0, 1.0, 0.0]).unwrap();
        let par = ParallelPlane::new(eta, ctx.center().clone(), dvector![1.2]).unwrap();
        assert!(matches!(
            parallel_to_central(&ctx, &par),
            Err(Error::InvalidPlane(_))
        ));
    }

    #[test]
    fn rho_is_nonsingular_for_valid_planes() {
        // for |a| > 1 and |xi'a| < 1 the Gram matrix of Q_{a*} xi stays
        // invertible; probe the smallest eigenvalue over random valid planes
        let mut rng = crate::testutil::rng(131);
        for _ in 0..50 {
            let a = crate::testutil::random_sphere_point(&mut rng, 4) * 3.0;
            let ctx = CenterContext::new(a.clone(), 2).unwrap();
            let xi = crate::sampling::uniform_stiefel(&mut rng, 4, 2);
            let plane = CentralPlane::new(xi.clone(), a).unwrap();
            if !plane.meets_ball() {
                continue;
            }
            let mut qxi = DMatrix::zeros(4, 2);
            for j in 0..2 {
                qxi.set_column(
                    j,
                    &project_perp(ctx.a_star(), &xi.matrix().column(j).into_owned()).unwrap(),
                );
            }
            let rho = qxi.transpose() * &qxi;
            let min_eig = rho
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(min_eig > 0.0);
        }
    }

    #[test]
    fn multiplier_examples_and_round_trip() {
        let ctx = ctx2();
        let one = crate::field::constant(1.0);
        let m1 = multiplier_m(&ctx, &one).unwrap();
        // f=1, k=2, a=(2,0,0), y=(0,1,0): s/(1-0) = sqrt(0.75)
        assert_abs_diff_eq!(
            m1.eval(&dvector![0.0, 1.0, 0.0]),
            0.75f64.sqrt(),
            epsilon = 1e-12
        );
        // k = 1 multiplier is pure composition
        let ctx1 = CenterContext::new(dvector![2.0, 0.0, 0.0], 1).unwrap();
        let f = from_fn(|x: &Point| x[0] + 2.0 * x[1]);
        let mf = multiplier_m(&ctx1, &f).unwrap();
        let phi = ctx1.mobius_star().unwrap();
        let x = dvector![0.0, 0.6, 0.8];
        assert_abs_diff_eq!(
            mf.eval(&x),
            f.eval(&phi.apply(&x).unwrap()),
            epsilon = 1e-13
        );
        // inverse round trip
        let ctx = CenterContext::new(dvector![1.5, -0.5, 0.3, 0.9], 3).unwrap();
        let g = from_fn(|x: &Point| (x[0] * x[1] - x[2] * 0.4).cos() + 0.2 * x[0] * x[3]);
        let round = multiplier_m_inverse(&ctx, &multiplier_m(&ctx, &g).unwrap()).unwrap();
        let other = multiplier_m(&ctx, &multiplier_m_inverse(&ctx, &g).unwrap()).unwrap();
        let mut rng = crate::testutil::rng(111);
        for _ in 0..100 {
            let x = crate::testutil::random_sphere_point(&mut rng, 4);
            assert!((round.eval(&x) - g.eval(&x)).abs() < 1e-12);
            assert!((other.eval(&x) - g.eval(&x)).abs() < 1e-12);
        }
        // m inverse of a constant stays finite and positive near the ã pole direction
        let minv = multiplier_m_inverse(&ctx, &one).unwrap();
        let v = minv.eval(&ctx.a_hat().clone());
        assert!(v.is_finite() && v > 0.0);
    }
}
