//! One-dimensional quadrature rules and product rules on spheres.
//!
//! Everything here is plain f64: Gauss–Legendre by Newton iteration on the
//! Legendre recurrence, Gauss–Jacobi by Golub–Welsch on the symmetric
//! tridiagonal recurrence matrix, and the uniform trapezoid rule on the
//! circle (spectrally accurate for periodic integrands).

use nalgebra::{DMatrix, DVector};

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial P_n at x.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|x| mid + half * x).collect(),
        ws.iter().map(|w| w * half).collect(),
    )
}

/// Gauss–Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1, 1],
/// computed by Golub–Welsch from the three-term recurrence.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let ab = alpha + beta;
    for k in 0..n {
        let kf = k as f64;
        let denom = (2.0 * kf + ab) * (2.0 * kf + ab + 2.0);
        diag[k] = if denom == 0.0 {
            // only reachable at k = 0 with alpha + beta = 0
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / denom
        };
        if k + 1 < n {
            let k1 = kf + 1.0;
            let num = 4.0 * k1 * (k1 + alpha) * (k1 + beta) * (k1 + ab);
            let den = (2.0 * k1 + ab - 1.0) * (2.0 * k1 + ab).powi(2) * (2.0 * k1 + ab + 1.0);
            off[k] = (num / den).sqrt();
        }
    }
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jm[(k, k)] = diag[k];
        if k + 1 < n {
            jm[(k, k + 1)] = off[k];
            jm[(k + 1, k)] = off[k];
        }
    }
    let eig = jm.symmetric_eigen();
    let mu0 = jacobi_mass(alpha, beta);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let v0 = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    (
        pairs.iter().map(|p| p.0).collect(),
        pairs.iter().map(|p| p.1).collect(),
    )
}

/// 2^(alpha+beta+1) * B(alpha+1, beta+1), the total mass of the Jacobi weight.
fn jacobi_mass(alpha: f64, beta: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let ln = (alpha + beta + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0)
        + ln_gamma(beta + 1.0)
        - ln_gamma(alpha + beta + 2.0);
    ln.exp()
}

/// Uniform trapezoid nodes on the circle: angles 2*pi*i/n, weights 2*pi/n.
pub fn circle_trapezoid(n: usize) -> (Vec<f64>, f64) {
    let angles = (0..n)
        .map(|i| 2.0 * std::f64::consts::PI * i as f64 / n as f64)
        .collect();
    (angles, 2.0 * std::f64::consts::PI / n as f64)
}

/// Quadrature over the unit sphere S^n embedded in R^{n+1}.
///
/// n = 2: Gauss–Legendre in z times trapezoid in azimuth.
/// n = 3: Gauss–Legendre in the polar angle (weight sin^2) times an S^2 rule.
pub struct SphereRule {
    pub nodes: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(n: usize, resolution: usize) -> Self {
        match n {
            2 => Self::s2(resolution, 2 * resolution),
            3 => Self::s3(resolution),
            _ => panic!("sphere quadrature implemented for n in {{2, 3}}"),
        }
    }

    fn s2(nz: usize, nphi: usize) -> Self {
        let (zs, wz) = gauss_legendre(nz);
        let (phis, wphi) = circle_trapezoid(nphi);
        let mut nodes = Vec::with_capacity(nz * nphi);
        let mut weights = Vec::with_capacity(nz * nphi);
        for (z, wz) in zs.iter().zip(&wz) {
            let s = (1.0 - z * z).sqrt();
            for phi in &phis {
                nodes.push(DVector::from_vec(vec![s * phi.cos(), s * phi.sin(), *z]));
                weights.push(wz * wphi);
            }
        }
        SphereRule { nodes, weights }
    }

    fn s3(res: usize) -> Self {
        // x = (sin(chi) * omega, cos(chi)), omega in S^2, d x = sin^2(chi) dchi domega
        let (cs, wc) = gauss_legendre_on(res, 0.0, std::f64::consts::PI);
        let inner = Self::s2(res, 2 * res);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (chi, wchi) in cs.iter().zip(&wc) {
            let (s, c) = chi.sin_cos();
            for (om, wom) in inner.nodes.iter().zip(&inner.weights) {
                nodes.push(DVector::from_vec(vec![
                    s * om[0],
                    s * om[1],
                    s * om[2],
                    c,
                ]));
                weights.push(wchi * wom * s * s);
            }
        }
        SphereRule { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(&DVector<f64>) -> f64 + Sync) -> f64 {
        use rayon::prelude::*;
        let terms: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(x, w)| w * f(x))
            .collect();
        terms.iter().sum()
    }
}

/// Surface area of the unit sphere S^{m} in R^{m+1}.
pub fn sphere_area(m: usize) -> f64 {
    use statrs::function::gamma::gamma;
    let mf = (m + 1) as f64;
    2.0 * std::f64::consts::PI.powf(mf / 2.0) / gamma(mf / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_matches_known_5pt() {
        let (x, w) = gauss_legendre(5);
        assert_abs_diff_eq!(x[2], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x[4], 0.906179845938664, epsilon = 1e-13);
        assert_abs_diff_eq!(w[2], 0.568888888888889, epsilon = 1e-13);
        assert_abs_diff_eq!(w[4], 0.236926885056189, epsilon = 1e-13);
    }

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let (x, w) = gauss_legendre(8);
        // degree 15 polynomial integrates exactly
        let int: f64 = x
            .iter()
            .zip(&w)
            .map(|(x, w)| w * (3.0 * x.powi(15) + x.powi(10) - 2.0 * x.powi(3) + 1.0))
            .sum();
        let exact = 2.0 / 11.0 + 2.0;
        assert_abs_diff_eq!(int, exact, epsilon = 1e-13);
    }

    #[test]
    fn gauss_jacobi_integrates_sqrt_weight() {
        // weight (1+x)^(-1/2) on [-1,1]: integral of 1 is 2*sqrt(2)
        let (x, w) = gauss_jacobi(16, 0.0, -0.5);
        let total: f64 = w.iter().sum();
        assert_abs_diff_eq!(total, 2.0 * 2.0f64.sqrt(), epsilon = 1e-12);
        // integral of (1+x): int (1+x)^(1/2) = (2/3) 2^(3/2)
        let m1: f64 = x.iter().zip(&w).map(|(x, w)| w * (1.0 + x)).sum();
        assert_abs_diff_eq!(m1, 2.0f64.powf(1.5) * 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn sphere_rules_reproduce_surface_area() {
        let s2 = SphereRule::new(2, 48);
        assert_abs_diff_eq!(
            s2.weights.iter().sum::<f64>(),
            4.0 * std::f64::consts::PI,
            epsilon = 1e-10
        );
        let s3 = SphereRule::new(3, 24);
        assert_abs_diff_eq!(
            s3.weights.iter().sum::<f64>(),
            2.0 * std::f64::consts::PI * std::f64::consts::PI,
            epsilon = 1e-8
        );
    }

    #[test]
    fn sphere_area_formula() {
        assert_abs_diff_eq!(sphere_area(1), 2.0 * std::f64::consts::PI, epsilon = 1e-14);
        assert_abs_diff_eq!(sphere_area(2), 4.0 * std::f64::consts::PI, epsilon = 1e-13);
    }
}
