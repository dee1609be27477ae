//! PSL(2,R) structure theory: Iwasawa coordinates, the height function A, the
//! angle map sigma, the Lie-algebra norm, and the two distances d(. , .) and
//! n(. , .) on pairs of oriented unit geodesic segments.
//!
//! Matrices are kept at determinant one and canonical sign (first nonzero
//! entry of the top row positive), so equality tests are deterministic in
//! PSL(2,R).

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("matrix determinant {0} is not close to 1")]
    NotUnimodular(f64),
    #[error("group logarithm outside the normal-coordinate chart (|X| = {0:.3})")]
    OutOfChart(f64),
}

/// Clamp value for the alignment distance outside the log chart.  Every bound
/// in the estimates only uses n(. , .) <= 2, so any ceiling above that works.
pub const ALIGNMENT_CEILING: f64 = 10.0;

/// Radius of the normal-coordinate chart used for the group distance.
pub const CHART_RADIUS: f64 = 6.0;

/// An element of PSL(2,R): det = 1, canonical sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    m: [[f64; 2]; 2],
}

/// A traceless 2x2 matrix [[x1, x2],[x3, -x1]] with the Euclidean norm
/// sqrt(x1^2 + x2^2 + x3^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LieVector {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl LieVector {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        LieVector { x1, x2, x3 }
    }

    pub fn from_matrix(m: [[f64; 2]; 2]) -> Self {
        debug_assert!((m[0][0] + m[1][1]).abs() < 1e-10);
        LieVector {
            x1: m[0][0],
            x2: m[0][1],
            x3: m[1][0],
        }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.x1, self.x2], [self.x3, -self.x1]]
    }

    pub fn norm(&self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3).sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        LieVector::new(c * self.x1, c * self.x2, c * self.x3)
    }

    /// exp of the matrix, as a group element.
    pub fn exp(&self) -> GroupElement {
        let delta = self.x1 * self.x1 + self.x2 * self.x3; // X^2 = delta * I
        let (c, s) = if delta > 1e-24 {
            let r = delta.sqrt();
            (r.cosh(), r.sinh() / r)
        } else if delta < -1e-24 {
            let r = (-delta).sqrt();
            (r.cos(), r.sin() / r)
        } else {
            (1.0, 1.0)
        };
        GroupElement::from_matrix([
            [c + s * self.x1, s * self.x2],
            [s * self.x3, c - s * self.x1],
        ])
    }
}

impl GroupElement {
    /// Normalizes an arbitrary nonsingular matrix with positive determinant to
    /// det 1 and canonical sign.
    pub fn from_matrix(m: [[f64; 2]; 2]) -> Self {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!(det > 0.0, "matrix must have positive determinant");
        let s = det.sqrt();
        let mut out = [[m[0][0] / s, m[0][1] / s], [m[1][0] / s, m[1][1] / s]];
        let lead = if out[0][0].abs() > 1e-14 {
            out[0][0]
        } else {
            out[0][1]
        };
        if lead < 0.0 {
            for row in &mut out {
                row[0] = -row[0];
                row[1] = -row[1];
            }
        }
        GroupElement { m: out }
    }

    pub fn identity() -> Self {
        GroupElement {
            m: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    /// Rotation by theta about i: k(theta).
    pub fn k(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        GroupElement::from_matrix([[c, s], [-s, c]])
    }

    /// Diagonal flow a(y) = exp(y H), moving i to i e^y.
    pub fn a(y: f64) -> Self {
        GroupElement::from_matrix([[(y / 2.0).exp(), 0.0], [0.0, (-y / 2.0).exp()]])
    }

    /// Horocyclic translation n(x): z -> z + x.
    pub fn n(x: f64) -> Self {
        GroupElement::from_matrix([[1.0, x], [0.0, 1.0]])
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.m
    }

    pub fn mul(&self, rhs: &GroupElement) -> GroupElement {
        let a = &self.m;
        let b = &rhs.m;
        GroupElement::from_matrix([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement::from_matrix([
            [self.m[1][1], -self.m[0][1]],
            [-self.m[1][0], self.m[0][0]],
        ])
    }

    /// Moebius action on the upper half plane.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        let num = Complex64::new(self.m[0][0], 0.0) * z + self.m[0][1];
        let den = Complex64::new(self.m[1][0], 0.0) * z + self.m[1][1];
        num / den
    }

    /// Action on the boundary R u {inf}; `None` encodes the point at infinity.
    pub fn apply_boundary(&self, x: Option<f64>) -> Option<f64> {
        match x {
            Some(x) => {
                let den = self.m[1][0] * x + self.m[1][1];
                if den.abs() < 1e-300 {
                    None
                } else {
                    Some((self.m[0][0] * x + self.m[0][1]) / den)
                }
            }
            None => {
                if self.m[1][0].abs() < 1e-300 {
                    None
                } else {
                    Some(self.m[0][0] / self.m[1][0])
                }
            }
        }
    }

    /// Height A(g) = log Im(g . i) = -log(g21^2 + g22^2).
    pub fn height(&self) -> f64 {
        -(self.m[1][0] * self.m[1][0] + self.m[1][1] * self.m[1][1]).ln()
    }

    /// The point g . i.
    pub fn base_point(&self) -> Complex64 {
        self.apply(Complex64::new(0.0, 1.0))
    }

    /// Matrix logarithm in PSL(2,R): the sign is flipped when needed so the
    /// trace is nonnegative, then X with exp(X) = +-g is returned.
    pub fn log(&self) -> LieVector {
        let mut m = self.m;
        let mut tr = m[0][0] + m[1][1];
        if tr < 0.0 {
            for row in &mut m {
                row[0] = -row[0];
                row[1] = -row[1];
            }
            tr = -tr;
        }
        // traceless part T = m - (tr/2) I satisfies T = f(mu) X with X = log m:
        // f = sinh(mu)/mu when tr/2 = cosh(mu), f = sin(mu)/mu when
        // tr/2 = cos(mu), and f = 1 in the parabolic case.
        let half = tr / 2.0;
        let scale = if half > 1.0 + 1e-12 {
            let mu = half.acosh();
            mu / mu.sinh()
        } else if half < 1.0 - 1e-12 {
            let mu = half.clamp(-1.0, 1.0).acos();
            mu / mu.sin()
        } else {
            1.0
        };
        LieVector {
            x1: scale * (m[0][0] - half),
            x2: scale * m[0][1],
            x3: scale * m[1][0],
        }
    }

    /// Iwasawa decomposition g = n(x) a(y) k(theta).
    pub fn iwasawa(&self) -> IwasawaCoords {
        let w = self.base_point();
        let y = w.im.ln();
        let x = w.re;
        // k = a(-y) n(-x) g
        let k = GroupElement::a(-y).mul(&GroupElement::n(-x)).mul(self);
        let theta = 2.0 * k.m[0][1].atan2(k.m[0][0]);
        IwasawaCoords { x, y, theta }
    }

    /// K-angle of the Iwasawa decomposition, in (-pi, pi].
    pub fn iwasawa_angle(&self) -> f64 {
        self.iwasawa().theta
    }

    /// Cartan decomposition g = k(c1) a(y) k(c2) with y >= 0, via the SVD of
    /// the matrix (k(theta) is the rotation R(-theta/2)).
    pub fn cartan(&self) -> (f64, f64, f64) {
        let m = self.m;
        // m^T m = [[e, f], [f, g2]], det 1
        let e = m[0][0] * m[0][0] + m[1][0] * m[1][0];
        let f = m[0][0] * m[0][1] + m[1][0] * m[1][1];
        let g2 = m[0][1] * m[0][1] + m[1][1] * m[1][1];
        let tr = e + g2;
        let lam = (tr + (tr * tr - 4.0).max(0.0).sqrt()) / 2.0;
        let sigma = lam.sqrt().max(1.0);
        let y = 2.0 * sigma.ln();
        if y < 1e-12 {
            let theta = 2.0 * m[0][1].atan2(m[0][0]);
            return (theta, 0.0, 0.0);
        }
        // eigenvector angle for the larger eigenvalue of m^T m
        let phi_v = 0.5 * (2.0 * f).atan2(e - g2);
        let c2 = 2.0 * phi_v; // V^T = R(-phi_v) = k(2 phi_v)
        // U = m V Sigma^{-1}, a rotation R(phi_u) = k(-2 phi_u)
        let (sv, cv) = phi_v.sin_cos();
        let u00 = (m[0][0] * cv + m[0][1] * sv) / sigma;
        let u10 = (m[1][0] * cv + m[1][1] * sv) / sigma;
        let phi_u = u10.atan2(u00);
        let c1 = -2.0 * phi_u;
        (c1, y, c2)
    }
}

/// Iwasawa coordinates of g = n(x) a(y) k(theta).
#[derive(Debug, Clone, Copy)]
pub struct IwasawaCoords {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl IwasawaCoords {
    pub fn recompose(&self) -> GroupElement {
        GroupElement::n(self.x)
            .mul(&GroupElement::a(self.y))
            .mul(&GroupElement::k(self.theta))
    }
}

/// Angle map sigma with k(theta) g in N A k(sigma(theta)).
pub fn angle_map_sigma(g: &GroupElement, theta: f64) -> f64 {
    GroupElement::k(theta).mul(g).iwasawa_angle()
}

/// d/dt A(g a(t)) at t = 0 equals cos of the K-angle of g.
pub fn a_derivative(g: &GroupElement) -> f64 {
    g.iwasawa_angle().cos()
}

/// Mixed flow derivative of the height: d^2/dt ds A(k(s) g a(y-frame) n(t))
/// at s = t = 0, evaluated at g = a(y).  Equals e^y.
pub fn mixed_flow_derivative_a(y: f64) -> f64 {
    let h = 1e-4;
    let f = |s: f64, t: f64| {
        GroupElement::k(s)
            .mul(&GroupElement::a(y))
            .mul(&GroupElement::n(t))
            .height()
    };
    (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h)
}

/// Hyperbolic distance between points of the upper half plane.
pub fn dist_points(p: Complex64, q: Complex64) -> f64 {
    let diff = p - q;
    let c = 1.0 + diff.norm_sqr() / (2.0 * p.im * q.im);
    c.acosh()
}

/// Chart-local left-invariant distance d_G(g, h) = |log(g^-1 h)|.
pub fn dist_group(g: &GroupElement, h: &GroupElement) -> Result<f64, GeometryError> {
    let x = g.inverse().mul(h).log();
    let n = x.norm();
    if n > CHART_RADIUS {
        return Err(GeometryError::OutOfChart(n));
    }
    Ok(n)
}

/// An oriented unit-speed geodesic segment l(x) = g a(x) . i for x in
/// [0, length], inheriting the upward orientation of the vertical geodesic.
#[derive(Debug, Clone, Copy)]
pub struct GeodesicSegment {
    pub base: GroupElement,
    pub length: f64,
}

impl GeodesicSegment {
    pub fn new(base: GroupElement, length: f64) -> Self {
        assert!(length > 0.0);
        GeodesicSegment { base, length }
    }

    /// The upward unit segment based at i.
    pub fn standard() -> Self {
        GeodesicSegment::new(GroupElement::identity(), 1.0)
    }

    pub fn point(&self, x: f64) -> Complex64 {
        self.base.mul(&GroupElement::a(x)).base_point()
    }

    pub fn translate(&self, g: &GroupElement) -> GeodesicSegment {
        GeodesicSegment::new(g.mul(&self.base), self.length)
    }
}

fn golden_min(mut lo: f64, mut hi: f64, tol: f64, f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (lo + hi);
    (xm, f(xm))
}

/// Minimum of f over [lo, hi]: coarse scan then golden-section refinement.
fn scan_min(lo: f64, hi: f64, panels: usize, tol: f64, f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let mut best = (lo, f(lo));
    for i in 1..=panels {
        let x = lo + (hi - lo) * i as f64 / panels as f64;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    let h = (hi - lo) / panels as f64;
    let a = (best.0 - h).max(lo);
    let b = (best.0 + h).min(hi);
    golden_min(a, b, tol, f)
}

/// Pointwise infimum d(l1, l2) = inf d(p, q) over p in l1, q in l2, to
/// absolute accuracy ~1e-9.  The pointwise distance between geodesics is
/// jointly convex, so nested 1D minimization converges.
pub fn dist_geodesics(l1: &GeodesicSegment, l2: &GeodesicSegment) -> f64 {
    let inner = |x: f64| {
        let p = l1.point(x);
        scan_min(0.0, l2.length, 24, 1e-11, &|y| dist_points(p, l2.point(y))).1
    };
    scan_min(0.0, l1.length, 24, 1e-10, &inner).1
}

/// Quick upper/lower screen for `dist_geodesics(..) <= cut`: returns Some
/// verdict when a coarse grid decides, None when refinement is needed.
pub fn dist_geodesics_screen(l1: &GeodesicSegment, l2: &GeodesicSegment, cut: f64) -> Option<bool> {
    let n = 8;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let p = l1.point(l1.length * i as f64 / n as f64);
        for j in 0..=n {
            let q = l2.point(l2.length * j as f64 / n as f64);
            let d = dist_points(p, q);
            if d < best {
                best = d;
            }
        }
    }
    // distance is 1-Lipschitz in each arclength parameter
    let slack = (l1.length + l2.length) / n as f64;
    if best <= cut {
        return Some(true);
    }
    if best - slack > cut {
        return Some(false);
    }
    None
}

/// Alignment distance n(l1, l2) = inf_t |log(g1^-1 g2 a(-t))|, clamped at
/// [`ALIGNMENT_CEILING`] outside the chart.  Zero exactly when the oriented
/// complete geodesics coincide.
pub fn n_align(l1: &GeodesicSegment, l2: &GeodesicSegment) -> f64 {
    n_align_frames(&l1.base, &l2.base)
}

pub fn n_align_frames(g1: &GroupElement, g2: &GroupElement) -> f64 {
    let rel = g1.inverse().mul(g2);
    let f = |t: f64| rel.mul(&GroupElement::a(-t)).log().norm();
    // The relative frame moves distance ~|t| at large |t|; the infimum lies in
    // a bracket determined by the base-point heights.
    let center = rel.base_point().im.ln();
    let (_, v) = scan_min(center - 4.0, center + 4.0, 96, 1e-10, &f);
    if v > CHART_RADIUS {
        ALIGNMENT_CEILING
    } else {
        v
    }
}

/// Coarse version used inside counting scans (tolerance ~1e-4): the minimizing
/// translation sits near the relative height, so a short bracket suffices.
pub fn n_align_fast(g1: &GroupElement, g2: &GroupElement) -> f64 {
    let rel = g1.inverse().mul(g2);
    let f = |t: f64| rel.mul(&GroupElement::a(-t)).log().norm();
    let center = rel.base_point().im.ln();
    let (_, v) = scan_min(center - 2.0, center + 2.0, 24, 1e-4, &f);
    if v > CHART_RADIUS {
        ALIGNMENT_CEILING
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn random_group(state: &mut u64) -> GroupElement {
        let mut next = || {
            *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((*state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        let (x, y, t) = (next() * 1.5, next() * 1.5, next() * PI);
        GroupElement::n(x)
            .mul(&GroupElement::a(y))
            .mul(&GroupElement::k(t))
    }

    #[test]
    fn iwasawa_of_a_and_k() {
        let c = GroupElement::a(0.7).iwasawa();
        assert!(c.x.abs() < 1e-14 && (c.y - 0.7).abs() < 1e-14 && c.theta.abs() < 1e-14);
        let c = GroupElement::k(1.1).iwasawa();
        assert!(c.y.abs() < 1e-13, "A(k(theta)) = 0");
        assert!((c.theta - 1.1).abs() < 1e-12);
    }

    #[test]
    fn iwasawa_round_trip() {
        let mut state = 7u64;
        for _ in 0..10_000 {
            let g = random_group(&mut state);
            let h = g.iwasawa().recompose();
            let gm = g.matrix();
            let hm = h.matrix();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((gm[i][j] - hm[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn height_closed_form() {
        let mut state = 99u64;
        for _ in 0..100 {
            let g = random_group(&mut state);
            assert!((g.height() - g.base_point().im.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_identity_and_fixed_point() {
        for theta in [0.3, 1.0, 2.5, -1.2] {
            let s = angle_map_sigma(&GroupElement::identity(), theta);
            let wrapped = (theta - s).rem_euclid(2.0 * PI);
            assert!(wrapped < 1e-12 || (2.0 * PI - wrapped) < 1e-12);
        }
        // g = a(y), theta = pi: cot(pi/2) = 0 forces sigma = pi
        let s = angle_map_sigma(&GroupElement::a(1.3), PI);
        assert!((s.abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn sigma_against_upangle_relation() {
        // e^{-y} cot(theta/2) = cot(sigma/2) for g = a(y)
        let y = 1.0;
        let theta = PI / 2.0;
        let s = angle_map_sigma(&GroupElement::a(y), theta);
        let expected = 2.0 * (1.0 / (-y as f64).exp()).atan(); // 2 arccot(e^{-1})
        assert!((s - expected).abs() < 1e-12);
        // monotone on (0, 2pi): d sigma / d theta > 0
        for i in 1..64 {
            let t = 2.0 * PI * i as f64 / 64.0;
            let h = 1e-6;
            let ds = angle_map_sigma(&GroupElement::a(0.8), t + h)
                - angle_map_sigma(&GroupElement::a(0.8), t - h);
            // unwrap the 2pi jump near the branch point
            let ds = if ds < -PI { ds + 2.0 * PI } else { ds };
            assert!(ds > 0.0, "sigma not increasing at theta = {t}");
        }
    }

    #[test]
    fn a_derivative_matches_cos_angle_and_finite_difference() {
        assert!((a_derivative(&GroupElement::identity()) - 1.0).abs() < 1e-14);
        let g = GroupElement::n(0.4).mul(&GroupElement::a(0.2)).mul(&GroupElement::k(PI / 2.0));
        assert!(a_derivative(&g).abs() < 1e-12);
        let mut state = 5u64;
        for _ in 0..50 {
            let g = random_group(&mut state);
            let h = 1e-5;
            let fd = (g.mul(&GroupElement::a(h)).height() - g.mul(&GroupElement::a(-h)).height())
                / (2.0 * h);
            assert!((fd - a_derivative(&g)).abs() < 1e-8);
        }
    }

    #[test]
    fn mixed_flow_derivative_equals_exp_y() {
        for y in [-2.0, -1.0, -0.3, 0.0, 0.5, 1.0, 2.0] {
            let v = mixed_flow_derivative_a(y);
            assert!(
                (v - y.exp()).abs() < 1e-5 * y.exp().max(1.0),
                "y = {y}: got {v}, want {}",
                y.exp()
            );
        }
    }

    #[test]
    fn unit_speed_parametrization() {
        let seg = GeodesicSegment::new(GroupElement::n(0.3).mul(&GroupElement::k(0.9)), 1.0);
        for (x, xp) in [(0.0, 1.0), (0.2, 0.9), (0.5, 0.1)] {
            let d = dist_points(seg.point(x), seg.point(xp));
            assert!((d - (x - xp).abs()).abs() < 1e-10);
        }
    }

    #[test]
    fn dist_geodesics_zero_on_self_and_triangle_sanity() {
        let seg = GeodesicSegment::standard();
        assert!(dist_geodesics(&seg, &seg) < 1e-9);
        let far = seg.translate(&GroupElement::n(50.0));
        let d = dist_geodesics(&seg, &far);
        assert!(d >= dist_points(seg.point(0.0), far.point(0.0)) - seg.length - far.length);
    }

    #[test]
    fn dist_geodesics_matches_grid_oracle() {
        // l2 = n(x0) l1, both the vertical unit segment at i
        let l1 = GeodesicSegment::standard();
        for x0 in [0.4, 1.0, 2.0] {
            let l2 = l1.translate(&GroupElement::n(x0));
            let fast = dist_geodesics(&l1, &l2);
            let mut oracle = f64::INFINITY;
            for i in 0..=100 {
                for j in 0..=100 {
                    let d = dist_points(l1.point(i as f64 / 100.0), l2.point(j as f64 / 100.0));
                    oracle = oracle.min(d);
                }
            }
            // refine oracle around the best grid point
            assert!(fast <= oracle + 1e-9);
            assert!(oracle - fast < 1e-3, "grid {oracle} vs refined {fast}");
        }
    }

    #[test]
    fn n_align_zero_iff_same_oriented_geodesic() {
        let l1 = GeodesicSegment::standard();
        assert!(n_align(&l1, &l1) < 1e-9);
        // shift along itself
        let l2 = GeodesicSegment::new(GroupElement::a(0.8), 1.0);
        assert!(n_align(&l1, &l2) < 1e-9);
        // reversed orientation does not align
        let l3 = GeodesicSegment::new(GroupElement::k(PI), 1.0);
        assert!(n_align(&l1, &l3) > 0.5);
        // transverse tilt of size eps gives n ~ eps
        for eps in [1e-3, 1e-2] {
            let x = LieVector::new(0.0, eps, 0.0);
            let l4 = GeodesicSegment::new(x.exp(), 1.0);
            let n = n_align(&l1, &l4);
            assert!((n / eps - 1.0).abs() < 0.05, "eps {eps}: n = {n}");
        }
    }

    #[test]
    fn n_align_invariant_under_left_translation() {
        let l1 = GeodesicSegment::new(GroupElement::n(0.2).mul(&GroupElement::k(0.4)), 1.0);
        let l2 = GeodesicSegment::new(GroupElement::a(0.5).mul(&GroupElement::k(-0.3)), 1.0);
        let h = GroupElement::n(-0.7).mul(&GroupElement::a(0.9));
        let n1 = n_align(&l1, &l2);
        let n2 = n_align(&l1.translate(&h), &l2.translate(&h));
        assert!((n1 - n2).abs() < 1e-9);
    }

    #[test]
    fn dist_group_properties() {
        let mut state = 11u64;
        for _ in 0..50 {
            let g = random_group(&mut state);
            assert!(dist_group(&g, &g).unwrap() < 1e-12);
            // normal coordinates: d(g, g exp(X)) = |X| + O(|X|^2)
            let x = LieVector::new(3e-4, -2e-4, 1e-4);
            let d = dist_group(&g, &g.mul(&x.exp())).unwrap();
            assert!((d - x.norm()).abs() < 1e-6);
            // left invariance is exact by construction
            let h = random_group(&mut state);
            let g2 = random_group(&mut state);
            let d1 = dist_group(&g, &g2).unwrap();
            let d2 = dist_group(&h.mul(&g), &h.mul(&g2)).unwrap();
            assert!((d1 - d2).abs() < 1e-9);
        }
    }

    #[test]
    fn log_exp_round_trip() {
        let mut state = 3u64;
        for _ in 0..200 {
            let g = random_group(&mut state);
            let x = g.log();
            let h = x.exp();
            let gm = g.matrix();
            let hm = h.matrix();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((gm[i][j] - hm[i][j]).abs() < 1e-9, "{gm:?} vs {hm:?}");
                }
            }
        }
    }

    #[test]
    fn cartan_decomposition_recomposes() {
        let mut state = 17u64;
        for _ in 0..200 {
            let g = random_group(&mut state);
            let (c1, y, c2) = g.cartan();
            assert!(y >= -1e-12);
            let h = GroupElement::k(c1).mul(&GroupElement::a(y)).mul(&GroupElement::k(c2));
            let gm = g.matrix();
            let hm = h.matrix();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((gm[i][j] - hm[i][j]).abs() < 1e-9);
                }
            }
        }
    }
}
