//! Stationary-phase structure of the restriction integral: the phase
//! phi(x1, x2, theta) = rho (x1 - x2) - A(k(theta) a(x1)) + A(k(theta) g a(x2)),
//! its critical points (critical geodesics meeting both segments at angles
//! +-alpha), the analytic Hessian, the reduced phase psi along theta, and the
//! classification of the degenerate parameter sets D1, D2+- and the lambda = 0
//! doubled set.

use crate::geometry::{n_align_frames, GroupElement};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhaseError {
    #[error("rho = {0} outside [delta, 1-delta] with delta = {1}")]
    BadRho(f64, f64),
    #[error("(theta, g, rho) within tolerance of the singular set S at theta = {0}")]
    OnSingularSet(f64),
    #[error("uniformization chart exceeded: {0}")]
    ChartExceeded(String),
}

/// Proximity tolerance for the singular set S (in the K-angle of the rotated
/// geodesics).
pub const SINGULAR_TOL: f64 = 1e-6;

/// The parameters (g, rho) of the phase, with alpha = arccos(rho).
#[derive(Debug, Clone, Copy)]
pub struct PhaseContext {
    pub g: GroupElement,
    pub rho: f64,
    pub delta: f64,
}

impl PhaseContext {
    pub fn new(g: GroupElement, rho: f64, delta: f64) -> Result<Self, PhaseError> {
        if !(delta..=1.0 - delta).contains(&rho) || !(0.0..0.5).contains(&delta) {
            return Err(PhaseError::BadRho(rho, delta));
        }
        Ok(PhaseContext { g, rho, delta })
    }

    /// The lambda = 0 phase (rho = 0, alpha = pi/2).
    pub fn lambda_zero(g: GroupElement) -> Self {
        PhaseContext {
            g,
            rho: 0.0,
            delta: 0.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.rho.acos()
    }
}

/// phi(x1, x2, theta) via the closed-form height A(g) = -log(g21^2 + g22^2).
pub fn phase_value(x1: f64, x2: f64, theta: f64, ctx: &PhaseContext) -> f64 {
    let k = GroupElement::k(theta);
    let a1 = k.mul(&GroupElement::a(x1)).height();
    let a2 = k.mul(&ctx.g).mul(&GroupElement::a(x2)).height();
    ctx.rho * (x1 - x2) - a1 + a2
}

fn wrap_2pi(theta: f64) -> f64 {
    theta.rem_euclid(2.0 * PI)
}

/// Distance of an angle to the set {0, pi} mod 2 pi.
fn dist_to_vertical(theta: f64) -> f64 {
    let t = wrap_2pi(theta);
    let d0 = t.min(2.0 * PI - t);
    let dpi = (t - PI).abs();
    d0.min(dpi)
}

/// The <= 4 angles where k(theta) l or k(theta) g l is vertical, sorted in
/// [0, 2 pi).  Closed form: k(theta) sends a boundary point u to infinity at
/// theta = 2 arccot(u).
pub fn singular_thetas(ctx: &PhaseContext) -> Vec<f64> {
    let mut out = vec![0.0, PI];
    for endpoint in [
        ctx.g.apply_boundary(Some(0.0)),
        ctx.g.apply_boundary(None),
    ] {
        match endpoint {
            Some(u) => out.push(wrap_2pi(2.0 * 1.0f64.atan2(u))),
            None => {} // already covered by theta = 0
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    out
}

/// True when (theta, g, rho) is within [`SINGULAR_TOL`] of S.
pub fn is_singular(theta: f64, ctx: &PhaseContext) -> bool {
    if dist_to_vertical(theta) < SINGULAR_TOL {
        return true;
    }
    let sigma = GroupElement::k(theta).mul(&ctx.g).iwasawa_angle();
    dist_to_vertical(sigma) < SINGULAR_TOL
}

/// The unique x1 on k(theta) l and x2 on k(theta) g l where the tangent makes
/// the critical angle: e^{xi} tan(angle/2) = tan(eps alpha / 2), with eps = +1
/// exactly when the rotated geodesic runs right to left (angle in (0, pi)).
pub fn xi_points(theta: f64, ctx: &PhaseContext) -> Result<(f64, f64), PhaseError> {
    if is_singular(theta, ctx) {
        return Err(PhaseError::OnSingularSet(theta));
    }
    let alpha = ctx.alpha();
    let xi_for = |angle: f64| -> f64 {
        let a = wrap_2pi(angle);
        let eps = if a < PI { 1.0 } else { -1.0 };
        ((eps * alpha / 2.0).tan() / (a / 2.0).tan()).ln()
    };
    let xi1 = xi_for(theta);
    let sigma = GroupElement::k(theta).mul(&ctx.g).iwasawa_angle();
    let xi2 = xi_for(sigma);
    Ok((xi1, xi2))
}

/// Orientation signs (eps1, eps2) at theta.
pub fn xi_signs(theta: f64, ctx: &PhaseContext) -> (f64, f64) {
    let eps = |a: f64| if wrap_2pi(a) < PI { 1.0 } else { -1.0 };
    let sigma = GroupElement::k(theta).mul(&ctx.g).iwasawa_angle();
    (eps(theta), eps(sigma))
}

/// Reduced phase psi(theta) = phi(xi1(theta), xi2(theta), theta).
pub fn reduced_psi(theta: f64, ctx: &PhaseContext) -> Result<f64, PhaseError> {
    let (x1, x2) = xi_points(theta, ctx)?;
    Ok(phase_value(x1, x2, theta, ctx))
}

/// d psi / d theta by the envelope identity: at the partial critical points
/// in x1, x2, only the explicit theta-dependence survives, and
/// d/dtheta A(k(theta) p) is the horizontal coordinate of k(theta) p.
pub fn reduced_psi_dtheta(theta: f64, ctx: &PhaseContext) -> Result<f64, PhaseError> {
    let (x1, x2) = xi_points(theta, ctx)?;
    let k = GroupElement::k(theta);
    let p1 = k.mul(&GroupElement::a(x1)).base_point();
    let p2 = k.mul(&ctx.g).mul(&GroupElement::a(x2)).base_point();
    Ok(-p1.re + p2.re)
}

/// A critical point of the phase: the rotated segments meet a common vertical
/// geodesic at angles beta_i' in {-alpha, +alpha}, with aperture h the signed
/// vertical distance between the two meeting points, and kappa the derivative
/// of the first rotated angle.
#[derive(Debug, Clone, Copy)]
pub struct CriticalPoint {
    pub theta: f64,
    pub x1: f64,
    pub x2: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// aperture: signed distance along the common vertical geodesic
    pub h: f64,
    /// kappa = d beta_1 / d theta at the critical point, nonzero
    pub kappa: f64,
}

/// Classification of the degenerate parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegeneracyClass {
    Nondegenerate,
    /// g in A: identical oriented geodesics, psi vanishes identically
    D1,
    /// g in A k(+2 alpha) A: cubic degeneracy
    D2Plus,
    /// g in A k(-2 alpha) A
    D2Minus,
    /// lambda = 0 doubled set A union k(pi) A
    Lambda0Degenerate,
}

#[derive(Debug, Clone, Copy)]
pub struct DegeneracyLabel {
    pub class: DegeneracyClass,
    /// for D2: (y, theta') with g in a(y) k(+-2 alpha) A and the degenerate
    /// critical angle theta' solving cot(theta'/2) = -+ e^y cot(alpha/2)
    pub witness: Option<(f64, f64)>,
}

/// Builds the full critical-point data at a root theta' of psi'.
pub fn critical_point_at(theta: f64, ctx: &PhaseContext) -> Result<CriticalPoint, PhaseError> {
    let (x1, x2) = xi_points(theta, ctx)?;
    let (e1, e2) = xi_signs(theta, ctx);
    let alpha = ctx.alpha();
    let k = GroupElement::k(theta);
    let p1 = k.mul(&GroupElement::a(x1)).base_point();
    let p2 = k.mul(&ctx.g).mul(&GroupElement::a(x2)).base_point();
    let h = (p2.im / p1.im).ln();
    // differentiate tan(beta_1/2) = e^{x1} tan(theta/2) at fixed x1
    let beta1 = e1 * alpha;
    let kappa = x1.exp() * (beta1 / 2.0).cos().powi(2) / (theta / 2.0).cos().powi(2);
    Ok(CriticalPoint {
        theta,
        x1,
        x2,
        beta1,
        beta2: e2 * alpha,
        h,
        kappa,
    })
}

/// All critical points of phi: the roots of psi' on (0, 2pi) \ S, located by a
/// sign scan over `panels` panels between consecutive singular angles followed
/// by bisection.  Roots closer to S than the scan margin are not resolved;
/// completeness is relative to the scan resolution.
pub fn find_critical_points(ctx: &PhaseContext, panels: usize) -> Vec<CriticalPoint> {
    let mut sing = singular_thetas(ctx);
    sing.push(2.0 * PI);
    let margin = 1e-5;
    let mut out = Vec::new();
    for w in sing.windows(2) {
        let lo = w[0] + margin;
        let hi = w[1] - margin;
        if hi <= lo {
            continue;
        }
        let n = ((hi - lo) / (2.0 * PI) * panels as f64).ceil().max(8.0) as usize;
        let eval = |t: f64| reduced_psi_dtheta(t, ctx).unwrap_or(f64::NAN);
        let mut prev_t = lo;
        let mut prev_v = eval(lo);
        for i in 1..=n {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            let v = eval(t);
            if prev_v.is_finite() && v.is_finite() && prev_v * v < 0.0 {
                // bisection
                let (mut a, mut b) = (prev_t, t);
                let mut fa = prev_v;
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    let fm = eval(m);
                    if fa * fm <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                        fa = fm;
                    }
                    if b - a < 1e-13 {
                        break;
                    }
                }
                let root = 0.5 * (a + b);
                if let Ok(cp) = critical_point_at(root, ctx) {
                    out.push(cp);
                }
            }
            prev_t = t;
            prev_v = v;
        }
    }
    out
}

/// The analytic Hessian of phi at a critical point, in coordinates
/// (x1, x2, theta).
///
/// Along the segment, tan(gamma(x)/2) = e^x tan(theta/2) gives
/// d gamma / dx = sin(gamma), so the pure second derivatives are
/// +- sin^2(alpha); the mixed entries are kappa sin(beta1') and
/// -kappa e^h sin(beta2'); the theta-theta entry is kappa^2 (1 - e^{2h})/2.
/// The determinant collapses to det D = kappa^2 sin^4(alpha) (1 - e^{2h}) / 2,
/// nonzero exactly when the aperture h is nonzero.
pub fn hessian_analytic(cp: &CriticalPoint, ctx: &PhaseContext) -> ([[f64; 3]; 3], f64) {
    let alpha = ctx.alpha();
    let sa2 = alpha.sin().powi(2);
    let k = cp.kappa;
    let eh = cp.h.exp();
    let d = [
        [sa2, 0.0, k * cp.beta1.sin()],
        [0.0, -sa2, -k * eh * cp.beta2.sin()],
        [
            k * cp.beta1.sin(),
            -k * eh * cp.beta2.sin(),
            k * k * (1.0 - eh * eh) / 2.0,
        ],
    ];
    let det = 0.5 * k * k * alpha.sin().powi(4) * (1.0 - (2.0 * cp.h).exp());
    (d, det)
}

/// Analytic second derivative of the reduced phase at a critical point:
/// psi''(theta') = -kappa^2 (1 - e^{2h}) / 2 (from the Hessian by the chain
/// rule with xi_i' = -D_{i3}/D_{ii}); vanishes as h -> 0.
pub fn reduced_psi_d2_analytic(cp: &CriticalPoint) -> f64 {
    -0.5 * cp.kappa * cp.kappa * (1.0 - (2.0 * cp.h).exp())
}

/// Finite-difference Hessian of phi (5-point second derivatives, Richardson
/// on the mixed terms).
pub fn hessian_numeric(cp: &CriticalPoint, ctx: &PhaseContext) -> [[f64; 3]; 3] {
    let f = |v: [f64; 3]| phase_value(v[0], v[1], v[2], ctx);
    let x0 = [cp.x1, cp.x2, cp.theta];
    let h = 1e-3;
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        // five-point second derivative
        let mut xp = x0;
        let mut xm = x0;
        let mut xpp = x0;
        let mut xmm = x0;
        xp[i] += h;
        xm[i] -= h;
        xpp[i] += 2.0 * h;
        xmm[i] -= 2.0 * h;
        out[i][i] =
            (-f(xpp) + 16.0 * f(xp) - 30.0 * f(x0) + 16.0 * f(xm) - f(xmm)) / (12.0 * h * h);
        for j in (i + 1)..3 {
            let mixed = |step: f64| {
                let mut pp = x0;
                let mut pm = x0;
                let mut mp = x0;
                let mut mm = x0;
                pp[i] += step;
                pp[j] += step;
                pm[i] += step;
                pm[j] -= step;
                mp[i] -= step;
                mp[j] += step;
                mm[i] -= step;
                mm[j] -= step;
                (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step * step)
            };
            let c = (4.0 * mixed(h / 2.0) - mixed(h)) / 3.0;
            out[i][j] = c;
            out[j][i] = c;
        }
    }
    out
}

/// Finite-difference gradient of phi (central differences with one Richardson
/// step, so the floor is set by roundoff ~1e-12 rather than truncation).
pub fn gradient_numeric(x1: f64, x2: f64, theta: f64, ctx: &PhaseContext) -> [f64; 3] {
    let f = |v: [f64; 3]| phase_value(v[0], v[1], v[2], ctx);
    let x0 = [x1, x2, theta];
    let h = 1e-4;
    let mut g = [0.0; 3];
    for i in 0..3 {
        let central = |step: f64| {
            let mut xp = x0;
            let mut xm = x0;
            xp[i] += step;
            xm[i] -= step;
            (f(xp) - f(xm)) / (2.0 * step)
        };
        g[i] = (4.0 * central(h / 2.0) - central(h)) / 3.0;
    }
    g
}

/// Second derivative of the reduced phase by a 5-point stencil; at a critical
/// point this matches -(3/2) kappa^2 (1 - e^{2h}).
pub fn reduced_psi_d2(theta: f64, ctx: &PhaseContext) -> Result<f64, PhaseError> {
    let h = 1e-4;
    let f = |t: f64| reduced_psi(t, ctx);
    Ok(
        (-f(theta + 2.0 * h)? + 16.0 * f(theta + h)? - 30.0 * f(theta)? + 16.0 * f(theta - h)?
            - f(theta - 2.0 * h)?)
            / (12.0 * h * h),
    )
}

/// Third derivative of the reduced phase (central stencil).
pub fn reduced_psi_d3(theta: f64, ctx: &PhaseContext) -> Result<f64, PhaseError> {
    let h = 1e-3;
    let f = |t: f64| reduced_psi(t, ctx);
    Ok(
        (f(theta + 2.0 * h)? - 2.0 * f(theta + h)? + 2.0 * f(theta - h)? - f(theta - 2.0 * h)?)
            / (2.0 * h * h * h),
    )
}

/// Detects membership of (g, rho) in the degenerate sets: D1 when the oriented
/// geodesics coincide, D2+- when the complete geodesics cross at angle exactly
/// +-2 alpha, and the lambda = 0 doubled set A u k(pi) A.
pub fn classify_degeneracy(ctx: &PhaseContext, tol: f64) -> DegeneracyLabel {
    let id = GroupElement::identity();
    let aligned = n_align_frames(&id, &ctx.g) < tol;
    if ctx.rho == 0.0 {
        let reversed = n_align_frames(&GroupElement::k(PI), &ctx.g) < tol;
        if aligned || reversed {
            return DegeneracyLabel {
                class: DegeneracyClass::Lambda0Degenerate,
                witness: None,
            };
        }
        return DegeneracyLabel {
            class: DegeneracyClass::Nondegenerate,
            witness: None,
        };
    }
    if aligned {
        return DegeneracyLabel {
            class: DegeneracyClass::D1,
            witness: None,
        };
    }
    // crossing test on boundary endpoints
    let u = ctx.g.apply_boundary(Some(0.0));
    let v = ctx.g.apply_boundary(None);
    if let (Some(u), Some(v)) = (u, v) {
        if u * v < 0.0 {
            let y0 = (-u * v).sqrt();
            // oriented angle from the upward vertical to g l at i y0
            let c = 0.5 * (u + v);
            let phi0 = y0.atan2(-c);
            // tangent of the (u, v) semicircle at i y0, oriented u -> v
            let tangent = if u < v {
                num_complex::Complex64::new(0.0, -1.0) * num_complex::Complex64::from_polar(1.0, phi0)
            } else {
                num_complex::Complex64::new(0.0, 1.0) * num_complex::Complex64::from_polar(1.0, phi0)
            };
            let chi = tangent.arg() - PI / 2.0; // vertical tangent is +i
            let chi = (chi + PI).rem_euclid(2.0 * PI) - PI;
            let alpha = ctx.alpha();
            let witness_theta = |sign: f64| {
                // cot(theta/2) = -sign e^y cot(alpha/2)
                let w = -sign * y0 * (1.0 / (alpha / 2.0).tan());
                2.0 * 1.0f64.atan2(w)
            };
            if (chi - 2.0 * alpha).abs() < tol {
                return DegeneracyLabel {
                    class: DegeneracyClass::D2Plus,
                    witness: Some((y0.ln(), witness_theta(1.0))),
                };
            }
            if (chi + 2.0 * alpha).abs() < tol {
                return DegeneracyLabel {
                    class: DegeneracyClass::D2Minus,
                    witness: Some((y0.ln(), witness_theta(-1.0))),
                };
            }
        }
    }
    DegeneracyLabel {
        class: DegeneracyClass::Nondegenerate,
        witness: None,
    }
}

/// Report of the two uniformization extractions.
#[derive(Debug, Clone)]
pub struct UniformizationReport {
    /// min |xi(theta, x, y)| over the grid (lower bound sigma-hat)
    pub ann1_min_xi: f64,
    /// max |d xi / d y| over the grid
    pub ann1_max_dy: f64,
    /// max |d^2 xi / d y^2| over the grid
    pub ann1_max_dy2: f64,
    /// max |xi(y, 0)| on the second chart (should vanish)
    pub ann2_xi_at_zero: f64,
    /// min |d xi / d theta|: Jacobian of (y, theta) -> (y, xi) bounded below
    pub ann2_min_jacobian: f64,
}

/// Extracts xi(theta, x, y) = (1 - dA/dy)/theta^2 on the first chart and
/// xi(y, theta) = sign(theta) sqrt((y - A(k a))/y) on the second, verifying
/// the lower bounds that drive the non-stationary estimates.
pub fn uniformize_checks(
    theta_max: f64,
    box_half: f64,
    y_interval: (f64, f64),
) -> Result<UniformizationReport, PhaseError> {
    if theta_max > 0.5 {
        return Err(PhaseError::ChartExceeded(format!(
            "theta_max = {theta_max} beyond the small-angle chart"
        )));
    }
    // dA/dy along a(y) is cos of the K-angle (the A-derivative lemma)
    let xi1 = |theta: f64, x: f64, y: f64| {
        let ang = GroupElement::k(theta)
            .mul(&GroupElement::n(x))
            .mul(&GroupElement::a(y))
            .iwasawa_angle();
        (1.0 - ang.cos()) / (theta * theta)
    };
    let mut min_xi = f64::INFINITY;
    let mut max_dy: f64 = 0.0;
    let mut max_dy2: f64 = 0.0;
    let n = 10;
    for it in 0..=n {
        let theta = theta_max * (0.05 + 0.95 * it as f64 / n as f64);
        for ix in 0..=n {
            let x = -box_half + 2.0 * box_half * ix as f64 / n as f64;
            for iy in 0..=n {
                let y = -box_half + 2.0 * box_half * iy as f64 / n as f64;
                let v = xi1(theta, x, y);
                min_xi = min_xi.min(v.abs());
                let h = 1e-4;
                let d1 = (xi1(theta, x, y + h) - xi1(theta, x, y - h)) / (2.0 * h);
                let d2 = (xi1(theta, x, y + h) - 2.0 * v + xi1(theta, x, y - h)) / (h * h);
                max_dy = max_dy.max(d1.abs());
                max_dy2 = max_dy2.max(d2.abs());
            }
        }
    }
    // second chart
    let xi2 = |y: f64, theta: f64| {
        let a = GroupElement::k(theta).mul(&GroupElement::a(y)).height();
        theta.signum() * ((y - a) / y).max(0.0).sqrt()
    };
    let (y_lo, y_hi) = y_interval;
    let mut xi_at_zero: f64 = 0.0;
    let mut min_jac = f64::INFINITY;
    for iy in 0..=n {
        let y = y_lo + (y_hi - y_lo) * iy as f64 / n as f64;
        xi_at_zero = xi_at_zero.max(xi2(y, 0.0).abs());
        for it in 0..=n {
            let theta = theta_max * (-1.0 + 2.0 * it as f64 / n as f64);
            let h = 1e-5;
            let jac = (xi2(y, theta + h) - xi2(y, theta - h)) / (2.0 * h);
            min_jac = min_jac.min(jac.abs());
        }
    }
    Ok(UniformizationReport {
        ann1_min_xi: min_xi,
        ann1_max_dy: max_dy,
        ann1_max_dy2: max_dy2,
        ann2_xi_at_zero: xi_at_zero,
        ann2_min_jacobian: min_jac,
    })
}

/// The two-sided family g(eps) = a(y) k(2 alpha + eps) a(c) used to probe the
/// cubic degeneracy: at eps = 0 it sits exactly on D2+.
pub fn d2_family(y: f64, c: f64, alpha: f64, eps: f64) -> GroupElement {
    GroupElement::a(y)
        .mul(&GroupElement::k(2.0 * alpha + eps))
        .mul(&GroupElement::a(c))
}
