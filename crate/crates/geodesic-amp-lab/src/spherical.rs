//! Paley-Wiener spectral windows h, h_t, spherical functions phi_s, and the
//! inverse Harish-Chandra synthesis producing the radial kernels k_t and their
//! flat trace p_t(x) = k_t(a(x)).
//!
//! The concrete window is h(s) = c (sin(eps s)/(eps s))^{2M}: positive, even,
//! >= 1 on [-1,1] after normalization, with classical Fourier transform
//! supported in [-2M eps, 2M eps], so the kernel synthesized from h_t^p is
//! supported in a ball of radius 2pM eps.

use crate::geometry::GroupElement;
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SphericalError {
    #[error("window center must satisfy t > 10, got {0}")]
    CenterTooSmall(f64),
    #[error("window parameters invalid: eps = {0}, m = {1}")]
    BadWindowParams(f64, u32),
    #[error("oscillation budget exceeded: {0} quadrature nodes requested")]
    AccuracyNotReached(usize),
    #[error("radial argument out of configured range: r = {0}")]
    OutOfRange(f64),
    #[error("asymptotic fit is degenerate: {0}")]
    FitDegenerate(String),
}

/// Shape parameters of h(s) = c (sin(eps s)/(eps s))^{2M}.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WindowParams {
    /// support scale; classical FT of h is supported in [-2M eps, 2M eps]
    pub eps: f64,
    /// half the even power 2M
    pub m: u32,
}

impl WindowParams {
    /// Default used for frequency-window work: FT support radius 2M eps just
    /// under 1, which maximizes sideband suppression.
    pub fn period_default() -> Self {
        WindowParams { eps: 0.027, m: 18 }
    }

    /// Preset for kernel synthesis with transform power 2: the synthesized
    /// k_t is then supported in radius 4M eps = 0.48 < 1.
    pub fn compact_kernel() -> Self {
        WindowParams { eps: 0.02, m: 6 }
    }
}

impl Default for WindowParams {
    fn default() -> Self {
        WindowParams::period_default()
    }
}

/// The two-sided Paley-Wiener window h_t(s) = h(s - t) + h(-s - t).
#[derive(Debug, Clone, Copy)]
pub struct SpectralWindow {
    pub t: f64,
    pub params: WindowParams,
    /// normalization making min h = 1 on [-1, 1]
    norm: f64,
}

/// Builds h_t around center t > 10.
pub fn two_sided_window(t: f64, params: WindowParams) -> Result<SpectralWindow, SphericalError> {
    if t <= 10.0 {
        return Err(SphericalError::CenterTooSmall(t));
    }
    if !(params.eps > 0.0) || params.m < 2 || params.eps >= PI {
        return Err(SphericalError::BadWindowParams(params.eps, params.m));
    }
    let sinc1 = params.eps.sin() / params.eps;
    let norm = sinc1.powi(-2 * params.m as i32);
    Ok(SpectralWindow { t, params, norm })
}

impl SpectralWindow {
    /// h(s) itself (centered at 0).
    pub fn base(&self, s: f64) -> f64 {
        let u = self.params.eps * s;
        let sinc = if u.abs() < 1e-8 {
            1.0 - u * u / 6.0
        } else {
            u.sin() / u
        };
        self.norm * sinc.powi(2 * self.params.m as i32)
    }

    /// h_t(s) = h(s - t) + h(-s - t); even in s.
    pub fn eval(&self, s: f64) -> f64 {
        self.base(s - self.t) + self.base(-s - self.t)
    }

    /// Support radius of the classical Fourier transform of h.
    pub fn ft_support_radius(&self) -> f64 {
        2.0 * self.params.m as f64 * self.params.eps
    }

    /// Support radius of the kernel synthesized from h_t^power.
    pub fn kernel_support_radius(&self, power: u32) -> f64 {
        power as f64 * self.ft_support_radius()
    }

    /// Spectral truncation half width W with envelope tail bound
    /// (eps W)^(-2 M power) <= tol; logged with each synthesis.
    pub fn truncation_half_width(&self, power: u32, tol: f64) -> f64 {
        let exponent = 2.0 * self.params.m as f64 * power as f64;
        tol.powf(-1.0 / exponent) / self.params.eps
    }
}

/// Plancherel density s tanh(pi s) of the inversion formula.
pub fn plancherel_density(s: f64) -> f64 {
    s * (PI * s).tanh()
}

const MAX_PHI_NODES: usize = 40_000_000;

/// Spherical function phi_s(a(r)) by the plane-wave integral
/// (1/2pi) int exp((1/2 - is) A(k(theta) a(r))) dtheta, with
/// A(k(theta)a(r)) = -log(cosh r - sinh r cos theta).
///
/// Returns the complex trapezoid value; the exact function is real, so the
/// imaginary part measures quadrature error.
pub fn spherical_phi_complex(s: f64, r: f64) -> Result<Complex64, SphericalError> {
    if !(0.0..=10.0).contains(&r) {
        return Err(SphericalError::OutOfRange(r));
    }
    let nodes = 192 + (14.0 * s.abs() * r.sinh()).ceil() as usize;
    if nodes > MAX_PHI_NODES {
        return Err(SphericalError::AccuracyNotReached(nodes));
    }
    let cr = r.cosh();
    let sr = r.sinh();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..nodes {
        let theta = 2.0 * PI * j as f64 / nodes as f64;
        let l = (cr - sr * theta.cos()).ln();
        // exp((1/2 - is)(-l)) = e^{-l/2} e^{isl}
        let (im, re) = (s * l).sin_cos();
        acc += Complex64::new(re, im) * (-l / 2.0).exp();
    }
    Ok(acc / nodes as f64)
}

/// Real value of phi_s(a(r)).
pub fn spherical_phi(s: f64, r: f64) -> Result<f64, SphericalError> {
    spherical_phi_complex(s, r).map(|z| z.re)
}

/// Independent conical-function oracle by the Mehler-Dirichlet integral
/// P_{-1/2 + is}(cosh r) = (2/pi) int_0^r cos(s u) / sqrt(2 cosh r - 2 cosh u) du,
/// with the endpoint singularity removed by u = r - w^2 and quadrature by
/// phase-adaptive Gauss-Legendre panels.
pub fn mehler_conical(s: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    let w_max = r.sqrt();
    // integrand F(w) = 2 cos(s (r - w^2)) / sqrt(rho(w)),
    // rho(w) = (2 cosh r - 2 cosh(r - w^2)) / w^2 = 4 sinh(r - w^2/2) sinh(w^2/2) / w^2
    let f = |w: f64| {
        let q = w * w;
        let sh_half = if q < 1e-8 {
            0.5 * (1.0 + q * q / 24.0)
        } else {
            (q / 2.0).sinh() / q
        };
        let rho = 4.0 * (r - q / 2.0).sinh() * sh_half;
        2.0 * (s * (r - q)).cos() / rho.sqrt()
    };
    let panels = 8 + (s.abs() * r / (0.5 * PI)).ceil() as usize;
    let mut total = 0.0;
    for p in 0..panels {
        let a = w_max * p as f64 / panels as f64;
        let b = w_max * (p + 1) as f64 / panels as f64;
        total += gauss16(a, b, &f);
    }
    total * 2.0 / PI
}

const GL16_X: [f64; 8] = [
    0.09501250983763744,
    0.28160355077925891,
    0.45801677765722739,
    0.61787624440264375,
    0.75540440835500303,
    0.86563120238783174,
    0.94457502307323258,
    0.98940093499164993,
];
const GL16_W: [f64; 8] = [
    0.18945061045506850,
    0.18260341504492359,
    0.16915651939500254,
    0.14959598881657673,
    0.12462897125553387,
    0.09515851168249278,
    0.06225352393864789,
    0.02715245941175409,
];

/// 16-point Gauss-Legendre rule on [a, b].
pub(crate) fn gauss16(a: f64, b: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..8 {
        acc += GL16_W[i] * (f(c + h * GL16_X[i]) + f(c - h * GL16_X[i]));
    }
    acc * h
}

/// Gauss-Legendre nodes and weights over `panels` equal panels of [lo, hi].
pub(crate) fn gl16_points(lo: f64, hi: f64, panels: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(panels * 16);
    for p in 0..panels {
        let a = lo + (hi - lo) * p as f64 / panels as f64;
        let b = lo + (hi - lo) * (p + 1) as f64 / panels as f64;
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        for i in 0..8 {
            out.push((c - h * GL16_X[i], h * GL16_W[i]));
            out.push((c + h * GL16_X[i], h * GL16_W[i]));
        }
    }
    out
}

pub(crate) fn gauss16_complex(a: f64, b: f64, f: &dyn Fn(f64) -> Complex64) -> Complex64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..8 {
        acc += (f(c + h * GL16_X[i]) + f(c - h * GL16_X[i])) * GL16_W[i];
    }
    acc * h
}

/// k_t(a(x)) = (1/2pi) int phi_s(a(x)) h_t^power(s) s tanh(pi s) ds over the
/// truncated window [t - W, t + W], by plane-wave evaluation of phi_s.
///
/// Returns (value, logged tail bound).
pub fn synthesize_kernel(
    window: &SpectralWindow,
    power: u32,
    x: f64,
    tol: f64,
) -> Result<(f64, f64), SphericalError> {
    if x.abs() > 2.0 {
        return Err(SphericalError::OutOfRange(x));
    }
    let x = x.abs();
    let w = window.truncation_half_width(power, tol);
    let lo = (window.t - w).max(0.0);
    let hi = window.t + w;
    let tail = tol * plancherel_density(hi) * hi;
    let integrand = |s: f64| -> f64 {
        match spherical_phi(s, x) {
            Ok(phi) => window.eval(s).powi(power as i32) * plancherel_density(s) * phi,
            Err(_) => f64::NAN,
        }
    };
    let rate = x + 0.25;
    let panels = ((hi - lo) * rate / (0.5 * PI)).ceil() as usize + 16;
    let mut acc = 0.0;
    for p in 0..panels {
        let a = lo + (hi - lo) * p as f64 / panels as f64;
        let b = lo + (hi - lo) * (p + 1) as f64 / panels as f64;
        acc += gauss16(a, b, &integrand);
    }
    if acc.is_nan() {
        return Err(SphericalError::AccuracyNotReached(panels * 16));
    }
    Ok((acc / (2.0 * PI), tail))
}

/// Radial kernel samples with the normalized trace column
/// |p_t(x)| (1 + t|x|)^{1/2} / t.
#[derive(Debug, Clone)]
pub struct KernelProfile {
    pub t: f64,
    pub power: u32,
    pub xs: Vec<f64>,
    pub kt: Vec<f64>,
    pub normalized: Vec<f64>,
    pub tail_bound: f64,
}

/// Fast dense synthesis of p_t on a grid: the spectral integral is swapped
/// inside the plane-wave integral, so the s-integration is done once as
/// G(u) = int h_t^p(s) s tanh(pi s) e^{isu} ds on a u-grid and each x costs a
/// single theta-quadrature of e^{-L/2} G(L(theta, x)).
pub struct DenseKernel {
    t: f64,
    u_step: f64,
    /// slowly varying envelope E(u) = G(u) e^{-itu}; the carrier e^{itu} is
    /// restored exactly at evaluation time
    e_re: Vec<f64>,
    e_im: Vec<f64>,
    pub tail_bound: f64,
}

impl DenseKernel {
    pub fn build(window: &SpectralWindow, power: u32, tol: f64) -> DenseKernel {
        let w = window.truncation_half_width(power, tol);
        let t = window.t;
        let lo = (t - w).max(0.0);
        let hi = t + w;
        let u_max = 2.2f64;
        // E varies at rate <= max(|lo - t|, |hi - t|); resolve with margin
        let rate_env = (hi - t).max(t - lo).max(20.0);
        let u_step = PI / (48.0 * rate_env);
        let n_u = (u_max / u_step).ceil() as usize + 4;
        let mut e_re = Vec::with_capacity(n_u);
        let mut e_im = Vec::with_capacity(n_u);
        for i in 0..n_u {
            let u = i as f64 * u_step;
            let f = |s: f64| -> Complex64 {
                let env = window.eval(s).powi(power as i32) * plancherel_density(s);
                let (im, re) = ((s - t) * u).sin_cos();
                Complex64::new(re * env, im * env)
            };
            let rate = u + 0.3;
            let panels = ((hi - lo) * rate / (0.5 * PI)).ceil() as usize + 8;
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..panels {
                let a = lo + (hi - lo) * p as f64 / panels as f64;
                let b = lo + (hi - lo) * (p + 1) as f64 / panels as f64;
                acc += gauss16_complex(a, b, &f);
            }
            e_re.push(acc.re);
            e_im.push(acc.im);
        }
        let tail_bound = tol * plancherel_density(hi) * hi;
        DenseKernel {
            t,
            u_step,
            e_re,
            e_im,
            tail_bound,
        }
    }

    fn g_interp(&self, u: f64) -> Complex64 {
        let sign = if u < 0.0 { -1.0 } else { 1.0 };
        let u = u.abs();
        let pos = u / self.u_step;
        let i = (pos.floor() as usize).clamp(1, self.e_re.len() - 3);
        let f = pos - i as f64;
        let w0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
        let w1 = (f * f - 1.0) * (f - 2.0) / 2.0;
        let w2 = -f * (f + 1.0) * (f - 2.0) / 2.0;
        let w3 = f * (f * f - 1.0) / 6.0;
        let re = w0 * self.e_re[i - 1] + w1 * self.e_re[i] + w2 * self.e_re[i + 1] + w3 * self.e_re[i + 2];
        let im = w0 * self.e_im[i - 1] + w1 * self.e_im[i] + w2 * self.e_im[i + 1] + w3 * self.e_im[i + 2];
        let env = Complex64::new(re, sign * im);
        let (cim, cre) = (self.t * u * sign).sin_cos();
        env * Complex64::new(cre, cim)
    }

    /// p_t(x) for |x| <= 2.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        let cr = x.cosh();
        let sr = x.sinh();
        let nodes = 128 + (10.0 * self.t * x).ceil() as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..nodes {
            let theta = 2.0 * PI * j as f64 / nodes as f64;
            let l = (cr - sr * theta.cos()).ln();
            acc += self.g_interp(l) * (-l / 2.0).exp();
        }
        acc.re / nodes as f64 / (2.0 * PI)
    }
}

/// Kernel profile over an x-grid via the dense route.
pub fn kernel_profile(window: &SpectralWindow, power: u32, xs: &[f64], tol: f64) -> KernelProfile {
    let dense = DenseKernel::build(window, power, tol);
    let t = window.t;
    let kt: Vec<f64> = xs.iter().map(|&x| dense.eval(x)).collect();
    let normalized = xs
        .iter()
        .zip(kt.iter())
        .map(|(&x, &k)| k.abs() * (1.0 + t * x.abs()).sqrt() / t)
        .collect();
    KernelProfile {
        t,
        power,
        xs: xs.to_vec(),
        kt,
        normalized,
        tail_bound: dense.tail_bound,
    }
}

/// Forward spherical (Harish-Chandra) transform of a radial kernel:
/// f^(s) = 2 pi int_0^R f(r) phi_s(a(r)) sinh r dr.
/// Dual to the inversion with density s tanh(pi s)/(2 pi).
pub fn forward_spherical_transform(f: &dyn Fn(f64) -> f64, support_radius: f64, s: f64) -> f64 {
    let rate = s + 2.0;
    let panels = (support_radius * rate / (0.5 * PI)).ceil() as usize + 8;
    let table = SphericalTable::build(s, support_radius + 0.05);
    let integrand = |r: f64| f(r) * table.eval(r) * r.sinh();
    let mut acc = 0.0;
    for p in 0..panels {
        let a = support_radius * p as f64 / panels as f64;
        let b = support_radius * (p + 1) as f64 / panels as f64;
        acc += gauss16(a, b, &integrand);
    }
    2.0 * PI * acc
}

/// Least-squares decomposition of phi_s(a(x)) into the two half-waves
/// c1(x) e^{isx} (sx)^{-1/2} + c2(x) e^{-isx} (sx)^{-1/2} across an s-sweep.
#[derive(Debug, Clone)]
pub struct AsymptoticFit {
    pub x: f64,
    /// complex amplitude of the e^{isx} branch; the conjugate branch has
    /// c2 = conj(c1) because phi is real
    pub c1: Complex64,
    /// rms of phi - fit over the sweep
    pub residual_rms: f64,
    /// max of |phi - fit| (s x)^{3/2} over the sweep
    pub scaled_residual_max: f64,
}

/// Fits the plane-wave asymptotics at fixed x across the given s-values.
pub fn asymptotic_decompose(x: f64, s_values: &[f64]) -> Result<AsymptoticFit, SphericalError> {
    if !(0.1..=2.0).contains(&x) {
        return Err(SphericalError::OutOfRange(x));
    }
    if s_values.len() < 4 {
        return Err(SphericalError::FitDegenerate("need >= 4 samples".into()));
    }
    // phi(s) (sx)^{1/2} = 2a cos(sx) - 2b sin(sx) + O((sx)^{-1}), c1 = a + ib
    let mut m00 = 0.0;
    let mut m01 = 0.0;
    let mut m11 = 0.0;
    let mut r0 = 0.0;
    let mut r1 = 0.0;
    let mut samples = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let phi = spherical_phi(s, x)?;
        let y = phi * (s * x).sqrt();
        let (sn, cs) = (s * x).sin_cos();
        let (f0, f1) = (2.0 * cs, -2.0 * sn);
        m00 += f0 * f0;
        m01 += f0 * f1;
        m11 += f1 * f1;
        r0 += f0 * y;
        r1 += f1 * y;
        samples.push((s, phi));
    }
    let det = m00 * m11 - m01 * m01;
    if det.abs() < 1e-10 * (m00 * m11).max(1.0) {
        return Err(SphericalError::FitDegenerate(format!(
            "normal equations nearly singular, det = {det:e}"
        )));
    }
    let a = (r0 * m11 - r1 * m01) / det;
    let b = (m00 * r1 - m01 * r0) / det;
    let mut ss = 0.0;
    let mut scaled_max: f64 = 0.0;
    for &(s, phi) in &samples {
        let (sn, cs) = (s * x).sin_cos();
        let fit = (2.0 * a * cs - 2.0 * b * sn) / (s * x).sqrt();
        let resid = phi - fit;
        ss += resid * resid;
        scaled_max = scaled_max.max(resid.abs() * (s * x).powf(1.5));
    }
    Ok(AsymptoticFit {
        x,
        c1: Complex64::new(a, b),
        residual_rms: (ss / samples.len() as f64).sqrt(),
        scaled_residual_max: scaled_max,
    })
}

/// Tabulated point-pair spherical function Phi_s(d) = phi_s at distance d,
/// built by integrating the radial ODE in Liouville normal form
/// u'' + (s^2 + csch^2(d)/4) u = 0, u = Phi sqrt(sinh d), with an exponential
/// midpoint stepper; bootstrapped near d = 0 by the Mehler integral.
pub struct SphericalTable {
    pub s: f64,
    d_boot: f64,
    step: f64,
    /// Phi on the uniform grid d = d_boot + k * step
    vals: Vec<f64>,
    /// fine Mehler grid on [0, d_boot]
    boot_step: f64,
    boot_vals: Vec<f64>,
}

impl SphericalTable {
    pub fn build(s: f64, d_max: f64) -> SphericalTable {
        let s_eff = s.abs().max(5.0);
        let d_boot = 0.1f64.min(d_max * 0.5);
        let boot_step = (PI / (64.0 * s_eff)).min(2e-3);
        let n_boot = (d_boot / boot_step).ceil() as usize + 3;
        let mut boot_vals = Vec::with_capacity(n_boot);
        for i in 0..n_boot {
            boot_vals.push(mehler_conical(s, i as f64 * boot_step));
        }
        let step = (PI / (64.0 * s_eff)).min(2e-3);
        let n = ((d_max - d_boot) / step).ceil() as usize + 3;
        let q = |d: f64| {
            let csch = 1.0 / d.sinh();
            s * s + 0.25 * csch * csch
        };
        // bootstrap u and u' at d_boot from two Mehler values
        let phi0 = mehler_conical(s, d_boot);
        let h0 = step / 2.0;
        let phi1 = mehler_conical(s, d_boot + h0);
        let u0 = phi0 * d_boot.sinh().sqrt();
        let u1 = phi1 * (d_boot + h0).sinh().sqrt();
        let om = q(d_boot + h0 / 2.0).sqrt();
        let (sn, cs) = (om * h0).sin_cos();
        let mut u = u0;
        let mut up = (u1 - cs * u0) * om / sn;
        let mut vals = Vec::with_capacity(n);
        vals.push(phi0);
        let sub = 2usize;
        let hs = step / sub as f64;
        let mut d = d_boot;
        for _ in 1..n {
            for _ in 0..sub {
                let om = q(d + hs / 2.0).sqrt();
                let (sn, cs) = (om * hs).sin_cos();
                let nu = cs * u + sn / om * up;
                let nup = -om * sn * u + cs * up;
                u = nu;
                up = nup;
                d += hs;
            }
            vals.push(u / d.sinh().sqrt());
        }
        SphericalTable {
            s,
            d_boot,
            step,
            vals,
            boot_step,
            boot_vals,
        }
    }

    /// Phi_s at distance d >= 0 (4-point Lagrange on the uniform grids).
    pub fn eval(&self, d: f64) -> f64 {
        let d = d.abs();
        let (grid, step, offset) = if d < self.d_boot {
            (&self.boot_vals, self.boot_step, 0.0)
        } else {
            (&self.vals, self.step, self.d_boot)
        };
        let pos = (d - offset) / step;
        let n = grid.len();
        let i = (pos.floor() as usize).clamp(1, n - 3);
        let f = pos - i as f64;
        let w0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
        let w1 = (f * f - 1.0) * (f - 2.0) / 2.0;
        let w2 = -f * (f + 1.0) * (f - 2.0) / 2.0;
        let w3 = f * (f * f - 1.0) / 6.0;
        w0 * grid[i - 1] + w1 * grid[i] + w2 * grid[i + 1] + w3 * grid[i + 2]
    }

    /// Point-pair value at two points of the upper half plane.
    pub fn point_pair(&self, p: Complex64, q: Complex64) -> f64 {
        self.eval(crate::geometry::dist_points(p, q))
    }
}

/// phi_s at the distance from g.i to i, via the plane-wave integral; used for
/// cross checks of the table.
pub fn spherical_phi_group(s: f64, g: &GroupElement) -> Result<f64, SphericalError> {
    let d = crate::geometry::dist_points(g.base_point(), Complex64::new(0.0, 1.0));
    spherical_phi(s, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_at_origin_is_one() {
        for s in [1.0, 10.0, 100.0] {
            let v = spherical_phi_complex(s, 0.0).unwrap();
            assert!((v.re - 1.0).abs() < 1e-12);
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn phi_is_real_for_real_spectral_parameter() {
        for (s, r) in [(5.0, 0.5), (20.0, 1.7), (50.0, 3.0), (12.0, 0.05)] {
            let v = spherical_phi_complex(s, r).unwrap();
            assert!(v.im.abs() < 1e-10, "s={s} r={r}: im = {:e}", v.im);
        }
    }

    #[test]
    fn phi_matches_mehler_oracle() {
        for s in [5.0, 20.0, 50.0] {
            for r in [0.1, 0.4, 1.0, 1.9, 3.0] {
                let plane = spherical_phi(s, r).unwrap();
                let mehler = mehler_conical(s, r);
                assert!(
                    (plane - mehler).abs() < 1e-8,
                    "s={s} r={r}: plane {plane:e} vs mehler {mehler:e}"
                );
            }
        }
    }

    #[test]
    fn window_normalization_and_symmetry() {
        let w = two_sided_window(200.0, WindowParams::period_default()).unwrap();
        for i in 0..=40 {
            let s = -1.0 + i as f64 / 20.0;
            assert!(w.base(s) >= 1.0 - 1e-12, "h({s}) = {}", w.base(s));
        }
        assert!(w.eval(w.t) >= 1.0);
        for s in [0.0, 3.0, 57.0, 199.0, 321.0] {
            assert!((w.eval(s) - w.eval(-s)).abs() < 1e-14);
        }
        assert!(two_sided_window(5.0, WindowParams::default()).is_err());
    }

    #[test]
    fn window_decay_beyond_half_center() {
        let t = 200.0;
        let w = two_sided_window(t, WindowParams::period_default()).unwrap();
        let peak = w.eval(t);
        let mut worst: f64 = 0.0;
        let mut s = t + t / 2.0;
        while s < 8.0 * t {
            worst = worst.max(w.eval(s) / peak);
            s += 0.37;
        }
        let mut s = 0.0;
        while s < t / 2.0 {
            worst = worst.max(w.eval(s) / peak);
            s += 0.37;
        }
        assert!(worst < 1e-10, "relative sideband level {worst:e}");
    }

    #[test]
    fn classical_ft_of_h_is_compactly_supported() {
        let w = two_sided_window(100.0, WindowParams::compact_kernel()).unwrap();
        let radius = w.ft_support_radius();
        let ft = |xi: f64| {
            let f = |s: f64| w.base(s) * (xi * s).cos();
            let mut acc = 0.0;
            let lim = 60.0 / w.params.eps;
            let panels = 4000;
            for p in 0..panels {
                let a = -lim + 2.0 * lim * p as f64 / panels as f64;
                let b = -lim + 2.0 * lim * (p + 1) as f64 / panels as f64;
                acc += gauss16(a, b, &f);
            }
            acc
        };
        let inside = ft(0.0);
        for xi in [radius * 1.1, radius * 1.5, radius * 2.0] {
            assert!(
                ft(xi).abs() < 2e-5 * inside.abs(),
                "FT at {xi} not small: {:e} vs {:e}",
                ft(xi),
                inside
            );
        }
    }

    #[test]
    fn spherical_table_matches_mehler() {
        for s in [40.0, 150.0, 500.0] {
            let table = SphericalTable::build(s, 2.5);
            for d in [0.03, 0.09, 0.2, 0.7, 1.3, 2.2] {
                let t = table.eval(d);
                let m = mehler_conical(s, d);
                assert!(
                    (t - m).abs() < 3e-7,
                    "s={s} d={d}: table {t:e} vs mehler {m:e}"
                );
            }
        }
    }

    #[test]
    fn dense_kernel_matches_direct_synthesis() {
        let w = two_sided_window(60.0, WindowParams::compact_kernel()).unwrap();
        let dense = DenseKernel::build(&w, 2, 1e-8);
        for x in [0.0, 0.05, 0.21, 0.4] {
            let (direct, _) = synthesize_kernel(&w, 2, x, 1e-8).unwrap();
            let fast = dense.eval(x);
            let scale = dense.eval(0.0).abs();
            assert!(
                (direct - fast).abs() < 1e-6 * scale,
                "x = {x}: direct {direct:e} vs dense {fast:e}"
            );
        }
    }

    #[test]
    fn kernel_is_even_and_compactly_supported() {
        let w = two_sided_window(60.0, WindowParams::compact_kernel()).unwrap();
        let dense = DenseKernel::build(&w, 2, 1e-9);
        assert!((dense.eval(0.3) - dense.eval(-0.3)).abs() < 1e-9 * dense.eval(0.0).abs());
        let peak = dense.eval(0.0).abs();
        assert!(dense.eval(1.5).abs() < 1e-6 * peak);
        let (direct, _) = synthesize_kernel(&w, 2, 1.5, 1e-9).unwrap();
        assert!(direct.abs() < 1e-6 * peak);
    }

    #[test]
    fn plancherel_round_trip_recovers_window() {
        // forward transform of the synthesized kernel reproduces h_t^2
        let w = two_sided_window(60.0, WindowParams::compact_kernel()).unwrap();
        let dense = DenseKernel::build(&w, 2, 1e-9);
        let radius = w.kernel_support_radius(2) + 0.1;
        for s in [55.0, 58.0, 60.0, 62.0, 66.0] {
            let recovered = forward_spherical_transform(&|r| dense.eval(r), radius, s);
            let expected = w.eval(s).powi(2);
            assert!(
                (recovered - expected).abs() < 1e-6 * w.eval(w.t).powi(2),
                "s = {s}: forward {recovered:e} vs h_t^2 {expected:e}"
            );
        }
    }

    #[test]
    fn asymptotic_fit_has_stable_amplitude_and_good_residual() {
        let s_values: Vec<f64> = (0..24).map(|i| 50.0 + 6.5 * i as f64).collect();
        let fit = asymptotic_decompose(1.0, &s_values).unwrap();
        assert!(
            fit.scaled_residual_max < 1.0,
            "scaled residual {}",
            fit.scaled_residual_max
        );
        let hi: Vec<f64> = (0..24).map(|i| 120.0 + 8.0 * i as f64).collect();
        let fit2 = asymptotic_decompose(1.0, &hi).unwrap();
        assert!(
            (fit.c1.norm() - fit2.c1.norm()).abs() < 1e-3 * fit.c1.norm(),
            "|c1| unstable: {} vs {}",
            fit.c1.norm(),
            fit2.c1.norm()
        );
    }
}
