//! Exact arithmetic in a rational quaternion algebra A = (a,b/Q), its order R,
//! the real matrix embedding, and enumeration of norm-m elements and Hecke
//! coset representatives of R(1)\R(m).
//!
//! Elements are written over the basis 1, w, W, wW with w^2 = a, W^2 = b and
//! wW = -Ww.  Products are computed through the split form x = xi + eta*W with
//! xi, eta in Q(sqrt a), so that N(x) = xi*conj(xi) - b*eta*conj(eta) is the
//! quadratic form x0^2 - a*x1^2 - b*x2^2 + ab*x3^2.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

/// Errors from algebra/order validation and enumeration.
#[derive(Debug, Error)]
pub enum QuatError {
    #[error("algebra parameter {0} = {1} is not squarefree")]
    NotSquarefree(&'static str, i64),
    #[error("a must be positive, got {0}")]
    NonPositiveA(i64),
    #[error("b must be nonzero")]
    ZeroB,
    #[error("(a,b) = ({0},{1}) is split at every place; not a division algebra")]
    NotDivision(i64, i64),
    #[error("operands belong to different algebras")]
    AlgebraMismatch,
    #[error("order basis is not a lattice basis (degenerate)")]
    DegenerateBasis,
    #[error("order does not contain 1")]
    MissingIdentity,
    #[error("order is not closed under multiplication: e{0}*e{1} is outside the lattice")]
    NotClosed(usize, usize),
    #[error("norm or trace of basis element {0} is not an integer")]
    NonIntegral(usize),
    #[error("level q must be positive")]
    InvalidLevel,
    #[error("requires (m, q) = 1, got m = {0}, q = {1}")]
    LevelNotCoprime(u64, u64),
    #[error("enumeration budget exceeded: coefficient box holds ~{0:.3e} points (budget {1:.3e})")]
    BudgetExceeded(f64, f64),
    #[error("incomplete enumeration: found {found} of {expected} cosets for m = {m} at entry bound {bound}")]
    IncompleteEnumeration {
        m: u64,
        found: usize,
        expected: u64,
        bound: f64,
    },
}

/// The defining data of A = (a,b/Q): a, b squarefree, a > 0, and A a division
/// algebra (verified by Hilbert symbols at 2, the odd primes dividing ab, and
/// infinity).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgebraSpec {
    a: i64,
    b: i64,
}

fn is_squarefree(n: i64) -> bool {
    let mut n = n.unsigned_abs();
    if n == 0 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        while n % p == 0 {
            n /= p;
        }
        p += 1;
    }
    true
}

fn legendre_symbol(mut u: i64, p: u64) -> i64 {
    let pi = p as i64;
    u = u.rem_euclid(pi);
    if u == 0 {
        return 0;
    }
    // u^((p-1)/2) mod p
    let mut result: i64 = 1;
    let mut base = u % pi;
    let mut exp = (p - 1) / 2;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % pi;
        }
        base = base * base % pi;
        exp >>= 1;
    }
    if result == pi - 1 {
        -1
    } else {
        result
    }
}

/// Hilbert symbol (a,b)_p for a finite prime p (both a, b squarefree).
pub fn hilbert_symbol(a: i64, b: i64, p: u64) -> i64 {
    let split = |mut n: i64| {
        let mut alpha = 0u32;
        while n % (p as i64) == 0 {
            n /= p as i64;
            alpha += 1;
        }
        (alpha, n)
    };
    let (alpha, u) = split(a);
    let (beta, v) = split(b);
    if p == 2 {
        let eps = |x: i64| ((x.rem_euclid(8) - 1) / 2) % 2; // (x-1)/2 mod 2 for odd x
        let omega = |x: i64| {
            let r = x.rem_euclid(8);
            usize::from(r == 3 || r == 5) as i64 // (x^2-1)/8 mod 2
        };
        let e = eps(u) * eps(v) + alpha as i64 * omega(v) + beta as i64 * omega(u);
        if e % 2 == 0 {
            1
        } else {
            -1
        }
    } else {
        let mut s = 1i64;
        if (alpha * beta) % 2 == 1 && (p - 1) / 2 % 2 == 1 {
            s = -s;
        }
        if beta % 2 == 1 {
            s *= legendre_symbol(u, p);
        }
        if alpha % 2 == 1 {
            s *= legendre_symbol(v, p);
        }
        s
    }
}

impl AlgebraSpec {
    /// Validates squarefreeness, positivity of a, and that the algebra is
    /// division (ramified at some place).
    pub fn new(a: i64, b: i64) -> Result<Self, QuatError> {
        if a <= 0 {
            return Err(QuatError::NonPositiveA(a));
        }
        if b == 0 {
            return Err(QuatError::ZeroB);
        }
        if !is_squarefree(a) {
            return Err(QuatError::NotSquarefree("a", a));
        }
        if !is_squarefree(b) {
            return Err(QuatError::NotSquarefree("b", b));
        }
        let spec = AlgebraSpec { a, b };
        if spec.ramified_primes().is_empty() {
            // a > 0 means the infinite place is always split.
            return Err(QuatError::NotDivision(a, b));
        }
        Ok(spec)
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    /// Finite primes at which the algebra ramifies.
    pub fn ramified_primes(&self) -> Vec<u64> {
        let mut candidates = vec![2u64];
        let mut n = (self.a * self.b).unsigned_abs();
        while n % 2 == 0 {
            n /= 2;
        }
        let mut p = 3u64;
        while p * p <= n {
            if n % p == 0 {
                candidates.push(p);
                while n % p == 0 {
                    n /= p;
                }
            }
            p += 2;
        }
        if n > 1 {
            candidates.push(n);
        }
        candidates.sort_unstable();
        candidates.dedup();
        candidates
            .into_iter()
            .filter(|&p| hilbert_symbol(self.a, self.b, p) == -1)
            .collect()
    }

    /// Element from rational coordinates over the basis 1, w, W, wW.
    pub fn element(&self, coords: [BigRational; 4]) -> QuatElement {
        QuatElement {
            algebra: *self,
            x: coords,
        }
    }

    pub fn element_from_i64(&self, coords: [i64; 4]) -> QuatElement {
        self.element(coords.map(|c| BigRational::from_integer(BigInt::from(c))))
    }

    pub fn one(&self) -> QuatElement {
        self.element_from_i64([1, 0, 0, 0])
    }
}

/// An element of A over the basis 1, w, W, wW, with exact rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuatElement {
    algebra: AlgebraSpec,
    x: [BigRational; 4],
}

impl fmt::Display for QuatElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} + {} w + {} W + {} wW",
            self.x[0], self.x[1], self.x[2], self.x[3]
        )
    }
}

impl QuatElement {
    pub fn algebra(&self) -> AlgebraSpec {
        self.algebra
    }

    pub fn coords(&self) -> &[BigRational; 4] {
        &self.x
    }

    pub fn is_zero(&self) -> bool {
        self.x.iter().all(|c| c.is_zero())
    }

    /// Quaternion product through the split form (xi1 + eta1 W)(xi2 + eta2 W)
    /// = (xi1 xi2 + b eta1 conj(eta2)) + (xi1 eta2 + eta1 conj(xi2)) W.
    pub fn mul(&self, rhs: &QuatElement) -> Result<QuatElement, QuatError> {
        if self.algebra != rhs.algebra {
            return Err(QuatError::AlgebraMismatch);
        }
        let a = BigInt::from(self.algebra.a);
        let b = BigInt::from(self.algebra.b);
        // xi = (x0, x1), eta = (x2, x3) as p + q*sqrt(a)
        let qmul = |p1: &BigRational, q1: &BigRational, p2: &BigRational, q2: &BigRational| {
            (p1 * p2 + q1 * q2 * &a, p1 * q2 + q1 * p2)
        };
        let (x0, x1, x2, x3) = (&self.x[0], &self.x[1], &self.x[2], &self.x[3]);
        let (y0, y1, y2, y3) = (&rhs.x[0], &rhs.x[1], &rhs.x[2], &rhs.x[3]);
        let (p_xx, q_xx) = qmul(x0, x1, y0, y1);
        let (p_ee, q_ee) = qmul(x2, x3, y2, &-y3); // eta1 * conj(eta2)
        let (p_xe, q_xe) = qmul(x0, x1, y2, y3);
        let (p_ex, q_ex) = qmul(x2, x3, y0, &-y1); // eta1 * conj(xi2)
        Ok(self.algebra.element([
            p_xx + p_ee * &b,
            q_xx + q_ee * &b,
            p_xe + p_ex,
            q_xe + q_ex,
        ]))
    }

    /// Quaternion conjugate: x0 - x1 w - x2 W - x3 wW.
    pub fn conj(&self) -> QuatElement {
        self.algebra.element([
            self.x[0].clone(),
            -self.x[1].clone(),
            -self.x[2].clone(),
            -self.x[3].clone(),
        ])
    }

    /// Reduced norm N(x) = x * conj(x) = x0^2 - a x1^2 - b x2^2 + ab x3^2.
    pub fn norm(&self) -> BigRational {
        let a = BigInt::from(self.algebra.a);
        let b = BigInt::from(self.algebra.b);
        let sq = |c: &BigRational| c * c;
        sq(&self.x[0]) - sq(&self.x[1]) * &a - sq(&self.x[2]) * &b + sq(&self.x[3]) * (&a * &b)
    }

    /// Reduced trace tr(x) = x + conj(x) = 2 x0.
    pub fn trace(&self) -> BigRational {
        &self.x[0] + &self.x[0]
    }

    pub fn scale(&self, c: &BigRational) -> QuatElement {
        self.algebra.element([
            &self.x[0] * c,
            &self.x[1] * c,
            &self.x[2] * c,
            &self.x[3] * c,
        ])
    }

    pub fn add(&self, rhs: &QuatElement) -> Result<QuatElement, QuatError> {
        if self.algebra != rhs.algebra {
            return Err(QuatError::AlgebraMismatch);
        }
        Ok(self.algebra.element([
            &self.x[0] + &rhs.x[0],
            &self.x[1] + &rhs.x[1],
            &self.x[2] + &rhs.x[2],
            &self.x[3] + &rhs.x[3],
        ]))
    }

    /// Real matrix embedding phi(x) = [[conj(xi), conj(eta)], [b eta, xi]],
    /// with xi = x0 + x1 sqrt(a), eta = x2 + x3 sqrt(a) at the positive root.
    /// This is the unique homomorphism with phi(w) = diag(-sqrt a, sqrt a) and
    /// phi(W) = [[0,1],[b,0]]; det phi(x) = N(x).
    pub fn embed_matrix(&self) -> [[f64; 2]; 2] {
        let sqrt_a = (self.algebra.a as f64).sqrt();
        let b = self.algebra.b as f64;
        let x: Vec<f64> = self.x.iter().map(rational_to_f64).collect();
        let xi = x[0] + x[1] * sqrt_a;
        let xi_bar = x[0] - x[1] * sqrt_a;
        let eta = x[2] + x[3] * sqrt_a;
        let eta_bar = x[2] - x[3] * sqrt_a;
        [[xi_bar, eta_bar], [b * eta, xi]]
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Extremely large entries cannot occur for validated configs; fall back
        // to component division.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Sum of divisors sigma_1(m).
pub fn sigma1(m: u64) -> u64 {
    let mut total = 0u64;
    let mut d = 1u64;
    while d * d <= m {
        if m % d == 0 {
            total += d;
            if d * d != m {
                total += m / d;
            }
        }
        d += 1;
    }
    total
}

fn gcd64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

/// Scaled-integer coordinates: an order element x has x = y / denom with
/// y in Z^4 satisfying the lattice congruence adj * y = 0 mod det.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct ScaledCoords(pub [i64; 4]);

/// An order R in A, given by a lattice basis of four elements plus the level
/// q: Hecke theory is only used at m with (m, q) = 1.
#[derive(Debug, Clone)]
pub struct OrderBasis {
    algebra: AlgebraSpec,
    basis: [QuatElement; 4],
    q: u64,
    /// common denominator of all basis coordinates
    denom: i64,
    /// adjugate of the scaled basis matrix U and det(U): a scaled coordinate
    /// vector y lies in the lattice iff adj*y = 0 mod det
    adj: [[i64; 4]; 4],
    det: i64,
}

fn det4(m: &[[i64; 4]; 4]) -> i64 {
    let minor = |r: [usize; 3], c: [usize; 3]| -> i64 {
        m[r[0]][c[0]] * (m[r[1]][c[1]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[1]])
            - m[r[0]][c[1]] * (m[r[1]][c[0]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[0]])
            + m[r[0]][c[2]] * (m[r[1]][c[0]] * m[r[2]][c[1]] - m[r[1]][c[1]] * m[r[2]][c[0]])
    };
    let rows = [1, 2, 3];
    let mut det = 0i64;
    for (j, sign) in [(0usize, 1i64), (1, -1), (2, 1), (3, -1)] {
        let cols: Vec<usize> = (0..4).filter(|&c| c != j).collect();
        det += sign * m[0][j] * minor(rows, [cols[0], cols[1], cols[2]]);
    }
    det
}

fn adjugate4(m: &[[i64; 4]; 4]) -> [[i64; 4]; 4] {
    let minor3 = |skip_r: usize, skip_c: usize| -> i64 {
        let rows: Vec<usize> = (0..4).filter(|&r| r != skip_r).collect();
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip_c).collect();
        let e = |i: usize, j: usize| m[rows[i]][cols[j]];
        e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
            - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
            + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
    };
    let mut adj = [[0i64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[j][i] = sign * minor3(i, j);
        }
    }
    adj
}

impl OrderBasis {
    /// Validates that the four elements span a lattice containing 1, closed
    /// under multiplication, with integral norms and traces.
    pub fn new(
        algebra: AlgebraSpec,
        basis: [QuatElement; 4],
        q: u64,
    ) -> Result<Self, QuatError> {
        if q == 0 {
            return Err(QuatError::InvalidLevel);
        }
        for e in &basis {
            if e.algebra != algebra {
                return Err(QuatError::AlgebraMismatch);
            }
        }
        // Common denominator of all 16 coordinates.
        let mut denom = BigInt::one();
        for e in &basis {
            for c in e.coords() {
                let d = c.denom();
                let g = num_integer::gcd(denom.clone(), d.clone());
                denom = denom * d / g;
            }
        }
        let denom = denom.to_i64().ok_or(QuatError::DegenerateBasis)?;
        let mut basis_scaled = [[0i64; 4]; 4];
        for (j, e) in basis.iter().enumerate() {
            for (i, c) in e.coords().iter().enumerate() {
                let scaled = c * BigInt::from(denom);
                debug_assert!(scaled.is_integer());
                basis_scaled[i][j] = scaled
                    .to_integer()
                    .to_i64()
                    .ok_or(QuatError::DegenerateBasis)?;
            }
        }
        let det = det4(&basis_scaled);
        if det == 0 {
            return Err(QuatError::DegenerateBasis);
        }
        let adj = adjugate4(&basis_scaled);
        let order = OrderBasis {
            algebra,
            basis: basis.clone(),
            q,
            denom,
            adj,
            det,
        };
        // 1 in R
        if !order.contains(&algebra.one()) {
            return Err(QuatError::MissingIdentity);
        }
        // closure under multiplication, integral norm and trace
        for (i, ei) in basis.iter().enumerate() {
            if !ei.norm().is_integer() || !ei.trace().is_integer() {
                return Err(QuatError::NonIntegral(i));
            }
            for (j, ej) in basis.iter().enumerate() {
                let prod = ei.mul(ej)?;
                if !order.contains(&prod) {
                    return Err(QuatError::NotClosed(i, j));
                }
            }
        }
        Ok(order)
    }

    pub fn algebra(&self) -> AlgebraSpec {
        self.algebra
    }

    pub fn basis(&self) -> &[QuatElement; 4] {
        &self.basis
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Exact membership test x in R.
    pub fn contains(&self, x: &QuatElement) -> bool {
        let d = BigInt::from(self.denom);
        let mut y: [BigInt; 4] = std::array::from_fn(|_| BigInt::zero());
        for i in 0..4 {
            let scaled = &x.coords()[i] * &d;
            if !scaled.is_integer() {
                return false;
            }
            y[i] = scaled.to_integer();
        }
        let det = BigInt::from(self.det);
        for row in &self.adj {
            let mut acc = BigInt::zero();
            for (c, yi) in row.iter().zip(y.iter()) {
                acc += BigInt::from(*c) * yi;
            }
            if !(acc % &det).is_zero() {
                return false;
            }
        }
        true
    }

    /// Membership of scaled coordinates y (element = y / denom) in c * R.
    /// All arithmetic in i128 to avoid overflow at count-scale norms.
    pub(crate) fn contains_scaled(&self, y: &[i64; 4], c: i64) -> bool {
        // y / denom in c R  <=>  y = c * z with z integer-lattice scaled coords
        // <=> c | y coordinatewise and adj * (y/c) = 0 mod det.
        if c == 0 {
            return false;
        }
        let mut z = [0i64; 4];
        for i in 0..4 {
            if y[i] % c != 0 {
                return false;
            }
            z[i] = y[i] / c;
        }
        for row in &self.adj {
            let mut acc: i128 = 0;
            for (cf, zi) in row.iter().zip(z.iter()) {
                acc += *cf as i128 * *zi as i128;
            }
            if acc % self.det as i128 != 0 {
                return false;
            }
        }
        true
    }

    pub(crate) fn denom(&self) -> i64 {
        self.denom
    }

    pub(crate) fn to_element(&self, y: &ScaledCoords) -> QuatElement {
        let d = BigInt::from(self.denom);
        self.algebra.element(
            y.0.map(|c| BigRational::new(BigInt::from(c), d.clone())),
        )
    }

    /// Scaled quaternion product of two scaled coordinate vectors; the result
    /// is scaled by denom^2.  i128 throughout.
    pub(crate) fn mul_scaled(&self, x: &[i64; 4], y: &[i64; 4]) -> [i128; 4] {
        let a = self.algebra.a as i128;
        let b = self.algebra.b as i128;
        let (x0, x1, x2, x3) = (x[0] as i128, x[1] as i128, x[2] as i128, x[3] as i128);
        let (y0, y1, y2, y3) = (y[0] as i128, y[1] as i128, y[2] as i128, y[3] as i128);
        let qmul = |p1: i128, q1: i128, p2: i128, q2: i128| (p1 * p2 + a * q1 * q2, p1 * q2 + q1 * p2);
        let (p_xx, q_xx) = qmul(x0, x1, y0, y1);
        let (p_ee, q_ee) = qmul(x2, x3, y2, -y3);
        let (p_xe, q_xe) = qmul(x0, x1, y2, y3);
        let (p_ex, q_ex) = qmul(x2, x3, y0, -y1);
        [p_xx + b * p_ee, q_xx + b * q_ee, p_xe + p_ex, q_xe + q_ex]
    }

    /// Left equivalence gamma1 ~ gamma2 mod R(1), both of norm m, via
    /// gamma1 * conj(gamma2) in m R.  Exact.
    pub(crate) fn left_equivalent_scaled(&self, g1: &[i64; 4], g2: &[i64; 4], m: u64) -> bool {
        let g2c = [g2[0], -g2[1], -g2[2], -g2[3]];
        let prod = self.mul_scaled(g1, &g2c); // scaled by denom^2
        // Need prod / denom^2 in m R, i.e. prod = m * denom * z with z in the
        // integer lattice L (adj z = 0 mod det).
        let c = m as i128 * self.denom as i128;
        let mut z = [0i128; 4];
        for i in 0..4 {
            if prod[i] % c != 0 {
                return false;
            }
            z[i] = prod[i] / c;
        }
        for row in &self.adj {
            let mut acc: i128 = 0;
            for (cf, zi) in row.iter().zip(z.iter()) {
                acc += *cf as i128 * *zi;
            }
            if acc % self.det as i128 != 0 {
                return false;
            }
        }
        true
    }

    /// Public exact left-equivalence test on arbitrary norm-m elements.
    pub fn left_equivalent(&self, g1: &QuatElement, g2: &QuatElement, m: u64) -> bool {
        let prod = g1.mul(&g2.conj()).expect("same algebra");
        let scaled = prod.scale(&BigRational::new(BigInt::one(), BigInt::from(m)));
        self.contains(&scaled)
    }
}

/// All order elements of norm m inside the entry box, as scaled coordinates.
///
/// The box is derived from `entry_bound`: every alpha with all entries of
/// phi(alpha)/sqrt(m) bounded by `entry_bound` has coordinates inside it, so
/// the search is exhaustive for the stated predicate.
pub(crate) fn enumerate_norm_scaled(
    order: &OrderBasis,
    m: u64,
    entry_bound: f64,
    budget: f64,
) -> Result<Vec<ScaledCoords>, QuatError> {
    let a = order.algebra.a;
    let b = order.algebra.b;
    let d = order.denom;
    let sqrt_a = (a as f64).sqrt();
    let sqrt_m = (m as f64).sqrt();
    let bm = entry_bound * sqrt_m;
    // |x0| <= bm, |x1| <= bm/sqrt(a): from |xi|, |xi_bar| <= bm.
    // |eta| <= bm and |b eta_bar| <= bm give |x2| <= bm(1+1/|b|)/2 etc.
    let eta_half = bm * (1.0 + 1.0 / (b.abs() as f64)) / 2.0;
    let y0_max = (bm * d as f64).floor() as i64;
    let y1_max = (bm / sqrt_a * d as f64).floor() as i64;
    let y2_max = (eta_half * d as f64).floor() as i64;
    let y3_max = (eta_half / sqrt_a * d as f64).floor() as i64;
    let box_size = (2.0 * y0_max as f64 + 1.0) * (2.0 * y1_max as f64 + 1.0)
        + (2.0 * y2_max as f64 + 1.0) * (2.0 * y3_max as f64 + 1.0);
    if box_size > budget {
        return Err(QuatError::BudgetExceeded(box_size, budget));
    }

    // Join on the exact integer identity
    //   (y0^2 - a y1^2) - b (y2^2 - a y3^2) = d^2 m.
    let mut table: HashMap<i64, Vec<(i64, i64)>> = HashMap::new();
    for y0 in -y0_max..=y0_max {
        for y1 in -y1_max..=y1_max {
            let e = y0 * y0 - a * y1 * y1;
            table.entry(e).or_default().push((y0, y1));
        }
    }
    let target = (d * d) as i64 * m as i64;
    let mut found = Vec::new();
    for y2 in -y2_max..=y2_max {
        for y3 in -y3_max..=y3_max {
            let w = target + b * (y2 * y2 - a * y3 * y3);
            if let Some(pairs) = table.get(&w) {
                for &(y0, y1) in pairs {
                    let y = [y0, y1, y2, y3];
                    if !order.contains_scaled(&y, 1) {
                        continue;
                    }
                    // exact entry filter on phi(alpha)/sqrt(m)
                    let df = d as f64;
                    let xi = (y0 as f64 + y1 as f64 * sqrt_a) / df;
                    let xi_bar = (y0 as f64 - y1 as f64 * sqrt_a) / df;
                    let eta = (y2 as f64 + y3 as f64 * sqrt_a) / df;
                    let eta_bar = (y2 as f64 - y3 as f64 * sqrt_a) / df;
                    let lim = bm * (1.0 + 1e-12);
                    if xi.abs() <= lim
                        && xi_bar.abs() <= lim
                        && eta.abs() <= lim
                        && (b as f64 * eta_bar).abs() <= lim
                    {
                        found.push(ScaledCoords(y));
                    }
                }
            }
        }
    }
    found.sort_unstable_by_key(|s| s.0);
    Ok(found)
}

/// All alpha in R with N(alpha) = m and |entries of phi(alpha)/sqrt(m)| <=
/// entry_bound, exhaustive within the induced coefficient box.
pub fn enumerate_norm(
    order: &OrderBasis,
    m: u64,
    entry_bound: f64,
    budget: f64,
) -> Result<Vec<QuatElement>, QuatError> {
    let scaled = enumerate_norm_scaled(order, m, entry_bound, budget)?;
    Ok(scaled.iter().map(|y| order.to_element(y)).collect())
}

/// Coset representatives of R(1)\R(m): pairwise left-inequivalent, with
/// completeness certified by the degree formula |R(1)\R(m)| = sigma_1(m).
#[derive(Debug, Clone)]
pub struct HeckeSet {
    pub m: u64,
    pub reps: Vec<QuatElement>,
    pub(crate) reps_scaled: Vec<ScaledCoords>,
    /// entry bound at which enumeration stabilized
    pub entry_bound: f64,
}

impl HeckeSet {
    pub fn degree(&self) -> usize {
        self.reps.len()
    }
}

/// Computes R(1)\R(m) by enumerating R(m) in a growing entry box and reducing
/// by exact left equivalence; terminates when sigma_1(m) classes are found.
pub fn coset_reps(order: &OrderBasis, m: u64, budget: f64) -> Result<HeckeSet, QuatError> {
    if gcd64(m, order.q) != 1 {
        return Err(QuatError::LevelNotCoprime(m, order.q));
    }
    let expected = sigma1(m);
    let mut bound = 2.0f64;
    let max_bound = 24.0;
    loop {
        let elements = enumerate_norm_scaled(order, m, bound, budget)?;
        let mut classes: Vec<ScaledCoords> = Vec::new();
        'outer: for y in &elements {
            for rep in &classes {
                if order.left_equivalent_scaled(&y.0, &rep.0, m) {
                    continue 'outer;
                }
            }
            classes.push(*y);
        }
        assert!(
            classes.len() as u64 <= expected,
            "more cosets than sigma_1(m): degree formula violated for m = {m}"
        );
        if classes.len() as u64 == expected {
            let reps = classes.iter().map(|y| order.to_element(y)).collect();
            return Ok(HeckeSet {
                m,
                reps,
                reps_scaled: classes,
                entry_bound: bound,
            });
        }
        if bound >= max_bound {
            return Err(QuatError::IncompleteEnumeration {
                m,
                found: classes.len(),
                expected,
                bound,
            });
        }
        bound *= 1.5;
    }
}

/// Multiset bookkeeping for the composition T_p T_p = T_{p^2} + p T_1 at the
/// level of cosets: multiplicity of each R(1)\R(p^2) class among all pairwise
/// products of T_p representatives.
pub struct CompositionCheck {
    pub p: u64,
    /// multiplicity per R(1)\R(p^2) class, aligned with `squared.reps`
    pub multiplicities: Vec<usize>,
    /// index of the class containing the scalar p
    pub scalar_class: usize,
    pub holds: bool,
}

/// Verifies the coset-level composition law for one prime p with (p, q) = 1:
/// every class of R(1)\R(p^2) appears exactly once among the products, except
/// the class of the scalar p which appears 1 + p times.
pub fn verify_composition(
    order: &OrderBasis,
    reps_p: &HeckeSet,
    reps_p2: &HeckeSet,
) -> Result<CompositionCheck, QuatError> {
    let p = reps_p.m;
    assert_eq!(reps_p2.m, p * p, "second set must be T_{{p^2}} cosets");
    let m2 = p * p;
    // scalar p in scaled coordinates
    let scalar = [p as i64 * order.denom, 0, 0, 0];
    let scalar_class = reps_p2
        .reps_scaled
        .iter()
        .position(|rep| order.left_equivalent_scaled(&scalar, &rep.0, m2))
        .expect("scalar class must be present in R(1)\\R(p^2)");
    let mut multiplicities = vec![0usize; reps_p2.reps_scaled.len()];
    for g1 in &reps_p.reps_scaled {
        for g2 in &reps_p.reps_scaled {
            let prod = order.mul_scaled(&g1.0, &g2.0);
            // product is scaled by denom^2; reduce to denom scale
            let mut y = [0i64; 4];
            let mut ok = true;
            for i in 0..4 {
                if prod[i] % order.denom as i128 != 0 {
                    ok = false;
                    break;
                }
                y[i] = (prod[i] / order.denom as i128) as i64;
            }
            assert!(ok, "product of order elements left the (1/denom) lattice");
            let class = reps_p2
                .reps_scaled
                .iter()
                .position(|rep| order.left_equivalent_scaled(&y, &rep.0, m2))
                .expect("every product must fall in a known class");
            multiplicities[class] += 1;
        }
    }
    let holds = multiplicities.iter().enumerate().all(|(i, &mult)| {
        if i == scalar_class {
            mult == 1 + p as usize
        } else {
            mult == 1
        }
    });
    Ok(CompositionCheck {
        p,
        multiplicities,
        scalar_class,
        holds,
    })
}

/// Parses "p/q" or "p" into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    s.trim()
        .parse::<BigRational>()
        .map_err(|e| format!("bad rational {s:?}: {e}"))
}
