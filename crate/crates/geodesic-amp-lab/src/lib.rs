//! Numerical laboratory for amplified restriction estimates on arithmetic
//! hyperbolic surfaces.
//!
//! The crate builds, end to end, the constructive machinery behind power-saving
//! bounds for geodesic restrictions of Hecke-Maass forms:
//!
//! * [`quaternion`] — exact arithmetic in a rational quaternion division
//!   algebra, its order, and enumeration of Hecke coset representatives;
//! * [`geometry`] — PSL(2,R) structure theory: Iwasawa coordinates, the height
//!   function `A`, angle maps, and the two distances `d` and `n` on pairs of
//!   geodesic segments;
//! * [`spherical`] — Paley-Wiener spectral windows, spherical functions, and
//!   the radial kernels they synthesize;
//! * [`phase`] — the stationary-phase structure of the restriction integral:
//!   critical geodesics, analytic Hessians, the reduced phase, and degeneracy
//!   classification;
//! * [`oscillatory`] — high-frequency quadrature for the restriction integrals
//!   together with decay-exponent fitting;
//! * [`counting`] — the geometric counting function `M(l, n, kappa)` over the
//!   order, its norm-equation prefilter, and amplifier coefficient sums;
//! * [`exponents`] — exact rational bookkeeping that balances the cost terms
//!   and reproduces the headline exponents;
//! * [`experiments`] — experiment configs, CSV/JSON/SVG emission, and the
//!   runners behind the `geodesic-amp-lab` binary.
//!
//! Each runnable capability has a matching example under `examples/`; the thin
//! `geodesic-amp-lab` binary drives the same runners from TOML configs.

pub mod counting;
pub mod experiments;
pub mod exponents;
pub mod geometry;
pub mod oscillatory;
pub mod phase;
pub mod quaternion;
pub mod spherical;

pub use counting::{amplifier_sum_checks, count_m, geodesic_form, CountRecord, GeodesicForm};
pub use exponents::{conditional_exponents, optimize_exponents, ExponentModel, OptimizationResult};
pub use geometry::{
    dist_geodesics, dist_group, n_align, GeodesicSegment, GroupElement, IwasawaCoords, LieVector,
};
pub use oscillatory::{fit_decay, restriction_integral, BumpProfile, DecayModel, DecaySeries};
pub use phase::{
    classify_degeneracy, find_critical_points, CriticalPoint, DegeneracyClass, PhaseContext,
};
pub use quaternion::{coset_reps, enumerate_norm, AlgebraSpec, HeckeSet, OrderBasis, QuatElement};
pub use spherical::{
    mehler_conical, spherical_phi, synthesize_kernel, two_sided_window, SpectralWindow,
    WindowParams,
};
