//! Shared numerical kernels: adaptive quadrature, scaled modified Bessel
//! functions, Gauss-Legendre rules and a bracketed 1-D maximiser.

mod bessel;
mod gauss_legendre;
mod optimize;
mod quadrature;

pub use bessel::{bessel_i_scaled, one_minus_scaled_i0, scaled_i0_excess, BesselOrder};
pub use gauss_legendre::{gauss_legendre, GaussLegendre};
pub use optimize::{golden_section_max, Maximum, OptimumFlag};
pub use quadrature::{
    integrate, integrate_breaks, integrate_to_infinity, Estimate, QuadratureSpec,
};
