//! Special functions, adaptive quadrature and root-finding shared by all
//! pricing models.

mod quad;
mod roots;
mod special;

pub use quad::{integrate, integrate_semi_infinite, QuadratureSpec};
pub use roots::find_root;
pub use special::{gamma_cdf, gamma_pdf, ln_gamma, norm_cdf, norm_pdf, reg_gamma_p, reg_gamma_q};
