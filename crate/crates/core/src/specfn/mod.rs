//! Special functions: log-gamma, digamma, Gauss `2F1` and Bessel `K_ν`.

mod bessel;
pub(crate) mod gamma;
pub(crate) mod hyp2f1;

pub use bessel::bessel_k;
pub use gamma::{digamma, log_gamma, EULER_GAMMA};
pub use hyp2f1::{gauss_2f1, gauss_2f1_near_one, Hyper2F1Args, Z_SWITCH};
