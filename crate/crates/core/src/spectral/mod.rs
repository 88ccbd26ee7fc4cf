//! Multitaper estimation of the generalized local scattering function and
//! its Doppler/delay marginals.

mod dpss;
mod glsf;

pub use dpss::{concentration, dpss, DpssBank};
pub use glsf::{
    estimate_glsf, estimate_glsf_samples, marginal_delay, marginal_doppler, window_centers, DelayPsd,
    DopplerPsd, GlsfEstimate, GlsfParams, MarginalPsd, PsdAxis,
};
