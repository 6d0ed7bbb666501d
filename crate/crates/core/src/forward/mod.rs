//! Forward models and their exact proximal maps.
//!
//! Every quadratic data term uses `f(x) = 1/2 ||G x - y||^2`, so the x-update
//! is `(G^T G + rho I)^{-1} (G^T y + rho x_tilde)`.

mod deblur;
mod interp;
mod polyphase;
mod qis;
mod superres;

pub use deblur::{deblur_prox, Deblur};
pub use interp::{interp_prox, Interp};
pub use polyphase::{autocorrelation, polyphase_zeroth, polyphase_zeroth_on_grid};
pub use qis::{
    qis_counts, qis_lookup_build, qis_mle, qis_prox, qis_simulate, BitField, Qis, QisLookup, QisObservation, QisPixel,
    MAX_LOOKUP_ENTRIES,
};
pub use superres::{superres_prox, SuperRes, SuperResModel};
