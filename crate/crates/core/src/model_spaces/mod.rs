//! Explicit model spaces: flat Lorentz tori `(T^d, g)` with integer isometry
//! groups `O(g, Z)`, the Hopf-manifold cocycle, and anti-de Sitter 3-space
//! as the level set `Q′ = 1` in `R² × R²` acted on by `SL(2,R) × SL(2,R)`.

pub mod ads;
pub mod hopf;
pub mod torus;

pub use ads::{
    ads_form, ads_other_family, ads_pair_orbit, ads_plane_family, ads_second_factor_action, first_factor, mobius,
    second_factor, CircleParam, IsotropicPlane2,
};
pub use hopf::{hopf_return_cocycle, hopf_trace, HopfModel, HopfStep};
pub use torus::{
    fixed_isotropic_directions, integer_isometries, plus_minus_identity_check, FixedDirections, RationalLorentzForm,
};
