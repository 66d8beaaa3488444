//! Exact computations for affine Hecke algebras: residual points, residues of the
//! mu-function, formal degrees, spectral transfer morphisms and unipotent
//! discrete-series packets.
//!
//! Everything is exact. Coefficients are arbitrary precision rationals and
//! functions of `v` (with `q = v^2`) are carried as [`LaurentFunction`] or in
//! factored cyclotomic form.

pub mod error;
pub mod laurent;
mod linalg;
pub mod mufn;
pub mod packets;
pub mod rootdata;
pub mod stm;
pub mod tableaux;
pub mod unipotent;

pub use error::{HeckeError, Result};
pub use laurent::{cyclotomic_product, qint, CycloProduct, LaurentFunction, QRational, Q};
pub use rootdata::{build_root_system, spectral_diagram, Affine, AlgebraLabel, CartanType, ParamHeckeAlgebra, RootSystem, SpectralDiagram};
