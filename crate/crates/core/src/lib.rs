//! Exact computation with coherent-sheaf data on root stacks over small
//! affine bases.
//!
//! The crate represents sheaves on a root stack as *extendable pairs*: finite
//! diagrams of finitely presented modules over a computable base ring,
//! indexed by the box poset attached to the root data, together with
//! pseudo-period isomorphisms. On top of that it mechanizes the localization
//! tower of adjoint functors between pair categories and diagram categories,
//! and computes the induced decomposition of a pair's Grothendieck-group
//! class into a base component plus leaf components supported on divisor
//! intersections. A companion layer handles cyclic-group-equivariant modules
//! on the affine line and a character-theoretic cross-check, and a small
//! linear-algebra layer checks the normal-crossing/abelian dichotomy for
//! groups generated by pseudo-reflections.
//!
//! Everything is exact: coefficients are rationals or prime-field elements,
//! and all comparisons are equalities of canonical forms.

pub mod diagram;
pub mod equivariant;
pub mod error;
pub mod factor;
pub mod intmat;
pub mod jsonio;
pub mod localize;
pub mod matrix;
pub mod parabolic;
pub mod poly;
pub mod reflection;
pub mod ring;
pub mod samples;
pub mod scalar;

pub use error::Error;
