//! Numerical toolkit for the first Robin Laplacian eigenvalue on doubly-connected
//! domains `Ω = Ω_out \ closure(Ω_in)`.
//!
//! The crate is organized by subsystem:
//!
//! * [`shell_radial`]: first eigenvalues of concentric spherical shells in any
//!   dimension by radial shooting, plus the Robin–Neumann / Neumann–Robin
//!   monotonicity sweeps and the max–min splitting of the Robin–Robin value.
//! * [`convex_geometry`]: quermassintegrals of convex polygons and polytopes,
//!   matched shells, class membership, Steiner and Alexandrov–Fenchel checks.
//! * [`mesh`]: star-shaped annular domains and their structured triangulations.
//! * [`fem`]: P1 assembly and the smallest eigenpair of the resulting pencil.
//! * [`flow`]: gradient-flow fronts of computed eigenfunctions, swept
//!   subdomains, Morse perturbation by a potential, discrete critical points.
//! * [`counterexample`]: the elongated rectangle-minus-disk family for which the
//!   shell comparison reverses.
//! * [`morse3d`]: an explicit Morse function on R³ with a saddle whose stable
//!   manifold meets a sphere in a circle.
//!
//! Parameter sweeps run through [`exec`], which uses rayon when the `parallel`
//! feature is enabled and plain iteration otherwise.

pub mod bc;
pub mod convex_geometry;
pub mod counterexample;
pub mod error;
pub mod exec;
pub mod fem;
pub mod flow;
pub mod mesh;
pub mod morse3d;
pub mod shell_radial;

pub use bc::BoundaryCondition;
pub use error::{Error, Result};
