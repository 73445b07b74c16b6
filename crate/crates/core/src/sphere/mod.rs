//! Axisymmetric geometry on the 2-sphere.

pub mod conformal;
pub mod io;
pub mod eigen;
pub mod grid;
pub mod metric;
pub mod ops;

pub use conformal::{conformal_representation, ConformalData, IsothermalMap};
pub use eigen::{first_eigenpair, Eigenpair, TOL_EIG};
pub use grid::{DiffScheme, LegendreSeries, PolarGrid};
pub use metric::{AxisymMetric, ScalarField};
pub use ops::{area, charge_flux, gaussian_curvature, gradient_norm_sq, laplace_beltrami};
