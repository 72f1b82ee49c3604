//! Base surfaces, bundles with connection, curvature and the Chern character.

pub mod bundle;
pub mod chern;
pub mod forms;
pub mod registry;
pub mod surface;

pub use bundle::{BundleConnection, BundleModel, DerivativeMode, GaugeField, ProjectorField};
pub use chern::{chern_character, chern_form_eval, chern_number, curvature_hat, Quadrature};
pub use forms::{DifferentialForm, FnForm, FnOneForm, FnScalar, OneForm, ScalarFunction};
pub use registry::bundle;
pub use surface::Surface;
