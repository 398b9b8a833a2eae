//! Differential forms, oriented box bodies, faces, edges and quadrature.

mod body;
mod form;
mod formfield;
pub mod linalg;
mod quadrature;
mod transition;

pub use body::{integrate_box, restrict_form, Body, Chart, Edge, FacePatch, FaceSide};
pub use form::{basis_tuples, omit, FormValue, SeriesForm};
pub use formfield::{
    map_with_jacobian, CoefficientForm, ExteriorDerivative, FnForm, FormField, Pullback,
};
pub use quadrature::QuadratureRule;
pub use transition::TransitionMap;
