//! Degrees and winding numbers used as topological obstructions.

mod degree;
mod fields;
mod weierstrass;

pub use degree::{
    circle_winding, herman_obstruction, homotopic_to_constant, projective_to_sphere,
    sphere_degree, winding_number_surface, DegreeResult, SphereField, MIN_CIRCLE_SAMPLES,
    MIN_GRID, RESIDUAL_TOL,
};
pub use fields::{
    builtin_field, read_field_csv, surface_samples, BuiltinField, WEIERSTRASS_SURFACE_SCALE,
};
pub use weierstrass::{g4_square, SquareWeierstrass, WpParts, LATTICE_RADIUS};
