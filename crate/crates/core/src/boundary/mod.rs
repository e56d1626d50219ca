//! Flows on the boundary strata of the compactified energy surfaces.

pub mod collision;
pub mod infinity;
pub mod torus;

pub use collision::{bulk_in_chart, collision_field, internal_force, CollisionChartState, CollisionFieldValue};
pub use infinity::{
    cluster_infinity_field, hill_fiber_field, hill_rest_points, infinity_field, InfinityChartState, InfinityFieldValue,
};
pub use torus::{
    classify_rest_points, integrate_torus, regularization_check, twobody_collision_closed_form,
    twobody_collision_field, twobody_hill_closed_form, twobody_hill_field, twobody_infinity_closed_form,
    twobody_infinity_field, Branch, RestCircle, RestPoints, TorusKind, TwoBodyTorusState,
};
