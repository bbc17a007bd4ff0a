//! Impulsive relative-motion planning under path constraints on the
//! Clohessy-Wiltshire model.
//!
//! Everything is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`). The aliases at the crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod constraints;
pub mod cw;
pub mod error;
pub mod linalg;
pub mod planner;
pub mod reach;
pub mod scalar;
pub mod spectral;

pub use constraints::{ConstraintKind, ConstraintVerdict, PathConstraint, TimeWindow, Violation};
pub use cw::{CwModel, OrbitParams, RelState, StmBlocks, Trajectory, TransferGuard, TransferLeg, EARTH_MU, EARTH_RADIUS};
pub use error::{Error, Result};
pub use linalg::{Mat3, SquareMatrix, Vec3};
pub use scalar::Real;

pub type Orbit = OrbitParams<f64>;
pub type Model = CwModel<f64>;
pub type State = RelState<f64>;
pub type Leg = TransferLeg<f64>;
pub type Path = Trajectory<f64>;
pub type Constraint = PathConstraint<f64>;
pub type Position = Vec3<f64>;
pub type Matrix3 = Mat3<f64>;

pub type Orbit32 = OrbitParams<f32>;
pub type Model32 = CwModel<f32>;
pub type Position32 = Vec3<f32>;
