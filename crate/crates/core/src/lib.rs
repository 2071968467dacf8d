//! Core model for mirror-assisted (optical RIS) multi-user visible-light
//! communication.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. It covers:
//!
//! - [`scene`] and [`blockage`]: room, LEDs, users modelled as body
//!   cylinders with a handheld photodetector, the mirror grid along the top
//!   of each wall, diffuse wall patches below it, and occlusion of every
//!   link path by the user cylinders.
//! - [`channel`]: Lambertian line-of-sight, mirror and diffuse-wall gains and
//!   their assembly into an affine optical-SNR model per user.
//! - [`milp`]: a bounded-variable simplex, best-first branch-and-bound for
//!   binary variables and an exhaustive enumeration oracle.
//! - [`allocation`]: max-min optical-SNR mirror assignment, the iterative
//!   outage-pruning loop and the no-mirror baseline.
#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod allocation;
pub mod blockage;
pub mod channel;
pub mod geometry;
pub mod milp;
pub mod scene;

mod math;

pub use allocation::{Allocation, SolverConfig};
pub use blockage::{blockage_indicators, BlockageMap};
pub use channel::{ChannelCoefficients, NoiseBandwidth, RadioConfig};
pub use geometry::Vec3;
pub use scene::{build_scene, Scene, SceneConfig, UserState};
