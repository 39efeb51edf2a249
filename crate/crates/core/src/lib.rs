//! Solver and analysis toolkit for the one-dimensional diffusion equation
//! `u_t = (L(u_x))_x` on `[0, 1]` with Dirichlet data, where `L` is a
//! piecewise-linear maximal monotone graph that may have jumps (singular
//! diffusion) and flats (degenerate diffusion).

pub mod curve;
pub mod error;
pub mod facets;
pub mod graph;
pub mod grid;
pub mod io;
pub mod mollify;
pub mod oracles;
pub mod scenario;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{Interval, Knot, MonotoneGraph};
pub use grid::GridFunction;
pub use mollify::{mollify, SmoothMonotoneFn};
pub use scenario::{BoundaryEvaluator, InitialDatum, Method, ProxSolver, Scenario};
pub use solver::{run, FluxField, RunOutput, Snapshot, TimeSeries};
