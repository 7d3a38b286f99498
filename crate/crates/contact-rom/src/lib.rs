//! Parametric reduced-order models for frictionless contact mechanics.
//!
//! The crate covers the full pipeline for desk-scale contact studies:
//!
//! - benchmark problems (1D rope-obstacle, 2D Hertz half-cylinders, 2D
//!   ironing, 2D diffusion-reaction transport) assembled with linear finite
//!   elements ([`problems`], [`fem`], [`mesh`]),
//! - node-to-segment contact pairing and collocation constraint operators
//!   ([`contact`]),
//! - a high-fidelity fixed-point active-set solver used as the snapshot
//!   generator ([`hf`]),
//! - offline compression: POD bases, cone-projected greedy dual bases,
//!   dictionaries and nested training hierarchies ([`offline`]),
//! - online solvers: low-rank reduced active set, greedy active-set over a
//!   dual dictionary, and a convex-hull solver over a monolithic dictionary
//!   ([`rom`]),
//! - sparse regression engines OMP / FOCUSS / nnFOCUSS ([`sparse`]),
//! - dynamic-time-warping alignment and dictionary enrichment ([`dtw`]),
//! - reducibility diagnostics ([`metrics`]) and a config-driven experiment
//!   runner ([`experiment`]).
//!
//! The fastest way in is the `examples/` directory, which has one runnable
//! example per capability. The `contact-rom` binary drives the same pipeline
//! from JSON configs (`run`, `snapshots`, `metrics`, `validate`).

pub mod contact;
pub mod dtw;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod hf;
pub mod linalg;
pub mod mesh;
pub mod metrics;
pub mod offline;
pub mod problems;
pub mod rom;
pub mod sparse;

pub use error::Error;

/// Dense column-major matrix used for snapshot sets, dictionaries and bases.
pub type DMat = nalgebra::DMatrix<f64>;
/// Dense column vector.
pub type DVec = nalgebra::DVector<f64>;
