//! Pseudospectral simulation and scattering diagnostics for non-local
//! Schrödinger operators `Ψ(−Δ) + V` on periodic grids.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod diagnostics;
pub mod error;
pub mod real;
pub mod spectrum;
pub mod evolution;
pub mod experiment;
pub mod lattice;
pub mod potential;
pub mod symbol;

pub use error::{Error, Result};
pub use real::Real;

pub type SymbolF64 = symbol::SymbolSpec<f64>;
pub type GridF64 = lattice::GridSpec<f64>;
pub type LatticeF64 = lattice::Lattice<f64>;
pub type PacketF64 = lattice::WavePacket<f64>;
pub type PotentialF64 = potential::PotentialSpec<f64>;
pub type SeriesF64 = diagnostics::TimeSeries<f64>;

pub type SymbolF32 = symbol::SymbolSpec<f32>;
pub type GridF32 = lattice::GridSpec<f32>;
pub type LatticeF32 = lattice::Lattice<f32>;
pub type PacketF32 = lattice::WavePacket<f32>;
pub type PotentialF32 = potential::PotentialSpec<f32>;
pub type SeriesF32 = diagnostics::TimeSeries<f32>;
