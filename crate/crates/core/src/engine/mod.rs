//! The first-order generator on `ℂ² ⊗ L²`, its eigenstructure and
//! closed-form exponential, per mode and as dense truncated operators.

pub mod basis;
pub mod dense;
pub mod mode;

pub use basis::{CompressedWell, InfiniteWell, ModeBasisSpec};
pub use dense::{assemble_gamma_general, default_truncation, DenseGenerator, TruncatedOperator};
pub use mode::{
    biortho_eigensystem, build_h_mode, jordan_block_system, propagator_mode, q_intertwiner_mode, q_matrix,
    transfer_entries_mode, BiorthoPair, TransferEntries,
};
