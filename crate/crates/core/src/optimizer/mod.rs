//! Alternating optimization of the receive combiner, the surface
//! coefficients and the offload volume.

mod alternating;
mod amplitude;
mod combiner;
mod offload;
mod phases;
mod waterfill;

pub use alternating::{run_alternating, run_alternating_with, AlternatingConfig};
pub use amplitude::{fixed_amplitude_update, SubproblemCoefficients};
pub use combiner::optimal_combiner;
pub use offload::{balance_point, optimal_offload};
pub use phases::optimal_phases;
pub use waterfill::{
    dynamic_select_and_allocate, top_indices, waterfill, DynamicUpdate, WaterfillAllocation,
};
