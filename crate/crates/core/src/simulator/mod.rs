//! Exact dense simulation of sampled networks.

mod density;
mod montecarlo;
mod state;

pub use density::{
    correlation_proxies, entropy_renyi2, entropy_vn, interval_entropies, mutual_information,
    partial_traces, reduced_density, set_density, set_entropies, set_spectrum, vn_from_spectrum,
    CorrelationProxies, DensityMatrix, Entropies, DENSE_DIM_LIMIT, EIGEN_CLAMP,
};
pub use montecarlo::{mc_entropy_stats, mc_entropy_sweep, mc_mutual_information, trial_seed, EntropyStats};
pub use state::{
    apply_isometry, build_state, build_state_with_cap, check_feasible, memory_cap, slot_isometry,
    slot_stream, DenseState, MeraState, SlotKind, DEFAULT_MEMORY_CAP, MEMORY_CAP_ENV,
};
