//! Exact thermodynamic quantities of Markov sources: pressure, the Rényi,
//! hitting-time and return-time spectra, entropy, asymptotic variance,
//! partition sums and large-deviation rate functions. These are the
//! reference values every estimator is compared against.

mod partition;
mod rate;
mod spectra;
mod transfer;

pub use partition::{brute_force_partition, log_sum_exp, partition_sum, BRUTE_FORCE_LIMIT};
pub use rate::{rate_function, RateFunction, Side, Q_MAX, Q_MIN};
pub use spectra::{
    asymptotic_variance, default_q_grid, entropy, fmt_num, hitting_spectrum_w,
    nonoverlap_spectrum_rhat, pressure, renyi_m, CurveKind, Spectra, SpectrumCurve,
    SpectrumPoint,
};
pub use transfer::{Perron, TransferMatrix};
