//! Retrieval effectiveness and significance testing.

mod ndcg;
mod significance;
mod stats;

pub use ndcg::{ndcg_at, Gain, NdcgOptions, Qrels};
pub use significance::{minimal_safe_rate, SafeRate};
pub use stats::{mean, paired_t_test, SignificanceResult, ALPHA};
