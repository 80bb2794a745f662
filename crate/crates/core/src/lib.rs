//! Parallel adaptive integration of integral families in two dimensions.
//!
//! * [`rules`]: nested Clenshaw-Curtis pairs and their error estimate.
//! * [`adaptive`]: the shared task heap and the global-error driver.
//! * [`baseline`]: the same machinery with one isolated error target per integral.
//! * [`frg`]: Hubbard-model bubble integrands used as the benchmark workload.
//! * [`bench`]: the sweeps behind the `paid-bench` binary.

pub mod adaptive;
pub mod baseline;
pub mod bench;
pub mod error;
pub mod frg;
pub mod rules;

pub use adaptive::{
    run_adaptive, serial_reference, AdaptiveConfig, ErrorMode, FamilyResult, IntegrandFamily,
};
pub use baseline::{run_family_local, run_family_local_with, run_local, LocalResult, LocalTarget};
pub use error::{Error, Result};
pub use rules::{integrate_pair, make_pair, make_rule, Integrand, QuadPairRule, Rectangle};
