//! Exact simulator and subgroup algebra for the hidden subgroup problem over
//! the metacyclic groups `Z_{p^r} x| Z_{q^s}`.
//!
//! * [`number_theory`]: modular arithmetic, orders, primitive roots.
//! * [`group`]: parameters, the product law, closed-form powers and commutators.
//! * [`subgroups`]: canonical subgroup descriptors and a brute-force enumerator.
//! * [`oracle`]: coset-separating functions with query accounting.
//! * [`quantum`]: state-vector simulation of coset sampling and the full solver.
//! * [`classical`]: the birthday-collision baseline.
//! * [`checks`]: exhaustive structural verification suites.

pub mod checks;
pub mod classical;
pub mod error;
pub mod group;
pub mod number_theory;
pub mod oracle;
pub mod quantum;
pub mod rng;
pub mod subgroups;

pub use error::{Error, Result};
pub use group::{make_params, GroupElement, GroupParams};
pub use oracle::{build_oracle, CosetLabel, HiddenSubgroupOracle, HidingFunction};
pub use rng::TrialRng;
pub use subgroups::SubgroupDescriptor;
