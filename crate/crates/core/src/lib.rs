//! Performance of optimal and non-optimal multi-port-based teleportation.
//!
//! Every quantity is computed from symmetric-group data: Young diagrams of
//! height at most `d`, their dimensions and Schur–Weyl multiplicities, and the
//! path counts `m_{μ/α}` between them.
//!
//! * [`partitions`]: diagram combinatorics and multiplicity identities.
//! * [`spectral`]: eigenvalues and degeneracies of the MPBT operator.
//! * [`telematrix`]: the generalised teleportation matrix and its Perron pair.
//! * [`protocols`]: success probabilities, fidelities and optimizer coefficients.
//! * [`oracle`] (feature `oracle`): explicit operators on small Hilbert spaces
//!   used to certify all of the above.
//!
//! Throughout, `N` is the number of ports, `k` the number of teleported
//! systems and `d` the local dimension, with `1 ≤ k ≤ N`.

mod error;
pub mod partitions;
pub mod protocols;
pub mod rational;
pub mod spectral;
pub mod telematrix;
mod transport;

#[cfg(feature = "oracle")]
pub mod oracle;

pub use error::{Error, Result};
pub use partitions::{Partition, PartitionTable};
pub use protocols::{OptimizerCoefficients, ProtocolReport};
pub use spectral::SpectrumEntry;
pub use telematrix::{EigenResult, TeleMatrix};

/// Validates `1 ≤ k ≤ N` and `d ≥ 1`.
pub fn check_params(n: usize, k: usize, d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameters("d must be at least 1".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameters(format!("need 1 ≤ k ≤ N, got N={n}, k={k}")));
    }
    Ok(())
}
