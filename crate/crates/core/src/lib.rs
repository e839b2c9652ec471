//! Deterministic simulator of a permissioned banking supernet for
//! documentary export trade.
//!
//! The crate models a private chain whose validators are banks: an
//! append-only gas-metered ledger, quorum block finalization over a seeded
//! network harness, the digital letter-of-credit workflow (issuance as an
//! NFT-style token, on-chain document negotiation, corridor compliance),
//! versioned document provenance with Merkle proofs and salted commitments,
//! stable-token settlement with fiat on/off-ramps, and bilateral trade-index
//! kernels.
//!
//! Everything is driven from a scenario file: `(scenario, seed)` fully
//! determines the ledger transcript, and replaying the transcript reproduces
//! the final state byte for byte.

pub mod analytics;
pub mod consensus;
pub mod docstore;
pub mod enc;
pub mod error;
pub mod hash;
pub mod ledger;
pub mod merkle;
pub mod money;
pub mod net;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod settlement;
pub mod transcript;
pub mod workflow;

pub use error::TxError;
pub use hash::{hash_bytes, Hash256};
pub use money::{Asset, Money, PartyId, Ratio};
