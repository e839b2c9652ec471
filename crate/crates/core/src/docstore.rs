//! Versioned trade-document store with Merkle history roots, inclusion
//! proofs, tamper detection, and salted-hash commitments.
//!
//! Each document is an unbroken hash chain of version records; the history
//! root is a Merkle root over the ordered record hashes, so any amendment is
//! provable and any mutation detectable. Commitments bind a party to
//! document content without revealing it: the chain carries only the digest,
//! and the salt travels to authorized counterparties off-chain.

use crate::enc::{CanonicalEncode, Encoder};
use crate::error::TxError;
use crate::hash::{hash_bytes, Hash256};
use crate::merkle::{self, MerkleProof};
use crate::money::PartyId;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One link in a document's amendment chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentVersion {
    pub doc_id: String,
    /// 1-based, strictly consecutive.
    pub version: u32,
    pub content_hash: Hash256,
    /// Record hash of the previous version; zero for version 1.
    pub parent_hash: Hash256,
    pub author: PartyId,
    pub tick: u64,
}

impl CanonicalEncode for DocumentVersion {
    fn encode(&self, enc: &mut Encoder) {
        enc.str(&self.doc_id);
        enc.u32(self.version);
        enc.bytes(self.content_hash.as_bytes());
        enc.bytes(self.parent_hash.as_bytes());
        self.author.encode(enc);
        enc.u64(self.tick);
    }
}

impl DocumentVersion {
    /// Hash of this record's canonical encoding; the next version's
    /// parent_hash and the Merkle leaf for this version.
    pub fn record_hash(&self) -> Hash256 {
        hash_bytes(&self.canonical_bytes())
    }
}

/// All documents, keyed by id, each an ordered version list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocStore {
    docs: BTreeMap<String, Vec<DocumentVersion>>,
}

impl DocStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a version with the correct parent hash. Fails if an existing
    /// record was corrupted (its stored parent no longer matches a
    /// recomputed chain).
    pub fn add_version(
        &mut self,
        doc_id: &str,
        content: &[u8],
        author: PartyId,
        tick: u64,
    ) -> Result<&DocumentVersion, TxError> {
        let versions = self.docs.entry(doc_id.to_string()).or_default();
        Self::check_chain(versions)?;
        let (version, parent_hash) = match versions.last() {
            None => (1, Hash256::ZERO),
            Some(prev) => (prev.version + 1, prev.record_hash()),
        };
        versions.push(DocumentVersion {
            doc_id: doc_id.to_string(),
            version,
            content_hash: hash_bytes(content),
            parent_hash,
            author,
            tick,
        });
        Ok(versions.last().unwrap())
    }

    fn check_chain(versions: &[DocumentVersion]) -> Result<(), TxError> {
        let mut expected_parent = Hash256::ZERO;
        for (i, v) in versions.iter().enumerate() {
            if v.version as usize != i + 1 || v.parent_hash != expected_parent {
                return Err(TxError::BrokenChain);
            }
            expected_parent = v.record_hash();
        }
        Ok(())
    }

    pub fn versions(&self, doc_id: &str) -> Result<&[DocumentVersion], TxError> {
        self.docs
            .get(doc_id)
            .map(|v| v.as_slice())
            .ok_or(TxError::UnknownDocument)
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &String> {
        self.docs.keys()
    }

    fn leaves(&self, doc_id: &str) -> Result<Vec<Hash256>, TxError> {
        Ok(self.versions(doc_id)?.iter().map(|v| v.record_hash()).collect())
    }

    /// Merkle root over the ordered version-record hashes.
    pub fn history_root(&self, doc_id: &str) -> Result<Hash256, TxError> {
        Ok(merkle::root(&self.leaves(doc_id)?))
    }

    /// Inclusion proof for one version (1-based) against the history root.
    pub fn prove_inclusion(&self, doc_id: &str, version: u32) -> Result<MerkleProof, TxError> {
        let leaves = self.leaves(doc_id)?;
        if version == 0 || version as usize > leaves.len() {
            return Err(TxError::VersionOutOfRange);
        }
        Ok(merkle::prove(&leaves, version as usize - 1).unwrap())
    }
}

/// Re-export: proofs are self-contained, so verification is the plain
/// Merkle check.
pub use crate::merkle::verify as verify_proof;

/// Salt length for commitments, in bytes.
pub const SALT_LEN: usize = 32;

pub type Salt = [u8; SALT_LEN];

/// Salted-hash commitment: digest = H(salt ‖ content). Only the digest goes
/// on-chain; holding the salt and content is what lets a counterparty check
/// a reveal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commitment {
    pub digest: Hash256,
    #[serde(with = "salt_hex")]
    pub salt: Salt,
}

pub mod salt_hex {
    use super::{Salt, SALT_LEN};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(salt: &Salt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(salt))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Salt, D::Error> {
        let s = String::deserialize(d)?;
        let bytes = hex::decode(&s).map_err(de::Error::custom)?;
        let arr: Salt = bytes
            .try_into()
            .map_err(|_| de::Error::custom(format!("salt must be {SALT_LEN} bytes")))?;
        Ok(arr)
    }
}

fn commitment_digest(salt: &Salt, content: &[u8]) -> Hash256 {
    let mut buf = Vec::with_capacity(SALT_LEN + content.len());
    buf.extend_from_slice(salt);
    buf.extend_from_slice(content);
    hash_bytes(&buf)
}

/// Commits to content under a fresh salt from the run's seeded generator.
pub fn commit(content: &[u8], rng: &mut impl RngCore) -> Commitment {
    let mut salt = [0u8; SALT_LEN];
    rng.fill_bytes(&mut salt);
    Commitment {
        digest: commitment_digest(&salt, content),
        salt,
    }
}

/// True iff (salt, content) opens the digest.
pub fn verify_reveal(digest: Hash256, salt: &Salt, content: &[u8]) -> bool {
    commitment_digest(salt, content) == digest
}
