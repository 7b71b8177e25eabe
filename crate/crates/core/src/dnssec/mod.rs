//! DNSSEC primitives: the algorithm registry, key material, canonical
//! RRset form, key tags, DS digests, and RRSIG signing and verification.

mod algorithm;
mod keys;
mod sign;

use thiserror::Error;

pub use algorithm::{classify_algorithm, AlgorithmClass, AlgorithmNumber, AlgorithmSupport};
pub use keys::{KeyPair, KeyRole, DEFAULT_RSA_BITS};
pub use sign::{
    canonical_rrset, ds_digest_input, key_tag, make_ds, sign_rrset, sign_rrset_with, signed_data, verify_rrsig,
    RrsigMeta, Verification, DIGEST_SHA256,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DnssecError {
    #[error("algorithm {0} is not implemented")]
    UnsupportedAlgorithm(AlgorithmNumber),
    #[error("DS digest type {0} is not supported")]
    UnsupportedDigestType(u8),
    #[error("records disagree on owner, type or class")]
    MixedRrset,
    #[error("empty RRset")]
    EmptyRrset,
    #[error("RRSIG metadata mismatch: {0}")]
    MetaMismatch(String),
    #[error("bad key material: {0}")]
    Key(String),
    #[error("signing failed: {0}")]
    Crypto(String),
}
