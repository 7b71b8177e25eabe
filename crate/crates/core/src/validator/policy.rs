use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dnssec::{make_ds, AlgorithmSupport, DnssecError, DIGEST_SHA256};
use crate::wire::{DnsName, Dnskey, Ds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolicyName {
    #[serde(rename = "strict")]
    Strict,
    /// An RRSIG with an algorithm it cannot verify makes the RRset
    /// insecure instead of bogus.
    #[serde(rename = "v1-unknown-rrsig")]
    V1UnknownRrsig,
    /// Any unimplemented algorithm in a DS RRset makes the zone insecure,
    /// even when another DS is usable.
    #[serde(rename = "v2-unknown-ds")]
    V2UnknownDs,
    /// Bogus answers are returned with NOERROR and AD clear.
    #[serde(rename = "v3-bogus-passthrough")]
    V3BogusPassthrough,
    /// Validation is skipped when the RRSIG algorithms differ from the DS
    /// algorithms.
    #[serde(rename = "v4-alg-mismatch")]
    V4AlgMismatch,
}

impl PolicyName {
    pub const ALL: [PolicyName; 5] = [
        PolicyName::Strict,
        PolicyName::V1UnknownRrsig,
        PolicyName::V2UnknownDs,
        PolicyName::V3BogusPassthrough,
        PolicyName::V4AlgMismatch,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyName::Strict => "strict",
            PolicyName::V1UnknownRrsig => "v1-unknown-rrsig",
            PolicyName::V2UnknownDs => "v2-unknown-ds",
            PolicyName::V3BogusPassthrough => "v3-bogus-passthrough",
            PolicyName::V4AlgMismatch => "v4-alg-mismatch",
        }
    }
}

impl fmt::Display for PolicyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        PolicyName::ALL
            .into_iter()
            .find(|p| p.as_str() == s || p.as_str().split('-').next() == Some(s.as_str()))
            .ok_or_else(|| {
                let names: Vec<_> = PolicyName::ALL.iter().map(|p| p.as_str()).collect();
                format!("unknown policy {:?} (one of {})", s, names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValidatorPolicy {
    pub name: PolicyName,
    pub supported: AlgorithmSupport,
}

impl ValidatorPolicy {
    pub fn new(name: PolicyName, supported: AlgorithmSupport) -> Self {
        ValidatorPolicy { name, supported }
    }

    pub fn strict() -> Self {
        Self::new(PolicyName::Strict, AlgorithmSupport::default())
    }

    pub fn unknown_rrsig_is_insecure(&self) -> bool {
        self.name == PolicyName::V1UnknownRrsig
    }

    pub fn unknown_ds_is_insecure(&self) -> bool {
        self.name == PolicyName::V2UnknownDs
    }

    pub fn passes_bogus_through(&self) -> bool {
        self.name == PolicyName::V3BogusPassthrough
    }

    pub fn skips_on_algorithm_mismatch(&self) -> bool {
        self.name == PolicyName::V4AlgMismatch
    }

    pub fn digest_supported(&self, digest_type: u8) -> bool {
        digest_type == DIGEST_SHA256
    }

    pub fn ds_supported(&self, ds: &Ds) -> bool {
        self.supported.is_implemented(ds.algorithm) && self.digest_supported(ds.digest_type)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SecurityState {
    Secure,
    Insecure,
    Bogus,
    Indeterminate,
}

/// Trusted a priori, in DS form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustAnchor {
    pub zone: DnsName,
    pub ds: Vec<Ds>,
}

impl TrustAnchor {
    /// Anchors on the SEP keys among `keys` (all keys when none is SEP).
    pub fn from_dnskeys(zone: DnsName, keys: &[Dnskey]) -> Result<Self, DnssecError> {
        let sep: Vec<&Dnskey> = keys.iter().filter(|k| k.is_sep()).collect();
        let chosen: Vec<&Dnskey> = if sep.is_empty() { keys.iter().collect() } else { sep };
        let ds = chosen.into_iter().map(|k| make_ds(&zone, k, DIGEST_SHA256)).collect::<Result<_, _>>()?;
        Ok(TrustAnchor { zone, ds })
    }
}
