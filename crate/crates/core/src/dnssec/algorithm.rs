use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dnssec::DnssecError;

/// An 8-bit DNSSEC algorithm number as carried in DNSKEY, DS and RRSIG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlgorithmNumber(pub u8);

impl AlgorithmNumber {
    pub const RSASHA1: AlgorithmNumber = AlgorithmNumber(5);
    pub const RSASHA256: AlgorithmNumber = AlgorithmNumber(8);
    pub const ECDSAP256SHA256: AlgorithmNumber = AlgorithmNumber(13);
    pub const ED25519: AlgorithmNumber = AlgorithmNumber(15);
    pub const ED448: AlgorithmNumber = AlgorithmNumber(16);

    /// Value used by mutations that need "an algorithm nobody knows".
    pub const DEFAULT_UNKNOWN: AlgorithmNumber = AlgorithmNumber(100);

    /// Whether the number is assigned in the IANA DNSSEC algorithm registry.
    pub fn is_registered(self) -> bool {
        matches!(self.0, 1 | 2 | 3 | 5 | 6 | 7 | 8 | 10 | 12 | 13 | 14 | 15 | 16 | 17 | 23 | 252 | 253 | 254)
    }

    /// Whether this testbed has signing and verification code for it.
    pub fn has_implementation(self) -> bool {
        matches!(self.0, 8 | 13 | 15)
    }

    pub fn mnemonic(self) -> Option<&'static str> {
        Some(match self.0 {
            1 => "RSAMD5",
            3 => "DSA",
            5 => "RSASHA1",
            6 => "DSA-NSEC3-SHA1",
            7 => "RSASHA1-NSEC3-SHA1",
            8 => "RSASHA256",
            10 => "RSASHA512",
            12 => "ECC-GOST",
            13 => "ECDSAP256SHA256",
            14 => "ECDSAP384SHA384",
            15 => "ED25519",
            16 => "ED448",
            _ => return None,
        })
    }
}

impl fmt::Display for AlgorithmNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for AlgorithmNumber {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim().parse().map(AlgorithmNumber)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmClass {
    Implemented,
    KnownUnimplemented,
    Unknown,
}

/// The set of algorithms a validator (or the testbed signer) treats as
/// implemented. Only algorithms the testbed has code for may be included;
/// narrowing the set models resolvers that lack e.g. Ed25519.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<AlgorithmNumber>", into = "Vec<AlgorithmNumber>")]
pub struct AlgorithmSupport {
    implemented: BTreeSet<AlgorithmNumber>,
}

impl AlgorithmSupport {
    pub fn new<I: IntoIterator<Item = AlgorithmNumber>>(algorithms: I) -> Result<Self, DnssecError> {
        let implemented: BTreeSet<_> = algorithms.into_iter().collect();
        if let Some(bad) = implemented.iter().find(|a| !a.has_implementation()) {
            return Err(DnssecError::UnsupportedAlgorithm(*bad));
        }
        Ok(AlgorithmSupport { implemented })
    }

    /// {8, 13, 15}: everything the testbed can sign and verify.
    pub fn full() -> Self {
        AlgorithmSupport { implemented: [8, 13, 15].into_iter().map(AlgorithmNumber).collect() }
    }

    /// {8, 13}: a resolver that validates RSA and ECDSA but neither EdDSA
    /// variant.
    pub fn without_eddsa() -> Self {
        AlgorithmSupport { implemented: [8, 13].into_iter().map(AlgorithmNumber).collect() }
    }

    pub fn classify(&self, alg: AlgorithmNumber) -> AlgorithmClass {
        if self.implemented.contains(&alg) {
            AlgorithmClass::Implemented
        } else if alg.is_registered() {
            AlgorithmClass::KnownUnimplemented
        } else {
            AlgorithmClass::Unknown
        }
    }

    pub fn is_implemented(&self, alg: AlgorithmNumber) -> bool {
        self.implemented.contains(&alg)
    }

    pub fn algorithms(&self) -> impl Iterator<Item = AlgorithmNumber> + '_ {
        self.implemented.iter().copied()
    }
}

impl Default for AlgorithmSupport {
    fn default() -> Self {
        AlgorithmSupport::full()
    }
}

impl TryFrom<Vec<AlgorithmNumber>> for AlgorithmSupport {
    type Error = DnssecError;

    fn try_from(v: Vec<AlgorithmNumber>) -> Result<Self, Self::Error> {
        AlgorithmSupport::new(v)
    }
}

impl From<AlgorithmSupport> for Vec<AlgorithmNumber> {
    fn from(s: AlgorithmSupport) -> Self {
        s.implemented.into_iter().collect()
    }
}

impl fmt::Display for AlgorithmSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list: Vec<String> = self.implemented.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", list.join(","))
    }
}

impl FromStr for AlgorithmSupport {
    type Err = String;

    /// Comma-separated algorithm numbers, e.g. `8,13`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let algs = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.parse::<AlgorithmNumber>().map_err(|e| format!("{:?}: {}", p, e)))
            .collect::<Result<Vec<_>, _>>()?;
        AlgorithmSupport::new(algs).map_err(|e| e.to_string())
    }
}

/// Classifies `alg` against the default support set {8, 13, 15}.
pub fn classify_algorithm(alg: AlgorithmNumber) -> AlgorithmClass {
    AlgorithmSupport::default().classify(alg)
}
