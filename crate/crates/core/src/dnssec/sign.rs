use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dnssec::keys::verify_signature;
use crate::dnssec::{AlgorithmClass, AlgorithmSupport, DnssecError, KeyPair};
use crate::wire::{
    rdata_wire, write_dnskey_rdata, write_rrsig_prefix, DnsName, Dnskey, Ds, Rdata, ResourceRecord, Rrsig,
};

pub const DIGEST_SHA256: u8 = 2;

/// RFC 4034 Appendix B checksum over the DNSKEY rdata.
pub fn key_tag(key: &Dnskey) -> u16 {
    let mut rdata = Vec::with_capacity(4 + key.public_key.len());
    write_dnskey_rdata(&mut rdata, key);
    if key.algorithm.0 == 1 {
        // RSA/MD5: the tag is taken from the modulus instead
        let n = rdata.len();
        return if n >= 4 { u16::from_be_bytes([rdata[n - 3], rdata[n - 2]]) } else { 0 };
    }
    let mut acc: u32 = 0;
    for (i, &b) in rdata.iter().enumerate() {
        acc += if i & 1 == 1 { b as u32 } else { (b as u32) << 8 };
    }
    acc += (acc >> 16) & 0xFFFF;
    (acc & 0xFFFF) as u16
}

/// The bytes a DS digest is computed over: canonical owner name followed
/// by the DNSKEY rdata.
pub fn ds_digest_input(owner: &DnsName, key: &Dnskey) -> Vec<u8> {
    let mut data = owner.canonical_wire();
    write_dnskey_rdata(&mut data, key);
    data
}

pub fn make_ds(owner: &DnsName, key: &Dnskey, digest_type: u8) -> Result<Ds, DnssecError> {
    if digest_type != DIGEST_SHA256 {
        return Err(DnssecError::UnsupportedDigestType(digest_type));
    }
    Ok(Ds {
        key_tag: key_tag(key),
        algorithm: key.algorithm,
        digest_type,
        digest: Sha256::digest(ds_digest_input(owner, key)).to_vec(),
    })
}

/// Canonical rdata: uncompressed, with embedded domain names lowercased for
/// the types that require it (NS, SOA, RRSIG signer).
fn canonical_rdata(rdata: &Rdata) -> Vec<u8> {
    match rdata {
        Rdata::Ns { host } => rdata_wire(&Rdata::Ns { host: host.to_lowercase() }),
        Rdata::Soa(soa) => {
            let mut soa = soa.clone();
            soa.mname = soa.mname.to_lowercase();
            soa.rname = soa.rname.to_lowercase();
            rdata_wire(&Rdata::Soa(soa))
        }
        Rdata::Rrsig(sig) => {
            let mut sig = sig.clone();
            sig.signer_name = sig.signer_name.to_lowercase();
            rdata_wire(&Rdata::Rrsig(sig))
        }
        other => rdata_wire(other),
    }
}

fn canonical_forms(rrset: &[ResourceRecord], ttl: Option<u32>) -> Result<Vec<Vec<u8>>, DnssecError> {
    let first = rrset.first().ok_or(DnssecError::EmptyRrset)?;
    let (name, rtype, class) = (&first.name, first.rtype(), first.class);
    if rrset.iter().any(|rr| &rr.name != name || rr.rtype() != rtype || rr.class != class) {
        return Err(DnssecError::MixedRrset);
    }
    let mut rdatas: Vec<Vec<u8>> = rrset.iter().map(|rr| canonical_rdata(&rr.rdata)).collect();
    rdatas.sort();
    rdatas.dedup();
    let owner = name.canonical_wire();
    let ttl = ttl.unwrap_or(first.ttl);
    Ok(rdatas
        .into_iter()
        .map(|rdata| {
            let mut form = Vec::with_capacity(owner.len() + 10 + rdata.len());
            form.extend_from_slice(&owner);
            form.extend_from_slice(&rtype.0.to_be_bytes());
            form.extend_from_slice(&class.to_be_bytes());
            form.extend_from_slice(&ttl.to_be_bytes());
            form.extend_from_slice(&(rdata.len() as u16).to_be_bytes());
            form.extend_from_slice(&rdata);
            form
        })
        .collect())
}

/// Canonical wire forms of an RRset, ordered by rdata with duplicates
/// removed.
pub fn canonical_rrset(rrset: &[ResourceRecord]) -> Result<Vec<Vec<u8>>, DnssecError> {
    canonical_forms(rrset, None)
}

/// The exact byte string an RRSIG signature covers.
pub fn signed_data(rrset: &[ResourceRecord], sig: &Rrsig) -> Result<Vec<u8>, DnssecError> {
    let mut prefix_sig = sig.clone();
    prefix_sig.signer_name = sig.signer_name.to_lowercase();
    let mut data = Vec::with_capacity(512);
    write_rrsig_prefix(&mut data, &prefix_sig);
    for form in canonical_forms(rrset, Some(sig.original_ttl))? {
        data.extend_from_slice(&form);
    }
    Ok(data)
}

/// RRSIG fields other than the signature itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RrsigMeta {
    pub type_covered: crate::wire::RecordType,
    pub algorithm: crate::dnssec::AlgorithmNumber,
    pub labels: u8,
    pub original_ttl: u32,
    pub expiration: u32,
    pub inception: u32,
    pub key_tag: u16,
    pub signer_name: DnsName,
}

impl RrsigMeta {
    /// Metadata for signing `rrset` with `key` on behalf of `signer`.
    pub fn for_rrset(
        rrset: &[ResourceRecord],
        key: &KeyPair,
        signer: &DnsName,
        inception: u32,
        expiration: u32,
    ) -> Result<Self, DnssecError> {
        let first = rrset.first().ok_or(DnssecError::EmptyRrset)?;
        Ok(RrsigMeta {
            type_covered: first.rtype(),
            algorithm: key.algorithm(),
            labels: first.name.label_count(),
            original_ttl: first.ttl,
            expiration,
            inception,
            key_tag: key_tag(key.dnskey()),
            signer_name: signer.clone(),
        })
    }

    fn into_rrsig(self, signature: Vec<u8>) -> Rrsig {
        Rrsig {
            type_covered: self.type_covered,
            algorithm: self.algorithm,
            labels: self.labels,
            original_ttl: self.original_ttl,
            expiration: self.expiration,
            inception: self.inception,
            key_tag: self.key_tag,
            signer_name: self.signer_name,
            signature,
        }
    }
}

pub fn sign_rrset(rrset: &[ResourceRecord], meta: RrsigMeta, key: &KeyPair) -> Result<Rrsig, DnssecError> {
    if !key.algorithm().has_implementation() {
        return Err(DnssecError::UnsupportedAlgorithm(key.algorithm()));
    }
    let first = rrset.first().ok_or(DnssecError::EmptyRrset)?;
    let mismatch = |what: &str| Err(DnssecError::MetaMismatch(what.to_string()));
    if meta.algorithm != key.algorithm() {
        return mismatch("algorithm differs from the key");
    }
    if meta.key_tag != key_tag(key.dnskey()) {
        return mismatch("key tag differs from the key");
    }
    if meta.type_covered != first.rtype() {
        return mismatch("type covered differs from the RRset");
    }
    if meta.labels != first.name.label_count() {
        return mismatch("labels differs from the owner label count");
    }
    if !first.name.is_subdomain_of(&meta.signer_name) {
        return mismatch("owner is not within the signer's zone");
    }
    if meta.inception > meta.expiration {
        return mismatch("inception after expiration");
    }
    let unsigned = meta.into_rrsig(Vec::new());
    let data = signed_data(rrset, &unsigned)?;
    let signature = key.sign_bytes(&data)?;
    Ok(Rrsig { signature, ..unsigned })
}

/// Signs `rrset` with `key`, deriving the metadata from the records.
pub fn sign_rrset_with(
    rrset: &[ResourceRecord],
    key: &KeyPair,
    signer: &DnsName,
    inception: u32,
    expiration: u32,
) -> Result<Rrsig, DnssecError> {
    let meta = RrsigMeta::for_rrset(rrset, key, signer, inception, expiration)?;
    sign_rrset(rrset, meta, key)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verification {
    Valid,
    InvalidSignature,
    OutsideValidity,
    AlgorithmUnsupported,
    AlgorithmUnknown,
    KeyMismatch,
}

/// Checks one RRSIG over `rrset` with one candidate key. Algorithms that
/// are not implemented under `support` are reported without attempting
/// any cryptography.
pub fn verify_rrsig(
    rrset: &[ResourceRecord],
    sig: &Rrsig,
    key: &Dnskey,
    now: u64,
    support: &AlgorithmSupport,
) -> Verification {
    match support.classify(sig.algorithm) {
        AlgorithmClass::Unknown => return Verification::AlgorithmUnknown,
        AlgorithmClass::KnownUnimplemented => return Verification::AlgorithmUnsupported,
        AlgorithmClass::Implemented => {}
    }
    let Some(first) = rrset.first() else {
        return Verification::InvalidSignature;
    };
    if key.algorithm != sig.algorithm
        || key.protocol != 3
        || !key.is_zone_key()
        || key_tag(key) != sig.key_tag
        || first.rtype() != sig.type_covered
        || first.name.label_count() != sig.labels
        || !first.name.is_subdomain_of(&sig.signer_name)
    {
        return Verification::KeyMismatch;
    }
    if now < sig.inception as u64 || now > sig.expiration as u64 {
        return Verification::OutsideValidity;
    }
    let Ok(data) = signed_data(rrset, sig) else {
        return Verification::InvalidSignature;
    };
    if verify_signature(key, &data, &sig.signature) {
        Verification::Valid
    } else {
        Verification::InvalidSignature
    }
}
