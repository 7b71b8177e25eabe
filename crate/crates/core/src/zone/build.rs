use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dnssec::{key_tag, make_ds, sign_rrset_with, KeyPair, KeyRole, DIGEST_SHA256};
use crate::wire::{DnsName, Dnskey, Ds, Rdata, RecordType, ResourceRecord};
use crate::zone::{DsPolicy, ZoneConfig, ZoneError};

pub const DNSKEY_TTL: u32 = 3600;
pub const DS_TTL: u32 = 3600;
/// Signatures are made valid from an hour before `now` ...
pub const INCEPTION_SKEW: u64 = 3600;
/// ... until two weeks after it.
pub const SIGNATURE_LIFETIME: u64 = 14 * 24 * 3600;

/// An RRset with the signatures covering it (possibly none).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedRrset {
    pub records: Vec<ResourceRecord>,
    pub rrsigs: Vec<ResourceRecord>,
}

#[derive(Debug, Clone)]
pub struct SignedZone {
    pub config: ZoneConfig,
    pub keys: Vec<KeyPair>,
    /// Authoritative data, the DNSKEY RRset, delegation NS and glue, and the
    /// DS RRsets this zone publishes for its children.
    pub rrsets: BTreeMap<(DnsName, RecordType), SignedRrset>,
    /// The DS RRset the parent serves for this zone. Empty when the parent
    /// publishes none or the zone is the top of the tree.
    pub ds_published: Vec<Ds>,
}

impl SignedZone {
    pub fn apex(&self) -> &DnsName {
        &self.config.apex
    }

    pub fn is_signed(&self) -> bool {
        !self.keys.is_empty()
    }

    pub fn rrset(&self, owner: &DnsName, rtype: RecordType) -> Option<&SignedRrset> {
        self.rrsets.get(&(owner.clone(), rtype))
    }

    pub fn dnskeys(&self) -> Vec<Dnskey> {
        self.keys.iter().map(|k| k.dnskey().clone()).collect()
    }

    pub fn ksks(&self) -> impl Iterator<Item = &KeyPair> {
        self.keys.iter().filter(|k| k.role() == KeyRole::Ksk)
    }

    /// The child apex whose delegation covers `name`, if any.
    pub fn delegation_for(&self, name: &DnsName) -> Option<&DnsName> {
        self.config.children.iter().map(|c| &c.apex).find(|apex| name.is_subdomain_of(apex))
    }

    /// One DS per KSK (every key when there is no KSK), as a parent would
    /// publish them for this zone.
    pub fn derived_ds(&self) -> Result<Vec<Ds>, ZoneError> {
        let mut signing: Vec<&KeyPair> = self.ksks().collect();
        if signing.is_empty() {
            signing = self.keys.iter().collect();
        }
        signing.into_iter().map(|k| make_ds(self.apex(), k.dnskey(), DIGEST_SHA256).map_err(ZoneError::from)).collect()
    }
}

/// Public view for printing; private key material stays out.
impl Serialize for SignedZone {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct KeyView<'a> {
            role: KeyRole,
            key_tag: u16,
            dnskey: &'a Dnskey,
        }
        #[derive(Serialize)]
        struct View<'a> {
            apex: &'a DnsName,
            keys: Vec<KeyView<'a>>,
            ds_published: &'a [Ds],
            rrsets: Vec<&'a SignedRrset>,
        }
        View {
            apex: self.apex(),
            keys: self
                .keys
                .iter()
                .map(|k| KeyView { role: k.role(), key_tag: key_tag(k.dnskey()), dnskey: k.dnskey() })
                .collect(),
            ds_published: &self.ds_published,
            rrsets: self.rrsets.values().collect(),
        }
        .serialize(s)
    }
}

fn validity(now: u64) -> (u32, u32) {
    let clamp = |v: u64| v.min(u32::MAX as u64) as u32;
    (clamp(now.saturating_sub(INCEPTION_SKEW)), clamp(now + SIGNATURE_LIFETIME))
}

/// First key of each algorithm among `keys`.
fn one_per_algorithm<'a>(keys: impl Iterator<Item = &'a KeyPair>) -> Vec<&'a KeyPair> {
    let mut seen = BTreeMap::new();
    for k in keys {
        seen.entry(k.algorithm()).or_insert(k);
    }
    seen.into_values().collect()
}

fn sign_with(
    records: Vec<ResourceRecord>,
    signers: &[&KeyPair],
    apex: &DnsName,
    (inception, expiration): (u32, u32),
) -> Result<SignedRrset, ZoneError> {
    let rrsigs = signers
        .iter()
        .map(|k| {
            let sig = sign_rrset_with(&records, k, apex, inception, expiration)?;
            Ok(ResourceRecord::new(records[0].name.clone(), records[0].ttl, Rdata::Rrsig(sig)))
        })
        .collect::<Result<_, ZoneError>>()?;
    Ok(SignedRrset { records, rrsigs })
}

/// Signs one zone. `child_ds` supplies the DS RRsets for children whose
/// policy is `FromChildKeys`.
pub fn build_zone(
    config: &ZoneConfig,
    keys: Vec<KeyPair>,
    child_ds: &BTreeMap<DnsName, Vec<Ds>>,
    now: u64,
) -> Result<SignedZone, ZoneError> {
    config.check()?;
    if config.records.is_empty() {
        return Err(ZoneError::EmptyZone(config.apex.clone()));
    }
    for spec in &config.keys {
        if !spec.algorithm.has_implementation() {
            return Err(ZoneError::UnsupportedAlgorithm(spec.algorithm));
        }
    }
    if let Some(k) = keys.iter().find(|k| !k.algorithm().has_implementation()) {
        return Err(ZoneError::UnsupportedAlgorithm(k.algorithm()));
    }
    let apex = &config.apex;
    let window = validity(now);

    let mut grouped: BTreeMap<(DnsName, RecordType), Vec<ResourceRecord>> = BTreeMap::new();
    for spec in &config.records {
        for rr in spec.records()? {
            grouped.entry((rr.name.clone(), rr.rtype())).or_default().push(rr);
        }
    }
    for child in &config.children {
        grouped.entry((child.apex.clone(), RecordType::NS)).or_insert_with(|| {
            let host = child.apex.prepend("ns").expect("child apex has room for one more label");
            vec![ResourceRecord::new(child.apex.clone(), DNSKEY_TTL, Rdata::Ns { host })]
        });
    }

    let ksks: Vec<&KeyPair> = keys.iter().filter(|k| k.role() == KeyRole::Ksk).collect();
    let zsks: Vec<&KeyPair> = keys.iter().filter(|k| k.role() == KeyRole::Zsk).collect();
    let key_signers = if ksks.is_empty() { keys.iter().collect() } else { ksks };
    let data_pool: Vec<&KeyPair> = if zsks.is_empty() { keys.iter().collect() } else { zsks };
    let data_signers = one_per_algorithm(data_pool.into_iter());

    let mut rrsets = BTreeMap::new();
    for ((owner, rtype), records) in grouped {
        let below_cut = config.children.iter().any(|c| owner.is_subdomain_of(&c.apex));
        let signed = if below_cut || keys.is_empty() {
            SignedRrset { records, rrsigs: vec![] }
        } else {
            sign_with(records, &data_signers, apex, window)?
        };
        rrsets.insert((owner, rtype), signed);
    }

    if !keys.is_empty() {
        let dnskeys: Vec<ResourceRecord> = keys
            .iter()
            .map(|k| ResourceRecord::new(apex.clone(), DNSKEY_TTL, Rdata::Dnskey(k.dnskey().clone())))
            .collect();
        rrsets.insert((apex.clone(), RecordType::DNSKEY), sign_with(dnskeys, &key_signers, apex, window)?);
    }

    for child in &config.children {
        let ds = match &child.ds {
            DsPolicy::Absent => continue,
            DsPolicy::Explicit(list) => list.clone(),
            DsPolicy::FromChildKeys => child_ds
                .get(&child.apex)
                .cloned()
                .ok_or_else(|| ZoneError::InvalidConfig(format!("no keys known for child {}", child.apex)))?,
        };
        if ds.is_empty() {
            continue;
        }
        let records: Vec<ResourceRecord> =
            ds.into_iter().map(|d| ResourceRecord::new(child.apex.clone(), DS_TTL, Rdata::Ds(d))).collect();
        let signed = if keys.is_empty() {
            SignedRrset { records, rrsigs: vec![] }
        } else {
            sign_with(records, &data_signers, apex, window)?
        };
        rrsets.insert((child.apex.clone(), RecordType::DS), signed);
    }

    Ok(SignedZone { config: config.clone(), keys, rrsets, ds_published: Vec::new() })
}

/// Where zone keys come from when building a tree.
#[derive(Debug, Clone)]
pub enum KeySource {
    /// Generated from a ChaCha20 stream seeded per zone from `seed` and the
    /// apex, so the same seed always gives the same keys.
    Seeded {
        seed: u64,
        rsa_bits: usize,
    },
    Supplied(BTreeMap<DnsName, Vec<KeyPair>>),
}

pub fn zone_rng(seed: u64, label: &[u8]) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(seed.to_be_bytes());
    h.update(label);
    ChaCha20Rng::from_seed(h.finalize().into())
}

fn keys_for(config: &ZoneConfig, source: &KeySource) -> Result<Vec<KeyPair>, ZoneError> {
    match source {
        KeySource::Supplied(map) => Ok(map.get(&config.apex).cloned().unwrap_or_default()),
        KeySource::Seeded { seed, rsa_bits } => {
            let mut rng = zone_rng(*seed, &config.apex.canonical_wire());
            config
                .keys
                .iter()
                .map(|spec| {
                    if !spec.algorithm.has_implementation() {
                        return Err(ZoneError::UnsupportedAlgorithm(spec.algorithm));
                    }
                    Ok(KeyPair::generate_with_rsa_bits(spec.algorithm, spec.role, *rsa_bits, &mut rng)?)
                })
                .collect()
        }
    }
}

/// A set of signed zones linked by delegations. Immutable once built.
#[derive(Debug, Clone, Serialize)]
pub struct ZoneTree {
    zones: Vec<SignedZone>,
}

impl ZoneTree {
    /// Builds every zone, deepest first so parents can publish DS records
    /// for their children's keys.
    pub fn build(configs: &[ZoneConfig], keys: &KeySource, now: u64) -> Result<ZoneTree, ZoneError> {
        let mut order: Vec<&ZoneConfig> = configs.iter().collect();
        order.sort_by_key(|c| std::cmp::Reverse(c.apex.label_count()));
        for pair in order.windows(2) {
            if pair[0].apex == pair[1].apex {
                return Err(ZoneError::InvalidConfig(format!("zone {} defined twice", pair[0].apex)));
            }
        }

        let mut built: BTreeMap<DnsName, SignedZone> = BTreeMap::new();
        for config in order {
            let mut child_ds = BTreeMap::new();
            for child in &config.children {
                if let Some(z) = built.get(&child.apex) {
                    child_ds.insert(child.apex.clone(), z.derived_ds()?);
                }
            }
            let zone = build_zone(config, keys_for(config, keys)?, &child_ds, now)?;
            for child in &config.children {
                if let Some(z) = built.get_mut(&child.apex) {
                    z.ds_published = zone
                        .rrset(&child.apex, RecordType::DS)
                        .map(|s| s.records.iter().filter_map(|r| r.as_ds().cloned()).collect())
                        .unwrap_or_default();
                }
            }
            built.insert(config.apex.clone(), zone);
        }
        Ok(ZoneTree { zones: built.into_values().collect() })
    }

    pub fn zones(&self) -> &[SignedZone] {
        &self.zones
    }

    pub fn zone(&self, apex: &DnsName) -> Option<&SignedZone> {
        self.zones.iter().find(|z| z.apex() == apex)
    }

    /// The shallowest zone, whose keys serve as the trust anchor.
    pub fn top(&self) -> Option<&SignedZone> {
        self.zones.iter().min_by_key(|z| z.apex().label_count())
    }

    /// The zone that answers `qname`/`qtype`: the deepest enclosing zone,
    /// except that DS at a child apex comes from the parent.
    pub fn authoritative_zone(&self, qname: &DnsName, qtype: RecordType) -> Option<&SignedZone> {
        let mut candidates: Vec<&SignedZone> = self.zones.iter().filter(|z| qname.is_subdomain_of(z.apex())).collect();
        candidates.sort_by_key(|z| std::cmp::Reverse(z.apex().label_count()));
        if qtype == RecordType::DS && candidates.len() > 1 && candidates[0].apex() == qname {
            return Some(candidates[1]);
        }
        candidates.first().copied()
    }
}
