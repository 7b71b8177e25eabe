use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use crate::dnssec::{AlgorithmNumber, KeyRole};
use crate::wire::{DnsName, Ds, Rdata, RecordType, ResourceRecord, Soa};
use crate::zone::ZoneError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeySpec {
    pub algorithm: AlgorithmNumber,
    pub role: KeyRole,
}

/// One RRset in presentation form, e.g. `{"owner": "www.example.", "type":
/// "A", "ttl": 300, "data": ["192.0.2.1"]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordSpec {
    pub owner: DnsName,
    #[serde(rename = "type")]
    pub rtype: RecordType,
    pub ttl: u32,
    pub data: Vec<String>,
}

impl RecordSpec {
    pub fn records(&self) -> Result<Vec<ResourceRecord>, ZoneError> {
        self.data
            .iter()
            .map(|d| {
                parse_rdata(self.rtype, d)
                    .map(|rdata| ResourceRecord::new(self.owner.clone(), self.ttl, rdata))
                    .map_err(|e| ZoneError::InvalidConfig(format!("{} {}: {}", self.owner, self.rtype, e)))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", content = "records", rename_all = "kebab-case")]
pub enum DsPolicy {
    /// One SHA-256 DS per child KSK.
    FromChildKeys,
    Explicit(Vec<Ds>),
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChildSpec {
    pub apex: DnsName,
    pub ds: DsPolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneConfig {
    pub apex: DnsName,
    #[serde(default)]
    pub keys: Vec<KeySpec>,
    pub records: Vec<RecordSpec>,
    #[serde(default)]
    pub children: Vec<ChildSpec>,
}

impl ZoneConfig {
    pub fn check(&self) -> Result<(), ZoneError> {
        for r in &self.records {
            if !r.owner.is_subdomain_of(&self.apex) {
                return Err(ZoneError::InvalidConfig(format!("{} is outside zone {}", r.owner, self.apex)));
            }
        }
        for c in &self.children {
            if c.apex == self.apex || !c.apex.is_subdomain_of(&self.apex) {
                return Err(ZoneError::InvalidConfig(format!("{} is not below {}", c.apex, self.apex)));
            }
        }
        Ok(())
    }
}

/// Parses the rdata presentation forms the zone config accepts: A, NS, SOA
/// and the generic `\# <len> <hex>` form for anything else.
pub fn parse_rdata(rtype: RecordType, text: &str) -> Result<Rdata, String> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.first() == Some(&"\\#") {
        let len: usize = fields.get(1).ok_or("missing length")?.parse().map_err(|e| format!("{}", e))?;
        let data = hex::decode(fields[2..].concat()).map_err(|e| e.to_string())?;
        if data.len() != len {
            return Err(format!("length {} does not match {} bytes of data", len, data.len()));
        }
        if rtype.is_typed() {
            return Err(format!("generic form not accepted for {}", rtype));
        }
        return Ok(Rdata::Opaque { rtype, data });
    }
    let name = |s: &str| s.parse::<DnsName>().map_err(|e| e.to_string());
    let num = |s: &str| s.parse::<u32>().map_err(|e| e.to_string());
    match (rtype, fields.as_slice()) {
        (RecordType::A, [addr]) => Ok(Rdata::A { address: addr.parse::<Ipv4Addr>().map_err(|e| e.to_string())? }),
        (RecordType::NS, [host]) => Ok(Rdata::Ns { host: name(host)? }),
        (RecordType::SOA, [m, r, serial, refresh, retry, expire, minimum]) => Ok(Rdata::Soa(Soa {
            mname: name(m)?,
            rname: name(r)?,
            serial: num(serial)?,
            refresh: num(refresh)?,
            retry: num(retry)?,
            expire: num(expire)?,
            minimum: num(minimum)?,
        })),
        _ => Err(format!("cannot parse {:?} as {}", text, rtype)),
    }
}
