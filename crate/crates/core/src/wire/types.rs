use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::dnssec::AlgorithmNumber;
use crate::wire::DnsName;

/// Serialized by mnemonic ("A", "DNSKEY", "TYPE65280").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RecordType(pub u16);

impl RecordType {
    pub const A: RecordType = RecordType(1);
    pub const NS: RecordType = RecordType(2);
    pub const SOA: RecordType = RecordType(6);
    pub const OPT: RecordType = RecordType(41);
    pub const DS: RecordType = RecordType(43);
    pub const RRSIG: RecordType = RecordType(46);
    pub const DNSKEY: RecordType = RecordType(48);

    /// Types with a typed rdata representation. Everything else is opaque.
    pub fn is_typed(self) -> bool {
        matches!(self.0, 1 | 2 | 6 | 41 | 43 | 46 | 48)
    }
}

impl fmt::Display for RecordType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RecordType::A => f.write_str("A"),
            RecordType::NS => f.write_str("NS"),
            RecordType::SOA => f.write_str("SOA"),
            RecordType::OPT => f.write_str("OPT"),
            RecordType::DS => f.write_str("DS"),
            RecordType::RRSIG => f.write_str("RRSIG"),
            RecordType::DNSKEY => f.write_str("DNSKEY"),
            RecordType(other) => write!(f, "TYPE{}", other),
        }
    }
}

impl FromStr for RecordType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.to_ascii_uppercase();
        Ok(match upper.as_str() {
            "A" => RecordType::A,
            "NS" => RecordType::NS,
            "SOA" => RecordType::SOA,
            "OPT" => RecordType::OPT,
            "DS" => RecordType::DS,
            "RRSIG" => RecordType::RRSIG,
            "DNSKEY" => RecordType::DNSKEY,
            _ => upper
                .strip_prefix("TYPE")
                .and_then(|n| n.parse().ok())
                .map(RecordType)
                .ok_or_else(|| format!("unknown record type {:?}", s))?,
        })
    }
}

impl TryFrom<String> for RecordType {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<RecordType> for String {
    fn from(t: RecordType) -> Self {
        t.to_string()
    }
}

pub const CLASS_IN: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rcode(pub u8);

impl Rcode {
    pub const NOERROR: Rcode = Rcode(0);
    pub const FORMERR: Rcode = Rcode(1);
    pub const SERVFAIL: Rcode = Rcode(2);
    pub const NXDOMAIN: Rcode = Rcode(3);
    pub const REFUSED: Rcode = Rcode(5);
}

impl fmt::Display for Rcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Rcode::NOERROR => f.write_str("NOERROR"),
            Rcode::FORMERR => f.write_str("FORMERR"),
            Rcode::SERVFAIL => f.write_str("SERVFAIL"),
            Rcode::NXDOMAIN => f.write_str("NXDOMAIN"),
            Rcode::REFUSED => f.write_str("REFUSED"),
            Rcode(other) => write!(f, "RCODE{}", other),
        }
    }
}

pub mod b64 {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&BASE64.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        BASE64.decode(s.as_bytes()).map_err(serde::de::Error::custom)
    }
}

mod hexbytes {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode_upper(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Soa {
    pub mname: DnsName,
    pub rname: DnsName,
    pub serial: u32,
    pub refresh: u32,
    pub retry: u32,
    pub expire: u32,
    pub minimum: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dnskey {
    pub flags: u16,
    pub protocol: u8,
    pub algorithm: AlgorithmNumber,
    #[serde(with = "b64")]
    pub public_key: Vec<u8>,
}

impl Dnskey {
    pub const ZONE_KEY: u16 = 0x0100;
    pub const SEP: u16 = 0x0001;

    pub fn is_zone_key(&self) -> bool {
        self.flags & Self::ZONE_KEY != 0
    }

    pub fn is_sep(&self) -> bool {
        self.flags & Self::SEP != 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ds {
    pub key_tag: u16,
    pub algorithm: AlgorithmNumber,
    pub digest_type: u8,
    #[serde(with = "hexbytes")]
    pub digest: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rrsig {
    pub type_covered: RecordType,
    pub algorithm: AlgorithmNumber,
    pub labels: u8,
    pub original_ttl: u32,
    pub expiration: u32,
    pub inception: u32,
    pub key_tag: u16,
    pub signer_name: DnsName,
    #[serde(with = "b64")]
    pub signature: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Rdata {
    A {
        address: Ipv4Addr,
    },
    Ns {
        host: DnsName,
    },
    Soa(Soa),
    Dnskey(Dnskey),
    Ds(Ds),
    Rrsig(Rrsig),
    /// Any rrtype without a typed representation, kept byte-for-byte.
    /// `rtype` must not be one of the typed codes.
    Opaque {
        rtype: RecordType,
        #[serde(with = "b64")]
        data: Vec<u8>,
    },
}

impl Rdata {
    pub fn rtype(&self) -> RecordType {
        match self {
            Rdata::A { .. } => RecordType::A,
            Rdata::Ns { .. } => RecordType::NS,
            Rdata::Soa(_) => RecordType::SOA,
            Rdata::Dnskey(_) => RecordType::DNSKEY,
            Rdata::Ds(_) => RecordType::DS,
            Rdata::Rrsig(_) => RecordType::RRSIG,
            Rdata::Opaque { rtype, .. } => *rtype,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResourceRecord {
    pub name: DnsName,
    pub class: u16,
    pub ttl: u32,
    pub rdata: Rdata,
}

impl ResourceRecord {
    pub fn new(name: DnsName, ttl: u32, rdata: Rdata) -> Self {
        ResourceRecord { name, class: CLASS_IN, ttl, rdata }
    }

    pub fn rtype(&self) -> RecordType {
        self.rdata.rtype()
    }

    /// The type this record belongs to for RRset grouping: an RRSIG is
    /// grouped with the type it covers.
    pub fn covered_type(&self) -> RecordType {
        match &self.rdata {
            Rdata::Rrsig(sig) => sig.type_covered,
            other => other.rtype(),
        }
    }

    pub fn as_rrsig(&self) -> Option<&Rrsig> {
        match &self.rdata {
            Rdata::Rrsig(sig) => Some(sig),
            _ => None,
        }
    }

    pub fn as_ds(&self) -> Option<&Ds> {
        match &self.rdata {
            Rdata::Ds(ds) => Some(ds),
            _ => None,
        }
    }

    pub fn as_dnskey(&self) -> Option<&Dnskey> {
        match &self.rdata {
            Rdata::Dnskey(key) => Some(key),
            _ => None,
        }
    }
}

impl fmt::Display for Rdata {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rdata::A { address } => write!(f, "{}", address),
            Rdata::Ns { host } => write!(f, "{}", host),
            Rdata::Soa(soa) => write!(
                f,
                "{} {} {} {} {} {} {}",
                soa.mname, soa.rname, soa.serial, soa.refresh, soa.retry, soa.expire, soa.minimum
            ),
            Rdata::Dnskey(key) => {
                write!(f, "{} {} {} {}", key.flags, key.protocol, key.algorithm, BASE64.encode(&key.public_key))
            }
            Rdata::Ds(ds) => {
                write!(f, "{} {} {} {}", ds.key_tag, ds.algorithm, ds.digest_type, hex::encode_upper(&ds.digest))
            }
            Rdata::Rrsig(sig) => write!(
                f,
                "{} {} {} {} {} {} {} {} {}",
                sig.type_covered,
                sig.algorithm,
                sig.labels,
                sig.original_ttl,
                sig.expiration,
                sig.inception,
                sig.key_tag,
                sig.signer_name,
                BASE64.encode(&sig.signature)
            ),
            Rdata::Opaque { data, .. } => write!(f, "\\# {} {}", data.len(), hex::encode(data)),
        }
    }
}

impl fmt::Display for ResourceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let class = if self.class == CLASS_IN { "IN".to_string() } else { format!("CLASS{}", self.class) };
        write!(f, "{} {} {} {} {}", self.name, self.ttl, class, self.rtype(), self.rdata)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Question {
    pub name: DnsName,
    pub rtype: RecordType,
    pub class: u16,
}

impl Question {
    pub fn new(name: DnsName, rtype: RecordType) -> Self {
        Question { name, rtype, class: CLASS_IN }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Flags {
    pub qr: bool,
    pub aa: bool,
    pub tc: bool,
    pub rd: bool,
    pub ra: bool,
    pub ad: bool,
    pub cd: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdnsOption {
    pub code: u16,
    #[serde(with = "b64")]
    pub data: Vec<u8>,
}

/// The EDNS0 OPT pseudo-record. The encoder emits exactly one OPT in the
/// additional section whenever this is present.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edns {
    pub udp_payload_size: u16,
    pub extended_rcode: u8,
    pub version: u8,
    pub dnssec_ok: bool,
    pub options: Vec<EdnsOption>,
}

impl Edns {
    pub fn with_do(udp_payload_size: u16) -> Self {
        Edns { udp_payload_size, extended_rcode: 0, version: 0, dnssec_ok: true, options: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Section {
    Answer,
    Authority,
    Additional,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DnsMessage {
    pub id: u16,
    pub opcode: u8,
    pub flags: Flags,
    pub rcode: Rcode,
    pub questions: Vec<Question>,
    pub answers: Vec<ResourceRecord>,
    pub authority: Vec<ResourceRecord>,
    pub additional: Vec<ResourceRecord>,
    pub edns: Option<Edns>,
}

impl DnsMessage {
    /// A standard query with one question, DO set when `dnssec_ok`.
    pub fn query(id: u16, name: DnsName, rtype: RecordType, dnssec_ok: bool) -> Self {
        DnsMessage {
            id,
            opcode: 0,
            flags: Flags::default(),
            rcode: Rcode::NOERROR,
            questions: vec![Question::new(name, rtype)],
            answers: Vec::new(),
            authority: Vec::new(),
            additional: Vec::new(),
            edns: dnssec_ok.then(|| Edns::with_do(1232)),
        }
    }

    /// An empty response echoing the id, opcode, RD bit, question and EDNS
    /// presence of `query`.
    pub fn response_to(query: &DnsMessage) -> Self {
        DnsMessage {
            id: query.id,
            opcode: query.opcode,
            flags: Flags { qr: true, rd: query.flags.rd, ..Flags::default() },
            rcode: Rcode::NOERROR,
            questions: query.questions.clone(),
            answers: Vec::new(),
            authority: Vec::new(),
            additional: Vec::new(),
            edns: query.edns.as_ref().map(|e| Edns {
                udp_payload_size: 1232,
                extended_rcode: 0,
                version: 0,
                dnssec_ok: e.dnssec_ok,
                options: Vec::new(),
            }),
        }
    }

    pub fn question(&self) -> Option<&Question> {
        self.questions.first()
    }

    pub fn dnssec_ok(&self) -> bool {
        self.edns.as_ref().is_some_and(|e| e.dnssec_ok)
    }

    pub fn section(&self, section: Section) -> &Vec<ResourceRecord> {
        match section {
            Section::Answer => &self.answers,
            Section::Authority => &self.authority,
            Section::Additional => &self.additional,
        }
    }

    pub fn section_mut(&mut self, section: Section) -> &mut Vec<ResourceRecord> {
        match section {
            Section::Answer => &mut self.answers,
            Section::Authority => &mut self.authority,
            Section::Additional => &mut self.additional,
        }
    }
}
