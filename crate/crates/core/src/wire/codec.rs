use std::collections::HashMap;
use std::net::Ipv4Addr;

use thiserror::Error;

use crate::dnssec::AlgorithmNumber;
use crate::wire::name::{DnsName, MAX_NAME_LEN};
use crate::wire::types::*;

/// Classic DNS-over-UDP limit for messages without EDNS.
pub const UDP_LEGACY_LIMIT: usize = 512;
pub const MAX_MESSAGE_LEN: usize = 65535;

const POINTER_MASK: u8 = 0xC0;
const MAX_POINTER_TARGET: usize = 0x3FFF;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("malformed message: {0}")]
    MalformedMessage(String),
    #[error("compression pointer loop at offset {0}")]
    CompressionLoop(usize),
    #[error("encoded message is {size} bytes, limit is {limit}")]
    MessageTooLarge { size: usize, limit: usize },
    #[error("invalid message field: {0}")]
    InvalidField(&'static str),
}

fn malformed(what: impl Into<String>) -> WireError {
    WireError::MalformedMessage(what.into())
}

struct Encoder {
    buf: Vec<u8>,
    // exact (case-sensitive) wire suffix -> offset of its first occurrence
    suffixes: HashMap<Vec<u8>, u16>,
}

impl Encoder {
    fn new() -> Self {
        Encoder { buf: Vec::with_capacity(512), suffixes: HashMap::new() }
    }

    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    /// Writes `name`, replacing the longest previously seen suffix with a
    /// pointer when `compress` is set. Compression matches bytes exactly so
    /// a decoded name keeps the case it was encoded with.
    fn name(&mut self, name: &DnsName, compress: bool) {
        let labels = name.labels();
        for i in 0..labels.len() {
            let mut key = Vec::new();
            for label in &labels[i..] {
                key.push(label.len() as u8);
                key.extend_from_slice(label);
            }
            if compress {
                if let Some(&offset) = self.suffixes.get(&key) {
                    self.u16(0xC000 | offset);
                    return;
                }
                let here = self.buf.len();
                if here <= MAX_POINTER_TARGET {
                    self.suffixes.insert(key, here as u16);
                }
            }
            self.u8(labels[i].len() as u8);
            self.buf.extend_from_slice(&labels[i]);
        }
        self.u8(0);
    }

    fn question(&mut self, q: &Question) {
        self.name(&q.name, true);
        self.u16(q.rtype.0);
        self.u16(q.class);
    }

    fn record(&mut self, rr: &ResourceRecord) -> Result<(), WireError> {
        if rr.rtype() == RecordType::OPT {
            return Err(WireError::InvalidField("OPT is carried in DnsMessage::edns"));
        }
        self.name(&rr.name, true);
        self.u16(rr.rtype().0);
        self.u16(rr.class);
        self.u32(rr.ttl);
        let len_at = self.buf.len();
        self.u16(0);
        self.rdata(&rr.rdata);
        let len = self.buf.len() - len_at - 2;
        if len > u16::MAX as usize {
            return Err(WireError::InvalidField("rdata longer than 65535 bytes"));
        }
        self.buf[len_at..len_at + 2].copy_from_slice(&(len as u16).to_be_bytes());
        Ok(())
    }

    fn rdata(&mut self, rdata: &Rdata) {
        match rdata {
            Rdata::A { address } => self.buf.extend_from_slice(&address.octets()),
            Rdata::Ns { host } => self.name(host, true),
            Rdata::Soa(soa) => {
                self.name(&soa.mname, true);
                self.name(&soa.rname, true);
                for v in [soa.serial, soa.refresh, soa.retry, soa.expire, soa.minimum] {
                    self.u32(v);
                }
            }
            Rdata::Dnskey(key) => write_dnskey_rdata(&mut self.buf, key),
            Rdata::Ds(ds) => write_ds_rdata(&mut self.buf, ds),
            Rdata::Rrsig(sig) => {
                write_rrsig_prefix(&mut self.buf, sig);
                self.buf.extend_from_slice(&sig.signature);
            }
            Rdata::Opaque { data, .. } => self.buf.extend_from_slice(data),
        }
    }

    fn opt(&mut self, edns: &Edns) {
        self.u8(0);
        self.u16(RecordType::OPT.0);
        self.u16(edns.udp_payload_size);
        self.u8(edns.extended_rcode);
        self.u8(edns.version);
        self.u16(if edns.dnssec_ok { 0x8000 } else { 0 });
        let len: usize = edns.options.iter().map(|o| 4 + o.data.len()).sum();
        self.u16(len as u16);
        for option in &edns.options {
            self.u16(option.code);
            self.u16(option.data.len() as u16);
            self.buf.extend_from_slice(&option.data);
        }
    }
}

/// DNSKEY rdata in wire form. Shared with key tag and DS digest computation.
pub fn write_dnskey_rdata(out: &mut Vec<u8>, key: &Dnskey) {
    out.extend_from_slice(&key.flags.to_be_bytes());
    out.push(key.protocol);
    out.push(key.algorithm.0);
    out.extend_from_slice(&key.public_key);
}

pub fn write_ds_rdata(out: &mut Vec<u8>, ds: &Ds) {
    out.extend_from_slice(&ds.key_tag.to_be_bytes());
    out.push(ds.algorithm.0);
    out.push(ds.digest_type);
    out.extend_from_slice(&ds.digest);
}

/// RRSIG rdata up to and including the signer name, which is never
/// compressed. This is also the prefix of the data a signature covers.
pub fn write_rrsig_prefix(out: &mut Vec<u8>, sig: &Rrsig) {
    out.extend_from_slice(&sig.type_covered.0.to_be_bytes());
    out.push(sig.algorithm.0);
    out.push(sig.labels);
    out.extend_from_slice(&sig.original_ttl.to_be_bytes());
    out.extend_from_slice(&sig.expiration.to_be_bytes());
    out.extend_from_slice(&sig.inception.to_be_bytes());
    out.extend_from_slice(&sig.key_tag.to_be_bytes());
    sig.signer_name.write_wire(out);
}

/// Uncompressed rdata wire form (the canonical form when names in it are
/// already lowercase).
pub fn rdata_wire(rdata: &Rdata) -> Vec<u8> {
    let mut out = Vec::new();
    match rdata {
        Rdata::A { address } => out.extend_from_slice(&address.octets()),
        Rdata::Ns { host } => host.write_wire(&mut out),
        Rdata::Soa(soa) => {
            soa.mname.write_wire(&mut out);
            soa.rname.write_wire(&mut out);
            for v in [soa.serial, soa.refresh, soa.retry, soa.expire, soa.minimum] {
                out.extend_from_slice(&v.to_be_bytes());
            }
        }
        Rdata::Dnskey(key) => write_dnskey_rdata(&mut out, key),
        Rdata::Ds(ds) => write_ds_rdata(&mut out, ds),
        Rdata::Rrsig(sig) => {
            write_rrsig_prefix(&mut out, sig);
            out.extend_from_slice(&sig.signature);
        }
        Rdata::Opaque { data, .. } => out.extend_from_slice(data),
    }
    out
}

fn check_invariants(msg: &DnsMessage) -> Result<(), WireError> {
    if msg.opcode > 0x0F {
        return Err(WireError::InvalidField("opcode exceeds 4 bits"));
    }
    if msg.rcode.0 > 0x0F {
        return Err(WireError::InvalidField("header rcode exceeds 4 bits; use edns.extended_rcode"));
    }
    if msg.questions.len() > u16::MAX as usize
        || msg.answers.len() > u16::MAX as usize
        || msg.authority.len() > u16::MAX as usize
        || msg.additional.len() >= u16::MAX as usize
    {
        return Err(WireError::InvalidField("section too long"));
    }
    Ok(())
}

/// Encodes `msg` with no size limit beyond the 65535-byte TCP maximum.
pub fn encode_message(msg: &DnsMessage) -> Result<Vec<u8>, WireError> {
    encode_with_limit(msg, MAX_MESSAGE_LEN, false)
}

/// Encodes `msg` for a transport that carries at most `limit` bytes. When
/// the full encoding does not fit and `truncate` is set, the answer,
/// authority and additional sections are dropped and TC is set; the OPT
/// record is kept. Without `truncate` an oversized message is an error.
pub fn encode_with_limit(msg: &DnsMessage, limit: usize, truncate: bool) -> Result<Vec<u8>, WireError> {
    check_invariants(msg)?;
    let full = encode_unchecked(msg)?;
    if full.len() <= limit {
        return Ok(full);
    }
    if !truncate {
        return Err(WireError::MessageTooLarge { size: full.len(), limit });
    }
    let mut cut = msg.clone();
    cut.flags.tc = true;
    cut.answers.clear();
    cut.authority.clear();
    cut.additional.clear();
    let bytes = encode_unchecked(&cut)?;
    if bytes.len() > limit {
        return Err(WireError::MessageTooLarge { size: bytes.len(), limit });
    }
    Ok(bytes)
}

fn encode_unchecked(msg: &DnsMessage) -> Result<Vec<u8>, WireError> {
    let mut enc = Encoder::new();
    enc.u16(msg.id);
    let f = &msg.flags;
    let hi = (f.qr as u8) << 7 | (msg.opcode & 0x0F) << 3 | (f.aa as u8) << 2 | (f.tc as u8) << 1 | f.rd as u8;
    let lo = (f.ra as u8) << 7 | (f.ad as u8) << 5 | (f.cd as u8) << 4 | (msg.rcode.0 & 0x0F);
    enc.u8(hi);
    enc.u8(lo);
    enc.u16(msg.questions.len() as u16);
    enc.u16(msg.answers.len() as u16);
    enc.u16(msg.authority.len() as u16);
    enc.u16((msg.additional.len() + msg.edns.is_some() as usize) as u16);
    for q in &msg.questions {
        enc.question(q);
    }
    for rr in msg.answers.iter().chain(&msg.authority).chain(&msg.additional) {
        enc.record(rr)?;
    }
    if let Some(edns) = &msg.edns {
        enc.opt(edns);
    }
    if enc.buf.len() > MAX_MESSAGE_LEN {
        return Err(WireError::MessageTooLarge { size: enc.buf.len(), limit: MAX_MESSAGE_LEN });
    }
    Ok(enc.buf)
}

struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| malformed(format!("truncated at offset {}", self.pos)))?;
        let slice = &self.buf[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, WireError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, WireError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    /// Reads a possibly compressed name starting at the cursor. Each pointer
    /// must target an offset strictly before the start of the name (for the
    /// first jump) or before the previous jump target, so every chain is
    /// strictly decreasing and cannot cycle.
    fn name(&mut self) -> Result<DnsName, WireError> {
        let mut labels: Vec<Vec<u8>> = Vec::new();
        let mut wire_len = 1;
        let mut at = self.pos;
        let mut floor = self.pos;
        let mut resume: Option<usize> = None;
        loop {
            let len = *self.buf.get(at).ok_or_else(|| malformed(format!("name runs past end at offset {}", at)))?;
            match len & POINTER_MASK {
                0x00 => {
                    if len == 0 {
                        at += 1;
                        break;
                    }
                    let start = at + 1;
                    let end = start + len as usize;
                    let label = self
                        .buf
                        .get(start..end)
                        .ok_or_else(|| malformed(format!("label runs past end at offset {}", at)))?;
                    wire_len += label.len() + 1;
                    if wire_len > MAX_NAME_LEN {
                        return Err(malformed("name exceeds 255 bytes"));
                    }
                    labels.push(label.to_vec());
                    at = end;
                }
                POINTER_MASK => {
                    let lo = *self
                        .buf
                        .get(at + 1)
                        .ok_or_else(|| malformed(format!("pointer truncated at offset {}", at)))?;
                    let target = (((len & 0x3F) as usize) << 8) | lo as usize;
                    if target >= floor {
                        return Err(WireError::CompressionLoop(at));
                    }
                    resume.get_or_insert(at + 2);
                    floor = target;
                    at = target;
                }
                _ => return Err(malformed(format!("unsupported label type {:#04x}", len))),
            }
        }
        self.pos = resume.unwrap_or(at);
        DnsName::from_labels(labels).map_err(|e| malformed(e.to_string()))
    }

    fn question(&mut self) -> Result<Question, WireError> {
        let name = self.name()?;
        let rtype = RecordType(self.u16()?);
        let class = self.u16()?;
        Ok(Question { name, rtype, class })
    }

    fn rdata(&mut self, rtype: RecordType, len: usize) -> Result<Rdata, WireError> {
        let start = self.pos;
        let end = start + len;
        if end > self.buf.len() {
            return Err(malformed(format!("rdata runs past end at offset {}", start)));
        }
        let rdata = match rtype {
            RecordType::A => {
                if len != 4 {
                    return Err(malformed("A rdata must be 4 bytes"));
                }
                let b = self.take(4)?;
                Rdata::A { address: Ipv4Addr::new(b[0], b[1], b[2], b[3]) }
            }
            RecordType::NS => Rdata::Ns { host: self.name()? },
            RecordType::SOA => Rdata::Soa(Soa {
                mname: self.name()?,
                rname: self.name()?,
                serial: self.u32()?,
                refresh: self.u32()?,
                retry: self.u32()?,
                expire: self.u32()?,
                minimum: self.u32()?,
            }),
            RecordType::DNSKEY => {
                let flags = self.u16()?;
                let protocol = self.u8()?;
                let algorithm = AlgorithmNumber(self.u8()?);
                let public_key = self.rest(end)?;
                Rdata::Dnskey(Dnskey { flags, protocol, algorithm, public_key })
            }
            RecordType::DS => {
                let key_tag = self.u16()?;
                let algorithm = AlgorithmNumber(self.u8()?);
                let digest_type = self.u8()?;
                let digest = self.rest(end)?;
                Rdata::Ds(Ds { key_tag, algorithm, digest_type, digest })
            }
            RecordType::RRSIG => {
                let type_covered = RecordType(self.u16()?);
                let algorithm = AlgorithmNumber(self.u8()?);
                let labels = self.u8()?;
                let original_ttl = self.u32()?;
                let expiration = self.u32()?;
                let inception = self.u32()?;
                let key_tag = self.u16()?;
                let signer_name = self.name()?;
                let signature = self.rest(end)?;
                Rdata::Rrsig(Rrsig {
                    type_covered,
                    algorithm,
                    labels,
                    original_ttl,
                    expiration,
                    inception,
                    key_tag,
                    signer_name,
                    signature,
                })
            }
            RecordType::OPT => return Err(malformed("OPT outside the additional section")),
            other => Rdata::Opaque { rtype: other, data: self.take(len)?.to_vec() },
        };
        if self.pos != end {
            return Err(malformed(format!("{} rdata length mismatch at offset {}", rtype, start)));
        }
        Ok(rdata)
    }

    fn rest(&mut self, end: usize) -> Result<Vec<u8>, WireError> {
        if self.pos > end {
            return Err(malformed("fixed rdata fields exceed rdlength"));
        }
        Ok(self.take(end - self.pos)?.to_vec())
    }
}

enum Decoded {
    Record(ResourceRecord),
    Opt(Edns),
}

impl Decoder<'_> {
    fn record(&mut self, allow_opt: bool) -> Result<Decoded, WireError> {
        let name = self.name()?;
        let rtype = RecordType(self.u16()?);
        let class = self.u16()?;
        let ttl = self.u32()?;
        let len = self.u16()? as usize;
        if rtype == RecordType::OPT {
            if !allow_opt || !name.is_root() {
                return Err(malformed("misplaced OPT record"));
            }
            let end = self.pos + len;
            let mut options = Vec::new();
            while self.pos < end {
                let code = self.u16()?;
                let olen = self.u16()? as usize;
                if self.pos + olen > end {
                    return Err(malformed("EDNS option overruns OPT rdata"));
                }
                options.push(EdnsOption { code, data: self.take(olen)?.to_vec() });
            }
            return Ok(Decoded::Opt(Edns {
                udp_payload_size: class,
                extended_rcode: (ttl >> 24) as u8,
                version: (ttl >> 16) as u8,
                dnssec_ok: ttl & 0x8000 != 0,
                options,
            }));
        }
        let rdata = self.rdata(rtype, len)?;
        Ok(Decoded::Record(ResourceRecord { name, class, ttl, rdata }))
    }
}

/// Decodes a DNS message. Never panics and always terminates; any input that
/// is not a well-formed message yields a typed error.
pub fn decode_message(bytes: &[u8]) -> Result<DnsMessage, WireError> {
    if bytes.len() < 12 {
        return Err(malformed(format!("{} bytes is shorter than a header", bytes.len())));
    }
    let mut d = Decoder { buf: bytes, pos: 0 };
    let id = d.u16()?;
    let hi = d.u8()?;
    let lo = d.u8()?;
    let counts = [d.u16()?, d.u16()?, d.u16()?, d.u16()?];
    let flags = Flags {
        qr: hi & 0x80 != 0,
        aa: hi & 0x04 != 0,
        tc: hi & 0x02 != 0,
        rd: hi & 0x01 != 0,
        ra: lo & 0x80 != 0,
        ad: lo & 0x20 != 0,
        cd: lo & 0x10 != 0,
    };
    let mut msg = DnsMessage {
        id,
        opcode: (hi >> 3) & 0x0F,
        flags,
        rcode: Rcode(lo & 0x0F),
        questions: Vec::new(),
        answers: Vec::new(),
        authority: Vec::new(),
        additional: Vec::new(),
        edns: None,
    };
    for _ in 0..counts[0] {
        msg.questions.push(d.question()?);
    }
    for (section, &count) in [Section::Answer, Section::Authority, Section::Additional].into_iter().zip(&counts[1..]) {
        for _ in 0..count {
            match d.record(section == Section::Additional)? {
                Decoded::Record(rr) => msg.section_mut(section).push(rr),
                Decoded::Opt(edns) => {
                    if msg.edns.is_some() {
                        return Err(malformed("more than one OPT record"));
                    }
                    msg.edns = Some(edns);
                }
            }
        }
    }
    Ok(msg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn name(s: &str) -> DnsName {
        s.parse().unwrap()
    }

    fn signed_response() -> DnsMessage {
        let owner = name("www.victim.test");
        let mut msg = DnsMessage::response_to(&DnsMessage::query(7, owner.clone(), RecordType::A, true));
        msg.answers.push(ResourceRecord::new(owner.clone(), 300, Rdata::A { address: Ipv4Addr::new(192, 0, 2, 10) }));
        msg.answers.push(ResourceRecord::new(
            owner,
            300,
            Rdata::Rrsig(Rrsig {
                type_covered: RecordType::A,
                algorithm: AlgorithmNumber(8),
                labels: 3,
                original_ttl: 300,
                expiration: 2,
                inception: 1,
                key_tag: 4242,
                signer_name: name("victim.test"),
                signature: vec![0xAA; 16],
            }),
        ));
        msg
    }

    #[test]
    fn header_counts_match_sections() {
        let msg = signed_response();
        let bytes = encode_message(&msg).unwrap();
        assert_eq!(u16::from_be_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(u16::from_be_bytes([bytes[6], bytes[7]]), 2);
        assert_eq!(u16::from_be_bytes([bytes[8], bytes[9]]), 0);
        // the OPT record
        assert_eq!(u16::from_be_bytes([bytes[10], bytes[11]]), 1);
        assert_eq!(decode_message(&bytes).unwrap(), msg);
    }

    #[test]
    fn owner_names_are_compressed_but_signer_is_not() {
        let msg = signed_response();
        let bytes = encode_message(&msg).unwrap();
        let signer = b"\x06victim\x04test\x00";
        // the signer name appears verbatim inside the RRSIG rdata
        assert!(bytes.windows(signer.len()).any(|w| w == signer));
        // owner names after the question are pointers to offset 12
        assert_eq!(bytes.windows(2).filter(|w| *w == [0xC0, 0x0C]).count(), 2);
    }

    #[test]
    fn case_is_preserved_through_compression() {
        let mut msg = signed_response();
        msg.answers[0].name = name("WWW.Victim.test");
        let decoded = decode_message(&encode_message(&msg).unwrap()).unwrap();
        assert_eq!(decoded.answers[0].name.labels()[0], b"WWW".to_vec());
        assert_eq!(decoded.questions[0].name.labels()[0], b"www".to_vec());
    }

    #[test]
    fn empty_input_is_malformed() {
        assert!(matches!(decode_message(&[]), Err(WireError::MalformedMessage(_))));
    }

    #[test]
    fn inflated_answer_count_is_malformed() {
        let mut bytes = encode_message(&signed_response()).unwrap();
        // ANCOUNT 2 -> 3
        bytes[7] = 3;
        assert!(matches!(decode_message(&bytes), Err(WireError::MalformedMessage(_))));
    }

    #[test]
    fn self_pointer_is_a_loop() {
        let mut bytes = vec![0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0];
        bytes.extend_from_slice(&[0xC0, 12, 0, 1, 0, 1]);
        assert_eq!(decode_message(&bytes), Err(WireError::CompressionLoop(12)));
    }

    #[test]
    fn forward_pointer_is_a_loop() {
        let mut bytes = vec![0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0];
        bytes.extend_from_slice(&[0xC0, 14, 0, 0, 1, 0, 1]);
        assert_eq!(decode_message(&bytes), Err(WireError::CompressionLoop(12)));
    }

    #[test]
    fn label_then_backward_pointer_cycle_is_a_loop() {
        // question name at 12: label "a" then a pointer back to 12
        let mut bytes = vec![0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0];
        bytes.extend_from_slice(&[1, b'a', 0xC0, 12, 0, 1, 0, 1]);
        assert_eq!(decode_message(&bytes), Err(WireError::CompressionLoop(14)));
    }

    #[test]
    fn truncation_sets_tc_and_keeps_opt() {
        let mut msg = signed_response();
        for i in 0..40 {
            msg.answers.push(ResourceRecord::new(
                name("www.victim.test"),
                300,
                Rdata::A { address: Ipv4Addr::new(10, 0, 0, i) },
            ));
        }
        assert!(matches!(encode_with_limit(&msg, 512, false), Err(WireError::MessageTooLarge { .. })));
        let bytes = encode_with_limit(&msg, 512, true).unwrap();
        let cut = decode_message(&bytes).unwrap();
        assert!(cut.flags.tc);
        assert!(cut.answers.is_empty());
        assert!(cut.dnssec_ok());
    }

    #[test]
    fn opt_in_answer_is_rejected() {
        let mut bytes = vec![0, 1, 0x80, 0, 0, 0, 0, 1, 0, 0, 0, 0];
        bytes.extend_from_slice(&[0, 0, 41, 4, 0xD0, 0, 0, 0x80, 0, 0, 0]);
        assert!(matches!(decode_message(&bytes), Err(WireError::MalformedMessage(_))));
    }

    #[test]
    fn duplicate_opt_is_rejected() {
        let mut bytes = vec![0, 1, 0x80, 0, 0, 0, 0, 0, 0, 0, 0, 2];
        for _ in 0..2 {
            bytes.extend_from_slice(&[0, 0, 41, 4, 0xD0, 0, 0, 0x80, 0, 0, 0]);
        }
        assert!(matches!(decode_message(&bytes), Err(WireError::MalformedMessage(_))));
    }

    #[test]
    fn unknown_types_round_trip_opaque() {
        let mut msg = signed_response();
        msg.additional.push(ResourceRecord::new(
            name("x.test"),
            60,
            Rdata::Opaque { rtype: RecordType(65280), data: vec![1, 2, 3] },
        ));
        let decoded = decode_message(&encode_message(&msg).unwrap()).unwrap();
        assert_eq!(decoded, msg);
    }
}
