//! Signed zones, the authoritative answer logic and the loopback
//! nameserver.

mod answer;
mod build;
mod config;
pub mod fixture;

use std::net::SocketAddr;
use std::sync::Arc;

use thiserror::Error;

use crate::dnssec::{AlgorithmNumber, DnssecError};
use crate::net::{spawn_server, Handler, NetError, Protocol, ServerHandle};
use crate::wire::{decode_message, encode_with_limit, DnsMessage, DnsName, Rcode, MAX_MESSAGE_LEN, UDP_LEGACY_LIMIT};

pub use answer::answer_query;
pub use build::{
    build_zone, zone_rng, KeySource, SignedRrset, SignedZone, ZoneTree, DNSKEY_TTL, DS_TTL, INCEPTION_SKEW,
    SIGNATURE_LIFETIME,
};
pub use config::{parse_rdata, ChildSpec, DsPolicy, KeySpec, RecordSpec, ZoneConfig};

#[derive(Debug, Error)]
pub enum ZoneError {
    #[error("algorithm {0} is not implemented")]
    UnsupportedAlgorithm(AlgorithmNumber),
    #[error("zone {0} has no records")]
    EmptyZone(DnsName),
    #[error("invalid zone config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dnssec(DnssecError),
}

impl From<DnssecError> for ZoneError {
    fn from(e: DnssecError) -> Self {
        match e {
            DnssecError::UnsupportedAlgorithm(a) => ZoneError::UnsupportedAlgorithm(a),
            other => ZoneError::Dnssec(other),
        }
    }
}

/// Largest UDP response for `query`: its EDNS payload size, never below
/// 512.
pub fn udp_limit(query: Option<&DnsMessage>) -> usize {
    query
        .and_then(|q| q.edns.as_ref())
        .map_or(UDP_LEGACY_LIMIT, |e| (e.udp_payload_size as usize).max(UDP_LEGACY_LIMIT))
}

/// Response to bytes that could not be decoded: FORMERR if there is at
/// least a header to echo the id from, otherwise nothing.
pub fn formerr_for(raw: &[u8]) -> Option<Vec<u8>> {
    if raw.len() < 12 {
        return None;
    }
    let mut out = raw[..12].to_vec();
    out[2] = 0x80 | (raw[2] & 0x79); // QR, keep opcode and RD
    out[3] = Rcode::FORMERR.0;
    out[4..12].fill(0);
    Some(out)
}

/// Encodes `resp` for the transport it goes back over, truncating UDP
/// answers that do not fit.
pub fn encode_for(resp: &DnsMessage, query: Option<&DnsMessage>, proto: Protocol) -> Option<Vec<u8>> {
    let limit = match proto {
        Protocol::Udp => udp_limit(query),
        Protocol::Tcp => MAX_MESSAGE_LEN,
    };
    match encode_with_limit(resp, limit, true) {
        Ok(bytes) => Some(bytes),
        Err(e) => {
            log::warn!("cannot encode response: {}", e);
            None
        }
    }
}

/// Serves `tree` over UDP and TCP on `endpoint` until the handle is
/// stopped.
pub fn serve(endpoint: SocketAddr, tree: Arc<ZoneTree>) -> Result<ServerHandle, NetError> {
    let handler: Handler = Arc::new(move |raw: &[u8], proto| match decode_message(raw) {
        Ok(query) => encode_for(&answer_query(&tree, &query), Some(&query), proto),
        Err(e) => {
            log::debug!("undecodable query: {}", e);
            formerr_for(raw)
        }
    });
    spawn_server(endpoint, handler)
}
