use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::mutator::{apply_rules, MutationRule};
use crate::net::{spawn_server, tcp_exchange_raw, udp_exchange_raw, Handler, NetError, Protocol, ServerHandle};
use crate::wire::{decode_message, DnsMessage, Rcode};
use crate::zone::encode_for;

/// What the client sees when the upstream does not answer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpstreamFailure {
    /// No response; the client times out.
    #[default]
    Drop,
    ServFail,
}

#[derive(Debug, Clone)]
pub struct ProxyConfig {
    pub upstream: SocketAddr,
    pub rules: Vec<MutationRule>,
    pub upstream_timeout: Duration,
    pub on_upstream_failure: UpstreamFailure,
}

impl ProxyConfig {
    pub fn new(upstream: SocketAddr, rules: Vec<MutationRule>) -> Self {
        ProxyConfig {
            upstream,
            rules,
            upstream_timeout: Duration::from_secs(2),
            on_upstream_failure: UpstreamFailure::Drop,
        }
    }
}

fn relay(config: &ProxyConfig, raw: &[u8], proto: Protocol) -> Option<Vec<u8>> {
    let upstream = match proto {
        Protocol::Udp => udp_exchange_raw(config.upstream, raw, config.upstream_timeout),
        Protocol::Tcp => tcp_exchange_raw(config.upstream, raw, config.upstream_timeout),
    };
    let query = decode_message(raw).ok();
    let resp = match upstream {
        Ok(resp) => resp,
        Err(e) => {
            log::debug!("upstream {}: {}", config.upstream, e);
            return match (config.on_upstream_failure, &query) {
                (UpstreamFailure::ServFail, Some(q)) => {
                    let mut fail = DnsMessage::response_to(q);
                    fail.rcode = Rcode::SERVFAIL;
                    encode_for(&fail, Some(q), proto)
                }
                _ => None,
            };
        }
    };
    if config.rules.is_empty() {
        return Some(resp);
    }
    let msg = match decode_message(&resp) {
        // a truncated answer is relayed as is so the client retries over tcp
        Ok(msg) if !msg.flags.tc => msg,
        _ => return Some(resp),
    };
    match apply_rules(&msg, &config.rules) {
        Ok(mutated) => encode_for(&mutated, query.as_ref(), proto),
        Err(e) => {
            log::warn!("rules not applied: {}", e);
            Some(resp)
        }
    }
}

/// Listens on `listen`, forwards every query verbatim to the upstream over
/// the same transport, and rewrites responses with the rules.
pub fn proxy_with(listen: SocketAddr, config: ProxyConfig) -> Result<ServerHandle, NetError> {
    let config = Arc::new(config);
    let handler: Handler = Arc::new(move |raw: &[u8], proto| relay(&config, raw, proto));
    spawn_server(listen, handler)
}

pub fn proxy(listen: SocketAddr, upstream: SocketAddr, rules: Vec<MutationRule>) -> Result<ServerHandle, NetError> {
    proxy_with(listen, ProxyConfig::new(upstream, rules))
}
