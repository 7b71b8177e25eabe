//! A validating stub resolver with selectable failure-handling policies.

mod chain;
mod policy;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::net::{spawn_server, Handler, NetError, ServerHandle, UdpTcpTransport};
use crate::wire::{decode_message, DnsMessage, Rcode};
use crate::zone::{encode_for, formerr_for};

pub use chain::{
    dispose, evaluate_ds_set, validate_dnskey_link, validate_name, BogusReason, Disposition, DsEvaluation, LinkOutcome,
    StepKind, TraceStep, ValidationResult,
};
pub use policy::{PolicyName, SecurityState, TrustAnchor, ValidatorPolicy};

/// Builds the client-facing response for a validation result.
pub fn render_response(result: &ValidationResult, query: &DnsMessage) -> DnsMessage {
    let mut resp = DnsMessage::response_to(query);
    resp.flags.ra = true;
    match &result.disposition {
        Disposition::ServFail => resp.rcode = Rcode::SERVFAIL,
        Disposition::Answer { rcode, records, authenticated } => {
            resp.rcode = *rcode;
            resp.answers = records.clone();
            resp.flags.ad = *authenticated;
        }
    }
    resp
}

#[derive(Debug, Clone, Copy)]
pub enum Clock {
    System,
    Fixed(u64),
}

impl Clock {
    pub fn now(self) -> u64 {
        match self {
            Clock::Fixed(t) => t,
            Clock::System => SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }
}

/// Runs the validator as a resolver service: each client query is
/// validated against `upstream` and answered per `policy`.
pub fn serve_resolver(
    endpoint: SocketAddr,
    upstream: SocketAddr,
    anchor: TrustAnchor,
    policy: ValidatorPolicy,
    clock: Clock,
) -> Result<ServerHandle, NetError> {
    let transport = UdpTcpTransport::new(upstream);
    let handler: Handler = Arc::new(move |raw: &[u8], proto| {
        let Ok(query) = decode_message(raw) else {
            return formerr_for(raw);
        };
        let resp = match query.questions.as_slice() {
            [q] if !query.flags.qr => {
                let result = validate_name(q, &transport, &anchor, &policy, clock.now());
                log::debug!("{} {} -> {:?}", q.name, q.rtype, result.state);
                render_response(&result, &query)
            }
            _ => {
                let mut r = DnsMessage::response_to(&query);
                r.rcode = Rcode::FORMERR;
                r
            }
        };
        encode_for(&resp, Some(&query), proto)
    });
    spawn_server(endpoint, handler)
}
