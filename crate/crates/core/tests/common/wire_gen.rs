//! Random message generators shared by the wire tests and the acceptance suite.

use std::net::Ipv4Addr;

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use dnssec_downgrade::dnssec::AlgorithmNumber;
use dnssec_downgrade::wire::{
    decode_message, encode_message, DnsMessage, DnsName, Dnskey, Ds, Edns, EdnsOption, Flags, Question, Rcode, Rdata,
    RecordType, ResourceRecord, Rrsig, Soa,
};

fn label() -> impl Strategy<Value = Vec<u8>> {
    prop_oneof![
        3 => "[a-zA-Z0-9-]{1,12}".prop_map(String::into_bytes),
        1 => vec(any::<u8>(), 1..20),
    ]
}

pub fn name() -> impl Strategy<Value = DnsName> {
    vec(label(), 0..5).prop_map(|labels| DnsName::from_labels(labels).unwrap())
}

fn bytes(max: usize) -> impl Strategy<Value = Vec<u8>> {
    vec(any::<u8>(), 0..max)
}

fn untyped() -> impl Strategy<Value = RecordType> {
    any::<u16>().prop_map(RecordType).prop_filter("typed", |t| !t.is_typed())
}

pub fn rdata() -> impl Strategy<Value = Rdata> {
    prop_oneof![
        any::<[u8; 4]>().prop_map(|o| Rdata::A { address: Ipv4Addr::from(o) }),
        name().prop_map(|host| Rdata::Ns { host }),
        (name(), name(), any::<[u32; 5]>()).prop_map(|(mname, rname, v)| Rdata::Soa(Soa {
            mname,
            rname,
            serial: v[0],
            refresh: v[1],
            retry: v[2],
            expire: v[3],
            minimum: v[4],
        })),
        (any::<u16>(), any::<u8>(), any::<u8>(), bytes(96)).prop_map(|(flags, protocol, alg, public_key)| {
            Rdata::Dnskey(Dnskey { flags, protocol, algorithm: AlgorithmNumber(alg), public_key })
        }),
        (any::<u16>(), any::<u8>(), any::<u8>(), bytes(48)).prop_map(|(key_tag, alg, digest_type, digest)| {
            Rdata::Ds(Ds { key_tag, algorithm: AlgorithmNumber(alg), digest_type, digest })
        }),
        (any::<u16>(), any::<(u8, u8, u32, u32, u32, u16)>(), name(), bytes(96)).prop_map(
            |(covered, (alg, labels, original_ttl, expiration, inception, key_tag), signer_name, signature)| {
                Rdata::Rrsig(Rrsig {
                    type_covered: RecordType(covered),
                    algorithm: AlgorithmNumber(alg),
                    labels,
                    original_ttl,
                    expiration,
                    inception,
                    key_tag,
                    signer_name,
                    signature,
                })
            }
        ),
        (untyped(), bytes(64)).prop_map(|(rtype, data)| Rdata::Opaque { rtype, data }),
    ]
}

fn record() -> impl Strategy<Value = ResourceRecord> {
    (name(), any::<u16>(), any::<u32>(), rdata()).prop_map(|(name, class, ttl, rdata)| ResourceRecord {
        name,
        class,
        ttl,
        rdata,
    })
}

fn edns() -> impl Strategy<Value = Edns> {
    (any::<u16>(), any::<u8>(), any::<u8>(), any::<bool>(), vec((any::<u16>(), bytes(16)), 0..3)).prop_map(
        |(udp_payload_size, extended_rcode, version, dnssec_ok, opts)| Edns {
            udp_payload_size,
            extended_rcode,
            version,
            dnssec_ok,
            options: opts.into_iter().map(|(code, data)| EdnsOption { code, data }).collect(),
        },
    )
}

pub fn message() -> impl Strategy<Value = DnsMessage> {
    (
        any::<u16>(),
        0u8..16,
        any::<[bool; 7]>(),
        0u8..16,
        vec((name(), any::<u16>(), any::<u16>()), 0..3),
        vec(record(), 0..6),
        vec(record(), 0..4),
        vec(record(), 0..4),
        proptest::option::of(edns()),
    )
        .prop_map(|(id, opcode, f, rcode, qs, answers, authority, additional, edns)| DnsMessage {
            id,
            opcode,
            flags: Flags { qr: f[0], aa: f[1], tc: f[2], rd: f[3], ra: f[4], ad: f[5], cd: f[6] },
            rcode: Rcode(rcode),
            questions: qs
                .into_iter()
                .map(|(name, rtype, class)| Question { name, rtype: RecordType(rtype), class })
                .collect(),
            answers,
            authority,
            additional,
            edns,
        })
}

/// decode(encode(m)) == m, and re-encoding is byte-stable.
pub fn check_roundtrip(msg: &DnsMessage) -> Result<(), String> {
    let bytes = encode_message(msg).map_err(|e| format!("encode: {}", e))?;
    let back = decode_message(&bytes).map_err(|e| format!("decode: {}", e))?;
    if &back != msg {
        return Err(format!("round trip changed the message\n{:?}\n{:?}", msg, back));
    }
    let again = encode_message(&back).map_err(|e| format!("re-encode: {}", e))?;
    if again != bytes {
        return Err("re-encoding is not byte-identical".into());
    }
    Ok(())
}

pub fn run_roundtrip_cases(cases: u32) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&message(), |msg| check_roundtrip(&msg).map_err(TestCaseError::fail)).map_err(|e| e.to_string())
}

/// Feeds `count` inputs to the decoder: half pure noise, half single-byte
/// corruptions and truncations of valid encodings. Returns how many decoded.
/// Any panic propagates.
pub fn fuzz_decode(count: usize, seed: u64) -> usize {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut runner = TestRunner::deterministic();
    let strategy = message();
    let mut seeds = Vec::new();
    while seeds.len() < 64 {
        let msg = strategy.new_tree(&mut runner).unwrap().current();
        if let Ok(bytes) = encode_message(&msg) {
            seeds.push(bytes);
        }
    }
    let mut decoded = 0;
    for i in 0..count {
        let input = if i % 2 == 0 {
            let mut buf = vec![0u8; rng.gen_range(0..300)];
            rng.fill_bytes(&mut buf);
            buf
        } else {
            let mut buf = seeds[rng.gen_range(0..seeds.len())].clone();
            match rng.gen_range(0..3) {
                0 if !buf.is_empty() => {
                    let at = rng.gen_range(0..buf.len());
                    buf[at] = rng.gen();
                }
                1 => buf.truncate(rng.gen_range(0..=buf.len())),
                _ => {
                    // aim at compression pointers and length fields
                    let at = rng.gen_range(12..buf.len().max(13)).min(buf.len().saturating_sub(1));
                    if let Some(b) = buf.get_mut(at) {
                        *b |= 0xC0;
                    }
                }
            }
            buf
        };
        if let Ok(msg) = decode_message(&input) {
            decoded += 1;
            // anything the decoder accepts must encode again
            let _ = encode_message(&msg);
        }
    }
    decoded
}
