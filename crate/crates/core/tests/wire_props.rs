mod common;

use common::wire_gen::{check_roundtrip, fuzz_decode, message, run_roundtrip_cases};
use proptest::prelude::*;

use dnssec_downgrade::wire::{decode_message, encode_message, encode_with_limit, UDP_LEGACY_LIMIT};

#[test]
fn thousand_random_messages_round_trip() {
    run_roundtrip_cases(1000).unwrap();
}

#[test]
fn decoder_survives_garbage() {
    let decoded = fuzz_decode(100_000, 0x5eed);
    // corrupted-but-valid inputs should still decode a fair share of the time
    assert!(decoded > 1000, "only {} inputs decoded", decoded);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn truncated_encoding_fits_and_keeps_question(msg in message()) {
        let full = encode_message(&msg).unwrap();
        match encode_with_limit(&msg, UDP_LEGACY_LIMIT, true) {
            Ok(bytes) => {
                prop_assert!(bytes.len() <= UDP_LEGACY_LIMIT);
                let back = decode_message(&bytes).unwrap();
                prop_assert_eq!(&back.questions, &msg.questions);
                prop_assert_eq!(&back.edns, &msg.edns);
                if full.len() > UDP_LEGACY_LIMIT {
                    prop_assert!(back.flags.tc);
                    prop_assert!(back.answers.is_empty() && back.authority.is_empty() && back.additional.is_empty());
                } else {
                    prop_assert_eq!(bytes, full);
                }
            }
            // only when the question and OPT alone overflow
            Err(_) => prop_assert!(full.len() > UDP_LEGACY_LIMIT),
        }
    }

    #[test]
    fn every_prefix_is_rejected_or_decodes(msg in message()) {
        let full = encode_message(&msg).unwrap();
        for cut in 0..full.len() {
            let _ = decode_message(&full[..cut]);
        }
        prop_assert!(check_roundtrip(&msg).is_ok());
    }
}
