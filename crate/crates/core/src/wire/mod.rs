//! DNS wire format: names, typed records, messages, and the codec.
//!
//! Owner and NS/SOA names are compressed on output; names inside DNSSEC
//! rdata never are. EDNS0 is modelled as [`Edns`] on the message rather
//! than as a record in the additional section.

mod codec;
mod name;
mod types;

pub use codec::{
    decode_message, encode_message, encode_with_limit, rdata_wire, write_dnskey_rdata, write_ds_rdata,
    write_rrsig_prefix, WireError, MAX_MESSAGE_LEN, UDP_LEGACY_LIMIT,
};
pub use name::{DnsName, NameError, MAX_LABEL_LEN, MAX_NAME_LEN};
pub use types::{
    b64, DnsMessage, Dnskey, Ds, Edns, EdnsOption, Flags, Question, Rcode, Rdata, RecordType, ResourceRecord, Rrsig,
    Section, Soa, CLASS_IN,
};
