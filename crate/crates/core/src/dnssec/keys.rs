use std::fmt;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use ed25519_dalek::Signer as _;
use p256::ecdsa::signature::Verifier as _;
use rand::{CryptoRng, RngCore};
use rsa::pkcs8::{DecodePrivateKey, EncodePrivateKey};
use rsa::traits::PublicKeyParts;
use rsa::{BigUint, Pkcs1v15Sign, RsaPrivateKey, RsaPublicKey};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::dnssec::{AlgorithmNumber, DnssecError};
use crate::wire::Dnskey;

pub const DEFAULT_RSA_BITS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyRole {
    Ksk,
    Zsk,
}

impl KeyRole {
    pub fn flags(self) -> u16 {
        match self {
            KeyRole::Ksk => Dnskey::ZONE_KEY | Dnskey::SEP,
            KeyRole::Zsk => Dnskey::ZONE_KEY,
        }
    }
}

#[derive(Clone)]
enum SecretKey {
    Rsa(Box<RsaPrivateKey>),
    EcdsaP256(p256::ecdsa::SigningKey),
    Ed25519(ed25519_dalek::SigningKey),
}

/// A DNSKEY plus its private half. Legitimate zone keys and attacker keys
/// are the same type.
#[derive(Clone)]
pub struct KeyPair {
    dnskey: Dnskey,
    role: KeyRole,
    secret: SecretKey,
}

impl KeyPair {
    pub fn generate<R: RngCore + CryptoRng>(
        algorithm: AlgorithmNumber,
        role: KeyRole,
        rng: &mut R,
    ) -> Result<Self, DnssecError> {
        Self::generate_with_rsa_bits(algorithm, role, DEFAULT_RSA_BITS, rng)
    }

    pub fn generate_with_rsa_bits<R: RngCore + CryptoRng>(
        algorithm: AlgorithmNumber,
        role: KeyRole,
        rsa_bits: usize,
        rng: &mut R,
    ) -> Result<Self, DnssecError> {
        let secret = match algorithm.0 {
            8 => SecretKey::Rsa(Box::new(
                RsaPrivateKey::new(rng, rsa_bits).map_err(|e| DnssecError::Key(e.to_string()))?,
            )),
            13 => SecretKey::EcdsaP256(p256::ecdsa::SigningKey::random(rng)),
            15 => SecretKey::Ed25519(ed25519_dalek::SigningKey::generate(rng)),
            _ => return Err(DnssecError::UnsupportedAlgorithm(algorithm)),
        };
        Ok(Self::from_secret(secret, role))
    }

    /// Imports private material in the export encoding: PKCS#8 DER for RSA,
    /// the 32-byte scalar for P-256, the 32-byte seed for Ed25519.
    pub fn from_private_bytes(algorithm: AlgorithmNumber, role: KeyRole, private: &[u8]) -> Result<Self, DnssecError> {
        let bad = |e: String| DnssecError::Key(format!("algorithm {} private key: {}", algorithm, e));
        let secret = match algorithm.0 {
            8 => SecretKey::Rsa(Box::new(RsaPrivateKey::from_pkcs8_der(private).map_err(|e| bad(e.to_string()))?)),
            13 => SecretKey::EcdsaP256(p256::ecdsa::SigningKey::from_slice(private).map_err(|e| bad(e.to_string()))?),
            15 => {
                let seed: [u8; 32] = private.try_into().map_err(|_| bad("seed must be 32 bytes".into()))?;
                SecretKey::Ed25519(ed25519_dalek::SigningKey::from_bytes(&seed))
            }
            _ => return Err(DnssecError::UnsupportedAlgorithm(algorithm)),
        };
        Ok(Self::from_secret(secret, role))
    }

    fn from_secret(secret: SecretKey, role: KeyRole) -> Self {
        let (algorithm, public_key) = match &secret {
            SecretKey::Rsa(k) => (AlgorithmNumber::RSASHA256, rsa_public_key_bytes(&k.to_public_key())),
            SecretKey::EcdsaP256(k) => {
                let point = k.verifying_key().to_encoded_point(false);
                (AlgorithmNumber::ECDSAP256SHA256, point.as_bytes()[1..].to_vec())
            }
            SecretKey::Ed25519(k) => (AlgorithmNumber::ED25519, k.verifying_key().to_bytes().to_vec()),
        };
        let dnskey = Dnskey { flags: role.flags(), protocol: 3, algorithm, public_key };
        KeyPair { dnskey, role, secret }
    }

    pub fn dnskey(&self) -> &Dnskey {
        &self.dnskey
    }

    pub fn role(&self) -> KeyRole {
        self.role
    }

    pub fn algorithm(&self) -> AlgorithmNumber {
        self.dnskey.algorithm
    }

    pub fn private_bytes(&self) -> Vec<u8> {
        match &self.secret {
            SecretKey::Rsa(k) => k.to_pkcs8_der().expect("RSA key encodes as PKCS#8").as_bytes().to_vec(),
            SecretKey::EcdsaP256(k) => k.to_bytes().to_vec(),
            SecretKey::Ed25519(k) => k.to_bytes().to_vec(),
        }
    }

    /// Raw signature over `data` in the DNSSEC wire encoding for the
    /// algorithm.
    pub(crate) fn sign_bytes(&self, data: &[u8]) -> Result<Vec<u8>, DnssecError> {
        match &self.secret {
            SecretKey::Rsa(k) => {
                let digest = Sha256::digest(data);
                k.sign(Pkcs1v15Sign::new::<Sha256>(), &digest).map_err(|e| DnssecError::Crypto(e.to_string()))
            }
            SecretKey::EcdsaP256(k) => {
                let sig: p256::ecdsa::Signature = p256::ecdsa::signature::Signer::sign(k, data);
                Ok(sig.to_bytes().to_vec())
            }
            SecretKey::Ed25519(k) => Ok(k.sign(data).to_bytes().to_vec()),
        }
    }
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("algorithm", &self.dnskey.algorithm)
            .field("role", &self.role)
            .field("key_tag", &crate::dnssec::key_tag(&self.dnskey))
            .finish_non_exhaustive()
    }
}

impl PartialEq for KeyPair {
    fn eq(&self, other: &Self) -> bool {
        self.dnskey == other.dnskey && self.role == other.role && self.private_bytes() == other.private_bytes()
    }
}

impl Eq for KeyPair {}

/// On-disk form of a key pair.
#[derive(Serialize, Deserialize)]
struct KeyFile {
    algorithm: AlgorithmNumber,
    role: KeyRole,
    flags: u16,
    public_key: String,
    private_key: String,
}

impl Serialize for KeyPair {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        KeyFile {
            algorithm: self.dnskey.algorithm,
            role: self.role,
            flags: self.dnskey.flags,
            public_key: BASE64.encode(&self.dnskey.public_key),
            private_key: BASE64.encode(self.private_bytes()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KeyPair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let file = KeyFile::deserialize(d)?;
        let private = BASE64.decode(&file.private_key).map_err(D::Error::custom)?;
        let public = BASE64.decode(&file.public_key).map_err(D::Error::custom)?;
        let mut pair = KeyPair::from_private_bytes(file.algorithm, file.role, &private).map_err(D::Error::custom)?;
        if pair.dnskey.public_key != public {
            return Err(D::Error::custom("public key does not match private key"));
        }
        pair.dnskey.flags = file.flags;
        Ok(pair)
    }
}

/// RSA public key in the DNSKEY encoding: exponent length, exponent, modulus.
fn rsa_public_key_bytes(key: &RsaPublicKey) -> Vec<u8> {
    let e = key.e().to_bytes_be();
    let n = key.n().to_bytes_be();
    let mut out = Vec::with_capacity(3 + e.len() + n.len());
    if e.len() <= 255 {
        out.push(e.len() as u8);
    } else {
        out.push(0);
        out.extend_from_slice(&(e.len() as u16).to_be_bytes());
    }
    out.extend_from_slice(&e);
    out.extend_from_slice(&n);
    out
}

fn parse_rsa_public_key(bytes: &[u8]) -> Option<RsaPublicKey> {
    let (&first, rest) = bytes.split_first()?;
    let (e_len, rest) = if first == 0 {
        let (len, rest) = rest.split_at_checked(2)?;
        (u16::from_be_bytes([len[0], len[1]]) as usize, rest)
    } else {
        (first as usize, rest)
    };
    let (e, n) = rest.split_at_checked(e_len)?;
    if n.is_empty() {
        return None;
    }
    RsaPublicKey::new(BigUint::from_bytes_be(n), BigUint::from_bytes_be(e)).ok()
}

/// Verifies `signature` over `data` with the public key in `key`. Only
/// called for algorithms with an implementation; malformed keys or
/// signatures simply fail.
pub(crate) fn verify_signature(key: &Dnskey, data: &[u8], signature: &[u8]) -> bool {
    match key.algorithm.0 {
        8 => {
            let Some(public) = parse_rsa_public_key(&key.public_key) else {
                return false;
            };
            let digest = Sha256::digest(data);
            public.verify(Pkcs1v15Sign::new::<Sha256>(), &digest, signature).is_ok()
        }
        13 => {
            if key.public_key.len() != 64 {
                return false;
            }
            let mut sec1 = Vec::with_capacity(65);
            sec1.push(0x04);
            sec1.extend_from_slice(&key.public_key);
            let Ok(public) = p256::ecdsa::VerifyingKey::from_sec1_bytes(&sec1) else {
                return false;
            };
            let Ok(sig) = p256::ecdsa::Signature::from_slice(signature) else {
                return false;
            };
            public.verify(data, &sig).is_ok()
        }
        15 => {
            let Ok(bytes) = <[u8; 32]>::try_from(key.public_key.as_slice()) else {
                return false;
            };
            let Ok(public) = ed25519_dalek::VerifyingKey::from_bytes(&bytes) else {
                return false;
            };
            let Ok(sig) = ed25519_dalek::Signature::from_slice(signature) else {
                return false;
            };
            public.verify(data, &sig).is_ok()
        }
        _ => false,
    }
}
