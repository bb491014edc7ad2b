//! DSA domain parameters, keys, signing, verification, and the nonce-reuse
//! key-recovery demonstration.
//!
//! Signing draws its per-message nonce from the [`crate::noncegen`]
//! pipeline. Out-of-range nonces are rejected and regenerated with fresh
//! randomness — there is deliberately no `mod q` reduction anywhere on the
//! nonce path, so accepted nonces carry no low-range bias. The nonce never
//! leaves [`sign`]; the only public outputs are `(r, s)`.
//!
//! Parameter generation is probabilistic (Miller-Rabin, 64 rounds) rather
//! than seed-verifiable; [`validate_params`] makes externally supplied
//! parameters checkable. Modular arithmetic is not constant-time; timing
//! side channels are out of scope for this toolkit.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha224, Sha256, Sha512};

use crate::noncegen::{self, MESSAGE_PREFIX_LEN, PRIVATE_KEY_LEN};
use crate::prime::{self, MR_ROUNDS};
use crate::rng::RandomSource;
use crate::{Error, Result};

/// Nonce rejections tolerated before signing gives up.
const NONCE_REJECTION_LIMIT: u32 = 64;

/// Candidate budget for the prime search in parameter generation.
const PRIME_SEARCH_BUDGET: u64 = 100_000;

/// The DSA group: prime modulus `p`, prime subgroup order `q` dividing
/// `p - 1`, and a generator `g` of the order-`q` subgroup, together with
/// the declared bit lengths `(l, n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainParams {
    pub l: u32,
    pub n: u32,
    pub p: BigUint,
    pub q: BigUint,
    pub g: BigUint,
}

/// Private key `x` and public key `y = g^x mod p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPair {
    pub x: BigUint,
    pub y: BigUint,
}

impl KeyPair {
    /// Derive the pair from an existing private key.
    pub fn from_private(params: &DomainParams, x: BigUint) -> Result<Self> {
        if x <= BigUint::one() || x >= params.q {
            return Err(Error::InvalidArgument(
                "private key outside (1, q)".into(),
            ));
        }
        let y = params.g.modpow(&x, &params.p);
        Ok(KeyPair { x, y })
    }
}

/// A signature pair with `0 < r < q` and `0 < s < q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub r: BigUint,
    pub s: BigUint,
}

/// A message digest interpreted as the big-endian integer of the leftmost
/// `n` bits of the hash.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigestInt(BigUint);

impl DigestInt {
    /// Wrap a forced digest value; it must fit in `n_bits`.
    pub fn new(value: BigUint, n_bits: u32) -> Result<Self> {
        if value.bits() > n_bits as u64 {
            return Err(Error::InvalidArgument(format!(
                "digest value needs {} bits, limit is {n_bits}",
                value.bits()
            )));
        }
        Ok(DigestInt(value))
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

/// Hash a message and keep the leftmost `n_bits` as an integer. SHA-224
/// for the production width, SHA-256 for the 160-bit test width, SHA-512
/// truncated for anything else.
pub fn hash_message(message: &[u8], n_bits: u32) -> DigestInt {
    let digest: Vec<u8> = match n_bits {
        224 => Sha224::digest(message).to_vec(),
        160 => Sha256::digest(message).to_vec(),
        _ => Sha512::digest(message).to_vec(),
    };
    digest_from_hash_bytes(&digest, n_bits)
}

/// Interpret the leftmost `n_bits` of a raw hash output as a digest
/// integer; shared by [`hash_message`] and the streaming CLI path.
pub fn digest_from_hash_bytes(digest: &[u8], n_bits: u32) -> DigestInt {
    assert!(n_bits >= 1 && n_bits <= 8 * digest.len() as u32, "digest width out of range");
    let keep_bytes = n_bits.div_ceil(8) as usize;
    let mut value = BigUint::from_bytes_be(&digest[..keep_bytes]);
    let excess = 8 * keep_bytes as u32 - n_bits;
    if excess > 0 {
        value >>= excess;
    }
    DigestInt(value)
}

/// Generate fresh domain parameters. `(2048, 224)` is the production size;
/// `(1024, 160)` and `(512, 160)` exist for tests and are refused unless
/// `allow_test_sizes` is set.
pub fn generate_domain_params(
    l: u32,
    n: u32,
    src: &mut RandomSource,
    allow_test_sizes: bool,
) -> Result<DomainParams> {
    let production = (l, n) == (2048, 224);
    let test_size = matches!((l, n), (1024, 160) | (512, 160));
    if !production && !(test_size && allow_test_sizes) {
        return Err(Error::InvalidArgument(format!(
            "unsupported parameter size ({l}, {n}); expected (2048, 224), or a \
             test size (1024, 160) / (512, 160) with test mode enabled"
        )));
    }

    let q = prime::random_prime_exact_bits(n as u64, src)?;
    let p = find_modulus(l, &q, src)?;
    let g = find_generator(&p, &q);
    Ok(DomainParams { l, n, p, q, g })
}

/// Find a prime `p = q*j + 1` of exactly `l` bits by incrementing a random
/// even `j`.
fn find_modulus(l: u32, q: &BigUint, src: &mut RandomSource) -> Result<BigUint> {
    let p_min = BigUint::one() << (l - 1); // want p > p_min
    let p_max = (BigUint::one() << l) - 1u8;
    let j_min = (&p_min + q - 1u8) / q; // ceil(p_min / q)
    let j_max = (&p_max - 1u8) / q;
    let span = &j_max - &j_min + 1u8;

    let mut budget = PRIME_SEARCH_BUDGET;
    loop {
        let mut j = prime::random_below(&span, src)? + &j_min;
        if (&j % 2u8).is_one() {
            j += 1u8;
        }
        while j <= j_max {
            if budget == 0 {
                return Err(Error::GenerationExceeded(PRIME_SEARCH_BUDGET));
            }
            budget -= 1;
            let p = q * &j + 1u8;
            if p.bits() == l as u64 && prime::is_probable_prime(&p, MR_ROUNDS, src)? {
                return Ok(p);
            }
            j += 2u8;
        }
        // walked off the top of the range; redraw
    }
}

/// Smallest `h >= 2` whose power `h^((p-1)/q) mod p` exceeds 1.
fn find_generator(p: &BigUint, q: &BigUint) -> BigUint {
    let exponent = (p - 1u8) / q;
    let mut h = BigUint::from(2u8);
    loop {
        let g = h.modpow(&exponent, p);
        if g > BigUint::one() {
            return g;
        }
        h += 1u8;
    }
}

/// Outcome of [`validate_params`]: either no failures, or the reasons.
#[derive(Debug, Clone)]
pub struct ParamCheck {
    pub failures: Vec<String>,
}

impl ParamCheck {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check every domain-parameter invariant, collecting the reasons for any
/// failure instead of erroring.
pub fn validate_params(params: &DomainParams, src: &mut RandomSource) -> Result<ParamCheck> {
    let mut failures = Vec::new();
    if params.p.bits() != params.l as u64 {
        failures.push(format!(
            "p has {} bits, declared L = {}",
            params.p.bits(),
            params.l
        ));
    }
    if params.q.bits() != params.n as u64 {
        failures.push(format!(
            "q has {} bits, declared N = {}",
            params.q.bits(),
            params.n
        ));
    }
    if !prime::is_probable_prime(&params.p, MR_ROUNDS, src)? {
        failures.push("p is not prime".into());
    }
    if !prime::is_probable_prime(&params.q, MR_ROUNDS, src)? {
        failures.push("q is not prime".into());
    }
    if !((&params.p - 1u8) % &params.q).is_zero() {
        failures.push("q does not divide p - 1".into());
    }
    if params.g <= BigUint::one() || params.g >= params.p {
        failures.push("g outside (1, p)".into());
    } else if !params.g.modpow(&params.q, &params.p).is_one() {
        failures.push("g^q mod p != 1".into());
    }
    Ok(ParamCheck { failures })
}

/// Draw a private key uniformly from `[2, q-1]` by rejection sampling and
/// derive the public key.
pub fn keygen(params: &DomainParams, src: &mut RandomSource) -> Result<KeyPair> {
    let two = BigUint::from(2u8);
    loop {
        let x = prime::random_bits(params.n as u64, src)?;
        if x >= two && x < params.q {
            let y = params.g.modpow(&x, &params.p);
            return Ok(KeyPair { x, y });
        }
    }
}

/// Fixed-width big-endian encoding of the private key, as consumed by the
/// nonce pipeline.
pub fn encode_private_key(x: &BigUint) -> Result<[u8; PRIVATE_KEY_LEN]> {
    let raw = x.to_bytes_be();
    if raw.len() > PRIVATE_KEY_LEN {
        return Err(Error::InvalidArgument(format!(
            "private key needs {} bytes, limit is {PRIVATE_KEY_LEN}",
            raw.len()
        )));
    }
    let mut out = [0u8; PRIVATE_KEY_LEN];
    out[PRIVATE_KEY_LEN - raw.len()..].copy_from_slice(&raw);
    Ok(out)
}

/// Sign a message. The nonce comes from the pipeline seeded by the message
/// prefix, the private key, and `src`; it is used as drawn, never reduced
/// mod q, and never returned or logged.
pub fn sign(
    params: &DomainParams,
    key: &KeyPair,
    message: &[u8],
    src: &mut RandomSource,
) -> Result<Signature> {
    let digest = hash_message(message, params.n);
    let head = &message[..message.len().min(MESSAGE_PREFIX_LEN)];
    sign_prehashed(params, key, &digest, head, src)
}

/// Sign with a precomputed digest, feeding only `nonce_input` (at most the
/// first 2048 message bytes) to the nonce pipeline. This is what lets the
/// CLI stream arbitrarily large files while the nonce cost stays flat.
pub fn sign_prehashed(
    params: &DomainParams,
    key: &KeyPair,
    digest: &DigestInt,
    nonce_input: &[u8],
    src: &mut RandomSource,
) -> Result<Signature> {
    if params.n != 224 {
        return Err(Error::InvalidArgument(format!(
            "the nonce pipeline emits 224-bit nonces; signing requires N = 224, got N = {}",
            params.n
        )));
    }
    let x_bytes = encode_private_key(&key.x)?;
    let mut rejections = 0u32;
    loop {
        let (k, rejected) = draw_nonce(&params.q, nonce_input, &x_bytes, src)?;
        rejections += rejected;
        if rejections > NONCE_REJECTION_LIMIT {
            return Err(Error::TooManyRejections(NONCE_REJECTION_LIMIT));
        }
        match signature_from_nonce(params, key, digest, &k) {
            Some(sig) => return Ok(sig),
            None => {
                // degenerate r or s; regenerate the nonce
                rejections += 1;
                if rejections > NONCE_REJECTION_LIMIT {
                    return Err(Error::TooManyRejections(NONCE_REJECTION_LIMIT));
                }
            }
        }
    }
}

/// Run the pipeline until it yields a nonce in `[1, q-1]`. Rejected nonces
/// are discarded and regenerated with fresh randomness; reducing mod q
/// would bias the low range and is exactly what this function avoids.
fn draw_nonce(
    q: &BigUint,
    nonce_input: &[u8],
    x_bytes: &[u8; PRIVATE_KEY_LEN],
    src: &mut RandomSource,
) -> Result<(BigUint, u32)> {
    let mut rejected = 0u32;
    loop {
        let nonce = noncegen::generate_nonce(nonce_input, x_bytes, src)?;
        let k = nonce.to_uint();
        if !k.is_zero() && &k < q {
            return Ok((k, rejected));
        }
        rejected += 1;
        if rejected > NONCE_REJECTION_LIMIT {
            return Err(Error::TooManyRejections(NONCE_REJECTION_LIMIT));
        }
    }
}

fn signature_from_nonce(
    params: &DomainParams,
    key: &KeyPair,
    digest: &DigestInt,
    k: &BigUint,
) -> Option<Signature> {
    let r = params.g.modpow(k, &params.p) % &params.q;
    if r.is_zero() {
        return None;
    }
    let k_inv = k.modinv(&params.q)?;
    let s = k_inv * (digest.value() + &key.x * &r) % &params.q;
    if s.is_zero() {
        return None;
    }
    Some(Signature { r, s })
}

/// Signing with a caller-supplied nonce: the exact misuse the rest of this
/// module is built to prevent. Compiled only for tests and the attack
/// demonstrations behind the `test-hooks` feature.
#[cfg(any(test, feature = "test-hooks"))]
pub fn sign_with_nonce(
    params: &DomainParams,
    key: &KeyPair,
    digest: &DigestInt,
    k: &BigUint,
) -> Result<Signature> {
    if k.is_zero() || k >= &params.q {
        return Err(Error::InvalidArgument("nonce outside [1, q-1]".into()));
    }
    signature_from_nonce(params, key, digest, k)
        .ok_or_else(|| Error::InvalidArgument("degenerate signature (r or s is zero)".into()))
}

/// Verify a signature over a message. Malformed input is a `false` return,
/// never a panic or error.
pub fn verify(params: &DomainParams, y: &BigUint, message: &[u8], sig: &Signature) -> bool {
    let digest = hash_message(message, params.n);
    verify_digest(params, y, &digest, sig)
}

/// Verify against a precomputed digest.
pub fn verify_digest(
    params: &DomainParams,
    y: &BigUint,
    digest: &DigestInt,
    sig: &Signature,
) -> bool {
    if sig.r.is_zero() || sig.r >= params.q || sig.s.is_zero() || sig.s >= params.q {
        return false;
    }
    let Some(w) = sig.s.modinv(&params.q) else {
        return false;
    };
    let u1 = digest.value() * &w % &params.q;
    let u2 = &sig.r * &w % &params.q;
    let r_prime =
        params.g.modpow(&u1, &params.p) * y.modpow(&u2, &params.p) % &params.p % &params.q;
    r_prime == sig.r
}

/// Recover the private key from two signatures that reused a nonce:
/// `k = (h1 - h2) / (s1 - s2) mod q`, then `x = (s1*k - h1) / r mod q`.
/// The caller should cross-check `g^x mod p` against the public key.
pub fn recover_key_from_reuse(
    params: &DomainParams,
    digest1: &DigestInt,
    sig1: &Signature,
    digest2: &DigestInt,
    sig2: &Signature,
) -> Result<BigUint> {
    if sig1.r != sig2.r {
        return Err(Error::Recovery(
            "signatures do not share r; no nonce reuse to exploit".into(),
        ));
    }
    if sig1.s == sig2.s {
        return Err(Error::Recovery(
            "s values are equal; the s-difference is not invertible".into(),
        ));
    }
    if digest1 == digest2 {
        return Err(Error::Recovery(
            "digests are equal; the h-difference is not invertible".into(),
        ));
    }

    let q = BigInt::from_biguint(Sign::Plus, params.q.clone());
    let to_int = |u: &BigUint| BigInt::from_biguint(Sign::Plus, u.clone());
    let reduce = |v: BigInt| -> BigInt { ((v % &q) + &q) % &q };

    let h_diff = reduce(to_int(digest1.value()) - to_int(digest2.value()));
    let s_diff = reduce(to_int(&sig1.s) - to_int(&sig2.s));
    let s_diff_inv = s_diff
        .modinv(&q)
        .ok_or_else(|| Error::Recovery("s-difference not invertible mod q".into()))?;
    let k = reduce(h_diff * s_diff_inv);
    if k.is_zero() {
        return Err(Error::Recovery("recovered nonce is zero".into()));
    }
    let r_inv = to_int(&sig1.r)
        .modinv(&q)
        .ok_or_else(|| Error::Recovery("r not invertible mod q".into()))?;
    let x = reduce(reduce(to_int(&sig1.s) * k - to_int(digest1.value())) * r_inv);
    Ok(x.to_biguint().expect("reduced value is non-negative"))
}

// --- file formats -----------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ParamsFile {
    l: u32,
    n: u32,
    p: String,
    q: String,
    g: String,
}

#[derive(Serialize, Deserialize)]
struct PrivateKeyFile {
    x: String,
}

#[derive(Serialize, Deserialize)]
struct PublicKeyFile {
    y: String,
}

#[derive(Serialize, Deserialize)]
struct SignatureFile {
    r: String,
    s: String,
}

fn uint_to_hex(value: &BigUint) -> String {
    value.to_str_radix(16)
}

fn uint_from_hex(field: &str, text: &str) -> Result<BigUint> {
    BigUint::parse_bytes(text.as_bytes(), 16)
        .ok_or_else(|| Error::InvalidArgument(format!("field {field:?} is not lowercase hex")))
}

fn from_json<T: for<'a> Deserialize<'a>>(what: &str, text: &str) -> Result<T> {
    serde_json::from_str(text)
        .map_err(|e| Error::InvalidArgument(format!("malformed {what} file: {e}")))
}

impl DomainParams {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ParamsFile {
            l: self.l,
            n: self.n,
            p: uint_to_hex(&self.p),
            q: uint_to_hex(&self.q),
            g: uint_to_hex(&self.g),
        })
        .expect("params serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ParamsFile = from_json("params", text)?;
        Ok(DomainParams {
            l: file.l,
            n: file.n,
            p: uint_from_hex("p", &file.p)?,
            q: uint_from_hex("q", &file.q)?,
            g: uint_from_hex("g", &file.g)?,
        })
    }
}

impl Signature {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SignatureFile {
            r: uint_to_hex(&self.r),
            s: uint_to_hex(&self.s),
        })
        .expect("signature serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SignatureFile = from_json("signature", text)?;
        Ok(Signature {
            r: uint_from_hex("r", &file.r)?,
            s: uint_from_hex("s", &file.s)?,
        })
    }
}

pub fn private_key_to_json(x: &BigUint) -> String {
    serde_json::to_string_pretty(&PrivateKeyFile { x: uint_to_hex(x) }).expect("key serialize")
}

pub fn private_key_from_json(text: &str) -> Result<BigUint> {
    let file: PrivateKeyFile = from_json("private key", text)?;
    uint_from_hex("x", &file.x)
}

pub fn public_key_to_json(y: &BigUint) -> String {
    serde_json::to_string_pretty(&PublicKeyFile { y: uint_to_hex(y) }).expect("key serialize")
}

pub fn public_key_from_json(text: &str) -> Result<BigUint> {
    let file: PublicKeyFile = from_json("public key", text)?;
    uint_from_hex("y", &file.y)
}
