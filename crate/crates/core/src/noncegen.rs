//! The nonce-generation pipeline.
//!
//! A 224-bit nonce is derived from the message and the signer's private key
//! in fixed stages:
//!
//! 1. [`expand_key_initial`] — 28-byte private key to 32-byte partially
//!    expanded key (PEK) by appending four randomly indexed key bytes.
//! 2. [`pad_and_block`] — first 2048 bytes of the message, null-padded and
//!    cut into 64-byte blocks (1 to 32 of them).
//! 3. [`rijndael_expand`] — PEK plus constant A to the 64-byte fully
//!    expanded key (FEK), the running XOR accumulator.
//! 4. Per block: a fresh 64-byte round key from the random source, an
//!    8-round Feistel substitution of the block under the PEK
//!    ([`block_substitute`]), one keyed permutation
//!    ([`crate::shabal::shabal_permute`]), a 7:4 bit compression
//!    ([`compress_7to4`]), a byte substitution through the non-invertible
//!    table Z ([`sbox_substitute`]), and an XOR into the FEK.
//! 5. HMAC-SHA-512 of the FEK under the PEK, compressed to 28 bytes by
//!    [`digest_compress`].
//!
//! Everything is a total function of its inputs and the random source, so a
//! seeded source makes the whole pipeline bit-reproducible. The stages are
//! deliberately one-way; nothing here inverts.

use core::fmt;

use hmac::{Hmac, Mac};
use num_bigint::BigUint;
use sha2::Sha512;

use crate::constants::ConstantsTable;
use crate::rng::RandomSource;
use crate::shabal;
use crate::{Error, Result};

/// Private key width in bytes (224 bits).
pub const PRIVATE_KEY_LEN: usize = 28;

/// Largest number of message bytes the pipeline reads.
pub const MESSAGE_PREFIX_LEN: usize = 2048;

/// Number of Feistel rounds in the block substitution.
pub const FEISTEL_ROUNDS: u8 = 8;

/// The published Rijndael forward S-box.
const RIJNDAEL_SBOX: [u8; 256] = [
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
];

/// Key-derived values never print their bytes; a stray debug log must not
/// leak nonce or key material.
macro_rules! redacted_debug {
    ($name:ident) => {
        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($name), "(redacted)"))
            }
        }
    };
}

redacted_debug!(PartiallyExpandedKey);
redacted_debug!(FullyExpandedKey);
redacted_debug!(MessageBlock);
redacted_debug!(RoundKey512);
redacted_debug!(PermutedBlock);
redacted_debug!(CompressedPermutedBlock);
redacted_debug!(Nonce);

/// 32-byte partially expanded key: the private key with four randomly
/// selected key bytes appended.
#[derive(Clone, PartialEq, Eq)]
pub struct PartiallyExpandedKey([u8; 32]);

impl PartiallyExpandedKey {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Ok(PartiallyExpandedKey(fixed::<32>("partially expanded key", bytes)?))
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

/// 64-byte fully expanded key, also the pipeline's running accumulator.
#[derive(Clone, PartialEq, Eq)]
pub struct FullyExpandedKey([u8; 64]);

impl FullyExpandedKey {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Ok(FullyExpandedKey(fixed::<64>("fully expanded key", bytes)?))
    }

    pub fn as_bytes(&self) -> &[u8; 64] {
        &self.0
    }

    /// Fold a compressed permuted block into the accumulator.
    pub fn xor_assign(&mut self, block: &CompressedPermutedBlock) {
        for (acc, b) in self.0.iter_mut().zip(block.as_bytes()) {
            *acc ^= b;
        }
    }
}

/// One 64-byte message block with its 1-based position.
#[derive(Clone, PartialEq, Eq)]
pub struct MessageBlock {
    bytes: [u8; 64],
    index: usize,
}

impl MessageBlock {
    pub fn new(bytes: &[u8], index: usize) -> Result<Self> {
        if !(1..=32).contains(&index) {
            return Err(Error::InvalidArgument(format!(
                "block index {index} outside 1..=32"
            )));
        }
        Ok(MessageBlock {
            bytes: fixed::<64>("message block", bytes)?,
            index,
        })
    }

    pub fn as_bytes(&self) -> &[u8; 64] {
        &self.bytes
    }

    /// 1-based position of this block within the padded message.
    pub fn index(&self) -> usize {
        self.index
    }
}

/// 64-byte random round key feeding the keyed permutation.
#[derive(Clone, PartialEq, Eq)]
pub struct RoundKey512([u8; 64]);

impl RoundKey512 {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Ok(RoundKey512(fixed::<64>("round key", bytes)?))
    }

    pub fn as_bytes(&self) -> &[u8; 64] {
        &self.0
    }
}

/// 32-byte Feistel round key together with the round it belongs to.
#[derive(Clone, PartialEq, Eq)]
pub struct FeistelRoundKey {
    bytes: [u8; 32],
    round: u8,
}

redacted_debug!(FeistelRoundKey);

impl FeistelRoundKey {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.bytes
    }

    pub fn round(&self) -> u8 {
        self.round
    }
}

/// 112-byte output of the keyed permutation (the serialized A and B words).
#[derive(Clone, PartialEq, Eq)]
pub struct PermutedBlock([u8; 112]);

impl PermutedBlock {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Ok(PermutedBlock(fixed::<112>("permuted block", bytes)?))
    }

    pub fn as_bytes(&self) -> &[u8; 112] {
        &self.0
    }
}

/// 64-byte compressed permuted message block.
#[derive(Clone, PartialEq, Eq)]
pub struct CompressedPermutedBlock([u8; 64]);

impl CompressedPermutedBlock {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Ok(CompressedPermutedBlock(fixed::<64>(
            "compressed permuted block",
            bytes,
        )?))
    }

    pub fn as_bytes(&self) -> &[u8; 64] {
        &self.0
    }
}

/// The 224-bit nonce.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Nonce([u8; 28]);

impl Nonce {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Ok(Nonce(fixed::<28>("nonce", bytes)?))
    }

    pub fn as_bytes(&self) -> &[u8; 28] {
        &self.0
    }

    /// The nonce as the big-endian integer it encodes.
    pub fn to_uint(&self) -> BigUint {
        BigUint::from_bytes_be(&self.0)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

fn fixed<const N: usize>(what: &'static str, bytes: &[u8]) -> Result<[u8; N]> {
    bytes.try_into().map_err(|_| Error::InvalidLength {
        what,
        expected: N,
        got: bytes.len(),
    })
}

/// Expand a 28-byte private key to the 32-byte PEK: draw four bytes from
/// the source, reduce each mod 28, and append the key bytes at those
/// indices (duplicates allowed).
pub fn expand_key_initial(
    private_key: &[u8],
    src: &mut RandomSource,
) -> Result<PartiallyExpandedKey> {
    let key = fixed::<PRIVATE_KEY_LEN>("private key", private_key)?;
    let picks = src.next_bytes(4)?;
    let mut out = [0u8; 32];
    out[..28].copy_from_slice(&key);
    for (slot, pick) in out[28..].iter_mut().zip(picks) {
        *slot = key[(pick % 28) as usize];
    }
    Ok(PartiallyExpandedKey(out))
}

/// Truncate the message to its first 2048 bytes, null-pad to a multiple of
/// 64, and split into blocks. The empty message yields one all-zero block,
/// so there is always at least one block and never more than 32. Only the
/// first 2048 bytes of the input are ever read.
pub fn pad_and_block(message: &[u8]) -> Vec<MessageBlock> {
    let head = &message[..message.len().min(MESSAGE_PREFIX_LEN)];
    let block_count = head.len().div_ceil(64).max(1);
    let mut blocks = Vec::with_capacity(block_count);
    for i in 0..block_count {
        let mut bytes = [0u8; 64];
        let start = 64 * i;
        let end = head.len().min(start + 64);
        if start < end {
            bytes[..end - start].copy_from_slice(&head[start..end]);
        }
        blocks.push(MessageBlock {
            bytes,
            index: i + 1,
        });
    }
    blocks
}

/// The Rijndael key-schedule core: rotate the word left one byte, push each
/// byte through the S-box, and XOR the round constant into the first byte.
fn g_core(word: [u8; 4], round: u8) -> [u8; 4] {
    let rcon = match round {
        1 => 0x01,
        2 => 0x02,
        _ => unreachable!("only rounds 1 and 2 occur"),
    };
    let mut out = [
        RIJNDAEL_SBOX[word[1] as usize],
        RIJNDAEL_SBOX[word[2] as usize],
        RIJNDAEL_SBOX[word[3] as usize],
        RIJNDAEL_SBOX[word[0] as usize],
    ];
    out[0] ^= rcon;
    out
}

/// Expand the 32-byte PEK to the 64-byte FEK using the Rijndael
/// key-schedule core over two 16-byte halves.
///
/// Each half fills a 4x4 state array column-major and is read back out
/// row-wise as four 4-byte words; the words are XOR-ed with the first four
/// 4-byte slices of the corresponding 32-byte half of `data` (the remaining
/// data bytes are unused). The extended words chain through the key-schedule
/// core, and the output interleaves plain and extended word groups.
pub fn rijndael_expand(pek: &PartiallyExpandedKey, data: &[u8]) -> Result<FullyExpandedKey> {
    let data = fixed::<64>("expansion data block", data)?;
    let mut out = [0u8; 64];
    for half_idx in 0..2 {
        let half = &pek.as_bytes()[16 * half_idx..16 * half_idx + 16];
        // Column-major fill then row-wise read: word i collects the bytes
        // i, i+4, i+8, i+12 of the half.
        let mut words = [[0u8; 4]; 4];
        for (i, word) in words.iter_mut().enumerate() {
            for (b, slot) in word.iter_mut().enumerate() {
                *slot = half[i + 4 * b];
            }
            let data_slice = &data[32 * half_idx + 4 * i..32 * half_idx + 4 * i + 4];
            for (slot, d) in word.iter_mut().zip(data_slice) {
                *slot ^= d;
            }
        }
        let mut extended = [[0u8; 4]; 4];
        extended[0] = xor4(words[0], g_core(words[3], half_idx as u8 + 1));
        for i in 1..4 {
            extended[i] = xor4(extended[i - 1], words[i]);
        }
        let base = 32 * half_idx;
        for i in 0..4 {
            out[base + 4 * i..base + 4 * i + 4].copy_from_slice(&words[i]);
            out[base + 16 + 4 * i..base + 16 + 4 * i + 4].copy_from_slice(&extended[i]);
        }
    }
    Ok(FullyExpandedKey(out))
}

fn xor4(a: [u8; 4], b: [u8; 4]) -> [u8; 4] {
    [a[0] ^ b[0], a[1] ^ b[1], a[2] ^ b[2], a[3] ^ b[3]]
}

/// Derive the round key for Feistel round `round` (1..=8) from the previous
/// round's key: rotate every byte left by 1 bit (rounds 1-2) or 2 bits
/// (rounds 3-8), then XOR with the constant P.
pub fn generate_round_key(prev: &[u8], round: u8) -> Result<FeistelRoundKey> {
    let prev = fixed::<32>("previous round key", prev)?;
    if !(1..=FEISTEL_ROUNDS).contains(&round) {
        return Err(Error::InvalidArgument(format!(
            "feistel round {round} outside 1..=8"
        )));
    }
    let shift = if round < 3 { 1 } else { 2 };
    let p = ConstantsTable::get().p();
    let mut bytes = [0u8; 32];
    for (i, out) in bytes.iter_mut().enumerate() {
        *out = prev[i].rotate_left(shift) ^ p[i];
    }
    Ok(FeistelRoundKey { bytes, round })
}

/// The Feistel round function: substitute each data byte through the
/// Rijndael S-box and XOR with the round key.
pub fn round_cipher(data: &[u8], key: &FeistelRoundKey) -> Result<[u8; 32]> {
    let data = fixed::<32>("round cipher data", data)?;
    let mut out = [0u8; 32];
    for i in 0..32 {
        out[i] = key.bytes[i] ^ RIJNDAEL_SBOX[data[i] as usize];
    }
    Ok(out)
}

/// State captured after each Feistel round, for diagnostics and tests.
#[derive(Clone)]
pub struct FeistelRound {
    pub round: u8,
    pub round_key: [u8; 32],
    pub state: [u8; 64],
}

/// Run the 8-round Feistel substitution of a message block under the PEK.
///
/// The round-key chain starts at the PEK and depends only on it, never on
/// the message. Within a round, bytes 0..32 are the right half and bytes
/// 32..64 the left half; the next state is `left || (right XOR F(left))`,
/// which realizes the half-swap.
pub fn block_substitute(pek: &PartiallyExpandedKey, block: &MessageBlock) -> [u8; 64] {
    let (out, _) = feistel(pek, block.as_bytes(), false);
    out
}

/// [`block_substitute`] with the per-round trace attached.
pub fn block_substitute_traced(
    pek: &PartiallyExpandedKey,
    block: &MessageBlock,
) -> ([u8; 64], Vec<FeistelRound>) {
    let (out, trace) = feistel(pek, block.as_bytes(), true);
    (out, trace)
}

fn feistel(pek: &PartiallyExpandedKey, block: &[u8; 64], traced: bool) -> ([u8; 64], Vec<FeistelRound>) {
    let mut chain = *pek.as_bytes();
    let mut data = *block;
    let mut trace = Vec::new();
    for round in 1..=FEISTEL_ROUNDS {
        let key = generate_round_key(&chain, round).expect("chain key is always 32 bytes");
        chain = key.bytes;
        let (right, left) = data.split_at(32);
        let f = round_cipher(left, &key).expect("halves are always 32 bytes");
        let mut next = [0u8; 64];
        next[..32].copy_from_slice(left);
        for i in 0..32 {
            next[32 + i] = right[i] ^ f[i];
        }
        data = next;
        if traced {
            trace.push(FeistelRound {
                round,
                round_key: key.bytes,
                state: data,
            });
        }
    }
    (data, trace)
}

/// Compress 112 bytes (896 bits) to 64 bytes: scan most-significant-bit
/// first in 128 groups of 7 bits and replace each group `b6..b0` with the
/// nibble `(b6 b5 b4 b3) XOR (0 b2 b1 b0)`, packing two nibbles per byte,
/// first nibble high.
pub fn compress_7to4(input: &[u8]) -> Result<[u8; 64]> {
    let input = fixed::<112>("permuted block", input)?;
    let bit = |i: usize| (input[i / 8] >> (7 - i % 8)) & 1;
    let mut out = [0u8; 64];
    for group in 0..128 {
        let base = 7 * group;
        let hi = bit(base) << 3 | bit(base + 1) << 2 | bit(base + 2) << 1 | bit(base + 3);
        let lo = bit(base + 4) << 2 | bit(base + 5) << 1 | bit(base + 6);
        let nibble = hi ^ lo;
        if group % 2 == 0 {
            out[group / 2] = nibble << 4;
        } else {
            out[group / 2] |= nibble;
        }
    }
    Ok(out)
}

/// Substitute every byte through the non-invertible table Z.
pub fn sbox_substitute(input: &[u8]) -> Result<CompressedPermutedBlock> {
    let input = fixed::<64>("compressed block", input)?;
    let z = ConstantsTable::get().z();
    let mut out = [0u8; 64];
    for (o, b) in out.iter_mut().zip(input) {
        *o = z[b as usize];
    }
    Ok(CompressedPermutedBlock(out))
}

/// HMAC-SHA-512 of the FEK keyed by the PEK.
pub fn keyed_digest(pek: &PartiallyExpandedKey, fek: &FullyExpandedKey) -> [u8; 64] {
    let mut mac = Hmac::<Sha512>::new_from_slice(pek.as_bytes()).expect("any key length works");
    mac.update(fek.as_bytes());
    mac.finalize().into_bytes().into()
}

/// Compress a 64-byte digest to the 28-byte nonce: XOR successive byte
/// pairs down to 32 bytes, fold the last 4 bytes into the first 4, drop the
/// last 4, and mask with the constant Q.
pub fn digest_compress(digest: &[u8]) -> Result<Nonce> {
    let digest = fixed::<64>("digest", digest)?;
    let mut temp = [0u8; 32];
    for (i, t) in temp.iter_mut().enumerate() {
        *t = digest[2 * i] ^ digest[2 * i + 1];
    }
    for i in 0..4 {
        temp[i] ^= temp[31 - i];
    }
    let q = ConstantsTable::get().q();
    let mut out = [0u8; 28];
    for (i, o) in out.iter_mut().enumerate() {
        *o = temp[i] ^ q[i];
    }
    Ok(Nonce(out))
}

/// Run the whole pipeline. Consumes exactly `4 + 64 * n` bytes from the
/// source, where `n` is the number of message blocks.
pub fn generate_nonce(
    message: &[u8],
    private_key: &[u8],
    src: &mut RandomSource,
) -> Result<Nonce> {
    let pek = expand_key_initial(private_key, src)?;
    let blocks = pad_and_block(message);
    let mut fek = rijndael_expand(&pek, ConstantsTable::get().a())?;
    for block in &blocks {
        let round_key = RoundKey512::from_bytes(&src.next_bytes(64)?)?;
        let smb = block_substitute(&pek, block);
        let permuted = shabal::shabal_permute(&smb, round_key.as_bytes())?;
        let cpmb = sbox_substitute(&compress_7to4(permuted.as_bytes())?)?;
        fek.xor_assign(&cpmb);
    }
    let digest = keyed_digest(&pek, &fek);
    digest_compress(&digest)
}
