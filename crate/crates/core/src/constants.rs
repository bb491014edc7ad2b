//! The fixed constants mixed into the nonce pipeline.
//!
//! Four constants ship as a hex data file embedded at compile time:
//!
//! * `A` — 64 bytes, input to the Rijndael key expansion.
//! * `P` — 32 bytes, XOR mask in the Feistel round-key schedule.
//! * `Q` — 28 bytes, final mask of the digest compression.
//! * `Z` — 256 bytes, a deliberately non-invertible substitution table.
//!
//! The loader validates lengths, the documented leading bytes, and that `Z`
//! really is non-invertible (contains at least one duplicated output byte).
//! SHA-256 checksums of the raw constants are documented in the data file
//! and re-verified by the test suite.

use std::sync::LazyLock;

use crate::{Error, Result};

const CONSTANTS_FILE: &str = include_str!("../data/constants.hex");

static TABLE: LazyLock<ConstantsTable> = LazyLock::new(|| {
    ConstantsTable::parse(CONSTANTS_FILE).expect("embedded constants file is valid")
});

/// The A/P/Q/Z constants table.
pub struct ConstantsTable {
    a: [u8; 64],
    p: [u8; 32],
    q: [u8; 28],
    z: [u8; 256],
}

impl std::fmt::Debug for ConstantsTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ConstantsTable(A/P/Q/Z)")
    }
}

impl ConstantsTable {
    /// The table shipped with the crate.
    pub fn get() -> &'static ConstantsTable {
        &TABLE
    }

    /// Parse and validate a constants file: one `NAME = HEX` entry per
    /// line, `#` comments and blank lines ignored.
    pub fn parse(text: &str) -> Result<ConstantsTable> {
        let mut a = None;
        let mut p = None;
        let mut q = None;
        let mut z = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, value) = line.split_once('=').ok_or_else(|| {
                Error::Constants(format!("line {}: expected NAME = HEX", lineno + 1))
            })?;
            let bytes = hex::decode(value.trim()).map_err(|e| {
                Error::Constants(format!("line {}: bad hex: {e}", lineno + 1))
            })?;
            match name.trim() {
                "A" => a = Some(bytes),
                "P" => p = Some(bytes),
                "Q" => q = Some(bytes),
                "Z" => z = Some(bytes),
                other => {
                    return Err(Error::Constants(format!("unknown constant {other:?}")));
                }
            }
        }

        let a = take_exact::<64>("A", a)?;
        let p = take_exact::<32>("P", p)?;
        let q = take_exact::<28>("Q", q)?;
        let z = take_exact::<256>("Z", z)?;

        check_prefix("A", &a, &[0xbb, 0x67, 0xae, 0x85])?;
        check_prefix("P", &p, &[0xb9, 0xe1])?;
        check_prefix("Q", &q, &[0x29, 0x42])?;
        check_prefix("Z", &z, &[0x24, 0x3f, 0x6a, 0x88])?;

        // Z must map at least two inputs to the same output.
        let mut seen = [false; 256];
        let mut duplicate = false;
        for &b in z.iter() {
            if seen[b as usize] {
                duplicate = true;
                break;
            }
            seen[b as usize] = true;
        }
        if !duplicate {
            return Err(Error::Constants(
                "Z is a permutation; expected a non-invertible table".into(),
            ));
        }

        Ok(ConstantsTable { a, p, q, z })
    }

    pub fn a(&self) -> &[u8; 64] {
        &self.a
    }

    pub fn p(&self) -> &[u8; 32] {
        &self.p
    }

    pub fn q(&self) -> &[u8; 28] {
        &self.q
    }

    pub fn z(&self) -> &[u8; 256] {
        &self.z
    }
}

fn take_exact<const N: usize>(name: &'static str, value: Option<Vec<u8>>) -> Result<[u8; N]> {
    let value = value.ok_or_else(|| Error::Constants(format!("constant {name} missing")))?;
    let got = value.len();
    value.try_into().map_err(|_| Error::InvalidLength {
        what: name,
        expected: N,
        got,
    })
}

fn check_prefix(name: &str, value: &[u8], prefix: &[u8]) -> Result<()> {
    if !value.starts_with(prefix) {
        return Err(Error::Constants(format!(
            "constant {name} does not begin with {}",
            hex::encode(prefix)
        )));
    }
    Ok(())
}
