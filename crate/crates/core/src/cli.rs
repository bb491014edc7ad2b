//! The `nonceforge` command line.
//!
//! Subcommands: `params gen`, `keygen`, `sign`, `verify`, `nonce` (test
//! mode only), and `analyze avalanche|pi|chisq`. Exit codes: 0 success or
//! verification-true, 1 verification-false, 2 usage error, 3 I/O error,
//! 4 crypto/internal error.
//!
//! Seeded randomness and the small test parameter sizes are gated behind
//! `--test-mode` (or the `NONCEFORGE_TEST_MODE` environment variable):
//! deterministic signing reuses nonces by construction, which is precisely
//! the failure mode this tool exists to rule out. `sign` streams the
//! message file: the whole file goes through the message hash, but only
//! the first 2048 bytes feed the nonce pipeline, so signing cost does not
//! grow with nonce-input size.

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use sha2::{Digest, Sha224, Sha256, Sha512};

use crate::dsa::{self, DigestInt, DomainParams, KeyPair, Signature};
use crate::noncegen::{self, MESSAGE_PREFIX_LEN};
use crate::randlab;
use crate::rng::{seed_from_hex, RandomSource, SEED_LEN};
use crate::Error;

#[derive(Parser)]
#[command(
    name = "nonceforge",
    version,
    about = "DSA signing with pipeline-generated nonces, plus a randomness lab"
)]
struct Cli {
    /// Enable test-only behaviour: seeded randomness, small parameter
    /// sizes, and nonce inspection. Equivalent to NONCEFORGE_TEST_MODE=1.
    #[arg(long, global = true)]
    test_mode: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Domain parameter operations.
    Params {
        #[command(subcommand)]
        cmd: ParamsCmd,
    },
    /// Generate a key pair under existing parameters.
    Keygen {
        #[arg(long)]
        params: PathBuf,
        /// Private key output ({"x": hex}); written with mode 0600.
        #[arg(long = "out-priv")]
        out_priv: PathBuf,
        /// Public key output ({"y": hex}).
        #[arg(long = "out-pub")]
        out_pub: PathBuf,
        /// Deterministic seed, up to 128 hex chars (test mode only).
        #[arg(long)]
        seed: Option<String>,
    },
    /// Sign a message file.
    Sign {
        #[arg(long)]
        params: PathBuf,
        /// Private key file ({"x": hex}).
        #[arg(long)]
        key: PathBuf,
        /// Message file; streamed, not loaded whole.
        #[arg(long = "in")]
        input: PathBuf,
        /// Signature output ({"r": hex, "s": hex}).
        #[arg(long)]
        out: PathBuf,
        /// Deterministic seed, up to 128 hex chars (test mode only).
        #[arg(long)]
        seed: Option<String>,
    },
    /// Verify a signature; exit 0 if valid, 1 if not.
    Verify {
        #[arg(long)]
        params: PathBuf,
        /// Public key file ({"y": hex}).
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        sig: PathBuf,
    },
    /// Print the pipeline nonce for a message and key as 56 hex chars.
    /// Refused outside test mode: exposing nonces breaks the signature
    /// scheme, which is the whole point of this toolkit.
    Nonce {
        /// Private key file ({"x": hex}).
        #[arg(long)]
        key: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        /// Deterministic seed, up to 128 hex chars (test mode only).
        #[arg(long)]
        seed: Option<String>,
    },
    /// Statistical analyses of the nonce pipeline.
    Analyze {
        #[command(subcommand)]
        cmd: AnalyzeCmd,
    },
}

#[derive(Subcommand)]
enum ParamsCmd {
    /// Generate fresh domain parameters.
    Gen {
        /// Modulus bit length (2048; 1024/512 in test mode).
        #[arg(long)]
        l: u32,
        /// Subgroup order bit length (224; 160 in test mode).
        #[arg(long)]
        n: u32,
        #[arg(long)]
        out: PathBuf,
        /// Deterministic seed, up to 128 hex chars (test mode only).
        #[arg(long)]
        seed: Option<String>,
    },
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// Nonce bit-flip distribution under single message-bit flips.
    Avalanche {
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long = "message-len", default_value_t = 64)]
        message_len: usize,
        /// 28-byte pipeline key as hex (defaults to zero).
        #[arg(long)]
        key: Option<String>,
        /// Master seed, up to 128 hex chars (test mode only).
        #[arg(long)]
        seed: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Monte-Carlo pi estimate over the pipeline nonce stream.
    Pi {
        #[arg(long, default_value_t = 10_000)]
        points: u64,
        /// Number of batches; batch statistics are reported when > 1.
        #[arg(long, default_value_t = 1)]
        batches: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Byte-frequency chi-square over a generated stream.
    Chisq {
        #[arg(long, default_value_t = 1_048_576)]
        bytes: usize,
        #[arg(long, value_enum, default_value_t = Source::Nonces)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    /// Concatenated pipeline nonces under incrementing seeds.
    Nonces,
    /// The raw deterministic byte stream.
    Rng,
}

enum CliError {
    Usage(String),
    Io(String),
    Crypto(Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Crypto(_) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(msg) => format!("usage error: {msg}"),
            CliError::Io(msg) => format!("i/o error: {msg}"),
            CliError::Crypto(err) => format!("error: {err}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Crypto(err)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parse arguments, dispatch, and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = err.exit_code();
            let _ = err.print();
            // clap uses 2 for usage errors and 0 for --help/--version
            return if code == 0 { 0 } else { 2 };
        }
    };
    let test_mode = cli.test_mode || env_test_mode();
    match dispatch(cli.command, test_mode) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{}", err.message());
            err.exit_code()
        }
    }
}

fn env_test_mode() -> bool {
    std::env::var("NONCEFORGE_TEST_MODE")
        .map(|v| !v.is_empty() && v != "0")
        .unwrap_or(false)
}

fn dispatch(command: Command, test_mode: bool) -> CliResult<i32> {
    match command {
        Command::Params {
            cmd: ParamsCmd::Gen { l, n, out, seed },
        } => params_gen(l, n, &out, seed.as_deref(), test_mode),
        Command::Keygen {
            params,
            out_priv,
            out_pub,
            seed,
        } => keygen(&params, &out_priv, &out_pub, seed.as_deref(), test_mode),
        Command::Sign {
            params,
            key,
            input,
            out,
            seed,
        } => sign(&params, &key, &input, &out, seed.as_deref(), test_mode),
        Command::Verify {
            params,
            public,
            input,
            sig,
        } => verify(&params, &public, &input, &sig),
        Command::Nonce { key, input, seed } => nonce(&key, &input, seed.as_deref(), test_mode),
        Command::Analyze { cmd } => analyze(cmd, test_mode),
    }
}

/// Build the random source a command should use: system entropy unless a
/// seed was given, and seeds only in test mode.
fn make_source(seed: Option<&str>, test_mode: bool) -> CliResult<RandomSource> {
    match seed {
        None => Ok(RandomSource::system()),
        Some(_) if !test_mode => Err(CliError::Usage(
            "--seed is test-only; pass --test-mode (or set NONCEFORGE_TEST_MODE) to use it"
                .into(),
        )),
        Some(hex_seed) => RandomSource::seeded_from_hex(hex_seed)
            .map_err(|e| CliError::Usage(e.to_string())),
    }
}

fn read_text(path: &Path, what: &str) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {what} {}: {e}", path.display())))
}

fn write_text(path: &Path, what: &str, text: &str) -> CliResult<()> {
    fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write {what} {}: {e}", path.display())))
}

/// Write a file that only its owner may read; used for private keys.
fn write_private(path: &Path, what: &str, text: &str) -> CliResult<()> {
    let mut options = fs::OpenOptions::new();
    options.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        options.mode(0o600);
    }
    let mut file = options
        .open(path)
        .map_err(|e| CliError::Io(format!("cannot create {what} {}: {e}", path.display())))?;
    file.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("cannot write {what} {}: {e}", path.display())))?;
    Ok(())
}

fn load_params(path: &Path) -> CliResult<DomainParams> {
    DomainParams::from_json(&read_text(path, "params file")?).map_err(CliError::from)
}

fn load_private_key(path: &Path) -> CliResult<BigUint> {
    dsa::private_key_from_json(&read_text(path, "private key file")?).map_err(CliError::from)
}

fn params_gen(
    l: u32,
    n: u32,
    out: &Path,
    seed: Option<&str>,
    test_mode: bool,
) -> CliResult<i32> {
    match (l, n) {
        (2048, 224) => {}
        (1024, 160) | (512, 160) if test_mode => {}
        (1024, 160) | (512, 160) => {
            return Err(CliError::Usage(format!(
                "parameter size ({l}, {n}) is test-only; pass --test-mode"
            )));
        }
        _ => {
            return Err(CliError::Usage(format!(
                "unsupported parameter size ({l}, {n}); supported: (2048, 224) and, in test \
                 mode, (1024, 160) / (512, 160)"
            )));
        }
    }
    let mut src = make_source(seed, test_mode)?;
    let params = dsa::generate_domain_params(l, n, &mut src, test_mode)?;
    write_text(out, "params file", &params.to_json())?;
    println!("wrote params ({l}, {n}) to {}", out.display());
    Ok(0)
}

fn keygen(
    params_path: &Path,
    out_priv: &Path,
    out_pub: &Path,
    seed: Option<&str>,
    test_mode: bool,
) -> CliResult<i32> {
    let params = load_params(params_path)?;
    let mut src = make_source(seed, test_mode)?;
    let pair = dsa::keygen(&params, &mut src)?;
    write_private(out_priv, "private key", &dsa::private_key_to_json(&pair.x))?;
    write_text(out_pub, "public key", &dsa::public_key_to_json(&pair.y))?;
    println!(
        "wrote private key to {} and public key to {}",
        out_priv.display(),
        out_pub.display()
    );
    Ok(0)
}

/// Stream a file through the message hash while capturing the prefix the
/// nonce pipeline consumes. The file is never loaded whole.
fn stream_message(path: &Path, n_bits: u32) -> CliResult<(DigestInt, Vec<u8>)> {
    enum Hasher {
        H224(Sha224),
        H256(Sha256),
        H512(Sha512),
    }
    let mut hasher = match n_bits {
        224 => Hasher::H224(Sha224::new()),
        160 => Hasher::H256(Sha256::new()),
        _ => Hasher::H512(Sha512::new()),
    };
    let file = fs::File::open(path)
        .map_err(|e| CliError::Io(format!("cannot open message {}: {e}", path.display())))?;
    let mut reader = BufReader::new(file);
    let mut head = Vec::with_capacity(MESSAGE_PREFIX_LEN);
    let mut chunk = [0u8; 64 * 1024];
    loop {
        let read = reader
            .read(&mut chunk)
            .map_err(|e| CliError::Io(format!("cannot read message {}: {e}", path.display())))?;
        if read == 0 {
            break;
        }
        match &mut hasher {
            Hasher::H224(h) => h.update(&chunk[..read]),
            Hasher::H256(h) => h.update(&chunk[..read]),
            Hasher::H512(h) => h.update(&chunk[..read]),
        }
        if head.len() < MESSAGE_PREFIX_LEN {
            let take = read.min(MESSAGE_PREFIX_LEN - head.len());
            head.extend_from_slice(&chunk[..take]);
        }
    }
    let digest_bytes: Vec<u8> = match hasher {
        Hasher::H224(h) => h.finalize().to_vec(),
        Hasher::H256(h) => h.finalize().to_vec(),
        Hasher::H512(h) => h.finalize().to_vec(),
    };
    Ok((dsa::digest_from_hash_bytes(&digest_bytes, n_bits), head))
}

fn sign(
    params_path: &Path,
    key_path: &Path,
    input: &Path,
    out: &Path,
    seed: Option<&str>,
    test_mode: bool,
) -> CliResult<i32> {
    let params = load_params(params_path)?;
    let x = load_private_key(key_path)?;
    let key = KeyPair::from_private(&params, x)?;
    let (digest, head) = stream_message(input, params.n)?;
    let mut src = make_source(seed, test_mode)?;
    let signature = dsa::sign_prehashed(&params, &key, &digest, &head, &mut src)?;
    write_text(out, "signature file", &signature.to_json())?;
    println!("wrote signature to {}", out.display());
    Ok(0)
}

fn verify(params_path: &Path, public_path: &Path, input: &Path, sig_path: &Path) -> CliResult<i32> {
    let params = load_params(params_path)?;
    let y = dsa::public_key_from_json(&read_text(public_path, "public key file")?)?;
    let signature = Signature::from_json(&read_text(sig_path, "signature file")?)?;
    let (digest, _) = stream_message(input, params.n)?;
    if dsa::verify_digest(&params, &y, &digest, &signature) {
        println!("signature valid");
        Ok(0)
    } else {
        println!("signature INVALID");
        Ok(1)
    }
}

fn nonce(key_path: &Path, input: &Path, seed: Option<&str>, test_mode: bool) -> CliResult<i32> {
    if !test_mode {
        return Err(CliError::Usage(
            "nonce inspection exposes per-signature secrets and is refused outside test mode"
                .into(),
        ));
    }
    let x = load_private_key(key_path)?;
    let key_bytes = dsa::encode_private_key(&x)?;
    // only the pipeline prefix is ever needed
    let file = fs::File::open(input)
        .map_err(|e| CliError::Io(format!("cannot open message {}: {e}", input.display())))?;
    let mut head = Vec::with_capacity(MESSAGE_PREFIX_LEN);
    file.take(MESSAGE_PREFIX_LEN as u64)
        .read_to_end(&mut head)
        .map_err(|e| CliError::Io(format!("cannot read message {}: {e}", input.display())))?;
    let mut src = make_source(seed, test_mode)?;
    let nonce = noncegen::generate_nonce(&head, &key_bytes, &mut src)?;
    println!("{}", nonce.to_hex());
    Ok(0)
}

fn analyze(cmd: AnalyzeCmd, test_mode: bool) -> CliResult<i32> {
    match cmd {
        AnalyzeCmd::Avalanche {
            trials,
            message_len,
            key,
            seed,
            format,
        } => {
            let key_bytes = match key {
                None => [0u8; 28],
                Some(hex_key) => {
                    let raw = hex::decode(&hex_key)
                        .map_err(|e| CliError::Usage(format!("--key is not hex: {e}")))?;
                    raw.try_into().map_err(|_| {
                        CliError::Usage("--key must be exactly 28 bytes of hex".into())
                    })?
                }
            };
            let master_seed = analysis_seed(seed.as_deref(), test_mode)?;
            let report = randlab::avalanche_test(trials, message_len, &key_bytes, &master_seed)?;
            emit(format, &report, randlab::AvalancheReport::text_table);
            Ok(0)
        }
        AnalyzeCmd::Pi {
            points,
            batches,
            format,
        } => {
            let needed = 6usize
                .checked_mul((points * batches.max(1)) as usize)
                .ok_or_else(|| CliError::Usage("points * batches overflows".into()))?;
            let stream = randlab::pipeline_nonce_stream(&[0u8; 28], PI_STREAM_MESSAGE, needed)?;
            let report = if batches > 1 {
                randlab::monte_carlo_pi_batched(batches, points, &stream)?
            } else {
                randlab::monte_carlo_pi(points, &stream)?
            };
            emit(format, &report, randlab::PiReport::text_table);
            Ok(0)
        }
        AnalyzeCmd::Chisq {
            bytes,
            source,
            format,
        } => {
            let stream = match source {
                Source::Nonces => {
                    randlab::pipeline_nonce_stream(&[0u8; 28], PI_STREAM_MESSAGE, bytes)?
                }
                Source::Rng => RandomSource::seeded([0u8; SEED_LEN])
                    .next_bytes(bytes)
                    .map_err(CliError::from)?,
            };
            let report = randlab::chi_square_bytes(&stream)?;
            emit(format, &report, randlab::ChiSquareReport::text_table);
            Ok(0)
        }
    }
}

/// Fixed message fed to the nonce stream used by the pi and chi-square
/// analyses; the stream varies through the incrementing seeds.
const PI_STREAM_MESSAGE: &[u8] = b"nonceforge analysis stream";

fn analysis_seed(seed: Option<&str>, test_mode: bool) -> CliResult<[u8; SEED_LEN]> {
    match seed {
        None => Ok([0u8; SEED_LEN]),
        Some(_) if !test_mode => Err(CliError::Usage(
            "--seed is test-only; pass --test-mode (or set NONCEFORGE_TEST_MODE) to use it"
                .into(),
        )),
        Some(hex_seed) => seed_from_hex(hex_seed).map_err(|e| CliError::Usage(e.to_string())),
    }
}

fn emit<R: serde::Serialize>(format: Format, report: &R, text: impl Fn(&R) -> String) {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(report).expect("report serializes")
        ),
        Format::Text => print!("{}", text(report)),
    }
}
