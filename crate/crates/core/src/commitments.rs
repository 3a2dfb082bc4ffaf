//! Two-round commitment schemes where the receiver speaks first.
//!
//! `Binding` is the pseudorandom-generator construction: the receiver sends
//! a random string ρ (3k bits per committed bit) and the sender answers with
//! `Expand(s)` or `Expand(s) ⊕ ρ` for a fresh k-bit seed `s`. `Hiding` is the
//! Pedersen form `g^x · h^r mod p` over a prime-order subgroup.
//!
//! Shipped groups (`params/group_*.txt`) were produced as follows: `p` is the
//! smallest safe prime `2q + 1` above `2^60` (toy) or `2^255` (default),
//! `g = 4`, and `h` is the square of `SHA-256("pedersen-h-<name>:<ctr>") mod p`
//! for the first counter giving `h ∉ {0, 1}`. Nobody knows `log_g h`.

use crate::bits::BitString;
use crate::seed;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng as _, RngCore};
use std::sync::{Arc, OnceLock};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CommitError {
    #[error("unsupported security parameter k={0} (need 4 <= k <= 62)")]
    UnsupportedK(usize),
    #[error("message has {got} bits, parameters expect {expected}")]
    Arity { expected: usize, got: usize },
    #[error("bad group parameters: {0}")]
    BadGroup(String),
    #[error("bad expander pattern: {0}")]
    BadPattern(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeTag {
    Binding,
    Hiding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpanderTag {
    Mixer,
    CircuitFriendly,
}

impl std::str::FromStr for ExpanderTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mixer" => Ok(ExpanderTag::Mixer),
            "circuit_friendly" => Ok(ExpanderTag::CircuitFriendly),
            other => Err(format!("unknown expander {other:?}")),
        }
    }
}

/// The 64-bit finalizer used by the mixer expander.
pub fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}

/// Index taps of the circuit-friendly expander: output bit `j` is
/// `s[a] ^ (s[b] & s[c])` for `taps[j] = [a, b, c]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpanderPattern {
    k: usize,
    taps: Vec<[usize; 3]>,
}

const PATTERN_K4: &str = include_str!("../params/expander_k4.txt");
const PATTERN_K8: &str = include_str!("../params/expander_k8.txt");

impl ExpanderPattern {
    /// The deterministic pattern for seed length `k`: `a = j mod k`, and
    /// `b`, `c` drawn as distinct indices different from `a` from a stream
    /// keyed by `k`. The shipped files are exactly this output.
    pub fn generate(k: usize) -> Result<Self, CommitError> {
        check_k(k)?;
        let mut rng = seed::rng_for(0, "expander-pattern", k as u64);
        let taps = (0..3 * k)
            .map(|j| {
                let a = j % k;
                let b = loop {
                    let b = rng.gen_range(0..k);
                    if b != a {
                        break b;
                    }
                };
                let c = loop {
                    let c = rng.gen_range(0..k);
                    if c != a && c != b {
                        break c;
                    }
                };
                [a, b, c]
            })
            .collect();
        Ok(ExpanderPattern { k, taps })
    }

    /// The pattern for `k`, from the shipped file when one exists.
    pub fn for_k(k: usize) -> Result<Arc<Self>, CommitError> {
        static K4: OnceLock<Arc<ExpanderPattern>> = OnceLock::new();
        static K8: OnceLock<Arc<ExpanderPattern>> = OnceLock::new();
        match k {
            4 => Ok(K4.get_or_init(|| Arc::new(Self::parse(PATTERN_K4, 4).unwrap())).clone()),
            8 => Ok(K8.get_or_init(|| Arc::new(Self::parse(PATTERN_K8, 8).unwrap())).clone()),
            _ => Ok(Arc::new(Self::generate(k)?)),
        }
    }

    pub fn parse(text: &str, k: usize) -> Result<Self, CommitError> {
        let mut taps = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let idx: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| CommitError::BadPattern(format!("line {}: {e}", n + 1)))?;
            if idx.len() != 3 || idx.iter().any(|&i| i >= k) {
                return Err(CommitError::BadPattern(format!("line {}: expected three indices below {k}", n + 1)));
            }
            taps.push([idx[0], idx[1], idx[2]]);
        }
        if taps.len() != 3 * k {
            return Err(CommitError::BadPattern(format!("{} lines, expected {}", taps.len(), 3 * k)));
        }
        Ok(ExpanderPattern { k, taps })
    }

    pub fn to_text(&self) -> String {
        self.taps.iter().map(|[a, b, c]| format!("{a} {b} {c}\n")).collect()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn taps(&self) -> &[[usize; 3]] {
        &self.taps
    }
}

fn check_k(k: usize) -> Result<(), CommitError> {
    if (4..=62).contains(&k) {
        Ok(())
    } else {
        Err(CommitError::UnsupportedK(k))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expander {
    Mixer,
    CircuitFriendly(Arc<ExpanderPattern>),
}

impl Expander {
    pub fn new(tag: ExpanderTag, k: usize) -> Result<Self, CommitError> {
        check_k(k)?;
        Ok(match tag {
            ExpanderTag::Mixer => Expander::Mixer,
            ExpanderTag::CircuitFriendly => Expander::CircuitFriendly(ExpanderPattern::for_k(k)?),
        })
    }

    pub fn tag(&self) -> ExpanderTag {
        match self {
            Expander::Mixer => ExpanderTag::Mixer,
            Expander::CircuitFriendly(_) => ExpanderTag::CircuitFriendly,
        }
    }

    /// Expands a k-bit seed (low bits of `s`) to 3k bits packed LSB-first.
    pub fn expand_words(&self, s: u64, k: usize) -> [u64; 3] {
        match self {
            Expander::Mixer => {
                // Each block hashes the seed with a two-bit block index below it.
                let mut out = [mix64(s << 2), mix64((s << 2) | 1), mix64((s << 2) | 2)];
                let n = 3 * k;
                for (w, word) in out.iter_mut().enumerate() {
                    let lo = 64 * w;
                    if n <= lo {
                        *word = 0;
                    } else if n < lo + 64 {
                        *word &= (1u64 << (n - lo)) - 1;
                    }
                }
                out
            }
            Expander::CircuitFriendly(p) => {
                let mut out = [0u64; 3];
                for (j, &[a, b, c]) in p.taps.iter().enumerate() {
                    let bit = ((s >> a) ^ ((s >> b) & (s >> c))) & 1;
                    out[j / 64] |= bit << (j % 64);
                }
                out
            }
        }
    }

    pub fn expand(&self, s: u64, k: usize) -> BitString {
        let w = self.expand_words(s, k);
        BitString::from_words(w.to_vec(), 3 * k)
    }
}

/// A prime-order subgroup of `Z_p^*` with two generators.
#[derive(Debug, Clone)]
pub struct Group {
    pub p: BigUint,
    pub q: BigUint,
    pub g: BigUint,
    pub h: BigUint,
    small: Option<[u64; 4]>,
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.q == other.q && self.g == other.g && self.h == other.h
    }
}
impl Eq for Group {}

const GROUP_TOY61: &str = include_str!("../params/group_toy61.txt");
const GROUP_DEFAULT256: &str = include_str!("../params/group_default256.txt");

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        e >>= 1;
    }
    acc
}

impl Group {
    pub fn new(p: BigUint, q: BigUint, g: BigUint, h: BigUint) -> Result<Self, CommitError> {
        let one = BigUint::one();
        if p <= BigUint::from(3u32) || q <= one {
            return Err(CommitError::BadGroup("modulus too small".into()));
        }
        if !((&p - &one) % &q).is_zero() {
            return Err(CommitError::BadGroup("q does not divide p-1".into()));
        }
        for (name, x) in [("g", &g), ("h", &h)] {
            if x <= &one || x >= &p {
                return Err(CommitError::BadGroup(format!("{name} out of range")));
            }
            if x.modpow(&q, &p) != one {
                return Err(CommitError::BadGroup(format!("{name} does not have order q")));
            }
        }
        let small = if p.bits() <= 63 {
            Some([to_u64(&p), to_u64(&q), to_u64(&g), to_u64(&h)])
        } else {
            None
        };
        Ok(Group { p, q, g, h, small })
    }

    /// Parses the text format: p, q, g, h in lowercase hex, one per line.
    pub fn parse(text: &str) -> Result<Self, CommitError> {
        let vals: Vec<BigUint> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| BigUint::parse_bytes(l.as_bytes(), 16).ok_or_else(|| CommitError::BadGroup(format!("not hex: {l:?}"))))
            .collect::<Result<_, _>>()?;
        if vals.len() != 4 {
            return Err(CommitError::BadGroup(format!("expected 4 lines, got {}", vals.len())));
        }
        let mut it = vals.into_iter();
        Group::new(it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
    }

    pub fn to_text(&self) -> String {
        format!("{:x}\n{:x}\n{:x}\n{:x}\n", self.p, self.q, self.g, self.h)
    }

    pub fn toy61() -> Arc<Group> {
        static G: OnceLock<Arc<Group>> = OnceLock::new();
        G.get_or_init(|| Arc::new(Group::parse(GROUP_TOY61).expect("shipped toy group"))).clone()
    }

    pub fn default256() -> Arc<Group> {
        static G: OnceLock<Arc<Group>> = OnceLock::new();
        G.get_or_init(|| Arc::new(Group::parse(GROUP_DEFAULT256).expect("shipped default group"))).clone()
    }

    /// The same group with a different second generator.
    pub fn with_h(&self, h: BigUint) -> Result<Group, CommitError> {
        Group::new(self.p.clone(), self.q.clone(), self.g.clone(), h)
    }

    /// The same group with a different second generator `h = g^t`.
    pub fn with_h_exponent(&self, t: &BigUint) -> Result<Group, CommitError> {
        let h = self.pow(&self.g, t);
        Group::new(self.p.clone(), self.q.clone(), self.g.clone(), h)
    }

    pub fn pow(&self, base: &BigUint, e: &BigUint) -> BigUint {
        match self.small {
            Some([p, ..]) => BigUint::from(powmod(to_u64(base), to_u64(e), p)),
            None => base.modpow(e, &self.p),
        }
    }

    /// `g^x · h^r mod p`.
    pub fn pedersen(&self, x: &BigUint, r: &BigUint) -> BigUint {
        match self.small {
            Some([p, _, g, h]) => BigUint::from(mulmod(powmod(g, to_u64(x), p), powmod(h, to_u64(r), p), p)),
            None => (self.g.modpow(x, &self.p) * self.h.modpow(r, &self.p)) % &self.p,
        }
    }

    pub fn element_bits(&self) -> usize {
        self.p.bits() as usize
    }

    pub fn exponent_bits(&self) -> usize {
        self.q.bits() as usize
    }

    pub fn random_exponent<R: RngCore + ?Sized>(&self, rng: &mut R) -> BigUint {
        let bits = self.exponent_bits();
        loop {
            let r = to_biguint(&BitString::random(rng, bits));
            if r < self.q {
                return r;
            }
        }
    }
}

fn to_u64(x: &BigUint) -> u64 {
    x.iter_u64_digits().next().unwrap_or(0)
}

pub fn to_biguint(bits: &BitString) -> BigUint {
    BigUint::from_bytes_le(&bits.to_bytes())
}

pub fn from_biguint(x: &BigUint, len: usize) -> BitString {
    BitString::from_words(x.to_u64_digits(), len)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReceiverRandomness {
    /// ρ, 3k bits per committed bit, concatenated.
    Rho(BitString),
    Group(Arc<Group>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeParams {
    pub tag: SchemeTag,
    pub k: usize,
    pub message_bits: usize,
    pub receiver: ReceiverRandomness,
    pub expander: Expander,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Commitment {
    pub tag: SchemeTag,
    pub payload: BitString,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Opening {
    pub message: BitString,
    /// Binding: the seeds, k bits per message bit. Hiding: the exponent r.
    pub randomness: BitString,
}

/// Receiver setup. Binding parameters draw ρ from `rng_seed`; hiding
/// parameters load the shipped 256-bit group.
pub fn commit_setup(tag: SchemeTag, k: usize, message_bits: usize, rng_seed: u64) -> Result<SchemeParams, CommitError> {
    match tag {
        SchemeTag::Binding => {
            let rho = BitString::random(&mut seed::rng(rng_seed), message_bits * 3 * k);
            binding_params(k, rho, ExpanderTag::Mixer)
        }
        SchemeTag::Hiding => hiding_params(k, message_bits, Group::default256()),
    }
}

pub fn binding_params(k: usize, rho: BitString, expander: ExpanderTag) -> Result<SchemeParams, CommitError> {
    check_k(k)?;
    if rho.is_empty() || !rho.len().is_multiple_of(3 * k) {
        return Err(CommitError::Arity { expected: 3 * k, got: rho.len() });
    }
    Ok(SchemeParams {
        tag: SchemeTag::Binding,
        k,
        message_bits: rho.len() / (3 * k),
        receiver: ReceiverRandomness::Rho(rho),
        expander: Expander::new(expander, k)?,
    })
}

pub fn hiding_params(k: usize, message_bits: usize, group: Arc<Group>) -> Result<SchemeParams, CommitError> {
    check_k(k)?;
    if message_bits == 0 || message_bits >= group.exponent_bits() {
        return Err(CommitError::Arity { expected: group.exponent_bits() - 1, got: message_bits });
    }
    Ok(SchemeParams {
        tag: SchemeTag::Hiding,
        k,
        message_bits,
        receiver: ReceiverRandomness::Group(group),
        expander: Expander::Mixer,
    })
}

impl SchemeParams {
    pub fn rho(&self) -> Option<&BitString> {
        match &self.receiver {
            ReceiverRandomness::Rho(r) => Some(r),
            ReceiverRandomness::Group(_) => None,
        }
    }

    pub fn group(&self) -> Option<&Arc<Group>> {
        match &self.receiver {
            ReceiverRandomness::Group(g) => Some(g),
            ReceiverRandomness::Rho(_) => None,
        }
    }

    pub fn randomness_bits(&self) -> usize {
        match &self.receiver {
            ReceiverRandomness::Rho(_) => self.message_bits * self.k,
            ReceiverRandomness::Group(g) => g.exponent_bits(),
        }
    }

    /// Draws fresh opening randomness of the right shape.
    pub fn sample_randomness<R: RngCore + ?Sized>(&self, rng: &mut R) -> BitString {
        match &self.receiver {
            ReceiverRandomness::Rho(_) => BitString::random(rng, self.randomness_bits()),
            ReceiverRandomness::Group(g) => from_biguint(&g.random_exponent(rng), g.exponent_bits()),
        }
    }

    /// The deterministic commit function on explicit randomness.
    pub fn commit_with(&self, message: &BitString, randomness: &BitString) -> Result<Commitment, CommitError> {
        if message.len() != self.message_bits {
            return Err(CommitError::Arity { expected: self.message_bits, got: message.len() });
        }
        if randomness.len() != self.randomness_bits() {
            return Err(CommitError::Arity { expected: self.randomness_bits(), got: randomness.len() });
        }
        let payload = match &self.receiver {
            ReceiverRandomness::Rho(rho) => {
                let k = self.k;
                let mut payload = BitString::zeros(0);
                for j in 0..self.message_bits {
                    let s = randomness.get_word(j * k, k);
                    let mut e = self.expander.expand_words(s, k);
                    if message.get(j) {
                        let base = j * 3 * k;
                        let mut off = 0;
                        for w in e.iter_mut() {
                            let n = (3 * k).saturating_sub(off).min(64);
                            if n > 0 {
                                *w ^= rho.get_word(base + off, n);
                            }
                            off += 64;
                        }
                    }
                    let mut left = 3 * k;
                    for w in e {
                        let n = left.min(64);
                        payload.push_word(w, n);
                        left -= n;
                    }
                }
                payload
            }
            ReceiverRandomness::Group(g) => {
                let x = to_biguint(message);
                let r = to_biguint(randomness);
                if r >= g.q {
                    return Err(CommitError::Arity { expected: g.exponent_bits(), got: randomness.len() });
                }
                from_biguint(&g.pedersen(&x, &r), g.element_bits())
            }
        };
        Ok(Commitment { tag: self.tag, payload })
    }

    pub fn payload_bits(&self) -> usize {
        match &self.receiver {
            ReceiverRandomness::Rho(_) => self.message_bits * 3 * self.k,
            ReceiverRandomness::Group(g) => g.element_bits(),
        }
    }
}

pub fn commit<R: RngCore + ?Sized>(params: &SchemeParams, message: &BitString, rng: &mut R) -> Result<(Commitment, Opening), CommitError> {
    let randomness = params.sample_randomness(rng);
    let c = params.commit_with(message, &randomness)?;
    Ok((c, Opening { message: message.clone(), randomness }))
}

pub fn verify_open(params: &SchemeParams, commitment: &Commitment, opening: &Opening) -> bool {
    if commitment.tag != params.tag || commitment.payload.len() != params.payload_bits() {
        return false;
    }
    match params.commit_with(&opening.message, &opening.randomness) {
        Ok(c) => c.payload == commitment.payload,
        Err(_) => false,
    }
}

/// For each ρ ∈ {0,1}^{3k}, whether some pair of seeds equivocates:
/// `Expand(s) ⊕ Expand(s') = ρ`. Returns the count of such ρ.
pub fn equivocable_rho_count(expander: &Expander, k: usize) -> Result<u64, CommitError> {
    check_k(k)?;
    if 3 * k > 40 {
        return Err(CommitError::UnsupportedK(k));
    }
    let outputs: Vec<u64> = (0..1u64 << k).map(|s| expander.expand_words(s, k)[0]).collect();
    let mut seen = vec![false; 1usize << (3 * k)];
    for &a in &outputs {
        for &b in &outputs {
            seen[(a ^ b) as usize] = true;
        }
    }
    Ok(seen.iter().filter(|&&b| b).count() as u64)
}
