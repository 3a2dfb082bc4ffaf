//! Fixed-length bit strings packed into 64-bit words.
//!
//! Bit `i` lives in word `i / 64` at position `i % 64`. Unused high bits of
//! the last word are always zero, so derived equality and hashing are exact.

use rand::RngCore;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString { len, words: vec![0; len.div_ceil(64)] }
    }

    /// The low `len` bits of `value`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut s = Self::zeros(len);
        if len > 0 {
            s.words[0] = value;
            s.mask_tail();
        }
        s
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R, len: usize) -> Self {
        let mut s = Self::zeros(len);
        for w in s.words.iter_mut() {
            *w = rng.next_u64();
        }
        s.mask_tail();
        s
    }

    /// Builds a string from words, truncating to `len` bits.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(len.div_ceil(64), 0);
        let mut s = BitString { len, words };
        s.mask_tail();
        s
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let b = self.get(i);
        self.set(i, !b);
    }

    /// The first (up to) 64 bits as an integer.
    pub fn to_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn xor_assign(&mut self, other: &BitString) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Bits `start..start + len` as a new string.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(start + len <= self.len);
        let mut out = BitString::zeros(len);
        if start.is_multiple_of(64) {
            let w0 = start / 64;
            let n = out.words.len();
            out.words.copy_from_slice(&self.words[w0..w0 + n]);
            out.mask_tail();
        } else {
            out.words.clear();
            out.len = 0;
            let mut pos = start;
            while pos < start + len {
                let n = (start + len - pos).min(64);
                out.push_word(self.get_word(pos, n), n);
                pos += n;
            }
        }
        out
    }

    /// Bits `start..start + n` (n ≤ 64) packed into an integer.
    pub fn get_word(&self, start: usize, n: usize) -> u64 {
        assert!(n <= 64 && start + n <= self.len);
        if n == 0 {
            return 0;
        }
        let w = start / 64;
        let off = start % 64;
        let mut v = self.words[w] >> off;
        if off != 0 && off + n > 64 {
            v |= self.words[w + 1] << (64 - off);
        }
        if n == 64 {
            v
        } else {
            v & ((1u64 << n) - 1)
        }
    }

    pub fn append(&mut self, other: &BitString) {
        let mut remaining = other.len;
        for &w in &other.words {
            let n = remaining.min(64);
            self.push_word(w, n);
            remaining -= n;
        }
    }

    /// Appends the low `n` bits of `value`.
    pub fn push_word(&mut self, value: u64, n: usize) {
        assert!(n <= 64);
        if n == 0 {
            return;
        }
        let value = if n == 64 { value } else { value & ((1u64 << n) - 1) };
        let off = self.len % 64;
        self.len += n;
        self.words.resize(self.len.div_ceil(64), 0);
        let w = (self.len - n) / 64;
        self.words[w] |= value << off;
        if off != 0 && off + n > 64 {
            self.words[w + 1] |= value >> (64 - off);
        }
    }

    pub fn concat(parts: &[BitString]) -> BitString {
        let mut out = BitString::zeros(0);
        for p in parts {
            out.append(p);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Little-endian byte encoding: bit `i` is bit `i % 8` of byte `i / 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(nbytes);
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.truncate(nbytes);
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> BitString {
        let mut words = vec![0u64; len.div_ceil(64)];
        for (i, &b) in bytes.iter().enumerate().take(len.div_ceil(8)) {
            words[i / 8] |= (b as u64) << (8 * (i % 8));
        }
        BitString::from_words(words, len)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({}:", self.len)?;
        for b in self.iter().take(128) {
            write!(f, "{}", b as u8)?;
        }
        if self.len > 128 {
            write!(f, "...")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slices_and_appends_round_trip() {
        let bits: Vec<bool> = (0..150).map(|i| (i * 7) % 3 == 0).collect();
        let s = BitString::from_bits(&bits);
        let a = s.slice(0, 70);
        let b = s.slice(70, 80);
        assert_eq!(BitString::concat(&[a, b]), s);
        assert_eq!(s.slice(64, 64).iter().collect::<Vec<_>>(), bits[64..128].to_vec());
    }

    #[test]
    fn bytes_round_trip_masks_tail() {
        let s = BitString::from_u64(u64::MAX, 13);
        assert_eq!(s.count_ones(), 13);
        let back = BitString::from_bytes(&s.to_bytes(), 13);
        assert_eq!(back, s);
        assert_eq!(s.to_hex(), "ff1f");
    }
}
