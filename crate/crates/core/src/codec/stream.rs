//! Counter-based common-randomness codebook.
//!
//! Symbol `t` (1-based) of codeword `i` (1-based) is `floor(|Y|·w / 2^64)`
//! with `w = mix64(mix64(mix64(seed) ^ i) ^ t)`. The map is stateless, so
//! encoder and decoder regenerate any codeword from the shared seed alone.
//! The multiply-high reduction biases each symbol by less than `|Y|·2^-64`.

/// SplitMix64 finalizer: add the golden-ratio increment, then two
/// xorshift-multiply rounds and a final xorshift.
#[inline]
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `mix64(x) >> 63`. The final xorshift leaves bit 63 unchanged, so it is
/// skipped.
#[inline]
pub(crate) fn mix64_top_bit(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z >> 63
}

#[inline]
pub(crate) fn reduce(w: u64, alphabet: usize) -> usize {
    ((w as u128 * alphabet as u128) >> 64) as usize
}

/// For `|Y| = 2^b` the reduction is the top `b` bits of `w`.
#[inline]
pub(crate) fn reduce_pow2(w: u64, log2: u32) -> usize {
    if log2 == 0 {
        0
    } else {
        (w >> (64 - log2)) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodebookStream {
    seed: u64,
    key: u64,
    n: usize,
    alphabet: usize,
}

impl CodebookStream {
    pub fn new(seed: u64, n: usize, alphabet: usize) -> Self {
        assert!(
            n >= 1 && alphabet >= 1,
            "blocklength and alphabet must be positive"
        );
        Self {
            seed,
            key: mix64(seed),
            n,
            alphabet,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// Per-codeword key `mix64(mix64(seed) ^ i)`.
    #[inline]
    pub(crate) fn row_key(&self, index: u64) -> u64 {
        mix64(self.key ^ index)
    }

    #[inline]
    pub fn symbol(&self, index: u64, t: u64) -> usize {
        reduce(mix64(self.row_key(index) ^ t), self.alphabet)
    }

    pub fn codeword(&self, index: u64) -> Vec<usize> {
        assert!(index >= 1, "codeword indices start at 1");
        let key = self.row_key(index);
        (1..=self.n as u64)
            .map(|t| reduce(mix64(key ^ t), self.alphabet))
            .collect()
    }
}

pub fn generate_codeword(seed: u64, index: u64, n: usize, alphabet: usize) -> Vec<usize> {
    CodebookStream::new(seed, n, alphabet).codeword(index)
}
