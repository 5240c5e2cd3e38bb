/// Bitwise CRC over a `0`/`1` byte sequence; non-reflected, zero init,
/// no final XOR, remainder appended most-significant bit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crc {
    poly: u32,
    width: usize,
}

impl Crc {
    /// `poly` includes the leading `x^width` term.
    pub fn new(poly: u32, width: usize) -> Self {
        assert!((1..32).contains(&width), "CRC width out of range");
        assert_eq!(poly >> width, 1, "polynomial degree must equal width");
        Self { poly, width }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    pub fn remainder(&self, bits: &[u8]) -> u32 {
        let top = 1u32 << (self.width - 1);
        let taps = self.poly & ((1u32 << self.width) - 1);
        let mut reg = 0u32;
        for &b in bits {
            let feedback = ((reg & top) != 0) ^ (b != 0);
            reg = (reg << 1) & ((1u32 << self.width) - 1);
            if feedback {
                reg ^= taps;
            }
        }
        reg
    }

    pub fn checksum_bits(&self, bits: &[u8]) -> Vec<u8> {
        let r = self.remainder(bits);
        (0..self.width)
            .rev()
            .map(|k| ((r >> k) & 1) as u8)
            .collect()
    }

    /// `bits ++ crc(bits)`.
    pub fn append(&self, bits: &[u8]) -> Vec<u8> {
        let mut out = bits.to_vec();
        out.extend(self.checksum_bits(bits));
        out
    }

    /// Checks a word produced by [`Crc::append`].
    pub fn check(&self, word: &[u8]) -> bool {
        word.len() >= self.width && self.remainder(word) == 0
    }
}
