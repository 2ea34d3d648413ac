//! Bit-string helpers. A bit string is a `Vec<bool>` / `[bool]`, index 0 first
//! on the wire.

/// Appends the low `width` bits of `value`, least significant first.
pub fn push_le(out: &mut Vec<bool>, value: u64, width: u32) {
    out.extend((0..width).map(|i| (value >> i) & 1 == 1));
}

/// Appends the low `width` bits of `value`, most significant first.
pub fn push_be(out: &mut Vec<bool>, value: u64, width: u32) {
    out.extend((0..width).rev().map(|i| (value >> i) & 1 == 1));
}

/// Reads up to 64 bits least significant first; missing bits read as zero.
pub fn read_le(bits: &[bool]) -> u64 {
    debug_assert!(bits.len() <= 64);
    bits.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
}

pub fn read_be(bits: &[bool]) -> u64 {
    debug_assert!(bits.len() <= 64);
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

/// Splits `bits` into `width`-bit little-endian chunks, zero-padding the last.
pub fn chunks_le(bits: &[bool], width: u32) -> Vec<u64> {
    bits.chunks(width as usize).map(read_le).collect()
}

pub fn xor(a: &[bool], b: &[bool]) -> Vec<bool> {
    assert_eq!(a.len(), b.len(), "xor of unequal lengths");
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

pub fn weight(bits: &[bool]) -> usize {
    bits.iter().filter(|&&b| b).count()
}

pub fn hamming_distance(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len())
}

/// Packs bits into bytes, bit `i` of the string going to bit `i % 8` of byte `i / 8`.
pub fn to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8).map(|c| read_le(c) as u8).collect()
}

pub fn from_bytes(bytes: &[u8], len: usize) -> Vec<bool> {
    let mut out = Vec::with_capacity(bytes.len() * 8);
    for &b in bytes {
        push_le(&mut out, b as u64, 8);
    }
    out.truncate(len);
    out
}

/// Renders as a compact `0`/`1` string.
pub fn render(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}
