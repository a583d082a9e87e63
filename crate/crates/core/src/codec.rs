//! Signalling over the collision channel.
//!
//! A sender writes bit 1 by colliding with the receiver on the receiver's arm and bit 0
//! by staying away. The receiver reads 1 whenever her loss is exactly 1, so the
//! adversary can flip 0 into 1 but never 1 into 0: a Z-channel.
//!
//! Two codes ride on it. The repetition code sends every bit `h` times and decodes a
//! block as 1 only if it arrives all ones. The index code used by the
//! attackability-unaware protocols is a constant-weight one-hot code: arm `k` of `K`
//! lights block `k` (of `h` slots) and leaves the others dark. Decoding returns every
//! block that arrived all ones; the transmitted index is always among them.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// A finite 0/1 sequence. Displays as a string of `0`s and `1`s.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Applies the Z-channel slot by slot: `attacks[i]` marks an adversary loss of 1
    /// on the receiver's arm during slot `i`.
    pub fn through_channel(&self, attacks: &[bool]) -> Result<BitString> {
        if attacks.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: attacks.len(),
            });
        }
        Ok(self
            .0
            .iter()
            .zip(attacks)
            .map(|(&s, &a)| z_receive(s, a))
            .collect())
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Parses `0`/`1` characters; spaces and underscores are ignored (`"000 111 000"`).
impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !matches!(c, ' ' | '_'))
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Malformed(format!("`{other}` is not a bit"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

/// One slot of the channel as seen by the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelSlotOutcome {
    pub sent: bool,
    pub attack: bool,
    pub received: bool,
}

impl ChannelSlotOutcome {
    pub fn new(sent: bool, attack: bool) -> Self {
        Self {
            sent,
            attack,
            received: z_receive(sent, attack),
        }
    }
}

/// The Z-channel law: a collision always reads as 1, and an adversary loss of 1
/// turns a silent slot into 1 as well.
pub fn z_receive(sent: bool, attack: bool) -> bool {
    sent || attack
}

/// Repeats `bit` `h` times.
pub fn r_encode(bit: bool, h: usize) -> Result<BitString> {
    check_h(h)?;
    Ok(BitString(vec![bit; h]))
}

/// 1 iff every received bit is 1. An empty block carries no 1 and decodes to 0.
pub fn r_decode(received: &[bool]) -> bool {
    !received.is_empty() && received.iter().all(|&b| b)
}

/// Bits needed for a binary arm index: `ceil(log2 K)` (0 when `K = 1`).
pub fn index_bits(num_arms: usize) -> usize {
    match num_arms {
        0 | 1 => 0,
        k => (usize::BITS - (k - 1).leading_zeros()) as usize,
    }
}

/// Binary index of `arm - 1` on `ceil(log2 K)` bits, most significant first, with
/// every bit repeated `h` times.
pub fn r_encode_index(arm: usize, num_arms: usize, h: usize) -> Result<BitString> {
    check_arm(arm, num_arms)?;
    check_h(h)?;
    let width = index_bits(num_arms);
    let value = arm - 1;
    Ok((0..width)
        .rev()
        .flat_map(|i| std::iter::repeat((value >> i) & 1 == 1).take(h))
        .collect())
}

/// Decodes [`r_encode_index`] block by block. Indices that land past `K` are
/// clamped to `K`; use [`r_decode_index_raw`] to see the unclamped value.
pub fn r_decode_index(received: &[bool], num_arms: usize, h: usize) -> Result<usize> {
    Ok(r_decode_index_raw(received, num_arms, h)?.min(num_arms))
}

/// Decoded `value + 1` without clamping; may exceed `K` after a corrupted transfer.
pub fn r_decode_index_raw(received: &[bool], num_arms: usize, h: usize) -> Result<usize> {
    if num_arms == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    check_h(h)?;
    let width = index_bits(num_arms);
    if received.len() != width * h {
        return Err(Error::LengthMismatch {
            expected: width * h,
            actual: received.len(),
        });
    }
    let value = received
        .chunks_exact(h)
        .fold(0usize, |acc, block| (acc << 1) | r_decode(block) as usize);
    Ok(value + 1)
}

/// One-hot constant-weight codeword: `K` blocks of `h` slots, block `arm` all ones.
pub fn e_encode(arm: usize, num_arms: usize, h: usize) -> Result<BitString> {
    check_arm(arm, num_arms)?;
    check_h(h)?;
    Ok((1..=num_arms)
        .flat_map(|k| std::iter::repeat(k == arm).take(h))
        .collect())
}

/// Indices (ascending) of every block that arrived all ones. More than one index
/// means the transfer was corrupted; the sent index is always present.
pub fn e_decode(received: &[bool], num_arms: usize, h: usize) -> Result<Vec<usize>> {
    check_h(h)?;
    if received.len() != num_arms * h {
        return Err(Error::LengthMismatch {
            expected: num_arms * h,
            actual: received.len(),
        });
    }
    Ok(received
        .chunks_exact(h)
        .enumerate()
        .filter(|(_, block)| r_decode(block))
        .map(|(i, _)| i + 1)
        .collect())
}

fn check_h(h: usize) -> Result<()> {
    if h == 0 {
        return Err(Error::invalid("repetition length must be at least 1"));
    }
    Ok(())
}

fn check_arm(arm: usize, num_arms: usize) -> Result<()> {
    if !(1..=num_arms).contains(&arm) {
        return Err(Error::ArmOutOfRange { arm, num_arms });
    }
    Ok(())
}
