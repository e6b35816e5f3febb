//! Length-prefixed binary frames, big-endian throughout.
//!
//! ```text
//! u32 payload length | u8 type | u32 round id | u16 sender id | payload
//! payload = u16 modulus | u16 symbol count | u16 symbol * count
//! ```
//! The length counts payload bytes only; the 7 header bytes after it are
//! fixed.

use std::fmt;
use std::io::{self, Read};

use thiserror::Error;

use crate::field::{Prime, SymbolVector};

pub const LENGTH_BYTES: usize = 4;
pub const HEADER_BYTES: usize = 7;
/// Largest payload a frame may declare.
pub const MAX_PAYLOAD: usize = 4 + 2 * u16::MAX as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum MsgType {
    DealShare = 0x01,
    DesireFlag = 0x02,
    Signal = 0x03,
    Decoded = 0x04,
    RoundBegin = 0x05,
    Shutdown = 0x06,
}

impl MsgType {
    pub fn from_byte(b: u8) -> Option<MsgType> {
        Some(match b {
            0x01 => MsgType::DealShare,
            0x02 => MsgType::DesireFlag,
            0x03 => MsgType::Signal,
            0x04 => MsgType::Decoded,
            0x05 => MsgType::RoundBegin,
            0x06 => MsgType::Shutdown,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            MsgType::DealShare => "DEAL_SHARE",
            MsgType::DesireFlag => "DESIRE_FLAG",
            MsgType::Signal => "SIGNAL",
            MsgType::Decoded => "DECODED",
            MsgType::RoundBegin => "ROUND_BEGIN",
            MsgType::Shutdown => "SHUTDOWN",
        }
    }
}

impl fmt::Display for MsgType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireMessage {
    pub msg_type: MsgType,
    pub round_id: u32,
    pub sender_id: u16,
    pub modulus: u16,
    pub symbols: Vec<u16>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("frame truncated in field `{field}`: need {needed} bytes, have {available}")]
    Truncated {
        field: &'static str,
        needed: usize,
        available: usize,
    },
    #[error("field `msg_type`: unknown value {0:#04x}")]
    UnknownType(u8),
    #[error("field `length`: declared {declared} payload bytes exceeds the maximum {MAX_PAYLOAD}")]
    Oversize { declared: usize },
    #[error("field `length`: declared {declared} payload bytes but the symbol count implies {implied}")]
    LengthMismatch { declared: usize, implied: usize },
    #[error("field `modulus`: {0} is not a supported prime")]
    BadModulus(u16),
    #[error("field `symbols[{index}]`: residue {value} is not below modulus {modulus}")]
    ResidueOutOfRange { index: usize, value: u16, modulus: u16 },
    #[error("{0} symbols do not fit in one frame")]
    TooManySymbols(usize),
}

fn be_u16(b: &[u8]) -> u16 {
    u16::from_be_bytes([b[0], b[1]])
}

fn be_u32(b: &[u8]) -> u32 {
    u32::from_be_bytes([b[0], b[1], b[2], b[3]])
}

impl WireMessage {
    pub fn new(msg_type: MsgType, round_id: u32, sender_id: u16, modulus: Prime, symbols: &[u32]) -> Self {
        WireMessage {
            msg_type,
            round_id,
            sender_id,
            modulus: modulus.get() as u16,
            symbols: symbols.iter().map(|&s| s as u16).collect(),
        }
    }

    pub fn from_vector(msg_type: MsgType, round_id: u32, sender_id: u16, v: &SymbolVector) -> Self {
        Self::new(msg_type, round_id, sender_id, v.modulus(), &v.values())
    }

    /// Symbols as a field vector, validating modulus and residues.
    pub fn vector(&self) -> Result<SymbolVector, WireError> {
        let p = Prime::new(self.modulus as u32).map_err(|_| WireError::BadModulus(self.modulus))?;
        let values: Vec<u32> = self.symbols.iter().map(|&s| s as u32).collect();
        SymbolVector::new(p, &values).map_err(|_| self.first_bad_residue())
    }

    fn first_bad_residue(&self) -> WireError {
        let (index, &value) = self
            .symbols
            .iter()
            .enumerate()
            .find(|(_, &s)| s >= self.modulus)
            .expect("some residue is out of range");
        WireError::ResidueOutOfRange {
            index,
            value,
            modulus: self.modulus,
        }
    }

    pub fn payload_len(&self) -> usize {
        4 + 2 * self.symbols.len()
    }

    pub fn encode(&self) -> Result<Vec<u8>, WireError> {
        if self.symbols.len() > u16::MAX as usize {
            return Err(WireError::TooManySymbols(self.symbols.len()));
        }
        let mut out = Vec::with_capacity(LENGTH_BYTES + HEADER_BYTES + self.payload_len());
        out.extend_from_slice(&(self.payload_len() as u32).to_be_bytes());
        out.push(self.msg_type as u8);
        out.extend_from_slice(&self.round_id.to_be_bytes());
        out.extend_from_slice(&self.sender_id.to_be_bytes());
        out.extend_from_slice(&self.modulus.to_be_bytes());
        out.extend_from_slice(&(self.symbols.len() as u16).to_be_bytes());
        for s in &self.symbols {
            out.extend_from_slice(&s.to_be_bytes());
        }
        Ok(out)
    }

    /// Decodes one frame from the front of `bytes`, returning it and the
    /// number of bytes consumed.
    pub fn decode(bytes: &[u8]) -> Result<(WireMessage, usize), WireError> {
        let need = |field: &'static str, end: usize| {
            if bytes.len() < end {
                Err(WireError::Truncated {
                    field,
                    needed: end,
                    available: bytes.len(),
                })
            } else {
                Ok(())
            }
        };
        need("length", 4)?;
        let declared = be_u32(&bytes[0..4]) as usize;
        if declared > MAX_PAYLOAD {
            return Err(WireError::Oversize { declared });
        }
        need("msg_type", 5)?;
        let msg_type = MsgType::from_byte(bytes[4]).ok_or(WireError::UnknownType(bytes[4]))?;
        need("round_id", 9)?;
        let round_id = be_u32(&bytes[5..9]);
        need("sender_id", 11)?;
        let sender_id = be_u16(&bytes[9..11]);
        need("modulus", 13)?;
        let modulus = be_u16(&bytes[11..13]);
        need("symbol_count", 15)?;
        let count = be_u16(&bytes[13..15]) as usize;
        let implied = 4 + 2 * count;
        if declared != implied {
            return Err(WireError::LengthMismatch { declared, implied });
        }
        let end = LENGTH_BYTES + HEADER_BYTES + declared;
        need("symbols", end)?;
        let symbols: Vec<u16> = bytes[15..end].chunks_exact(2).map(be_u16).collect();
        if Prime::new(modulus as u32).is_err() {
            return Err(WireError::BadModulus(modulus));
        }
        let msg = WireMessage {
            msg_type,
            round_id,
            sender_id,
            modulus,
            symbols,
        };
        if msg.symbols.iter().any(|&s| s >= modulus) {
            return Err(msg.first_bad_residue());
        }
        Ok((msg, end))
    }
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Wire(#[from] WireError),
}

/// Reads one whole frame. `Ok(None)` on a clean end of stream before the
/// first byte.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Vec<u8>>, ReadError> {
    let mut len = [0u8; LENGTH_BYTES];
    let mut got = 0;
    while got < LENGTH_BYTES {
        match r.read(&mut len[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => {
                return Err(WireError::Truncated {
                    field: "length",
                    needed: LENGTH_BYTES,
                    available: got,
                }
                .into())
            }
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let declared = u32::from_be_bytes(len) as usize;
    if declared > MAX_PAYLOAD {
        return Err(WireError::Oversize { declared }.into());
    }
    let mut frame = vec![0u8; LENGTH_BYTES + HEADER_BYTES + declared];
    frame[..LENGTH_BYTES].copy_from_slice(&len);
    r.read_exact(&mut frame[LENGTH_BYTES..]).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            ReadError::Wire(WireError::Truncated {
                field: "frame body",
                needed: frame.len(),
                available: LENGTH_BYTES,
            })
        } else {
            ReadError::Io(e)
        }
    })?;
    Ok(Some(frame))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bit_exact_layout() {
        let m = WireMessage::new(MsgType::Signal, 0x0102_0304, 0x0506, Prime::new(3).unwrap(), &[2, 0, 1]);
        assert_eq!(
            m.encode().unwrap(),
            vec![
                0, 0, 0, 10, // payload length
                0x03, // type
                1, 2, 3, 4, // round
                5, 6, // sender
                0, 3, // modulus
                0, 3, // count
                0, 2, 0, 0, 0, 1,
            ]
        );
    }

    #[test]
    fn empty_payload() {
        let m = WireMessage::new(MsgType::Shutdown, 7, 0, Prime::TWO, &[]);
        let b = m.encode().unwrap();
        assert_eq!(b.len(), 4 + 7 + 4);
        assert_eq!(&b[..4], &[0, 0, 0, 4]);
        assert_eq!(WireMessage::decode(&b).unwrap(), (m, 15));
    }

    #[test]
    fn errors_name_the_field() {
        let good = WireMessage::new(MsgType::Signal, 1, 1, Prime::TWO, &[1]).encode().unwrap();

        let e = WireMessage::decode(&good[..3]).unwrap_err();
        assert!(e.to_string().contains("`length`"), "{e}");

        let mut bad = good.clone();
        bad[4] = 0x09;
        assert!(WireMessage::decode(&bad).unwrap_err().to_string().contains("`msg_type`"));

        let mut bad = good.clone();
        bad[3] = 9;
        assert_eq!(
            WireMessage::decode(&bad).unwrap_err(),
            WireError::LengthMismatch { declared: 9, implied: 6 }
        );

        let mut bad = good.clone();
        bad[12] = 4;
        assert_eq!(WireMessage::decode(&bad).unwrap_err(), WireError::BadModulus(4));

        let mut bad = good.clone();
        bad[16] = 2;
        let e = WireMessage::decode(&bad).unwrap_err();
        assert_eq!(
            e,
            WireError::ResidueOutOfRange {
                index: 0,
                value: 2,
                modulus: 2
            }
        );
        assert!(e.to_string().contains("`symbols[0]`"));

        let e = WireMessage::decode(&good[..good.len() - 1]).unwrap_err();
        assert!(e.to_string().contains("`symbols`"), "{e}");

        let mut huge = good.clone();
        huge[0] = 0xff;
        assert!(matches!(WireMessage::decode(&huge), Err(WireError::Oversize { .. })));
    }

    #[test]
    fn stream_reading() {
        let a = WireMessage::new(MsgType::DealShare, 1, 0, Prime::TWO, &[1, 0]).encode().unwrap();
        let b = WireMessage::new(MsgType::Shutdown, 2, 0, Prime::TWO, &[]).encode().unwrap();
        let mut bytes = a.clone();
        bytes.extend(&b);
        let mut cur = io::Cursor::new(bytes);
        assert_eq!(read_frame(&mut cur).unwrap().unwrap(), a);
        assert_eq!(read_frame(&mut cur).unwrap().unwrap(), b);
        assert!(read_frame(&mut cur).unwrap().is_none());

        let mut cut = io::Cursor::new(a[..6].to_vec());
        assert!(read_frame(&mut cut).is_err());
    }

    fn msg_type() -> impl Strategy<Value = MsgType> {
        (1u8..=6).prop_map(|b| MsgType::from_byte(b).unwrap())
    }

    proptest! {
        #[test]
        fn round_trip(t in msg_type(), round in any::<u32>(), sender in any::<u16>(),
                      pi in 0usize..6, raw in proptest::collection::vec(any::<u16>(), 0..40)) {
            let p = crate::field::SUPPORTED_PRIMES[pi];
            let symbols: Vec<u32> = raw.iter().map(|&s| s as u32 % p).collect();
            let m = WireMessage::new(t, round, sender, Prime::new(p).unwrap(), &symbols);
            let bytes = m.encode().unwrap();
            prop_assert_eq!(bytes.len(), 4 + 7 + 4 + 2 * symbols.len());
            let (back, used) = WireMessage::decode(&bytes).unwrap();
            prop_assert_eq!(used, bytes.len());
            prop_assert_eq!(back.vector().unwrap().values(), symbols);
            prop_assert_eq!(back, m);
        }

        #[test]
        fn decode_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            let _ = WireMessage::decode(&bytes);
        }
    }
}
