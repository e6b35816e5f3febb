//! Frame layout on the wire, and how malformed frames are reported.

use anoncomm::field::Prime;
use anoncomm::sim::wire::{MsgType, WireMessage};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let msg = WireMessage::new(MsgType::Signal, 9, 2, Prime::new(13)?, &[12, 0, 7]);
    let bytes = msg.encode()?;
    let hex: Vec<String> = bytes.iter().map(|b| format!("{b:02x}")).collect();
    println!("{msg:?}\n{}", hex.join(" "));

    let (back, used) = WireMessage::decode(&bytes)?;
    assert_eq!((back, used), (msg, bytes.len()));

    let mut bad = bytes.clone();
    bad[bytes.len() - 1] = 13;
    println!("residue 13 mod 13: {}", WireMessage::decode(&bad).unwrap_err());
    println!("truncated: {}", WireMessage::decode(&bytes[..9]).unwrap_err());
    Ok(())
}
