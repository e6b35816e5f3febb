//! Point-to-point links carrying encoded frames, either over in-process
//! channels or over localhost TCP connections.

use std::io::{BufReader, BufWriter, Write};
use std::net::{Shutdown, TcpListener, TcpStream};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::wire::{read_frame, ReadError, WireError, WireMessage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Transport {
    InProcess,
    Stream,
}

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("peer disconnected")]
    Disconnected,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("protocol error: {0}")]
    Wire(#[from] WireError),
}

enum TxInner {
    Chan(mpsc::Sender<Vec<u8>>),
    Tcp(BufWriter<TcpStream>),
}

/// Sending end of a link.
pub struct LinkTx {
    inner: TxInner,
}

impl LinkTx {
    pub fn send(&mut self, msg: &WireMessage) -> Result<(), LinkError> {
        let frame = msg.encode()?;
        self.send_raw(frame)
    }

    /// Sends bytes as they are; used to inject malformed frames.
    pub fn send_raw(&mut self, frame: Vec<u8>) -> Result<(), LinkError> {
        match &mut self.inner {
            TxInner::Chan(tx) => tx.send(frame).map_err(|_| LinkError::Disconnected),
            TxInner::Tcp(w) => {
                w.write_all(&frame)?;
                w.flush()?;
                Ok(())
            }
        }
    }
}

impl Drop for LinkTx {
    fn drop(&mut self) {
        if let TxInner::Tcp(w) = &mut self.inner {
            let _ = w.flush();
            let _ = w.get_ref().shutdown(Shutdown::Write);
        }
    }
}

enum RxInner {
    Chan(mpsc::Receiver<Vec<u8>>),
    Tcp(BufReader<TcpStream>),
}

/// Receiving end of a link.
pub struct LinkRx {
    inner: RxInner,
}

impl LinkRx {
    /// Blocks for the next frame; `Disconnected` once the sender is gone.
    pub fn recv(&mut self) -> Result<WireMessage, LinkError> {
        let frame = match &mut self.inner {
            RxInner::Chan(rx) => rx.recv().map_err(|_| LinkError::Disconnected)?,
            RxInner::Tcp(r) => match read_frame(r) {
                Ok(Some(f)) => f,
                Ok(None) => return Err(LinkError::Disconnected),
                Err(ReadError::Io(e)) => return Err(e.into()),
                Err(ReadError::Wire(e)) => return Err(e.into()),
            },
        };
        let (msg, used) = WireMessage::decode(&frame)?;
        if used != frame.len() {
            return Err(WireError::LengthMismatch {
                declared: used,
                implied: frame.len(),
            }
            .into());
        }
        Ok(msg)
    }
}

/// Opens one unidirectional link.
pub fn link(transport: Transport) -> Result<(LinkTx, LinkRx), LinkError> {
    match transport {
        Transport::InProcess => {
            let (tx, rx) = mpsc::channel();
            Ok((
                LinkTx {
                    inner: TxInner::Chan(tx),
                },
                LinkRx {
                    inner: RxInner::Chan(rx),
                },
            ))
        }
        Transport::Stream => {
            let listener = TcpListener::bind(("127.0.0.1", 0))?;
            let out = TcpStream::connect(listener.local_addr()?)?;
            let (inc, _) = listener.accept()?;
            out.set_nodelay(true)?;
            inc.set_nodelay(true)?;
            Ok((
                LinkTx {
                    inner: TxInner::Tcp(BufWriter::new(out)),
                },
                LinkRx {
                    inner: RxInner::Tcp(BufReader::new(inc)),
                },
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Prime;
    use crate::sim::wire::MsgType;

    #[test]
    fn both_transports_deliver_in_order() {
        for t in [Transport::InProcess, Transport::Stream] {
            let (mut tx, mut rx) = link(t).unwrap();
            let msgs: Vec<WireMessage> = (0..5)
                .map(|i| WireMessage::new(MsgType::Signal, i, 1, Prime::TWO, &[i % 2]))
                .collect();
            let sent = msgs.clone();
            let h = std::thread::spawn(move || {
                for m in &sent {
                    tx.send(m).unwrap();
                }
            });
            for m in &msgs {
                assert_eq!(&rx.recv().unwrap(), m);
            }
            h.join().unwrap();
            assert!(matches!(rx.recv(), Err(LinkError::Disconnected)));
        }
    }

    #[test]
    fn malformed_frame_is_a_protocol_error() {
        for t in [Transport::InProcess, Transport::Stream] {
            let (mut tx, mut rx) = link(t).unwrap();
            let mut bad = WireMessage::new(MsgType::Signal, 1, 1, Prime::TWO, &[1]).encode().unwrap();
            bad[16] = 5;
            tx.send_raw(bad).unwrap();
            match rx.recv() {
                Err(LinkError::Wire(e)) => assert!(e.to_string().contains("symbols[0]")),
                other => panic!("{t:?}: {other:?}"),
            }
        }
    }
}
