//! Loopback UDP/TCP plumbing shared by the authority, the proxy and the
//! resolver server, plus the query transports the validator speaks through.

mod transport;

use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, UdpSocket};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use thiserror::Error;

use crate::wire::WireError;

pub use transport::{
    tcp_exchange_raw, udp_exchange_raw, InProcessTransport, RecordingTransport, Transport, UdpTcpTransport,
};

const POLL_INTERVAL: Duration = Duration::from_millis(20);
const TCP_IDLE_LIMIT: Duration = Duration::from_secs(10);
const UDP_WORKERS: usize = 4;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("cannot bind {addr}: {source}")]
    BindFailure { addr: SocketAddr, source: io::Error },
    #[error("no response from {0} in time")]
    Timeout(SocketAddr),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("undecodable message: {0}")]
    Wire(#[from] WireError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Udp,
    Tcp,
}

/// Turns one request into at most one response. Returning `None` drops the
/// request silently.
pub type Handler = Arc<dyn Fn(&[u8], Protocol) -> Option<Vec<u8>> + Send + Sync>;

/// A running UDP+TCP listener pair on one port. Stopping (or dropping) the
/// handle closes both sockets and joins the worker threads.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.shutdown();
    }
}

impl std::fmt::Debug for ServerHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ServerHandle").field("addr", &self.addr).finish()
    }
}

fn bind_pair(endpoint: SocketAddr) -> Result<(UdpSocket, TcpListener), NetError> {
    let bind_err = |addr, source| NetError::BindFailure { addr, source };
    // With port 0 the UDP port picked by the OS may be taken for TCP, so
    // retry a few times.
    let attempts = if endpoint.port() == 0 { 16 } else { 1 };
    let mut last = None;
    for _ in 0..attempts {
        let udp = UdpSocket::bind(endpoint).map_err(|e| bind_err(endpoint, e))?;
        let addr = udp.local_addr()?;
        match TcpListener::bind(addr) {
            Ok(tcp) => return Ok((udp, tcp)),
            Err(e) => last = Some(bind_err(addr, e)),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Binds UDP and TCP on `endpoint` and serves `handler` until stopped.
pub fn spawn_server(endpoint: SocketAddr, handler: Handler) -> Result<ServerHandle, NetError> {
    let (udp, tcp) = bind_pair(endpoint)?;
    let addr = udp.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let mut threads = Vec::new();

    udp.set_read_timeout(Some(POLL_INTERVAL))?;
    for _ in 0..UDP_WORKERS {
        let sock = udp.try_clone()?;
        let (stop, handler) = (stop.clone(), handler.clone());
        threads.push(thread::spawn(move || udp_worker(sock, handler, stop)));
    }

    tcp.set_nonblocking(true)?;
    let (stop_tcp, handler_tcp) = (stop.clone(), handler);
    threads.push(thread::spawn(move || tcp_acceptor(tcp, handler_tcp, stop_tcp)));

    log::debug!("listening on {} (udp+tcp)", addr);
    Ok(ServerHandle { addr, stop, threads })
}

fn udp_worker(sock: UdpSocket, handler: Handler, stop: Arc<AtomicBool>) {
    let mut buf = vec![0u8; 65535];
    while !stop.load(Ordering::SeqCst) {
        let (n, peer) = match sock.recv_from(&mut buf) {
            Ok(r) => r,
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => continue,
            Err(e) => {
                log::debug!("udp recv: {}", e);
                continue;
            }
        };
        if let Some(resp) = handler(&buf[..n], Protocol::Udp) {
            if let Err(e) = sock.send_to(&resp, peer) {
                log::debug!("udp send to {}: {}", peer, e);
            }
        }
    }
}

fn tcp_acceptor(listener: TcpListener, handler: Handler, stop: Arc<AtomicBool>) {
    let mut conns: Vec<JoinHandle<()>> = Vec::new();
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, _)) => {
                let (stop, handler) = (stop.clone(), handler.clone());
                conns.push(thread::spawn(move || tcp_connection(stream, handler, stop)));
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(Duration::from_millis(2)),
            Err(e) => log::debug!("tcp accept: {}", e),
        }
        conns.retain(|c| !c.is_finished());
    }
    for c in conns {
        let _ = c.join();
    }
}

fn tcp_connection(mut stream: TcpStream, handler: Handler, stop: Arc<AtomicBool>) {
    if stream.set_nonblocking(false).is_err() || stream.set_read_timeout(Some(POLL_INTERVAL)).is_err() {
        return;
    }
    let mut idle = Duration::ZERO;
    let mut pending = Vec::new();
    let mut chunk = [0u8; 4096];
    while !stop.load(Ordering::SeqCst) && idle < TCP_IDLE_LIMIT {
        match stream.read(&mut chunk) {
            Ok(0) => return,
            Ok(n) => {
                idle = Duration::ZERO;
                pending.extend_from_slice(&chunk[..n]);
            }
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {
                idle += POLL_INTERVAL;
                continue;
            }
            Err(_) => return,
        }
        while pending.len() >= 2 {
            let len = u16::from_be_bytes([pending[0], pending[1]]) as usize;
            if pending.len() < 2 + len {
                break;
            }
            let msg: Vec<u8> = pending.drain(..2 + len).skip(2).collect();
            if let Some(resp) = handler(&msg, Protocol::Tcp) {
                if write_framed(&mut stream, &resp).is_err() {
                    return;
                }
            }
        }
    }
}

/// Writes one DNS message with its two-byte length prefix.
pub fn write_framed<W: Write>(w: &mut W, msg: &[u8]) -> io::Result<()> {
    let len = u16::try_from(msg.len()).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "message too long"))?;
    let mut framed = Vec::with_capacity(2 + msg.len());
    framed.extend_from_slice(&len.to_be_bytes());
    framed.extend_from_slice(msg);
    w.write_all(&framed)
}

/// Reads one length-prefixed DNS message; `None` on clean EOF.
pub fn read_framed<R: Read>(r: &mut R) -> io::Result<Option<Vec<u8>>> {
    let mut len = [0u8; 2];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let mut msg = vec![0u8; u16::from_be_bytes(len) as usize];
    r.read_exact(&mut msg)?;
    Ok(Some(msg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn framing_round_trip() {
        let mut buf = Vec::new();
        write_framed(&mut buf, b"abc").unwrap();
        write_framed(&mut buf, b"").unwrap();
        assert_eq!(buf, b"\x00\x03abc\x00\x00");
        let mut r = &buf[..];
        assert_eq!(read_framed(&mut r).unwrap(), Some(b"abc".to_vec()));
        assert_eq!(read_framed(&mut r).unwrap(), Some(vec![]));
        assert_eq!(read_framed(&mut r).unwrap(), None);
    }

    #[test]
    fn echo_server_udp_and_tcp() {
        let handler: Handler = Arc::new(|msg: &[u8], proto| {
            let mut out = msg.to_vec();
            out.push(if proto == Protocol::Udp { b'u' } else { b't' });
            Some(out)
        });
        let server = spawn_server("127.0.0.1:0".parse().unwrap(), handler).unwrap();
        let addr = server.local_addr();
        let t = Duration::from_secs(2);
        assert_eq!(udp_exchange_raw(addr, b"hi", t).unwrap(), b"hiu");
        assert_eq!(tcp_exchange_raw(addr, b"hi", t).unwrap(), b"hit");
        server.stop();
        assert!(udp_exchange_raw(addr, b"hi", Duration::from_millis(200)).is_err());
    }
}
