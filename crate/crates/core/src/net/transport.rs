use std::net::{SocketAddr, TcpStream, UdpSocket};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::net::{read_framed, write_framed, NetError};
use crate::wire::{decode_message, encode_message, DnsMessage, Question};

/// One query, one response. Implementations must be usable from several
/// validation walks at once.
pub trait Transport: Send + Sync {
    fn exchange(&self, query: &DnsMessage) -> Result<DnsMessage, NetError>;
}

impl<T: Transport + ?Sized> Transport for &T {
    fn exchange(&self, query: &DnsMessage) -> Result<DnsMessage, NetError> {
        (**self).exchange(query)
    }
}

fn unspecified_for(server: SocketAddr) -> SocketAddr {
    if server.is_ipv4() {
        "0.0.0.0:0".parse().expect("literal")
    } else {
        "[::]:0".parse().expect("literal")
    }
}

/// Sends raw bytes over UDP and returns the first datagram whose id
/// matches.
pub fn udp_exchange_raw(server: SocketAddr, query: &[u8], timeout: Duration) -> Result<Vec<u8>, NetError> {
    let sock = UdpSocket::bind(unspecified_for(server))?;
    sock.connect(server)?;
    sock.send(query)?;
    let deadline = Instant::now() + timeout;
    let mut buf = vec![0u8; 65535];
    loop {
        let left = deadline.saturating_duration_since(Instant::now());
        if left.is_zero() {
            return Err(NetError::Timeout(server));
        }
        sock.set_read_timeout(Some(left))?;
        match sock.recv(&mut buf) {
            Ok(n) if n >= 2 && query.len() >= 2 && buf[..2] == query[..2] => return Ok(buf[..n].to_vec()),
            Ok(_) => continue,
            Err(e) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {
                return Err(NetError::Timeout(server))
            }
            Err(e) => return Err(e.into()),
        }
    }
}

pub fn tcp_exchange_raw(server: SocketAddr, query: &[u8], timeout: Duration) -> Result<Vec<u8>, NetError> {
    let mut stream = TcpStream::connect_timeout(&server, timeout)?;
    stream.set_read_timeout(Some(timeout))?;
    stream.set_write_timeout(Some(timeout))?;
    write_framed(&mut stream, query)?;
    match read_framed(&mut stream) {
        Ok(Some(resp)) => Ok(resp),
        Ok(None) => Err(NetError::Timeout(server)),
        Err(e) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {
            Err(NetError::Timeout(server))
        }
        Err(e) => Err(e.into()),
    }
}

/// UDP first, falling back to TCP when the answer comes back truncated.
#[derive(Debug, Clone)]
pub struct UdpTcpTransport {
    pub server: SocketAddr,
    pub timeout: Duration,
}

impl UdpTcpTransport {
    pub fn new(server: SocketAddr) -> Self {
        UdpTcpTransport { server, timeout: Duration::from_secs(2) }
    }
}

impl Transport for UdpTcpTransport {
    fn exchange(&self, query: &DnsMessage) -> Result<DnsMessage, NetError> {
        let wire = encode_message(query)?;
        let resp = decode_message(&udp_exchange_raw(self.server, &wire, self.timeout)?)?;
        if !resp.flags.tc {
            return Ok(resp);
        }
        log::trace!("truncated answer from {}, retrying over tcp", self.server);
        Ok(decode_message(&tcp_exchange_raw(self.server, &wire, self.timeout)?)?)
    }
}

/// Calls a function directly; no sockets involved.
pub struct InProcessTransport<F>(pub F);

impl<F> Transport for InProcessTransport<F>
where
    F: Fn(&DnsMessage) -> DnsMessage + Send + Sync,
{
    fn exchange(&self, query: &DnsMessage) -> Result<DnsMessage, NetError> {
        Ok((self.0)(query))
    }
}

/// Wraps another transport and remembers every question sent through it.
pub struct RecordingTransport<T> {
    inner: T,
    log: Mutex<Vec<Question>>,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T) -> Self {
        RecordingTransport { inner, log: Mutex::new(Vec::new()) }
    }

    pub fn questions(&self) -> Vec<Question> {
        self.log.lock().expect("log lock").clone()
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn exchange(&self, query: &DnsMessage) -> Result<DnsMessage, NetError> {
        self.log.lock().expect("log lock").extend(query.questions.iter().cloned());
        self.inner.exchange(query)
    }
}
