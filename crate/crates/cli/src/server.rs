//! Online monitoring over TCP (NDJSON) or WebSocket text frames.
//!
//! A client sends `{"event": "<raw name>"}` per message and gets one reply
//! per message, in order. Each connection has its own session over the
//! shared oracle. A failing verdict is repeated for every later event.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};

use serde::Deserialize;
use tungstenite::Message;

use cspmon_core::{Lts, Mode, Session, Verdict};

use crate::config::Protocol;
use crate::mapping::Mapping;
use crate::report::{error_json, verdict_json};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Request {
    event: String,
}

/// Where connection summaries go.
#[derive(Clone)]
pub enum SummarySink {
    Stderr,
    File(Arc<Mutex<File>>),
}

impl SummarySink {
    fn write(&self, line: &str) {
        match self {
            SummarySink::Stderr => eprintln!("{line}"),
            SummarySink::File(f) => {
                let mut f = f.lock().unwrap_or_else(|p| p.into_inner());
                let _ = writeln!(f, "{line}");
            }
        }
    }
}

/// Per-connection state: parses requests and steps the session.
pub struct Connection {
    session: Session,
    mapping: Arc<Mapping>,
}

impl Connection {
    pub fn new(oracle: Arc<Lts>, mode: Mode, mapping: Arc<Mapping>) -> Connection {
        let session = Session::new(oracle, mode).expect("server oracles are determinized");
        Connection { session, mapping }
    }

    /// The reply to one message. Malformed messages leave the session as is.
    pub fn handle(&mut self, message: &str) -> String {
        match serde_json::from_str::<Request>(message) {
            Ok(r) => verdict_json(&self.session.step(self.mapping.map_event(&r.event))),
            Err(e) => error_json(&format!("malformed request: {e}")),
        }
    }

    pub fn summary(&self, peer: &str) -> String {
        let n = self.session.trace().len();
        match self.session.verdict() {
            Verdict::PassSoFar(_) => format!("connection {peer} closed: pass after {n} events"),
            Verdict::Fail(f) => format!(
                "connection {peer} closed: fail at event {} ({}) after {n} events",
                f.index + 1,
                f.event
            ),
        }
    }

    pub fn verdict(&self) -> Verdict {
        self.session.verdict()
    }
}

pub struct Server {
    listener: TcpListener,
    protocol: Protocol,
    oracle: Arc<Lts>,
    mode: Mode,
    mapping: Arc<Mapping>,
    sink: SummarySink,
}

impl Server {
    pub fn bind(
        addr: &str,
        protocol: Protocol,
        oracle: Arc<Lts>,
        mode: Mode,
        mapping: Mapping,
        sink: SummarySink,
    ) -> io::Result<Server> {
        Ok(Server {
            listener: TcpListener::bind(addr)?,
            protocol,
            oracle,
            mode,
            mapping: Arc::new(mapping),
            sink,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves connections on their own threads, forever.
    pub fn run(self) -> io::Result<()> {
        for stream in self.listener.incoming() {
            let stream = stream?;
            let (conn, protocol, sink) = (self.connection(), self.protocol, self.sink.clone());
            thread::spawn(move || {
                let _ = serve(stream, conn, protocol, &sink);
            });
        }
        Ok(())
    }

    /// Serves a single connection on the calling thread and returns its
    /// final verdict.
    pub fn run_once(self) -> io::Result<Verdict> {
        let (stream, _) = self.listener.accept()?;
        serve(stream, self.connection(), self.protocol, &self.sink)
    }

    pub fn spawn(self) -> JoinHandle<io::Result<()>> {
        thread::spawn(move || self.run())
    }

    fn connection(&self) -> Connection {
        Connection::new(self.oracle.clone(), self.mode, self.mapping.clone())
    }
}

fn serve(stream: TcpStream, mut conn: Connection, protocol: Protocol, sink: &SummarySink) -> io::Result<Verdict> {
    let peer = stream.peer_addr().map_or_else(|_| "?".to_string(), |a| a.to_string());
    let result = match protocol {
        Protocol::Tcp => serve_tcp(stream, &mut conn),
        Protocol::Websocket => serve_ws(stream, &mut conn),
    };
    sink.write(&conn.summary(&peer));
    result.map(|()| conn.verdict())
}

fn serve_tcp(stream: TcpStream, conn: &mut Connection) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let mut out = stream.try_clone()?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut reply = conn.handle(&line);
        reply.push('\n');
        out.write_all(reply.as_bytes())?;
        out.flush()?;
    }
    Ok(())
}

fn serve_ws(stream: TcpStream, conn: &mut Connection) -> io::Result<()> {
    let to_io = |e: tungstenite::Error| io::Error::other(e.to_string());
    let mut ws = tungstenite::accept(stream).map_err(|e| io::Error::other(e.to_string()))?;
    loop {
        let msg = match ws.read() {
            Ok(m) => m,
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(()),
            Err(tungstenite::Error::Protocol(_)) => return Ok(()),
            Err(e) => return Err(to_io(e)),
        };
        let reply = match msg {
            Message::Text(t) => conn.handle(&t),
            Message::Binary(_) => error_json("expected a text frame"),
            Message::Close(_) => return Ok(()),
            _ => continue,
        };
        ws.send(Message::Text(reply)).map_err(to_io)?;
    }
}
