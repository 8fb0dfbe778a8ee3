//! WebSocket transport for the session protocol: one thread per
//! connection, one text message per request and per response.

use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use netrepr::session::{Connection, Service};
use tungstenite::{accept, Message};

/// Accepts connections until the listener fails.
pub fn serve(listener: TcpListener, service: Service) -> std::io::Result<()> {
    let service = Arc::new(service);
    for stream in listener.incoming() {
        let stream = stream?;
        let service = Arc::clone(&service);
        thread::spawn(move || {
            let peer = stream.peer_addr().ok();
            if let Err(e) = handle_connection(stream, &service) {
                log::warn!("connection {peer:?}: {e}");
            }
        });
    }
    Ok(())
}

/// Binds `host:port` (port 0 picks a free port).
pub fn bind(host: &str, port: u16) -> std::io::Result<(TcpListener, SocketAddr)> {
    let listener = TcpListener::bind((host, port))?;
    let addr = listener.local_addr()?;
    Ok((listener, addr))
}

fn handle_connection(stream: TcpStream, service: &Service) -> Result<(), tungstenite::Error> {
    let mut ws = accept(stream).map_err(|e| match e {
        tungstenite::HandshakeError::Failure(e) => e,
        tungstenite::HandshakeError::Interrupted(_) => tungstenite::Error::ConnectionClosed,
    })?;
    let mut conn = Connection::default();
    loop {
        match ws.read() {
            Ok(Message::Text(text)) => {
                let reply = service.handle_text(&mut conn, text.as_str());
                ws.send(Message::text(reply))?;
            }
            Ok(Message::Binary(_)) => {
                ws.send(Message::text(
                    service.handle_text(&mut conn, "binary frames are not supported"),
                ))?;
            }
            Ok(Message::Close(_)) | Err(tungstenite::Error::ConnectionClosed) => return Ok(()),
            Ok(_) => {}
            Err(e) => return Err(e),
        }
    }
}
