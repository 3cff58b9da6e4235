use std::io::{self, Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::thread;

use clap::{Parser, Subcommand};

use super::app::{App, HttpRequest};
use crate::auth::{make_random_password, CredentialStore};
use crate::erd::{parse_erd, validate_erd};
use crate::persistence::{Database, Schema};

/// Largest accepted request body.
const MAX_BODY: u64 = 4 << 20;

pub const PORT_ENV: &str = "SPICEY_PORT";
pub const DEFAULT_PORT: u16 = 8080;

/// Serves `app` on `addr` with `workers` request threads until the process
/// exits. The bound address is passed to `on_bound` once listening.
pub fn serve<R: Clone + Send + Sync + 'static>(
    app: Arc<App<R>>,
    addr: &str,
    workers: usize,
    on_bound: impl FnOnce(SocketAddr),
) -> io::Result<()> {
    let server = tiny_http::Server::http(addr).map_err(|e| io::Error::new(io::ErrorKind::AddrNotAvailable, e))?;
    let bound = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| io::Error::new(io::ErrorKind::Unsupported, "not an IP listener"))?;
    on_bound(bound);
    let server = Arc::new(server);
    let handles: Vec<_> = (0..workers.max(1))
        .map(|_| {
            let (server, app) = (server.clone(), app.clone());
            thread::spawn(move || {
                while let Ok(rq) = server.recv() {
                    respond(&app, rq);
                }
            })
        })
        .collect();
    for h in handles {
        let _ = h.join();
    }
    Ok(())
}

fn respond<R: Clone + Send + Sync + 'static>(app: &App<R>, mut rq: tiny_http::Request) {
    let mut body = vec![];
    if let Err(e) = rq.as_reader().take(MAX_BODY).read_to_end(&mut body) {
        log::warn!("reading request body: {e}");
        return;
    }
    let req = HttpRequest {
        method: rq.method().as_str().to_string(),
        url: rq.url().to_string(),
        headers: rq
            .headers()
            .iter()
            .map(|h| (h.field.as_str().as_str().to_string(), h.value.as_str().to_string()))
            .collect(),
        body,
    };
    let resp = app.handle(&req);
    let mut out = tiny_http::Response::from_data(resp.body).with_status_code(resp.status);
    for (k, v) in &resp.headers {
        if let Ok(h) = tiny_http::Header::from_bytes(k.as_bytes(), v.as_bytes()) {
            out.add_header(h);
        }
    }
    if let Err(e) = rq.respond(out) {
        log::warn!("writing response: {e}");
    }
}

/// Command line of a generated application.
#[derive(Parser, Debug)]
#[command(about = "Run the web application")]
pub struct CliArgs {
    /// Port to listen on; 0 picks a free port. Defaults to $SPICEY_PORT or 8080.
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Database file; defaults to data/<ERD name>.db.
    #[arg(long)]
    pub db: Option<PathBuf>,
    /// Directory served under /public/.
    #[arg(long, default_value = "public")]
    pub public: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub workers: usize,
    #[command(subcommand)]
    pub command: Option<CliCommand>,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Add or replace a login in the credential file.
    AddUser {
        login: String,
        /// Generated and printed when omitted.
        password: Option<String>,
    },
}

impl CliArgs {
    pub fn resolve_port(&self) -> Result<u16, String> {
        if let Some(p) = self.port {
            return Ok(p);
        }
        match std::env::var(PORT_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| format!("{PORT_ENV} is not a port number: {v}")),
            Err(_) => Ok(DEFAULT_PORT),
        }
    }
}

/// Credential file next to the database file.
pub fn credential_path(db: &Path) -> PathBuf {
    db.with_extension("auth")
}

/// Entry point of a generated application.
///
/// Parses the command line, opens the database for the model in
/// `erd_source`, and serves the application built by `build`. Prints
/// `Listening on http://<addr>` once the socket is bound.
pub fn run_main<R: Clone + Send + Sync + 'static>(
    erd_source: &str,
    build: impl FnOnce(Arc<Database>, Arc<CredentialStore>) -> App<R>,
) -> ExitCode {
    let args = CliArgs::parse();
    let erd = match parse_erd(erd_source) {
        Ok(erd) => erd,
        Err(e) => {
            eprintln!("embedded model does not parse: {e}");
            return ExitCode::from(2);
        }
    };
    let errs = validate_erd(&erd);
    if !errs.is_empty() {
        for e in errs {
            eprintln!("{e}");
        }
        return ExitCode::from(2);
    }
    let schema = Schema::derive(&erd).expect("validated model");
    let db_path = args
        .db
        .clone()
        .unwrap_or_else(|| PathBuf::from("data").join(format!("{}.db", erd.name)));
    let credentials = match CredentialStore::open(&credential_path(&db_path)) {
        Ok(c) => Arc::new(c),
        Err(e) => {
            eprintln!("cannot read credentials: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(CliCommand::AddUser { login, password }) = &args.command {
        let password = password.clone().unwrap_or_else(|| {
            let p = make_random_password(12);
            println!("password for {login}: {p}");
            p
        });
        return match credentials.add_user(login, &password) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("cannot add user: {e}");
                ExitCode::from(1)
            }
        };
    }
    let port = match args.resolve_port() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let db = match Database::open(schema, &db_path) {
        Ok(db) => Arc::new(db),
        Err(e) => {
            eprintln!("cannot open database {}: {e}", db_path.display());
            return ExitCode::from(2);
        }
    };
    let app = build(db, credentials).with_public_dir(&args.public);
    let addr = format!("{}:{port}", args.host);
    let result = serve(Arc::new(app), &addr, args.workers, |bound| {
        println!("Listening on http://{bound}");
        let _ = io::stdout().flush();
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cannot serve on {addr}: {e}");
            ExitCode::from(2)
        }
    }
}
