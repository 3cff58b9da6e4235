//! Authorization policies, login state and the credential store.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use hmac::{Hmac, Mac};
use rand::distributions::Alphanumeric;
use rand::{Rng, RngCore};
use sha2::Sha256;

use crate::html::{h1, htxt, par, HtmlExp};
use crate::runtime::{button_to, error_body, Controller, RequestContext};
use crate::session::SessionSlot;
use crate::wui::{render_labels, run_form, w_pair, w_password, w_required_string};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AccessResult {
    Granted,
    Denied(String),
}

impl AccessResult {
    /// Denial with `reason`, or a generic reason when it is empty.
    pub fn denied(reason: &str) -> Self {
        if reason.trim().is_empty() {
            AccessResult::Denied("access denied".to_string())
        } else {
            AccessResult::Denied(reason.to_string())
        }
    }
}

/// Operation a controller is about to perform on entities of type `T`.
#[derive(Clone, Debug, PartialEq)]
pub enum AccessType<T> {
    NewEntity,
    ListEntities,
    ShowEntity(T),
    UpdateEntity(T),
    DeleteEntity(T),
}

/// Runs `ctrl` only if `policy` grants access; otherwise shows the reason.
pub fn check_authorization(
    policy: impl Fn(&RequestContext) -> AccessResult + Send + Sync + 'static,
    ctrl: Controller,
) -> Controller {
    Controller::new(move |ctx| match policy(ctx) {
        AccessResult::Granted => ctrl.run(ctx),
        AccessResult::Denied(reason) => error_body(&reason),
    })
}

/// Policy allowing everything except deletion.
pub fn disallow_delete<T>(at: &AccessType<T>) -> AccessResult {
    match at {
        AccessType::DeleteEntity(_) => AccessResult::denied("Delete not allowed!"),
        _ => AccessResult::Granted,
    }
}

/// Login name of the current session; absent means anonymous.
pub const SESSION_LOGIN: SessionSlot<String> = SessionSlot::new("sessionLogin");

pub fn get_session_login(ctx: &RequestContext) -> Option<String> {
    ctx.get_session_data(SESSION_LOGIN)
}

pub const SALT_LEN: usize = 16;

/// Hex HMAC-SHA256 keyed by `salt` over the length-prefixed login followed
/// by the password.
pub fn hash_credential(login: &str, password: &str, salt: &[u8]) -> String {
    hex::encode(credential_mac(login, password, salt).finalize().into_bytes())
}

fn credential_mac(login: &str, password: &str, salt: &[u8]) -> Hmac<Sha256> {
    let mut mac = Hmac::<Sha256>::new_from_slice(salt).expect("HMAC accepts any key length");
    mac.update(&(login.len() as u64).to_be_bytes());
    mac.update(login.as_bytes());
    mac.update(password.as_bytes());
    mac
}

/// Random string of `len` characters from `[A-Za-z0-9]`.
pub fn make_random_password(len: usize) -> String {
    rand::thread_rng()
        .sample_iter(&Alphanumeric)
        .take(len)
        .map(char::from)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Credential {
    salt: Vec<u8>,
    hash: Vec<u8>,
}

/// Login names with salted password hashes, kept in a line-oriented file
/// `login:saltHex:hashHex`.
pub struct CredentialStore {
    path: Option<PathBuf>,
    users: Mutex<BTreeMap<String, Credential>>,
}

fn bad_data(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

impl CredentialStore {
    pub fn in_memory() -> Self {
        CredentialStore {
            path: None,
            users: Mutex::new(BTreeMap::new()),
        }
    }

    /// Loads the store at `path`; a missing file is an empty store.
    pub fn open(path: &Path) -> io::Result<Self> {
        let mut users = BTreeMap::new();
        match fs::read_to_string(path) {
            Ok(text) => {
                for (n, line) in text.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let parts: Vec<&str> = line.split(':').collect();
                    let [login, salt, hash] = parts[..] else {
                        return Err(bad_data(format!("{}:{}: malformed entry", path.display(), n + 1)));
                    };
                    let decode =
                        |s: &str| hex::decode(s).map_err(|e| bad_data(format!("{}:{}: {e}", path.display(), n + 1)));
                    users.insert(
                        login.to_string(),
                        Credential {
                            salt: decode(salt)?,
                            hash: decode(hash)?,
                        },
                    );
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e),
        }
        Ok(CredentialStore {
            path: Some(path.to_path_buf()),
            users: Mutex::new(users),
        })
    }

    /// Adds or replaces `login` with a fresh salt and writes the file.
    pub fn add_user(&self, login: &str, password: &str) -> io::Result<()> {
        if login.is_empty() || login.contains([':', '\n', '\r']) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                "login names must be nonempty and contain no ':' or line breaks",
            ));
        }
        let mut salt = vec![0u8; SALT_LEN];
        rand::thread_rng().fill_bytes(&mut salt);
        let hash = credential_mac(login, password, &salt).finalize().into_bytes().to_vec();
        let mut users = self.users.lock().unwrap_or_else(|e| e.into_inner());
        let previous = users.insert(login.to_string(), Credential { salt, hash });
        if let Err(e) = self.save(&users) {
            match previous {
                Some(p) => users.insert(login.to_string(), p),
                None => users.remove(login),
            };
            return Err(e);
        }
        Ok(())
    }

    pub fn verify(&self, login: &str, password: &str) -> bool {
        let users = self.users.lock().unwrap_or_else(|e| e.into_inner());
        match users.get(login) {
            Some(c) => credential_mac(login, password, &c.salt).verify_slice(&c.hash).is_ok(),
            None => false,
        }
    }

    pub fn logins(&self) -> Vec<String> {
        let users = self.users.lock().unwrap_or_else(|e| e.into_inner());
        users.keys().cloned().collect()
    }

    fn save(&self, users: &BTreeMap<String, Credential>) -> io::Result<()> {
        let Some(path) = &self.path else { return Ok(()) };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("auth.tmp");
        let mut f = fs::File::create(&tmp)?;
        for (login, c) in users {
            writeln!(f, "{login}:{}:{}", hex::encode(&c.salt), hex::encode(&c.hash))?;
        }
        f.sync_all()?;
        fs::rename(&tmp, path)
    }
}

/// Login form, or the current login with a logout button.
pub fn login_controller() -> Controller {
    Controller::new(|ctx| match get_session_login(ctx) {
        Some(name) => logged_in_view(ctx, &name),
        None => login_form(ctx),
    })
}

fn logged_in_view(ctx: &RequestContext, name: &str) -> Vec<HtmlExp> {
    vec![
        h1(vec![htxt("Login")]),
        par(vec![htxt(&format!("Logged in as {name}"))]),
        par(vec![button_to(ctx, "logout", logout_controller())]),
    ]
}

fn login_form(ctx: &RequestContext) -> Vec<HtmlExp> {
    let spec = w_pair(w_required_string(), w_password())
        .with_rendering(render_labels(&["Login name", "Password"]))
        .expect("two labels for two widgets");
    let mut page = vec![h1(vec![htxt("Login")])];
    page.extend(run_form(
        ctx,
        spec,
        &(String::new(), String::new()),
        "login",
        |(name, password)| {
            Controller::new(move |ctx| {
                if ctx.credentials().verify(&name, &password) {
                    ctx.put_session_data(SESSION_LOGIN, name.clone());
                    ctx.set_page_message(&format!("Logged in as {name}"));
                    logged_in_view(ctx, &name)
                } else {
                    ctx.set_page_message("Wrong login data!");
                    login_form(ctx)
                }
            })
        },
    ));
    page
}

/// Forgets the session login.
pub fn logout_controller() -> Controller {
    Controller::new(|ctx| {
        ctx.remove_session_data(SESSION_LOGIN);
        ctx.set_page_message("Logged out");
        login_form(ctx)
    })
}
