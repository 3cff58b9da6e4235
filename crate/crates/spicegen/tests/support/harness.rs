//! Builds generated applications, runs them and talks to them over HTTP.

#![allow(dead_code)]

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdout, Command, Stdio};

use scraper::{ElementRef, Html, Selector};
use spicegen::check;
use spicey::erd::Erd;
use spicey::persistence::{load_snapshot, Schema, Snapshot};

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    fs::read_to_string(fixture_path(name)).unwrap()
}

pub fn check_model(name: &str) -> Erd {
    check(&fixture(name)).unwrap()
}

pub fn schema_of(name: &str) -> Schema {
    Schema::derive(&check_model(name)).unwrap()
}

/// Shared by all generated apps so the runtime is compiled once.
fn apps_target_dir() -> PathBuf {
    workspace_root().join("target/spicey-apps")
}

pub struct BuiltApp {
    pub src: PathBuf,
    pub bin: PathBuf,
    pub fixture: String,
}

/// Runs the `spicegen` binary with `args`.
pub fn spicegen(args: &[&std::ffi::OsStr]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_spicegen"))
        .args(args)
        .output()
        .unwrap()
}

/// Generates the app for `fixture` with `spicegen generate`, lets `edit`
/// change the written tree, and builds it as package `<crate>_<tag>`.
pub fn build_app(fixture_name: &str, tag: &str, edit: impl FnOnce(&Path)) -> BuiltApp {
    let src = apps_target_dir()
        .join("src")
        .join(format!("{}_{tag}", fixture_name.trim_end_matches(".erdterm")));
    let _ = fs::remove_dir_all(&src);
    let out = spicegen(&[
        "generate".as_ref(),
        fixture_path(fixture_name).as_os_str(),
        "--out".as_ref(),
        src.as_os_str(),
    ]);
    assert!(
        out.status.success(),
        "generate failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    edit(&src);
    let manifest_path = src.join("Cargo.toml");
    let manifest = fs::read_to_string(&manifest_path).unwrap();
    let crate_line = manifest.lines().find(|l| l.starts_with("name = ")).unwrap().to_string();
    let package = format!("{}_{tag}", crate_line.trim_start_matches("name = ").trim_matches('"'));
    fs::write(
        &manifest_path,
        manifest.replacen(&crate_line, &format!("name = \"{package}\""), 1),
    )
    .unwrap();
    fs::copy(workspace_root().join("Cargo.lock"), src.join("Cargo.lock")).unwrap();
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let out = Command::new(cargo)
        .args(["build", "--offline", "--quiet"])
        .current_dir(&src)
        .env("CARGO_TARGET_DIR", apps_target_dir())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "building {package} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    BuiltApp {
        bin: apps_target_dir().join("debug").join(&package),
        src,
        fixture: fixture_name.to_string(),
    }
}

pub struct Server {
    child: Child,
    _stdout: BufReader<ChildStdout>,
    pub base: String,
    pub db_path: PathBuf,
    _dir: tempfile::TempDir,
}

impl Server {
    pub fn start(app: &BuiltApp) -> Server {
        let dir = tempfile::tempdir().unwrap();
        let db_path = dir.path().join("app.db");
        let mut child = Command::new(&app.bin)
            .args(["--port", "0", "--workers", "4", "--db"])
            .arg(&db_path)
            .arg("--public")
            .arg(app.src.join("public"))
            .current_dir(dir.path())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .unwrap();
        let mut stdout = BufReader::new(child.stdout.take().unwrap());
        let mut line = String::new();
        stdout.read_line(&mut line).unwrap();
        let base = line
            .trim()
            .strip_prefix("Listening on ")
            .unwrap_or_else(|| panic!("unexpected first line {line:?}"))
            .to_string();
        Server {
            child,
            _stdout: stdout,
            base,
            db_path,
            _dir: dir,
        }
    }

    pub fn client(&self) -> Client {
        Client {
            base: self.base.clone(),
            cookie: None,
            agent: ureq::AgentBuilder::new().redirects(0).build(),
        }
    }

    /// Stops the server and reads what it stored.
    pub fn stop_and_load(mut self, schema: Schema) -> Snapshot {
        let _ = self.child.kill();
        let _ = self.child.wait();
        load_snapshot(schema, &self.db_path).unwrap()
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Browser stand-in with one session cookie.
pub struct Client {
    base: String,
    cookie: Option<String>,
    agent: ureq::Agent,
}

impl Client {
    fn finish(&mut self, r: Result<ureq::Response, ureq::Error>) -> Page {
        let resp = match r {
            Ok(resp) => resp,
            Err(ureq::Error::Status(_, resp)) => resp,
            Err(e) => panic!("request failed: {e}"),
        };
        let set_cookies: Vec<String> = resp.all("set-cookie").iter().map(|s| s.to_string()).collect();
        for c in &set_cookies {
            if let Some(pair) = c.split(';').next() {
                self.cookie = Some(pair.trim().to_string());
            }
        }
        let status = resp.status();
        Page {
            status,
            set_cookies: set_cookies.len(),
            html: resp.into_string().unwrap(),
        }
    }

    fn request(&self, method: &str, path: &str) -> ureq::Request {
        let rq = self.agent.request(method, &format!("{}{path}", self.base));
        match &self.cookie {
            Some(c) => rq.set("Cookie", c),
            None => rq,
        }
    }

    pub fn get(&mut self, path: &str) -> Page {
        let r = self.request("GET", path).call();
        self.finish(r)
    }

    /// Posts the form of `page` as a browser would after the user applied
    /// `edits` and pressed the button named `button`.
    pub fn submit(&mut self, page: &Page, button: &str, edits: impl FnOnce(&mut FormData)) -> Page {
        let mut data = page.form_data();
        edits(&mut data);
        let label = page
            .buttons()
            .into_iter()
            .find(|(_, name)| name == button)
            .map(|(label, _)| label)
            .unwrap_or_else(|| panic!("no button {button}"));
        data.0.push((button.to_string(), label));
        let pairs: Vec<(&str, &str)> = data.0.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        let r = self.request("POST", &page.form_action()).send_form(&pairs);
        self.finish(r)
    }

    /// Presses the only button labelled `label`.
    pub fn press(&mut self, page: &Page, label: &str, edits: impl FnOnce(&mut FormData)) -> Page {
        let name = page
            .button(label)
            .unwrap_or_else(|| panic!("no button {label:?} in\n{}", page.text()));
        self.submit(page, &name, edits)
    }
}

/// Submitted name/value pairs in document order.
#[derive(Clone, Debug, Default)]
pub struct FormData(pub Vec<(String, String)>);

impl FormData {
    pub fn set(&mut self, name: &str, value: &str) {
        self.set_all(name, &[value]);
    }

    /// Replaces all values of `name`, keeping its position.
    pub fn set_all(&mut self, name: &str, values: &[&str]) {
        let pos = self.0.iter().position(|(k, _)| k == name).unwrap_or(self.0.len());
        self.0.retain(|(k, _)| k != name);
        let at = pos.min(self.0.len());
        for (i, v) in values.iter().enumerate() {
            self.0.insert(at + i, (name.to_string(), v.to_string()));
        }
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }
}

fn sel(s: &str) -> Selector {
    Selector::parse(s).unwrap()
}

fn text_of(e: ElementRef) -> String {
    e.text()
        .collect::<Vec<_>>()
        .join(" ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

pub struct Page {
    pub status: u16,
    pub set_cookies: usize,
    pub html: String,
}

impl Page {
    fn doc(&self) -> Html {
        Html::parse_document(&self.html)
    }

    /// Visible text with whitespace collapsed.
    pub fn text(&self) -> String {
        let doc = self.doc();
        let body = doc.select(&sel("body")).next();
        body.map(text_of).unwrap_or_default()
    }

    pub fn h1(&self) -> String {
        self.doc()
            .select(&sel(".content h1"))
            .next()
            .map(text_of)
            .unwrap_or_default()
    }

    pub fn message(&self) -> String {
        self.doc()
            .select(&sel(".message"))
            .next()
            .map(text_of)
            .unwrap_or_default()
    }

    pub fn layout_count(&self) -> usize {
        self.html.matches("id=\"spicey-layout\"").count()
    }

    pub fn form_action(&self) -> String {
        self.doc()
            .select(&sel("form"))
            .next()
            .and_then(|f| f.value().attr("action").map(str::to_string))
            .expect("page has a form")
    }

    /// What a browser submits without user changes, buttons excluded.
    pub fn form_data(&self) -> FormData {
        let doc = self.doc();
        let mut out = vec![];
        for e in doc.select(&sel("input, select, textarea")) {
            let v = e.value();
            let Some(name) = v.attr("name") else { continue };
            match (v.name(), v.attr("type").unwrap_or("text")) {
                ("input", "submit") => {}
                ("input", "checkbox") => {
                    if v.attr("checked").is_some() {
                        out.push((name.to_string(), v.attr("value").unwrap_or("on").to_string()));
                    }
                }
                ("input", _) => out.push((name.to_string(), v.attr("value").unwrap_or("").to_string())),
                ("select", _) => {
                    let options: Vec<ElementRef> = e.select(&sel("option")).collect();
                    let selected: Vec<&ElementRef> = options
                        .iter()
                        .filter(|o| o.value().attr("selected").is_some())
                        .collect();
                    let multiple = v.attr("multiple").is_some();
                    let value = |o: &ElementRef| {
                        o.value()
                            .attr("value")
                            .map(str::to_string)
                            .unwrap_or_else(|| text_of(*o))
                    };
                    if multiple {
                        out.extend(selected.iter().map(|o| (name.to_string(), value(o))));
                    } else if let Some(o) = selected.first().copied().or(options.first()) {
                        out.push((name.to_string(), value(o)));
                    }
                }
                _ => out.push((name.to_string(), text_of(e))),
            }
        }
        FormData(out)
    }

    /// `(label, name)` of every submit button.
    pub fn buttons(&self) -> Vec<(String, String)> {
        self.doc()
            .select(&sel("input[type=submit]"))
            .filter_map(|e| {
                let v = e.value();
                Some((v.attr("value").unwrap_or("").to_string(), v.attr("name")?.to_string()))
            })
            .collect()
    }

    pub fn button(&self, label: &str) -> Option<String> {
        let matching: Vec<String> = self
            .buttons()
            .into_iter()
            .filter(|(l, _)| l == label)
            .map(|(_, n)| n)
            .collect();
        match matching.as_slice() {
            [one] => Some(one.clone()),
            _ => None,
        }
    }

    /// Cell texts of the rows of the list table, header excluded.
    pub fn rows(&self) -> Vec<Vec<String>> {
        let doc = self.doc();
        doc.select(&sel("table.list tr"))
            .skip(1)
            .map(|tr| tr.select(&sel("td")).map(text_of).collect())
            .collect()
    }

    pub fn header(&self) -> Vec<String> {
        let doc = self.doc();
        let x = doc
            .select(&sel("table.list tr"))
            .next()
            .map(|tr| tr.select(&sel("th, td")).map(text_of).collect())
            .unwrap_or_default();
        x
    }

    /// Name of the button labelled `label` in the list row whose first cell
    /// is `first_cell`.
    pub fn row_button(&self, first_cell: &str, label: &str) -> Option<String> {
        let doc = self.doc();
        let x = doc
            .select(&sel("table.list tr"))
            .find(|tr| tr.select(&sel("td")).next().map(text_of).as_deref() == Some(first_cell))
            .and_then(|tr| {
                tr.select(&sel("input[type=submit]"))
                    .find(|b| b.value().attr("value") == Some(label))
                    .and_then(|b| b.value().attr("name").map(str::to_string))
            });
        x
    }

    /// Option value of the entry labelled `label` in select `name`.
    pub fn option_value(&self, name: &str, label: &str) -> Option<String> {
        let doc = self.doc();
        let x = doc
            .select(&sel(&format!("select[name=\"{name}\"] option")))
            .find(|o| text_of(*o) == label)
            .and_then(|o| o.value().attr("value").map(str::to_string));
        x
    }

    /// Labels of the form fields in order, from the label table.
    pub fn labels(&self) -> Vec<String> {
        self.doc().select(&sel("label")).map(text_of).collect()
    }

    /// Names of the text inputs whose value is empty.
    pub fn empty_text_inputs(&self) -> Vec<String> {
        self.doc()
            .select(&sel("input[type=text]"))
            .filter(|e| e.value().attr("value").unwrap_or("").is_empty())
            .filter_map(|e| e.value().attr("name").map(str::to_string))
            .collect()
    }

    /// Name of the input or select labelled `label` in a labelled form table.
    pub fn field(&self, label: &str) -> Option<String> {
        let doc = self.doc();
        let x = doc
            .select(&sel("table.wui-labels > tbody > tr, table.wui-labels > tr"))
            .find(|tr| tr.select(&sel("label")).next().map(text_of).as_deref() == Some(label))
            .and_then(|tr| tr.select(&sel("input, select")).next())
            .and_then(|e| e.value().attr("name").map(str::to_string));
        x
    }
}
