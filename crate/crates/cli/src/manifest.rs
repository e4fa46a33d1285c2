use crate::args::Command;

/// Provenance line embedded in every artifact: the resolved flags of the
/// subcommand, without the worker count.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub flags: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &Command) -> Self {
        let flags = match toml::Value::try_from(command) {
            Ok(toml::Value::Table(t)) => t.into_iter().map(|(k, v)| (k, v.to_string())).collect(),
            _ => Vec::new(),
        };
        RunManifest {
            tool: "playtest",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: command.name(),
            flags,
        }
    }

    pub fn line(&self) -> String {
        let mut out = format!("{} {} {}", self.tool, self.version, self.subcommand);
        for (k, v) in &self.flags {
            out.push(' ');
            out.push_str(k);
            out.push('=');
            out.push_str(v);
        }
        out
    }
}
