use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::CliError;

pub const CLI_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Real number with 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    command: &'a str,
    config: &'a C,
    results: &'a R,
}

pub fn json_document<C: Serialize, R: Serialize>(command: &str, config: &C, results: &R) -> Result<String, CliError> {
    let env = Envelope {
        tool: "aoi",
        version: CLI_VERSION,
        core_version: aoi_core::VERSION,
        command,
        config,
        results,
    };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// CSV preceded by `# ` lines echoing the invocation.
pub fn csv_document<C: Serialize>(
    command: &str,
    config: &C,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<String, CliError> {
    let config = serde_json::to_string(config).map_err(|e| CliError::Io(e.to_string()))?;
    let mut buf = format!(
        "# aoi {CLI_VERSION} (aoi-core {})\n# command: {command}\n# config: {config}\n",
        aoi_core::VERSION
    )
    .into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    }
    String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))
}

pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [1.0 / 3.0, -2.0, 1e-300, 0.1 + 0.2] {
            assert_eq!(real(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(real(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_has_comment_header() {
        let doc = csv_document("x", &[1, 2], &["a", "b"], vec![vec!["1".into(), "q,r".into()]]).unwrap();
        assert_eq!(doc.lines().nth(2), Some("# config: [1,2]"));
        assert_eq!(doc.lines().nth(3), Some("a,b"));
        assert_eq!(doc.lines().nth(4), Some("1,\"q,r\""));
    }
}
