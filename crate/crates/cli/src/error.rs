use std::fmt;

/// Marks an error as a usage problem (exit code 1) rather than a data problem.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() || matches!(cause.downcast_ref(), Some(phseg_core::Error::Config(_)))
        {
            return EXIT_USAGE;
        }
    }
    EXIT_DATA
}

/// Prints per-item failures and turns them into a data error.
pub fn summarize(failures: &[(String, String)], total: usize, what: &str) -> anyhow::Result<()> {
    if failures.is_empty() {
        return Ok(());
    }
    for (id, msg) in failures {
        eprintln!("failed: {id}: {msg}");
    }
    anyhow::bail!("{} of {total} {what} failed", failures.len())
}

/// Joins the cause chain, dropping causes already quoted by their parent.
pub fn render(err: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if out.ends_with(&text) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&text);
    }
    out
}
