//! CSV output with a provenance header: every artifact records the config
//! hash, tool version, and seed that produced it, so runs are replayable and
//! diffable. Header lines start with '#'; the body is deterministic for a
//! fixed seed.

/// FNV-1a over the canonical config text; a stable fingerprint, not a
/// cryptographic digest.
pub fn config_hash(text: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// A resolved parameter for the provenance header: name, value, and whether
/// the value came from a default rather than the config.
#[derive(Debug, Clone)]
pub struct ResolvedParam {
    pub name: &'static str,
    pub value: String,
    pub is_default: bool,
}

impl ResolvedParam {
    pub fn new(name: &'static str, value: impl ToString, is_default: bool) -> Self {
        Self { name, value: value.to_string(), is_default }
    }
}

pub struct Report {
    header: Vec<String>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(
        command: &str,
        config_text: &str,
        seed: u64,
        params: &[ResolvedParam],
        reproducible: bool,
    ) -> Self {
        let mut header = vec![
            format!("# warpcd {}", env!("CARGO_PKG_VERSION")),
            format!("# command {command}"),
            format!("# config-hash {:016x}", config_hash(config_text)),
            format!("# seed {seed}"),
        ];
        if !reproducible {
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            header.push(format!("# timestamp {now}"));
        }
        for p in params {
            let suffix = if p.is_default { " [default]" } else { "" };
            header.push(format!("# param {}={}{suffix}", p.name, p.value));
        }
        Self { header, columns: Vec::new(), rows: Vec::new() }
    }

    pub fn columns(&mut self, cols: Vec<&'static str>) {
        self.columns = cols;
    }

    /// Append an extra '#'-prefixed header line (summary values, timings).
    pub fn push_header(&mut self, line: String) {
        debug_assert!(line.starts_with('#'));
        self.header.push(line);
    }

    pub fn row(&mut self, values: Vec<String>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values);
    }

    /// Fixed-precision float formatting keeps bodies byte-identical across
    /// replays.
    pub fn num(x: f64) -> String {
        if x.is_nan() {
            "nan".into()
        } else if x.is_infinite() {
            if x > 0.0 { "inf".into() } else { "-inf".into() }
        } else {
            format!("{x:.12e}")
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in &self.header {
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Everything after the '#' header block.
    pub fn body(text: &str) -> String {
        text.lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
    }
}
