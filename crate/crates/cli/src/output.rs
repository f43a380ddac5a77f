use serde::Serialize;

/// What a command produced: files for the output directory plus a terminal summary.
pub struct Report {
    pub table: String,
    pub json: serde_json::Value,
    pub files: Vec<(String, Vec<u8>)>,
    pub inputs: Vec<(String, Vec<u8>)>,
}

impl Report {
    pub fn new(table: String, json: impl Serialize) -> Self {
        Report {
            table,
            json: serde_json::to_value(json).expect("summary serializes"),
            files: Vec::new(),
            inputs: Vec::new(),
        }
    }

    pub fn file(mut self, name: &str, bytes: Vec<u8>) -> Self {
        self.files.push((name.to_string(), bytes));
        self
    }

    pub fn json_file(self, name: &str, value: &impl Serialize) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("output serializes");
        bytes.push(b'\n');
        self.file(name, bytes)
    }
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Aligned two-or-more column text table.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate().take(cols) {
            width[i] = width[i].max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells.iter().enumerate().map(|(i, c)| format!("{:<w$}", c, w = width[i])).collect::<Vec<_>>().join("  ")
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for r in rows {
        out.push_str(line(r.iter().map(String::as_str).collect()).trim_end());
        out.push('\n');
    }
    out
}
