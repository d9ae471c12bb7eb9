//! Pass/fail bookkeeping shared by every verification, with text and
//! record renderings.

use std::fmt::Write as _;

/// Outcome of one slice of one identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    /// First discrepancy, rendered.
    Fail(String),
    /// The truncation is too small to decide.
    Undecidable(String),
}

impl Status {
    pub fn from_bool(ok: bool, detail: impl FnOnce() -> String) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail(detail())
        }
    }

    pub fn word(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail(_) => "FAIL",
            Status::Undecidable(_) => "UNDECIDABLE",
        }
    }
}

/// A named verification made of labelled rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub rows: Vec<(String, Status)>,
    /// Free-form lines printed before the rows.
    pub notes: Vec<String>,
}

impl Check {
    pub fn new(name: impl Into<String>) -> Self {
        Check { name: name.into(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, label: impl Into<String>, s: Status) {
        self.rows.push((label.into(), s));
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn extend(&mut self, other: Check) {
        let prefix = other.name;
        self.notes.extend(other.notes);
        for (l, s) in other.rows {
            self.rows.push((format!("{prefix}: {l}"), s));
        }
    }

    /// Fail beats undecidable beats pass.
    pub fn status(&self) -> Status {
        let mut und = None;
        for (l, s) in &self.rows {
            match s {
                Status::Fail(d) => return Status::Fail(format!("{l}: {d}")),
                Status::Undecidable(d) if und.is_none() => und = Some(format!("{l}: {d}")),
                _ => {}
            }
        }
        match und {
            Some(d) => Status::Undecidable(d),
            None => Status::Pass,
        }
    }

    pub fn passed(&self) -> bool {
        self.status() == Status::Pass
    }

    /// CLI exit code: 0 pass, 1 fail, 2 undecidable.
    pub fn exit_code(&self) -> i32 {
        match self.status() {
            Status::Pass => 0,
            Status::Fail(_) => 1,
            Status::Undecidable(_) => 2,
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "== {} ==", self.name).unwrap();
        for n in &self.notes {
            writeln!(out, "  {n}").unwrap();
        }
        for (l, s) in &self.rows {
            match s {
                Status::Pass => writeln!(out, "  {:<11} {l}", "PASS").unwrap(),
                Status::Fail(d) | Status::Undecidable(d) => writeln!(out, "  {:<11} {l}  [{d}]", s.word()).unwrap(),
            }
        }
        writeln!(out, "  {} {}", self.status().word(), self.name).unwrap();
        out
    }

    pub fn render_records(&self) -> String {
        let mut out = String::new();
        for n in &self.notes {
            writeln!(out, "check:{}\tnote:{n}", self.name).unwrap();
        }
        for (l, s) in &self.rows {
            write!(out, "check:{}\tslice:{l}\tstatus:{}", self.name, s.word()).unwrap();
            if let Status::Fail(d) | Status::Undecidable(d) = s {
                write!(out, "\tdetail:{d}").unwrap();
            }
            out.push('\n');
        }
        writeln!(out, "check:{}\tstatus:{}", self.name, self.status().word()).unwrap();
        out
    }
}
