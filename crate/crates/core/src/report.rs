//! Line-oriented command reports and their exit codes.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Item {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

/// Items in insertion order, preceded by free-form output lines.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub output: Vec<String>,
    pub items: Vec<Item>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, status: Status, detail: impl Into<String>) {
        self.items.push(Item { name: name.into(), status, detail: detail.into() });
    }

    pub fn pass(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.push(name, Status::Pass, detail);
    }

    pub fn fail(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.push(name, Status::Fail, detail);
    }

    pub fn unknown(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.push(name, Status::Unknown, detail);
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.output.push(text.into());
    }

    pub fn count(&self, status: Status) -> usize {
        self.items.iter().filter(|i| i.status == status).count()
    }

    pub fn extend(&mut self, other: Report) {
        self.output.extend(other.output);
        self.items.extend(other.items);
    }

    /// 1 if anything failed, 3 if anything is undecided, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.count(Status::Fail) > 0 {
            EXIT_FAIL
        } else if self.count(Status::Unknown) > 0 {
            EXIT_UNKNOWN
        } else {
            EXIT_OK
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.output {
            writeln!(f, "{l}")?;
        }
        for i in &self.items {
            if i.detail.is_empty() {
                writeln!(f, "{} {}", i.status, i.name)?;
            } else {
                writeln!(f, "{} {}: {}", i.status, i.name, i.detail)?;
            }
        }
        Ok(())
    }
}
