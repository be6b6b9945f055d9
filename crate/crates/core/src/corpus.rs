//! The bundled workspace files and whole-workspace checking.

use crate::report::Report;
use crate::subtyping::check_subproof;
use crate::syntax::ParseError;
use crate::typing::check_derivation;
use crate::workspace::{parse_workspace, DerivationEntry, SubProofEntry, Workspace};
use std::path::Path;
use thiserror::Error;

pub const BUNDLED: &[(&str, &str)] = &[
    ("sec3.af2", include_str!("../corpus/sec3.af2")),
    ("data.af2", include_str!("../corpus/data.af2")),
    ("eadd.af2", include_str!("../corpus/eadd.af2")),
    ("subproofs.af2", include_str!("../corpus/subproofs.af2")),
];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{file}:{error}")]
    Parse { file: String, error: ParseError },
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("no .af2 files in {0}")]
    Empty(String),
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub files: Vec<(String, Workspace)>,
}

impl Corpus {
    pub fn bundled() -> Corpus {
        Corpus::from_sources(BUNDLED).expect("bundled corpus parses")
    }

    pub fn from_sources(sources: &[(&str, &str)]) -> Result<Corpus, CorpusError> {
        let mut files = Vec::new();
        for (name, text) in sources {
            let ws = parse_workspace(text).map_err(|error| CorpusError::Parse { file: name.to_string(), error })?;
            files.push((name.to_string(), ws));
        }
        Ok(Corpus { files })
    }

    /// Every `*.af2` file of a directory, in name order.
    pub fn load_dir(dir: &Path) -> Result<Corpus, CorpusError> {
        let shown = dir.display().to_string();
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| CorpusError::Io(shown.clone(), e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "af2"))
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(CorpusError::Empty(shown));
        }
        let mut texts = Vec::new();
        for p in &paths {
            let text = std::fs::read_to_string(p).map_err(|e| CorpusError::Io(p.display().to_string(), e))?;
            texts.push((p.file_name().unwrap().to_string_lossy().to_string(), text));
        }
        let refs: Vec<(&str, &str)> = texts.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        Corpus::from_sources(&refs)
    }

    pub fn workspace(&self, file: &str) -> Option<&Workspace> {
        self.files.iter().find(|(f, _)| f == file).map(|(_, w)| w)
    }

    pub fn derivations(&self) -> impl Iterator<Item = (&str, &Workspace, &DerivationEntry)> {
        self.files.iter().flat_map(|(f, ws)| ws.derivations.iter().map(move |d| (f.as_str(), ws, d)))
    }

    pub fn subproofs(&self) -> impl Iterator<Item = (&str, &Workspace, &SubProofEntry)> {
        self.files.iter().flat_map(|(f, ws)| ws.subproofs.iter().map(move |s| (f.as_str(), ws, s)))
    }

    /// Derivations that check in their declared system.
    pub fn checked_derivations(&self) -> Vec<(&str, &Workspace, &DerivationEntry)> {
        self.derivations().filter(|(_, ws, d)| check_entry(ws, d).is_ok()).collect()
    }

    pub fn checked_subproofs(&self) -> Vec<(&str, &Workspace, &SubProofEntry)> {
        self.subproofs().filter(|(_, ws, s)| check_subproof(&ws.eqs, &s.proof, &s.lhs, &s.rhs).is_ok()).collect()
    }
}

pub fn check_entry(ws: &Workspace, d: &DerivationEntry) -> Result<(), crate::typing::DerivError> {
    check_derivation(d.system, &ws.eqs, &d.proof, &d.ctx, &d.term, &d.formula)
}

/// One item per subproof and derivation, prefixed by `prefix`.
pub fn check_workspace(ws: &Workspace, prefix: &str) -> Report {
    let mut r = Report::new();
    for s in &ws.subproofs {
        let name = format!("{prefix}subproof {}", s.name);
        match check_subproof(&ws.eqs, &s.proof, &s.lhs, &s.rhs) {
            Ok(()) => r.pass(name, format!("{} ⊆ {}", s.lhs, s.rhs)),
            Err(e) => r.fail(name, e.to_string()),
        }
    }
    for d in &ws.derivations {
        let name = format!("{prefix}derive {}", d.name);
        match check_entry(ws, d) {
            Ok(()) => r.pass(name, format!("{} : {} in {}", d.term, d.formula, d.system)),
            Err(e) => r.fail(name, e.to_string()),
        }
    }
    r
}

pub fn check_corpus(corpus: &Corpus) -> Report {
    let mut r = Report::new();
    for (f, ws) in &corpus.files {
        r.extend(check_workspace(ws, &format!("{f}: ")));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    #[test]
    fn bundled_corpus_checks() {
        let c = Corpus::bundled();
        let r = check_corpus(&c);
        assert_eq!(r.count(Status::Fail), 0, "{r}");
        assert!(r.items.len() >= 30);
    }

    #[test]
    fn bundled_files_round_trip() {
        for (name, ws) in &Corpus::bundled().files {
            let again = parse_workspace(&ws.to_string()).unwrap();
            assert_eq!(&again, ws, "{name}");
        }
    }
}
