//! Gaze and interaction-event CSV files for a set of recording sessions.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaze::{GazeSample, GazeSignal};
use crate::layout::{EventKind, InteractionEvent, Layout};

pub const GAZE_FILE: &str = "gaze.csv";
pub const EVENTS_FILE: &str = "events.csv";
pub const LAYOUT_FILE: &str = "layout.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub signal: GazeSignal,
    pub events: Vec<InteractionEvent>,
}

impl SessionRecord {
    pub fn key(&self) -> (&str, &str) {
        (&self.signal.user_id, &self.signal.session_id)
    }
}

/// Sessions ordered by `(user_id, session_id)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub sessions: Vec<SessionRecord>,
}

#[derive(Debug, Deserialize)]
struct GazeRow {
    user_id: String,
    session_id: String,
    t_ms: f64,
    x_px: f64,
    y_px: f64,
    valid: u8,
}

#[derive(Debug, Deserialize)]
struct EventRow {
    user_id: String,
    session_id: String,
    t_ms: f64,
    kind: String,
    payload: String,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

type Key = (String, String);

fn read_gaze<R: Read>(r: R, path: &Path) -> Result<BTreeMap<Key, Vec<GazeSample>>> {
    let mut out: BTreeMap<Key, Vec<GazeSample>> = BTreeMap::new();
    for (line, row) in csv::Reader::from_reader(r).deserialize::<GazeRow>().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        if row.valid > 1 {
            return Err(Error::csv(path, format!("record {}: valid must be 0 or 1", line + 1)));
        }
        let sample = GazeSample {
            x: row.x_px,
            y: row.y_px,
            t: row.t_ms,
            valid: row.valid == 1,
        };
        out.entry((row.user_id, row.session_id)).or_default().push(sample);
    }
    Ok(out)
}

fn read_events<R: Read>(r: R, path: &Path) -> Result<BTreeMap<Key, Vec<InteractionEvent>>> {
    let mut out: BTreeMap<Key, Vec<InteractionEvent>> = BTreeMap::new();
    for (line, row) in csv::Reader::from_reader(r).deserialize::<EventRow>().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let kind = EventKind::parse(&row.kind).ok_or_else(|| {
            Error::csv(path, format!("record {}: unknown event kind `{}`", line + 1, row.kind))
        })?;
        out.entry((row.user_id, row.session_id))
            .or_default()
            .push(InteractionEvent::new(row.t_ms, kind, row.payload));
    }
    Ok(out)
}

impl Corpus {
    pub fn new(mut sessions: Vec<SessionRecord>) -> Self {
        sessions.sort_by(|a, b| a.key().cmp(&b.key()));
        Self { sessions }
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }

    /// Distinct user ids in order.
    pub fn users(&self) -> Vec<String> {
        let mut u: Vec<String> = self.sessions.iter().map(|s| s.signal.user_id.clone()).collect();
        u.dedup();
        u
    }

    pub fn load(gaze_path: &Path, events_path: &Path) -> Result<Self> {
        let gaze = read_gaze(open(gaze_path)?, gaze_path)?;
        let mut events = read_events(open(events_path)?, events_path)?;
        let mut sessions = Vec::with_capacity(gaze.len());
        for ((user, session), samples) in gaze {
            let signal = GazeSignal::new(user.clone(), session.clone(), samples).map_err(|e| {
                Error::MalformedSignal(format!("{user}/{session}: {e}"))
            })?;
            let ev = events.remove(&(user, session)).unwrap_or_default();
            sessions.push(SessionRecord { signal, events: ev });
        }
        if let Some(((u, s), _)) = events.into_iter().next() {
            return Err(Error::MalformedEvents(format!(
                "events for session {u}/{s} which has no gaze data"
            )));
        }
        Ok(Self::new(sessions))
    }

    /// Loads `gaze.csv` and `events.csv` from a directory.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        Self::load(&dir.join(GAZE_FILE), &dir.join(EVENTS_FILE))
    }

    pub fn write_gaze<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["user_id", "session_id", "t_ms", "x_px", "y_px", "valid"])?;
        for s in &self.sessions {
            for g in &s.signal.samples {
                w.write_record([
                    s.signal.user_id.as_str(),
                    s.signal.session_id.as_str(),
                    &g.t.to_string(),
                    &g.x.to_string(),
                    &g.y.to_string(),
                    if g.valid { "1" } else { "0" },
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_events<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["user_id", "session_id", "t_ms", "kind", "payload"])?;
        for s in &self.sessions {
            for e in &s.events {
                w.write_record([
                    s.signal.user_id.as_str(),
                    s.signal.session_id.as_str(),
                    &e.t.to_string(),
                    e.kind.as_str(),
                    &e.payload,
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `gaze.csv`, `events.csv` and `layout.toml` into `dir`.
    pub fn save(&self, dir: &Path, layout: &Layout) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let gaze = dir.join(GAZE_FILE);
        self.write_gaze(create(&gaze)?).map_err(|e| Error::csv(&gaze, e))?;
        let events = dir.join(EVENTS_FILE);
        self.write_events(create(&events)?).map_err(|e| Error::csv(&events, e))?;
        let lp = dir.join(LAYOUT_FILE);
        std::fs::write(&lp, layout.to_toml_string()).map_err(|e| Error::io(&lp, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> Corpus {
        let sig = |u: &str, s: &str| {
            GazeSignal::new(
                u,
                s,
                vec![GazeSample::new(1.5, 2.0, 0.0), GazeSample::invalid(8.25), GazeSample::new(3.0, 4.0, 16.5)],
            )
            .unwrap()
        };
        Corpus::new(vec![
            SessionRecord {
                signal: sig("u2", "s1"),
                events: vec![],
            },
            SessionRecord {
                signal: sig("u1", "s1"),
                events: vec![InteractionEvent::scroll(3.0, -40.5), InteractionEvent::new(9.0, EventKind::Click, "Bar_Menu")],
            },
        ])
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = corpus();
        assert_eq!(c.sessions[0].signal.user_id, "u1");
        c.save(dir.path(), &Layout::sample()).unwrap();
        let back = Corpus::load_dir(dir.path()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.users(), vec!["u1", "u2"]);
        let header = std::fs::read_to_string(dir.path().join(GAZE_FILE)).unwrap();
        assert!(header.starts_with("user_id,session_id,t_ms,x_px,y_px,valid\n"));
        let layout = Layout::load(&dir.path().join(LAYOUT_FILE)).unwrap();
        assert_eq!(layout.n(), 6);
    }

    #[test]
    fn error_kinds() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path();
        assert!(matches!(Corpus::load_dir(p), Err(Error::MissingFile(_))));
        std::fs::write(p.join(GAZE_FILE), "user_id,session_id,t_ms,x_px,y_px,valid\nu,s,0,1,1,yes\n").unwrap();
        std::fs::write(p.join(EVENTS_FILE), "user_id,session_id,t_ms,kind,payload\n").unwrap();
        assert!(matches!(Corpus::load_dir(p), Err(Error::MalformedCsv { .. })));
        std::fs::write(p.join(GAZE_FILE), "user_id,session_id,t_ms,x_px,y_px,valid\nu,s,5,1,1,1\nu,s,2,1,1,1\n").unwrap();
        assert!(matches!(Corpus::load_dir(p), Err(Error::MalformedSignal(_))));
        std::fs::write(p.join(GAZE_FILE), "user_id,session_id,t_ms,x_px,y_px,valid\nu,s,0,1,1,1\n").unwrap();
        std::fs::write(p.join(EVENTS_FILE), "user_id,session_id,t_ms,kind,payload\nu,s,1,wave,\n").unwrap();
        assert!(matches!(Corpus::load_dir(p), Err(Error::MalformedCsv { .. })));
        std::fs::write(p.join(EVENTS_FILE), "user_id,session_id,t_ms,kind,payload\nv,s,1,click,x\n").unwrap();
        assert!(matches!(Corpus::load_dir(p), Err(Error::MalformedEvents(_))));
    }
}
