//! Synthetic gaze sessions driven by an AOI-level Markov walk.
//!
//! State 0 is whitespace, state `j` is AOI `j`. Each visit has a log-normal
//! dwell time and is filled with fixations whose targets are checked with
//! [`hit_test`] against the simulated page state, so labels derived from the
//! output agree with the walk.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SessionRecord};
use crate::error::{Error, Result};
use crate::gaze::{GazeSample, GazeSignal, DEFAULT_SAMPLE_RATE_HZ};
use crate::layout::{hit_test, AoiBehavior, EventKind, InteractionEvent, Layout, PageState, Rect};

/// Log-normal law given by its arithmetic mean and the sd of the log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalSpec {
    pub mean: f64,
    pub sigma: f64,
}

impl LogNormalSpec {
    pub fn new(mean: f64, sigma: f64) -> Self {
        Self { mean, sigma }
    }

    /// From arithmetic mean and standard deviation.
    pub fn from_moments(mean: f64, sd: f64) -> Self {
        let cv = sd / mean;
        Self {
            mean,
            sigma: (1.0 + cv * cv).ln().sqrt(),
        }
    }

    fn dist(&self) -> LogNormal<f64> {
        let mu = self.mean.ln() - 0.5 * self.sigma * self.sigma;
        LogNormal::new(mu, self.sigma).expect("validated")
    }

    fn ok(&self) -> bool {
        self.mean > 0.0 && self.mean.is_finite() && self.sigma >= 0.0 && self.sigma.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BehaviorProfile {
    /// Row-stochastic, `(n + 1) x (n + 1)`.
    pub transition: Vec<Vec<f64>>,
    /// Visit dwell per state, ms.
    pub dwell_ms: Vec<LogNormalSpec>,
    /// Fixation duration, ms. Draws below `min_fixation_ms` are redrawn.
    pub fixation_ms: LogNormalSpec,
    pub min_fixation_ms: f64,
    pub saccade_ms: (f64, f64),
    pub jitter_px: f64,
    pub blink_rate_hz: f64,
    pub blink_ms: f64,
    /// Scrolls per second of whitespace viewing, and their sd in px.
    pub scroll_rate_hz: f64,
    pub scroll_px: f64,
    /// Probability that a visit to a scroll-locked AOI opens its menu.
    pub menu_open_prob: f64,
    /// Length scale of the preference for nearby content: the transition
    /// weight of a static AOI is multiplied by `exp(-d / proximity_px)`,
    /// `d` being its vertical page distance from the current gaze. 0 turns
    /// the preference off.
    pub proximity_px: f64,
    pub session_s: LogNormalSpec,
    pub session_range_s: (f64, f64),
    pub sample_rate_hz: f64,
}

impl Default for BehaviorProfile {
    fn default() -> Self {
        Self::reference()
    }
}

impl BehaviorProfile {
    /// Profile for the bundled six-AOI news page, tuned so that recordings
    /// last 78.8 s on average (sd 51.9, within 16.5 to 399 s) and detected
    /// fixations average about 220 ms.
    pub fn reference() -> Self {
        let transition = vec![
            vec![0.00, 0.15, 0.30, 0.30, 0.10, 0.10, 0.05],
            vec![0.20, 0.00, 0.35, 0.15, 0.05, 0.05, 0.20],
            vec![0.25, 0.15, 0.00, 0.40, 0.10, 0.05, 0.05],
            vec![0.25, 0.10, 0.25, 0.00, 0.25, 0.10, 0.05],
            vec![0.30, 0.05, 0.10, 0.25, 0.00, 0.25, 0.05],
            vec![0.35, 0.10, 0.05, 0.20, 0.25, 0.00, 0.05],
            vec![0.20, 0.40, 0.25, 0.10, 0.03, 0.02, 0.00],
        ];
        // Reading a news block takes several seconds, so a visit often spans
        // consecutive windows.
        let dwell_ms = [500.0, 1200.0, 5000.0, 6000.0, 2000.0, 2000.0, 3500.0]
            .into_iter()
            .map(|m| LogNormalSpec::new(m, 0.45))
            .collect();
        Self {
            transition,
            dwell_ms,
            fixation_ms: LogNormalSpec::new(185.0, 0.5),
            min_fixation_ms: 105.0,
            saccade_ms: (30.0, 50.0),
            jitter_px: 1.5,
            blink_rate_hz: 0.2,
            blink_ms: 150.0,
            scroll_rate_hz: 0.5,
            scroll_px: 300.0,
            menu_open_prob: 0.3,
            proximity_px: 800.0,
            session_s: LogNormalSpec::from_moments(78.8, 51.9),
            session_range_s: (16.5, 399.0),
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
        }
    }

    /// Every visit goes to `aoi`, without menus or blinks.
    pub fn single_aoi(n: usize, aoi: usize) -> Self {
        let mut p = Self::reference();
        p.transition = vec![vec![0.0; n + 1]; n + 1];
        for row in &mut p.transition {
            row[aoi] = 1.0;
        }
        p.dwell_ms = vec![LogNormalSpec::new(1000.0, 0.5); n + 1];
        p.blink_rate_hz = 0.0;
        p.menu_open_prob = 0.0;
        p
    }

    pub fn n_states(&self) -> usize {
        self.transition.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        let s = self.transition.len();
        if s < 2 {
            return bad("transition matrix needs at least two states".into());
        }
        for (i, row) in self.transition.iter().enumerate() {
            if row.len() != s {
                return bad(format!("transition row {i} has {} entries, expected {s}", row.len()));
            }
            if row.iter().any(|p| !(*p >= 0.0)) {
                return bad(format!("transition row {i} has a negative or NaN entry"));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return bad(format!("transition row {i} sums to {sum}"));
            }
        }
        if self.dwell_ms.len() != s {
            return bad(format!("{} dwell laws for {s} states", self.dwell_ms.len()));
        }
        if !self.dwell_ms.iter().all(LogNormalSpec::ok) || !self.fixation_ms.ok() || !self.session_s.ok() {
            return bad("log-normal laws need a positive mean and non-negative sigma".into());
        }
        let rates = [
            self.min_fixation_ms,
            self.saccade_ms.0,
            self.jitter_px,
            self.blink_rate_hz,
            self.blink_ms,
            self.scroll_rate_hz,
            self.scroll_px,
            self.proximity_px,
        ];
        if rates.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return bad("rates, durations and spreads must be non-negative".into());
        }
        if !(self.saccade_ms.1 >= self.saccade_ms.0) {
            return bad("saccade duration range is reversed".into());
        }
        if !(0.0..=1.0).contains(&self.menu_open_prob) {
            return bad("menu_open_prob must lie in [0, 1]".into());
        }
        let (lo, hi) = self.session_range_s;
        if !(lo > 0.0 && hi >= lo) {
            return bad("session range must satisfy 0 < min <= max".into());
        }
        if !(self.sample_rate_hz > 0.0) {
            return bad("sample rate must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    /// 0 for whitespace.
    pub state: usize,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSession {
    pub record: SessionRecord,
    pub visits: Vec<Visit>,
}

/// Independent stream per `(seed, user, session)`.
pub fn session_seed(seed: u64, user: u64, session: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(seed) ^ user) ^ session)
}

struct Sim<'a> {
    layout: &'a Layout,
    profile: &'a BehaviorProfile,
    rng: ChaCha8Rng,
    state: PageState,
    events: Vec<InteractionEvent>,
    samples: Vec<GazeSample>,
    /// Index of the next sample on the fixed clock.
    tick: u64,
    period: f64,
    end: f64,
    pos: Option<(f64, f64)>,
    last_fix_ms: f64,
}

const INSET: f64 = 15.0;
const TRIES: usize = 64;

fn inset(r: &Rect) -> Rect {
    let dx = INSET.min(r.w / 4.0);
    let dy = INSET.min(r.h / 4.0);
    Rect::new(r.x + dx, r.y + dy, r.w - 2.0 * dx, r.h - 2.0 * dy)
}

impl<'a> Sim<'a> {
    fn now(&self) -> f64 {
        self.tick as f64 * self.period
    }

    fn done(&self) -> bool {
        self.now() > self.end
    }

    fn emit(&mut self, kind: EventKind, payload: impl Into<String>) {
        let ev = InteractionEvent::new(self.now(), kind, payload);
        match kind {
            EventKind::Scroll => {
                let max = self.layout.max_scroll().1;
                let dy: f64 = ev.payload.parse().expect("numeric");
                self.state.scroll_y = (self.state.scroll_y + dy).clamp(0.0, max);
            }
            EventKind::PopupOpen => self.state.popup_active = true,
            EventKind::PopupClose => self.state.popup_active = false,
            EventKind::MenuOpen => self.state.menu_open = true,
            EventKind::MenuClose => self.state.menu_open = false,
            EventKind::Click | EventKind::Hscroll => {}
        }
        self.events.push(ev);
    }

    fn scroll_to(&mut self, target: f64) {
        let max = self.layout.max_scroll().1;
        let target = target.clamp(0.0, max).round();
        let dy = target - self.state.scroll_y;
        if dy != 0.0 {
            self.emit(EventKind::Scroll, dy.to_string());
        }
    }

    /// Emits samples on the fixed clock while `t < until`.
    fn fill(&mut self, until: f64, mut at: impl FnMut(f64, &mut ChaCha8Rng) -> Option<(f64, f64)>) {
        let until = until.min(self.end + self.period * 0.5);
        while self.now() < until {
            let t = self.now();
            let s = match at(t, &mut self.rng) {
                Some((x, y)) => GazeSample::new(x, y, t),
                None => GazeSample::invalid(t),
            };
            self.samples.push(s);
            self.tick += 1;
        }
    }

    fn uniform_in(&mut self, r: &Rect) -> (f64, f64) {
        let r = inset(r);
        (
            r.x + self.rng.gen::<f64>() * r.w,
            r.y + self.rng.gen::<f64>() * r.h,
        )
    }

    fn hits(&self, p: (f64, f64), aoi: Option<u32>) -> bool {
        hit_test(p.0, p.1, self.layout, &self.state).aoi == aoi
    }

    /// A screen point that resolves to `state`, scrolling if needed.
    fn target(&mut self, state: usize) -> (f64, f64) {
        let vw = self.layout.viewport_size.width;
        let vh = self.layout.viewport_size.height;
        if state == 0 {
            let mut p = (0.0, 0.0);
            for _ in 0..TRIES {
                p = (self.rng.gen::<f64>() * vw, self.rng.gen::<f64>() * vh);
                if self.hits(p, None) {
                    break;
                }
            }
            return p;
        }
        let id = state as u32;
        let aoi = self.layout.aoi(id).expect("profile matches layout");
        let mut p = (0.0, 0.0);
        for attempt in 0..TRIES {
            match aoi.behavior {
                AoiBehavior::Static => {
                    let rects: Vec<Rect> = aoi
                        .members
                        .iter()
                        .filter_map(|m| self.layout.component_by_name(m))
                        .filter(|c| !c.dynamic)
                        .map(|c| c.rect)
                        .chain(aoi.region)
                        .collect();
                    let r = *rects.choose(&mut self.rng).expect("non-empty AOI");
                    let (px, py) = self.uniform_in(&r);
                    let sy = py - self.state.scroll_y;
                    if attempt > 0 && attempt % 8 == 0 || !(INSET..=vh - INSET).contains(&sy) {
                        let frac = 0.3 + 0.4 * self.rng.gen::<f64>();
                        self.scroll_to(py - frac * vh);
                    }
                    p = (px - self.state.scroll_x, py - self.state.scroll_y);
                }
                _ => {
                    let rects = self.layout.aoi_screen_rects(id, &self.state);
                    let Some(r) = rects.choose(&mut self.rng).copied() else {
                        break;
                    };
                    p = self.uniform_in(&r);
                }
            }
            if self.hits(p, Some(id)) {
                break;
            }
        }
        p
    }

    fn fixation(&mut self, state: usize, fix: &LogNormal<f64>, jitter: &Normal<f64>) {
        let p = self.profile;
        let target = self.target(state);
        let t0 = self.now();
        if let Some(from) = self.pos {
            let blink = self.rng.gen::<f64>() < p.blink_rate_hz * self.last_fix_ms / 1000.0;
            let mut cursor = t0;
            if blink {
                cursor += p.blink_ms;
                self.fill(cursor, |_, _| None);
            }
            let dur = p.saccade_ms.0 + self.rng.gen::<f64>() * (p.saccade_ms.1 - p.saccade_ms.0);
            let start = self.now();
            self.fill(start + dur, |t, rng| {
                let a = ((t - start) / dur).clamp(0.0, 1.0);
                Some((
                    from.0 + a * (target.0 - from.0) + jitter.sample(rng),
                    from.1 + a * (target.1 - from.1) + jitter.sample(rng),
                ))
            });
        }
        let mut d = fix.sample(&mut self.rng);
        while d < p.min_fixation_ms {
            d = fix.sample(&mut self.rng);
        }
        let start = self.now();
        self.fill(start + d, |_, rng| Some((target.0 + jitter.sample(rng), target.1 + jitter.sample(rng))));
        self.pos = Some(target);
        self.last_fix_ms = d;
    }
}

/// One recording. Fully determined by `seed`.
pub fn generate_session(
    layout: &Layout,
    profile: &BehaviorProfile,
    seed: u64,
    user_id: &str,
    session_id: &str,
) -> Result<SyntheticSession> {
    profile.validate()?;
    if profile.n_states() != layout.n() + 1 {
        return Err(Error::InvalidParameter(format!(
            "profile has {} states but the layout has {} AOIs",
            profile.n_states(),
            layout.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = profile.session_range_s;
    let duration_ms = profile.session_s.dist().sample(&mut rng).clamp(lo, hi) * 1000.0;
    let dwell: Vec<LogNormal<f64>> = profile.dwell_ms.iter().map(LogNormalSpec::dist).collect();
    let fix = profile.fixation_ms.dist();
    let jitter = Normal::new(0.0, profile.jitter_px).expect("validated");
    let scroll = Normal::new(0.0, profile.scroll_px).expect("validated");

    let mut sim = Sim {
        layout,
        profile,
        rng,
        state: PageState::default(),
        events: Vec::new(),
        samples: Vec::new(),
        tick: 0,
        period: 1000.0 / profile.sample_rate_hz,
        end: duration_ms,
        pos: None,
        last_fix_ms: 0.0,
    };
    // Vertical page centre of each static AOI.
    let centers: Vec<Option<f64>> = (0..profile.n_states())
        .map(|j| {
            let aoi = layout.aoi(j as u32).filter(|a| j > 0 && a.behavior == AoiBehavior::Static)?;
            let ys: Vec<f64> = aoi
                .members
                .iter()
                .filter_map(|m| layout.component_by_name(m))
                .filter(|c| !c.dynamic)
                .map(|c| c.rect)
                .chain(aoi.region)
                .map(|r| r.y + r.h / 2.0)
                .collect();
            (!ys.is_empty()).then(|| ys.iter().sum::<f64>() / ys.len() as f64)
        })
        .collect();
    let mut visits = Vec::new();
    let mut state = 0usize;
    while !sim.done() {
        let gaze_y = sim.pos.map(|(_, y)| y + sim.state.scroll_y);
        let row: Vec<f64> = profile.transition[state]
            .iter()
            .zip(&centers)
            .map(|(&p, c)| match (c, gaze_y) {
                (Some(c), Some(g)) if profile.proximity_px > 0.0 => p * (-(c - g).abs() / profile.proximity_px).exp(),
                _ => p,
            })
            .collect();
        let u = sim.rng.gen::<f64>() * row.iter().sum::<f64>();
        let mut acc = 0.0;
        let mut next = row.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        for (j, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                next = j;
                break;
            }
        }
        state = next;
        let t_start = sim.now();
        let visit_end = t_start + dwell[state].sample(&mut sim.rng);
        let behavior = (state > 0).then(|| layout.aoi(state as u32).expect("checked").behavior);
        match behavior {
            Some(AoiBehavior::Overlay) => {
                sim.emit(EventKind::Click, "Bar_Menu");
                sim.emit(EventKind::PopupOpen, "");
            }
            Some(AoiBehavior::ScrollLocked) if sim.rng.gen::<f64>() < profile.menu_open_prob => {
                sim.emit(EventKind::MenuOpen, "");
            }
            None if sim.rng.gen::<f64>() < profile.scroll_rate_hz * (visit_end - t_start) / 1000.0 => {
                let dy = scroll.sample(&mut sim.rng).round();
                sim.emit(EventKind::Scroll, dy.to_string());
            }
            _ => {}
        }
        loop {
            sim.fixation(state, &fix, &jitter);
            if sim.now() >= visit_end || sim.done() {
                break;
            }
        }
        if sim.state.popup_active {
            sim.emit(EventKind::PopupClose, "");
        }
        if sim.state.menu_open {
            sim.emit(EventKind::MenuClose, "");
        }
        visits.push(Visit {
            state,
            t_start,
            t_end: sim.now(),
        });
    }
    let events = std::mem::take(&mut sim.events);
    let mut signal = GazeSignal::new(user_id, session_id, std::mem::take(&mut sim.samples))?;
    signal.sample_rate = profile.sample_rate_hz;
    Ok(SyntheticSession {
        record: SessionRecord { signal, events },
        visits,
    })
}

/// `n_users x sessions_per_user` recordings with ids `u01`, `s1`, ...
pub fn generate_cohort(
    layout: &Layout,
    profile: &BehaviorProfile,
    n_users: usize,
    sessions_per_user: usize,
    seed: u64,
) -> Result<Corpus> {
    profile.validate()?;
    let width = n_users.max(1).to_string().len().max(2);
    let keys: Vec<(usize, usize)> = (0..n_users)
        .flat_map(|u| (0..sessions_per_user).map(move |s| (u, s)))
        .collect();
    let sessions = keys
        .par_iter()
        .map(|&(u, s)| {
            let user = format!("u{:0width$}", u + 1);
            let session = format!("s{}", s + 1);
            generate_session(layout, profile, session_seed(seed, u as u64, s as u64), &user, &session)
                .map(|g| g.record)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Corpus::new(sessions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaze::{detect_fixations, FixationParams};
    use crate::layout::PageTimeline;

    #[test]
    fn single_aoi_zero_jitter_stays_inside() {
        let layout = Layout::sample();
        for aoi in [1usize, 2, 6] {
            let mut p = BehaviorProfile::single_aoi(layout.n(), aoi);
            p.jitter_px = 0.0;
            let s = generate_session(&layout, &p, 7, "u", "s").unwrap();
            let tl = PageTimeline::new(&s.record.events, &layout).unwrap();
            let mut inside = 0;
            for g in s.record.signal.samples.iter().filter(|g| g.valid) {
                let hit = hit_test(g.x, g.y, &layout, &tl.at(g.t));
                // Straight saccades may cross the gaps between member
                // components; fixation samples may not.
                if hit.aoi == Some(aoi as u32) {
                    inside += 1;
                } else {
                    assert_ne!(aoi, 1, "header is convex, sample at {g:?} left it");
                }
            }
            let valid = s.record.signal.samples.iter().filter(|g| g.valid).count();
            assert!(inside as f64 >= 0.8 * valid as f64, "AOI {aoi}: {inside}/{valid}");
            let fx = detect_fixations(&s.record.signal, &FixationParams::default()).unwrap();
            for f in &fx {
                let hit = hit_test(f.cx, f.cy, &layout, &tl.at(f.t_start));
                assert_eq!(hit.aoi, Some(aoi as u32));
            }
        }
    }

    #[test]
    fn deterministic() {
        let layout = Layout::sample();
        let p = BehaviorProfile::reference();
        let a = generate_session(&layout, &p, 11, "u", "s").unwrap();
        let b = generate_session(&layout, &p, 11, "u", "s").unwrap();
        assert_eq!(a, b);
        let c = generate_session(&layout, &p, 12, "u", "s").unwrap();
        assert_ne!(a.record.signal.samples, c.record.signal.samples);
        let x = generate_cohort(&layout, &p, 3, 2, 5).unwrap();
        let y = generate_cohort(&layout, &p, 3, 2, 5).unwrap();
        assert_eq!(x, y);
    }

    /// Share of visits to AOI 2 (top news) followed by AOI 3 (lower news)
    /// rather than AOI 5 (bottom banners).
    fn share_to_near(proximity_px: f64) -> f64 {
        let layout = Layout::sample();
        let mut p = BehaviorProfile::reference();
        p.transition[2] = vec![0.0, 0.0, 0.0, 0.5, 0.0, 0.5, 0.0];
        p.proximity_px = proximity_px;
        let (mut n, mut near) = (0u32, 0u32);
        let mut seed = 0;
        while n < 300 {
            let s = generate_session(&layout, &p, seed, "u", "s").unwrap();
            for w in s.visits.windows(2) {
                if w[0].state == 2 {
                    n += 1;
                    near += (w[1].state == 3) as u32;
                }
            }
            seed += 1;
        }
        near as f64 / n as f64
    }

    #[test]
    fn proximity_favours_nearby_content() {
        let off = share_to_near(0.0);
        assert!((0.4..=0.6).contains(&off), "{off}");
        // Centres are ~950 px and ~2300 px below the top news block.
        let on = share_to_near(500.0);
        assert!(on > 0.85, "{on}");
    }

    #[test]
    fn transition_frequency_within_binomial_bounds() {
        let layout = Layout::sample();
        let mut p = BehaviorProfile::reference();
        p.transition[2] = vec![0.05, 0.05, 0.0, 0.8, 0.05, 0.05, 0.0];
        p.proximity_px = 0.0;
        let (mut from2, mut to3) = (0u32, 0u32);
        let mut seed = 0;
        while from2 < 200 {
            let s = generate_session(&layout, &p, seed, "u", "s").unwrap();
            for w in s.visits.windows(2) {
                if w[0].state == 2 && from2 < 200 {
                    from2 += 1;
                    to3 += (w[1].state == 3) as u32;
                }
            }
            seed += 1;
        }
        let n = 200.0;
        let sd = (n * 0.8 * 0.2f64).sqrt();
        assert!((to3 as f64 - 0.8 * n).abs() <= 3.0 * sd, "{to3}/200");
    }

    #[test]
    fn events_ordered_and_durations_clamped() {
        let layout = Layout::sample();
        let p = BehaviorProfile::reference();
        let c = generate_cohort(&layout, &p, 4, 3, 1).unwrap();
        assert_eq!(c.len(), 12);
        assert_eq!(c.users().len(), 4);
        for s in &c.sessions {
            PageTimeline::new(&s.events, &layout).unwrap();
            let d = s.signal.duration_ms() / 1000.0;
            assert!((16.0..=399.1).contains(&d), "{d}");
        }
    }

    #[test]
    fn empty_cohort_and_bad_profiles() {
        let layout = Layout::sample();
        let p = BehaviorProfile::reference();
        assert!(generate_cohort(&layout, &p, 0, 3, 1).unwrap().is_empty());
        let mut q = p.clone();
        q.transition[1][1] = 0.5;
        assert!(matches!(q.validate(), Err(Error::InvalidParameter(_))));
        let mut q = p.clone();
        q.blink_rate_hz = -1.0;
        assert!(q.validate().is_err());
        let mut q = p.clone();
        q.transition.pop();
        assert!(q.validate().is_err());
        let q = BehaviorProfile::single_aoi(3, 1);
        assert!(generate_session(&layout, &q, 0, "u", "s").is_err());
    }

    #[test]
    fn moments_match() {
        let l = LogNormalSpec::from_moments(78.8, 51.9);
        let d = l.dist();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..200_000).map(|_| d.sample(&mut rng)).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
        assert!((m - 78.8).abs() < 0.8, "{m}");
        assert!((sd - 51.9).abs() < 1.5, "{sd}");
    }
}
