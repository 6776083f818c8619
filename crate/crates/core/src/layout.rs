//! Page layout, interaction replay and AOI hit-testing.
//!
//! Components live in page coordinates unless they belong to a
//! scroll-locked or overlay AOI, in which case they are fixed to the screen.
//! Dynamic components are only visible while the menu or popup that shows
//! them is open.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The bundled six-AOI news page.
pub const SAMPLE_LAYOUT_TOML: &str = include_str!("../data/news_page.toml");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl From<[f64; 4]> for Rect {
    fn from(v: [f64; 4]) -> Self {
        Rect::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.x, r.y, r.w, r.h]
    }
}

impl Rect {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    /// Half-open containment: `[x, x + w) x [y, y + h)`.
    pub fn contains(&self, px: f64, py: f64) -> bool {
        px >= self.x && px < self.x + self.w && py >= self.y && py < self.y + self.h
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x < other.x + other.w
            && other.x < self.x + self.w
            && self.y < other.y + other.h
            && other.y < self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Rect {
        Rect::new(self.x + dx, self.y + dy, self.w, self.h)
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = (self.x + self.w).min(other.x + other.w);
        let y1 = (self.y + self.h).min(other.y + other.h);
        (x1 > x0 && y1 > y0).then(|| Rect::new(x0, y0, x1 - x0, y1 - y0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    Menu,
    Popup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    /// 1-based, assigned from file order.
    #[serde(skip)]
    pub id: u32,
    pub name: String,
    pub rect: Rect,
    #[serde(default)]
    pub dynamic: bool,
    /// Required for dynamic components.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shown_by: Option<Trigger>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AoiBehavior {
    Static,
    ScrollLocked,
    Overlay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoiDef {
    pub id: u32,
    pub behavior: AoiBehavior,
    #[serde(default)]
    pub members: Vec<String>,
    /// Explicit region used instead of (or in addition to) the members.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Rect>,
    /// Event kind that activates an overlay AOI.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation: Option<EventKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Size {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Anchor {
    Page,
    Screen,
}

/// A rectangle that contributes to hit-testing, resolved once at load time.
#[derive(Debug, Clone)]
struct Region {
    rect: Rect,
    anchor: Anchor,
    shown_by: Option<Trigger>,
    aoi: Option<u32>,
    component: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LayoutFile {
    page: Size,
    viewport: Size,
    #[serde(default)]
    components: Vec<Component>,
    #[serde(default)]
    aois: Vec<AoiDef>,
}

#[derive(Debug, Clone)]
pub struct Layout {
    pub page_size: Size,
    pub viewport_size: Size,
    pub components: Vec<Component>,
    pub aois: Vec<AoiDef>,
    regions: Vec<Region>,
}

impl Layout {
    pub fn new(
        page_size: Size,
        viewport_size: Size,
        mut components: Vec<Component>,
        mut aois: Vec<AoiDef>,
    ) -> Result<Self> {
        for (k, c) in components.iter_mut().enumerate() {
            c.id = k as u32 + 1;
        }
        aois.sort_by_key(|a| a.id);
        let mut layout = Layout {
            page_size,
            viewport_size,
            components,
            aois,
            regions: Vec::new(),
        };
        layout.validate()?;
        layout.regions = layout.resolve_regions();
        Ok(layout)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: LayoutFile =
            toml::from_str(text).map_err(|e| Error::InvalidLayout(e.to_string()))?;
        Layout::new(file.page, file.viewport, file.components, file.aois)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Layout::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let file = LayoutFile {
            page: self.page_size,
            viewport: self.viewport_size,
            components: self.components.clone(),
            aois: self.aois.clone(),
        };
        toml::to_string_pretty(&file).expect("layout serializes")
    }

    /// The bundled news page layout.
    pub fn sample() -> Self {
        Layout::from_toml_str(SAMPLE_LAYOUT_TOML).expect("bundled layout is valid")
    }

    /// Number of AOIs.
    pub fn n(&self) -> usize {
        self.aois.len()
    }

    pub fn component(&self, id: u32) -> Option<&Component> {
        id.checked_sub(1).and_then(|k| self.components.get(k as usize))
    }

    pub fn component_by_name(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn aoi(&self, id: u32) -> Option<&AoiDef> {
        id.checked_sub(1).and_then(|k| self.aois.get(k as usize))
    }

    pub fn max_scroll(&self) -> (f64, f64) {
        (
            (self.page_size.width - self.viewport_size.width).max(0.0),
            (self.page_size.height - self.viewport_size.height).max(0.0),
        )
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidLayout(msg));
        if !(self.viewport_size.width > 0.0 && self.viewport_size.height > 0.0) {
            return bad("viewport must have positive size".into());
        }
        if self.page_size.width < self.viewport_size.width
            || self.page_size.height < self.viewport_size.height
        {
            return bad("page must be at least as large as the viewport".into());
        }
        let mut names = HashSet::new();
        for c in &self.components {
            if !(c.rect.w > 0.0 && c.rect.h > 0.0) {
                return bad(format!("component {} has non-positive area", c.name));
            }
            if !names.insert(c.name.as_str()) {
                return bad(format!("duplicate component name {}", c.name));
            }
            if c.dynamic != c.shown_by.is_some() {
                return bad(format!(
                    "component {}: dynamic components need `shown_by`, static ones must not set it",
                    c.name
                ));
            }
        }
        for (k, a) in self.aois.iter().enumerate() {
            if a.id as usize != k + 1 {
                return bad(format!("AOI ids must be contiguous from 1, found {}", a.id));
            }
            if a.members.is_empty() && a.region.is_none() {
                return bad(format!("AOI {} has neither members nor a region", a.id));
            }
            for m in &a.members {
                if !names.contains(m.as_str()) {
                    return bad(format!("AOI {} references unknown component {m}", a.id));
                }
            }
            match (a.behavior, a.activation) {
                (AoiBehavior::Overlay, Some(EventKind::PopupOpen | EventKind::MenuOpen)) => {}
                (AoiBehavior::Overlay, _) => {
                    return bad(format!(
                        "overlay AOI {} needs activation popup_open or menu_open",
                        a.id
                    ))
                }
                (_, Some(_)) => {
                    return bad(format!("only overlay AOIs take an activation (AOI {})", a.id))
                }
                _ => {}
            }
        }
        let mut owner = std::collections::HashMap::new();
        for a in &self.aois {
            for m in &a.members {
                if let Some(prev) = owner.insert(m.as_str(), a.id) {
                    return bad(format!("component {m} belongs to AOIs {prev} and {}", a.id));
                }
            }
        }
        for behavior in [AoiBehavior::Static, AoiBehavior::ScrollLocked] {
            let rects: Vec<(u32, Rect)> = self
                .aois
                .iter()
                .filter(|a| a.behavior == behavior)
                .flat_map(|a| self.aoi_rects(a).into_iter().map(move |r| (a.id, r)))
                .collect();
            for (i, (ai, ri)) in rects.iter().enumerate() {
                for (aj, rj) in &rects[i + 1..] {
                    if ai != aj && ri.intersects(rj) {
                        return bad(format!("AOIs {ai} and {aj} overlap"));
                    }
                }
            }
        }
        Ok(())
    }

    fn aoi_rects(&self, aoi: &AoiDef) -> Vec<Rect> {
        let mut rects: Vec<Rect> = aoi
            .members
            .iter()
            .filter_map(|m| self.component_by_name(m))
            .map(|c| c.rect)
            .collect();
        rects.extend(aoi.region);
        rects
    }

    fn resolve_regions(&self) -> Vec<Region> {
        let mut regions = Vec::new();
        let mut covered = HashSet::new();
        for a in &self.aois {
            let anchor = match a.behavior {
                AoiBehavior::Static => Anchor::Page,
                _ => Anchor::Screen,
            };
            let aoi_trigger = match a.activation {
                Some(EventKind::PopupOpen) => Some(Trigger::Popup),
                Some(EventKind::MenuOpen) => Some(Trigger::Menu),
                _ => None,
            };
            for m in &a.members {
                let c = self.component_by_name(m).expect("validated");
                covered.insert(c.id);
                regions.push(Region {
                    rect: c.rect,
                    anchor,
                    shown_by: c.shown_by.or(aoi_trigger),
                    aoi: Some(a.id),
                    component: Some(c.id),
                });
            }
            if let Some(r) = a.region {
                regions.push(Region {
                    rect: r,
                    anchor,
                    shown_by: aoi_trigger,
                    aoi: Some(a.id),
                    component: None,
                });
            }
        }
        for c in &self.components {
            if !covered.contains(&c.id) {
                regions.push(Region {
                    rect: c.rect,
                    anchor: Anchor::Page,
                    shown_by: c.shown_by,
                    aoi: None,
                    component: Some(c.id),
                });
            }
        }
        regions
    }

    fn is_overlay(&self, aoi: Option<u32>) -> bool {
        aoi.and_then(|id| self.aoi(id))
            .is_some_and(|a| a.behavior == AoiBehavior::Overlay)
    }

    /// Screen-space rectangles of an AOI under `state`, or empty if hidden.
    pub fn aoi_screen_rects(&self, aoi_id: u32, state: &PageState) -> Vec<Rect> {
        self.regions
            .iter()
            .filter(|r| r.aoi == Some(aoi_id) && state.shows(r.shown_by))
            .map(|r| screen_rect(r, state))
            .collect()
    }

    /// Screen-space rectangle of a component under `state`, if visible.
    pub fn component_screen_rect(&self, component_id: u32, state: &PageState) -> Option<Rect> {
        self.regions
            .iter()
            .find(|r| r.component == Some(component_id) && state.shows(r.shown_by))
            .map(|r| screen_rect(r, state))
    }

    fn occluded_aois(&self, state: &PageState) -> HashSet<u32> {
        let overlay_rects: Vec<Rect> = self
            .regions
            .iter()
            .filter(|r| self.is_overlay(r.aoi) && state.shows(r.shown_by))
            .map(|r| screen_rect(r, state))
            .collect();
        if overlay_rects.is_empty() {
            return HashSet::new();
        }
        let viewport = Rect::new(0.0, 0.0, self.viewport_size.width, self.viewport_size.height);
        self.regions
            .iter()
            .filter(|r| r.aoi.is_some() && !self.is_overlay(r.aoi) && state.shows(r.shown_by))
            .filter_map(|r| {
                let on_screen = screen_rect(r, state).intersection(&viewport)?;
                overlay_rects
                    .iter()
                    .any(|o| o.intersects(&on_screen))
                    .then_some(r.aoi.unwrap())
            })
            .collect()
    }
}

fn screen_rect(r: &Region, state: &PageState) -> Rect {
    match r.anchor {
        Anchor::Screen => r.rect,
        Anchor::Page => r.rect.translated(-state.scroll_x, -state.scroll_y),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Scroll,
    /// Horizontal scroll; payload is the x delta.
    Hscroll,
    Click,
    PopupOpen,
    PopupClose,
    MenuOpen,
    MenuClose,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Scroll => "scroll",
            EventKind::Hscroll => "hscroll",
            EventKind::Click => "click",
            EventKind::PopupOpen => "popup_open",
            EventKind::PopupClose => "popup_close",
            EventKind::MenuOpen => "menu_open",
            EventKind::MenuClose => "menu_close",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "scroll" => EventKind::Scroll,
            "hscroll" => EventKind::Hscroll,
            "click" => EventKind::Click,
            "popup_open" => EventKind::PopupOpen,
            "popup_close" => EventKind::PopupClose,
            "menu_open" => EventKind::MenuOpen,
            "menu_close" => EventKind::MenuClose,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionEvent {
    pub t: f64,
    pub kind: EventKind,
    /// Scroll delta in pixels, or the target component name for clicks.
    pub payload: String,
}

impl InteractionEvent {
    pub fn new(t: f64, kind: EventKind, payload: impl Into<String>) -> Self {
        Self {
            t,
            kind,
            payload: payload.into(),
        }
    }

    pub fn scroll(t: f64, dy: f64) -> Self {
        Self::new(t, EventKind::Scroll, format!("{dy}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PageState {
    pub t: f64,
    pub scroll_x: f64,
    pub scroll_y: f64,
    pub popup_active: bool,
    pub menu_open: bool,
}

impl PageState {
    fn shows(&self, trigger: Option<Trigger>) -> bool {
        match trigger {
            None => true,
            Some(Trigger::Menu) => self.menu_open,
            Some(Trigger::Popup) => self.popup_active,
        }
    }

    fn apply(&mut self, ev: &InteractionEvent, max_scroll: (f64, f64)) -> Result<()> {
        let delta = || {
            ev.payload.trim().parse::<f64>().map_err(|_| {
                Error::MalformedEvents(format!(
                    "{} payload `{}` at t={} is not a pixel delta",
                    ev.kind.as_str(),
                    ev.payload,
                    ev.t
                ))
            })
        };
        match ev.kind {
            EventKind::Scroll => self.scroll_y = (self.scroll_y + delta()?).clamp(0.0, max_scroll.1),
            EventKind::Hscroll => {
                self.scroll_x = (self.scroll_x + delta()?).clamp(0.0, max_scroll.0)
            }
            EventKind::Click => {}
            EventKind::PopupOpen => self.popup_active = true,
            EventKind::PopupClose => self.popup_active = false,
            EventKind::MenuOpen => self.menu_open = true,
            EventKind::MenuClose => self.menu_open = false,
        }
        Ok(())
    }
}

/// Pre-replayed page states, one per event, for repeated lookups.
#[derive(Debug, Clone)]
pub struct PageTimeline {
    times: Vec<f64>,
    states: Vec<PageState>,
}

impl PageTimeline {
    pub fn new(events: &[InteractionEvent], layout: &Layout) -> Result<Self> {
        if let Some(k) = events.windows(2).position(|p| !(p[1].t >= p[0].t)) {
            return Err(Error::MalformedEvents(format!(
                "events not ordered by time at index {}",
                k + 1
            )));
        }
        let max_scroll = layout.max_scroll();
        let mut state = PageState::default();
        let mut times = Vec::with_capacity(events.len());
        let mut states = Vec::with_capacity(events.len());
        for ev in events {
            state.apply(ev, max_scroll)?;
            state.t = ev.t;
            times.push(ev.t);
            states.push(state);
        }
        Ok(Self { times, states })
    }

    /// State after replaying every event with timestamp <= `t`.
    pub fn at(&self, t: f64) -> PageState {
        let k = self.times.partition_point(|&et| et <= t);
        let mut s = if k == 0 {
            PageState::default()
        } else {
            self.states[k - 1]
        };
        s.t = t;
        s
    }
}

/// Replays `events` up to and including time `t`.
pub fn page_state_at(events: &[InteractionEvent], t: f64, layout: &Layout) -> Result<PageState> {
    Ok(PageTimeline::new(events, layout)?.at(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Hit {
    pub aoi: Option<u32>,
    pub component: Option<u32>,
}

/// Resolves a screen point to an AOI and/or component.
pub fn hit_test(px: f64, py: f64, layout: &Layout, state: &PageState) -> Hit {
    let visible = |r: &&Region| state.shows(r.shown_by);
    let contains = |r: &Region| screen_rect(r, state).contains(px, py);

    // Active overlays sit on top of everything.
    let overlays = layout
        .regions
        .iter()
        .filter(visible)
        .filter(|r| layout.is_overlay(r.aoi));
    let mut overlay_hit: Option<Hit> = None;
    for r in overlays {
        if contains(r) {
            let hit = overlay_hit.get_or_insert(Hit {
                aoi: r.aoi,
                component: None,
            });
            if hit.component.is_none() {
                hit.component = r.component;
            }
        }
    }
    if let Some(hit) = overlay_hit {
        return hit;
    }

    let occluded = layout.occluded_aois(state);
    let resolve = |anchor: Anchor| -> Option<Hit> {
        let mut found: Option<Hit> = None;
        for r in layout
            .regions
            .iter()
            .filter(visible)
            .filter(|r| r.anchor == anchor && !layout.is_overlay(r.aoi))
        {
            if !contains(r) {
                continue;
            }
            let hit = found.get_or_insert(Hit::default());
            if hit.aoi.is_none() {
                hit.aoi = r.aoi.filter(|a| !occluded.contains(a));
            }
            if hit.component.is_none() {
                hit.component = r.component;
            }
        }
        found
    };
    resolve(Anchor::Screen)
        .or_else(|| resolve(Anchor::Page))
        .unwrap_or_default()
}
