// Copyright 2026 The rfbkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Deterministic synthetic desktop. The picture is a pure function of the
//! scenario, its seed, the scenario clock and the pointer state.
//!
//! Screens:
//! * home: banded wallpaper, an icon grid and a dock; mostly flat colour.
//! * browser: a toolbar over a text-heavy page with patterned image blocks,
//!   revealed progressively after the app opens and scrollable.
//! * music player: static chrome around an animated spectrum covering 30% of
//!   the screen, redrawn at 10 frames per second.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::damage::{compute_damage, DEFAULT_TILE};
use super::scenario::{App, Scenario, ScenarioStep};
use crate::model::{DamageRegion, Framebuffer, PixelFormat, Rect};

/// Animation frame length.
pub const FRAME_MS: u64 = 100;
/// Time for a freshly opened page to finish drawing.
pub const REVEAL_MS: u64 = 2000;
/// Keysym that jumps to the next scenario step (`n`).
pub const NEXT_STEP_KEYSYM: u32 = 0x006E;

const STATUS_H: u16 = 32;
const APP_HEADER_H: u16 = 48;
const GLYPH_W: u16 = 5;
const GLYPH_H: u16 = 7;
const GLYPH_ADVANCE: u16 = 6;
const LINE_H: u16 = 12;
const FONT_SIZE: usize = 64;

const CURSOR: [&str; 16] = [
    "X...........",
    "XX..........",
    "X#X.........",
    "X##X........",
    "X###X.......",
    "X####X......",
    "X#####X.....",
    "X######X....",
    "X#######X...",
    "X########X..",
    "X#####XXXXX.",
    "X##X##X.....",
    "X#X.X##X....",
    "XX..X##X....",
    "X....X##X...",
    ".....XXXX...",
];
pub const CURSOR_W: u16 = 12;
pub const CURSOR_H: u16 = 16;

const fn rgb(r: u8, g: u8, b: u8) -> u32 {
    ((r as u32) << 16) | ((g as u32) << 8) | b as u32
}

const STATUS_BG: u32 = rgb(0x20, 0x21, 0x24);
const DOCK_BG: u32 = rgb(0x30, 0x34, 0x3A);
const WHITE: u32 = rgb(0xFF, 0xFF, 0xFF);
const TEXT: u32 = rgb(0x30, 0x30, 0x30);
const BROWSER_ACCENT: u32 = rgb(0x1A, 0x73, 0xE8);
const TOOLBAR: u32 = rgb(0xF1, 0xF3, 0xF4);
const MUSIC_ACCENT: u32 = rgb(0x8E, 0x24, 0xAA);
const MUSIC_BG: u32 = rgb(0x1C, 0x1B, 0x22);
const BARS_BG: u32 = rgb(0x12, 0x12, 0x12);
const CURSOR_FILL: u32 = rgb(0, 0, 0);
const CURSOR_PRESSED: u32 = rgb(0xE5, 0x39, 0x35);

/// What is on screen at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
enum View {
    Home,
    Opening { app: App, frame: u64, frames: u64 },
    App { app: App, ready_ms: u64, scroll: i64 },
}

#[derive(Debug, Clone)]
struct Segment {
    start_ms: u64,
    end_ms: u64,
    step: ScenarioStep,
}

fn to_ms(seconds: f64) -> u64 {
    (seconds.max(0.0) * 1000.0).round() as u64
}

/// Pre-rendered material derived from the seed.
#[derive(Debug)]
struct Assets {
    font: Vec<[u8; GLYPH_H as usize]>,
    icon_colors: Vec<u32>,
    label_glyphs: Vec<Vec<usize>>,
    url_glyphs: Vec<usize>,
    title_glyphs: Vec<Vec<usize>>,
    page: Vec<u32>,
    page_h: u32,
}

impl Assets {
    fn new(seed: u64, width: u16, height: u16) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_F0E7);
        let font = (0..FONT_SIZE)
            .map(|_| {
                let mut g = [0u8; GLYPH_H as usize];
                for row in g.iter_mut() {
                    *row = rng.gen::<u8>() & rng.gen::<u8>() | rng.gen::<u8>() & 0x0A;
                    *row &= 0x1F;
                }
                g
            })
            .collect();
        let icon_colors = (0..24)
            .map(|_| rgb(rng.gen_range(40..220), rng.gen_range(40..220), rng.gen_range(40..220)))
            .collect();
        let word = |rng: &mut ChaCha8Rng, lo: usize, hi: usize| {
            let n = rng.gen_range(lo..=hi);
            (0..n).map(|_| rng.gen_range(0..FONT_SIZE)).collect::<Vec<_>>()
        };
        let label_glyphs = (0..24).map(|_| word(&mut rng, 4, 7)).collect();
        let url_glyphs = word(&mut rng, 28, 28);
        let title_glyphs = (0..3).map(|_| word(&mut rng, 10, 21)).collect();

        let page_h = u32::from(height) * 3;
        let mut assets = Assets {
            font,
            icon_colors,
            label_glyphs,
            url_glyphs,
            title_glyphs,
            page: vec![WHITE; usize::from(width) * page_h as usize],
            page_h,
        };
        assets.build_page(&mut ChaCha8Rng::seed_from_u64(seed ^ 0xB0B5_CAFE), width);
        assets
    }

    /// Lays out headings, paragraphs and image blocks down a tall page.
    fn build_page(&mut self, rng: &mut ChaCha8Rng, width: u16) {
        let w = usize::from(width);
        let margin = 16usize;
        let mut y = 16usize;
        let page_h = self.page_h as usize;
        while y + 40 < page_h {
            match rng.gen_range(0..6) {
                0 => {
                    // Heading at double scale.
                    let n = rng.gen_range(8..16).min((w - 2 * margin) / 12);
                    let glyphs: Vec<usize> = (0..n).map(|_| rng.gen_range(0..FONT_SIZE)).collect();
                    self.page_text(w, margin, y, &glyphs, BROWSER_ACCENT, 2);
                    y += 28;
                }
                1 | 2 => {
                    let h = rng.gen_range(6..12) * 16usize;
                    if y + h >= page_h {
                        break;
                    }
                    self.page_image(rng, w, margin, y, h);
                    y += h + 12;
                }
                _ => {
                    let lines = rng.gen_range(3..9);
                    for _ in 0..lines {
                        let mut x = margin;
                        let limit = w - margin - rng.gen_range(0..w / 4);
                        while x + GLYPH_ADVANCE as usize * 3 < limit {
                            let len = rng.gen_range(2..9);
                            let glyphs: Vec<usize> = (0..len).map(|_| rng.gen_range(0..FONT_SIZE)).collect();
                            let end = x + len * GLYPH_ADVANCE as usize;
                            if end > limit {
                                break;
                            }
                            self.page_text(w, x, y, &glyphs, TEXT, 1);
                            x = end + GLYPH_ADVANCE as usize;
                        }
                        y += LINE_H as usize;
                        if y + LINE_H as usize >= page_h {
                            break;
                        }
                    }
                    y += 10;
                }
            }
        }
    }

    fn page_text(&mut self, w: usize, x: usize, y: usize, glyphs: &[usize], color: u32, scale: usize) {
        for (i, &g) in glyphs.iter().enumerate() {
            let gx = x + i * GLYPH_ADVANCE as usize * scale;
            for (row, bits) in self.font[g].iter().enumerate() {
                for col in 0..GLYPH_W as usize {
                    if bits & (1 << (GLYPH_W as usize - 1 - col)) == 0 {
                        continue;
                    }
                    for sy in 0..scale {
                        for sx in 0..scale {
                            let (px, py) = (gx + col * scale + sx, y + row * scale + sy);
                            if px < w && py < self.page_h as usize {
                                self.page[py * w + px] = color;
                            }
                        }
                    }
                }
            }
        }
    }

    /// A "photo": 4x4 cells drawn from a small palette, repeating every 32
    /// pixels horizontally with a per-block vertical pattern.
    fn page_image(&mut self, rng: &mut ChaCha8Rng, w: usize, margin: usize, y: usize, h: usize) {
        let palette: Vec<u32> = (0..4)
            .map(|_| rgb(rng.gen_range(0..=255), rng.gen_range(0..=255), rng.gen_range(0..=255)))
            .collect();
        let cells: Vec<u8> = (0..8 * (h / 4 + 1)).map(|_| rng.gen_range(0..4)).collect();
        for py in y..y + h {
            let cy = (py - y) / 4;
            for px in margin..w - margin {
                let cx = ((px - margin) / 4) % 8;
                self.page[py * w + px] = palette[usize::from(cells[cy * 8 + cx])];
            }
        }
    }
}

/// Scene geometry shared by the renderer and callers that want to know where
/// things are.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub width: u16,
    pub height: u16,
    /// The page viewport of the browser.
    pub page: Rect,
    /// The animated spectrum of the music player.
    pub bars: Rect,
}

impl Layout {
    fn new(width: u16, height: u16) -> Self {
        let page_top = STATUS_H + APP_HEADER_H;
        let round16 = |v: f64| ((v / 16.0).round() as u16).max(1) * 16;
        let bars_h = round16(f64::from(height) * 0.3).min(height - STATUS_H);
        let bars_y = ((u32::from(height) * 45 / 100) as u16 / 16 * 16).min(height - bars_h);
        Self {
            width,
            height,
            page: Rect::new(0, page_top, width, height - page_top),
            bars: Rect::new(0, bars_y, width, bars_h),
        }
    }

    fn content(&self) -> Rect {
        Rect::new(0, STATUS_H, self.width, self.height - STATUS_H)
    }
}

/// A CopyRect opportunity: `dst` now holds what `src` held before.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CopyHint {
    pub dst: Rect,
    pub src_x: u16,
    pub src_y: u16,
}

impl CopyHint {
    pub fn src(&self) -> Rect {
        Rect::new(self.src_x, self.src_y, self.dst.w, self.dst.h)
    }
}

/// Result of one scene transition.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SceneChange {
    pub damage: DamageRegion,
    pub copy: Option<CopyHint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pointer {
    x: u16,
    y: u16,
    pressed: bool,
}

/// Live scene: the scenario clock, the pointer and the composed framebuffer.
#[derive(Debug)]
pub struct Scene {
    scenario: Scenario,
    layout: Layout,
    segments: Vec<Segment>,
    end_ms: u64,
    assets: Assets,
    clock_ms: u64,
    pointer: Option<Pointer>,
    fb: Framebuffer,
}

impl Scene {
    pub fn new(scenario: Scenario) -> Self {
        let mut segments = Vec::with_capacity(scenario.steps.len());
        let mut t = 0u64;
        for step in &scenario.steps {
            let d = to_ms(step.duration());
            segments.push(Segment {
                start_ms: t,
                end_ms: t + d,
                step: step.clone(),
            });
            t += d;
        }
        let layout = Layout::new(scenario.width, scenario.height);
        let assets = Assets::new(scenario.seed, scenario.width, scenario.height);
        let mut scene = Self {
            fb: Framebuffer::new(scenario.width, scenario.height, PixelFormat::rgb888()).expect("validated size"),
            scenario,
            layout,
            segments,
            end_ms: t,
            assets,
            clock_ms: 0,
            pointer: None,
        };
        scene.fb = scene.compose(0);
        scene
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn framebuffer(&self) -> &Framebuffer {
        &self.fb
    }

    /// Scenario clock in seconds.
    pub fn clock(&self) -> f64 {
        self.clock_ms as f64 / 1000.0
    }

    pub fn duration(&self) -> f64 {
        self.end_ms as f64 / 1000.0
    }

    pub fn finished(&self) -> bool {
        self.clock_ms >= self.end_ms
    }

    /// Index of the step active at the current clock.
    pub fn step_index(&self) -> usize {
        self.segments
            .iter()
            .position(|s| self.clock_ms < s.end_ms)
            .unwrap_or(self.segments.len() - 1)
    }

    /// The picture of the scenario alone (no pointer) at `seconds`.
    pub fn render_at(&self, seconds: f64) -> Framebuffer {
        self.render(to_ms(seconds))
    }

    /// Moves the clock forward to `to_clock` seconds and returns what changed.
    /// A target behind the current clock leaves the scene untouched.
    pub fn step_scene(&mut self, to_clock: f64) -> DamageRegion {
        self.advance_to(to_clock).damage
    }

    /// Like [`Scene::step_scene`], also reporting a CopyRect opportunity
    /// when the page scrolled.
    pub fn advance_to(&mut self, to_clock: f64) -> SceneChange {
        let target = to_ms(to_clock);
        if target <= self.clock_ms {
            return SceneChange::default();
        }
        self.set_clock(target)
    }

    pub fn advance_by(&mut self, seconds: f64) -> SceneChange {
        let target = self.clock_ms + to_ms(seconds);
        self.set_clock(target)
    }

    /// Back to the first frame with no pointer shown.
    pub fn rewind(&mut self) -> SceneChange {
        let fresh = self.render(0);
        let damage = compute_damage(&self.fb, &fresh, DEFAULT_TILE).expect("same geometry");
        self.clock_ms = 0;
        self.pointer = None;
        self.fb = fresh;
        SceneChange { damage, copy: None }
    }

    /// Jumps to the start of the next scenario step.
    pub fn next_step(&mut self) -> SceneChange {
        match self.segments.iter().find(|s| s.end_ms > self.clock_ms) {
            Some(seg) => self.set_clock(seg.end_ms),
            None => SceneChange::default(),
        }
    }

    /// Key and pointer reactions. Only key presses act; `n` advances the
    /// scenario by one step. Pointer events move (and colour) the cursor,
    /// with coordinates clamped to the screen.
    pub fn key_event(&mut self, down: bool, keysym: u32) -> SceneChange {
        if down && (keysym == NEXT_STEP_KEYSYM || keysym == NEXT_STEP_KEYSYM - 0x20) {
            return self.next_step();
        }
        SceneChange::default()
    }

    pub fn pointer_event(&mut self, buttons: u8, x: u16, y: u16) -> SceneChange {
        let next = Pointer {
            x: x.min(self.layout.width - 1),
            y: y.min(self.layout.height - 1),
            pressed: buttons & 1 != 0,
        };
        if self.pointer == Some(next) {
            return SceneChange::default();
        }
        let old_rect = self.pointer.map(|p| self.cursor_rect(p));
        self.pointer = Some(next);
        let base = self.render(self.clock_ms);
        let mut fb = base;
        self.draw_cursor(&mut fb);
        let new_rect = self.cursor_rect(next);
        // Old box plus whatever of the new box lies outside it, each piece no
        // larger than the glyph.
        let mut rects: Vec<Rect> = match old_rect {
            Some(o) => {
                let mut v = vec![o];
                v.extend(new_rect.subtract(&o));
                v
            }
            None => vec![new_rect],
        };
        rects.retain(|r| !fb.region_eq(&self.fb, r));
        self.fb = fb;
        SceneChange {
            damage: DamageRegion::from_disjoint(rects).expect("pieces are disjoint"),
            copy: None,
        }
    }

    fn cursor_rect(&self, p: Pointer) -> Rect {
        let w = CURSOR_W.min(self.layout.width - p.x);
        let h = CURSOR_H.min(self.layout.height - p.y);
        Rect::new(p.x, p.y, w, h)
    }

    fn set_clock(&mut self, target: u64) -> SceneChange {
        let old_view = self.view_at(self.clock_ms);
        let new_fb = self.compose(target);
        let new_view = self.view_at(target);
        let copy = self.scroll_hint(old_view, new_view, &new_fb);
        let damage = compute_damage(&self.fb, &new_fb, DEFAULT_TILE).expect("same geometry");
        self.clock_ms = target;
        self.fb = new_fb;
        SceneChange {
            copy: copy.filter(|_| !damage.is_empty()),
            damage,
        }
    }

    fn scroll_hint(&self, old: View, new: View, new_fb: &Framebuffer) -> Option<CopyHint> {
        let (
            View::App {
                app: App::Browser,
                ready_ms: r0,
                scroll: s0,
            },
            View::App {
                app: App::Browser,
                ready_ms: r1,
                scroll: s1,
            },
        ) = (old, new)
        else {
            return None;
        };
        let page = self.layout.page;
        let d = s1 - s0;
        if r0 != r1 || d == 0 || d.unsigned_abs() >= u64::from(page.h) {
            return None;
        }
        let shift = d.unsigned_abs() as u16;
        let hint = if d > 0 {
            CopyHint {
                dst: Rect::new(page.x, page.y, page.w, page.h - shift),
                src_x: page.x,
                src_y: page.y + shift,
            }
        } else {
            CopyHint {
                dst: Rect::new(page.x, page.y + shift, page.w, page.h - shift),
                src_x: page.x,
                src_y: page.y,
            }
        };
        let src = self.fb.read_rect(&hint.src()).ok()?;
        let dst = new_fb.read_rect(&hint.dst).ok()?;
        (src == dst).then_some(hint)
    }

    fn view_at(&self, t: u64) -> View {
        let t = t.min(self.end_ms);
        let mut view = View::Home;
        for seg in &self.segments {
            if seg.start_ms > t || (seg.start_ms == t && seg.start_ms < seg.end_ms && t == self.end_ms) {
                break;
            }
            match seg.step {
                ScenarioStep::Home { .. } => view = View::Home,
                ScenarioStep::OpenApp { app, .. } => {
                    view = if t < seg.end_ms {
                        let frames = (seg.end_ms - seg.start_ms).div_ceil(FRAME_MS).max(1);
                        View::Opening {
                            app,
                            frame: (t - seg.start_ms) / FRAME_MS,
                            frames,
                        }
                    } else {
                        View::App {
                            app,
                            ready_ms: seg.end_ms,
                            scroll: 0,
                        }
                    }
                }
                ScenarioStep::Scroll { dy, .. } => {
                    if let View::App { scroll, .. } = &mut view {
                        let elapsed = t.min(seg.end_ms) - seg.start_ms;
                        *scroll += i64::from(dy) * (elapsed / FRAME_MS) as i64;
                    }
                }
                ScenarioStep::Wait { .. } | ScenarioStep::End => {}
            }
        }
        view
    }

    fn compose(&self, t: u64) -> Framebuffer {
        let mut fb = self.render(t);
        self.draw_cursor(&mut fb);
        fb
    }

    fn render(&self, t: u64) -> Framebuffer {
        let t = t.min(self.end_ms);
        let l = &self.layout;
        let mut fb = Framebuffer::new(l.width, l.height, PixelFormat::rgb888()).expect("validated size");
        match self.view_at(t) {
            View::Home => self.draw_home(&mut fb),
            View::Opening { app, frame, frames } => {
                self.draw_home(&mut fb);
                let p = (frame + 1) as f64 / frames as f64;
                let content = l.content();
                let scale = 0.2 + 0.8 * p;
                let w = ((f64::from(content.w) * scale) as u16).max(1);
                let h = ((f64::from(content.h) * scale) as u16).max(1);
                let win = Rect::new(content.x + (content.w - w) / 2, content.y + (content.h - h) / 2, w, h);
                let (accent, body) = match app {
                    App::Browser => (BROWSER_ACCENT, WHITE),
                    App::MusicPlayer => (MUSIC_ACCENT, MUSIC_BG),
                };
                fb.fill_rect(win, body);
                fb.fill_rect(Rect::new(win.x, win.y, win.w, APP_HEADER_H.min(win.h)), accent);
            }
            View::App {
                app: App::Browser,
                ready_ms,
                scroll,
            } => self.draw_browser(&mut fb, t - ready_ms, scroll),
            View::App {
                app: App::MusicPlayer,
                ready_ms,
                ..
            } => self.draw_music(&mut fb, (t - ready_ms) / FRAME_MS),
        }
        self.draw_status_bar(&mut fb);
        fb
    }

    fn text(&self, fb: &mut Framebuffer, x: u16, y: u16, glyphs: &[usize], color: u32) {
        for (i, &g) in glyphs.iter().enumerate() {
            let gx = u32::from(x) + (i as u32) * u32::from(GLYPH_ADVANCE);
            for (row, bits) in self.assets.font[g].iter().enumerate() {
                for col in 0..GLYPH_W {
                    if bits & (1 << (GLYPH_W - 1 - col)) != 0 {
                        let (px, py) = (gx + u32::from(col), u32::from(y) + row as u32);
                        if px < u32::from(fb.width()) && py < u32::from(fb.height()) {
                            fb.set(px as u16, py as u16, color);
                        }
                    }
                }
            }
        }
    }

    fn draw_status_bar(&self, fb: &mut Framebuffer) {
        let w = self.layout.width;
        fb.fill_rect(Rect::new(0, 0, w, STATUS_H), STATUS_BG);
        fb.fill_rect(Rect::new(w.saturating_sub(40), 10, 24, 12), rgb(0x9A, 0xE6, 0x6E));
        fb.fill_rect(Rect::new(w.saturating_sub(64), 12, 4, 10), WHITE);
        fb.fill_rect(Rect::new(w.saturating_sub(58), 8, 4, 14), WHITE);
        self.text(fb, 12, 12, &self.assets.url_glyphs[..5], WHITE);
    }

    fn draw_home(&self, fb: &mut Framebuffer) {
        let l = &self.layout;
        let top = (0x2B, 0x4C, 0x7E);
        let bottom = (0x5E, 0x2B, 0x6E);
        let bands = l.height.div_ceil(16);
        for band in 0..bands {
            let f = f64::from(band) / f64::from(bands.max(2) - 1);
            let mix = |a: u8, b: u8| (f64::from(a) + (f64::from(b) - f64::from(a)) * f) as u8;
            let c = rgb(mix(top.0, bottom.0), mix(top.1, bottom.1), mix(top.2, bottom.2));
            fb.fill_rect(Rect::new(0, band * 16, l.width, 16), c);
        }
        let cols = 4u16;
        let cell_w = l.width / cols;
        let icon = 56u16.min(cell_w.saturating_sub(8)).max(8);
        let dock_h = 96u16.min(l.height / 4);
        let rows = ((l.height - STATUS_H - dock_h) / 112).min(5);
        for row in 0..rows {
            for col in 0..cols {
                let i = usize::from(row * cols + col);
                let x = col * cell_w + (cell_w - icon) / 2;
                let y = STATUS_H + 32 + row * 112;
                self.draw_icon(fb, x, y, icon, i);
                let label = &self.assets.label_glyphs[i % self.assets.label_glyphs.len()];
                let lw = label.len() as u16 * GLYPH_ADVANCE;
                self.text(fb, (x + icon / 2).saturating_sub(lw / 2), y + icon + 8, label, WHITE);
            }
        }
        let dock = Rect::new(0, l.height - dock_h, l.width, dock_h);
        fb.fill_rect(dock, DOCK_BG);
        for col in 0..cols {
            let x = col * cell_w + (cell_w - icon) / 2;
            self.draw_icon(
                fb,
                x,
                dock.y + (dock_h.saturating_sub(icon)) / 2,
                icon,
                20 + usize::from(col),
            );
        }
    }

    fn draw_icon(&self, fb: &mut Framebuffer, x: u16, y: u16, size: u16, i: usize) {
        let color = self.assets.icon_colors[i % self.assets.icon_colors.len()];
        fb.fill_rect(Rect::new(x, y, size, size), color);
        let inner = size / 2;
        let off = (size - inner) / 2;
        match i % 3 {
            0 => fb.fill_rect(Rect::new(x + off, y + off, inner, inner), WHITE),
            1 => {
                fb.fill_rect(Rect::new(x + off, y + size / 2 - 3, inner, 6), WHITE);
                fb.fill_rect(Rect::new(x + size / 2 - 3, y + off, 6, inner), WHITE);
            }
            _ => {
                for k in 0..3 {
                    fb.fill_rect(Rect::new(x + off, y + off + k * inner / 3, inner, inner / 6 + 1), WHITE);
                }
            }
        }
    }

    fn draw_browser(&self, fb: &mut Framebuffer, since_ready_ms: u64, scroll: i64) {
        let l = &self.layout;
        fb.fill_rect(Rect::new(0, STATUS_H, l.width, APP_HEADER_H), TOOLBAR);
        let bar = Rect::new(12, STATUS_H + 8, l.width.saturating_sub(24).max(1), APP_HEADER_H - 16);
        fb.fill_rect(bar, WHITE);
        let n = usize::from(bar.w / GLYPH_ADVANCE)
            .saturating_sub(4)
            .min(self.assets.url_glyphs.len());
        self.text(
            fb,
            bar.x + 10,
            bar.y + 12,
            &self.assets.url_glyphs[..n],
            rgb(0x5F, 0x63, 0x68),
        );

        let page = l.page;
        let reveal_frames = REVEAL_MS / FRAME_MS;
        let frame = since_ready_ms / FRAME_MS + 1;
        let revealed = if frame >= reveal_frames {
            u32::from(page.h)
        } else {
            (u64::from(page.h) * frame / reveal_frames) as u32
        };
        let w = usize::from(l.width);
        let page_h = i64::from(self.assets.page_h);
        for row in 0..page.h {
            let y = page.y + row;
            let dst = fb.row_mut(0, y, l.width);
            if u32::from(row) >= revealed {
                dst.fill(WHITE);
                continue;
            }
            let src_row = (i64::from(row) + scroll).rem_euclid(page_h) as usize;
            dst.copy_from_slice(&self.assets.page[src_row * w..src_row * w + w]);
        }
    }

    fn draw_music(&self, fb: &mut Framebuffer, frame: u64) {
        let l = &self.layout;
        let content = l.content();
        fb.fill_rect(content, MUSIC_BG);
        fb.fill_rect(Rect::new(0, STATUS_H, l.width, APP_HEADER_H), MUSIC_ACCENT);
        self.text(fb, 16, STATUS_H + 20, &self.assets.title_glyphs[0], WHITE);

        // Album art: concentric squares above the spectrum.
        let art = (l.bars.y.saturating_sub(STATUS_H + APP_HEADER_H + 24)).min(l.width / 2);
        if art >= 16 {
            let ax = (l.width - art) / 2;
            let ay = STATUS_H + APP_HEADER_H + 12;
            for k in 0..4u16 {
                let inset = k * art / 8;
                let c = self.assets.icon_colors[usize::from(k) + 4];
                fb.fill_rect(Rect::new(ax + inset, ay + inset, art - 2 * inset, art - 2 * inset), c);
            }
        }
        let below = l.bars.bottom() as u16 + 16;
        if below + 40 < l.height {
            self.text(fb, 16, below, &self.assets.title_glyphs[1], WHITE);
            self.text(fb, 16, below + 14, &self.assets.title_glyphs[2], rgb(0xB0, 0xB0, 0xB8));
            let controls_y = below + 36;
            for k in 0..3u16 {
                let x = l.width / 4 * (k + 1) - 16;
                fb.fill_rect(
                    Rect::new(x, controls_y, 32, 32.min(l.height - controls_y)),
                    rgb(0xE0, 0xE0, 0xE0),
                );
            }
        }
        self.draw_bars(fb, frame);
    }

    /// Spectrum bars: heights re-drawn every frame, each bar shaded with a
    /// vertical gradient that cycles over time and a per-column tint.
    fn draw_bars(&self, fb: &mut Framebuffer, frame: u64) {
        let region = self.layout.bars;
        fb.fill_rect(region, BARS_BG);
        let mut rng = ChaCha8Rng::seed_from_u64(self.scenario.seed ^ frame.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let pitch = 24u16;
        let bar_w = 16u16;
        let mut x = 4u16;
        while x + bar_w <= region.right() as u16 {
            let h = rng.gen_range(region.h / 8..=region.h);
            for dy in 0..h {
                let y = region.bottom() as u16 - 1 - dy;
                let level = (u32::from(dy) * 255 / u32::from(region.h) + frame as u32 * 8) % 256;
                let row = fb.row_mut(x, y, bar_w);
                for (c, px) in row.iter_mut().enumerate() {
                    let c = c as u32;
                    *px = rgb(
                        (64 + level * 3 / 4) as u8,
                        (220 - level / 2 - c * 4) as u8,
                        (100 + c * 9) as u8,
                    );
                }
            }
            x += pitch;
        }
    }

    fn draw_cursor(&self, fb: &mut Framebuffer) {
        let Some(p) = self.pointer else {
            return;
        };
        let fill = if p.pressed { CURSOR_PRESSED } else { CURSOR_FILL };
        for (dy, line) in CURSOR.iter().enumerate() {
            for (dx, ch) in line.bytes().enumerate() {
                let (x, y) = (u32::from(p.x) + dx as u32, u32::from(p.y) + dy as u32);
                if x >= u32::from(fb.width()) || y >= u32::from(fb.height()) {
                    continue;
                }
                match ch {
                    b'X' => fb.set(x as u16, y as u16, fill),
                    b'#' => fb.set(x as u16, y as u16, WHITE),
                    _ => {}
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene() -> Scene {
        Scene::new(Scenario::reference(42))
    }

    /// Outside the damage, nothing may differ.
    fn assert_sound(old: &Framebuffer, new: &Framebuffer, damage: &DamageRegion) {
        for y in 0..old.height() {
            for x in 0..old.width() {
                if !damage.contains_point(x.into(), y.into()) {
                    assert_eq!(old.get(x, y), new.get(x, y), "silent change at ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn same_clock_no_damage() {
        let mut s = scene();
        assert!(s.step_scene(0.0).is_empty());
        s.step_scene(1.0);
        assert!(s.step_scene(1.0).is_empty());
        assert!(s.step_scene(0.5).is_empty());
    }

    #[test]
    fn deterministic_pixels() {
        let a = scene();
        let b = scene();
        for t in [0.0, 0.7, 2.0, 3.3, 6.1, 7.45, 9.9, 12.0] {
            assert_eq!(a.render_at(t), b.render_at(t), "t = {t}");
        }
        let other = Scene::new(Scenario::reference(43));
        assert_ne!(a.render_at(6.5), other.render_at(6.5));
    }

    #[test]
    fn opening_browser_damages_window() {
        let mut s = scene();
        s.step_scene(0.4);
        let old = s.framebuffer().clone();
        let d = s.step_scene(0.5);
        assert_sound(&old, s.framebuffer(), &d);
        assert!(!d.is_empty());
        // Across the whole step, the app window has been redrawn.
        let mut s = scene();
        s.step_scene(0.4);
        let old = s.framebuffer().clone();
        let d = s.step_scene(2.0);
        assert_sound(&old, s.framebuffer(), &d);
        let content = s.layout().content();
        let covered = d.intersect_rect(&content).area();
        assert!(
            covered * 10 >= content.area() * 8,
            "covered {covered} of {}",
            content.area()
        );
    }

    #[test]
    fn music_wait_damage_confined_to_bars() {
        let mut s = scene();
        s.step_scene(7.0);
        let bars = s.layout().bars;
        for i in 1..=10 {
            let old = s.framebuffer().clone();
            let d = s.step_scene(7.0 + f64::from(i) * 0.1);
            assert_sound(&old, s.framebuffer(), &d);
            assert!(!d.is_empty(), "bars animate every frame");
            assert!(d.rects().iter().all(|r| bars.contains(r)), "{d:?}");
        }
        assert_eq!(
            bars.area() * 10,
            u64::from(s.layout().width) * u64::from(s.layout().height) * 3
        );
    }

    #[test]
    fn past_end_is_static() {
        let mut s = scene();
        s.step_scene(10.0);
        assert!(s.finished());
        assert!(s.step_scene(15.0).is_empty());
        assert_eq!(s.render_at(10.0), s.render_at(30.0));
    }

    #[test]
    fn pointer_moves_damage_glyph_boxes() {
        let mut s = scene();
        s.pointer_event(0, 0, 0);
        let old = s.framebuffer().clone();
        let change = s.pointer_event(0, 10, 10);
        assert_sound(&old, s.framebuffer(), &change.damage);
        assert!(change.damage.area() <= 2 * u64::from(CURSOR_W) * u64::from(CURSOR_H));
        assert!(change.damage.rects().iter().all(|r| r.w <= 16 && r.h <= 16));
        // Clamped, not rejected.
        let change = s.pointer_event(1, 5000, 5000);
        assert!(!change.damage.is_empty());
    }

    #[test]
    fn key_release_does_nothing() {
        let mut s = scene();
        assert!(s.key_event(false, NEXT_STEP_KEYSYM).damage.is_empty());
    }

    #[test]
    fn next_step_key_matches_step_transition() {
        let mut a = scene();
        let mut b = scene();
        a.step_scene(0.2);
        b.step_scene(0.2);
        let via_key = a.key_event(true, NEXT_STEP_KEYSYM);
        let via_clock = b.advance_to(0.5);
        assert_eq!(via_key, via_clock);
        assert_eq!(a.framebuffer(), b.framebuffer());
        assert_eq!(a.step_index(), 1);
    }

    #[test]
    fn rewind_restores_the_first_frame() {
        let mut s = scene();
        s.step_scene(7.0);
        s.pointer_event(1, 40, 40);
        let old = s.framebuffer().clone();
        let change = s.rewind();
        assert_eq!(s.clock(), 0.0);
        assert_eq!(s.framebuffer(), scene().framebuffer());
        assert_sound(&old, s.framebuffer(), &change.damage);
    }

    #[test]
    fn scroll_offers_copyrect() {
        let mut s = Scene::new(Scenario::scrolling(5));
        // Page fully revealed by 4.5 s; scroll starts at 4.5 s.
        s.step_scene(4.6);
        let old = s.framebuffer().clone();
        let change = s.advance_to(4.7);
        let hint = change.copy.expect("scroll hint");
        assert_eq!(hint.src_y, hint.dst.y + 8);
        let mut replay = old.clone();
        crate::codecs::apply_copyrect(&mut replay, &hint.dst, hint.src_x, hint.src_y).unwrap();
        assert!(replay.region_eq(s.framebuffer(), &hint.dst));
        let exposed = change.damage.subtract_rect(&hint.dst);
        assert!(!exposed.is_empty());
        assert_sound(&old, s.framebuffer(), &change.damage);
    }
}
