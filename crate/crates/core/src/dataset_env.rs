//! Replay environment over a pre-rendered image grid indexed by
//! (exposure time, gain), plus the synthetic generator that produces such
//! grids. Continuous parameter requests snap to the nearest cell.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::camsim::episode::EpisodeCore;
use crate::camsim::{render, CameraModel, ExposureParams, Scene, SceneKind, EPISODE_LEN};
use crate::error::{LabError, Result};
use crate::imaging::{read_pgm, write_pgm, Image, RoiSpec};
use crate::percept::{r_single_frame, RewardConfig, StateVector};
use crate::sac::{apply_action, Action, ActionScale};

/// Index of a captured image set: which (exposure, gain) pairs exist and how
/// their files are named.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridManifest {
    /// Exposure times in microseconds, strictly increasing.
    pub exposure_us: Vec<u64>,
    /// Gains in dB, strictly increasing.
    pub gain_db: Vec<f64>,
    /// File name template with `{e}` (µs) and `{g}` (dB) placeholders.
    pub pattern: String,
    pub width: usize,
    pub height: usize,
}

fn format_gain(g: f64) -> String {
    if (g - g.round()).abs() < 1e-9 {
        format!("{}", g.round() as i64)
    } else {
        format!("{g}")
    }
}

impl GridManifest {
    pub fn validate(&self) -> Result<()> {
        if self.exposure_us.is_empty() || self.gain_db.is_empty() {
            return Err(LabError::Format("grid axes must be non-empty".into()));
        }
        if !self.exposure_us.windows(2).all(|w| w[0] < w[1]) {
            return Err(LabError::Format("exposure axis must be strictly increasing".into()));
        }
        if !self.gain_db.windows(2).all(|w| w[0] < w[1]) {
            return Err(LabError::Format("gain axis must be strictly increasing".into()));
        }
        let e_lo = (ExposureParams::EXPOSURE_MIN_MS * 1000.0) as u64;
        let e_hi = (ExposureParams::EXPOSURE_MAX_MS * 1000.0) as u64;
        for &e in &self.exposure_us {
            if e < e_lo || e > e_hi {
                return Err(LabError::Format(format!(
                    "exposure {e} us outside the camera range {e_lo}..{e_hi} us"
                )));
            }
        }
        for &g in &self.gain_db {
            if !(ExposureParams::GAIN_MIN_DB..=ExposureParams::GAIN_MAX_DB).contains(&g) {
                return Err(LabError::Format(format!("gain {g} dB outside the camera range")));
            }
        }
        if !self.pattern.contains("{e}") || !self.pattern.contains("{g}") {
            return Err(LabError::Format(
                "file pattern must contain both {e} and {g} placeholders".into(),
            ));
        }
        if self.width < 8 || self.height < 8 {
            return Err(LabError::Format("grid frames must be at least 8x8".into()));
        }
        Ok(())
    }

    pub fn file_name(&self, exposure_us: u64, gain_db: f64) -> String {
        self.pattern
            .replace("{e}", &exposure_us.to_string())
            .replace("{g}", &format_gain(gain_db))
    }

    pub fn cells(&self) -> usize {
        self.exposure_us.len() * self.gain_db.len()
    }

    pub fn write_json<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| LabError::Format(format!("manifest serialization failed: {e}")))?;
        fs::write(path, text)?;
        Ok(())
    }

    pub fn read_json<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = fs::read_to_string(&path)?;
        let m: GridManifest = serde_json::from_str(&text)
            .map_err(|e| LabError::Format(format!("manifest parse failed: {e}")))?;
        m.validate()?;
        Ok(m)
    }
}

/// Snaps a continuous parameter request to the nearest grid cell, measuring
/// exposure distance in log space; ties go to the larger value.
pub fn snap_params(params: ExposureParams, manifest: &GridManifest) -> (u64, f64) {
    let req_log_e = (params.exposure_time_ms * 1000.0).ln();
    let exposure = *best_by(&manifest.exposure_us, |&e| ((e as f64).ln() - req_log_e).abs());
    let gain = *best_by(&manifest.gain_db, |&g| (g - params.gain_db).abs());
    (exposure, gain)
}

/// Minimizer with ties broken toward the later (larger) element; axes are
/// strictly increasing so later means larger.
fn best_by<T, F: Fn(&T) -> f64>(values: &[T], dist: F) -> &T {
    let mut best = &values[0];
    let mut best_d = dist(best);
    for v in &values[1..] {
        let d = dist(v);
        if d <= best_d {
            best = v;
            best_d = d;
        }
    }
    best
}

/// In-memory image grid; immutable once loaded.
pub struct GridEnv {
    manifest: GridManifest,
    /// `frames[ei][gi]`.
    frames: Vec<Vec<Image>>,
}

impl GridEnv {
    /// Loads every cell referenced by a manifest; `dir` anchors the file
    /// pattern.
    pub fn load(manifest: GridManifest, dir: &Path) -> Result<Self> {
        manifest.validate()?;
        let mut frames = Vec::with_capacity(manifest.exposure_us.len());
        for &e in &manifest.exposure_us {
            let mut row = Vec::with_capacity(manifest.gain_db.len());
            for &g in &manifest.gain_db {
                let path = dir.join(manifest.file_name(e, g));
                let img = (|| -> Result<Image> {
                    let bytes = fs::read(&path)?;
                    read_pgm(&bytes)
                })()
                .map_err(|err| {
                    LabError::Format(format!(
                        "grid cell ({e} us, {} dB), file {}: {err}",
                        format_gain(g),
                        path.display()
                    ))
                })?;
                if img.width() != manifest.width || img.height() != manifest.height {
                    return Err(LabError::Format(format!(
                        "grid cell ({e} us, {} dB): frame is {}x{}, manifest says {}x{}",
                        format_gain(g),
                        img.width(),
                        img.height(),
                        manifest.width,
                        manifest.height
                    )));
                }
                row.push(img);
            }
            frames.push(row);
        }
        Ok(Self { manifest, frames })
    }

    pub fn manifest(&self) -> &GridManifest {
        &self.manifest
    }

    /// Frame at an exact grid cell.
    pub fn frame(&self, exposure_us: u64, gain_db: f64) -> Option<&Image> {
        let ei = self.manifest.exposure_us.iter().position(|&e| e == exposure_us)?;
        let gi = self.manifest.gain_db.iter().position(|&g| g == gain_db)?;
        Some(&self.frames[ei][gi])
    }

    /// Frame nearest to a continuous request.
    pub fn frame_for(&self, params: ExposureParams) -> (&Image, u64, f64) {
        let (e, g) = snap_params(params, &self.manifest);
        (self.frame(e, g).expect("snapped cell exists"), e, g)
    }

    /// Single-frame reward at a continuous request; the objective classical
    /// searches optimize over this grid.
    pub fn objective(
        &self,
        exposure_ms: f64,
        gain_db: f64,
        reward: &RewardConfig,
    ) -> Result<f64> {
        let (img, _, _) = self.frame_for(ExposureParams::clamped(exposure_ms, gain_db));
        r_single_frame(img, reward)
    }

    /// Search box in `(ln exposure_ms, gain_db)` coordinates covering
    /// exactly the grid's span.
    pub fn search_box(&self) -> ((f64, f64), (f64, f64)) {
        let e = &self.manifest.exposure_us;
        let g = &self.manifest.gain_db;
        (
            (
                (e[0] as f64 / 1000.0).ln(),
                (*e.last().expect("non-empty") as f64 / 1000.0).ln(),
            ),
            (g[0], *g.last().expect("non-empty")),
        )
    }

    /// Begins an episode at the given starting request. Frames come from the
    /// grid, but state stacking and rewards run through the exact same
    /// episode machinery as the darkroom environment.
    pub fn start_episode(
        &self,
        start: ExposureParams,
        reward: RewardConfig,
        action_scale: ActionScale,
        episode_len: usize,
    ) -> Result<GridEpisode<'_>> {
        if episode_len == 0 {
            return Err(LabError::Domain("episode length must be positive".into()));
        }
        let (frame, _, _) = self.frame_for(start);
        let roi = RoiSpec { x0: 0, y0: 0, w: self.manifest.width, h: self.manifest.height };
        let core = EpisodeCore::start(frame, roi, reward)?;
        Ok(GridEpisode {
            env: self,
            core,
            requested: start,
            action_scale,
            episode_len,
            steps: 0,
            done: false,
        })
    }
}

/// One episode of closed-loop control over a loaded grid.
pub struct GridEpisode<'a> {
    env: &'a GridEnv,
    core: EpisodeCore,
    /// Continuous request; actions compose here, the grid snaps per frame.
    requested: ExposureParams,
    action_scale: ActionScale,
    episode_len: usize,
    steps: usize,
    done: bool,
}

impl GridEpisode<'_> {
    pub fn state(&self) -> &StateVector {
        self.core.state()
    }

    pub fn grid(&self) -> &GridEnv {
        self.env
    }

    /// Parameters the camera actually used for the latest frame.
    pub fn params(&self) -> ExposureParams {
        let (e, g) = snap_params(self.requested, &self.env.manifest);
        ExposureParams::clamped(e as f64 / 1000.0, g)
    }

    pub fn requested_params(&self) -> ExposureParams {
        self.requested
    }

    pub fn last_patch(&self) -> &Image {
        self.core.last_patch()
    }

    pub fn last_flicker(&self) -> Option<f64> {
        self.core.last_flicker()
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn step(&mut self, action: Action) -> Result<(StateVector, f64, bool)> {
        let next = apply_action(self.requested, action, &self.action_scale);
        self.step_absolute(next)
    }

    pub fn step_absolute(
        &mut self,
        params: ExposureParams,
    ) -> Result<(StateVector, f64, bool)> {
        if self.done {
            return Err(LabError::State("episode already finished".into()));
        }
        self.requested =
            ExposureParams::clamped(params.exposure_time_ms, params.gain_db);
        let (frame, _, _) = self.env.frame_for(self.requested);
        let (reward, _) = self.core.advance(frame)?;
        self.steps += 1;
        if self.steps >= self.episode_len {
            self.done = true;
        }
        Ok((self.core.state().clone(), reward, self.done))
    }
}

/// Recipe for rendering a synthetic grid: a fixed scene under fixed light,
/// swept over the manifest's parameter axes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub exposure_us: Vec<u64>,
    pub gain_db: Vec<f64>,
    pub width: usize,
    pub height: usize,
    pub scene_kind: SceneKind,
    pub scene_seed: u64,
    pub illuminance: f64,
    pub camera: CameraModel,
    pub noise_seed: u64,
}

impl GridSpec {
    /// Short-exposure sweep: 100..7450 µs every 150 µs, 0..20 dB every 2 dB.
    pub fn outdoor_like(width: usize, height: usize) -> Self {
        Self {
            exposure_us: (0..50).map(|i| 100 + 150 * i).collect(),
            gain_db: (0..=10).map(|i| (2 * i) as f64).collect(),
            width,
            height,
            scene_kind: SceneKind::Shapes,
            scene_seed: 11,
            illuminance: 30.0,
            camera: CameraModel::default(),
            noise_seed: 12,
        }
    }

    /// Long-exposure sweep: 4..67 ms every 3 ms, 0..24 dB every 2 dB.
    pub fn indoor_like(width: usize, height: usize) -> Self {
        Self {
            exposure_us: (0..22).map(|i| 4000 + 3000 * i).collect(),
            gain_db: (0..=12).map(|i| (2 * i) as f64).collect(),
            width,
            height,
            scene_kind: SceneKind::Shapes,
            scene_seed: 13,
            illuminance: 0.8,
            camera: CameraModel::default(),
            noise_seed: 14,
        }
    }

    fn manifest(&self) -> GridManifest {
        GridManifest {
            exposure_us: self.exposure_us.clone(),
            gain_db: self.gain_db.clone(),
            pattern: "cell_e{e}_g{g}.pgm".into(),
            width: self.width,
            height: self.height,
        }
    }
}

/// Renders every cell of a spec into `dir` as 8-bit PGM files plus a
/// `manifest.json`; bit-identical across runs with equal seeds.
pub fn generate_synthetic_grid(spec: &GridSpec, dir: &Path) -> Result<GridManifest> {
    let manifest = spec.manifest();
    manifest.validate()?;
    spec.camera.validate()?;
    fs::create_dir_all(dir)?;
    let scene = Scene::generate(spec.scene_kind, spec.scene_seed, spec.height, spec.width)?;
    for (ei, &e) in manifest.exposure_us.iter().enumerate() {
        for (gi, &g) in manifest.gain_db.iter().enumerate() {
            let params = ExposureParams::new(e as f64 / 1000.0, g)?;
            let cell = (ei * manifest.gain_db.len() + gi) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.noise_seed.wrapping_add(cell));
            let img = render(&scene, spec.illuminance, params, &spec.camera, &mut rng)?;
            let buf = write_pgm(&img, 8)?;
            fs::write(dir.join(manifest.file_name(e, g)), buf)?;
        }
    }
    manifest.write_json(dir.join("manifest.json"))?;
    Ok(manifest)
}

/// Renders a grid into `dir` and loads it back.
pub fn generate_and_load(spec: &GridSpec, dir: &Path) -> Result<GridEnv> {
    let manifest = generate_synthetic_grid(spec, dir)?;
    GridEnv::load(manifest, dir)
}

/// Human-readable cell listing for diagnostics.
pub fn describe_grid(manifest: &GridManifest) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "{} exposures x {} gains = {} cells, {}x{} px",
        manifest.exposure_us.len(),
        manifest.gain_db.len(),
        manifest.cells(),
        manifest.width,
        manifest.height
    );
    s
}

/// Default episode length for grid episodes, matching the darkroom.
pub const GRID_EPISODE_LEN: usize = EPISODE_LEN;

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use tempfile::tempdir;

    fn outdoor_manifest() -> GridManifest {
        GridManifest {
            exposure_us: (0..50).map(|i| 100 + 150 * i).collect(),
            gain_db: (0..=10).map(|i| (2 * i) as f64).collect(),
            pattern: "cell_e{e}_g{g}.pgm".into(),
            width: 16,
            height: 16,
        }
    }

    fn tiny_spec() -> GridSpec {
        GridSpec {
            exposure_us: vec![500, 2000, 8000],
            gain_db: vec![0.0, 6.0, 12.0],
            width: 16,
            height: 16,
            scene_kind: SceneKind::Ramp,
            scene_seed: 3,
            illuminance: 5.0,
            camera: CameraModel::noiseless(),
            noise_seed: 4,
        }
    }

    #[test]
    fn snap_examples_from_both_grids() {
        let outdoor = outdoor_manifest();
        // 230 us sits between 100 and 250; log distance favors 250.
        let (e, _) = snap_params(ExposureParams::clamped(0.230, 0.0), &outdoor);
        assert_eq!(e, 250);

        let indoor = GridManifest {
            exposure_us: (0..22).map(|i| 4000 + 3000 * i).collect(),
            gain_db: (0..=12).map(|i| (2 * i) as f64).collect(),
            ..outdoor_manifest()
        };
        let (e, g) = snap_params(ExposureParams::clamped(4.0, 0.0), &indoor);
        assert_eq!((e, g), (4000, 0.0));

        // Gain 3 is equidistant from 2 and 4; ties go up.
        let (_, g) = snap_params(ExposureParams::clamped(1.0, 3.0), &outdoor);
        assert_eq!(g, 4.0);
    }

    #[test]
    fn snapping_is_idempotent() {
        let m = outdoor_manifest();
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..300 {
            let p = ExposureParams::sample_uniform(&mut rng);
            let (e, g) = snap_params(p, &m);
            let again = snap_params(ExposureParams::clamped(e as f64 / 1000.0, g), &m);
            assert_eq!(again, (e, g));
        }
    }

    #[test]
    fn generation_writes_every_cell_and_is_deterministic() {
        let dir = tempdir().unwrap();
        let spec = tiny_spec();
        let manifest = generate_synthetic_grid(&spec, dir.path()).unwrap();
        assert_eq!(manifest.cells(), 9);
        let mut first = Vec::new();
        for &e in &manifest.exposure_us {
            for &g in &manifest.gain_db {
                first.push(fs::read(dir.path().join(manifest.file_name(e, g))).unwrap());
            }
        }
        let dir2 = tempdir().unwrap();
        generate_synthetic_grid(&spec, dir2.path()).unwrap();
        let mut second = Vec::new();
        for &e in &manifest.exposure_us {
            for &g in &manifest.gain_db {
                second.push(fs::read(dir2.path().join(manifest.file_name(e, g))).unwrap());
            }
        }
        assert_eq!(first, second);
    }

    #[test]
    fn outdoor_shaped_spec_produces_550_files() {
        let dir = tempdir().unwrap();
        let mut spec = GridSpec::outdoor_like(16, 16);
        spec.camera = CameraModel::noiseless();
        let manifest = generate_synthetic_grid(&spec, dir.path()).unwrap();
        assert_eq!(manifest.cells(), 550);
        let files = fs::read_dir(dir.path())
            .unwrap()
            .filter(|f| {
                f.as_ref().unwrap().file_name().to_string_lossy().ends_with(".pgm")
            })
            .count();
        assert_eq!(files, 550);
    }

    #[test]
    fn loaded_frames_match_disk_exactly() {
        let dir = tempdir().unwrap();
        let spec = tiny_spec();
        let env = generate_and_load(&spec, dir.path()).unwrap();
        for &e in &env.manifest().exposure_us.clone() {
            for &g in &env.manifest().gain_db.clone() {
                let path = dir.path().join(env.manifest().file_name(e, g));
                let bytes = fs::read(path).unwrap();
                let disk = read_pgm(&bytes).unwrap();
                let mem = env.frame(e, g).unwrap();
                for r in 0..disk.height() {
                    for c in 0..disk.width() {
                        assert_eq!(disk.get(r, c), mem.get(r, c));
                    }
                }
            }
        }
    }

    #[test]
    fn missing_file_error_names_the_cell() {
        let dir = tempdir().unwrap();
        let spec = tiny_spec();
        let manifest = generate_synthetic_grid(&spec, dir.path()).unwrap();
        fs::remove_file(dir.path().join(manifest.file_name(2000, 6.0))).unwrap();
        let err = match GridEnv::load(manifest, dir.path()) {
            Ok(_) => panic!("load should fail with a missing cell"),
            Err(e) => e,
        };
        let msg = err.to_string();
        assert!(msg.contains("2000 us"), "got: {msg}");
        assert!(msg.contains("6 dB"), "got: {msg}");
    }

    #[test]
    fn dimension_mismatch_error_names_the_cell() {
        let dir = tempdir().unwrap();
        let spec = tiny_spec();
        let manifest = generate_synthetic_grid(&spec, dir.path()).unwrap();
        let small = Image::constant(8, 8, 0.5).unwrap();
        let buf = write_pgm(&small, 8).unwrap();
        fs::write(dir.path().join(manifest.file_name(500, 0.0)), buf).unwrap();
        let err = match GridEnv::load(manifest, dir.path()) {
            Ok(_) => panic!("load should fail with a mismatched cell"),
            Err(e) => e,
        };
        assert!(err.to_string().contains("500 us"), "got: {err}");
    }

    #[test]
    fn noiseless_grid_means_are_monotone_and_darkest_at_origin() {
        let dir = tempdir().unwrap();
        let spec = GridSpec {
            exposure_us: vec![200, 1000, 5000, 20000],
            gain_db: vec![0.0, 8.0, 16.0],
            illuminance: 2.0,
            ..tiny_spec()
        };
        let env = generate_and_load(&spec, dir.path()).unwrap();
        let m = env.manifest().clone();
        let mean =
            |e: u64, g: f64| env.frame(e, g).unwrap().mean();
        for gi in 0..m.gain_db.len() {
            for ei in 1..m.exposure_us.len() {
                assert!(
                    mean(m.exposure_us[ei], m.gain_db[gi])
                        >= mean(m.exposure_us[ei - 1], m.gain_db[gi])
                );
            }
        }
        for ei in 0..m.exposure_us.len() {
            for gi in 1..m.gain_db.len() {
                assert!(
                    mean(m.exposure_us[ei], m.gain_db[gi])
                        >= mean(m.exposure_us[ei], m.gain_db[gi - 1])
                );
            }
        }
        let darkest = (m.exposure_us[0], m.gain_db[0]);
        for &e in &m.exposure_us {
            for &g in &m.gain_db {
                if (e, g) != darkest {
                    assert!(mean(e, g) >= mean(darkest.0, darkest.1));
                }
            }
        }
    }

    #[test]
    fn grid_episode_walks_snap_and_terminate() {
        let dir = tempdir().unwrap();
        let env = generate_and_load(&tiny_spec(), dir.path()).unwrap();
        let start = ExposureParams::clamped(0.5, 0.0);
        let mut ep = env
            .start_episode(start, RewardConfig::default(), ActionScale::default(), 5)
            .unwrap();
        assert_eq!(ep.state().as_slice().len(), crate::percept::STATE_LEN);
        assert_eq!(ep.params().exposure_time_ms, 0.5);

        // Repeating the same absolute request yields identical frames, so
        // flicker must vanish on the second step.
        let (_, _, _) = ep.step_absolute(ExposureParams::clamped(2.0, 6.0)).unwrap();
        let (_, r2, _) = ep.step_absolute(ExposureParams::clamped(2.0, 6.0)).unwrap();
        assert_eq!(ep.last_flicker().unwrap(), 0.0);
        let frame = env.frame(2000, 6.0).unwrap();
        let expected = r_single_frame(frame, &RewardConfig::default()).unwrap();
        assert!((r2 - expected).abs() < 1e-12);

        let mut done = false;
        while !done {
            let out = ep.step(Action::ZERO).unwrap();
            done = out.2;
        }
        assert_eq!(ep.steps_taken(), 5);
        assert!(ep.step(Action::ZERO).is_err());
    }

    #[test]
    fn relative_actions_traverse_the_grid() {
        let dir = tempdir().unwrap();
        let env = generate_and_load(&tiny_spec(), dir.path()).unwrap();
        let mut ep = env
            .start_episode(
                ExposureParams::clamped(0.5, 0.0),
                RewardConfig::default(),
                ActionScale::default(),
                50,
            )
            .unwrap();
        for _ in 0..8 {
            ep.step(Action { a_exposure: 1.0, a_gain: 1.0 }).unwrap();
        }
        let p = ep.params();
        assert_eq!(p.exposure_time_ms, 8.0);
        assert_eq!(p.gain_db, 12.0);
    }

    #[test]
    fn manifest_round_trip_and_validation() {
        let dir = tempdir().unwrap();
        let m = outdoor_manifest();
        let path = dir.path().join("manifest.json");
        m.write_json(&path).unwrap();
        let back = GridManifest::read_json(&path).unwrap();
        assert_eq!(back, m);
        let text = fs::read_to_string(&path).unwrap();
        for key in ["exposure_us", "gain_db", "pattern", "width", "height"] {
            assert!(text.contains(&format!("\"{key}\"")), "missing {key}");
        }

        let mut bad = outdoor_manifest();
        bad.exposure_us[1] = bad.exposure_us[0];
        assert!(bad.validate().is_err());
        let mut bad = outdoor_manifest();
        bad.pattern = "no_placeholders.pgm".into();
        assert!(bad.validate().is_err());
        let mut bad = outdoor_manifest();
        bad.gain_db = vec![-4.0, 0.0];
        assert!(bad.validate().is_err());
    }

    #[test]
    fn objective_peaks_inside_the_grid_for_a_mid_scene() {
        let dir = tempdir().unwrap();
        let spec = GridSpec {
            exposure_us: (0..20).map(|i| 200 + 400 * i).collect(),
            gain_db: vec![0.0, 4.0, 8.0],
            ..tiny_spec()
        };
        let env = generate_and_load(&spec, dir.path()).unwrap();
        let cfg = RewardConfig::default();
        let mut best = f64::NEG_INFINITY;
        let mut best_cell = (0, 0.0);
        for &e in &env.manifest().exposure_us.clone() {
            for &g in &env.manifest().gain_db.clone() {
                let v = env.objective(e as f64 / 1000.0, g, &cfg).unwrap();
                if v > best {
                    best = v;
                    best_cell = (e, g);
                }
            }
        }
        // The best cell beats both grid corners.
        let lo = env.objective(0.2, 0.0, &cfg).unwrap();
        let hi = env.objective(7.8, 8.0, &cfg).unwrap();
        assert!(best >= lo && best >= hi);
        assert!(best_cell.0 > 0);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let e = rng.gen_range(0.2..7.8);
            let g = rng.gen_range(0.0..8.0);
            assert!(env.objective(e, g, &cfg).unwrap() <= best + 1e-12);
        }
    }
}
