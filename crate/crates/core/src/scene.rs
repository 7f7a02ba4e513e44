//! Scene files: recorded attacker positions, frame by frame.
//!
//! ```json
//! {
//!   "metadata": { "name": "slot-pass", "source": "synthetic", "fps": 10 },
//!   "initial_defenders": [[10, 7], [10, 11], [10, 15], [10, 19], [10, 23]],
//!   "frames": [
//!     { "t": 0.0, "puck_holder": 1,
//!       "players": [ { "id": 1, "x": 12.0, "y": 20.0 } ] }
//!   ]
//! }
//! ```
//!
//! `initial_defenders` is optional. Velocities are never stored; the engine
//! derives them from consecutive positions.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{OffensiveFrame, OffensivePlayer, PlayerId};
use crate::engine::DEFENDERS;
use crate::field::{FieldSpec, Point2};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot read scene: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scene: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("frame t={t}: player {id} at ({x}, {y}) is out of bounds")]
    OutOfBounds {
        t: f64,
        id: PlayerId,
        x: f64,
        y: f64,
    },
    #[error("frame t={t}: missing puck holder {id}")]
    MissingPuckHolder { t: f64, id: PlayerId },
    #[error("frame {index}: timestamp {t} does not increase past {prev}")]
    NonMonotoneTime { index: usize, prev: f64, t: f64 },
    #[error("frame t={t}: player ids differ from the first frame")]
    InconsistentPlayers { t: f64 },
    #[error("frame t={t}: duplicate player id {id}")]
    DuplicatePlayer { t: f64, id: PlayerId },
    #[error("frame t={t}: non-finite value")]
    NonFinite { t: f64 },
    #[error("scene has no attackers")]
    NoOffense,
    #[error("scene needs at least 2 frames, found {0}")]
    TooFewFrames(usize),
    #[error("frame rate must be positive, got {0}")]
    BadFrameRate(f64),
    #[error("expected {DEFENDERS} initial defenders, found {0}")]
    DefenderCount(usize),
    #[error("initial defender {index} at {position} is out of bounds")]
    DefenderOutOfBounds { index: usize, position: Point2 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneMetadata {
    pub name: String,
    #[serde(default)]
    pub source: String,
    pub fps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub metadata: SceneMetadata,
    pub frames: Vec<OffensiveFrame>,
    pub initial_defenders: Option<Vec<Point2>>,
}

#[derive(Serialize, Deserialize)]
struct PlayerRecord {
    id: PlayerId,
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct FrameRecord {
    t: f64,
    puck_holder: PlayerId,
    players: Vec<PlayerRecord>,
}

#[derive(Serialize, Deserialize)]
struct SceneFile {
    metadata: SceneMetadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial_defenders: Option<Vec<[f64; 2]>>,
    frames: Vec<FrameRecord>,
}

impl Scene {
    pub fn validate(&self, spec: &FieldSpec) -> Result<(), SceneError> {
        if !(self.metadata.fps > 0.0 && self.metadata.fps.is_finite()) {
            return Err(SceneError::BadFrameRate(self.metadata.fps));
        }
        if self.frames.len() < 2 {
            return Err(SceneError::TooFewFrames(self.frames.len()));
        }
        if self.frames[0].players.is_empty() {
            return Err(SceneError::NoOffense);
        }
        let mut ids: Vec<PlayerId> = self.frames[0].players.iter().map(|p| p.id).collect();
        ids.sort_unstable();

        for (index, frame) in self.frames.iter().enumerate() {
            let t = frame.t;
            if !t.is_finite() {
                return Err(SceneError::NonFinite { t });
            }
            if index > 0 {
                let prev = self.frames[index - 1].t;
                if t <= prev {
                    return Err(SceneError::NonMonotoneTime { index, prev, t });
                }
            }
            let mut these: Vec<PlayerId> = Vec::with_capacity(frame.players.len());
            for p in &frame.players {
                if !p.position.is_finite() {
                    return Err(SceneError::NonFinite { t });
                }
                if !spec.contains(p.position) {
                    return Err(SceneError::OutOfBounds {
                        t,
                        id: p.id,
                        x: p.position.x,
                        y: p.position.y,
                    });
                }
                if these.contains(&p.id) {
                    return Err(SceneError::DuplicatePlayer { t, id: p.id });
                }
                these.push(p.id);
            }
            if !these.contains(&frame.puck_holder) {
                return Err(SceneError::MissingPuckHolder {
                    t,
                    id: frame.puck_holder,
                });
            }
            these.sort_unstable();
            if these != ids {
                return Err(SceneError::InconsistentPlayers { t });
            }
        }

        if let Some(defs) = &self.initial_defenders {
            if defs.len() != DEFENDERS {
                return Err(SceneError::DefenderCount(defs.len()));
            }
            for (index, &position) in defs.iter().enumerate() {
                if !position.is_finite() || !spec.contains(position) {
                    return Err(SceneError::DefenderOutOfBounds { index, position });
                }
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        match (self.frames.first(), self.frames.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        let file = SceneFile {
            metadata: self.metadata.clone(),
            initial_defenders: self
                .initial_defenders
                .as_ref()
                .map(|d| d.iter().map(|p| [p.x, p.y]).collect()),
            frames: self
                .frames
                .iter()
                .map(|f| FrameRecord {
                    t: f.t,
                    puck_holder: f.puck_holder,
                    players: f
                        .players
                        .iter()
                        .map(|p| PlayerRecord {
                            id: p.id,
                            x: p.position.x,
                            y: p.position.y,
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("scene serializes")
    }
}

pub fn parse_scene(text: &str) -> Result<Scene, SceneError> {
    let file: SceneFile = serde_json::from_str(text)?;
    let scene = Scene {
        metadata: file.metadata,
        initial_defenders: file
            .initial_defenders
            .map(|d| d.into_iter().map(|[x, y]| Point2::new(x, y)).collect()),
        frames: file
            .frames
            .into_iter()
            .map(|f| OffensiveFrame {
                t: f.t,
                puck_holder: f.puck_holder,
                players: f
                    .players
                    .into_iter()
                    .map(|p| OffensivePlayer {
                        id: p.id,
                        position: Point2::new(p.x, p.y),
                        velocity: Point2::ZERO,
                    })
                    .collect(),
            })
            .collect(),
    };
    scene.validate(&FieldSpec::default())?;
    Ok(scene)
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene, SceneError> {
    parse_scene(&fs::read_to_string(path)?)
}

pub fn write_scene(scene: &Scene, path: impl AsRef<Path>) -> Result<(), SceneError> {
    fs::write(path, scene.to_json())?;
    Ok(())
}
