//! Run configuration: JSON-loadable, with defaults chosen for a desk-scale
//! 64x64 board. CLI flags override individual fields after loading.

use crate::error::{DgformError, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Surrogate dough environment parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    /// Cells per board side.
    pub grid_size: usize,
    /// Board side length in meters.
    pub board_size: f64,
    /// Total dough volume in cubic meters; conserved by every deformation.
    pub volume: f64,
    /// Initial mound footprint radius in meters.
    pub mound_radius: f64,
    /// Maximum random offset of the mound center from the board center.
    pub mound_jitter: f64,
    pub pin_radius: f64,
    pub pin_half_length: f64,
    /// Episode horizon T.
    pub horizon: usize,
    /// Reward weights (w_sdf, w_iou, w_density) on per-step metric deltas.
    pub reward_weights: [f64; 3],
    /// Draw the rolling pin into the observation, occluding dough below it.
    pub occlusion: bool,
    /// Goal disk radius in meters.
    pub goal_radius: f64,
    /// Top-down camera height above the board (depth = camera - height).
    pub camera_height: f64,
    /// Cells with height above this (meters) count as dough for metrics.
    pub mask_threshold: f64,
    /// Square RGB-D observation resolution.
    pub obs_resolution: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            grid_size: 64,
            board_size: 0.4,
            volume: 4e-4,
            mound_radius: 0.08,
            mound_jitter: 0.05,
            pin_radius: 0.02,
            pin_half_length: 0.09,
            horizon: 250,
            reward_weights: [1.0, 10.0, 0.01],
            occlusion: false,
            goal_radius: 0.12,
            camera_height: 0.5,
            mask_threshold: 1e-4,
            obs_resolution: 128,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 32 {
            return Err(DgformError::Config(format!(
                "grid_size must be >= 32, got {}",
                self.grid_size
            )));
        }
        if self.volume <= 0.0 {
            return Err(DgformError::Config("volume must be positive".into()));
        }
        if self.pin_radius <= 0.0 || self.pin_half_length <= 0.0 {
            return Err(DgformError::Config("pin geometry must be positive".into()));
        }
        if self.goal_radius * 2.0 > self.board_size {
            return Err(DgformError::Config(format!(
                "goal_radius {} exceeds the board (side {})",
                self.goal_radius, self.board_size
            )));
        }
        if self.obs_resolution == 0 || self.horizon == 0 {
            return Err(DgformError::Config("obs_resolution and horizon must be positive".into()));
        }
        Ok(())
    }

    pub fn cell_size(&self) -> f64 {
        self.board_size / self.grid_size as f64
    }
}

/// Graph model dimensions and policy parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub hidden_dim: usize,
    /// Per-end-effector pose dimension (position 3 + quaternion 4).
    pub pose_dim: usize,
    pub log_std_init: f64,
    pub log_std_min: f64,
    pub log_std_max: f64,
    /// Model-based rollout horizon H.
    pub rollout_horizon: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden_dim: 64,
            pose_dim: 7,
            log_std_init: -1.0,
            log_std_min: -5.0,
            log_std_max: 2.0,
            rollout_horizon: 50,
        }
    }
}

impl ModelConfig {
    pub fn action_dim(&self) -> usize {
        2 * self.pose_dim
    }
}

/// How the imitation term scores demonstration actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImitationForm {
    /// Negative mean log-likelihood (default; numerically stable).
    LogLikelihood,
    /// Negative mean raw likelihood, the literal summed-density form.
    RawLikelihood,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainerConfig {
    pub updates: usize,
    pub lr: f64,
    pub gamma: f64,
    pub lam: f64,
    pub clip_eps: f64,
    /// Value loss weight c1.
    pub c1: f64,
    /// Dynamics loss weight c2.
    pub c2: f64,
    /// Entropy bonus weight c3.
    pub c3: f64,
    /// Imitation threshold tau for the dual update.
    pub tau: f64,
    pub alpha_init: f64,
    pub alpha_lr: f64,
    pub imitation_form: ImitationForm,
    /// Demonstration steps sampled per update.
    pub demo_batch: usize,
    /// Gradient epochs per collected period.
    pub epochs: usize,
    pub checkpoint_every: usize,
    /// Side of the downsampled grid for the full-state PPO baseline.
    pub full_state_downsample: usize,
    /// Side of the downsampled image for the RGB-D PPO baseline.
    pub rgbd_downsample: usize,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            updates: 200,
            lr: 3e-4,
            gamma: 0.99,
            lam: 0.95,
            clip_eps: 0.2,
            c1: 0.5,
            c2: 1.0,
            c3: 0.01,
            tau: 1.0,
            alpha_init: 1.0,
            alpha_lr: 0.01,
            imitation_form: ImitationForm::LogLikelihood,
            demo_batch: 64,
            epochs: 2,
            checkpoint_every: 50,
            full_state_downsample: 16,
            rgbd_downsample: 16,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip_eps > 0.0 && self.clip_eps < 1.0) {
            return Err(DgformError::Config("clip_eps must lie in (0, 1)".into()));
        }
        for (name, v) in [("gamma", self.gamma), ("lam", self.lam)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(DgformError::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.c1 < 0.0 || self.c2 < 0.0 || self.c3 < 0.0 {
            return Err(DgformError::Config("loss weights c1..c3 must be non-negative".into()));
        }
        if self.alpha_init < 0.0 {
            return Err(DgformError::Config("alpha_init must be non-negative".into()));
        }
        if self.epochs == 0 {
            return Err(DgformError::Config("epochs must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// GMM components K.
    pub components: usize,
    /// Integrator-chain order O.
    pub order: usize,
    /// Control effort weight (scales the identity R).
    pub control_weight: f64,
    /// Total trajectory duration in seconds.
    pub total_time: f64,
    /// Isotropic covariance at waypoint steps.
    pub waypoint_cov: f64,
    /// Isotropic pass-through covariance between waypoints.
    pub between_cov: f64,
    /// Fuse the demo-derived coordination Gaussian into each arm's reference.
    pub coordination: bool,
    /// Output trajectory length.
    pub points: usize,
    /// Smoothness bound for order-2 outputs (m/s^2).
    pub max_accel: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            components: 5,
            order: 2,
            control_weight: 1e-3,
            total_time: 10.0,
            waypoint_cov: 1e-4,
            between_cov: 1e2,
            coordination: true,
            points: 10_000,
            max_accel: 5.0,
        }
    }
}

/// Top-level run configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub model: ModelConfig,
    pub trainer: TrainerConfig,
    pub planner: PlannerConfig,
    pub seed: u64,
    pub out_dir: Option<String>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            DgformError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| DgformError::Config(format!("bad config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.trainer.validate()?;
        Ok(())
    }
}
