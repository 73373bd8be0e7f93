//! Momentum-accelerated, residual-feedback bandit learning of Nash equilibria
//! for the three-spacecraft laser pointing acquisition game, with a seeded
//! Monte-Carlo harness.
//!
//! Angles are in μrad throughout.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod game;
pub mod harness;
pub mod output;
pub mod seeker;
pub mod vec4;

pub use game::{GameConfig, GroundTruth, Joint, Player};
pub use harness::{run_campaign, run_realization, CampaignSummary, RealizationResult, Scenario};
pub use seeker::{SeekerParams, SeekerState, Variant};
pub use vec4::StateVec4;
