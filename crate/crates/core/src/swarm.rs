//! The seeded PSO core: memory and search particles over joint-angle pairs.
//!
//! Each sub-swarm owns one joint. Its memory particle holds the last
//! committed joint state and acts as the incumbent in best selection; around
//! it, search particles explore angle space with the classical velocity and
//! position updates
//!
//! ```text
//! v(t) = v(t-1) + c1*r1*(p_lbest - x(t-1)) + c2*r2*(p_gbest - x(t-1))
//! x(t) = x(t-1) + v(t)
//! ```
//!
//! with `r1`, `r2` drawn per component per iteration, velocities clamped
//! componentwise and positions clamped into the joint limits. Particles
//! encode `(theta, alpha)` angle pairs rather than raw 3D points, so every
//! candidate keeps the skeleton's segment lengths by construction; the 3D
//! position a particle stands for is recovered through the forward chain.

use crate::anthro::{Joint, PairLimits};
use crate::kinematics::{Point3, Side};
use crate::rng::{Stream, UnitRand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SwarmError {
    #[error("search box does not intersect joint limits for component {0}")]
    EmptySearchSpace(usize),
}

/// PSO tuning knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwarmConfig {
    /// Cognitive coefficient (personal-best pull).
    pub c1: f64,
    /// Social coefficient (global-best pull).
    pub c2: f64,
    /// Search particles per sub-swarm.
    pub particle_count: usize,
    /// Inner iteration budget per run.
    pub max_iterations: usize,
    /// Componentwise velocity clamp, radians per iteration.
    pub velocity_clamp: f64,
    /// Half-width of the initialization box around the memory, radians.
    pub init_radius: f64,
    /// Early-stop threshold on the best fitness, meters.
    pub convergence_eps: f64,
    /// Evaluate particle fitnesses on the rayon pool. Updates and best
    /// selection stay serial, so results are bit-identical either way.
    pub parallel: bool,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            c1: 2.0,
            c2: 2.0,
            particle_count: 30,
            max_iterations: 200,
            velocity_clamp: 0.05,
            init_radius: 0.3,
            convergence_eps: 5e-4,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParticleRole {
    Memory,
    Search,
}

/// One particle: an angle pair, its velocity, and its personal best.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub best_position: [f64; 2],
    pub best_fitness: f64,
    pub role: ParticleRole,
}

impl Particle {
    pub fn at(position: [f64; 2], role: ParticleRole) -> Self {
        Self {
            position,
            velocity: [0.0, 0.0],
            best_position: position,
            best_fitness: f64::INFINITY,
            role,
        }
    }
}

/// Identifies a joint within the walker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointId {
    pub side: Side,
    pub joint: Joint,
}

/// PSO state for one joint: incumbent memory plus search particles.
#[derive(Debug, Clone)]
pub struct SubSwarm {
    pub joint: JointId,
    pub memory: Particle,
    pub search: Vec<Particle>,
    pub best_position: [f64; 2],
    pub best_fitness: f64,
    rng: Stream,
}

/// Result of one sub-swarm run.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmOutcome {
    pub best_position: [f64; 2],
    pub best_fitness: f64,
    pub iterations: usize,
    /// Global best after initialization and after each iteration.
    pub best_history: Vec<f64>,
    /// Velocity of the search particle holding the global best (zero when
    /// the memory incumbent was never beaten); feeds the dynamics transfer.
    pub best_velocity: [f64; 2],
}

/// Euclidean error between a candidate's forward-kinematics point and the
/// target point it should reach.
pub fn local_fitness(candidate: Point3, target: Point3) -> f64 {
    candidate.distance(&target)
}

/// One velocity update. `lbest` is the particle's personal best; `gbest`
/// the swarm's. Fresh `r1`, `r2` are drawn for each component.
pub fn update_velocity(
    particle: &Particle,
    lbest: [f64; 2],
    gbest: [f64; 2],
    cfg: &SwarmConfig,
    rng: &mut impl UnitRand,
) -> [f64; 2] {
    let mut v = [0.0; 2];
    for i in 0..2 {
        let r1 = rng.unit();
        let r2 = rng.unit();
        let raw = particle.velocity[i]
            + cfg.c1 * r1 * (lbest[i] - particle.position[i])
            + cfg.c2 * r2 * (gbest[i] - particle.position[i]);
        v[i] = raw.clamp(-cfg.velocity_clamp, cfg.velocity_clamp);
    }
    v
}

/// One position update, clamped into the joint limits.
pub fn update_position(particle: &mut Particle, limits: &PairLimits) -> [f64; 2] {
    particle.position[0] = limits
        .theta
        .clamp(particle.position[0] + particle.velocity[0]);
    particle.position[1] = limits
        .alpha
        .clamp(particle.position[1] + particle.velocity[1]);
    particle.position
}

/// Spawns `particle_count` search particles uniformly in the box
/// `memory ± init_radius`, intersected with the joint limits. Velocities
/// start at zero; personal bests at the initial positions.
pub fn init_search_particles(
    memory: [f64; 2],
    cfg: &SwarmConfig,
    limits: &PairLimits,
    rng: &mut impl UnitRand,
) -> Result<Vec<Particle>, SwarmError> {
    let ranges = [limits.theta, limits.alpha];
    let mut boxes = [[0.0f64; 2]; 2];
    for i in 0..2 {
        let lo = (memory[i] - cfg.init_radius).max(ranges[i].min);
        let hi = (memory[i] + cfg.init_radius).min(ranges[i].max);
        if lo > hi {
            return Err(SwarmError::EmptySearchSpace(i));
        }
        boxes[i] = [lo, hi];
    }
    Ok((0..cfg.particle_count)
        .map(|_| {
            let theta = boxes[0][0] + rng.unit() * (boxes[0][1] - boxes[0][0]);
            let alpha = boxes[1][0] + rng.unit() * (boxes[1][1] - boxes[1][0]);
            Particle::at([theta, alpha], ParticleRole::Search)
        })
        .collect())
}

impl SubSwarm {
    /// Builds a sub-swarm around a memory angle pair. `initial_velocity`
    /// (from the dynamics transfer) is applied to every search particle.
    pub fn new(
        joint: JointId,
        memory: [f64; 2],
        cfg: &SwarmConfig,
        limits: &PairLimits,
        seed: u64,
        initial_velocity: [f64; 2],
    ) -> Result<Self, SwarmError> {
        let mut rng = Stream::from_seed(seed);
        let mut search = init_search_particles(memory, cfg, limits, &mut rng)?;
        for p in &mut search {
            p.velocity = initial_velocity;
        }
        Ok(Self {
            joint,
            memory: Particle::at(memory, ParticleRole::Memory),
            search,
            best_position: memory,
            best_fitness: f64::INFINITY,
            rng,
        })
    }
}

fn evaluate<F>(positions: &[[f64; 2]], fitness: &F, parallel: bool) -> Vec<f64>
where
    F: Fn([f64; 2]) -> f64 + Sync,
{
    if parallel {
        positions.par_iter().map(|&p| fitness(p)).collect()
    } else {
        positions.iter().map(|&p| fitness(p)).collect()
    }
}

/// Runs the PSO loop until the best fitness drops below `convergence_eps`
/// or the iteration budget is spent.
///
/// The memory particle is the index-0 incumbent: it never moves, and ties
/// in best selection resolve to the lowest index, so an unbeaten memory
/// stays the global best. The global best is non-increasing by
/// construction.
pub fn run_subswarm<F>(
    sw: &mut SubSwarm,
    fitness: F,
    cfg: &SwarmConfig,
    limits: &PairLimits,
) -> SwarmOutcome
where
    F: Fn([f64; 2]) -> f64 + Sync,
{
    sw.memory.best_fitness = fitness(sw.memory.position);
    sw.memory.best_position = sw.memory.position;

    let positions: Vec<[f64; 2]> = sw.search.iter().map(|p| p.position).collect();
    for (p, f) in sw
        .search
        .iter_mut()
        .zip(evaluate(&positions, &fitness, cfg.parallel))
    {
        p.best_fitness = f;
        p.best_position = p.position;
    }

    let mut best_velocity = [0.0, 0.0];
    sw.best_fitness = sw.memory.best_fitness;
    sw.best_position = sw.memory.best_position;
    for p in &sw.search {
        if p.best_fitness < sw.best_fitness {
            sw.best_fitness = p.best_fitness;
            sw.best_position = p.best_position;
            best_velocity = p.velocity;
        }
    }

    let mut history = vec![sw.best_fitness];
    let mut iterations = 0;
    while iterations < cfg.max_iterations && sw.best_fitness >= cfg.convergence_eps {
        for p in &mut sw.search {
            p.velocity = update_velocity(p, p.best_position, sw.best_position, cfg, &mut sw.rng);
            update_position(p, limits);
        }
        let positions: Vec<[f64; 2]> = sw.search.iter().map(|p| p.position).collect();
        let fitnesses = evaluate(&positions, &fitness, cfg.parallel);
        for (p, f) in sw.search.iter_mut().zip(fitnesses) {
            if f < p.best_fitness {
                p.best_fitness = f;
                p.best_position = p.position;
            }
        }
        for p in &sw.search {
            if p.best_fitness < sw.best_fitness {
                sw.best_fitness = p.best_fitness;
                sw.best_position = p.best_position;
                best_velocity = p.velocity;
            }
        }
        iterations += 1;
        history.push(sw.best_fitness);
    }

    SwarmOutcome {
        best_position: sw.best_position,
        best_fitness: sw.best_fitness,
        iterations,
        best_history: history,
        best_velocity,
    }
}
