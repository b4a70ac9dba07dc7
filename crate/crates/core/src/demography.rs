//! Multi-generation population histories with monogamous pairing and
//! Poisson fertility, and the standardized library of final cohorts.

use std::fmt;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinship;
use crate::seed::{derive_seed, stream_rng, SimRng, Stream};

/// Maximum number of attempts in [`run_history`] before giving up.
pub const MAX_ATTEMPTS: u32 = 5;

/// Founder rosters are clamped to this multiple of the target size so that
/// tiny fertilities fail fast instead of allocating unbounded founder sets.
pub const MAX_FOUNDER_FACTOR: usize = 16;

/// Base of the minimum buffer growth between attempts.
pub const DEFAULT_RETRY_GROWTH: f64 = 1.1;
const MAX_RETRY_GROWTH: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DemographyError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("population failed to reach {target} agents after {attempts} attempts (kappa = {kappa}, last final generation = {last_size})")]
    GrowthFailure {
        kappa: f64,
        target: usize,
        attempts: u32,
        last_size: usize,
    },
    #[error("final generation has {available} agents, fewer than the target {target}")]
    InsufficientPopulation { available: usize, target: usize },
    #[error("run {run}: {source}")]
    Run {
        run: usize,
        #[source]
        source: Box<DemographyError>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId(pub u32);

impl AgentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub fn code(self) -> u8 {
        match self {
            Gender::Female => 0,
            Gender::Male => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Gender::Female),
            1 => Some(Gender::Male),
            _ => None,
        }
    }

    fn random(rng: &mut SimRng) -> Self {
        if rng.random_bool(0.5) {
            Gender::Male
        } else {
            Gender::Female
        }
    }
}

/// One person. Founders have no parents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Agent {
    pub id: AgentId,
    pub generation: u32,
    pub gender: Gender,
    pub mother: Option<AgentId>,
    pub father: Option<AgentId>,
}

impl Agent {
    pub fn is_founder(&self) -> bool {
        self.mother.is_none() && self.father.is_none()
    }

    /// Parent pair, if any. Two agents with equal parent pairs are full siblings.
    pub fn parents(&self) -> Option<(AgentId, AgentId)> {
        Some((self.mother?, self.father?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Couple {
    pub wife: AgentId,
    pub husband: AgentId,
    pub children: Vec<AgentId>,
}

/// All agents of one simulated history. Agent ids equal their index in
/// `agents`, which lets ancestry lookups run in constant time.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationHistory {
    pub agents: Vec<Agent>,
    /// `couples[s]` holds the couples formed in generation `s + 1`.
    pub couples: Vec<Vec<Couple>>,
    pub kappa: f64,
    pub seed: u64,
    pub generations: u32,
    pub attempts: u32,
}

impl PopulationHistory {
    /// Builds a history from an agent table, checking the id and parent invariants.
    pub fn from_agents(agents: Vec<Agent>, kappa: f64, seed: u64) -> Result<Self, DemographyError> {
        let bad = |msg: String| Err(DemographyError::InvalidConfig(msg));
        for (idx, agent) in agents.iter().enumerate() {
            if agent.id.index() != idx {
                return bad(format!("agent at row {idx} has id {}", agent.id));
            }
            match (agent.mother, agent.father) {
                (None, None) => {
                    if agent.generation != 1 {
                        return bad(format!("founder {} is in generation {}", agent.id, agent.generation));
                    }
                }
                (Some(m), Some(f)) => {
                    let (Some(mother), Some(father)) = (agents.get(m.index()), agents.get(f.index())) else {
                        return bad(format!("agent {} has an unknown parent", agent.id));
                    };
                    if mother.gender != Gender::Female
                        || father.gender != Gender::Male
                        || mother.generation + 1 != agent.generation
                        || father.generation + 1 != agent.generation
                    {
                        return bad(format!("agent {} has inconsistent parents", agent.id));
                    }
                }
                _ => return bad(format!("agent {} has exactly one parent", agent.id)),
            }
        }
        let generations = agents.iter().map(|a| a.generation).max().unwrap_or(0);
        let mut couples: Vec<Vec<Couple>> = vec![Vec::new(); generations.saturating_sub(1) as usize];
        let mut by_parents: std::collections::BTreeMap<(AgentId, AgentId), Vec<AgentId>> = Default::default();
        for agent in &agents {
            if let Some(p) = agent.parents() {
                by_parents.entry(p).or_default().push(agent.id);
            }
        }
        for ((wife, husband), children) in by_parents {
            let g = agents[wife.index()].generation as usize;
            couples[g - 1].push(Couple { wife, husband, children });
        }
        Ok(Self {
            agents,
            couples,
            kappa,
            seed,
            generations,
            attempts: 1,
        })
    }

    pub fn agent(&self, id: AgentId) -> &Agent {
        &self.agents[id.index()]
    }

    pub fn generation(&self, g: u32) -> impl Iterator<Item = &Agent> + '_ {
        self.agents.iter().filter(move |a| a.generation == g)
    }

    pub fn generation_ids(&self, g: u32) -> Vec<AgentId> {
        self.generation(g).map(|a| a.id).collect()
    }

    pub fn final_generation_ids(&self) -> Vec<AgentId> {
        self.generation_ids(self.generations)
    }

    /// Children born per woman, averaged over the generations that reproduced.
    pub fn realized_fertility(&self) -> f64 {
        let mut total = 0.0;
        let mut counted = 0usize;
        for g in 1..self.generations {
            let women = self.generation(g).filter(|a| a.gender == Gender::Female).count();
            if women == 0 {
                continue;
            }
            let born = self.generation(g + 1).count();
            total += born as f64 / women as f64;
            counted += 1;
        }
        if counted == 0 {
            0.0
        } else {
            total / counted as f64
        }
    }
}

/// The final-generation group analysed as one society.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cohort {
    /// Sorted ascending.
    pub members: Vec<AgentId>,
}

impl Cohort {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub kappa: f64,
    pub target_size: usize,
    pub generations: u32,
    pub seed: u64,
    pub buffer: f64,
    /// Factor applied to `buffer` after each undersized attempt.
    pub retry_growth: f64,
}

impl SimConfig {
    pub fn new(kappa: f64, seed: u64) -> Self {
        Self {
            kappa,
            target_size: 2000,
            generations: 6,
            seed,
            buffer: 1.1,
            retry_growth: DEFAULT_RETRY_GROWTH,
        }
    }

    pub fn validate(&self) -> Result<(), DemographyError> {
        let err = |m: &str| Err(DemographyError::InvalidConfig(m.to_string()));
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return err("kappa must be positive");
        }
        if self.target_size < 2 {
            return err("target size must be at least 2");
        }
        if self.generations < 5 {
            return err("at least 5 generations are needed for real great-great-grandparents");
        }
        if !(self.buffer.is_finite() && self.buffer > 0.0) {
            return err("buffer must be positive");
        }
        if !(self.retry_growth.is_finite() && self.retry_growth > 1.0) {
            return err("retry growth must exceed 1");
        }
        Ok(())
    }

    /// Founder count `ceil(target * buffer / (kappa/2)^(G-1))`, floored at 2.
    pub fn founder_count(&self) -> usize {
        let growth = (self.kappa / 2.0).powi(self.generations as i32 - 1);
        let raw = (self.target_size as f64 * self.buffer / growth).ceil();
        let cap = (MAX_FOUNDER_FACTOR * self.target_size) as f64;
        raw.min(cap).max(2.0) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LibraryConfig {
    pub runs: usize,
    pub fertility_min: f64,
    pub fertility_max: f64,
    pub target_size: usize,
    pub generations: u32,
    pub master_seed: u64,
    pub buffer: f64,
    pub retry_growth: f64,
}

impl Default for LibraryConfig {
    fn default() -> Self {
        Self {
            runs: 400,
            fertility_min: 2.5,
            fertility_max: 5.0,
            target_size: 2000,
            generations: 6,
            master_seed: 1,
            buffer: 1.1,
            retry_growth: DEFAULT_RETRY_GROWTH,
        }
    }
}

impl LibraryConfig {
    pub fn validate(&self) -> Result<(), DemographyError> {
        if self.runs == 0 {
            return Err(DemographyError::InvalidConfig("runs must be at least 1".into()));
        }
        if self.fertility_min.partial_cmp(&self.fertility_max) != Some(std::cmp::Ordering::Less) || self.fertility_min <= 0.0 {
            return Err(DemographyError::InvalidConfig(
                "fertility range must satisfy 0 < min < max".into(),
            ));
        }
        self.sim_config(0).validate()
    }

    /// Target fertility of run `j` on the midpoint grid.
    pub fn kappa(&self, run: usize) -> f64 {
        let step = (self.fertility_max - self.fertility_min) / self.runs as f64;
        self.fertility_min + (run as f64 + 0.5) * step
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        derive_seed(self.master_seed, run as u64)
    }

    pub fn sim_config(&self, run: usize) -> SimConfig {
        SimConfig {
            kappa: self.kappa(run),
            target_size: self.target_size,
            generations: self.generations,
            seed: self.run_seed(run),
            buffer: self.buffer,
            retry_growth: self.retry_growth,
        }
    }
}

/// Appends the founder generation to an empty agent table.
pub fn init_founders(config: &SimConfig, rng: &mut SimRng) -> Vec<Agent> {
    (0..config.founder_count())
        .map(|i| Agent {
            id: AgentId(i as u32),
            generation: 1,
            gender: Gender::random(rng),
            mother: None,
            father: None,
        })
        .collect()
}

/// Greedy random matching under the no-shared-grandparent rule.
///
/// Women and men are shuffled independently; each woman in turn takes the
/// first still-unpaired man whose grandparent slots are disjoint from hers.
pub fn form_pairs(agents: &[Agent], roster: &[AgentId], rng: &mut SimRng) -> Vec<Couple> {
    let mut women: Vec<AgentId> = roster
        .iter()
        .copied()
        .filter(|id| agents[id.index()].gender == Gender::Female)
        .collect();
    let mut men: Vec<AgentId> = roster
        .iter()
        .copied()
        .filter(|id| agents[id.index()].gender == Gender::Male)
        .collect();
    women.shuffle(rng);
    men.shuffle(rng);

    let grandparents = |id: AgentId| kinship::sorted_slots_in(agents, id, 2);
    let men_slots: Vec<Vec<kinship::AncestorId>> = men.iter().map(|&m| grandparents(m)).collect();
    let mut available: Vec<usize> = (0..men.len()).collect();

    let mut couples = Vec::new();
    for &wife in &women {
        let wife_slots = grandparents(wife);
        let hit = available
            .iter()
            .position(|&m| kinship::multiset_intersection(&wife_slots, &men_slots[m]) == 0);
        if let Some(pos) = hit {
            let m = available.remove(pos);
            couples.push(Couple {
                wife,
                husband: men[m],
                children: Vec::new(),
            });
        }
        if available.is_empty() {
            break;
        }
    }
    couples
}

/// Draws Poisson(kappa) children per couple and appends them to `agents`.
/// Returns the ids of the new generation.
pub fn draw_offspring(
    agents: &mut Vec<Agent>,
    couples: &mut [Couple],
    kappa: f64,
    rng: &mut SimRng,
) -> Vec<AgentId> {
    let poisson = Poisson::new(kappa).expect("kappa validated as positive and finite");
    let mut next = Vec::new();
    for couple in couples.iter_mut() {
        let k = poisson.sample(rng) as u64;
        let generation = agents[couple.wife.index()].generation + 1;
        for _ in 0..k {
            let id = AgentId(agents.len() as u32);
            agents.push(Agent {
                id,
                generation,
                gender: Gender::random(rng),
                mother: Some(couple.wife),
                father: Some(couple.husband),
            });
            couple.children.push(id);
            next.push(id);
        }
    }
    next
}

fn simulate_once(config: &SimConfig, buffer: f64, seed: u64) -> PopulationHistory {
    let mut rng = stream_rng(seed, Stream::History);
    let sized = SimConfig {
        buffer,
        ..config.clone()
    };
    let mut agents = init_founders(&sized, &mut rng);
    let mut roster: Vec<AgentId> = agents.iter().map(|a| a.id).collect();
    let mut couples = Vec::with_capacity(config.generations as usize - 1);
    for _ in 1..config.generations {
        let mut formed = form_pairs(&agents, &roster, &mut rng);
        roster = draw_offspring(&mut agents, &mut formed, config.kappa, &mut rng);
        couples.push(formed);
    }
    PopulationHistory {
        agents,
        couples,
        kappa: config.kappa,
        seed: config.seed,
        generations: config.generations,
        attempts: 1,
    }
}

/// Simulates one history, retrying with a fresh derived seed and a larger
/// founder buffer while the final generation falls short of the target.
///
/// The buffer grows by the observed shortfall `target / final`, capped at
/// doubling, but by at least `retry_growth^k` on the k-th retry so that an
/// unlucky run escalates quickly.
pub fn run_history(config: &SimConfig) -> Result<PopulationHistory, DemographyError> {
    config.validate()?;
    let mut buffer = config.buffer;
    let mut last_size = 0;
    for attempt in 0..MAX_ATTEMPTS {
        let seed = if attempt == 0 {
            config.seed
        } else {
            derive_seed(config.seed, u64::from(attempt))
        };
        let mut history = simulate_once(config, buffer, seed);
        last_size = history.generation(config.generations).count();
        if last_size >= config.target_size {
            history.attempts = attempt + 1;
            return Ok(history);
        }
        let shortfall = config.target_size as f64 / last_size.max(1) as f64;
        let floor = config.retry_growth.powi(attempt as i32 + 1);
        buffer *= shortfall.min(MAX_RETRY_GROWTH).max(floor);
    }
    Err(DemographyError::GrowthFailure {
        kappa: config.kappa,
        target: config.target_size,
        attempts: MAX_ATTEMPTS,
        last_size,
    })
}

/// Uniform subsample without replacement of the final generation.
pub fn truncate_final(
    history: &PopulationHistory,
    target_size: usize,
    rng: &mut SimRng,
) -> Result<Cohort, DemographyError> {
    let last = history.final_generation_ids();
    if last.len() < target_size {
        return Err(DemographyError::InsufficientPopulation {
            available: last.len(),
            target: target_size,
        });
    }
    let mut members: Vec<AgentId> = index::sample(rng, last.len(), target_size)
        .into_iter()
        .map(|i| last[i])
        .collect();
    members.sort_unstable();
    Ok(Cohort { members })
}

/// One entry of the standardized library.
#[derive(Clone, Debug)]
pub struct LibraryRun {
    pub run_id: usize,
    pub kappa_target: f64,
    pub kappa_realized: f64,
    pub seed: u64,
    /// Final generation size before truncation.
    pub n_final: usize,
    pub history: PopulationHistory,
    pub cohort: Cohort,
}

/// History plus truncated cohort for one run of the library.
pub fn simulate_run(libconfig: &LibraryConfig, run: usize) -> Result<LibraryRun, DemographyError> {
    let config = libconfig.sim_config(run);
    let wrap = |e| DemographyError::Run {
        run,
        source: Box::new(e),
    };
    let history = run_history(&config).map_err(wrap)?;
    let mut rng = stream_rng(config.seed, Stream::Truncation);
    let cohort = truncate_final(&history, config.target_size, &mut rng).map_err(wrap)?;
    Ok(LibraryRun {
        run_id: run,
        kappa_target: config.kappa,
        kappa_realized: history.realized_fertility(),
        seed: config.seed,
        n_final: history.generation(config.generations).count(),
        history,
        cohort,
    })
}

/// Builds every run of the library. Runs execute on the current rayon pool;
/// results come back in run order regardless of scheduling.
pub fn build_library(libconfig: &LibraryConfig) -> Result<Vec<LibraryRun>, DemographyError> {
    libconfig.validate()?;
    (0..libconfig.runs)
        .into_par_iter()
        .map(|run| simulate_run(libconfig, run))
        .collect()
}
