//! The Head agent: exploration and exploitation cycles over a population of
//! Context agents, and the resolution of non-cooperative situations.
//!
//! One exploration cycle processes a single labelled observation:
//!
//! 1. the Percept extrema are updated;
//! 2. every alive agent whose region contains the point is activated;
//! 3. with no activated agent (incompetence) a new agent is created around the
//!    point; otherwise each activated agent proposes a class, the Head picks
//!    the proposal of the best-scored agent and every activated agent gets
//!    positive or negative feedback;
//! 4. overlapping pairs among the agents involved are resolved: same proposal
//!    (competition) leads to absorption above the overlap threshold and to a
//!    push below it, different proposals (conflict) always lead to a push.
//!
//! Exploitation never mutates the population. A point outside every agent is
//! classified by the agent whose boundary is closest.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{ContextAgent, EngineConfig, PerceptState};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{Hypercube, PushOutcome};
use crate::online_linear::LinearParams;
use crate::scalar::{approx_eq, Scalar};

/// Scores closer than this are tied for winner selection.
const SCORE_TIE_TOL: f64 = 1e-12;

/// Labels handled by the engine.
pub const CLASS_UNIVERSE: [u8; 2] = [0, 1];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NcsKind {
    Incompetence,
    Competition,
    Conflict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Resolution {
    Push,
    Absorb,
    Create,
    Nearest,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NcsEvent {
    pub kind: NcsKind,
    /// For pairwise events the acting (higher-score) agent comes first.
    pub participants: Vec<u64>,
    pub resolution: Resolution,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleReport {
    pub cycle: u64,
    pub activated_ids: Vec<u64>,
    pub winner_id: Option<u64>,
    pub prediction: u8,
    pub ncs_events: Vec<NcsEvent>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Engine<T> {
    config: EngineConfig<T>,
    model: LinearParams<T>,
    dim: usize,
    cycle: u64,
    next_agent_id: u64,
    percepts: PerceptState<T>,
    agents: Vec<ContextAgent<T>>,
}

impl<T: Scalar> Engine<T> {
    /// Empty engine over `dim` input variables whose agents carry models
    /// built from `model`.
    pub fn new(config: EngineConfig<T>, model: LinearParams<T>, dim: usize) -> Result<Self> {
        config.validate()?;
        model.validate()?;
        if dim == 0 {
            return Err(Error::InvalidInput("at least one input variable is required".into()));
        }
        Ok(Self {
            config,
            model,
            dim,
            cycle: 0,
            next_agent_id: 0,
            percepts: PerceptState::default(),
            agents: Vec::new(),
        })
    }

    pub fn config(&self) -> &EngineConfig<T> {
        &self.config
    }

    pub fn model_params(&self) -> &LinearParams<T> {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn percepts(&self) -> &PerceptState<T> {
        &self.percepts
    }

    /// Alive agents in creation order.
    pub fn agents(&self) -> &[ContextAgent<T>] {
        &self.agents
    }

    pub fn is_trained(&self) -> bool {
        !self.agents.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let engine: Self = serde_json::from_str(s)?;
        engine.config.validate()?;
        engine.model.validate()?;
        Ok(engine)
    }

    fn index_of(&self, id: u64) -> usize {
        // ids are assigned in increasing order and agents are never reordered
        self.agents
            .binary_search_by_key(&id, |a| a.id)
            .expect("participant ids refer to agents of this engine")
    }

    fn score_of(&self, idx: usize) -> T {
        self.agents[idx].score(&self.config)
    }

    /// Head decision among activated agents given their proposals.
    ///
    /// The best score wins. Agents tied on the best score vote; a tied vote
    /// goes to the smaller class label. The reported winner is the lowest id
    /// among tied agents proposing the chosen class.
    pub fn select_winner(&self, proposals: &[(u64, u8)]) -> Result<(u64, u8)> {
        select_winner(
            proposals.iter().map(|&(id, class)| (id, self.score_of(self.index_of(id)), class)),
        )
        .ok_or_else(|| Error::InvalidInput("winner selection needs at least one activated agent".into()))
    }

    /// One exploration cycle with the labelled observation `(x, y)`.
    pub fn explore_step(&mut self, x: &[T], y: u8) -> Result<CycleReport> {
        check_dim(self.dim, x.len())?;
        if !CLASS_UNIVERSE.contains(&y) {
            return Err(Error::UnknownLabel(y));
        }
        self.percepts.update_extrema(x)?;

        let activated: Vec<usize> = (0..self.agents.len())
            .filter(|&i| self.agents[i].is_activated_by(x))
            .collect();
        let activated_ids: Vec<u64> = activated.iter().map(|&i| self.agents[i].id).collect();

        let report = if activated.is_empty() {
            let (prediction, ncs_events) = self.resolve_incompetence_explore(x, y)?;
            CycleReport { cycle: self.cycle, activated_ids, winner_id: None, prediction, ncs_events }
        } else {
            let proposals: Vec<(u64, u8)> = activated
                .iter()
                .map(|&i| (self.agents[i].id, self.agents[i].model.predict_unchecked(x)))
                .collect();
            let (winner_id, prediction) = self.select_winner(&proposals)?;
            for (&i, &(_, class)) in activated.iter().zip(&proposals) {
                self.agents[i].apply_feedback(class == y, x, y, &self.config)?;
            }
            let ncs_events = self.resolve_pairwise_ncs(&proposals)?;
            CycleReport { cycle: self.cycle, activated_ids, winner_id: Some(winner_id), prediction, ncs_events }
        };
        self.cycle += 1;
        Ok(report)
    }

    /// Creates an agent around `x`, trains it once on `(x, y)` and settles
    /// its overlaps with existing agents. Returns the new agent's proposal
    /// at `x` together with the events raised.
    pub fn resolve_incompetence_explore(&mut self, x: &[T], y: u8) -> Result<(u8, Vec<NcsEvent>)> {
        let region = Hypercube::around(x, self.config.radius)?;
        let mut model = self.model.build(self.dim)?;
        model.partial_fit(x, y)?;
        let id = self.next_agent_id;
        self.next_agent_id += 1;
        let agent = ContextAgent::new(id, region, model, self.cycle)?;
        let proposal = agent.model.predict_unchecked(x);

        let mut events = vec![NcsEvent {
            kind: NcsKind::Incompetence,
            participants: vec![id],
            resolution: Resolution::Create,
        }];
        let neighbours: Vec<(u64, u8)> = self
            .agents
            .iter()
            .filter(|a| a.region.intersection_volume_unchecked(&agent.region) > T::zero())
            .map(|a| (a.id, a.model.predict_unchecked(x)))
            .collect();
        self.agents.push(agent);

        let mut participants = neighbours;
        participants.push((id, proposal));
        events.extend(self.settle(&participants, Some(id))?);
        Ok((proposal, events))
    }

    /// Resolves competition and conflict between every overlapping pair of
    /// `participants`, each given with the class it proposed.
    ///
    /// Pairs are handled by decreasing best score of the pair, then by ids.
    /// Sweeps repeat while an absorption happened, since a merged region may
    /// overlap agents that were already separated.
    pub fn resolve_pairwise_ncs(&mut self, participants: &[(u64, u8)]) -> Result<Vec<NcsEvent>> {
        self.settle(participants, None)
    }

    fn settle(&mut self, participants: &[(u64, u8)], anchor: Option<u64>) -> Result<Vec<NcsEvent>> {
        let mut events = Vec::new();
        let scored: Vec<(u64, u8, T)> = participants
            .iter()
            .map(|&(id, class)| (id, class, self.score_of(self.index_of(id))))
            .collect();
        let mut pairs = Vec::new();
        for (a, first) in scored.iter().enumerate() {
            for second in &scored[a + 1..] {
                if anchor.is_some_and(|id| first.0 != id && second.0 != id) {
                    continue;
                }
                // acting agent first: higher score, then lower id
                let (hi, lo) = if second.2 > first.2 || (second.2 == first.2 && second.0 < first.0) {
                    (second, first)
                } else {
                    (first, second)
                };
                pairs.push((*hi, *lo));
            }
        }
        pairs.sort_by(|(h1, l1), (h2, l2)| {
            h2.2.partial_cmp(&h1.2)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| h1.0.min(l1.0).cmp(&h2.0.min(l2.0)))
                .then_with(|| h1.0.max(l1.0).cmp(&h2.0.max(l2.0)))
        });

        loop {
            let mut absorbed = false;
            for &((hi_id, hi_class, _), (lo_id, lo_class, _)) in &pairs {
                let (hi, lo) = (self.index_of(hi_id), self.index_of(lo_id));
                if !self.agents[hi].alive || !self.agents[lo].alive {
                    continue;
                }
                let (winner, loser) = (&self.agents[hi].region, &self.agents[lo].region);
                if winner.intersection_volume_unchecked(loser) <= T::zero() {
                    continue;
                }
                let kind = if hi_class == lo_class { NcsKind::Competition } else { NcsKind::Conflict };
                let merge = kind == NcsKind::Competition
                    && self
                        .config
                        .overlap_threshold
                        .is_some_and(|o| winner.overlap_index(loser).unwrap_or(T::zero()) > o);
                let resolution = if merge {
                    self.absorb(hi, lo)?;
                    Resolution::Absorb
                } else {
                    match winner.push(loser)? {
                        PushOutcome::Retracted(r) => {
                            self.agents[lo].region = r;
                            Resolution::Push
                        }
                        PushOutcome::Annihilate => {
                            self.absorb(hi, lo)?;
                            Resolution::Absorb
                        }
                        PushOutcome::NoOverlap => continue,
                    }
                };
                absorbed |= resolution == Resolution::Absorb;
                events.push(NcsEvent { kind, participants: vec![hi_id, lo_id], resolution });
            }
            if !absorbed {
                break;
            }
        }
        self.agents.retain(|a| a.alive);
        Ok(events)
    }

    /// Agent at `winner` grows to enclose the agent at `loser`, which is destroyed.
    fn absorb(&mut self, winner: usize, loser: usize) -> Result<()> {
        let merged = self.agents[winner].region.enclosing(&self.agents[loser].region)?;
        self.agents[winner].region = merged;
        self.agents[loser].alive = false;
        Ok(())
    }

    /// Classifies `x` without changing any agent.
    pub fn exploit_step(&self, x: &[T]) -> Result<CycleReport> {
        check_dim(self.dim, x.len())?;
        if self.agents.is_empty() {
            return Err(Error::Untrained);
        }
        let activated: Vec<&ContextAgent<T>> = self.agents.iter().filter(|a| a.is_activated_by(x)).collect();
        let activated_ids = activated.iter().map(|a| a.id).collect();
        if activated.is_empty() {
            let nearest = self.nearest_agent(x)?;
            return Ok(CycleReport {
                cycle: self.cycle,
                activated_ids,
                winner_id: Some(nearest.id),
                prediction: nearest.model.predict_unchecked(x),
                ncs_events: vec![NcsEvent {
                    kind: NcsKind::Incompetence,
                    participants: vec![nearest.id],
                    resolution: Resolution::Nearest,
                }],
            });
        }
        let (winner_id, prediction) = select_winner(
            activated
                .iter()
                .map(|a| (a.id, a.score(&self.config), a.model.predict_unchecked(x))),
        )
        .expect("activated set is non-empty");
        Ok(CycleReport { cycle: self.cycle, activated_ids, winner_id: Some(winner_id), prediction, ncs_events: vec![] })
    }

    /// Agent whose boundary is closest to `x`; lowest id on ties.
    pub fn nearest_agent(&self, x: &[T]) -> Result<&ContextAgent<T>> {
        let mut best: Option<(&ContextAgent<T>, T)> = None;
        for a in &self.agents {
            let d = a.region.distance_to_point(x)?;
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((a, d));
            }
        }
        best.map(|(a, _)| a).ok_or(Error::Untrained)
    }

    pub fn predict(&self, x: &[T]) -> Result<u8> {
        Ok(self.exploit_step(x)?.prediction)
    }

    pub fn predict_batch(&self, xs: &[Vec<T>]) -> Result<Vec<u8>> {
        if self.agents.is_empty() {
            return Err(Error::Untrained);
        }
        xs.iter().map(|x| self.predict(x)).collect()
    }

    /// `exploration_passes` shuffled passes of [`explore_step`](Self::explore_step).
    pub fn train(&mut self, xs: &[Vec<T>], ys: &[u8]) -> Result<()> {
        self.train_traced(xs, ys, |_| Ok(()))
    }

    /// Like [`train`](Self::train), handing every cycle report to `trace`.
    pub fn train_traced<F>(&mut self, xs: &[Vec<T>], ys: &[u8], mut trace: F) -> Result<()>
    where
        F: FnMut(&CycleReport) -> Result<()>,
    {
        if xs.is_empty() {
            return Err(Error::InvalidInput("cannot train on an empty data set".into()));
        }
        check_dim(xs.len(), ys.len())?;
        for (x, &y) in xs.iter().zip(ys) {
            check_dim(self.dim, x.len())?;
            if !CLASS_UNIVERSE.contains(&y) {
                return Err(Error::UnknownLabel(y));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let mut order: Vec<usize> = (0..xs.len()).collect();
        for _ in 0..self.config.exploration_passes {
            order.shuffle(&mut rng);
            for &i in &order {
                let report = self.explore_step(&xs[i], ys[i])?;
                trace(&report)?;
            }
        }
        Ok(())
    }
}

/// Winner among `(id, score, proposal)` triples; `None` for an empty input.
fn select_winner<T: Scalar>(candidates: impl Iterator<Item = (u64, T, u8)>) -> Option<(u64, u8)> {
    let candidates: Vec<(u64, T, u8)> = candidates.collect();
    let best = candidates.iter().map(|c| c.1).fold(None, |m: Option<T>, s| Some(m.map_or(s, |m| m.max(s))))?;
    let tol = T::of(SCORE_TIE_TOL);
    let tied: Vec<&(u64, T, u8)> = candidates.iter().filter(|c| approx_eq(c.1, best, tol)).collect();
    let votes_for = |class: u8| tied.iter().filter(|c| c.2 == class).count();
    let prediction = *CLASS_UNIVERSE
        .iter()
        .filter(|&&c| votes_for(c) > 0)
        .max_by(|&&a, &&b| votes_for(a).cmp(&votes_for(b)).then(b.cmp(&a)))?;
    let winner = tied.iter().filter(|c| c.2 == prediction).map(|c| c.0).min()?;
    Some((winner, prediction))
}
