use serde::{Deserialize, Serialize};

use super::{Channel, ModeId};
use crate::error::FusionError;

/// Probability of the outcome a measurement actually produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeProbability {
    Half,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasureResult {
    pub outcome: Channel,
    pub probability: OutcomeProbability,
    /// For a mismatched fusion, the former partners of the measured modes, now paired.
    pub repaired: Option<(ModeId, ModeId)>,
}

/// Signed perfect pairing of Majorana-like modes.
///
/// Mode ids are handed out sequentially from zero. Each alive mode knows its
/// partner; the pair's channel is stored on both members.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChannelAlgebra {
    partner: Vec<Option<ModeId>>,
    channel: Vec<Channel>,
    alive: usize,
    psi_pairs: usize,
}

impl ChannelAlgebra {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_id(&self) -> ModeId {
        self.partner.len() as ModeId
    }

    pub fn is_alive(&self, m: ModeId) -> bool {
        self.partner.get(m as usize).is_some_and(Option::is_some)
    }

    pub fn alive_count(&self) -> usize {
        self.alive
    }

    /// Number of alive pairs in the ψ channel.
    pub fn psi_pairs(&self) -> usize {
        self.psi_pairs
    }

    pub fn alive_modes(&self) -> impl Iterator<Item = ModeId> + '_ {
        self.partner
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_some())
            .map(|(i, _)| i as ModeId)
    }

    /// Alive pairs as `(lower id, higher id, channel)`, sorted.
    pub fn pairs(&self) -> Vec<(ModeId, ModeId, Channel)> {
        self.alive_modes()
            .filter_map(|m| {
                let p = self.partner[m as usize]?;
                (m < p).then(|| (m, p, self.channel[m as usize]))
            })
            .collect()
    }

    fn check(&self, m: ModeId) -> Result<ModeId, FusionError> {
        self.partner
            .get(m as usize)
            .copied()
            .flatten()
            .ok_or(FusionError::DeadMode(m))
    }

    pub fn partner(&self, m: ModeId) -> Result<ModeId, FusionError> {
        self.check(m)
    }

    pub fn channel(&self, m: ModeId) -> Result<Channel, FusionError> {
        self.check(m)?;
        Ok(self.channel[m as usize])
    }

    fn set_pair(&mut self, a: ModeId, b: ModeId, c: Channel) {
        for (x, y) in [(a, b), (b, a)] {
            self.partner[x as usize] = Some(y);
            self.channel[x as usize] = c;
        }
        if c.is_psi() {
            self.psi_pairs += 1;
        }
    }

    fn set_channel(&mut self, m: ModeId, c: Channel) {
        let p = self.partner[m as usize].expect("alive");
        let old = self.channel[m as usize];
        if old.is_psi() {
            self.psi_pairs -= 1;
        }
        if c.is_psi() {
            self.psi_pairs += 1;
        }
        self.channel[m as usize] = c;
        self.channel[p as usize] = c;
    }

    fn kill(&mut self, m: ModeId) {
        self.partner[m as usize] = None;
        self.alive -= 1;
    }

    /// Creates two fresh modes paired in the vacuum channel.
    pub fn create_pair(&mut self) -> (ModeId, ModeId) {
        let a = self.next_id();
        let b = a + 1;
        self.partner.extend([None, None]);
        self.channel.extend([Channel::Vacuum, Channel::Vacuum]);
        self.set_pair(a, b, Channel::Vacuum);
        self.alive += 2;
        (a, b)
    }

    /// A fermion fused into mode `m` flips the channel of its pair.
    pub fn absorb(&mut self, m: ModeId) -> Result<(), FusionError> {
        self.check(m)?;
        let c = self.channel[m as usize].flip();
        self.set_channel(m, c);
        Ok(())
    }

    /// Flips the channels of the pairs of `m` and `x`. When they are the same pair nothing changes.
    pub fn monodromy(&mut self, m: ModeId, x: ModeId) -> Result<(), FusionError> {
        let pm = self.check(m)?;
        self.check(x)?;
        if m == x {
            return Err(FusionError::SameMode(m));
        }
        if pm == x {
            return Ok(());
        }
        self.absorb(m)?;
        self.absorb(x)
    }

    /// Measures the joint charge of `a` and `b`, removing both.
    ///
    /// `decide` is consulted only when the outcome is uniformly random.
    pub fn measure(
        &mut self,
        a: ModeId,
        b: ModeId,
        decide: &mut dyn FnMut() -> Channel,
    ) -> Result<MeasureResult, FusionError> {
        let pa = self.check(a)?;
        let pb = self.check(b)?;
        if a == b {
            return Err(FusionError::SameMode(a));
        }
        if pa == b {
            let outcome = self.channel[a as usize];
            if outcome.is_psi() {
                self.psi_pairs -= 1;
            }
            self.kill(a);
            self.kill(b);
            return Ok(MeasureResult {
                outcome,
                probability: OutcomeProbability::One,
                repaired: None,
            });
        }
        let alpha = self.channel[a as usize];
        let beta = self.channel[b as usize];
        let outcome = decide();
        for c in [alpha, beta] {
            if c.is_psi() {
                self.psi_pairs -= 1;
            }
        }
        self.kill(a);
        self.kill(b);
        self.set_pair(pa, pb, outcome.times(alpha).times(beta));
        Ok(MeasureResult {
            outcome,
            probability: OutcomeProbability::Half,
            repaired: Some((pa, pb)),
        })
    }
}
