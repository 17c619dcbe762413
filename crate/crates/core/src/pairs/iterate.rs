//! Iterated decomposition of the pushforward of a fully crossing pair.
//!
//! Exhaustive mode materializes every pair of `L^k`, `I^k` and `J^k` and
//! therefore grows like `L^k`; sampled mode follows independent lineages
//! that at every step move to one alive child chosen in proportion to its
//! mass, carrying the weight `prod (1 - p_E)` so that the class masses are
//! estimated without bias.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cuts::{cut, CutConfig, DecompositionStep};
use super::{MassClass, MeasurePair, PairError, Regularity, DEFAULT_CURVE_CAP};
use crate::numerics::sum::pairwise_sum;

/// Pairs are only recorded in the inventory while a step has at most this
/// many of them.
pub const INVENTORY_LIMIT: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecompositionMode {
    Exhaustive { cap: u64 },
    Sampled { samples: usize, seed: u64 },
}

impl Default for DecompositionMode {
    fn default() -> Self {
        DecompositionMode::Exhaustive { cap: DEFAULT_CURVE_CAP }
    }
}

/// Class masses of `F^step_*` of the seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepMasses {
    pub step: usize,
    pub m_l: f64,
    pub m_i: f64,
    pub m_j: f64,
    pub m_e: f64,
    /// Standard errors of `[m_L, m_I, m_J, m_E]`; absent in exhaustive mode.
    pub stderr: Option<[f64; 4]>,
    /// Exhaustive: number of pairs in `L`, `I` and `J`. Sampled: number of
    /// lineages that drew a child at this step.
    pub curves_alive: u64,
}

impl StepMasses {
    pub fn total(&self) -> f64 {
        pairwise_sum(&[self.m_l, self.m_i, self.m_j, self.m_e])
    }

    pub fn get(&self, class: MassClass) -> f64 {
        match class {
            MassClass::L => self.m_l,
            MassClass::I => self.m_i,
            MassClass::J => self.m_j,
            MassClass::E => self.m_e,
        }
    }
}

/// One pair of the inventory; `index` and `parent` count records within
/// their step, and the children of the seed have no parent record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InventoryRecord {
    pub step: usize,
    pub index: usize,
    pub parent: Option<usize>,
    pub class: MassClass,
    pub regularity: Regularity,
    pub domain: (f64, f64),
    pub shift: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionLedger {
    pub l: f64,
    pub a0: f64,
    pub mode: DecompositionMode,
    pub steps: Vec<StepMasses>,
    pub inventory: Vec<InventoryRecord>,
    /// Set when some step had too many pairs to be recorded.
    pub inventory_truncated: bool,
}

impl DecompositionLedger {
    pub fn step(&self, n: usize) -> Option<&StepMasses> {
        self.steps.get(n.checked_sub(1)?)
    }
}

/// Pushes `seed` forward `n` times, decomposing at every step.
pub fn iterate_decomposition(
    seed: &MeasurePair,
    n: usize,
    mode: DecompositionMode,
    cfg: &CutConfig,
) -> Result<DecompositionLedger, PairError> {
    if n == 0 {
        return Err(PairError::InvariantViolation("the number of steps must be at least one".into()));
    }
    if seed.regularity != Regularity::FullCrossing {
        return Err(PairError::InvariantViolation("the seed must be a fully crossing pair".into()));
    }
    let mut ledger = DecompositionLedger {
        l: seed.l(),
        a0: cfg.a0,
        mode,
        steps: Vec::with_capacity(n),
        inventory: Vec::new(),
        inventory_truncated: false,
    };
    match mode {
        DecompositionMode::Exhaustive { cap } => exhaustive(seed, n, cap, cfg, &mut ledger)?,
        DecompositionMode::Sampled { samples, seed: rng_seed } => {
            if samples == 0 {
                return Err(PairError::InvariantViolation("sampled mode needs at least one lineage".into()));
            }
            sampled(seed, n, samples, rng_seed, cfg, &mut ledger)?
        }
    }
    Ok(ledger)
}

fn exhaustive(
    seed: &MeasurePair,
    n: usize,
    cap: u64,
    cfg: &CutConfig,
    ledger: &mut DecompositionLedger,
) -> Result<(), PairError> {
    // each pair carries its own index among its step's inventory records
    let mut pairs: Vec<(Option<usize>, MeasurePair)> = vec![(None, seed.clone())];
    let mut e_parts: Vec<f64> = Vec::new();
    for step in 1..=n {
        let cuts: Vec<DecompositionStep> = pairs.par_iter().map(|(_, p)| cut(p, cfg)).collect::<Result<_, _>>()?;
        let weighted = |class: MassClass| -> f64 {
            let v: Vec<f64> = cuts.iter().map(|s| s.parent.mass * s.class_mass(class)).collect();
            pairwise_sum(&v)
        };
        e_parts.push(weighted(MassClass::E));
        let alive: u64 = cuts.iter().map(|s| s.alive_count()).sum();
        ledger.steps.push(StepMasses {
            step,
            m_l: weighted(MassClass::L),
            m_i: weighted(MassClass::I),
            m_j: weighted(MassClass::J),
            m_e: pairwise_sum(&e_parts),
            stderr: None,
            curves_alive: alive,
        });
        if step == n {
            break;
        }
        if alive > cap {
            return Err(PairError::BudgetExceeded { step, count: alive, cap });
        }
        let expanded: Vec<Vec<(MassClass, MeasurePair)>> =
            cuts.par_iter().map(|s| s.expand()).collect::<Result<_, _>>()?;
        let record = alive <= INVENTORY_LIMIT && !ledger.inventory_truncated;
        if !record {
            ledger.inventory_truncated = true;
        }
        let mut next = Vec::with_capacity(alive as usize);
        for ((parent, _), children) in pairs.iter().zip(expanded) {
            for (class, child) in children {
                let own = record.then_some(next.len());
                if let Some(index) = own {
                    ledger.inventory.push(InventoryRecord {
                        step,
                        index,
                        parent: *parent,
                        class,
                        regularity: child.regularity,
                        domain: child.curve.domain(),
                        shift: child.curve.shift(),
                        mass: child.mass,
                    });
                }
                next.push((own, child));
            }
        }
        pairs = next;
    }
    Ok(())
}

fn sampled(
    seed: &MeasurePair,
    n: usize,
    samples: usize,
    rng_seed: u64,
    cfg: &CutConfig,
    ledger: &mut DecompositionLedger,
) -> Result<(), PairError> {
    let lineages: Vec<(Vec<[f64; 4]>, Vec<bool>)> = (0..samples)
        .into_par_iter()
        .map(|i| lineage(seed, n, rng_seed, i as u64, cfg))
        .collect::<Result<_, _>>()?;
    let m = samples as f64;
    ledger.inventory_truncated = true;
    for k in 0..n {
        let mut mean = [0.0; 4];
        let mut stderr = [0.0; 4];
        for c in 0..4 {
            let v: Vec<f64> = lineages.iter().map(|(x, _)| x[k][c]).collect();
            let mu = pairwise_sum(&v) / m;
            let dev: Vec<f64> = v.iter().map(|x| (x - mu) * (x - mu)).collect();
            let var = if samples > 1 { pairwise_sum(&dev) / (m - 1.0) } else { 0.0 };
            mean[c] = mu;
            stderr[c] = (var / m).sqrt();
        }
        ledger.steps.push(StepMasses {
            step: k + 1,
            m_l: mean[0],
            m_i: mean[1],
            m_j: mean[2],
            m_e: mean[3],
            stderr: Some(stderr),
            curves_alive: lineages.iter().filter(|(_, alive)| alive[k]).count() as u64,
        });
    }
    Ok(())
}

/// One lineage: per step, its contribution to `[m_L, m_I, m_J, m_E]` and
/// whether it still carried a pair.
fn lineage(
    seed: &MeasurePair,
    n: usize,
    rng_seed: u64,
    stream: u64,
    cfg: &CutConfig,
) -> Result<(Vec<[f64; 4]>, Vec<bool>), PairError> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(stream);
    let mut out = Vec::with_capacity(n);
    let mut alive_at = Vec::with_capacity(n);
    let mut pair = Some(seed.clone());
    let (mut w, mut e_acc) = (1.0f64, 0.0f64);
    for _ in 0..n {
        let Some(p) = pair.take() else {
            out.push([0.0, 0.0, 0.0, e_acc]);
            alive_at.push(false);
            continue;
        };
        let s = cut(&p, cfg)?;
        let pe = s.class_mass(MassClass::E);
        out.push([
            w * s.class_mass(MassClass::L),
            w * s.class_mass(MassClass::I),
            w * s.class_mass(MassClass::J),
            e_acc + w * pe,
        ]);
        e_acc += w * pe;
        w *= 1.0 - pe;
        pair = s.sample_child(&mut rng)?.map(|(_, child)| child);
        alive_at.push(pair.is_some());
    }
    Ok((out, alive_at))
}
