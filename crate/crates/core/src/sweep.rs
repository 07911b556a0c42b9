//! Exhaustive and seeded-random identity sweeps over basis tuples.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockState, Model};
use crate::par::{self, Strategy};
use crate::products::{IdentityName, IdentityReport};

#[derive(Clone, Debug, Serialize)]
pub struct SweepConfig {
    /// Exhaustive sweep over basis tuples with total degree at most this.
    pub max_total_degree: usize,
    pub random_samples: usize,
    pub random_max_degree: usize,
    pub seed: u64,
    #[serde(skip)]
    pub strategy: Strategy,
}

impl SweepConfig {
    pub fn exhaustive(max_total_degree: usize) -> Self {
        SweepConfig {
            max_total_degree,
            random_samples: 0,
            random_max_degree: max_total_degree,
            seed: 0,
            strategy: Strategy::default(),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct IdentityTally {
    pub checked: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomSweepReport {
    pub max_total_degree: usize,
    pub random_samples: usize,
    pub random_max_degree: usize,
    pub seed: u64,
    pub tallies: BTreeMap<IdentityName, IdentityTally>,
    pub central_charge: Option<String>,
    /// Up to ten failing reports, in task order.
    pub failures: Vec<IdentityReport>,
    pub pass: bool,
}

/// All basis states of degree at most `max`, with their degrees.
fn basis_up_to(model: &Model, max: usize) -> Result<Vec<(usize, FockState)>> {
    let mut out = Vec::new();
    for d in 0..=max {
        for s in model.basis_states(d)? {
            out.push((d, s));
        }
    }
    Ok(out)
}

/// Tasks for one tuple: every identity whose arity fits, on a prefix of it.
fn push_tuple_tasks(tasks: &mut Vec<(IdentityName, Vec<FockState>)>, tuple: &[FockState], arity: usize) {
    for id in IdentityName::ALL {
        if id.arity() == arity && !matches!(id, IdentityName::ConformalWeight | IdentityName::Virasoro) {
            tasks.push((id, tuple.to_vec()));
        }
    }
}

/// Draws `count` basis triples with total degree at most `max` from a seeded stream.
pub fn random_triples(model: &Model, max: usize, count: usize, seed: u64) -> Result<Vec<[FockState; 3]>> {
    let pool = basis_up_to(model, max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let i = rng.gen_range(0..pool.len());
        let j = rng.gen_range(0..pool.len());
        let k = rng.gen_range(0..pool.len());
        if pool[i].0 + pool[j].0 + pool[k].0 <= max {
            out.push([pool[i].1.clone(), pool[j].1.clone(), pool[k].1.clone()]);
        }
    }
    Ok(out)
}

/// Runs every identity over all basis tuples within the degree budget plus
/// the seeded random triples.
pub fn axiom_sweep(model: &Model, cfg: &SweepConfig) -> Result<AxiomSweepReport> {
    let need = cfg.max_total_degree.max(cfg.random_max_degree) + 1;
    if model.cutoff() < need {
        return Err(Error::CutoffExceeded {
            op: "axiom_sweep",
            degree: need,
            cutoff: model.cutoff(),
        });
    }
    let pool = basis_up_to(model, cfg.max_total_degree)?;
    let mut tasks: Vec<(IdentityName, Vec<FockState>)> = Vec::new();
    for (da, a) in &pool {
        push_tuple_tasks(&mut tasks, std::slice::from_ref(a), 1);
        for (db, b) in &pool {
            if da + db > cfg.max_total_degree {
                continue;
            }
            push_tuple_tasks(&mut tasks, &[a.clone(), b.clone()], 2);
            for (dc, c) in &pool {
                if da + db + dc <= cfg.max_total_degree {
                    push_tuple_tasks(&mut tasks, &[a.clone(), b.clone(), c.clone()], 3);
                }
            }
        }
    }
    for t in random_triples(model, cfg.random_max_degree, cfg.random_samples, cfg.seed)? {
        push_tuple_tasks(&mut tasks, &t[..1], 1);
        push_tuple_tasks(&mut tasks, &t[..2], 2);
        push_tuple_tasks(&mut tasks, &t, 3);
    }
    let omega = model.virasoro_element()?;
    tasks.push((IdentityName::Virasoro, vec![omega.clone()]));
    for (d, x) in &pool {
        if *d + 2 <= model.cutoff() {
            tasks.push((IdentityName::ConformalWeight, vec![omega.clone(), x.clone()]));
        }
    }

    let reports = par::try_map(cfg.strategy, &tasks, |(id, args)| model.check_identity(*id, args))?;
    let mut tallies: BTreeMap<IdentityName, IdentityTally> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut central_charge = None;
    for rep in reports {
        let t = tallies.entry(rep.identity).or_default();
        t.checked += 1;
        if rep.identity == IdentityName::Virasoro {
            central_charge = rep.central_charge.clone();
        }
        if !rep.pass {
            t.failed += 1;
            if failures.len() < 10 {
                failures.push(rep);
            }
        }
    }
    let pass = tallies.values().all(|t| t.failed == 0);
    Ok(AxiomSweepReport {
        max_total_degree: cfg.max_total_degree,
        random_samples: cfg.random_samples,
        random_max_degree: cfg.random_max_degree,
        seed: cfg.seed,
        tallies,
        central_charge,
        failures,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_passes() {
        let m = Model::rank_one(5).unwrap();
        let rep = axiom_sweep(&m, &SweepConfig::exhaustive(4)).unwrap();
        assert!(rep.pass, "{:?}", rep.failures);
        assert_eq!(rep.central_charge.as_deref(), Some("1/1"));
        assert_eq!(rep.tallies.len(), IdentityName::ALL.len());
    }

    #[test]
    fn random_triples_are_seeded() {
        let m = Model::rank_one(6).unwrap();
        let a = random_triples(&m, 6, 20, 7).unwrap();
        let b = random_triples(&m, 6, 20, 7).unwrap();
        assert_eq!(a, b);
        assert!(a
            .iter()
            .all(|t| t.iter().map(|s| s.degree().unwrap()).sum::<usize>() <= 6));
    }

    #[test]
    fn sweep_needs_headroom() {
        let m = Model::rank_one(4).unwrap();
        assert!(axiom_sweep(&m, &SweepConfig::exhaustive(4)).is_err());
    }
}
