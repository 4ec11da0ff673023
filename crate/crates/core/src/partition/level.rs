//! Partitioners that deal whole levels (rows, groups, factor levels, locations,
//! time points) into folds.

use std::collections::BTreeMap;

use super::{partition, MethodSpec, Split};
use crate::error::{Error, Result};
use crate::plan::{BlockSet, Fold, Provenance, ResamplingPlan};
use crate::rng::{deal, rng_from};
use crate::task::{Task, TimeColumn};

fn check_k(k: usize, levels: usize, what: &str) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("folds must be at least 2, got {k}")));
    }
    if k > levels {
        return Err(Error::Partition(format!("{k} folds exceed the {levels} available {what}")));
    }
    Ok(())
}

/// Folds whose test sets are the members of the given level piles.
fn folds_from_piles(block_of: &[usize], piles: &[Vec<usize>]) -> Vec<Fold> {
    let n = block_of.len();
    let mut fold_of_block = BTreeMap::new();
    for (f, pile) in piles.iter().enumerate() {
        for &b in pile {
            fold_of_block.insert(b, f);
        }
    }
    let mut tests = vec![Vec::new(); piles.len()];
    for (i, b) in block_of.iter().enumerate() {
        tests[fold_of_block[b]].push(i);
    }
    tests.into_iter().map(|t| Fold::from_test(n, t, Vec::new())).collect()
}

pub(super) fn random_split(task: &Task, k: usize, seed: u64) -> Result<Split> {
    let n = task.n();
    check_k(k, n, "observations")?;
    let mut rng = rng_from(seed);
    let piles = deal(&(0..n).collect::<Vec<_>>(), k, &mut rng);
    let folds = piles
        .into_iter()
        .map(|mut t| {
            t.sort_unstable();
            Fold::from_test(n, t, Vec::new())
        })
        .collect();
    Ok(Split {
        folds,
        blocks: None,
        overlapping: false,
    })
}

/// Deals labelled blocks (already contiguous `1..=n_z`) randomly into `k` folds.
fn dealt_blocks(blocks: BlockSet, k: usize, seed: u64, what: &str) -> Result<Split> {
    check_k(k, blocks.n_z, what)?;
    let mut rng = rng_from(seed);
    let piles = deal(&(1..=blocks.n_z).collect::<Vec<_>>(), k, &mut rng);
    Ok(Split {
        folds: folds_from_piles(&blocks.block_of, &piles),
        blocks: Some(blocks),
        overlapping: false,
    })
}

pub(super) fn grouped_split(task: &Task, k: usize, seed: u64) -> Result<Split> {
    let group = task
        .group()
        .ok_or_else(|| Error::InvalidTask("grouped CV needs a group role".into()))?;
    dealt_blocks(BlockSet::from_keys(&group.labels, Provenance::Custom), k, seed, "groups")
}

pub(super) fn custom_split(task: &Task, factor: &[String]) -> Result<Split> {
    if factor.len() != task.n() {
        return Err(Error::InvalidParameter(format!(
            "factor has {} values for {} observations",
            factor.len(),
            task.n()
        )));
    }
    let blocks = BlockSet::from_keys(factor, Provenance::Custom);
    if blocks.n_z < 2 {
        return Err(Error::Partition("custom factor needs at least 2 levels".into()));
    }
    let piles: Vec<Vec<usize>> = (1..=blocks.n_z).map(|b| vec![b]).collect();
    Ok(Split {
        folds: folds_from_piles(&blocks.block_of, &piles),
        blocks: Some(blocks),
        overlapping: false,
    })
}

fn space_labels(task: &Task, var: &str) -> Result<Vec<String>> {
    if let Some(loc) = task.location().filter(|l| l.name == var) {
        return Ok(loc.labels.clone());
    }
    task.column_text(var).ok_or_else(|| Error::MissingColumn {
        role: "space_var",
        column: var.to_string(),
    })
}

fn time_keys(task: &Task, var: &str) -> Result<Vec<i64>> {
    if let Some(t) = task.time().filter(|t| t.name == var) {
        return Ok(t.keys.clone());
    }
    let raw = task.column_text(var).ok_or_else(|| Error::MissingColumn {
        role: "time_var",
        column: var.to_string(),
    })?;
    Ok(TimeColumn::parse(var, &raw)?.keys)
}

/// Leave-location-and-time-out fold: test rows sit at a selected location AND a selected time;
/// training rows share neither; every other row is omitted.
pub(crate) fn cstf_fold(loc_of: &[usize], time_of: &[usize], loc_sel: &[bool], time_sel: &[bool]) -> Fold {
    let role: Vec<u8> = loc_of
        .iter()
        .zip(time_of)
        .map(|(&l, &t)| match (loc_sel[l - 1], time_sel[t - 1]) {
            (true, true) => 1,
            (false, false) => 0,
            _ => 2,
        })
        .collect();
    Fold::from_roles(&role)
}

pub(super) fn cstf_split(
    task: &Task,
    k: usize,
    space_var: Option<&str>,
    time_var: Option<&str>,
    seed: u64,
) -> Result<Split> {
    let space = space_var.map(|v| space_labels(task, v)).transpose()?;
    let time = time_var.map(|v| time_keys(task, v)).transpose()?;
    match (space, time) {
        (None, None) => Err(Error::InvalidParameter(
            "sptcv_cstf needs space_var, time_var or both".into(),
        )),
        (Some(s), None) => dealt_blocks(BlockSet::from_keys(&s, Provenance::Locational), k, seed, "locations"),
        (None, Some(t)) => dealt_blocks(BlockSet::from_keys(&t, Provenance::Temporal), k, seed, "time points"),
        (Some(s), Some(t)) => {
            let locs = BlockSet::from_keys(&s, Provenance::Locational);
            let times = BlockSet::from_keys(&t, Provenance::Temporal);
            check_k(k, locs.n_z, "locations")?;
            check_k(k, times.n_z, "time points")?;
            let mut rng = rng_from(seed);
            let loc_piles = deal(&(1..=locs.n_z).collect::<Vec<_>>(), k, &mut rng);
            let time_piles = deal(&(1..=times.n_z).collect::<Vec<_>>(), k, &mut rng);
            let folds = loc_piles
                .iter()
                .zip(&time_piles)
                .map(|(lp, tp)| {
                    let mut loc_sel = vec![false; locs.n_z];
                    lp.iter().for_each(|&l| loc_sel[l - 1] = true);
                    let mut time_sel = vec![false; times.n_z];
                    tp.iter().for_each(|&t| time_sel[t - 1] = true);
                    cstf_fold(&locs.block_of, &times.block_of, &loc_sel, &time_sel)
                })
                .collect();
            Ok(Split {
                folds,
                blocks: Some(locs),
                overlapping: false,
            })
        }
    }
}

/// Uniform random k-fold CV.
pub fn random_cv(task: &Task, k: usize, seed: u64) -> Result<ResamplingPlan> {
    partition(task, &MethodSpec::RandomCv { folds: k }, seed)
}

/// k-fold CV at the level of the task's group role; no group is split across folds.
pub fn grouped_cv(task: &Task, k: usize, seed: u64) -> Result<ResamplingPlan> {
    partition(task, &MethodSpec::GroupedCv { folds: k }, seed)
}

/// Leave-one-level-out CV over an arbitrary factor, levels in lexicographic order.
pub fn custom_cv(task: &Task, factor: &[String]) -> Result<ResamplingPlan> {
    let split = custom_split(task, factor)?;
    let k = split.folds.len();
    let folds = split
        .folds
        .into_iter()
        .enumerate()
        .map(|(j, f)| Fold { id: j + 1, ..f })
        .collect();
    let mut params = crate::plan::Params::new();
    params.insert("column".into(), serde_json::Value::String("<factor>".into()));
    Ok(ResamplingPlan {
        method: "custom_cv".into(),
        params,
        seed: 0,
        repeats: 1,
        k_per_repeat: k,
        n: task.n(),
        overlapping: false,
        folds,
        blocks: split.blocks,
    })
}

/// Leave-time-out, leave-location-out or leave-location-and-time-out CV.
pub fn sptcv_cstf(
    task: &Task,
    k: usize,
    space_var: Option<&str>,
    time_var: Option<&str>,
    seed: u64,
) -> Result<ResamplingPlan> {
    partition(
        task,
        &MethodSpec::Cstf {
            folds: k,
            space_var: space_var.map(String::from),
            time_var: time_var.map(String::from),
        },
        seed,
    )
}
