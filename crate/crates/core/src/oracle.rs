//! Exhaustive reference solvers used by tests and the self-test.

use alloc::vec::Vec;

use crate::architecture::{ActivityMode, RsSpec};
use crate::channel::GroupStat;
use crate::error::invalid;
use crate::optimizer::RsBudget;
use crate::{Error, Result};

/// Grid search of the amplitudes that maximize the coherent signal of one
/// active subsurface under its reflect-power budget.
///
/// All but the last amplitude walk a grid of spacing `step`; the last one is
/// set to the largest value the remaining budget allows.
pub fn brute_force_beta(
    stats: &[GroupStat],
    rs: &RsSpec,
    budget: RsBudget,
    step: f64,
) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(invalid!("grid step must be positive"));
    }
    // (signal per unit amplitude, reflect power per unit amplitude²)
    let terms: Vec<(f64, f64)> = match rs.mode {
        ActivityMode::Passive => return Err(invalid!("passive subsurface has no amplitudes")),
        ActivityMode::FcActive => {
            let mg = rs.m_g as f64;
            stats
                .iter()
                .map(|g| (g.a / libm::sqrt(mg), budget.pt * g.c / mg + budget.delta2))
                .collect()
        }
        ActivityMode::ScActive => {
            let mut out = Vec::new();
            let mut start = 0;
            for &k in &rs.clusters {
                let t = (k * rs.m_g) as f64;
                let members = &stats[start..start + k];
                start += k;
                let a: f64 = members.iter().map(|g| g.a).sum();
                let c: f64 = members.iter().map(|g| g.c).sum();
                out.push((a / libm::sqrt(t), budget.pt * c / t + budget.delta2));
            }
            out
        }
    };
    let n = terms.len();
    if n == 0 || n > 3 {
        return Err(Error::Unsupported(alloc::format!(
            "grid search over {n} amplitudes"
        )));
    }

    let mut best = (f64::NEG_INFINITY, alloc::vec![0.0; n]);
    let mut current = alloc::vec![0.0; n];
    walk(&terms, budget.pr_max, step, 0, 0.0, &mut current, &mut best);
    Ok(best.1)
}

fn walk(
    terms: &[(f64, f64)],
    left: f64,
    step: f64,
    depth: usize,
    signal: f64,
    current: &mut Vec<f64>,
    best: &mut (f64, Vec<f64>),
) {
    let (w, d) = terms[depth];
    if depth + 1 == terms.len() {
        let x = if d > 0.0 {
            libm::sqrt(left.max(0.0) / d)
        } else {
            0.0
        };
        let total = signal + w * x;
        if total > best.0 {
            current[depth] = x;
            *best = (total, current.clone());
        }
        return;
    }
    let mut k = 0usize;
    loop {
        let x = k as f64 * step;
        let cost = d * x * x;
        if cost > left {
            break;
        }
        current[depth] = x;
        walk(
            terms,
            left - cost,
            step,
            depth + 1,
            signal + w * x,
            current,
            best,
        );
        k += 1;
    }
}
