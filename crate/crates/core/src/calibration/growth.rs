//! Removes economic growth from the yearly parameter series so that rule
//! calibration sees adaptive behaviour, not expansion.
//!
//! Output rates are rescaled so every (area, process) keeps its base-year
//! total output across its output items; the initial availability vector is
//! rescaled so the global total stays at its base-year level. Shares (nu,
//! trade, eta) cannot express growth and pass through untouched.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::params::ParameterSet;

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct GrowthLog {
    /// (area, process) groups active in the base year but inactive in some
    /// later year; their entries stay zero.
    pub inactive_groups: usize,
    /// Groups active in a year but absent from the base year; the rescale
    /// factor is zero and their entries are dropped.
    pub base_missing_groups: usize,
}

fn group_sums(params: &ParameterSet) -> HashMap<(u32, u32), (f64, f64)> {
    let mut sums = HashMap::new();
    for block in &params.blocks {
        let a: f64 = block.alpha.iter().map(|&(_, v)| v).sum();
        let b: f64 = block.beta.iter().map(|&(_, v)| v).sum();
        sums.insert((block.area, block.process), (a, b));
    }
    sums
}

/// Rescales every year against `base_year`, which must be in the series.
pub fn normalize_growth(
    yearly: &[ParameterSet],
    base_year: i32,
) -> Result<(Vec<ParameterSet>, GrowthLog)> {
    if yearly.len() < 2 {
        return Err(Error::validation(
            "growth normalization needs at least two years",
        ));
    }
    let base = yearly
        .iter()
        .find(|p| p.year == base_year)
        .ok_or_else(|| {
            Error::validation(format!("base year {base_year} not present in series"))
        })?;
    let base_sums = group_sums(base);
    let base_x0_total: f64 = base.x0.iter().sum();

    let mut log = GrowthLog::default();
    let mut out = Vec::with_capacity(yearly.len());
    for params in yearly {
        let mut p = params.clone();
        if p.year != base_year {
            for block in &mut p.blocks {
                let key = (block.area, block.process);
                let (base_a, base_b) = base_sums.get(&key).copied().unwrap_or((0.0, 0.0));
                let cur_a: f64 = block.alpha.iter().map(|&(_, v)| v).sum();
                let cur_b: f64 = block.beta.iter().map(|&(_, v)| v).sum();
                if cur_a > 0.0 {
                    if base_a > 0.0 {
                        let f = base_a / cur_a;
                        if f != 1.0 {
                            for e in block.alpha.iter_mut() {
                                e.1 *= f;
                            }
                        }
                    } else {
                        block.alpha.clear();
                        log.base_missing_groups += 1;
                    }
                }
                if cur_b > 0.0 {
                    if base_b > 0.0 {
                        let f = base_b / cur_b;
                        if f != 1.0 {
                            for e in block.beta.iter_mut() {
                                e.1 *= f;
                            }
                        }
                    } else {
                        block.beta.clear();
                        log.base_missing_groups += 1;
                    }
                }
            }
            // groups that died out relative to the base year
            let cur_sums = group_sums(params);
            for (key, &(base_a, base_b)) in &base_sums {
                let (cur_a, cur_b) = cur_sums.get(key).copied().unwrap_or((0.0, 0.0));
                if (base_a > 0.0 && cur_a == 0.0) || (base_b > 0.0 && cur_b == 0.0) {
                    log.inactive_groups += 1;
                }
            }
            let x0_total: f64 = p.x0.iter().sum();
            if x0_total > 0.0 && base_x0_total > 0.0 {
                let f = base_x0_total / x0_total;
                if f != 1.0 {
                    for v in p.x0.iter_mut() {
                        *v *= f;
                    }
                }
            } else if x0_total > 0.0 {
                for v in p.x0.iter_mut() {
                    *v = 0.0;
                }
            }
            p.blocks.retain(|b| !b.is_empty());
            p.reindex();
        }
        out.push(p);
    }
    Ok((out, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{NetShape, ProcessBlock};

    fn params_with_alpha(year: i32, alpha: f64, beta: f64, x0: f64) -> ParameterSet {
        let shape = NetShape {
            n_areas: 1,
            n_items: 2,
            n_processes: 1,
        };
        let mut p = ParameterSet::zeros(year, shape);
        p.blocks.push(ProcessBlock {
            area: 0,
            process: 0,
            inputs: vec![(0, 0.5)],
            alpha: vec![(0, alpha), (1, alpha)],
            beta: Vec::new(),
        });
        p.blocks.push(ProcessBlock {
            area: 0,
            process: 0,
            ..Default::default()
        });
        p.blocks.pop();
        p.reindex();
        p.x0[0] = x0;
        let _ = beta;
        p
    }

    #[test]
    fn constant_series_is_identity() {
        let a = params_with_alpha(1992, 2.0, 0.0, 10.0);
        let b = params_with_alpha(1993, 2.0, 0.0, 10.0);
        let (out, _) = normalize_growth(&[a.clone(), b], 1992).unwrap();
        assert_eq!(out[1].alpha_at(0, 0, 0), 2.0);
        assert_eq!(out[1].x0[0], 10.0);
        assert_eq!(out[0].alpha_at(0, 0, 0), a.alpha_at(0, 0, 0));
    }

    #[test]
    fn doubled_alpha_is_halved_back() {
        let base = params_with_alpha(1992, 2.0, 0.0, 10.0);
        let grown = params_with_alpha(1993, 4.0, 0.0, 10.0);
        let (out, _) = normalize_growth(&[base, grown], 1992).unwrap();
        // factor = 4 / 8 = 0.5 per (area, process) group
        assert_eq!(out[1].alpha_at(0, 0, 0), 2.0);
        assert_eq!(out[1].alpha_at(0, 1, 0), 2.0);
        let base_total: f64 = out[0]
            .area_blocks(0)
            .iter()
            .flat_map(|b| b.alpha.iter().map(|&(_, v)| v))
            .sum();
        let norm_total: f64 = out[1]
            .area_blocks(0)
            .iter()
            .flat_map(|b| b.alpha.iter().map(|&(_, v)| v))
            .sum();
        assert!((base_total - norm_total).abs() < 1e-12);
    }

    #[test]
    fn x0_rescaled_to_global_base_total() {
        let base = params_with_alpha(1992, 2.0, 0.0, 10.0);
        let mut grown = params_with_alpha(1993, 2.0, 0.0, 0.0);
        grown.x0[0] = 14.0;
        grown.x0[1] = 6.0; // global total 20 = 2x base
        let (out, _) = normalize_growth(&[base, grown], 1992).unwrap();
        assert!((out[1].x0[0] - 7.0).abs() < 1e-12);
        assert!((out[1].x0[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn missing_base_year_errors() {
        let a = params_with_alpha(1993, 2.0, 0.0, 10.0);
        let b = params_with_alpha(1994, 2.0, 0.0, 10.0);
        assert!(normalize_growth(&[a, b], 1992).is_err());
    }
}
