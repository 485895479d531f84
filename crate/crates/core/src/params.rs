//! Sparse containers for one year of model parameters.
//!
//! The network is bipartite: production processes transform items inside an
//! area, trade moves items between areas within one item layer. Parameters
//! are stored in the shapes the simulation iterates over:
//!
//! * production is grouped into per-(area, process) blocks holding the
//!   input shares `nu`, the input-driven output rates `alpha` and the
//!   inputless output volumes `beta`;
//! * trade is one sparse layer per item, stored per exporter column so the
//!   export-share constraint (columns sum to one) is a column scan;
//! * the allocation shares `eta` and the initial availability `x0` are
//!   dense over sectors (an (area, item) pair).

use crate::error::{Error, Result};

/// Row-sum slack tolerated before a row counts as violating its constraint.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Deviation beyond which a repaired row is counted in the load report.
pub const REPAIR_REPORT_TOLERANCE: f64 = 1e-6;

/// Default floor below which share parameters are zeroed.
pub const DEFAULT_SHARE_FLOOR: f64 = 1e-3;

/// Network dimensions; sectors are addressed as `area * n_items + item`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetShape {
    pub n_areas: usize,
    pub n_items: usize,
    pub n_processes: usize,
}

impl NetShape {
    pub fn n_sectors(&self) -> usize {
        self.n_areas * self.n_items
    }

    #[inline]
    pub fn sector(&self, area: u32, item: u32) -> usize {
        area as usize * self.n_items + item as usize
    }

    #[inline]
    pub fn split(&self, sector: usize) -> (u32, u32) {
        ((sector / self.n_items) as u32, (sector % self.n_items) as u32)
    }
}

/// All production parameters of one (area, process) pair.
///
/// Entry lists are sorted by item index. Per the source data, `alpha` and
/// `beta` never overlap on the same output item.
#[derive(Debug, Clone, Default)]
pub struct ProcessBlock {
    pub area: u32,
    pub process: u32,
    /// (input item, nu): share of the item's production allocation fed in.
    pub inputs: Vec<(u32, f64)>,
    /// (output item, alpha): output per unit of total process input.
    pub alpha: Vec<(u32, f64)>,
    /// (output item, beta): absolute output volume, no inputs required.
    pub beta: Vec<(u32, f64)>,
}

impl ProcessBlock {
    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty() && self.alpha.is_empty() && self.beta.is_empty()
    }
}

/// One item layer of the trade matrix, stored per exporter.
///
/// `cols[exporter]` lists `(importer, share)` sorted by importer; the share
/// is the fraction of the exporter's for-trade volume the importer receives.
/// Storing layers separately keeps cross-item entries unrepresentable.
#[derive(Debug, Clone)]
pub struct TradeLayer {
    pub cols: Vec<Vec<(u32, f64)>>,
}

impl TradeLayer {
    pub fn empty(n_areas: usize) -> Self {
        TradeLayer {
            cols: vec![Vec::new(); n_areas],
        }
    }

    pub fn col_sum(&self, exporter: u32) -> f64 {
        self.cols[exporter as usize].iter().map(|&(_, v)| v).sum()
    }

    pub fn get(&self, importer: u32, exporter: u32) -> f64 {
        let col = &self.cols[exporter as usize];
        match col.binary_search_by_key(&importer, |&(a, _)| a) {
            Ok(pos) => col[pos].1,
            Err(_) => 0.0,
        }
    }

    /// Sets an entry, inserting or removing as needed to keep storage sparse.
    pub fn set(&mut self, importer: u32, exporter: u32, value: f64) {
        let col = &mut self.cols[exporter as usize];
        match col.binary_search_by_key(&importer, |&(a, _)| a) {
            Ok(pos) => {
                if value == 0.0 {
                    col.remove(pos);
                } else {
                    col[pos].1 = value;
                }
            }
            Err(pos) => {
                if value != 0.0 {
                    col.insert(pos, (importer, value));
                }
            }
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    /// Entries of one importer's row, scanning all exporter columns.
    pub fn row(&self, importer: u32) -> Vec<(u32, f64)> {
        let mut out = Vec::new();
        for (b, col) in self.cols.iter().enumerate() {
            if let Ok(pos) = col.binary_search_by_key(&importer, |&(a, _)| a) {
                out.push((b as u32, col[pos].1));
            }
        }
        out
    }
}

/// One year of model parameters in sparse form.
#[derive(Debug, Clone)]
pub struct ParameterSet {
    pub year: i32,
    pub shape: NetShape,
    /// Non-empty blocks sorted by (area, process).
    pub blocks: Vec<ProcessBlock>,
    /// Per area: `[start, end)` range into `blocks`.
    area_blocks: Vec<(u32, u32)>,
    /// Per item: the trade layer.
    pub trade: Vec<TradeLayer>,
    pub eta_exp: Vec<f64>,
    pub eta_prod: Vec<f64>,
    pub x0: Vec<f64>,
}

/// Counts of repairs and drops performed while building a `ParameterSet`.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct LoadReport {
    /// Trade exporter columns renormalized because their sum was off by
    /// more than [`REPAIR_REPORT_TOLERANCE`].
    pub renormalized_trade_cols: usize,
    /// (area, input item) nu sums rescaled down to 1.
    pub renormalized_nu_rows: usize,
    /// Sectors whose eta_exp + eta_prod exceeded 1 and were rescaled.
    pub renormalized_eta_sectors: usize,
}

/// Counts from [`ParameterSet::threshold_small_shares`].
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct ThresholdReport {
    pub zeroed_nu: usize,
    pub zeroed_trade: usize,
    pub zeroed_eta: usize,
    /// Trade columns renormalized after zeroing.
    pub renormalized_trade_cols: usize,
    /// Trade columns that lost all entries to the floor.
    pub emptied_trade_cols: usize,
}

impl ParameterSet {
    /// An all-zero parameter set for the given shape.
    pub fn zeros(year: i32, shape: NetShape) -> Self {
        ParameterSet {
            year,
            shape,
            blocks: Vec::new(),
            area_blocks: vec![(0, 0); shape.n_areas],
            trade: (0..shape.n_items)
                .map(|_| TradeLayer::empty(shape.n_areas))
                .collect(),
            eta_exp: vec![0.0; shape.n_sectors()],
            eta_prod: vec![0.0; shape.n_sectors()],
            x0: vec![0.0; shape.n_sectors()],
        }
    }

    /// Builds the per-area block index; call after editing `blocks`.
    pub fn reindex(&mut self) {
        self.blocks
            .sort_by_key(|b| (b.area, b.process));
        self.blocks.retain(|b| !b.is_empty());
        let mut ranges = vec![(0u32, 0u32); self.shape.n_areas];
        let mut start = 0usize;
        while start < self.blocks.len() {
            let area = self.blocks[start].area;
            let mut end = start;
            while end < self.blocks.len() && self.blocks[end].area == area {
                end += 1;
            }
            ranges[area as usize] = (start as u32, end as u32);
            start = end;
        }
        self.area_blocks = ranges;
    }

    pub fn area_blocks(&self, area: u32) -> &[ProcessBlock] {
        let (s, e) = self.area_blocks[area as usize];
        &self.blocks[s as usize..e as usize]
    }

    pub fn area_blocks_mut(&mut self, area: u32) -> &mut [ProcessBlock] {
        let (s, e) = self.area_blocks[area as usize];
        &mut self.blocks[s as usize..e as usize]
    }

    pub fn block(&self, area: u32, process: u32) -> Option<&ProcessBlock> {
        self.area_blocks(area)
            .iter()
            .find(|b| b.process == process)
    }

    pub fn alpha_at(&self, area: u32, item: u32, process: u32) -> f64 {
        self.block(area, process)
            .and_then(|b| lookup(&b.alpha, item))
            .unwrap_or(0.0)
    }

    pub fn beta_at(&self, area: u32, item: u32, process: u32) -> f64 {
        self.block(area, process)
            .and_then(|b| lookup(&b.beta, item))
            .unwrap_or(0.0)
    }

    pub fn nu_at(&self, area: u32, item: u32, process: u32) -> f64 {
        self.block(area, process)
            .and_then(|b| lookup(&b.inputs, item))
            .unwrap_or(0.0)
    }

    /// Sum of beta outputs toward one sector, the production volume used to
    /// rank primary-product shocks.
    pub fn beta_total(&self, area: u32, item: u32) -> f64 {
        self.area_blocks(area)
            .iter()
            .filter_map(|b| lookup(&b.beta, item))
            .sum()
    }

    /// True if any input-driven (alpha) process outputs into the sector.
    pub fn has_alpha_output(&self, area: u32, item: u32) -> bool {
        self.area_blocks(area)
            .iter()
            .any(|b| lookup(&b.alpha, item).is_some())
    }

    /// Checks every structural invariant, erroring on the first violation.
    pub fn validate(&self) -> Result<()> {
        let shape = self.shape;
        for block in &self.blocks {
            for &(i, v) in block
                .inputs
                .iter()
                .chain(block.alpha.iter())
                .chain(block.beta.iter())
            {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::validation(format!(
                        "non-finite or negative production entry {v} at area {} process {} item {i}",
                        block.area, block.process
                    )));
                }
            }
            for &(i, a) in &block.alpha {
                if a > 0.0 && lookup(&block.beta, i).map_or(false, |b| b > 0.0) {
                    return Err(Error::validation(format!(
                        "alpha and beta both positive for area {} item {i} process {}",
                        block.area, block.process
                    )));
                }
            }
        }
        // nu row sums per (area, input item)
        let mut nu_sums = vec![0.0f64; shape.n_sectors()];
        for block in &self.blocks {
            for &(j, v) in &block.inputs {
                nu_sums[shape.sector(block.area, j)] += v;
            }
        }
        for (s, sum) in nu_sums.iter().enumerate() {
            if *sum > 1.0 + SUM_TOLERANCE {
                let (a, j) = shape.split(s);
                return Err(Error::validation(format!(
                    "nu shares for area {a} item {j} sum to {sum} > 1"
                )));
            }
        }
        for (i, layer) in self.trade.iter().enumerate() {
            for (b, col) in layer.cols.iter().enumerate() {
                let mut prev: Option<u32> = None;
                let mut sum = 0.0;
                for &(a, v) in col {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(Error::validation(format!(
                            "non-finite or negative trade share for item {i} exporter {b}"
                        )));
                    }
                    if prev.map_or(false, |p| p >= a) {
                        return Err(Error::validation(format!(
                            "trade column for item {i} exporter {b} not sorted/unique"
                        )));
                    }
                    prev = Some(a);
                    sum += v;
                }
                if !col.is_empty() && (sum - 1.0).abs() > SUM_TOLERANCE {
                    return Err(Error::validation(format!(
                        "trade shares for item {i} exporter {b} sum to {sum}, expected 1"
                    )));
                }
            }
        }
        for s in 0..shape.n_sectors() {
            let (e, p) = (self.eta_exp[s], self.eta_prod[s]);
            if !(e.is_finite() && p.is_finite() && e >= 0.0 && p >= 0.0) {
                return Err(Error::validation(format!(
                    "negative or non-finite eta at sector {s}"
                )));
            }
            if e + p > 1.0 + SUM_TOLERANCE {
                let (a, i) = shape.split(s);
                return Err(Error::validation(format!(
                    "eta_exp + eta_prod = {} > 1 for area {a} item {i}",
                    e + p
                )));
            }
            if !(self.x0[s].is_finite() && self.x0[s] >= 0.0) {
                return Err(Error::validation(format!(
                    "negative or non-finite x0 at sector {s}"
                )));
            }
        }
        Ok(())
    }

    /// Repairs rows that violate their sum constraints, as data rows carry
    /// rounding noise. Returns what was touched beyond report tolerance.
    pub fn repair_stochasticity(&mut self) -> LoadReport {
        let mut report = LoadReport::default();
        for layer in &mut self.trade {
            for col in &mut layer.cols {
                let sum: f64 = col.iter().map(|&(_, v)| v).sum();
                if col.is_empty() || sum == 0.0 {
                    col.clear();
                    continue;
                }
                if sum != 1.0 {
                    if (sum - 1.0).abs() > REPAIR_REPORT_TOLERANCE {
                        report.renormalized_trade_cols += 1;
                    }
                    for e in col.iter_mut() {
                        e.1 /= sum;
                    }
                }
            }
        }
        // nu: only sums above 1 are repaired (below 1 is a valid leftover).
        let shape = self.shape;
        let mut nu_sums = vec![0.0f64; shape.n_sectors()];
        for block in &self.blocks {
            for &(j, v) in &block.inputs {
                nu_sums[shape.sector(block.area, j)] += v;
            }
        }
        let mut scale = vec![1.0f64; shape.n_sectors()];
        let mut scaled_rows = 0;
        for (s, sum) in nu_sums.iter().enumerate() {
            if *sum > 1.0 + SUM_TOLERANCE {
                scale[s] = 1.0 / sum;
                if *sum > 1.0 + REPAIR_REPORT_TOLERANCE {
                    scaled_rows += 1;
                }
            }
        }
        if scale.iter().any(|&f| f != 1.0) {
            for block in &mut self.blocks {
                let area = block.area;
                for e in block.inputs.iter_mut() {
                    e.1 *= scale[shape.sector(area, e.0)];
                }
            }
        }
        report.renormalized_nu_rows = scaled_rows;
        for s in 0..shape.n_sectors() {
            let sum = self.eta_exp[s] + self.eta_prod[s];
            if sum > 1.0 + SUM_TOLERANCE {
                self.eta_exp[s] /= sum;
                self.eta_prod[s] /= sum;
                if sum > 1.0 + REPAIR_REPORT_TOLERANCE {
                    report.renormalized_eta_sectors += 1;
                }
            }
        }
        report
    }

    /// Zeroes every share entry (nu, trade, eta) strictly below `floor`,
    /// then renormalizes affected trade columns back to sum one. Output
    /// rates and x0 are not shares and pass through untouched. Idempotent.
    pub fn threshold_small_shares(&self, floor: f64) -> (ParameterSet, ThresholdReport) {
        let mut out = self.clone();
        let mut report = ThresholdReport::default();
        for block in &mut out.blocks {
            let before = block.inputs.len();
            block.inputs.retain(|&(_, v)| v >= floor);
            report.zeroed_nu += before - block.inputs.len();
        }
        out.blocks.retain(|b| !b.is_empty());
        out.reindex();
        for layer in &mut out.trade {
            for col in &mut layer.cols {
                let before = col.len();
                col.retain(|&(_, v)| v >= floor);
                let zeroed = before - col.len();
                report.zeroed_trade += zeroed;
                if zeroed > 0 {
                    if col.is_empty() {
                        report.emptied_trade_cols += 1;
                    } else {
                        let sum: f64 = col.iter().map(|&(_, v)| v).sum();
                        for e in col.iter_mut() {
                            e.1 /= sum;
                        }
                        report.renormalized_trade_cols += 1;
                    }
                }
            }
        }
        for s in 0..out.shape.n_sectors() {
            if out.eta_exp[s] > 0.0 && out.eta_exp[s] < floor {
                out.eta_exp[s] = 0.0;
                report.zeroed_eta += 1;
            }
            if out.eta_prod[s] > 0.0 && out.eta_prod[s] < floor {
                out.eta_prod[s] = 0.0;
                report.zeroed_eta += 1;
            }
        }
        (out, report)
    }

    /// Total stored entries across all parameter families.
    pub fn nnz(&self) -> usize {
        let prod: usize = self
            .blocks
            .iter()
            .map(|b| b.inputs.len() + b.alpha.len() + b.beta.len())
            .sum();
        let trade: usize = self.trade.iter().map(|l| l.nnz()).sum();
        let dense = self
            .eta_exp
            .iter()
            .chain(self.eta_prod.iter())
            .chain(self.x0.iter())
            .filter(|&&v| v != 0.0)
            .count();
        prod + trade + dense
    }
}

#[inline]
fn lookup(entries: &[(u32, f64)], key: u32) -> Option<f64> {
    entries
        .binary_search_by_key(&key, |&(k, _)| k)
        .ok()
        .map(|pos| entries[pos].1)
}

/// Inserts or overwrites a sorted (key, value) entry.
pub(crate) fn upsert(entries: &mut Vec<(u32, f64)>, key: u32, value: f64) {
    match entries.binary_search_by_key(&key, |&(k, _)| k) {
        Ok(pos) => entries[pos].1 = value,
        Err(pos) => entries.insert(pos, (key, value)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_area_params() -> ParameterSet {
        let shape = NetShape {
            n_areas: 2,
            n_items: 2,
            n_processes: 1,
        };
        let mut p = ParameterSet::zeros(2020, shape);
        p.blocks.push(ProcessBlock {
            area: 0,
            process: 0,
            inputs: vec![(0, 0.5)],
            alpha: vec![(1, 2.0)],
            beta: vec![(0, 5.0)],
        });
        p.reindex();
        p.trade[0].cols[0] = vec![(1, 1.0)];
        p.eta_exp[shape.sector(0, 0)] = 0.4;
        p.eta_prod[shape.sector(0, 0)] = 0.5;
        p.x0[shape.sector(0, 0)] = 10.0;
        p
    }

    #[test]
    fn validates_clean_params() {
        two_area_params().validate().unwrap();
    }

    #[test]
    fn rejects_alpha_beta_overlap() {
        let mut p = two_area_params();
        p.blocks[0].alpha = vec![(0, 1.0)];
        assert!(p.validate().is_err());
    }

    #[test]
    fn rejects_bad_trade_sum() {
        let mut p = two_area_params();
        p.trade[0].cols[0] = vec![(1, 0.5)];
        assert!(p.validate().is_err());
        let report = p.repair_stochasticity();
        assert_eq!(report.renormalized_trade_cols, 1);
        p.validate().unwrap();
        assert_eq!(p.trade[0].get(1, 0), 1.0);
    }

    #[test]
    fn threshold_zeroes_tiny_trade_share() {
        let mut p = two_area_params();
        p.trade[0].cols[0] = vec![(0, 1e-90), (1, 1.0 - 1e-90)];
        let (t, report) = p.threshold_small_shares(1e-3);
        assert_eq!(report.zeroed_trade, 1);
        assert_eq!(t.trade[0].get(0, 0), 0.0);
        assert_eq!(t.trade[0].get(1, 0), 1.0);
    }

    #[test]
    fn threshold_keeps_boundary_value() {
        let mut p = two_area_params();
        p.trade[0].cols[0] = vec![(0, 1e-3), (1, 1.0 - 1e-3)];
        let (t, report) = p.threshold_small_shares(1e-3);
        assert_eq!(report.zeroed_trade, 0);
        assert_eq!(t.trade[0].get(0, 0), 1e-3);
    }

    #[test]
    fn threshold_renormalizes_rows() {
        let mut p = two_area_params();
        p.trade[0].cols[0] = vec![(0, 5e-4), (1, 0.9995)];
        let (t, _) = p.threshold_small_shares(1e-3);
        assert_eq!(t.trade[0].get(1, 0), 1.0);
        assert_eq!(t.trade[0].get(0, 0), 0.0);
        // idempotent
        let (t2, r2) = t.threshold_small_shares(1e-3);
        assert_eq!(r2.zeroed_trade + r2.zeroed_nu + r2.zeroed_eta, 0);
        assert_eq!(t2.trade[0].get(1, 0), 1.0);
    }

    #[test]
    fn trade_layer_set_and_row() {
        let mut layer = TradeLayer::empty(3);
        layer.set(1, 0, 0.25);
        layer.set(0, 0, 0.75);
        layer.set(1, 2, 1.0);
        assert_eq!(layer.get(1, 0), 0.25);
        assert_eq!(layer.row(1), vec![(0, 0.25), (2, 1.0)]);
        layer.set(1, 0, 0.0);
        assert_eq!(layer.get(1, 0), 0.0);
        assert_eq!(layer.nnz(), 2);
    }
}
