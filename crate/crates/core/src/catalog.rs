//! Immutable registries of areas, items, processes, commodity groups,
//! populations and HDI categories.
//!
//! All other modules address the network through the dense indices handed
//! out here. A `Catalog` is built once from a directory of CSV tables and
//! then shared read-only across concurrent runs.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Commodity group whose items are counted in 1000 heads instead of tonnes.
pub const LIVE_ANIMALS_GROUP: &str = "Live animals";

/// Group column value that explicitly opts an item out of substitution.
pub const UNGROUPED: &str = "ungrouped";

#[derive(Debug, Clone)]
pub struct AreaInfo {
    pub code: String,
    pub name: String,
}

#[derive(Debug, Clone)]
pub struct ItemInfo {
    pub code: String,
    pub name: String,
    /// Index into `Catalog::groups`; `None` for explicitly ungrouped items.
    pub group: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct ProcessInfo {
    pub code: String,
    pub name: String,
}

/// Human Development Index bands as published, plus a bucket for areas the
/// index does not cover (former states, aggregates such as RoW, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HdiCategory {
    Low,
    Medium,
    High,
    VeryHigh,
    NotCategorized,
}

impl HdiCategory {
    pub fn parse(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase();
        Ok(match norm.as_str() {
            "low" | "low development" => HdiCategory::Low,
            "medium" | "medium development" => HdiCategory::Medium,
            "high" | "high development" => HdiCategory::High,
            "very high" | "very high development" => HdiCategory::VeryHigh,
            "" | "not categorized" | "not categorised" => HdiCategory::NotCategorized,
            other => {
                return Err(Error::validation(format!(
                    "unknown HDI category '{other}'"
                )))
            }
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            HdiCategory::Low => "low",
            HdiCategory::Medium => "medium",
            HdiCategory::High => "high",
            HdiCategory::VeryHigh => "very high",
            HdiCategory::NotCategorized => "not categorized",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HdiEntry {
    pub category: HdiCategory,
    pub value: Option<f64>,
}

/// Immutable registry of the network dimensions and per-area/item metadata.
#[derive(Debug, Clone)]
pub struct Catalog {
    areas: Vec<AreaInfo>,
    items: Vec<ItemInfo>,
    processes: Vec<ProcessInfo>,
    groups: Vec<String>,
    area_index: HashMap<String, u32>,
    item_index: HashMap<String, u32>,
    process_index: HashMap<String, u32>,
    /// Persons per area (year-2020 counts); `None` when the table has no row.
    population: Vec<Option<f64>>,
    hdi: Vec<HdiEntry>,
}

impl Catalog {
    pub fn n_areas(&self) -> usize {
        self.areas.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn n_processes(&self) -> usize {
        self.processes.len()
    }

    pub fn areas(&self) -> &[AreaInfo] {
        &self.areas
    }

    pub fn items(&self) -> &[ItemInfo] {
        &self.items
    }

    pub fn processes(&self) -> &[ProcessInfo] {
        &self.processes
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn area_idx(&self, code: &str) -> Option<u32> {
        self.area_index.get(code).copied()
    }

    pub fn item_idx(&self, code: &str) -> Option<u32> {
        self.item_index.get(code).copied()
    }

    pub fn process_idx(&self, code: &str) -> Option<u32> {
        self.process_index.get(code).copied()
    }

    pub fn group_of(&self, item: u32) -> Option<u32> {
        self.items[item as usize].group
    }

    /// True when both items carry the same (non-ungrouped) commodity group.
    pub fn same_group(&self, i: u32, j: u32) -> bool {
        match (self.group_of(i), self.group_of(j)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// Items of `group`, in item index order.
    pub fn group_members(&self, group: u32) -> Vec<u32> {
        (0..self.items.len() as u32)
            .filter(|&i| self.group_of(i) == Some(group))
            .collect()
    }

    pub fn population_opt(&self, area: u32) -> Option<f64> {
        self.population[area as usize]
    }

    /// Population of a loss recipient; erroring out names the area.
    pub fn population(&self, area: u32) -> Result<f64> {
        self.population[area as usize].ok_or_else(|| {
            Error::validation(format!(
                "no population recorded for area '{}' used as loss recipient",
                self.areas[area as usize].code
            ))
        })
    }

    pub fn hdi(&self, area: u32) -> HdiEntry {
        self.hdi[area as usize]
    }

    /// Per-capita unit label for an item ("kg" for tonnage items, "head"
    /// for live animals, which the source data counts in 1000 heads).
    pub fn per_capita_unit(&self, item: u32) -> &'static str {
        match self.items[item as usize].group {
            Some(g) if self.groups[g as usize] == LIVE_ANIMALS_GROUP => "head",
            _ => "kg",
        }
    }
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::data(format!("missing file {}", path.display())),
            _ => Error::csv(path, e),
        })
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

/// Loads the six catalog tables from `dir`:
/// `areas.csv(code,name)`, `items.csv(code,name,group)`,
/// `processes.csv(code,name)`, `population.csv(area,persons)`,
/// `hdi.csv(area,category,value)`.
pub fn load_catalog(dir: impl AsRef<Path>) -> Result<Catalog> {
    let dir = dir.as_ref();

    let mut areas = Vec::new();
    let mut area_index = HashMap::new();
    let path = dir.join("areas.csv");
    for rec in open_reader(&path)?.records() {
        let rec = rec.map_err(|e| Error::csv(&path, e))?;
        let code = rec.get(0).unwrap_or("").to_string();
        let name = rec.get(1).unwrap_or("").to_string();
        if code.is_empty() {
            return Err(Error::validation(format!(
                "{}:{}: empty area code",
                path.display(),
                record_line(&rec)
            )));
        }
        if area_index.insert(code.clone(), areas.len() as u32).is_some() {
            return Err(Error::validation(format!(
                "{}:{}: duplicate area code '{}'",
                path.display(),
                record_line(&rec),
                code
            )));
        }
        areas.push(AreaInfo { code, name });
    }

    let mut groups: Vec<String> = Vec::new();
    let mut group_index: HashMap<String, u32> = HashMap::new();
    let mut items = Vec::new();
    let mut item_index = HashMap::new();
    let path = dir.join("items.csv");
    for rec in open_reader(&path)?.records() {
        let rec = rec.map_err(|e| Error::csv(&path, e))?;
        let code = rec.get(0).unwrap_or("").to_string();
        let name = rec.get(1).unwrap_or("").to_string();
        let group_name = rec.get(2).unwrap_or("").to_string();
        if code.is_empty() {
            return Err(Error::validation(format!(
                "{}:{}: empty item code",
                path.display(),
                record_line(&rec)
            )));
        }
        if group_name.is_empty() {
            return Err(Error::validation(format!(
                "item '{}' has no commodity group (use '{}' to opt out explicitly)",
                code, UNGROUPED
            )));
        }
        let group = if group_name.eq_ignore_ascii_case(UNGROUPED) {
            None
        } else {
            Some(*group_index.entry(group_name.clone()).or_insert_with(|| {
                groups.push(group_name.clone());
                (groups.len() - 1) as u32
            }))
        };
        if item_index.insert(code.clone(), items.len() as u32).is_some() {
            return Err(Error::validation(format!(
                "{}:{}: duplicate item code '{}'",
                path.display(),
                record_line(&rec),
                code
            )));
        }
        items.push(ItemInfo { code, name, group });
    }

    let mut processes = Vec::new();
    let mut process_index = HashMap::new();
    let path = dir.join("processes.csv");
    for rec in open_reader(&path)?.records() {
        let rec = rec.map_err(|e| Error::csv(&path, e))?;
        let code = rec.get(0).unwrap_or("").to_string();
        let name = rec.get(1).unwrap_or("").to_string();
        if code.is_empty() {
            return Err(Error::validation(format!(
                "{}:{}: empty process code",
                path.display(),
                record_line(&rec)
            )));
        }
        if process_index
            .insert(code.clone(), processes.len() as u32)
            .is_some()
        {
            return Err(Error::validation(format!(
                "{}:{}: duplicate process code '{}'",
                path.display(),
                record_line(&rec),
                code
            )));
        }
        processes.push(ProcessInfo { code, name });
    }

    let mut population = vec![None; areas.len()];
    let path = dir.join("population.csv");
    for rec in open_reader(&path)?.records() {
        let rec = rec.map_err(|e| Error::csv(&path, e))?;
        let code = rec.get(0).unwrap_or("");
        let area = *area_index.get(code).ok_or_else(|| {
            Error::data(format!(
                "{}:{}: unknown area '{}'",
                path.display(),
                record_line(&rec),
                code
            ))
        })?;
        let persons: f64 = rec
            .get(1)
            .unwrap_or("")
            .parse()
            .map_err(|_| {
                Error::data(format!(
                    "{}:{}: unparsable population",
                    path.display(),
                    record_line(&rec)
                ))
            })?;
        if !(persons > 0.0) {
            return Err(Error::validation(format!(
                "{}:{}: population for area '{}' must be strictly positive, got {}",
                path.display(),
                record_line(&rec),
                code,
                persons
            )));
        }
        population[area as usize] = Some(persons);
    }

    let mut hdi = vec![
        HdiEntry {
            category: HdiCategory::NotCategorized,
            value: None,
        };
        areas.len()
    ];
    let path = dir.join("hdi.csv");
    for rec in open_reader(&path)?.records() {
        let rec = rec.map_err(|e| Error::csv(&path, e))?;
        let code = rec.get(0).unwrap_or("");
        let area = *area_index.get(code).ok_or_else(|| {
            Error::data(format!(
                "{}:{}: unknown area '{}'",
                path.display(),
                record_line(&rec),
                code
            ))
        })?;
        let category = HdiCategory::parse(rec.get(1).unwrap_or(""))?;
        let raw = rec.get(2).unwrap_or("").trim();
        let value = if raw.is_empty() || raw == "--" {
            None
        } else {
            let v: f64 = raw.parse().map_err(|_| {
                Error::data(format!(
                    "{}:{}: unparsable HDI value",
                    path.display(),
                    record_line(&rec)
                ))
            })?;
            Some(v)
        };
        hdi[area as usize] = HdiEntry { category, value };
    }

    Ok(Catalog {
        areas,
        items,
        processes,
        groups,
        area_index,
        item_index,
        process_index,
        population,
        hdi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_catalog_files(dir: &Path, population_override: Option<&str>) {
        fs::write(dir.join("areas.csv"), "code,name\nAAA,Aland\nBBB,Bland\n").unwrap();
        fs::write(
            dir.join("items.csv"),
            "code,name,group\nwheat,Wheat,Cereals\nrice,Rice,Cereals\ncattle,Cattle,Live animals\n",
        )
        .unwrap();
        fs::write(dir.join("processes.csv"), "code,name\np0,Farming\n").unwrap();
        fs::write(
            dir.join("population.csv"),
            population_override.unwrap_or("area,persons\nAAA,1000000\nBBB,2000000\n"),
        )
        .unwrap();
        fs::write(
            dir.join("hdi.csv"),
            "area,category,value\nAAA,very high,0.93\n",
        )
        .unwrap();
    }

    #[test]
    fn loads_minimal_catalog() {
        let dir = tempfile::tempdir().unwrap();
        write_catalog_files(dir.path(), None);
        let cat = load_catalog(dir.path()).unwrap();
        assert_eq!(cat.n_areas(), 2);
        assert_eq!(cat.n_items(), 3);
        assert_eq!(cat.n_processes(), 1);
        assert!(cat.same_group(0, 1));
        assert!(!cat.same_group(0, 2));
        assert_eq!(cat.per_capita_unit(0), "kg");
        assert_eq!(cat.per_capita_unit(2), "head");
        // BBB has no hdi row and falls back to "not categorized".
        assert_eq!(cat.hdi(1).category, HdiCategory::NotCategorized);
        assert_eq!(cat.population(1).unwrap(), 2_000_000.0);
    }

    #[test]
    fn rejects_zero_population() {
        let dir = tempfile::tempdir().unwrap();
        write_catalog_files(dir.path(), Some("area,persons\nAAA,0\n"));
        let err = load_catalog(dir.path()).unwrap_err();
        assert!(err.is_validation(), "{err}");
    }

    #[test]
    fn rejects_duplicate_area() {
        let dir = tempfile::tempdir().unwrap();
        write_catalog_files(dir.path(), None);
        fs::write(dir.path().join("areas.csv"), "code,name\nAAA,A\nAAA,A2\n").unwrap();
        assert!(load_catalog(dir.path()).is_err());
    }

    #[test]
    fn rejects_item_without_group() {
        let dir = tempfile::tempdir().unwrap();
        write_catalog_files(dir.path(), None);
        fs::write(
            dir.path().join("items.csv"),
            "code,name,group\nwheat,Wheat,\n",
        )
        .unwrap();
        let err = load_catalog(dir.path()).unwrap_err();
        assert!(format!("{err}").contains("wheat"));
    }

    #[test]
    fn missing_file_is_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_catalog(dir.path()).unwrap_err();
        assert!(!err.is_validation());
    }
}
