//! CSV ingestion and serialization for yearly parameter sets.
//!
//! One directory per year, one long-form file per parameter family:
//!
//! ```text
//! <data_dir>/<year>/alpha.csv   area,item,process,value
//! <data_dir>/<year>/beta.csv    area,item,process,value
//! <data_dir>/<year>/nu.csv      area,item,process,value
//! <data_dir>/<year>/trade.csv   item,importer,exporter,share
//! <data_dir>/<year>/eta.csv     area,item,eta_exp,eta_prod
//! <data_dir>/<year>/x0.csv      area,item,value
//! ```
//!
//! Trade may alternatively be split into `trade_<item>.csv` files with
//! columns `importer,exporter,share`. All codes resolve against the
//! catalog; absent rows are zeros.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::params::{upsert, LoadReport, NetShape, ParameterSet, ProcessBlock};

pub fn year_dir(data_dir: &Path, year: i32) -> PathBuf {
    data_dir.join(year.to_string())
}

struct Resolver<'a> {
    catalog: &'a Catalog,
    path: PathBuf,
}

impl<'a> Resolver<'a> {
    fn fail(&self, line: u64, what: &str, code: &str) -> Error {
        Error::data(format!(
            "{}:{}: unknown {what} '{code}'",
            self.path.display(),
            line
        ))
    }

    fn area(&self, rec: &csv::StringRecord, idx: usize) -> Result<u32> {
        let code = rec.get(idx).unwrap_or("");
        self.catalog
            .area_idx(code)
            .ok_or_else(|| self.fail(line_of(rec), "area", code))
    }

    fn item(&self, rec: &csv::StringRecord, idx: usize) -> Result<u32> {
        let code = rec.get(idx).unwrap_or("");
        self.catalog
            .item_idx(code)
            .ok_or_else(|| self.fail(line_of(rec), "item", code))
    }

    fn process(&self, rec: &csv::StringRecord, idx: usize) -> Result<u32> {
        let code = rec.get(idx).unwrap_or("");
        self.catalog
            .process_idx(code)
            .ok_or_else(|| self.fail(line_of(rec), "process", code))
    }

    fn value(&self, rec: &csv::StringRecord, idx: usize) -> Result<f64> {
        let raw = rec.get(idx).unwrap_or("");
        let v: f64 = raw.parse().map_err(|_| {
            Error::data(format!(
                "{}:{}: unparsable value '{raw}'",
                self.path.display(),
                line_of(rec)
            ))
        })?;
        if !v.is_finite() || v < 0.0 {
            return Err(Error::validation(format!(
                "{}:{}: negative or non-finite value {v}",
                self.path.display(),
                line_of(rec)
            )));
        }
        Ok(v)
    }
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::data(format!("missing file {}", path.display())),
            _ => Error::csv(path, e),
        })
}

/// Loads one year of parameters, repairing stochastic rows that carry
/// rounding noise and reporting every repair.
pub fn load_parameter_set(
    data_dir: impl AsRef<Path>,
    year: i32,
    catalog: &Catalog,
) -> Result<(ParameterSet, LoadReport)> {
    let dir = year_dir(data_dir.as_ref(), year);
    if !dir.is_dir() {
        return Err(Error::data(format!(
            "no parameter directory for year {year} at {}",
            dir.display()
        )));
    }
    let shape = NetShape {
        n_areas: catalog.n_areas(),
        n_items: catalog.n_items(),
        n_processes: catalog.n_processes(),
    };
    let mut params = ParameterSet::zeros(year, shape);
    let mut block_map: HashMap<(u32, u32), ProcessBlock> = HashMap::new();

    for (family, file) in [(Family::Alpha, "alpha.csv"), (Family::Beta, "beta.csv"), (Family::Nu, "nu.csv")] {
        let path = dir.join(file);
        let res = Resolver {
            catalog,
            path: path.clone(),
        };
        for rec in reader(&path)?.records() {
            let rec = rec.map_err(|e| Error::csv(&path, e))?;
            let area = res.area(&rec, 0)?;
            let item = res.item(&rec, 1)?;
            let process = res.process(&rec, 2)?;
            let value = res.value(&rec, 3)?;
            if value == 0.0 {
                continue;
            }
            let block = block_map
                .entry((area, process))
                .or_insert_with(|| ProcessBlock {
                    area,
                    process,
                    ..Default::default()
                });
            let list = match family {
                Family::Alpha => &mut block.alpha,
                Family::Beta => &mut block.beta,
                Family::Nu => &mut block.inputs,
            };
            upsert(list, item, value);
        }
    }

    // alpha/beta exclusivity, checked with file context before validate()
    for block in block_map.values() {
        for &(i, a) in &block.alpha {
            if a > 0.0
                && block
                    .beta
                    .binary_search_by_key(&i, |&(k, _)| k)
                    .map_or(false, |pos| block.beta[pos].1 > 0.0)
            {
                return Err(Error::validation(format!(
                    "alpha and beta both positive for area '{}' item '{}' process '{}' in {}",
                    catalog.areas()[block.area as usize].code,
                    catalog.items()[i as usize].code,
                    catalog.processes()[block.process as usize].code,
                    dir.display()
                )));
            }
        }
    }
    params.blocks = block_map.into_values().collect();
    params.reindex();

    load_trade(&dir, catalog, &mut params)?;

    let path = dir.join("eta.csv");
    let res = Resolver {
        catalog,
        path: path.clone(),
    };
    for rec in reader(&path)?.records() {
        let rec = rec.map_err(|e| Error::csv(&path, e))?;
        let area = res.area(&rec, 0)?;
        let item = res.item(&rec, 1)?;
        let s = shape.sector(area, item);
        params.eta_exp[s] = res.value(&rec, 2)?;
        params.eta_prod[s] = res.value(&rec, 3)?;
    }

    let path = dir.join("x0.csv");
    let res = Resolver {
        catalog,
        path: path.clone(),
    };
    for rec in reader(&path)?.records() {
        let rec = rec.map_err(|e| Error::csv(&path, e))?;
        let area = res.area(&rec, 0)?;
        let item = res.item(&rec, 1)?;
        params.x0[shape.sector(area, item)] = res.value(&rec, 2)?;
    }

    let report = params.repair_stochasticity();
    params.validate()?;
    Ok((params, report))
}

enum Family {
    Alpha,
    Beta,
    Nu,
}

fn load_trade(dir: &Path, catalog: &Catalog, params: &mut ParameterSet) -> Result<()> {
    let combined = dir.join("trade.csv");
    if combined.is_file() {
        let res = Resolver {
            catalog,
            path: combined.clone(),
        };
        for rec in reader(&combined)?.records() {
            let rec = rec.map_err(|e| Error::csv(&combined, e))?;
            let item = res.item(&rec, 0)?;
            let importer = res.area(&rec, 1)?;
            let exporter = res.area(&rec, 2)?;
            let share = res.value(&rec, 3)?;
            if share > 0.0 {
                params.trade[item as usize].set(importer, exporter, share);
            }
        }
        return Ok(());
    }
    // split variant: one file per item, absent files mean no trade
    let mut any = false;
    for (idx, item) in catalog.items().iter().enumerate() {
        let path = dir.join(format!("trade_{}.csv", item.code));
        if !path.is_file() {
            continue;
        }
        any = true;
        let res = Resolver {
            catalog,
            path: path.clone(),
        };
        for rec in reader(&path)?.records() {
            let rec = rec.map_err(|e| Error::csv(&path, e))?;
            let importer = res.area(&rec, 0)?;
            let exporter = res.area(&rec, 1)?;
            let share = res.value(&rec, 2)?;
            if share > 0.0 {
                params.trade[idx].set(importer, exporter, share);
            }
        }
    }
    if !any {
        // an explicitly empty trade.csv is how autarky fixtures are written,
        // so only the absence of every trade file is an error
        return Err(Error::data(format!(
            "no trade.csv or trade_<item>.csv files in {}",
            dir.display()
        )));
    }
    Ok(())
}

/// Writes a parameter set back out in the combined-trade layout.
/// `load_parameter_set` of the result reproduces the input to within
/// rounding of the stochastic-row repair.
pub fn write_parameter_set(
    data_dir: impl AsRef<Path>,
    params: &ParameterSet,
    catalog: &Catalog,
) -> Result<()> {
    let dir = year_dir(data_dir.as_ref(), params.year);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let area = |a: u32| catalog.areas()[a as usize].code.as_str();
    let item = |i: u32| catalog.items()[i as usize].code.as_str();
    let process = |p: u32| catalog.processes()[p as usize].code.as_str();

    let mut alpha = String::from("area,item,process,value\n");
    let mut beta = String::from("area,item,process,value\n");
    let mut nu = String::from("area,item,process,value\n");
    for b in &params.blocks {
        for &(i, v) in &b.alpha {
            alpha.push_str(&format!("{},{},{},{v}\n", area(b.area), item(i), process(b.process)));
        }
        for &(i, v) in &b.beta {
            beta.push_str(&format!("{},{},{},{v}\n", area(b.area), item(i), process(b.process)));
        }
        for &(j, v) in &b.inputs {
            nu.push_str(&format!("{},{},{},{v}\n", area(b.area), item(j), process(b.process)));
        }
    }

    let mut trade = String::from("item,importer,exporter,share\n");
    for (i, layer) in params.trade.iter().enumerate() {
        for (b, col) in layer.cols.iter().enumerate() {
            for &(a, v) in col {
                trade.push_str(&format!(
                    "{},{},{},{v}\n",
                    item(i as u32),
                    area(a),
                    area(b as u32)
                ));
            }
        }
    }

    let mut eta = String::from("area,item,eta_exp,eta_prod\n");
    let mut x0 = String::from("area,item,value\n");
    for s in 0..params.shape.n_sectors() {
        let (a, i) = params.shape.split(s);
        if params.eta_exp[s] != 0.0 || params.eta_prod[s] != 0.0 {
            eta.push_str(&format!(
                "{},{},{},{}\n",
                area(a),
                item(i),
                params.eta_exp[s],
                params.eta_prod[s]
            ));
        }
        if params.x0[s] != 0.0 {
            x0.push_str(&format!("{},{},{}\n", area(a), item(i), params.x0[s]));
        }
    }

    for (name, body) in [
        ("alpha.csv", alpha),
        ("beta.csv", beta),
        ("nu.csv", nu),
        ("trade.csv", trade),
        ("eta.csv", eta),
        ("x0.csv", x0),
    ] {
        write_atomic(&dir.join(name), body.as_bytes())?;
    }
    Ok(())
}

/// Writes via a temp file in the same directory and renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
    ));
    {
        let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.flush().map_err(|e| Error::io(&tmp, e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Years for which `data_dir` holds a parameter directory, ascending.
pub fn available_years(data_dir: impl AsRef<Path>) -> Result<Vec<i32>> {
    let dir = data_dir.as_ref();
    let mut years = Vec::new();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if !entry.path().is_dir() {
            continue;
        }
        if let Some(year) = entry
            .file_name()
            .to_str()
            .and_then(|s| s.parse::<i32>().ok())
        {
            years.push(year);
        }
    }
    years.sort_unstable();
    Ok(years)
}
