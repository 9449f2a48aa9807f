//! File formats: CSV schemas for histories, features, outcomes and
//! portfolios, JSON for parameters and configs.
//!
//! All writers go through a write-then-rename so a crash can never leave a
//! half-written file behind. Readers attach file names and line numbers to
//! every schema violation.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::features::{
    CompanyEvent, Degree, EventKind, FeatureMatrix, InvestmentEdge, InvestorNetwork,
    PersonnelRecord, Role,
};
use crate::fpt::DriftProfile;
use crate::likelihood::{FundingHistory, ModelParams};
use crate::portfolio::{CurvePoint, Portfolio};
use crate::simulator::SimConfig;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Low-level helpers.
// ---------------------------------------------------------------------------

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, details: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        details: details.into(),
    }
}

/// Write bytes to a sibling temp file, then rename over the target.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| parse_err(path, "path has no file name"))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))?;
    Ok(())
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Line number of a CSV record for error messages (1-based; header is 1).
fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    record: &csv::StringRecord,
    index: usize,
    what: &str,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = record.get(index).ok_or_else(|| {
        parse_err(
            path,
            format!("line {}: missing column {index} ({what})", record_line(record)),
        )
    })?;
    raw.trim().parse::<T>().map_err(|e| {
        parse_err(
            path,
            format!(
                "line {}, column {}: cannot parse {what} from {raw:?}: {e}",
                record_line(record),
                index + 1
            ),
        )
    })
}

fn csv_reader(path: &Path, expected_header: &[&str]) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, format!("cannot read header: {e}")))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected_header {
        return Err(parse_err(
            path,
            format!("line 1: expected header {expected_header:?}, got {got:?}"),
        ));
    }
    Ok(reader)
}

fn csv_to_bytes<F>(header: &[&str], fill: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    fill(&mut writer)?;
    writer
        .into_inner()
        .map_err(|e| Error::invalid("csv", format!("writer flush failed: {e}")))
}

/// Format a float so it round-trips exactly through parsing.
fn fmt_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains(['.', 'e', 'E']) && v.is_finite() {
        s.push_str(".0");
    }
    s
}

// ---------------------------------------------------------------------------
// Funding histories.
// ---------------------------------------------------------------------------

pub const HISTORIES_HEADER: [&str; 5] =
    ["company_id", "founding_year", "round_index", "round_time", "t_obs"];

/// One row per observed round, grouped by company.
pub fn write_histories_csv(path: &Path, histories: &[FundingHistory]) -> Result<()> {
    let bytes = csv_to_bytes(&HISTORIES_HEADER, |w| {
        for h in histories {
            for (idx, time) in h.round_indices.iter().zip(&h.round_times) {
                w.write_record([
                    h.company_id.as_str(),
                    &h.founding_year.to_string(),
                    &idx.to_string(),
                    &fmt_f64(*time),
                    &fmt_f64(h.t_obs),
                ])?;
            }
        }
        Ok(())
    })?;
    atomic_write(path, &bytes)
}

/// Read histories back; rows of one company must be consecutive and in time
/// order, and `founding_year`/`t_obs` must repeat exactly within a company.
pub fn read_histories_csv(path: &Path) -> Result<Vec<FundingHistory>> {
    let mut reader = csv_reader(path, &HISTORIES_HEADER)?;
    let mut histories: Vec<FundingHistory> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut current: Option<(FundingHistory, u64)> = None;
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, format!("malformed row: {e}")))?;
        if record.len() != HISTORIES_HEADER.len() {
            return Err(parse_err(
                path,
                format!(
                    "line {}: expected {} columns, got {}",
                    record_line(&record),
                    HISTORIES_HEADER.len(),
                    record.len()
                ),
            ));
        }
        let company_id: String = parse_field(path, &record, 0, "company_id")?;
        let founding_year: i32 = parse_field(path, &record, 1, "founding_year")?;
        let round_index: u8 = parse_field(path, &record, 2, "round_index")?;
        let round_time: f64 = parse_field(path, &record, 3, "round_time")?;
        let t_obs: f64 = parse_field(path, &record, 4, "t_obs")?;
        let line = record_line(&record);

        let start_new = current.as_ref().is_none_or(|(h, _)| h.company_id != company_id);
        if start_new {
            if let Some((done, at)) = current.take() {
                done.validate().map_err(|e| {
                    parse_err(path, format!("rows ending at line {at}: {e}"))
                })?;
                histories.push(done);
            }
            if !seen.insert(company_id.clone()) {
                return Err(parse_err(
                    path,
                    format!("line {line}: company {company_id} appears in two separate blocks"),
                ));
            }
            current = Some((
                FundingHistory {
                    company_id,
                    founding_year,
                    round_indices: vec![round_index],
                    round_times: vec![round_time],
                    t_obs,
                },
                line,
            ));
        } else {
            let (h, at) = current.as_mut().expect("start_new was false");
            if h.founding_year != founding_year {
                return Err(parse_err(
                    path,
                    format!("line {line}: founding_year changed within company {}", h.company_id),
                ));
            }
            if h.t_obs != t_obs {
                return Err(parse_err(
                    path,
                    format!("line {line}: t_obs changed within company {}", h.company_id),
                ));
            }
            h.round_indices.push(round_index);
            h.round_times.push(round_time);
            *at = line;
        }
    }
    if let Some((done, at)) = current.take() {
        done.validate()
            .map_err(|e| parse_err(path, format!("rows ending at line {at}: {e}")))?;
        histories.push(done);
    }
    if histories.is_empty() {
        return Err(parse_err(path, "no funding rounds"));
    }
    Ok(histories)
}

// ---------------------------------------------------------------------------
// Feature matrices.
// ---------------------------------------------------------------------------

/// Companies as rows, features as columns; an empty cell is a missing value.
pub fn write_features_csv(path: &Path, matrix: &FeatureMatrix) -> Result<()> {
    let mut header: Vec<&str> = vec!["company_id"];
    header.extend(matrix.feature_names().iter().map(String::as_str));
    let bytes = csv_to_bytes(&header, |w| {
        for (j, id) in matrix.company_ids().iter().enumerate() {
            let mut row = Vec::with_capacity(matrix.num_features() + 1);
            row.push(id.clone());
            for i in 0..matrix.num_features() {
                row.push(match matrix.get(i, j) {
                    Some(v) => fmt_f64(v),
                    None => String::new(),
                });
            }
            w.write_record(&row)?;
        }
        Ok(())
    })?;
    atomic_write(path, &bytes)
}

pub fn read_features_csv(path: &Path) -> Result<FeatureMatrix> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, format!("cannot read header: {e}")))?
        .clone();
    let mut cols = headers.iter();
    if cols.next() != Some("company_id") {
        return Err(parse_err(path, "line 1: first column must be company_id"));
    }
    let feature_names: Vec<String> = cols.map(|s| s.to_string()).collect();
    if feature_names.is_empty() {
        return Err(parse_err(path, "line 1: no feature columns"));
    }

    let mut ids = Vec::new();
    let mut cells: Vec<Vec<Option<f64>>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, format!("malformed row: {e}")))?;
        if record.len() != feature_names.len() + 1 {
            return Err(parse_err(
                path,
                format!(
                    "line {}: expected {} columns, got {}",
                    record_line(&record),
                    feature_names.len() + 1,
                    record.len()
                ),
            ));
        }
        let id: String = parse_field(path, &record, 0, "company_id")?;
        let mut row = Vec::with_capacity(feature_names.len());
        for i in 0..feature_names.len() {
            let raw = record.get(i + 1).expect("length checked").trim();
            if raw.is_empty() {
                row.push(None);
            } else {
                row.push(Some(parse_field::<f64>(path, &record, i + 1, "feature value")?));
            }
        }
        ids.push(id);
        cells.push(row);
    }
    let mut matrix = FeatureMatrix::new(feature_names, ids)
        .map_err(|e| parse_err(path, e.to_string()))?;
    for (j, row) in cells.into_iter().enumerate() {
        for (i, cell) in row.into_iter().enumerate() {
            if let Some(v) = cell {
                matrix.set(i, j, v);
            }
        }
    }
    Ok(matrix)
}

// ---------------------------------------------------------------------------
// Outcome labels.
// ---------------------------------------------------------------------------

pub const OUTCOMES_HEADER: [&str; 2] = ["company_id", "exited"];

pub fn write_outcomes_csv(path: &Path, outcomes: &BTreeMap<String, bool>) -> Result<()> {
    let bytes = csv_to_bytes(&OUTCOMES_HEADER, |w| {
        for (id, exited) in outcomes {
            w.write_record([id.as_str(), if *exited { "true" } else { "false" }])?;
        }
        Ok(())
    })?;
    atomic_write(path, &bytes)
}

pub fn read_outcomes_csv(path: &Path) -> Result<BTreeMap<String, bool>> {
    let mut reader = csv_reader(path, &OUTCOMES_HEADER)?;
    let mut outcomes = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, format!("malformed row: {e}")))?;
        let id: String = parse_field(path, &record, 0, "company_id")?;
        let exited: bool = parse_field(path, &record, 1, "exited")?;
        if outcomes.insert(id.clone(), exited).is_some() {
            return Err(parse_err(
                path,
                format!("line {}: company {id} labelled twice", record_line(&record)),
            ));
        }
    }
    if outcomes.is_empty() {
        return Err(parse_err(path, "no outcome labels"));
    }
    Ok(outcomes)
}

// ---------------------------------------------------------------------------
// Parameters and configs (JSON).
// ---------------------------------------------------------------------------

/// Fitted model as written by the fit command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutput {
    pub params: ModelParams,
    pub log_posterior: f64,
    pub feature_names: Vec<String>,
    pub restarts: usize,
    pub rng_seed: u64,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| parse_err(path, format!("line {}, column {}: {e}", e.line(), e.column())))
}

pub fn write_params_json(path: &Path, output: &FitOutput) -> Result<()> {
    write_json(path, output)
}

pub fn read_params_json(path: &Path) -> Result<FitOutput> {
    let output: FitOutput = read_json(path)?;
    output
        .params
        .validate()
        .map_err(|e| parse_err(path, e.to_string()))?;
    Ok(output)
}

/// Generating truth of a simulated market, for recovery checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub params: ModelParams,
    /// Per-company drift profiles in generation order.
    pub profiles: Vec<(String, DriftProfile)>,
}

pub fn write_ground_truth_json(path: &Path, truth: &GroundTruth) -> Result<()> {
    write_json(path, truth)
}

pub fn read_ground_truth_json(path: &Path) -> Result<GroundTruth> {
    read_json(path)
}

pub fn read_sim_config_json(path: &Path) -> Result<SimConfig> {
    let config: SimConfig = read_json(path)?;
    config.validate().map_err(|e| parse_err(path, e.to_string()))?;
    Ok(config)
}

pub fn write_sim_config_json(path: &Path, config: &SimConfig) -> Result<()> {
    write_json(path, config)
}

// ---------------------------------------------------------------------------
// Portfolio and curve tables.
// ---------------------------------------------------------------------------

pub const PORTFOLIO_HEADER: [&str; 5] = [
    "rank",
    "company_id",
    "exit_probability",
    "objective_value",
    "marginal_gain",
];

/// One row per selection, rank starting at 1. `exit_probabilities` must align
/// with the portfolio's selection order.
pub fn write_portfolio_csv(
    path: &Path,
    portfolio: &Portfolio,
    exit_probabilities: &[f64],
) -> Result<()> {
    if exit_probabilities.len() != portfolio.ordered_ids.len() {
        return Err(Error::DimensionMismatch {
            what: "exit probabilities",
            expected: portfolio.ordered_ids.len(),
            got: exit_probabilities.len(),
        });
    }
    let bytes = csv_to_bytes(&PORTFOLIO_HEADER, |w| {
        for (r, id) in portfolio.ordered_ids.iter().enumerate() {
            w.write_record([
                (r + 1).to_string().as_str(),
                id,
                &fmt_f64(exit_probabilities[r]),
                &fmt_f64(portfolio.objective_trace[r]),
                &fmt_f64(portfolio.marginal_gains[r]),
            ])?;
        }
        Ok(())
    })?;
    atomic_write(path, &bytes)
}

/// Read a portfolio table back (exit probabilities are returned alongside).
pub fn read_portfolio_csv(path: &Path) -> Result<(Portfolio, Vec<f64>)> {
    let mut reader = csv_reader(path, &PORTFOLIO_HEADER)?;
    let mut portfolio = Portfolio {
        ordered_ids: Vec::new(),
        objective_trace: Vec::new(),
        marginal_gains: Vec::new(),
    };
    let mut probs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, format!("malformed row: {e}")))?;
        let rank: usize = parse_field(path, &record, 0, "rank")?;
        if rank != portfolio.ordered_ids.len() + 1 {
            return Err(parse_err(
                path,
                format!(
                    "line {}: rank {rank} out of order, expected {}",
                    record_line(&record),
                    portfolio.ordered_ids.len() + 1
                ),
            ));
        }
        portfolio.ordered_ids.push(parse_field(path, &record, 1, "company_id")?);
        probs.push(parse_field(path, &record, 2, "exit_probability")?);
        portfolio
            .objective_trace
            .push(parse_field(path, &record, 3, "objective_value")?);
        portfolio
            .marginal_gains
            .push(parse_field(path, &record, 4, "marginal_gain")?);
    }
    if portfolio.ordered_ids.is_empty() {
        return Err(parse_err(path, "no portfolio rows"));
    }
    Ok((portfolio, probs))
}

pub const CURVE_HEADER: [&str; 4] = ["size", "exits", "random_baseline", "perfect"];

pub fn write_curve_csv(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let bytes = csv_to_bytes(&CURVE_HEADER, |w| {
        for p in curve {
            w.write_record([
                p.size.to_string().as_str(),
                &p.exits.to_string(),
                &fmt_f64(p.random_baseline),
                &p.perfect.to_string(),
            ])?;
        }
        Ok(())
    })?;
    atomic_write(path, &bytes)
}

pub const PREDICTIONS_HEADER: [&str; 2] = ["company_id", "exit_probability"];

/// One row per company in the given order.
pub fn write_predictions_csv(path: &Path, ids: &[String], probs: &[f64]) -> Result<()> {
    if probs.len() != ids.len() {
        return Err(Error::DimensionMismatch {
            what: "exit probabilities",
            expected: ids.len(),
            got: probs.len(),
        });
    }
    let bytes = csv_to_bytes(&PREDICTIONS_HEADER, |w| {
        for (id, p) in ids.iter().zip(probs) {
            w.write_record([id.as_str(), &fmt_f64(*p)])?;
        }
        Ok(())
    })?;
    atomic_write(path, &bytes)
}

pub fn read_predictions_csv(path: &Path) -> Result<Vec<(String, f64)>> {
    let mut reader = csv_reader(path, &PREDICTIONS_HEADER)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, format!("malformed row: {e}")))?;
        let id: String = parse_field(path, &record, 0, "company_id")?;
        let p: f64 = parse_field(path, &record, 1, "exit_probability")?;
        rows.push((id, p));
    }
    if rows.is_empty() {
        return Err(parse_err(path, "no prediction rows"));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Raw network and personnel inputs.
// ---------------------------------------------------------------------------

pub const INVESTMENTS_HEADER: [&str; 3] = ["investor_id", "company_id", "funding_date"];
pub const EVENTS_HEADER: [&str; 3] = ["company_id", "event", "date"];
pub const PEOPLE_HEADER: [&str; 6] = [
    "person_id",
    "company_id",
    "role",
    "degree",
    "undergrad_year",
    "previously_founded",
];
pub const PERSON_VALUE_HEADER: [&str; 2] = ["person_id", "value"];
pub const SECTORS_HEADER: [&str; 2] = ["company_id", "sector"];

fn parse_date(path: &Path, record: &csv::StringRecord, index: usize) -> Result<NaiveDate> {
    let raw: String = parse_field(path, record, index, "date")?;
    NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d").map_err(|e| {
        parse_err(
            path,
            format!(
                "line {}, column {}: cannot parse date {raw:?} (expected YYYY-MM-DD): {e}",
                record_line(record),
                index + 1
            ),
        )
    })
}

/// Read `investments.csv` and `events.csv` into a time-indexed network.
pub fn read_network(investments: &Path, events: &Path) -> Result<InvestorNetwork> {
    let mut company_events: BTreeMap<String, Vec<CompanyEvent>> = BTreeMap::new();
    let mut reader = csv_reader(events, &EVENTS_HEADER)?;
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(events, format!("malformed row: {e}")))?;
        let company_id: String = parse_field(events, &record, 0, "company_id")?;
        let kind_raw: String = parse_field(events, &record, 1, "event")?;
        let kind = match kind_raw.trim().to_ascii_lowercase().as_str() {
            "founded" => EventKind::Founded,
            "ipo" => EventKind::Ipo,
            "acquisition" | "acquired" => EventKind::Acquisition,
            other => {
                return Err(parse_err(
                    events,
                    format!(
                        "line {}, column 2: unknown event {other:?} (expected founded, ipo or acquisition)",
                        record_line(&record)
                    ),
                ))
            }
        };
        let date = parse_date(events, &record, 2)?;
        company_events
            .entry(company_id)
            .or_default()
            .push(CompanyEvent { kind, date });
    }

    let mut edges = Vec::new();
    let mut reader = csv_reader(investments, &INVESTMENTS_HEADER)?;
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(investments, format!("malformed row: {e}")))?;
        let investor_id: String = parse_field(investments, &record, 0, "investor_id")?;
        let company_id: String = parse_field(investments, &record, 1, "company_id")?;
        let funding_date = parse_date(investments, &record, 2)?;
        if !company_events.contains_key(&company_id) {
            return Err(parse_err(
                investments,
                format!(
                    "line {}: company {company_id} has no rows in {}",
                    record_line(&record),
                    events.display()
                ),
            ));
        }
        edges.push(InvestmentEdge {
            investor_id,
            company_id,
            funding_date,
        });
    }
    InvestorNetwork::new(edges, company_events)
}

fn read_person_values(path: &Path) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut reader = csv_reader(path, &PERSON_VALUE_HEADER)?;
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, format!("malformed row: {e}")))?;
        let person: String = parse_field(path, &record, 0, "person_id")?;
        let value: String = parse_field(path, &record, 1, "value")?;
        map.entry(person).or_default().insert(value.trim().to_string());
    }
    Ok(map)
}

/// Assemble personnel records from `people.csv` plus the per-person
/// `affiliations.csv` (prior companies), `schools.csv` and `majors.csv`.
pub fn read_personnel(
    people: &Path,
    affiliations: &Path,
    schools: &Path,
    majors: &Path,
) -> Result<Vec<PersonnelRecord>> {
    let prior = read_person_values(affiliations)?;
    let school = read_person_values(schools)?;
    let major = read_person_values(majors)?;
    let mut records = Vec::new();
    let mut reader = csv_reader(people, &PEOPLE_HEADER)?;
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(people, format!("malformed row: {e}")))?;
        let person_id: String = parse_field(people, &record, 0, "person_id")?;
        let company_id: String = parse_field(people, &record, 1, "company_id")?;
        let role_raw: String = parse_field(people, &record, 2, "role")?;
        let role = match role_raw.trim().to_ascii_lowercase().as_str() {
            "leader" => Role::Leader,
            "executive" => Role::Executive,
            "advisor" => Role::Advisor,
            "employee" => Role::Employee,
            other => {
                return Err(parse_err(
                    people,
                    format!(
                        "line {}, column 3: unknown role {other:?} (expected leader, executive, advisor or employee)",
                        record_line(&record)
                    ),
                ))
            }
        };
        let degree_raw: String = parse_field(people, &record, 3, "degree")?;
        let degree = match degree_raw.trim().to_ascii_lowercase().as_str() {
            "hs" => Degree::HighSchool,
            "ba" => Degree::Bachelors,
            "ms" => Degree::Masters,
            "phd" => Degree::Phd,
            "unknown" | "" => Degree::Unknown,
            other => {
                return Err(parse_err(
                    people,
                    format!(
                        "line {}, column 4: unknown degree {other:?} (expected hs, ba, ms, phd or unknown)",
                        record_line(&record)
                    ),
                ))
            }
        };
        let year_raw = record.get(4).unwrap_or("").trim();
        let undergrad_year = if year_raw.is_empty() {
            None
        } else {
            Some(parse_field::<i32>(people, &record, 4, "undergrad_year")?)
        };
        let previously_founded: bool = parse_field(people, &record, 5, "previously_founded")?;
        records.push(PersonnelRecord {
            person_id: person_id.clone(),
            company_id,
            role,
            prior_companies: prior.get(&person_id).cloned().unwrap_or_default(),
            schools: school.get(&person_id).cloned().unwrap_or_default(),
            majors: major.get(&person_id).cloned().unwrap_or_default(),
            degree,
            undergrad_year,
            previously_founded,
        });
    }
    Ok(records)
}

pub fn read_sectors(path: &Path) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut reader = csv_reader(path, &SECTORS_HEADER)?;
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, format!("malformed row: {e}")))?;
        let company: String = parse_field(path, &record, 0, "company_id")?;
        let sector: String = parse_field(path, &record, 1, "sector")?;
        map.entry(company).or_default().insert(sector.trim().to_string());
    }
    Ok(map)
}
