//! Company features from investor-network and personnel records.
//!
//! Every feature of a company is computed "as of" that company's first
//! funding date `t`: records dated at or after `t` (strictly after, for the
//! company's own funding edges) never enter a feature value, so perturbing
//! the future cannot change the past. Features that cannot be computed from
//! the available records are left missing; [`impute::soft_impute`] fills
//! them from the low-rank structure of the observed entries.

pub mod impute;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use impute::{soft_impute, soft_impute_with_trace};

// ---------------------------------------------------------------------------
// Feature matrix.
// ---------------------------------------------------------------------------

/// A features-by-companies matrix with an observation mask. Entries start
/// missing; `set` observes them, `clear` removes them again. Storage is
/// column-major so one company's feature vector is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    feature_names: Vec<String>,
    company_ids: Vec<String>,
    values: Vec<f64>,
    mask: Vec<bool>,
    id_index: HashMap<String, usize>,
}

impl FeatureMatrix {
    pub fn new(feature_names: Vec<String>, company_ids: Vec<String>) -> Result<Self> {
        if feature_names.is_empty() {
            return Err(Error::invalid("feature matrix", "needs at least one feature"));
        }
        let mut seen = BTreeSet::new();
        for name in &feature_names {
            if name.is_empty() {
                return Err(Error::invalid("feature matrix", "empty feature name"));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::invalid(
                    "feature matrix",
                    format!("duplicate feature name {name:?}"),
                ));
            }
        }
        let mut id_index = HashMap::with_capacity(company_ids.len());
        for (j, id) in company_ids.iter().enumerate() {
            if id.is_empty() {
                return Err(Error::invalid("feature matrix", "empty company id"));
            }
            if id_index.insert(id.clone(), j).is_some() {
                return Err(Error::invalid(
                    "feature matrix",
                    format!("duplicate company id {id:?}"),
                ));
            }
        }
        let cells = feature_names.len() * company_ids.len();
        Ok(FeatureMatrix {
            feature_names,
            company_ids,
            values: vec![0.0; cells],
            mask: vec![false; cells],
            id_index,
        })
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn num_companies(&self) -> usize {
        self.company_ids.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn company_ids(&self) -> &[String] {
        &self.company_ids
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn column_index(&self, company_id: &str) -> Option<usize> {
        self.id_index.get(company_id).copied()
    }

    fn cell(&self, feature: usize, company: usize) -> usize {
        assert!(feature < self.num_features(), "feature index out of range");
        assert!(company < self.num_companies(), "company index out of range");
        company * self.num_features() + feature
    }

    /// Observe a value. Non-finite values are rejected at the boundary so
    /// missing entries can never hide behind sentinels.
    pub fn set(&mut self, feature: usize, company: usize, value: f64) {
        assert!(value.is_finite(), "feature values must be finite");
        let c = self.cell(feature, company);
        self.values[c] = value;
        self.mask[c] = true;
    }

    /// Mark an entry missing again.
    pub fn clear(&mut self, feature: usize, company: usize) {
        let c = self.cell(feature, company);
        self.values[c] = 0.0;
        self.mask[c] = false;
    }

    pub fn get(&self, feature: usize, company: usize) -> Option<f64> {
        let c = self.cell(feature, company);
        self.mask[c].then(|| self.values[c])
    }

    pub fn is_observed(&self, feature: usize, company: usize) -> bool {
        self.mask[self.cell(feature, company)]
    }

    /// One company's feature values as a contiguous slice. Only meaningful
    /// on a complete matrix; missing entries read as zero.
    pub fn column(&self, company: usize) -> &[f64] {
        let m = self.num_features();
        assert!(company < self.num_companies(), "company index out of range");
        &self.values[company * m..(company + 1) * m]
    }

    pub fn is_complete(&self) -> bool {
        self.mask.iter().all(|&o| o)
    }

    pub fn observed_count(&self) -> usize {
        self.mask.iter().filter(|&&o| o).count()
    }

    /// Observed entries per feature row, in row order.
    pub fn row_observed_counts(&self) -> Vec<usize> {
        let m = self.num_features();
        let mut counts = vec![0usize; m];
        for (c, &o) in self.mask.iter().enumerate() {
            if o {
                counts[c % m] += 1;
            }
        }
        counts
    }

    /// Observed entries per company column, in column order.
    pub fn column_observed_counts(&self) -> Vec<usize> {
        let m = self.num_features();
        self.mask.chunks(m).map(|c| c.iter().filter(|&&o| o).count()).collect()
    }
}

// ---------------------------------------------------------------------------
// Investor network.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvestmentEdge {
    pub investor_id: String,
    pub company_id: String,
    pub funding_date: NaiveDate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Founded,
    Ipo,
    Acquisition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompanyEvent {
    pub kind: EventKind,
    pub date: NaiveDate,
}

/// The bipartite investor-company graph together with dated company events.
/// All queries are time-indexed so that features never look past their
/// as-of date.
#[derive(Debug, Clone)]
pub struct InvestorNetwork {
    edges: Vec<InvestmentEdge>,
    company_events: BTreeMap<String, Vec<CompanyEvent>>,
    edges_by_company: HashMap<String, Vec<usize>>,
    edges_by_investor: HashMap<String, Vec<usize>>,
}

impl InvestorNetwork {
    /// Every edge must reference a company present in `company_events`
    /// (companies without recorded events still need an empty entry).
    pub fn new(
        edges: Vec<InvestmentEdge>,
        company_events: BTreeMap<String, Vec<CompanyEvent>>,
    ) -> Result<Self> {
        let mut edges_by_company: HashMap<String, Vec<usize>> = HashMap::new();
        let mut edges_by_investor: HashMap<String, Vec<usize>> = HashMap::new();
        for (e, edge) in edges.iter().enumerate() {
            if edge.investor_id.is_empty() || edge.company_id.is_empty() {
                return Err(Error::invalid("investor network", "empty id on an edge"));
            }
            if !company_events.contains_key(&edge.company_id) {
                return Err(Error::UnknownCompany {
                    company_id: edge.company_id.clone(),
                    from: "investment edges",
                });
            }
            edges_by_company.entry(edge.company_id.clone()).or_default().push(e);
            edges_by_investor.entry(edge.investor_id.clone()).or_default().push(e);
        }
        Ok(InvestorNetwork {
            edges,
            company_events,
            edges_by_company,
            edges_by_investor,
        })
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Companies with at least one funding edge, ascending by id.
    pub fn funded_companies(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.edges_by_company.keys().map(String::as_str).collect();
        ids.sort_unstable();
        ids
    }

    pub fn first_funding_date(&self, company_id: &str) -> Option<NaiveDate> {
        self.edges_by_company
            .get(company_id)?
            .iter()
            .map(|&e| self.edges[e].funding_date)
            .min()
    }

    pub fn event_date(&self, company_id: &str, kind: EventKind) -> Option<NaiveDate> {
        self.company_events
            .get(company_id)?
            .iter()
            .filter(|ev| ev.kind == kind)
            .map(|ev| ev.date)
            .min()
    }

    pub fn founding_year(&self, company_id: &str) -> Option<i32> {
        self.event_date(company_id, EventKind::Founded).map(|d| d.year())
    }

    fn has_event_before(&self, company_id: &str, kind: EventKind, t: NaiveDate) -> bool {
        self.event_date(company_id, kind).is_some_and(|d| d < t)
    }

    /// Distinct investors with an edge into `company_id` dated at or before
    /// `t` (the investors present at the first funding round included).
    fn investors_at(&self, company_id: &str, t: NaiveDate) -> BTreeSet<&str> {
        self.edges_by_company
            .get(company_id)
            .map(|idxs| {
                idxs.iter()
                    .map(|&e| &self.edges[e])
                    .filter(|edge| edge.funding_date <= t)
                    .map(|edge| edge.investor_id.as_str())
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Distinct companies other than `exclude` that `investor_id` had funded
    /// strictly before `t`.
    fn portfolio_before(&self, investor_id: &str, t: NaiveDate, exclude: &str) -> BTreeSet<&str> {
        self.edges_by_investor
            .get(investor_id)
            .map(|idxs| {
                idxs.iter()
                    .map(|&e| &self.edges[e])
                    .filter(|edge| edge.funding_date < t && edge.company_id != exclude)
                    .map(|edge| edge.company_id.as_str())
                    .collect()
            })
            .unwrap_or_default()
    }
}

// ---------------------------------------------------------------------------
// Personnel records.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Employee,
    Advisor,
    Executive,
    Leader,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Degree {
    Unknown,
    #[serde(rename = "hs")]
    HighSchool,
    #[serde(rename = "ba")]
    Bachelors,
    #[serde(rename = "ms")]
    Masters,
    #[serde(rename = "phd")]
    Phd,
}

/// One person's affiliation with one company, with whatever background data
/// is known about them. Sets may be empty when nothing is known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonnelRecord {
    pub person_id: String,
    pub company_id: String,
    pub role: Role,
    pub prior_companies: BTreeSet<String>,
    pub schools: BTreeSet<String>,
    pub majors: BTreeSet<String>,
    pub degree: Degree,
    pub undergrad_year: Option<i32>,
    pub previously_founded: bool,
}

/// Multiple records of the same person at the same company merged into one
/// view: highest role wins, background sets union, the highest known degree
/// and the earliest stated undergraduate year are kept.
#[derive(Debug, Clone)]
struct Person {
    role: Role,
    prior_companies: BTreeSet<String>,
    schools: BTreeSet<String>,
    majors: BTreeSet<String>,
    degree: Degree,
    undergrad_year: Option<i32>,
    previously_founded: bool,
}

fn merge_people<'a, I: Iterator<Item = &'a PersonnelRecord>>(records: I) -> BTreeMap<&'a str, Person> {
    let mut people: BTreeMap<&str, Person> = BTreeMap::new();
    for r in records {
        let entry = people.entry(r.person_id.as_str()).or_insert_with(|| Person {
            role: r.role,
            prior_companies: BTreeSet::new(),
            schools: BTreeSet::new(),
            majors: BTreeSet::new(),
            degree: Degree::Unknown,
            undergrad_year: None,
            previously_founded: false,
        });
        entry.role = entry.role.max(r.role);
        entry.prior_companies.extend(r.prior_companies.iter().cloned());
        entry.schools.extend(r.schools.iter().cloned());
        entry.majors.extend(r.majors.iter().cloned());
        entry.degree = entry.degree.max(r.degree);
        entry.undergrad_year = match (entry.undergrad_year, r.undergrad_year) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        entry.previously_founded |= r.previously_founded;
    }
    people
}

// ---------------------------------------------------------------------------
// Network features.
// ---------------------------------------------------------------------------

fn require_funded(network: &InvestorNetwork, company_id: &str) -> Result<NaiveDate> {
    network
        .first_funding_date(company_id)
        .ok_or_else(|| Error::UnknownCompany {
            company_id: company_id.to_string(),
            from: "investment edges",
        })
}

/// Fraction of companies founded before `t` that share at least one of the
/// company's investors (investors as of `t`; co-investments dated strictly
/// before `t`). The company itself is excluded from both sides unless
/// `include_self_in_base` keeps it in the denominator.
pub fn investor_neighborhood(
    network: &InvestorNetwork,
    company_id: &str,
    t: NaiveDate,
    include_self_in_base: bool,
) -> Result<f64> {
    require_funded(network, company_id)?;
    let mut base = 0usize;
    for (other, events) in &network.company_events {
        let is_self = other == company_id;
        if is_self && !include_self_in_base {
            continue;
        }
        if events.iter().any(|ev| ev.kind == EventKind::Founded && ev.date < t) {
            base += 1;
        }
    }
    if base == 0 {
        return Ok(0.0);
    }
    let mut sharing: BTreeSet<&str> = BTreeSet::new();
    for investor in network.investors_at(company_id, t) {
        for other in network.portfolio_before(investor, t, company_id) {
            if network.has_event_before(other, EventKind::Founded, t) {
                sharing.insert(other);
            }
        }
    }
    Ok(sharing.len() as f64 / base as f64)
}

/// Maximum, over the company's investors as of `t`, of the fraction of the
/// investor's other portfolio companies (funded strictly before `t`) that
/// reached the given outcome before `t`. No investors, or investors with no
/// other portfolio, contribute zero.
pub fn max_outcome_fraction(
    network: &InvestorNetwork,
    company_id: &str,
    t: NaiveDate,
    kind: EventKind,
) -> Result<f64> {
    require_funded(network, company_id)?;
    let mut best = 0.0f64;
    for investor in network.investors_at(company_id, t) {
        let portfolio = network.portfolio_before(investor, t, company_id);
        if portfolio.is_empty() {
            continue;
        }
        let hits = portfolio
            .iter()
            .filter(|c| network.has_event_before(c, kind, t))
            .count();
        best = best.max(hits as f64 / portfolio.len() as f64);
    }
    Ok(best)
}

/// Affiliation outcome flags, in the order
/// `[job_ipo, job_acquired, executive_ipo, executive_acquired, advisory_ipo,
/// advisory_acquired]`. People are bucketed by their highest role at the
/// company — executives (leaders included) over advisors over employees —
/// and a flag is set when anyone in the bucket has a prior company with the
/// outcome dated before `t`.
pub fn binary_affiliation_features(
    network: &InvestorNetwork,
    records: &[PersonnelRecord],
    company_id: &str,
    t: NaiveDate,
) -> [bool; 6] {
    let people = merge_people(records.iter().filter(|r| r.company_id == company_id));
    let mut flags = [false; 6];
    for person in people.values() {
        let bucket = match person.role {
            Role::Leader | Role::Executive => 1,
            Role::Advisor => 2,
            Role::Employee => 0,
        };
        for prior in &person.prior_companies {
            if network.has_event_before(prior, EventKind::Ipo, t) {
                flags[bucket * 2] = true;
            }
            if network.has_event_before(prior, EventKind::Acquisition, t) {
                flags[bucket * 2 + 1] = true;
            }
        }
    }
    flags
}

/// Mean and population standard deviation of the pairwise Jaccard indices of
/// the given sets. Two empty sets have Jaccard index zero. Fewer than two
/// sets leave the statistics undefined.
pub fn jaccard_overlap_stats(sets: &[BTreeSet<String>]) -> Option<(f64, f64)> {
    if sets.len() < 2 {
        return None;
    }
    let mut indices = Vec::with_capacity(sets.len() * (sets.len() - 1) / 2);
    for (a, sa) in sets.iter().enumerate() {
        for sb in &sets[a + 1..] {
            let inter = sa.intersection(sb).count();
            let union = sa.union(sb).count();
            indices.push(if union == 0 { 0.0 } else { inter as f64 / union as f64 });
        }
    }
    let n = indices.len() as f64;
    let mean = indices.iter().sum::<f64>() / n;
    let var = indices.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Average implied age of the leadership at founding, assuming everyone is
/// 22 the year they finish undergraduate study: `22 + founding_year -
/// undergrad_year`, averaged over members with a known undergraduate year.
pub fn leadership_age(undergrad_years: &[i32], founding_year: i32) -> Option<f64> {
    if undergrad_years.is_empty() {
        return None;
    }
    let total: f64 = undergrad_years
        .iter()
        .map(|y| 22.0 + f64::from(founding_year) - f64::from(*y))
        .sum();
    Some(total / undergrad_years.len() as f64)
}

// ---------------------------------------------------------------------------
// Feature assembly.
// ---------------------------------------------------------------------------

/// Crunchbase sector labels carried as indicator features.
pub const DEFAULT_SECTORS: [&str; 64] = [
    "3d printing",
    "advertising",
    "analytics",
    "animation",
    "apps",
    "artificial intelligence",
    "automotive",
    "autonomous vehicles",
    "big data",
    "bioinformatics",
    "biotechnology",
    "bitcoin",
    "business intelligence",
    "cloud computing",
    "computer",
    "computer vision",
    "dating",
    "developer apis",
    "e-commerce",
    "e-learning",
    "edtech",
    "education",
    "facebook",
    "fantasy sports",
    "fashion",
    "fintech",
    "finance",
    "financial services",
    "fitness",
    "gpu",
    "hardware",
    "health care",
    "health diagnostics",
    "hospital",
    "insurance",
    "internet",
    "internet of things",
    "ios",
    "lifestyle",
    "logistics",
    "machine learning",
    "medical",
    "medical device",
    "messaging",
    "mobile",
    "nanotechnology",
    "network security",
    "open source",
    "personal health",
    "pet",
    "photo sharing",
    "renewable energy",
    "ride sharing",
    "robotics",
    "search engine",
    "social media",
    "social network",
    "software",
    "solar",
    "sports",
    "transportation",
    "video games",
    "virtual reality",
    "virtualization",
];

/// Schools counted by the top-school fraction.
pub const TOP_SCHOOLS: [&str; 18] = [
    "Berkeley",
    "Brown",
    "California Institute of Technology",
    "Carnegie Mellon",
    "Columbia",
    "Cornell",
    "Dartmouth",
    "Duke",
    "Harvard",
    "Johns Hopkins",
    "Massachusetts Institute of Technology",
    "Northwestern",
    "Princeton",
    "Stanford",
    "University of Chicago",
    "University of Pennsylvania",
    "Wharton",
    "Yale",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// School names counted as "top" (exact match).
    pub top_schools: Vec<String>,
    /// Sector labels turned into indicator features, in feature order.
    pub sectors: Vec<String>,
    /// Roles whose holders make up the leadership team.
    pub leadership_roles: Vec<Role>,
    /// Keep the company itself in the investor-neighborhood denominator.
    pub include_self_in_neighborhood_base: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            top_schools: TOP_SCHOOLS.iter().map(|s| s.to_string()).collect(),
            sectors: DEFAULT_SECTORS.iter().map(|s| s.to_string()).collect(),
            leadership_roles: vec![Role::Leader, Role::Executive],
            include_self_in_neighborhood_base: false,
        }
    }
}

/// Names of the non-sector features, in row order.
pub const BASE_FEATURE_NAMES: [&str; 23] = [
    "investor_neighborhood",
    "max_ipo_fraction",
    "max_acquisition_fraction",
    "job_ipo",
    "job_acquired",
    "executive_ipo",
    "executive_acquired",
    "advisory_ipo",
    "advisory_acquired",
    "previous_founder_fraction",
    "prior_companies_mean",
    "work_overlap_mean",
    "work_overlap_sd",
    "education_overlap_mean",
    "education_overlap_sd",
    "major_overlap_mean",
    "major_overlap_sd",
    "top_school_fraction",
    "degree_highschool_fraction",
    "degree_bachelors_fraction",
    "degree_masters_fraction",
    "degree_phd_fraction",
    "leadership_age",
];

/// Build the feature matrix for every funded company in the network. Each
/// company's as-of date is its first funding date; features that cannot be
/// computed are left missing for downstream imputation. `sector_labels`
/// maps a company to the (possibly several) sectors it belongs to.
pub fn build_features(
    network: &InvestorNetwork,
    personnel: &[PersonnelRecord],
    sector_labels: &BTreeMap<String, BTreeSet<String>>,
    config: &FeatureConfig,
) -> Result<FeatureMatrix> {
    let companies: Vec<String> = network
        .funded_companies()
        .into_iter()
        .map(|s| s.to_string())
        .collect();
    if companies.is_empty() {
        return Err(Error::invalid("feature build", "no funded companies in the network"));
    }
    let mut names: Vec<String> = BASE_FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    for sector in &config.sectors {
        names.push(format!("sector_{sector}"));
    }
    let mut matrix = FeatureMatrix::new(names, companies.clone())?;

    let mut records_by_company: HashMap<&str, Vec<&PersonnelRecord>> = HashMap::new();
    for r in personnel {
        records_by_company.entry(r.company_id.as_str()).or_default().push(r);
    }
    let empty = Vec::new();

    for (j, company) in companies.iter().enumerate() {
        let t = network
            .first_funding_date(company)
            .expect("company came from the funded list");

        matrix.set(
            0,
            j,
            investor_neighborhood(network, company, t, config.include_self_in_neighborhood_base)?,
        );
        matrix.set(1, j, max_outcome_fraction(network, company, t, EventKind::Ipo)?);
        matrix.set(2, j, max_outcome_fraction(network, company, t, EventKind::Acquisition)?);

        let company_records = records_by_company.get(company.as_str()).unwrap_or(&empty);
        let flags = binary_affiliation_features(network, personnel, company, t);
        for (f, &flag) in flags.iter().enumerate() {
            matrix.set(3 + f, j, if flag { 1.0 } else { 0.0 });
        }

        let people = merge_people(company_records.iter().copied());
        let leadership: Vec<&Person> = people
            .values()
            .filter(|p| config.leadership_roles.contains(&p.role))
            .collect();

        if !leadership.is_empty() {
            let founders = leadership.iter().filter(|p| p.previously_founded).count();
            matrix.set(9, j, founders as f64 / leadership.len() as f64);
            let affiliations: usize = leadership.iter().map(|p| p.prior_companies.len()).sum();
            matrix.set(10, j, affiliations as f64 / leadership.len() as f64);
        }

        let work_sets: Vec<BTreeSet<String>> =
            leadership.iter().map(|p| p.prior_companies.clone()).collect();
        if let Some((mean, sd)) = jaccard_overlap_stats(&work_sets) {
            matrix.set(11, j, mean);
            matrix.set(12, j, sd);
        }
        let school_sets: Vec<BTreeSet<String>> =
            leadership.iter().map(|p| p.schools.clone()).collect();
        if let Some((mean, sd)) = jaccard_overlap_stats(&school_sets) {
            matrix.set(13, j, mean);
            matrix.set(14, j, sd);
        }
        let major_sets: Vec<BTreeSet<String>> =
            leadership.iter().map(|p| p.majors.clone()).collect();
        if let Some((mean, sd)) = jaccard_overlap_stats(&major_sets) {
            matrix.set(15, j, mean);
            matrix.set(16, j, sd);
        }

        let with_schools: Vec<&&Person> =
            leadership.iter().filter(|p| !p.schools.is_empty()).collect();
        if !with_schools.is_empty() {
            let top = with_schools
                .iter()
                .filter(|p| p.schools.iter().any(|s| config.top_schools.iter().any(|t| t == s)))
                .count();
            matrix.set(17, j, top as f64 / with_schools.len() as f64);
        }

        let with_degree: Vec<Degree> = leadership
            .iter()
            .map(|p| p.degree)
            .filter(|d| *d != Degree::Unknown)
            .collect();
        if !with_degree.is_empty() {
            let n = with_degree.len() as f64;
            for (offset, degree) in [
                (18, Degree::HighSchool),
                (19, Degree::Bachelors),
                (20, Degree::Masters),
                (21, Degree::Phd),
            ] {
                let count = with_degree.iter().filter(|d| **d == degree).count();
                matrix.set(offset, j, count as f64 / n);
            }
        }

        let undergrad_years: Vec<i32> =
            leadership.iter().filter_map(|p| p.undergrad_year).collect();
        if let (Some(founding_year), false) =
            (network.founding_year(company), undergrad_years.is_empty())
        {
            if let Some(age) = leadership_age(&undergrad_years, founding_year) {
                matrix.set(22, j, age);
            }
        }

        let labels = sector_labels.get(company);
        for (s, sector) in config.sectors.iter().enumerate() {
            let member = labels.is_some_and(|set| set.contains(sector));
            matrix.set(23 + s, j, if member { 1.0 } else { 0.0 });
        }
    }
    Ok(matrix)
}
