//! CSV ingestion of the two input tables, inner-join labeling, label
//! encoding of categoricals, and year-based feature engineering.

mod synth;

pub use synth::generate_synthetic;

use std::collections::{BTreeMap, HashMap};
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, FeatureMatrix};
use crate::schema::{
    derive_label_with_threshold, parse_status, ApplicationRecord, CreditRecord, DefaultLabel,
    SchemaError, StatusCode,
};

/// Table-1 column names, in file order. `ID` is the join key and never a feature.
pub const APPLICATION_COLUMNS: [&str; 18] = [
    "ID",
    "CODE_GENDER",
    "FLAG_OWN_CAR",
    "FLAG_OWN_REALTY",
    "CNT_CHILDREN",
    "AMT_INCOME_TOTAL",
    "NAME_INCOME_TYPE",
    "NAME_EDUCATION_TYPE",
    "NAME_FAMILY_STATUS",
    "NAME_HOUSING_TYPE",
    "DAYS_BIRTH",
    "DAYS_EMPLOYED",
    "FLAG_MOBIL",
    "FLAG_WORK_PHONE",
    "FLAG_PHONE",
    "FLAG_EMAIL",
    "OCCUPATION_TYPE",
    "CNT_FAM_MEMBERS",
];

/// Table-2 column names.
pub const CREDIT_COLUMNS: [&str; 3] = ["ID", "MONTHS_BALANCE", "STATUS"];

/// Near-constant phone/contact flags dropped by default so the merged
/// table keeps 14 of its 17 feature columns.
pub const DEFAULT_DROP_COLUMNS: [&str; 3] = ["FLAG_MOBIL", "FLAG_WORK_PHONE", "FLAG_EMAIL"];

/// String-valued columns that go through the label encoder.
pub const CATEGORICAL_COLUMNS: [&str; 8] = [
    "CODE_GENDER",
    "FLAG_OWN_CAR",
    "FLAG_OWN_REALTY",
    "NAME_INCOME_TYPE",
    "NAME_EDUCATION_TYPE",
    "NAME_FAMILY_STATUS",
    "NAME_HOUSING_TYPE",
    "OCCUPATION_TYPE",
];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("duplicate header column {0:?}")]
    DuplicateHeader(String),
    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("unknown status code {code:?} at row {row}")]
    UnknownStatus { row: usize, code: String },
    #[error("no customer id present in both tables")]
    NoOverlap,
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("unseen category {value:?} in column {column:?}")]
    UnseenCategory { column: String, value: String },
    #[error("column {0:?} holds text but is not in the encoding map")]
    NotEncodable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

/// One cell of the merged, not-yet-encoded table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

/// Merged application+credit table with one derived label per customer.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLabeledTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub labels: Vec<DefaultLabel>,
}

/// Per-column mapping from category string to dense integer index.
/// Categories are stored in ascending lexicographic order, so the index
/// of a category is its position in the vector.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EncodingMap {
    pub columns: BTreeMap<String, Vec<String>>,
}

impl EncodingMap {
    pub fn index_of(&self, column: &str, value: &str) -> Option<usize> {
        self.columns
            .get(column)
            .and_then(|cats| cats.binary_search_by(|c| c.as_str().cmp(value)).ok())
    }
}

fn header_index(
    headers: &csv::StringRecord,
    required: &[&str],
) -> Result<HashMap<String, usize>, IngestError> {
    let mut map = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        let key = h.trim().to_ascii_uppercase();
        if map.insert(key.clone(), i).is_some() {
            return Err(IngestError::DuplicateHeader(key));
        }
    }
    for name in required {
        if !map.contains_key(*name) {
            return Err(IngestError::MissingColumn((*name).to_string()));
        }
    }
    Ok(map)
}

fn field<'a>(
    record: &'a csv::StringRecord,
    idx: &HashMap<String, usize>,
    name: &str,
    row: usize,
) -> Result<&'a str, IngestError> {
    record
        .get(idx[name])
        .ok_or_else(|| IngestError::MalformedRow {
            row,
            reason: format!("short record, no field for {name}"),
        })
}

fn parse_num<T: std::str::FromStr>(s: &str, name: &str, row: usize) -> Result<T, IngestError> {
    s.trim().parse().map_err(|_| IngestError::MalformedRow {
        row,
        reason: format!("cannot parse {name} from {s:?}"),
    })
}

fn parse_flag(s: &str, name: &str, row: usize) -> Result<u8, IngestError> {
    match s.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(IngestError::MalformedRow {
            row,
            reason: format!("{name} must be 0 or 1, got {other:?}"),
        }),
    }
}

/// Parses the application CSV. Duplicate ids keep the first occurrence.
pub fn parse_applications<R: Read>(source: R) -> Result<Vec<ApplicationRecord>, IngestError> {
    let mut reader = csv::Reader::from_reader(source);
    let idx = header_index(reader.headers()?, &APPLICATION_COLUMNS)?;
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // 1-based file row, header is row 1
        let record = record?;
        let get = |name: &str| field(&record, &idx, name, row);
        let rec = ApplicationRecord {
            id: parse_num(get("ID")?, "ID", row)?,
            code_gender: get("CODE_GENDER")?.to_string(),
            flag_own_car: get("FLAG_OWN_CAR")?.to_string(),
            flag_own_realty: get("FLAG_OWN_REALTY")?.to_string(),
            cnt_children: parse_num(get("CNT_CHILDREN")?, "CNT_CHILDREN", row)?,
            amt_income_total: parse_num(get("AMT_INCOME_TOTAL")?, "AMT_INCOME_TOTAL", row)?,
            name_income_type: get("NAME_INCOME_TYPE")?.to_string(),
            name_education_type: get("NAME_EDUCATION_TYPE")?.to_string(),
            name_family_status: get("NAME_FAMILY_STATUS")?.to_string(),
            name_housing_type: get("NAME_HOUSING_TYPE")?.to_string(),
            days_birth: parse_num(get("DAYS_BIRTH")?, "DAYS_BIRTH", row)?,
            days_employed: parse_num(get("DAYS_EMPLOYED")?, "DAYS_EMPLOYED", row)?,
            flag_mobil: parse_flag(get("FLAG_MOBIL")?, "FLAG_MOBIL", row)?,
            flag_work_phone: parse_flag(get("FLAG_WORK_PHONE")?, "FLAG_WORK_PHONE", row)?,
            flag_phone: parse_flag(get("FLAG_PHONE")?, "FLAG_PHONE", row)?,
            flag_email: parse_flag(get("FLAG_EMAIL")?, "FLAG_EMAIL", row)?,
            occupation_type: get("OCCUPATION_TYPE")?.to_string(),
            cnt_fam_members: parse_num(get("CNT_FAM_MEMBERS")?, "CNT_FAM_MEMBERS", row)?,
        };
        if rec.amt_income_total <= 0.0 || !rec.amt_income_total.is_finite() {
            return Err(IngestError::MalformedRow {
                row,
                reason: format!(
                    "AMT_INCOME_TOTAL must be positive, got {}",
                    rec.amt_income_total
                ),
            });
        }
        if rec.cnt_fam_members < 1 {
            return Err(IngestError::MalformedRow {
                row,
                reason: "CNT_FAM_MEMBERS must be at least 1".to_string(),
            });
        }
        if rec.days_birth > 0 {
            return Err(IngestError::MalformedRow {
                row,
                reason: format!("DAYS_BIRTH must be non-positive, got {}", rec.days_birth),
            });
        }
        if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(rec.id) {
            e.insert(());
            out.push(rec);
        }
    }
    Ok(out)
}

/// Parses the credit history CSV.
pub fn parse_credit<R: Read>(source: R) -> Result<Vec<CreditRecord>, IngestError> {
    let mut reader = csv::Reader::from_reader(source);
    let idx = header_index(reader.headers()?, &CREDIT_COLUMNS)?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let id = parse_num(field(&record, &idx, "ID", row)?, "ID", row)?;
        let months_balance: i32 = parse_num(
            field(&record, &idx, "MONTHS_BALANCE", row)?,
            "MONTHS_BALANCE",
            row,
        )?;
        if months_balance > 0 {
            return Err(IngestError::MalformedRow {
                row,
                reason: format!("MONTHS_BALANCE must be non-positive, got {months_balance}"),
            });
        }
        let status_text = field(&record, &idx, "STATUS", row)?.trim().to_string();
        let status = parse_status(&status_text).map_err(|_| IngestError::UnknownStatus {
            row,
            code: status_text,
        })?;
        out.push(CreditRecord {
            id,
            months_balance,
            status,
        });
    }
    Ok(out)
}

fn feature_cells(rec: &ApplicationRecord) -> Vec<Cell> {
    vec![
        Cell::Text(rec.code_gender.clone()),
        Cell::Text(rec.flag_own_car.clone()),
        Cell::Text(rec.flag_own_realty.clone()),
        Cell::Num(rec.cnt_children as f64),
        Cell::Num(rec.amt_income_total),
        Cell::Text(rec.name_income_type.clone()),
        Cell::Text(rec.name_education_type.clone()),
        Cell::Text(rec.name_family_status.clone()),
        Cell::Text(rec.name_housing_type.clone()),
        Cell::Num(rec.days_birth as f64),
        Cell::Num(rec.days_employed as f64),
        Cell::Num(rec.flag_mobil as f64),
        Cell::Num(rec.flag_work_phone as f64),
        Cell::Num(rec.flag_phone as f64),
        Cell::Num(rec.flag_email as f64),
        Cell::Text(rec.occupation_type.clone()),
        Cell::Num(rec.cnt_fam_members as f64),
    ]
}

/// Inner-joins the two tables on customer id, derives each customer's
/// default label from their credit history, and drops the id plus the
/// columns named in `drop_columns`.
pub fn merge_and_label(
    apps: &[ApplicationRecord],
    credit: &[CreditRecord],
    drop_columns: &[String],
    label_threshold: StatusCode,
) -> Result<RawLabeledTable, IngestError> {
    let feature_names: Vec<&str> = APPLICATION_COLUMNS[1..].to_vec();
    let mut drop = vec![false; feature_names.len()];
    for name in drop_columns {
        let upper = name.to_ascii_uppercase();
        let pos = feature_names
            .iter()
            .position(|c| *c == upper)
            .ok_or_else(|| IngestError::UnknownColumn(name.clone()))?;
        drop[pos] = true;
    }

    let mut histories: HashMap<i64, Vec<CreditRecord>> = HashMap::new();
    for rec in credit {
        histories.entry(rec.id).or_default().push(*rec);
    }

    let columns: Vec<String> = feature_names
        .iter()
        .zip(&drop)
        .filter(|(_, &d)| !d)
        .map(|(n, _)| n.to_string())
        .collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for app in apps {
        let Some(history) = histories.get(&app.id) else {
            continue;
        };
        let label = derive_label_with_threshold(history, label_threshold)?;
        let cells: Vec<Cell> = feature_cells(app)
            .into_iter()
            .zip(&drop)
            .filter(|(_, &d)| !d)
            .map(|(c, _)| c)
            .collect();
        rows.push(cells);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(IngestError::NoOverlap);
    }
    Ok(RawLabeledTable {
        columns,
        rows,
        labels,
    })
}

/// Fits a per-column category index over the named columns. Categories are
/// deduplicated and assigned indices in ascending lexicographic order.
pub fn fit_encoder(
    table: &RawLabeledTable,
    categorical_columns: &[String],
) -> Result<EncodingMap, IngestError> {
    let mut map = BTreeMap::new();
    for name in categorical_columns {
        let col = table
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| IngestError::UnknownColumn(name.clone()))?;
        let mut cats: Vec<String> = Vec::new();
        for row in &table.rows {
            let text = match &row[col] {
                Cell::Text(s) => s.clone(),
                Cell::Num(v) => v.to_string(),
            };
            if !cats.contains(&text) {
                cats.push(text);
            }
        }
        cats.sort();
        map.insert(name.clone(), cats);
    }
    Ok(EncodingMap { columns: map })
}

/// Turns the merged table into a numeric feature matrix: categorical cells
/// become encoder indices, day counts become years, numeric cells pass
/// through. `DAYS_BIRTH` is replaced by `AGE_YEARS = -days/365.25` and
/// `DAYS_EMPLOYED` by `EMPLOYED_YEARS = max(0, -days)/365.25` (the positive
/// pensioner sentinel maps to 0).
pub fn encode(table: &RawLabeledTable, map: &EncodingMap) -> Result<FeatureMatrix, IngestError> {
    let mut out_names = Vec::with_capacity(table.columns.len());
    for name in &table.columns {
        out_names.push(match name.as_str() {
            "DAYS_BIRTH" => "AGE_YEARS".to_string(),
            "DAYS_EMPLOYED" => "EMPLOYED_YEARS".to_string(),
            other => other.to_string(),
        });
    }
    let mut rows = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let mut out = Vec::with_capacity(row.len());
        for (col_name, cell) in table.columns.iter().zip(row) {
            let v = match cell {
                Cell::Text(s) => map.index_of(col_name, s).ok_or_else(|| {
                    if map.columns.contains_key(col_name) {
                        IngestError::UnseenCategory {
                            column: col_name.clone(),
                            value: s.clone(),
                        }
                    } else {
                        IngestError::NotEncodable(col_name.clone())
                    }
                })? as f64,
                Cell::Num(v) => match map.columns.contains_key(col_name) {
                    // numeric column explicitly declared categorical
                    true => map.index_of(col_name, &v.to_string()).ok_or_else(|| {
                        IngestError::UnseenCategory {
                            column: col_name.clone(),
                            value: v.to_string(),
                        }
                    })? as f64,
                    false => match col_name.as_str() {
                        "DAYS_BIRTH" => -v / 365.25,
                        "DAYS_EMPLOYED" => (-v).max(0.0) / 365.25,
                        _ => *v,
                    },
                },
            };
            out.push(v);
        }
        rows.push(out);
    }
    Ok(FeatureMatrix::new(out_names, rows)?)
}
