//! Domain data model for the two input tables: customer applications,
//! monthly credit status history, and the derived binary default label.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("unknown status code {0:?} (expected one of 0,1,2,3,4,5,C,X)")]
    UnknownStatus(String),
    #[error("credit history is empty")]
    EmptyHistory,
}

/// Monthly payment status code of a credit account.
///
/// `DPD*` variants count days past due; `Paid` means the balance was paid
/// off that month and `NoLoan` means no loan existed that month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StatusCode {
    /// "0": 1-29 days past due
    Dpd0,
    /// "1": 30-59 days past due
    Dpd30,
    /// "2": 60-89 days overdue
    Dpd60,
    /// "3": 90-119 days overdue
    Dpd90,
    /// "4": 120-149 days overdue
    Dpd120,
    /// "5": overdue or bad debt, written off for more than 150 days
    Dpd150Plus,
    /// "C": paid off that month
    Paid,
    /// "X": no loan for the month
    NoLoan,
}

impl StatusCode {
    /// Days-past-due severity bucket, or `None` for the non-delinquent
    /// codes `C` and `X`.
    pub fn delinquency_level(self) -> Option<u8> {
        match self {
            StatusCode::Dpd0 => Some(0),
            StatusCode::Dpd30 => Some(1),
            StatusCode::Dpd60 => Some(2),
            StatusCode::Dpd90 => Some(3),
            StatusCode::Dpd120 => Some(4),
            StatusCode::Dpd150Plus => Some(5),
            StatusCode::Paid | StatusCode::NoLoan => None,
        }
    }

    pub fn render(self) -> &'static str {
        match self {
            StatusCode::Dpd0 => "0",
            StatusCode::Dpd30 => "1",
            StatusCode::Dpd60 => "2",
            StatusCode::Dpd90 => "3",
            StatusCode::Dpd120 => "4",
            StatusCode::Dpd150Plus => "5",
            StatusCode::Paid => "C",
            StatusCode::NoLoan => "X",
        }
    }

    pub const ALL: [StatusCode; 8] = [
        StatusCode::Dpd0,
        StatusCode::Dpd30,
        StatusCode::Dpd60,
        StatusCode::Dpd90,
        StatusCode::Dpd120,
        StatusCode::Dpd150Plus,
        StatusCode::Paid,
        StatusCode::NoLoan,
    ];
}

/// Parses one of the eight textual status codes "0".."5", "C", "X".
pub fn parse_status(text: &str) -> Result<StatusCode, SchemaError> {
    match text {
        "0" => Ok(StatusCode::Dpd0),
        "1" => Ok(StatusCode::Dpd30),
        "2" => Ok(StatusCode::Dpd60),
        "3" => Ok(StatusCode::Dpd90),
        "4" => Ok(StatusCode::Dpd120),
        "5" => Ok(StatusCode::Dpd150Plus),
        "C" => Ok(StatusCode::Paid),
        "X" => Ok(StatusCode::NoLoan),
        other => Err(SchemaError::UnknownStatus(other.to_string())),
    }
}

/// One row of the customer application table (18 fields).
#[derive(Debug, Clone, PartialEq)]
pub struct ApplicationRecord {
    pub id: i64,
    pub code_gender: String,
    pub flag_own_car: String,
    pub flag_own_realty: String,
    pub cnt_children: u32,
    pub amt_income_total: f64,
    pub name_income_type: String,
    pub name_education_type: String,
    pub name_family_status: String,
    pub name_housing_type: String,
    pub days_birth: i32,
    pub days_employed: i32,
    pub flag_mobil: u8,
    pub flag_work_phone: u8,
    pub flag_phone: u8,
    pub flag_email: u8,
    pub occupation_type: String,
    pub cnt_fam_members: u32,
}

/// One row of the monthly credit status table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CreditRecord {
    pub id: i64,
    /// Month offset: 0 = current month, -1 = previous month, always <= 0.
    pub months_balance: i32,
    pub status: StatusCode,
}

/// Binary default label: 0 = good, 1 = default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DefaultLabel(pub u8);

impl DefaultLabel {
    pub const GOOD: DefaultLabel = DefaultLabel(0);
    pub const DEFAULT: DefaultLabel = DefaultLabel(1);
}

/// Severity threshold at which a delinquent month marks a customer as a
/// defaulter. The default is 60+ days past due (status code "2").
pub const DEFAULT_LABEL_THRESHOLD: StatusCode = StatusCode::Dpd60;

/// Derives the default label for one customer's credit history: 1 iff any
/// month's status is at least as severe as `threshold`.
///
/// "C" and "X" months are non-delinquent evidence, never missing data.
pub fn derive_label_with_threshold(
    records: &[CreditRecord],
    threshold: StatusCode,
) -> Result<DefaultLabel, SchemaError> {
    if records.is_empty() {
        return Err(SchemaError::EmptyHistory);
    }
    let cut = threshold
        .delinquency_level()
        .expect("label threshold must be a delinquency code");
    let default = records
        .iter()
        .any(|r| r.status.delinquency_level().is_some_and(|l| l >= cut));
    Ok(if default {
        DefaultLabel::DEFAULT
    } else {
        DefaultLabel::GOOD
    })
}

/// Derives the default label at the standard 60-days-past-due cut.
pub fn derive_label(records: &[CreditRecord]) -> Result<DefaultLabel, SchemaError> {
    derive_label_with_threshold(records, DEFAULT_LABEL_THRESHOLD)
}
