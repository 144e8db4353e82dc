//! Season result files.
//!
//! Canonical schema, header required:
//! `date,home,away,home_score,away_score[,reg_home_score,reg_away_score]`
//! with ISO dates. Teams are numbered in order of first appearance in the
//! file; games are sorted by date (stable, so same-day games keep file order)
//! and stamped with the number of days since the first game.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::schedule::GameRecord;

const BASE_COLUMNS: [&str; 5] = ["date", "home", "away", "home_score", "away_score"];
const REGULATION_COLUMNS: [&str; 2] = ["reg_home_score", "reg_away_score"];

/// How scores are turned into ordinal outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeMode {
    /// Final score, home win = 1, away win = 0; ties are rejected.
    BinaryFinal,
    /// Regulation-time score, 0/1/2 = away win/draw/home win.
    TernaryRegulation,
    /// Final score, 0/1/2 = away win/draw/home win.
    TernaryFinal,
}

impl OutcomeMode {
    pub fn name(&self) -> &'static str {
        match self {
            OutcomeMode::BinaryFinal => "binary_final",
            OutcomeMode::TernaryRegulation => "ternary_regulation",
            OutcomeMode::TernaryFinal => "ternary_final",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name.replace('-', "_").as_str() {
            "binary_final" | "binary" => Ok(OutcomeMode::BinaryFinal),
            "ternary_regulation" => Ok(OutcomeMode::TernaryRegulation),
            "ternary_final" | "ternary" => Ok(OutcomeMode::TernaryFinal),
            other => Err(Error::config(format!("unknown outcome mode '{other}'"))),
        }
    }

    pub fn alphabet_size(&self) -> u8 {
        match self {
            OutcomeMode::BinaryFinal => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for OutcomeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One line of a season file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawGameRow {
    pub date: NaiveDate,
    pub home: String,
    pub away: String,
    pub home_score: u32,
    pub away_score: u32,
    pub reg_home_score: Option<u32>,
    pub reg_away_score: Option<u32>,
}

/// Ordinal outcome of a game from its scores.
pub fn derive_outcome(home_score: u32, away_score: u32, mode: OutcomeMode) -> Result<u8> {
    use std::cmp::Ordering::*;
    match (home_score.cmp(&away_score), mode) {
        (Equal, OutcomeMode::BinaryFinal) => Err(Error::domain(format!(
            "tie {home_score}-{away_score} cannot be encoded as a binary outcome"
        ))),
        (Greater, OutcomeMode::BinaryFinal) => Ok(1),
        (Less, _) => Ok(0),
        (Equal, _) => Ok(1),
        (Greater, _) => Ok(2),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeasonData {
    pub source: PathBuf,
    pub mode: OutcomeMode,
    /// Team names by index.
    pub teams: Vec<String>,
    pub team_index: HashMap<String, usize>,
    /// Games in date order, `t_index` 1-based.
    pub games: Vec<GameRecord>,
    /// Rows as read, in file order.
    pub rows: Vec<RawGameRow>,
    pub has_regulation: bool,
}

impl SeasonData {
    pub fn players(&self) -> usize {
        self.teams.len()
    }

    pub fn len(&self) -> usize {
        self.games.len()
    }

    pub fn is_empty(&self) -> bool {
        self.games.is_empty()
    }

    pub fn outcomes(&self) -> impl Iterator<Item = u8> + '_ {
        self.games.iter().map(|g| g.outcome)
    }

    /// Writes the rows back in the canonical schema.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_rows(writer, &self.rows, self.has_regulation)
    }
}

pub fn parse_season(path: impl AsRef<Path>, mode: OutcomeMode) -> Result<SeasonData> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    parse_season_from_reader(file, path, mode)
}

/// Same as [`parse_season`]; `source` only labels error messages.
pub fn parse_season_from_reader<R: Read>(reader: R, source: impl AsRef<Path>, mode: OutcomeMode) -> Result<SeasonData> {
    let source = source.as_ref().to_path_buf();
    let data_err = |line: u64, message: String| Error::Data {
        path: source.clone(),
        line,
        message,
    };

    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
    let has_regulation = match header.len() {
        5 => false,
        7 => true,
        _ => return Err(data_err(1, format!("expected 5 or 7 columns, got {}", header.len()))),
    };
    let expected = BASE_COLUMNS.iter().chain(if has_regulation { &REGULATION_COLUMNS[..] } else { &[] });
    for (got, want) in header.iter().zip(expected) {
        if got != want {
            return Err(data_err(1, format!("expected column '{want}', found '{got}'")));
        }
    }
    if mode == OutcomeMode::TernaryRegulation && !has_regulation {
        return Err(Error::config(format!(
            "{}: mode {mode} needs the reg_home_score and reg_away_score columns",
            source.display()
        )));
    }

    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(data_err(line, format!("expected {} fields, got {}", header.len(), record.len())));
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| data_err(line, format!("bad date '{}': {e}", &record[0])))?;
        let score = |i: usize| -> Result<u32> {
            record[i]
                .parse::<u32>()
                .map_err(|_| data_err(line, format!("bad {} '{}'", header[i], &record[i])))
        };
        let optional_score = |i: usize| -> Result<Option<u32>> {
            if record[i].is_empty() {
                Ok(None)
            } else {
                score(i).map(Some)
            }
        };
        let (home, away) = (record[1].to_string(), record[2].to_string());
        if home.is_empty() || away.is_empty() {
            return Err(data_err(line, "empty team name".into()));
        }
        if home == away {
            return Err(data_err(line, format!("team '{home}' plays itself")));
        }
        let (home_score, away_score) = (score(3)?, score(4)?);
        let (reg_home_score, reg_away_score) = if has_regulation {
            (optional_score(5)?, optional_score(6)?)
        } else {
            (None, None)
        };
        if reg_home_score.is_some() != reg_away_score.is_some() {
            return Err(data_err(line, "regulation scores must be given together".into()));
        }
        if reg_home_score.is_some_and(|r| r > home_score) || reg_away_score.is_some_and(|r| r > away_score) {
            return Err(data_err(line, "regulation score exceeds final score".into()));
        }
        rows.push(RawGameRow {
            date,
            home,
            away,
            home_score,
            away_score,
            reg_home_score,
            reg_away_score,
        });
        lines.push(line);
    }
    if rows.is_empty() {
        return Err(data_err(1, "no games".into()));
    }

    let mut teams = Vec::new();
    let mut team_index = HashMap::new();
    for row in &rows {
        for name in [&row.home, &row.away] {
            if !team_index.contains_key(name) {
                team_index.insert(name.clone(), teams.len());
                teams.push(name.clone());
            }
        }
    }

    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by_key(|&i| rows[i].date);
    let first = rows[order[0]].date;
    let mut games = Vec::with_capacity(rows.len());
    for (t, &i) in order.iter().enumerate() {
        let row = &rows[i];
        let (h, a) = match mode {
            OutcomeMode::TernaryRegulation => match (row.reg_home_score, row.reg_away_score) {
                (Some(h), Some(a)) => (h, a),
                _ => return Err(data_err(lines[i], "missing regulation scores".into())),
            },
            _ => (row.home_score, row.away_score),
        };
        let outcome = derive_outcome(h, a, mode).map_err(|e| data_err(lines[i], e.to_string()))?;
        games.push(GameRecord {
            t_index: t + 1,
            tau: (row.date - first).num_days() as u64,
            home: vec![team_index[&row.home]],
            away: vec![team_index[&row.away]],
            outcome,
        });
    }

    Ok(SeasonData {
        source,
        mode,
        teams,
        team_index,
        games,
        rows,
        has_regulation,
    })
}

/// Writes rows in the canonical schema.
pub fn write_rows<W: Write>(writer: W, rows: &[RawGameRow], with_regulation: bool) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = BASE_COLUMNS.to_vec();
    if with_regulation {
        header.extend(REGULATION_COLUMNS);
    }
    out.write_record(&header)?;
    let opt = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let mut fields = vec![
            r.date.format("%Y-%m-%d").to_string(),
            r.home.clone(),
            r.away.clone(),
            r.home_score.to_string(),
            r.away_score.to_string(),
        ];
        if with_regulation {
            fields.push(opt(r.reg_home_score));
            fields.push(opt(r.reg_away_score));
        }
        out.write_record(&fields)?;
    }
    out.flush()?;
    Ok(())
}
