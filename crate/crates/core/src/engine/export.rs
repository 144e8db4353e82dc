use std::io::Write;

use nalgebra::DMatrix;

use super::RatingState;
use crate::error::Result;

/// Streams `t,tau,player_id,mu,variance` rows, one per player per snapshot.
pub struct SnapshotWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> SnapshotWriter<W> {
    pub fn new(writer: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record(["t", "tau", "player_id", "mu", "variance"])?;
        Ok(SnapshotWriter { inner })
    }

    pub fn write_state(&mut self, state: &RatingState) -> Result<()> {
        let t = state.t_index.to_string();
        let tau = state.tau.map(|v| v.to_string()).unwrap_or_default();
        for (m, mu) in state.mu.iter().enumerate() {
            let variance = state.variance(m).map(|v| v.to_string()).unwrap_or_default();
            self.inner
                .write_record([t.as_str(), tau.as_str(), &m.to_string(), &mu.to_string(), &variance])?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| e.into_error().into())
    }
}

/// Dense covariance CSV: a `player_id,0,1,...` header, then one row per player.
pub fn write_covariance_matrix<W: Write>(writer: W, v: &DMatrix<f64>) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["player_id".to_string()];
    header.extend((0..v.ncols()).map(|j| j.to_string()));
    out.write_record(&header)?;
    for i in 0..v.nrows() {
        let mut row = vec![i.to_string()];
        row.extend(v.row(i).iter().map(|x| x.to_string()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
