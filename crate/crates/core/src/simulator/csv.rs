use std::io::{self, Write};

use super::{MonitorReport, TrajectoryRecord};

/// Writes `t,topology,x_1_1..x_N_n,e_norm[,V_1..V_p]`, one row per sample.
///
/// Topologies are 1-based. Floats use the shortest representation that
/// round-trips, always with `.` as decimal separator.
pub fn write_csv<W: Write>(
    tr: &TrajectoryRecord,
    monitor: Option<&MonitorReport>,
    mut w: W,
) -> io::Result<()> {
    let mut header = vec!["t".to_string(), "topology".to_string()];
    for i in 1..=tr.agents {
        for j in 1..=tr.state_dim {
            header.push(format!("x_{i}_{j}"));
        }
    }
    header.push("e_norm".into());
    let p = monitor.map_or(0, |m| m.values.first().map_or(0, Vec::len));
    for i in 1..=p {
        header.push(format!("V_{i}"));
    }
    writeln!(w, "{}", header.join(","))?;
    for s in 0..tr.len() {
        let mut row = Vec::with_capacity(header.len());
        row.push(format!("{:?}", tr.times[s]));
        row.push((tr.topology[s] + 1).to_string());
        row.extend(tr.states[s].iter().map(|v| format!("{v:?}")));
        row.push(format!("{:?}", tr.disagreement_norm[s]));
        if let Some(m) = monitor {
            row.extend(m.values[s].iter().map(|v| format!("{v:?}")));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
