//! Synthetic environments, the locally adaptive and flat runners, and the
//! regret ledger.

mod regret;
mod run;
mod stream;
mod target;

pub use regret::{regret_curve, Comparator};
pub use run::{hm_config, run_hm, run_la, LaConfig, Round, RoundLog};
pub use stream::{embed, gen_stream, InstanceLaw, Stream, StreamSpec, RNG_ALGORITHM};
pub use target::{TargetFunction, TargetPreset};

use std::fmt::Write;

use crate::format::g17;

pub const ROUNDS_HEADER: &str = "t,y,yhat,loss,cum_loss,leaf_level,new_nodes,path";

/// The per-round CSV: one header line and one line per round.
pub fn rounds_csv(log: &RoundLog) -> String {
    let mut out = String::with_capacity(64 * (log.rounds.len() + 1));
    out.push_str(ROUNDS_HEADER);
    out.push('\n');
    for r in &log.rounds {
        let path: Vec<String> = r
            .path
            .iter()
            .map(|&n| log.tree.node(n).id.to_string())
            .collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.t,
            g17(r.y),
            g17(r.yhat),
            g17(r.loss),
            g17(r.cum_loss),
            r.leaf_level,
            r.new_nodes(),
            path.join("/")
        );
    }
    out
}

/// Two regret curves side by side: `t,<a>,<b>`.
pub fn compare_csv(a_name: &str, a: &[f64], b_name: &str, b: &[f64]) -> String {
    let mut out = format!("t,{a_name},{b_name}\n");
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        let _ = writeln!(out, "{},{},{}", i + 1, g17(*x), g17(*y));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::LossKind;
    use crate::net::RadiusSchedule;

    #[test]
    fn csv_layout() {
        let f = TargetFunction::constant(0.5).unwrap();
        let s = gen_stream(&StreamSpec::new(3, 1, 2), &f).unwrap();
        let cfg = LaConfig::new(RadiusSchedule::lipschitz(vec![1.0, 4.0], 1).unwrap(), LossKind::Square);
        let log = run_la(&s.examples, &cfg).unwrap();
        let csv = rounds_csv(&log);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], ROUNDS_HEADER);
        assert_eq!(lines[1], "1,0.5,0.5,0,0,1,2,1:1/2:1");
        assert!(lines.iter().skip(1).all(|l| l.split(',').count() == 8));
    }

    #[test]
    fn compare_layout() {
        let csv = compare_csv("a", &[0.1, 0.2], "b", &[1.0, 2.0]);
        assert_eq!(csv, "t,a,b\n1,0.10000000000000001,1\n2,0.20000000000000001,2\n");
    }
}
