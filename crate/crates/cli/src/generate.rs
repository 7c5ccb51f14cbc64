//! Scalable benchmark families, emitted as model files.

use std::fmt::Write;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Hub with `n` optional three-step services that may fail.
    ServiceProvider,
    /// Degradation chain of `n` stages with optional repair features.
    FailureRecovery,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::ServiceProvider => "service-provider",
            Family::FailureRecovery => "failure-recovery",
        }
    }

    pub fn generate(self, n: usize) -> String {
        match self {
            Family::ServiceProvider => service_provider(n),
            Family::FailureRecovery => failure_recovery(n),
        }
    }

    /// Number of states of the generated model.
    pub fn states(self, n: usize) -> usize {
        match self {
            Family::ServiceProvider => 3 * n + 3,
            Family::FailureRecovery => n + 3,
        }
    }
}

fn feature_line(out: &mut String, n: usize) {
    if n > 0 {
        let names: Vec<String> = (1..=n).map(|i| format!("f{i}")).collect();
        let _ = writeln!(out, "features {};", names.join(" "));
    }
}

/// States `hub`, `s{i}_1..3` for `i in 1..=n`, `done` and `failure`.
pub fn service_provider(n: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "// service-provider, n = {n}");
    let _ = writeln!(out, "// hub: each enabled service f_i starts with 1/(n+2), done with 1/(n+2),");
    let _ = writeln!(out, "//   failure with 1/100, otherwise stays.");
    let _ = writeln!(out, "// s<i>_k: fails with i/100; the last step returns to hub with 3/4 of the rest");
    let _ = writeln!(out, "//   and finishes with 1/4 of it.");
    feature_line(&mut out, n);
    let _ = writeln!(out, "\nfdtmc ServiceProvider {{");
    let mut states = vec!["hub".to_string()];
    for i in 1..=n {
        for k in 1..=3 {
            states.push(format!("s{i}_{k}"));
        }
    }
    states.push("done".into());
    states.push("failure".into());
    let _ = writeln!(out, "  states {};", states.join(", "));
    let _ = writeln!(out, "  init hub;");
    let _ = writeln!(out, "  label done: done;");
    let _ = writeln!(out, "  label failure: failure;");
    let share = n + 2;
    for i in 1..=n {
        let _ = writeln!(out, "  hub -> s{i}_1 : [f{i}] 1/{share};");
    }
    let _ = writeln!(out, "  hub -> done : 1/{share};");
    let _ = writeln!(out, "  hub -> failure : 1/100;");
    for i in 1..=n {
        let ok = 100 - i;
        let _ = writeln!(out, "  s{i}_1 -> s{i}_2 : {ok}/100;");
        let _ = writeln!(out, "  s{i}_1 -> failure : {i}/100;");
        let _ = writeln!(out, "  s{i}_2 -> s{i}_3 : {ok}/100;");
        let _ = writeln!(out, "  s{i}_2 -> failure : {i}/100;");
        let _ = writeln!(out, "  s{i}_3 -> hub : {}/400;", 3 * ok);
        let _ = writeln!(out, "  s{i}_3 -> done : {ok}/400;");
        let _ = writeln!(out, "  s{i}_3 -> failure : {i}/100;");
    }
    let _ = writeln!(out, "  reward hub : 1;");
    for i in 1..=n {
        for k in 1..=3 {
            let _ = writeln!(out, "  reward s{i}_{k} : {i};");
        }
    }
    let _ = writeln!(out, "}}");
    let _ = writeln!(out, "\nproperty safe = \"P[<0.1](F failure)\";");
    let _ = writeln!(out, "property failure = \"P=?(F failure)\";");
    let _ = writeln!(out, "property cost = \"R=?[F done | failure]\";");
    out
}

/// States `healthy`, `d1..dn`, `broken` and `worn`.
pub fn failure_recovery(n: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "// failure-recovery, n = {n}");
    let _ = writeln!(out, "// healthy: degrades with 1/10, breaks with 1/100, otherwise stays.");
    let _ = writeln!(out, "// d<i> with repair f_i: degrades 1/5, breaks 1/50, recovers 1/2;");
    let _ = writeln!(out, "//   without: degrades 2/5, breaks 1/10, recovers 1/10. Past d<n> lies worn.");
    feature_line(&mut out, n);
    let _ = writeln!(out, "\nfdtmc FailureRecovery {{");
    let mut states = vec!["healthy".to_string()];
    states.extend((1..=n).map(|i| format!("d{i}")));
    states.push("broken".into());
    states.push("worn".into());
    let _ = writeln!(out, "  states {};", states.join(", "));
    let _ = writeln!(out, "  init healthy;");
    let _ = writeln!(out, "  label broken: failure down;");
    let _ = writeln!(out, "  label worn: worn down;");
    let next = |i: usize| if i < n { format!("d{}", i + 1) } else { "worn".to_string() };
    let _ = writeln!(out, "  healthy -> {} : 1/10;", next(0));
    let _ = writeln!(out, "  healthy -> broken : 1/100;");
    for i in 1..=n {
        let _ = writeln!(out, "  d{i} -> {} : [f{i}] 1/5, 2/5;", next(i));
        let _ = writeln!(out, "  d{i} -> broken : [f{i}] 1/50, 1/10;");
        let _ = writeln!(out, "  d{i} -> healthy : [f{i}] 1/2, 1/10;");
    }
    let _ = writeln!(out, "  reward healthy : 1;");
    for i in 1..=n {
        let _ = writeln!(out, "  reward d{i} : [f{i}] 3, 1;");
    }
    let _ = writeln!(out, "}}");
    let _ = writeln!(out, "\nproperty failure = \"P=?(F failure)\";");
    let _ = writeln!(out, "property reliable = \"P[<=0.5](F failure)\";");
    let _ = writeln!(out, "property uptime = \"R=?[F down]\";");
    out
}
