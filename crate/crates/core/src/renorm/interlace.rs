use serde::Serialize;

use super::AuditConfig;
use crate::error::{Error, Result};
use crate::measure::LadderSpec;
use crate::string_solver::StringProblem;

/// Eigenvalues closer than this many solver tolerances are one event.
const MERGE_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    J,
    J1,
    J2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterlaceEvent {
    pub lambda: f64,
    pub sources: Vec<Source>,
    pub f_before: i64,
    pub f_after: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterlaceReport {
    pub depth: usize,
    pub j: (f64, f64),
    pub j1: (f64, f64),
    pub j2: (f64, f64),
    pub lambda_max: f64,
    pub events: Vec<InterlaceEvent>,
    /// `F` on `(-inf, e_0)`, `(e_0, e_1)`, ..., `(e_last, lambda_max)`.
    pub f_trace: Vec<i64>,
    pub violations: Vec<String>,
}

impl InterlaceReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Split {
    whole: StringProblem,
    left: StringProblem,
    right: StringProblem,
}

impl Split {
    fn counts(&self, lambda: f64) -> Result<[usize; 3]> {
        Ok([self.whole.count_below(lambda)?, self.left.count_below(lambda)?, self.right.count_below(lambda)?])
    }
}

fn f_value(c: [usize; 3]) -> i64 {
    c[0] as i64 - c[1] as i64 - c[2] as i64
}

/// Checks that `F = N(., J) - N(., J1) - N(., J2)` stays in `{-1, 0}` below
/// `lambda_max`, dropping to -1 at eigenvalues of the halves and returning
/// to 0 at eigenvalues of the whole.
///
/// `J` is the carrier `[0, 1]`, `J1 = [0, d1]`, `J2 = [c2, 1]`; the closed
/// gap `[d1, c2]` must hold no atom.
pub fn interlacing_audit(
    spec: &LadderSpec,
    depth: usize,
    d1: f64,
    c2: f64,
    lambda_max: f64,
    cfg: &AuditConfig,
) -> Result<InterlaceReport> {
    let mu = cfg.discretize(spec, depth)?;
    let (a, b) = mu.carrier();
    if !(a < d1 && d1 <= c2 && c2 < b) {
        return Err(Error::Precondition(format!("split needs {a} < d1 <= c2 < {b}, got d1 = {d1}, c2 = {c2}")));
    }
    if let Some(x) = mu.positions().iter().find(|&&x| d1 <= x && x <= c2) {
        return Err(Error::Precondition(format!("atom at {x} lies in the split gap [{d1}, {c2}]")));
    }
    let split = Split {
        left: StringProblem::neumann(mu.restrict(a, d1)),
        right: StringProblem::neumann(mu.restrict(c2, b)),
        whole: StringProblem::neumann(mu),
    };

    let mut raw = Vec::new();
    for (problem, source) in [(&split.whole, Source::J), (&split.left, Source::J1), (&split.right, Source::J2)] {
        for v in problem.spectrum_below(lambda_max, cfg.rel_tol)?.values {
            raw.push((v, source));
        }
    }
    raw.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let merge = MERGE_FACTOR * cfg.rel_tol;
    let mut clusters: Vec<(f64, Vec<Source>)> = Vec::new();
    for (v, s) in raw {
        match clusters.last_mut() {
            Some((first, sources)) if v - *first <= merge * v.abs().max(first.abs()) => {
                if sources.contains(&s) {
                    return Err(Error::EventCollision {
                        lambda: v,
                        detail: format!("two eigenvalues of {s:?} within relative {merge:e}"),
                    });
                }
                sources.push(s);
            }
            _ => clusters.push((v, vec![s])),
        }
    }

    for (_, sources) in clusters.iter_mut() {
        sources.sort();
    }

    let mut probes: Vec<f64> = clusters.windows(2).map(|w| 0.5 * (w[0].0 + w[1].0)).collect();
    probes.push(match clusters.last() {
        Some(&(v, _)) => 0.5 * (v + lambda_max),
        None => 0.5 * lambda_max,
    });
    let mut f_trace = vec![0];
    let mut violations = Vec::new();
    let mut seen = [0usize; 3];
    for (probe, (_, sources)) in probes.iter().zip(&clusters) {
        for s in sources {
            seen[*s as usize] += 1;
        }
        let counts = split.counts(*probe)?;
        if counts != seen {
            violations.push(format!("counts {counts:?} at {probe:e} disagree with {seen:?} eigenvalues below"));
        }
        f_trace.push(f_value(counts));
    }
    if clusters.is_empty() {
        f_trace.push(f_value(split.counts(probes[0])?));
    }

    let mut events = Vec::with_capacity(clusters.len());
    for (i, (lambda, sources)) in clusters.into_iter().enumerate() {
        let (before, after) = (f_trace[i], f_trace[i + 1]);
        let whole = sources.iter().filter(|&&s| s == Source::J).count();
        let halves = sources.len() - whole;
        let expected = match (whole, halves) {
            (0, 1) => Some((0, -1)),
            (1, 0) => Some((-1, 0)),
            _ => None,
        };
        match expected {
            Some(e) if e != (before, after) => violations.push(format!(
                "event {sources:?} at {lambda:e} moves F from {before} to {after}, expected {} to {}",
                e.0, e.1
            )),
            _ => {}
        }
        events.push(InterlaceEvent { lambda, sources, f_before: before, f_after: after });
    }
    for (i, f) in f_trace.iter().enumerate() {
        if !(*f == 0 || *f == -1) {
            violations.push(format!("F = {f} on trace segment {i}"));
        }
    }

    Ok(InterlaceReport {
        depth,
        j: (a, b),
        j1: (a, d1),
        j2: (c2, b),
        lambda_max,
        events,
        f_trace,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_depth_two_central_gap() {
        let cfg = AuditConfig::default();
        let r = interlacing_audit(&LadderSpec::classical_cantor(), 2, 5.0 / 18.0 + 1e-9, 13.0 / 18.0 - 1e-9, 50.0, &cfg)
            .unwrap();
        assert!(r.is_ok(), "{:?}", r.violations);
        let lambdas: Vec<f64> = r.events.iter().map(|e| e.lambda).collect();
        assert_eq!(lambdas.len(), 4);
        assert_eq!(r.events[0].sources, vec![Source::J, Source::J1, Source::J2]);
        assert_eq!(r.events[1].sources, vec![Source::J]);
        assert!((lambdas[1] - 6.8756).abs() < 1e-3);
        assert_eq!(r.events[2].sources, vec![Source::J, Source::J1, Source::J2]);
        assert!((lambdas[2] - 36.0).abs() < 1e-9);
        assert_eq!(r.f_trace, vec![0, -1, 0, -1, 0]);
    }

    #[test]
    fn below_first_positive_eigenvalue() {
        let cfg = AuditConfig::default();
        let r = interlacing_audit(&LadderSpec::classical_cantor(), 2, 0.5, 0.5, 5.0, &cfg).unwrap();
        assert!(r.is_ok());
        assert_eq!(r.f_trace, vec![0, -1]);
    }

    #[test]
    fn empty_half_gives_zero_trace() {
        let cfg = AuditConfig::default();
        let r = interlacing_audit(&LadderSpec::classical_cantor(), 3, 0.985, 0.99, 1e4, &cfg).unwrap();
        assert!(r.is_ok(), "{:?}", r.violations);
        assert!(r.f_trace.iter().all(|&f| f == 0));
        assert!(r.events.iter().all(|e| e.sources == vec![Source::J, Source::J1]));
    }

    #[test]
    fn rejects_atoms_in_gap() {
        let cfg = AuditConfig::default();
        let err = interlacing_audit(&LadderSpec::classical_cantor(), 2, 0.2, 0.8, 50.0, &cfg).unwrap_err();
        assert_eq!(err.kind(), "precondition");
    }

    #[test]
    fn report_serializes() {
        let cfg = AuditConfig::default();
        let r = interlacing_audit(&LadderSpec::classical_cantor(), 2, 0.5, 0.5, 50.0, &cfg).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["events"][0]["sources"], serde_json::json!(["j", "j1", "j2"]));
        assert!(v["violations"].as_array().unwrap().is_empty());
    }
}
