//! The decision pipeline: does an equivalent deterministic top-down transducer
//! with look-ahead exist, and if so, which one.

use crate::analysis::{is_circular, single_path, SinglePath};
use crate::constructions::{associate, compose_dtr, normalize_domain_into_range, normalize_ground_rhs, uniformize};
use crate::equivalence::{bounded_equivalence_over, Equivalence};
use crate::functionality::{is_functional, FunctionalityBudget, FunctionalityVerdict};
use crate::model::{check_monadic, render_att, render_spec, render_tdtt, AttSpec, Decl, LookAround, PairedSpec, TdttSpec};
use crate::semantics::StepBudget;
use crate::words::{back_convert, build_two_way, one_way_definability, DefinabilityBudget, DefinabilityResult};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetConfig {
    pub equivalence_depth: usize,
    pub verify_word_length: usize,
    pub synth_state_bound: usize,
    pub max_steps: usize,
    pub sample_length: usize,
    pub budget_words: usize,
    pub max_paths: usize,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig {
            equivalence_depth: 4,
            verify_word_length: 10,
            synth_state_bound: 16,
            max_steps: 1_000_000,
            sample_length: 8,
            budget_words: 200_000,
            max_paths: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {0}: expected `key = value`")]
    Syntax(usize),
    #[error("line {0}: unknown key `{1}`")]
    UnknownKey(usize, String),
    #[error("line {0}: `{1}` must be a positive integer")]
    BadValue(usize, String),
}

impl BudgetConfig {
    /// `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = BudgetConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax(i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            let n: usize = v
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| ConfigError::BadValue(i + 1, k.to_string()))?;
            match k {
                "equivalence_depth" => c.equivalence_depth = n,
                "verify_word_length" => c.verify_word_length = n,
                "synth_state_bound" => c.synth_state_bound = n,
                "max_steps" => c.max_steps = n,
                "sample_length" => c.sample_length = n,
                "budget_words" => c.budget_words = n,
                "max_paths" => c.max_paths = n,
                _ => return Err(ConfigError::UnknownKey(i + 1, k.to_string())),
            }
        }
        Ok(c)
    }

    pub fn steps(&self) -> StepBudget {
        StepBudget {
            max_steps: self.max_steps,
            ..StepBudget::default()
        }
    }

    pub fn definability(&self) -> DefinabilityBudget {
        DefinabilityBudget {
            sample_length: self.sample_length,
            state_bound: self.synth_state_bound,
            verify_length: self.verify_word_length,
            budget_words: self.budget_words,
        }
    }

    pub fn functionality(&self) -> FunctionalityBudget {
        FunctionalityBudget {
            depth: self.equivalence_depth,
            max_paths: self.max_paths,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Artifact {
    pub name: String,
    #[serde(skip)]
    pub content: String,
}

fn content_hash(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub artifact: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Answer {
    Yes { spec: String },
    No { reason: String, witness: String },
    Unknown { stage: String, reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct DecisionReport {
    pub schema: u32,
    pub input: String,
    pub config: BudgetConfig,
    pub stages: Vec<StageRecord>,
    pub answer: Answer,
    /// sha-256 of this report serialized with an empty hash
    pub hash: String,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
    #[serde(skip)]
    pub timings_ms: Vec<(String, u128)>,
    #[serde(skip)]
    pub result: Option<PairedSpec>,
}

impl DecisionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }

    /// Writes every artifact and `report.json` into `dir`.
    pub fn persist(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for a in &self.artifacts {
            std::fs::write(dir.join(&a.name), &a.content)?;
        }
        std::fs::write(dir.join("report.json"), self.to_json())
    }

    pub fn exit_code(&self) -> i32 {
        match self.answer {
            Answer::Unknown { .. } => 2,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("stage {stage}: {message}")]
pub struct PipelineError {
    pub stage: String,
    pub message: String,
}

struct Run {
    stages: Vec<StageRecord>,
    artifacts: Vec<Artifact>,
    timings: Vec<(String, u128)>,
    clock: Instant,
}

impl Run {
    fn stage(&mut self, name: &str, verdict: &str, artifact: Option<(&str, String)>) {
        let artifact = artifact.map(|(ext, content)| {
            let name = format!("{name}-{}.{ext}", &content_hash(&content)[..16]);
            self.artifacts.push(Artifact {
                name: name.clone(),
                content,
            });
            name
        });
        self.stages.push(StageRecord {
            stage: name.to_string(),
            verdict: verdict.to_string(),
            artifact,
        });
        self.timings.push((name.to_string(), self.clock.elapsed().as_millis()));
        self.clock = Instant::now();
    }

    fn last_artifact(&self) -> String {
        self.stages.last().and_then(|s| s.artifact.clone()).unwrap_or_default()
    }
}

fn err(stage: &str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError {
        stage: stage.to_string(),
        message: e.to_string(),
    }
}

fn json<T: Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("serializable")
}

/// Runs the stages in order; a No or Unknown answer stops the run.
pub fn decide_dtr(input: &Decl, cfg: &BudgetConfig) -> Result<DecisionReport, PipelineError> {
    let mut run = Run {
        stages: Vec::new(),
        artifacts: Vec::new(),
        timings: Vec::new(),
        clock: Instant::now(),
    };
    let answer = stages(input, cfg, &mut run)?;
    let (answer, result) = match answer {
        Ok(r) => (
            Answer::Yes {
                spec: run.stages.iter().rev().find_map(|s| s.artifact.clone()).unwrap_or_default(),
            },
            Some(r),
        ),
        Err(a) => (a, None),
    };
    let mut report = DecisionReport {
        schema: 1,
        input: input.name().to_string(),
        config: cfg.clone(),
        stages: run.stages,
        answer,
        hash: String::new(),
        artifacts: run.artifacts,
        timings_ms: run.timings,
        result,
    };
    report.hash = content_hash(&report.to_json());
    Ok(report)
}

/// Ok: the certified dt^R; Err: a No or Unknown answer.
fn stages(input: &Decl, cfg: &BudgetConfig, run: &mut Run) -> Result<Result<PairedSpec, Answer>, PipelineError> {
    let name = input.name().to_string();
    let (att, look): (AttSpec, Option<LookAround>) = match input {
        Decl::Att(a) => (a.clone(), None),
        Decl::Pair(PairedSpec::AttU { u, a, .. }) => (a.clone(), Some(u.clone())),
        Decl::Pair(PairedSpec::AttR { b, a, .. }) => (
            a.clone(),
            Some(LookAround {
                name: format!("{name}_look"),
                b: b.clone(),
                l: TdttSpec::identity(&format!("{name}_id"), &b.output),
            }),
        ),
        other => return Err(err("validate", format!("expected an att, attR or attU, got {}", other.name()))),
    };
    run.stage("validate", "ok", None);

    let m = check_monadic(&att);
    if !m.verdict {
        return Err(err("check_monadic", format!("output symbols of rank > 1: {}", m.offending.join(", "))));
    }
    run.stage("check_monadic", "monadic", None);

    if !att.is_deterministic() {
        let v = is_functional(input, &cfg.functionality()).map_err(|e| err("is_functional", e))?;
        let verdict = match &v {
            FunctionalityVerdict::NotFunctional { .. } => "not-functional",
            FunctionalityVerdict::ProductiveCycle { .. } => "productive-cycle",
            FunctionalityVerdict::FunctionalUpTo { .. } => "functional-up-to-depth",
            FunctionalityVerdict::Inconclusive { .. } => "inconclusive",
        };
        run.stage("is_functional", verdict, Some(("json", json(&v))));
        return Ok(Err(match v {
            FunctionalityVerdict::NotFunctional { .. } => Answer::No {
                reason: "not-functional".into(),
                witness: run.last_artifact(),
            },
            _ => Answer::Unknown {
                stage: "determinize".into(),
                reason: "external construction for functional nondeterministic input not implemented".into(),
            },
        }));
    }

    let (circ, witness) = is_circular(&att);
    if circ {
        run.stage("is_circular", "circular", Some(("json", json(&witness))));
        return Ok(Err(Answer::Unknown {
            stage: "is_circular".into(),
            reason: "circular input is not supported".into(),
        }));
    }
    run.stage("is_circular", "noncircular", None);

    let (att, look) = match look {
        None => (att, None),
        Some(u) => {
            let p = normalize_domain_into_range(&u, &att, &name).map_err(|e| err("normalize_domain_into_range", e))?;
            let PairedSpec::AttU { u: u2, a: a2, .. } = &p else {
                return Err(err("normalize_domain_into_range", "unexpected result kind"));
            };
            run.stage("normalize_domain_into_range", "ok", Some(("att", render_spec(&Decl::Pair(p.clone())))));
            (a2.clone(), Some(u2.clone()))
        }
    };

    let att = normalize_ground_rhs(&att);
    run.stage("normalize_ground_rhs", "ok", Some(("att", render_att(&att))));

    match single_path(&att).map_err(|e| err("single_path", e))? {
        SinglePath::Yes => run.stage("single_path", "yes", None),
        SinglePath::No { input: s, v1, v2 } => {
            let w = serde_json::json!({"input": s.to_string(), "v1": v1.to_string(), "v2": v2.to_string()});
            run.stage("single_path", "no", Some(("json", json(&w))));
            return Ok(Err(Answer::No {
                reason: "single-path-fails".into(),
                witness: run.last_artifact(),
            }));
        }
    }

    let h = associate(&att).map_err(|e| err("associate", e))?;
    run.stage(
        "associate",
        &format!("kappa={}", h.kappa),
        Some(("att", render_spec(&Decl::Pair(h.to_paired(&format!("{name}_assoc")))))),
    );

    let tw = build_two_way(&h).map_err(|e| err("build_two_way", e))?;
    run.stage("build_two_way", "ok", Some(("att", render_att(&tw.att))));

    let one = match one_way_definability(&tw, &cfg.definability()).map_err(|e| err("one_way_definability", e))? {
        DefinabilityResult::Definable { spec, transducer, verified_length, .. } => {
            run.stage(
                "one_way_definability",
                &format!("definable (verified to length {verified_length})"),
                Some(("tdtt", spec)),
            );
            transducer.to_tdtt(&format!("{name}_O"), &tw.att.input, &tw.att.output)
        }
        DefinabilityResult::NotDefinable { certificate } => {
            run.stage("one_way_definability", "not-definable", Some(("json", json(&certificate))));
            return Ok(Err(Answer::No {
                reason: "not-definable".into(),
                witness: run.last_artifact(),
            }));
        }
        DefinabilityResult::Unknown { reason } => {
            run.stage("one_way_definability", "unknown", None);
            return Ok(Err(Answer::Unknown {
                stage: "one_way_definability".into(),
                reason,
            }));
        }
    };

    let t = back_convert(&one, &h.b.output).map_err(|e| err("back_convert", e))?;
    run.stage("back_convert", "ok", Some(("tdtt", render_tdtt(&t))));

    let n = PairedSpec::DtR {
        name: format!("{name}_N"),
        b: h.b.clone(),
        t,
    };
    let mut d = uniformize(&n, &format!("{name}_dtR")).map_err(|e| err("uniformize", e))?;
    run.stage("uniformize", "ok", Some(("dtr", render_spec(&Decl::Pair(d.clone())))));

    if let Some(u) = look {
        d = compose_dtr(&PairedSpec::LookAround(u), &d, &format!("{name}_dtR")).map_err(|e| err("compose_dtR", e))?;
        run.stage("compose_dtR", "ok", Some(("dtr", render_spec(&Decl::Pair(d.clone())))));
    }

    let eq = bounded_equivalence_over(input, &Decl::Pair(d.clone()), input.input(), cfg.equivalence_depth, &cfg.steps());
    match eq {
        Equivalence::Equal { depth, .. } => {
            run.stage("bounded_equivalence", &format!("equal to depth {depth}"), Some(("dtr", render_spec(&Decl::Pair(d.clone())))));
            Ok(Ok(d))
        }
        other => {
            run.stage("bounded_equivalence", "differs", Some(("json", json(&other))));
            Ok(Err(Answer::Unknown {
                stage: "bounded_equivalence".into(),
                reason: "synthesized transducer failed certification".into(),
            }))
        }
    }
}
