use std::io::Write;

use super::config::{Instantiation, PolicyKind, RunConfig};
use crate::alloc::{EfcThresholdState, EfxState, Item, ItemLedger, PropxState, DEFAULT_K_MAX};
use crate::baselines::{
    pdm_stream_generate, stream_generate, Benade2, BenadeParams, DeficitGreedy, ItemPolicy,
    RoundRobin, UtilGreedy,
};
use crate::discounted::{c_gamma_prefix, windowed_deficit, DiscountedPropState, WindowState};
use crate::error::{Error, Result};
use crate::exact::{ExpPolicy, DEFAULT_K_MAX as EXACT_K_MAX};
use crate::framework::{
    choose_action, ct_threshold, disappointed_count, growth_slack, profile_psi,
    verify_moment_witness_contracted, DeficitModel, INEQ_TOL,
};
use crate::metrics::{gini, gmd, gmd_bound};
use crate::pdm::PdmState;

pub const CSV_HEADER: &str = "t,action,max_deficit,ct_bound,psi,disappointed,gini,gmd,gmd_bound";

/// One row per round; `action` is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub t: usize,
    pub action: usize,
    pub max_deficit: f64,
    pub ct_bound: f64,
    pub psi: f64,
    pub disappointed: usize,
    pub gini: f64,
    pub gmd: f64,
    pub gmd_bound: f64,
}

/// Counts of failed in-run checks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckSummary {
    pub rounds: usize,
    pub bound_violations: usize,
    pub growth_violations: usize,
    pub gmd_violations: usize,
    pub witness_rounds: usize,
    pub witness_failures: usize,
    pub worst_witness_violation: f64,
    pub max_windowed_deficit: Option<f64>,
    pub first_failure: Option<String>,
}

impl CheckSummary {
    pub fn passed(&self) -> bool {
        self.bound_violations == 0
            && self.growth_violations == 0
            && self.gmd_violations == 0
            && self.witness_failures == 0
    }

    fn fail(&mut self, msg: String) {
        self.first_failure.get_or_insert(msg);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<RunRecord>,
    pub checks: CheckSummary,
}

/// Runs the configured simulation and collects per-round metrics.
pub fn run_simulation(cfg: &RunConfig) -> Result<RunOutput> {
    simulate(cfg, false)
}

/// As [`run_simulation`], also checking the moment witness of every round.
pub fn run_verify_moments(cfg: &RunConfig) -> Result<RunOutput> {
    simulate(cfg, true)
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    verify: bool,
    gamma: Option<f64>,
}

fn simulate(cfg: &RunConfig, verify: bool) -> Result<RunOutput> {
    cfg.validate()?;
    let ctx = Ctx {
        cfg,
        verify,
        gamma: cfg.gamma,
    };
    let n = cfg.n;
    match cfg.instantiation {
        Instantiation::Propx => {
            let mut m = PropxState::new(n)?;
            if let Some(p) = cfg.p {
                m = m.with_p(p)?;
            }
            run_items(m, &ctx)
        }
        Instantiation::Efx => {
            let mut m = EfxState::new(n)?;
            if let Some(p) = cfg.p {
                m = m.with_p(p)?;
            }
            run_items(m, &ctx)
        }
        Instantiation::Efc => {
            let theta = cfg.theta.as_deref().unwrap_or(&[]);
            let k = cfg.k_max.unwrap_or(DEFAULT_K_MAX);
            let mut m = EfcThresholdState::with_k_max(n, theta, k)?;
            if let Some(p) = cfg.p {
                m = m.with_p(p)?;
            }
            run_items(m, &ctx)
        }
        Instantiation::Discounted => {
            let mut m = DiscountedPropState::new(n, cfg.gamma.unwrap_or(0.0))?;
            if let Some(p) = cfg.p {
                m = m.with_p(p)?;
            }
            run_items(m, &ctx)
        }
        Instantiation::Pdm => {
            let mut m = PdmState::new(n, cfg.outcomes())?;
            if let Some(p) = cfg.p {
                m = m.with_p(p)?;
            }
            let rounds = pdm_stream_generate(&cfg.stream_spec(), cfg.outcomes())?;
            drive(m, &rounds, &ctx, |m, r| {
                Ok(choose_action(&m.candidates(r)?, m.params())?.0)
            })
        }
    }
}

fn baseline(cfg: &RunConfig) -> Result<Box<dyn ItemPolicy>> {
    Ok(match cfg.policy {
        PolicyKind::RoundRobin => Box::new(RoundRobin),
        PolicyKind::UtilGreedy => Box::new(UtilGreedy),
        PolicyKind::DeficitGreedy => Box::new(DeficitGreedy),
        PolicyKind::Benade2 => Box::new(Benade2(BenadeParams::new(cfg.length.max(1) as u64)?)),
        PolicyKind::ExpExact => {
            let k = cfg.k_max.map_or(EXACT_K_MAX, |k| k as u32);
            Box::new(ExpPolicy::new(cfg.n, cfg.c.unwrap_or(1.0), k)?)
        }
        PolicyKind::Potential => unreachable!("handled by the model"),
    })
}

fn run_items<M: DeficitModel<Input = Item>>(model: M, ctx: &Ctx) -> Result<RunOutput> {
    let cfg = ctx.cfg;
    let items = stream_generate(&cfg.stream_spec())?;
    let mut window = match cfg.window {
        Some(w) => Some(WindowState::new(cfg.n, w)?),
        None => None,
    };
    let mut max_window = f64::NEG_INFINITY;
    let mut track = |item: &Item, a: usize| -> Result<()> {
        if let Some(w) = window.as_mut() {
            w.push(item.clone(), a)?;
            for i in 0..cfg.n {
                max_window = max_window.max(windowed_deficit(w, i));
            }
        }
        Ok(())
    };
    let mut out = if cfg.policy == PolicyKind::Potential {
        drive(model, &items, ctx, |m, item| {
            let a = choose_action(&m.candidates(item)?, m.params())?.0;
            track(item, a)?;
            Ok(a)
        })?
    } else {
        let mut policy = baseline(cfg)?;
        let mut ledger = ItemLedger::new(cfg.n);
        drive(model, &items, ctx, |_, item| {
            let a = policy.choose(&ledger, item)?;
            ledger.apply(item, a)?;
            policy.observe(item, a)?;
            track(item, a)?;
            Ok(a)
        })?
    };
    if cfg.window.is_some() {
        out.checks.max_windowed_deficit = Some(max_window.max(0.0));
    }
    Ok(out)
}

fn drive<M: DeficitModel>(
    mut model: M,
    inputs: &[M::Input],
    ctx: &Ctx,
    mut choose: impl FnMut(&M, &M::Input) -> Result<usize>,
) -> Result<RunOutput> {
    let potential = ctx.cfg.policy == PolicyKind::Potential;
    let slack = growth_slack(model.params());
    let mut checks = CheckSummary::default();
    let mut records = Vec::with_capacity(inputs.len());
    let mut psi_prev = profile_psi(&model.profile(), model.params());
    for (k, input) in inputs.iter().enumerate() {
        let t = k + 1;
        if ctx.verify {
            let z = model.profile();
            let set = model.candidates(input)?;
            let w = model.witness(input)?;
            let rep = verify_moment_witness_contracted(
                &z,
                &set,
                &w,
                model.params(),
                model.contraction(),
            )?;
            checks.witness_rounds += 1;
            checks.worst_witness_violation =
                checks.worst_witness_violation.max(rep.worst_violation);
            if !rep.passed() {
                checks.witness_failures += 1;
                checks.fail(format!(
                    "round {t}: witness rows {:?} fail",
                    rep.failing_rows()
                ));
            }
        }
        let a = choose(&model, input)?;
        model.apply(input, crate::framework::ActionId(a))?;

        let params = model.params();
        let z = model.profile();
        let psi = profile_psi(&z, params);
        let ct = match ctx.gamma {
            Some(g) => c_gamma_prefix(params, g, t as u64)?,
            None => ct_threshold(t as u64, params),
        };
        let c = ctx.cfg.c.unwrap_or(ct);
        let rec = RunRecord {
            t,
            action: a + 1,
            max_deficit: z.max(),
            ct_bound: ct,
            psi,
            disappointed: disappointed_count(&z, c),
            gini: gini(&z),
            gmd: gmd(&z),
            gmd_bound: gmd_bound(psi, params),
        };
        if rec.gmd > rec.gmd_bound + INEQ_TOL {
            checks.gmd_violations += 1;
            checks.fail(format!(
                "round {t}: gmd {} above {}",
                rec.gmd, rec.gmd_bound
            ));
        }
        if potential {
            if rec.max_deficit > rec.ct_bound + INEQ_TOL {
                checks.bound_violations += 1;
                checks.fail(format!(
                    "round {t}: deficit {} above {}",
                    rec.max_deficit, rec.ct_bound
                ));
            }
            if psi > psi_prev + slack + INEQ_TOL {
                checks.growth_violations += 1;
                checks.fail(format!("round {t}: potential grew by {}", psi - psi_prev));
            }
        }
        psi_prev = psi;
        records.push(rec);
    }
    checks.rounds = records.len();
    Ok(RunOutput { records, checks })
}

/// Fixed 17-significant-digit scientific notation, `inf` for infinity.
pub fn format_real(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

/// Writes the header and one line per record.
pub fn write_csv(records: &[RunRecord], out: &mut dyn Write) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    writeln!(out, "{CSV_HEADER}").map_err(io)?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.t,
            r.action,
            format_real(r.max_deficit),
            format_real(r.ct_bound),
            format_real(r.psi),
            r.disappointed,
            format_real(r.gini),
            format_real(r.gmd),
            format_real(r.gmd_bound),
        )
        .map_err(io)?;
    }
    Ok(())
}
