//! Framework tasks wrapping the simulation operations, plus the factory
//! that builds them from pipeline configuration.
//!
//! Every task declares its collections with the `candidates` type tag and
//! takes its wiring from the config's port maps. Stochastic tasks draw only
//! from the per-(task, event) stream handed in by the scheduler, which is
//! what keeps the output independent of the worker count.

use std::collections::BTreeMap;

use evfwk::config::{PipelineConfig, TaskConfig, TaskFactory};
use evfwk::{Error, EventCtx, H1Id, H2Id, NtId, Services, Task, TaskResult, TaskSpec};
use hbook::{Cell, ColType};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::calorimeter::simulate_towers;
use crate::candidate::Candidate;
use crate::cluster::{cluster_jets, JetDefinition};
use crate::detector::{BinnedTable, DetectorConfig};
use crate::isolation::isolation_ratio;
use crate::kinematics::FourMomentum;
use crate::response::{apply_efficiency, energy_rescale, smear_momentum};
use crate::source::CANDIDATES_TAG;
use crate::tagging::{flavor_tag, tau_tag};

/// Builds the simulation task set: propagator, calorimeter, efficiency,
/// momentum_smear, energy_rescale, isolation, pdg_select, jet_finder,
/// flavor_tag, tau_tag, hist_fill, ntuple_fill, busy.
pub struct SimFactory;

impl TaskFactory for SimFactory {
    fn build(
        &self,
        tc: &TaskConfig,
        pipeline: &PipelineConfig,
    ) -> evfwk::Result<Option<Box<dyn Task>>> {
        let task: Box<dyn Task> = match tc.kind.as_str() {
            "propagator" => Box::new(PropagatorTask::from_config(tc, pipeline)?),
            "calorimeter" => Box::new(CalorimeterTask::from_config(tc, pipeline)?),
            "efficiency" => Box::new(EfficiencyTask::from_config(tc)?),
            "momentum_smear" => Box::new(MomentumSmearTask::from_config(tc)?),
            "energy_rescale" => Box::new(EnergyRescaleTask::from_config(tc)?),
            "isolation" => Box::new(IsolationTask::from_config(tc)?),
            "pdg_select" => Box::new(PdgSelectTask::from_config(tc)?),
            "jet_finder" => Box::new(JetFinderTask::from_config(tc)?),
            "flavor_tag" => Box::new(FlavorTagTask::from_config(tc)?),
            "tau_tag" => Box::new(TauTagTask::from_config(tc)?),
            "hist_fill" => Box::new(HistFillTask::from_config(tc)?),
            "ntuple_fill" => Box::new(NtupleFillTask::from_config(tc)?),
            "busy" => Box::new(BusyTask::from_config(tc)?),
            _ => return Ok(None),
        };
        Ok(Some(task))
    }
}

fn params<T: DeserializeOwned>(tc: &TaskConfig) -> evfwk::Result<T> {
    let value = if tc.params.is_null() {
        serde_json::Value::Object(Default::default())
    } else {
        tc.params.clone()
    };
    serde_json::from_value(value)
        .map_err(|e| Error::Config(format!("task `{}`: bad params: {e}", tc.id)))
}

fn port(map: &BTreeMap<String, String>, name: &str, tc: &TaskConfig) -> evfwk::Result<String> {
    map.get(name).cloned().ok_or_else(|| {
        Error::Config(format!("task `{}`: missing port `{name}`", tc.id))
    })
}

fn detector_of(pipeline: &PipelineConfig, task_id: &str) -> evfwk::Result<DetectorConfig> {
    let value = pipeline.detector.as_ref().ok_or_else(|| {
        Error::Config(format!("task `{task_id}`: config has no detector section"))
    })?;
    let det: DetectorConfig = serde_json::from_value(value.clone())
        .map_err(|e| Error::Config(format!("detector: {e}")))?;
    det.validate().map_err(|e| Error::Config(format!("detector: {e}")))?;
    Ok(det)
}

fn checked_table(table: BinnedTable, tc: &TaskConfig) -> evfwk::Result<BinnedTable> {
    table
        .validate()
        .map_err(|e| Error::Config(format!("task `{}`: {e}", tc.id)))?;
    Ok(table)
}

/// in: candidates at their production vertex. out: candidates carried to
/// the tracker boundary.
pub struct PropagatorTask {
    spec: TaskSpec,
    input: String,
    output: String,
    det: DetectorConfig,
}

impl PropagatorTask {
    fn from_config(tc: &TaskConfig, pipeline: &PipelineConfig) -> evfwk::Result<PropagatorTask> {
        let input = port(&tc.inputs, "in", tc)?;
        let output = port(&tc.outputs, "out", tc)?;
        Ok(PropagatorTask {
            spec: TaskSpec::new(&tc.id)
                .input(&input, CANDIDATES_TAG)
                .output(&output, CANDIDATES_TAG),
            input,
            output,
            det: detector_of(pipeline, &tc.id)?,
        })
    }
}

impl Task for PropagatorTask {
    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn process(&self, ctx: &mut EventCtx) -> TaskResult {
        let cands = ctx.get::<Vec<Candidate>>(&self.input)?;
        let mut out = Vec::with_capacity(cands.len());
        for c in cands.iter() {
            out.push(crate::propagate::propagate(c, &self.det)?);
        }
        ctx.put(&self.output, out)?;
        Ok(())
    }
}

/// in: propagated candidates. out: smeared calorimeter towers.
pub struct CalorimeterTask {
    spec: TaskSpec,
    input: String,
    output: String,
    det: DetectorConfig,
}

impl CalorimeterTask {
    fn from_config(tc: &TaskConfig, pipeline: &PipelineConfig) -> evfwk::Result<CalorimeterTask> {
        let input = port(&tc.inputs, "in", tc)?;
        let output = port(&tc.outputs, "out", tc)?;
        Ok(CalorimeterTask {
            spec: TaskSpec::new(&tc.id)
                .input(&input, CANDIDATES_TAG)
                .output(&output, CANDIDATES_TAG),
            input,
            output,
            det: detector_of(pipeline, &tc.id)?,
        })
    }
}

impl Task for CalorimeterTask {
    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn process(&self, ctx: &mut EventCtx) -> TaskResult {
        let cands = ctx.get::<Vec<Candidate>>(&self.input)?;
        let towers = simulate_towers(&cands, &self.det, ctx.rng());
        ctx.put(&self.output, towers)?;
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableParams {
    table: BinnedTable,
}

/// in: candidates. out: the subset surviving the efficiency table.
pub struct EfficiencyTask {
    spec: TaskSpec,
    input: String,
    output: String,
    table: BinnedTable,
}

impl EfficiencyTask {
    fn from_config(tc: &TaskConfig) -> evfwk::Result<EfficiencyTask> {
        let input = port(&tc.inputs, "in", tc)?;
        let output = port(&tc.outputs, "out", tc)?;
        let p: TableParams = params(tc)?;
        Ok(EfficiencyTask {
            spec: TaskSpec::new(&tc.id)
                .input(&input, CANDIDATES_TAG)
                .output(&output, CANDIDATES_TAG),
            input,
            output,
            table: checked_table(p.table, tc)?,
        })
    }
}

impl Task for EfficiencyTask {
    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn process(&self, ctx: &mut EventCtx) -> TaskResult {
        let cands = ctx.get::<Vec<Candidate>>(&self.input)?;
        let mut kept = Vec::new();
        for c in cands.iter() {
            if apply_efficiency(c, &self.table, ctx.rng()) {
                kept.push(c.clone());
            }
        }
        ctx.put(&self.output, kept)?;
        Ok(())
    }
}

/// in: candidates. out: candidates with Gaussian pt smearing applied.
pub struct MomentumSmearTask {
    spec: TaskSpec,
    input: String,
    output: String,
    table: BinnedTable,
}

impl MomentumSmearTask {
    fn from_config(tc: &TaskConfig) -> evfwk::Result<MomentumSmearTask> {
        let input = port(&tc.inputs, "in", tc)?;
        let output = port(&tc.outputs, "out", tc)?;
        let p: TableParams = params(tc)?;
        Ok(MomentumSmearTask {
            spec: TaskSpec::new(&tc.id)
                .input(&input, CANDIDATES_TAG)
                .output(&output, CANDIDATES_TAG),
            input,
            output,
            table: checked_table(p.table, tc)?,
        })
    }
}

impl Task for MomentumSmearTask {
    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn process(&self, ctx: &mut EventCtx) -> TaskResult {
        let cands = ctx.get::<Vec<Candidate>>(&self.input)?;
        let mut out = Vec::with_capacity(cands.len());
        for c in cands.iter() {
            out.push(smear_momentum(c, &self.table, ctx.rng()));
        }
        ctx.put(&self.output, out)?;
        Ok(())
    }
}

/// in: candidates. out: candidates with the energy scale applied.
pub struct EnergyRescaleTask {
    spec: TaskSpec,
    input: String,
    output: String,
    table: BinnedTable,
}

impl EnergyRescaleTask {
    fn from_config(tc: &TaskConfig) -> evfwk::Result<EnergyRescaleTask> {
        let input = port(&tc.inputs, "in", tc)?;
        let output = port(&tc.outputs, "out", tc)?;
        let p: TableParams = params(tc)?;
        Ok(EnergyRescaleTask {
            spec: TaskSpec::new(&tc.id)
                .input(&input, CANDIDATES_TAG)
                .output(&output, CANDIDATES_TAG),
            input,
            output,
            table: checked_table(p.table, tc)?,
        })
    }
}

impl Task for EnergyRescaleTask {
    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn process(&self, ctx: &mut EventCtx) -> TaskResult {
        let cands = ctx.get::<Vec<Candidate>>(&self.input)?;
        let out: Vec<Candidate> = cands.iter().map(|c| energy_rescale(c, &self.table)).collect();
        ctx.put(&self.output, out)?;
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IsolationParams {
    dr_max: f64,
    threshold: f64,
}

/// in: candidates. out: the same candidates with isolation flags set from
/// the pt flowing in a cone around each one.
pub struct IsolationTask {
    spec: TaskSpec,
    input: String,
    output: String,
    dr_max: f64,
    threshold: f64,
}

impl IsolationTask {
    fn from_config(tc: &TaskConfig) -> evfwk::Result<IsolationTask> {
        let input = port(&tc.inputs, "in", tc)?;
        let output = port(&tc.outputs, "out", tc)?;
        let p: IsolationParams = params(tc)?;
        Ok(IsolationTask {
            spec: TaskSpec::new(&tc.id)
                .input(&input, CANDIDATES_TAG)
                .output(&output, CANDIDATES_TAG),
            input,
            output,
            dr_max: p.dr_max,
            threshold: p.threshold,
        })
    }
}

impl Task for IsolationTask {
    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn process(&self, ctx: &mut EventCtx) -> TaskResult {
        let cands = ctx.get::<Vec<Candidate>>(&self.input)?;
        let mut out = cands.as_ref().clone();
        for (i, c) in out.iter_mut().enumerate() {
            c.flags.isolated = isolation_ratio(&cands, i, self.dr_max)? < self.threshold;
        }
        ctx.put(&self.output, out)?;
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PdgSelectParams {
    /// Absolute pdg codes to keep.
    pdg: Vec<i64>,
}

/// in: candidates. out: the species subset (|pdg| match).
pub struct PdgSelectTask {
    spec: TaskSpec,
    input: String,
    output: String,
    pdg: Vec<i64>,
}

impl PdgSelectTask {
    fn from_config(tc: &TaskConfig) -> evfwk::Result<PdgSelectTask> {
        let input = port(&tc.inputs, "in", tc)?;
        let output = port(&tc.outputs, "out", tc)?;
        let p: PdgSelectParams = params(tc)?;
        Ok(PdgSelectTask {
            spec: TaskSpec::new(&tc.id)
                .input(&input, CANDIDATES_TAG)
                .output(&output, CANDIDATES_TAG),
            input,
            output,
            pdg: p.pdg,
        })
    }
}

impl Task for PdgSelectTask {
    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn process(&self, ctx: &mut EventCtx) -> TaskResult {
        let cands = ctx.get::<Vec<Candidate>>(&self.input)?;
        let out: Vec<Candidate> = cands
            .iter()
            .filter(|c| self.pdg.contains(&c.pdg_id.abs()))
            .cloned()
            .collect();
        ctx.put(&self.output, out)?;
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JetParams {
    p: f64,
    r: f64,
    #[serde(default)]
    pt_min: f64,
}

/// in: candidates. out: clustered jets as candidates (pdg 0), descending pt.
pub struct JetFinderTask {
    spec: TaskSpec,
    input: String,
    output: String,
    def: JetDefinition,
    pt_min: f64,
}

impl JetFinderTask {
    fn from_config(tc: &TaskConfig) -> evfwk::Result<JetFinderTask> {
        let input = port(&tc.inputs, "in", tc)?;
        let output = port(&tc.outputs, "out", tc)?;
        let p: JetParams = params(tc)?;
        if !p.r.is_finite() || p.r <= 0.0 {
            return Err(Error::Config(format!(
                "task `{}`: jet radius must be > 0, got {}",
                tc.id, p.r
            )));
        }
        Ok(JetFinderTask {
            spec: TaskSpec::new(&tc.id)
                .input(&input, CANDIDATES_TAG)
                .output(&output, CANDIDATES_TAG),
            input,
            output,
            def: JetDefinition { p: p.p, r: p.r },
            pt_min: p.pt_min,
        })
    }
}

impl Task for JetFinderTask {
    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn process(&self, ctx: &mut EventCtx) -> TaskResult {
        let cands = ctx.get::<Vec<Candidate>>(&self.input)?;
        let moms: Vec<FourMomentum> = cands
            .iter()
            .map(|c| c.momentum)
            .filter(|m| m.pt() > 0.0)
            .collect();
        let jets: Vec<Candidate> = cluster_jets(&moms, self.def, self.pt_min)
            .into_iter()
            .map(|j| Candidate::new(j.momentum, 0))
            .collect();
        ctx.put(&self.output, jets)?;
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FlavorParams {
    eff_b: f64,
    eff_c: f64,
    mistag: f64,
    #[serde(default = "default_match_dr")]
    match_dr: f64,
}

fn default_match_dr() -> f64 {
    0.3
}

/// jets + truth partons in, b-tag flags out.
pub struct FlavorTagTask {
    spec: TaskSpec,
    jets: String,
    truth: String,
    output: String,
    p: FlavorParams,
}

impl FlavorTagTask {
    fn from_config(tc: &TaskConfig) -> evfwk::Result<FlavorTagTask> {
        let jets = port(&tc.inputs, "jets", tc)?;
        let truth = port(&tc.inputs, "truth", tc)?;
        let output = port(&tc.outputs, "out", tc)?;
        Ok(FlavorTagTask {
            spec: TaskSpec::new(&tc.id)
                .input(&jets, CANDIDATES_TAG)
                .input(&truth, CANDIDATES_TAG)
                .output(&output, CANDIDATES_TAG),
            jets,
            truth,
            output,
            p: params(tc)?,
        })
    }
}

impl Task for FlavorTagTask {
    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn process(&self, ctx: &mut EventCtx) -> TaskResult {
        let jets = ctx.get::<Vec<Candidate>>(&self.jets)?;
        let truth = ctx.get::<Vec<Candidate>>(&self.truth)?;
        let mut out = jets.as_ref().clone();
        flavor_tag(
            &mut out,
            &truth,
            self.p.eff_b,
            self.p.eff_c,
            self.p.mistag,
            self.p.match_dr,
            ctx.rng(),
        );
        ctx.put(&self.output, out)?;
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TauParams {
    eff: f64,
    mistag: f64,
    #[serde(default = "default_match_dr")]
    match_dr: f64,
}

/// jets + truth taus in, tau-tag flags out.
pub struct TauTagTask {
    spec: TaskSpec,
    jets: String,
    truth: String,
    output: String,
    p: TauParams,
}

impl TauTagTask {
    fn from_config(tc: &TaskConfig) -> evfwk::Result<TauTagTask> {
        let jets = port(&tc.inputs, "jets", tc)?;
        let truth = port(&tc.inputs, "truth", tc)?;
        let output = port(&tc.outputs, "out", tc)?;
        Ok(TauTagTask {
            spec: TaskSpec::new(&tc.id)
                .input(&jets, CANDIDATES_TAG)
                .input(&truth, CANDIDATES_TAG)
                .output(&output, CANDIDATES_TAG),
            jets,
            truth,
            output,
            p: params(tc)?,
        })
    }
}

impl Task for TauTagTask {
    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn process(&self, ctx: &mut EventCtx) -> TaskResult {
        let jets = ctx.get::<Vec<Candidate>>(&self.jets)?;
        let truth = ctx.get::<Vec<Candidate>>(&self.truth)?;
        let mut out = jets.as_ref().clone();
        tau_tag(
            &mut out,
            &truth,
            self.p.eff,
            self.p.mistag,
            self.p.match_dr,
            ctx.rng(),
        );
        ctx.put(&self.output, out)?;
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HistParams {
    prefix: String,
    #[serde(default = "default_pt_bins")]
    pt_bins: u32,
    #[serde(default = "default_pt_max")]
    pt_max: f64,
    #[serde(default = "default_hist_eta")]
    eta_max: f64,
}

fn default_pt_bins() -> u32 {
    50
}

fn default_pt_max() -> f64 {
    100.0
}

fn default_hist_eta() -> f64 {
    5.0
}

/// Books and fills `{prefix}_pt`, `{prefix}_eta`, `{prefix}_n` and the
/// eta-phi occupancy map for one candidates collection.
pub struct HistFillTask {
    spec: TaskSpec,
    input: String,
    p: HistParams,
    h_pt: Option<H1Id>,
    h_eta: Option<H1Id>,
    h_n: Option<H1Id>,
    h_eta_phi: Option<H2Id>,
}

impl HistFillTask {
    fn from_config(tc: &TaskConfig) -> evfwk::Result<HistFillTask> {
        let input = port(&tc.inputs, "in", tc)?;
        Ok(HistFillTask {
            spec: TaskSpec::new(&tc.id).input(&input, CANDIDATES_TAG),
            input,
            p: params(tc)?,
            h_pt: None,
            h_eta: None,
            h_n: None,
            h_eta_phi: None,
        })
    }
}

impl Task for HistFillTask {
    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn configure(&mut self, svc: &Services) -> TaskResult {
        let p = &self.p;
        self.h_pt = Some(svc.hists.book_h1(
            &format!("{}_pt", p.prefix),
            p.pt_bins,
            0.0,
            p.pt_max,
        )?);
        self.h_eta = Some(svc.hists.book_h1(
            &format!("{}_eta", p.prefix),
            50,
            -p.eta_max,
            p.eta_max,
        )?);
        self.h_n = Some(svc.hists.book_h1(&format!("{}_n", p.prefix), 64, 0.0, 64.0)?);
        self.h_eta_phi = Some(svc.hists.book_h2(
            &format!("{}_eta_phi", p.prefix),
            25,
            -p.eta_max,
            p.eta_max,
            25,
            -std::f64::consts::PI,
            std::f64::consts::PI,
        )?);
        Ok(())
    }

    fn process(&self, ctx: &mut EventCtx) -> TaskResult {
        let cands = ctx.get::<Vec<Candidate>>(&self.input)?;
        ctx.fill(self.h_n.unwrap(), cands.len() as f64);
        for c in cands.iter() {
            let (pt, eta, phi) = (c.momentum.pt(), c.momentum.eta(), c.momentum.phi());
            ctx.fill(self.h_pt.unwrap(), pt);
            ctx.fill(self.h_eta.unwrap(), eta);
            ctx.fill2(self.h_eta_phi.unwrap(), eta, phi);
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NtupleParams {
    name: String,
}

/// Writes one summary row per event for a jets collection: multiplicity,
/// leading pt, scalar pt sum, tag counts.
pub struct NtupleFillTask {
    spec: TaskSpec,
    input: String,
    name: String,
    nt: Option<NtId>,
}

impl NtupleFillTask {
    fn from_config(tc: &TaskConfig) -> evfwk::Result<NtupleFillTask> {
        let input = port(&tc.inputs, "in", tc)?;
        let p: NtupleParams = params(tc)?;
        Ok(NtupleFillTask {
            spec: TaskSpec::new(&tc.id).input(&input, CANDIDATES_TAG),
            input,
            name: p.name,
            nt: None,
        })
    }
}

impl Task for NtupleFillTask {
    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn configure(&mut self, svc: &Services) -> TaskResult {
        self.nt = Some(svc.ntuples.book(
            &self.name,
            vec![
                ("n".into(), ColType::I64),
                ("lead_pt".into(), ColType::F64),
                ("sum_pt".into(), ColType::F64),
                ("n_btag".into(), ColType::I64),
                ("n_tautag".into(), ColType::I64),
            ],
        )?);
        Ok(())
    }

    fn process(&self, ctx: &mut EventCtx) -> TaskResult {
        let cands = ctx.get::<Vec<Candidate>>(&self.input)?;
        let lead = cands
            .iter()
            .map(|c| c.momentum.pt())
            .fold(0.0f64, f64::max);
        let sum: f64 = cands.iter().map(|c| c.momentum.pt()).sum();
        let n_btag = cands.iter().filter(|c| c.flags.b_tagged).count();
        let n_tautag = cands.iter().filter(|c| c.flags.tau_tagged).count();
        ctx.row(
            self.nt.unwrap(),
            vec![
                Cell::I64(cands.len() as i64),
                Cell::F64(lead),
                Cell::F64(sum),
                Cell::I64(n_btag as i64),
                Cell::I64(n_tautag as i64),
            ],
        );
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BusyParams {
    iters: u64,
}

/// CPU burner for scaling benchmarks: a fixed amount of arithmetic per
/// event, output published so the scheduler treats it like real work.
pub struct BusyTask {
    spec: TaskSpec,
    input: String,
    output: String,
    iters: u64,
}

impl BusyTask {
    fn from_config(tc: &TaskConfig) -> evfwk::Result<BusyTask> {
        let input = port(&tc.inputs, "in", tc)?;
        let output = port(&tc.outputs, "out", tc)?;
        let p: BusyParams = params(tc)?;
        Ok(BusyTask {
            spec: TaskSpec::new(&tc.id)
                .input(&input, CANDIDATES_TAG)
                .output(&output, "f64"),
            input,
            output,
            iters: p.iters,
        })
    }
}

impl Task for BusyTask {
    fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    fn process(&self, ctx: &mut EventCtx) -> TaskResult {
        let cands = ctx.get::<Vec<Candidate>>(&self.input)?;
        let mut acc: f64 = cands.iter().map(|c| c.momentum.pt()).sum();
        for k in 0..self.iters {
            acc = (acc + k as f64 * 1e-9).sin().mul_add(0.5, acc * 0.5);
        }
        ctx.put(&self.output, acc)?;
        Ok(())
    }
}
