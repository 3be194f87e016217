//! End-to-end batch initialization: wireless rounds, LED transmission,
//! decoding, matching, the administrator's decisions and key delivery.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::crypto::{self, sas_length, MAX_SAS_BITS, MIN_SAS_BITS};
use crate::decoder::{
    capture_plan, decode_session, DecodeConfig, DecodeOutput, DecoderError, FailureCause, Verdict,
};
use crate::encoder::{
    build_schedule, render_schedule, FrameSchedule, LayoutParams, LedLayout, NoiseModel,
    RasterImage,
};
use crate::exec::Execution;
use crate::protocol::{
    run_batch, AdversaryPolicy, BatchConfig, BatchRun, Decision, MatchStatus, SessionFailure,
    SyncStatus, Transcript, DEFAULT_DELTA_MS,
};
use crate::seed::{derive_seed, rng_for, subseed};

use super::faults::{
    apply_camera_faults, apply_node_faults, capture_lost, distance_scale, FaultSpec,
};
use super::matching::match_sas;
use super::HarnessError;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n: usize,
    pub k: usize,
    /// Permit `k < sas_length(n)`.
    pub allow_short_sas: bool,
    pub data_leds: usize,
    pub hold_time_ms: u64,
    pub delta_ms: u64,
    pub latency_ms: u64,
    pub layout: LayoutParams,
    pub noise: NoiseModel,
    pub faults: Vec<FaultSpec>,
    pub adversary: AdversaryPolicy,
    /// Chance that the administrator gets an individual turn-off decision
    /// wrong.
    pub admin_error_rate: f64,
    /// Repeats of the LED phase after a detection failure.
    pub camera_retries: usize,
    pub decode: DecodeConfig,
    pub seed: u64,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n: 16,
            k: 20,
            allow_short_sas: false,
            data_leds: 2,
            hold_time_ms: 250,
            delta_ms: DEFAULT_DELTA_MS,
            latency_ms: 5,
            layout: LayoutParams::default(),
            noise: NoiseModel::default(),
            faults: vec![],
            adversary: AdversaryPolicy::default(),
            admin_error_rate: 0.0,
            camera_retries: 1,
            decode: DecodeConfig::default(),
            seed: 0,
            exec: Execution::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if !(MIN_SAS_BITS..=MAX_SAS_BITS).contains(&self.k) {
            return bad(format!(
                "k={} outside {MIN_SAS_BITS}..={MAX_SAS_BITS}",
                self.k
            ));
        }
        if !self.allow_short_sas && self.k < sas_length(self.n as u64) {
            return bad(format!(
                "k={} is shorter than the {} bits needed for {} nodes",
                self.k,
                sas_length(self.n as u64),
                self.n
            ));
        }
        if self.data_leds == 0 {
            return bad("data_leds must be at least 1".into());
        }
        if self.hold_time_ms == 0 {
            return bad("hold_time_ms must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.admin_error_rate) {
            return bad("admin_error_rate must lie in [0, 1]".into());
        }
        if !(self.noise.sigma >= 0.0 && self.noise.sigma.is_finite()) {
            return bad("noise sigma must be finite and nonnegative".into());
        }
        for f in &self.faults {
            if f.node().is_some_and(|i| i >= self.n) {
                return bad(format!("fault {f:?} names a node outside the batch"));
            }
            if let FaultSpec::DistanceScale { factor } = f {
                if !(*factor > 0.0 && factor.is_finite()) {
                    return bad("distance factor must be positive".into());
                }
            }
        }
        Ok(())
    }

    pub fn batch_config(&self) -> BatchConfig {
        BatchConfig {
            n: self.n,
            k: self.k,
            hold_time_ms: self.hold_time_ms,
            delta_ms: self.delta_ms,
            latency_ms: self.latency_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeReport {
    pub node: usize,
    pub session_id: u32,
    /// The node finished the wireless rounds and blinked its SAS.
    pub displayed: bool,
    pub wireless_failure: Option<SessionFailure>,
    /// What the node itself showed.
    pub displayed_sas: Option<BitString>,
    /// What the sink read at the node's position.
    pub extracted_sas: Option<BitString>,
    pub sas_status: Option<MatchStatus>,
    /// Session whose computed value the extraction consumed.
    pub matched_session: Option<u32>,
    pub sync_ok: Option<bool>,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub admin_turnoff: bool,
    pub node_decision: Option<Decision>,
    pub sink_accepted: bool,
    pub bootstrap_delivered: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tallies {
    pub passed: usize,
    pub sas_mismatch: usize,
    pub sync_error: usize,
    pub both: usize,
    pub not_detected: usize,
    pub wireless_failures: usize,
    pub camera_retries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub frame_count: usize,
    pub duration_ms: u64,
    pub start_transmission_ms: u64,
    pub decision_ms: u64,
    pub attempts: usize,
    pub tallies: Tallies,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchReport {
    pub version: u32,
    pub config: ScenarioConfig,
    pub per_node: Vec<NodeReport>,
    pub batch: BatchSummary,
}

impl BatchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Everything a scenario produced, for writing to disk or further checks.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub report: BatchReport,
    /// Full layout of all `n` displays.
    pub layout: LedLayout,
    /// Layout of the displays that took part in the LED phase, in schedule
    /// order.
    pub active_layout: LedLayout,
    pub active_nodes: Vec<usize>,
    pub schedule: Option<FrameSchedule>,
    /// Captured frames of the final LED attempt.
    pub frames: Vec<RasterImage>,
    pub transcript: Transcript,
    pub decode: Option<DecodeOutput>,
}

struct LedPhase {
    schedule: FrameSchedule,
    frames: Vec<RasterImage>,
    decode: DecodeOutput,
    st_time: u64,
    attempts: usize,
}

fn led_phase(
    config: &ScenarioConfig,
    layout: &LedLayout,
    batch: &mut BatchRun,
    active: &[usize],
) -> Result<LedPhase, HarnessError> {
    let sas: Vec<_> = active
        .iter()
        .map(|&i| batch.nodes[i].start_transmission())
        .collect::<Result<_, _>>()?;
    let mut schedule = build_schedule(&sas, layout, config.hold_time_ms)?;
    apply_node_faults(&mut schedule, &config.faults, |i| {
        active.iter().position(|&a| a == i)
    });
    let frame_count = schedule.frames.len();
    let mut noise = config.noise.clone();
    apply_camera_faults(&mut noise, &config.faults, frame_count);

    let mut st_time = batch.clock;
    let mut attempt = 0;
    loop {
        attempt += 1;
        let rendered = render_schedule(
            layout,
            &schedule,
            &noise,
            subseed(config.seed, "led-phase", attempt as u64),
            config.exec,
        )?;
        let plan = capture_plan(st_time, config.hold_time_ms, frame_count);
        if let Some(at) = capture_lost(&config.faults) {
            if at < frame_count {
                return Err(HarnessError::CaptureLost { frame: at });
            }
        }
        let frames: Vec<RasterImage> = plan
            .timestamps
            .iter()
            .filter_map(|&t| plan.frame_at(t).and_then(|i| rendered.get(i).cloned()))
            .collect();
        let mut dc = config.decode.clone();
        dc.exec = config.exec;
        match decode_session(&frames, layout.led_count(), config.k, config.data_leds, &dc) {
            Ok(decode) => {
                return Ok(LedPhase {
                    schedule,
                    frames,
                    decode,
                    st_time,
                    attempts: attempt,
                })
            }
            Err(DecoderError::DetectionIncomplete { .. }) if attempt <= config.camera_retries => {
                st_time += schedule.duration_ms();
            }
            Err(cause) => {
                return Err(HarnessError::BatchAborted {
                    attempts: attempt,
                    cause,
                })
            }
        }
    }
}

/// Index of the active display whose sync LED lies nearest to `p`, if it is
/// within one inter-display spacing.
fn display_at(layout: &LedLayout, p: (f64, f64), max_dist: f64) -> Option<usize> {
    layout
        .nodes
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let (x, y) = d.sync_led.center;
            (i, ((x - p.0).powi(2) + (y - p.1).powi(2)).sqrt())
        })
        .filter(|&(_, dist)| dist < max_dist)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutcome, HarnessError> {
    config.validate()?;
    let mut batch = run_batch(&config.batch_config(), &config.adversary, config.seed)?;
    let params = config.layout.scaled(distance_scale(&config.faults));
    let layout = LedLayout::grid(config.n, config.data_leds, &params)?;
    let active = batch.displaying();
    let active_layout = layout.subset(&active);

    let led = if active.is_empty() {
        None
    } else {
        Some(led_phase(config, &active_layout, &mut batch, &active)?)
    };

    // Bind decoded clusters to physical displays for reporting only; the
    // sink itself binds by SAS value.
    let n = config.n;
    let mut cluster_of: Vec<Option<usize>> = vec![None; n];
    let mut statuses = None;
    if let Some(phase) = &led {
        for (c, e) in phase.decode.entries.iter().enumerate() {
            if let Some(slot) = display_at(&active_layout, e.sync_center, params.inter_spacing) {
                cluster_of[active[slot]].get_or_insert(c);
            }
        }
        let expected = batch.expected_sas();
        let computed: Vec<_> = expected.iter().map(|(_, v)| v.clone()).collect();
        let extracted: Vec<BitString> =
            phase.decode.entries.iter().map(|e| e.sas.clone()).collect();
        let m = match_sas(&extracted, &computed)?;
        for (j, status) in m.computed.iter().enumerate() {
            let sid = expected[j].0 .0 as usize;
            if *status != MatchStatus::Free {
                batch.sinks[sid].set_match_status(*status)?;
            }
        }
        for (c, bound) in m.bound_to.iter().enumerate() {
            if let Some(j) = bound {
                let sid = expected[*j].0 .0 as usize;
                let ok = phase.decode.entries[c].sync_ok;
                batch.sinks[sid].set_sync_status(if ok {
                    SyncStatus::Ok
                } else {
                    SyncStatus::Error
                });
            }
        }
        statuses = Some((m, expected));
    }

    let (st_time, duration, decision_time) = match &led {
        Some(p) => {
            let d = p.schedule.duration_ms();
            (p.st_time, d, p.st_time + d)
        }
        None => (batch.clock, 0, batch.clock),
    };

    let mut admin_rng = rng_for(config.seed, "admin", 0);
    let mut per_node = Vec::with_capacity(n);
    let mut tallies = Tallies {
        camera_retries: led.as_ref().map_or(0, |p| p.attempts - 1),
        ..Tallies::default()
    };
    for i in 0..n {
        let displayed = active.contains(&i);
        let decoded = cluster_of[i].and_then(|c| {
            let (phase, (m, expected)) = (led.as_ref()?, statuses.as_ref()?);
            Some((
                &phase.decode.entries[c],
                m.extracted[c],
                m.bound_to[c].map(|j| expected[j].0 .0),
            ))
        });
        let verdict = match decoded {
            Some((e, status, _)) => Verdict::from_checks(status == MatchStatus::Used, e.sync_ok),
            None => Verdict::Failed(FailureCause::NotDetected),
        };
        match verdict {
            Verdict::Passed => tallies.passed += 1,
            Verdict::Failed(FailureCause::SasMismatch) => tallies.sas_mismatch += 1,
            Verdict::Failed(FailureCause::SyncError) => tallies.sync_error += 1,
            Verdict::Failed(FailureCause::Both) => tallies.both += 1,
            Verdict::Failed(FailureCause::NotDetected) => tallies.not_detected += 1,
        }
        let wireless_failure = batch.failures.get(&batch.nodes[i].id()).cloned();
        if wireless_failure.is_some() {
            tallies.wireless_failures += 1;
        }

        let mut node_decision = None;
        let mut admin_turnoff = false;
        if displayed {
            batch.nodes[i].finish_transmission()?;
            admin_turnoff = !verdict.passed();
            if config.admin_error_rate > 0.0 && admin_rng.gen_bool(config.admin_error_rate) {
                admin_turnoff = !admin_turnoff;
            }
            let deadline = batch.nodes[i].deadline().expect("set in round one");
            let at = if admin_turnoff {
                decision_time
            } else {
                deadline.max(decision_time)
            };
            node_decision = Some(batch.nodes[i].finalize(admin_turnoff, at)?);
        }

        let sink_key = batch.sinks[i].accept();
        let node_key = batch.nodes[i].link_key().copied();
        let bootstrap_delivered = match (sink_key, node_key) {
            (Some(sk), Some(nk)) => {
                let material = derive_seed(config.seed, "bootstrap", i as u64);
                let sealed = crypto::seal_bootstrap(&sk, &material);
                crypto::open_bootstrap(&nk, &sealed).is_ok_and(|m| m == material)
            }
            _ => false,
        };

        per_node.push(NodeReport {
            node: i,
            session_id: batch.nodes[i].id().0,
            displayed,
            wireless_failure,
            displayed_sas: batch.nodes[i]
                .sas()
                .filter(|_| displayed)
                .map(|s| s.bits().clone()),
            extracted_sas: decoded.map(|(e, _, _)| e.sas.clone()),
            sas_status: decoded.map(|(_, s, _)| s),
            matched_session: decoded.and_then(|(_, _, s)| s),
            sync_ok: decoded.map(|(e, _, _)| e.sync_ok),
            verdict,
            admin_turnoff,
            node_decision,
            sink_accepted: sink_key.is_some(),
            bootstrap_delivered,
        });
    }

    let report = BatchReport {
        version: REPORT_VERSION,
        config: config.clone(),
        per_node,
        batch: BatchSummary {
            frame_count: led.as_ref().map_or(0, |p| p.schedule.frames.len()),
            duration_ms: duration,
            start_transmission_ms: st_time,
            decision_ms: decision_time,
            attempts: led.as_ref().map_or(0, |p| p.attempts),
            tallies,
        },
    };
    let (schedule, frames, decode) = match led {
        Some(p) => (Some(p.schedule), p.frames, Some(p.decode)),
        None => (None, vec![], None),
    };
    Ok(ScenarioOutcome {
        report,
        layout,
        active_layout,
        active_nodes: active,
        schedule,
        frames,
        transcript: batch.transcript,
        decode,
    })
}
