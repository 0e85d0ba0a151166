use anyhow::{anyhow, bail, Result};
use bumpcert_core::bellman::{
    balanced_signs, check_drop, check_multi_point, check_two_point, signed_value, weighted_l1,
    BellmanPoint,
};
use bumpcert_core::dyadic::{
    carleson_load, n_psi_all, normalize_bump, orlicz_norm_on, DistFn, Lattice, WeightSpec,
};
use bumpcert_core::embedding::{embed_sum_25, embed_sum_26, telescope_audit_25, telescope_audit_26, TelescopeAudit};
use bumpcert_core::gauge::{t_scalar, BumpGauge, GaugeSpec, YoungFunction};
use bumpcert_core::operators::{
    bilinear_form, decompose_complexity, domination_form_shift, two_weight_norm, worst_kernel,
    HaarShift, LeafOperator, Paraproduct,
};
use bumpcert_core::sampling::{
    random_alphas, random_carleson, random_dist_fn, random_leaf_vector, random_scalar,
    random_weight,
};
use clap::ValueEnum;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, OperatorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Suite {
    #[value(name = "bellman-two-point")]
    #[serde(rename = "bellman-two-point")]
    BellmanTwoPoint,
    #[value(name = "bellman-multi")]
    #[serde(rename = "bellman-multi")]
    BellmanMulti,
    #[value(name = "bellman-T")]
    #[serde(rename = "bellman-T")]
    BellmanT,
    #[value(name = "bellman-drop")]
    #[serde(rename = "bellman-drop")]
    BellmanDrop,
    #[value(name = "embed-25")]
    #[serde(rename = "embed-25")]
    Embed25,
    #[value(name = "embed-26")]
    #[serde(rename = "embed-26")]
    Embed26,
    #[value(name = "shift-norm")]
    #[serde(rename = "shift-norm")]
    ShiftNorm,
    #[value(name = "para-norm")]
    #[serde(rename = "para-norm")]
    ParaNorm,
    #[value(name = "complexity-growth")]
    #[serde(rename = "complexity-growth")]
    ComplexityGrowth,
    #[value(name = "lemma-1-1")]
    #[serde(rename = "lemma-1-1")]
    Lemma11,
    #[value(name = "telescope")]
    #[serde(rename = "telescope")]
    Telescope,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::BellmanTwoPoint => "bellman-two-point",
            Suite::BellmanMulti => "bellman-multi",
            Suite::BellmanT => "bellman-T",
            Suite::BellmanDrop => "bellman-drop",
            Suite::Embed25 => "embed-25",
            Suite::Embed26 => "embed-26",
            Suite::ShiftNorm => "shift-norm",
            Suite::ParaNorm => "para-norm",
            Suite::ComplexityGrowth => "complexity-growth",
            Suite::Lemma11 => "lemma-1-1",
            Suite::Telescope => "telescope",
        }
    }

    /// What `lhs`, `rhs` and `slack = lhs − rhs` mean for this suite.
    pub fn relation(self) -> &'static str {
        match self {
            Suite::BellmanTwoPoint => "lhs = ½(B̃₁ + B̃₂) − B̃(mid), rhs = (c/4)(f₁ − f)²/n_Ψ(N)",
            Suite::BellmanMulti => "lhs = Σα_k B̃_k − B̃, rhs = (c/16)(Σα_k|f_k − f|)²/n_Ψ(N); balanced signs checked alongside",
            Suite::BellmanT => "lhs = −∂T/∂A, rhs = N²/(4φ(N)); Hessian det ≥ −1e-12 and ∂²T/∂A² ≥ 0 checked alongside",
            Suite::BellmanDrop => "lhs = Σα_k B̃(X_k) − B̃(X), rhs = a f²/(16 n_Ψ(N))",
            Suite::Embed25 => "lhs = bound·‖f‖², rhs = difference embedding sum",
            Suite::Embed26 => "lhs = bound·‖f‖², rhs = Carleson embedding sum; load recursion checked alongside",
            Suite::ShiftNorm => "lhs = bound, rhs = two-weight norm of the shift",
            Suite::ParaNorm => "lhs = bound, rhs = two-weight norm of the paraproduct",
            Suite::ComplexityGrowth => "lhs = n·bound, rhs = two-weight norm of a complexity-n shift; decomposition checked alongside",
            Suite::Lemma11 => "lhs = C_L·‖w‖_Φ(I), rhs = n_Ψ(N_I^w) at the worst cell",
            Suite::Telescope => "lhs = Bellman increment, rhs = weighted partial sum, at the worst ledger row",
        }
    }
}

/// One verified trial. `slack = lhs − rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub trial: u64,
    pub ok: bool,
    #[serde(deserialize_with = "nan_as_null")]
    pub slack: f64,
    #[serde(deserialize_with = "nan_as_null")]
    pub lhs: f64,
    #[serde(deserialize_with = "nan_as_null")]
    pub rhs: f64,
    pub ratio: Option<f64>,
    pub witness: String,
}

/// JSON writes non-finite numbers as `null`; read them back as NaN.
fn nan_as_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl Row {
    fn slack(trial: u64, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = lhs - rhs;
        Self {
            trial,
            ok: slack >= -tol * (1.0 + rhs.abs()),
            slack,
            lhs,
            rhs,
            ratio: None,
            witness: String::new(),
        }
    }

    fn ratio(trial: u64, ratio: f64, bound: f64, scale: f64, tol: f64) -> Self {
        let (lhs, rhs) = (bound * scale, ratio * scale);
        Self {
            trial,
            ok: ratio <= bound * (1.0 + tol),
            slack: lhs - rhs,
            lhs,
            rhs,
            ratio: Some(ratio),
            witness: String::new(),
        }
    }

    fn failed(trial: u64, err: String) -> Self {
        Self {
            trial,
            ok: false,
            slack: f64::NAN,
            lhs: f64::NAN,
            rhs: f64::NAN,
            ratio: None,
            witness: format!("error: {err}"),
        }
    }

    fn witness(mut self, w: String) -> Self {
        self.witness = w;
        self
    }

    fn also(mut self, cond: bool) -> Self {
        self.ok &= cond && self.slack.is_finite();
        self
    }
}

/// Output of one trial: the row plus an optional ledger excerpt.
pub struct TrialOutput {
    pub row: Row,
    pub ledger: Option<String>,
}

/// Everything shared by the trials of one run.
pub struct Context {
    pub suite: Suite,
    pub cfg: ExperimentConfig,
    pub lattice: Lattice,
    pub g1: BumpGauge,
    pub g2: BumpGauge,
    /// Ratio bound for the ratio suites.
    pub bound: Option<f64>,
    lemma: Option<(BumpGauge, YoungFunction)>,
    shift: Option<HaarShift>,
    para: Option<Paraproduct>,
}

impl Context {
    /// Builds the shared state and rejects configurations the suite cannot use.
    pub fn new(suite: Suite, cfg: ExperimentConfig) -> Result<Self> {
        let lattice = cfg.lattice.build()?;
        let (g1, g2) = cfg.gauges()?;
        for (name, spec) in [("weights.v", &cfg.weights.v), ("weights.w", &cfg.weights.w)] {
            if let Some(s) = spec {
                s.generate_pair_seeded(&lattice, s.seed).map_err(|e| anyhow!("{name}: {e}"))?;
            }
        }
        let mut shift = None;
        let mut para = None;
        match (suite, &cfg.operator) {
            (_, None) => {}
            (Suite::ShiftNorm | Suite::ComplexityGrowth, Some(OperatorConfig::Shift { .. })) => {}
            (Suite::ShiftNorm, Some(OperatorConfig::ExplicitShift { spec })) => {
                shift = Some(HaarShift::from_spec(&lattice, spec).map_err(|e| anyhow!("operator.spec: {e}"))?);
            }
            (Suite::ParaNorm, Some(OperatorConfig::Paraproduct { .. })) => {}
            (Suite::ParaNorm, Some(OperatorConfig::ExplicitParaproduct { spec })) => {
                para = Some(Paraproduct::from_spec(&lattice, spec).map_err(|e| anyhow!("operator.spec: {e}"))?);
            }
            (s @ (Suite::ShiftNorm | Suite::ParaNorm | Suite::ComplexityGrowth), Some(_)) => {
                bail!("operator: this operator kind cannot drive suite {}", s.name())
            }
            _ => {}
        }
        let lemma = if suite == Suite::Lemma11 {
            let alpha = cfg.gauge_specs().0.alpha();
            let gauge = GaugeSpec::YoungLog { alpha }.build()?;
            Some((gauge, YoungFunction::log_power(alpha)?))
        } else {
            None
        };
        let base = (g1.c_25() * g2.c_25()).sqrt();
        let bound = match suite {
            Suite::Embed25 => Some(g1.c_25()),
            Suite::Embed26 => Some(g1.c_26()),
            Suite::ShiftNorm => Some(base * shift_complexity(&cfg, shift.as_ref()) as f64),
            Suite::ParaNorm => Some((g1.c_26() * g2.c_25()).sqrt()),
            Suite::ComplexityGrowth => Some(base * growth_max(&cfg, &lattice) as f64),
            Suite::Lemma11 => lemma.as_ref().and_then(|(g, _)| g.lemma_constant()),
            _ => None,
        };
        Ok(Self {
            suite,
            cfg,
            lattice,
            g1,
            g2,
            bound,
            lemma,
            shift,
            para,
        })
    }

    pub fn run_trial(&self, trial: u64) -> TrialOutput {
        let mut rng = bumpcert_core::sampling::trial_rng(self.cfg.seed, trial);
        let mut ledger = None;
        let result = match self.suite {
            Suite::BellmanTwoPoint => self.two_point(trial, &mut rng),
            Suite::BellmanMulti => self.multi(trial, &mut rng),
            Suite::BellmanT => self.t_function(trial, &mut rng),
            Suite::BellmanDrop => self.drop(trial, &mut rng),
            Suite::Embed25 => self.embed_25(trial, &mut rng),
            Suite::Embed26 => self.embed_26(trial, &mut rng),
            Suite::ShiftNorm => self.shift_norm(trial, &mut rng),
            Suite::ParaNorm => self.para_norm(trial, &mut rng),
            Suite::ComplexityGrowth => self.complexity_growth(trial, &mut rng),
            Suite::Lemma11 => self.lemma(trial, &mut rng),
            Suite::Telescope => self.telescope(trial, &mut rng, &mut ledger),
        };
        let row = result.unwrap_or_else(|e| Row::failed(trial, e.to_string()));
        TrialOutput { row, ledger }
    }

    fn tol(&self) -> f64 {
        self.cfg.tolerance
    }

    fn weight(&self, rng: &mut ChaCha8Rng, spec: Option<&WeightSpec>, second: bool) -> Result<Vec<f64>> {
        Ok(match spec {
            Some(s) => {
                let (v, w) = s.generate_pair_seeded(&self.lattice, s.seed ^ rng.gen::<u64>())?;
                if second { w } else { v }.into_inner()
            }
            None => random_weight(rng, &self.lattice).into_inner(),
        })
    }

    fn draw_w(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let spec = self.cfg.weights.w.as_ref();
        self.weight(rng, spec, true)
    }

    /// `(v, w)`; a single configured spec supplies both components.
    fn draw_pair(&self, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Vec<f64>)> {
        let ws = &self.cfg.weights;
        match (ws.v.as_ref(), ws.w.as_ref()) {
            (Some(s), None) | (None, Some(s)) => {
                let (v, w) = s.generate_pair_seeded(&self.lattice, s.seed ^ rng.gen::<u64>())?;
                Ok((v.into_inner(), w.into_inner()))
            }
            (v, w) => Ok((self.weight(rng, v, false)?, self.weight(rng, w, true)?)),
        }
    }

    fn path(&self, id: usize) -> String {
        let p = self.lattice.path(id);
        if p.is_empty() {
            "root".into()
        } else {
            p
        }
    }

    fn two_point(&self, trial: u64, rng: &mut ChaCha8Rng) -> Result<Row> {
        let (f1, f2) = (random_scalar(rng), random_scalar(rng));
        let n1 = random_dist_fn(rng, self.cfg.max_pieces);
        let n2 = random_dist_fn(rng, self.cfg.max_pieces);
        let chk = check_two_point(f1, &n1, f2, &n2, &self.g1);
        let row = Row::slack(trial, chk.slack.lhs, chk.slack.rhs, self.tol()).also(true);
        let mut w = format!("f1={f1:e} f2={f2:e} n_psi={:e}", chk.n_mid);
        if !row.ok {
            w += &format!(" N1={} N2={}", fmt_dist(&n1), fmt_dist(&n2));
        }
        Ok(row.witness(w))
    }

    fn random_points(&self, rng: &mut ChaCha8Rng, k: usize) -> (Vec<f64>, Vec<BellmanPoint>) {
        let alphas = random_alphas(rng, k);
        let points = (0..k)
            .map(|_| BellmanPoint::new(random_scalar(rng), random_dist_fn(rng, self.cfg.max_pieces)))
            .collect();
        (alphas, points)
    }

    fn multi(&self, trial: u64, rng: &mut ChaCha8Rng) -> Result<Row> {
        let k = rng.gen_range(2..=self.cfg.max_children);
        let (alphas, points) = self.random_points(rng, k);
        let chk = check_multi_point(&alphas, &points, &self.g1)?;
        let x: Vec<f64> = points.iter().map(|p| p.f - chk.f).collect();
        let beta = balanced_signs(&alphas, &x);
        let l1 = weighted_l1(&alphas, &x);
        let gap = signed_value(&alphas, &beta, &x) - 0.5 * l1;
        let balance: f64 = alphas.iter().zip(&beta).map(|(a, b)| a * b).sum();
        let signs_ok = gap >= -1e-12 * (1.0 + l1) && balance.abs() <= 1e-12;
        let row = Row::slack(trial, chk.slack.lhs, chk.slack.rhs, self.tol()).also(signs_ok);
        let mut w = format!(
            "children={k} f={:e} n_psi={:e} sign_gap={gap:e} sign_balance={balance:e}",
            chk.f, chk.n_psi
        );
        if !row.ok {
            w += &fmt_points(&alphas, &points);
        }
        Ok(row.witness(w))
    }

    fn t_function(&self, trial: u64, rng: &mut ChaCha8Rng) -> Result<Row> {
        let a = rng.gen_range(1.0..=2.0);
        let p = rng.gen_range(1.0..8.0);
        let n = (1.0 - rng.gen::<f64>()).powf(p).max(f64::MIN_POSITIVE);
        let t = t_scalar(&self.g1, a, n)?;
        let det = t.hessian_det();
        let rhs = n * n / (4.0 * self.g1.phi(n));
        let row = Row::slack(trial, -t.d_a, rhs, self.tol()).also(det >= -1e-12 && t.d_aa >= 0.0);
        Ok(row.witness(format!("A={a:e} N={n:e} det={det:e} T_AA={:e}", t.d_aa)))
    }

    fn drop(&self, trial: u64, rng: &mut ChaCha8Rng) -> Result<Row> {
        let k = rng.gen_range(2..=self.cfg.max_children);
        let (alphas, mut points) = self.random_points(rng, k);
        for p in points.iter_mut() {
            p.m = Some(rng.gen::<f64>());
        }
        let carried: f64 = alphas.iter().zip(&points).map(|(al, p)| al * p.m.unwrap_or(0.0)).sum();
        let a = rng.gen::<f64>() * (1.0 - carried).max(0.0);
        let chk = check_drop(&alphas, a, &points, &self.g1)?;
        let row = Row::slack(trial, chk.slack.lhs, chk.slack.rhs, self.tol()).also(true);
        let mut w = format!("children={k} a={a:e} M={:e} f={:e} n_psi={:e}", chk.m, chk.f, chk.n_psi);
        if !row.ok {
            w += &fmt_points(&alphas, &points);
        }
        Ok(row.witness(w))
    }

    fn worst_cell(&self, per_cell: &[f64]) -> String {
        let id = per_cell
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, &x)| if x > b.1 { (i, x) } else { b })
            .0;
        self.path(id)
    }

    fn embed_25(&self, trial: u64, rng: &mut ChaCha8Rng) -> Result<Row> {
        let f = random_leaf_vector(rng, self.lattice.num_leaves());
        let w = self.draw_w(rng)?;
        let rep = embed_sum_25(&self.lattice, &f, &w, &self.g1);
        let row = Row::ratio(trial, rep.ratio, rep.bound, rep.norm_sq, self.tol());
        Ok(row.witness(format!("worst_cell={} total={:e}", self.worst_cell(&rep.per_cell), rep.total)))
    }

    fn embed_26(&self, trial: u64, rng: &mut ChaCha8Rng) -> Result<Row> {
        let f = random_leaf_vector(rng, self.lattice.num_leaves());
        let w = self.draw_w(rng)?;
        let a = random_carleson(rng, &self.lattice);
        let rep = embed_sum_26(&self.lattice, &f, &w, &self.g1, &a);
        let recursion = (0..self.lattice.num_cells())
            .map(|id| (carleson_load(&self.lattice, &a, id) - a.load(id)).abs() / (1.0 + a.load(id)))
            .fold(0.0, f64::max);
        let row = Row::ratio(trial, rep.ratio, rep.bound, rep.norm_sq, self.tol()).also(recursion <= 1e-12);
        Ok(row.witness(format!(
            "worst_cell={} total={:e} load_recursion_err={recursion:e}",
            self.worst_cell(&rep.per_cell),
            rep.total
        )))
    }

    /// Bump-normalised `(v, w)`: `v` is rescaled so `n_{Ψ₁}(N^w)·n_{Ψ₂}(N^v) ≤ 1`.
    fn normalized_pair(&self, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let (mut v, w) = self.draw_pair(rng)?;
        let rho = normalize_bump(&self.lattice, &mut v, &w, &self.g2, &self.g1);
        Ok((v, w, rho))
    }

    fn shift_norm(&self, trial: u64, rng: &mut ChaCha8Rng) -> Result<Row> {
        let (v, w, rho) = self.normalized_pair(rng)?;
        let n = shift_complexity(&self.cfg, self.shift.as_ref());
        let extremal = matches!(self.cfg.operator, Some(OperatorConfig::Shift { extremal: true, .. }));
        let leaves = self.lattice.num_leaves();
        let mut attain_ok = true;
        let mut extra = String::new();
        let s = if let Some(s) = &self.shift {
            s.clone()
        } else if extremal {
            let f = random_leaf_vector(rng, leaves);
            let g = random_leaf_vector(rng, leaves);
            let s = worst_kernel(&self.lattice, &f, &g, &v, &w, n)?;
            let form = bilinear_form(&self.lattice, &s, &f, &g, &v, &w);
            let dom = domination_form_shift(&self.lattice, &f, &g, &v, &w, &self.g1, &self.g2, n).value;
            let err = (form - dom).abs() / (1.0 + dom.abs());
            attain_ok = err <= 1e-10;
            extra = format!(" attainment_err={err:e}");
            s
        } else {
            HaarShift::random(rng, &self.lattice, n)?
        };
        let est = two_weight_norm(&self.lattice, &s, &v, &w);
        let bound = self.bound.expect("ratio suite");
        let row = Row::ratio(trial, est.value, bound, 1.0, self.tol()).also(attain_ok);
        Ok(row.witness(format!(
            "complexity={n} bump_scale={rho:e} residual={:e}{extra}",
            est.residual
        )))
    }

    fn para_norm(&self, trial: u64, rng: &mut ChaCha8Rng) -> Result<Row> {
        let (v, w, rho) = self.normalized_pair(rng)?;
        let p = match (&self.para, &self.cfg.operator) {
            (Some(p), _) => p.clone(),
            (None, Some(OperatorConfig::Paraproduct { fill })) => Paraproduct::random(rng, &self.lattice, *fill)?,
            _ => Paraproduct::random(rng, &self.lattice, 0.5)?,
        };
        let peak = p.carleson().loads().iter().cloned().fold(0.0, f64::max);
        let est = two_weight_norm(&self.lattice, &p, &v, &w);
        let row = Row::ratio(trial, est.value, self.bound.expect("ratio suite"), 1.0, self.tol())
            .also(peak <= 1.0 + 1e-12);
        Ok(row.witness(format!("bump_scale={rho:e} carleson_peak={peak:e} residual={:e}", est.residual)))
    }

    fn complexity_growth(&self, trial: u64, rng: &mut ChaCha8Rng) -> Result<Row> {
        let n_max = growth_max(&self.cfg, &self.lattice);
        let n = 1 + (trial % n_max as u64) as usize;
        let (v, w, _) = self.normalized_pair(rng)?;
        let s = HaarShift::random(rng, &self.lattice, n)?;
        let base = (self.g1.c_25() * self.g2.c_25()).sqrt();
        let norm = two_weight_norm(&self.lattice, &s, &v, &w).value;
        let (mut parts_sum, mut part_max, mut reassembly) = (norm, norm, 0.0);
        if n >= 2 {
            let parts = decompose_complexity(&self.lattice, &s)?;
            let full = s.assemble(&self.lattice);
            let mut sum = full.clone() * 0.0;
            parts_sum = 0.0;
            part_max = 0.0;
            for part in &parts {
                sum += part.shift.assemble(&part.lattice);
                let pn = two_weight_norm(&part.lattice, &part.shift, &v, &w).value;
                parts_sum += pn;
                part_max = f64::max(part_max, pn);
            }
            let scale = full.abs().max().max(1.0);
            reassembly = (sum - full).abs().max() / scale;
        }
        let triangle = norm <= parts_sum * (1.0 + 1e-9) + 1e-15;
        let parts_ok = part_max <= base * (1.0 + self.tol());
        let row = Row::ratio(trial, norm, n as f64 * base, 1.0, self.tol())
            .also(triangle && parts_ok && reassembly <= 1e-12);
        Ok(row.witness(format!(
            "complexity={n} parts_sum={parts_sum:e} part_max={part_max:e} reassembly_err={reassembly:e}"
        )))
    }

    fn lemma(&self, trial: u64, rng: &mut ChaCha8Rng) -> Result<Row> {
        let (gauge, young) = self.lemma.as_ref().expect("lemma suite");
        let c_l = self.bound.ok_or_else(|| anyhow!("gauge has no lemma constant"))?;
        let w = self.draw_w(rng)?;
        let n = n_psi_all(&self.lattice, &w, gauge);
        let (mut worst, mut ratio, mut norm_at) = (0, 0.0, 0.0);
        for id in 0..self.lattice.num_cells() {
            let norm = orlicz_norm_on(&self.lattice, &w, id, young);
            let r = if norm > 0.0 {
                n[id] / norm
            } else if n[id] > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if r > ratio {
                (worst, ratio, norm_at) = (id, r, norm);
            }
        }
        let row = Row::ratio(trial, ratio, c_l, norm_at, self.tol());
        Ok(row.witness(format!("cell={} n_psi={:e} orlicz={norm_at:e}", self.path(worst), n[worst])))
    }

    fn telescope(&self, trial: u64, rng: &mut ChaCha8Rng, ledger: &mut Option<String>) -> Result<Row> {
        let f = random_leaf_vector(rng, self.lattice.num_leaves());
        let w = self.draw_w(rng)?;
        let a = random_carleson(rng, &self.lattice);
        let c = self.cfg.embedding_constant;
        let audits = [
            ("difference", telescope_audit_25(&self.lattice, &f, &w, &self.g1, c)),
            ("carleson", telescope_audit_26(&self.lattice, &f, &w, &self.g1, &a, c)?),
        ];
        let tol = self.tol();
        let ok = audits.iter().all(|(_, au)| au.holds(tol));
        let (kind, worst) = audits
            .iter()
            .flat_map(|(k, au)| au.rows.iter().map(move |r| (*k, r)))
            .min_by(|x, y| x.1.slack.total_cmp(&y.1.slack))
            .ok_or_else(|| anyhow!("empty ledger"))?;
        if trial < self.cfg.ledger_trials {
            *ledger = Some(ledger_lines(trial, &audits));
        }
        let cs = audits.iter().map(|(_, a)| a.min_cauchy_schwarz_slack).fold(f64::INFINITY, f64::min);
        let closing = audits.iter().map(|(_, a)| a.min_closing_slack).fold(f64::INFINITY, f64::min);
        let mut row = Row::slack(trial, worst.rhs, worst.partial_lhs, tol);
        row.ok = ok;
        Ok(row.witness(format!(
            "ledger={kind} root={} generation={} cauchy_schwarz_slack={cs:e} closing_slack={closing:e}",
            if worst.root.is_empty() { "root" } else { &worst.root },
            worst.generation
        )))
    }
}

fn shift_complexity(cfg: &ExperimentConfig, explicit: Option<&HaarShift>) -> usize {
    match (explicit, &cfg.operator) {
        (Some(s), _) => s.complexity(),
        (None, Some(OperatorConfig::Shift { complexity, .. })) => *complexity,
        _ => 1,
    }
}

/// Largest complexity sampled by the growth suite.
fn growth_max(cfg: &ExperimentConfig, lattice: &Lattice) -> usize {
    match &cfg.operator {
        Some(OperatorConfig::Shift { complexity, .. }) if *complexity >= 2 => *complexity,
        _ => 4.min(lattice.depth()),
    }
}

fn ledger_lines(trial: u64, audits: &[(&str, TelescopeAudit)]) -> String {
    let mut out = String::new();
    for (kind, au) in audits {
        for r in &au.rows {
            let root = if r.root.is_empty() { "root" } else { &r.root };
            out.push_str(&format!(
                "{trial},{kind},{root},{},{:e},{:e},{:e}\n",
                r.generation, r.partial_lhs, r.rhs, r.slack
            ));
        }
    }
    out
}

fn fmt_list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:e}")).collect();
    format!("[{}]", parts.join(" "))
}

fn fmt_dist(n: &DistFn) -> String {
    format!("knots={}/values={}", fmt_list(n.as_step().knots()), fmt_list(n.as_step().values()))
}

fn fmt_points(alphas: &[f64], points: &[BellmanPoint]) -> String {
    let mut out = format!(" alphas={}", fmt_list(alphas));
    for (k, p) in points.iter().enumerate() {
        out += &format!(" p{k}:f={:e}", p.f);
        if let Some(m) = p.m {
            out += &format!(":M={m:e}");
        }
        out += &format!(":{}", fmt_dist(&p.n));
    }
    out
}
