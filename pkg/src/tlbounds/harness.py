"""Experiment configs, Monte Carlo coverage runs, and the multi-source comparison.

Trial ``t`` of a run with master seed ``s`` draws all of its samples from
seeds ``derive_seed(derive_seed(s, t), stream)``, so any trial can be
recomputed in isolation and results do not depend on the worker count.
"""

from __future__ import annotations

import copy
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources

import jsonschema
import numpy as np

from . import bounds
from .divergence import ZERO_ONE, discrepancy, hdh_divergence
from .domains import (RNG_ALGORITHM, DiscreteDomain, derive_seed, expected_risk, make_rng, mixture_domain,
                      sample_labeled, sample_unlabeled)
from .erm import WeightedRiskSpec, erm, lambda_alpha, lambda_alpha_mu, lambda_joint
from .errors import ConfigError, PreconditionError
from .hypothesis import GroundSet, Hypothesis, HypothesisClass, make_finite_class, make_threshold_class
from .htl import RegressionDomain, SourcePredictor, estimate_stability_gap

SCENARIO_THEOREMS = {
    "single_source": ("1", "lemma1"),
    "alpha_mixed": ("2",),
    "multi_source": ("3", "7"),
    "discrepancy": ("4", "5"),
    "htl_stability": (),
}
SAMPLED_THEOREMS = ("1", "2", "3", "5", "7")


def load_schema(name: str) -> dict:
    return json.loads(resources.files("tlbounds").joinpath("schemas").joinpath(name).read_text())


def fixture_path(name: str):
    """Path to a shipped fixture config (``name`` with or without ``.json``)."""
    if not name.endswith(".json"):
        name += ".json"
    return resources.files("tlbounds").joinpath("fixtures").joinpath(name)


def list_fixtures() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("tlbounds").joinpath("fixtures").iterdir()
                  if p.name.endswith(".json"))


def _validate(instance, schema, where=""):
    try:
        jsonschema.validate(instance, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise ConfigError(f"{where}{'/' + path if path else ''}: {exc.message}") from None


def _generated_domain(gen: dict) -> DiscreteDomain:
    n = int(gen["n"])
    x = np.linspace(0.0, 1.0, n) if n > 1 else np.array([0.5])
    w = np.exp(-0.5 * ((x - gen["center"]) / gen["width"]) ** 2)
    w = np.maximum(w, 1e-300)
    labels = (x >= gen.get("threshold", 0.5)).astype(np.float64)
    flips = int(math.floor(gen.get("flip_rate", 0.0) * n))
    if flips:
        idx = make_rng(gen.get("seed", 0)).choice(n, size=flips, replace=False)
        labels[idx] = 1.0 - labels[idx]
    ground = GroundSet(x)
    return DiscreteDomain(ground, w / w.sum(), Hypothesis(ground, labels))


def build_domain(spec: dict) -> DiscreteDomain:
    if "generator" in spec:
        return _generated_domain(spec["generator"])
    return DiscreteDomain.from_dict(spec)


@dataclass
class ExperimentConfig:
    scenario: str
    domains: dict
    params: dict
    class_spec: dict = field(default_factory=lambda: {"kind": "threshold"})
    trials: int = 100
    seed: int = 0
    description: str = ""

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        _validate(data, load_schema("config.schema.json"), "config")
        cfg = cls(
            scenario=data["scenario"],
            domains=copy.deepcopy(data["domains"]),
            params=copy.deepcopy(data["params"]),
            class_spec=copy.deepcopy(data.get("class", {"kind": "threshold"})),
            trials=int(data.get("trials", 100)),
            seed=int(data.get("seed", 0)),
            description=data.get("description", ""),
        )
        cfg.check()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())

    @classmethod
    def fixture(cls, name: str) -> "ExperimentConfig":
        return cls.from_json(fixture_path(name).read_text())

    def to_dict(self) -> dict:
        out = {"scenario": self.scenario}
        if self.description:
            out["description"] = self.description
        out.update({"domains": copy.deepcopy(self.domains), "class": copy.deepcopy(self.class_spec),
                    "params": copy.deepcopy(self.params), "trials": self.trials, "seed": self.seed})
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def replace(self, **changes) -> "ExperimentConfig":
        """Copy with top-level fields or ``params`` entries overridden."""
        data = self.to_dict()
        params = changes.pop("params", {})
        for k, v in changes.items():
            data["class" if k == "class_spec" else k] = v
        data["params"].update(params)
        return ExperimentConfig.from_dict(data)

    # --- validation -------------------------------------------------------

    def check(self):
        dom_schema = load_schema("config.schema.json")
        dom_schema = {"$defs": dom_schema["$defs"], "$ref": "#/$defs/domain"}
        p = self.params
        if self.scenario == "htl_stability":
            if "target_regression" not in self.domains:
                raise ConfigError("htl_stability needs domains.target_regression")
            for key in ("m", "lambda_reg"):
                if key not in p:
                    raise ConfigError(f"htl_stability needs params.{key}")
            return
        names = ["target"] + (["source"] if self.scenario != "multi_source" else [])
        for name in names:
            if name not in self.domains:
                raise ConfigError(f"scenario {self.scenario} needs domains.{name}")
            _validate(self.domains[name], dom_schema, f"domains/{name}")
        if self.scenario == "multi_source":
            srcs = self.domains.get("sources")
            if not isinstance(srcs, list) or len(srcs) < 1:
                raise ConfigError("multi_source needs a non-empty domains.sources list")
            for i, s in enumerate(srcs):
                _validate(s, dom_schema, f"domains/sources/{i}")
            K = len(srcs)
            if p.get("K", K) != K:
                raise ConfigError(f"params.K={p['K']} disagrees with {K} sources")
            for key in ("alpha", "beta"):
                v = p.get(key)
                if not isinstance(v, list) or len(v) != K:
                    raise ConfigError(f"params.{key} must list one value per source")
        if self.class_spec.get("kind") == "explicit" and "vectors" not in self.class_spec:
            raise ConfigError("explicit class needs vectors")
        delta = p.get("delta", 0.1)
        if not 0 < delta < 1:
            raise ConfigError("params.delta must lie in (0, 1)")

    # --- resolved objects --------------------------------------------------

    @cached_property
    def target(self) -> DiscreteDomain:
        return build_domain(self.domains["target"])

    @cached_property
    def source(self) -> DiscreteDomain:
        return build_domain(self.domains["source"])

    @cached_property
    def sources(self) -> list[DiscreteDomain]:
        return [build_domain(s) for s in self.domains["sources"]]

    @cached_property
    def hclass(self) -> HypothesisClass:
        ground = self.target.ground
        if self.class_spec.get("kind", "threshold") == "threshold":
            return make_threshold_class(ground)
        return make_finite_class(self.class_spec["vectors"], self.class_spec.get("vc_dim", 1), ground)

    @property
    def delta(self) -> float:
        return float(self.params.get("delta", 0.1))

    def theorems(self) -> tuple:
        return SCENARIO_THEOREMS[self.scenario]


# --- per-trial sampling ----------------------------------------------------


def trial_seed(master: int, trial: int) -> int:
    return derive_seed(master, trial)


class _Streams:
    """Independent child seeds for the samples of one trial."""

    def __init__(self, seed: int):
        self.seed = seed
        self.n = 0

    def next(self) -> int:
        self.n += 1
        return derive_seed(self.seed, self.n)


def _multi_sizes(cfg: ExperimentConfig) -> list[int]:
    m = int(cfg.params["m"])
    sizes = [int(round(b * m)) for b in cfg.params["beta"]]
    if any(s < 1 for s in sizes):
        raise PreconditionError("every source needs at least one labeled point (beta_j m >= 1)")
    return sizes


@dataclass
class _Exact:
    """Sample-free quantities shared by every trial of a run."""

    lam: float | None = None
    lam_alpha: float | None = None
    lam_alpha_mu: float | None = None
    mixture: DiscreteDomain | None = None


def exact_quantities(cfg: ExperimentConfig, theorem: str) -> _Exact:
    H = cfg.hclass
    ex = _Exact()
    if theorem in ("1", "2", "lemma1"):
        ex.lam = lambda_joint(H, cfg.source, cfg.target)[0]
    if theorem == "3":
        alpha = cfg.params["alpha"]
        ex.lam_alpha = lambda_alpha(H, cfg.sources, alpha, cfg.target)[0]
        ex.mixture = mixture_domain(cfg.sources, alpha)
    if theorem == "7":
        ex.lam_alpha_mu = lambda_alpha_mu(H, cfg.sources, cfg.params["alpha"], cfg.params["mu"], cfg.target)[0]
    return ex


def _per_source_hyps(H, samples):
    return [erm(WeightedRiskSpec([(1.0, S)]), H).hypothesis for S in samples]


def run_trial(cfg: ExperimentConfig, theorem: str, seed: int, exact: _Exact | None = None) -> bounds.BoundReport:
    """Draw one trial's samples from ``seed`` and evaluate one theorem."""
    exact = exact or exact_quantities(cfg, theorem)
    H, p, delta = cfg.hclass, cfg.params, cfg.delta
    st = _Streams(seed)
    if theorem == "lemma1":
        S = sample_labeled(cfg.source, int(p.get("m", 100)), st.next())
        h = erm(WeightedRiskSpec([(1.0, S)]), H).hypothesis
        return bounds.lemma1_rhs(H, h, cfg.source, cfg.target)
    if theorem == "1":
        S = sample_labeled(cfg.source, int(p["m"]), st.next())
        U_S = sample_unlabeled(cfg.source, int(p["m_prime"]), st.next())
        U_T = sample_unlabeled(cfg.target, int(p["m_prime"]), st.next())
        h = erm(WeightedRiskSpec([(1.0, S)]), H).hypothesis
        return bounds.thm1_rhs(H, h, S, U_S, U_T, delta, exact.lam, cfg.target)
    if theorem == "2":
        S_T, S_S, U_S, U_T = draw_alpha_mixed(cfg, st)
        return bounds.thm2_rhs(H, S_T, S_S, U_S, U_T, float(p["alpha"]), delta, cfg.target, exact.lam)
    if theorem in ("3", "7"):
        samples = [sample_labeled(D, mj, st.next()) for D, mj in zip(cfg.sources, _multi_sizes(cfg))]
        if theorem == "3":
            return bounds.thm3_rhs(H, samples, p["alpha"], delta, exact.mixture, cfg.target, exact.lam_alpha)
        mp = int(p["m_prime"])
        unl = [sample_unlabeled(D, mp, st.next()) for D in cfg.sources]
        U_T = sample_unlabeled(cfg.target, mp, st.next())
        hyps = _per_source_hyps(H, samples)
        return bounds.thm7_rhs(H, samples, unl, U_T, p["alpha"], float(p["mu"]), delta, hyps,
                               exact.lam_alpha_mu, cfg.target)
    if theorem == "4":
        h = H[int(p.get("h_index", 0))]
        return bounds.thm4_rhs(H, ZERO_ONE, h, cfg.source, cfg.target)
    if theorem == "5":
        S = sample_unlabeled(cfg.source, int(p["m"]), st.next())
        T = sample_unlabeled(cfg.target, int(p.get("n", p["m"])), st.next())
        h = H[int(p.get("h_index", 0))]
        return bounds.thm5_rhs(H, h, S, T, cfg.source, cfg.target, delta,
                               p.get("rademacher_mode", "auto"), int(p.get("rademacher_draws", 10_000)),
                               st.next())
    raise ConfigError(f"unknown theorem {theorem!r}")


def draw_alpha_mixed(cfg: ExperimentConfig, st: _Streams):
    p = cfg.params
    m = int(p["m"])
    m_t = bounds.split_count(float(p["beta"]), m)
    if not 0 < m_t < m:
        raise PreconditionError("beta * m must round to a count strictly between 0 and m")
    S_T = sample_labeled(cfg.target, m_t, st.next())
    S_S = sample_labeled(cfg.source, m - m_t, st.next())
    U_S = sample_unlabeled(cfg.source, int(p["m_prime"]), st.next())
    U_T = sample_unlabeled(cfg.target, int(p["m_prime"]), st.next())
    return S_T, S_S, U_S, U_T


def alpha_tradeoff(cfg: ExperimentConfig, seed: int | None = None, alphas=None) -> dict:
    """rhs of the alpha-weighted bound over an alpha grid, on one fixed draw."""
    seed = trial_seed(cfg.seed, 0) if seed is None else seed
    S_T, S_S, U_S, U_T = draw_alpha_mixed(cfg, _Streams(seed))
    lam = lambda_joint(cfg.hclass, cfg.source, cfg.target)[0]
    grid = bounds.thm2_alpha_grid(cfg.hclass, S_T, S_S, U_S, U_T, cfg.delta, cfg.target, lam, alphas)
    best_alpha, best_rhs = min(grid, key=lambda t: t[1])
    ends = dict(grid)
    return {"grid": grid, "best_alpha": best_alpha, "best_rhs": best_rhs,
            "rhs_alpha0": ends.get(0.0), "rhs_alpha1": ends.get(1.0)}


# --- coverage ----------------------------------------------------------------


def binomial_slack(delta: float, trials: int, sigmas: float = 3.0) -> float:
    return sigmas * math.sqrt(delta * (1.0 - delta) / trials)


@dataclass
class CoverageReport:
    theorem_id: str
    delta: float
    per_trial: list
    config: dict

    @property
    def trials(self) -> int:
        return len(self.per_trial)

    @property
    def violations(self) -> int:
        return sum(1 for r in self.per_trial if not r["holds"])

    @property
    def violation_rate(self) -> float:
        return self.violations / self.trials

    @property
    def acceptable(self) -> bool:
        return self.violation_rate <= self.delta + binomial_slack(self.delta, self.trials)

    def to_dict(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "trials": self.trials,
            "violations": self.violations,
            "violation_rate": self.violation_rate,
            "delta": self.delta,
            "binomial_slack_3sigma": binomial_slack(self.delta, self.trials),
            "rng": RNG_ALGORITHM,
            "per_trial": self.per_trial,
            "config": self.config,
        }

    def csv_rows(self) -> tuple[list[str], list[list]]:
        term_names = list(self.per_trial[0]["terms"]) if self.per_trial else []
        header = ["trial", "seed", "theorem_id", *term_names, "rhs_total", "lhs_realized", "holds"]
        rows = [[r["trial"], r["seed"], self.theorem_id, *(repr(r["terms"][t]) for t in term_names),
                 repr(r["rhs"]), repr(r["lhs"]), str(r["holds"]).lower()] for r in self.per_trial]
        return header, rows


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def verify_bound(cfg: ExperimentConfig, theorem: str | None = None, trials: int | None = None,
                 workers: int = 1) -> CoverageReport:
    """Repeat sample draws and record whether the realized target risk stays below the bound."""
    if theorem is None:
        theorem = next((t for t in cfg.theorems() if t in SAMPLED_THEOREMS), "")
    theorem = str(theorem)
    if theorem not in SAMPLED_THEOREMS:
        raise ConfigError(f"theorem {theorem!r} is not a sample-dependent bound")
    if theorem not in cfg.theorems():
        raise ConfigError(f"scenario {cfg.scenario!r} does not support theorem {theorem}")
    trials = cfg.trials if trials is None else int(trials)
    exact = exact_quantities(cfg, theorem)

    def one(t):
        seed = trial_seed(cfg.seed, t)
        rep = run_trial(cfg, theorem, seed, exact)
        return {"trial": t, "seed": seed, "lhs": rep.lhs_realized, "rhs": rep.rhs_total,
                "holds": rep.holds, "terms": dict(rep.terms)}

    rows = _map(one, range(trials), workers)
    return CoverageReport(theorem, cfg.delta, rows, cfg.to_dict())


# --- multi-source comparison ---------------------------------------------------


def _tighter(r3: float, r7: float) -> str:
    if r7 < r3:
        return "7"
    if r3 < r7:
        return "3"
    return "tie"


def compare_multisource(cfg: ExperimentConfig, trials: int | None = None, mu_grid=None,
                        workers: int = 1) -> dict:
    """Evaluate both multi-source bounds on identical draws.

    The alpha-weighted ERM feeds one bound, the alpha-ensemble of per-source
    ERMs feeds the other. With ``mu_grid`` a summary row per ``mu`` is added.
    """
    if cfg.scenario != "multi_source":
        raise ConfigError("comparison needs a multi_source config")
    if len(cfg.sources) < 2:
        raise ConfigError("comparison needs K >= 2 sources")
    trials = cfg.trials if trials is None else int(trials)
    mu = float(cfg.params["mu"])
    if not 0 < mu < 1:
        raise ConfigError("mu must lie in (0, 1)")

    def run(mu_value):
        c = cfg if mu_value == mu else cfg.replace(params={"mu": mu_value})
        e3, e7 = exact_quantities(c, "3"), exact_quantities(c, "7")

        def one(t):
            seed = trial_seed(c.seed, t)
            r3 = run_trial(c, "3", seed, e3)
            r7 = run_trial(c, "7", seed, e7)
            return {"trial": t, "seed": seed, "thm3_rhs": r3.rhs_total, "thm7_rhs": r7.rhs_total,
                    "lhs3": r3.lhs_realized, "lhs7": r7.lhs_realized,
                    "tighter": _tighter(r3.rhs_total, r7.rhs_total)}

        return _map(one, range(trials), workers)

    def summarize(rows, mu_value):
        n7 = sum(r["tighter"] == "7" for r in rows)
        return {"mu": mu_value, "trials": len(rows), "fraction_thm7_tighter": n7 / len(rows),
                "mean_thm3_rhs": float(np.mean([r["thm3_rhs"] for r in rows])),
                "mean_thm7_rhs": float(np.mean([r["thm7_rhs"] for r in rows]))}

    rows = run(mu)
    out = {"summary": summarize(rows, mu), "per_trial": rows, "rng": RNG_ALGORITHM, "config": cfg.to_dict()}
    if mu_grid is not None:
        out["mu_sweep"] = [summarize(run(float(v)), float(v)) for v in mu_grid]
    return out


# --- single-shot helpers used by the CLI ------------------------------------------


def divergence_report(cfg: ExperimentConfig, seed: int | None = None) -> dict:
    """Exact and sample-based divergences between each source and the target."""
    H = cfg.hclass
    seed = cfg.seed if seed is None else seed
    srcs = cfg.sources if cfg.scenario == "multi_source" else [cfg.source]
    mp = int(cfg.params.get("m_prime", 1000))
    st = _Streams(trial_seed(seed, 0))
    U_T = sample_unlabeled(cfg.target, mp, st.next())
    rows = []
    for i, D in enumerate(srcs):
        U_S = sample_unlabeled(D, mp, st.next())
        rows.append({
            "source": i,
            "hdh_exact": hdh_divergence(H, D, cfg.target) if H.binary else None,
            "hdh_empirical": hdh_divergence(H, U_S, U_T) if H.binary else None,
            "discrepancy_exact": discrepancy(H, ZERO_ONE, D, cfg.target),
            "m_prime": mp,
        })
    return {"seed": seed, "rng": RNG_ALGORITHM, "rows": rows}


def erm_report(cfg: ExperimentConfig, seed: int | None = None) -> dict:
    H = cfg.hclass
    seed = cfg.seed if seed is None else seed
    st = _Streams(trial_seed(seed, 0))
    if cfg.scenario == "multi_source":
        samples = [sample_labeled(D, mj, st.next()) for D, mj in zip(cfg.sources, _multi_sizes(cfg))]
        spec = WeightedRiskSpec([(float(a), S) for a, S in zip(cfg.params["alpha"], samples)])
    elif cfg.scenario == "alpha_mixed":
        S_T, S_S, _, _ = draw_alpha_mixed(cfg, st)
        spec = bounds.alpha_weighted_spec(S_T, S_S, float(cfg.params["alpha"]))
    else:
        spec = WeightedRiskSpec([(1.0, sample_labeled(cfg.source, int(cfg.params.get("m", 100)), st.next()))])
    res = erm(spec, H)
    return {"seed": seed, "rng": RNG_ALGORITHM, "index": res.index, "objective": res.value,
            "tie_count": res.tie_count, "hypothesis": res.hypothesis.outputs.tolist(),
            "target_risk": expected_risk(cfg.target, res.hypothesis)}


def bound_report(cfg: ExperimentConfig, theorem: str, seed: int | None = None) -> bounds.BoundReport:
    theorem = str(theorem)
    if theorem not in cfg.theorems():
        raise ConfigError(f"scenario {cfg.scenario!r} does not support theorem {theorem}")
    seed = cfg.seed if seed is None else seed
    return run_trial(cfg, theorem, trial_seed(seed, 0))


# --- HTL stability --------------------------------------------------------------


def regression_setup(cfg: ExperimentConfig):
    spec = cfg.domains["target_regression"]
    if "synthetic" in spec:
        g = spec["synthetic"]
        return RegressionDomain.synthetic(int(g["n"]), int(g["dim"]), float(g["source_shift"]),
                                          float(g["noise"]), int(g.get("seed", 0)))
    dom = RegressionDomain(spec["points"], spec["probs"], spec["ys"])
    src = spec.get("source", {})
    w = src.get("weights", [0.0] * dom.points.shape[1])
    vals = dom.points @ np.asarray(w, float) + src.get("bias", 0.0)
    return dom, SourcePredictor.linear(w, src.get("bias", 0.0), sup_norm=float(np.max(np.abs(vals))) + 1e-9)


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def htl_stability_grid(cfg: ExperimentConfig, seed: int | None = None, trials: int | None = None) -> list:
    """Stability-gap estimates over the ``m`` x ``lambda_reg`` grid in the config.

    ``lambda_reg`` entries may be numbers or strings ``"c/m"`` (scaled by each m).
    """
    dom, src = regression_setup(cfg)
    p = cfg.params
    seed = cfg.seed if seed is None else seed
    trials = cfg.trials if trials is None else int(trials)
    C = p.get("C", "inf")
    C = math.inf if C in ("inf", None) else float(C)
    out = []
    for m in _as_list(p["m"]):
        for lam in _as_list(p["lambda_reg"]):
            if isinstance(lam, str) and lam.endswith("/m"):
                lam_v = float(lam[:-2]) / m
            else:
                lam_v = float(lam)
            out.append(estimate_stability_gap(dom, src, int(m), lam_v, C, trials, seed, p.get("B")))
    return out
