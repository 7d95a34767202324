import logging
from typing import Dict, List, Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from core.allocation import compute_phi
from core.config_loader import apply_overrides, list_presets, load_preset, parse_config_text
from core.errors import BackhaulError, ConfigError, ModelDomainError, NoInteriorEquilibriumError
from core.experiment_manager import ALL_ALGORITHMS, ExperimentManager, SweepAxis, prepare, run_scenario
from core.game_solver import bmmg_mixed_strategies, solve_fair_pmne
from core.learning import bge_fixed_point, epsilon_bound
from core.scenario_builder import build_scenario
from core.verification import verify_instance
from models.config import ScenarioConfig
from models.metrics import Algorithm

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')

app = FastAPI(title="Backhaul Minority Game")

# Allow browser clients
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(BackhaulError)
def backhaul_error_handler(request: Request, exc: BackhaulError):
    status = 422 if isinstance(exc, (ConfigError, ModelDomainError)) else 400
    return JSONResponse(status_code=status,
                        content={"error": type(exc).__name__, "detail": str(exc)})


class ScenarioInput(BaseModel):
    preset: Optional[str] = "default"
    config_text: Optional[str] = None
    overrides: Dict[str, str] = Field(default_factory=dict)
    seed: Optional[int] = None


class BgeInput(ScenarioInput):
    kappa: Optional[float] = None


class LearnInput(ScenarioInput):
    kappa: Optional[float] = None
    trace: bool = False


class CompareInput(ScenarioInput):
    runs: Optional[int] = Field(None, ge=1)


class SweepInput(CompareInput):
    axis: SweepAxis
    values: List[float] = Field(min_length=1)


def load(data: ScenarioInput) -> tuple[ScenarioConfig, int]:
    # config_text wins over preset
    if data.config_text is not None:
        config = parse_config_text(data.config_text)
    else:
        config = load_preset(data.preset or "default")
    overrides: Dict[str, object] = dict(data.overrides)
    if getattr(data, "kappa", None) is not None:
        overrides["learning.kappa"] = data.kappa
    if getattr(data, "runs", None) is not None:
        overrides["experiment.runs"] = data.runs
    if getattr(data, "trace", False):
        overrides["learning.trace"] = True
    if overrides:
        config = apply_overrides(config, overrides)
    seed = data.seed if data.seed is not None else config.experiment.seed
    return config, seed


@app.get("/presets")
def get_presets():
    return list_presets()


@app.post("/phi")
def get_phi(data: ScenarioInput):
    config, seed = load(data)
    scenario = build_scenario(config, seed)
    return {
        "seed": seed,
        "phi": compute_phi(scenario),
        "predicted_files": scenario.demand.total_predicted,
        "file_counts": list(scenario.demand.file_counts),
    }


@app.post("/pmne")
def get_pmne(data: ScenarioInput):
    config, seed = load(data)
    scenario, phi, game = prepare(config, seed)
    if game is None:
        return {"seed": seed, "phi": phi, "players": 0, "p_star": None, "strategies": {}}
    try:
        p_star = solve_fair_pmne(game, config.game.pmne_tol)
    except NoInteriorEquilibriumError as e:
        return {"seed": seed, "phi": phi, "players": game.g, "p_star": None,
                "strategies": {}, "reason": str(e)}
    strategies = bmmg_mixed_strategies(scenario.demand, p_star)
    return {
        "seed": seed,
        "phi": phi,
        "players": game.g,
        "asymmetry": game.asymmetry,
        "p_star": p_star,
        "strategies": {str(n): [float(v) for v in s] for n, s in strategies.items()},
    }


@app.post("/bge")
def get_bge(data: BgeInput):
    config, seed = load(data)
    _, phi, game = prepare(config, seed)
    kappa = config.learning.kappa
    if game is None:
        return {"seed": seed, "phi": phi, "kappa": kappa, "p": []}
    profile = bge_fixed_point(game, kappa, config.learning.bge_tol)
    return {
        "seed": seed,
        "phi": phi,
        "kappa": kappa,
        "p": [float(v) for v in profile.p],
        "expected_requests": float(profile.p.sum()),
        "epsilon_bound": epsilon_bound(kappa),
    }


@app.post("/learn")
def learn(data: LearnInput):
    config, seed = load(data)
    metrics = run_scenario(config, Algorithm.BMRL, seed)
    return metrics.to_dict()


@app.post("/compare")
def compare(data: CompareInput):
    config, _ = load(data)
    manager = ExperimentManager(config)
    by_algorithm, summary = manager.compare(ALL_ALGORITHMS)
    return {
        "summary": summary.to_dict(),
        "runs": {a.value: [m.to_dict() for m in runs] for a, runs in by_algorithm.items()},
    }


@app.post("/sweep")
def sweep(data: SweepInput):
    config, _ = load(data)
    rows = ExperimentManager(config).sweep(data.axis, data.values)
    return [
        {
            "axis_value": row.axis_value,
            "algorithm": row.algorithm.value,
            "runs": row.runs,
            "mean_requested_bits": row.mean_requested_bits,
            "std_requested_bits": row.std_requested_bits,
            "mean_slack_bps": row.mean_slack_bps,
            "iterations_mean": row.iterations_mean,
            "oca_match_fraction": row.oca_match_fraction,
        }
        for row in rows
    ]


@app.post("/verify")
def verify(data: ScenarioInput):
    config, seed = load(data)
    checks = verify_instance(config, seed)
    return {
        "seed": seed,
        "passed": all(c.passed for c in checks),
        "checks": [c.to_dict() for c in checks],
    }
