"""Flat key=value configuration and backend assembly.

Config files use dotted keys, one per line (``planner.max_depth = 4``);
``#`` starts a comment. Command-line flags override file values, which
override defaults. API credentials are read from the environment only
(GRAPHQUEST_API_KEY, falling back to OPENAI_API_KEY), never from files
or flags.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .kg.memory_store import InMemoryKG
from .kg.sparql_client import SparqlKG
from .llm.http_client import ChatCompletionsBackend
from .llm.scripted import ScriptedBackend
from .llm.types import GenerationConfig
from .planner.engine import Backends
from .planner.state import AblationFlags, PlannerConfig
from .recall import RecallConfig, RemoteEmbeddingScorer, TrigramScorer

logger = logging.getLogger(__name__)

KG_MODES = ("memory", "sparql")
LLM_MODES = ("scripted", "http")
SCORERS = ("trigram", "remote")

KNOWN_KEYS = frozenset({
    "kg.mode", "kg.path", "kg.format", "kg.endpoint",
    "llm.mode", "llm.script", "llm.base_url", "llm.model",
    "llm.temperature", "llm.max_tokens",
    "llm.frequency_penalty", "llm.presence_penalty",
    "planner.max_depth", "planner.no_guidance", "planner.no_memory",
    "planner.no_reflection", "planner.fixed_breadth",
    "recall.threshold", "recall.k", "recall.scorer", "recall.endpoint",
    "output.dir",
})

TRUE_WORDS = frozenset({"true", "1", "yes", "on"})
FALSE_WORDS = frozenset({"false", "0", "no", "off"})


class ConfigError(ValueError):
    pass


@dataclass
class AppConfig:
    kg_mode: str = "memory"
    kg_path: str | None = None
    kg_format: str | None = None
    kg_endpoint: str | None = None
    llm_mode: str = "scripted"
    llm_script: str | None = None
    llm_base_url: str | None = None
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    output_dir: str = "runs"


def load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(
                    f"{path}:{number}: expected 'key = value', got {line!r}"
                )
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def _parse_bool(key: str, value: str) -> bool:
    word = value.strip().lower()
    if word in TRUE_WORDS:
        return True
    if word in FALSE_WORDS:
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _parse_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def build_app_config(file_values: dict[str, str] | None = None,
                     overrides: dict[str, str] | None = None) -> AppConfig:
    """Merge defaults, file values, and flag overrides (in that order)."""
    merged: dict[str, str] = {}
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            if key not in KNOWN_KEYS:
                raise ConfigError(
                    f"unknown config key {key!r}; known keys: "
                    f"{', '.join(sorted(KNOWN_KEYS))}"
                )
            merged[key] = str(value)

    def get(key: str, default: str | None = None) -> str | None:
        return merged.get(key, default)

    kg_mode = get("kg.mode", "memory")
    if kg_mode not in KG_MODES:
        raise ConfigError(f"kg.mode must be one of {KG_MODES}, got {kg_mode!r}")
    llm_mode = get("llm.mode", "scripted")
    if llm_mode not in LLM_MODES:
        raise ConfigError(
            f"llm.mode must be one of {LLM_MODES}, got {llm_mode!r}")

    generation = GenerationConfig(
        model=get("llm.model", GenerationConfig.model),
        temperature=_parse_float("llm.temperature",
                                 get("llm.temperature", "0.3")),
        max_tokens=_parse_int("llm.max_tokens", get("llm.max_tokens", "1024")),
        frequency_penalty=_parse_float(
            "llm.frequency_penalty", get("llm.frequency_penalty", "0")),
        presence_penalty=_parse_float(
            "llm.presence_penalty", get("llm.presence_penalty", "0")),
    )
    scorer_kind = get("recall.scorer", "trigram")
    if scorer_kind not in SCORERS:
        raise ConfigError(
            f"recall.scorer must be one of {SCORERS}, got {scorer_kind!r}")
    recall = RecallConfig(
        threshold=_parse_int("recall.threshold", get("recall.threshold", "30")),
        k=_parse_int("recall.k", get("recall.k", "25")),
        scorer=scorer_kind,
        endpoint=get("recall.endpoint"),
    )
    fixed_breadth_raw = get("planner.fixed_breadth")
    ablations = AblationFlags(
        no_guidance=_parse_bool("planner.no_guidance",
                                get("planner.no_guidance", "false")),
        no_memory=_parse_bool("planner.no_memory",
                              get("planner.no_memory", "false")),
        no_reflection=_parse_bool("planner.no_reflection",
                                  get("planner.no_reflection", "false")),
        fixed_breadth=(_parse_int("planner.fixed_breadth", fixed_breadth_raw)
                       if fixed_breadth_raw is not None else None),
    )
    planner = PlannerConfig(
        max_depth=_parse_int("planner.max_depth",
                             get("planner.max_depth", "4")),
        ablations=ablations,
        generation=generation,
        recall=recall,
    )
    app = AppConfig(
        kg_mode=kg_mode,
        kg_path=get("kg.path"),
        kg_format=get("kg.format"),
        kg_endpoint=get("kg.endpoint"),
        llm_mode=llm_mode,
        llm_script=get("llm.script"),
        llm_base_url=get("llm.base_url"),
        planner=planner,
        output_dir=get("output.dir", "runs"),
    )
    _validate(app)
    return app


def _validate(app: AppConfig) -> None:
    if app.kg_mode == "memory" and not app.kg_path:
        raise ConfigError("kg.mode=memory requires kg.path")
    if app.kg_mode == "sparql" and not app.kg_endpoint:
        raise ConfigError("kg.mode=sparql requires kg.endpoint")
    if app.llm_mode == "scripted" and not app.llm_script:
        raise ConfigError("llm.mode=scripted requires llm.script")
    if app.llm_mode == "http" and not app.llm_base_url:
        raise ConfigError("llm.mode=http requires llm.base_url")
    if app.planner.recall.scorer == "remote" and not app.planner.recall.endpoint:
        raise ConfigError("recall.scorer=remote requires recall.endpoint")
    if app.kg_format is not None and app.kg_format not in (
            "tab-separated", "ntriples-subset"):
        raise ConfigError(
            f"kg.format must be tab-separated or ntriples-subset, "
            f"got {app.kg_format!r}")


def _guess_format(path: str) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".nt", ".ntriples"):
        return "ntriples-subset"
    return "tab-separated"


def build_backends(app: AppConfig) -> Backends:
    if app.kg_mode == "memory":
        kg = InMemoryKG()
        fmt = app.kg_format or _guess_format(app.kg_path)
        count = kg.load_triples(app.kg_path, format=fmt)
        logger.info("loaded %d triples from %s", count, app.kg_path)
    else:
        kg = SparqlKG(app.kg_endpoint)
    if app.llm_mode == "scripted":
        llm = ScriptedBackend.from_file(app.llm_script)
    else:
        llm = ChatCompletionsBackend(app.llm_base_url)
    if app.planner.recall.scorer == "remote":
        scorer = RemoteEmbeddingScorer(app.planner.recall.endpoint)
    else:
        scorer = TrigramScorer()
    return Backends(kg=kg, llm=llm, scorer=scorer)


def describe(app: AppConfig) -> dict:
    """Loggable snapshot of the effective configuration (no secrets)."""
    return {
        "kg": {"mode": app.kg_mode, "path": app.kg_path,
               "endpoint": app.kg_endpoint},
        "llm": {"mode": app.llm_mode, "script": app.llm_script,
                "base_url": app.llm_base_url,
                "generation": dataclasses.asdict(app.planner.generation)},
        "planner": {
            "max_depth": app.planner.max_depth,
            "ablations": list(app.planner.ablations.active()),
            "recall": dataclasses.asdict(app.planner.recall),
        },
        "output_dir": app.output_dir,
    }
