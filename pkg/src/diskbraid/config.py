"""Experiment configuration: a single JSON document driving every CLI run.

Schema (all sections optional unless a subcommand needs them; ``seed``
and ``out_dir`` are top-level):

    {
      "seed": 0,
      "out_dir": "results",
      "maps": [
        {"id": "beater8", "kind": "egg_beater", "tau": 8.0},
        {"id": "mb", "kind": "miniature_beater", "tau": 5.0,
         "center": [0.5, 0.0]},
        {"id": "tw", "kind": "annulus_twist", "tau": 1.25},
        {"id": "prod", "kind": "compose", "of": ["beater8", "tw"]},
        {"id": "b2", "kind": "power", "of": "beater8", "k": 2}
      ],
      "qms": [
        {"id": "band", "type": "turn_band", "turns": [2, 3, 4], "W": 1},
        {"id": "pat", "type": "omega", "omega": ["1/0", "0/1", "1/3"],
         "W": 1, "coefficient": 1.0}
      ],
      "mc": {"n": 3, "samples": 256, "min_sep": 0.02,
             "p_list": [1, 2, 3, 4]},
      "entropy": {"p_max": 24},
      "norms": {"defect_trials": 400, "pair_len": 8, "pair_power": 1,
                "defect_multiplier": 2.0, "m": 2,
                "k_vectors": [[1, 0], [0, 1], [2, 5]]},
      "farey": {"pairs": [["1/0", "3/5"]], "matrices": [[[2, 1], [1, 1]]]}
    }

Slopes are "p/q" strings, braids signed-integer arrays (sigma_i as
+/- i), matrices 2x2 integer arrays.  The seed is mandatory: every
random choice in a run flows from it, which is what makes reruns
byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import dynamics, farey
from .errors import ConfigError
from .ggop import MCConfig
from .quasimorphism import OmegaSpec, QmSpec, turn_band_qm

MAP_KINDS = (
    "egg_beater",
    "miniature_beater",
    "annulus_twist",
    "radial_flow",
    "strip_shear",
    "hamiltonian_push",
    "identity",
    "compose",
    "power",
)


@dataclass
class Diagnostic:
    severity: str  # "error" | "warning"
    field: str
    message: str

    def __str__(self):
        return f"{self.severity}: {self.field}: {self.message}"


@dataclass
class ExperimentConfig:
    seed: int
    out_dir: str = "results"
    maps: dict = field(default_factory=dict)       # id -> DiskMap
    qms: dict = field(default_factory=dict)        # id -> QmSpec
    mc: MCConfig = field(default_factory=MCConfig)
    entropy: dict = field(default_factory=dict)
    norms: dict = field(default_factory=dict)
    farey_queries: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def _build_map(entry, built, diags, prefix):
    kind = entry.get("kind")
    if kind not in MAP_KINDS:
        diags.append(Diagnostic(
            "error", f"{prefix}.kind",
            f"unknown map kind {kind!r}; one of {', '.join(MAP_KINDS)}"))
        return None
    try:
        if kind == "egg_beater":
            return dynamics.egg_beater(
                float(entry["tau"]),
                R=float(entry.get("R", 0.40)),
                w=float(entry.get("w", 0.18)),
            )
        if kind == "miniature_beater":
            return dynamics.miniature_beater(
                float(entry["tau"]),
                center=tuple(entry.get("center", (0.0, 0.0))),
                R=float(entry.get("R", 0.21)),
                w=float(entry.get("w", 0.07)),
            )
        if kind == "annulus_twist":
            return dynamics.DiskMap(
                (dynamics.AnnulusTwist(float(entry["tau"])),))
        if kind == "radial_flow":
            return dynamics.DiskMap(
                (dynamics.RadialFlow(float(entry["tau"])),))
        if kind == "hamiltonian_push":
            return dynamics.DiskMap(
                (dynamics.HamiltonianPush(float(entry["tau"])),))
        if kind == "strip_shear":
            return dynamics.DiskMap((dynamics.StripShear(
                entry.get("axis", "h"),
                float(entry["tau"]),
                R=float(entry.get("R", 0.42)),
                w=float(entry.get("w", 0.10)),
                anchor_x=float(entry.get("anchor", (0.0, 0.0))[0]),
                anchor_y=float(entry.get("anchor", (0.0, 0.0))[1]),
            ),))
        if kind == "identity":
            return dynamics.identity()
        if kind == "compose":
            parts = entry["of"]
            missing = [p for p in parts if p not in built]
            if missing:
                diags.append(Diagnostic(
                    "error", f"{prefix}.of",
                    f"unresolved map ids {missing} (forward references are "
                    "not allowed)"))
                return None
            out = built[parts[0]]
            for p in parts[1:]:
                out = dynamics.compose(out, built[p])
            return out
        if kind == "power":
            ref = entry["of"]
            if ref not in built:
                diags.append(Diagnostic(
                    "error", f"{prefix}.of", f"unresolved map id {ref!r}"))
                return None
            return dynamics.power(built[ref], int(entry["k"]))
    except KeyError as e:
        diags.append(Diagnostic(
            "error", f"{prefix}.{e.args[0]}", "required field missing"))
    except (TypeError, ValueError) as e:
        diags.append(Diagnostic("error", prefix, str(e)))
    return None


def _build_qm(entry, diags, prefix):
    qtype = entry.get("type", "turn_band")
    try:
        if qtype == "turn_band":
            turns = entry["turns"]
            W = int(entry.get("W", 1))
            base = entry.get("base")
            return turn_band_qm(
                turns,
                base=farey.parse_slope(base) if base else None,
                W=W,
            )
        if qtype == "omega":
            omega = tuple(farey.parse_slope(s) for s in entry["omega"])
            W = int(entry.get("W", 1))
            spec = OmegaSpec(omega, W=W)
            coeff = float(entry.get("coefficient", 1.0))
            base = entry.get("base")
            return QmSpec(
                ((coeff, spec),),
                base=farey.parse_slope(base) if base else omega[0],
            )
        diags.append(Diagnostic(
            "error", f"{prefix}.type",
            f"unknown qm type {qtype!r}; one of turn_band, omega"))
    except KeyError as e:
        diags.append(Diagnostic(
            "error", f"{prefix}.{e.args[0]}", "required field missing"))
    except (TypeError, ValueError) as e:
        # surface the library's own constraint message (e.g. "0 < W < |omega|")
        diags.append(Diagnostic("error", prefix, str(e)))
    return None


def validate_dict(doc: dict) -> tuple[ExperimentConfig | None, list[Diagnostic]]:
    """Build an ExperimentConfig from a parsed JSON document.

    Returns (config, diagnostics); config is None when any diagnostic is
    an error.  Warnings (scientifically suspect but legal settings) do
    not block the run."""
    diags: list[Diagnostic] = []
    if not isinstance(doc, dict):
        return None, [Diagnostic("error", "$", "top level must be an object")]

    if "seed" not in doc:
        diags.append(Diagnostic(
            "error", "seed", "seed is mandatory (reproducibility contract)"))
        seed = 0
    else:
        seed = doc["seed"]
        if not isinstance(seed, int):
            diags.append(Diagnostic("error", "seed", "seed must be an integer"))
            seed = 0

    out_dir = doc.get("out_dir", "results")
    if not isinstance(out_dir, str) or not out_dir:
        diags.append(Diagnostic("error", "out_dir", "must be a nonempty string"))
        out_dir = "results"

    maps: dict = {}
    for i, entry in enumerate(doc.get("maps", ())):
        prefix = f"maps[{i}]"
        mid = entry.get("id")
        if not mid or not isinstance(mid, str):
            diags.append(Diagnostic("error", f"{prefix}.id",
                                    "every map needs a string id"))
            continue
        if mid in maps:
            diags.append(Diagnostic("error", f"{prefix}.id",
                                    f"duplicate map id {mid!r}"))
            continue
        m = _build_map(entry, maps, diags, prefix)
        if m is not None:
            maps[mid] = m

    qms: dict = {}
    for i, entry in enumerate(doc.get("qms", ())):
        prefix = f"qms[{i}]"
        qid = entry.get("id")
        if not qid or not isinstance(qid, str):
            diags.append(Diagnostic("error", f"{prefix}.id",
                                    "every qm needs a string id"))
            continue
        if qid in qms:
            diags.append(Diagnostic("error", f"{prefix}.id",
                                    f"duplicate qm id {qid!r}"))
            continue
        q = _build_qm(entry, diags, prefix)
        if q is not None:
            qms[qid] = q

    mc_doc = dict(doc.get("mc", {}))
    mc_doc.setdefault("seed", seed)
    mc_doc["p_list"] = tuple(mc_doc.get("p_list", (1, 2, 3, 4)))
    mc = None
    try:
        mc = MCConfig(**mc_doc)
    except (TypeError, ValueError) as e:
        diags.append(Diagnostic("error", "mc", str(e)))
    if mc is not None and mc.n != 3 and qms:
        diags.append(Diagnostic(
            "warning", "mc.n",
            f"n = {mc.n} with pattern quasimorphism specs: the counting "
            "patterns live on the 3-strand Farey graph, so values for "
            "other strand counts are not comparable"))

    norms_doc = dict(doc.get("norms", {}))
    for key in ("k_vectors",):
        if key in norms_doc:
            norms_doc[key] = [tuple(int(x) for x in v)
                              for v in norms_doc[key]]

    for section, refkey in (("norms", "map"), ("norms", "maps")):
        ref = norms_doc.get(refkey)
        refs = [ref] if isinstance(ref, str) else (ref or [])
        for r in refs:
            if r not in maps:
                diags.append(Diagnostic(
                    "error", f"{section}.{refkey}",
                    f"unresolved map id {r!r}"))

    errors = [d for d in diags if d.severity == "error"]
    if errors:
        return None, diags
    cfg = ExperimentConfig(
        seed=seed,
        out_dir=out_dir,
        maps=maps,
        qms=qms,
        mc=mc,
        entropy=dict(doc.get("entropy", {})),
        norms=norms_doc,
        farey_queries=dict(doc.get("farey", {})),
        raw=doc,
    )
    return cfg, diags


def load(path: str) -> tuple[ExperimentConfig | None, list[Diagnostic]]:
    """Parse and validate a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        return None, [Diagnostic(
            "error", "$", f"invalid JSON at line {e.lineno} col {e.colno}: "
            f"{e.msg}")]
    return validate_dict(doc)
