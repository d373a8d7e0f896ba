"""Run artifacts: delimited output, a reproducibility manifest, figures.

CSV files are the determinism contract: UTF-8, LF line endings, a header
row, floats written with repr() (shortest round-trip form), so a rerun
with the same config and seed is byte-identical.  The JSON manifest
carries everything needed to reproduce the run (tool version, the full
config document, its hash, per-command parameters, artifact digests)
plus timestamps; timestamps make the manifest itself exempt from the
byte-identity contract.  Figures are rendered with the Agg backend next
to the CSV files; they are a convenience view, never the contract.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os

from . import __version__


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _needs_quote(s: str) -> bool:
    return any(c in s for c in (",", '"', "\n"))


def _quote(s: str) -> str:
    if _needs_quote(s):
        return '"' + s.replace('"', '""') + '"'
    return s


def config_hash(doc: dict) -> str:
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class ReportWriter:
    """Collects artifacts for one CLI run and writes the manifest last."""

    def __init__(self, out_dir: str, command: str, config_doc: dict,
                 seed: int, figures: bool = True):
        self.out_dir = out_dir
        self.command = command
        self.config_doc = config_doc
        self.seed = seed
        self.figures_enabled = figures
        self.artifacts: list[dict] = []
        self.params: dict = {}
        self.warnings: list[str] = []
        self.partial = False
        os.makedirs(out_dir, exist_ok=True)

    # -- delimited output ------------------------------------------------
    def csv(self, name: str, header, rows) -> str:
        path = os.path.join(self.out_dir, name)
        lines = [",".join(_quote(str(h)) for h in header)]
        for row in rows:
            lines.append(",".join(_quote(_cell(v)) for v in row))
        data = ("\n".join(lines) + "\n").encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(data)
        self.artifacts.append({
            "name": name,
            "kind": "csv",
            "sha256": hashlib.sha256(data).hexdigest(),
            "bytes": len(data),
        })
        return path

    # -- figures ----------------------------------------------------------
    def figure(self, name: str, draw) -> str | None:
        """Render a PNG via ``draw(ax)``; skipped when figures are off."""
        if not self.figures_enabled:
            return None
        import matplotlib
        matplotlib.use("Agg", force=False)
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=120)
        try:
            draw(ax)
            fig.tight_layout()
            path = os.path.join(self.out_dir, name)
            fig.savefig(path)
        finally:
            plt.close(fig)
        with open(path, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        self.artifacts.append({
            "name": name, "kind": "figure", "sha256": digest,
        })
        return path

    # -- manifest ----------------------------------------------------------
    def manifest(self, **params) -> str:
        self.params.update(params)
        doc = {
            "tool": "diskbraid",
            "version": __version__,
            "command": self.command,
            "seed": self.seed,
            "config": self.config_doc,
            "config_sha256": config_hash(self.config_doc),
            "parameters": self.params,
            "artifacts": self.artifacts,
            "warnings": self.warnings,
            "partial": self.partial,
            "written_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        }
        path = os.path.join(self.out_dir, "manifest.json")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path
