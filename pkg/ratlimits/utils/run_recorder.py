# ratlimits/utils/run_recorder.py
from __future__ import annotations
import datetime, json, shutil, traceback, uuid
from pathlib import Path
from typing import Any, Mapping, Sequence

from ratlimits.config import Settings, get_settings


def _now_str() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y%m%d_%H%M%S_%f")[:-3]

def _safe(s: str) -> str:
    return "".join(c if c.isalnum() or c in ("-", "_", ".") else "_" for c in s)[:100]

def _ensure_unique_path(p: Path) -> Path:
    if not p.exists():
        return p
    stem, suffix, i = p.stem, p.suffix, 1
    while True:
        cand = p.with_name(f"{stem}({i}){suffix}")
        if not cand.exists():
            return cand
        i += 1

def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)


class RunRecorder:
    """
    Per-run folder capturing:
      - run_meta.json   (command, arguments, seed, threads, settings)
      - input__<original-filename>  # input documents copied here
      - report.json     (on success)
      - exception.txt   (on error)

    Controlled by Settings.run_log_enabled / Settings.run_log_dir.
    """
    def __init__(self, cfg: Settings | None = None) -> None:
        cfg = cfg or get_settings()
        self.cfg = cfg
        self.enabled: bool = bool(cfg.run_log_enabled)
        self.root: Path = Path(cfg.run_log_dir).resolve()
        self.dir: Path | None = None

    def start(self, command: str, arguments: Mapping[str, Any]) -> "RunRecorder":
        if not self.enabled:
            return self
        rid = f"{_now_str()}_{uuid.uuid4().hex[:8]}_{_safe(command or 'run')}"
        self.dir = self.root / rid
        self.dir.mkdir(parents=True, exist_ok=True)

        meta = {
            "command": command,
            "timestamp_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="milliseconds"),
            "arguments": _jsonable(dict(arguments)),
            "seed": self.cfg.seed,
            "threads": self.cfg.resolved_threads(),
            "settings": self.cfg.model_dump(),
        }
        (self.dir / "run_meta.json").write_text(json.dumps(meta, ensure_ascii=False, indent=2), encoding="utf-8")
        return self

    def save_inputs(self, paths: Sequence[str | Path]) -> None:
        if not (self.enabled and self.dir) or not paths:
            return
        for src in paths:
            src = Path(src)
            try:
                dest = _ensure_unique_path(self.dir / f"input__{_safe(src.name) or 'input'}")
                shutil.copyfile(src, dest)
            except OSError as e:
                err = self.dir / f"{_safe(src.name)}__COPY_ERROR.txt"
                err.write_text(str(e), encoding="utf-8")

    def save_report(self, exit_code: int, payload: Any) -> None:
        if not (self.enabled and self.dir):
            return
        out = {"exit_code": exit_code, "payload": _jsonable(payload)}
        (self.dir / "report.json").write_text(json.dumps(out, ensure_ascii=False, indent=2), encoding="utf-8")

    def save_exception(self, exc: BaseException) -> None:
        if not (self.enabled and self.dir):
            return
        tb = "".join(traceback.format_exception(type(exc), exc, exc.__traceback__))
        (self.dir / "exception.txt").write_text(tb, encoding="utf-8")

    def save_text(self, name: str, text: str) -> Path | None:
        """Write a UTF-8 artifact (CSV dump, DOT graph) into this run folder."""
        if not (self.enabled and self.dir):
            return None
        dest = _ensure_unique_path(self.dir / _safe(name or "artifact.txt"))
        dest.write_text(text if isinstance(text, str) else str(text), encoding="utf-8")
        return dest
