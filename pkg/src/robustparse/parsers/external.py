"""Run an external parser through the line-in / block-out adapter protocol.

The adapter reads one sentence per line on stdin and answers each with one
wire-format block (see :mod:`robustparse.parsegraph`).  Timeouts and crashes
turn into failed outcomes for every unanswered sentence.
"""

from __future__ import annotations

import logging
import queue
import shutil
import subprocess
import threading
import time
from dataclasses import dataclass
from typing import Sequence

from ..corpus import Sentence
from ..parsegraph import DIRECTED, MODES, ParseOutcome, read_conll_block

log = logging.getLogger(__name__)

_EOF = object()


class AdapterError(RuntimeError):
    """The adapter could not be started at all."""


@dataclass(frozen=True)
class AdapterConfig:
    name: str
    command: tuple[str, ...]
    mode: str = DIRECTED
    timeout_per_sentence: float = 60.0
    batch: bool = False

    def __post_init__(self):
        if not self.command:
            raise ValueError("adapter command is empty")
        if self.timeout_per_sentence <= 0:
            raise ValueError("timeout must be positive")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "command", tuple(self.command))


def _pump(stream, q: queue.Queue) -> None:
    try:
        for line in iter(stream.readline, ""):
            q.put(line)
    except (OSError, ValueError):
        pass
    finally:
        q.put(_EOF)


def _feed(stdin, lines: list[str]) -> None:
    try:
        for ln in lines:
            stdin.write(ln)
        stdin.close()
    except (BrokenPipeError, OSError, ValueError):
        pass


def run_external(
    cfg: AdapterConfig, sentences: Sequence[Sentence], n_tokens: Sequence[int] | None = None
) -> list[ParseOutcome]:
    """Parse ``sentences`` with the adapter; output is index-aligned with input."""
    if not sentences:
        raise ValueError("no sentences to parse")
    exe = cfg.command[0]
    if shutil.which(exe) is None:
        raise AdapterError(f"adapter {cfg.name!r}: command not found: {exe}")
    try:
        proc = subprocess.Popen(
            list(cfg.command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            encoding="utf-8",
            errors="replace",
            bufsize=1,
        )
    except OSError as exc:
        raise AdapterError(f"adapter {cfg.name!r}: cannot start: {exc}") from exc

    lines = [s.detokenize().replace("\n", " ") + "\n" for s in sentences]
    q: queue.Queue = queue.Queue()
    reader = threading.Thread(target=_pump, args=(proc.stdout, q), daemon=True)
    reader.start()
    if cfg.batch:
        threading.Thread(target=_feed, args=(proc.stdin, lines), daemon=True).start()

    outcomes: list[ParseOutcome] = []
    dead_reason = None
    try:
        for idx, line in enumerate(lines):
            if dead_reason:
                outcomes.append(ParseOutcome.failed(dead_reason))
                continue
            if not cfg.batch:
                try:
                    proc.stdin.write(line)
                    proc.stdin.flush()
                except (BrokenPipeError, OSError, ValueError):
                    pass  # reader will see EOF
            block, dead_reason = _read_block(q, cfg.timeout_per_sentence)
            if block is None:
                log.warning("adapter %s: %s at sentence %d", cfg.name, dead_reason, idx + 1)
                outcomes.append(ParseOutcome.failed(dead_reason))
                continue
            nt = n_tokens[idx] if n_tokens is not None else len(sentences[idx])
            outcomes.append(read_conll_block(block, cfg.mode, nt))
    finally:
        _shutdown(proc)
    return outcomes


def _read_block(q: queue.Queue, timeout: float) -> tuple[str | None, str | None]:
    deadline = time.monotonic() + timeout
    rows: list[str] = []
    while True:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            return None, "timeout"
        try:
            item = q.get(timeout=remaining)
        except queue.Empty:
            return None, "timeout"
        if item is _EOF:
            return None, "process exited"
        if item.strip():
            rows.append(item)
        elif rows:
            return "".join(rows), None


def _shutdown(proc: subprocess.Popen) -> None:
    try:
        if proc.stdin and not proc.stdin.closed:
            proc.stdin.close()
    except (OSError, ValueError):
        pass
    try:
        proc.wait(timeout=1.0)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.wait()
