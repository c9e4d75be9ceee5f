import sys
from typing import TextIO


def format_elapsed(seconds: float) -> str:
    """12.3s under a minute, then 4m05s, then 1h02m."""
    seconds = max(0.0, seconds)
    if seconds < 60:
        return f"{seconds:.1f}s"
    minutes, s = divmod(int(seconds), 60)
    if minutes < 60:
        return f"{minutes}m{s:02d}s"
    h, minutes = divmod(minutes, 60)
    return f"{h}h{minutes:02d}m"


def stage_bar(done: int, total: int) -> str:
    """One cell per pipeline stage: [###...]."""
    done = max(0, min(done, total))
    return "[" + "#" * done + "." * (total - done) + "]"


def format_stage_line(stage: str, done: int, total: int, elapsed_sec: float) -> str:
    return f"{stage_bar(done, total)} {done}/{total} {stage:<9} {format_elapsed(elapsed_sec)}"


def print_stage_progress(stage: str, done: int, total: int, elapsed_sec: float, stream: TextIO | None = None) -> None:
    """
    Rewrite a single progress line for a pipeline stage.

    Only draws when the stream is a terminal, so captured output stays clean.
    """
    stream = stream or sys.stderr
    if not stream.isatty():
        return
    stream.write("\r\033[K" + format_stage_line(stage, done, total, elapsed_sec))
    if done >= total:
        stream.write("\n")
    stream.flush()
