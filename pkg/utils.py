import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from errors import InvalidInputError

logger = logging.getLogger(__name__)


class Utils:
    """🛠️ Helpers"""

    @staticmethod
    def format_duration_ns(elapsed_ns: int) -> str:
        """⏱️ Human-readable duration"""
        if elapsed_ns < 1_000:
            return f"{elapsed_ns} ns"
        if elapsed_ns < 1_000_000:
            return f"{elapsed_ns / 1e3:.1f} µs"
        if elapsed_ns < 1_000_000_000:
            return f"{elapsed_ns / 1e6:.1f} ms"
        seconds = elapsed_ns / 1e9
        if seconds < 60:
            return f"{seconds:.2f}s"
        minutes, secs = divmod(int(seconds), 60)
        return f"{minutes}m {secs}s"

    @staticmethod
    def parse_size_range(text: str) -> Tuple[int, int]:
        """📏 'lo..hi' (or a single size) to an inclusive pair"""
        try:
            if '..' in text:
                lo, hi = text.split('..', 1)
                return int(lo), int(hi)
            size = int(text)
            return size, size
        except ValueError:
            raise InvalidInputError(f"size range '{text}' must look like 3..12") from None

    @staticmethod
    def parse_csv_list(text: str) -> List[str]:
        """📋 'a,b,,c' to ['a', 'b', 'c']"""
        return [part.strip() for part in (text or '').split(',') if part.strip()]

    @staticmethod
    def parse_float_list(text: str) -> List[float]:
        try:
            return [float(part) for part in Utils.parse_csv_list(text)]
        except ValueError:
            raise InvalidInputError(f"'{text}' is not a comma-separated list of numbers") from None


@dataclass
class SweepTask:
    description: str
    total: int
    done: int = 0
    status: str = 'running'
    last_cell: str = ''
    started_ns: int = field(default_factory=time.perf_counter_ns)
    elapsed_ns: int = 0

    @property
    def percentage(self) -> float:
        return self.done / self.total * 100 if self.total > 0 else 100.0

    @property
    def eta_ns(self) -> Optional[int]:
        """Remaining time extrapolated from the cells finished so far"""
        if self.done == 0 or self.status != 'running':
            return None
        return self.elapsed_ns * (self.total - self.done) // self.done


class ProgressTracker:
    """📊 Cells finished per benchmark sweep"""

    def __init__(self):
        self.tasks: Dict[str, SweepTask] = {}

    def start(self, task_id: str, description: str, total: int) -> SweepTask:
        task = SweepTask(description, total)
        self.tasks[task_id] = task
        logger.info(f"🚀 {description}: {total} cells")
        return task

    def advance(self, task_id: str, cell: str = ''):
        task = self.tasks.get(task_id)
        if task is None:
            return
        task.done = min(task.done + 1, task.total)
        task.last_cell = cell
        task.elapsed_ns = time.perf_counter_ns() - task.started_ns
        eta = task.eta_ns
        remaining = f", ~{Utils.format_duration_ns(eta)} left" if eta else ""
        logger.debug(f"🔄 {task.description}: {task.done}/{task.total} ({task.percentage:.0f}%){remaining}")

    def finish(self, task_id: str, status: str = 'completed'):
        task = self.tasks.get(task_id)
        if task is None:
            return
        task.status = status
        task.elapsed_ns = time.perf_counter_ns() - task.started_ns
        log = logger.info if status == 'completed' else logger.warning
        log(f"🏁 {task.description} {status} after {Utils.format_duration_ns(task.elapsed_ns)}")

    def get(self, task_id: str) -> Optional[SweepTask]:
        return self.tasks.get(task_id)


progress_tracker = ProgressTracker()
