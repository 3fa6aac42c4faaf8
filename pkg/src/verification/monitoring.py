"""Resource snapshots around check groups."""

import time
from typing import Dict, Optional

import psutil


class ResourceMonitor:
    """
    Wall-clock, CPU and memory usage of one check group.

    Provides:
    - Before/after snapshots of the current process
    - The difference as a timing record for reports
    """

    def __init__(self):
        self.process = psutil.Process()
        self.pre_snapshot: Optional[Dict[str, float]] = None
        self.post_snapshot: Optional[Dict[str, float]] = None

    def take_snapshot(self) -> Dict[str, float]:
        times = self.process.cpu_times()
        return {
            "wall": time.perf_counter(),
            "cpu": times.user + times.system,
            "rss_mb": self.process.memory_info().rss / (1024 * 1024),
        }

    def start(self) -> None:
        self.pre_snapshot = self.take_snapshot()

    def stop(self) -> Dict[str, float]:
        """
        Returns:
            wall_seconds, cpu_seconds and rss_mb (resident size at the end)
        """
        self.post_snapshot = self.take_snapshot()
        before = self.pre_snapshot or self.post_snapshot
        after = self.post_snapshot
        return {
            "wall_seconds": round(after["wall"] - before["wall"], 3),
            "cpu_seconds": round(after["cpu"] - before["cpu"], 3),
            "rss_mb": round(after["rss_mb"], 1),
        }
