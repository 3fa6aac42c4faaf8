"""Catalog of the bundled scenarios."""

from pathlib import Path
from typing import Dict, List, Optional

SCENARIO_DIR = Path(__file__).resolve().parents[2] / "scenarios"


class ScenarioCatalog:
    """
    Bundled, known-good scenarios.

    Provides:
    - Lookup by id or by file path
    - Tag filtering for the ``list`` command
    """

    SCENARIOS = {
        "example_a": {
            "file": "example_a.json",
            "description": "Rank 1, holomorphic section z with a flat non-trivial connection",
            "checks": ["koszul", "chern", "twisted"],
            "tags": ["rank1", "holomorphic", "koszul"],
        },
        "example_b": {
            "file": "example_b.json",
            "description": "Rank 1, real-analytic section z(1 + zw)",
            "checks": ["twisted", "chern"],
            "tags": ["rank1", "real-analytic", "twisted"],
        },
        "example_c": {
            "file": "example_c.json",
            "description": "Rank 2 on C^2, section (z1(1 + z1w1), z2) with trivial connection",
            "checks": ["twisted"],
            "tags": ["rank2", "real-analytic", "twisted", "slow"],
        },
        "rank2_holomorphic": {
            "file": "rank2_holomorphic.json",
            "description": "Rank 2 on C^2, section (z1, z2) with trivial connection",
            "checks": ["koszul", "chern", "twisted"],
            "tags": ["rank2", "holomorphic", "koszul"],
        },
        "rank2_connection": {
            "file": "rank2_connection.json",
            "description": "Rank 2 on C^2, section (z1, z2) with a diagonal flat connection",
            "checks": ["koszul", "twisted"],
            "tags": ["rank2", "holomorphic", "koszul"],
        },
        "negative_flatness": {
            "file": "negative_flatness.json",
            "description": "Negative control: connection z2 dz1 on C^2 is not flat",
            "checks": ["koszul", "chern"],
            "tags": ["negative-control"],
        },
    }

    @classmethod
    def get_scenario_by_id(cls, scenario_id: str) -> Optional[Dict]:
        """Get a catalog entry by id."""
        return cls.SCENARIOS.get(scenario_id)

    @classmethod
    def list_all_scenarios(cls) -> List[Dict]:
        """List all bundled scenarios."""
        return [{"id": sid, **entry} for sid, entry in cls.SCENARIOS.items()]

    @classmethod
    def get_scenarios_by_tag(cls, tag: str) -> List[Dict]:
        return [
            {"id": sid, **entry}
            for sid, entry in cls.SCENARIOS.items()
            if tag.lower() in [t.lower() for t in entry.get("tags", [])]
        ]

    @classmethod
    def resolve(cls, config: str) -> Path:
        """A catalog id resolves to its bundled file; anything else is taken as a path."""
        entry = cls.get_scenario_by_id(config)
        if entry is not None:
            return SCENARIO_DIR / entry["file"]
        return Path(config)
