"""Run the 10-case golden benchmark offline and read the metrics.

    python3 demos/02_golden_benchmark.py

The same run from the shell:
    deckhand bench --manifest <dir>/manifest.jsonl --config <dir>/deckhand.json --workers 4 --no-timing
"""
from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
import golden  # noqa: E402

from deckhand import LLMClient, aggregate, load_config, load_manifest, run_suite  # noqa: E402

config_path = golden.build_golden(Path(tempfile.mkdtemp(prefix="deckhand-bench-")), judge=True)
cases = load_manifest(config_path.parent / "manifest.jsonl")
for case in cases:
    hard = f" hard={case.hard.hard_type}" if case.hard else ""
    print(f"{case.instruction_key:>4} {case.category:<17}{hard}")

# judge="text" scores the edits from SlideJson instead of rendered images, so no office suite is needed
records = run_suite(cases, LLMClient(load_config(config_path)), workers=4, judge="text")
metrics = aggregate(records)

print()
print("SR over feasible cases:", metrics.overall.sr_percent)
print("refusal accuracy:", metrics.ra_percent, " catastrophic failures:", metrics.cf_percent)
for name, group in metrics.by_category.items():
    print(f"  {name:<17} sr={group.sr_percent} cost/case=${group.mean_cost_usd}")
print("judge means:", json.dumps(metrics.judge_means))
print("hard score percent:", metrics.hard_score_percent)
