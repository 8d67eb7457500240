"""Walk through one edit: parse a deck, apply a script by hand, then run the agent with a mock model.

Needs the test extra (python-pptx) to author the sample deck:
    pip install -e '.[test]' --no-build-isolation
    python3 demos/01_edit_a_deck.py
"""
from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
import decks  # noqa: E402  (fixture deck builders shared with the test suite)

from deckhand import apply_script, edit_deck, load_deck, mock_client, parse_edit_script, save_deck, slide_to_json  # noqa: E402

work = Path(tempfile.mkdtemp(prefix="deckhand-demo-"))
path = decks.five_slides(work / "talk.pptx")

# the deck as the model sees it: one JSON object per slide, runs are the atomic unit
deck = load_deck(path)
print("slides:", deck.slide_count)
print(json.dumps(slide_to_json(deck, 3), indent=2)[:400], "...")

# a hand-written EditScript; the interpreter validates every op before touching anything
script = parse_edit_script("""{"ops": [
  {"set_run_text": {"slide": 3, "shape_selector": "2", "paragraph_index": 0, "run_index": 0, "text": "Method"}},
  {"set_run_format": {"slide": 3, "shape_selector": "2", "paragraph_index": 0, "run_index": 0,
                      "format": {"bold": true, "color_rgb": 16711680}}}
]}""")
edited, report = apply_script(script, deck)
save_deck(edited, work / "by_hand.pptx")
print("applied ops:", report.applied_ops, "-> run format:",
      edited.slides[2].shapes[0].text_frame.paragraphs[0].runs[0].format)

# the full agent: planner, editor, then code generation with self-reflection.
# The mock's first script has a hex-string color, which fails to parse; the retry fixes it.
plan = '{"understanding": "title emphasis", "tasks": [{"page number": 3, "description": "Make the title bold and red", "action": "format"}]}'
bad = ('{"ops": [{"set_run_format": {"slide": 3, "shape_selector": "2", "paragraph_index": 0, '
       '"run_index": 0, "format": {"bold": true, "color_rgb": "FF0000"}}}]}')
good = bad.replace('"FF0000"', "16711680")
client = mock_client([{"text": t, "usage": {"in": 1500, "out": 200}}
                      for t in (plan, json.dumps(slide_to_json(deck, 3)), bad, good)])
outcome = edit_deck("Make the title on slide 3 bold and red", path, client)

print("status:", outcome.status, "output:", outcome.output_path)
trace = outcome.task_results[0].trace
print("attempt outcomes:", trace.outcomes)
usage = outcome.ledger.to_dict()
print("calls:", [(e["stage"], e["cost_usd"]) for e in usage["entries"]])
print("total tokens:", usage["input_tokens"], "in /", usage["output_tokens"], "out; cost $" + usage["cost_usd"])
