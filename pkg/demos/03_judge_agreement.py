"""Compare judge scores with human scores, and turn Hard-case scores into percentages.

    python3 demos/03_judge_agreement.py
"""
from __future__ import annotations

import random

from deckhand import hard_percentage, parse_judge_scores, pearson

# a judge reply is range-checked key by key; fences and chatter around the JSON are tolerated
scores = parse_judge_scores('```json\n{"instruction_adherence": 4, "visualquality": 3}\n```',
                            '{"text_quality": 5, "image_quality": 4, "layout_quality": 4, "color_quality": 3}')
print(scores.to_dict())

# simulated human ratings and a judge that agrees up to noise
rng = random.Random(0)
human = [rng.randint(0, 5) for _ in range(40)]
judge = [min(5, max(0, h + rng.choice([-1, 0, 0, 0, 1]))) for h in human]
print("PCC human vs judge:", round(pearson(human, judge), 4))
print("PCC human vs shuffled:", round(pearson(human, rng.sample(judge, len(judge))), 4))

# Hard cases are scored 0..5 against an ideal outcome and reported as percentages
for s in range(6):
    print(s, "->", hard_percentage(s), "%")
