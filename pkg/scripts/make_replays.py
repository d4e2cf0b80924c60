"""Write the scripted LLM responses used by the replay backend in tests."""

from __future__ import annotations

from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "replay"

P1_FEASIBLE = [
    ("open", "kitchen_door"),
    ("pick", "bottle2"),
    ("place", "bottle2", "on", "counter2"),
    ("pick", "salter2"),
    ("place", "salter2", "on", "shelf"),
    ("pick", "salter1"),
    ("place", "salter1", "on", "counter3"),
    ("pick", "bottle1"),
    ("place", "bottle1", "on", "table1"),
]

# Each P4 response shares the obvious opening (door, plate) and then goes wrong
# in a different way, as temperature-1 samples of one prompt tend to.
_P4_OPENING = [
    ("open", "kitchen_door"),
    ("pick", "plate"),
    ("place", "plate", "on", "counter1"),
]
P4_IMPERFECT = [
    (
        "1. The kitchen door is closed.\n2. bottle2 blocks the salter.",
        _P4_OPENING
        + [  # clears only one blocker
            ("pick", "bottle2"),
            ("place", "bottle2", "on", "counter2"),
            ("pick", "salter"),
            ("place", "salter", "right_of", "bottle1"),
        ],
    ),
    (
        "1. The plate is behind the kitchen door.\n2. bottle2 and bottle3 occlude the salter.",
        _P4_OPENING
        + [  # mixes up left and right
            ("pick", "bottle2"),
            ("place", "bottle2", "on", "counter2"),
            ("pick", "bottle3"),
            ("place", "bottle3", "on", "counter2"),
            ("pick", "salter"),
            ("place", "salter", "left_of", "bottle1"),
        ],
    ),
    (
        "1. The kitchen door is closed and occludes the plate.\n2. The salter is occluded by bottle2 and bottle3.",
        _P4_OPENING
        + [  # skips the clearing and places the salter twice in a row
            ("pick", "salter"),
            ("place", "salter", "on", "table2"),
            ("place", "salter", "right_of", "bottle1"),
        ],
    ),
    (
        "1. The door blocks the plate.\n2. bottle3 is in front of the salter.",
        _P4_OPENING
        + [  # clears the other blocker only
            ("pick", "bottle3"),
            ("place", "bottle3", "on", "counter2"),
            ("pick", "salter"),
            ("place", "salter", "right_of", "bottle1"),
        ],
    ),
    (
        "1. The kitchen door is closed.\n2. Two bottles block the salter.",
        [  # plate to the wrong region, salter part correct
            ("open", "kitchen_door"),
            ("pick", "plate"),
            ("place", "plate", "on", "table1"),
            ("pick", "bottle2"),
            ("place", "bottle2", "on", "counter2"),
            ("pick", "bottle3"),
            ("place", "bottle3", "on", "counter2"),
            ("pick", "salter"),
            ("place", "salter", "right_of", "bottle1"),
        ],
    ),
]


def render(challenges: str, plan: list[tuple[str, ...]]) -> str:
    body = ",\n    ".join("(" + ", ".join(repr(x) for x in step) + ")" for step in plan)
    return (
        "## Possible Challenges for unachieved goals based on current state ##\n"
        f"{challenges}\n\n"
        "## Plan for unachieved goals ##\n"
        f"plan = [\n    {body}\n]\n"
    )


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for i in range(5):
        text = render("1. The kitchen door is closed and blocks counter2.", P1_FEASIBLE)
        (OUT / f"p1_analog.0.{i}.txt").write_text(text, encoding="utf-8")
    for i, (challenges, plan) in enumerate(P4_IMPERFECT):
        (OUT / f"p4_analog.0.{i}.txt").write_text(render(challenges, plan), encoding="utf-8")
    print(f"wrote replay fixtures to {OUT}")


if __name__ == "__main__":
    main()
