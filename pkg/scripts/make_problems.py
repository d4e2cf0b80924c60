"""Regenerate the bundled problem fixtures under src/stalm/bench/problems/."""

from __future__ import annotations

import json
from pathlib import Path

from stalm.bench.layout import (
    BOTTLE,
    CAN,
    COUNTER1,
    COUNTER2,
    COUNTER3,
    COUNTER5,
    GRILL,
    PLATE,
    SALTER,
    SHELF,
    TABLE1,
    TABLE2,
    movable,
    problem,
    walled,
)

OUT = Path(__file__).resolve().parents[1] / "src" / "stalm" / "bench" / "problems"


def p1():
    return problem(
        "p1_analog",
        "Door occlusion: three of four deliveries go to kitchen surfaces behind a closed door.",
        [TABLE1, TABLE2, COUNTER2, COUNTER3, SHELF],
        [
            movable("bottle1", BOTTLE, [0.9, 1.0, 0.0]),
            movable("salter1", SALTER, [1.5, 1.0, 0.0]),
            movable("bottle2", BOTTLE, [0.9, 5.0, 0.0]),
            movable("salter2", SALTER, [1.5, 5.0, 0.0]),
        ],
        [
            ["bottle1", "on", "table1"],
            ["bottle2", "on", "counter2"],
            ["salter1", "on", "counter3"],
            ["salter2", "on", "shelf"],
        ],
        False,
        300.0,
    )


def _salter_clutter():
    # bottle2 and bottle3 both straddle the reach corridor to the salter
    return [
        movable("salter", SALTER, [1.2, 5.2, 0.0]),
        movable("bottle2", BOTTLE, [1.14, 4.92, 0.0]),
        movable("bottle3", BOTTLE, [1.26, 4.92, 0.0]),
        movable("bottle1", BOTTLE, [1.5, 1.0, 0.0]),
    ]


def p2():
    return problem(
        "p2_analog",
        "Clutter clearing: two bottles block the reach to the salter.",
        [TABLE1, TABLE2, COUNTER1, COUNTER2, SHELF],
        _salter_clutter(),
        [["salter", "on", "table2"], ["salter", "right_of", "bottle1"]],
        True,
        300.0,
    )


def p3():
    return problem(
        "p3_analog",
        "Tight space: milk and coke sit among bottles that do not block them.",
        [TABLE1, TABLE2, COUNTER2, COUNTER3, SHELF],
        [
            movable("milk", CAN, [1.0, 5.0, 0.0]),
            movable("coke", CAN, [1.4, 5.0, 0.0]),
            movable("bottle1", BOTTLE, [0.75, 5.15, 0.0]),
            movable("bottle2", BOTTLE, [1.2, 5.2, 0.0]),
            movable("bottle3", BOTTLE, [1.65, 5.15, 0.0]),
        ],
        [["milk", "on", "counter2"], ["coke", "on", "counter2"]],
        True,
        600.0,
    )


def p4():
    return problem(
        "p4_analog",
        "Door plus clutter: the plate is behind the closed door and the salter is walled in by bottles.",
        [TABLE1, TABLE2, COUNTER1, COUNTER2, SHELF],
        _salter_clutter() + [movable("plate", PLATE, [7.2, 5.0, 0.0]), movable("cup", CAN, [0.8, 1.0, 0.0])],
        [["plate", "on", "counter1"], ["salter", "on", "table2"], ["salter", "right_of", "bottle1"]],
        False,
        300.0,
    )


def p5():
    counter1 = walled("counter1", 5.6, 5.1)
    return problem(
        "p5_analog",
        "Temporary placement: the grill only fits at the front of counter1 and must go there last.",
        [counter1, COUNTER2, COUNTER3, COUNTER5],
        [
            movable("coke", CAN, [7.2, 5.15, 0.0]),
            movable("beef_grill", GRILL, [7.2, 4.85, 0.0]),
            movable("sprite", CAN, [7.2, 1.15, 0.0]),
            movable("pork_grill", GRILL, [7.2, 0.85, 0.0]),
            movable("mango_juice", CAN, [5.2, 0.85, 0.0]),
            movable("dr_pepper", CAN, [5.2, 1.15, 0.0]),
        ],
        [["coke", "on", "counter1"], ["sprite", "on", "counter1"], ["beef_grill", "on", "counter1"]],
        True,
        600.0,
    )


def p6():
    counter2 = walled("counter2", 5.6, 5.1)
    return problem(
        "p6_analog",
        "Displacing a goal object: the grill already rests on counter2 but blocks the pocket behind it.",
        [counter2, TABLE1, TABLE2, COUNTER3],
        [
            movable("beef_grill", GRILL, [5.6, 4.85, 0.0]),
            movable("coke", CAN, [1.0, 5.0, 0.0]),
            movable("wine", BOTTLE, [7.0, 1.0, 0.0]),
        ],
        [["coke", "on", "counter2"], ["wine", "on", "counter2"], ["beef_grill", "on", "counter2"]],
        False,
        600.0,
    )


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for fn in (p1, p2, p3, p4, p5, p6):
        doc = fn()
        (OUT / f"{doc['name']}.json").write_text(json.dumps(doc, indent=1) + "\n")
        print("wrote", doc["name"])


if __name__ == "__main__":
    main()
