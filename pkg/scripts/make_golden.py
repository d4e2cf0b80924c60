"""Regenerate the golden prompt for the bundled P5 analog.

The file holds the user message only; the system text is a module constant.
Run after a deliberate change to rendering, then review the diff.
"""

from __future__ import annotations

from pathlib import Path

from stalm.bench.problems import bundled_problem
from stalm.motion import Env, compute_literals
from stalm.prompt import create_prompt, state_hash

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "prompts"


def main() -> None:
    prob = bundled_problem("p5_analog")
    env = Env.build(prob)
    bundle = create_prompt(prob.s0, prob.goal, prob, compute_literals(env, prob.s0))
    OUT.mkdir(parents=True, exist_ok=True)
    for old in OUT.glob(f"{prob.name}.*.prompt.txt"):
        old.unlink()
    path = OUT / f"{prob.name}.{state_hash(prob.s0)}.prompt.txt"
    path.write_text(bundle.user_text, encoding="utf-8")
    print(path)


if __name__ == "__main__":
    main()
