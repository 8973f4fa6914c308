"""Run two shipped experiment configs through the harness and print summaries.

The free-flow decay of a Gaussian in L^{7/3} and a small-data Picard
solve checked against the split-step integrator.

Run: python3 demos/decay_and_picard.py
"""
import json
from pathlib import Path

from nlslab.harness import ExperimentConfig, run_experiment

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(name):
    cfg = ExperimentConfig.from_json(json.loads((CONFIGS / f"{name}.json").read_text()))
    rep = run_experiment(cfg)
    print(f"{name}: {'pass' if rep.passed else 'FAIL'} in {rep.runtime:.1f}s")
    for k, v in rep.fitted.items():
        tgt = rep.targets.get(k)
        print(f"  {k} = {v:.6g}" + (f"  (target {tgt})" if tgt is not None else ""))
    return rep


def main():
    run("decay_linear")
    rep = run("picard_solve")
    xt = rep.details["xt_report"]
    print("  Picard distances:", ", ".join(f"{d:.2e}" for d in xt["distances"]))


if __name__ == "__main__":
    main()
