"""Three-qubit entanglement: binary detection per family, then 4-way.

Miniature version of the three-qubit experiments: binary detectors for
the bipartite / GHZ / W families against separable states, and one
categorical run over all four classes.  W is the easiest family, GHZ
the hardest; random guessing on the 4-way problem would score 0.25.

Uses a process pool, hence the __main__ guard.
"""

import tempfile

from entdetect.experiments import run_experiment

if __name__ == "__main__":
    with tempfile.TemporaryDirectory() as out:
        print("binary families at desk scale (a few minutes) ...")
        fam = run_experiment("families_binary", out, scale="desk", seed=0, jobs=2,
                             repetitions=3)
        print()
        for tag, label in (("be3", "bipartite"), ("ghz3", "GHZ"), ("w3", "W")):
            print(f"{label:10s} mean ASR {fam[f'{tag}:asr']:.4f}, "
                  f"best test BCE {fam[f'{tag}:best_bce']:.4f}")
        print()
        print("cross-family ASR (rows: trained on, cols: tested on be3/ghz3/w3):")
        for row, tag in zip(fam["cross_matrix"], ("be3", "ghz3", "w3")):
            print(f"  {tag}: " + "  ".join(f"{v:.3f}" for v in row))

        print()
        print("categorical 4-way classification, three desk-scale runs ...")
        cat = run_experiment("categorical_runs", out, scale="desk", seed=0, jobs=2,
                             repetitions=3, batch_size=100)
        print(f"per-run final ASR: {[round(a, 3) for a in cat['per_run_asr']]}")
        print(f"mean {cat['mean_asr']:.3f} vs 0.25 random baseline")
