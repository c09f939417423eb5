"""Drive the whole CLI pipeline against the bundled dataset.

Every step shells through causalbn.cli.main, so this doubles as a smoke test
of the command-line surface: preprocessing, both structure learners, the
mock-replay elicitation round trip, validation, metric export with a saved
model, posterior queries, and the cross-method comparison. Artifacts land in
--out-dir (default out/).

Run from the repository root:

    python scripts/run_pipeline.py [--data data/sleep_health_and_lifestyle.csv]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import causalbn
from causalbn.cli import main as cli

FIXTURES = Path(causalbn.__file__).with_name("fixtures")


def step(title: str, argv: list[str]) -> None:
    print(f"\n== {title}")
    print("   causalbn " + " ".join(argv))
    code = cli(argv)
    if code != 0:
        sys.exit(code)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data", default="data/sleep_health_and_lifestyle.csv")
    parser.add_argument("--out-dir", default="out", dest="out_dir")
    args = parser.parse_args()

    out = Path(args.out_dir)
    bins = str(FIXTURES / "sleep_bins.json")
    common = ["--data", args.data, "--bins", bins]

    step("preprocess", ["preprocess", *common, "--out", str(out / "table.json")])

    step("learn (BIC hill climbing)", [
        "learn", "--method", "bic", *common,
        "--name", "sleep_bic", "--out", str(out / "structure_bic.json"),
    ])

    step("learn (information-based skeleton)", [
        "learn", "--method", "miic", *common,
        "--name", "sleep_miic", "--out", str(out / "structure_miic.json"),
    ])

    step("elicit (replayed transcripts)", [
        "elicit",
        "--context", str(FIXTURES / "elicitation_context.json"),
        "--proposer", f"mock:{FIXTURES / 'mock_proposal_response.txt'}",
        "--verifier", f"mock:{FIXTURES / 'mock_verification_response.txt'}",
        "--name", "sleep_llm",
        "--out", str(out / "structure_llm.json"),
        "--transcript", str(out / "transcript.json"),
    ])

    step("validate (per-edge regression)", [
        "validate", *common,
        "--structure", str(out / "structure_llm.json"),
        "--out", str(out / "report.json"),
    ])

    step("metrics and fitted model", [
        "metrics", *common,
        "--structure", str(out / "structure_llm.json"),
        "--format", "table",
        "--save-model", str(out / "model.json"),
    ])

    step("query: nurse with poor sleep", [
        "query", "--model", str(out / "model.json"),
        "--evidence", "Occupation=Nurse,Sleep_Duration=normal,"
                      "Physical_Activity_Level=low,Quality_of_Sleep=bad",
        "--target", "Stress_Level",
    ])

    step("query: male doctor with insomnia", [
        "query", "--model", str(out / "model.json"),
        "--evidence", "Occupation=Doctor,Gender=Male,Sleep_Disorder=Insomnia,"
                      "Physical_Activity_Level=moderate",
        "--all",
    ])

    step("compare methods", [
        "compare", *common,
        "--structures",
        str(out / "structure_llm.json"),
        str(out / "structure_bic.json"),
        str(FIXTURES / "structure_expert.json"),
        "--labels", "llm", "bic", "expert",
        "--out", str(out / "comparison.json"),
    ])

    print(f"\nall steps finished; artifacts in {out}/")


if __name__ == "__main__":
    main()
