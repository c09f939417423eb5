"""Two-round expert elicitation of a causal graph from language models.

Round 1 asks a proposer model for dependency claims; round 2 asks an
independent verifier to confirm, reject, or redirect each claim and to
name confounders. Bidirectional claims are resolved to single directions
by a pluggable policy, cycles are repaired deterministically, and the
whole exchange is captured in a replayable transcript.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .data import DataTable
from .errors import (
    CycleError,
    EmptyVariableListError,
    InvalidClaimError,
    MissingFileError,
    NoClaimsError,
    NoClaimsFoundError,
    ParseFailureError,
    TransportError,
    UnresolvedPairError,
)
from .graph import Dag, StructureFile
from .transport import Transport

DIRECTED = "directed"
BIDIRECTIONAL = "bidirectional"
CONFIRMED = "confirmed"
REJECTED = "rejected"
REVISED = "revised"

POLICY_VERIFIER = "verifier_priority"
POLICY_SEM = "sem_estimate"
POLICY_MANUAL = "manual"


def _normalize(name: str) -> str:
    return name.strip().lower().replace(" ", "_")


@dataclass
class PromptContext:
    """Everything the prompt templates need to know about the dataset."""

    domain_topic: str
    dataset_name: str
    n_rows: int
    n_cols: int
    variables: list[str]
    discovery_method: str = "BIC"
    seed_relationships: list[tuple[str, str, str]] = field(default_factory=list)

    def __post_init__(self):
        if not self.variables:
            raise EmptyVariableListError("context needs at least one variable")
        known = set(self.variables)
        for parent, child, _ in self.seed_relationships:
            if parent not in known or child not in known:
                raise InvalidClaimError(
                    f"seed relationship {parent} -> {child} references an unlisted variable"
                )

    def variable_lookup(self) -> dict[str, str]:
        return {_normalize(v): v for v in self.variables}

    def to_json_dict(self) -> dict:
        return {
            "domain_topic": self.domain_topic,
            "dataset_name": self.dataset_name,
            "n_rows": self.n_rows,
            "n_cols": self.n_cols,
            "variables": list(self.variables),
            "discovery_method": self.discovery_method,
            "seed_relationships": [
                {"parent": p, "child": c, "description": d}
                for p, c, d in self.seed_relationships
            ],
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "PromptContext":
        return PromptContext(
            domain_topic=doc["domain_topic"],
            dataset_name=doc["dataset_name"],
            n_rows=int(doc["n_rows"]),
            n_cols=int(doc["n_cols"]),
            variables=list(doc["variables"]),
            discovery_method=doc.get("discovery_method", "BIC"),
            seed_relationships=[
                (s["parent"], s["child"], s.get("description", ""))
                for s in doc.get("seed_relationships", [])
            ],
        )

    @staticmethod
    def load(path: str | Path) -> "PromptContext":
        p = Path(path)
        if not p.exists():
            raise MissingFileError(str(p))
        return PromptContext.from_json_dict(json.loads(p.read_text()))


@dataclass(frozen=True)
class EdgeClaim:
    parent: str
    child: str
    rationale: str = ""
    direction_confidence: str = DIRECTED  # or BIDIRECTIONAL
    source: str = "proposer"  # or "verifier"

    def __post_init__(self):
        if self.parent == self.child:
            raise InvalidClaimError(f"self-dependency {self.parent} -> {self.child}")
        if self.direction_confidence not in (DIRECTED, BIDIRECTIONAL):
            raise InvalidClaimError(
                f"unknown direction confidence {self.direction_confidence!r}"
            )
        if self.source not in ("proposer", "verifier"):
            raise InvalidClaimError(f"unknown claim source {self.source!r}")

    @property
    def pair(self) -> tuple[str, str]:
        return tuple(sorted((self.parent, self.child)))

    def to_json_dict(self) -> dict:
        return {
            "parent": self.parent,
            "child": self.child,
            "rationale": self.rationale,
            "direction_confidence": self.direction_confidence,
            "source": self.source,
        }


@dataclass(frozen=True)
class Confounder:
    name: str
    rationale: str = ""

    def to_json_dict(self) -> dict:
        return {"name": self.name, "rationale": self.rationale}


@dataclass(frozen=True)
class VerificationVerdict:
    claim: EdgeClaim
    verdict: str  # confirmed | rejected | revised
    revised_direction: tuple[str, str] | None = None
    confounders: tuple[Confounder, ...] = ()

    def __post_init__(self):
        if self.verdict not in (CONFIRMED, REJECTED, REVISED):
            raise InvalidClaimError(f"unknown verdict {self.verdict!r}")
        if (self.verdict == REVISED) != (self.revised_direction is not None):
            raise InvalidClaimError("revised_direction is required exactly when revised")

    def to_json_dict(self) -> dict:
        return {
            "claim": self.claim.to_json_dict(),
            "verdict": self.verdict,
            "revised_direction": (
                None if self.revised_direction is None
                else {"parent": self.revised_direction[0], "child": self.revised_direction[1]}
            ),
            "confounders": [c.to_json_dict() for c in self.confounders],
        }


@dataclass(frozen=True)
class Resolution:
    """One decision about a variable pair: the direction kept (or None for
    a drop) and which rule produced it."""

    pair: tuple[str, str]  # sorted
    chosen_direction: tuple[str, str] | None
    rule_applied: str

    def to_json_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "chosen_direction": (
                None if self.chosen_direction is None
                else {"parent": self.chosen_direction[0], "child": self.chosen_direction[1]}
            ),
            "rule_applied": self.rule_applied,
        }


@dataclass
class ElicitationTranscript:
    """Complete audit trail of one protocol run."""

    context: PromptContext
    round1_prompt: str = ""
    round1_raw: str = ""
    round1_claims: list[EdgeClaim] = field(default_factory=list)
    round1_diagnostics: list[str] = field(default_factory=list)
    round2_prompt: str = ""
    round2_raw: str = ""
    verdicts: list[VerificationVerdict] = field(default_factory=list)
    round2_diagnostics: list[str] = field(default_factory=list)
    resolutions: list[Resolution] = field(default_factory=list)
    final_dag: Dag | None = None
    confirmed_count: int = 0
    proposed_count: int = 0

    @property
    def confounders(self) -> list[Confounder]:
        out: list[Confounder] = []
        for v in self.verdicts:
            out.extend(v.confounders)
        return out

    def to_json_dict(self) -> dict:
        final = None
        if self.final_dag is not None:
            final = {
                "nodes": list(self.final_dag.nodes),
                "edges": [{"parent": p, "child": c} for p, c in self.final_dag.edges()],
            }
        return {
            "context": self.context.to_json_dict(),
            "round1_prompt": self.round1_prompt,
            "round1_raw": self.round1_raw,
            "round1_claims": [c.to_json_dict() for c in self.round1_claims],
            "round1_diagnostics": list(self.round1_diagnostics),
            "round2_prompt": self.round2_prompt,
            "round2_raw": self.round2_raw,
            "verdicts": [v.to_json_dict() for v in self.verdicts],
            "round2_diagnostics": list(self.round2_diagnostics),
            "resolutions": [r.to_json_dict() for r in self.resolutions],
            "final_dag": final,
            "confirmed_count": self.confirmed_count,
            "proposed_count": self.proposed_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


# --- prompt rendering ---------------------------------------------------------

CLAIM_FORMAT_INSTRUCTION = (
    "Answer with one line per relationship, exactly in this form:\n"
    "Parent_Variable -> Child_Variable :: one-sentence rationale\n"
    "Use <-> instead of -> when the direction is genuinely uncertain.\n"
    "Use only the variable names listed above. No other text."
)

VERDICT_FORMAT_INSTRUCTION = (
    "Answer with one line per relationship, exactly in this form:\n"
    "VERDICT: Parent_Variable -> Child_Variable :: confirmed\n"
    "VERDICT: Parent_Variable -> Child_Variable :: rejected\n"
    "VERDICT: Parent_Variable -> Child_Variable :: revised :: New_Parent -> New_Child\n"
    "After the verdicts, list external confounding factors (variables not\n"
    "in the dataset), one per line:\n"
    "CONFOUNDER: factor name :: one-sentence rationale\n"
    "No other text."
)


def render_proposal_prompt(ctx: PromptContext) -> str:
    """Round-1 prompt: describe the dataset and ask for causal claims."""
    if not ctx.variables:
        raise EmptyVariableListError("context has no variables")
    lines = [
        "You are an expert in causal inference and probabilistic modeling.",
        f"Domain: {ctx.domain_topic}.",
        f"Dataset: {ctx.dataset_name}, {ctx.n_rows} rows and {ctx.n_cols} columns.",
        "Variables:",
    ]
    lines.extend(f"- {v}" for v in ctx.variables)
    if ctx.seed_relationships:
        lines.append(
            f"A {ctx.discovery_method} structure search over this dataset "
            "suggested these dependencies:"
        )
        lines.extend(
            f"- {p} -> {c}: {d}" if d else f"- {p} -> {c}"
            for p, c, d in ctx.seed_relationships
        )
        lines.append(
            "Interpret these statistical suggestions causally: keep what is "
            "plausible, drop artifacts, and add domain-knowledge relationships "
            "the search missed."
        )
    else:
        lines.append(
            "Propose the causal relationships you would expect between these "
            "variables from domain knowledge."
        )
    lines.append("")
    lines.append(CLAIM_FORMAT_INSTRUCTION)
    return "\n".join(lines) + "\n"


def render_verification_prompt(ctx: PromptContext, claims: list[EdgeClaim]) -> str:
    """Round-2 prompt: independent critique of round-1 claims."""
    if not claims:
        raise NoClaimsError("verification needs at least one claim")
    lines = [
        "You are an expert in causal inference acting as an independent reviewer.",
        f"Domain: {ctx.domain_topic}.",
        f"Dataset: {ctx.dataset_name}, {ctx.n_rows} rows and {ctx.n_cols} columns.",
        "Another expert proposed the following causal relationships:",
    ]
    for claim in claims:
        arrow = "↔" if claim.direction_confidence == BIDIRECTIONAL else "→"
        tail = f": {claim.rationale}" if claim.rationale else ""
        lines.append(f"- {claim.parent} {arrow} {claim.child}{tail}")
    lines.append(
        "Verify and critically evaluate each relationship: confirm it, reject "
        "it, or revise its direction. Then identify confounding factors "
        "outside the listed variables."
    )
    lines.append("")
    lines.append(VERDICT_FORMAT_INSTRUCTION)
    return "\n".join(lines) + "\n"


# --- response parsing ---------------------------------------------------------

@dataclass
class ParsedClaims:
    claims: list[EdgeClaim]
    diagnostics: list[str]


_ENUM_PREFIX = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s*")


def _split_arrow(text: str) -> tuple[str, str, str] | None:
    """(lhs, rhs, kind) for the first arrow in the text, else None."""
    for token, kind in (("<->", BIDIRECTIONAL), ("↔", BIDIRECTIONAL),
                        ("->", DIRECTED), ("→", DIRECTED)):
        if token in text:
            lhs, rhs = text.split(token, 1)
            return lhs.strip(), rhs.strip(), kind
    return None


def parse_claims(response: str, ctx: PromptContext, source: str = "proposer") -> ParsedClaims:
    """Extract edge claims from a round-1 response.

    Variable names are matched case-insensitively with space/underscore
    normalization. Lines that mention an arrow but do not yield a valid
    claim land in diagnostics instead of being silently dropped; exact
    duplicate claims are kept once.
    """
    lookup = ctx.variable_lookup()
    claims: list[EdgeClaim] = []
    seen: set[tuple[str, str, str]] = set()
    diagnostics: list[str] = []

    for lineno, raw_line in enumerate(response.splitlines(), start=1):
        line = _ENUM_PREFIX.sub("", raw_line).strip()
        if not line or line.upper().startswith(("VERDICT:", "CONFOUNDER:")):
            continue
        split = _split_arrow(line)
        if split is None:
            continue
        lhs, rhs, kind = split
        rationale = ""
        if "::" in rhs:
            rhs, rationale = (part.strip() for part in rhs.split("::", 1))
        parent = lookup.get(_normalize(lhs))
        child = lookup.get(_normalize(rhs))
        if parent is None or child is None:
            unknown = lhs if parent is None else rhs
            diagnostics.append(f"line {lineno}: unknown variable {unknown!r}")
            continue
        if parent == child:
            diagnostics.append(f"line {lineno}: self-dependency on {parent!r}")
            continue
        key = (parent, child, kind)
        if key in seen or (kind == BIDIRECTIONAL and (child, parent, kind) in seen):
            diagnostics.append(f"line {lineno}: duplicate claim {parent} -> {child}")
            continue
        seen.add(key)
        claims.append(EdgeClaim(parent=parent, child=child, rationale=rationale,
                                direction_confidence=kind, source=source))

    if not claims:
        raise NoClaimsFoundError("no parseable relationship lines in response")
    return ParsedClaims(claims=claims, diagnostics=diagnostics)


@dataclass
class ParsedVerdicts:
    verdicts: list[VerificationVerdict]
    diagnostics: list[str]


def _match_claim(claims: list[EdgeClaim], parent: str, child: str) -> EdgeClaim | None:
    for claim in claims:
        if (claim.parent, claim.child) == (parent, child):
            return claim
    for claim in claims:
        if (claim.parent, claim.child) == (child, parent):
            return claim
    return None


def parse_verdicts(response: str, claims: list[EdgeClaim],
                   ctx: PromptContext) -> ParsedVerdicts:
    """Extract VERDICT and CONFOUNDER lines from a round-2 response.

    Each verdict is matched to a round-1 claim by its variable pair (either
    orientation). CONFOUNDER lines attach to the verdict they follow;
    anything unmatchable goes to diagnostics.
    """
    lookup = ctx.variable_lookup()
    records: list[dict] = []  # mutable; frozen dataclasses built at the end
    diagnostics: list[str] = []
    pending_confounders: list[Confounder] = []
    matched: set[int] = set()

    for lineno, raw_line in enumerate(response.splitlines(), start=1):
        line = _ENUM_PREFIX.sub("", raw_line).strip()
        upper = line.upper()
        if upper.startswith("CONFOUNDER:"):
            body = line[len("CONFOUNDER:"):].strip()
            name, _, rationale = (s.strip() for s in body.partition("::"))
            if not name:
                diagnostics.append(f"line {lineno}: empty confounder name")
                continue
            confounder = Confounder(name=name, rationale=rationale)
            if records:
                records[-1]["confounders"].append(confounder)
            else:
                pending_confounders.append(confounder)
            continue
        if not upper.startswith("VERDICT:"):
            continue
        body = line[len("VERDICT:"):].strip()
        parts = [p.strip() for p in body.split("::")]
        split = _split_arrow(parts[0])
        if split is None or len(parts) < 2:
            diagnostics.append(f"line {lineno}: malformed verdict line")
            continue
        lhs, rhs, _ = split
        parent = lookup.get(_normalize(lhs))
        child = lookup.get(_normalize(rhs))
        if parent is None or child is None:
            unknown = lhs if parent is None else rhs
            diagnostics.append(f"line {lineno}: unknown variable {unknown!r}")
            continue
        claim = _match_claim(claims, parent, child)
        if claim is None:
            diagnostics.append(f"line {lineno}: verdict for unproposed pair "
                               f"{parent} / {child}")
            continue
        claim_idx = claims.index(claim)
        if claim_idx in matched:
            diagnostics.append(f"line {lineno}: duplicate verdict for "
                               f"{claim.parent} / {claim.child}")
            continue
        word = parts[1].lower()
        if word not in (CONFIRMED, REJECTED, REVISED):
            diagnostics.append(f"line {lineno}: unknown verdict {parts[1]!r}")
            continue
        revised: tuple[str, str] | None = None
        if word == REVISED:
            if len(parts) < 3 or _split_arrow(parts[2]) is None:
                diagnostics.append(f"line {lineno}: revised verdict without a direction")
                continue
            new_lhs, new_rhs, _ = _split_arrow(parts[2])
            new_parent = lookup.get(_normalize(new_lhs))
            new_child = lookup.get(_normalize(new_rhs))
            if new_parent is None or new_child is None or new_parent == new_child:
                diagnostics.append(f"line {lineno}: invalid revised direction")
                continue
            if {new_parent, new_child} != {claim.parent, claim.child}:
                diagnostics.append(
                    f"line {lineno}: revised direction names a different pair"
                )
                continue
            revised = (new_parent, new_child)
        matched.add(claim_idx)
        records.append({"claim": claim, "verdict": word,
                        "revised": revised, "confounders": []})

    if pending_confounders:
        if records:
            records[0]["confounders"] = pending_confounders + records[0]["confounders"]
        else:
            diagnostics.extend(
                f"confounder {c.name!r} arrived before any verdict" for c in pending_confounders
            )

    for idx, claim in enumerate(claims):
        if idx not in matched:
            diagnostics.append(
                f"no verdict for claim {claim.parent} -> {claim.child}; dropped"
            )

    verdicts = [
        VerificationVerdict(
            claim=r["claim"], verdict=r["verdict"],
            revised_direction=r["revised"], confounders=tuple(r["confounders"]),
        )
        for r in records
    ]
    return ParsedVerdicts(verdicts=verdicts, diagnostics=diagnostics)


# --- bidirectional resolution and DAG assembly --------------------------------

# ascending trust: resolved bidirectionals < revised < confirmed directed
_CONFIDENCE = {"resolved": 0, REVISED: 1, CONFIRMED: 2}


def _sem_direction(pair: tuple[str, str], data: DataTable) -> tuple[str, str]:
    """Direction whose child-on-parent simple regression has the larger
    |slope|; ties go to the lexicographically smaller parent."""
    from .validation import sem_validate  # local import to avoid a cycle

    a, b = pair
    slopes = {}
    for parent, child in ((a, b), (b, a)):
        dag = Dag([parent, child])
        dag.add_edge(parent, child)
        report = sem_validate(data, dag)
        slopes[(parent, child)] = abs(report.entries[0].estimate)
    if slopes[(a, b)] >= slopes[(b, a)]:
        return (a, b)
    return (b, a)


def resolve_bidirectional(
    verdicts: list[VerificationVerdict],
    policy: str = POLICY_VERIFIER,
    data: DataTable | None = None,
    manual_map: dict[tuple[str, str], tuple[str, str]] | None = None,
    nodes: list[str] | None = None,
) -> tuple[list[Resolution], Dag]:
    """Turn verdict-filtered claims into an acyclic DAG.

    Directed claims pass through (confirmed keeps the claimed direction,
    revised adopts the new one, rejected drops). Every bidirectional claim
    gets exactly one resolution record: the verifier's revised direction
    when present, otherwise the policy decides. Should the combined edge
    set contain a cycle, edges are retried in ascending-confidence order
    and flipped, or dropped if flipping also cycles, with each repair
    logged as its own resolution.
    """
    if policy not in (POLICY_VERIFIER, POLICY_SEM, POLICY_MANUAL):
        raise ValueError(f"unknown resolution policy {policy!r}")

    resolutions: list[Resolution] = []
    # (parent, child, confidence rank, claim order) candidates
    candidates: list[tuple[str, str, int, int]] = []

    for idx, v in enumerate(verdicts):
        claim = v.claim
        if v.verdict == REJECTED:
            if claim.direction_confidence == BIDIRECTIONAL:
                resolutions.append(Resolution(claim.pair, None, "rejected"))
            continue
        if claim.direction_confidence == DIRECTED:
            if v.verdict == CONFIRMED:
                candidates.append((claim.parent, claim.child, _CONFIDENCE[CONFIRMED], idx))
            else:
                candidates.append((*v.revised_direction, _CONFIDENCE[REVISED], idx))
            continue
        # bidirectional claim needing one direction
        if policy == POLICY_VERIFIER:
            if v.revised_direction is not None:
                direction, rule = v.revised_direction, POLICY_VERIFIER
            elif data is not None:
                # documented fallback when the verifier stays neutral
                direction, rule = _sem_direction(claim.pair, data), POLICY_SEM
            else:
                raise UnresolvedPairError(
                    f"{claim.pair}: verifier gave no direction and no fallback is available"
                )
        elif policy == POLICY_SEM:
            if data is None:
                raise UnresolvedPairError(
                    f"{claim.pair}: sem_estimate policy needs a data table"
                )
            direction, rule = _sem_direction(claim.pair, data), POLICY_SEM
        else:
            direction = (manual_map or {}).get(claim.pair)
            if direction is None:
                raise UnresolvedPairError(f"manual map has no entry for {claim.pair}")
            rule = POLICY_MANUAL
        resolutions.append(Resolution(claim.pair, direction, rule))
        candidates.append((*direction, _CONFIDENCE["resolved"], idx))

    node_list = list(nodes) if nodes is not None else sorted(
        {n for p, c, _, _ in candidates for n in (p, c)}
    )
    dag = Dag(node_list)

    # most trusted first, so a cycle is charged to the least trusted edge
    for parent, child, _, _ in sorted(candidates, key=lambda c: (-c[2], c[3])):
        try:
            dag.add_edge(parent, child)
        except CycleError:
            pair = tuple(sorted((parent, child)))
            try:
                dag.add_edge(child, parent)
            except CycleError:
                resolutions.append(Resolution(pair, None, "cycle_repair_drop"))
            else:
                resolutions.append(Resolution(pair, (child, parent), "cycle_repair_flip"))
    return resolutions, dag


def run_protocol(
    ctx: PromptContext,
    proposer: Transport,
    verifier: Transport,
    policy: str = POLICY_VERIFIER,
    data: DataTable | None = None,
    manual_map: dict[tuple[str, str], tuple[str, str]] | None = None,
) -> ElicitationTranscript:
    """Run the full two-round protocol and return its transcript.

    Transport and parse failures carry the partial transcript on the
    exception's .transcript attribute so the exchange so far is never lost.
    """
    transcript = ElicitationTranscript(context=ctx)
    transcript.round1_prompt = render_proposal_prompt(ctx)

    try:
        transcript.round1_raw = proposer.complete(transcript.round1_prompt)
    except TransportError as exc:
        err = TransportError(str(exc), round=1, cause=exc.cause or exc)
        err.transcript = transcript
        raise err from exc

    try:
        parsed = parse_claims(transcript.round1_raw, ctx, source="proposer")
    except NoClaimsFoundError as exc:
        err = ParseFailureError(str(exc), round=1)
        err.transcript = transcript
        raise err from exc
    transcript.round1_claims = parsed.claims
    transcript.round1_diagnostics = parsed.diagnostics
    transcript.proposed_count = len(parsed.claims)

    transcript.round2_prompt = render_verification_prompt(ctx, parsed.claims)
    try:
        transcript.round2_raw = verifier.complete(transcript.round2_prompt)
    except TransportError as exc:
        err = TransportError(str(exc), round=2, cause=exc.cause or exc)
        err.transcript = transcript
        raise err from exc

    parsed_v = parse_verdicts(transcript.round2_raw, parsed.claims, ctx)
    if not parsed_v.verdicts:
        err = ParseFailureError("no parseable verdict lines in response", round=2)
        err.transcript = transcript
        raise err
    transcript.verdicts = parsed_v.verdicts
    transcript.round2_diagnostics = parsed_v.diagnostics
    transcript.confirmed_count = sum(1 for v in parsed_v.verdicts if v.verdict == CONFIRMED)

    resolutions, dag = resolve_bidirectional(
        parsed_v.verdicts, policy=policy, data=data,
        manual_map=manual_map, nodes=ctx.variables,
    )
    transcript.resolutions = resolutions
    transcript.final_dag = dag
    return transcript


def transcript_structure(transcript: ElicitationTranscript, name: str) -> StructureFile:
    """Package the transcript's final DAG for saving."""
    if transcript.final_dag is None:
        raise ValueError("transcript has no final DAG")
    return StructureFile.from_dag(transcript.final_dag, name=name, provenance="llm")
